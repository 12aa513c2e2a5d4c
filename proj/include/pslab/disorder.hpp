#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pslab/lattice.hpp"
#include "pslab/stats.hpp"

namespace pslab {

enum class DistKind { gaussian, bounded, bernoulli };
// Law used for the bounded kind. two_point is ±ε; extremal is the maximiser of the
// exponential moment at variance ε² (values −ε² and 1).
enum class BoundedLaw { two_point, extremal };

struct DistributionSpec {
    DistKind kind = DistKind::gaussian;
    double epsilon = 0.0;
    double support_bound = 1.0;
    BoundedLaw law = BoundedLaw::two_point;
};

using SiteMap = std::unordered_map<Site, double, SiteHash>;

struct QuenchedConfig {
    int d = 0;
    std::uint64_t seed = 0;
    Region covered;
    std::vector<SiteMap> values;  // one map per beta

    int n_beta() const { return static_cast<int>(values.size()); }
    bool covers(int beta, const Site& s) const;
    double at(int beta, const Site& s) const;  // PaddingError if not sampled
    void set(int beta, const Site& s, double v) { values[beta][s] = v; }
    QuenchedConfig shifted(const Site& u) const;
};

// One coordinate of the quenched draw; independent of sampling order.
double omega_value(const DistributionSpec& spec, std::uint64_t seed, int beta, const Site& s);

QuenchedConfig sample_omega(const DistributionSpec& spec, int n_beta, const Region& reg, int padding,
                            std::uint64_t seed);
QuenchedConfig zero_omega(int d, int n_beta, const Region& reg, int padding);

struct RandomField {
    int d = 0;
    int n_alpha = 0;
    bool zero = true;
    std::vector<SiteMap> values;  // one map per alpha, empty when zero

    static RandomField zeros(int d, int n_alpha);
    double at(int alpha, const Site& s) const;  // PaddingError when missing
    double get_or_zero(int alpha, const Site& s) const;
    void set(int alpha, const Site& s, double v);
    RandomField shifted(const Site& u) const;
};

double nu_of_epsilon(const DistributionSpec& spec);

struct ThreePointMax {
    double value;
    double x1, x2, p1, p2;
};
ThreePointMax three_point_max(double lambda, double sigma);

enum class Statistic { sum, abs_sum, l2_norm };
enum class TailBound { mcdiarmid, gaussian, subgaussian_nu };

const char* statistic_name(Statistic f);
const char* tail_bound_name(TailBound b);
// Per-coordinate constants: bounded difference for McDiarmid, Lipschitz otherwise.
double statistic_constant(Statistic f, TailBound b, const DistributionSpec& spec);
double evaluate_statistic(Statistic f, const std::vector<double>& w);
double tail_bound(TailBound b, double lambda, std::size_t n, double D, const DistributionSpec& spec);

struct TailRow {
    double lambda;
    std::size_t exceed;
    std::size_t trials;
    double empirical;
    Interval ci;
    double bound;
};

std::vector<TailRow> tail_probe(Statistic f, TailBound b, const DistributionSpec& spec, std::size_t n,
                                const std::vector<double>& lambda_grid, std::size_t trials, std::uint64_t seed,
                                int threads = 1);

struct VarianceCheck {
    double var_x;
    double var_fx;
};
VarianceCheck lipschitz_variance_check(const DistributionSpec& spec, const std::function<double(double)>& F,
                                       std::size_t trials, std::uint64_t seed);

}  // namespace pslab
