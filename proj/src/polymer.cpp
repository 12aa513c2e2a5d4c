#include "pslab/polymer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "pslab/errors.hpp"

namespace pslab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Streaming log-sum-exp with Kahan-compensated mantissa sum.
class LogAccumulator {
public:
    void add(double x) {
        if (x == kNegInf) return;
        if (x > max_) {
            double scale = std::exp(max_ - x);
            sum_ *= scale;
            comp_ *= scale;
            max_ = x;
        }
        double y = std::exp(x - max_) - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_ > 0 ? max_ + std::log(sum_) : kNegInf; }

private:
    double max_ = kNegInf;
    double sum_ = 0.0, comp_ = 0.0;
};

}  // namespace

Region free_sites(const Region& reg, PFVariant variant) {
    return erode(reg, variant == PFVariant::standard ? 2 : 3);
}

void for_each_configuration(const Model& m, const RandomField& eta, const Region& reg, int k, PFVariant variant,
                            const std::function<void(const Configuration&, double)>& fn, std::size_t budget) {
    const int g = m.ground(k);
    Region free = free_sites(reg, variant);
    const std::size_t nf = free.size();
    double states = std::pow(static_cast<double>(m.n_values()), static_cast<double>(nf));
    if (states > static_cast<double>(budget))
        throw BudgetError("partition function over " + std::to_string(nf) + " free sites exceeds the state budget (" +
                          std::to_string(budget) + ")");
    Configuration bc(g);
    Configuration x(g);
    for (const auto& s : free) x.set(s, 0);
    const double base = hamiltonian(m, eta, reg, bc, Configuration(g));
    // only sites within interaction range of a free site change their local energy
    Region touched = intersect(dilate(free, interaction_range(m)), reg);
    BoundaryView view(reg, x, bc);
    ConfigView ground(bc);
    double touched_base = 0.0;
    for (const auto& s : touched) touched_base += m.local_energy(s, ground, eta);
    const double rest = base - touched_base;

    std::vector<int> digit(nf, 0);
    while (true) {
        double e = rest;
        for (const auto& s : touched) {
            e += m.local_energy(s, view, eta);
            if (e == kInf) break;
        }
        fn(x, e);
        std::size_t j = 0;
        while (j < nf && ++digit[j] == m.n_values()) {
            digit[j] = 0;
            x.set(free.sites()[j], 0);
            ++j;
        }
        if (j == nf) break;
        x.set(free.sites()[j], digit[j]);
    }
}

PartitionValue partition_function(const Model& m, const RandomField& eta, const Region& reg, int k, double T,
                                  PFVariant variant, std::size_t budget) {
    if (!(T > 0)) throw ParameterError("partition_function: temperature must be positive");
    LogAccumulator acc;
    for_each_configuration(
        m, eta, reg, k, variant, [&](const Configuration&, double e) { acc.add(-e / T); }, budget);
    return {acc.value(), variant, k, T};
}

double log_ground_factor(const Model& m, const RandomField& eta, const Region& reg, int k, double T) {
    return (m.ground_energy() * static_cast<double>(reg.size()) + field_shift(m, eta, reg, m.ground(k))) / T;
}

std::vector<Contour> polymer_family(const Model& m, const Region& reg, int k, PFVariant variant,
                                    std::size_t budget) {
    std::set<Contour> found;
    RandomField zero = RandomField::zeros(m.dim(), m.n_terms());
    for_each_configuration(
        m, zero, reg, k, variant,
        [&](const Configuration& x, double) {
            for (auto& c : extract_contours(m, x))
                if (c.label == k) found.insert(std::move(c));
        },
        budget);
    return {found.begin(), found.end()};
}

namespace {

double log_xi(const Model& m, const RandomField& eta, const Region& reg, int k, double T, PFVariant variant,
              std::size_t budget);

double log_weight(const Model& m, const RandomField& eta, const Contour& c, int k0, double T, WeightMethod method,
                  std::size_t budget) {
    if (c.label != k0) throw DomainError("contour label does not match the boundary ground state");
    double lw = -excitation_energy(m, c, eta) / T;
    for (const auto& h : c.holes) {
        if (method == WeightMethod::direct) {
            lw += partition_function(m, eta, h.region, h.k, T, PFVariant::tilde, budget).log_value;
            lw -= partition_function(m, eta, h.region, k0, T, PFVariant::standard, budget).log_value;
        } else {
            lw += log_xi(m, eta, h.region, h.k, T, PFVariant::tilde, budget) -
                  log_ground_factor(m, eta, h.region, h.k, T);
            lw -= log_xi(m, eta, h.region, k0, T, PFVariant::standard, budget) -
                  log_ground_factor(m, eta, h.region, k0, T);
        }
    }
    return lw;
}

double log_xi(const Model& m, const RandomField& eta, const Region& reg, int k, double T, PFVariant variant,
              std::size_t budget) {
    auto family = polymer_family(m, reg, k, variant, budget);
    std::vector<double> lw;
    lw.reserve(family.size());
    for (const auto& c : family) lw.push_back(log_weight(m, eta, c, k, T, WeightMethod::recursive, budget));
    return log_polymer_sum(family, lw, budget);
}

}  // namespace

ContourWeight weight(const Model& m, const RandomField& eta, const Contour& c, int k0, double T, WeightMethod method,
                     std::size_t budget) {
    if (!(T > 0)) throw ParameterError("weight: temperature must be positive");
    double lw = log_weight(m, eta, c, k0, T, method, budget);
    return {std::exp(lw), lw};
}

double log_polymer_sum(const std::vector<Contour>& family, const std::vector<double>& log_w, std::size_t budget) {
    const std::size_t n = family.size();
    if (log_w.size() != n) throw ParameterError("log_polymer_sum: one weight per contour required");
    std::vector<std::vector<char>> ok(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) ok[i][j] = ok[j][i] = compatible(family[i], family[j]);
    LogAccumulator acc;
    std::vector<std::size_t> chosen;
    std::size_t collections = 0;
    std::function<void(std::size_t, double)> rec = [&](std::size_t start, double lw) {
        if (++collections > budget) throw BudgetError("polymer sum exceeds the collection budget");
        acc.add(lw);
        for (std::size_t i = start; i < n; ++i) {
            bool fits = std::all_of(chosen.begin(), chosen.end(), [&](std::size_t j) { return ok[i][j]; });
            if (!fits) continue;
            chosen.push_back(i);
            rec(i + 1, lw + log_w[i]);
            chosen.pop_back();
        }
    };
    rec(0, 0.0);
    return acc.value();
}

PolymerIdentity polymer_identity_check(const Model& m, const RandomField& eta, const Region& reg, int k, double T,
                                       std::size_t budget) {
    PolymerIdentity r;
    r.S = field_shift(m, eta, reg, m.ground(k));
    r.log_lhs = log_ground_factor(m, eta, reg, k, T) +
                partition_function(m, eta, reg, k, T, PFVariant::standard, budget).log_value;
    auto family = polymer_family(m, reg, k, PFVariant::standard, budget);
    std::vector<double> lw;
    for (const auto& c : family) lw.push_back(log_weight(m, eta, c, k, T, WeightMethod::recursive, budget));
    r.contours = family.size();
    r.log_rhs = log_polymer_sum(family, lw, budget);
    r.max_rel_err = std::abs(std::expm1(r.log_rhs - r.log_lhs));
    return r;
}

double contour_probability(const Contour& c0, const Model& m, const RandomField& eta, const Region& reg, int k,
                           double T, ProbabilityMethod method, std::size_t budget) {
    if (!(T > 0)) throw ParameterError("contour_probability: temperature must be positive");
    if (method == ProbabilityMethod::direct) {
        LogAccumulator all, hit;
        for_each_configuration(
            m, eta, reg, k, PFVariant::standard,
            [&](const Configuration& x, double e) {
                all.add(-e / T);
                if (e == kInf) return;
                auto ext = external_contours(extract_contours(m, x));
                if (std::find(ext.begin(), ext.end(), c0) != ext.end()) hit.add(-e / T);
            },
            budget);
        return std::exp(hit.value() - all.value());
    }
    auto family = polymer_family(m, reg, k, PFVariant::standard, budget);
    if (std::find(family.begin(), family.end(), c0) == family.end()) return 0.0;
    std::vector<Contour> rest;
    std::vector<double> lw_all, lw_rest;
    for (const auto& c : family) {
        double lw = log_weight(m, eta, c, k, T, WeightMethod::recursive, budget);
        lw_all.push_back(lw);
        if (c == c0 || !compatible(c, c0) || nested_in(c0, c)) continue;
        rest.push_back(c);
        lw_rest.push_back(lw);
    }
    double lw0 = log_weight(m, eta, c0, k, T, WeightMethod::recursive, budget);
    return std::exp(lw0 + log_polymer_sum(rest, lw_rest, budget) - log_polymer_sum(family, lw_all, budget));
}

}  // namespace pslab
