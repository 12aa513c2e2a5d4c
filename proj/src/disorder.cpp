#include "pslab/disorder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "pslab/errors.hpp"
#include "pslab/rng.hpp"

namespace pslab {

bool QuenchedConfig::covers(int beta, const Site& s) const {
    return beta >= 0 && beta < n_beta() && values[beta].count(s) > 0;
}

double QuenchedConfig::at(int beta, const Site& s) const {
    if (beta < 0 || beta >= n_beta()) throw ParameterError("quenched index out of range");
    auto it = values[beta].find(s);
    if (it == values[beta].end()) throw PaddingError("quenched parameter not sampled at the requested site");
    return it->second;
}

QuenchedConfig QuenchedConfig::shifted(const Site& u) const {
    QuenchedConfig out{d, seed, covered.translated(u), {}};
    out.values.resize(values.size());
    for (std::size_t b = 0; b < values.size(); ++b)
        for (const auto& [s, v] : values[b]) out.values[b][s + u] = v;
    return out;
}

double omega_value(const DistributionSpec& spec, std::uint64_t seed, int beta, const Site& s) {
    const double eps = spec.epsilon;
    switch (spec.kind) {
    case DistKind::gaussian:
        return eps == 0.0 ? 0.0 : eps * keyed_normal(seed, beta, s);
    case DistKind::bounded: {
        if (eps == 0.0) return 0.0;
        double u = keyed_uniform(seed, beta, s);
        if (spec.law == BoundedLaw::two_point) return u < 0.5 ? -eps : eps;
        double s2 = eps * eps;
        return u < 1.0 / (1.0 + s2) ? -s2 * spec.support_bound : spec.support_bound;
    }
    case DistKind::bernoulli:
        return keyed_uniform(seed, beta, s) < eps * eps ? 1.0 : 0.0;
    }
    return 0.0;
}

static void check_spec(const DistributionSpec& spec) {
    if (!(spec.epsilon >= 0.0) || !std::isfinite(spec.epsilon)) throw ParameterError("epsilon must be finite and >= 0");
    if (spec.kind == DistKind::bounded && spec.epsilon > spec.support_bound)
        throw ParameterError("bounded law needs epsilon <= support bound");
    if (spec.kind == DistKind::bernoulli && spec.epsilon > 1.0) throw ParameterError("bernoulli law needs epsilon <= 1");
}

QuenchedConfig sample_omega(const DistributionSpec& spec, int n_beta, const Region& reg, int padding,
                            std::uint64_t seed) {
    check_spec(spec);
    if (padding < 0) throw ParameterError("padding must be >= 0");
    QuenchedConfig q{reg.dim(), seed, dilate(reg, padding), {}};
    q.values.resize(n_beta);
    for (int b = 0; b < n_beta; ++b) {
        q.values[b].reserve(q.covered.size());
        for (const auto& s : q.covered) q.values[b][s] = omega_value(spec, seed, b, s);
    }
    return q;
}

QuenchedConfig zero_omega(int d, int n_beta, const Region& reg, int padding) {
    QuenchedConfig q{d, 0, dilate(reg, padding), {}};
    q.values.resize(n_beta);
    for (int b = 0; b < n_beta; ++b)
        for (const auto& s : q.covered) q.values[b][s] = 0.0;
    return q;
}

RandomField RandomField::zeros(int d, int n_alpha) { return RandomField{d, n_alpha, true, {}}; }

double RandomField::at(int alpha, const Site& s) const {
    if (zero) return 0.0;
    auto it = values[alpha].find(s);
    if (it == values[alpha].end()) throw PaddingError("random field not available at the requested site");
    return it->second;
}

double RandomField::get_or_zero(int alpha, const Site& s) const {
    if (zero) return 0.0;
    auto it = values[alpha].find(s);
    return it == values[alpha].end() ? 0.0 : it->second;
}

void RandomField::set(int alpha, const Site& s, double v) {
    if (zero) {
        zero = false;
        values.assign(n_alpha, {});
    }
    values[alpha][s] = v;
}

RandomField RandomField::shifted(const Site& u) const {
    RandomField out{d, n_alpha, zero, {}};
    out.values.resize(values.size());
    for (std::size_t a = 0; a < values.size(); ++a)
        for (const auto& [s, v] : values[a]) out.values[a][s + u] = v;
    return out;
}

double nu_of_epsilon(const DistributionSpec& spec) {
    const double e = spec.epsilon;
    if (spec.kind == DistKind::gaussian) return e * e;
    if (!(e > 0.0 && e < 1.0)) throw ParameterError("nu(epsilon) for the bounded kind needs 0 < epsilon < 1");
    return std::max(e * e, std::min(1.0, 1.0 / std::abs(2.0 * std::log(e))));
}

ThreePointMax three_point_max(double lambda, double sigma) {
    if (sigma < 0.0 || sigma > 1.0) throw ParameterError("three_point_max: sigma must lie in [0, 1]");
    if (lambda < 0.0) throw ParameterError("three_point_max: lambda must be >= 0");
    const double s2 = sigma * sigma;
    if (s2 == 0.0) return {1.0, 0.0, 0.0, 1.0, 0.0};
    double v = (std::exp(-lambda * s2) + s2 * std::exp(lambda)) / (1.0 + s2);
    return {v, -s2, 1.0, 1.0 / (1.0 + s2), s2 / (1.0 + s2)};
}

const char* statistic_name(Statistic f) {
    switch (f) {
    case Statistic::sum: return "sum";
    case Statistic::abs_sum: return "abs_sum";
    case Statistic::l2_norm: return "l2_norm";
    }
    return "?";
}

const char* tail_bound_name(TailBound b) {
    switch (b) {
    case TailBound::mcdiarmid: return "mcdiarmid";
    case TailBound::gaussian: return "gaussian";
    case TailBound::subgaussian_nu: return "subgaussian_nu";
    }
    return "?";
}

double statistic_constant(Statistic f, TailBound b, const DistributionSpec& spec) {
    if (b != TailBound::mcdiarmid) return 1.0;
    const double c = spec.support_bound;
    switch (f) {
    case Statistic::sum: return 2.0 * c;
    case Statistic::abs_sum: return c;
    case Statistic::l2_norm: return 2.0 * c;
    }
    return 2.0 * c;
}

double evaluate_statistic(Statistic f, const std::vector<double>& w) {
    double acc = 0;
    switch (f) {
    case Statistic::sum:
        for (double x : w) acc += x;
        return acc;
    case Statistic::abs_sum:
        for (double x : w) acc += std::abs(x);
        return acc;
    case Statistic::l2_norm:
        for (double x : w) acc += x * x;
        return std::sqrt(acc);
    }
    return acc;
}

double tail_bound(TailBound b, double lambda, std::size_t n, double D, const DistributionSpec& spec) {
    const double nn = static_cast<double>(n), l2 = lambda * lambda;
    double v = 0;
    switch (b) {
    case TailBound::mcdiarmid:
        v = 2.0 * std::exp(-2.0 * l2 / (nn * D * D));
        break;
    case TailBound::gaussian: {
        double e2 = spec.epsilon * spec.epsilon;
        v = e2 == 0.0 ? (lambda > 0 ? 0.0 : 2.0) : 2.0 * std::exp(-l2 / (2.0 * nn * D * D * e2));
        break;
    }
    case TailBound::subgaussian_nu:
        v = 2.0 * std::exp(-l2 / (2.0 * nu_of_epsilon(spec) * nn * D * D));
        break;
    }
    return std::min(v, 2.0);
}

std::vector<TailRow> tail_probe(Statistic f, TailBound b, const DistributionSpec& spec, std::size_t n,
                                const std::vector<double>& lambda_grid, std::size_t trials, std::uint64_t seed,
                                int threads) {
    if (trials < 100) throw PowerError("tail_probe needs at least 100 trials");
    check_spec(spec);
    std::vector<double> values(trials);
    threads = std::max(1, threads);
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            std::vector<double> omega(n);
            for (std::size_t t = w; t < trials; t += threads) {
                std::uint64_t sd = derive_seed(seed, t);
                for (std::size_t i = 0; i < n; ++i) omega[i] = omega_value(spec, sd, 0, Site{static_cast<int>(i)});
                values[t] = evaluate_statistic(f, omega);
            }
        });
    for (auto& th : pool) th.join();
    const double m = mean(values);
    const double D = statistic_constant(f, b, spec);
    std::vector<TailRow> rows;
    for (double lam : lambda_grid) {
        std::size_t k = 0;
        for (double v : values)
            if (std::abs(v - m) >= lam) ++k;
        rows.push_back({lam, k, trials, static_cast<double>(k) / static_cast<double>(trials), wilson(k, trials),
                        tail_bound(b, lam, n, D, spec)});
    }
    return rows;
}

VarianceCheck lipschitz_variance_check(const DistributionSpec& spec, const std::function<double(double)>& F,
                                       std::size_t trials, std::uint64_t seed) {
    check_spec(spec);
    std::vector<double> xs(trials), fx(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        xs[t] = omega_value(spec, seed, 0, Site{static_cast<int>(t % 30000), static_cast<int>(t / 30000)});
        fx[t] = F(xs[t]);
    }
    return {variance(xs), variance(fx)};
}

}  // namespace pslab
