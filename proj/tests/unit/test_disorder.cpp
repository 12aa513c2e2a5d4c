#include <doctest.h>

#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "pslab/disorder.hpp"
#include "pslab/errors.hpp"

using namespace pslab;

namespace {

double two_point_mgf(double lambda, double a, double b) {
    // law on {a, b}, a < 0 < b, mean zero
    return (b * std::exp(lambda * a) - a * std::exp(lambda * b)) / (b - a);
}

// Best two-point law with |X| <= 1, mean 0, E X^2 <= s2: the variance constraint binds,
// so search the upper atom b and refine with Brent.
double two_point_search(double lambda, double sigma) {
    const double s2 = sigma * sigma;
    if (s2 == 0.0) return 1.0;
    auto f = [&](double b) {
        double a = -std::min(1.0, s2 / b);
        return -two_point_mgf(lambda, a, b);
    };
    double best_b = 1.0, best = f(1.0);
    const int G = 400;
    for (int i = 1; i <= G; ++i) {
        double b = static_cast<double>(i) / G;
        if (f(b) < best) best = f(b), best_b = b;
    }
    double lo = std::max(1e-9, best_b - 1.0 / G), hi = std::min(1.0, best_b + 1.0 / G);
    auto r = boost::math::tools::brent_find_minima(f, lo, hi, 50);
    return std::max(-best, -r.second);
}

}  // namespace

TEST_CASE("omega sampling is deterministic and degenerate at zero") {
    auto reg = Region::cube(2, 4);
    DistributionSpec g{DistKind::gaussian, 0.0};
    auto q0 = sample_omega(g, 2, reg, 1, 5);
    for (const auto& s : q0.covered) CHECK(q0.at(1, s) == 0.0);
    CHECK(q0.covered.size() == 36);
    g.epsilon = 0.3;
    auto a = sample_omega(g, 2, reg, 1, 7), b = sample_omega(g, 2, reg, 1, 7), c = sample_omega(g, 2, reg, 1, 8);
    bool differ = false;
    for (const auto& s : reg) {
        CHECK(a.at(0, s) == b.at(0, s));
        differ |= a.at(0, s) != c.at(0, s);
        differ |= a.at(0, s) != a.at(1, s);
    }
    CHECK(differ);
    CHECK_THROWS_AS(a.at(0, Site{10, 10}), PaddingError);
}

TEST_CASE("omega is keyed by site, not draw order") {
    DistributionSpec g{DistKind::gaussian, 0.5};
    auto big = sample_omega(g, 1, Region::cube(2, 6), 0, 11);
    auto small = sample_omega(g, 1, Region::cube(2, 2, Site{3, 3}), 0, 11);
    for (const auto& s : small.covered) CHECK(small.at(0, s) == big.at(0, s));
}

TEST_CASE("gaussian sample variance") {
    DistributionSpec g{DistKind::gaussian, 0.1};
    auto q = sample_omega(g, 1, Region::box(2, Site{}, {100, 1000, 0, 0}), 0, 3);
    std::vector<double> xs;
    for (const auto& [s, v] : q.values[0]) xs.push_back(v);
    const double n = static_cast<double>(xs.size());
    // sd of the sample variance of a normal is sigma^2 sqrt(2/(n-1))
    CHECK(std::abs(variance(xs) - 0.01) < 3 * 0.01 * std::sqrt(2.0 / (n - 1)));
    CHECK(std::abs(mean(xs)) < 3 * 0.1 / std::sqrt(n));
}

TEST_CASE("bounded laws respect support and moments") {
    DistributionSpec b{DistKind::bounded, 0.2};
    auto q = sample_omega(b, 1, Region::cube(2, 100), 0, 9);
    std::vector<double> xs;
    for (const auto& [s, v] : q.values[0]) {
        CHECK(std::abs(std::abs(v) - 0.2) < 1e-15);
        xs.push_back(v);
    }
    CHECK(std::abs(mean(xs)) < 3 * 0.2 / 100.0);
    b.law = BoundedLaw::extremal;
    auto q2 = sample_omega(b, 1, Region::cube(2, 200), 0, 9);
    xs.clear();
    for (const auto& [s, v] : q2.values[0]) {
        CHECK(std::abs(v) <= 1.0);
        xs.push_back(v);
    }
    CHECK(std::abs(mean(xs)) < 3 * 0.2 / 200.0);
}

TEST_CASE("nu of epsilon") {
    CHECK(nu_of_epsilon({DistKind::gaussian, 0.1}) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(nu_of_epsilon({DistKind::bounded, std::exp(-10.0)}) == doctest::Approx(0.05).epsilon(1e-14));
    double prev = 2.0;
    for (double e : {0.9, 0.5, 0.1, 1e-2, 1e-4, 1e-8, 1e-16}) {
        double v = nu_of_epsilon({DistKind::bounded, e});
        CHECK(v < prev);
        CHECK(v >= e * e);
        CHECK(v <= 1.0);
        prev = v;
    }
    CHECK_THROWS_AS(nu_of_epsilon({DistKind::bounded, 1.0}), ParameterError);
}

TEST_CASE("three point maximiser: closed form values") {
    CHECK(three_point_max(0.0, 0.7).value == doctest::Approx(1.0));
    auto z = three_point_max(2.0, 0.0);
    CHECK(z.value == 1.0);
    CHECK(z.x1 == 0.0);
    CHECK(three_point_max(1.0, 1.0).value == doctest::Approx(std::cosh(1.0)).epsilon(1e-14));
    auto m = three_point_max(1.3, 0.4);
    CHECK(m.p1 * m.x1 + m.p2 * m.x2 == doctest::Approx(0.0).scale(1));
    CHECK(m.p1 * m.x1 * m.x1 + m.p2 * m.x2 * m.x2 == doctest::Approx(0.16));
    CHECK_THROWS_AS(three_point_max(1.0, 1.5), ParameterError);
}

TEST_CASE("three point maximiser agrees with a constrained search") {
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            double lam = 0.25 * i, sig = 0.05 * (j + 1);
            CHECK(std::abs(three_point_max(lam, sig).value - two_point_search(lam, sig)) < 1e-6);
        }
}

TEST_CASE("three point maximiser dominates random feasible laws") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> U(-1.0, 1.0), P(0.0, 1.0);
    int tested = 0;
    while (tested < 10000) {
        double x[3] = {U(rng), U(rng), U(rng)};
        std::sort(x, x + 3);
        if (!(x[0] < 0 && x[2] > 0)) continue;
        // choose p2, solve p1, p3 from normalisation and zero mean
        double p2 = P(rng);
        double rest = 1 - p2, m = -p2 * x[1];
        double p3 = (m - rest * x[0]) / (x[2] - x[0]);
        double p1 = rest - p3;
        if (p1 < 0 || p3 < 0) continue;
        double var = p1 * x[0] * x[0] + p2 * x[1] * x[1] + p3 * x[2] * x[2];
        double sigma = std::sqrt(var) * (1.0 + 0.3 * P(rng));
        if (sigma > 1.0) continue;
        double lam = 4.0 * P(rng);
        double mgf = p1 * std::exp(lam * x[0]) + p2 * std::exp(lam * x[1]) + p3 * std::exp(lam * x[2]);
        CHECK(mgf <= three_point_max(lam, sigma).value * (1 + 1e-12));
        ++tested;
    }
}

TEST_CASE("subgaussian proxy bounds the extremal law") {
    for (double e : {0.3, 0.1, 0.01, 1e-3, 1e-6}) {
        double nu = nu_of_epsilon({DistKind::bounded, e});
        double top = 4.0 * std::abs(std::log(e));
        for (int i = 0; i <= 400; ++i) {
            double lam = top * i / 400.0;
            CHECK(three_point_max(lam, e).value <= std::exp(nu * lam * lam / 2.0) * (1 + 1e-12));
        }
    }
}

TEST_CASE("tail probes") {
    DistributionSpec g{DistKind::gaussian, 1.0};
    auto rows = tail_probe(Statistic::sum, TailBound::gaussian, g, 100, {0.0, 10.0, 20.0, 30.0}, 4000, 1, 2);
    CHECK(rows[0].empirical == 1.0);
    CHECK(rows[0].bound >= 1.0);
    for (const auto& r : rows) CHECK(r.empirical <= r.bound + 3 * r.ci.half_width());
    CHECK_THROWS_AS(tail_probe(Statistic::sum, TailBound::gaussian, g, 10, {1.0}, 50, 1), PowerError);

    DistributionSpec b{DistKind::bounded, 0.01};
    double lam = 0.5 * std::sqrt(100.0);
    double dm = statistic_constant(Statistic::sum, TailBound::mcdiarmid, b);
    CHECK(tail_bound(TailBound::subgaussian_nu, lam, 100, 1.0, b) < tail_bound(TailBound::mcdiarmid, lam, 100, dm, b));
}

TEST_CASE("threaded tail probe matches serial") {
    DistributionSpec g{DistKind::bounded, 0.3};
    auto a = tail_probe(Statistic::l2_norm, TailBound::mcdiarmid, g, 50, {0.1, 0.5}, 500, 9, 1);
    auto b = tail_probe(Statistic::l2_norm, TailBound::mcdiarmid, g, 50, {0.1, 0.5}, 500, 9, 3);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].exceed == b[i].exceed);
}

TEST_CASE("lipschitz variance check") {
    DistributionSpec g{DistKind::gaussian, 1.0};
    auto id = lipschitz_variance_check(g, [](double x) { return x; }, 100000, 3);
    CHECK(id.var_fx == doctest::Approx(id.var_x));
    auto ab = lipschitz_variance_check(g, [](double x) { return std::abs(x); }, 100000, 3);
    CHECK(std::abs(ab.var_fx - (1 - 2 / std::numbers::pi)) < 0.01);
    CHECK(ab.var_fx < ab.var_x);
    auto c = lipschitz_variance_check(g, [](double) { return 2.0; }, 1000, 3);
    CHECK(c.var_fx == 0.0);
}
