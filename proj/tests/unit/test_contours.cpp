#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "pslab/contours.hpp"
#include "pslab/errors.hpp"

using namespace pslab;

namespace {

ModelPtr rfim2() { return make_model({ModelKind::rfim, 2, 1.0}); }

Configuration flips(const std::vector<Site>& sites, int bg = 0) {
    Configuration x(bg);
    for (const auto& s : sites) x.set(s, 1 - bg);
    return x;
}

// Translation-normalised key: shift so the smallest support site is the origin.
std::string class_key(const Contour& c) { return c.translated(-c.support.sites().front()).canonical(); }

}  // namespace

TEST_CASE("extraction basics") {
    auto m = rfim2();
    CHECK(extract_contours(*m, Configuration(0)).empty());
    auto one = extract_contours(*m, flips({Site{0, 0}}));
    REQUIRE(one.size() == 1);
    CHECK(one[0].size() == 25);
    CHECK(one[0].label == 0);
    CHECK(one[0].interior.empty());
    CHECK(one[0].value_at(Site{0, 0}) == 1);
    CHECK(unstable_sites(*m, flips({Site{0, 0}})).size() == 9);
    auto two = extract_contours(*m, flips({Site{0, 0}, Site{10, 0}}));
    REQUIRE(two.size() == 2);
    CHECK(two[0].size() == 25);
    CHECK(two[1].size() == 25);
    auto mirror = extract_contours(*m, flips({Site{0, 0}}, 1));
    REQUIRE(mirror.size() == 1);
    CHECK(mirror[0].label == 1);
    CHECK_THROWS_AS(unstable_sites(*make_model({ModelKind::rfpm, 2, 1.0, 3}), Configuration(7)), DomainError);
}

TEST_CASE("thickened region contains the unstable set within distance one") {
    auto m = rfim2();
    std::mt19937_64 rng(8);
    std::bernoulli_distribution B(0.3);
    for (int t = 0; t < 50; ++t) {
        Configuration x(0);
        for (const auto& s : Region::cube(2, 6)) if (B(rng)) x.set(s, 1);
        Region u = unstable_sites(*m, x);
        Region tb(2);
        for (const auto& c : extract_contours(*m, x)) tb = unite(tb, c.support);
        CHECK(subtract(u, tb).empty());
        for (const auto& s : tb) CHECK(distance(Region(2, {s}), u) <= 1);
    }
}

TEST_CASE("annulus contour has a plus interior") {
    auto m = rfim2();
    Configuration x(0);
    for (const auto& s : subtract(Region::cube(2, 11, Site{-5, -5}), Region::cube(2, 5, Site{-2, -2}))) x.set(s, 1);
    auto cs = extract_contours(*m, x);
    REQUIRE(cs.size() == 1);
    REQUIRE(cs[0].holes.size() == 1);
    CHECK(cs[0].holes[0].k == 0);
    CHECK(cs[0].interior_k(0) == Region(2, {Site{0, 0}}));
    CHECK(cs[0].interior_k(1).empty());
    CHECK(is_valid_contour(*m, cs[0]));
}

TEST_CASE("nested contours and the partial order") {
    auto m = rfim2();
    // outer − annulus around a large + island that itself holds a single − spin
    Configuration x(0);
    for (const auto& s : subtract(Region::cube(2, 21, Site{-10, -10}), Region::cube(2, 15, Site{-7, -7}))) x.set(s, 1);
    x.set(Site{0, 0}, 1);
    auto cs = extract_contours(*m, x);
    REQUIRE(cs.size() == 2);
    const Contour& inner = cs[0].size() < cs[1].size() ? cs[0] : cs[1];
    const Contour& outer = cs[0].size() < cs[1].size() ? cs[1] : cs[0];
    CHECK(nested_in(inner, outer));
    CHECK(!nested_in(outer, inner));
    CHECK(!nested_in(outer, outer));
    CHECK(compatible(inner, outer));
    auto ext = external_contours(cs);
    REQUIRE(ext.size() == 1);
    CHECK(ext[0] == outer);
}

TEST_CASE("mixed boundary is rejected") {
    auto m = rfim2();
    auto c = extract_contours(*m, flips({Site{0, 0}}))[0];
    auto vals = c.values;
    vals[0] = 1 - vals[0];  // corner of the outer layer
    CHECK_THROWS_AS(make_contour(*m, c.support, vals), DomainError);
}

TEST_CASE("no rfim contour smaller than 5x5") {
    auto m = rfim2();
    for (int n = 1; n < 25; ++n) CHECK(enumerate_contours(*m, n, true).contours.empty());
    auto e25 = enumerate_contours(*m, 25, true);
    CHECK(e25.contours.size() == 2 * 25);
    for (const auto& c : e25.contours) CHECK(unite(c.support, c.interior).contains(Site{}));
}

TEST_CASE("enumeration agrees with exhaustive window extraction") {
    // contours of size <= 30 have no holes and their free core fits in a 2x1 block,
    // so every such contour is produced by some deviation inside a small window
    struct Case {
        ModelParams p;
        int side;
    };
    for (const auto& cs : {Case{{ModelKind::rfim, 2, 1.0}, 4}, Case{{ModelKind::rfpm, 2, 1.0, 3}, 3}}) {
        auto m = make_model(cs.p);
        const int n_max = 30;
        std::set<std::string> oracle;
        auto window = Region::cube(2, cs.side);
        long long total = 1;
        for (std::size_t i = 0; i < window.size(); ++i) total *= m->n_values();
        for (int k = 0; k < m->n_ground(); ++k)
            for (long long code = 0; code < total; ++code) {
                Configuration x(m->ground(k));
                long long c = code;
                for (const auto& s : window) {
                    x.set(s, static_cast<int>(c % m->n_values()));
                    c /= m->n_values();
                }
                for (const auto& ct : extract_contours(*m, x))
                    if (static_cast<int>(ct.size()) <= n_max) oracle.insert(class_key(ct));
            }
        auto e = enumerate_contours(*m, n_max, false, -1, true);
        std::set<std::string> got;
        for (const auto& c : e.contours) got.insert(class_key(c));
        CHECK(got == oracle);
        CHECK(!got.empty());
    }
}

TEST_CASE("enumerated contours round trip and obey the counting bound") {
    std::vector<ModelParams> ps{{ModelKind::rfim, 2, 1.0}, {ModelKind::rfpm, 2, 1.0, 3}, {ModelKind::fa1b, 2}};
    for (const auto& p : ps) {
        auto m = make_model(p);
        auto e = enumerate_contours(*m, 30, false, -1, true);
        CHECK(!e.contours.empty());
        std::map<int, double> anchored;
        for (const auto& c : e.contours) {
            CHECK(is_valid_contour(*m, c));
            CHECK(is_connected(c.support));
            anchored[static_cast<int>(c.size())] += static_cast<double>(unite(c.support, c.interior).size());
        }
        for (const auto& [n, count] : anchored) {
            double bound = n * (1.0 + 2.0 * std::log(8.0) + std::log(m->n_values()));
            CHECK(std::log(count) <= bound);
        }
        CHECK(enumerate_contours(*m, 25, true).contours.size() == static_cast<std::size_t>(anchored[25]));
    }
}

TEST_CASE("single site contours") {
    auto m = rfim2();
    auto s = single_site_contours(*m, 0);
    REQUIRE(s.size() == 1);
    CHECK(s[0].size() == 25);
    auto m3 = make_model({ModelKind::rfim, 3, 1.0});
    auto s3 = single_site_contours(*m3, 1);
    REQUIRE(s3.size() == 1);
    CHECK(s3[0].size() == 125);
    CHECK(enumerate_contours(*m3, 11, true, -1, true).contours.empty());
}

TEST_CASE("excitation energy") {
    auto m = rfim2();
    auto c = extract_contours(*m, flips({Site{0, 0}}))[0];
    RandomField zero = RandomField::zeros(2, 2);
    CHECK(excitation_energy(*m, c, zero) == doctest::Approx(8.0));
    // direct oracle: H(C) − H(b) over the support
    Configuration e = embed(*m, c);
    double direct = hamiltonian(*m, zero, c.support, Configuration(0), e) -
                    hamiltonian(*m, zero, c.support, Configuration(0), Configuration(0));
    CHECK(excitation_energy(*m, c, zero) == doctest::Approx(direct));
    RandomField eta = RandomField::zeros(2, 2);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N(0, 0.3);
    for (const auto& s : c.support) eta.set(1, s, N(rng));
    RandomField eta2 = RandomField::zeros(2, 2);
    for (const auto& s : c.support) eta2.set(1, s, 2 * eta.at(1, s));
    double d0 = excitation_energy(*m, c, zero);
    CHECK(excitation_energy(*m, c, eta2) - d0 == doctest::Approx(2 * (excitation_energy(*m, c, eta) - d0)));
    CHECK(excitation_energy(*m, c, eta) - d0 == doctest::Approx(2 * eta.at(1, Site{0, 0})));
}

TEST_CASE("peierls scans") {
    auto m = rfim2();
    auto r = peierls_scan(*m, 25);
    CHECK(r.rho_measured == doctest::Approx(8.0 / 25));
    CHECK(r.meets_declared);
    REQUIRE(r.witness.has_value());
    auto none = peierls_scan(*m, 20);
    CHECK(!none.witness.has_value());
    CHECK(std::isinf(none.rho_measured));
    ModelParams hc;
    hc.kind = ModelKind::fa1b;
    auto h = peierls_scan(*make_model(hc), 25);
    CHECK(h.rho_measured == doctest::Approx(0.5 / 25));
}

TEST_CASE("hamiltonian decomposition on structured configurations") {
    auto m = rfim2();
    auto reg = Region::cube(2, 25, Site{-12, -12});
    Configuration x(0);
    for (const auto& s : subtract(Region::cube(2, 21, Site{-10, -10}), Region::cube(2, 15, Site{-7, -7}))) x.set(s, 1);
    x.set(Site{0, 0}, 1);
    x.set(Site{-9, 9}, 0);
    auto dis = draw_disorder(*m, {DistKind::gaussian, 0.3}, reg, 5);
    auto d = hamiltonian_decomposition(*m, dis.eta, reg, 0, x);
    CHECK(d.external == 1);
    CHECK(d.lhs == doctest::Approx(d.rhs).epsilon(1e-12));
}
