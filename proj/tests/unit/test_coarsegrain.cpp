#include <doctest.h>

#include <cmath>

#include "pslab/coarsegrain.hpp"
#include "pslab/errors.hpp"

using namespace pslab;

TEST_CASE("coarse replica conventions") {
    auto blob = blob_suite(2, 1, 3, 30, 30)[0];
    CHECK(coarse_replica(blob, 0).covered == blob);

    auto cube = Region::cube(2, 2, Site{2, 4});
    auto r = coarse_replica(cube, 1);
    REQUIRE(r.cubes.size() == 1);
    CHECK(r.cubes[0].base == Site{1, 2});
    CHECK(r.covered == cube);

    // half of a 2-cube is enough
    auto half = Region(2, {Site{0, 0}, Site{1, 0}});
    CHECK(coarse_replica(half, 1).covered == Region::cube(2, 2));
    CHECK(coarse_replica(Region(2, {Site{0, 0}}), 1).covered.empty());

    // negative coordinates floor to the cube below
    CHECK(cube_of(Site{-1, -3}, 1, 2).base == Site{-1, -2});
    CHECK(coarse_replica(Region::cube(2, 4, Site{-4, -4}), 2).covered == Region::cube(2, 4, Site{-4, -4}));
}

TEST_CASE("aligned boxes are fixed points of coarse graining") {
    for (int l = 0; l <= 3; ++l) {
        auto box = Region::cube(2, 16, Site{-16, 0});
        auto cur = coarse_replica(box, l);
        CHECK(cur.covered == box);
        CHECK(symmetric_difference(cur.covered, coarse_replica(box, l + 1).covered).empty());
    }
}

TEST_CASE("geometry audit on the pinned blob suite") {
    auto suite = blob_suite(2, 500, 20240611);
    REQUIRE(suite.size() == 500);
    for (const auto& r : suite) CHECK(is_connected(r));
    auto a = audit_geometry(suite, 4);
    CHECK(a.face_pairs > 0);
    CHECK(std::isfinite(a.b0));
    CHECK(std::isfinite(a.b1));
    CHECK(std::isfinite(a.b2));
    CHECK(a.b0 >= 1.0);
    CHECK(a.b1 >= 1.0);
    CHECK(a.replicas_empty_beyond_l0);
    CHECK(a.degradation_ok);
    for (const auto& row : a.rows)
        if (row.constant == "b0" || row.constant == "b1" || row.constant == "b2") {
            double b = row.constant == "b0" ? a.b0 : row.constant == "b1" ? a.b1 : a.b2;
            CHECK(row.lhs <= b * row.rhs * (1 + 1e-12));
        }
    // a second seed stays within a modest factor of the calibrated constants
    auto b = audit_geometry(blob_suite(2, 200, 99), 4);
    CHECK(b.b0 <= 2 * a.b0);
    CHECK(b.b1 <= 2 * a.b1);
    CHECK(b.b2 <= 2 * a.b2);
}

TEST_CASE("dbar on explicit interiors") {
    InteriorProfile p3{Region(2, {Site{100, 0}}), {Region::cube(2, 3, Site{-1, -1})}};
    InteriorProfile p5{Region(2, {Site{200, 0}}), {Region::cube(2, 5, Site{-2, -2})}};
    // set arithmetic oracle
    Region ext3 = subtract(Region::cube(2, 7, Site{-3, -3}), Region::cube(2, 3, Site{-1, -1}));
    Region ext5 = subtract(Region::cube(2, 9, Site{-4, -4}), Region::cube(2, 5, Site{-2, -2}));
    double want = std::sqrt(16.0 + static_cast<double>(unite(ext3, ext5).size()));
    CHECK(dbar(p3, p5, 1.0) == doctest::Approx(want));
    CHECK(dbar(p3, p5, 1.0) == doctest::Approx(std::sqrt(88.0)));
    CHECK(dbar(p5, p3, 0.5) == doctest::Approx(0.5 * want));
    CHECK(dbar(p3, p3, 1.0) == 0.0);

    auto m = make_model({ModelKind::rfim, 2, 1.0});
    auto flip = [&](const Site& s) {
        Configuration x(0);
        x.set(s, 1);
        return profile_of(extract_contours(*m, x)[0], m->n_ground());
    };
    // two single-flip contours have empty interiors: distance 0 by the interior-only formula
    CHECK(dbar(flip(Site{0, 0}), flip(Site{7, 3}), 1.0) == 0.0);
}

TEST_CASE("covering nets and the entropy table") {
    auto audit = audit_geometry(blob_suite(2, 100, 5), 3);
    auto t = covering_and_entropy(8, 2, 4, 1.0, audit.b2);
    CHECK(t.family_size == enumerate_regions(8, 2, true).regions.size());
    CHECK(t.net_property);
    for (const auto& row : t.rows) {
        CHECK(row.net_size >= 1);
        CHECK(row.net_size <= t.family_size);
        CHECK(row.worst_distance <= row.radius);
        if (row.level >= 1) CHECK(static_cast<double>(row.net_size) <= row.entropy_bound * (1 + 1e-9));
    }
    CHECK(t.rows.back().net_size == 1);  // all coarse interiors empty
    CHECK(t.rows.back().dudley_term == 0.0);
    CHECK(std::isfinite(t.dudley));
    for (int n = 1; n <= 6; ++n) {
        auto small = covering_and_entropy(n, 2, 2, 1.0, audit.b2);
        CHECK(small.family_size == enumerate_regions(n, 2, true).regions.size());
        CHECK(small.rows[1].net_size == 1);
    }
}

TEST_CASE("dudley summand pattern") {
    CHECK(!dudley_summands_nonincreasing(2, 20));
    CHECK(dudley_summands_nonincreasing(3, 20));
    CHECK(dudley_summands_nonincreasing(4, 20));
    auto s2 = dudley_summands(2, 5);
    CHECK(s2[4] == doctest::Approx(std::sqrt(5.0)));
    double total = 0;
    for (double v : dudley_summands(3, 400)) total += v;
    CHECK(total < 10.0);
}

TEST_CASE("region counting bound") {
    for (int n = 1; n <= 6; ++n) {
        double count = static_cast<double>(enumerate_regions(n, 2, true).regions.size());
        CHECK(std::log(count) <= n + 2.0 * n * std::log(8.0));
    }
}
