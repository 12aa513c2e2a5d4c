#include <doctest.h>

#include <set>

#include "pslab/errors.hpp"
#include "pslab/lattice.hpp"

using namespace pslab;

namespace {

// Naive polyform growth with translation normalisation, used as an independent count.
std::set<std::vector<Site>> naive_polyforms(int d, int n) {
    std::vector<Site> nbrs;
    for (const auto& o : linf_ball(d, 1))
        if (o != Site{}) nbrs.push_back(o);
    auto norm = [](std::vector<Site> v) {
        std::sort(v.begin(), v.end());
        Site m = v.front();
        for (auto& s : v) s = s - m;
        return v;
    };
    std::set<std::vector<Site>> cur{{Site{}}};
    for (int k = 1; k < n; ++k) {
        std::set<std::vector<Site>> next;
        for (const auto& p : cur)
            for (const auto& s : p)
                for (const auto& o : nbrs) {
                    Site t = s + o;
                    if (std::find(p.begin(), p.end(), t) != p.end()) continue;
                    auto q = p;
                    q.push_back(t);
                    next.insert(norm(q));
                }
        cur = std::move(next);
    }
    return cur;
}

}  // namespace

TEST_CASE("single site boundaries in two dimensions") {
    Region p(2, {Site{0, 0}});
    CHECK(boundary(p, 1, Side::external).size() == 8);
    CHECK(boundary(p, 2, Side::external).size() == 16);
    CHECK(dilate(p, 2).size() == 25);
    CHECK(boundary(p, 1, Side::internal).size() == 1);
}

TEST_CASE("box internal layers") {
    auto b = Region::cube(2, 3);
    CHECK(boundary(b, 1, Side::internal).size() == 8);
    CHECK(boundary(b, 2, Side::internal).size() == 1);
    CHECK(erode(b, 1) == Region(2, {Site{1, 1}}));
    auto c = Region::cube(3, 5);
    CHECK(boundary(c, 1, Side::internal).size() == 125 - 27);
    CHECK(inner_layers(c, 2).size() == 124);
}

TEST_CASE("dilate and erode are adjoint on boxes") {
    auto b = Region::cube(2, 4, Site{-1, 2});
    CHECK(erode(dilate(b, 1), 1) == b);
    CHECK(dilate(erode(Region::cube(2, 6), 1), 1) == Region::cube(2, 6));
}

TEST_CASE("components under both adjacencies") {
    Region diag(2, {Site{0, 0}, Site{1, 1}});
    CHECK(connected_components(diag, Adjacency::linf).size() == 1);
    CHECK(connected_components(diag, Adjacency::l1).size() == 2);
    Region two(2, {Site{0, 0}, Site{3, 0}, Site{3, 1}});
    auto comps = connected_components(two);
    REQUIRE(comps.size() == 2);
    CHECK(comps[0].size() == 1);
    CHECK(comps[1].size() == 2);
}

TEST_CASE("ring has one hole, square annulus of width one") {
    auto ring = subtract(Region::cube(2, 3), Region(2, {Site{1, 1}}));
    auto split = complement_components(ring);
    REQUIRE(split.holes.size() == 1);
    CHECK(split.holes[0] == Region(2, {Site{1, 1}}));
    CHECK(interior(ring).size() == 1);
    // a diagonal gap connects the centre to the outside under L∞ adjacency
    auto open = subtract(ring, Region(2, {Site{0, 0}}));
    CHECK(interior(open).empty());
    auto big = subtract(Region::cube(2, 7), Region::cube(2, 3, Site{2, 2}));
    CHECK(interior(big).size() == 9);
}

TEST_CASE("distance between regions") {
    Region a(2, {Site{0, 0}});
    Region b(2, {Site{2, -1}, Site{5, 5}});
    CHECK(distance(a, b) == 2);
    CHECK(distance(a, a) == 0);
}

TEST_CASE("fixed polyform counts agree with naive growth") {
    const std::vector<std::size_t> known{1, 4, 20, 110, 638, 3832};
    for (int n = 1; n <= 6; ++n) {
        auto e = enumerate_regions(n, 2, false);
        CHECK(e.regions.size() == known[n - 1]);
        if (n <= 5) CHECK(e.regions.size() == naive_polyforms(2, n).size());
        std::set<Region> uniq(e.regions.begin(), e.regions.end());
        CHECK(uniq.size() == e.regions.size());
    }
    for (int n = 1; n <= 4; ++n)
        CHECK(enumerate_regions(n, 3, false).regions.size() == naive_polyforms(3, n).size());
}

TEST_CASE("anchored enumeration") {
    CHECK(enumerate_regions(1, 2, true).regions.size() == 1);
    CHECK(enumerate_regions(2, 2, true).regions.size() == 8);
    for (int n = 1; n <= 5; ++n) {
        auto e = enumerate_regions(n, 2, true);
        CHECK(e.regions.size() == n * enumerate_regions(n, 2, false).regions.size());
        for (const auto& r : e.regions) CHECK(r.contains(Site{}));
    }
    // the 8-ring is the first shape with a hole; its anchorings include the centre
    auto e8 = enumerate_regions(8, 2, true);
    auto ring = subtract(Region::cube(2, 3, Site{-1, -1}), Region(2, {Site{0, 0}}));
    CHECK(std::find(e8.regions.begin(), e8.regions.end(), ring) != e8.regions.end());
}

TEST_CASE("enumeration budget") {
    CHECK_THROWS_AS(enumerate_regions(6, 2, false, 100), BudgetError);
    CHECK_THROWS_AS(enumerate_regions(0, 2, false), ParameterError);
}

TEST_CASE("blocking round trip") {
    for (int p : {1, 2, 3}) {
        BlockingSpec bs(2, p, 2);
        CHECK(bs.block_value_space_size() == (1LL << (p * p)));
        std::array<int, kMaxDim> blocks{2, 3, 0, 0};
        std::vector<int> base(static_cast<std::size_t>(2 * p * 3 * p));
        for (std::size_t i = 0; i < base.size(); ++i) base[i] = static_cast<int>((i * 7 + 3) % 5 % 2);
        auto blk = bs.block(base, blocks);
        CHECK(blk.size() == 6);
        CHECK(bs.unblock(blk, blocks) == base);
    }
    BlockingSpec b3(3, 2, 2);
    CHECK(b3.block_value_space_size() == 256);
    CHECK(b3.block_of(Site{-1, 2, 3}) == Site{-1, 1, 1});
    CHECK(b3.offset_index(Site{-1, 2, 3}) == 4 + 0 + 1);
}
