#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

namespace pslab {

constexpr int kMaxDim = 4;

struct Site {
    std::array<int, kMaxDim> c{};

    Site() = default;
    Site(std::initializer_list<int> xs) {
        int i = 0;
        for (int x : xs) c[i++] = x;
    }

    int& operator[](int i) { return c[i]; }
    int operator[](int i) const { return c[i]; }

    Site operator+(const Site& o) const {
        Site r;
        for (int i = 0; i < kMaxDim; ++i) r.c[i] = c[i] + o.c[i];
        return r;
    }
    Site operator-(const Site& o) const {
        Site r;
        for (int i = 0; i < kMaxDim; ++i) r.c[i] = c[i] - o.c[i];
        return r;
    }
    Site operator-() const {
        Site r;
        for (int i = 0; i < kMaxDim; ++i) r.c[i] = -c[i];
        return r;
    }
    friend bool operator==(const Site& a, const Site& b) { return a.c == b.c; }
    friend bool operator!=(const Site& a, const Site& b) { return a.c != b.c; }
    friend bool operator<(const Site& a, const Site& b) { return a.c < b.c; }

    std::uint64_t key() const {
        std::uint64_t k = 0;
        for (int i = 0; i < kMaxDim; ++i)
            k = (k << 16) | static_cast<std::uint16_t>(c[i] + 32768);
        return k;
    }
};

struct SiteHash {
    std::size_t operator()(const Site& s) const noexcept {
        std::uint64_t z = s.key() + 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return static_cast<std::size_t>(z ^ (z >> 31));
    }
};

int linf(const Site& a, const Site& b, int d);
int l1(const Site& a, const Site& b, int d);
Site unit(int axis, int sign = 1);

// Offsets of the L∞ ball of radius r (including 0), lexicographic.
std::vector<Site> linf_ball(int d, int r);
// The 2d L1 unit vectors.
std::vector<Site> l1_neighbors(int d);

enum class Adjacency { linf, l1 };
enum class Side { external, internal };

class Region {
public:
    Region() = default;
    explicit Region(int d) : d_(d) {}
    Region(int d, std::vector<Site> sites);

    static Region box(int d, const Site& lo, const std::array<int, kMaxDim>& ext);
    static Region cube(int d, int side, const Site& lo = Site{});

    int dim() const { return d_; }
    std::size_t size() const { return sites_.size(); }
    bool empty() const { return sites_.empty(); }
    bool contains(const Site& s) const { return index_.count(s.key()) > 0; }
    const std::vector<Site>& sites() const { return sites_; }
    auto begin() const { return sites_.begin(); }
    auto end() const { return sites_.end(); }

    Region translated(const Site& u) const;
    void bounds(Site& lo, Site& hi) const;

    friend bool operator==(const Region& a, const Region& b) {
        return a.d_ == b.d_ && a.sites_ == b.sites_;
    }
    friend bool operator!=(const Region& a, const Region& b) { return !(a == b); }
    friend bool operator<(const Region& a, const Region& b) { return a.sites_ < b.sites_; }

    std::string str() const;

private:
    int d_ = 0;
    std::vector<Site> sites_;
    std::unordered_set<std::uint64_t> index_;
};

Region unite(const Region& a, const Region& b);
Region intersect(const Region& a, const Region& b);
Region subtract(const Region& a, const Region& b);
Region symmetric_difference(const Region& a, const Region& b);

// Sites within L∞ distance r of reg (r=0 returns reg).
Region dilate(const Region& reg, int r);
// Sites s of reg with d(s, reg^c) > r.
Region erode(const Region& reg, int r);
// Sites of reg at distance <= n from the complement, i.e. reg minus erode(reg, n).
Region inner_layers(const Region& reg, int n);

Region boundary(const Region& reg, int n, Side side);
std::vector<Region> connected_components(const Region& reg, Adjacency adj = Adjacency::linf);
bool is_connected(const Region& reg, Adjacency adj = Adjacency::linf);

struct ComplementSplit {
    Region outer_frame;           // the unbounded component, clipped to bbox+1
    std::vector<Region> holes;    // bounded components, ordered by smallest member
};
ComplementSplit complement_components(const Region& reg);
Region interior(const Region& reg);  // union of bounded complement components

int distance(const Region& a, const Region& b);  // L∞ set distance, INT_MAX if either empty

struct RegionEnumeration {
    std::vector<Region> regions;
    std::size_t count = 0;
};

// Connected (L∞) regions of size n. If anchored, every translate with 0 in reg ∪ Int(reg);
// otherwise one representative per translation class (lexicographically smallest site at 0).
RegionEnumeration enumerate_regions(int n, int d, bool anchored,
                                    std::size_t budget = 50'000'000);

// Fixed polyforms with neighbour set `nbrs`, lexicographic minimum at the origin.
// Calls visit(cells) for each; visit may return false to prune.
void redelmeier(int d, int n_max, const std::vector<Site>& nbrs,
                const std::function<bool(const std::vector<Site>&)>& visit);

// Period blocking: base values in [0, base_values) on a period^d block become one block value.
class BlockingSpec {
public:
    BlockingSpec(int d, int period, int base_values);

    int dim() const { return d_; }
    int period() const { return p_; }
    int base_values() const { return nb_; }
    int cell_size() const { return static_cast<int>(offsets_.size()); }
    long long block_value_space_size() const { return space_; }
    const std::vector<Site>& offsets() const { return offsets_; }

    Site block_of(const Site& base) const;
    int offset_index(const Site& base) const;
    Site base_site(const Site& block, int offset) const;

    int digit(long long value, int offset) const;
    long long compose(const std::vector<int>& digits) const;

    // base configuration on a box of blocks -> block values, and back
    std::vector<long long> block(const std::vector<int>& base, const std::array<int, kMaxDim>& blocks) const;
    std::vector<int> unblock(const std::vector<long long>& blk, const std::array<int, kMaxDim>& blocks) const;

private:
    int d_, p_, nb_;
    long long space_;
    std::vector<Site> offsets_;
    std::vector<long long> pow_;
};

}  // namespace pslab
