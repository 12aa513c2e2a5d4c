#include "pslab/lattice.hpp"

#include <algorithm>
#include <climits>
#include <deque>
#include <set>
#include <sstream>
#include <unordered_map>

#include "pslab/errors.hpp"

namespace pslab {

int linf(const Site& a, const Site& b, int d) {
    int m = 0;
    for (int i = 0; i < d; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

int l1(const Site& a, const Site& b, int d) {
    int m = 0;
    for (int i = 0; i < d; ++i) m += std::abs(a[i] - b[i]);
    return m;
}

Site unit(int axis, int sign) {
    Site s;
    s[axis] = sign;
    return s;
}

std::vector<Site> linf_ball(int d, int r) {
    std::vector<Site> out;
    Site s;
    for (int i = 0; i < d; ++i) s[i] = -r;
    while (true) {
        out.push_back(s);
        int i = d - 1;
        while (i >= 0 && s[i] == r) {
            s[i] = -r;
            --i;
        }
        if (i < 0) break;
        ++s[i];
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Site> l1_neighbors(int d) {
    std::vector<Site> out;
    for (int i = 0; i < d; ++i) {
        out.push_back(unit(i, -1));
        out.push_back(unit(i, +1));
    }
    return out;
}

Region::Region(int d, std::vector<Site> sites) : d_(d), sites_(std::move(sites)) {
    std::sort(sites_.begin(), sites_.end());
    sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
    index_.reserve(sites_.size() * 2);
    for (const auto& s : sites_) index_.insert(s.key());
}

Region Region::box(int d, const Site& lo, const std::array<int, kMaxDim>& ext) {
    std::vector<Site> v;
    Site s = lo;
    for (int i = 0; i < d; ++i)
        if (ext[i] <= 0) return Region(d);
    while (true) {
        v.push_back(s);
        int i = d - 1;
        while (i >= 0 && s[i] == lo[i] + ext[i] - 1) {
            s[i] = lo[i];
            --i;
        }
        if (i < 0) break;
        ++s[i];
    }
    return Region(d, std::move(v));
}

Region Region::cube(int d, int side, const Site& lo) {
    std::array<int, kMaxDim> ext{};
    for (int i = 0; i < d; ++i) ext[i] = side;
    return box(d, lo, ext);
}

Region Region::translated(const Site& u) const {
    std::vector<Site> v;
    v.reserve(sites_.size());
    for (const auto& s : sites_) v.push_back(s + u);
    return Region(d_, std::move(v));
}

void Region::bounds(Site& lo, Site& hi) const {
    lo = Site{};
    hi = Site{};
    if (sites_.empty()) return;
    lo = hi = sites_.front();
    for (const auto& s : sites_)
        for (int i = 0; i < d_; ++i) {
            lo[i] = std::min(lo[i], s[i]);
            hi[i] = std::max(hi[i], s[i]);
        }
}

std::string Region::str() const {
    std::ostringstream os;
    os << "{";
    for (std::size_t k = 0; k < sites_.size(); ++k) {
        if (k) os << " ";
        os << "(";
        for (int i = 0; i < d_; ++i) os << (i ? "," : "") << sites_[k][i];
        os << ")";
    }
    os << "}";
    return os.str();
}

Region unite(const Region& a, const Region& b) {
    std::vector<Site> v;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(v));
    return Region(std::max(a.dim(), b.dim()), std::move(v));
}

Region intersect(const Region& a, const Region& b) {
    std::vector<Site> v;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(v));
    return Region(std::max(a.dim(), b.dim()), std::move(v));
}

Region subtract(const Region& a, const Region& b) {
    std::vector<Site> v;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(v));
    return Region(std::max(a.dim(), b.dim()), std::move(v));
}

Region symmetric_difference(const Region& a, const Region& b) {
    std::vector<Site> v;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(v));
    return Region(std::max(a.dim(), b.dim()), std::move(v));
}

Region dilate(const Region& reg, int r) {
    if (r <= 0 || reg.empty()) return reg;
    const int d = reg.dim();
    std::unordered_set<Site, SiteHash> acc;
    auto ball = linf_ball(d, r);
    acc.reserve(reg.size() * ball.size());
    for (const auto& s : reg)
        for (const auto& o : ball) acc.insert(s + o);
    return Region(d, std::vector<Site>(acc.begin(), acc.end()));
}

Region erode(const Region& reg, int r) {
    if (r <= 0 || reg.empty()) return reg;
    const int d = reg.dim();
    auto ball = linf_ball(d, r);
    std::vector<Site> v;
    for (const auto& s : reg) {
        bool keep = true;
        for (const auto& o : ball)
            if (!reg.contains(s + o)) {
                keep = false;
                break;
            }
        if (keep) v.push_back(s);
    }
    return Region(d, std::move(v));
}

Region inner_layers(const Region& reg, int n) { return subtract(reg, erode(reg, n)); }

Region boundary(const Region& reg, int n, Side side) {
    if (n < 1) throw ParameterError("boundary: n must be >= 1");
    if (side == Side::external) return subtract(dilate(reg, n), dilate(reg, n - 1));
    return subtract(erode(reg, n - 1), erode(reg, n));
}

std::vector<Region> connected_components(const Region& reg, Adjacency adj) {
    const int d = reg.dim();
    std::vector<Region> out;
    if (reg.empty()) return out;
    std::vector<Site> nbrs;
    if (adj == Adjacency::linf) {
        for (const auto& o : linf_ball(d, 1))
            if (o != Site{}) nbrs.push_back(o);
    } else {
        nbrs = l1_neighbors(d);
    }
    std::unordered_set<std::uint64_t> seen;
    for (const auto& start : reg) {
        if (seen.count(start.key())) continue;
        std::vector<Site> comp;
        std::deque<Site> q{start};
        seen.insert(start.key());
        while (!q.empty()) {
            Site s = q.front();
            q.pop_front();
            comp.push_back(s);
            for (const auto& o : nbrs) {
                Site t = s + o;
                if (reg.contains(t) && seen.insert(t.key()).second) q.push_back(t);
            }
        }
        out.emplace_back(d, std::move(comp));
    }
    return out;
}

bool is_connected(const Region& reg, Adjacency adj) {
    return reg.empty() || connected_components(reg, adj).size() == 1;
}

ComplementSplit complement_components(const Region& reg) {
    const int d = reg.dim();
    ComplementSplit out{Region(d), {}};
    if (reg.empty()) return out;
    Site lo, hi;
    reg.bounds(lo, hi);
    std::array<int, kMaxDim> ext{};
    for (int i = 0; i < d; ++i) {
        lo[i] -= 1;
        ext[i] = hi[i] - lo[i] + 2;
    }
    Region frame = subtract(Region::box(d, lo, ext), reg);
    auto comps = connected_components(frame, Adjacency::linf);
    for (auto& c : comps) {
        bool touches = false;
        for (const auto& s : c) {
            for (int i = 0; i < d && !touches; ++i)
                if (s[i] == lo[i] || s[i] == lo[i] + ext[i] - 1) touches = true;
            if (touches) break;
        }
        if (touches)
            out.outer_frame = unite(out.outer_frame, c);
        else
            out.holes.push_back(std::move(c));
    }
    return out;
}

Region interior(const Region& reg) {
    auto split = complement_components(reg);
    Region acc(reg.dim());
    for (const auto& h : split.holes) acc = unite(acc, h);
    return acc;
}

int distance(const Region& a, const Region& b) {
    if (a.empty() || b.empty()) return INT_MAX;
    const int d = std::max(a.dim(), b.dim());
    int best = INT_MAX;
    for (const auto& s : a)
        for (const auto& t : b) {
            best = std::min(best, linf(s, t, d));
            if (best == 0) return 0;
        }
    return best;
}

namespace {

bool lex_positive(const Site& s, int d) {
    for (int i = 0; i < d; ++i) {
        if (s[i] > 0) return true;
        if (s[i] < 0) return false;
    }
    return false;
}

}  // namespace

void redelmeier(int d, int n_max, const std::vector<Site>& nbrs,
                const std::function<bool(const std::vector<Site>&)>& visit) {
    std::vector<Site> poly;
    std::unordered_set<std::uint64_t> seen;
    seen.insert(Site{}.key());
    std::function<void(std::vector<Site>)> rec = [&](std::vector<Site> untried) {
        while (!untried.empty()) {
            Site c = untried.back();
            untried.pop_back();
            poly.push_back(c);
            bool grow = visit(poly);
            if (grow && static_cast<int>(poly.size()) < n_max) {
                std::vector<Site> next = untried;
                std::vector<std::uint64_t> added;
                for (const auto& o : nbrs) {
                    Site t = c + o;
                    if (!lex_positive(t, d)) continue;
                    if (seen.insert(t.key()).second) {
                        next.push_back(t);
                        added.push_back(t.key());
                    }
                }
                rec(std::move(next));
                for (auto k : added) seen.erase(k);
            }
            poly.pop_back();
        }
    };
    rec({Site{}});
}

RegionEnumeration enumerate_regions(int n, int d, bool anchored, std::size_t budget) {
    if (n < 1) throw ParameterError("enumerate_regions: n must be >= 1");
    if (d < 1 || d > kMaxDim) throw ParameterError("enumerate_regions: unsupported dimension");
    std::vector<Site> nbrs;
    for (const auto& o : linf_ball(d, 1))
        if (o != Site{}) nbrs.push_back(o);
    RegionEnumeration out;
    redelmeier(d, n, nbrs, [&](const std::vector<Site>& cells) {
        if (static_cast<int>(cells.size()) < n) return true;
        Region shape(d, cells);
        if (!anchored) {
            if (++out.count > budget)
                throw BudgetError("enumerate_regions: enumeration limit exceeded (" +
                                  std::to_string(budget) + " regions)");
            out.regions.push_back(std::move(shape));
            return false;
        }
        Region filled = unite(shape, interior(shape));
        for (const auto& q : filled) {
            if (++out.count > budget)
                throw BudgetError("enumerate_regions: enumeration limit exceeded (" +
                                  std::to_string(budget) + " regions)");
            out.regions.push_back(shape.translated(-q));
        }
        return false;
    });
    std::sort(out.regions.begin(), out.regions.end());
    return out;
}

BlockingSpec::BlockingSpec(int d, int period, int base_values) : d_(d), p_(period), nb_(base_values) {
    if (period < 1) throw ParameterError("blocking period must be positive");
    if (base_values < 1) throw ParameterError("base value count must be positive");
    std::array<int, kMaxDim> ext{};
    for (int i = 0; i < d; ++i) ext[i] = period;
    offsets_ = Region::box(d, Site{}, ext).sites();
    space_ = 1;
    for (std::size_t j = 0; j < offsets_.size(); ++j) {
        pow_.push_back(space_);
        if (space_ > (1LL << 40) / nb_) throw ParameterError("block value space too large");
        space_ *= nb_;
    }
}

Site BlockingSpec::block_of(const Site& base) const {
    Site b;
    for (int i = 0; i < d_; ++i) {
        int q = base[i] / p_;
        if (base[i] % p_ < 0) --q;
        b[i] = q;
    }
    return b;
}

int BlockingSpec::offset_index(const Site& base) const {
    int idx = 0;
    for (int i = 0; i < d_; ++i) {
        int r = base[i] % p_;
        if (r < 0) r += p_;
        idx = idx * p_ + r;
    }
    return idx;
}

Site BlockingSpec::base_site(const Site& block, int offset) const {
    Site s;
    const Site& o = offsets_[offset];
    for (int i = 0; i < d_; ++i) s[i] = block[i] * p_ + o[i];
    return s;
}

int BlockingSpec::digit(long long value, int offset) const {
    return static_cast<int>((value / pow_[offset]) % nb_);
}

long long BlockingSpec::compose(const std::vector<int>& digits) const {
    long long v = 0;
    for (std::size_t j = 0; j < digits.size(); ++j) v += digits[j] * pow_[j];
    return v;
}

namespace {

std::size_t flat(const Site& s, const std::array<int, kMaxDim>& ext, int d) {
    std::size_t idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * ext[i] + s[i];
    return idx;
}

}  // namespace

std::vector<long long> BlockingSpec::block(const std::vector<int>& base,
                                           const std::array<int, kMaxDim>& blocks) const {
    std::array<int, kMaxDim> bext{};
    std::size_t nblocks = 1;
    for (int i = 0; i < d_; ++i) {
        bext[i] = blocks[i] * p_;
        nblocks *= blocks[i];
    }
    std::vector<long long> out(nblocks, 0);
    for (const auto& b : Region::box(d_, Site{}, blocks)) {
        std::vector<int> digits(offsets_.size());
        for (std::size_t j = 0; j < offsets_.size(); ++j)
            digits[j] = base[flat(base_site(b, static_cast<int>(j)), bext, d_)];
        out[flat(b, blocks, d_)] = compose(digits);
    }
    return out;
}

std::vector<int> BlockingSpec::unblock(const std::vector<long long>& blk,
                                       const std::array<int, kMaxDim>& blocks) const {
    std::array<int, kMaxDim> bext{};
    std::size_t nbase = 1;
    for (int i = 0; i < d_; ++i) {
        bext[i] = blocks[i] * p_;
        nbase *= bext[i];
    }
    std::vector<int> out(nbase, 0);
    for (const auto& b : Region::box(d_, Site{}, blocks)) {
        long long v = blk[flat(b, blocks, d_)];
        for (std::size_t j = 0; j < offsets_.size(); ++j)
            out[flat(base_site(b, static_cast<int>(j)), bext, d_)] = digit(v, static_cast<int>(j));
    }
    return out;
}

}  // namespace pslab
