#include "pslab/coarsegrain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <unordered_map>

#include "pslab/errors.hpp"

namespace pslab {

namespace {

int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

Region outer(const Region& reg, int r) { return subtract(dilate(reg, r), reg); }

std::string cube_key(const CoarseReplica& rep) {
    std::string key;
    for (const auto& c : rep.cubes) {
        for (int i = 0; i < kMaxDim; ++i) key += std::to_string(c.base[i]) + ",";
        key += ";";
    }
    return key;
}

}  // namespace

Region CubeIndex::sites(int d) const {
    Site lo;
    for (int i = 0; i < d; ++i) lo[i] = base[i] * (1 << level);
    return Region::cube(d, 1 << level, lo);
}

CubeIndex cube_of(const Site& s, int level, int d) {
    CubeIndex c;
    c.level = level;
    for (int i = 0; i < d; ++i) c.base[i] = floor_div(s[i], 1 << level);
    return c;
}

CoarseReplica coarse_replica(const Region& reg, int level) {
    if (level < 0) throw ParameterError("coarse_replica: level must be >= 0");
    const int d = reg.dim();
    CoarseReplica out;
    out.level = level;
    std::unordered_map<Site, int, SiteHash> count;
    for (const auto& s : reg) ++count[cube_of(s, level, d).base];
    const long long volume = 1LL << (level * d);
    std::vector<Site> bases;
    for (const auto& [b, c] : count)
        if (2LL * c >= volume) bases.push_back(b);
    std::sort(bases.begin(), bases.end());
    std::vector<Site> covered;
    for (const auto& b : bases) {
        CubeIndex ci{level, b};
        out.cubes.push_back(ci);
        for (const auto& s : ci.sites(d)) covered.push_back(s);
    }
    out.covered = Region(d, std::move(covered));
    return out;
}

std::vector<Region> blob_suite(int d, std::size_t count, std::uint64_t seed, int min_size, int max_size) {
    if (min_size < 1 || max_size < min_size) throw ParameterError("blob_suite: bad size range");
    std::mt19937_64 rng(seed);
    auto draw = [&](std::uint64_t n) { return static_cast<int>(rng() % n); };
    const auto steps = l1_neighbors(d);
    std::vector<Region> out;
    for (std::size_t i = 0; i < count; ++i) {
        const int target = min_size + draw(static_cast<std::uint64_t>(max_size - min_size + 1));
        Site start;
        for (int j = 0; j < d; ++j) start[j] = draw(16) - 8;
        std::vector<Site> sites{start};
        Region cur(d, sites);
        while (static_cast<int>(sites.size()) < target) {
            Site t = sites[draw(sites.size())] + steps[draw(steps.size())];
            if (cur.contains(t)) continue;
            sites.push_back(t);
            cur = Region(d, sites);
        }
        out.push_back(std::move(cur));
    }
    return out;
}

int l0_of(double b1, std::size_t n, int d) {
    if (d < 2) throw ParameterError("l0_of: dimension must be >= 2");
    return static_cast<int>(std::ceil(std::log(b1 * static_cast<double>(n)) / ((d - 1) * std::log(2.0))));
}

GeometryAudit audit_geometry(const std::vector<Region>& suite, int max_level) {
    GeometryAudit a;
    const auto faces = l1_neighbors(suite.empty() ? 2 : suite.front().dim());
    std::vector<std::vector<CoarseReplica>> reps(suite.size());
    for (std::size_t i = 0; i < suite.size(); ++i) {
        const Region& reg = suite[i];
        const int d = reg.dim();
        const Region ext = boundary(reg, 1, Side::external);
        const double ext_n = static_cast<double>(ext.size());
        for (int l = 0; l <= max_level + 1; ++l) reps[i].push_back(coarse_replica(reg, l));
        for (int l = 0; l <= max_level; ++l) {
            const CoarseReplica& r = reps[i][l];
            const long long volume = 1LL << (l * d);
            auto admissible = [&](const CubeIndex& c) {
                long long in = 0;
                for (const auto& s : c.sites(d)) in += reg.contains(s);
                return 2 * in >= volume;
            };
            AuditRow worst{i, l, 0, 0, 0, "b0"};
            for (const auto& c : r.cubes)
                for (const auto& f : faces) {
                    CubeIndex nb{l, c.base + f};
                    if (admissible(nb)) continue;
                    ++a.face_pairs;
                    double hits = 0;
                    for (const auto& s : c.sites(d)) hits += ext.contains(s);
                    for (const auto& s : nb.sites(d)) hits += ext.contains(s);
                    double lhs = std::ldexp(1.0, l * (d - 1));
                    double ratio = lhs / hits;
                    if (ratio > worst.ratio) worst = {i, l, lhs, hits, ratio, "b0"};
                }
            if (worst.ratio > 0) {
                a.rows.push_back(worst);
                a.b0 = std::max(a.b0, worst.ratio);
            }
            double lhs1 = static_cast<double>(boundary(r.covered, 1, Side::external).size());
            a.rows.push_back({i, l, lhs1, ext_n, lhs1 / ext_n, "b1"});
            a.b1 = std::max(a.b1, lhs1 / ext_n);
            double lhs2 = static_cast<double>(symmetric_difference(r.covered, reps[i][l + 1].covered).size());
            double rhs2 = std::ldexp(ext_n, l);
            a.rows.push_back({i, l, lhs2, rhs2, lhs2 / rhs2, "b2"});
            a.b2 = std::max(a.b2, lhs2 / rhs2);
        }
    }
    for (std::size_t i = 0; i < suite.size(); ++i) {
        const Region& reg = suite[i];
        const int d = reg.dim();
        const double ext_n = static_cast<double>(boundary(reg, 1, Side::external).size());
        int l0 = l0_of(a.b1, reg.size(), d);
        for (int l = l0; l <= l0 + 1; ++l) {
            double sz = static_cast<double>(coarse_replica(reg, l).covered.size());
            a.rows.push_back({i, l, sz, 0.0, sz, "l0_empty"});
            if (sz > 0) a.replicas_empty_beyond_l0 = false;
        }
        double budget = 0.0;
        for (int l = 1; l <= max_level + 1; ++l) {
            budget += a.b2 * std::ldexp(ext_n, l - 1);
            double lhs = static_cast<double>(symmetric_difference(reps[i][l].covered, reg).size());
            a.rows.push_back({i, l, lhs, budget, lhs / budget, "degradation"});
            if (lhs > budget * (1 + 1e-12)) a.degradation_ok = false;
        }
    }
    return a;
}

InteriorProfile profile_of(const Contour& c, int n_ground) {
    InteriorProfile p{c.support, {}};
    for (int k = 0; k < n_ground; ++k) p.interiors.push_back(c.interior_k(k));
    return p;
}

InteriorProfile profile_of(const Region& support) { return {support, {interior(support)}}; }

double dbar(const InteriorProfile& a, const InteriorProfile& b, double nu) {
    if (a.support == b.support) return 0.0;
    if (a.interiors.size() != b.interiors.size()) throw ParameterError("dbar: profiles with different label counts");
    double acc = 0.0;
    for (std::size_t k = 0; k < a.interiors.size(); ++k) {
        const Region& x = a.interiors[k];
        const Region& y = b.interiors[k];
        acc += static_cast<double>(symmetric_difference(x, y).size());
        acc += static_cast<double>(unite(outer(x, 2), outer(y, 2)).size());
    }
    return nu * std::sqrt(acc);
}

double b3_from_b2(double b2, int d) {
    return 2 * (std::sqrt(2.0) + 1) * std::sqrt(2 * b2) + std::sqrt(2.0) * std::pow(5.0, d / 2.0);
}

CoveringTable covering_and_entropy(int n, int d, int max_level, double nu, double b2, std::size_t budget) {
    if (n < 1 || max_level < 0) throw ParameterError("covering_and_entropy: bad arguments");
    CoveringTable t;
    t.n = n;
    t.d = d;
    t.nu = nu;
    t.b3 = b3_from_b2(b2, d);
    std::vector<Site> nbrs;
    for (const auto& o : linf_ball(d, 1))
        if (o != Site{}) nbrs.push_back(o);
    // Supports with empty interior all share the empty tuple at every level and sit at distance 0
    // from each other, so only the anchored supports with an interior are stored.
    std::vector<InteriorProfile> holed;
    bool any_empty = false;
    std::size_t visited = 0;
    redelmeier(d, n, nbrs, [&](const std::vector<Site>& cells) {
        if (static_cast<int>(cells.size()) < n) return true;
        if (++visited > budget) throw BudgetError("covering_and_entropy: region enumeration limit exceeded");
        Region shape(d, cells);
        // a hole needs the bounding box to be at least 3 wide in every direction
        Site lo, hi;
        shape.bounds(lo, hi);
        bool thick = true;
        for (int i = 0; i < d; ++i) thick = thick && hi[i] - lo[i] >= 2;
        Region in = thick ? interior(shape) : Region(d);
        Region filled = unite(shape, in);
        t.family_size += filled.size();
        if (in.empty()) {
            any_empty = true;
            return false;
        }
        for (const auto& q : filled) holed.push_back({shape.translated(-q), {in.translated(-q)}});
        return false;
    });
    std::vector<std::size_t> nets;
    for (int l = 0; l <= max_level; ++l) {
        NetRow row;
        row.level = l;
        row.radius = nu * t.b3 * std::sqrt(std::ldexp(1.0, l) * n);
        std::map<std::string, std::size_t> groups;  // tuple -> representative index
        bool empty_tuple = any_empty;
        std::vector<std::size_t> rep_of(holed.size());
        for (std::size_t i = 0; i < holed.size(); ++i) {
            auto r = coarse_replica(holed[i].interiors[0], l);
            if (r.cubes.empty()) empty_tuple = true;
            auto it = groups.emplace(cube_key(r), i).first;
            rep_of[i] = it->second;
        }
        row.net_size = groups.size() + ((empty_tuple && !groups.count("")) ? 1 : 0);
        // the empty tuple is represented by a support without interior when one exists
        InteriorProfile bare{Region(d), {Region(d)}};
        for (std::size_t i = 0; i < holed.size(); ++i) {
            const auto& rep = holed[rep_of[i]];
            bool empty_group = coarse_replica(holed[i].interiors[0], l).cubes.empty();
            double dist = (empty_group && any_empty) ? dbar(holed[i], bare, nu) : dbar(holed[i], rep, nu);
            row.worst_distance = std::max(row.worst_distance, dist);
        }
        if (row.worst_distance > row.radius) t.net_property = false;
        nets.push_back(row.net_size);
        t.rows.push_back(row);
    }
    for (int l = 1; l <= max_level; ++l)
        t.b4 = std::max(t.b4, std::log(static_cast<double>(nets[l])) * std::ldexp(1.0, l * (d - 1)) / (l * n));
    for (int l = 0; l <= max_level; ++l) {
        NetRow& row = t.rows[l];
        if (l == 0) {
            row.entropy_bound = static_cast<double>(t.family_size);
            row.dudley_term = row.radius * std::sqrt(std::log(static_cast<double>(t.family_size)));
        } else {
            row.entropy_bound = std::exp(t.b4 * l * n / std::ldexp(1.0, l * (d - 1)));
            row.dudley_term = (row.radius - t.rows[l - 1].radius) * std::sqrt(std::log(static_cast<double>(nets[l - 1])));
        }
        t.dudley += row.dudley_term;
    }
    return t;
}

std::vector<double> dudley_summands(int d, int L) {
    std::vector<double> out;
    for (int l = 1; l <= L; ++l) out.push_back(std::sqrt(static_cast<double>(l)) * std::pow(2.0, -l * (d - 2) / 2.0));
    return out;
}

bool dudley_summands_nonincreasing(int d, int L) {
    auto s = dudley_summands(d, L);
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] > s[i - 1] * (1 + 1e-12)) return false;
    return true;
}

}  // namespace pslab
