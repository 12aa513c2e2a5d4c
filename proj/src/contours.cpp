#include "pslab/contours.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "pslab/errors.hpp"

namespace pslab {

namespace {

int ground_index(const Model& m, int value) {
    const auto& gs = m.ground_states();
    auto it = std::find(gs.begin(), gs.end(), value);
    return it == gs.end() ? -1 : static_cast<int>(it - gs.begin());
}

class ConstView : public SpinView {
public:
    explicit ConstView(int v) : v_(v) {}
    int at(const Site&) const override { return v_; }

private:
    int v_;
};

}  // namespace

int Contour::value_at(const Site& s) const {
    const auto& st = support.sites();
    auto it = std::lower_bound(st.begin(), st.end(), s);
    if (it == st.end() || *it != s) throw DomainError("site outside the contour support");
    return values[it - st.begin()];
}

Region Contour::interior_k(int k) const {
    Region acc(support.dim());
    for (const auto& h : holes)
        if (h.k == k) acc = unite(acc, h.region);
    return acc;
}

Contour Contour::translated(const Site& u) const {
    Contour c = *this;
    c.support = support.translated(u);
    c.interior = interior.translated(u);
    for (auto& h : c.holes) h.region = h.region.translated(u);
    return c;
}

std::string Contour::canonical() const {
    std::ostringstream os;
    os << "d=" << support.dim() << " label=" << label << " n=" << support.size() << " |";
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Site& s = support.sites()[i];
        os << " ";
        for (int j = 0; j < support.dim(); ++j) os << (j ? "," : "") << s[j];
        os << ":" << values[i];
    }
    return os.str();
}

bool operator<(const Contour& a, const Contour& b) {
    if (a.support.size() != b.support.size()) return a.support.size() < b.support.size();
    if (a.support != b.support) return a.support < b.support;
    if (a.values != b.values) return a.values < b.values;
    return a.label < b.label;
}

Contour make_contour(const Model& m, const Region& support, const std::vector<int>& values) {
    if (support.empty()) throw DomainError("empty contour support");
    if (values.size() != support.size()) throw DomainError("contour values do not match the support");
    const int d = support.dim();
    Contour c;
    c.support = support;
    c.values = values;
    auto split = complement_components(support);
    std::vector<const Region*> comps{&split.outer_frame};
    for (const auto& h : split.holes) comps.push_back(&h);
    std::vector<int> comp_value(comps.size(), -1);
    auto ball = linf_ball(d, 1);
    for (std::size_t i = 0; i < support.size(); ++i) {
        const Site& s = support.sites()[i];
        for (std::size_t ci = 0; ci < comps.size(); ++ci) {
            bool adj = false;
            for (const auto& o : ball)
                if (comps[ci]->contains(s + o)) {
                    adj = true;
                    break;
                }
            if (!adj) continue;
            if (comp_value[ci] == -1) comp_value[ci] = values[i];
            else if (comp_value[ci] != values[i])
                throw DomainError("contour boundary facing a complement component is not constant");
        }
    }
    for (std::size_t ci = 0; ci < comps.size(); ++ci) {
        int k = ground_index(m, comp_value[ci]);
        if (k < 0) throw DomainError("contour boundary value is not a ground state");
        if (ci == 0) c.label = k;
        else c.holes.push_back({*comps[ci], k});
    }
    c.interior = Region(d);
    for (const auto& h : c.holes) c.interior = unite(c.interior, h.region);
    return c;
}

Configuration embed(const Model& m, const Contour& c) {
    Configuration x(m.ground(c.label));
    for (const auto& h : c.holes)
        for (const auto& s : h.region) x.set(s, m.ground(h.k));
    for (std::size_t i = 0; i < c.values.size(); ++i) x.set(c.support.sites()[i], c.values[i]);
    return x;
}

Region unstable_sites(const Model& m, const Configuration& x) {
    const int d = m.dim();
    if (ground_index(m, x.background) < 0) throw DomainError("configuration is not eventually constant at a ground state");
    std::vector<Site> dev;
    for (const auto& [s, v] : x.values)
        if (v != x.background) dev.push_back(s);
    Region cand = dilate(Region(d, dev), 1);
    auto ball = linf_ball(d, 1);
    std::vector<Site> u;
    for (const auto& s : cand) {
        bool unstable = true;
        for (int g : m.ground_states()) {
            bool differs = false;
            for (const auto& o : ball)
                if (x.at(s + o) != g) {
                    differs = true;
                    break;
                }
            if (!differs) {
                unstable = false;
                break;
            }
        }
        if (unstable) u.push_back(s);
    }
    return Region(d, std::move(u));
}

std::vector<Contour> extract_contours(const Model& m, const Configuration& x) {
    Region tb = dilate(unstable_sites(m, x), 1);
    std::vector<Contour> out;
    for (const auto& comp : connected_components(tb, Adjacency::linf)) {
        std::vector<int> vals;
        vals.reserve(comp.size());
        for (const auto& s : comp) vals.push_back(x.at(s));
        out.push_back(make_contour(m, comp, vals));
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool is_valid_contour(const Model& m, const Contour& c) {
    try {
        auto back = extract_contours(m, embed(m, c));
        return back.size() == 1 && back[0] == c;
    } catch (const DomainError&) {
        return false;
    }
}

bool nested_in(const Contour& inner, const Contour& outer) {
    if (inner.support.size() > outer.interior.size()) return false;
    for (const auto& s : inner.support)
        if (!outer.interior.contains(s)) return false;
    return true;
}

bool compatible(const Contour& a, const Contour& b) {
    const Contour& small = a.size() <= b.size() ? a : b;
    const Contour& big = a.size() <= b.size() ? b : a;
    const auto ball = linf_ball(small.support.dim(), 1);
    bool close = false;
    for (const auto& s : small.support) {
        for (const auto& o : ball)
            if (big.support.contains(s + o)) {
                close = true;
                break;
            }
        if (close) break;
    }
    if (!close) return true;
    return nested_in(a, b) || nested_in(b, a);
}

std::vector<Contour> external_contours(const std::vector<Contour>& cs) {
    std::vector<Contour> out;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        bool maximal = true;
        for (std::size_t j = 0; j < cs.size() && maximal; ++j)
            if (i != j && nested_in(cs[i], cs[j])) maximal = false;
        if (maximal) out.push_back(cs[i]);
    }
    return out;
}

namespace {

// All valid contours with support S (one translation class), appended to out.
void contours_on_support(const Model& m, const Region& S, int label_filter, std::vector<Contour>& out,
                         std::size_t& work, std::size_t budget) {
    auto split = complement_components(S);
    std::vector<Region> near;  // sites of S within distance 2 of each component
    near.push_back(intersect(dilate(split.outer_frame, 2), S));
    for (const auto& h : split.holes) near.push_back(intersect(dilate(h, 2), S));
    const int nh = static_cast<int>(split.holes.size());
    const int ng = m.n_ground();
    std::vector<int> comp_k(nh + 1, 0);
    long long assignments = 1;
    for (int i = 0; i <= nh; ++i) assignments *= ng;
    for (long long code = 0; code < assignments; ++code) {
        long long c = code;
        for (int i = 0; i <= nh; ++i) {
            comp_k[i] = static_cast<int>(c % ng);
            c /= ng;
        }
        if (label_filter >= 0 && comp_k[0] != label_filter) continue;
        std::vector<int> fixed(S.size(), -1);
        std::vector<std::size_t> free_idx;
        bool conflict = false;
        for (std::size_t i = 0; i < S.size() && !conflict; ++i) {
            const Site& s = S.sites()[i];
            for (int ci = 0; ci <= nh; ++ci) {
                if (!near[ci].contains(s)) continue;
                int v = m.ground(comp_k[ci]);
                if (fixed[i] == -1) fixed[i] = v;
                else if (fixed[i] != v) conflict = true;
            }
            if (fixed[i] == -1) free_idx.push_back(i);
        }
        if (conflict) continue;
        // with no free site only a wall between differing components can be unstable
        if (free_idx.empty() && std::all_of(comp_k.begin(), comp_k.end(), [&](int k) { return k == comp_k[0]; }))
            continue;
        std::vector<int> vals = fixed;
        std::vector<int> digit(free_idx.size(), 0);
        while (true) {
            if (++work > budget)
                throw BudgetError("contour enumeration limit exceeded (" + std::to_string(budget) + " candidates)");
            for (std::size_t j = 0; j < free_idx.size(); ++j) vals[free_idx[j]] = digit[j];
            Configuration x(m.ground(comp_k[0]));
            for (int h = 0; h < nh; ++h)
                for (const auto& s : split.holes[h]) x.set(s, m.ground(comp_k[h + 1]));
            for (std::size_t i = 0; i < S.size(); ++i) x.set(S.sites()[i], vals[i]);
            auto back = extract_contours(m, x);
            if (back.size() == 1 && back[0].support == S && back[0].values == vals) out.push_back(back[0]);
            std::size_t j = 0;
            while (j < digit.size() && ++digit[j] == m.n_values()) digit[j++] = 0;
            if (j == digit.size()) break;
        }
    }
}

}  // namespace

ContourEnumeration enumerate_contours(const Model& m, int n, bool anchored, int label, bool up_to,
                                      std::size_t budget) {
    if (n < 1) throw ParameterError("enumerate_contours: n must be >= 1");
    const int d = m.dim();
    std::vector<Site> nbrs;
    for (const auto& o : linf_ball(d, 3))
        if (o != Site{}) nbrs.push_back(o);
    ContourEnumeration res;
    std::vector<Contour> classes;
    std::size_t work = 0;
    const auto ball = linf_ball(d, 1);
    std::vector<Site> sites;
    redelmeier(d, n, nbrs, [&](const std::vector<Site>& cells) {
        // |dilate(U)| on a sorted vector; cheaper than building Regions for every visit
        sites.clear();
        for (const auto& c : cells)
            for (const auto& o : ball) sites.push_back(c + o);
        std::sort(sites.begin(), sites.end());
        sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
        if (static_cast<int>(sites.size()) > n) return false;
        if (++work > budget)
            throw BudgetError("contour support enumeration limit exceeded (" + std::to_string(budget) + ")");
        if (!up_to && static_cast<int>(sites.size()) != n) return true;
        std::size_t interior = 0;
        for (const auto& s : sites) {
            bool all = true;
            for (const auto& o : ball)
                if (!std::binary_search(sites.begin(), sites.end(), s + o)) {
                    all = false;
                    break;
                }
            interior += all;
        }
        if (interior == cells.size()) {
            ++res.supports_examined;
            contours_on_support(m, Region(d, sites), label, classes, work, budget);
        }
        return true;
    });
    if (!anchored) {
        res.contours = std::move(classes);
    } else {
        for (const auto& c : classes)
            for (const auto& q : unite(c.support, c.interior)) res.contours.push_back(c.translated(-q));
    }
    std::sort(res.contours.begin(), res.contours.end());
    return res;
}

std::vector<Contour> single_site_contours(const Model& m, int label) {
    std::vector<Contour> out;
    const int g = m.ground(label);
    for (int v = 0; v < m.n_values(); ++v) {
        if (v == g) continue;
        Configuration x(g);
        x.set(Site{}, v);
        for (auto& c : extract_contours(m, x)) out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double excitation_energy(const Model& m, const Contour& c, const RandomField& eta) {
    Configuration x = embed(m, c);
    ConfigView v(x);
    ConstView b(m.ground(c.label));
    double acc = 0.0;
    for (const auto& s : c.support) acc += m.local_energy(s, v, eta) - m.local_energy(s, b, eta);
    return acc;
}

PeierlsResult peierls_scan(const Model& m, const std::vector<Contour>& family) {
    PeierlsResult r;
    RandomField zero = RandomField::zeros(m.dim(), m.n_terms());
    for (const auto& c : family) {
        double ratio = excitation_energy(m, c, zero) / static_cast<double>(c.size());
        ++r.contours_scanned;
        if (ratio < r.rho_measured) {
            r.rho_measured = ratio;
            r.witness = c;
        }
    }
    r.meets_declared = r.rho_measured >= m.declared_rho() - 1e-12;
    return r;
}

PeierlsResult peierls_scan(const Model& m, int n_max, std::size_t budget) {
    try {
        auto e = enumerate_contours(m, n_max, false, -1, true, budget);
        return peierls_scan(m, e.contours);
    } catch (const BudgetError&) {
        std::vector<Contour> fam;
        for (int k = 0; k < m.n_ground(); ++k)
            for (auto& c : single_site_contours(m, k))
                if (static_cast<int>(c.size()) <= n_max) fam.push_back(std::move(c));
        PeierlsResult r = peierls_scan(m, fam);
        r.partial = true;
        return r;
    }
}

Decomposition hamiltonian_decomposition(const Model& m, const RandomField& eta, const Region& reg, int k0,
                                      const Configuration& x) {
    const int g0 = m.ground(k0);
    Configuration full = x;
    full.background = g0;
    Configuration bc(g0);
    Decomposition out;
    out.lhs = hamiltonian(m, eta, reg, bc, full);
    auto ext = external_contours(extract_contours(m, full));
    out.external = ext.size();
    ConstView ground(g0);
    Region covered(m.dim());
    double rhs = 0.0;
    for (const auto& c : ext) {
        Region body = unite(c.support, c.interior);
        for (const auto& s : body)
            if (!reg.contains(s)) throw DomainError("contour leaves the region; configuration is not admissible");
        covered = unite(covered, body);
        Configuration e = embed(m, c);
        ConfigView ev(e);
        for (const auto& s : c.support) rhs += m.local_energy(s, ev, eta);
        for (int k = 0; k < m.n_ground(); ++k) {
            Region ik = c.interior_k(k);
            if (!ik.empty()) rhs += hamiltonian(m, eta, ik, Configuration(m.ground(k)), full);
        }
    }
    for (const auto& s : reg)
        if (!covered.contains(s)) rhs += m.local_energy(s, ground, eta);
    out.rhs = rhs;
    return out;
}

}  // namespace pslab
