#include "pslab/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "pslab/errors.hpp"
#include "pslab/rng.hpp"

namespace pslab {

namespace {

std::string symmetry_group(const Model& m) {
    if (auto* b = dynamic_cast<const BlockedModel*>(&m)) {
        const auto& base = b->base();
        if (dynamic_cast<const FA1B*>(&base) || dynamic_cast<const EdwardsAnderson*>(&base))
            return "unit translations";
        return "none provided for blocked " + base.name();
    }
    if (dynamic_cast<const RFIM*>(&m)) return "spin flip";
    if (dynamic_cast<const RFPM*>(&m)) return "cyclic permutations of the Potts states";
    if (auto* ea = dynamic_cast<const EdwardsAnderson*>(&m))
        return ea->Jbar() > 0 ? "spin flip" : "unit translations (blocked)";
    return "none provided";
}

void odometer(const Region& free, int nv, Configuration& x, const std::function<void()>& fn) {
    const auto& sites = free.sites();
    std::vector<int> digit(sites.size(), 0);
    for (const auto& s : sites) x.set(s, 0);
    while (true) {
        fn();
        std::size_t j = 0;
        while (j < sites.size() && ++digit[j] == nv) {
            digit[j] = 0;
            x.set(sites[j], 0);
            ++j;
        }
        if (j == sites.size()) return;
        x.set(sites[j], digit[j]);
    }
}

void check_states(int nv, std::size_t n, std::size_t budget, const char* what) {
    double states = std::pow(static_cast<double>(nv), static_cast<double>(n));
    if (states > static_cast<double>(budget))
        throw BudgetError(std::string(what) + ": " + std::to_string(n) + " free sites exceed the state budget");
}

double boundary_sum(const Region& reg, const RandomField& a, const RandomField& b, int n_terms) {
    double acc = 0.0;
    for (const auto& s : boundary(reg, 1, Side::internal))
        for (int al = 0; al < n_terms; ++al) acc += std::abs(a.get_or_zero(al, s)) + std::abs(b.get_or_zero(al, s));
    return acc;
}

RandomField eta_of(const Model& m, const QuenchedConfig& w, const Region& reg) {
    return m.n_beta() > 0 ? m.build_eta(w, reg) : RandomField::zeros(m.dim(), m.n_terms());
}

std::vector<std::pair<double, double>> atoms(const DistributionSpec& law) {
    const double e = law.epsilon;
    if (e == 0.0) return {{0.0, 1.0}};
    switch (law.kind) {
    case DistKind::bounded:
        if (law.law == BoundedLaw::two_point) return {{-e, 0.5}, {e, 0.5}};
        return {{-e * e * law.support_bound, 1.0 / (1.0 + e * e)}, {law.support_bound, e * e / (1.0 + e * e)}};
    case DistKind::bernoulli:
        return {{0.0, 1.0 - e * e}, {1.0, e * e}};
    case DistKind::gaussian:
        break;
    }
    return {};
}

}  // namespace

const char* transform_kind_name(TransformKind k) {
    switch (k) {
    case TransformKind::flip: return "flip";
    case TransformKind::potts_cycle: return "potts_cycle";
    case TransformKind::translate: return "translate";
    }
    return "?";
}

TransformKind parse_transform_kind(const std::string& s) {
    if (s == "flip") return TransformKind::flip;
    if (s == "potts_cycle" || s == "cycle") return TransformKind::potts_cycle;
    if (s == "translate") return TransformKind::translate;
    throw ParameterError("unknown transform kind '" + s + "'");
}

SymmetryPair::SymmetryPair(ModelPtr model, TransformSpec spec, int k1)
    : model_(std::move(model)), spec_(spec), k1_(k1) {
    const Model& m = *model_;
    if (k1 < 0 || k1 >= m.n_ground()) throw ParameterError("symmetry: ground-state label out of range");
    blocked_ = dynamic_cast<const BlockedModel*>(&m);
    const std::string group = symmetry_group(m);
    auto reject = [&] {
        throw ParameterError(std::string(transform_kind_name(spec.kind)) + " does not apply to " + m.name() +
                             "; its symmetry group is " + group);
    };
    vmap_.resize(m.n_values());
    for (int v = 0; v < m.n_values(); ++v) vmap_[v] = v;
    perm_.resize(m.n_beta());
    sign_.assign(m.n_beta(), 1.0);
    for (int b = 0; b < m.n_beta(); ++b) perm_[b] = b;

    switch (spec.kind) {
    case TransformKind::flip: {
        auto* ea = dynamic_cast<const EdwardsAnderson*>(&m);
        if (!dynamic_cast<const RFIM*>(&m) && !(ea && ea->Jbar() > 0)) reject();
        vmap_ = {1, 0};
        sign_.back() = -1.0;  // the site field is the last quenched index for both models
        break;
    }
    case TransformKind::potts_cycle: {
        auto* p = dynamic_cast<const RFPM*>(&m);
        if (!p) reject();
        const int Q = p->Q();
        const int sh = ((spec.shift % Q) + Q) % Q;
        for (int v = 0; v < Q; ++v) vmap_[v] = (v + sh) % Q;
        for (int b = 0; b < Q; ++b) perm_[b] = (b - sh + Q) % Q;
        break;
    }
    case TransformKind::translate: {
        if (!blocked_ || group != "unit translations") reject();
        if (spec.axis < 0 || spec.axis >= m.dim() || (spec.sign != 1 && spec.sign != -1))
            throw ParameterError("translate: u must be one of the 2d unit vectors");
        u_ = unit(spec.axis, spec.sign);
        break;
    }
    }

    Site lo;
    for (int i = 0; i < m.dim(); ++i) lo[i] = -1;
    Region probe = Region::cube(m.dim(), 3, lo);
    Configuration img = spin_map(Configuration(m.ground(k1)), probe);
    for (int k = 0; k < m.n_ground(); ++k) {
        bool all = true;
        for (const auto& s : probe) all = all && img.at(s) == m.ground(k);
        if (all) k2_ = k;
    }
    if (k2_ < 0) throw ParameterError("symmetry: the transform does not map ground states to ground states");
}

Region SymmetryPair::base_cover(const Region& reg, int r) const {
    Region grown = dilate(reg, r);
    return blocked_ ? blocked_->base_region(grown) : grown;
}

Configuration SymmetryPair::spin_map(const Configuration& x, const Region& reg) const {
    Configuration out(k2_ >= 0 ? model_->ground(k2_) : x.background);
    if (!blocked_) {
        for (const auto& s : reg) out.set(s, vmap_[x.at(s - u_)]);
        return out;
    }
    Configuration base = blocked_->to_base(x, dilate(reg, 1));
    const auto& bs = blocked_->blocking();
    std::vector<int> digits(bs.cell_size());
    for (const auto& s : reg) {
        for (int j = 0; j < bs.cell_size(); ++j) digits[j] = base.at(bs.base_site(s, j) - u_);
        int v = blocked_->encode(digits);
        if (v < 0) throw DomainError("translated configuration has an inadmissible block");
        out.set(s, v);
    }
    return out;
}

Region SymmetryPair::quench_domain(const Region& reg) const { return base_cover(reg, 1); }

Region SymmetryPair::p_set(const Region& reg) const {
    if (spec_.kind == TransformKind::translate) return quench_domain(reg).translated(Site{} - u_);
    return base_cover(reg, 2);
}

QuenchedConfig SymmetryPair::quench_map(const QuenchedConfig& omega, const Region& reg) const {
    Region dom = quench_domain(reg);
    QuenchedConfig out{omega.d, omega.seed, dom, {}};
    out.values.resize(model_->n_beta());
    for (int b = 0; b < model_->n_beta(); ++b) {
        out.values[b].reserve(dom.size());
        for (const auto& s : dom) out.values[b][s] = sign_[b] * omega.at(perm_[b], s - u_);
    }
    return out;
}

SymmetryPair make_transform(ModelPtr model, TransformSpec spec, int k1) { return SymmetryPair(std::move(model), spec, k1); }

SymmetryPair natural_transform(ModelPtr model, int k1, int k2) {
    const Model& m = *model;
    if (dynamic_cast<const RFPM*>(&m))
        return SymmetryPair(model, {TransformKind::potts_cycle, m.ground(k2) - m.ground(k1)}, k1);
    if (dynamic_cast<const BlockedModel*>(&m)) {
        for (int axis = 0; axis < m.dim(); ++axis)
            for (int sg : {1, -1}) {
                SymmetryPair pair(model, {TransformKind::translate, 1, axis, sg}, k1);
                if (pair.k2() == k2) return pair;
            }
        throw ParameterError("symmetry: no unit translation maps the requested ground states");
    }
    SymmetryPair pair(model, {TransformKind::flip}, k1);
    if (pair.k2() != k2) throw ParameterError("symmetry: flip does not map the requested ground states");
    return pair;
}

bool check_locality(const SymmetryPair& p, const Region& reg, std::size_t trials, std::uint64_t seed) {
    const Model& m = p.model();
    std::mt19937_64 rng(seed);
    const Region ext = dilate(reg, 1);
    const auto& es = ext.sites();
    std::uniform_int_distribution<int> value(0, m.n_values() - 1);
    std::uniform_int_distribution<std::size_t> pick(0, es.size() - 1);
    const Region wide = dilate(reg, 2);
    const RandomField zero = RandomField::zeros(m.dim(), m.n_terms());
    const Configuration bc(m.ground(p.k1()));
    auto admissible = [&](const Configuration& x) { return std::isfinite(hamiltonian(m, zero, wide, bc, x)); };
    std::size_t evaluated = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        // random finite-energy configuration from accepted single-site moves
        Configuration x(m.ground(p.k1()));
        for (std::size_t k = 0; k < es.size(); ++k) {
            const Site s = es[pick(rng)];
            const int old = x.at(s);
            x.set(s, value(rng));
            if (!admissible(x)) x.set(s, old);
        }
        const Site at = es[pick(rng)];
        Configuration x2 = x;
        for (int tries = 0; tries < 2 * m.n_values() && x2.at(at) == x.at(at); ++tries) {
            x2.set(at, value(rng));
            if (!admissible(x2)) x2.set(at, x.at(at));
        }
        if (x2.at(at) == x.at(at)) continue;
        try {
            Configuration y = p.spin_map(x, reg), y2 = p.spin_map(x2, reg);
            ++evaluated;
            for (const auto& s : reg)
                if (y.at(s) != y2.at(s) && linf(s, at, m.dim()) > 1) return false;
        } catch (const DomainError&) {
        }
    }
    if (m.n_beta() == 0) return evaluated > 0;
    const Region pset = p.p_set(reg);
    const auto& ps = pset.sites();
    std::uniform_int_distribution<std::size_t> pick_w(0, ps.size() - 1);
    std::uniform_int_distribution<int> pick_b(0, m.n_beta() - 1);
    for (std::size_t t = 0; t < trials; ++t) {
        QuenchedConfig w = sample_omega({DistKind::gaussian, 1.0}, m.n_beta(), pset, 0, derive_seed(seed, t));
        const Site at = ps[pick_w(rng)];
        const int b = pick_b(rng);
        QuenchedConfig w2 = w;
        w2.set(b, at, w.at(b, at) + 1.0);
        QuenchedConfig y = p.quench_map(w, reg), y2 = p.quench_map(w2, reg);
        for (int bb = 0; bb < m.n_beta(); ++bb)
            for (const auto& s : y.covered)
                if (y.at(bb, s) != y2.at(bb, s) && linf(s, at, m.dim()) > 1) return false;
    }
    return evaluated > 0;
}

bool check_injectivity(const SymmetryPair& p, const Region& reg, std::size_t budget, std::size_t* checked) {
    const Model& m = p.model();
    const Region free = erode(reg, 1);
    check_states(m.n_values(), free.size(), budget, "injectivity");
    const RandomField zero = RandomField::zeros(m.dim(), m.n_terms());
    const Configuration bc(m.ground(p.k1()));
    Configuration x(m.ground(p.k1()));
    std::set<std::vector<int>> images;
    std::size_t n = 0;
    bool ok = true;
    odometer(free, m.n_values(), x, [&] {
        if (!ok || !std::isfinite(hamiltonian(m, zero, reg, bc, x))) return;
        std::vector<int> key;
        try {
            Configuration y = p.spin_map(x, reg);
            key.reserve(reg.size());
            for (const auto& s : reg) key.push_back(y.at(s));
        } catch (const DomainError&) {
            ok = false;
            return;
        }
        ++n;
        if (!images.insert(std::move(key)).second) ok = false;
    });
    if (checked) *checked = n;
    return ok;
}

void check_energy(const SymmetryPair& p, const Region& reg, const DistributionSpec& law, std::size_t draws,
                  std::uint64_t seed, std::size_t budget, SymmetryReport& out) {
    const Model& m = p.model();
    const Region free = erode(reg, 2);
    check_states(m.n_values(), free.size(), budget / (draws + 1), "energy check");
    const Region cover = unite(p.p_set(reg), m.omega_support(reg));
    std::vector<QuenchedConfig> omegas{zero_omega(m.dim(), m.n_beta(), cover, 0)};
    if (m.n_beta() > 0)
        for (std::size_t i = 0; i < draws; ++i)
            omegas.push_back(sample_omega(law, m.n_beta(), cover, 0, derive_seed(seed, i)));
    const Configuration bc1(m.ground(p.k1())), bc2(m.ground(p.k2()));
    for (const auto& w : omegas) {
        const RandomField eta = eta_of(m, w, reg);
        const RandomField teta = eta_of(m, p.quench_map(w, reg), reg);
        const double bound = boundary_sum(reg, eta, teta, m.n_terms());
        Configuration x(m.ground(p.k1()));
        odometer(free, m.n_values(), x, [&] {
            const double h1 = hamiltonian(m, eta, reg, bc1, x);
            if (!std::isfinite(h1)) return;
            ++out.configurations;
            double h2;
            try {
                h2 = hamiltonian(m, teta, reg, bc2, p.spin_map(x, reg));
            } catch (const DomainError&) {
                out.energy = false;
                return;
            }
            const double gap = std::abs(h1 - h2);
            out.max_energy_gap = std::max(out.max_energy_gap, gap);
            out.min_energy_margin = std::min(out.min_energy_margin, bound - gap);
            if (!(gap <= bound + 1e-9 * (1.0 + std::abs(h1)))) out.energy = false;
        });
    }
}

SymmetryReport verify_local_symmetry(const SymmetryPair& p, const Region& reg, const DistributionSpec& law,
                                     std::size_t trials, std::uint64_t seed, std::size_t budget) {
    const Model& m = p.model();
    SymmetryReport r;
    r.locality = check_locality(p, reg, trials, derive_seed(seed, 1));
    r.injectivity = check_injectivity(p, reg, budget, &r.injectivity_checked);
    check_energy(p, reg, law, std::min<std::size_t>(trials, 8), derive_seed(seed, 2), budget, r);
    if (m.n_beta() == 0) return r;

    const Region pset = p.p_set(reg);
    std::mt19937_64 rng(derive_seed(seed, 3));
    const auto& ps = pset.sites();
    std::uniform_int_distribution<std::size_t> pick_w(0, ps.size() - 1);
    std::uniform_int_distribution<int> pick_b(0, m.n_beta() - 1);
    for (std::size_t t = 0; t < trials; ++t) {
        QuenchedConfig w = sample_omega({DistKind::gaussian, 1.0}, m.n_beta(), pset, 0, derive_seed(seed, 100 + t));
        const Site at = ps[pick_w(rng)];
        const int b = pick_b(rng);
        const double delta = 1e-3 * (1.0 + std::abs(w.at(b, at)));
        QuenchedConfig w2 = w;
        w2.set(b, at, w.at(b, at) + delta);
        QuenchedConfig y = p.quench_map(w, reg), y2 = p.quench_map(w2, reg);
        for (int bb = 0; bb < m.n_beta(); ++bb)
            for (const auto& s : y.covered)
                r.lipschitz_estimate = std::max(r.lipschitz_estimate, std::abs(y2.at(bb, s) - y.at(bb, s)) / delta);
    }
    r.lipschitz = r.lipschitz_estimate <= p.lipschitz() * (1 + 1e-9);

    // Trace which quenched coordinate each output reads; invariance needs one distinct source per
    // output and a coordinate map that preserves the single-site law.
    const Region dom = p.quench_domain(reg);
    QuenchedConfig zero = zero_omega(m.dim(), m.n_beta(), pset, 0);
    QuenchedConfig base = p.quench_map(zero, reg);
    std::map<std::pair<int, Site>, std::vector<std::pair<int, Site>>> sources;
    std::map<std::pair<int, Site>, double> coef;
    for (int b = 0; b < m.n_beta(); ++b)
        for (const auto& t : ps) {
            QuenchedConfig w = zero;
            w.set(b, t, 1.0);
            QuenchedConfig y = p.quench_map(w, reg);
            for (int bb = 0; bb < m.n_beta(); ++bb)
                for (const auto& s : dom)
                    if (y.at(bb, s) != base.at(bb, s)) {
                        sources[{bb, s}].push_back({b, t});
                        coef[{bb, s}] = y.at(bb, s) - base.at(bb, s);
                    }
        }
    std::set<std::pair<int, Site>> used;
    std::set<double> coefs;
    for (int bb = 0; bb < m.n_beta(); ++bb)
        for (const auto& s : dom) {
            auto it = sources.find({bb, s});
            if (it == sources.end() || it->second.size() != 1 || !used.insert(it->second[0]).second) {
                r.measure = false;
                return r;
            }
            if (base.at(bb, s) != 0.0) r.measure = false;
            coefs.insert(coef[{bb, s}]);
        }
    auto at = atoms(law);
    if (!at.empty()) {
        r.measure_exact = true;
        auto sorted = at;
        std::sort(sorted.begin(), sorted.end());
        for (double c : coefs) {
            auto pushed = at;
            for (auto& [v, pr] : pushed) v *= c;
            std::sort(pushed.begin(), pushed.end());
            for (std::size_t i = 0; i < sorted.size(); ++i)
                if (std::abs(pushed[i].first - sorted[i].first) > 1e-12 ||
                    std::abs(pushed[i].second - sorted[i].second) > 1e-12)
                    r.measure = false;
        }
        return r;
    }
    // continuous law: pooled Kolmogorov-Smirnov against N(0, ε²)
    std::vector<double> sample;
    for (std::size_t t = 0; t < trials; ++t) {
        QuenchedConfig y = p.quench_map(sample_omega(law, m.n_beta(), pset, 0, derive_seed(seed, 5000 + t)), reg);
        for (int bb = 0; bb < m.n_beta(); ++bb)
            for (const auto& s : dom) sample.push_back(y.at(bb, s));
    }
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double dmax = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double F = 0.5 * std::erfc(-sample[i] / (law.epsilon * std::sqrt(2.0)));
        dmax = std::max({dmax, F - i / n, (i + 1) / n - F});
    }
    r.ks_statistic = dmax;
    // asymptotic critical value at level 0.01 for the pooled sample
    r.ks_critical = 1.6276 / std::sqrt(n);
    r.measure = r.measure && dmax <= r.ks_critical;
    return r;
}

}  // namespace pslab
