#include "pslab/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pslab/errors.hpp"

namespace pslab {

Configuration Configuration::shifted(const Site& u) const {
    Configuration out(background);
    for (const auto& [s, v] : values) out.values[s + u] = v;
    return out;
}

namespace {

class ConstantView : public SpinView {
public:
    explicit ConstantView(int v) : v_(v) {}
    int at(const Site&) const override { return v_; }

private:
    int v_;
};

}  // namespace

std::vector<Site> nearest_neighbour_star(int d) {
    std::vector<Site> out{Site{}};
    for (const auto& n : l1_neighbors(d)) out.push_back(n);
    return out;
}

std::vector<Site> Model::read_offsets() const {
    int r = 0;
    for (const auto& t : terms_) r = std::max(r, t.range);
    return linf_ball(d_, r);
}

double Model::local_energy(const Site& s, const SpinView& x, const RandomField& eta) const {
    double e = 0.0;
    for (int a = 0; a < n_terms(); ++a) {
        double coef = terms_[a].h + eta.get_or_zero(a, s);
        if (coef == 0.0) continue;
        e += coef * g(a, s, x);
    }
    return e;
}

RandomField Model::build_eta(const QuenchedConfig& omega, const Region& reg) const {
    RandomField eta = RandomField::zeros(d_, n_terms());
    for (int a = 0; a < n_terms(); ++a) {
        const auto& src = terms_[a].eta;
        if (src.beta < 0) continue;
        for (const auto& s : reg) eta.set(a, s, omega.at(src.beta, s + src.offset));
    }
    return eta;
}

void Model::find_ground_states(double tol) {
    std::vector<double> e(n_values_);
    RandomField zero = RandomField::zeros(d_, n_terms());
    double best = kInf;
    for (int v = 0; v < n_values_; ++v) {
        e[v] = local_energy(Site{}, ConstantView(v), zero);
        best = std::min(best, e[v]);
    }
    if (!std::isfinite(best)) throw ParameterError("model has no finite-energy constant configuration");
    ground_.clear();
    for (int v = 0; v < n_values_; ++v)
        if (e[v] <= best + tol) ground_.push_back(v);
    e_g_ = best;
}

RFIM::RFIM(int d, double J) : J_(J) {
    if (!(J > 0)) throw ParameterError("rfim: J must be > 0");
    if (d < 1 || d > kMaxDim) throw ParameterError("rfim: unsupported dimension");
    d_ = d;
    n_values_ = 2;
    terms_ = {{"bond", -d * J, 1, {}, -1.0}, {"field", 0.0, 0, {0, Site{}}, -1.0}};
    n_beta_ = 1;
    eta_radius_ = 0;
    rho_ = J / std::pow(3.0, d);
    find_ground_states();
}

double RFIM::g(int alpha, const Site& s, const SpinView& x) const {
    const int xs = spin(x.at(s));
    if (alpha == 1) return -xs;
    double acc = 0;
    for (int i = 0; i < d_; ++i) acc += spin(x.at(s + unit(i, 1))) + spin(x.at(s + unit(i, -1)));
    return xs * acc / (2.0 * d_);
}

double RFIM::local_energy(const Site& s, const SpinView& x, const RandomField& eta) const {
    const int xs = spin(x.at(s));
    double acc = 0;
    for (int i = 0; i < d_; ++i) acc += spin(x.at(s + unit(i, 1))) + spin(x.at(s + unit(i, -1)));
    return -J_ * 0.5 * xs * acc - eta.get_or_zero(1, s) * xs;
}

RFPM::RFPM(int d, int Q, double J) : Q_(Q), J_(J) {
    if (Q < 2) throw ParameterError("rfpm: Q must be >= 2");
    if (!(J > 0)) throw ParameterError("rfpm: J must be > 0");
    if (d < 1 || d > kMaxDim) throw ParameterError("rfpm: unsupported dimension");
    d_ = d;
    n_values_ = Q;
    terms_.push_back({"bond", -d * J, 1, {}, 0.0});
    for (int q = 0; q < Q; ++q) terms_.push_back({"field" + std::to_string(q + 1), 0.0, 0, {q, Site{}}, -1.0});
    n_beta_ = Q;
    rho_ = J / std::pow(3.0, d);
    find_ground_states();
}

double RFPM::g(int alpha, const Site& s, const SpinView& x) const {
    const int xs = x.at(s);
    if (alpha >= 1) return xs == alpha - 1 ? -1.0 : 0.0;
    int same = 0;
    for (int i = 0; i < d_; ++i) same += (x.at(s + unit(i, 1)) == xs) + (x.at(s + unit(i, -1)) == xs);
    return same / (2.0 * d_);
}

EdwardsAnderson::EdwardsAnderson(int d, double Jbar) : Jbar_(Jbar) {
    if (Jbar == 0.0 || !std::isfinite(Jbar)) throw ParameterError("ea: Jbar must be nonzero and finite");
    if (d < 1 || d > kMaxDim) throw ParameterError("ea: unsupported dimension");
    d_ = d;
    n_values_ = 2;
    for (int i = 0; i < d; ++i) {
        terms_.push_back({"bond" + std::to_string(i) + "+", Jbar, 1, {i, Site{}}, -0.5});
        terms_.push_back({"bond" + std::to_string(i) + "-", Jbar, 1, {i, unit(i, -1)}, -0.5});
    }
    terms_.push_back({"field", 0.0, 0, {d, Site{}}, -1.0});
    n_beta_ = d + 1;
    eta_radius_ = 1;
    rho_ = std::abs(Jbar) / std::pow(3.0, d);
    find_ground_states();
}

double EdwardsAnderson::g(int alpha, const Site& s, const SpinView& x) const {
    const int xs = RFIM::spin(x.at(s));
    if (alpha == 2 * d_) return -xs;
    const int i = alpha / 2, sign = alpha % 2 == 0 ? 1 : -1;
    return -0.5 * xs * RFIM::spin(x.at(s + unit(i, sign)));
}

FA1B::FA1B(int d, double mu, double gamma) : mu_(mu), gamma_(gamma) {
    if (!(mu > 0)) throw ParameterError("fa1b: mu must be > 0");
    if (!(gamma > 0)) throw ParameterError("fa1b: gamma must be > 0 or infinite");
    if (d < 1 || d > kMaxDim) throw ParameterError("fa1b: unsupported dimension");
    d_ = d;
    n_values_ = 2;
    terms_ = {{"c", 0.5, 1, {}, -mu}, {"b", 0.0, 1, {0, Site{}}, std::isinf(gamma) ? 0.0 : -2.0 * d * gamma}};
    n_beta_ = 1;
    kind_ = DistKind::bernoulli;
    eta_radius_ = 2;
    rho_ = 0.5 / std::pow(3.0, d);
    find_ground_states();
}

double FA1B::g(int alpha, const Site& s, const SpinView& x) const {
    const int xs = x.at(s);
    int occ = 0;
    if (xs == 1)
        for (int i = 0; i < d_; ++i) occ += x.at(s + unit(i, 1)) + x.at(s + unit(i, -1));
    if (alpha == 0) {
        if (std::isinf(gamma_)) return occ > 0 ? kInf : -mu_ * xs;
        return -mu_ * xs + gamma_ * occ;
    }
    if (std::isinf(gamma_)) return 0.5 * mu_ * xs;
    return 0.5 * mu_ * xs - gamma_ * occ;
}

double FA1B::blocked_indicator(int d, const Site& s, const std::function<double(const Site&)>& omega) {
    auto none_occupied = [&](const Site& c) {
        double p = 1.0;
        for (int i = 0; i < d; ++i) p *= (1.0 - omega(c + unit(i, 1))) * (1.0 - omega(c + unit(i, -1)));
        return p;
    };
    const double ws = omega(s);
    double outer = 1.0;
    for (int i = 0; i < d; ++i)
        for (int sg : {1, -1}) {
            Site t = s + unit(i, sg);
            outer *= 1.0 - omega(t) * (1.0 - none_occupied(t));
        }
    return ws * (1.0 - none_occupied(s)) + (1.0 - ws) * (1.0 - outer);
}

RandomField FA1B::build_eta(const QuenchedConfig& omega, const Region& reg) const {
    RandomField eta = RandomField::zeros(d_, n_terms());
    auto w = [&](const Site& t) { return omega.at(0, t); };
    for (const auto& s : reg) eta.set(1, s, blocked_indicator(d_, s, w));
    return eta;
}

CrystalGraph crystal_from_adjacency(const std::string& name, int atoms, const std::vector<CrystalGraph::Bond>& bonds) {
    CrystalGraph g;
    g.name = name;
    g.atoms = atoms;
    g.neighbours_of.assign(atoms, {});
    auto has = [&](int a, int b, const Site& o) {
        for (const auto& e : g.bonds)
            if (e.a == a && e.b == b && e.offset == o) return true;
        return false;
    };
    for (const auto& e : bonds) {
        if (e.a < 0 || e.a >= atoms || e.b < 0 || e.b >= atoms)
            throw ParameterError("lattice_graph: atom index out of range");
        if (linf(e.offset, Site{}, 3) > 1) throw ParameterError("lattice_graph: bonds must join adjacent cells");
        if (e.a == e.b && e.offset == Site{}) throw ParameterError("lattice_graph: self loop");
        if (!has(e.a, e.b, e.offset)) g.bonds.push_back(e);
        if (!has(e.b, e.a, -e.offset)) g.bonds.push_back({e.b, e.a, -e.offset});
    }
    for (int i = 0; i < static_cast<int>(g.bonds.size()); ++i) g.neighbours_of[g.bonds[i].a].push_back(i);
    return g;
}

CrystalGraph make_crystal(const std::string& lattice) {
    using V = std::array<double, 3>;
    std::array<V, 3> cell;
    std::vector<V> pos;
    if (lattice == "bcc") {
        cell = {V{1, 0, 0}, V{0, 1, 0}, V{0, 0, 1}};
        pos = {{0, 0, 0}, {0.5, 0.5, 0.5}};
    } else if (lattice == "fcc") {
        cell = {V{1, 0, 0}, V{0, 1, 0}, V{0, 0, 1}};
        pos = {{0, 0, 0}, {0.5, 0.5, 0}, {0.5, 0, 0.5}, {0, 0.5, 0.5}};
    } else if (lattice == "hcp") {
        const double r3 = std::sqrt(3.0), r6 = std::sqrt(6.0);
        V a1{r3 / 2, 0.5, 0}, a2{r3 / 2, -0.5, 0}, c{0, 0, 2 * r6 / 3};
        cell = {V{2 * a1[0], 2 * a1[1], 0}, V{2 * a2[0], 2 * a2[1], 0}, c};
        V b{r3 / 3, 0, r6 / 3};
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    pos.push_back({i * a1[0] + j * a2[0] + k * b[0], i * a1[1] + j * a2[1] + k * b[1],
                                   i * a1[2] + j * a2[2] + k * b[2]});
    } else {
        throw ParameterError("unknown lattice '" + lattice + "' (expected bcc, fcc or hcp)");
    }
    const int m = static_cast<int>(pos.size());
    auto at = [&](int a, const Site& o) {
        V p = pos[a];
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) p[k] += o[i] * cell[i][k];
        return p;
    };
    auto dist = [](const V& p, const V& q) {
        return std::sqrt((p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) + (p[2] - q[2]) * (p[2] - q[2]));
    };
    auto offsets = linf_ball(3, 1);
    double nn = kInf;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (const auto& o : offsets) {
                if (a == b && o == Site{}) continue;
                nn = std::min(nn, dist(at(a, Site{}), at(b, o)));
            }
    std::vector<CrystalGraph::Bond> bonds;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (const auto& o : offsets) {
                if (a == b && o == Site{}) continue;
                if (dist(at(a, Site{}), at(b, o)) < nn + 1e-9) bonds.push_back({a, b, o});
            }
    return crystal_from_adjacency(lattice, m, bonds);
}

HardcoreGraph::HardcoreGraph(CrystalGraph graph, double mu, double gamma)
    : graph_(std::move(graph)), mu_(mu), gamma_(gamma) {
    if (!(mu > 0)) throw ParameterError("hardcore_graph: mu must be > 0");
    if (!(gamma > 0)) throw ParameterError("hardcore_graph: gamma must be > 0 or infinite");
    if (graph_.atoms < 1 || graph_.atoms > 16) throw ParameterError("hardcore_graph: 1..16 atoms per cell supported");
    d_ = 3;
    for (int mask = 0; mask < (1 << graph_.atoms); ++mask) {
        bool ok = true;
        if (std::isinf(gamma_))
            for (const auto& e : graph_.bonds)
                if (e.offset == Site{} && ((mask >> e.a) & 1) && ((mask >> e.b) & 1)) ok = false;
        if (ok) codes_.push_back(mask);
    }
    n_values_ = static_cast<int>(codes_.size());
    terms_ = {{"c", 0.5, 1, {}, -mu * graph_.atoms}};
    n_beta_ = 0;
    rho_ = 0.0;
    find_ground_states();
}

double HardcoreGraph::g(int, const Site& s, const SpinView& x) const {
    const int self = codes_[x.at(s)];
    double e = 0;
    for (int a = 0; a < graph_.atoms; ++a) {
        if (!((self >> a) & 1)) continue;
        e -= mu_;
        int occ = 0;
        for (int bi : graph_.neighbours_of[a]) {
            const auto& b = graph_.bonds[bi];
            int other = b.offset == Site{} ? self : codes_[x.at(s + b.offset)];
            occ += (other >> b.b) & 1;
        }
        if (occ > 0) {
            if (std::isinf(gamma_)) return kInf;
            e += gamma_ * occ;
        }
    }
    return e;
}

namespace {

class BaseView : public SpinView {
public:
    BaseView(const BlockedModel& m, const SpinView& blocks) : m_(m), blocks_(blocks) {}
    int at(const Site& t) const override {
        const auto& spec = m_.blocking();
        return m_.base_value(blocks_.at(spec.block_of(t)), spec.offset_index(t));
    }

private:
    const BlockedModel& m_;
    const SpinView& blocks_;
};

}  // namespace

BlockedModel::BlockedModel(ModelPtr base, int period)
    : base_(std::move(base)), spec_(base_->dim(), period, base_->n_values()), base_terms_(base_->n_terms()) {
    d_ = base_->dim();
    // admissible block values: finite internal energy with neutral (value 0) surroundings
    const int cells = spec_.cell_size();
    RandomField zero = RandomField::zeros(d_, base_terms_);
    for (long long code = 0; code < spec_.block_value_space_size(); ++code) {
        Configuration c(0);
        for (int j = 0; j < cells; ++j) c.set(spec_.offsets()[j], spec_.digit(code, j));
        ConfigView v(c);
        bool ok = true;
        for (int j = 0; j < cells && ok; ++j) ok = std::isfinite(base_->local_energy(spec_.offsets()[j], v, zero));
        if (ok) {
            index_[code] = static_cast<int>(codes_.size());
            codes_.push_back(code);
        }
    }
    n_values_ = static_cast<int>(codes_.size());
    for (int j = 0; j < cells; ++j)
        for (int a = 0; a < base_terms_; ++a) {
            InteractionTerm t = base_->term(a);
            t.name += "@" + std::to_string(j);
            t.range = 1;
            t.eta = {};
            terms_.push_back(t);
        }
    n_beta_ = base_->n_beta();
    kind_ = base_->disorder_kind();
    eta_radius_ = (base_->eta_radius() + period - 1) / period;
    rho_ = base_->declared_rho();
    find_ground_states();
}

double BlockedModel::g(int alpha, const Site& s, const SpinView& x) const {
    const int j = alpha / base_terms_, a = alpha % base_terms_;
    return base_->g(a, spec_.base_site(s, j), BaseView(*this, x));
}

RandomField BlockedModel::build_eta(const QuenchedConfig& omega, const Region& reg) const {
    RandomField base_eta = base_->build_eta(omega, base_region(reg));
    RandomField eta = RandomField::zeros(d_, n_terms());
    if (base_eta.zero) return eta;
    for (const auto& s : reg)
        for (int j = 0; j < spec_.cell_size(); ++j)
            for (int a = 0; a < base_terms_; ++a)
                eta.set(j * base_terms_ + a, s, base_eta.get_or_zero(a, spec_.base_site(s, j)));
    return eta;
}

Region BlockedModel::omega_support(const Region& reg) const { return base_->omega_support(base_region(reg)); }

std::string BlockedModel::value_label(int v) const {
    std::string out;
    for (int j = 0; j < spec_.cell_size(); ++j) out += base_->value_label(base_value(v, j));
    return out;
}

int BlockedModel::encode(const std::vector<int>& digits) const {
    auto it = index_.find(spec_.compose(digits));
    return it == index_.end() ? -1 : it->second;
}

Region BlockedModel::base_region(const Region& blocks) const {
    std::vector<Site> v;
    for (const auto& s : blocks)
        for (int j = 0; j < spec_.cell_size(); ++j) v.push_back(spec_.base_site(s, j));
    return Region(d_, std::move(v));
}

Configuration BlockedModel::to_blocks(const Configuration& base_cfg, const Region& blocks) const {
    Configuration out;
    std::vector<int> bg(spec_.cell_size(), base_cfg.background);
    // background of a constant base config is only representable if admissible
    int b = encode(bg);
    out.background = b < 0 ? 0 : b;
    for (const auto& s : blocks) {
        std::vector<int> digits(spec_.cell_size());
        for (int j = 0; j < spec_.cell_size(); ++j) digits[j] = base_cfg.at(spec_.base_site(s, j));
        int v = encode(digits);
        if (v < 0) throw DomainError("base configuration contains an inadmissible block");
        out.set(s, v);
    }
    return out;
}

Configuration BlockedModel::to_base(const Configuration& block_cfg, const Region& blocks) const {
    Configuration out(base_value(block_cfg.background, 0));
    for (const auto& s : blocks)
        for (int j = 0; j < spec_.cell_size(); ++j) out.set(spec_.base_site(s, j), base_value(block_cfg.at(s), j));
    return out;
}

ModelKind parse_model_kind(const std::string& s) {
    if (s == "rfim") return ModelKind::rfim;
    if (s == "rfpm") return ModelKind::rfpm;
    if (s == "ea") return ModelKind::ea;
    if (s == "fa1b" || s == "hardcore") return ModelKind::fa1b;
    if (s == "hardcore_graph") return ModelKind::hardcore_graph;
    throw ParameterError("unknown model '" + s + "'");
}

const char* model_kind_name(ModelKind k) {
    switch (k) {
    case ModelKind::rfim: return "rfim";
    case ModelKind::rfpm: return "rfpm";
    case ModelKind::ea: return "ea";
    case ModelKind::fa1b: return "fa1b";
    case ModelKind::hardcore_graph: return "hardcore_graph";
    }
    return "?";
}

ModelPtr make_model(const ModelParams& p) {
    ModelPtr base;
    int period = p.block_period;
    switch (p.kind) {
    case ModelKind::rfim:
        base = std::make_shared<RFIM>(p.d, p.J);
        break;
    case ModelKind::rfpm:
        base = std::make_shared<RFPM>(p.d, p.Q, p.J);
        break;
    case ModelKind::ea:
        base = std::make_shared<EdwardsAnderson>(p.d, p.J);
        if (period == 0 && p.J < 0) period = 2;
        break;
    case ModelKind::fa1b:
        base = std::make_shared<FA1B>(p.d, p.mu, p.gamma);
        if (period == 0) period = 2;
        break;
    case ModelKind::hardcore_graph:
        if (p.d != 3) throw ParameterError("hardcore_graph: d must be 3");
        return std::make_shared<HardcoreGraph>(make_crystal(p.lattice_graph), p.mu, p.gamma);
    }
    if (period > 1) return std::make_shared<BlockedModel>(base, period);
    return base;
}

double hamiltonian(const Model& m, const RandomField& eta, const Region& reg, const BoundaryCondition& bc,
                   const Configuration& x) {
    BoundaryView v(reg, x, bc);
    double e = 0.0;
    for (const auto& s : reg) {
        e += m.local_energy(s, v, eta);
        if (e == kInf) return kInf;
    }
    return e;
}

Disorder draw_disorder(const Model& m, const DistributionSpec& spec, const Region& reg, std::uint64_t seed) {
    Disorder out{sample_omega(spec, m.n_beta(), m.omega_support(reg), 0, seed), RandomField::zeros(m.dim(), m.n_terms())};
    if (m.n_beta() > 0) out.eta = m.build_eta(out.omega, reg);
    return out;
}

int interaction_range(const Model& m) {
    int r = 0;
    for (int a = 0; a < m.n_terms(); ++a) r = std::max(r, m.term(a).range);
    return r;
}

double field_shift(const Model& m, const RandomField& eta, const Region& reg, int ground_value) {
    if (eta.zero) return 0.0;
    ConstantView v(ground_value);
    double acc = 0.0;
    for (const auto& s : reg)
        for (int a = 0; a < m.n_terms(); ++a) {
            double e = eta.get_or_zero(a, s);
            if (e != 0.0) acc += e * m.g(a, s, v);
        }
    return acc;
}

}  // namespace pslab
