#pragma once

#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "pslab/disorder.hpp"
#include "pslab/lattice.hpp"

namespace pslab {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Spin values are indices in [0, n_values). Sites without an explicit entry take `background`.
struct Configuration {
    int background = 0;
    std::unordered_map<Site, int, SiteHash> values;

    Configuration() = default;
    explicit Configuration(int bg) : background(bg) {}

    int at(const Site& s) const {
        auto it = values.find(s);
        return it == values.end() ? background : it->second;
    }
    void set(const Site& s, int v) { values[s] = v; }
    Configuration shifted(const Site& u) const;
};

using BoundaryCondition = Configuration;

class SpinView {
public:
    virtual ~SpinView() = default;
    virtual int at(const Site& s) const = 0;
};

class ConfigView : public SpinView {
public:
    explicit ConfigView(const Configuration& c) : c_(c) {}
    int at(const Site& s) const override { return c_.at(s); }

private:
    const Configuration& c_;
};

// x^{b,Λ}: x on reg, bc elsewhere.
class BoundaryView : public SpinView {
public:
    BoundaryView(const Region& reg, const Configuration& x, const Configuration& bc) : reg_(reg), x_(x), bc_(bc) {}
    int at(const Site& s) const override { return reg_.contains(s) ? x_.at(s) : bc_.at(s); }

private:
    const Region& reg_;
    const Configuration& x_;
    const Configuration& bc_;
};

struct EtaSource {
    int beta = -1;  // -1: the term carries no random field
    Site offset{};  // η^α_s = ω^β_{s+offset}
};

struct InteractionTerm {
    std::string name;
    double h = 0.0;
    int range = 1;
    EtaSource eta;
    double lower_bound = -1.0;  // declared lower bound of g
};

// The site itself and its 2d nearest neighbours.
std::vector<Site> nearest_neighbour_star(int d);

enum class ModelKind { rfim, rfpm, ea, fa1b, hardcore_graph };

class Model {
public:
    virtual ~Model() = default;

    virtual std::string name() const = 0;
    int dim() const { return d_; }
    int n_values() const { return n_values_; }
    int n_terms() const { return static_cast<int>(terms_.size()); }
    const InteractionTerm& term(int a) const { return terms_[a]; }
    const std::vector<int>& ground_states() const { return ground_; }
    int n_ground() const { return static_cast<int>(ground_.size()); }
    int ground(int k) const { return ground_[k]; }
    double ground_energy() const { return e_g_; }
    double declared_rho() const { return rho_; }
    int n_beta() const { return n_beta_; }
    DistKind disorder_kind() const { return kind_; }
    int eta_radius() const { return eta_radius_; }

    virtual double g(int alpha, const Site& s, const SpinView& x) const = 0;
    // Σ_α (h^α + η^α_s) g^α_s(x); +∞ for forbidden states.
    virtual double local_energy(const Site& s, const SpinView& x, const RandomField& eta) const;
    virtual RandomField build_eta(const QuenchedConfig& omega, const Region& reg) const;
    // Sites whose quenched parameters build_eta needs for η on reg.
    virtual Region omega_support(const Region& reg) const { return dilate(reg, eta_radius_); }
    virtual std::string value_label(int v) const { return std::to_string(v); }
    // Offsets o such that the local energy at s may read x_{s+o}; the L∞ ball of the range by default.
    virtual std::vector<Site> read_offsets() const;

    // Minimises the per-site energy over constant configurations; sets ground_ and e_g_.
    void find_ground_states(double tol = 1e-12);

protected:
    int d_ = 2;
    int n_values_ = 2;
    std::vector<InteractionTerm> terms_;
    std::vector<int> ground_;
    double e_g_ = 0.0;
    double rho_ = 0.0;
    int n_beta_ = 0;
    DistKind kind_ = DistKind::gaussian;
    int eta_radius_ = 0;
};

using ModelPtr = std::shared_ptr<const Model>;

class RFIM : public Model {
public:
    RFIM(int d, double J);
    std::string name() const override { return "rfim"; }
    std::vector<Site> read_offsets() const override { return nearest_neighbour_star(d_); }
    double g(int alpha, const Site& s, const SpinView& x) const override;
    double local_energy(const Site& s, const SpinView& x, const RandomField& eta) const override;
    std::string value_label(int v) const override { return v == 0 ? "+" : "-"; }
    static int spin(int v) { return v == 0 ? 1 : -1; }
    double J() const { return J_; }

private:
    double J_;
};

class RFPM : public Model {
public:
    RFPM(int d, int Q, double J);
    std::string name() const override { return "rfpm"; }
    std::vector<Site> read_offsets() const override { return nearest_neighbour_star(d_); }
    double g(int alpha, const Site& s, const SpinView& x) const override;
    int Q() const { return Q_; }

private:
    int Q_;
    double J_;
};

class EdwardsAnderson : public Model {
public:
    EdwardsAnderson(int d, double Jbar);
    std::string name() const override { return "ea"; }
    std::vector<Site> read_offsets() const override { return nearest_neighbour_star(d_); }
    double g(int alpha, const Site& s, const SpinView& x) const override;
    std::string value_label(int v) const override { return v == 0 ? "+" : "-"; }
    double Jbar() const { return Jbar_; }

private:
    double Jbar_;
};

// Quenched FA-1B; gamma = +∞ is the hard-core limit.
class FA1B : public Model {
public:
    FA1B(int d, double mu, double gamma);
    std::string name() const override { return "fa1b"; }
    std::vector<Site> read_offsets() const override { return nearest_neighbour_star(d_); }
    double g(int alpha, const Site& s, const SpinView& x) const override;
    RandomField build_eta(const QuenchedConfig& omega, const Region& reg) const override;
    double mu() const { return mu_; }
    double gamma() const { return gamma_; }
    // Blocked-site indicator computed from occupations ω.
    static double blocked_indicator(int d, const Site& s, const std::function<double(const Site&)>& omega);

private:
    double mu_, gamma_;
};

// Hard-core gas on a crystal graph. Sites of Z^3 are unit cells, values are occupation bitmasks.
struct CrystalGraph {
    std::string name;
    int atoms = 0;
    // bonds (a, b, offset): atom a of cell s is adjacent to atom b of cell s+offset
    struct Bond {
        int a, b;
        Site offset;
    };
    std::vector<Bond> bonds;
    std::vector<std::vector<int>> neighbours_of;  // per atom, indices into bonds touching it (as a)
};

CrystalGraph make_crystal(const std::string& lattice);  // bcc, fcc, hcp
CrystalGraph crystal_from_adjacency(const std::string& name, int atoms, const std::vector<CrystalGraph::Bond>& bonds);

class HardcoreGraph : public Model {
public:
    HardcoreGraph(CrystalGraph graph, double mu, double gamma);
    std::string name() const override { return "hardcore_graph:" + graph_.name; }
    double g(int alpha, const Site& s, const SpinView& x) const override;
    const CrystalGraph& graph() const { return graph_; }
    int occupation(int v, int atom) const { return (codes_[v] >> atom) & 1; }

private:
    CrystalGraph graph_;
    double mu_, gamma_;
    std::vector<int> codes_;  // admissible cell masks
};

// Period-P re-encoding of a base model: one site per P^d block, terms indexed (α, offset).
class BlockedModel : public Model {
public:
    BlockedModel(ModelPtr base, int period);
    std::string name() const override { return base_->name() + "/blocked" + std::to_string(spec_.period()); }
    double g(int alpha, const Site& s, const SpinView& x) const override;
    RandomField build_eta(const QuenchedConfig& omega, const Region& reg) const override;
    Region omega_support(const Region& reg) const override;
    std::string value_label(int v) const override;

    const Model& base() const { return *base_; }
    const BlockingSpec& blocking() const { return spec_; }
    int base_value(int v, int offset) const { return spec_.digit(codes_[v], offset); }
    int encode(const std::vector<int>& digits) const;  // -1 if not an admissible block value
    // Base configuration (values on base sites) -> block configuration, and back.
    Configuration to_blocks(const Configuration& base_cfg, const Region& blocks) const;
    Configuration to_base(const Configuration& block_cfg, const Region& blocks) const;
    Region base_region(const Region& blocks) const;

private:
    ModelPtr base_;
    BlockingSpec spec_;
    std::vector<long long> codes_;
    std::unordered_map<long long, int> index_;
    int base_terms_;
};

struct ModelParams {
    ModelKind kind = ModelKind::rfim;
    int d = 2;
    double J = 1.0;
    int Q = 3;
    double mu = 1.0;
    double gamma = kInf;
    std::string lattice_graph = "bcc";
    int block_period = 0;  // 0: automatic (2 for antiferromagnetic EA and FA-1B)
};

ModelPtr make_model(const ModelParams& p);
ModelKind parse_model_kind(const std::string& s);
const char* model_kind_name(ModelKind k);

// Σ_{s∈reg} Σ_α (h^α + η^α_s) g^α_s(x^{bc,reg}).
double hamiltonian(const Model& m, const RandomField& eta, const Region& reg, const BoundaryCondition& bc,
                   const Configuration& x);
// Samples ω on model.omega_support(reg) and returns (ω, η on reg).
struct Disorder {
    QuenchedConfig omega;
    RandomField eta;
};
Disorder draw_disorder(const Model& m, const DistributionSpec& spec, const Region& reg, std::uint64_t seed);

// Largest L∞ distance at which a local energy reads spins.
int interaction_range(const Model& m);

// S^k_Λ = Σ_{s∈Λ} Σ_α η^α_s g^α_s(b^k)
double field_shift(const Model& m, const RandomField& eta, const Region& reg, int ground_value);

}  // namespace pslab
