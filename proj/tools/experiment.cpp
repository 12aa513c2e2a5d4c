#include "experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <boost/version.hpp>
#include <openssl/evp.h>

#include "pslab/coarsegrain.hpp"
#include "pslab/errors.hpp"
#include "pslab/rng.hpp"
#include "pslab/sampler.hpp"

#ifndef PSLAB_VERSION
#define PSLAB_VERSION "0.0.0"
#endif

namespace pslab::cli {

namespace {

using json = nlohmann::ordered_json;

template <class E>
struct EnumNames {
    std::vector<std::pair<std::string, E>> entries;

    E parse(const std::string& key, const std::string& v) const {
        for (const auto& [n, e] : entries)
            if (n == v) return e;
        std::string expected;
        for (const auto& [n, e] : entries) expected += (expected.empty() ? "" : ", ") + n;
        throw ConfigError(key, "unknown value '" + v + "' (expected one of: " + expected + ")");
    }
    std::string name(E e) const {
        for (const auto& [n, x] : entries)
            if (x == e) return n;
        return "?";
    }
};

const EnumNames<ModelKind> kModels{{{"rfim", ModelKind::rfim},
                                    {"rfpm", ModelKind::rfpm},
                                    {"ea", ModelKind::ea},
                                    {"fa1b", ModelKind::fa1b},
                                    {"hardcore_graph", ModelKind::hardcore_graph}}};
const EnumNames<DistKind> kDists{
    {{"gaussian", DistKind::gaussian}, {"bounded", DistKind::bounded}, {"bernoulli", DistKind::bernoulli}}};
const EnumNames<BoundedLaw> kLaws{{{"two_point", BoundedLaw::two_point}, {"extremal", BoundedLaw::extremal}}};
const EnumNames<Statistic> kStats{
    {{"sum", Statistic::sum}, {"abs_sum", Statistic::abs_sum}, {"l2_norm", Statistic::l2_norm}}};
const EnumNames<TailBound> kBounds{{{"mcdiarmid", TailBound::mcdiarmid},
                                    {"gaussian", TailBound::gaussian},
                                    {"subgaussian_nu", TailBound::subgaussian_nu}}};
const EnumNames<StabilityEvent> kEvents{{{"fsc", StabilityEvent::fsc},
                                         {"qisc", StabilityEvent::qisc},
                                         {"fsir", StabilityEvent::fsir},
                                         {"all", StabilityEvent::all}}};
const EnumNames<TransformKind> kTransforms{{{"flip", TransformKind::flip},
                                            {"potts_cycle", TransformKind::potts_cycle},
                                            {"translate", TransformKind::translate}}};

// A YAML mapping whose keys are checked against an allowed set on construction.
class Block {
public:
    Block(const YAML::Node& node, std::string path, std::set<std::string> allowed) : node_(node), path_(std::move(path)) {
        if (!node_ || node_.IsNull()) return;
        if (!node_.IsMap()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected a mapping");
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) throw ConfigError(at(key), "unknown key");
        }
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }
    YAML::Node child(const std::string& key) const { return has(key) ? node_[key] : YAML::Node(); }

    template <class T>
    T get(const std::string& key, T def, const char* what) const {
        if (!has(key)) return def;
        try {
            return node_[key].as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(at(key), std::string("expected ") + what);
        }
    }
    double real(const std::string& key, double def) const { return get<double>(key, def, "a number"); }
    std::string text(const std::string& key, const std::string& def) const {
        return get<std::string>(key, def, "a string");
    }
    bool flag(const std::string& key, bool def) const { return get<bool>(key, def, "a boolean"); }
    long long integer(const std::string& key, long long def, long long lo, long long hi) const {
        long long v = get<long long>(key, def, "an integer");
        if (v < lo || v > hi)
            throw ConfigError(at(key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return v;
    }
    template <class T>
    std::vector<T> list(const std::string& key, std::vector<T> def, const char* what) const {
        if (!has(key)) return def;
        const YAML::Node n = node_[key];
        try {
            if (n.IsScalar()) return {n.as<T>()};
            if (!n.IsSequence() || n.size() == 0) throw ConfigError(at(key), std::string("expected a list of ") + what);
            std::vector<T> out;
            for (const auto& x : n) out.push_back(x.as<T>());
            return out;
        } catch (const YAML::Exception&) {
            throw ConfigError(at(key), std::string("expected a list of ") + what);
        }
    }

private:
    YAML::Node node_;
    std::string path_;
};

constexpr long long kBig = 1LL << 40;

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, r.ptr};
}

template <class I>
std::string num_i(I x) {
    return std::to_string(x);
}

bool needs_model(const std::string& sub) { return sub != "coarsegrain-audit" && sub != "tail-probe"; }

std::vector<int> labels_of(const ExperimentConfig& cfg, const Model& m) {
    if (!cfg.sampler.labels.empty()) {
        for (int k : cfg.sampler.labels)
            if (k < 0 || k >= m.n_ground())
                throw ConfigError("sampler.labels", "ground-state index " + std::to_string(k) + " out of range");
        return cfg.sampler.labels;
    }
    std::vector<int> out(static_cast<std::size_t>(m.n_ground()));
    for (int k = 0; k < m.n_ground(); ++k) out[static_cast<std::size_t>(k)] = k;
    return out;
}

void assertion(RunResult& r, const std::string& name, bool ok) {
    for (auto& [n, v] : r.assertions)
        if (n == name) {
            v = v && ok;
            return;
        }
    r.assertions.emplace_back(name, ok);
}

RunResult run_peierls(const ExperimentConfig& cfg) {
    auto m = build_model(cfg);
    auto scan = peierls_scan(*m, cfg.geometry.n_max, cfg.budget);
    if (scan.partial) throw BudgetError("peierls-scan: the contour enumeration exceeded the budget");
    RunResult r;
    r.header = {"model", "d", "n_max", "rho_declared", "rho_measured", "contours_scanned", "meets_declared",
                "witness", "seed", "config_hash"};
    r.rows.push_back({m->name(), num_i(m->dim()), num_i(cfg.geometry.n_max), num(m->declared_rho()),
                      num(scan.rho_measured), num_i(scan.contours_scanned), scan.meets_declared ? "1" : "0",
                      scan.witness ? scan.witness->canonical() : "", num_i(cfg.seed), config_hash(cfg)});
    assertion(r, "peierls_declared_rho", scan.meets_declared);
    r.overlays["peierls_ratio"] = "rho_measured = min over contours of D_0(C) / |sC|";
    return r;
}

RunResult run_polymer(const ExperimentConfig& cfg) {
    auto m = build_model(cfg);
    const Region reg = Region::cube(m->dim(), cfg.geometry.L);
    const auto labels = labels_of(cfg, *m);
    const std::uint64_t stream = labeled_seed(cfg.seed, "polymer");
    RunResult r;
    r.header = {"draw", "epsilon", "T", "k", "L", "contours", "log_lhs", "log_rhs", "max_rel_err", "seed",
                "config_hash"};
    double worst = 0;
    for (double eps : cfg.disorder.epsilons) {
        const auto law = law_at(cfg, m.get(), eps);
        for (std::size_t i = 0; i < cfg.sampler.draws; ++i) {
            Disorder dis = draw_disorder(*m, law, reg, derive_seed(stream, i));
            for (double T : cfg.sampler.temperatures)
                for (int k : labels) {
                    auto pc = polymer_identity_check(*m, dis.eta, reg, k, T, cfg.budget);
                    worst = std::max(worst, pc.max_rel_err);
                    r.rows.push_back({num_i(i), num(eps), num(T), num_i(k), num_i(cfg.geometry.L),
                                      num_i(pc.contours), num(pc.log_lhs), num(pc.log_rhs), num(pc.max_rel_err),
                                      num_i(cfg.seed), config_hash(cfg)});
                }
        }
    }
    assertion(r, "polymer_identity", worst <= 1e-10);
    r.summary["max_rel_err"] = worst;
    r.overlays["tolerance"] = 1e-10;
    return r;
}

RunResult run_stability(const ExperimentConfig& cfg) {
    auto m = build_model(cfg);
    const auto family = anchored_family(*m, cfg.geometry.n_max, cfg.budget);
    const std::uint64_t stream = labeled_seed(cfg.seed, "stability");
    RunResult r;
    r.header = {"event", "epsilon", "T", "n_max", "trials", "p_hat", "ci_lo", "ci_hi", "seed", "successes",
                "family_size", "rho", "config_hash"};
    std::vector<double> eps = cfg.disorder.epsilons;
    std::sort(eps.begin(), eps.end());
    const bool scale_monotone = (cfg.stability.event == StabilityEvent::fsc ||
                                 cfg.stability.event == StabilityEvent::qisc) &&
                                law_at(cfg, m.get(), 0.0).kind != DistKind::bernoulli;
    double rho = m->declared_rho();
    bool rho_measured = false;
    for (double T : cfg.sampler.temperatures) {
        double prev = 1.0;
        for (double e : eps) {
            auto est = estimate_event_probability(cfg.stability.event, m, law_at(cfg, m.get(), e), cfg.geometry.n_max,
                                                  cfg.stability.trials, T, stream, cfg.threads, &family, cfg.budget);
            rho = est.rho;
            rho_measured = est.rho_measured;
            r.rows.push_back({event_name(est.event), num(e), num(T), num_i(est.n_max), num_i(est.trials),
                              num(est.p_hat), num(est.ci.lo), num(est.ci.hi), num_i(cfg.seed),
                              num_i(est.successes), num_i(est.family_size), num(est.rho), config_hash(cfg)});
            assertion(r, "ci_contains_p_hat", est.ci.lo <= est.p_hat && est.p_hat <= est.ci.hi);
            if (scale_monotone) assertion(r, "monotone_in_epsilon", est.p_hat <= prev);
            prev = est.p_hat;
        }
    }
    r.summary["family_size"] = family.size();
    r.summary["vacuous"] = family.empty();
    r.summary["rho"] = rho;
    r.summary["rho_measured"] = rho_measured;
    r.overlays["threshold"] = "rho * |sC| / 4";
    r.overlays["contour_bound"] = "exp(-rho * n / (4 * T))";
    return r;
}

RunResult run_audit(const ExperimentConfig& cfg) {
    const int d = cfg.geometry.d;
    auto suite = blob_suite(d, cfg.audit.instances, labeled_seed(cfg.seed, "audit"), cfg.audit.min_size,
                            cfg.audit.max_size);
    auto a = audit_geometry(suite, cfg.geometry.ell_max);
    RunResult r;
    r.header = {"instance_id", "ℓ", "lhs", "rhs", "ratio", "constant_name", "seed", "config_hash"};
    for (const auto& row : a.rows) {
        if (row.level < cfg.geometry.ell_min || row.level > cfg.geometry.ell_max) continue;
        r.rows.push_back({num_i(row.instance), num_i(row.level), num(row.lhs), num(row.rhs), num(row.ratio),
                          row.constant, num_i(cfg.seed), config_hash(cfg)});
    }
    assertion(r, "degradation", a.degradation_ok);
    assertion(r, "replicas_empty_beyond_l0", a.replicas_empty_beyond_l0);
    r.summary["b0"] = a.b0;
    r.summary["b1"] = a.b1;
    r.summary["b2"] = a.b2;
    r.summary["b3"] = b3_from_b2(a.b2, d);
    r.summary["face_pairs"] = a.face_pairs;
    if (cfg.audit.covering_n > 0) {
        const double nu = nu_of_epsilon(law_at(cfg, nullptr, cfg.disorder.epsilons.front()));
        auto cov = covering_and_entropy(cfg.audit.covering_n, d, cfg.geometry.ell_max, nu, a.b2, cfg.budget);
        assertion(r, "net_property", cov.net_property);
        json rows = json::array();
        for (const auto& nr : cov.rows)
            rows.push_back({{"level", nr.level},
                            {"radius", nr.radius},
                            {"net_size", nr.net_size},
                            {"entropy_bound", nr.entropy_bound},
                            {"dudley_term", nr.dudley_term},
                            {"worst_distance", nr.worst_distance}});
        r.summary["covering"] = {{"n", cov.n},     {"nu", cov.nu},         {"b3", cov.b3},
                                 {"b4", cov.b4},   {"family_size", cov.family_size},
                                 {"dudley", cov.dudley}, {"levels", rows}};
    }
    r.overlays["b3"] = "2 (sqrt(2) + 1) sqrt(2 b2) + sqrt(2) 5^(d/2)";
    r.overlays["l0"] = "ceil(ln(b1 |Λ|) / ((d - 1) ln 2))";
    return r;
}

RunResult run_count(const ExperimentConfig& cfg) {
    auto m = build_model(cfg);
    std::vector<int> labels;
    if (cfg.count.label >= 0) {
        if (cfg.count.label >= m->n_ground()) throw ConfigError("count.label", "ground-state index out of range");
        labels = {cfg.count.label};
    } else {
        for (int k = 0; k < m->n_ground(); ++k) labels.push_back(k);
    }
    RunResult r;
    r.header = {"n", "label", "count", "supports_examined", "anchored", "seed", "config_hash"};
    bool valid = true;
    for (int n = 1; n <= cfg.geometry.n_max; ++n) {
        auto e = enumerate_contours(*m, n, cfg.count.anchored, cfg.count.label, false, cfg.budget);
        std::map<int, std::size_t> per;
        for (const auto& c : e.contours) {
            ++per[c.label];
            valid = valid && is_valid_contour(*m, c);
        }
        for (int k : labels)
            r.rows.push_back({num_i(n), num_i(k), num_i(per[k]), num_i(e.supports_examined),
                              cfg.count.anchored ? "1" : "0", num_i(cfg.seed), config_hash(cfg)});
    }
    assertion(r, "contours_valid", valid);
    return r;
}

RunResult run_tail(const ExperimentConfig& cfg) {
    RunResult r;
    r.header = {"statistic", "bound", "epsilon", "n", "lambda", "trials", "exceed", "empirical", "ci_lo", "ci_hi",
                "tail_bound", "seed", "config_hash"};
    const std::uint64_t stream = labeled_seed(cfg.seed, "tail");
    for (double eps : cfg.disorder.epsilons) {
        const auto law = law_at(cfg, nullptr, eps);
        auto rows = tail_probe(cfg.tail.statistic, cfg.tail.bound, law, cfg.tail.n, cfg.tail.lambdas, cfg.tail.trials,
                               stream, cfg.threads);
        for (const auto& t : rows) {
            r.rows.push_back({statistic_name(cfg.tail.statistic), tail_bound_name(cfg.tail.bound), num(eps),
                              num_i(cfg.tail.n), num(t.lambda), num_i(t.trials), num_i(t.exceed), num(t.empirical),
                              num(t.ci.lo), num(t.ci.hi), num(t.bound), num_i(cfg.seed), config_hash(cfg)});
            assertion(r, "tail_bound_holds", t.ci.lo <= t.bound);
        }
    }
    r.overlays["mcdiarmid"] = "exp(-2 lambda^2 / (n D^2))";
    r.overlays["gaussian"] = "exp(-lambda^2 / (2 n D^2 eps^2))";
    r.overlays["subgaussian_nu"] = "exp(-lambda^2 / (n D^2 nu))";
    return r;
}

RunResult run_symmetry(const ExperimentConfig& cfg) {
    auto m = build_model(cfg);
    if (cfg.symmetry.k1 < 0 || cfg.symmetry.k1 >= m->n_ground())
        throw ConfigError("symmetry.k1", "ground-state index out of range");
    TransformSpec spec{cfg.symmetry.kind, cfg.symmetry.shift, cfg.symmetry.axis, cfg.symmetry.sign};
    std::optional<SymmetryPair> pair;
    try {
        pair.emplace(make_transform(m, spec, cfg.symmetry.k1));
    } catch (const ParameterError& e) {
        throw ConfigError("symmetry.kind", e.what());
    }
    const Region reg = Region::cube(m->dim(), cfg.geometry.L);
    const std::uint64_t stream = labeled_seed(cfg.seed, "symmetry");
    RunResult r;
    r.header = {"kind", "k1", "k2", "L", "epsilon", "locality", "injectivity", "energy", "lipschitz", "measure",
                "max_energy_gap", "min_energy_margin", "ks_statistic", "ks_critical", "configurations", "seed",
                "config_hash"};
    for (double eps : cfg.disorder.epsilons) {
        auto rep = verify_local_symmetry(*pair, reg, law_at(cfg, m.get(), eps), cfg.symmetry.trials, stream,
                                         cfg.budget);
        auto b = [](bool x) { return std::string(x ? "1" : "0"); };
        r.rows.push_back({transform_kind_name(spec.kind), num_i(pair->k1()), num_i(pair->k2()),
                          num_i(cfg.geometry.L), num(eps), b(rep.locality), b(rep.injectivity), b(rep.energy),
                          b(rep.lipschitz), b(rep.measure), num(rep.max_energy_gap), num(rep.min_energy_margin),
                          num(rep.ks_statistic), num(rep.ks_critical), num_i(rep.configurations), num_i(cfg.seed),
                          config_hash(cfg)});
        assertion(r, "locality", rep.locality);
        assertion(r, "injectivity", rep.injectivity);
        assertion(r, "energy_quasi_invariance", rep.energy);
        assertion(r, "lipschitz", rep.lipschitz);
        assertion(r, "measure_invariance", rep.measure);
    }
    return r;
}

RunResult run_mcmc(const ExperimentConfig& cfg) {
    auto m = build_model(cfg);
    const auto labels = labels_of(cfg, *m);
    ChainOptions opt;
    opt.sweeps = cfg.sampler.sweeps;
    opt.burn_in = cfg.sampler.burn_in;
    opt.snapshot_every = cfg.sampler.snapshot_every;
    opt.track_contours = false;
    const std::uint64_t stream = labeled_seed(cfg.seed, "mcmc");
    RunResult r;
    r.header = {"draw", "T", "epsilon", "agreement", "tau_est", "k", "seed", "config_hash"};
    json cells = json::array();
    for (double eps : cfg.disorder.epsilons)
        for (double T : cfg.sampler.temperatures) {
            auto res = agreement_over_draws(*m, law_at(cfg, m.get(), eps), cfg.geometry.L, labels, T,
                                            cfg.sampler.draws, opt, stream, cfg.threads);
            std::map<int, std::pair<std::size_t, double>> per;
            for (const auto& d : res) {
                r.rows.push_back({num_i(d.draw), num(T), num(eps), num(d.agreement), num(d.tau_est), num_i(d.k),
                                  num_i(cfg.seed), config_hash(cfg)});
                assertion(r, "agreement_in_unit_interval", d.agreement >= 0.0 && d.agreement <= 1.0);
                per[d.k].first += d.agreement > 0.5;
                per[d.k].second += d.agreement;
            }
            for (const auto& [k, v] : per)
                cells.push_back({{"epsilon", eps},
                                 {"T", T},
                                 {"k", k},
                                 {"draws_above_half", v.first},
                                 {"mean_agreement", v.second / static_cast<double>(cfg.sampler.draws)}});
        }
    r.summary["cells"] = cells;
    r.overlays["agreement_threshold"] = 0.5;
    return r;
}

void write_atomic(const std::filesystem::path& target, const std::string& text) {
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
        f << text;
        f.flush();
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

}  // namespace

json ExperimentConfig::echo() const {
    json j;
    j["subcommand"] = subcommand;
    if (has_model)
        j["model"] = {{"kind", kModels.name(model.kind)}, {"d", model.d},         {"J", model.J},
                      {"Q", model.Q},                      {"mu", model.mu},       {"gamma", num(model.gamma)},
                      {"lattice", model.lattice_graph},    {"block_period", model.block_period}};
    j["disorder"] = {{"kind", disorder.kind_set ? kDists.name(disorder.kind) : "model default"},
                     {"epsilons", disorder.epsilons},
                     {"support_bound", disorder.support_bound},
                     {"law", kLaws.name(disorder.law)}};
    j["geometry"] = {{"d", geometry.d},
                     {"L", geometry.L},
                     {"n_max", geometry.n_max},
                     {"ell_min", geometry.ell_min},
                     {"ell_max", geometry.ell_max}};
    j["sampler"] = {{"temperatures", sampler.temperatures}, {"sweeps", sampler.sweeps},
                    {"burn_in", sampler.burn_in},           {"draws", sampler.draws},
                    {"snapshot_every", sampler.snapshot_every}, {"labels", sampler.labels}};
    j["stability"] = {{"event", kEvents.name(stability.event)}, {"trials", stability.trials}};
    j["tail"] = {{"statistic", kStats.name(tail.statistic)},
                 {"bound", kBounds.name(tail.bound)},
                 {"n", tail.n},
                 {"lambdas", tail.lambdas},
                 {"trials", tail.trials}};
    j["symmetry"] = {{"kind", kTransforms.name(symmetry.kind)},
                     {"shift", symmetry.shift},
                     {"axis", symmetry.axis},
                     {"sign", symmetry.sign},
                     {"k1", symmetry.k1},
                     {"trials", symmetry.trials}};
    j["audit"] = {{"instances", audit.instances},
                  {"min_size", audit.min_size},
                  {"max_size", audit.max_size},
                  {"covering_n", audit.covering_n}};
    j["count"] = {{"anchored", count.anchored}, {"label", count.label}};
    j["seed"] = seed;
    return j;
}

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"peierls-scan",      "polymer-verify", "stability-estimate",
                                                "coarsegrain-audit", "count-contours", "tail-probe",
                                                "symmetry-verify",   "mcmc"};
    return names;
}

ExperimentConfig parse_config(const YAML::Node& root) {
    Block top(root, "",
              {"subcommand", "model", "disorder", "geometry", "sampler", "stability", "tail", "symmetry", "audit",
               "count", "seed", "output", "threads", "budget"});
    ExperimentConfig cfg;
    cfg.subcommand = top.text("subcommand", "");
    if (!cfg.subcommand.empty() &&
        std::find(subcommands().begin(), subcommands().end(), cfg.subcommand) == subcommands().end())
        throw ConfigError("subcommand", "unknown subcommand '" + cfg.subcommand + "'");

    Block g(top.child("geometry"), "geometry", {"d", "L", "n_max", "ell_min", "ell_max"});
    if (top.has("model")) {
        Block mb(top.child("model"), "model", {"kind", "J", "Q", "mu", "gamma", "lattice", "block_period"});
        if (!mb.has("kind")) throw ConfigError("model.kind", "missing required key");
        cfg.has_model = true;
        cfg.model.kind = kModels.parse("model.kind", mb.text("kind", ""));
        cfg.model.J = mb.real("J", 1.0);
        cfg.model.Q = static_cast<int>(mb.integer("Q", 3, 2, 64));
        cfg.model.mu = mb.real("mu", 1.0);
        cfg.model.gamma = mb.real("gamma", kInf);
        cfg.model.lattice_graph = mb.text("lattice", "bcc");
        cfg.model.block_period = static_cast<int>(mb.integer("block_period", 0, 0, 4));
        if (cfg.model.kind == ModelKind::hardcore_graph) cfg.geometry.d = 3;
    }
    cfg.geometry.d = static_cast<int>(g.integer("d", cfg.geometry.d, 1, kMaxDim));
    cfg.geometry.L = static_cast<int>(g.integer("L", cfg.geometry.L, 1, 4096));
    cfg.geometry.n_max = static_cast<int>(g.integer("n_max", cfg.geometry.n_max, 1, 100000));
    cfg.geometry.ell_min = static_cast<int>(g.integer("ell_min", cfg.geometry.ell_min, 0, 30));
    cfg.geometry.ell_max = static_cast<int>(g.integer("ell_max", cfg.geometry.ell_max, 0, 30));
    if (cfg.geometry.ell_min > cfg.geometry.ell_max) throw ConfigError("geometry.ell_min", "exceeds ell_max");
    cfg.model.d = cfg.geometry.d;

    Block dis(top.child("disorder"), "disorder", {"kind", "epsilons", "support_bound", "law"});
    if (dis.has("kind")) {
        cfg.disorder.kind_set = true;
        cfg.disorder.kind = kDists.parse("disorder.kind", dis.text("kind", ""));
    }
    cfg.disorder.epsilons = dis.list<double>("epsilons", cfg.disorder.epsilons, "numbers");
    for (double e : cfg.disorder.epsilons)
        if (!(e >= 0) || !std::isfinite(e)) throw ConfigError("disorder.epsilons", "values must be finite and >= 0");
    cfg.disorder.support_bound = dis.real("support_bound", 1.0);
    if (dis.has("law")) cfg.disorder.law = kLaws.parse("disorder.law", dis.text("law", ""));

    Block s(top.child("sampler"), "sampler",
            {"temperatures", "sweeps", "burn_in", "draws", "snapshot_every", "labels"});
    cfg.sampler.temperatures = s.list<double>("temperatures", cfg.sampler.temperatures, "numbers");
    for (double T : cfg.sampler.temperatures)
        if (!(T > 0) || !std::isfinite(T)) throw ConfigError("sampler.temperatures", "values must be finite and > 0");
    cfg.sampler.sweeps = static_cast<std::size_t>(s.integer("sweeps", 10'000, 1, kBig));
    cfg.sampler.burn_in = static_cast<std::size_t>(s.integer("burn_in", 1'000, 0, kBig));
    cfg.sampler.draws = static_cast<std::size_t>(s.integer("draws", 20, 1, kBig));
    cfg.sampler.snapshot_every = static_cast<std::size_t>(s.integer("snapshot_every", 10, 1, kBig));
    cfg.sampler.labels = s.list<int>("labels", {}, "integers");

    Block st(top.child("stability"), "stability", {"event", "trials"});
    if (st.has("event")) cfg.stability.event = kEvents.parse("stability.event", st.text("event", ""));
    cfg.stability.trials = static_cast<std::size_t>(st.integer("trials", 1000, 100, kBig));

    Block t(top.child("tail"), "tail", {"statistic", "bound", "n", "lambdas", "trials"});
    if (t.has("statistic")) cfg.tail.statistic = kStats.parse("tail.statistic", t.text("statistic", ""));
    if (t.has("bound")) cfg.tail.bound = kBounds.parse("tail.bound", t.text("bound", ""));
    cfg.tail.n = static_cast<std::size_t>(t.integer("n", 100, 1, kBig));
    cfg.tail.lambdas = t.list<double>("lambdas", cfg.tail.lambdas, "numbers");
    cfg.tail.trials = static_cast<std::size_t>(t.integer("trials", 10'000, 100, kBig));

    Block sy(top.child("symmetry"), "symmetry", {"kind", "shift", "axis", "sign", "k1", "trials"});
    if (sy.has("kind")) cfg.symmetry.kind = kTransforms.parse("symmetry.kind", sy.text("kind", ""));
    cfg.symmetry.shift = static_cast<int>(sy.integer("shift", 1, 1, 64));
    cfg.symmetry.axis = static_cast<int>(sy.integer("axis", 0, 0, kMaxDim - 1));
    cfg.symmetry.sign = static_cast<int>(sy.integer("sign", 1, -1, 1));
    if (cfg.symmetry.sign == 0) throw ConfigError("symmetry.sign", "must be +1 or -1");
    cfg.symmetry.k1 = static_cast<int>(sy.integer("k1", 0, 0, 1 << 20));
    cfg.symmetry.trials = static_cast<std::size_t>(sy.integer("trials", 200, 1, kBig));

    Block a(top.child("audit"), "audit", {"instances", "min_size", "max_size", "covering_n"});
    cfg.audit.instances = static_cast<std::size_t>(a.integer("instances", 200, 1, kBig));
    cfg.audit.min_size = static_cast<int>(a.integer("min_size", 4, 1, 1 << 20));
    cfg.audit.max_size = static_cast<int>(a.integer("max_size", 120, 1, 1 << 20));
    if (cfg.audit.min_size > cfg.audit.max_size) throw ConfigError("audit.min_size", "exceeds max_size");
    cfg.audit.covering_n = static_cast<int>(a.integer("covering_n", 0, 0, 64));

    Block c(top.child("count"), "count", {"anchored", "label"});
    cfg.count.anchored = c.flag("anchored", false);
    cfg.count.label = static_cast<int>(c.integer("label", -1, -1, 1 << 20));

    cfg.seed = static_cast<std::uint64_t>(top.integer("seed", 0, 0, std::numeric_limits<long long>::max()));
    cfg.output = top.text("output", "results");
    cfg.threads = static_cast<int>(top.integer("threads", 1, 1, 1024));
    cfg.budget = static_cast<std::size_t>(top.integer("budget", static_cast<long long>(kStateBudget), 1, kBig));
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::BadFile&) {
        throw ConfigError("--config", "cannot read '" + path + "'");
    } catch (const YAML::ParserException& e) {
        throw ConfigError("<yaml>", e.what());
    }
    return parse_config(root);
}

std::string config_hash(const ExperimentConfig& cfg) {
    auto j = cfg.echo();
    j.erase("seed");
    const std::string text = j.dump();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < 8 && i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::uint64_t labeled_seed(std::uint64_t root, std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : label) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return mix(root, h);
}

ModelPtr build_model(const ExperimentConfig& cfg) {
    if (!cfg.has_model) throw ConfigError("model", "missing required block");
    try {
        return make_model(cfg.model);
    } catch (const ParameterError& e) {
        throw ConfigError("model", e.what());
    }
}

DistributionSpec law_at(const ExperimentConfig& cfg, const Model* m, double epsilon) {
    DistributionSpec law;
    law.kind = cfg.disorder.kind_set || !m ? cfg.disorder.kind : m->disorder_kind();
    law.epsilon = epsilon;
    law.support_bound = cfg.disorder.support_bound;
    law.law = cfg.disorder.law;
    if (law.kind == DistKind::bernoulli && epsilon > 1)
        throw ConfigError("disorder.epsilons", "a Bernoulli parameter must lie in [0, 1]");
    return law;
}

RunResult run_subcommand(const ExperimentConfig& cfg) {
    const auto& sub = cfg.subcommand;
    if (needs_model(sub) && !cfg.has_model) throw ConfigError("model", "missing required block");
    if (sub == "peierls-scan") return run_peierls(cfg);
    if (sub == "polymer-verify") return run_polymer(cfg);
    if (sub == "stability-estimate") return run_stability(cfg);
    if (sub == "coarsegrain-audit") return run_audit(cfg);
    if (sub == "count-contours") return run_count(cfg);
    if (sub == "tail-probe") return run_tail(cfg);
    if (sub == "symmetry-verify") return run_symmetry(cfg);
    if (sub == "mcmc") return run_mcmc(cfg);
    throw ConfigError("subcommand", "unknown subcommand '" + sub + "'");
}

std::string csv_text(const RunResult& r) {
    auto field = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return q + "\"";
    };
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& xs) {
        for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << field(xs[i]);
        os << "\n";
    };
    line(r.header);
    for (const auto& row : r.rows) line(row);
    return os.str();
}

void write_outputs(const ExperimentConfig& cfg, const RunResult& r, double wall_seconds) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.output);
    fs::create_directories(dir);
    const std::string stem = cfg.subcommand;
    json manifest;
    manifest["subcommand"] = stem;
    manifest["csv"] = stem + ".csv";
    manifest["columns"] = r.header;
    manifest["rows"] = r.rows.size();
    manifest["seed"] = cfg.seed;
    manifest["config_hash"] = config_hash(cfg);
    manifest["seed_labels"] = {{"peierls-scan", nullptr},        {"polymer-verify", "polymer"},
                               {"stability-estimate", "stability"}, {"coarsegrain-audit", "audit"},
                               {"count-contours", nullptr},       {"tail-probe", "tail"},
                               {"symmetry-verify", "symmetry"},   {"mcmc", "mcmc"}};
    manifest["parameters"] = cfg.echo();
    manifest["threads"] = cfg.threads;
    manifest["budget"] = cfg.budget;
    json asserts = json::object();
    bool ok = true;
    for (const auto& [n, v] : r.assertions) {
        asserts[n] = v;
        ok = ok && v;
    }
    manifest["assertions"] = asserts;
    manifest["status"] = ok ? "pass" : "fail";
    manifest["summary"] = r.summary;
    manifest["overlays"] = r.overlays;
    manifest["versions"] = {{"pslab", PSLAB_VERSION},
                            {"compiler", __VERSION__},
                            {"cxx", __cplusplus},
                            {"boost", BOOST_LIB_VERSION},
                            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                            {"cli11", CLI11_VERSION}};
    manifest["wall_time_s"] = wall_seconds;
    write_atomic(dir / (stem + ".csv"), csv_text(r));
    write_atomic(dir / (stem + ".json"), manifest.dump(2) + "\n");
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"Finite-volume experiments on disordered lattice models"};
    app.require_subcommand(1);
    std::string config_path, out;
    std::uint64_t seed = 0;
    int threads = 0;
    std::size_t budget = 0;
    for (const auto& name : subcommands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "YAML experiment configuration")->required();
        sub->add_option("--seed", seed, "root seed (overrides the config)");
        sub->add_option("--out", out, "output directory (overrides the config)");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--budget", budget, "state / enumeration budget")->check(CLI::PositiveNumber);
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }
    std::string chosen;
    for (auto* s : app.get_subcommands()) chosen = s->get_name();
    auto* sub = app.get_subcommand(chosen);
    try {
        ExperimentConfig cfg = load_config(config_path);
        if (!cfg.subcommand.empty() && cfg.subcommand != chosen)
            throw ConfigError("subcommand", "config is for '" + cfg.subcommand + "', not '" + chosen + "'");
        cfg.subcommand = chosen;
        if (sub->count("--seed")) cfg.seed = seed;
        if (sub->count("--out")) cfg.output = out;
        if (sub->count("--threads")) cfg.threads = threads;
        if (sub->count("--budget")) cfg.budget = budget;
        const auto t0 = std::chrono::steady_clock::now();
        RunResult r = run_subcommand(cfg);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_outputs(cfg, r, wall);
        int code = exit_ok;
        for (const auto& [n, v] : r.assertions)
            if (!v) {
                std::cerr << "assertion failed: " << n << "\n";
                code = exit_assertion;
            }
        std::cout << chosen << ": " << r.rows.size() << " rows -> " << (std::filesystem::path(cfg.output) / (chosen + ".csv")).string()
                  << "\n";
        return code;
    } catch (const ConfigError& e) {
        std::cerr << "config error at '" << e.key_path << "': " << e.what() << "\n";
        return exit_config;
    } catch (const BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return exit_budget;
    } catch (const PowerError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_internal;
    }
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args);
}

}  // namespace pslab::cli
