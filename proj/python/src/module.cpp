#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "experiment.hpp"
#include "pslab/coarsegrain.hpp"
#include "pslab/contours.hpp"
#include "pslab/disorder.hpp"
#include "pslab/errors.hpp"
#include "pslab/polymer.hpp"
#include "pslab/sampler.hpp"
#include "pslab/stability.hpp"

namespace py = pybind11;
using namespace pslab;

namespace {

RandomField field_for(const Model& m, const Region& reg, const DistributionSpec& law, std::uint64_t seed) {
    if (law.epsilon == 0.0) return RandomField::zeros(m.dim(), m.n_terms());
    return draw_disorder(m, law, reg, seed).eta;
}

py::dict interval(const Interval& i) {
    py::dict d;
    d["lo"] = i.lo;
    d["hi"] = i.hi;
    return d;
}

py::dict contour_dict(const Model& m, const Contour& c) {
    py::dict d;
    d["label"] = c.label;
    d["size"] = c.size();
    d["canonical"] = c.canonical();
    d["excitation_energy"] = excitation_energy(m, c, RandomField::zeros(m.dim(), m.n_terms()));
    return d;
}

struct Handle {
    ModelPtr m;
    const Model& operator*() const { return *m; }
    const Model* operator->() const { return m.get(); }
};

Region region_from(int d, const std::vector<std::vector<int>>& sites) {
    std::vector<Site> out;
    for (const auto& s : sites) {
        Site x;
        for (std::size_t i = 0; i < s.size() && i < kMaxDim; ++i) x[static_cast<int>(i)] = s[i];
        out.push_back(x);
    }
    return Region(d, out);
}

}  // namespace

PYBIND11_MODULE(_pslab, mod) {
    mod.doc() = "Contour expansions, Peierls scans and disorder audits for lattice spin models";

    py::register_exception<ParameterError>(mod, "ParameterError", PyExc_ValueError);
    py::register_exception<BudgetError>(mod, "BudgetError", PyExc_RuntimeError);
    py::register_exception<DomainError>(mod, "DomainError", PyExc_RuntimeError);
    py::register_exception<PaddingError>(mod, "PaddingError", PyExc_RuntimeError);
    py::register_exception<PowerError>(mod, "PowerError", PyExc_ValueError);
    py::register_exception<AccuracyError>(mod, "AccuracyError", PyExc_ValueError);

    py::enum_<ModelKind>(mod, "ModelKind")
        .value("rfim", ModelKind::rfim)
        .value("rfpm", ModelKind::rfpm)
        .value("ea", ModelKind::ea)
        .value("fa1b", ModelKind::fa1b)
        .value("hardcore_graph", ModelKind::hardcore_graph);
    py::enum_<DistKind>(mod, "DistKind")
        .value("gaussian", DistKind::gaussian)
        .value("bounded", DistKind::bounded)
        .value("bernoulli", DistKind::bernoulli);
    py::enum_<BoundedLaw>(mod, "BoundedLaw")
        .value("two_point", BoundedLaw::two_point)
        .value("extremal", BoundedLaw::extremal);
    py::enum_<Statistic>(mod, "Statistic")
        .value("sum", Statistic::sum)
        .value("abs_sum", Statistic::abs_sum)
        .value("l2_norm", Statistic::l2_norm);
    py::enum_<TailBound>(mod, "TailBound")
        .value("mcdiarmid", TailBound::mcdiarmid)
        .value("gaussian", TailBound::gaussian)
        .value("subgaussian_nu", TailBound::subgaussian_nu);
    py::enum_<StabilityEvent>(mod, "StabilityEvent")
        .value("fsc", StabilityEvent::fsc)
        .value("qisc", StabilityEvent::qisc)
        .value("fsir", StabilityEvent::fsir)
        .value("all", StabilityEvent::all);

    py::class_<DistributionSpec>(mod, "DistributionSpec")
        .def(py::init([](DistKind kind, double epsilon, double support_bound, BoundedLaw law) {
                 return DistributionSpec{kind, epsilon, support_bound, law};
             }),
             py::arg("kind") = DistKind::gaussian, py::arg("epsilon") = 0.0, py::arg("support_bound") = 1.0,
             py::arg("law") = BoundedLaw::two_point)
        .def_readwrite("kind", &DistributionSpec::kind)
        .def_readwrite("epsilon", &DistributionSpec::epsilon)
        .def_readwrite("support_bound", &DistributionSpec::support_bound)
        .def_readwrite("law", &DistributionSpec::law);

    py::class_<Handle>(mod, "Model")
        .def_property_readonly("name", [](const Handle& h) { return h->name(); })
        .def_property_readonly("dim", [](const Handle& h) { return h->dim(); })
        .def_property_readonly("n_values", [](const Handle& h) { return h->n_values(); })
        .def_property_readonly("n_ground", [](const Handle& h) { return h->n_ground(); })
        .def_property_readonly("ground_states", [](const Handle& h) { return h->ground_states(); })
        .def_property_readonly("ground_energy", [](const Handle& h) { return h->ground_energy(); })
        .def_property_readonly("declared_rho", [](const Handle& h) { return h->declared_rho(); })
        .def_property_readonly("disorder_kind", [](const Handle& h) { return h->disorder_kind(); })
        .def("__repr__",
             [](const Handle& h) { return "<pslab.Model " + h->name() + " d=" + std::to_string(h->dim()) + ">"; });

    mod.def(
        "make_model",
        [](ModelKind kind, int d, double J, int Q, double mu, double gamma, const std::string& lattice,
           int block_period) {
            ModelParams p;
            p.kind = kind;
            p.d = d;
            p.J = J;
            p.Q = Q;
            p.mu = mu;
            p.gamma = gamma;
            p.lattice_graph = lattice;
            p.block_period = block_period;
            return Handle{make_model(p)};
        },
        py::arg("kind"), py::arg("d") = 2, py::arg("J") = 1.0, py::arg("Q") = 3, py::arg("mu") = 1.0,
        py::arg("gamma") = kInf, py::arg("lattice") = "bcc", py::arg("block_period") = 0);

    mod.def(
        "peierls_scan",
        [](const Handle& m, int n_max, std::size_t budget) {
            auto r = peierls_scan(*m, n_max, budget);
            py::dict d;
            d["rho_measured"] = r.rho_measured;
            d["declared_rho"] = m->declared_rho();
            d["contours_scanned"] = r.contours_scanned;
            d["meets_declared"] = r.meets_declared;
            d["witness"] = r.witness ? py::object(contour_dict(*m, *r.witness)) : py::none();
            return d;
        },
        py::arg("model"), py::arg("n_max"), py::arg("budget") = std::size_t{20'000'000});

    mod.def(
        "enumerate_contours",
        [](const Handle& m, int n, bool anchored, int label, bool up_to) {
            py::list out;
            for (const auto& c : enumerate_contours(*m, n, anchored, label, up_to).contours)
                out.append(contour_dict(*m, c));
            return out;
        },
        py::arg("model"), py::arg("n"), py::arg("anchored") = false, py::arg("label") = -1, py::arg("up_to") = false);

    mod.def(
        "count_regions", [](int n, int d, bool anchored) { return enumerate_regions(n, d, anchored).regions.size(); },
        py::arg("n"), py::arg("d") = 2, py::arg("anchored") = true);

    mod.def(
        "polymer_identity",
        [](const Handle& m, std::vector<int> sides, int k, double T, const DistributionSpec& law,
           std::uint64_t seed) {
            std::array<int, kMaxDim> ext{};
            for (std::size_t i = 0; i < sides.size() && i < kMaxDim; ++i) ext[i] = sides[i];
            const Region reg = Region::box(m->dim(), Site{}, ext);
            auto r = polymer_identity_check(*m, field_for(*m, reg, law, seed), reg, k, T);
            py::dict d;
            d["log_lhs"] = r.log_lhs;
            d["log_rhs"] = r.log_rhs;
            d["max_rel_err"] = r.max_rel_err;
            d["S"] = r.S;
            d["contours"] = r.contours;
            return d;
        },
        py::arg("model"), py::arg("sides"), py::arg("k") = 0, py::arg("T") = 1.0,
        py::arg("law") = DistributionSpec{}, py::arg("seed") = 0);

    mod.def(
        "partition_function",
        [](const Handle& m, int L, int k, double T, const DistributionSpec& law, std::uint64_t seed) {
            const Region reg = Region::cube(m->dim(), L);
            return partition_function(*m, field_for(*m, reg, law, seed), reg, k, T).log_value;
        },
        py::arg("model"), py::arg("L"), py::arg("k") = 0, py::arg("T") = 1.0, py::arg("law") = DistributionSpec{},
        py::arg("seed") = 0, "log Z^k on the cube of side L");

    mod.def(
        "three_point_max",
        [](double lambda, double sigma) {
            auto r = three_point_max(lambda, sigma);
            py::dict d;
            d["value"] = r.value;
            d["x1"] = r.x1;
            d["x2"] = r.x2;
            d["p1"] = r.p1;
            d["p2"] = r.p2;
            return d;
        },
        py::arg("lam"), py::arg("sigma"));
    mod.def("nu_of_epsilon", &nu_of_epsilon, py::arg("law"));

    mod.def(
        "tail_probe",
        [](Statistic f, TailBound b, const DistributionSpec& law, std::size_t n, const std::vector<double>& lambdas,
           std::size_t trials, std::uint64_t seed, int threads) {
            py::list out;
            for (const auto& r : tail_probe(f, b, law, n, lambdas, trials, seed, threads)) {
                py::dict d;
                d["lambda"] = r.lambda;
                d["exceed"] = r.exceed;
                d["trials"] = r.trials;
                d["empirical"] = r.empirical;
                d["ci"] = interval(r.ci);
                d["bound"] = r.bound;
                out.append(d);
            }
            return out;
        },
        py::arg("statistic"), py::arg("bound"), py::arg("law"), py::arg("n"), py::arg("lambdas"),
        py::arg("trials") = std::size_t{10'000}, py::arg("seed") = 0, py::arg("threads") = 1);

    mod.def(
        "audit_geometry",
        [](int d, std::size_t count, std::uint64_t seed, int max_level) {
            auto a = audit_geometry(blob_suite(d, count, seed), max_level);
            py::dict r;
            r["b0"] = a.b0;
            r["b1"] = a.b1;
            r["b2"] = a.b2;
            r["face_pairs"] = a.face_pairs;
            r["degradation_ok"] = a.degradation_ok;
            r["replicas_empty_beyond_l0"] = a.replicas_empty_beyond_l0;
            return r;
        },
        py::arg("d") = 2, py::arg("count") = 500, py::arg("seed") = 20240611, py::arg("max_level") = 4);
    mod.def("dudley_summands", &dudley_summands, py::arg("d"), py::arg("L"));
    mod.def(
        "coarse_replica",
        [](int d, const std::vector<std::vector<int>>& sites, int level) {
            std::vector<std::vector<int>> out;
            for (const auto& s : coarse_replica(region_from(d, sites), level).covered)
                out.emplace_back(s.c.begin(), s.c.begin() + d);
            return out;
        },
        py::arg("d"), py::arg("sites"), py::arg("level"));

    mod.def(
        "estimate_event_probability",
        [](StabilityEvent ev, const Handle& m, const DistributionSpec& law, int n_max, std::size_t trials, double T,
           std::uint64_t seed, int threads) {
            EventEstimate e;
            {
                py::gil_scoped_release release;
                e = estimate_event_probability(ev, m.m, law, n_max, trials, T, seed, threads);
            }
            py::dict d;
            d["event"] = event_name(e.event);
            d["p_hat"] = e.p_hat;
            d["ci"] = interval(e.ci);
            d["successes"] = e.successes;
            d["trials"] = e.trials;
            d["family_size"] = e.family_size;
            d["rho"] = e.rho;
            d["vacuous"] = e.vacuous();
            return d;
        },
        py::arg("event"), py::arg("model"), py::arg("law"), py::arg("n_max"), py::arg("trials") = std::size_t{1000},
        py::arg("T") = 1.0, py::arg("seed") = 0, py::arg("threads") = 1);

    mod.def(
        "agreement_over_draws",
        [](const Handle& m, const DistributionSpec& law, int L, const std::vector<int>& labels, double T,
           std::size_t draws, std::size_t sweeps, std::size_t burn_in, std::uint64_t seed, int threads) {
            ChainOptions opt;
            opt.sweeps = sweeps;
            opt.burn_in = burn_in;
            opt.track_contours = false;
            std::vector<DrawResult> res;
            {
                py::gil_scoped_release release;
                res = agreement_over_draws(*m, law, L, labels, T, draws, opt, seed, threads);
            }
            py::list out;
            for (const auto& r : res) {
                py::dict d;
                d["draw"] = r.draw;
                d["k"] = r.k;
                d["agreement"] = r.agreement;
                d["tau_est"] = r.tau_est;
                out.append(d);
            }
            return out;
        },
        py::arg("model"), py::arg("law"), py::arg("L"), py::arg("labels"), py::arg("T") = 1.0,
        py::arg("draws") = std::size_t{20}, py::arg("sweeps") = std::size_t{2000},
        py::arg("burn_in") = std::size_t{500}, py::arg("seed") = 0, py::arg("threads") = 1);

    mod.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            py::gil_scoped_release release;
            return cli::run(args);
        },
        py::arg("args"), "Runs a pslab subcommand in process and returns its exit code");
    mod.attr("__version__") = PSLAB_VERSION;
}
