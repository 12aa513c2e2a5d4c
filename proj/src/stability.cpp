#include "pslab/stability.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "pslab/errors.hpp"
#include "pslab/rng.hpp"

namespace pslab {

namespace {

double field_abs_sum(const Region& reg, const RandomField& eta, int n_terms) {
    double acc = 0.0;
    for (const auto& s : reg)
        for (int a = 0; a < n_terms; ++a) acc += std::abs(eta.get_or_zero(a, s));
    return acc;
}

}  // namespace

const char* event_name(StabilityEvent e) {
    switch (e) {
    case StabilityEvent::fsc: return "fsc";
    case StabilityEvent::qisc: return "qisc";
    case StabilityEvent::fsir: return "fsir";
    case StabilityEvent::all: return "all";
    }
    return "?";
}

StabilityEvent parse_event(const std::string& s) {
    if (s == "fsc") return StabilityEvent::fsc;
    if (s == "qisc") return StabilityEvent::qisc;
    if (s == "fsir") return StabilityEvent::fsir;
    if (s == "all") return StabilityEvent::all;
    throw ParameterError("unknown stability event '" + s + "'");
}

bool StabilityReport::holds(StabilityEvent e) const {
    switch (e) {
    case StabilityEvent::fsc: return fsc;
    case StabilityEvent::qisc: return qisc;
    case StabilityEvent::fsir: return fsir;
    case StabilityEvent::all: return fsc && qisc && fsir;
    }
    return false;
}

Region stability_reach(const Model& m, const Contour& c) {
    return m.omega_support(dilate(unite(c.support, c.interior), 2));
}

QuenchedConfig transformed_omega(const SymmetryPair& pair, const QuenchedConfig& omega, const Region& reg_prime) {
    QuenchedConfig out = omega;
    QuenchedConfig t = pair.quench_map(omega, reg_prime);
    for (int b = 0; b < t.n_beta(); ++b)
        for (const auto& [s, v] : t.values[b]) out.set(b, s, v);
    out.covered = unite(out.covered, t.covered);
    return out;
}

FreeEnergyDelta free_energy_delta(const Model& m, const SymmetryPair* pair, const QuenchedConfig& omega,
                                  const Region& reg, const Region& reg_prime, int k, double T, std::size_t budget) {
    FreeEnergyDelta out;
    out.log_z = partition_function(m, m.build_eta(omega, reg), reg, k, T, PFVariant::standard, budget).log_value;
    if (!pair) {
        out.log_z_transformed = out.log_z;
        return out;
    }
    QuenchedConfig w = transformed_omega(*pair, omega, reg_prime);
    out.log_z_transformed =
        partition_function(m, m.build_eta(w, reg), reg, k, T, PFVariant::standard, budget).log_value;
    out.value = T * (out.log_z_transformed - out.log_z);
    return out;
}

StabilityReport stability_events(const Contour& c, const ModelPtr& m, const QuenchedConfig& omega, double T,
                                 double rho, bool with_fsir, std::size_t budget) {
    const Model& model = *m;
    StabilityReport r;
    r.threshold = rho * static_cast<double>(c.size()) / 4.0;
    const RandomField zero = RandomField::zeros(model.dim(), model.n_terms());
    const RandomField eta = model.build_eta(omega, c.support);
    r.fsc_value = std::abs(excitation_energy(model, c, eta) - excitation_energy(model, c, zero));

    for (const auto& h : c.holes) {
        const Region inner = boundary(h.region, 1, Side::internal);
        const RandomField e = model.build_eta(omega, inner);
        r.qisc_value += field_abs_sum(inner, e, model.n_terms());
        if (h.k == c.label) {
            r.qisc_value += field_abs_sum(inner, e, model.n_terms());
            continue;
        }
        SymmetryPair pair = natural_transform(m, h.k, c.label);
        r.qisc_value += field_abs_sum(inner, model.build_eta(pair.quench_map(omega, h.region), inner), model.n_terms());
        if (with_fsir) r.fsir_value += free_energy_delta(model, &pair, omega, h.region, h.region, c.label, T, budget).value;
    }
    r.fsc_margin = r.threshold - r.fsc_value;
    r.qisc_margin = r.threshold - r.qisc_value;
    r.fsir_margin = r.threshold - r.fsir_value;
    r.fsc = r.fsc_margin >= 0;
    r.qisc = r.qisc_margin >= 0;
    r.fsir = r.fsir_margin >= 0;
    return r;
}

std::vector<Contour> anchored_family(const Model& m, int n_max, std::size_t budget) {
    return enumerate_contours(m, n_max, true, -1, true, budget).contours;
}

EventEstimate estimate_event_probability(StabilityEvent ev, const ModelPtr& m, const DistributionSpec& law, int n_max,
                                         std::size_t trials, double T, std::uint64_t seed, int threads,
                                         const std::vector<Contour>* family, std::size_t budget) {
    if (trials < 100) throw PowerError("estimate_event_probability: at least 100 trials are required");
    if (!(T > 0)) throw ParameterError("estimate_event_probability: temperature must be positive");
    const Model& model = *m;
    std::vector<Contour> own;
    if (!family) {
        own = anchored_family(model, n_max);
        family = &own;
    }
    EventEstimate out;
    out.event = ev;
    out.epsilon = law.epsilon;
    out.T = T;
    out.n_max = n_max;
    out.trials = trials;
    out.seed = seed;
    out.family_size = family->size();
    out.rho = model.declared_rho();
    if (!family->empty()) {
        auto scan = peierls_scan(model, *family);
        if (std::isfinite(scan.rho_measured) && scan.rho_measured > 0) {
            out.rho = scan.rho_measured;
            out.rho_measured = true;
        }
    }
    std::vector<Site> reach;
    for (const auto& c : *family)
        for (const auto& s : stability_reach(model, c)) reach.push_back(s);
    const Region cover(model.dim(), std::move(reach));
    const bool need_fsir = ev == StabilityEvent::fsir || ev == StabilityEvent::all;

    std::atomic<std::size_t> hits{0};
    std::vector<std::exception_ptr> errors(std::max(1, threads));
    auto work = [&](std::size_t first, std::size_t stride) {
        try {
            std::size_t local = 0;
            for (std::size_t i = first; i < trials; i += stride) {
                QuenchedConfig w = sample_omega(law, model.n_beta(), cover, 0, derive_seed(seed, i));
                bool ok = true;
                for (const auto& c : *family) {
                    if (!stability_events(c, m, w, T, out.rho, need_fsir, budget).holds(ev)) {
                        ok = false;
                        break;
                    }
                }
                local += ok;
            }
            hits += local;
        } catch (...) {
            errors[first] = std::current_exception();
        }
    };
    const int nt = std::max(1, threads);
    if (nt == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) pool.emplace_back(work, static_cast<std::size_t>(t), static_cast<std::size_t>(nt));
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    out.successes = hits.load();
    out.p_hat = static_cast<double>(out.successes) / static_cast<double>(trials);
    out.ci = wilson(out.successes, trials);
    return out;
}

}  // namespace pslab
