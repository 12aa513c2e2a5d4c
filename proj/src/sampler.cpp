#include "pslab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "pslab/errors.hpp"
#include "pslab/polymer.hpp"
#include "pslab/rng.hpp"

namespace pslab {

double metropolis_acceptance(double dH, double T) {
    if (dH == kInf || std::isnan(dH)) return 0.0;
    if (dH <= 0) return 1.0;
    return std::exp(-dH / T);
}

class ChainState::View : public SpinView {
public:
    explicit View(const ChainState& c) : c_(c) {}
    int at(const Site& s) const override { return c_.at(s); }

private:
    const ChainState& c_;
};

ChainState::ChainState(const Model& m, const RandomField& eta, const Region& reg, int k, std::uint64_t seed)
    : m_(m), eta_(eta), reg_(reg), free_(free_sites(reg, PFVariant::standard)), ground_(m.ground(k)), rng_(seed) {
    const int d = m.dim();
    const int R = interaction_range(m);
    Site hi;
    reg_.bounds(lo_, hi);
    std::size_t cells = 1;
    for (int j = 0; j < d; ++j) {
        lo_[j] -= R;
        ext_[j] = hi[j] + R - lo_[j] + 1;
        cells *= static_cast<std::size_t>(ext_[j]);
    }
    grid_.assign(cells, ground_);
    free_index_.reserve(free_.size());
    for (const auto& s : free_) free_index_.push_back(static_cast<std::size_t>(index(s)));

    const auto offsets = m.read_offsets();
    affected_.resize(free_.size());
    affected_cells_.resize(free_.size());
    for (std::size_t i = 0; i < free_.size(); ++i)
        for (const auto& o : offsets) {
            Site t = free_.sites()[i] - o;
            if (!reg_.contains(t)) continue;
            affected_[i].push_back(t);
            affected_cells_[i].push_back(static_cast<std::size_t>(index(t)));
        }
    local_.assign(cells, 0.0);
    View v(*this);
    for (const auto& t : reg_) local_[static_cast<std::size_t>(index(t))] = m_.local_energy(t, v, eta_);
    energy_ = recompute_energy();
}

std::ptrdiff_t ChainState::index(const Site& s) const {
    std::ptrdiff_t idx = 0;
    for (int j = m_.dim() - 1; j >= 0; --j) {
        const int c = s[j] - lo_[j];
        if (c < 0 || c >= ext_[j]) return -1;
        idx = idx * ext_[j] + c;
    }
    return idx;
}

int ChainState::at(const Site& s) const {
    const auto i = index(s);
    return i < 0 ? ground_ : grid_[static_cast<std::size_t>(i)];
}

void ChainState::set(const Site& s, int v) {
    if (!free_.contains(s)) throw DomainError("chain state: only free sites can be set");
    const double dH = delta(s, v);
    if (dH == kInf) throw DomainError("chain state: the requested state has infinite energy");
    grid_[static_cast<std::size_t>(index(s))] = v;
    View view(*this);
    for (const auto& t : affected_[static_cast<std::size_t>(std::find(free_.sites().begin(), free_.sites().end(), s) -
                                                            free_.sites().begin())])
        local_[static_cast<std::size_t>(index(t))] = m_.local_energy(t, view, eta_);
    energy_ += dH;
}

Configuration ChainState::configuration() const {
    Configuration x(ground_);
    for (std::size_t i = 0; i < free_.size(); ++i)
        if (grid_[free_index_[i]] != ground_) x.set(free_.sites()[i], grid_[free_index_[i]]);
    return x;
}

double ChainState::local_sum(const std::vector<Site>& sites) const {
    View v(*this);
    double e = 0.0;
    for (const auto& t : sites) {
        e += m_.local_energy(t, v, eta_);
        if (e == kInf) return kInf;
    }
    return e;
}

double ChainState::recompute_energy() const { return local_sum(reg_.sites()); }

double ChainState::rebuild() {
    View v(*this);
    for (const auto& t : reg_) local_[static_cast<std::size_t>(index(t))] = m_.local_energy(t, v, eta_);
    const double fresh = recompute_energy();
    const double drift = std::abs(fresh - energy_);
    energy_ = fresh;
    return drift;
}

double ChainState::delta(const Site& s, int v) const {
    const auto it = std::find(free_.sites().begin(), free_.sites().end(), s);
    if (it == free_.sites().end()) throw DomainError("chain state: only free sites can be updated");
    const std::size_t i = static_cast<std::size_t>(it - free_.sites().begin());
    int& cell = grid_[free_index_[i]];
    const int old = cell;
    if (old == v) return 0.0;
    const double before = local_sum(affected_[i]);
    cell = v;
    const double after = local_sum(affected_[i]);
    cell = old;
    return after - before;
}

bool ChainState::attempt(std::size_t i, int v, double T, double u) {
    int& cell = grid_[free_index_[i]];
    const int old = cell;
    if (old == v) return true;
    const auto& sites = affected_[i];
    const auto& cells = affected_cells_[i];
    scratch_.resize(sites.size());
    cell = v;
    View view(*this);
    double dH = 0.0;
    for (std::size_t j = 0; j < sites.size(); ++j) {
        scratch_[j] = m_.local_energy(sites[j], view, eta_);
        if (scratch_[j] == kInf) {
            cell = old;
            return false;
        }
        dH += scratch_[j] - local_[cells[j]];
    }
    if (u >= metropolis_acceptance(dH, T)) {
        cell = old;
        return false;
    }
    for (std::size_t j = 0; j < sites.size(); ++j) local_[cells[j]] = scratch_[j];
    energy_ += dH;
    return true;
}

std::size_t ChainState::sweep(double T) {
    std::size_t accepted = 0;
    const std::size_t n = free_.size();
    const int q = m_.n_values();
    for (std::size_t step = 0; step < n; ++step) {
        const std::size_t i = static_cast<std::size_t>(rng_() % n);
        const int cur = grid_[free_index_[i]];
        int v = static_cast<int>(rng_() % static_cast<std::uint64_t>(q - 1));
        if (v >= cur) ++v;
        accepted += attempt(i, v, T, to_unit(rng_()));
    }
    ++sweeps_;
    return accepted;
}

double ChainState::agreement() const {
    if (free_.empty()) return 1.0;
    std::size_t same = 0;
    for (auto idx : free_index_) same += grid_[idx] == ground_;
    return static_cast<double>(same) / static_cast<double>(free_.size());
}

std::vector<int> ChainState::free_values() const {
    std::vector<int> out;
    out.reserve(free_index_.size());
    for (auto idx : free_index_) out.push_back(grid_[idx]);
    return out;
}

double integrated_autocorrelation(const std::vector<double>& series, double c) {
    const std::size_t n = series.size();
    if (n < 2) return 1.0;
    const double mu = mean(series);
    double c0 = 0.0;
    for (double x : series) c0 += (x - mu) * (x - mu);
    c0 /= static_cast<double>(n);
    if (c0 <= 0.0) return 1.0;
    double tau = 1.0;
    for (std::size_t t = 1; t < n; ++t) {
        double ct = 0.0;
        for (std::size_t i = 0; i + t < n; ++i) ct += (series[i] - mu) * (series[i + t] - mu);
        ct /= static_cast<double>(n);
        tau += 2.0 * ct / c0;
        if (static_cast<double>(t) >= c * tau) break;
    }
    return std::max(tau, 1.0);
}

Observables run_chain(const Model& m, const RandomField& eta, const Region& reg, int k, double T,
                      const ChainOptions& opt) {
    if (!(T > 0)) throw ParameterError("run_chain: temperature must be positive");
    ChainState st(m, eta, reg, k, opt.seed);
    Observables obs;
    obs.sweeps = opt.sweeps;
    obs.burn_in = opt.burn_in;
    std::vector<double> series;
    series.reserve(opt.sweeps);
    std::size_t accepted = 0;
    const std::size_t every = std::max<std::size_t>(1, opt.snapshot_every);
    const std::size_t rebuild_every = std::max<std::size_t>(1, opt.rebuild_every);
    for (std::size_t t = 0; t < opt.burn_in + opt.sweeps; ++t) {
        accepted += st.sweep(T);
        if ((t + 1) % rebuild_every == 0) obs.max_drift = std::max(obs.max_drift, st.rebuild());
        if (t < opt.burn_in) continue;
        const std::size_t j = t - opt.burn_in;
        series.push_back(st.agreement());
        if (opt.record_states) ++obs.state_counts[st.free_values()];
        if (opt.track_contours && (j + 1) % every == 0) {
            ++obs.snapshots;
            for (auto& c : external_contours(extract_contours(m, st.configuration()))) {
                auto key = c.canonical();
                ++obs.contour_counts[key];
                obs.contours_seen.try_emplace(std::move(key), std::move(c));
            }
        }
    }
    obs.max_drift = std::max(obs.max_drift, st.rebuild());
    obs.samples = series.size();
    obs.agreement = series.empty() ? st.agreement() : mean(series);
    obs.tau_est = integrated_autocorrelation(series);
    const double attempts = static_cast<double>(st.free().size()) * static_cast<double>(opt.burn_in + opt.sweeps);
    obs.acceptance_rate = attempts > 0 ? static_cast<double>(accepted) / attempts : 0.0;
    return obs;
}

Observables run_chain(const Model& m, const RandomField& eta, const Region& reg, int k, double T, std::size_t sweeps,
                      std::size_t burn_in, std::uint64_t seed) {
    ChainOptions opt;
    opt.sweeps = sweeps;
    opt.burn_in = burn_in;
    opt.seed = seed;
    return run_chain(m, eta, reg, k, T, opt);
}

std::vector<ContourFrequency> contour_frequency(const Observables& obs, const std::vector<Contour>& refs) {
    std::vector<ContourFrequency> out;
    out.reserve(refs.size());
    for (const auto& c : refs) {
        ContourFrequency f;
        f.contour = c;
        f.snapshots = obs.snapshots;
        auto it = obs.contour_counts.find(c.canonical());
        f.hits = it == obs.contour_counts.end() ? 0 : it->second;
        f.frequency = obs.snapshots ? static_cast<double>(f.hits) / static_cast<double>(obs.snapshots) : 0.0;
        f.ci = wilson(f.hits, obs.snapshots);
        out.push_back(std::move(f));
    }
    return out;
}

std::map<std::vector<int>, double> exact_gibbs(const Model& m, const RandomField& eta, const Region& reg, int k,
                                               double T, std::size_t budget) {
    const Region free = free_sites(reg, PFVariant::standard);
    std::vector<std::vector<int>> states;
    std::vector<double> logw;
    for_each_configuration(
        m, eta, reg, k, PFVariant::standard,
        [&](const Configuration& x, double e) {
            if (e == kInf) return;
            std::vector<int> key;
            key.reserve(free.size());
            for (const auto& s : free) key.push_back(x.at(s));
            states.push_back(std::move(key));
            logw.push_back(-e / T);
        },
        budget);
    const double lz = logsumexp(logw);
    std::map<std::vector<int>, double> out;
    for (std::size_t i = 0; i < states.size(); ++i) out[states[i]] = std::exp(logw[i] - lz);
    return out;
}

double total_variation(const std::map<std::vector<int>, std::size_t>& counts,
                       const std::map<std::vector<int>, double>& exact) {
    double n = 0.0;
    for (const auto& [key, c] : counts) n += static_cast<double>(c);
    if (n == 0.0) return 1.0;
    double tv = 0.0;
    for (const auto& [key, p] : exact) {
        auto it = counts.find(key);
        tv += std::abs((it == counts.end() ? 0.0 : static_cast<double>(it->second) / n) - p);
    }
    for (const auto& [key, c] : counts)
        if (!exact.count(key)) tv += static_cast<double>(c) / n;
    return tv / 2.0;
}

std::uint64_t chain_stream(std::uint64_t seed, int k) { return mix(seed, 0x6d636d63ULL + static_cast<std::uint64_t>(k)); }

std::vector<DrawResult> agreement_over_draws(const Model& m, const DistributionSpec& law, int L,
                                             const std::vector<int>& labels, double T, std::size_t draws,
                                             const ChainOptions& opt, std::uint64_t seed, int threads) {
    const Region reg = Region::cube(m.dim(), L);
    const std::size_t jobs = draws * labels.size();
    std::vector<DrawResult> out(jobs);
    const int nt = std::max(1, threads);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nt));
    auto work = [&](std::size_t first) {
        try {
            for (std::size_t j = first; j < jobs; j += static_cast<std::size_t>(nt)) {
                const std::size_t i = j / labels.size();
                const int k = labels[j % labels.size()];
                Disorder dis = draw_disorder(m, law, reg, derive_seed(seed, i));
                ChainOptions o = opt;
                o.seed = derive_seed(chain_stream(seed, k), i);
                Observables obs = run_chain(m, dis.eta, reg, k, T, o);
                out[j] = {i, k, law.epsilon, T, obs.agreement, obs.tau_est};
            }
        } catch (...) {
            errors[first] = std::current_exception();
        }
    };
    if (nt == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) pool.emplace_back(work, static_cast<std::size_t>(t));
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace pslab
