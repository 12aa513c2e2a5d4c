#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pslab/contours.hpp"
#include "pslab/stats.hpp"

namespace pslab {

// min(1, exp(−ΔH/T)); 0 for ΔH = +∞.
double metropolis_acceptance(double dH, double T);

// Single-site Metropolis state for μ^k_{η,reg}: x = b^k on ∂int₂ reg and outside reg, free on erode(reg, 2).
class ChainState {
public:
    ChainState(const Model& m, const RandomField& eta, const Region& reg, int k, std::uint64_t seed);

    const Region& free() const { return free_; }
    int at(const Site& s) const;
    // Only free sites may be set; throws DomainError for a state of infinite energy.
    void set(const Site& s, int v);
    Configuration configuration() const;

    double energy() const { return energy_; }
    double recompute_energy() const;
    // Replaces the cached energy by a fresh sum and returns the absolute drift.
    double rebuild();

    double delta(const Site& s, int v) const;
    double acceptance(const Site& s, int v, double T) const { return metropolis_acceptance(delta(s, v), T); }
    // One attempt at free site index i with proposed value v; u is the uniform deciding acceptance.
    bool attempt(std::size_t i, int v, double T, double u);
    // |free| attempts at uniformly chosen free sites, each proposing a uniformly chosen other value.
    std::size_t sweep(double T);

    double agreement() const;  // fraction of free sites equal to b^k
    std::vector<int> free_values() const;
    std::uint64_t sweeps_done() const { return sweeps_; }

private:
    class View;
    const Model& m_;
    const RandomField& eta_;
    Region reg_, free_;
    int ground_;
    Site lo_{};
    std::array<int, kMaxDim> ext_{};
    mutable std::vector<int> grid_;  // delta() trials a value in place and restores it
    std::vector<std::size_t> free_index_;
    std::vector<std::vector<Site>> affected_;  // sites of reg whose local energy reads free site i
    std::vector<std::vector<std::size_t>> affected_cells_;
    std::vector<double> local_;  // cached local energy per grid cell of reg
    std::vector<double> scratch_;
    double energy_ = 0;
    std::uint64_t sweeps_ = 0;
    std::mt19937_64 rng_;

    std::ptrdiff_t index(const Site& s) const;
    double local_sum(const std::vector<Site>& sites) const;
};

struct ChainOptions {
    std::size_t sweeps = 10'000;
    std::size_t burn_in = 1'000;
    std::uint64_t seed = 0;
    std::size_t snapshot_every = 10;   // contour detection cadence
    std::size_t rebuild_every = 1'000; // energy cache refresh cadence
    bool track_contours = true;
    bool record_states = false;        // histogram of free-site states, one entry per sweep
};

struct Observables {
    double agreement = 0;              // mean over post-burn-in sweeps of the agreement fraction
    double tau_est = 1;                // integrated autocorrelation time of the agreement series, in sweeps
    std::size_t sweeps = 0, burn_in = 0, samples = 0, snapshots = 0;
    double acceptance_rate = 0;
    double max_drift = 0;              // largest energy cache drift seen at a rebuild
    std::map<std::string, std::size_t> contour_counts;  // canonical external contour -> snapshots containing it
    std::map<std::string, Contour> contours_seen;
    std::map<std::vector<int>, std::size_t> state_counts;
};

Observables run_chain(const Model& m, const RandomField& eta, const Region& reg, int k, double T,
                      const ChainOptions& opt);
Observables run_chain(const Model& m, const RandomField& eta, const Region& reg, int k, double T, std::size_t sweeps,
                      std::size_t burn_in, std::uint64_t seed);

struct ContourFrequency {
    Contour contour;
    std::size_t hits = 0, snapshots = 0;
    double frequency = 0;
    Interval ci;
};

// Fraction of snapshots in which each reference contour is an external contour of the chain state.
std::vector<ContourFrequency> contour_frequency(const Observables& obs, const std::vector<Contour>& refs);

// Integrated autocorrelation time 1 + 2Σρ(t) with Sokal's self-consistent window (c = 5).
double integrated_autocorrelation(const std::vector<double>& series, double c = 5.0);

// Exact μ^k_{η,reg} over the free-site values, keyed like Observables::state_counts.
std::map<std::vector<int>, double> exact_gibbs(const Model& m, const RandomField& eta, const Region& reg, int k,
                                               double T, std::size_t budget = std::size_t{1} << 20);
double total_variation(const std::map<std::vector<int>, std::size_t>& counts,
                       const std::map<std::vector<int>, double>& exact);

struct DrawResult {
    std::size_t draw = 0;
    int k = 0;
    double epsilon = 0, T = 0;
    double agreement = 0, tau_est = 0;
};

// One chain per (disorder draw, ground label) on the cube of side L at the origin. Draw i uses
// disorder seed derive_seed(seed, i) and chain seed derive_seed(chain_stream(seed, k), i).
std::vector<DrawResult> agreement_over_draws(const Model& m, const DistributionSpec& law, int L,
                                             const std::vector<int>& labels, double T, std::size_t draws,
                                             const ChainOptions& opt, std::uint64_t seed, int threads = 1);
std::uint64_t chain_stream(std::uint64_t seed, int k);

}  // namespace pslab
