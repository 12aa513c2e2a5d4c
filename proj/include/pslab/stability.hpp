#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pslab/contours.hpp"
#include "pslab/polymer.hpp"
#include "pslab/symmetry.hpp"

namespace pslab {

enum class StabilityEvent { fsc, qisc, fsir, all };

const char* event_name(StabilityEvent e);
StabilityEvent parse_event(const std::string& s);

// Thresholds are ρ|sC|/4; margins are the threshold minus each quantity.
struct StabilityReport {
    double threshold = 0;
    double fsc_value = 0, qisc_value = 0, fsir_value = 0;
    double fsc_margin = 0, qisc_margin = 0, fsir_margin = 0;
    bool fsc = true, qisc = true, fsir = true;

    bool holds(StabilityEvent e) const;
};

// Quenched sites the FSC and QISC quantities may read: ω behind η on sC ∪ ∂ext₂(sC ∪ Int C).
Region stability_reach(const Model& m, const Contour& c);

// τ_{Int C}: on every hole with label k ≠ label(C), the natural pair k → label(C); identity elsewhere.
// QISC sums over the inner layer of every hole. FSIR is Σ_h T(ln Z^{k0}_{η(τω),h} − ln Z^{k0}_{η(ω),h}).
StabilityReport stability_events(const Contour& c, const ModelPtr& m, const QuenchedConfig& omega, double T,
                                 double rho, bool with_fsir = true, std::size_t budget = kStateBudget);

struct FreeEnergyDelta {
    double value = 0;        // T (ln Z under τ_{reg'} − ln Z)
    double log_z = 0, log_z_transformed = 0;
};

// ω with τ_{reg'} applied on the quenched sites of reg' ∪ ∂ext reg', untouched elsewhere.
QuenchedConfig transformed_omega(const SymmetryPair& pair, const QuenchedConfig& omega, const Region& reg_prime);

// pair == nullptr is the identity transform.
FreeEnergyDelta free_energy_delta(const Model& m, const SymmetryPair* pair, const QuenchedConfig& omega,
                                  const Region& reg, const Region& reg_prime, int k, double T,
                                  std::size_t budget = kStateBudget);

struct EventEstimate {
    StabilityEvent event = StabilityEvent::fsc;
    double epsilon = 0, T = 0;
    int n_max = 0;
    std::size_t trials = 0, successes = 0;
    double p_hat = 0;
    Interval ci;
    std::uint64_t seed = 0;
    std::size_t family_size = 0;
    double rho = 0;
    bool rho_measured = false;
    bool vacuous() const { return family_size == 0; }
};

// Every anchored contour (0 ∈ sC ∪ Int C) of every label with |sC| ≤ n_max.
std::vector<Contour> anchored_family(const Model& m, int n_max, std::size_t budget = 20'000'000);

// Fraction of disorder draws for which every contour of the family satisfies the event. Draw i
// uses seed derive_seed(seed, i); the keyed sampler makes draws at different ε share their
// underlying uniforms. family == nullptr uses anchored_family(m, n_max).
EventEstimate estimate_event_probability(StabilityEvent ev, const ModelPtr& m, const DistributionSpec& law, int n_max,
                                         std::size_t trials, double T, std::uint64_t seed, int threads = 1,
                                         const std::vector<Contour>* family = nullptr,
                                         std::size_t budget = kStateBudget);

}  // namespace pslab
