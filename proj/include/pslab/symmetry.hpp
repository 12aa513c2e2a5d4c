#pragma once

#include <string>
#include <vector>

#include "pslab/models.hpp"

namespace pslab {

enum class TransformKind { flip, potts_cycle, translate };

struct TransformSpec {
    TransformKind kind = TransformKind::flip;
    int shift = 1;  // potts_cycle: j − i
    int axis = 0;   // translate: u = sign·e_axis, in base coordinates for blocked models
    int sign = 1;
};

const char* transform_kind_name(TransformKind k);
TransformKind parse_transform_kind(const std::string& s);

// The spin map τ̄ sends x to (τ̄x)_s = vmap(x_{s−u}); the quench map sends ω to
// (τω)^β_s = sign_β ω^{perm_β}_{s−u}. Blocked models apply both in base coordinates.
class SymmetryPair {
public:
    SymmetryPair(ModelPtr model, TransformSpec spec, int k1);

    const Model& model() const { return *model_; }
    const TransformSpec& spec() const { return spec_; }
    int k1() const { return k1_; }
    int k2() const { return k2_; }
    double lipschitz() const { return 1.0; }

    // τ̄ reads x on reg ∪ ∂ext reg and returns a configuration equal to b^{k2} off reg.
    // Throws DomainError when a translated block is not an admissible block value.
    Configuration spin_map(const Configuration& x, const Region& reg) const;
    // τω on the quenched sites of reg ∪ ∂ext reg; needs ω on p_set(reg).
    QuenchedConfig quench_map(const QuenchedConfig& omega, const Region& reg) const;
    Region quench_domain(const Region& reg) const;
    Region p_set(const Region& reg) const;

private:
    ModelPtr model_;
    const BlockedModel* blocked_ = nullptr;
    TransformSpec spec_;
    int k1_, k2_ = -1;
    Site u_{};
    std::vector<int> vmap_, perm_;
    std::vector<double> sign_;

    Region base_cover(const Region& reg, int r) const;
};

// Throws ParameterError naming the model's symmetry group when the kind does not apply.
SymmetryPair make_transform(ModelPtr model, TransformSpec spec, int k1);
// The pair this library uses to map label k1 onto k2 (flip, cycle or unit translation).
SymmetryPair natural_transform(ModelPtr model, int k1, int k2);

struct SymmetryReport {
    bool locality = true, injectivity = true, energy = true, lipschitz = true, measure = true;
    std::size_t configurations = 0;     // admissible x visited by the energy check
    std::size_t injectivity_checked = 0;
    double max_energy_gap = 0.0;        // max |H^{k1}_η(x) − H^{k2}_{τη}(τ̄x)|
    double min_energy_margin = kInf;    // min of boundary sum minus gap
    double lipschitz_estimate = 0.0;
    bool measure_exact = false;         // discrete pushforward compared atom by atom
    double ks_statistic = 0.0;
    double ks_critical = 0.0;

    bool all() const { return locality && injectivity && energy && lipschitz && measure; }
    bool zero_slack() const { return max_energy_gap <= 1e-12; }
};

bool check_locality(const SymmetryPair& p, const Region& reg, std::size_t trials, std::uint64_t seed);
// Injective on configurations equal to b^{k1} on ∂ext reg ∪ ∂int reg (finite H_0 only).
bool check_injectivity(const SymmetryPair& p, const Region& reg, std::size_t budget, std::size_t* checked = nullptr);
// Energy quasi-invariance over all x equal to b^{k1} on ∂int₂ reg ∪ ∂ext reg, for ω = 0 and
// `draws` sampled quenched configurations.
void check_energy(const SymmetryPair& p, const Region& reg, const DistributionSpec& law, std::size_t draws,
                  std::uint64_t seed, std::size_t budget, SymmetryReport& out);

SymmetryReport verify_local_symmetry(const SymmetryPair& p, const Region& reg, const DistributionSpec& law,
                                     std::size_t trials, std::uint64_t seed, std::size_t budget = 1u << 22);

}  // namespace pslab
