#pragma once

#include <functional>
#include <vector>

#include "pslab/contours.hpp"

namespace pslab {

// standard: x = b^k on the two innermost layers of reg; tilde: on the three innermost layers.
enum class PFVariant { standard, tilde };

constexpr std::size_t kStateBudget = std::size_t{1} << 24;

struct PartitionValue {
    double log_value = 0.0;
    PFVariant variant = PFVariant::standard;
    int k = 0;
    double T = 1.0;
};

// Sites of reg left free by the variant.
Region free_sites(const Region& reg, PFVariant variant);

// Calls fn(x, H^k_{η,reg}(x)) for every configuration on reg admitted by the variant.
// x is b^k off the free sites. Throws BudgetError when n_values^|free| exceeds the budget.
void for_each_configuration(const Model& m, const RandomField& eta, const Region& reg, int k, PFVariant variant,
                            const std::function<void(const Configuration&, double)>& fn,
                            std::size_t budget = kStateBudget);

PartitionValue partition_function(const Model& m, const RandomField& eta, const Region& reg, int k, double T,
                                  PFVariant variant = PFVariant::standard, std::size_t budget = kStateBudget);

// (e_g|reg| + S^k_reg)/T, the log of the factor turning Z^k into Ξ^k.
double log_ground_factor(const Model& m, const RandomField& eta, const Region& reg, int k, double T);

// Every k-contour whose support lies in reg (standard) or in erode(reg, 1) (tilde): the union
// of the contour sets of all admitted configurations, restricted to label k.
std::vector<Contour> polymer_family(const Model& m, const Region& reg, int k, PFVariant variant,
                                    std::size_t budget = kStateBudget);

enum class WeightMethod { recursive, direct };

struct ContourWeight {
    double value = 0.0;
    double log_value = 0.0;
};

// w^{k0}(C) = exp(−D/T) Π_k Z̃^k(Int_k C) / Z^{k0}(Int_k C). The recursive method obtains
// both partition functions of every hole from polymer sums over the hole; direct enumerates them.
ContourWeight weight(const Model& m, const RandomField& eta, const Contour& c, int k0, double T,
                     WeightMethod method = WeightMethod::recursive, std::size_t budget = kStateBudget);

// log Σ over pairwise compatible sub-collections of `family` of Π w, given log w per contour.
double log_polymer_sum(const std::vector<Contour>& family, const std::vector<double>& log_w,
                       std::size_t budget = kStateBudget);

struct PolymerIdentity {
    double log_lhs = 0.0;  // log[exp((e_g|Λ| + S)/T) Z^k]
    double log_rhs = 0.0;  // log Σ_{compatible collections} Π w
    double max_rel_err = 0.0;
    double S = 0.0;
    std::size_t contours = 0;
};

PolymerIdentity polymer_identity_check(const Model& m, const RandomField& eta, const Region& reg, int k, double T,
                                       std::size_t budget = kStateBudget);

enum class ProbabilityMethod { formula, direct };

// μ^k_{η,reg}(c0 is an external contour of x).
double contour_probability(const Contour& c0, const Model& m, const RandomField& eta, const Region& reg, int k,
                           double T, ProbabilityMethod method, std::size_t budget = kStateBudget);

}  // namespace pslab
