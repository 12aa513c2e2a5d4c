#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pslab/contours.hpp"

namespace pslab {

// Π_i [2^ℓ s_i, 2^ℓ (s_i + 1)) ∩ Z^d
struct CubeIndex {
    int level = 0;
    Site base{};
    Region sites(int d) const;
};

CubeIndex cube_of(const Site& s, int level, int d);

struct CoarseReplica {
    int level = 0;
    std::vector<CubeIndex> cubes;  // sorted by base
    Region covered;
};

// Union of the ℓ-cubes with |cube ∩ reg| ≥ ½|cube|.
CoarseReplica coarse_replica(const Region& reg, int level);

// Connected regions grown by random site addition; pinned by seed.
std::vector<Region> blob_suite(int d, std::size_t count, std::uint64_t seed, int min_size = 4, int max_size = 120);

struct AuditRow {
    std::size_t instance = 0;
    int level = 0;
    double lhs = 0, rhs = 0, ratio = 0;
    std::string constant;  // b0, b1, b2 or degradation
};

struct GeometryAudit {
    std::vector<AuditRow> rows;
    double b0 = 0, b1 = 0, b2 = 0;  // maxima of the observed ratios
    std::size_t face_pairs = 0;
    bool replicas_empty_beyond_l0 = true;
    bool degradation_ok = true;
};

// For ℓ ≤ max_level: 2^{ℓ(d−1)} vs |∂ext Λ ∩ U| over face-sharing admissible/inadmissible pairs,
// |∂ext B_ℓ(Λ)| vs |∂ext Λ|, and |B_ℓ Δ B_{ℓ+1}| vs 2^ℓ|∂ext Λ|. Then checks, with the measured
// b1, that B_ℓ(Λ) = ∅ for ℓ ≥ ℓ0(|Λ|) = ⌈ln(b1|Λ|)/((d−1) ln 2)⌉, and that |B_ℓ Δ Λ| stays within
// Σ_{i<ℓ} b2 2^i |∂ext Λ|.
GeometryAudit audit_geometry(const std::vector<Region>& suite, int max_level);

int l0_of(double b1, std::size_t n, int d);

// A support with its interior split by ground-state label.
struct InteriorProfile {
    Region support;
    std::vector<Region> interiors;
};

InteriorProfile profile_of(const Contour& c, int n_ground);
// Bare regions carry a single interior slot.
InteriorProfile profile_of(const Region& support);

// ν [Σ_k (|Int_k C1 Δ Int_k C2| + |∂ext₂ Int_k C1 ∪ ∂ext₂ Int_k C2|)]^{1/2}, 0 for equal supports.
double dbar(const InteriorProfile& a, const InteriorProfile& b, double nu);

struct NetRow {
    int level = 0;
    double radius = 0;        // ν b3 2^{ℓ/2} √n
    std::size_t net_size = 0; // distinct tuples of coarse interiors
    double entropy_bound = 0; // exp(b4 ℓ n / 2^{ℓ(d−1)}) with the measured b4
    double dudley_term = 0;   // (r_ℓ − r_{ℓ−1}) √ln(net_{ℓ−1}); r_0 √ln|Γ(n)| at ℓ = 0
    double worst_distance = 0;
};

struct CoveringTable {
    int n = 0, d = 0;
    double nu = 1, b3 = 0, b4 = 0;
    std::size_t family_size = 0;  // |Γ(n)|
    std::vector<NetRow> rows;
    double dudley = 0;
    bool net_property = true;  // every support within the radius of its representative
};

// b3 = 2(√2+1)√(2 b2) + √2·5^{d/2}.
double b3_from_b2(double b2, int d);

// Nets over the anchored supports Γ(n) = {connected |R| = n, 0 ∈ R ∪ Int R}, grouped by their
// coarse interiors at each level up to max_level.
CoveringTable covering_and_entropy(int n, int d, int max_level, double nu, double b2,
                                   std::size_t budget = 50'000'000);

// √ℓ 2^{−ℓ(d−2)/2} for ℓ = 1..L, and whether that sequence is nonincreasing.
std::vector<double> dudley_summands(int d, int L);
bool dudley_summands_nonincreasing(int d, int L);

}  // namespace pslab
