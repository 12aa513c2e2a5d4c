#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pslab/models.hpp"

namespace pslab {

struct Hole {
    Region region;
    int k;  // ground-state index on the hole's boundary
};

struct Contour {
    int label = 0;  // ground-state index on the exterior
    Region support;
    std::vector<int> values;  // aligned with support.sites()
    std::vector<Hole> holes;
    Region interior;

    int value_at(const Site& s) const;
    Region interior_k(int k) const;
    std::size_t size() const { return support.size(); }
    Contour translated(const Site& u) const;
    std::string canonical() const;

    friend bool operator==(const Contour& a, const Contour& b) {
        return a.label == b.label && a.support == b.support && a.values == b.values;
    }
    friend bool operator<(const Contour& a, const Contour& b);
};

// Builds a contour from support and values, classifying complement components.
// Throws DomainError when a component's boundary is not constant at a ground value.
Contour make_contour(const Model& m, const Region& support, const std::vector<int>& values);

// Exterior at the label's ground value, holes at their ground values, support values on sC.
Configuration embed(const Model& m, const Contour& c);

Region unstable_sites(const Model& m, const Configuration& x);
// Contours of x, which must equal a ground state outside a finite set.
std::vector<Contour> extract_contours(const Model& m, const Configuration& x);

bool is_valid_contour(const Model& m, const Contour& c);

// C ≤ C′ iff sC ⊂ Int C′
bool nested_in(const Contour& inner, const Contour& outer);
bool compatible(const Contour& a, const Contour& b);
std::vector<Contour> external_contours(const std::vector<Contour>& cs);

struct ContourEnumeration {
    std::vector<Contour> contours;
    std::size_t supports_examined = 0;
};

// Contours with |sC| = n (all sizes in [1, n] when up_to), labelled with ground index `label`
// (every label when label < 0). Anchored: every translate with 0 ∈ sC ∪ Int C; otherwise one
// representative per translation class.
ContourEnumeration enumerate_contours(const Model& m, int n, bool anchored, int label = -1, bool up_to = false,
                                      std::size_t budget = 20'000'000);

// All contours produced by a single non-ground site in a ground background (any dimension).
std::vector<Contour> single_site_contours(const Model& m, int label);

// D^k_η(C) = Σ_{s∈sC} Σ_α (h^α + η^α_s)(g^α_s(C) − g^α_s(b^k))
double excitation_energy(const Model& m, const Contour& c, const RandomField& eta);

struct PeierlsResult {
    double rho_measured = kInf;
    std::optional<Contour> witness;
    std::size_t contours_scanned = 0;
    bool partial = false;  // budget hit
    bool meets_declared = true;
};

PeierlsResult peierls_scan(const Model& m, int n_max, std::size_t budget = 20'000'000);
// Same scan over an explicit contour family.
PeierlsResult peierls_scan(const Model& m, const std::vector<Contour>& family);

// Both sides of H^{k0}(x) = H_{Λ∩Ext(x)}(b^{k0}) + Σ_{external C} [H(C) + Σ_k H^k_{Int_k C}(x)].
struct Decomposition {
    double lhs = 0, rhs = 0;
    std::size_t external = 0;
};
Decomposition hamiltonian_decomposition(const Model& m, const RandomField& eta, const Region& reg, int k0,
                                      const Configuration& x);

}  // namespace pslab
