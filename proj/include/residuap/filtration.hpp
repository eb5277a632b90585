#pragma once

#include <optional>
#include <string>
#include <vector>

#include "residuap/group.hpp"

namespace residuap {

// G_1 >= G_2 >= ... >= G_L, continuing with G_L forever.
struct Filtration {
    GroupPtr group;
    std::vector<Subgroup> terms;

    // 1-based, honouring the trailing convention
    const Subgroup& term(int n) const;
    int size() const { return static_cast<int>(terms.size()); }
    // least L with G_{L+1} trivial; -1 if the filtration never reaches 1
    int length() const;
    int essential_length() const;
    bool complete() const;
    bool descending() const;
    bool is_normal() const;
    bool is_central() const;
    bool is_central_p(int p) const;
    // drop repeated trailing terms
    Filtration trimmed() const;
};

struct StretchMap {
    std::vector<int> iota;  // iota[0] = 1, strictly increasing
    int operator()(int n) const { return iota[n - 1]; }
    void verify() const;
};

Filtration make_filtration(const GroupPtr& G, std::vector<Subgroup> terms);
bool equivalent(const Filtration& F, const Filtration& H);
bool same_terms(const Filtration& F, const Filtration& H);  // term by term
// F_n ∩ K, as subgroups of G
Filtration intersect(const Filtration& F, const Subgroup& K);
// h^-1(F_n), a filtration of h.dom
Filtration pullback(const Filtration& F, const Homomorphism& h);
// h(F_n), a filtration of h.cod restricted to the image
Filtration pushforward(const Filtration& F, const Homomorphism& h);
Filtration stretch(const Filtration& F, const StretchMap& s);
// a single iota stretching each pair (F, F*) at once, least lexicographically
std::optional<StretchMap> common_stretch(const std::vector<std::pair<Filtration, Filtration>>& pairs);

Filtration lower_central_series(const GroupPtr& G);
Filtration lower_central_p_series(const GroupPtr& G, int p);
// Recursive definition, cross-checked against Lazard's formula.
Filtration dimension_series(const GroupPtr& G, int p);
Filtration dimension_series_recursive(const GroupPtr& G, int p);
Filtration dimension_series_lazard(const GroupPtr& G, int p);

// The layer A/B with A/B elementary abelian, as coordinates over F_p.
class Layer {
public:
    Layer(const Subgroup& A, const Subgroup& B, int p);
    int dim() const { return static_cast<int>(basis_.size()); }
    int p() const { return p_; }
    bool in_top(int x) const { return coset_[x] >= 0; }
    // coordinates of x in A; throws if x is not in A
    std::vector<int> coords(int x) const;
    int coset(int x) const { return coset_[x]; }
    int element(const std::vector<int>& c) const;  // some element with these coordinates
    const std::vector<int>& basis() const { return basis_; }
    const Subgroup& top() const { return A_; }
    const Subgroup& bottom() const { return B_; }

private:
    Subgroup A_, B_;
    int p_;
    std::vector<int> basis_;
    std::vector<int> coset_;                  // per element of G, -1 outside A
    std::vector<std::vector<int>> coset_coords_;
    std::vector<int> coset_rep_;
};

Layer layer(const Filtration& F, int n, int p);

// Chief refinement of a normal filtration of finite length.
Filtration chief_refinement(const Filtration& F);
bool is_chief(const Filtration& F);
// every chief filtration of G (maximal chains of normal subgroups), capped
std::vector<Filtration> chief_filtrations(const GroupPtr& G, std::size_t cap = 100000);

// Equivalent replacements F*, H* with uF^-1(F*) = uH^-1(H*) term by term.
std::pair<Filtration, Filtration> align_filtrations(const Filtration& F, const Filtration& H,
                                                    const Homomorphism& uF, const Homomorphism& uH);

struct PotencyLevel {
    int n = 0;
    bool p_morphism = false;      // x -> x^{p^n} G_{n+2} on G is a morphism
    bool p_kernel_is_G2 = false;
    bool s_morphism = false;      // x -> x^p G_{n+2} on G_n is a morphism
    bool s_kernel_ok = false;     // ... with kernel G_{n+1}
    bool phi_injective = false;
    bool phi_bijective = false;
    std::vector<int> p_kernel, s_kernel;
};

struct PotencyReport {
    int horizon = 0;
    std::vector<PotencyLevel> levels;
    bool p_potent = false;         // up to the horizon
    bool strongly = false;
    bool uniformly = false;
};

PotencyReport classify_potency(const Filtration& F, int p, int horizon);

// The morphism L_n -> L_{n+m} induced by x -> x^{p^m}, as a matrix over F_p
// (rows indexed by the basis of L_n).
struct LayerMap {
    int n = 0, m = 0;
    std::vector<std::vector<int>> matrix;
    int rank = 0;
    int dim_source = 0, dim_target = 0;
    bool injective() const { return rank == dim_source; }
    bool surjective() const { return rank == dim_target; }
    bool zero() const { return rank == 0; }
};

LayerMap power_layer_map(const Filtration& F, int p, int n, int m);
LayerMap power_layer_map(const GroupPtr& G, int p, int n, int m);

enum class Series { Gamma, GammaP, Dimension };
Filtration series(const GroupPtr& G, Series s, int p);

struct RetractReport {
    int levels = 0;
    bool intersections_equal = false;   // Sigma_n(H) = Sigma_n(G) ∩ H
    bool product_formula = false;       // Sigma_n(G) = Sigma_n(H)(Sigma_n(G) ∩ B), B the kernel
};
RetractReport retract_trace(const GroupPtr& G, const Subgroup& H, Series s, int p,
                            const Homomorphism* retraction = nullptr);

// (xy)^{p^m} congruences modulo gamma^p_{m+2}, for m <= m_max
bool hall_petrescu_holds(const GroupPtr& G, int p, int m_max);
// surjectivity of Gamma_1 x ... x Gamma_n -> L^p_n(G)
bool gamma_structure_surjective(const GroupPtr& G, int p, int n);

}  // namespace residuap
