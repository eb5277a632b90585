#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "residuap/filtration.hpp"
#include "residuap/group.hpp"
#include "residuap/linalg.hpp"

namespace residuap {

// Element of F_p[G]: coefficient per group element.
struct AlgebraElement {
    GroupPtr group;
    int p = 2;
    std::vector<int> coeffs;

    AlgebraElement operator+(const AlgebraElement& o) const;
    AlgebraElement operator-(const AlgebraElement& o) const;
    AlgebraElement operator*(const AlgebraElement& o) const;
    bool operator==(const AlgebraElement& o) const { return coeffs == o.coeffs; }
    bool zero() const;
    int augmentation() const;
};

AlgebraElement algebra_unit(const GroupPtr& G, int p, int g = 0);  // the basis element g
AlgebraElement algebra_hat(const GroupPtr& G, int p);                // sum of all elements
// g x and x g
std::vector<int> left_translate(const FiniteGroup& G, int g, const std::vector<int>& x);
std::vector<int> right_translate(const FiniteGroup& G, const std::vector<int>& x, int g);

struct IdealBasis {
    GroupPtr group;
    int p = 2;
    RowSpace space;

    int dim() const { return space.dim(); }
    bool contains(const std::vector<int>& v) const { return space.contains(v); }
    bool two_sided() const;
    bool left_ideal() const;
};

IdealBasis augmentation_ideal(const GroupPtr& G, int p);

struct AugmentationPowers {
    std::vector<IdealBasis> powers;  // powers[n-1] = omega^n, ending with the zero ideal
    std::vector<int> dims;
    int nilpotency_class = 0;        // largest d with omega^d != 0
};
AugmentationPowers augmentation_ideal_powers(const GroupPtr& G, int p);

// {g : 1 - g in omega^n}; checked against dimension_series
Filtration jennings_series(const GroupPtr& G, int p);
// (p-1) * sum n dim(D_n/D_{n+1})
int jennings_class_formula(const GroupPtr& G, int p);
// {x : x w = 0 for all w in omega}; checked to be span(hat G) = omega^d
IdealBasis annihilator_omega(const GroupPtr& G, int p);

// Basis prod_i (x_i - 1)^{a_i}, 0 <= a_i < p, x_i running through layer bases of
// the dimension series in order, x_i of weight n when it lies in D_n. Weight of a
// basis element is sum a_i w_i; those of weight >= n span omega^n.
class JenningsBasis {
public:
    JenningsBasis(const GroupPtr& G, int p);
    int p() const { return p_; }
    const Mat& rows() const { return rows_; }
    const std::vector<int>& weights() const { return weights_; }
    // largest n with v in omega^n, or -1 for v = 0
    int valuation(const Vec& v) const;
    int dim_power(int n) const;  // dim omega^n

private:
    int p_;
    Mat rows_, inverse_;
    std::vector<int> weights_;
    int words_ = 0;
    std::vector<std::uint64_t> bits_;  // inverse_ packed, p = 2 only
};

// T wr K with elements (top, f), f : K -> T, and
// (h1,f1)(h2,f2) = (h1 h2, f1^{h2} f2),  f^h(k) = f(h k).
class WreathProduct {
public:
    struct Elem {
        int top = 0;
        std::vector<int> f;
        bool operator==(const Elem& o) const { return top == o.top && f == o.f; }
    };

    WreathProduct(GroupPtr T, GroupPtr K);
    const GroupPtr& base_factor() const { return T_; }
    const GroupPtr& top_group() const { return K_; }
    Elem identity() const;
    Elem mul(const Elem& a, const Elem& b) const;
    Elem inv(const Elem& a) const;
    Elem top(int h) const;
    Elem base(std::vector<int> f) const;
    // log2 of the order, exact order when it fits
    double log2_order() const;
    std::optional<std::uint64_t> order() const;
    // top * |T|^|K| + sum f(k) |T|^k; fails above 64 bits
    std::uint64_t code(const Elem& a) const;
    Elem decode(std::uint64_t c) const;
    // numeric order of codes, without computing them
    bool less(const Elem& a, const Elem& b) const;

private:
    GroupPtr T_, K_;
};

struct ElemHash {
    std::size_t operator()(const WreathProduct::Elem& e) const;
};

struct WreathGroup {
    GroupPtr group;
    WreathProduct product;
    Homomorphism top;           // K -> W
    Subgroup base;              // T^K inside W
    std::vector<int> element_code;  // W index -> code (identity order)
    int index(const WreathProduct::Elem& e) const;
};

WreathGroup wreath(const GroupPtr& T, const GroupPtr& K, const Caps& caps = {});

// Subgroup of an implicit wreath product generated by gens, materialized with
// elements sorted by code.
struct ImplicitSubgroup {
    GroupPtr group;
    std::vector<WreathProduct::Elem> elems;
    int index(const WreathProduct::Elem& e) const;
};
ImplicitSubgroup implicit_subgroup(const WreathProduct& W, const std::vector<WreathProduct::Elem>& gens,
                                   std::size_t cap);

// theta*(k) = least preimage of k s(k)^{-1}, s(k) the least element of theta(A) k
std::vector<int> standard_countermap(const Homomorphism& theta);

// a -> (theta(a), f_a) with f_a(k) = c(theta(a) k)^{-1} a c(k), pushed into T by x_in_t.
// x_in_t has domain the kernel of theta materialized in sorted order.
std::vector<WreathProduct::Elem> standard_embedding_elems(const Homomorphism& theta,
                                                          const Homomorphism& x_in_t,
                                                          const std::vector<int>& countermap);

struct StandardEmbedding {
    WreathGroup W;
    Homomorphism alpha;
};
StandardEmbedding standard_embedding(const Homomorphism& theta, const Homomorphism& x_in_t,
                                     const Caps& caps = {});
// T = the kernel itself
StandardEmbedding standard_embedding(const Homomorphism& theta, const Caps& caps = {});

// base element (1, f) of F_p wr H read as sum f(k) k in F_p[H]
std::vector<int> base_vector(const WreathGroup& W, int w);

struct BuckleyLevel {
    int n = 0;
    int dim_omega = 0, dim_dimension = 0, dim_gamma_p = 0, dim_gamma = 0;
    bool equal = false;
};
struct BuckleyReport {
    int n_max = 0;
    std::vector<BuckleyLevel> levels;
    bool holds = false;
    int wreath_class = 0;   // nilpotency class of W
    int omega_class = 0;    // nilpotency class of omega(F_p[H])
};
BuckleyReport buckley_check(int p, const GroupPtr& H, int n_max, const Caps& caps = {});

}  // namespace residuap
