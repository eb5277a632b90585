#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "residuap/filtration.hpp"
#include "residuap/group.hpp"
#include "residuap/linalg.hpp"

namespace residuap {

// Square matrices over Z/m, row-major.
struct ModMatrix {
    int n = 2;
    long long m = 1;
    std::vector<long long> a;

    static ModMatrix identity(int n, long long m);
    long long at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
    ModMatrix operator*(const ModMatrix& o) const;
    ModMatrix pow(long long e) const;
    long long det() const;
    bool is_identity() const;
    ModMatrix reduce(long long m2) const;  // m2 divides m
    bool operator==(const ModMatrix& o) const { return a == o.a; }
};

// SL(2, Z/p^k) with its congruence subgroups G_i = Ker(SL(2,Z/p^k) -> SL(2,Z/p^i)).
// Elements are kept as packed codes; products are computed on the matrices.
class CongruenceTower {
public:
    CongruenceTower(int p, int k, const Caps& caps = {});
    int p() const { return p_; }
    int k() const { return k_; }
    long long modulus() const { return m_; }
    std::size_t order() const { return codes_.size(); }
    ModMatrix element(std::size_t i) const;
    std::size_t index(const ModMatrix& M) const;
    // largest i <= k with M = 1 mod p^i
    int level(const ModMatrix& M) const;
    // indices of G_i, 0 <= i <= k
    std::vector<std::size_t> members(int i) const;
    // G_i as a Cayley table group (identity first), when small enough
    GroupPtr materialize(int i, const Caps& caps = {}) const;
    // G_i / G_{i+1} coordinates of M in G_i: the entries (a-1, b, c) divided by p^i, mod p
    std::vector<int> layer_coords(const ModMatrix& M, int i) const;

private:
    int p_, k_;
    long long m_;
    std::vector<std::uint64_t> codes_;  // sorted
    std::uint64_t code(const ModMatrix& M) const;
};

// G_i >= G_{i+1} >= ... >= G_k as a filtration of the materialized G_i
Filtration tower_filtration(const CongruenceTower& T, int i, const Caps& caps = {});

// p^{3k-2} (p^2 - 1)
long long sl2_order_formula(int p, int k);

struct CongruenceLayerReport {
    bool order_ok = false;
    std::vector<int> layer_orders;       // |G_i / G_{i+1}|, i = 1..k-1
    std::vector<bool> layer_elementary;  // abelian of exponent p, order p^3
    bool commutators_ok = false;         // [G_i, G_j] in G_{i+j}, exhaustive
    bool commutators_checked = false;
    // (G_i)^p in G_{ip}; R = Z/p^k has mixed characteristic, reported only
    bool power_clause = false;
};
CongruenceLayerReport congruence_layer_check(int p, int k, const Caps& caps = {});

struct PowerMapReport {
    // level i = 1..k-2: G_i/G_{i+1} -> G_{i+1}/G_{i+2}, M -> M^p
    std::vector<bool> well_defined, homomorphism, injective;
    bool all_injective() const;
};
PowerMapReport power_map_injectivity(int p, int k, const Caps& caps = {});

struct UnitriangularOrder {
    long long order = 1;
    bool within_exponent = false;  // order <= p^d
    bool unit_codiagonal = false;  // some entry of the first nonzero codiagonal is a unit
    bool exact = false;            // order == p^d, asserted when unit_codiagonal
};
// order of id + N in UT_1(n, Z/p^d), N strictly upper triangular
UnitriangularOrder unitriangular_order(int n, int p, int d, const IMat& N);

// Words use letters +-(i+1) for generator i and its inverse.
struct Presentation {
    int ngens = 0;
    std::vector<std::vector<int>> relators;
    void verify() const;
};

struct SmithAbelianization {
    int free_rank = 0;
    std::vector<long long> torsion;  // d_i > 1, each dividing the next
    IMat relation_matrix;
    Smith smith;
    bool verified = false;  // U M V = D with unimodular U, V and the divisibility chain
};
SmithAbelianization smith_abelianization(const Presentation& P);
IMat relation_matrix(const Presentation& P);

struct MatrixGroupSpec {
    int n = 2;
    std::vector<IMat> gens;                        // integer matrices of determinant 1
    Presentation presentation;                     // on gens
    // generators of each T as words in gens; abelian and unipotent
    std::vector<std::vector<std::vector<int>>> subgroups;
    void verify() const;
    IMat evaluate(const std::vector<int>& word) const;
};

// Relative to the given generators t_j: L_k = {m : prod t_j^{m_j} in G_k}.
struct SubgroupLevelReport {
    std::vector<IMat> lattice;    // per k, a triangular basis of L_k
    std::vector<int> exponent;    // per k: c with L_k = p^c Z^q, -1 if not of that form
    std::vector<int> level;       // per k: c - k + 1, so that G_k n T = gamma^p_{k+level}(T); -99 if none
    bool level_is(int l) const;   // the same level l at every k
};
struct MatrixFiltrationReport {
    int p = 0, k_max = 0;
    std::vector<long long> image_orders;  // |image of G| at level k, 0 if the enumeration hit the cap
    std::vector<bool> image_complete;
    int theta_rank = 0;                   // rank of H = H_1(G)/torsion
    // images of G_1 >= ... >= G_K at level K = k_max, checked as a central p-filtration
    bool top_image_checked = false;
    bool top_image_central_p = false;
    std::vector<SubgroupLevelReport> subgroups;
    // common level over all k and all T, when one exists
    std::optional<int> level() const;
};
// G_k = Ker(G -> SL(n, Z/p^k) x H/p^k H); the image of G is enumerated by words of bounded length
MatrixFiltrationReport matrix_p_filtration(const MatrixGroupSpec& spec, int p, int k_max, const Caps& caps = {});

}  // namespace residuap
