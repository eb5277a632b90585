#pragma once

#include <vector>

#include "residuap/group.hpp"
#include "residuap/linalg.hpp"

namespace residuap {

// x = sum coords[x][i] * gens[i]; the rows of relations span the relation lattice.
struct AbelianCoords {
    GroupPtr group;
    std::vector<int> gens;
    std::vector<std::vector<long long>> coords;
    IMat relations;  // square, upper triangular
};
AbelianCoords abelian_coordinates(const GroupPtr& A);

// Z^n modulo the row span of a relation matrix.
struct Cokernel {
    int ngens = 0;
    std::vector<long long> orders;  // cyclic factors, 0 for Z, trivial factors dropped
    std::vector<int> cols;          // columns of V giving those factors
    IMat V;
    GroupPtr group;                 // abelian(orders), only when finite

    bool finite() const;
    int free_rank() const;
    std::vector<long long> torsion() const;  // the finite orders, each dividing the next
    std::vector<long long> reduce(const std::vector<long long>& x) const;
    int element(const std::vector<long long>& x) const;  // index in group
};
Cokernel cokernel(const IMat& relations, int ngens);

// Invariant factors d_1 | d_2 | ... of the nontrivial finite part and the free rank.
struct AbelianInvariants {
    std::vector<long long> torsion;
    int free_rank = 0;
    bool operator==(const AbelianInvariants& o) const { return torsion == o.torsion && free_rank == o.free_rank; }
};
AbelianInvariants invariants(const Cokernel& c);
AbelianInvariants invariants(const GroupPtr& A);

struct Identification {
    int a, x, b, y;  // identify iota_a(x) with iota_b(y)
};
struct AbelianColimit {
    GroupPtr group;
    std::vector<Homomorphism> maps;
};
// the direct sum of the groups modulo the identifications
AbelianColimit abelian_colimit(const std::vector<GroupPtr>& groups, const std::vector<Identification>& ids);

}  // namespace residuap
