#pragma once

#include <string>
#include <vector>

#include "residuap/group.hpp"

namespace residuap {

GroupPtr trivial_group();
GroupPtr cyclic(int n);
// F_p^r, element index = sum of digits base p
GroupPtr elementary_abelian(int p, int r);
// C_{n1} x C_{n2} x ..., first factor most significant
GroupPtr abelian(const std::vector<int>& orders);
// dihedral group of order 2n, r^i s^j at index j*n+i
GroupPtr dihedral(int order);
// dicyclic group of order 4m (generalized quaternion for m a power of 2)
GroupPtr dicyclic(int order);
// C_m : C_k with b a b^-1 = a^r, a^i b^j at index j*m+i
GroupPtr metacyclic(int m, int k, int r, const std::string& name);
// upper unitriangular 3x3 over F_p, (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')
GroupPtr heisenberg(int p);

// Groups by name: C<n>, C<p>^<r>, C4xC2, D8, Q8, D16, SD16, Q16, M16, C4:C4,
// C2^2:C4, D8xC2, Q8xC2, Pauli16, Heis27, C9:C3, ...
GroupPtr catalog_group(const std::string& name);
std::vector<std::string> catalog_names();
// the bundled p-groups used by the property suites
std::vector<std::string> catalog_p_group_names();
// all 2-groups of order <= 16 up to isomorphism, smallest first
std::vector<std::string> two_groups_upto16();

}  // namespace residuap
