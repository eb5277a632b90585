#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace residuap {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a configured size limit would be exceeded.
class CapExceeded : public Error {
public:
    using Error::Error;
};

struct Caps {
    std::size_t order = 4096;     // largest group materialized as a Cayley table
    std::size_t aut = 256;        // largest group whose automorphisms are enumerated
    std::size_t wreath = 1u << 20;
    int depth = 6;                // search depth for bounded searches
};

class FiniteGroup {
public:
    // mult is row-major, order*order entries. Cheap checks (identity at 0,
    // latin square) always run; associativity is left to check_axioms().
    FiniteGroup(int order, std::vector<int> mult, std::string name = "");

    int order() const { return n_; }
    const std::string& name() const { return name_; }
    int mul(int a, int b) const { return mult_[static_cast<std::size_t>(a) * n_ + b]; }
    int inv(int a) const { return inv_[a]; }
    int pow(int a, long long e) const;
    int conj(int a, int g) const { return mul(inv(g), mul(a, g)); }  // g^-1 a g
    int comm(int a, int b) const { return mul(mul(inv(a), inv(b)), mul(a, b)); }
    int element_order(int a) const;
    bool is_abelian() const;
    // the prime p if the order is a power of p (order 1 gives 0)
    int prime() const;
    bool is_p_group(int p) const;
    const std::vector<int>& table() const { return mult_; }

    // Exhaustive for order <= 256, seeded sampling above.
    void check_axioms(std::uint64_t seed = 1, int samples = 200000) const;

private:
    int n_;
    std::vector<int> mult_;
    std::vector<int> inv_;
    std::string name_;
};

using GroupPtr = std::shared_ptr<const FiniteGroup>;

GroupPtr make_group(int order, std::vector<int> mult, std::string name = "");

struct Subgroup {
    GroupPtr parent;
    std::vector<int> elems;  // sorted

    int size() const { return static_cast<int>(elems.size()); }
    bool contains(int g) const;
    bool trivial() const { return elems.size() == 1; }
    bool operator==(const Subgroup& o) const { return elems == o.elems; }
    bool operator!=(const Subgroup& o) const { return elems != o.elems; }
    bool subset_of(const Subgroup& o) const;
    std::vector<char> mask() const;
};

Subgroup trivial_subgroup(const GroupPtr& G);
Subgroup whole_group(const GroupPtr& G);
Subgroup subgroup_from_mask(const GroupPtr& G, const std::vector<char>& mask);
Subgroup subgroup_generated(const GroupPtr& G, const std::vector<int>& gens);
Subgroup normal_closure(const GroupPtr& G, const std::vector<int>& gens);
// normal closure of gens inside the subgroup J
Subgroup normal_closure_in(const Subgroup& J, const std::vector<int>& gens);
bool is_normal(const Subgroup& N);
bool is_normal_in(const Subgroup& N, const Subgroup& J);
Subgroup intersect(const Subgroup& A, const Subgroup& B);
Subgroup join(const Subgroup& A, const Subgroup& B);
Subgroup commutator(const Subgroup& A, const Subgroup& B);
// <a^e : a in A>
Subgroup power_subgroup(const Subgroup& A, long long e);
Subgroup center(const GroupPtr& G);
std::vector<int> generators(const Subgroup& S);
// all subgroups normal in G, sorted by size then elements
std::vector<Subgroup> normal_subgroups(const GroupPtr& G);
std::vector<Subgroup> all_subgroups(const GroupPtr& G);

struct Homomorphism {
    GroupPtr dom, cod;
    std::vector<int> map;

    int operator()(int g) const { return map[g]; }
    bool is_homomorphism() const;
    bool is_injective() const;
    Subgroup kernel() const;
    Subgroup image() const;
    Subgroup image(const Subgroup& S) const;
    Subgroup preimage(const Subgroup& S) const;
    void verify() const;  // throws if not a homomorphism
};

Homomorphism identity_hom(const GroupPtr& G);
Homomorphism inclusion(const Subgroup& S, const GroupPtr& Sg);
Homomorphism compose(const Homomorphism& second, const Homomorphism& first);
// Extends gens -> imgs to a homomorphism if one exists.
std::optional<Homomorphism> extend_hom(const GroupPtr& dom, const GroupPtr& cod,
                                       const std::vector<int>& gens,
                                       const std::vector<int>& imgs);
std::vector<Homomorphism> all_homomorphisms(const GroupPtr& dom, const GroupPtr& cod,
                                            std::size_t limit = 0);
std::vector<Homomorphism> injective_homomorphisms(const GroupPtr& dom, const GroupPtr& cod);
std::optional<Homomorphism> find_isomorphism(const GroupPtr& G, const GroupPtr& H);
bool isomorphic(const GroupPtr& G, const GroupPtr& H);

// The subgroup S as a group in its own right, elements in sorted order.
struct Materialized {
    GroupPtr group;
    Homomorphism incl;  // group -> S.parent
};
Materialized materialize(const Subgroup& S, const std::string& name = "");

struct Quotient {
    GroupPtr group;
    Homomorphism proj;
    std::vector<int> reps;  // minimal index per coset, indexed by quotient element
};
Quotient quotient(const GroupPtr& G, const Subgroup& N);

struct Product {
    GroupPtr group;
    Homomorphism in1, in2;    // canonical embeddings
    Homomorphism pr1, pr2;    // for semidirect, pr1 is not a homomorphism and is left empty
};
Product direct_product(const GroupPtr& G, const GroupPtr& H, const std::string& name = "");

// act[h] is the automorphism of target named by actor element h.
struct GroupAction {
    GroupPtr actor, target;
    std::vector<std::vector<int>> act;
    void verify() const;
};
// elements (b,h) at index b*|H|+h, (b1,h1)(b2,h2) = (b1 h1(b2), h1 h2)
Product semidirect_product(const GroupPtr& B, const GroupPtr& H, const GroupAction& action,
                           const std::string& name = "");

std::optional<Homomorphism> is_retract(const GroupPtr& G, const Subgroup& H,
                                       const Caps& caps = {});

std::vector<std::vector<int>> automorphisms(const GroupPtr& G, const Caps& caps = {});
struct AutGroup {
    GroupPtr group;
    std::vector<std::vector<int>> perms;  // perms[a] is the automorphism with index a
    GroupAction action;
};
AutGroup automorphism_group(const GroupPtr& G, const Caps& caps = {});
// group generated by the given automorphisms (permutation maps of G)
AutGroup automorphism_subgroup(const GroupPtr& G, const std::vector<std::vector<int>>& gens,
                               const Caps& caps = {});

// Closes a set of permutations of 0..n-1 under composition; identity first.
std::vector<std::vector<int>> permutation_closure(int n, const std::vector<std::vector<int>>& gens,
                                                  std::size_t cap);
GroupPtr permutation_group(const std::vector<std::vector<int>>& elems, const std::string& name);

bool is_prime(long long p);

}  // namespace residuap
