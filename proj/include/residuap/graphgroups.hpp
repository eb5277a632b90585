#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "residuap/abelian.hpp"
#include "residuap/congruence.hpp"
#include "residuap/embed.hpp"
#include "residuap/filtration.hpp"
#include "residuap/group.hpp"

namespace residuap {

// Oriented edges come in pairs e, bar(e); topological edge i is the pair 2i, 2i+1.
struct Graph {
    int nv = 0;
    std::vector<int> bar, orig, term;

    int ne() const { return static_cast<int>(bar.size()); }
    bool connected() const;
    int betti() const { return ne() / 2 - nv + 1; }  // of a connected graph
    void verify() const;
    bool operator==(const Graph& o) const {
        return nv == o.nv && bar == o.bar && orig == o.orig && term == o.term;
    }
};
// edge i of the list becomes 2i = (o, t) and 2i+1 = (t, o)
Graph make_graph(int nv, const std::vector<std::pair<int, int>>& edges);

struct Subtree {
    int root = 0;
    std::vector<char> in;                // per oriented edge
    std::vector<int> order;              // vertices in discovery order
    std::vector<int> parent_edge;        // edge from the parent, -1 at the root
    std::vector<std::vector<int>> path;  // tree edges from the root to each vertex
};
// breadth first from root, lowest edge index first
Subtree maximal_subtree(const Graph& Y, int root = 0);
// e < bar(e), e not in the tree
std::vector<int> positive_nontree_edges(const Graph& Y, const Subtree& T);

struct GraphOfGroups {
    Graph graph;
    std::vector<GroupPtr> vgroups;
    std::vector<GroupPtr> egroups;     // egroups[e] is egroups[bar e]
    std::vector<Homomorphism> emaps;   // f_e : G_e -> G_{t(e)}, injective
    void verify() const;
    bool all_abelian() const;
    bool all_p_groups(int p) const;
    bool trivial_edge_groups() const;
    Subgroup edge_image(int e) const { return emaps[e].image(); }
};
using GogPtr = std::shared_ptr<const GraphOfGroups>;

struct EdgeSpec {
    int o = 0, t = 0;
    GroupPtr group;
    std::vector<int> to_t, to_o;  // images of the elements of group in G_t and G_o
};
GraphOfGroups make_gog(std::vector<GroupPtr> vgroups, const std::vector<EdgeSpec>& edges);

// g_0 e_1 g_1 ... e_n g_n with g_i in the group of the i-th vertex visited
struct PathWord {
    int base = 0;
    std::vector<int> edges;
    std::vector<int> elems;  // size edges + 1
    int end(const Graph& Y) const { return edges.empty() ? base : Y.term[edges.back()]; }
    bool closed(const Graph& Y) const { return end(Y) == base; }
    bool operator==(const PathWord& o) const { return base == o.base && edges == o.edges && elems == o.elems; }
};

// Letters of words in pi_1(G, T): an element of a vertex group, or an edge.
struct Letter {
    bool is_edge = false;
    int vertex = 0, elem = 0, edge = 0;
    static Letter vert(int v, int g) { return {false, v, g, 0}; }
    static Letter edg(int e) { return {true, 0, 0, e}; }
};

class PathGroup {
public:
    PathGroup(GogPtr gog, Subtree T);
    PathGroup(const GraphOfGroups& gog, int root = 0);
    const GraphOfGroups& gog() const { return *gog_; }
    const GogPtr& gog_ptr() const { return gog_; }
    const Subtree& tree() const { return T_; }

    void check(const PathWord& w) const;
    PathWord identity(int v) const;
    PathWord multiply(const PathWord& a, const PathWord& b) const;  // a ends where b starts
    PathWord inverse(const PathWord& w) const;
    PathWord normal_form(const PathWord& w) const;
    bool is_reduced(const PathWord& w) const;
    bool is_identity(const PathWord& w) const;
    bool equal(const PathWord& a, const PathWord& b) const { return normal_form(a) == normal_form(b); }

    PathWord tree_path(int v) const;  // from the root to v
    PathWord vertex_element(int v, int g) const;
    PathWord edge_element(int e) const;
    PathWord from_word(const std::vector<Letter>& w) const;
    // a closed path at base of about len edges, seeded
    PathWord random_closed(int base, int len, std::uint64_t& state) const;

    int rep(int e, int g) const { return rep_[e][g]; }  // minimal element of f_e(G_e) g

private:
    GogPtr gog_;
    Subtree T_;
    std::vector<std::vector<int>> rep_, cpart_, finv_;
};

// g_v trivial; phi on an edge is delta_{bar e} phi(e) delta_e^-1
struct GogMorphism {
    GogPtr src, dst;
    std::vector<int> vmap, emap;
    std::vector<Homomorphism> phi_v, phi_e;
    std::vector<int> delta;  // delta[e] in G'_{t(emap e)}
    // phi_t o f_e = ad(delta_e) o f'_{phi e} o phi_e, ad(h)(x) = h x h^-1
    void verify() const;
    PathWord apply(const PathWord& w) const;
};
GogMorphism identity_morphism(const GogPtr& G);

GogPtr share(GraphOfGroups g);

// f_e^-1(H_t(e)) = f_bar(e)^-1(H_o(e)) for every edge
bool compatible(const GraphOfGroups& G, const std::vector<Subgroup>& H);

struct GogQuotient {
    GogPtr gog;
    GogMorphism proj;
};
GogQuotient quotient_gog(const GogPtr& G, const std::vector<Subgroup>& H);

struct CommonCover {
    GogPtr gog;
    GogMorphism cover;
    std::vector<int> ports;      // per oriented edge: [G_t : H_t] / [G_e : H_e]
    std::vector<int> copies;     // vertices of the cover over each vertex
    long long degree = 0;
    bool p_power_degree = false; // every index a power of one prime p, and then so is the degree
};
// finite index normal subgroups; the component of copy 0 over vertex 0
CommonCover common_cover(const GogPtr& G, const std::vector<Subgroup>& H);

struct Colimit {
    GroupPtr group;
    std::vector<Homomorphism> iota;
};
// all edges, or only the edges of T when given
Colimit colimit_sigma(const GraphOfGroups& G, const Subtree* T = nullptr);

struct PartialAbelianization {
    Colimit sigma;                 // Sigma(G | T)
    std::vector<int> edges;        // E+ minus the tree
    PartialAutomorphismSet pas;    // phi_e : iota_t f_e(g) -> iota_o f_bar(e)(g), one per edge
};
PartialAbelianization partial_abelianization(const GraphOfGroups& G, const Subtree& T);

// A homomorphism pi_1(G, T) -> P, tree edges sent to 1.
struct Certificate {
    GroupPtr P;
    std::vector<Homomorphism> psi_v;
    std::vector<int> psi_e;  // per oriented edge
    std::string method;
    // relations e f_e(g) e^-1 = f_bar(e)(g), tree edges trivial, injective on vertex groups, P a p-group
    bool verify(const GraphOfGroups& G, const Subtree& T, int p, std::string* why = nullptr) const;
    int evaluate(const GraphOfGroups& G, const PathWord& w) const;
};

struct CertifyResult {
    Outcome outcome = Outcome::Unknown;
    std::optional<Certificate> certificate;
    std::string method, reason;
};

struct GogFiltration {
    std::vector<Filtration> F;  // per vertex

    int length() const;  // largest length, -1 if some filtration never reaches 1
    std::vector<Subgroup> level(int n) const;
    bool compatible(const GraphOfGroups& G) const;  // at every level
    bool central_p(int p) const;
    bool complete() const;
    bool separating() const;
    bool separates_edges(const GraphOfGroups& G) const;
    Filtration edge_filtration(const GraphOfGroups& G, int e) const;
    bool uniformly_p_potent_on_edges(const GraphOfGroups& G, int p, int horizon) const;
    // edge filtration n-th term = gamma^p_{n+ell}(G_e), for n up to the length
    bool gamma_p_on_edges(const GraphOfGroups& G, int p, int ell) const;
};
GogFiltration pullback(const GogFiltration& F, const GogMorphism& phi);

CertifyResult certify_residually_p(const GraphOfGroups& G, int p, const Caps& caps = {});
CertifyResult reduction_certify(const GraphOfGroups& G, const GogFiltration* F, int p, const Caps& caps = {});

struct Unfolding {
    Graph graph;
    GroupPtr A;
    std::vector<int> psi;           // per edge of the base graph
    std::vector<int> vproj, eproj;  // to the base graph
    int base_vertices = 0, base_edges = 0;
    int vertex(int alpha, int v) const { return alpha * base_vertices + v; }
    int edge(int alpha, int e) const { return alpha * base_edges + e; }
};
// psi(bar e) = psi(e)^-1, psi = 1 on T, psi(E) generating A
Unfolding unfold_graph(const Graph& Y, const Subtree& T, const GroupPtr& A, const std::vector<int>& psi);

struct UnfoldedGog {
    Unfolding unfolding;
    GogPtr gog;
    GogMorphism phi;  // to the base
    // lift of a path at v from the copy (1, v); nullopt if the lift does not close up
    std::optional<PathWord> lift(const PathWord& w) const;
    int psi_of(const PathWord& w) const;  // psi(e_n) ... psi(e_1)
};
UnfoldedGog unfold_gog(const GogPtr& G, const Subtree& T, const GroupPtr& A, const std::vector<int>& psi);

struct SigmaWitness {
    PartialAbelianization pa;
    AutGroup A;
    std::vector<std::vector<int>> sigma;  // per edge of E+, as permutations of Sigma
    std::vector<int> psi;                 // per edge, in A
    UnfoldedGog unfolded;
    Certificate mu;                       // on the unfolded gog into Sigma
};
SigmaWitness sigma_witness(const GogPtr& G, const Caps& caps = {});

struct HomologyReport {
    bool hypothesis = false;       // iota_t f_e = iota_o f_bar(e) on the non-tree edges
    AbelianInvariants h1;          // from the presentation
    AbelianInvariants expected;    // Sigma(G | T) + Z^e
    AbelianInvariants full;        // Sigma(G) + Z^e
    bool matches = false;          // h1 == expected
    Presentation presentation;
};
HomologyReport homology_fiber_sum_check(const GraphOfGroups& G, const Subtree& T);

struct SeparatingLevel {
    std::optional<int> level;      // least n with the image of w in G / F_n reduced
    std::vector<int> positions;    // backtrack positions checked
    std::vector<int> per_position; // least level for each, -1 if none
    std::string failure;           // failing condition when no level exists
};
SeparatingLevel separating_level(const PathGroup& PG, const GogFiltration& F, const PathWord& w);

}  // namespace residuap
