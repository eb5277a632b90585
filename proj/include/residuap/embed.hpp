#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "residuap/algebra.hpp"
#include "residuap/filtration.hpp"
#include "residuap/group.hpp"
#include "residuap/linalg.hpp"

namespace residuap {

// G u H | U, the common subgroup given by embeddings.
struct Amalgam {
    GroupPtr G, H, U;
    Homomorphism uG, uH;
    void verify() const;
};

struct StrongEmbedding {
    GroupPtr W;
    Homomorphism alpha, beta;
    // the three defining equalities, element by element
    bool check(const Amalgam& am) const;
};

struct FiberSum {
    GroupPtr group;
    Homomorphism inA, inB;
};
// (A + B) / {phi(u) - psi(u)}
FiberSum fiber_sum(const GroupPtr& A, const GroupPtr& B, const Homomorphism& phi, const Homomorphism& psi);

// T wr K filtered by W_i = {top in K_i} for i <= m, then W_{m+1+j} = T (x) omega^j in
// the base, m the length of the filtration of K.
class WreathFiltration {
public:
    WreathFiltration(GroupPtr T, Filtration FK, int p);
    const WreathProduct& product() const { return P_; }
    const Filtration& top_filtration() const { return FK_; }
    int p() const { return p_; }
    int length() const { return m_ + d_ + 1; }
    int depth(const WreathProduct::Elem& w) const;  // length() + 1 for the identity
    bool at_least(const WreathProduct::Elem& w, int i) const;
    // commutators and p-th powers of normal generators, term by term
    bool is_central_p() const;

private:
    WreathProduct P_;
    Filtration FK_;
    int p_, m_ = 0, d_ = 0;
    JenningsBasis JB_;
    Layer LT_;
    std::vector<Vec> tc_;
    int top_depth(int k) const;
    WreathProduct::Elem base_at(int k, int t) const;
};

// W left as the implicit wreath product, for towers too large to tabulate
struct WreathEmbedding {
    std::shared_ptr<const WreathFiltration> filtration;
    std::vector<WreathProduct::Elem> alpha, beta;
};

struct HigmanResult {
    StrongEmbedding embedding;
    Filtration W_filtration;
    Filtration G_aligned, H_aligned;  // term by term equal on U
    Filtration G_star, H_star;        // pullbacks of W_filtration
    StretchMap iota;                  // G_star = stretch(G_aligned), H_star = stretch(H_aligned)
    double predicted_log2 = 0;       // log2 |T wr K| at the top level
    bool full_wreath = false;         // W is all of T wr K rather than the subgroup generated
    bool a1 = false, a2 = false, strong = false, central_p = false;
    // set instead of embedding.W and W_filtration when W is not tabulated
    std::optional<WreathEmbedding> implicit;
};

// Strong embedding into a p-group with a central p-filtration, checked post hoc.
HigmanResult higman_embed(const Amalgam& am, const Filtration& FG, const Filtration& FH, const Caps& caps = {});
// (A2) inside L_i(W) for every i
bool layers_meet_in_U(const Amalgam& am, const StrongEmbedding& e, const Filtration& FW, const Filtration& Gs,
                      const Filtration& Hs);

// checks for an implicit W: the strong embedding equalities element by element,
// pulled back filtrations, and (A2) on cosets of the W terms
bool strong_in_wreath(const Amalgam& am, const WreathEmbedding& e);
Filtration pullback(const WreathEmbedding& e, const GroupPtr& A, bool second);
bool layers_meet_in_U(const Amalgam& am, const WreathEmbedding& e, const Filtration& Gs, const Filtration& Hs);

// chief filtrations of G and H inducing equivalent filtrations on U; first G in enumeration order
std::optional<std::pair<Filtration, Filtration>> amalgam_embeddable(const Amalgam& am, const Caps& caps = {});

// Scan over amalgams of 2-groups of order <= 16 along U in {C2, C4, C2^2}.
struct ScanEntry {
    std::string G, H, U;
    std::vector<int> uG, uH;
    bool embeddable = false;
};
// uG ranges over Aut(G)-orbit representatives, uH over Aut(H)-orbit representatives.
// When stop_at_first_negative is set the scan ends at the first negative entry.
std::vector<ScanEntry> amalgam_scan(bool stop_at_first_negative, const Caps& caps = {});
Amalgam amalgam_of(const ScanEntry& e);

struct PartialAutomorphism {
    Subgroup A, B;
    std::vector<int> map;  // map[a] for a in A, -1 elsewhere
    int operator()(int a) const { return map[a]; }
};
// extends gens -> imgs to an isomorphism between the generated subgroups
PartialAutomorphism partial_automorphism(const GroupPtr& G, const std::vector<int>& gens,
                                         const std::vector<int>& imgs);
PartialAutomorphism total_automorphism(const GroupPtr& G, const std::vector<int>& perm);

struct PartialAutomorphismSet {
    GroupPtr group;
    std::vector<PartialAutomorphism> items;
    void verify() const;
};

enum class Outcome { Yes, No, Unknown };
const char* outcome_name(Outcome o);
int exit_code(Outcome o);

// phi(A n G_k) = B n G_k and phi(a) a^-1 in G_{k+1} for a in A n G_k
bool chatzidakis_condition(const Filtration& F, const PartialAutomorphismSet& pas);
// least chief filtration satisfying the condition, DFS over normal subgroups sorted
// by size then elements; exhaustive
std::optional<Filtration> chatzidakis_filtration(const PartialAutomorphismSet& pas, const Caps& caps = {});

struct FlagCertificate {
    int p = 2;
    Mat basis;              // rows, in coordinates of the standard basis of V
    std::vector<Mat> extensions;  // in basis coordinates: row j is the image of basis[j]
    std::vector<Mat> standard;    // the same maps in standard coordinates
    int group_order = 1;    // order of the group they generate
    bool verify(const PartialAutomorphismSet& pas) const;
};

std::optional<FlagCertificate> unipotent_flag_extend(const PartialAutomorphismSet& pas, const Caps& caps = {});
// extensions from a given flag satisfying the condition
FlagCertificate flag_certificate(const PartialAutomorphismSet& pas, const Filtration& flag);

struct InnerExtension {
    Outcome outcome = Outcome::Unknown;
    std::string reason;
    GroupPtr Hp;
    Homomorphism embedding;          // G -> Hp
    std::vector<int> conjugators;    // t_i with t_i a t_i^-1 = phi_i(a)
    std::optional<Filtration> chief; // a filtration satisfying the condition, when found
    std::optional<FlagCertificate> flag;
    bool verify(const PartialAutomorphismSet& pas) const;
};

InnerExtension inner_extension(const PartialAutomorphismSet& pas, const Caps& caps = {});

struct LayerwiseExtension {
    InnerExtension result;
    std::optional<Filtration> refined;  // chief refinement of F satisfying the condition
    int failed_layer = 0;               // first layer without a certificate, 0 if none
};
LayerwiseExtension layerwise_inner_extension(const PartialAutomorphismSet& pas, const Filtration& F,
                                             const Caps& caps = {});

struct MappingTorusReport {
    bool p_group = false;            // induced group on L^p_1 is a p-group
    int induced_order = 1;
    std::vector<Mat> matrices;       // action on L^p_1 (rows are images of basis vectors)
    std::vector<int> layer_orders;   // induced group orders on L^p_n, n = 1..p-length
    bool all_layers_p = false;
};
MappingTorusReport mapping_torus_check(const GroupPtr& G, int p, const std::vector<std::vector<int>>& autos,
                                       const Caps& caps = {});

}  // namespace residuap
