#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "oracle.hpp"
#include "residuap/abelian.hpp"
#include "residuap/catalog.hpp"
#include "residuap/embed.hpp"
#include "residuap/io.hpp"
#include "residuap/serialize.hpp"

using namespace residuap;

namespace {

Homomorphism hom(const GroupPtr& U, const GroupPtr& G, std::vector<int> map) { return {U, G, std::move(map)}; }

Filtration chain(const GroupPtr& G, const std::vector<std::vector<int>>& gens) {
    std::vector<Subgroup> t;
    for (const auto& g : gens) t.push_back(subgroup_generated(G, g));
    return make_filtration(G, t);
}

// brute-force check of the strong embedding equalities
bool strong_oracle(const Amalgam& am, const GroupPtr& W, const Homomorphism& a, const Homomorphism& b) {
    for (auto [A, h] : {std::pair{am.G, &a}, std::pair{am.H, &b}}) {
        std::set<int> img;
        for (int x = 0; x < A->order(); ++x) {
            img.insert((*h)(x));
            for (int y = 0; y < A->order(); ++y)
                if ((*h)(A->mul(x, y)) != W->mul((*h)(x), (*h)(y))) return false;
        }
        if (static_cast<int>(img.size()) != A->order()) return false;
    }
    std::set<int> ia, ib, iu;
    for (int g = 0; g < am.G->order(); ++g) ia.insert(a(g));
    for (int h = 0; h < am.H->order(); ++h) ib.insert(b(h));
    for (int u = 0; u < am.U->order(); ++u) {
        if (a(am.uG(u)) != b(am.uH(u))) return false;
        iu.insert(a(am.uG(u)));
    }
    std::set<int> both;
    for (int x : ia)
        if (ib.count(x)) both.insert(x);
    return both == iu;
}

// layers through explicit quotient maps W -> W / W_{i+1}
bool layers_oracle(const Amalgam& am, const HigmanResult& r) {
    const auto& W = r.embedding.W;
    int n = std::max({r.W_filtration.size(), r.G_star.size(), r.H_star.size()});
    for (int i = 1; i <= n; ++i) {
        auto Q = quotient(W, r.W_filtration.term(i + 1));
        std::set<int> a, b, u;
        for (int g : r.G_star.term(i).elems) a.insert(Q.proj(r.embedding.alpha(g)));
        for (int h : r.H_star.term(i).elems) b.insert(Q.proj(r.embedding.beta(h)));
        for (int x = 0; x < am.U->order(); ++x)
            if (r.G_star.term(i).contains(am.uG(x))) u.insert(Q.proj(r.embedding.alpha(am.uG(x))));
        std::set<int> both;
        for (int x : a)
            if (b.count(x)) both.insert(x);
        if (both != u) return false;
    }
    return true;
}

bool central_p_oracle(const Filtration& F, int p) {
    const FiniteGroup& W = *F.group;
    for (int i = 1; i <= F.size(); ++i) {
        const auto &N = F.term(i), &M = F.term(i + 1);
        for (int x : N.elems) {
            if (!M.contains(W.pow(x, p))) return false;
            for (int g = 0; g < W.order(); ++g)
                if (!M.contains(W.comm(g, x))) return false;
        }
    }
    return true;
}

void check_higman(const Amalgam& am, const HigmanResult& r) {
    REQUIRE_FALSE(r.implicit);
    CHECK(r.a1);
    CHECK(r.a2);
    CHECK(r.strong);
    CHECK(r.central_p);
    CHECK(strong_oracle(am, r.embedding.W, r.embedding.alpha, r.embedding.beta));
    CHECK(layers_oracle(am, r));
    CHECK(r.embedding.W->is_p_group(am.G->order() > 1 ? am.G->prime() : am.H->prime()));
    CHECK(r.W_filtration.length() >= 0);
    // W meets G and H in the stretched filtrations
    CHECK(same_terms(r.G_star, stretch(r.G_aligned, r.iota)));
    CHECK(same_terms(r.H_star, stretch(r.H_aligned, r.iota)));
    for (int i = 1; i <= r.W_filtration.size(); ++i)
        for (int g = 0; g < am.G->order(); ++g)
            CHECK(r.W_filtration.term(i).contains(r.embedding.alpha(g)) == r.G_star.term(i).contains(g));
    if (r.embedding.W->order() <= 1024) CHECK(central_p_oracle(r.W_filtration, r.embedding.W->prime()));
}

// the defining conditions on a whole filtration, from scratch
bool criterion_oracle(const std::vector<std::vector<int>>& F, const FiniteGroup& G,
                      const std::vector<PartialAutomorphism>& items) {
    for (std::size_t k = 0; k + 1 < F.size(); ++k) {
        std::set<int> Gk(F[k].begin(), F[k].end()), Gn(F[k + 1].begin(), F[k + 1].end());
        for (const auto& it : items) {
            std::set<int> img, rng;
            for (int a : it.A.elems)
                if (Gk.count(a)) {
                    img.insert(it.map[a]);
                    if (!Gn.count(G.mul(it.map[a], G.inv(a)))) return false;
                }
            for (int b : it.B.elems)
                if (Gk.count(b)) rng.insert(b);
            if (img != rng) return false;
        }
    }
    return true;
}

// all maximal chains of normal subgroups, by brute force
void chief_chains(const FiniteGroup& G, const std::vector<std::vector<int>>& normals, int p,
                  std::vector<std::vector<int>>& cur, std::vector<std::vector<std::vector<int>>>& out) {
    const auto top = cur.back();
    if (top.size() == 1) {
        out.push_back(cur);
        return;
    }
    for (const auto& N : normals) {
        if (N.size() * p != top.size() || !std::includes(top.begin(), top.end(), N.begin(), N.end())) continue;
        cur.push_back(N);
        chief_chains(G, normals, p, cur, out);
        cur.pop_back();
    }
}

bool criterion_exists_oracle(const PartialAutomorphismSet& pas) {
    const auto& G = *pas.group;
    int p = G.order() > 1 ? G.prime() : 2;
    auto normals = oracle::normal_subgroups(G);
    std::vector<int> all(G.order());
    for (int i = 0; i < G.order(); ++i) all[i] = i;
    std::vector<std::vector<int>> cur{all};
    std::vector<std::vector<std::vector<int>>> chains;
    chief_chains(G, normals, p, cur, chains);
    for (const auto& c : chains)
        if (criterion_oracle(c, G, pas.items)) return true;
    return false;
}

PartialAutomorphism random_partial(const GroupPtr& V, std::mt19937& rng) {
    auto subs = all_subgroups(V);
    const auto& A = subs[rng() % subs.size()];
    auto Am = materialize(A);
    auto homs = injective_homomorphisms(Am.group, V);
    const auto& h = homs[rng() % homs.size()];
    std::vector<int> gens, imgs;
    for (int i = 0; i < A.size(); ++i) {
        gens.push_back(A.elems[i]);
        imgs.push_back(h(i));
    }
    return partial_automorphism(V, gens, imgs);
}

// x + p y + p^2 z coordinates in elementary_abelian(p, r)
std::vector<int> linear_perm(int p, int r, const std::vector<std::vector<int>>& rows) {
    int n = 1;
    for (int i = 0; i < r; ++i) n *= p;
    std::vector<int> perm(n);
    for (int x = 0; x < n; ++x) {
        std::vector<int> v(r), w(r, 0);
        for (int i = 0, y = x; i < r; ++i, y /= p) v[i] = y % p;
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) w[j] = (w[j] + v[i] * rows[i][j]) % p;
        int z = 0;
        for (int i = r - 1; i >= 0; --i) z = z * p + w[i];
        perm[x] = z;
    }
    return perm;
}

}  // namespace

TEST_CASE("fiber sum of two cyclic groups of order four over the squares") {
    auto C4 = catalog_group("C4"), C2 = catalog_group("C2");
    auto fs = fiber_sum(C4, C4, hom(C2, C4, {0, 2}), hom(C2, C4, {0, 2}));
    CHECK(fs.group->order() == 8);
    CHECK(isomorphic(fs.group, catalog_group("C4xC2")));
    CHECK(fs.inA(2) == fs.inB(2));
    CHECK(fs.inA.is_injective());
    CHECK(fs.inB.is_injective());
}

TEST_CASE("fiber sum of planes over a line is three dimensional") {
    for (int p : {2, 3}) {
        auto V = elementary_abelian(p, 2), L = elementary_abelian(p, 1);
        std::vector<int> e1(p);
        for (int i = 0; i < p; ++i) e1[i] = i;  // first coordinate
        auto fs = fiber_sum(V, V, hom(L, V, e1), hom(L, V, e1));
        CHECK(invariants(fs.group).torsion == std::vector<long long>(3, p));
    }
}

TEST_CASE("fiber sum over the trivial group is the direct sum") {
    auto A = catalog_group("C4"), B = catalog_group("C2^2"), T = trivial_group();
    auto fs = fiber_sum(A, B, hom(T, A, {0}), hom(T, B, {0}));
    CHECK(fs.group->order() == 16);
    CHECK(invariants(fs.group) == invariants(direct_product(A, B).group));
    CHECK_THROWS_AS(fiber_sum(catalog_group("D8"), B, hom(T, catalog_group("D8"), {0}), hom(T, B, {0})), Error);
}

TEST_CASE("Higman embedding of two cyclic groups of order four along C2") {
    auto C4 = catalog_group("C4"), C2 = catalog_group("C2");
    Amalgam am{C4, C4, C2, hom(C2, C4, {0, 2}), hom(C2, C4, {0, 2})};
    auto F = chain(C4, {{1}, {2}, {}});
    auto r = higman_embed(am, F, F);
    CHECK(r.embedding.W->order() == 64);
    CHECK(r.full_wreath);
    CHECK(isomorphic(r.embedding.W, wreath(C2, catalog_group("C2^2")).group));
    check_higman(am, r);
}

TEST_CASE("Higman embedding base case is a fiber sum") {
    auto V = catalog_group("C2^2"), L = catalog_group("C2");
    Amalgam am{V, V, L, hom(L, V, {0, 1}), hom(L, V, {0, 1})};
    auto F = chain(V, {{1, 2}, {}});
    auto r = higman_embed(am, F, F);
    CHECK(r.embedding.W->order() == 8);
    CHECK(invariants(r.embedding.W).torsion == std::vector<long long>{2, 2, 2});
    check_higman(am, r);
}

TEST_CASE("Higman embedding of identical groups is the identity") {
    auto D8 = catalog_group("D8");
    Amalgam am{D8, D8, D8, identity_hom(D8), identity_hom(D8)};
    auto F = lower_central_p_series(D8, 2);
    auto r = higman_embed(am, F, F);
    CHECK(r.embedding.W->order() == 8);
    for (int g = 0; g < 8; ++g) CHECK(r.embedding.alpha(g) == r.embedding.beta(g));
    check_higman(am, r);
}

TEST_CASE("Higman embedding rejects unsuitable filtrations") {
    auto C4 = catalog_group("C4"), C2 = catalog_group("C2"), D8 = catalog_group("D8");
    Amalgam am{C4, C4, C2, hom(C2, C4, {0, 2}), hom(C2, C4, {0, 2})};
    auto F = chain(C4, {{1}, {}});  // C4 / 1 is not elementary abelian
    CHECK_THROWS_AS(higman_embed(am, F, F), Error);
    // U central in one factor and outside the commutator subgroup in the other
    Amalgam bad{D8, D8, catalog_group("C2^2"), hom(catalog_group("C2^2"), D8, {0, 2, 4, 6}),
                hom(catalog_group("C2^2"), D8, {0, 4, 2, 6})};
    auto FD = lower_central_p_series(D8, 2);
    CHECK_THROWS_AS(higman_embed(bad, FD, FD), Error);
}

TEST_CASE("Higman embeddings of small amalgams of 2-groups") {
    auto scan = amalgam_scan(false);
    int count = 0;
    for (const auto& e : scan) {
        auto am = amalgam_of(e);
        if (am.G->order() > 8 || am.H->order() > 8) continue;
        auto w = amalgam_embeddable(am);
        REQUIRE(w.has_value() == e.embeddable);
        if (!w) continue;
        CAPTURE(e.G);
        CAPTURE(e.H);
        CAPTURE(e.U);
        auto r = higman_embed(am, w->first, w->second);
        check_higman(am, r);
        ++count;
    }
    CHECK(count >= 10);
}

TEST_CASE("implicit wreath products verify structurally") {
    auto scan = amalgam_scan(true);
    bool seen = false;
    for (const auto& e : scan) {
        if (e.G != "C8" || e.H != "D16") continue;
        auto am = amalgam_of(e);
        auto w = amalgam_embeddable(am);
        auto r = higman_embed(am, w->first, w->second);
        if (!r.implicit) continue;
        seen = true;
        const auto& P = r.implicit->filtration->product();
        // brute-force the strong equalities on wreath elements
        for (int x = 0; x < am.G->order(); ++x)
            for (int y = 0; y < am.G->order(); ++y)
                CHECK(P.mul(r.implicit->alpha[x], r.implicit->alpha[y]) == r.implicit->alpha[am.G->mul(x, y)]);
        int meet = 0;
        for (const auto& a : r.implicit->alpha)
            for (const auto& b : r.implicit->beta) meet += a == b;
        CHECK(meet == am.U->order());
        CHECK(r.a1);
        CHECK(r.a2);
        CHECK(r.strong);
        CHECK(r.central_p);
        CHECK(same_terms(r.G_star, stretch(r.G_aligned, r.iota)));
        auto v = verify_certificate(strong_embedding_to_json(am, r, &w->first, &w->second));
        CHECK(v.ok);
        CHECK_FALSE(verify_certificate(strong_embedding_to_json(am, r)).ok);
        break;
    }
    CHECK(seen);
}

TEST_CASE("amalgam embeddability examples") {
    auto C4 = catalog_group("C4"), V = catalog_group("C2^2"), C2 = catalog_group("C2");
    Amalgam am{C4, V, C2, hom(C2, C4, {0, 2}), hom(C2, V, {0, 1})};
    auto w = amalgam_embeddable(am);
    REQUIRE(w.has_value());
    CHECK(same_terms(w->first, chain(C4, {{1}, {2}, {}})));
    CHECK(same_terms(w->second, chain(V, {{1, 2}, {1}, {}})));
    auto D8 = catalog_group("D8");
    Amalgam same{D8, D8, D8, identity_hom(D8), identity_hom(D8)};
    CHECK(amalgam_embeddable(same).has_value());
}

TEST_CASE("first negative amalgam of the scan matches the golden file") {
    auto scan = amalgam_scan(true);
    REQUIRE_FALSE(scan.empty());
    const auto& e = scan.back();
    CHECK_FALSE(e.embeddable);
    for (std::size_t i = 0; i + 1 < scan.size(); ++i) CHECK(scan[i].embeddable);
    auto g = read_json_file(RESIDUAP_TEST_DATA "/golden/first_negative_amalgam.json");
    CHECK(g["index"].get<std::size_t>() + 1 == scan.size());
    CHECK(g["G"].get<std::string>() == e.G);
    CHECK(g["H"].get<std::string>() == e.H);
    CHECK(g["U"].get<std::string>() == e.U);
    CHECK(g["uG"].get<std::vector<int>>() == e.uG);
    CHECK(g["uH"].get<std::vector<int>>() == e.uH);
    CHECK_FALSE(g["embeddable"].get<bool>());

    // no pair of chief chains induces the same chain on U: brute force
    auto am = amalgam_of(e);
    auto chains_of = [](const GroupPtr& G) {
        auto normals = oracle::normal_subgroups(*G);
        std::vector<int> all(G->order());
        for (int i = 0; i < G->order(); ++i) all[i] = i;
        std::vector<std::vector<int>> cur{all};
        std::vector<std::vector<std::vector<int>>> out;
        chief_chains(*G, normals, 2, cur, out);
        return out;
    };
    auto induced = [&](const std::vector<std::vector<int>>& c, const Homomorphism& u) {
        std::set<std::vector<int>> s;
        for (const auto& t : c) {
            std::vector<int> pre;
            for (int x = 0; x < am.U->order(); ++x)
                if (std::binary_search(t.begin(), t.end(), u(x))) pre.push_back(x);
            s.insert(pre);
        }
        return s;
    };
    std::set<std::set<std::vector<int>>> fromG;
    for (const auto& c : chains_of(am.G)) fromG.insert(induced(c, am.uG));
    for (const auto& c : chains_of(am.H)) CHECK_FALSE(fromG.count(induced(c, am.uH)));
}

TEST_CASE("shift example on F_3^3 extends to an inner automorphism") {
    auto V = catalog_group("C3^3");
    // A = <e1, e2>, e1 -> e3, e2 -> e1
    PartialAutomorphismSet pas{V, {partial_automorphism(V, {1, 3}, {9, 1})}};
    auto cert = unipotent_flag_extend(pas);
    REQUIRE(cert.has_value());
    CHECK(cert->verify(pas));
    auto r = inner_extension(pas);
    CHECK(r.outcome == Outcome::Yes);
    CHECK(exit_code(r.outcome) == 0);
    CHECK(r.Hp->order() == 81);
    CHECK(r.verify(pas));
    const auto& P = *r.Hp;
    for (int a : pas.items[0].A.elems) {
        int t = r.conjugators[0];
        CHECK(P.mul(P.mul(t, r.embedding(a)), P.inv(t)) == r.embedding(pas.items[0].map[a]));
    }
}

TEST_CASE("swap on F_3^2 admits no extension") {
    auto V = catalog_group("C3^2");
    PartialAutomorphismSet pas{V, {total_automorphism(V, linear_perm(3, 2, {{0, 1}, {1, 0}}))}};
    CHECK_FALSE(unipotent_flag_extend(pas).has_value());
    auto r = inner_extension(pas);
    CHECK(r.outcome == Outcome::No);
    CHECK(exit_code(r.outcome) == 10);
    CHECK_FALSE(criterion_exists_oracle(pas));
}

TEST_CASE("pair of elementary transvections admits no extension") {
    for (int p : {2, 3, 5}) {
        auto V = elementary_abelian(p, 2);
        PartialAutomorphismSet pas{V,
                                   {total_automorphism(V, linear_perm(p, 2, {{1, 1}, {0, 1}})),
                                    total_automorphism(V, linear_perm(p, 2, {{1, 0}, {1, 1}}))}};
        CHECK_FALSE(unipotent_flag_extend(pas).has_value());
        CHECK(inner_extension(pas).outcome == Outcome::No);
    }
}

TEST_CASE("identity partial automorphisms are inner in G itself") {
    for (const char* n : {"D8", "Q8", "Heis27", "C4xC2"}) {
        auto G = catalog_group(n);
        auto gens = generators(whole_group(G));
        PartialAutomorphismSet pas{G, {partial_automorphism(G, gens, gens)}};
        auto r = inner_extension(pas);
        CHECK(r.outcome == Outcome::Yes);
        CHECK(r.Hp->order() == G->order());
        CHECK(r.conjugators == std::vector<int>{0});
    }
}

TEST_CASE("criterion search agrees with brute force on elementary abelian groups") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        int p = trial % 2 ? 3 : 2, r = 2 + static_cast<int>(rng() % (p == 2 ? 3 : 2));
        auto V = elementary_abelian(p, r);
        PartialAutomorphismSet pas{V, {}};
        int k = 1 + static_cast<int>(rng() % 2);
        for (int i = 0; i < k; ++i) pas.items.push_back(random_partial(V, rng));
        auto F = chatzidakis_filtration(pas);
        CHECK(F.has_value() == criterion_exists_oracle(pas));
        auto cert = unipotent_flag_extend(pas);
        CHECK(cert.has_value() == F.has_value());
        if (!cert) continue;
        CHECK(cert->verify(pas));
        // unitriangular in the flag basis and restricting to each map
        for (std::size_t i = 0; i < pas.items.size(); ++i) {
            const auto& E = cert->extensions[i];
            for (int a = 0; a < r; ++a)
                for (int b = 0; b <= a; ++b) CHECK(E[a][b] == (a == b ? 1 : 0));
        }
        auto res = inner_extension(pas);
        CHECK(res.outcome == Outcome::Yes);
        CHECK(res.Hp->is_p_group(p));
    }
}

TEST_CASE("certificates transport along injective maps") {
    std::mt19937 rng(5);
    int transported = 0;
    for (int trial = 0; trial < 40; ++trial) {
        int p = trial % 2 ? 3 : 2;
        int r = 2, r2 = 2 + static_cast<int>(rng() % 2);
        auto V = elementary_abelian(p, r), V2 = elementary_abelian(p, r2);
        PartialAutomorphismSet src{V, {random_partial(V, rng)}};
        if (!unipotent_flag_extend(src)) continue;
        auto embs = injective_homomorphisms(V, V2);
        const auto& Phi = embs[rng() % embs.size()];
        PartialAutomorphismSet dst{V2, {}};
        for (const auto& it : src.items) {
            std::vector<int> gens, imgs;
            for (int a : it.A.elems) {
                gens.push_back(Phi(a));
                imgs.push_back(Phi(it.map[a]));
            }
            dst.items.push_back(partial_automorphism(V2, gens, imgs));
        }
        auto cert = unipotent_flag_extend(dst);
        CHECK(cert.has_value());
        if (cert) CHECK(cert->verify(dst));
        ++transported;
    }
    CHECK(transported >= 10);
}

TEST_CASE("inner extensions of non-abelian p-groups") {
    std::mt19937 rng(3);
    for (const char* n : {"D8", "Q8", "C4xC2", "Heis27", "C9:C3"}) {
        auto G = catalog_group(n);
        auto autos = automorphisms(G);
        int p = G->prime();
        for (int trial = 0; trial < 6; ++trial) {
            const auto& a = autos[rng() % autos.size()];
            auto subs = all_subgroups(G);
            const auto& A = subs[rng() % subs.size()];
            std::vector<int> imgs;
            for (int x : A.elems) imgs.push_back(a[x]);
            PartialAutomorphismSet pas{G, {partial_automorphism(G, A.elems, imgs)}};
            auto r = inner_extension(pas);
            bool exists = criterion_exists_oracle(pas);
            if (r.outcome == Outcome::No) CHECK_FALSE(exists);
            if (r.outcome == Outcome::Unknown) CHECK(exists);
            if (r.outcome != Outcome::Yes) continue;
            CHECK(r.Hp->is_p_group(p));
            const auto& P = *r.Hp;
            for (int x : A.elems) {
                int t = r.conjugators[0];
                CHECK(P.mul(P.mul(t, r.embedding(x)), P.inv(t)) == r.embedding(a[x]));
            }
        }
    }
}

TEST_CASE("layerwise extension through a line in the plane") {
    auto V = catalog_group("C3^2");
    PartialAutomorphismSet pas{V, {total_automorphism(V, linear_perm(3, 2, {{1, 0}, {1, 1}}))}};
    // e2 -> e1 + e2 fixes the line <e1>
    auto F = chain(V, {{1, 3}, {1}, {}});
    auto r = layerwise_inner_extension(pas, F);
    CHECK(r.failed_layer == 0);
    REQUIRE(r.refined.has_value());
    CHECK(is_chief(*r.refined));
    CHECK(chatzidakis_condition(*r.refined, pas));
    CHECK(r.result.outcome == Outcome::Yes);
    CHECK(r.result.Hp->order() == 27);
    CHECK(r.result.verify(pas));
}

TEST_CASE("layerwise extension of length one is the plain extension") {
    auto V = catalog_group("C3^3");
    PartialAutomorphismSet pas{V, {partial_automorphism(V, {1, 3}, {9, 1})}};
    auto r = layerwise_inner_extension(pas, chain(V, {{1, 3, 9}, {}}));
    CHECK(r.result.outcome == inner_extension(pas).outcome);
    CHECK(r.result.Hp->order() == 81);
}

TEST_CASE("layerwise extension propagates a missing layer certificate") {
    auto V = catalog_group("C3^2");
    PartialAutomorphismSet pas{V, {total_automorphism(V, linear_perm(3, 2, {{0, 1}, {1, 0}}))}};
    auto r = layerwise_inner_extension(pas, chain(V, {{1, 3}, {}}));
    CHECK(r.failed_layer == 1);
    CHECK(r.result.outcome == Outcome::No);
    // a filtration the maps do not preserve is rejected
    PartialAutomorphismSet pas2{V, {total_automorphism(V, linear_perm(3, 2, {{0, 1}, {1, 0}}))}};
    CHECK_THROWS_AS(layerwise_inner_extension(pas2, chain(V, {{1, 3}, {1}, {}})), Error);
}

TEST_CASE("mapping torus examples") {
    auto C3 = catalog_group("C3");
    auto r = mapping_torus_check(C3, 3, {{0, 2, 1}});
    CHECK_FALSE(r.p_group);
    CHECK(r.induced_order == 0);

    auto V = catalog_group("C2^2");
    auto t = mapping_torus_check(V, 2, {linear_perm(2, 2, {{1, 1}, {0, 1}})});
    CHECK(t.p_group);
    CHECK(t.induced_order == 2);

    auto Hz = catalog_group("Heis27");
    std::vector<std::vector<int>> inner;
    for (int g : generators(whole_group(Hz))) {
        std::vector<int> c(27);
        for (int x = 0; x < 27; ++x) c[x] = Hz->conj(x, g);
        inner.push_back(c);
    }
    auto h = mapping_torus_check(Hz, 3, inner);
    CHECK(h.p_group);
    CHECK(h.induced_order == 1);
    CHECK(h.all_layers_p);

    CHECK_THROWS_AS(mapping_torus_check(C3, 3, {{0, 1, 1}}), Error);
}

TEST_CASE("mapping torus check is invariant under conjugation") {
    std::mt19937 rng(9);
    for (const char* n : {"C2^3", "D8", "C4xC2", "C3^2", "Heis27"}) {
        auto G = catalog_group(n);
        auto autos = automorphisms(G);
        int p = G->prime();
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<std::vector<int>> set;
            for (int k = 0; k < 2; ++k) set.push_back(autos[rng() % autos.size()]);
            const auto& c = autos[rng() % autos.size()];
            std::vector<int> ci(c.size());
            for (std::size_t x = 0; x < c.size(); ++x) ci[c[x]] = static_cast<int>(x);
            std::vector<std::vector<int>> conj;
            for (const auto& a : set) {
                std::vector<int> b(a.size());
                for (std::size_t x = 0; x < a.size(); ++x) b[x] = ci[a[c[x]]];
                conj.push_back(b);
            }
            auto r1 = mapping_torus_check(G, p, set), r2 = mapping_torus_check(G, p, conj);
            CHECK(r1.p_group == r2.p_group);
            CHECK(r1.induced_order == r2.induced_order);
            CHECK(r1.layer_orders == r2.layer_orders);
        }
    }
}
