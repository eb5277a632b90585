#include <doctest.h>

#include <functional>
#include <numeric>
#include <random>

#include "residuap/catalog.hpp"
#include "residuap/graphgroups.hpp"

using namespace residuap;

namespace {

GroupPtr C(const std::string& n) { return catalog_group(n); }

std::vector<int> iota_n(int n) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

GraphOfGroups free_c2c2() { return make_gog({C("C2"), C("C2")}, {{0, 1, trivial_group(), {0}, {0}}}); }
GraphOfGroups c4_amalgam() { return make_gog({C("C4"), C("C4")}, {{0, 1, C("C2"), {0, 2}, {0, 2}}}); }
GraphOfGroups c4_hnn() { return make_gog({C("C4")}, {{0, 0, C("C2"), {0, 2}, {0, 2}}}); }
GraphOfGroups triangle() {
    return make_gog({C("D8"), C("C4"), C("C2^2")},
                    {{0, 1, C("C2"), {0, 2}, {0, 2}}, {1, 2, C("C2"), {0, 1}, {0, 2}}, {2, 0, C("C2"), {0, 4}, {0, 2}}});
}
// first axis of F_3^2 onto the second
GraphOfGroups axis_loop() { return make_gog({C("C3^2")}, {{0, 0, C("C3"), {0, 1, 2}, {0, 3, 6}}}); }
// (u, v) -> (v, u) on all of F_3^2
GraphOfGroups swap_loop() {
    std::vector<int> sw(9);
    for (int x = 0; x < 9; ++x) sw[x] = x / 3 + 3 * (x % 3);
    return make_gog({C("C3^2")}, {{0, 0, C("C3^2"), iota_n(9), sw}});
}
// (x, y, 0) -> (y, 0, x) on F_3^3, the restriction of the cyclic shift
GraphOfGroups shift_loop() {
    std::vector<int> to_t(9), to_o(9);
    for (int x = 0; x < 9; ++x) {
        to_t[x] = x;
        to_o[x] = x / 3 + 9 * (x % 3);
    }
    return make_gog({C("C3^3")}, {{0, 0, C("C3^2"), to_t, to_o}});
}

std::vector<GraphOfGroups> test_graphs() { return {free_c2c2(), c4_amalgam(), c4_hnn(), triangle(), swap_loop()}; }

// connected components by union-find
int components(const Graph& Y) {
    std::vector<int> par = iota_n(Y.nv);
    std::function<int(int)> find = [&](int x) { return par[x] == x ? x : par[x] = find(par[x]); };
    for (int e = 0; e < Y.ne(); ++e) par[find(Y.orig[e])] = find(Y.term[e]);
    int c = 0;
    for (int v = 0; v < Y.nv; ++v) c += find(v) == v;
    return c;
}

int betti_oracle(const Graph& Y) { return Y.ne() / 2 - Y.nv + components(Y); }

Graph random_graph(std::mt19937_64& rng, int nv, int extra) {
    std::vector<std::pair<int, int>> edges;
    for (int v = 1; v < nv; ++v) edges.push_back({static_cast<int>(rng() % v), v});
    for (int i = 0; i < extra; ++i) edges.push_back({static_cast<int>(rng() % nv), static_cast<int>(rng() % nv)});
    return make_graph(nv, edges);
}

std::vector<std::vector<Subgroup>> compatible_normal_collections(const GraphOfGroups& G) {
    std::vector<std::vector<Subgroup>> all{{}};
    for (const auto& V : G.vgroups) {
        std::vector<std::vector<Subgroup>> next;
        for (const auto& c : all)
            for (const auto& N : normal_subgroups(V)) {
                auto d = c;
                d.push_back(N);
                next.push_back(d);
            }
        all = next;
    }
    std::vector<std::vector<Subgroup>> out;
    for (const auto& c : all)
        if (compatible(G, c)) out.push_back(c);
    return out;
}

bool same_gog(const GraphOfGroups& A, const GraphOfGroups& B) {
    if (!(A.graph == B.graph)) return false;
    for (int v = 0; v < A.graph.nv; ++v)
        if (A.vgroups[v]->table() != B.vgroups[v]->table()) return false;
    for (int e = 0; e < A.graph.ne(); ++e)
        if (A.egroups[e]->table() != B.egroups[e]->table() || A.emaps[e].map != B.emaps[e].map) return false;
    return true;
}

}  // namespace

TEST_CASE("maximal subtrees of small graphs") {
    auto cyc = make_graph(3, {{0, 1}, {1, 2}, {2, 0}});
    auto T = maximal_subtree(cyc);
    int n = 0;
    for (int e = 0; e < cyc.ne(); ++e) n += T.in[e] && e < cyc.bar[e];
    CHECK(n == 2);
    CHECK(T.in[0]);
    CHECK(T.in[4]);  // 0 - 2 through the third edge, found before 1 - 2
    CHECK(positive_nontree_edges(cyc, T) == std::vector<int>{2});

    auto loop = make_graph(1, {{0, 0}});
    auto TL = maximal_subtree(loop);
    CHECK(std::count(TL.in.begin(), TL.in.end(), 1) == 0);
    auto wedge = make_graph(1, {{0, 0}, {0, 0}});
    auto TW = maximal_subtree(wedge);
    CHECK(std::count(TW.in.begin(), TW.in.end(), 1) == 0);
    CHECK(positive_nontree_edges(wedge, TW) == std::vector<int>{0, 2});

    CHECK_THROWS_AS(maximal_subtree(make_graph(3, {{0, 1}})), Error);
}

TEST_CASE("normal forms in C2 * C2") {
    PathGroup PG(free_c2c2());
    auto a = PG.vertex_element(0, 1), b = PG.vertex_element(1, 1);
    CHECK(PG.is_identity(PG.multiply(a, a)));
    auto ab = PG.normal_form(PG.multiply(a, b));
    CHECK_FALSE(PG.is_identity(ab));
    CHECK(ab.edges.size() == 2);
    CHECK(PG.is_reduced(ab));
}

TEST_CASE("the commutator of the two generators of C4 *_C2 C4 is nontrivial") {
    PathGroup PG(c4_amalgam());
    auto a = PG.vertex_element(0, 1), b = PG.vertex_element(1, 1);
    auto w = PG.multiply(PG.multiply(a, b), PG.multiply(PG.inverse(a), PG.inverse(b)));
    auto n = PG.normal_form(w);
    CHECK_FALSE(PG.is_identity(w));
    CHECK(n.edges.size() == 4);
    CHECK(PG.is_reduced(n));
    CHECK(PG.is_identity(PG.multiply(w, PG.inverse(w))));
    // a^2 = b^2
    CHECK(PG.equal(PG.multiply(a, a), PG.multiply(b, b)));
}

TEST_CASE("normal form is a congruence on five graphs") {
    int g = 0;
    for (auto& gog : test_graphs()) {
        auto gp = share(gog);
        PathGroup PG(gp, maximal_subtree(gp->graph));
        std::uint64_t state = 1000 + g++;
        for (int i = 0; i < 1000; ++i) {
            auto w = PG.random_closed(0, 1 + i % 9, state);
            REQUIRE(PG.is_identity(PG.multiply(w, PG.inverse(w))));
            REQUIRE(PG.is_identity(PG.multiply(PG.inverse(w), w)));
        }
        for (int i = 0; i < 1000; ++i) {
            auto u = PG.random_closed(0, 1 + i % 7, state);
            auto v = PG.random_closed(0, 1 + (i * 3) % 7, state);
            auto lhs = PG.normal_form(PG.multiply(u, v));
            auto rhs = PG.normal_form(PG.multiply(PG.normal_form(u), PG.normal_form(v)));
            REQUIRE(lhs == rhs);
            REQUIRE(PG.normal_form(lhs) == lhs);
        }
    }
}

TEST_CASE("nonempty reduced paths are nontrivial") {
    int g = 0;
    for (auto& gog : test_graphs()) {
        auto gp = share(gog);
        PathGroup PG(gp, maximal_subtree(gp->graph));
        std::uint64_t state = 77 + g++;
        int reduced = 0;
        for (int i = 0; i < 400; ++i) {
            auto w = PG.random_closed(0, 2 + i % 6, state);
            auto n = PG.normal_form(w);
            if (!n.edges.empty() || n.elems[0] != 0) CHECK(PG.is_reduced(n));
            if (PG.is_reduced(w)) {
                ++reduced;
                CHECK_FALSE(PG.is_identity(w));
            }
        }
        CHECK(reduced > 0);
    }
}

TEST_CASE("equality classes do not depend on the base point") {
    for (auto gog : {c4_amalgam(), triangle()}) {
        auto gp = share(gog);
        PathGroup P0(gp, maximal_subtree(gp->graph, 0));
        PathGroup P1(gp, maximal_subtree(gp->graph, 1));
        auto gamma = P0.tree_path(1);  // from 0 to 1
        auto move = [&](const PathWord& w) { return P0.multiply(P0.multiply(P0.inverse(gamma), w), gamma); };
        std::uint64_t state = 5;
        for (int i = 0; i < 200; ++i) {
            auto u = P0.random_closed(0, 3, state);
            PathWord v;
            if (i % 2) {
                auto r = P0.random_closed(0, 2, state);
                v = P0.multiply(P0.multiply(u, r), P0.inverse(r));
            } else {
                v = P0.random_closed(0, 3, state);
            }
            CHECK(P0.equal(u, v) == P1.equal(move(u), move(v)));
        }
    }
}

TEST_CASE("quotients of graphs of groups") {
    auto gp = share(c4_amalgam());
    auto whole = quotient_gog(gp, {whole_group(gp->vgroups[0]), whole_group(gp->vgroups[1])});
    for (const auto& V : whole.gog->vgroups) CHECK(V->order() == 1);
    for (const auto& E : whole.gog->egroups) CHECK(E->order() == 1);

    std::vector<Subgroup> lev2;
    for (const auto& V : gp->vgroups) lev2.push_back(lower_central_p_series(V, 2).term(2));
    REQUIRE(compatible(*gp, lev2));
    auto q = quotient_gog(gp, lev2);
    for (const auto& V : q.gog->vgroups) CHECK(V->order() == 2);
    // C2 / (C2 n gamma_2(C4)) = 1
    CHECK(q.gog->egroups[0]->order() == 1);
    q.proj.verify();

    auto triv = quotient_gog(gp, {trivial_subgroup(gp->vgroups[0]), trivial_subgroup(gp->vgroups[1])});
    CHECK(triv.gog->graph == gp->graph);
    for (int v = 0; v < 2; ++v) CHECK(isomorphic(triv.gog->vgroups[v], gp->vgroups[v]));
    CHECK(triv.gog->egroups[0]->order() == 2);

    auto bad = std::vector<Subgroup>{trivial_subgroup(gp->vgroups[0]), lev2[1]};
    CHECK_FALSE(compatible(*gp, bad));
    CHECK_THROWS_AS(quotient_gog(gp, bad), Error);
}

TEST_CASE("common covers") {
    auto gp = share(c4_amalgam());
    std::vector<Subgroup> H{lower_central_p_series(gp->vgroups[0], 2).term(2),
                            lower_central_p_series(gp->vgroups[1], 2).term(2)};
    auto cc = common_cover(gp, H);
    // [G_v : H_v] / [G_e : H_e] = 2 / 1 at each end
    CHECK(cc.ports[0] == 2);
    CHECK(cc.ports[1] == 2);
    CHECK(cc.degree == 2);
    CHECK(cc.p_power_degree);
    cc.cover.verify();
    for (const auto& V : cc.gog->vgroups) CHECK(V->order() == 2);
    CHECK(cc.gog->graph.connected());

    auto hp = share(c4_hnn());
    auto id = common_cover(hp, {whole_group(hp->vgroups[0])});
    CHECK(id.degree == 1);
    CHECK(id.gog->graph == hp->graph);

    auto tp = share(make_gog({trivial_group(), trivial_group()}, {{0, 1, trivial_group(), {0}, {0}}}));
    auto t = common_cover(tp, {whole_group(tp->vgroups[0]), whole_group(tp->vgroups[1])});
    CHECK(t.degree == 1);
}

TEST_CASE("colimits of abelian graphs of groups") {
    auto V = C("C2^2");
    auto tree = make_gog({V, V}, {{0, 1, C("C2"), {0, 1}, {0, 2}}});
    auto s = colimit_sigma(tree);
    CHECK(s.group->order() == 8);
    CHECK(isomorphic(s.group, C("C2^3")));
    for (auto& i : s.iota) CHECK(i.is_injective());

    auto A = C("C4");
    auto loop = make_gog({A}, {{0, 0, trivial_group(), {0}, {0}}});
    CHECK(isomorphic(colimit_sigma(loop).group, A));

    auto path3 = make_gog({A, A, A}, {{0, 1, C("C2"), {0, 2}, {0, 2}}, {1, 2, C("C2"), {0, 2}, {0, 2}}});
    auto s3 = colimit_sigma(path3);
    // a tree: |sum| / prod |G_e|
    CHECK(s3.group->order() == 64 / 4);
    for (auto& i : s3.iota) CHECK(i.is_injective());

    CHECK_THROWS_AS(colimit_sigma(triangle()), Error);
}

TEST_CASE("universal property of the colimit on seeded families") {
    std::vector<GraphOfGroups> gogs{
        make_gog({C("C2^2"), C("C2^2")}, {{0, 1, C("C2"), {0, 1}, {0, 2}}}),
        make_gog({C("C4"), C("C4"), C("C4")}, {{0, 1, C("C2"), {0, 2}, {0, 2}}, {1, 2, C("C2"), {0, 2}, {0, 2}}}),
        make_gog({C("C4"), C("C2")}, {{0, 1, C("C2"), {0, 1}, {0, 2}}}),
        c4_hnn(),
    };
    std::vector<GroupPtr> targets{C("C2"), C("C4"), C("C2^2"), C("C4xC2")};
    std::mt19937_64 rng(2024);
    for (int inst = 0; inst < 20; ++inst) {
        const auto& G = gogs[inst % gogs.size()];
        auto B = targets[rng() % targets.size()];
        const auto& Y = G.graph;
        std::vector<Homomorphism> fam;
        for (int attempt = 0; attempt < 200; ++attempt) {
            fam.clear();
            for (const auto& Vg : G.vgroups) {
                auto homs = all_homomorphisms(Vg, B);
                fam.push_back(homs[rng() % homs.size()]);
            }
            bool ok = true;
            for (int e = 0; e < Y.ne() && ok; ++e)
                for (int c = 0; c < G.egroups[e]->order(); ++c)
                    ok &= fam[Y.term[e]](G.emaps[e](c)) == fam[Y.orig[e]](G.emaps[Y.bar[e]](c));
            if (ok) break;
            fam.clear();
        }
        if (fam.empty())
            for (const auto& Vg : G.vgroups) fam.push_back({Vg, B, std::vector<int>(Vg->order(), 0)});
        auto s = colimit_sigma(G);
        int factoring = 0;
        for (const auto& h : all_homomorphisms(s.group, B)) {
            bool ok = true;
            for (int v = 0; v < Y.nv; ++v)
                for (int g = 0; g < G.vgroups[v]->order(); ++g) ok &= h(s.iota[v](g)) == fam[v](g);
            factoring += ok;
        }
        CHECK(factoring == 1);
    }
}

TEST_CASE("partial abelianizations") {
    auto G = shift_loop();
    auto pa = partial_abelianization(G, maximal_subtree(G.graph));
    CHECK(pa.sigma.group->order() == 27);
    REQUIRE(pa.pas.items.size() == 1);
    CHECK(pa.pas.items[0].A.size() == 9);
    const auto& io = pa.sigma.iota[0];
    CHECK(pa.pas.items[0](io(1)) == io(9));
    CHECK(pa.pas.items[0](io(3)) == io(1));

    auto V = C("C3^2");
    auto tree = make_gog({V, V}, {{0, 1, C("C3"), {0, 1, 2}, {0, 3, 6}}});
    auto pt = partial_abelianization(tree, maximal_subtree(tree.graph));
    CHECK(pt.pas.items.empty());
    CHECK(pt.sigma.group->order() == 27);

    auto S = swap_loop();
    auto ps = partial_abelianization(S, maximal_subtree(S.graph));
    REQUIRE(ps.pas.items.size() == 1);
    CHECK(ps.pas.items[0].A.size() == 9);
    const auto& is = ps.sigma.iota[0];
    CHECK(ps.pas.items[0](is(1)) == is(3));
    CHECK(ps.pas.items[0](is(3)) == is(1));
}

TEST_CASE("certification of residual p-ness") {
    for (const char* name : {"C2", "C4", "C2^2", "D8"}) {
        auto P = C(name);
        auto G = make_gog({P, P}, {{0, 1, trivial_group(), {0}, {0}}});
        auto r = certify_residually_p(G, 2);
        REQUIRE(r.outcome == Outcome::Yes);
        CHECK(r.certificate->P->order() == P->order() * P->order());
        CHECK(r.certificate->verify(G, maximal_subtree(G.graph), 2));
    }
    auto c3 = make_gog({C("C3"), C("C3")}, {{0, 1, trivial_group(), {0}, {0}}});
    auto r3 = certify_residually_p(c3, 3);
    REQUIRE(r3.outcome == Outcome::Yes);
    CHECK(isomorphic(r3.certificate->P, C("C3^2")));

    auto am = c4_amalgam();
    auto r = certify_residually_p(am, 2);
    REQUIRE(r.outcome == Outcome::Yes);
    CHECK(r.certificate->P->order() == 8);
    CHECK(isomorphic(r.certificate->P, C("C4xC2")));
    CHECK(r.certificate->verify(am, maximal_subtree(am.graph), 2));
    // the relation a^2 = b^2 holds under psi
    const auto& cert = *r.certificate;
    CHECK(cert.P->pow(cert.psi_v[0](1), 2) == cert.P->pow(cert.psi_v[1](1), 2));

    auto sw = certify_residually_p(swap_loop(), 3);
    CHECK(sw.outcome == Outcome::No);
    CHECK_FALSE(sw.certificate.has_value());

    auto sh = shift_loop();
    auto rs = certify_residually_p(sh, 3);
    REQUIRE(rs.outcome == Outcome::Yes);
    CHECK(rs.certificate->P->is_p_group(3));
    CHECK(rs.certificate->verify(sh, maximal_subtree(sh.graph), 3));

    auto hnn = c4_hnn();
    auto rh = certify_residually_p(hnn, 2);
    REQUIRE(rh.outcome == Outcome::Yes);
    CHECK(rh.certificate->verify(hnn, maximal_subtree(hnn.graph), 2));

    auto tri = triangle();
    auto rt = certify_residually_p(tri, 2);
    CHECK(rt.outcome != Outcome::No);
    if (rt.certificate) CHECK(rt.certificate->verify(tri, maximal_subtree(tri.graph), 2));

    CHECK_THROWS_AS(certify_residually_p(c3, 2), Error);
}

TEST_CASE("certificates evaluate consistently with normal forms") {
    auto gp = share(c4_amalgam());
    PathGroup PG(gp, maximal_subtree(gp->graph));
    auto r = certify_residually_p(*gp, 2);
    REQUIRE(r.certificate);
    std::uint64_t state = 9;
    for (int i = 0; i < 300; ++i) {
        auto w = PG.random_closed(0, 5, state);
        CHECK(r.certificate->evaluate(*gp, w) == r.certificate->evaluate(*gp, PG.normal_form(w)));
    }
}

TEST_CASE("reduction along filtrations") {
    auto V = C("C2^2");
    auto tree = make_gog({V, V}, {{0, 1, C("C2"), {0, 1}, {0, 2}}});
    GogFiltration F1{{make_filtration(V, {whole_group(V), trivial_subgroup(V)}),
                      make_filtration(V, {whole_group(V), trivial_subgroup(V)})}};
    REQUIRE(F1.compatible(tree));
    auto r1 = reduction_certify(tree, &F1, 2);
    REQUIRE(r1.outcome == Outcome::Yes);
    CHECK(r1.certificate->verify(tree, maximal_subtree(tree.graph), 2));

    auto am = c4_amalgam();
    auto C4 = am.vgroups[0];
    auto chain = lower_central_p_series(C4, 2);
    GogFiltration F2{{chain, chain}};
    REQUIRE(F2.compatible(am));
    REQUIRE(F2.central_p(2));
    auto r2 = reduction_certify(am, &F2, 2);
    REQUIRE(r2.outcome == Outcome::Yes);
    CHECK(r2.certificate->P->order() <= (1 << 20));
    CHECK(r2.certificate->verify(am, maximal_subtree(am.graph), 2));

    auto sh = shift_loop();
    auto W = sh.vgroups[0];
    auto r3 = reduction_certify(sh, nullptr, 3);
    REQUIRE(r3.outcome == Outcome::Yes);
    CHECK(r3.certificate->P->order() == 81);

    GogFiltration bad{{make_filtration(C4, {whole_group(C4), trivial_subgroup(C4)}), chain}};
    CHECK_THROWS_AS(reduction_certify(am, &bad, 2), Error);
}

TEST_CASE("unfolding a loop gives an s-cycle") {
    auto Y = make_graph(1, {{0, 0}});
    auto T = maximal_subtree(Y);
    for (int s : {2, 3, 5}) {
        auto A = cyclic(s);
        auto U = unfold_graph(Y, T, A, {1, A->inv(1)});
        CHECK(U.graph.nv == s);
        CHECK(U.graph.ne() == 2 * s);
        CHECK(components(U.graph) == 1);
        CHECK(betti_oracle(U.graph) == 1);
        std::vector<int> deg(s, 0);
        for (int e = 0; e < U.graph.ne(); ++e) ++deg[U.graph.orig[e]];
        for (int d : deg) CHECK(d == 2);
        for (int e = 0; e < U.graph.ne(); ++e) {
            CHECK(U.graph.bar[U.graph.bar[e]] == e);
            CHECK(U.graph.orig[e] == U.graph.term[U.graph.bar[e]]);
        }
    }
    CHECK_THROWS_AS(unfold_graph(Y, T, cyclic(4), {2, 2}), Error);

    auto tree = make_graph(3, {{0, 1}, {1, 2}});
    auto Ut = unfold_graph(tree, maximal_subtree(tree), trivial_group(), {0, 0, 0, 0});
    CHECK(Ut.graph == tree);

    auto wedge = make_graph(1, {{0, 0}, {0, 0}});
    auto Uw = unfold_graph(wedge, maximal_subtree(wedge), cyclic(2), {1, 1, 0, 0});
    CHECK(Uw.graph.nv == 2);
    CHECK(Uw.graph.ne() / 2 == 4);
    CHECK(betti_oracle(Uw.graph) == 3);
}

TEST_CASE("rank identity for unfoldings on seeded graphs") {
    std::mt19937_64 rng(31337);
    std::vector<GroupPtr> As{cyclic(2), cyclic(3), cyclic(4), C("C2^2"), C("D8"), C("S3")};
    int done = 0;
    while (done < 20) {
        auto Y = random_graph(rng, 1 + static_cast<int>(rng() % 4), 1 + static_cast<int>(rng() % 3));
        auto T = maximal_subtree(Y);
        auto A = As[rng() % As.size()];
        std::vector<int> psi(Y.ne(), 0);
        for (int e : positive_nontree_edges(Y, T)) {
            psi[e] = static_cast<int>(rng() % A->order());
            psi[Y.bar[e]] = A->inv(psi[e]);
        }
        if (subgroup_generated(A, psi).size() != A->order()) {
            CHECK_THROWS_AS(unfold_graph(Y, T, A, psi), Error);
            continue;
        }
        auto U = unfold_graph(Y, T, A, psi);
        CHECK(components(U.graph) == 1);
        CHECK(betti_oracle(U.graph) == 1 + A->order() * (betti_oracle(Y) - 1));
        ++done;
    }
}

TEST_CASE("unfolding commutes with quotients") {
    std::mt19937_64 rng(99);
    std::vector<GraphOfGroups> bases{c4_hnn(), triangle(), make_gog({C("C2^2")}, {{0, 0, C("C2"), {0, 1}, {0, 2}}})};
    for (int inst = 0; inst < 10; ++inst) {
        auto gp = share(bases[inst % bases.size()]);
        const auto& Y = gp->graph;
        auto T = maximal_subtree(Y);
        int s = 2 + static_cast<int>(rng() % 3);
        auto A = cyclic(s);
        std::vector<int> psi(Y.ne(), 0);
        for (int e : positive_nontree_edges(Y, T)) {
            psi[e] = 1;
            psi[Y.bar[e]] = A->inv(1);
        }
        auto cols = compatible_normal_collections(*gp);
        REQUIRE(!cols.empty());
        const auto& H = cols[rng() % cols.size()];

        auto un = unfold_gog(gp, T, A, psi);
        std::vector<Subgroup> Ht;
        for (int x = 0; x < un.gog->graph.nv; ++x) {
            Subgroup S = H[un.unfolding.vproj[x]];
            S.parent = un.gog->vgroups[x];
            Ht.push_back(S);
        }
        auto left = quotient_gog(un.gog, Ht);
        auto q = quotient_gog(gp, H);
        auto right = unfold_gog(q.gog, maximal_subtree(q.gog->graph), A, psi);
        CHECK(same_gog(*left.gog, *right.gog));
    }
}

TEST_CASE("unfolded graphs of groups and lifts") {
    auto gp = share(c4_hnn());
    auto T = maximal_subtree(gp->graph);
    auto A = cyclic(3);
    auto un = unfold_gog(gp, T, A, {1, 2});
    un.phi.verify();
    CHECK(un.gog->graph.nv == 3);
    PathGroup PG(gp, T);
    PathGroup PU(un.gog, maximal_subtree(un.gog->graph));
    std::uint64_t state = 3;
    int lifted = 0;
    for (int i = 0; i < 300; ++i) {
        auto w = PG.random_closed(0, 1 + i % 6, state);
        auto l = un.lift(w);
        CHECK(l.has_value() == (un.psi_of(w) == 0));
        if (!l) continue;
        ++lifted;
        CHECK(PG.normal_form(un.phi.apply(*l)) == PG.normal_form(w));
        // injectivity on the sample
        CHECK(PU.is_identity(*l) == PG.is_identity(w));
    }
    CHECK(lifted > 0);

    auto triv = unfold_gog(gp, T, trivial_group(), {0, 0});
    CHECK(same_gog(*triv.gog, *gp));
}

TEST_CASE("sigma witnesses") {
    auto sw = share(axis_loop());
    auto W = sigma_witness(sw);
    CHECK(W.A.group->order() == 2);
    CHECK(W.unfolded.gog->graph.nv == 2);
    CHECK(W.unfolded.gog->graph.ne() == 4);
    CHECK(W.mu.verify(*W.unfolded.gog, maximal_subtree(W.unfolded.gog->graph), 3));
    for (const auto& h : W.mu.psi_v) CHECK(h.is_injective());
    // sigma is the swap of the two axes
    const auto& io = W.pa.sigma.iota[0];
    CHECK(W.sigma[0][io(1)] == io(3));
    CHECK(W.sigma[0][io(3)] == io(1));
    CHECK(sigma_witness(share(swap_loop())).A.group->order() == 2);

    auto sh = share(shift_loop());
    auto Ws = sigma_witness(sh);
    CHECK(Ws.A.group->order() == 3);
    CHECK(Ws.unfolded.gog->graph.nv == 3);
    CHECK(Ws.mu.verify(*Ws.unfolded.gog, maximal_subtree(Ws.unfolded.gog->graph), 3));

    auto V = C("C3^2");
    auto tree = share(make_gog({V, V}, {{0, 1, C("C3"), {0, 1, 2}, {0, 3, 6}}}));
    auto Wt = sigma_witness(tree);
    CHECK(Wt.A.group->order() == 1);
    for (int v = 0; v < 2; ++v) CHECK(Wt.mu.psi_v[v].map == Wt.pa.sigma.iota[v].map);

    CHECK_THROWS_AS(sigma_witness(share(c4_hnn())), Error);
}

TEST_CASE("separating properties survive pullback along unfoldings") {
    auto check_loop = [](const GogPtr& gp, int p) {
        auto W = sigma_witness(gp);
        const auto& V = gp->vgroups[0];
        std::vector<GogFiltration> cands;
        for (const auto& c : chief_filtrations(V)) cands.push_back({{c}});
        cands.push_back({{make_filtration(V, {whole_group(V), trivial_subgroup(V)})}});
        int tested = 0;
        for (const auto& F : cands) {
            if (!F.compatible(*gp)) continue;
            ++tested;
            auto Fp = pullback(F, W.unfolded.phi);
            const auto& U = *W.unfolded.gog;
            CHECK(Fp.compatible(U));
            if (F.separating()) CHECK(Fp.separating());
            if (F.separates_edges(*gp)) CHECK(Fp.separates_edges(U));
            if (F.uniformly_p_potent_on_edges(*gp, p, 4)) CHECK(Fp.uniformly_p_potent_on_edges(U, p, 4));
            if (F.gamma_p_on_edges(*gp, p, 0)) CHECK(Fp.gamma_p_on_edges(U, p, 0));
        }
        CHECK(tested > 0);
    };
    check_loop(share(axis_loop()), 3);
    check_loop(share(swap_loop()), 3);
    check_loop(share(shift_loop()), 3);
}

TEST_CASE("first homology against the fiber sum") {
    auto V = C("C3^2");
    auto tree = make_gog({V, V}, {{0, 1, C("C3"), {0, 1, 2}, {0, 3, 6}}});
    auto h = homology_fiber_sum_check(tree, maximal_subtree(tree.graph));
    CHECK(h.hypothesis);
    CHECK(h.h1.torsion == std::vector<long long>{3, 3, 3});
    CHECK(h.h1.free_rank == 0);
    CHECK(h.matches);

    auto loop = make_gog({C("C3")}, {{0, 0, C("C3"), {0, 1, 2}, {0, 1, 2}}});
    auto hl = homology_fiber_sum_check(loop, maximal_subtree(loop.graph));
    CHECK(hl.hypothesis);
    CHECK(hl.h1.torsion == std::vector<long long>{3});
    CHECK(hl.h1.free_rank == 1);
    CHECK(hl.matches);

    auto am = c4_amalgam();
    auto ha = homology_fiber_sum_check(am, maximal_subtree(am.graph));
    CHECK(ha.h1.torsion == std::vector<long long>{2, 4});
    CHECK(ha.h1.free_rank == 0);
    CHECK(ha.matches);

    // the swap loop: hypothesis fails, and H_1 is the quotient by the swap
    auto sw = swap_loop();
    auto hs = homology_fiber_sum_check(sw, maximal_subtree(sw.graph));
    CHECK_FALSE(hs.hypothesis);
    CHECK(hs.h1.torsion == std::vector<long long>{3});
    CHECK(hs.h1.free_rank == 1);
}

TEST_CASE("separating levels") {
    auto gp = share(c4_amalgam());
    PathGroup PG(gp, maximal_subtree(gp->graph));
    auto chain = lower_central_p_series(gp->vgroups[0], 2);
    GogFiltration F{{chain, chain}};
    // e a e^-1 at vertex 0, a a generator of the second C4
    PathWord w{0, {0, 1}, {0, 1, 0}};
    REQUIRE(PG.is_reduced(w));
    auto s = separating_level(PG, F, w);
    REQUIRE(s.level);
    CHECK(*s.level == 2);

    auto fp = share(make_gog({C("C3"), C("C3")}, {{0, 1, trivial_group(), {0}, {0}}}));
    PathGroup PF(fp, maximal_subtree(fp->graph));
    auto c3 = make_filtration(fp->vgroups[0], {whole_group(fp->vgroups[0]), trivial_subgroup(fp->vgroups[0])});
    GogFiltration Fc{{c3, c3}};
    PathWord u{0, {0, 1, 0, 1}, {1, 2, 1, 1, 0}};
    REQUIRE(PF.is_reduced(u));
    auto su = separating_level(PF, Fc, u);
    REQUIRE(su.level);
    CHECK(*su.level == 2);
    auto sv = separating_level(PF, Fc, PathWord{0, {}, {1}});
    REQUIRE(sv.level);
    CHECK(*sv.level == 2);

    auto C4 = gp->vgroups[0];
    auto flat = make_filtration(C4, {whole_group(C4), whole_group(C4)});
    GogFiltration Fbad{{flat, flat}};
    auto sb = separating_level(PG, Fbad, w);
    CHECK_FALSE(sb.level);
    CHECK(sb.failure.find("(B)") != std::string::npos);

    PathWord notred{0, {0, 1}, {0, 2, 0}};
    CHECK_THROWS_AS(separating_level(PG, F, notred), Error);
}
