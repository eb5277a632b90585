#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "residuap/algebra.hpp"
#include "residuap/catalog.hpp"
#include "residuap/congruence.hpp"
#include "residuap/embed.hpp"
#include "residuap/filtration.hpp"
#include "residuap/graphgroups.hpp"
#include "residuap/io.hpp"
#include "residuap/serialize.hpp"

using namespace residuap;

namespace {

std::string fail_note, detail;

bool need(bool c, const std::string& what) {
    if (!c && fail_note.empty()) fail_note = what;
    return c;
}

GroupPtr C(const std::string& n) { return catalog_group(n); }

std::vector<int> iota_n(int n) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

std::vector<std::string> p_groups(int cap2, int cap3) {
    std::vector<std::string> v;
    for (const auto& n : catalog_p_group_names()) {
        auto G = C(n);
        int p = G->prime();
        if ((p == 2 && G->order() <= cap2) || (p == 3 && G->order() <= cap3)) v.push_back(n);
    }
    return v;
}

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

GraphOfGroups c4_amalgam() { return make_gog({C("C4"), C("C4")}, {{0, 1, C("C2"), {0, 2}, {0, 2}}}); }
GraphOfGroups c4_hnn() { return make_gog({C("C4")}, {{0, 0, C("C2"), {0, 2}, {0, 2}}}); }
GraphOfGroups triangle() {
    return make_gog({C("D8"), C("C4"), C("C2^2")},
                    {{0, 1, C("C2"), {0, 2}, {0, 2}}, {1, 2, C("C2"), {0, 1}, {0, 2}}, {2, 0, C("C2"), {0, 4}, {0, 2}}});
}
GraphOfGroups swap_loop() {
    std::vector<int> sw(9);
    for (int x = 0; x < 9; ++x) sw[x] = x / 3 + 3 * (x % 3);
    return make_gog({C("C3^2")}, {{0, 0, C("C3^2"), iota_n(9), sw}});
}

int components(const Graph& Y) {
    std::vector<int> par = iota_n(Y.nv);
    std::function<int(int)> find = [&](int x) { return par[x] == x ? x : par[x] = find(par[x]); };
    for (int e = 0; e < Y.ne(); ++e) par[find(Y.orig[e])] = find(Y.term[e]);
    int c = 0;
    for (int v = 0; v < Y.nv; ++v) c += find(v) == v;
    return c;
}

int betti(const Graph& Y) { return Y.ne() / 2 - Y.nv + components(Y); }

bool same_gog(const GraphOfGroups& A, const GraphOfGroups& B) {
    if (!(A.graph == B.graph)) return false;
    for (int v = 0; v < A.graph.nv; ++v)
        if (A.vgroups[v]->table() != B.vgroups[v]->table()) return false;
    for (int e = 0; e < A.graph.ne(); ++e)
        if (A.egroups[e]->table() != B.egroups[e]->table() || A.emaps[e].map != B.emaps[e].map) return false;
    return true;
}

bool higman_ok(const Amalgam& am, const HigmanResult& r) {
    return r.a1 && r.a2 && r.strong && r.central_p && same_terms(r.G_star, stretch(r.G_aligned, r.iota)) &&
           same_terms(r.H_star, stretch(r.H_aligned, r.iota)) &&
           (r.implicit ? strong_in_wreath(am, *r.implicit)
                       : r.embedding.check(am) && r.embedding.W->is_p_group(r.embedding.W->prime()));
}

bool c1() {
    auto names = p_groups(64, 81);
    for (const auto& n : names) {
        auto G = C(n);
        int p = G->prime();
        auto J = jennings_series(G, p);
        if (!need(same_terms(J, dimension_series_recursive(G, p)), n + ": dimension series")) return false;
        if (!need(same_terms(J, dimension_series_lazard(G, p)), n + ": Lazard formula")) return false;
        if (!need(augmentation_ideal_powers(G, p).nilpotency_class == jennings_class_formula(G, p), n + ": class"))
            return false;
    }
    detail = std::to_string(names.size()) + " groups";
    return need(names.size() >= 10, "catalog too small");
}

bool c2() {
    std::vector<std::pair<int, std::string>> cases{{2, "C2"}, {2, "C4"}, {2, "C2^2"}, {3, "C3"}};
    for (const auto& [p, n] : cases) {
        auto H = C(n);
        int nmax = augmentation_ideal_powers(H, p).nilpotency_class + 1;
        auto r = buckley_check(p, H, nmax);
        if (!need(r.holds, "F" + std::to_string(p) + " wr " + n)) return false;
        for (const auto& L : r.levels)
            if (!need(L.equal && L.dim_gamma == L.dim_omega && L.dim_gamma_p == L.dim_omega &&
                          L.dim_dimension == L.dim_omega,
                      n + ": level " + std::to_string(L.n)))
                return false;
    }
    return true;
}

bool c3() {
    for (int p : {2, 3}) {
        auto W = wreath(cyclic(p), cyclic(p));
        if (!need(lower_central_series(W.group).length() == p, "class at p=" + std::to_string(p))) return false;
    }
    return true;
}

bool c4() {
    auto V3 = C("C3^3");
    PartialAutomorphismSet shift{V3, {partial_automorphism(V3, {1, 3}, {9, 1})}};
    auto r = inner_extension(shift);
    if (!need(exit_code(r.outcome) == 0 && r.verify(shift), "shift")) return false;
    if (!need(verify_certificate(inner_extension_to_json(shift, r)).ok, "shift certificate")) return false;

    auto V = C("C3^2");
    PartialAutomorphismSet swap{V, {total_automorphism(V, linear_perm(3, 2, {{0, 1}, {1, 0}}))}};
    if (!need(exit_code(inner_extension(swap).outcome) == 10, "swap")) return false;
    for (int p : {2, 3, 5}) {
        auto W = elementary_abelian(p, 2);
        PartialAutomorphismSet tv{W,
                                  {total_automorphism(W, linear_perm(p, 2, {{1, 1}, {0, 1}})),
                                   total_automorphism(W, linear_perm(p, 2, {{1, 0}, {1, 1}}))}};
        if (!need(exit_code(inner_extension(tv).outcome) == 10, "transvections p=" + std::to_string(p))) return false;
    }
    return true;
}

bool c5() {
    auto C4 = C("C4"), C2 = C("C2");
    Amalgam am{C4, C4, C2, Homomorphism{C2, C4, {0, 2}}, Homomorphism{C2, C4, {0, 2}}};
    auto w = amalgam_embeddable(am);
    if (!need(w.has_value(), "C4 u C4 | C2 embeddable")) return false;
    auto r = higman_embed(am, w->first, w->second);
    if (!need(!r.implicit && r.embedding.W->order() == 64 && higman_ok(am, r), "C4 u C4 | C2")) return false;
    if (!need(verify_certificate(strong_embedding_to_json(am, r)).ok, "C4 u C4 | C2 certificate")) return false;

    int count = 0;
    for (const auto& e : amalgam_scan(false)) {
        auto a = amalgam_of(e);
        if (a.G->order() > 8 || a.H->order() > 8) continue;
        auto f = amalgam_embeddable(a);
        if (!f) continue;
        auto h = higman_embed(a, f->first, f->second);
        if (!need(higman_ok(a, h), e.G + " u " + e.H + " | " + e.U)) return false;
        if (!need(verify_certificate(strong_embedding_to_json(a, h)).ok, e.G + " u " + e.H + " certificate"))
            return false;
        ++count;
    }
    detail = std::to_string(count) + " amalgams";
    return need(count >= 10, "fewer than ten amalgams");
}

bool c6() {
    Caps caps;
    caps.order = 8192;
    auto scan = amalgam_scan(false, caps);
    int negatives = 0;
    for (const auto& e : scan) {
        auto am = amalgam_of(e);
        auto w = amalgam_embeddable(am, caps);
        if (!need(w.has_value() == e.embeddable, e.G + " u " + e.H + ": scan flag")) return false;
        if (w) {
            auto r = higman_embed(am, w->first, w->second, caps);
            if (!need(higman_ok(am, r), e.G + " u " + e.H + " | " + e.U + ": embedding")) return false;
            continue;
        }
        ++negatives;
        // no pair of chief filtrations is accepted
        auto FG = chief_filtrations(am.G), FH = chief_filtrations(am.H);
        for (const auto& a : FG)
            for (const auto& b : FH) {
                bool ok = false;
                try {
                    ok = higman_ok(am, higman_embed(am, a, b, caps));
                } catch (const Error&) {
                }
                if (!need(!ok, e.G + " u " + e.H + ": negative instance embedded")) return false;
            }
    }
    if (!need(negatives >= 1, "no negative instance")) return false;
    detail = std::to_string(scan.size()) + " amalgams, " + std::to_string(negatives) + " negative";

    auto first = amalgam_scan(true, caps);
    const auto& e = first.back();
    auto g = read_json_file(RESIDUAP_GOLDEN "/first_negative_amalgam.json");
    return need(!e.embeddable && g["index"].get<std::size_t>() + 1 == first.size() && g["G"] == e.G &&
                    g["H"] == e.H && g["U"] == e.U && g["uG"].get<std::vector<int>>() == e.uG &&
                    g["uH"].get<std::vector<int>>() == e.uH && !g["embeddable"].get<bool>(),
                "golden file mismatch");
}

bool c7() {
    auto Y = make_graph(1, {{0, 0}});
    auto T = maximal_subtree(Y);
    for (int s : {2, 3, 5}) {
        auto A = cyclic(s);
        auto U = unfold_graph(Y, T, A, {1, A->inv(1)});
        std::vector<int> deg(s, 0);
        for (int e = 0; e < U.graph.ne(); ++e) ++deg[U.graph.orig[e]];
        bool cyc = U.graph.nv == s && U.graph.ne() == 2 * s && components(U.graph) == 1 && betti(U.graph) == 1;
        for (int d : deg) cyc = cyc && d == 2;
        if (!need(cyc, "loop at s=" + std::to_string(s))) return false;
    }

    std::mt19937_64 rng(31337);
    std::vector<GroupPtr> As{cyclic(2), cyclic(3), cyclic(4), C("C2^2"), C("D8"), C("S3")};
    int done = 0;
    while (done < 20) {
        int nv = 1 + static_cast<int>(rng() % 4), extra = 1 + static_cast<int>(rng() % 3);
        std::vector<std::pair<int, int>> edges;
        for (int v = 1; v < nv; ++v) edges.push_back({static_cast<int>(rng() % v), v});
        for (int i = 0; i < extra; ++i) edges.push_back({static_cast<int>(rng() % nv), static_cast<int>(rng() % nv)});
        auto G = make_graph(nv, edges);
        auto TG = maximal_subtree(G);
        auto A = As[rng() % As.size()];
        std::vector<int> psi(G.ne(), 0);
        for (int e : positive_nontree_edges(G, TG)) {
            psi[e] = static_cast<int>(rng() % A->order());
            psi[G.bar[e]] = A->inv(psi[e]);
        }
        if (subgroup_generated(A, psi).size() != A->order()) continue;
        auto U = unfold_graph(G, TG, A, psi);
        if (!need(components(U.graph) == 1 && betti(U.graph) == 1 + A->order() * (betti(G) - 1),
                  "Betti identity, instance " + std::to_string(done)))
            return false;
        ++done;
    }

    std::mt19937_64 r2(99);
    std::vector<GraphOfGroups> bases{c4_hnn(), triangle(), make_gog({C("C2^2")}, {{0, 0, C("C2"), {0, 1}, {0, 2}}})};
    for (int inst = 0; inst < 10; ++inst) {
        auto gp = share(bases[inst % bases.size()]);
        auto TG = maximal_subtree(gp->graph);
        auto A = cyclic(2 + static_cast<int>(r2() % 3));
        std::vector<int> psi(gp->graph.ne(), 0);
        for (int e : positive_nontree_edges(gp->graph, TG)) {
            psi[e] = 1;
            psi[gp->graph.bar[e]] = A->inv(1);
        }
        std::vector<std::vector<Subgroup>> cols{{}};
        for (const auto& V : gp->vgroups) {
            std::vector<std::vector<Subgroup>> next;
            for (const auto& c : cols)
                for (const auto& N : normal_subgroups(V)) {
                    auto d = c;
                    d.push_back(N);
                    if (d.size() < gp->vgroups.size() || compatible(*gp, d)) next.push_back(d);
                }
            cols = next;
        }
        if (!need(!cols.empty(), "no compatible collection")) return false;
        const auto& H = cols[r2() % cols.size()];
        auto un = unfold_gog(gp, TG, A, psi);
        std::vector<Subgroup> Ht;
        for (int x = 0; x < un.gog->graph.nv; ++x) {
            Subgroup S = H[un.unfolding.vproj[x]];
            S.parent = un.gog->vgroups[x];
            Ht.push_back(S);
        }
        auto left = quotient_gog(un.gog, Ht);
        auto q = quotient_gog(gp, H);
        auto right = unfold_gog(q.gog, maximal_subtree(q.gog->graph), A, psi);
        if (!need(same_gog(*left.gog, *right.gog), "unfold and quotient, instance " + std::to_string(inst)))
            return false;
    }
    return true;
}

bool c8() {
    auto am = c4_amalgam();
    auto r = certify_residually_p(am, 2);
    if (!need(r.outcome == Outcome::Yes && r.certificate && r.certificate->P->order() == 8, "C4 *_C2 C4"))
        return false;
    if (!need(verify_certificate(certificate_to_json(am, *r.certificate, 2)).ok, "C4 *_C2 C4 certificate"))
        return false;

    auto names = p_groups(8, 9);
    for (const auto& a : names)
        for (const auto& b : names) {
            auto A = C(a), B = C(b);
            if (A->prime() != B->prime()) continue;
            int p = A->prime();
            auto G = make_gog({A, B}, {{0, 1, trivial_group(), {0}, {0}}});
            auto c = certify_residually_p(G, p);
            if (!need(c.outcome == Outcome::Yes && c.certificate, a + " * " + b)) return false;
            if (!need(isomorphic(c.certificate->P, direct_product(A, B).group), a + " * " + b + ": target"))
                return false;
            if (!need(c.certificate->verify(G, maximal_subtree(G.graph), p) &&
                          verify_certificate(certificate_to_json(G, *c.certificate, p)).ok,
                      a + " * " + b + ": verify"))
                return false;
        }
    return true;
}

bool c9() {
    for (auto [p, k] : std::vector<std::pair<int, int>>{{2, 1}, {2, 2}, {2, 3}, {3, 1}, {3, 2}, {3, 3}}) {
        CongruenceTower T(p, k);
        long long want = 1;
        for (int i = 0; i < 3 * k - 2; ++i) want *= p;
        want *= static_cast<long long>(p) * p - 1;
        if (!need(static_cast<long long>(T.order()) == want, "SL order")) return false;
    }
    auto L = congruence_layer_check(3, 3);
    if (!need(L.layer_orders == std::vector<int>{27, 27} && L.layer_elementary == std::vector<bool>{true, true},
              "layers at (3,3)"))
        return false;
    if (!need(L.commutators_checked && L.commutators_ok, "commutators at (3,3)")) return false;
    for (int k = 3; k <= 4; ++k) {
        auto r = power_map_injectivity(3, k);
        if (!need(static_cast<int>(r.injective.size()) == k - 2 && r.all_injective(), "cube map k=" + std::to_string(k)))
            return false;
    }
    if (!need(power_map_injectivity(3, 2).injective.empty(), "cube map k=2")) return false;
    auto u = unitriangular_order(2, 3, 2, {{0, 1}, {0, 0}});
    return need(u.order == 9 && u.exact, "unitriangular order");
}

MatrixGroupSpec unipotent() {
    MatrixGroupSpec s;
    s.n = 2;
    s.gens = {{{1, 1}, {0, 1}}};
    s.presentation.ngens = 1;
    s.subgroups = {{{1}}};
    return s;
}

bool c10() {
    auto r3 = matrix_p_filtration(unipotent(), 3, 3);
    if (!need(r3.subgroups.size() == 1 && r3.subgroups[0].level_is(1) && r3.level() == 1, "p=3 level 1"))
        return false;
    auto r2 = matrix_p_filtration(unipotent(), 2, 3);
    auto lv = r2.level();
    return need(r2.subgroups.size() == 1 && r2.subgroups[0].level_is(0) && lv == 0,
                "p=2 reports level " + (lv ? std::to_string(*lv) : std::string("none")) + ", expected 0");
}

bool c11() {
    std::vector<GraphOfGroups> graphs{make_gog({C("C2"), C("C2")}, {{0, 1, trivial_group(), {0}, {0}}}), c4_amalgam(),
                                      c4_hnn(), triangle(), swap_loop()};
    int g = 0;
    for (auto& gog : graphs) {
        auto gp = share(gog);
        PathGroup PG(gp, maximal_subtree(gp->graph));
        std::uint64_t state = 1000 + g++;
        for (int i = 0; i < 1000; ++i) {
            auto w = PG.random_closed(0, 1 + i % 9, state);
            if (!need(PG.is_identity(PG.multiply(w, PG.inverse(w))), "w w^-1, graph " + std::to_string(g)))
                return false;
        }
        for (int i = 0; i < 1000; ++i) {
            auto u = PG.random_closed(0, 1 + i % 7, state);
            auto v = PG.random_closed(0, 1 + (i * 3) % 7, state);
            auto lhs = PG.normal_form(PG.multiply(u, v));
            if (!need(lhs == PG.normal_form(PG.multiply(PG.normal_form(u), PG.normal_form(v))),
                      "composition, graph " + std::to_string(g)))
                return false;
        }
    }
    return true;
}

bool c12() {
    int checked = 0;
    for (const auto& n : catalog_names()) {
        auto G = C(n);
        if (G->order() == 1) continue;
        for (int p = 2; p <= G->order(); ++p) {
            if (G->order() % p) continue;
            bool prime = true;
            for (int d = 2; d * d <= p; ++d) prime = prime && p % d;
            if (!prime) continue;
            if (!need(hall_petrescu_holds(G, p, 3), n + " at p=" + std::to_string(p))) return false;
            ++checked;
        }
    }
    detail = std::to_string(checked) + " (group, prime) pairs";
    return true;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        bool (*run)();
    };
    const Criterion all[] = {
        {"Jennings identity and class formula", c1},
        {"Buckley equalities", c2},
        {"wreath class formula", c3},
        {"partial automorphism examples", c4},
        {"Higman embeddings of small 2-group amalgams", c5},
        {"embeddability scan cross-check and golden negative", c6},
        {"unfolding shapes, Betti identity, quotients", c7},
        {"certification and re-verification", c8},
        {"congruence tower", c9},
        {"matrix p-filtration levels", c10},
        {"normal-form congruence", c11},
        {"Hall-Petrescu congruences", c12},
    };
    int failed = 0, i = 0;
    for (const auto& c : all) {
        ++i;
        fail_note.clear();
        detail.clear();
        auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = c.run();
        } catch (const std::exception& e) {
            fail_note = std::string("exception: ") + e.what();
        }
        double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const std::string& note = ok ? detail : fail_note;
        std::printf("%s %2d %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", i, c.name, s, note.empty() ? "" : ": ",
                    note.c_str());
        std::fflush(stdout);
        failed += !ok;
    }
    return failed ? 1 : 0;
}
