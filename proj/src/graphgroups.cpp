#include "residuap/graphgroups.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace residuap {

// -- graphs ------------------------------------------------------------------------

bool Graph::connected() const {
    if (nv == 0) return false;
    std::vector<char> seen(nv, 0);
    std::vector<std::vector<int>> adj(nv);
    for (int e = 0; e < ne(); ++e) adj[orig[e]].push_back(term[e]);
    std::vector<int> st{0};
    seen[0] = 1;
    int count = 1;
    while (!st.empty()) {
        int u = st.back();
        st.pop_back();
        for (int w : adj[u])
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                st.push_back(w);
            }
    }
    return count == nv;
}

void Graph::verify() const {
    if (nv < 1) throw Error("graph: no vertices");
    if (orig.size() != bar.size() || term.size() != bar.size()) throw Error("graph: incidence arrays differ in length");
    for (int e = 0; e < ne(); ++e) {
        if (bar[e] < 0 || bar[e] >= ne()) throw Error("graph: bar out of range");
        if (bar[e] == e) throw Error("graph: edge " + std::to_string(e) + " is its own reverse");
        if (bar[bar[e]] != e) throw Error("graph: bar is not an involution");
        if (orig[e] < 0 || orig[e] >= nv || term[e] < 0 || term[e] >= nv) throw Error("graph: vertex out of range");
        if (orig[e] != term[bar[e]]) throw Error("graph: o(e) differs from t(bar e)");
    }
    if (!connected()) throw Error("graph: not connected");
}

Graph make_graph(int nv, const std::vector<std::pair<int, int>>& edges) {
    Graph Y;
    Y.nv = nv;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [o, t] = edges[i];
        int e = static_cast<int>(2 * i);
        Y.bar.push_back(e + 1);
        Y.bar.push_back(e);
        Y.orig.push_back(o);
        Y.term.push_back(t);
        Y.orig.push_back(t);
        Y.term.push_back(o);
    }
    return Y;
}

Subtree maximal_subtree(const Graph& Y, int root) {
    if (root < 0 || root >= Y.nv) throw Error("maximal subtree: root out of range");
    if (!Y.connected()) throw Error("maximal subtree: graph is not connected");
    Subtree T;
    T.root = root;
    T.in.assign(Y.ne(), 0);
    T.parent_edge.assign(Y.nv, -1);
    T.path.assign(Y.nv, {});
    std::vector<char> seen(Y.nv, 0);
    std::deque<int> q{root};
    seen[root] = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        T.order.push_back(u);
        for (int e = 0; e < Y.ne(); ++e) {
            if (Y.orig[e] != u || seen[Y.term[e]]) continue;
            int w = Y.term[e];
            seen[w] = 1;
            T.in[e] = T.in[Y.bar[e]] = 1;
            T.parent_edge[w] = e;
            T.path[w] = T.path[u];
            T.path[w].push_back(e);
            q.push_back(w);
        }
    }
    return T;
}

std::vector<int> positive_nontree_edges(const Graph& Y, const Subtree& T) {
    std::vector<int> out;
    for (int e = 0; e < Y.ne(); ++e)
        if (e < Y.bar[e] && !T.in[e]) out.push_back(e);
    return out;
}

// -- graphs of groups --------------------------------------------------------------

void GraphOfGroups::verify() const {
    graph.verify();
    const int E = graph.ne();
    if (static_cast<int>(vgroups.size()) != graph.nv) throw Error("graph of groups: wrong number of vertex groups");
    if (static_cast<int>(egroups.size()) != E || static_cast<int>(emaps.size()) != E)
        throw Error("graph of groups: wrong number of edge groups or maps");
    for (int e = 0; e < E; ++e) {
        std::string w = "graph of groups: edge " + std::to_string(e) + ": ";
        if (!egroups[e] || egroups[e]->table() != egroups[graph.bar[e]]->table())
            throw Error(w + "edge group differs from that of the reverse edge");
        const auto& f = emaps[e];
        if (f.dom->table() != egroups[e]->table() || f.cod->table() != vgroups[graph.term[e]]->table())
            throw Error(w + "edge map has the wrong domain or codomain");
        if (static_cast<int>(f.map.size()) != f.dom->order()) throw Error(w + "edge map has the wrong length");
        if (!f.is_homomorphism()) throw Error(w + "edge map is not a homomorphism");
        if (!f.is_injective()) throw Error(w + "edge map is not injective");
    }
}

bool GraphOfGroups::all_abelian() const {
    for (const auto& G : vgroups)
        if (!G->is_abelian()) return false;
    return true;
}

bool GraphOfGroups::all_p_groups(int p) const {
    for (const auto& G : vgroups)
        if (!G->is_p_group(p)) return false;
    return true;
}

bool GraphOfGroups::trivial_edge_groups() const {
    for (const auto& G : egroups)
        if (G->order() != 1) return false;
    return true;
}

GraphOfGroups make_gog(std::vector<GroupPtr> vgroups, const std::vector<EdgeSpec>& edges) {
    GraphOfGroups G;
    std::vector<std::pair<int, int>> ot;
    for (const auto& s : edges) ot.emplace_back(s.o, s.t);
    G.graph = make_graph(static_cast<int>(vgroups.size()), ot);
    G.vgroups = std::move(vgroups);
    for (const auto& s : edges) {
        if (s.o < 0 || s.o >= G.graph.nv || s.t < 0 || s.t >= G.graph.nv)
            throw Error("graph of groups: edge endpoint out of range");
        G.egroups.push_back(s.group);
        G.egroups.push_back(s.group);
        G.emaps.push_back({s.group, G.vgroups[s.t], s.to_t});
        G.emaps.push_back({s.group, G.vgroups[s.o], s.to_o});
    }
    G.verify();
    return G;
}

GogPtr share(GraphOfGroups g) { return std::make_shared<const GraphOfGroups>(std::move(g)); }

// -- path group ---------------------------------------------------------------------

PathGroup::PathGroup(GogPtr gog, Subtree T) : gog_(std::move(gog)), T_(std::move(T)) {
    const auto& G = *gog_;
    const int E = G.graph.ne();
    rep_.resize(E);
    cpart_.resize(E);
    finv_.resize(E);
    for (int e = 0; e < E; ++e) {
        const auto& Gt = *G.vgroups[G.graph.term[e]];
        const auto& f = G.emaps[e];
        finv_[e].assign(Gt.order(), -1);
        for (int c = 0; c < f.dom->order(); ++c) finv_[e][f(c)] = c;
        rep_[e].assign(Gt.order(), -1);
        cpart_[e].assign(Gt.order(), -1);
        for (int g = 0; g < Gt.order(); ++g) {
            if (rep_[e][g] != -1) continue;
            // right coset f_e(G_e) g, minimal element as its representative
            int best = Gt.order();
            for (int c = 0; c < f.dom->order(); ++c) best = std::min(best, Gt.mul(f(c), g));
            for (int c = 0; c < f.dom->order(); ++c) rep_[e][Gt.mul(f(c), g)] = best;
        }
        for (int g = 0; g < Gt.order(); ++g) cpart_[e][g] = finv_[e][Gt.mul(g, Gt.inv(rep_[e][g]))];
    }
}

PathGroup::PathGroup(const GraphOfGroups& gog, int root)
    : PathGroup(share(gog), maximal_subtree(gog.graph, root)) {}

void PathGroup::check(const PathWord& w) const {
    const auto& G = *gog_;
    const auto& Y = G.graph;
    if (w.base < 0 || w.base >= Y.nv) throw Error("path: base out of range");
    if (w.elems.size() != w.edges.size() + 1) throw Error("path: need one more element than edges");
    int v = w.base;
    for (std::size_t i = 0; i <= w.edges.size(); ++i) {
        if (w.elems[i] < 0 || w.elems[i] >= G.vgroups[v]->order())
            throw Error("path: element " + std::to_string(i) + " out of range");
        if (i == w.edges.size()) break;
        int e = w.edges[i];
        if (e < 0 || e >= Y.ne()) throw Error("path: edge out of range");
        if (Y.orig[e] != v) throw Error("path: edge " + std::to_string(e) + " does not start where the path is");
        v = Y.term[e];
    }
}

PathWord PathGroup::identity(int v) const { return {v, {}, {0}}; }

PathWord PathGroup::multiply(const PathWord& a, const PathWord& b) const {
    const auto& Y = gog_->graph;
    int v = a.end(Y);
    if (v != b.base) throw Error("path product: paths do not meet");
    PathWord r = a;
    r.elems.back() = gog_->vgroups[v]->mul(a.elems.back(), b.elems.front());
    r.edges.insert(r.edges.end(), b.edges.begin(), b.edges.end());
    r.elems.insert(r.elems.end(), b.elems.begin() + 1, b.elems.end());
    return r;
}

PathWord PathGroup::inverse(const PathWord& w) const {
    const auto& Y = gog_->graph;
    PathWord r;
    r.base = w.end(Y);
    for (auto it = w.edges.rbegin(); it != w.edges.rend(); ++it) r.edges.push_back(Y.bar[*it]);
    std::vector<int> verts{w.base};
    for (int e : w.edges) verts.push_back(Y.term[e]);
    for (int i = static_cast<int>(w.elems.size()) - 1; i >= 0; --i)
        r.elems.push_back(gog_->vgroups[verts[i]]->inv(w.elems[i]));
    return r;
}

PathWord PathGroup::normal_form(const PathWord& w0) const {
    check(w0);
    const auto& G = *gog_;
    const auto& Y = G.graph;
    PathWord w = w0;
    while (true) {
        const int n = static_cast<int>(w.edges.size());
        std::vector<int> verts{w.base};
        for (int e : w.edges) verts.push_back(Y.term[e]);
        // e g = f_bar(e)(c) e s with g = f_e(c) s
        for (int i = n; i >= 1; --i) {
            int e = w.edges[i - 1];
            int g = w.elems[i];
            int s = rep_[e][g], c = cpart_[e][g];
            w.elems[i] = s;
            w.elems[i - 1] = G.vgroups[verts[i - 1]]->mul(w.elems[i - 1], G.emaps[Y.bar[e]](c));
        }
        int hit = -1;
        for (int i = 1; i < n; ++i)
            if (w.edges[i] == Y.bar[w.edges[i - 1]] && w.elems[i] == 0) {
                hit = i;
                break;
            }
        if (hit < 0) break;
        int v = verts[hit - 1];
        int merged = G.vgroups[v]->mul(w.elems[hit - 1], w.elems[hit + 1]);
        w.edges.erase(w.edges.begin() + hit - 1, w.edges.begin() + hit + 1);
        w.elems.erase(w.elems.begin() + hit - 1, w.elems.begin() + hit + 2);
        w.elems.insert(w.elems.begin() + hit - 1, merged);
    }
    return w;
}

bool PathGroup::is_reduced(const PathWord& w) const {
    check(w);
    const auto& Y = gog_->graph;
    if (w.edges.empty()) return w.elems[0] != 0;
    for (std::size_t i = 1; i < w.edges.size(); ++i) {
        int e = w.edges[i - 1];
        if (w.edges[i] == Y.bar[e] && finv_[e][w.elems[i]] != -1) return false;
    }
    return true;
}

bool PathGroup::is_identity(const PathWord& w) const {
    auto n = normal_form(w);
    return n.edges.empty() && n.elems[0] == 0;
}

PathWord PathGroup::tree_path(int v) const {
    PathWord w{T_.root, T_.path.at(v), std::vector<int>(T_.path.at(v).size() + 1, 0)};
    return w;
}

PathWord PathGroup::vertex_element(int v, int g) const {
    auto t = tree_path(v);
    PathWord mid{v, {}, {g}};
    return multiply(multiply(t, mid), inverse(t));
}

PathWord PathGroup::edge_element(int e) const {
    const auto& Y = gog_->graph;
    PathWord mid{Y.orig[e], {e}, {0, 0}};
    return multiply(multiply(tree_path(Y.orig[e]), mid), inverse(tree_path(Y.term[e])));
}

PathWord PathGroup::from_word(const std::vector<Letter>& word) const {
    PathWord r = identity(T_.root);
    for (const auto& l : word) {
        if (l.is_edge) {
            if (l.edge < 0 || l.edge >= gog_->graph.ne()) throw Error("word: edge out of range");
            r = multiply(r, edge_element(l.edge));
        } else {
            if (l.vertex < 0 || l.vertex >= gog_->graph.nv || l.elem < 0 ||
                l.elem >= gog_->vgroups[l.vertex]->order())
                throw Error("word: vertex letter out of range");
            r = multiply(r, vertex_element(l.vertex, l.elem));
        }
    }
    return r;
}

PathWord PathGroup::random_closed(int base, int len, std::uint64_t& state) const {
    const auto& G = *gog_;
    const auto& Y = G.graph;
    std::mt19937_64 rng(state);
    state = rng();
    std::vector<std::vector<int>> out(Y.nv);
    for (int e = 0; e < Y.ne(); ++e) out[Y.orig[e]].push_back(e);
    PathWord w{base, {}, {static_cast<int>(rng() % G.vgroups[base]->order())}};
    int v = base;
    for (int i = 0; i < len && !out[v].empty(); ++i) {
        int e = out[v][rng() % out[v].size()];
        v = Y.term[e];
        w.edges.push_back(e);
        w.elems.push_back(static_cast<int>(rng() % G.vgroups[v]->order()));
    }
    // back to the base through the tree
    PathWord back = multiply(inverse(tree_path(v)), tree_path(base));
    return multiply(w, back);
}

// -- morphisms ----------------------------------------------------------------------

void GogMorphism::verify() const {
    const auto& S = *src;
    const auto& D = *dst;
    const auto& Y = S.graph;
    const auto& Z = D.graph;
    if (static_cast<int>(vmap.size()) != Y.nv || static_cast<int>(emap.size()) != Y.ne() ||
        static_cast<int>(phi_v.size()) != Y.nv || static_cast<int>(phi_e.size()) != Y.ne() ||
        static_cast<int>(delta.size()) != Y.ne())
        throw Error("morphism: wrong sizes");
    for (int e = 0; e < Y.ne(); ++e) {
        int f = emap[e];
        if (f < 0 || f >= Z.ne()) throw Error("morphism: edge map out of range");
        if (Z.orig[f] != vmap[Y.orig[e]] || Z.term[f] != vmap[Y.term[e]] || emap[Y.bar[e]] != Z.bar[f])
            throw Error("morphism: not a graph morphism at edge " + std::to_string(e));
    }
    for (int v = 0; v < Y.nv; ++v) {
        const auto& h = phi_v[v];
        if (h.dom->table() != S.vgroups[v]->table() || h.cod->table() != D.vgroups[vmap[v]]->table() ||
            !h.is_homomorphism())
            throw Error("morphism: bad vertex map at " + std::to_string(v));
    }
    for (int e = 0; e < Y.ne(); ++e) {
        const auto& h = phi_e[e];
        int f = emap[e];
        if (h.dom->table() != S.egroups[e]->table() || h.cod->table() != D.egroups[f]->table() ||
            !h.is_homomorphism())
            throw Error("morphism: bad edge map at " + std::to_string(e));
        if (h.map != phi_e[Y.bar[e]].map) throw Error("morphism: edge maps of e and bar e differ");
        const auto& Vt = *D.vgroups[Z.term[f]];
        int d = delta[e];
        if (d < 0 || d >= Vt.order()) throw Error("morphism: delta out of range");
        for (int c = 0; c < h.dom->order(); ++c) {
            int lhs = phi_v[Y.term[e]](S.emaps[e](c));
            int rhs = Vt.mul(Vt.mul(d, D.emaps[f](h(c))), Vt.inv(d));
            if (lhs != rhs) throw Error("morphism: square does not commute at edge " + std::to_string(e));
        }
    }
}

PathWord GogMorphism::apply(const PathWord& w) const {
    const auto& Y = src->graph;
    const auto& Z = dst->graph;
    PathWord r;
    r.base = vmap[w.base];
    r.elems.push_back(phi_v[w.base](w.elems[0]));
    int v = w.base;
    for (std::size_t i = 0; i < w.edges.size(); ++i) {
        int e = w.edges[i];
        int f = emap[e];
        const auto& Go = *dst->vgroups[Z.orig[f]];
        const auto& Gt = *dst->vgroups[Z.term[f]];
        r.elems.back() = Go.mul(r.elems.back(), delta[Y.bar[e]]);
        r.edges.push_back(f);
        v = Y.term[e];
        r.elems.push_back(Gt.mul(Gt.inv(delta[e]), phi_v[v](w.elems[i + 1])));
    }
    return r;
}

GogMorphism identity_morphism(const GogPtr& G) {
    GogMorphism m;
    m.src = m.dst = G;
    for (int v = 0; v < G->graph.nv; ++v) {
        m.vmap.push_back(v);
        m.phi_v.push_back(identity_hom(G->vgroups[v]));
    }
    for (int e = 0; e < G->graph.ne(); ++e) {
        m.emap.push_back(e);
        m.phi_e.push_back(identity_hom(G->egroups[e]));
        m.delta.push_back(0);
    }
    return m;
}

// -- quotients and covers -----------------------------------------------------------

namespace {

void check_collection(const GraphOfGroups& G, const std::vector<Subgroup>& H, bool normal) {
    if (static_cast<int>(H.size()) != G.graph.nv) throw Error("collection: one subgroup per vertex expected");
    for (int v = 0; v < G.graph.nv; ++v) {
        if (!H[v].parent || H[v].parent->table() != G.vgroups[v]->table())
            throw Error("collection: subgroup " + std::to_string(v) + " lies in another group");
        if (normal && !is_normal(H[v])) throw Error("collection: subgroup " + std::to_string(v) + " is not normal");
    }
    if (!compatible(G, H)) throw Error("collection: not compatible along the edges");
}

Subgroup rebase(const Subgroup& S, const GroupPtr& G) { return Subgroup{G, S.elems}; }

}  // namespace

bool compatible(const GraphOfGroups& G, const std::vector<Subgroup>& H) {
    const auto& Y = G.graph;
    for (int e = 0; e < Y.ne(); ++e) {
        auto a = G.emaps[e].preimage(rebase(H[Y.term[e]], G.vgroups[Y.term[e]]));
        auto b = G.emaps[Y.bar[e]].preimage(rebase(H[Y.orig[e]], G.vgroups[Y.orig[e]]));
        if (a != b) return false;
    }
    return true;
}

GogQuotient quotient_gog(const GogPtr& Gp, const std::vector<Subgroup>& H) {
    const auto& G = *Gp;
    check_collection(G, H, true);
    const auto& Y = G.graph;
    std::vector<Quotient> Q;
    GraphOfGroups R;
    R.graph = Y;
    for (int v = 0; v < Y.nv; ++v) {
        Q.push_back(quotient(G.vgroups[v], rebase(H[v], G.vgroups[v])));
        R.vgroups.push_back(Q.back().group);
    }
    R.egroups.resize(Y.ne());
    R.emaps.resize(Y.ne());
    std::vector<Homomorphism> pe(Y.ne());
    for (int e = 0; e < Y.ne(); ++e) {
        if (e > Y.bar[e]) continue;
        auto K = G.emaps[e].preimage(rebase(H[Y.term[e]], G.vgroups[Y.term[e]]));
        auto QE = quotient(G.egroups[e], K);
        for (int f : {e, Y.bar[e]}) {
            int t = Y.term[f];
            Homomorphism m{QE.group, Q[t].group, {}};
            for (int x = 0; x < QE.group->order(); ++x) m.map.push_back(Q[t].proj(G.emaps[f](QE.reps[x])));
            R.egroups[f] = QE.group;
            R.emaps[f] = m;
            pe[f] = QE.proj;
        }
    }
    R.verify();
    GogQuotient out;
    out.gog = share(std::move(R));
    auto& m = out.proj;
    m.src = Gp;
    m.dst = out.gog;
    for (int v = 0; v < Y.nv; ++v) {
        m.vmap.push_back(v);
        m.phi_v.push_back(Q[v].proj);
    }
    for (int e = 0; e < Y.ne(); ++e) {
        m.emap.push_back(e);
        m.phi_e.push_back(pe[e]);
        m.delta.push_back(0);
    }
    m.verify();
    return out;
}

namespace {

// left cosets x S, minimal representatives in increasing order
std::vector<int> left_coset_reps(const GroupPtr& G, const Subgroup& S) {
    std::vector<char> seen(G->order(), 0);
    std::vector<int> reps;
    for (int x = 0; x < G->order(); ++x) {
        if (seen[x]) continue;
        reps.push_back(x);
        for (int s : S.elems) seen[G->mul(x, s)] = 1;
    }
    return reps;
}

bool prime_power(long long n, int& p) {
    if (n == 1) return true;
    int q = 0;
    for (long long d = 2; d * d <= n; ++d)
        if (n % d == 0) {
            q = static_cast<int>(d);
            break;
        }
    if (!q) q = static_cast<int>(n);
    while (n % q == 0) n /= q;
    if (n != 1) return false;
    if (p && p != q) return false;
    p = q;
    return true;
}

}  // namespace

CommonCover common_cover(const GogPtr& Gp, const std::vector<Subgroup>& H0) {
    const auto& G = *Gp;
    const auto& Y = G.graph;
    std::vector<Subgroup> H;
    for (int v = 0; v < Y.nv; ++v) H.push_back(rebase(H0.at(v), G.vgroups[v]));
    check_collection(G, H, true);
    std::vector<long long> iv(Y.nv), ie(Y.ne());
    long long L = 1;
    for (int v = 0; v < Y.nv; ++v) {
        iv[v] = G.vgroups[v]->order() / H[v].size();
        L = std::lcm(L, iv[v]);
    }
    std::vector<Subgroup> He(Y.ne());
    for (int e = 0; e < Y.ne(); ++e) {
        He[e] = G.emaps[e].preimage(H[Y.term[e]]);
        ie[e] = G.egroups[e]->order() / He[e].size();
        L = std::lcm(L, ie[e]);
    }
    CommonCover out;
    std::vector<int> off(Y.nv + 1, 0);
    for (int v = 0; v < Y.nv; ++v) {
        out.copies.push_back(static_cast<int>(L / iv[v]));
        off[v + 1] = off[v] + out.copies.back();
    }
    // ports at t(e): cosets of H_t f_e(G_e)
    std::vector<std::vector<int>> ports(Y.ne());
    for (int e = 0; e < Y.ne(); ++e) {
        int t = Y.term[e];
        ports[e] = left_coset_reps(G.vgroups[t], join(H[t], G.emaps[e].image()));
        out.ports.push_back(static_cast<int>(ports[e].size()));
    }
    struct Lift {
        int e, o, t, x, y;  // base edge e, cover endpoints, conjugators at t and o
    };
    std::vector<Lift> lifts;
    for (int e = 0; e < Y.ne(); ++e) {
        if (e > Y.bar[e]) continue;
        int eb = Y.bar[e], o = Y.orig[e], t = Y.term[e];
        std::vector<std::pair<int, int>> tside, oside;  // (copy, port)
        for (int j = 0; j < out.copies[t]; ++j)
            for (int x : ports[e]) tside.emplace_back(j, x);
        for (int y : ports[eb])
            for (int j = 0; j < out.copies[o]; ++j) oside.emplace_back(j, y);
        if (tside.size() != oside.size()) throw Error("common cover: port counts differ");
        for (std::size_t k = 0; k < tside.size(); ++k)
            lifts.push_back({e, off[o] + oside[k].first, off[t] + tside[k].first, tside[k].second, oside[k].second});
    }
    // component of copy 0 over vertex 0
    const int NV = off[Y.nv];
    std::vector<std::vector<int>> adj(NV);
    for (const auto& l : lifts) {
        adj[l.o].push_back(l.t);
        adj[l.t].push_back(l.o);
    }
    std::vector<char> keep(NV, 0);
    std::vector<int> st{0};
    keep[0] = 1;
    while (!st.empty()) {
        int u = st.back();
        st.pop_back();
        for (int w : adj[u])
            if (!keep[w]) {
                keep[w] = 1;
                st.push_back(w);
            }
    }
    std::vector<int> newid(NV, -1), base_of;
    int nn = 0;
    for (int v = 0; v < Y.nv; ++v)
        for (int c = off[v]; c < off[v + 1]; ++c)
            if (keep[c]) {
                newid[c] = nn++;
                base_of.push_back(v);
            }
    std::vector<Materialized> Hm;
    for (int v = 0; v < Y.nv; ++v) Hm.push_back(materialize(H[v]));
    std::vector<Materialized> Hem(Y.ne());
    for (int e = 0; e < Y.ne(); ++e)
        if (e < Y.bar[e]) Hem[e] = Hem[Y.bar[e]] = materialize(He[e]);
    auto local = [&](int v, int g) {
        const auto& el = H[v].elems;
        auto it = std::lower_bound(el.begin(), el.end(), g);
        if (it == el.end() || *it != g) throw Error("common cover: element outside H");
        return static_cast<int>(it - el.begin());
    };
    GraphOfGroups C;
    C.graph.nv = nn;
    for (int c = 0; c < nn; ++c) C.vgroups.push_back(Hm[base_of[c]].group);
    GogMorphism m;
    for (int c = 0; c < nn; ++c) {
        m.vmap.push_back(base_of[c]);
        m.phi_v.push_back(Hm[base_of[c]].incl);
    }
    for (const auto& l : lifts) {
        if (!keep[l.o]) continue;
        int e = l.e, eb = Y.bar[e];
        int idx = C.graph.ne();
        C.graph.bar.push_back(idx + 1);
        C.graph.bar.push_back(idx);
        C.graph.orig.push_back(newid[l.o]);
        C.graph.term.push_back(newid[l.t]);
        C.graph.orig.push_back(newid[l.t]);
        C.graph.term.push_back(newid[l.o]);
        const auto& Eg = Hem[e];
        for (int f : {e, eb}) {
            int v = Y.term[f];
            int x = f == e ? l.x : l.y;
            const auto& Gv = *G.vgroups[v];
            Homomorphism fm{Eg.group, Hm[v].group, {}};
            for (int h = 0; h < Eg.group->order(); ++h)
                fm.map.push_back(local(v, Gv.mul(Gv.mul(x, G.emaps[f](Eg.incl(h))), Gv.inv(x))));
            C.egroups.push_back(Eg.group);
            C.emaps.push_back(fm);
            m.emap.push_back(f);
            m.phi_e.push_back(Eg.incl);
            m.delta.push_back(x);
        }
    }
    C.verify();
    out.gog = share(std::move(C));
    m.src = out.gog;
    m.dst = Gp;
    m.verify();
    out.cover = std::move(m);
    // the degree is the same over every vertex for a covering
    std::vector<long long> cnt(Y.nv, 0);
    for (int c = 0; c < nn; ++c) ++cnt[base_of[c]];
    out.degree = cnt[0] * iv[0];
    for (int v = 0; v < Y.nv; ++v)
        if (cnt[v] * iv[v] != out.degree) throw Error("common cover: sheet counts disagree");
    int p = 0;
    bool pp = true;
    for (auto x : iv) pp = pp && prime_power(x, p);
    for (auto x : ie) pp = pp && prime_power(x, p);
    out.p_power_degree = false;
    if (pp) {
        int q = p;
        if (!prime_power(out.degree, q)) throw Error("common cover: degree is not a prime power");
        out.p_power_degree = true;
    }
    return out;
}

// -- colimits and partial abelianization ----------------------------------------------

Colimit colimit_sigma(const GraphOfGroups& G, const Subtree* T) {
    if (!G.all_abelian()) throw Error("colimit: vertex groups must be abelian");
    const auto& Y = G.graph;
    std::vector<Identification> ids;
    for (int e = 0; e < Y.ne(); ++e) {
        if (e > Y.bar[e]) continue;
        if (T && !T->in[e]) continue;
        for (int c : generators(whole_group(G.egroups[e])))
            ids.push_back({Y.term[e], G.emaps[e](c), Y.orig[e], G.emaps[Y.bar[e]](c)});
    }
    auto col = abelian_colimit(G.vgroups, ids);
    return {col.group, col.maps};
}

PartialAbelianization partial_abelianization(const GraphOfGroups& G, const Subtree& T) {
    PartialAbelianization r;
    r.sigma = colimit_sigma(G, &T);
    r.edges = positive_nontree_edges(G.graph, T);
    r.pas.group = r.sigma.group;
    const auto& Y = G.graph;
    for (int e : r.edges) {
        std::vector<int> xs, ys;
        for (int c : generators(whole_group(G.egroups[e]))) {
            xs.push_back(r.sigma.iota[Y.term[e]](G.emaps[e](c)));
            ys.push_back(r.sigma.iota[Y.orig[e]](G.emaps[Y.bar[e]](c)));
        }
        r.pas.items.push_back(partial_automorphism(r.sigma.group, xs, ys));
    }
    r.pas.verify();
    return r;
}

// -- certificates ---------------------------------------------------------------------

bool Certificate::verify(const GraphOfGroups& G, const Subtree& T, int p, std::string* why) const {
    auto fail = [&](const std::string& s) {
        if (why) *why = s;
        return false;
    };
    const auto& Y = G.graph;
    if (!P) return fail("no target group");
    if (!P->is_p_group(p) && P->order() != 1) return fail("target is not a p-group");
    if (static_cast<int>(psi_v.size()) != Y.nv || static_cast<int>(psi_e.size()) != Y.ne())
        return fail("wrong number of vertex maps or edge values");
    for (int v = 0; v < Y.nv; ++v) {
        const auto& h = psi_v[v];
        if (h.dom->table() != G.vgroups[v]->table() || h.cod->table() != P->table())
            return fail("vertex map " + std::to_string(v) + " has the wrong domain or codomain");
        if (!h.is_homomorphism()) return fail("vertex map " + std::to_string(v) + " is not a homomorphism");
        if (!h.is_injective()) return fail("vertex map " + std::to_string(v) + " is not injective");
    }
    for (int e = 0; e < Y.ne(); ++e) {
        int t = psi_e[e];
        if (t < 0 || t >= P->order()) return fail("edge value out of range");
        if (T.in[e] && t != 0) return fail("tree edge " + std::to_string(e) + " not sent to 1");
        if (psi_e[Y.bar[e]] != P->inv(t)) return fail("edge " + std::to_string(e) + " and its reverse disagree");
        for (int c = 0; c < G.egroups[e]->order(); ++c) {
            int a = psi_v[Y.term[e]](G.emaps[e](c));
            int b = psi_v[Y.orig[e]](G.emaps[Y.bar[e]](c));
            if (P->mul(P->mul(t, a), P->inv(t)) != b)
                return fail("relation fails at edge " + std::to_string(e) + ", element " + std::to_string(c));
        }
    }
    return true;
}

int Certificate::evaluate(const GraphOfGroups& G, const PathWord& w) const {
    int x = psi_v[w.base](w.elems[0]);
    for (std::size_t i = 0; i < w.edges.size(); ++i) {
        int e = w.edges[i];
        x = P->mul(P->mul(x, psi_e[e]), psi_v[G.graph.term[e]](w.elems[i + 1]));
    }
    return x;
}

// -- filtrations of graphs of groups ---------------------------------------------------

int GogFiltration::length() const {
    int L = 0;
    for (const auto& f : F) {
        int l = f.length();
        if (l < 0) return -1;
        L = std::max(L, l);
    }
    return L;
}

std::vector<Subgroup> GogFiltration::level(int n) const {
    std::vector<Subgroup> out;
    for (const auto& f : F) out.push_back(f.term(n));
    return out;
}

namespace {

int horizon_of(const GogFiltration& F) {
    int L = F.length();
    if (L >= 0) return L + 1;
    int s = 1;
    for (const auto& f : F.F) s = std::max(s, f.size() + 1);
    return s;
}

}  // namespace

bool GogFiltration::compatible(const GraphOfGroups& G) const {
    if (static_cast<int>(F.size()) != G.graph.nv) return false;
    for (int n = 1; n <= horizon_of(*this); ++n)
        if (!residuap::compatible(G, level(n))) return false;
    return true;
}

bool GogFiltration::central_p(int p) const {
    for (const auto& f : F)
        if (!f.is_central_p(p)) return false;
    return true;
}

bool GogFiltration::complete() const {
    for (const auto& f : F)
        if (!f.complete()) return false;
    return true;
}

bool GogFiltration::separating() const { return length() >= 0; }

bool GogFiltration::separates_edges(const GraphOfGroups& G) const {
    if (!separating()) return false;
    int n = length() + 1;
    for (int e = 0; e < G.graph.ne(); ++e) {
        auto A = G.edge_image(e);
        if (join(A, F[G.graph.term[e]].term(n)) != A) return false;
    }
    return true;
}

Filtration GogFiltration::edge_filtration(const GraphOfGroups& G, int e) const {
    const auto& Ft = F.at(G.graph.term[e]);
    std::vector<Subgroup> terms;
    for (int n = 1; n <= std::max(1, Ft.size()); ++n) terms.push_back(G.emaps[e].preimage(Ft.term(n)));
    return make_filtration(G.egroups[e], std::move(terms));
}

bool GogFiltration::uniformly_p_potent_on_edges(const GraphOfGroups& G, int p, int horizon) const {
    for (int e = 0; e < G.graph.ne(); ++e) {
        try {
            if (!classify_potency(edge_filtration(G, e), p, horizon).uniformly) return false;
        } catch (const Error&) {
            return false;
        }
    }
    return true;
}

bool GogFiltration::gamma_p_on_edges(const GraphOfGroups& G, int p, int ell) const {
    for (int e = 0; e < G.graph.ne(); ++e) {
        auto Fe = edge_filtration(G, e);
        auto Gam = lower_central_p_series(G.egroups[e], p);
        for (int n = 1; n <= horizon_of(*this); ++n)
            if (Fe.term(n) != Gam.term(n + ell)) return false;
    }
    return true;
}

GogFiltration pullback(const GogFiltration& F, const GogMorphism& phi) {
    GogFiltration out;
    for (int v = 0; v < phi.src->graph.nv; ++v) out.F.push_back(pullback(F.F.at(phi.vmap[v]), phi.phi_v[v]));
    return out;
}

// -- certification ------------------------------------------------------------------------

namespace {

std::set<std::vector<int>> induced(const Filtration& F, const Homomorphism& u) {
    std::set<std::vector<int>> s;
    for (int i = 1; i <= F.size() + 1; ++i) s.insert(u.preimage(F.term(i)).elems);
    return s;
}

Certificate assemble(GroupPtr P, std::vector<Homomorphism> psi_v, const Graph& Y, const std::vector<int>& edges,
                     const std::vector<int>& vals, std::string method) {
    Certificate c;
    c.psi_e.assign(Y.ne(), 0);
    for (std::size_t j = 0; j < edges.size(); ++j) {
        c.psi_e[edges[j]] = vals[j];
        c.psi_e[Y.bar[edges[j]]] = P->inv(vals[j]);
    }
    c.P = std::move(P);
    c.psi_v = std::move(psi_v);
    c.method = std::move(method);
    return c;
}

CertifyResult finish(const GraphOfGroups& G, const Subtree& T, int p, Certificate c) {
    std::string why;
    if (!c.verify(G, T, p, &why)) throw Error("certificate failed its own verification: " + why);
    CertifyResult r;
    r.outcome = Outcome::Yes;
    r.method = c.method;
    r.certificate = std::move(c);
    return r;
}

// phi_e on the vertex group when e is a loop at a single vertex
PartialAutomorphismSet loop_pas(const GraphOfGroups& G, int e) {
    const auto& Y = G.graph;
    std::vector<int> xs, ys;
    for (int c : generators(whole_group(G.egroups[e]))) {
        xs.push_back(G.emaps[e](c));
        ys.push_back(G.emaps[Y.bar[e]](c));
    }
    PartialAutomorphismSet pas{G.vgroups[Y.orig[e]], {partial_automorphism(G.vgroups[Y.orig[e]], xs, ys)}};
    return pas;
}

// A single edge spans a subgraph of groups whose fundamental group embeds; if that
// amalgam or HNN extension fails its criterion, so does the whole group.
std::optional<std::string> edge_refutation(const GraphOfGroups& G, const Caps& caps) {
    const auto& Y = G.graph;
    for (int e = 0; e < Y.ne(); ++e) {
        if (e > Y.bar[e]) continue;
        if (Y.orig[e] == Y.term[e]) {
            auto ie = inner_extension(loop_pas(G, e), caps);
            if (ie.outcome == Outcome::No)
                return "the HNN extension along loop " + std::to_string(e) + " admits no filtration satisfying the extension condition";
        } else {
            Amalgam am{G.vgroups[Y.orig[e]], G.vgroups[Y.term[e]], G.egroups[e], G.emaps[Y.bar[e]], G.emaps[e]};
            if (!amalgam_embeddable(am, caps))
                return "the amalgam along edge " + std::to_string(e) + " has no pair of chief filtrations inducing equivalent filtrations on the edge group";
        }
    }
    return std::nullopt;
}

CertifyResult unknown(std::string why) {
    CertifyResult r;
    r.outcome = Outcome::Unknown;
    r.reason = std::move(why);
    return r;
}

CertifyResult reduction_core(const GraphOfGroups& G, const GogFiltration* F, int p, const Caps& caps) {
    const auto& Y = G.graph;
    Subtree T = maximal_subtree(Y, 0);
    GroupPtr P = G.vgroups[T.root];
    std::optional<Filtration> FP;
    if (F) FP = F->F[T.root];
    std::vector<Homomorphism> psi(Y.nv);
    std::vector<char> placed(Y.nv, 0);
    psi[T.root] = identity_hom(P);
    placed[T.root] = 1;
    for (std::size_t k = 1; k < T.order.size(); ++k) {
        int w = T.order[k];
        int e = T.parent_edge[w];
        int u = Y.orig[e];
        Amalgam am{P, G.vgroups[w], G.egroups[e], compose(psi[u], G.emaps[Y.bar[e]]), G.emaps[e]};
        Filtration FG, FH;
        if (F) {
            FG = *FP;
            FH = F->F[w];
        } else if (!FP) {
            auto found = amalgam_embeddable(am, caps);
            if (!found) return unknown("no chief filtrations of the first amalgam agree on the edge group");
            FG = found->first;
            FH = found->second;
        } else {
            FG = *FP;
            auto target = induced(FG, am.uG);
            bool got = false;
            for (auto& C : chief_filtrations(G.vgroups[w])) {
                if (induced(C, am.uH) == target) {
                    FH = C;
                    got = true;
                    break;
                }
            }
            if (!got) return unknown("no chief filtration of vertex " + std::to_string(w) + " matches the filtration carried so far");
        }
        HigmanResult hr;
        try {
            hr = higman_embed(am, FG, FH, caps);
        } catch (const CapExceeded& ex) {
            return unknown(std::string("cap exceeded in the wreath tower: ") + ex.what());
        }
        if (hr.implicit)
            return unknown("embedding group too large to tabulate (log2 order " + std::to_string(hr.predicted_log2) + ")");
        for (int x = 0; x < Y.nv; ++x)
            if (placed[x]) psi[x] = compose(hr.embedding.alpha, psi[x]);
        psi[w] = hr.embedding.beta;
        placed[w] = 1;
        P = hr.embedding.W;
        FP = hr.W_filtration;
    }
    auto edges = positive_nontree_edges(Y, T);
    if (edges.empty()) return finish(G, T, p, assemble(P, psi, Y, edges, {}, "iterated strong embedding"));
    PartialAutomorphismSet pas{P, {}};
    for (int e : edges) {
        std::vector<int> xs, ys;
        for (int c : generators(whole_group(G.egroups[e]))) {
            xs.push_back(psi[Y.term[e]](G.emaps[e](c)));
            ys.push_back(psi[Y.orig[e]](G.emaps[Y.bar[e]](c)));
        }
        pas.items.push_back(partial_automorphism(P, xs, ys));
    }
    InnerExtension ie;
    bool have = false;
    std::string method = "iterated strong embedding + layerwise inner extension";
    if (FP) {
        try {
            auto lw = layerwise_inner_extension(pas, *FP, caps);
            if (lw.result.outcome == Outcome::Yes) {
                ie = lw.result;
                have = true;
            }
        } catch (const Error&) {
        }
    }
    if (!have) {
        method = "iterated strong embedding + inner extension";
        ie = inner_extension(pas, caps);
        if (ie.outcome == Outcome::No && Y.nv == 1) {
            CertifyResult r;
            r.outcome = Outcome::No;
            r.method = "extension condition";
            r.reason = "no filtration of the vertex group satisfies the extension condition";
            return r;
        }
        if (ie.outcome != Outcome::Yes) return unknown("inner extension search: " + ie.reason);
    }
    std::vector<Homomorphism> out;
    for (int v = 0; v < Y.nv; ++v) out.push_back(compose(ie.embedding, psi[v]));
    return finish(G, T, p, assemble(ie.Hp, out, Y, edges, ie.conjugators, method));
}

}  // namespace

CertifyResult reduction_certify(const GraphOfGroups& G, const GogFiltration* F, int p, const Caps& caps) {
    G.verify();
    if (!G.all_p_groups(p)) throw Error("reduction: vertex groups must be p-groups");
    if (F) {
        if (static_cast<int>(F->F.size()) != G.graph.nv) throw Error("reduction: one filtration per vertex expected");
        if (F->length() < 0) throw Error("reduction: filtrations must have finite length");
        if (!F->central_p(p)) throw Error("reduction: filtrations must be central p-filtrations");
        if (!F->compatible(G)) throw Error("reduction: filtrations are not compatible along the edges");
    }
    return reduction_core(G, F, p, caps);
}

CertifyResult certify_residually_p(const GraphOfGroups& G, int p, const Caps& caps) {
    G.verify();
    if (!is_prime(p)) throw Error("certify: p must be prime");
    if (!G.all_p_groups(p)) throw Error("certify: vertex groups must be p-groups");
    const auto& Y = G.graph;
    Subtree T = maximal_subtree(Y, 0);
    CertifyResult res;
    if (G.trivial_edge_groups()) {
        long long order = 1;
        for (const auto& V : G.vgroups) order *= V->order();
        if (order <= static_cast<long long>(caps.order)) {
            GroupPtr P = G.vgroups[0];
            std::vector<Homomorphism> psi{identity_hom(P)};
            for (int v = 1; v < Y.nv; ++v) {
                auto pr = direct_product(P, G.vgroups[v]);
                for (auto& h : psi) h = compose(pr.in1, h);
                psi.push_back(pr.in2);
                P = pr.group;
            }
            // a loop with trivial edge group imposes no relation
            auto edges = positive_nontree_edges(Y, T);
            return finish(G, T, p, assemble(P, psi, Y, edges, std::vector<int>(edges.size(), 0), "direct product"));
        }
    }
    if (G.all_abelian()) {
        auto pa = partial_abelianization(G, T);
        if (pa.edges.empty())
            return finish(G, T, p, assemble(pa.sigma.group, pa.sigma.iota, Y, {}, {}, "colimit"));
        auto ie = inner_extension(pa.pas, caps);
        if (ie.outcome == Outcome::Yes) {
            std::vector<Homomorphism> psi;
            for (int v = 0; v < Y.nv; ++v) psi.push_back(compose(ie.embedding, pa.sigma.iota[v]));
            return finish(G, T, p, assemble(ie.Hp, psi, Y, pa.edges, ie.conjugators, "partial abelianization + inner extension"));
        }
        if (ie.outcome == Outcome::No && Y.nv == 1) {
            res.outcome = Outcome::No;
            res.method = "extension condition";
            res.reason = "no filtration of the vertex group satisfies the extension condition";
            return res;
        }
    }
    res = reduction_core(G, nullptr, p, caps);
    if (res.outcome == Outcome::Yes || res.outcome == Outcome::No) return res;
    if (auto why = edge_refutation(G, caps)) {
        res.outcome = Outcome::No;
        res.method = "subgraph refutation";
        res.reason = *why;
    }
    return res;
}

// -- unfolding ---------------------------------------------------------------------------

Unfolding unfold_graph(const Graph& Y, const Subtree& T, const GroupPtr& A, const std::vector<int>& psi) {
    Y.verify();
    if (static_cast<int>(psi.size()) != Y.ne()) throw Error("unfold: one value per edge expected");
    for (int e = 0; e < Y.ne(); ++e) {
        if (psi[e] < 0 || psi[e] >= A->order()) throw Error("unfold: value out of range");
        if (psi[Y.bar[e]] != A->inv(psi[e])) throw Error("unfold: psi(bar e) must be psi(e)^-1");
        if (T.in[e] && psi[e] != 0) throw Error("unfold: psi must be trivial on the tree");
    }
    auto S = subgroup_generated(A, psi);
    if (S.size() != A->order())
        throw Error("unfold: psi generates a subgroup of order " + std::to_string(S.size()) + " in a group of order " +
                    std::to_string(A->order()) + "; the unfolding would have " +
                    std::to_string(A->order() / S.size()) + " components");
    Unfolding U;
    U.A = A;
    U.psi = psi;
    U.base_vertices = Y.nv;
    U.base_edges = Y.ne();
    const int n = A->order();
    U.graph.nv = n * Y.nv;
    U.graph.bar.resize(n * Y.ne());
    U.graph.orig.resize(n * Y.ne());
    U.graph.term.resize(n * Y.ne());
    for (int a = 0; a < n; ++a) {
        for (int v = 0; v < Y.nv; ++v) U.vproj.push_back(v);
        for (int e = 0; e < Y.ne(); ++e) {
            int x = U.edge(a, e);
            int b = A->mul(psi[e], a);
            U.graph.bar[x] = U.edge(b, Y.bar[e]);
            U.graph.orig[x] = U.vertex(a, Y.orig[e]);
            U.graph.term[x] = U.vertex(b, Y.term[e]);
        }
    }
    for (int a = 0; a < n; ++a)
        for (int e = 0; e < Y.ne(); ++e) U.eproj.push_back(e);
    U.graph.verify();
    return U;
}

UnfoldedGog unfold_gog(const GogPtr& Gp, const Subtree& T, const GroupPtr& A, const std::vector<int>& psi) {
    const auto& G = *Gp;
    UnfoldedGog out;
    out.unfolding = unfold_graph(G.graph, T, A, psi);
    const auto& U = out.unfolding;
    GraphOfGroups R;
    R.graph = U.graph;
    for (int x = 0; x < U.graph.nv; ++x) R.vgroups.push_back(G.vgroups[U.vproj[x]]);
    for (int x = 0; x < U.graph.ne(); ++x) {
        R.egroups.push_back(G.egroups[U.eproj[x]]);
        R.emaps.push_back(G.emaps[U.eproj[x]]);
    }
    R.verify();
    out.gog = share(std::move(R));
    auto& m = out.phi;
    m.src = out.gog;
    m.dst = Gp;
    m.vmap = U.vproj;
    m.emap = U.eproj;
    for (int x = 0; x < U.graph.nv; ++x) m.phi_v.push_back(identity_hom(G.vgroups[U.vproj[x]]));
    for (int x = 0; x < U.graph.ne(); ++x) {
        m.phi_e.push_back(identity_hom(G.egroups[U.eproj[x]]));
        m.delta.push_back(0);
    }
    m.verify();
    return out;
}

std::optional<PathWord> UnfoldedGog::lift(const PathWord& w) const {
    const auto& U = unfolding;
    PathWord r{U.vertex(0, w.base), {}, w.elems};
    int a = 0;
    for (int e : w.edges) {
        r.edges.push_back(U.edge(a, e));
        a = U.A->mul(U.psi[e], a);
    }
    if (a != 0) return std::nullopt;
    return r;
}

int UnfoldedGog::psi_of(const PathWord& w) const {
    int a = 0;
    for (int e : w.edges) a = unfolding.A->mul(unfolding.psi[e], a);
    return a;
}

// -- sigma witness ---------------------------------------------------------------------------

namespace {

struct Twisted {
    int s, a;  // Sigma element, automorphism index
};

}  // namespace

SigmaWitness sigma_witness(const GogPtr& Gp, const Caps& caps) {
    const auto& G = *Gp;
    G.verify();
    int p = 0;
    for (const auto& V : G.vgroups) {
        if (V->order() == 1) continue;
        int q = V->prime();
        if (!V->is_abelian() || q <= 1 || (p && q != p)) throw Error("sigma witness: vertex groups must be elementary abelian p-groups");
        for (int x = 0; x < V->order(); ++x)
            if (V->pow(x, q) != 0) throw Error("sigma witness: vertex groups must be elementary abelian p-groups");
        p = q;
    }
    if (!p) p = 2;
    const auto& Y = G.graph;
    Subtree T = maximal_subtree(Y, 0);
    SigmaWitness W;
    W.pa = partial_abelianization(G, T);
    const auto& S = W.pa.sigma.group;
    auto ac = abelian_coordinates(S);
    const int r = static_cast<int>(ac.gens.size());
    auto vec = [&](int x) {
        Vec v(r);
        for (int i = 0; i < r; ++i) v[i] = mod(ac.coords[x][i], p);
        return v;
    };
    std::map<Vec, int> index;
    for (int x = 0; x < S->order(); ++x) index[vec(x)] = x;
    auto basis_of = [&](const Subgroup& A, Mat& basis, std::vector<int>& elems) {
        RowSpace rs(p, r);
        for (int x : A.elems)
            if (rs.add(vec(x))) {
                basis.push_back(vec(x));
                elems.push_back(x);
            }
        return rs;
    };
    for (const auto& item : W.pa.pas.items) {
        Mat Ab, Ib;
        std::vector<int> ael;
        auto rsA = basis_of(item.A, Ab, ael);
        for (int x : ael) Ib.push_back(vec(item.map[x]));
        RowSpace rsB = span(Ib, p, r);
        // complete both bases by the least standard vectors outside the span
        for (int j = 0; j < r; ++j) {
            Vec u(r, 0);
            u[j] = 1;
            if (rsA.add(u)) Ab.push_back(u);
        }
        for (int j = 0; j < r; ++j) {
            Vec u(r, 0);
            u[j] = 1;
            if (rsB.add(u)) Ib.push_back(u);
        }
        auto inv = inverse(Ab, p);
        if (!inv) throw Error("sigma witness: basis completion failed");
        Mat M = mat_mul(*inv, Ib, p);  // x -> x M
        std::vector<int> perm(S->order());
        for (int x = 0; x < S->order(); ++x) perm[x] = index.at(vec_mat(vec(x), M, p));
        W.sigma.push_back(perm);
    }
    W.A = automorphism_subgroup(S, W.sigma, caps);
    const auto& A = *W.A.group;
    auto find_perm = [&](const std::vector<int>& perm) {
        for (int a = 0; a < A.order(); ++a)
            if (W.A.perms[a] == perm) return a;
        throw Error("sigma witness: automorphism not found");
    };
    W.psi.assign(Y.ne(), 0);
    for (std::size_t j = 0; j < W.pa.edges.size(); ++j) {
        int e = W.pa.edges[j];
        std::vector<int> sinv(S->order());
        for (int x = 0; x < S->order(); ++x) sinv[W.sigma[j][x]] = x;
        W.psi[e] = find_perm(sinv);
        W.psi[Y.bar[e]] = A.inv(W.psi[e]);
    }
    W.unfolded = unfold_gog(Gp, T, W.A.group, W.psi);
    // evaluation in Sigma x| A: (s1, a1)(s2, a2) = (s1 + a1(s2), a1 a2)
    auto tmul = [&](Twisted x, Twisted y) { return Twisted{S->mul(x.s, W.A.perms[x.a][y.s]), A.mul(x.a, y.a)}; };
    auto tinv = [&](Twisted x) {
        int ai = A.inv(x.a);
        return Twisted{W.A.perms[ai][S->inv(x.s)], ai};
    };
    const auto& iota = W.pa.sigma.iota;
    auto eval = [&](const PathWord& w) {
        Twisted x{iota[w.base](w.elems[0]), 0};
        for (std::size_t i = 0; i < w.edges.size(); ++i) {
            int e = w.edges[i];
            x = tmul(x, Twisted{0, A.inv(W.psi[e])});
            x = tmul(x, Twisted{iota[Y.term[e]](w.elems[i + 1]), 0});
        }
        return x;
    };
    const auto& UG = *W.unfolded.gog;
    const auto& U = W.unfolded.unfolding;
    Subtree TU = maximal_subtree(UG.graph, 0);
    PathGroup PU(W.unfolded.gog, TU);
    Certificate mu;
    mu.P = S;
    mu.method = "unfolding along the extended automorphisms";
    for (int x = 0; x < UG.graph.nv; ++x) {
        auto gamma = W.unfolded.phi.apply(PU.tree_path(x));
        auto Gi = tinv(eval(gamma));
        auto Gm = eval(gamma);
        Homomorphism h{UG.vgroups[x], S, {}};
        int alpha = x / U.base_vertices;
        int v = U.vproj[x];
        for (int g = 0; g < UG.vgroups[x]->order(); ++g) {
            auto val = tmul(tmul(Gm, Twisted{iota[v](g), 0}), Gi);
            if (val.a != 0) throw Error("sigma witness: vertex element left the kernel");
            if (val.s != W.A.perms[A.inv(alpha)][iota[v](g)]) throw Error("sigma witness: vertex map disagrees with alpha^-1 iota");
            h.map.push_back(val.s);
        }
        mu.psi_v.push_back(h);
    }
    for (int x = 0; x < UG.graph.ne(); ++x) {
        auto val = eval(W.unfolded.phi.apply(PU.edge_element(x)));
        if (val.a != 0) throw Error("sigma witness: edge element left the kernel");
        mu.psi_e.push_back(val.s);
    }
    std::string why;
    if (!mu.verify(UG, TU, p, &why)) throw Error("sigma witness: certificate failed: " + why);
    W.mu = std::move(mu);
    return W;
}

// -- homology --------------------------------------------------------------------------------

HomologyReport homology_fiber_sum_check(const GraphOfGroups& G, const Subtree& T) {
    G.verify();
    if (!G.all_abelian()) throw Error("homology check: vertex groups must be abelian");
    const auto& Y = G.graph;
    std::vector<AbelianCoords> ac;
    std::vector<int> off{0};
    for (const auto& V : G.vgroups) {
        ac.push_back(abelian_coordinates(V));
        off.push_back(off.back() + static_cast<int>(ac.back().gens.size()));
    }
    auto edges = positive_nontree_edges(Y, T);
    Presentation P;
    P.ngens = off.back() + static_cast<int>(edges.size());
    auto word = [&](int v, int x) {
        std::vector<int> w;
        for (std::size_t i = 0; i < ac[v].gens.size(); ++i)
            for (long long k = 0; k < ac[v].coords[x][i]; ++k) w.push_back(off[v] + static_cast<int>(i) + 1);
        return w;
    };
    auto inv = [](std::vector<int> w) {
        std::reverse(w.begin(), w.end());
        for (auto& l : w) l = -l;
        return w;
    };
    auto cat = [](std::vector<int> a, const std::vector<int>& b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };
    for (int v = 0; v < Y.nv; ++v) {
        const int k = static_cast<int>(ac[v].gens.size());
        for (const auto& row : ac[v].relations) {
            std::vector<int> w;
            for (int i = 0; i < k; ++i)
                for (long long t = 0; t < std::llabs(row[i]); ++t) w.push_back((row[i] > 0 ? 1 : -1) * (off[v] + i + 1));
            if (!w.empty()) P.relators.push_back(w);
        }
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) {
                int a = off[v] + i + 1, b = off[v] + j + 1;
                P.relators.push_back({-a, -b, a, b});
            }
    }
    for (int e = 0; e < Y.ne(); ++e) {
        if (e > Y.bar[e]) continue;
        auto it = std::find(edges.begin(), edges.end(), e);
        for (int c : generators(whole_group(G.egroups[e]))) {
            auto a = word(Y.term[e], G.emaps[e](c));
            auto b = inv(word(Y.orig[e], G.emaps[Y.bar[e]](c)));
            if (it == edges.end()) {
                P.relators.push_back(cat(a, b));
            } else {
                int t = off.back() + static_cast<int>(it - edges.begin()) + 1;
                P.relators.push_back(cat(cat(cat({t}, a), {-t}), b));
            }
        }
    }
    HomologyReport rep;
    rep.presentation = P;
    auto sm = smith_abelianization(P);
    rep.h1 = {sm.torsion, sm.free_rank};
    auto sT = colimit_sigma(G, &T);
    rep.expected = invariants(sT.group);
    rep.expected.free_rank += static_cast<int>(edges.size());
    rep.full = invariants(colimit_sigma(G).group);
    rep.full.free_rank += static_cast<int>(edges.size());
    rep.hypothesis = true;
    for (int e : edges)
        for (int c = 0; c < G.egroups[e]->order(); ++c)
            if (sT.iota[Y.term[e]](G.emaps[e](c)) != sT.iota[Y.orig[e]](G.emaps[Y.bar[e]](c))) rep.hypothesis = false;
    rep.matches = rep.h1 == rep.expected;
    return rep;
}

// -- separating levels ------------------------------------------------------------------------

SeparatingLevel separating_level(const PathGroup& PG, const GogFiltration& F, const PathWord& w) {
    const auto& G = PG.gog();
    const auto& Y = G.graph;
    if (!PG.is_reduced(w)) throw Error("separating level: word is not reduced");
    if (static_cast<int>(F.F.size()) != Y.nv || !F.compatible(G))
        throw Error("separating level: filtration is not a compatible collection at every level");
    SeparatingLevel r;
    const int start = F.complete() ? 2 : 1;
    const int top = horizon_of(F);
    std::vector<int> verts{w.base};
    for (int e : w.edges) verts.push_back(Y.term[e]);
    auto least = [&](auto&& ok) {
        for (int n = start; n <= top; ++n)
            if (ok(n)) return n;
        return -1;
    };
    if (w.edges.empty()) {
        r.positions.push_back(0);
        r.per_position.push_back(least([&](int n) { return !F.F[w.base].term(n).contains(w.elems[0]); }));
        if (r.per_position[0] < 0) r.failure = "condition (A): g_0 lies in every term";
    } else {
        for (std::size_t i = 1; i < w.edges.size(); ++i) {
            int e = w.edges[i - 1];
            if (w.edges[i] != Y.bar[e]) continue;
            int t = Y.term[e];
            auto A = G.edge_image(e);
            int g = w.elems[i];
            r.positions.push_back(static_cast<int>(i));
            int n = least([&](int n) { return !join(A, F.F[t].term(n)).contains(g); });
            r.per_position.push_back(n);
            if (n < 0 && r.failure.empty())
                r.failure = "condition (B): g_" + std::to_string(i) + " lies in f_e(G_e) G_n for every n";
        }
    }
    if (r.failure.empty()) {
        int n = start;
        for (int x : r.per_position) n = std::max(n, x);
        r.level = n;
    }
    return r;
}

}  // namespace residuap
