#include "residuap/embed.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include "residuap/abelian.hpp"
#include "residuap/catalog.hpp"

namespace residuap {

namespace {

int group_prime(const GroupPtr& G, const GroupPtr& H) {
    int p = G->order() > 1 ? G->prime() : H->order() > 1 ? H->prime() : 2;
    if (p == 0) throw Error("amalgam: " + G->name() + " is not a p-group");
    if (!G->is_p_group(p) || !H->is_p_group(p)) throw Error("amalgam: groups are not p-groups for one prime");
    return p;
}

std::vector<int> positions(const Subgroup& S) {
    std::vector<int> pos(S.parent->order(), -1);
    for (int i = 0; i < S.size(); ++i) pos[S.elems[i]] = i;
    return pos;
}

bool is_power_of(long long n, int p) {
    if (n < 1) return false;
    while (n % p == 0) n /= p;
    return n == 1;
}

}  // namespace

// -- amalgams ---------------------------------------------------------------------

void Amalgam::verify() const {
    if (uG.dom.get() != U.get() && uG.dom->table() != U->table()) throw Error("amalgam: uG does not start at U");
    if (uH.dom.get() != U.get() && uH.dom->table() != U->table()) throw Error("amalgam: uH does not start at U");
    if (uG.cod->table() != G->table() || uH.cod->table() != H->table())
        throw Error("amalgam: embeddings land in the wrong groups");
    uG.verify();
    uH.verify();
    if (!uG.is_injective() || !uH.is_injective()) throw Error("amalgam: embeddings of U are not injective");
}

bool StrongEmbedding::check(const Amalgam& am) const {
    if (!alpha.is_homomorphism() || !beta.is_homomorphism()) return false;
    if (!alpha.is_injective() || !beta.is_injective()) return false;
    for (int u = 0; u < am.U->order(); ++u)
        if (alpha(am.uG(u)) != beta(am.uH(u))) return false;
    return intersect(alpha.image(), beta.image()) == alpha.image(am.uG.image());
}

FiberSum fiber_sum(const GroupPtr& A, const GroupPtr& B, const Homomorphism& phi, const Homomorphism& psi) {
    if (!A->is_abelian() || !B->is_abelian()) throw Error("fiber sum: groups must be abelian");
    if (phi.cod->table() != A->table() || psi.cod->table() != B->table() || phi.dom->table() != psi.dom->table())
        throw Error("fiber sum: maps do not match the groups");
    phi.verify();
    psi.verify();
    if (!phi.is_injective() || !psi.is_injective()) throw Error("fiber sum: maps from U must be injective");
    std::vector<Identification> ids;
    for (int u : generators(whole_group(phi.dom))) ids.push_back({0, phi(u), 1, psi(u)});
    auto c = abelian_colimit({A, B}, ids);
    if (!c.maps[0].is_injective() || !c.maps[1].is_injective()) throw Error("fiber sum: canonical map not injective");
    return {c.group, c.maps[0], c.maps[1]};
}

// -- filtered wreath products -------------------------------------------------------

WreathFiltration::WreathFiltration(GroupPtr T, Filtration FK, int p)
    : P_(T, FK.group),
      FK_(std::move(FK)),
      p_(p),
      JB_(FK_.group, p),
      LT_(whole_group(T), trivial_subgroup(T), p) {
    m_ = FK_.length();
    if (m_ < 0) throw Error("wreath filtration: top filtration has infinite length");
    for (int w : JB_.weights()) d_ = std::max(d_, w);
    for (int x = 0; x < T->order(); ++x) tc_.push_back(LT_.coords(x));
}

int WreathFiltration::top_depth(int k) const {
    int i = 1;
    while (i < m_ && FK_.term(i + 1).contains(k)) ++i;
    return i;
}

int WreathFiltration::depth(const WreathProduct::Elem& w) const {
    if (w.top != 0) return top_depth(w.top);
    int nk = FK_.group->order(), v = -1;
    for (int c = 0; c < LT_.dim(); ++c) {
        Vec f(nk);
        for (int k = 0; k < nk; ++k) f[k] = tc_[w.f[k]][c];
        int vc = JB_.valuation(f);
        if (vc >= 0 && (v < 0 || vc < v)) v = vc;
    }
    return v < 0 ? length() + 1 : m_ + 1 + v;
}

bool WreathFiltration::at_least(const WreathProduct::Elem& w, int i) const {
    if (i <= 1) return true;
    if (w.top != 0) return top_depth(w.top) >= i;
    if (i <= m_ + 1) return true;
    return depth(w) >= i;
}

WreathProduct::Elem WreathFiltration::base_at(int k, int c) const {
    std::vector<int> f(FK_.group->order(), 0);
    Vec e(LT_.dim(), 0);
    e[c] = 1;
    f[k] = LT_.element(e);
    return P_.base(f);
}

bool WreathFiltration::is_central_p() const {
    const GroupPtr& K = FK_.group;
    int t = LT_.dim();
    auto comm = [&](const WreathProduct::Elem& a, const WreathProduct::Elem& b) {
        return P_.mul(P_.mul(P_.inv(a), P_.inv(b)), P_.mul(a, b));
    };
    auto power = [&](const WreathProduct::Elem& a) {
        auto r = P_.identity();
        for (int j = 0; j < p_; ++j) r = P_.mul(r, a);
        return r;
    };
    std::vector<WreathProduct::Elem> gw;
    for (int k : generators(whole_group(K))) gw.push_back(P_.top(k));
    for (int c = 0; c < t; ++c) gw.push_back(base_at(0, c));
    for (int i = 1; i <= m_; ++i) {
        std::vector<WreathProduct::Elem> X;
        for (int c = 0; c < t; ++c) X.push_back(base_at(0, c));
        for (int k : generators(FK_.term(i))) X.push_back(P_.top(k));
        for (const auto& x : X) {
            if (!at_least(power(x), i + 1)) return false;
            for (const auto& g : gw)
                if (!at_least(comm(g, x), i + 1)) return false;
        }
    }
    if (t == 0) return true;
    // base terms: T (x) omega^w for the Jennings rows of weight w; the base is abelian
    // of exponent p, so only commutators with tops remain
    const auto& rows = JB_.rows();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::vector<int> f(K->order());
        for (int k = 0; k < K->order(); ++k) {
            Vec e(t, 0);
            e[0] = rows[r][k];
            f[k] = LT_.element(e);
        }
        auto x = P_.base(f);
        int need = m_ + 2 + JB_.weights()[r];
        if (depth(x) != need - 1) return false;
        for (int k : generators(whole_group(K)))
            if (!at_least(comm(P_.top(k), x), need)) return false;
    }
    return true;
}

// -- Higman embedding -------------------------------------------------------------

namespace {

struct Level {
    GroupPtr W;
    Homomorphism alpha, beta;
    Filtration F;
    double log2 = 0;
    bool full = false;
    bool implicit = false;
    std::shared_ptr<const WreathFiltration> WF;
    std::vector<WreathProduct::Elem> ia, ib;
};

Filtration two_term(const GroupPtr& T) { return Filtration{T, {whole_group(T), trivial_subgroup(T)}}; }

// S N for N = <z> central of order p
std::vector<int> times_central(const FiniteGroup& K, const std::vector<int>& S, int z, int p) {
    std::vector<int> out;
    out.reserve(S.size() * p);
    for (int s : S)
        for (int j = 0, x = s; j < p; ++j, x = K.mul(x, z)) out.push_back(x);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Quotients K by central subgroups of order p while the embeddings stay injective
// and strong, the pulled back filtrations of G and H stay the same, and the layers
// still meet in U.
void reduce_level(Level& L, const Amalgam& am, int p) {
    while (true) {
        const FiniteGroup& K = *L.W;
        if (K.order() == 1) return;
        auto Gs = pullback(L.F, L.alpha), Hs = pullback(L.F, L.beta);
        int nt = std::max({L.F.size(), Gs.size(), Hs.size()}) + 1;
        std::vector<std::vector<int>> lhsA, lhsB, rhs;
        for (int i = 1; i <= nt; ++i) {
            Subgroup next = L.F.term(i + 1);
            Subgroup Ui = am.uG.preimage(Gs.term(i));
            lhsA.push_back(join(L.alpha.image(Gs.term(i)), next).elems);
            lhsB.push_back(join(L.beta.image(Hs.term(i)), next).elems);
            rhs.push_back(join(L.alpha.image(am.uG.image(Ui)), next).elems);
        }
        Subgroup aG = L.alpha.image(), bH = L.beta.image(), aU = L.alpha.image(am.uG.image());
        auto ok = [&](int z) {
            if (aG.contains(z) || bH.contains(z)) return false;
            for (int i = 1; i <= nt; ++i) {
                const Subgroup& Ki = L.F.term(i);
                for (int side = 0; side < 2; ++side) {
                    const Subgroup& S = side ? bH : aG;
                    for (int x : S.elems) {
                        if (Ki.contains(x)) continue;
                        for (int j = 1, y = K.mul(x, z); j < p; ++j, y = K.mul(y, z))
                            if (Ki.contains(y)) return false;
                    }
                }
            }
            std::vector<int> m;
            auto a = times_central(K, aG.elems, z, p), b = times_central(K, bH.elems, z, p);
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(m));
            if (m != times_central(K, aU.elems, z, p)) return false;
            for (int i = 0; i < nt; ++i) {
                a = times_central(K, lhsA[i], z, p);
                b = times_central(K, lhsB[i], z, p);
                m.clear();
                std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(m));
                if (m != times_central(K, rhs[i], z, p)) return false;
            }
            return true;
        };
        int pick = -1;
        for (int z : center(L.W).elems)
            if (z != 0 && K.pow(z, p) == 0 && ok(z)) {
                pick = z;
                break;
            }
        if (pick < 0) return;
        auto Q = quotient(L.W, subgroup_generated(L.W, {pick}));
        std::vector<Subgroup> terms;
        for (const auto& t : L.F.terms) terms.push_back(Q.proj.image(t));
        L.alpha = compose(Q.proj, L.alpha);
        L.beta = compose(Q.proj, L.beta);
        L.W = Q.group;
        L.F = Filtration{Q.group, terms};
    }
}

Level higman_level(const GroupPtr& G, const GroupPtr& H, const GroupPtr& U, const Homomorphism& uG,
                   const Homomorphism& uH, const Filtration& FG, const Filtration& FH, int p, const Caps& caps,
                   bool top) {
    int n = std::max(FG.length(), FH.length());
    if (U->order() == G->order() && U->order() == H->order()) {
        Homomorphism beta{H, G, std::vector<int>(H->order())};
        for (int u = 0; u < U->order(); ++u) beta.map[uH(u)] = uG(u);
        Level L;
        L.W = G;
        L.alpha = identity_hom(G);
        L.beta = std::move(beta);
        L.F = FG;
        L.log2 = std::log2(static_cast<double>(G->order()));
        L.full = true;
        return L;
    }
    if (n <= 1) {
        auto fs = fiber_sum(G, H, uG, uH);
        Level L;
        L.W = fs.group;
        L.alpha = fs.inA;
        L.beta = fs.inB;
        L.F = two_term(fs.group);
        L.log2 = std::log2(static_cast<double>(fs.group->order()));
        L.full = true;
        return L;
    }
    Subgroup X = FG.term(n), Y = FH.term(n);
    Subgroup V = uG.preimage(X);
    if (V != uH.preimage(Y)) throw Error("higman: filtrations differ on U at level " + std::to_string(n));
    auto Xm = materialize(X), Ym = materialize(Y), Vm = materialize(V);
    auto px = positions(X), py = positions(Y);
    Homomorphism vx{Vm.group, Xm.group, {}}, vy{Vm.group, Ym.group, {}};
    for (int v : V.elems) {
        vx.map.push_back(px[uG(v)]);
        vy.map.push_back(py[uH(v)]);
    }
    auto fs = fiber_sum(Xm.group, Ym.group, vx, vy);

    auto QG = quotient(G, X), QH = quotient(H, Y), QU = quotient(U, V);
    Homomorphism bG{QU.group, QG.group, {}}, bH{QU.group, QH.group, {}};
    for (int u = 0; u < QU.group->order(); ++u) {
        bG.map.push_back(QG.proj(uG(QU.reps[u])));
        bH.map.push_back(QH.proj(uH(QU.reps[u])));
    }
    std::vector<Subgroup> tg, th;
    for (int i = 1; i <= n; ++i) {
        tg.push_back(QG.proj.image(FG.term(i)));
        th.push_back(QH.proj.image(FH.term(i)));
    }
    Level sub = higman_level(QG.group, QH.group, QU.group, bG, bH, Filtration{QG.group, tg},
                             Filtration{QH.group, th}, p, caps, false);
    const GroupPtr& K = sub.W;
    Homomorphism theta = compose(sub.alpha, QG.proj), phi = compose(sub.beta, QH.proj);
    if (theta.kernel() != X || phi.kernel() != Y) throw Error("higman: factor embedding is not injective");

    // matched countermaps: c(k) = u(k) g_{s(k)}, s(k) the least element of theta(U) k
    int nk = K->order();
    Homomorphism thU = compose(theta, uG);
    Subgroup IU = thU.image();
    std::vector<int> preU(nk, -1);
    for (int u = 0; u < U->order(); ++u)
        if (preU[thU(u)] < 0) preU[thU(u)] = u;
    std::vector<int> sU(nk), uk(nk);
    for (int k = 0; k < nk; ++k) {
        int s = nk;
        for (int x : IU.elems) s = std::min(s, K->mul(x, k));
        sU[k] = s;
        uk[k] = preU[K->mul(k, K->inv(s))];
    }
    auto matched = [&](const GroupPtr& A, const Homomorphism& th, const Homomorphism& uA) {
        Subgroup I = th.image();
        std::vector<int> pre(nk, -1);
        for (int a = 0; a < A->order(); ++a)
            if (pre[th(a)] < 0) pre[th(a)] = a;
        std::vector<int> c(nk);
        for (int k = 0; k < nk; ++k) {
            int s = sU[k], r = nk;
            for (int x : I.elems) r = std::min(r, K->mul(x, s));
            c[k] = A->mul(uA(uk[k]), pre[K->mul(s, K->inv(r))]);
        }
        return c;
    };
    auto aE = standard_embedding_elems(theta, fs.inA, matched(G, theta, uG));
    auto bE = standard_embedding_elems(phi, fs.inB, matched(H, phi, uH));

    auto WF = std::make_shared<const WreathFiltration>(fs.group, sub.F, p);
    const WreathProduct& P = WF->product();
    Level out;
    out.log2 = P.log2_order();
    auto ord = P.order();
    out.full = top && ord && *ord <= caps.order;
    std::vector<WreathProduct::Elem> el;
    Homomorphism alpha{G, nullptr, std::vector<int>(G->order())}, beta{H, nullptr, std::vector<int>(H->order())};
    if (out.full) {
        auto WG = wreath(fs.group, K, caps);
        out.W = WG.group;
        for (int w = 0; w < WG.group->order(); ++w) el.push_back(P.decode(WG.element_code[w]));
        for (int g = 0; g < G->order(); ++g) alpha.map[g] = WG.index(aE[g]);
        for (int h = 0; h < H->order(); ++h) beta.map[h] = WG.index(bE[h]);
    } else {
        std::vector<WreathProduct::Elem> gens;
        for (int g : generators(whole_group(G))) gens.push_back(aE[g]);
        for (int h : generators(whole_group(H))) gens.push_back(bE[h]);
        std::size_t cap = std::min(caps.wreath, caps.order);
        ImplicitSubgroup S;
        try {
            S = implicit_subgroup(P, gens, cap);
        } catch (const CapExceeded& e) {
            std::size_t coords = static_cast<std::size_t>(nk) * fs.group->order();
            if (!top || coords > caps.wreath)
                throw CapExceeded(std::string(e.what()) + " (T wr K has order 2^" + std::to_string(out.log2) + ")");
            out.implicit = true;
            out.WF = WF;
            out.ia = std::move(aE);
            out.ib = std::move(bE);
            return out;
        }
        out.W = S.group;
        el = S.elems;
        for (int g = 0; g < G->order(); ++g) alpha.map[g] = S.index(aE[g]);
        for (int h = 0; h < H->order(); ++h) beta.map[h] = S.index(bE[h]);
    }
    alpha.cod = beta.cod = out.W;
    alpha.verify();
    beta.verify();

    int nw = out.W->order();
    std::vector<int> depth(nw);
    for (int w = 0; w < nw; ++w) depth[w] = WF->depth(el[w]);
    std::vector<Subgroup> terms;
    for (int i = 1; i <= WF->length() + 1; ++i) {
        std::vector<char> mask(nw, 0);
        for (int w = 0; w < nw; ++w) mask[w] = depth[w] >= i;
        terms.push_back(subgroup_from_mask(out.W, mask));
    }
    out.F = make_filtration(out.W, terms);
    out.alpha = std::move(alpha);
    out.beta = std::move(beta);
    if (!top) reduce_level(out, Amalgam{G, H, U, uG, uH}, p);
    return out;
}

}  // namespace

bool layers_meet_in_U(const Amalgam& am, const StrongEmbedding& e, const Filtration& FW, const Filtration& Gs,
                      const Filtration& Hs) {
    int n = std::max({FW.size(), Gs.size(), Hs.size()});
    for (int i = 1; i <= n; ++i) {
        Subgroup next = FW.term(i + 1);
        Subgroup Ui = am.uG.preimage(Gs.term(i));
        if (Ui != am.uH.preimage(Hs.term(i))) return false;
        auto lhs = intersect(join(e.alpha.image(Gs.term(i)), next), join(e.beta.image(Hs.term(i)), next));
        auto rhs = join(e.alpha.image(am.uG.image(Ui)), next);
        if (lhs != rhs) return false;
    }
    return true;
}

Filtration pullback(const WreathEmbedding& e, const GroupPtr& A, bool second) {
    const auto& WF = *e.filtration;
    const auto& img = second ? e.beta : e.alpha;
    std::vector<int> d(A->order());
    for (int a = 0; a < A->order(); ++a) d[a] = WF.depth(img[a]);
    std::vector<Subgroup> terms;
    for (int i = 1; i <= WF.length() + 1; ++i) {
        std::vector<char> mask(A->order());
        for (int a = 0; a < A->order(); ++a) mask[a] = d[a] >= i;
        terms.push_back(subgroup_from_mask(A, mask));
    }
    return make_filtration(A, terms);
}

bool strong_in_wreath(const Amalgam& am, const WreathEmbedding& e) {
    const auto& P = e.filtration->product();
    auto less = [&](const auto& a, const auto& b) { return P.less(a, b); };
    auto hom_inj = [&](const GroupPtr& A, const std::vector<WreathProduct::Elem>& img) {
        if (static_cast<int>(img.size()) != A->order()) return false;
        for (int a = 0; a < A->order(); ++a)
            for (int b = 0; b < A->order(); ++b)
                if (!(P.mul(img[a], img[b]) == img[A->mul(a, b)])) return false;
        auto s = img;
        std::sort(s.begin(), s.end(), less);
        return std::adjacent_find(s.begin(), s.end()) == s.end();
    };
    if (!hom_inj(am.G, e.alpha) || !hom_inj(am.H, e.beta)) return false;
    for (int u = 0; u < am.U->order(); ++u)
        if (!(e.alpha[am.uG(u)] == e.beta[am.uH(u)])) return false;
    auto a = e.alpha, b = e.beta;
    std::sort(a.begin(), a.end(), less);
    std::sort(b.begin(), b.end(), less);
    std::vector<WreathProduct::Elem> m, u;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(m), less);
    for (int x = 0; x < am.U->order(); ++x) u.push_back(e.alpha[am.uG(x)]);
    std::sort(u.begin(), u.end(), less);
    return m == u;
}

bool layers_meet_in_U(const Amalgam& am, const WreathEmbedding& e, const Filtration& Gs, const Filtration& Hs) {
    const auto& WF = *e.filtration;
    const auto& P = WF.product();
    std::vector<WreathProduct::Elem> el = e.alpha;
    el.insert(el.end(), e.beta.begin(), e.beta.end());
    int ne = static_cast<int>(el.size()), ng = am.G->order();
    std::vector<int> D(static_cast<std::size_t>(ne) * ne);
    for (int x = 0; x < ne; ++x)
        for (int y = x; y < ne; ++y)
            D[x * ne + y] = D[y * ne + x] = WF.depth(P.mul(P.inv(el[x]), el[y]));
    int n = std::max({WF.length() + 1, Gs.size(), Hs.size()});
    for (int i = 1; i <= n; ++i) {
        Subgroup Ui = am.uG.preimage(Gs.term(i));
        if (Ui != am.uH.preimage(Hs.term(i))) return false;
        // cosets of W_{i+1}, named by their least member in el
        int need = std::min(i + 1, WF.length() + 1);
        auto cid = [&](int x) {
            for (int y = 0; y < ne; ++y)
                if (D[x * ne + y] >= need) return y;
            return x;
        };
        std::set<int> a, b, lhs, rhs;
        for (int g : Gs.term(i).elems) a.insert(cid(g));
        for (int h : Hs.term(i).elems) b.insert(cid(ng + h));
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(lhs, lhs.end()));
        for (int u : Ui.elems) rhs.insert(cid(am.uG(u)));
        if (lhs != rhs) return false;
    }
    return true;
}

HigmanResult higman_embed(const Amalgam& am, const Filtration& FG, const Filtration& FH, const Caps& caps) {
    am.verify();
    int p = group_prime(am.G, am.H);
    if (FG.group->table() != am.G->table() || FH.group->table() != am.H->table())
        throw Error("higman: filtrations belong to other groups");
    if (FG.length() < 0 || FH.length() < 0) throw Error("higman: filtrations must have finite length");
    if (!FG.is_central_p(p) || !FH.is_central_p(p)) throw Error("higman: filtrations must be central p-filtrations");
    auto [Ga, Ha] = align_filtrations(FG, FH, am.uG, am.uH);
    Level L = higman_level(am.G, am.H, am.U, am.uG, am.uH, Ga, Ha, p, caps, true);
    HigmanResult r;
    r.G_aligned = Ga;
    r.H_aligned = Ha;
    r.predicted_log2 = L.log2;
    r.full_wreath = L.full;
    if (L.implicit) {
        WreathEmbedding e{L.WF, L.ia, L.ib};
        r.G_star = pullback(e, am.G, false);
        r.H_star = pullback(e, am.H, true);
        r.strong = strong_in_wreath(am, e);
        r.central_p = L.WF->product().base_factor()->is_p_group(p) &&
                      (L.WF->top_filtration().group->order() == 1 ||
                       L.WF->top_filtration().group->is_p_group(p)) &&
                      L.WF->is_central_p();
        r.a2 = layers_meet_in_U(am, e, r.G_star, r.H_star);
        r.implicit = std::move(e);
    } else {
        r.embedding = {L.W, L.alpha, L.beta};
        r.W_filtration = L.F;
        r.G_star = pullback(L.F, L.alpha);
        r.H_star = pullback(L.F, L.beta);
        r.strong = r.embedding.check(am);
        r.central_p = L.W->is_p_group(p) && L.F.length() >= 0 && L.F.is_central_p(p);
        r.a2 = layers_meet_in_U(am, r.embedding, L.F, r.G_star, r.H_star);
    }
    auto io = common_stretch({{Ga, r.G_star}, {Ha, r.H_star}});
    r.a1 = io.has_value();
    if (io) r.iota = *io;
    if (!r.a1 || !r.a2 || !r.strong || !r.central_p)
        throw Error(std::string("higman: verification failed:") + (r.a1 ? "" : " A1") + (r.a2 ? "" : " A2") +
                    (r.strong ? "" : " strong") + (r.central_p ? "" : " central-p"));
    return r;
}

// -- amalgam search ---------------------------------------------------------------

namespace {

std::set<std::vector<int>> induced_terms(const Filtration& F, const Homomorphism& u) {
    std::set<std::vector<int>> s;
    for (int i = 1; i <= F.size() + 1; ++i) s.insert(u.preimage(F.term(i)).elems);
    return s;
}

std::optional<std::pair<Filtration, Filtration>> embeddable_from(const Amalgam& am, const std::vector<Filtration>& cg,
                                                                 const std::vector<Filtration>& ch) {
    std::map<std::set<std::vector<int>>, int> hk;
    for (int j = 0; j < static_cast<int>(ch.size()); ++j) hk.emplace(induced_terms(ch[j], am.uH), j);
    for (const auto& F : cg) {
        auto it = hk.find(induced_terms(F, am.uG));
        if (it != hk.end()) return std::make_pair(F, ch[it->second]);
    }
    return std::nullopt;
}

std::vector<std::vector<int>> orbit_reps(const std::vector<Homomorphism>& embs,
                                         const std::vector<std::vector<int>>& autos) {
    std::set<std::vector<int>> seen;
    std::vector<std::vector<int>> reps;
    for (const auto& e : embs) {
        std::vector<int> best = e.map;
        for (const auto& a : autos) {
            std::vector<int> c(e.map.size());
            for (std::size_t u = 0; u < c.size(); ++u) c[u] = a[e.map[u]];
            best = std::min(best, c);
        }
        if (seen.insert(best).second) reps.push_back(best);
    }
    std::sort(reps.begin(), reps.end());
    return reps;
}

}  // namespace

std::optional<std::pair<Filtration, Filtration>> amalgam_embeddable(const Amalgam& am, const Caps& caps) {
    am.verify();
    group_prime(am.G, am.H);
    std::size_t cap = caps.wreath;
    return embeddable_from(am, chief_filtrations(am.G, cap), chief_filtrations(am.H, cap));
}

Amalgam amalgam_of(const ScanEntry& e) {
    auto G = catalog_group(e.G), H = catalog_group(e.H), U = catalog_group(e.U);
    return {G, H, U, {U, G, e.uG}, {U, H, e.uH}};
}

std::vector<ScanEntry> amalgam_scan(bool stop_at_first_negative, const Caps& caps) {
    auto names = two_groups_upto16();
    std::map<std::string, GroupPtr> grp;
    std::map<std::string, std::vector<Filtration>> chief;
    std::map<std::string, std::vector<std::vector<int>>> aut;
    for (const auto& n : names) {
        grp[n] = catalog_group(n);
        chief[n] = chief_filtrations(grp[n], caps.wreath);
        aut[n] = automorphisms(grp[n], caps);
    }
    std::vector<ScanEntry> out;
    for (const char* un : {"C2", "C4", "C2^2"}) {
        auto U = catalog_group(un);
        std::map<std::string, std::vector<std::vector<int>>> reps;
        for (const auto& n : names)
            if (grp[n]->order() >= U->order()) reps[n] = orbit_reps(injective_homomorphisms(U, grp[n]), aut[n]);
        for (std::size_t i = 0; i < names.size(); ++i)
            for (std::size_t j = i; j < names.size(); ++j) {
                const auto &gn = names[i], &hn = names[j];
                if (!reps.count(gn) || !reps.count(hn)) continue;
                for (const auto& a : reps[gn])
                    for (const auto& b : reps[hn]) {
                        ScanEntry e{gn, hn, un, a, b, false};
                        Amalgam am{grp[gn], grp[hn], U, {U, grp[gn], a}, {U, grp[hn], b}};
                        e.embeddable = embeddable_from(am, chief[gn], chief[hn]).has_value();
                        out.push_back(e);
                        if (stop_at_first_negative && !e.embeddable) return out;
                    }
            }
    }
    return out;
}

// -- partial automorphisms --------------------------------------------------------

PartialAutomorphism partial_automorphism(const GroupPtr& G, const std::vector<int>& gens,
                                         const std::vector<int>& imgs) {
    if (gens.size() != imgs.size()) throw Error("partial automorphism: generator and image counts differ");
    Subgroup A = subgroup_generated(G, gens);
    auto Am = materialize(A);
    auto pos = positions(A);
    std::vector<int> local;
    for (int g : gens) local.push_back(pos[g]);
    auto h = extend_hom(Am.group, G, local, imgs);
    if (!h || !h->is_injective()) throw Error("partial automorphism: assignment does not extend to an isomorphism");
    PartialAutomorphism pa{A, h->image(), std::vector<int>(G->order(), -1)};
    for (int i = 0; i < A.size(); ++i) pa.map[A.elems[i]] = (*h)(i);
    return pa;
}

PartialAutomorphism total_automorphism(const GroupPtr& G, const std::vector<int>& perm) {
    Homomorphism h{G, G, perm};
    h.verify();
    if (!h.is_injective()) throw Error("automorphism is not bijective");
    return {whole_group(G), whole_group(G), perm};
}

void PartialAutomorphismSet::verify() const {
    const FiniteGroup& G = *group;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& it = items[i];
        std::string w = "partial automorphism " + std::to_string(i) + ": ";
        if (static_cast<int>(it.map.size()) != G.order()) throw Error(w + "map has the wrong length");
        if (subgroup_generated(group, it.A.elems) != it.A || subgroup_generated(group, it.B.elems) != it.B)
            throw Error(w + "domain or range is not a subgroup");
        std::set<int> img;
        for (int g = 0; g < G.order(); ++g) {
            bool in = it.A.contains(g);
            if (in != (it.map[g] >= 0)) throw Error(w + "map is not defined exactly on its domain");
            if (in) {
                if (!it.B.contains(it.map[g])) throw Error(w + "value outside the range");
                img.insert(it.map[g]);
            }
        }
        if (static_cast<int>(img.size()) != it.B.size()) throw Error(w + "map is not onto its range");
        for (int a : it.A.elems)
            for (int b : it.A.elems)
                if (it.map[G.mul(a, b)] != G.mul(it.map[a], it.map[b])) throw Error(w + "map is not a homomorphism");
    }
}

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Yes: return "yes";
        case Outcome::No: return "provably-no";
        default: return "unknown-at-depth";
    }
}

int exit_code(Outcome o) {
    switch (o) {
        case Outcome::Yes: return 0;
        case Outcome::No: return 10;
        default: return 20;
    }
}

namespace {

// conditions tying the level N (with next term M) to the partial automorphisms
bool step_ok(const PartialAutomorphismSet& pas, const Subgroup& N, const Subgroup& M) {
    const FiniteGroup& G = *pas.group;
    for (const auto& it : pas.items) {
        std::vector<int> img;
        for (int a : it.A.elems)
            if (M.contains(a)) img.push_back(it.map[a]);
        std::sort(img.begin(), img.end());
        if (img != intersect(it.B, M).elems) return false;
        for (int a : it.A.elems)
            if (N.contains(a) && !M.contains(G.mul(it.map[a], G.inv(a)))) return false;
    }
    return true;
}

}  // namespace

bool chatzidakis_condition(const Filtration& F, const PartialAutomorphismSet& pas) {
    if (F.length() < 0) return false;
    for (int k = 1; k <= F.length(); ++k)
        if (!step_ok(pas, F.term(k), F.term(k + 1))) return false;
    return true;
}

std::optional<Filtration> chatzidakis_filtration(const PartialAutomorphismSet& pas, const Caps& caps) {
    pas.verify();
    const GroupPtr& G = pas.group;
    if (static_cast<std::size_t>(G->order()) > caps.order)
        throw CapExceeded("criterion search: order " + std::to_string(G->order()) + " exceeds the cap");
    int p = G->order() > 1 ? G->prime() : 2;
    if (p == 0) throw Error("criterion search needs a p-group");
    auto ns = normal_subgroups(G);
    int top = static_cast<int>(ns.size()) - 1;
    std::vector<int> chain{top};
    std::vector<char> dead(ns.size(), 0);
    // first term G: A n G = A and B n G = B, so only the trivial-action part matters
    std::function<bool(int)> dfs = [&](int i) {
        if (ns[i].trivial()) return true;
        for (int j = 0; j < i; ++j) {
            if (dead[j] || ns[j].size() * p != ns[i].size() || !ns[j].subset_of(ns[i])) continue;
            if (!step_ok(pas, ns[i], ns[j])) continue;
            chain.push_back(j);
            if (dfs(j)) return true;
            chain.pop_back();
        }
        dead[i] = 1;
        return false;
    };
    if (!dfs(top)) return std::nullopt;
    std::vector<Subgroup> terms;
    for (int i : chain) terms.push_back(ns[i]);
    return Filtration{G, terms};
}

// -- flag certificates ------------------------------------------------------------

namespace {

struct Coords {
    Layer L;
    int p, r;
    explicit Coords(const GroupPtr& V, int p_)
        : L(whole_group(V), trivial_subgroup(V), p_), p(p_), r(L.dim()) {}
};

void require_elementary(const GroupPtr& V, int& p) {
    p = V->order() > 1 ? V->prime() : 2;
    if (p == 0 || !V->is_abelian()) throw Error("flag method needs an elementary abelian p-group");
    for (int x = 0; x < V->order(); ++x)
        if (V->pow(x, p) != 0) throw Error("flag method needs an elementary abelian p-group");
}

std::vector<int> matrix_perm(const Coords& c, const Mat& M, const GroupPtr& V) {
    std::vector<int> perm(V->order());
    for (int x = 0; x < V->order(); ++x) perm[x] = c.L.element(vec_mat(c.L.coords(x), M, c.p));
    return perm;
}

int generated_order(const Coords& c, const std::vector<Mat>& ms, const GroupPtr& V, std::size_t cap) {
    std::vector<std::vector<int>> perms;
    for (const auto& M : ms) perms.push_back(matrix_perm(c, M, V));
    return static_cast<int>(permutation_closure(V->order(), perms, cap).size());
}

std::size_t unitriangular_bound(int p, int r) {
    std::size_t b = 1;
    for (int i = 0; i < r * (r - 1) / 2; ++i) b *= static_cast<std::size_t>(p);
    return b;
}

}  // namespace

FlagCertificate flag_certificate(const PartialAutomorphismSet& pas, const Filtration& flag) {
    const GroupPtr& V = pas.group;
    int p;
    require_elementary(V, p);
    if (!chatzidakis_condition(flag, pas) || !is_chief(flag)) throw Error("flag does not satisfy the criterion");
    Coords c(V, p);
    int r = c.r;
    FlagCertificate cert;
    cert.p = p;
    std::vector<int> b(r);
    for (int j = 0; j < r; ++j) {
        const auto& Vj = flag.term(j + 1);
        const auto& Vn = flag.term(j + 2);
        for (int x : Vj.elems)
            if (!Vn.contains(x)) {
                b[j] = x;
                break;
            }
        cert.basis.push_back(c.L.coords(b[j]));
    }
    auto Binv = inverse(cert.basis, p);
    if (!Binv) throw Error("flag basis is singular");
    for (const auto& it : pas.items) {
        Mat C, Im;
        for (int j = 0; j < r; ++j) {
            const auto& Vj = flag.term(j + 1);
            const auto& Vn = flag.term(j + 2);
            int pick = -1;
            for (int a : it.A.elems)
                if (Vj.contains(a) && !Vn.contains(a)) {
                    pick = a;
                    break;
                }
            if (pick >= 0) {
                C.push_back(c.L.coords(pick));
                Im.push_back(c.L.coords(it.map[pick]));
            } else {
                C.push_back(c.L.coords(b[j]));
                Im.push_back(c.L.coords(b[j]));
            }
        }
        auto Cinv = inverse(C, p);
        if (!Cinv) throw Error("adapted basis is singular");
        Mat M = mat_mul(*Cinv, Im, p);
        cert.standard.push_back(M);
        cert.extensions.push_back(mat_mul(mat_mul(cert.basis, M, p), *Binv, p));
    }
    cert.group_order = generated_order(c, cert.standard, V, unitriangular_bound(p, r) + 1);
    if (!cert.verify(pas)) throw Error("flag certificate failed verification");
    return cert;
}

bool FlagCertificate::verify(const PartialAutomorphismSet& pas) const {
    const GroupPtr& V = pas.group;
    int q;
    require_elementary(V, q);
    if (q != p && V->order() > 1) return false;
    Coords c(V, p);
    int r = c.r;
    if (static_cast<int>(basis.size()) != r || extensions.size() != pas.items.size() ||
        standard.size() != pas.items.size())
        return false;
    auto Binv = inverse(basis, p);
    if (!Binv) return false;
    for (std::size_t i = 0; i < extensions.size(); ++i) {
        const Mat& E = extensions[i];
        for (int j = 0; j < r; ++j)
            for (int l = 0; l < r; ++l) {
                int want = j == l ? 1 : 0;
                if (l <= j && E[j][l] != want) return false;
            }
        if (mat_mul(mat_mul(*Binv, E, p), basis, p) != standard[i]) return false;
        for (int a : pas.items[i].A.elems)
            if (vec_mat(c.L.coords(a), standard[i], p) != c.L.coords(pas.items[i].map[a])) return false;
    }
    std::size_t bound = unitriangular_bound(p, r);
    int ord;
    try {
        ord = generated_order(c, standard, V, bound);
    } catch (const CapExceeded&) {
        return false;
    }
    return ord == group_order && is_power_of(ord, p);
}

std::optional<FlagCertificate> unipotent_flag_extend(const PartialAutomorphismSet& pas, const Caps& caps) {
    int p;
    require_elementary(pas.group, p);
    Coords c(pas.group, p);
    if (c.r > 6) throw CapExceeded("flag method: dimension " + std::to_string(c.r) + " exceeds the cap 6");
    auto F = chatzidakis_filtration(pas, caps);
    if (!F) return std::nullopt;
    return flag_certificate(pas, *F);
}

// -- inner extensions -------------------------------------------------------------

bool InnerExtension::verify(const PartialAutomorphismSet& pas) const {
    if (outcome != Outcome::Yes) return true;
    if (!Hp || conjugators.size() != pas.items.size()) return false;
    int p = pas.group->order() > 1 ? pas.group->prime() : Hp->prime();
    if (Hp->order() > 1 && !Hp->is_p_group(p)) return false;
    if (!embedding.is_homomorphism() || !embedding.is_injective()) return false;
    const FiniteGroup& P = *Hp;
    for (std::size_t i = 0; i < pas.items.size(); ++i) {
        int t = conjugators[i];
        for (int a : pas.items[i].A.elems)
            if (P.mul(P.mul(t, embedding(a)), P.inv(t)) != embedding(pas.items[i].map[a])) return false;
    }
    return true;
}

namespace {

void semidirect_result(const PartialAutomorphismSet& pas, const std::vector<std::vector<int>>& perms,
                       const Caps& caps, InnerExtension& r) {
    const GroupPtr& G = pas.group;
    auto A = automorphism_subgroup(G, perms, caps);
    auto P = semidirect_product(G, A.group, A.action, G->name() + ":A");
    r.Hp = P.group;
    r.embedding = P.in1;
    r.conjugators.clear();
    for (const auto& s : perms) {
        auto it = std::find(A.perms.begin(), A.perms.end(), s);
        r.conjugators.push_back(P.in2(static_cast<int>(it - A.perms.begin())));
    }
    r.outcome = Outcome::Yes;
}

InnerExtension extension_from(const PartialAutomorphismSet& pas, const Filtration& F, const Caps& caps) {
    const GroupPtr& G = pas.group;
    int p = G->prime();
    InnerExtension r;
    r.chief = F;
    bool elementary = G->is_abelian();
    for (int x = 0; x < G->order() && elementary; ++x) elementary = G->pow(x, p) == 0;
    if (elementary) {
        r.flag = flag_certificate(pas, F);
        Coords c(G, p);
        std::vector<std::vector<int>> perms;
        for (const auto& M : r.flag->standard) perms.push_back(matrix_perm(c, M, G));
        semidirect_result(pas, perms, caps, r);
        r.reason = "unitriangular extensions along a flag";
        return r;
    }
    std::vector<std::vector<int>> autos;
    try {
        autos = automorphisms(G, caps);
    } catch (const CapExceeded& e) {
        r.outcome = Outcome::Unknown;
        r.reason = std::string("certificate not found at search depth: ") + e.what();
        return r;
    }
    long long pmax = 1;
    for (auto q = autos.size(); q % p == 0; q /= p) pmax *= p;
    std::vector<std::vector<std::vector<int>>> cands(pas.items.size());
    for (std::size_t i = 0; i < pas.items.size(); ++i) {
        for (const auto& a : autos) {
            bool ext = true;
            for (int x : pas.items[i].A.elems) ext = ext && a[x] == pas.items[i].map[x];
            if (!ext) continue;
            std::vector<int> y = a;
            long long o = 1;
            for (; o <= pmax; ++o) {
                bool id = true;
                for (int x = 0; x < G->order(); ++x) id = id && y[x] == x;
                if (id) break;
                for (int x = 0; x < G->order(); ++x) y[x] = a[y[x]];
            }
            if (o <= pmax && is_power_of(o, p)) cands[i].push_back(a);
        }
        if (cands[i].empty()) {
            r.outcome = Outcome::Unknown;
            r.reason = "certificate not found at search depth: no p-automorphism of G extends item " + std::to_string(i);
            return r;
        }
    }
    long long budget = 1LL << (2 * std::max(1, caps.depth));
    std::vector<std::size_t> idx(cands.size(), 0);
    for (long long tries = 0; tries < budget; ++tries) {
        std::vector<std::vector<int>> gens;
        for (std::size_t i = 0; i < cands.size(); ++i) gens.push_back(cands[i][idx[i]]);
        try {
            auto cl = permutation_closure(G->order(), gens, static_cast<std::size_t>(pmax));
            if (is_power_of(static_cast<long long>(cl.size()), p)) {
                semidirect_result(pas, gens, caps, r);
                r.reason = "automorphisms of G generating a p-group";
                return r;
            }
        } catch (const CapExceeded&) {
        }
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == cands[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
    }
    r.outcome = Outcome::Unknown;
    r.reason = "certificate not found at search depth " + std::to_string(caps.depth);
    return r;
}

int inner_conjugator(const FiniteGroup& G, const PartialAutomorphism& it) {
    auto gens = it.A.elems;
    for (int t = 0; t < G.order(); ++t) {
        bool ok = true;
        for (int a : gens)
            if (G.mul(G.mul(t, a), G.inv(t)) != it.map[a]) {
                ok = false;
                break;
            }
        if (ok) return t;
    }
    return -1;
}

}  // namespace

InnerExtension inner_extension(const PartialAutomorphismSet& pas, const Caps& caps) {
    pas.verify();
    const GroupPtr& G = pas.group;
    if (G->order() > 1 && G->prime() == 0) throw Error("inner extension needs a p-group");
    InnerExtension r;
    std::vector<int> ts;
    for (const auto& it : pas.items) {
        int t = inner_conjugator(*G, it);
        if (t < 0) break;
        ts.push_back(t);
    }
    if (ts.size() == pas.items.size()) {
        r.outcome = Outcome::Yes;
        r.Hp = G;
        r.embedding = identity_hom(G);
        r.conjugators = ts;
        r.reason = "already inner in G";
    } else {
        auto F = chatzidakis_filtration(pas, caps);
        if (!F) {
            r.outcome = Outcome::No;
            r.reason = "no chief filtration satisfies the criterion (exhaustive)";
            return r;
        }
        r = extension_from(pas, *F, caps);
    }
    if (!r.verify(pas)) throw Error("inner extension failed verification");
    return r;
}

LayerwiseExtension layerwise_inner_extension(const PartialAutomorphismSet& pas, const Filtration& F,
                                             const Caps& caps) {
    pas.verify();
    const GroupPtr& G = pas.group;
    if (F.group->table() != G->table()) throw Error("layerwise: filtration of another group");
    if (F.length() < 0 || !F.is_central()) throw Error("layerwise: filtration must be central of finite length");
    for (int k = 1; k <= F.length() + 1; ++k)
        for (const auto& it : pas.items) {
            std::vector<int> img;
            for (int a : intersect(it.A, F.term(k)).elems) img.push_back(it.map[a]);
            std::sort(img.begin(), img.end());
            if (img != intersect(it.B, F.term(k)).elems) throw Error("layerwise: filtration is not invariant");
        }
    LayerwiseExtension out;
    std::vector<Subgroup> terms{F.term(1)};
    for (int j = 1; j <= F.length(); ++j) {
        const Subgroup &N = F.term(j), &M = F.term(j + 1);
        if (N == M) continue;
        auto Nm = materialize(N);
        auto pos = positions(N);
        std::vector<int> mloc;
        for (int x : M.elems) mloc.push_back(pos[x]);
        auto Q = quotient(Nm.group, Subgroup{Nm.group, mloc});
        auto img = [&](int x) { return Q.proj(pos[x]); };
        PartialAutomorphismSet L{Q.group, {}};
        for (const auto& it : pas.items) {
            std::vector<int> map(Q.group->order(), -1);
            for (int a : it.A.elems) {
                if (!N.contains(a)) continue;
                int q = img(a), v = img(it.map[a]);
                if (map[q] >= 0 && map[q] != v) throw Error("layerwise: induced map is not well defined");
                map[q] = v;
            }
            std::vector<int> dom, rng;
            for (int q = 0; q < Q.group->order(); ++q)
                if (map[q] >= 0) {
                    dom.push_back(q);
                    rng.push_back(map[q]);
                }
            std::sort(rng.begin(), rng.end());
            L.items.push_back({Subgroup{Q.group, dom}, Subgroup{Q.group, rng}, map});
        }
        auto LF = chatzidakis_filtration(L, caps);
        if (!LF) {
            out.failed_layer = j;
            auto global = chatzidakis_filtration(pas, caps);
            out.result.outcome = global ? Outcome::Unknown : Outcome::No;
            out.result.reason = "layer " + std::to_string(j) + " has no certificate" +
                                (global ? "" : "; no chief filtration of G satisfies the criterion");
            if (global) out.result.chief = global;
            return out;
        }
        for (int k = 2; k <= LF->size(); ++k) {
            std::vector<int> el;
            for (int x : N.elems)
                if (LF->term(k).contains(img(x))) el.push_back(x);
            terms.push_back(Subgroup{G, el});
        }
    }
    if (!terms.back().trivial()) terms.push_back(trivial_subgroup(G));
    Filtration R = make_filtration(G, terms);
    if (!is_chief(R) || !chatzidakis_condition(R, pas)) throw Error("layerwise: lifted filtration fails the criterion");
    out.refined = R;
    out.result = extension_from(pas, R, caps);
    if (!out.result.verify(pas)) throw Error("layerwise: extension failed verification");
    return out;
}

// -- mapping tori -----------------------------------------------------------------

MappingTorusReport mapping_torus_check(const GroupPtr& G, int p, const std::vector<std::vector<int>>& autos,
                                       const Caps& caps) {
    if (!is_prime(p) || !G->is_p_group(p)) throw Error("mapping torus: G must be a p-group");
    for (const auto& a : autos) {
        Homomorphism h{G, G, a};
        if (static_cast<int>(a.size()) != G->order() || !h.is_homomorphism() || !h.is_injective())
            throw Error("mapping torus: input is not an automorphism");
    }
    MappingTorusReport rep;
    auto gp = lower_central_p_series(G, p);
    rep.all_layers_p = true;
    for (int n = 1; n <= gp.length(); ++n) {
        Layer L(gp.term(n), gp.term(n + 1), p);
        int d = L.dim();
        std::vector<Mat> ms;
        for (const auto& a : autos) {
            Mat M;
            for (int b : L.basis()) M.push_back(L.coords(a[b]));
            ms.push_back(M);
        }
        int npts = 1;
        for (int i = 0; i < d; ++i) npts *= p;
        std::vector<std::vector<int>> perms;
        for (const auto& M : ms) {
            std::vector<int> perm(npts);
            for (int x = 0; x < npts; ++x) {
                Vec v(d);
                for (int i = 0, y = x; i < d; ++i, y /= p) v[i] = y % p;
                auto w = vec_mat(v, M, p);
                int z = 0;
                for (int i = d - 1; i >= 0; --i) z = z * p + w[i];
                perm[x] = z;
            }
            perms.push_back(perm);
        }
        std::size_t bound = unitriangular_bound(p, d);
        int ord = 0;
        if (bound <= caps.wreath) {
            try {
                ord = static_cast<int>(permutation_closure(npts, perms, bound).size());
            } catch (const CapExceeded&) {
                ord = 0;  // larger than any p-subgroup of GL(d, p)
            }
        } else {
            throw CapExceeded("mapping torus: layer of dimension " + std::to_string(d) + " too large");
        }
        bool pg = ord > 0 && is_power_of(ord, p);
        rep.layer_orders.push_back(ord);
        rep.all_layers_p = rep.all_layers_p && pg;
        if (n == 1) {
            rep.p_group = pg;
            rep.induced_order = ord;
            rep.matrices = ms;
        }
    }
    if (gp.length() == 0) rep.p_group = true;
    return rep;
}

}  // namespace residuap
