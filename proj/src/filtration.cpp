#include "residuap/filtration.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "residuap/linalg.hpp"

namespace residuap {

namespace {

void require_prime(int p) {
    if (!is_prime(p)) throw Error("p = " + std::to_string(p) + " is not prime");
}

long long ipow(long long b, int e) {
    long long r = 1;
    while (e-- > 0) r *= b;
    return r;
}

// x^{-1} y in N
bool congruent(const FiniteGroup& G, const std::vector<char>& N, int x, int y) {
    return N[G.mul(G.inv(x), y)] != 0;
}

}  // namespace

// -- Filtration ---------------------------------------------------------------

const Subgroup& Filtration::term(int n) const {
    if (n < 1) throw Error("filtration index must be >= 1");
    if (terms.empty()) throw Error("empty filtration");
    if (n > size()) return terms.back();
    return terms[n - 1];
}

int Filtration::length() const {
    for (int i = 0; i < size(); ++i)
        if (terms[i].trivial()) return i;
    return -1;
}

int Filtration::essential_length() const {
    int drops = 0;
    for (int i = 0; i + 1 < size(); ++i) drops += terms[i] != terms[i + 1];
    return drops;
}

bool Filtration::complete() const { return !terms.empty() && terms[0].size() == group->order(); }

bool Filtration::descending() const {
    for (int i = 0; i + 1 < size(); ++i)
        if (!terms[i + 1].subset_of(terms[i])) return false;
    return true;
}

bool Filtration::is_normal() const {
    return std::all_of(terms.begin(), terms.end(), [](const Subgroup& S) { return residuap::is_normal(S); });
}

bool Filtration::is_central() const {
    if (!descending()) return false;
    Subgroup G = whole_group(group);
    for (int n = 1; n <= size(); ++n)
        if (!commutator(G, term(n)).subset_of(term(n + 1))) return false;
    return true;
}

bool Filtration::is_central_p(int p) const {
    if (!is_central()) return false;
    for (int n = 1; n <= size(); ++n)
        if (!power_subgroup(term(n), p).subset_of(term(n + 1))) return false;
    return true;
}

Filtration Filtration::trimmed() const {
    Filtration out{group, terms};
    while (out.terms.size() > 1 && out.terms.back() == out.terms[out.terms.size() - 2]) out.terms.pop_back();
    return out;
}

void StretchMap::verify() const {
    if (iota.empty() || iota[0] != 1) throw Error("stretch map must start at 1");
    for (std::size_t i = 1; i < iota.size(); ++i)
        if (iota[i] <= iota[i - 1]) throw Error("stretch map must be strictly increasing");
}

Filtration make_filtration(const GroupPtr& G, std::vector<Subgroup> terms) {
    if (terms.empty()) throw Error("a filtration needs at least one term");
    for (const auto& t : terms)
        if (t.parent.get() != G.get() && t.parent->table() != G->table())
            throw Error("filtration term belongs to a different group");
    Filtration F{G, std::move(terms)};
    if (!F.descending()) throw Error("filtration terms are not descending");
    return F;
}

bool same_terms(const Filtration& F, const Filtration& H) {
    int n = std::max(F.size(), H.size());
    for (int i = 1; i <= n; ++i)
        if (F.term(i) != H.term(i)) return false;
    return true;
}

bool equivalent(const Filtration& F, const Filtration& H) {
    std::set<std::vector<int>> a, b;
    for (const auto& t : F.terms) a.insert(t.elems);
    for (const auto& t : H.terms) b.insert(t.elems);
    return a == b;
}

Filtration intersect(const Filtration& F, const Subgroup& K) {
    std::vector<Subgroup> t;
    for (const auto& x : F.terms) t.push_back(intersect(x, K));
    return Filtration{F.group, std::move(t)};
}

Filtration pullback(const Filtration& F, const Homomorphism& h) {
    std::vector<Subgroup> t;
    for (const auto& x : F.terms) t.push_back(h.preimage(x));
    return Filtration{h.dom, std::move(t)};
}

Filtration pushforward(const Filtration& F, const Homomorphism& h) {
    std::vector<Subgroup> t;
    for (const auto& x : F.terms) t.push_back(h.image(x));
    return Filtration{h.cod, std::move(t)};
}

Filtration stretch(const Filtration& F, const StretchMap& s0) {
    s0.verify();
    StretchMap s = s0;
    while (static_cast<int>(s.iota.size()) < F.size()) s.iota.push_back(s.iota.back() + 1);
    std::vector<Subgroup> t;
    int m = static_cast<int>(s.iota.size());
    for (int n = 1; n <= m; ++n) {
        int width = n < m ? s.iota[n] - s.iota[n - 1] : 1;
        for (int k = 0; k < width; ++k) t.push_back(F.term(n));
    }
    return Filtration{F.group, std::move(t)};
}

std::optional<StretchMap> common_stretch(const std::vector<std::pair<Filtration, Filtration>>& pairs) {
    if (pairs.empty()) return StretchMap{{1}};
    int N = 1, M = 1;
    for (const auto& [F, Fs] : pairs) {
        N = std::max(N, F.size());
        M = std::max(M, Fs.size());
    }
    auto match = [&](int n, int k) {
        for (const auto& [F, Fs] : pairs)
            if (F.term(n) != Fs.term(k)) return false;
        return true;
    };
    int kmax = M + N + 1;
    // dead[(n,k)]: no valid completion when block n starts at k
    std::set<std::pair<int, int>> dead;
    std::vector<int> iota;
    std::function<bool(int, int)> go = [&](int n, int k) -> bool {
        if (!match(n, k)) return false;
        if (n >= N && k >= M) {
            iota.push_back(k);
            return true;
        }
        if (dead.count({n, k})) return false;
        iota.push_back(k);
        for (int k2 = k + 1; k2 <= kmax; ++k2) {
            if (!match(n, k2 - 1)) break;  // block n must cover k..k2-1
            if (go(n + 1, k2)) return true;
        }
        iota.pop_back();
        dead.insert({n, k});
        return false;
    };
    if (!go(1, 1)) return std::nullopt;
    return StretchMap{iota};
}

// -- canonical series ---------------------------------------------------------

Filtration lower_central_series(const GroupPtr& G) {
    Subgroup W = whole_group(G);
    std::vector<Subgroup> t{W};
    while (true) {
        Subgroup next = commutator(W, t.back());
        if (next == t.back()) break;
        t.push_back(std::move(next));
    }
    return Filtration{G, std::move(t)};
}

Filtration lower_central_p_series(const GroupPtr& G, int p) {
    require_prime(p);
    Subgroup W = whole_group(G);
    std::vector<Subgroup> t{W};
    while (true) {
        Subgroup next = join(commutator(W, t.back()), power_subgroup(t.back(), p));
        if (next == t.back()) break;
        t.push_back(std::move(next));
    }
    return Filtration{G, std::move(t)};
}

namespace {

// index past which D_n is constant: c * p^J + 1, c the stabilization index of gamma
int dimension_horizon(const GroupPtr& G, int p, const Filtration& gamma) {
    int J = 0;
    for (int n = G->order(); n % p == 0; n /= p) ++J;
    long long h = static_cast<long long>(std::max(1, gamma.size())) * ipow(p, J) + 1;
    return static_cast<int>(std::min<long long>(h, 1 << 20));
}

}  // namespace

Filtration dimension_series_recursive(const GroupPtr& G, int p) {
    require_prime(p);
    Filtration gamma = lower_central_series(G);
    int horizon = dimension_horizon(G, p, gamma);
    Subgroup W = whole_group(G);
    std::vector<Subgroup> D{W};  // D[n-1] = D_n
    std::map<std::pair<std::vector<int>, std::vector<int>>, Subgroup> comm_cache;
    auto comm = [&](const Subgroup& A, const Subgroup& B) -> const Subgroup& {
        auto key = A.elems < B.elems ? std::make_pair(A.elems, B.elems) : std::make_pair(B.elems, A.elems);
        auto it = comm_cache.find(key);
        if (it == comm_cache.end()) it = comm_cache.emplace(key, commutator(A, B)).first;
        return it->second;
    };
    for (int n = 2; n <= horizon && !D.back().trivial(); ++n) {
        int c = (n + p - 1) / p;
        Subgroup acc = power_subgroup(D[c - 1], p);
        std::set<std::vector<int>> seen;
        for (int i = 1; i <= n / 2; ++i) {
            const Subgroup& C = comm(D[i - 1], D[n - i - 1]);
            if (seen.insert(C.elems).second) acc = join(acc, C);
        }
        D.push_back(std::move(acc));
    }
    return Filtration{G, std::move(D)}.trimmed();
}

Filtration dimension_series_lazard(const GroupPtr& G, int p) {
    require_prime(p);
    Filtration gamma = lower_central_series(G);
    int horizon = dimension_horizon(G, p, gamma);
    int J = 0;
    for (int n = G->order(); n % p == 0; n /= p) ++J;
    std::map<std::pair<int, int>, Subgroup> cache;  // (i, j) -> gamma_i^{p^j}
    std::vector<Subgroup> D;
    for (int n = 1; n <= horizon; ++n) {
        Subgroup acc = trivial_subgroup(G);
        // j beyond both J and log_p n repeats the i = 1 factor
        for (int j = 0;; ++j) {
            long long pj = ipow(p, j);
            int i = static_cast<int>((n + pj - 1) / pj);
            auto key = std::make_pair(std::min(i, gamma.size() + 1), j);
            auto it = cache.find(key);
            if (it == cache.end()) it = cache.emplace(key, power_subgroup(gamma.term(i), pj)).first;
            acc = join(acc, it->second);
            if (i == 1 && j >= J) break;
        }
        D.push_back(std::move(acc));
        if (D.back().trivial()) break;
    }
    return Filtration{G, std::move(D)}.trimmed();
}

Filtration dimension_series(const GroupPtr& G, int p) {
    Filtration a = dimension_series_recursive(G, p);
    Filtration b = dimension_series_lazard(G, p);
    if (!same_terms(a, b)) throw Error("dimension series: recursive definition and Lazard formula disagree");
    return a;
}

Filtration series(const GroupPtr& G, Series s, int p) {
    switch (s) {
        case Series::Gamma: return lower_central_series(G);
        case Series::GammaP: return lower_central_p_series(G, p);
        case Series::Dimension: return dimension_series(G, p);
    }
    throw Error("unknown series");
}

// -- layers -------------------------------------------------------------------

Layer::Layer(const Subgroup& A, const Subgroup& B, int p) : A_(A), B_(B), p_(p) {
    require_prime(p);
    const FiniteGroup& G = *A.parent;
    if (!B.subset_of(A)) throw Error("layer: bottom is not contained in top");
    if (!is_normal_in(B, A)) throw Error("layer: bottom is not normal in top");
    auto bm = B.mask();
    auto gens = generators(A);
    for (int x : gens) {
        if (!bm[G.pow(x, p)]) throw Error("layer: quotient is not of exponent p");
        for (int y : gens)
            if (!bm[G.comm(x, y)]) throw Error("layer: quotient is not abelian");
    }
    int idx = A.size() / B.size();
    int d = 0;
    for (int q = idx; q > 1; q /= p) {
        if (q % p) throw Error("layer: index is not a power of p");
        ++d;
    }
    coset_.assign(G.order(), -1);
    for (int x : A.elems) {
        if (coset_[x] >= 0) continue;
        int id = static_cast<int>(coset_rep_.size());
        coset_rep_.push_back(x);
        for (int b : B.elems) coset_[G.mul(x, b)] = id;
    }
    coset_coords_.assign(coset_rep_.size(), {});
    coset_coords_[coset_[0]] = std::vector<int>(d, 0);
    std::vector<int> reached{coset_[0]};
    for (int x : A.elems) {
        if (!coset_coords_[coset_[x]].empty() || d == 0) continue;
        int k = static_cast<int>(basis_.size());
        basis_.push_back(x);
        std::vector<int> add;
        for (int c : reached) {
            int r = coset_rep_[c];
            int y = r;
            for (int e = 1; e < p; ++e) {
                y = G.mul(y, x);
                auto v = coset_coords_[c];
                v[k] = e;
                coset_coords_[coset_[y]] = v;
                add.push_back(coset_[y]);
            }
        }
        reached.insert(reached.end(), add.begin(), add.end());
    }
    if (static_cast<int>(basis_.size()) != d) throw Error("layer: basis construction failed");
}

std::vector<int> Layer::coords(int x) const {
    if (x < 0 || x >= static_cast<int>(coset_.size()) || coset_[x] < 0)
        throw Error("layer: element outside the top term");
    return coset_coords_[coset_[x]];
}

int Layer::element(const std::vector<int>& c) const {
    for (std::size_t id = 0; id < coset_coords_.size(); ++id)
        if (coset_coords_[id] == c) return coset_rep_[id];
    throw Error("layer: coordinates out of range");
}

Layer layer(const Filtration& F, int n, int p) { return Layer(F.term(n), F.term(n + 1), p); }

// -- chief filtrations ------------------------------------------------------------

namespace {

// maximal members of {N normal : B <= N < A}, sorted lexicographically
std::vector<int> maximal_between(const std::vector<Subgroup>& normals, const Subgroup& A, const Subgroup& B) {
    std::vector<int> cand;
    for (int i = 0; i < static_cast<int>(normals.size()); ++i) {
        const auto& N = normals[i];
        if (N.size() < A.size() && B.subset_of(N) && N.subset_of(A)) cand.push_back(i);
    }
    std::vector<int> out;
    for (int i : cand) {
        bool maximal = true;
        for (int j : cand)
            if (j != i && normals[j].size() > normals[i].size() && normals[i].subset_of(normals[j])) {
                maximal = false;
                break;
            }
        if (maximal) out.push_back(i);
    }
    std::sort(out.begin(), out.end(), [&](int a, int b) { return normals[a].elems < normals[b].elems; });
    return out;
}

}  // namespace

Filtration chief_refinement(const Filtration& F) {
    if (!F.is_normal()) throw Error("chief refinement: filtration is not normal");
    if (F.length() < 0) throw Error("chief refinement: filtration does not reach the trivial group");
    auto normals = normal_subgroups(F.group);
    std::vector<Subgroup> out{F.terms[0]};
    for (int i = 1; i <= F.length(); ++i) {
        const Subgroup& B = F.terms[i];
        while (out.back() != B) {
            auto m = maximal_between(normals, out.back(), B);
            out.push_back(normals[m.front()]);
        }
    }
    Filtration R{F.group, std::move(out)};
    int p = F.group->prime();
    if (p)
        for (int n = 1; n < R.size(); ++n)
            if (R.term(n).size() != p * R.term(n + 1).size())
                throw Error("chief refinement: layer of order other than p in a p-group");
    return R;
}

bool is_chief(const Filtration& F0) {
    Filtration F = F0.trimmed();
    if (!F.complete() || F.length() < 0 || !F.is_normal()) return false;
    auto normals = normal_subgroups(F.group);
    for (int n = 1; n < F.size(); ++n) {
        const auto& A = F.term(n);
        const auto& B = F.term(n + 1);
        if (A == B) return false;
        auto m = maximal_between(normals, A, B);
        if (m.size() != 1 || normals[m[0]] != B) return false;
    }
    return true;
}

std::vector<Filtration> chief_filtrations(const GroupPtr& G, std::size_t cap) {
    auto normals = normal_subgroups(G);
    int n = static_cast<int>(normals.size());
    std::map<std::vector<int>, int> index;
    for (int i = 0; i < n; ++i) index[normals[i].elems] = i;
    Subgroup triv = trivial_subgroup(G);
    std::vector<std::vector<int>> covers(n);
    for (int i = 0; i < n; ++i) covers[i] = maximal_between(normals, normals[i], triv);
    std::vector<Filtration> out;
    std::vector<Subgroup> chain{whole_group(G)};
    std::function<void(int)> dfs = [&](int i) {
        if (normals[i].trivial()) {
            if (out.size() >= cap) throw CapExceeded("chief_filtrations: more than " + std::to_string(cap));
            out.push_back(Filtration{G, chain});
            return;
        }
        for (int j : covers[i]) {
            chain.push_back(normals[j]);
            dfs(j);
            chain.pop_back();
        }
    };
    dfs(index.at(chain[0].elems));
    return out;
}

std::pair<Filtration, Filtration> align_filtrations(const Filtration& F, const Filtration& H,
                                                    const Homomorphism& uF, const Homomorphism& uH) {
    if (uF.dom->table() != uH.dom->table()) throw Error("align: the two maps have different domains");
    Filtration PF = pullback(F, uF), PH = pullback(H, uH);
    if (!equivalent(PF, PH)) throw Error("align: filtrations induce inequivalent filtrations on the common subgroup");
    // runs of equal intersection, in order
    auto runs = [](const Filtration& P) {
        std::vector<std::pair<std::vector<int>, std::vector<int>>> r;  // (value, positions)
        for (int i = 0; i < P.size(); ++i) {
            if (r.empty() || r.back().first != P.terms[i].elems) r.push_back({P.terms[i].elems, {}});
            r.back().second.push_back(i);
        }
        return r;
    };
    auto rf = runs(PF), rh = runs(PH);
    if (rf.size() != rh.size()) throw Error("align: intersection chains have different shapes");
    std::vector<Subgroup> tf, th;
    for (std::size_t b = 0; b < rf.size(); ++b) {
        if (rf[b].first != rh[b].first) throw Error("align: intersection chains are ordered differently");
        std::size_t w = std::max(rf[b].second.size(), rh[b].second.size());
        for (std::size_t k = 0; k < w; ++k) {
            tf.push_back(F.terms[rf[b].second[std::min(k, rf[b].second.size() - 1)]]);
            th.push_back(H.terms[rh[b].second[std::min(k, rh[b].second.size() - 1)]]);
        }
    }
    return {Filtration{F.group, std::move(tf)}, Filtration{H.group, std::move(th)}};
}

// -- potency ----------------------------------------------------------------------

namespace {

// x -> x^e mod N on S, checked against every x in S and generators of S
bool power_is_morphism(const Subgroup& S, long long e, const std::vector<char>& N) {
    const FiniteGroup& G = *S.parent;
    auto gens = generators(S);
    for (int x : S.elems) {
        int xe = G.pow(x, e);
        for (int y : gens)
            if (!congruent(G, N, G.pow(G.mul(x, y), e), G.mul(xe, G.pow(y, e)))) return false;
    }
    return true;
}

std::vector<int> power_kernel(const Subgroup& S, long long e, const std::vector<char>& N) {
    std::vector<int> k;
    for (int x : S.elems)
        if (N[S.parent->pow(x, e)]) k.push_back(x);
    return k;
}

}  // namespace

PotencyReport classify_potency(const Filtration& F, int p, int horizon) {
    require_prime(p);
    if (horizon < 1) throw Error("potency horizon must be >= 1");
    if (!F.complete()) throw Error("potency: filtration is not complete");
    if (!F.is_central_p(p)) throw Error("potency: not a central p-filtration");
    const FiniteGroup& G = *F.group;
    PotencyReport rep;
    rep.horizon = horizon;
    rep.p_potent = rep.strongly = rep.uniformly = true;
    for (int n = 1; n <= horizon; ++n) {
        PotencyLevel L;
        L.n = n;
        auto N2 = F.term(n + 2).mask();
        L.p_morphism = power_is_morphism(F.term(1), ipow(p, n), N2);
        L.p_kernel = power_kernel(F.term(1), ipow(p, n), N2);
        L.p_kernel_is_G2 = L.p_kernel == F.term(2).elems;
        L.s_morphism = power_is_morphism(F.term(n), p, N2);
        L.s_kernel = power_kernel(F.term(n), p, N2);
        L.s_kernel_ok = L.s_kernel == F.term(n + 1).elems;
        L.phi_injective = L.s_morphism && L.s_kernel_ok;
        if (L.phi_injective) {
            std::set<int> cosets;
            const auto& T = F.term(n + 2);
            for (int x : F.term(n).elems) {
                int y = G.pow(x, p);
                int m = y;
                for (int t : T.elems) m = std::min(m, G.mul(y, t));
                cosets.insert(m);
            }
            L.phi_bijective =
                static_cast<long long>(cosets.size()) * T.size() == F.term(n + 1).size();
        }
        rep.p_potent = rep.p_potent && L.p_morphism && L.p_kernel_is_G2;
        rep.strongly = rep.strongly && L.s_morphism && L.s_kernel_ok;
        rep.uniformly = rep.uniformly && L.phi_bijective;
        rep.levels.push_back(std::move(L));
    }
    rep.uniformly = rep.uniformly && rep.strongly;
    return rep;
}

LayerMap power_layer_map(const Filtration& F, int p, int n, int m) {
    require_prime(p);
    if (n < 1 || m < 0) throw Error("power_layer_map: need n >= 1, m >= 0");
    const FiniteGroup& G = *F.group;
    if (p == 2 && n == 1 && !commutator(F.term(1), F.term(1)).subset_of(F.term(3)))
        throw Error("power_layer_map: p = 2, n = 1 and [G_1,G_1] is not contained in G_3");
    long long e = ipow(p, m);
    auto tgt = F.term(n + m + 1).mask();
    if (!power_is_morphism(F.term(n), e, tgt))
        throw Error("power_layer_map: x -> x^{p^m} is not a morphism on this layer");
    for (int x : F.term(n + 1).elems)
        if (!tgt[G.pow(x, e)]) throw Error("power_layer_map: G_{n+1} is not in the kernel");
    Layer src(F.term(n), F.term(n + 1), p), dst(F.term(n + m), F.term(n + m + 1), p);
    LayerMap L;
    L.n = n;
    L.m = m;
    L.dim_source = src.dim();
    L.dim_target = dst.dim();
    for (int b : src.basis()) L.matrix.push_back(dst.coords(G.pow(b, e)));
    L.rank = L.matrix.empty() ? 0 : rank(L.matrix, p);
    return L;
}

LayerMap power_layer_map(const GroupPtr& G, int p, int n, int m) {
    return power_layer_map(lower_central_p_series(G, p), p, n, m);
}

// -- retracts -----------------------------------------------------------------------

RetractReport retract_trace(const GroupPtr& G, const Subgroup& H, Series s, int p,
                            const Homomorphism* retraction) {
    std::optional<Homomorphism> found;
    if (!retraction) {
        found = is_retract(G, H);
        if (!found) throw Error("retract_trace: H is not a retract of G");
        retraction = &*found;
    }
    Materialized Hm = materialize(H);
    // retraction restricted to H must be the identity
    for (std::size_t i = 0; i < H.elems.size(); ++i)
        if (Hm.incl(retraction->map[H.elems[i]]) != H.elems[i])
            throw Error("retract_trace: supplied map does not restrict to the identity on H");
    Subgroup B = retraction->kernel();
    Filtration SG = series(G, s, p);
    Filtration SH = pushforward(series(Hm.group, s, p), Hm.incl);
    RetractReport rep;
    rep.levels = std::max(SG.size(), SH.size()) + 1;
    rep.intersections_equal = rep.product_formula = true;
    for (int n = 1; n <= rep.levels; ++n) {
        Subgroup sh = Subgroup{G, SH.term(n).elems};
        if (sh != intersect(SG.term(n), H)) rep.intersections_equal = false;
        if (join(sh, intersect(SG.term(n), B)) != SG.term(n)) rep.product_formula = false;
    }
    return rep;
}

// -- Hall-Petrescu and the Gamma structure map ------------------------------------------

bool hall_petrescu_holds(const GroupPtr& Gp, int p, int m_max) {
    Filtration gp = lower_central_p_series(Gp, p);
    const FiniteGroup& G = *Gp;
    for (int m = 1; m <= m_max; ++m) {
        auto N = gp.term(m + 2).mask();
        long long e = ipow(p, m);
        for (int x = 0; x < G.order(); ++x) {
            int xe = G.pow(x, e);
            for (int y = 0; y < G.order(); ++y) {
                int lhs = G.pow(G.mul(x, y), e);
                int rhs = G.mul(xe, G.pow(y, e));
                if (p == 2) rhs = G.mul(rhs, G.pow(G.comm(x, y), e / 2));
                if (!congruent(G, N, lhs, rhs)) return false;
            }
        }
    }
    return true;
}

bool gamma_structure_surjective(const GroupPtr& Gp, int p, int n) {
    if (n < 1) throw Error("gamma_structure_surjective: n must be >= 1");
    Filtration g = lower_central_series(Gp);
    Filtration gp = lower_central_p_series(Gp, p);
    Quotient Q = quotient(Gp, gp.term(n + 1));
    const FiniteGroup& G = *Gp;
    std::set<int> S{0};
    for (int i = 1; i <= n; ++i) {
        long long e = ipow(p, n - i);
        std::set<int> P;
        for (int x : g.term(i).elems) P.insert(Q.proj(G.pow(x, e)));
        std::set<int> next;
        for (int a : S)
            for (int b : P) next.insert(Q.group->mul(a, b));
        S = std::move(next);
    }
    std::set<int> target;
    for (int x : gp.term(n).elems) target.insert(Q.proj(x));
    return S == target;
}

}  // namespace residuap
