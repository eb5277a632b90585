#include "residuap/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "residuap/catalog.hpp"

namespace residuap {

namespace {

void require_p_group(const GroupPtr& G, int p) {
    if (!is_prime(p)) throw Error("p = " + std::to_string(p) + " is not prime");
    if (G->order() > 1 && G->prime() != p)
        throw Error("group of order " + std::to_string(G->order()) + " is not a " + std::to_string(p) + "-group");
}

void same_algebra(const AlgebraElement& a, const AlgebraElement& b) {
    if (a.p != b.p || a.coeffs.size() != b.coeffs.size()) throw Error("algebra elements from different algebras");
}

}  // namespace

// -- F_p[G] -------------------------------------------------------------------

AlgebraElement AlgebraElement::operator+(const AlgebraElement& o) const {
    same_algebra(*this, o);
    AlgebraElement r = *this;
    for (std::size_t i = 0; i < coeffs.size(); ++i) r.coeffs[i] = (coeffs[i] + o.coeffs[i]) % p;
    return r;
}

AlgebraElement AlgebraElement::operator-(const AlgebraElement& o) const {
    same_algebra(*this, o);
    AlgebraElement r = *this;
    for (std::size_t i = 0; i < coeffs.size(); ++i) r.coeffs[i] = mod(coeffs[i] - o.coeffs[i], p);
    return r;
}

AlgebraElement AlgebraElement::operator*(const AlgebraElement& o) const {
    same_algebra(*this, o);
    AlgebraElement r{group, p, std::vector<int>(coeffs.size(), 0)};
    const FiniteGroup& G = *group;
    for (int a = 0; a < G.order(); ++a) {
        if (!coeffs[a]) continue;
        for (int b = 0; b < G.order(); ++b) {
            if (!o.coeffs[b]) continue;
            int& c = r.coeffs[G.mul(a, b)];
            c = (c + coeffs[a] * o.coeffs[b]) % p;
        }
    }
    return r;
}

bool AlgebraElement::zero() const {
    return std::all_of(coeffs.begin(), coeffs.end(), [](int c) { return c == 0; });
}

int AlgebraElement::augmentation() const {
    long long s = 0;
    for (int c : coeffs) s += c;
    return mod(s, p);
}

AlgebraElement algebra_unit(const GroupPtr& G, int p, int g) {
    AlgebraElement e{G, p, std::vector<int>(G->order(), 0)};
    e.coeffs[g] = 1;
    return e;
}

AlgebraElement algebra_hat(const GroupPtr& G, int p) { return {G, p, std::vector<int>(G->order(), 1 % p)}; }

std::vector<int> left_translate(const FiniteGroup& G, int g, const std::vector<int>& x) {
    std::vector<int> y(x.size());
    for (int h = 0; h < G.order(); ++h) y[G.mul(g, h)] = x[h];
    return y;
}

std::vector<int> right_translate(const FiniteGroup& G, const std::vector<int>& x, int g) {
    std::vector<int> y(x.size());
    for (int h = 0; h < G.order(); ++h) y[G.mul(h, g)] = x[h];
    return y;
}

bool IdealBasis::left_ideal() const {
    for (const auto& b : space.rows())
        for (int g = 1; g < group->order(); ++g)
            if (!space.contains(left_translate(*group, g, b))) return false;
    return true;
}

bool IdealBasis::two_sided() const {
    if (!left_ideal()) return false;
    for (const auto& b : space.rows())
        for (int g = 1; g < group->order(); ++g)
            if (!space.contains(right_translate(*group, b, g))) return false;
    return true;
}

IdealBasis augmentation_ideal(const GroupPtr& G, int p) {
    int n = G->order();
    IdealBasis I{G, p, RowSpace(p, n)};
    for (int g = 1; g < n; ++g) {
        std::vector<int> v(n, 0);
        v[g] = 1;
        v[0] = p - 1;
        I.space.add(v);
    }
    return I;
}

AugmentationPowers augmentation_ideal_powers(const GroupPtr& G, int p) {
    require_p_group(G, p);
    int n = G->order();
    AugmentationPowers out;
    IdealBasis cur = augmentation_ideal(G, p);
    while (true) {
        out.powers.push_back(cur);
        out.dims.push_back(cur.dim());
        if (cur.dim() == 0) break;
        IdealBasis next{G, p, RowSpace(p, n)};
        for (const auto& b : cur.space.rows())
            for (int g = 1; g < n; ++g) {
                auto y = right_translate(*G, b, g);
                for (int k = 0; k < n; ++k) y[k] = mod(y[k] - b[k], p);
                next.space.add(std::move(y));
                if (next.dim() + 1 == cur.dim()) break;
            }
        if (next.dim() >= cur.dim()) throw Error("augmentation ideal is not nilpotent");
        cur = std::move(next);
    }
    out.nilpotency_class = static_cast<int>(out.powers.size()) - 1;
    return out;
}

Filtration jennings_series(const GroupPtr& G, int p) {
    auto P = augmentation_ideal_powers(G, p);
    int n = G->order();
    std::vector<Subgroup> terms;
    for (const auto& I : P.powers) {
        std::vector<int> el;
        for (int g = 0; g < n; ++g) {
            std::vector<int> v(n, 0);
            v[0] = 1;
            v[g] = mod(v[g] - 1, p);
            if (I.contains(v)) el.push_back(g);
        }
        terms.push_back(Subgroup{G, el});
        if (el.size() == 1) break;
    }
    if (terms.empty() || !terms.back().trivial()) terms.push_back(trivial_subgroup(G));
    Filtration J = Filtration{G, std::move(terms)}.trimmed();
    if (!same_terms(J, dimension_series(G, p))) throw Error("Jennings series differs from the dimension series");
    return J;
}

int jennings_class_formula(const GroupPtr& G, int p) {
    require_p_group(G, p);
    auto D = dimension_series(G, p);
    int s = 0;
    for (int k = 1; k <= D.length(); ++k) {
        int q = D.term(k).size() / D.term(k + 1).size(), d = 0;
        while (q > 1) {
            q /= p;
            ++d;
        }
        s += k * d;
    }
    return (p - 1) * s;
}

IdealBasis annihilator_omega(const GroupPtr& G, int p) {
    require_p_group(G, p);
    int n = G->order();
    auto gens = generators(whole_group(G));
    // x (s - 1) = 0 for every generator s; one row per (s, h)
    Mat eq(n * gens.size(), Vec(n, 0));
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (int h = 0; h < n; ++h) {
            // coefficient of h in x (s - 1) is x_{h s^-1} - x_h
            int r = static_cast<int>(i) * n + h;
            eq[r][G->mul(h, G->inv(gens[i]))] = (eq[r][G->mul(h, G->inv(gens[i]))] + 1) % p;
            eq[r][h] = mod(eq[r][h] - 1, p);
        }
    IdealBasis A{G, p, RowSpace(p, n)};
    if (gens.empty()) {
        A.space.add(std::vector<int>(n, 1));
    } else {
        for (auto& v : nullspace(eq, p)) A.space.add(v);
    }
    RowSpace hat = span({std::vector<int>(n, 1)}, p, n);
    if (!(A.space == hat)) throw Error("annihilator of omega is not spanned by the sum of all elements");
    if (n > 1) {
        auto P = augmentation_ideal_powers(G, p);
        if (!(P.powers[P.nilpotency_class - 1].space == hat))
            throw Error("top power of omega is not spanned by the sum of all elements");
    }
    return A;
}

JenningsBasis::JenningsBasis(const GroupPtr& G, int p) : p_(p) {
    require_p_group(G, p);
    int n = G->order();
    auto D = dimension_series(G, p);
    std::vector<int> xs, ws;
    for (int k = 1; k <= D.length(); ++k) {
        Layer L(D.term(k), D.term(k + 1), p);
        for (int x : L.basis()) {
            xs.push_back(x);
            ws.push_back(k);
        }
    }
    Vec e(n, 0);
    e[0] = 1;
    rows_ = {e};
    weights_ = {0};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        Mat next;
        std::vector<int> nw;
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            Vec v = rows_[r];
            for (int a = 0; a < p; ++a) {
                next.push_back(v);
                nw.push_back(weights_[r] + a * ws[i]);
                auto t = right_translate(*G, v, xs[i]);
                for (int k = 0; k < n; ++k) t[k] = mod(t[k] - v[k], p);
                v = std::move(t);
            }
        }
        rows_ = std::move(next);
        weights_ = std::move(nw);
    }
    auto inv = inverse(rows_, p);
    if (!inv) throw Error("Jennings basis is not a basis");
    inverse_ = std::move(*inv);
    if (p_ == 2) {
        words_ = (n + 63) / 64;
        bits_.assign(static_cast<std::size_t>(n) * words_, 0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (inverse_[i][j]) bits_[static_cast<std::size_t>(i) * words_ + j / 64] |= std::uint64_t{1} << (j % 64);
    }
}

int JenningsBasis::valuation(const Vec& v) const {
    if (p_ == 2) {
        std::vector<std::uint64_t> acc(words_, 0);
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] & 1)
                for (int w = 0; w < words_; ++w) acc[w] ^= bits_[i * words_ + w];
        int best = -1;
        for (int w = 0; w < words_; ++w)
            for (std::uint64_t x = acc[w]; x; x &= x - 1) {
                int wt = weights_[w * 64 + __builtin_ctzll(x)];
                if (best < 0 || wt < best) best = wt;
            }
        return best;
    }
    auto c = vec_mat(v, inverse_, p_);
    int best = -1;
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i] && (best < 0 || weights_[i] < best)) best = weights_[i];
    return best;
}

int JenningsBasis::dim_power(int n) const {
    return static_cast<int>(std::count_if(weights_.begin(), weights_.end(), [n](int w) { return w >= n; }));
}

// -- wreath products ----------------------------------------------------------------

WreathProduct::WreathProduct(GroupPtr T, GroupPtr K) : T_(std::move(T)), K_(std::move(K)) {}

WreathProduct::Elem WreathProduct::identity() const { return {0, std::vector<int>(K_->order(), 0)}; }

WreathProduct::Elem WreathProduct::mul(const Elem& a, const Elem& b) const {
    Elem r;
    r.top = K_->mul(a.top, b.top);
    int k = K_->order();
    r.f.resize(k);
    for (int x = 0; x < k; ++x) r.f[x] = T_->mul(a.f[K_->mul(b.top, x)], b.f[x]);
    return r;
}

WreathProduct::Elem WreathProduct::inv(const Elem& a) const {
    Elem r;
    r.top = K_->inv(a.top);
    int k = K_->order();
    r.f.resize(k);
    for (int x = 0; x < k; ++x) r.f[x] = T_->inv(a.f[K_->mul(r.top, x)]);
    return r;
}

WreathProduct::Elem WreathProduct::top(int h) const { return {h, std::vector<int>(K_->order(), 0)}; }

WreathProduct::Elem WreathProduct::base(std::vector<int> f) const {
    if (static_cast<int>(f.size()) != K_->order()) throw Error("wreath: base map has the wrong length");
    return {0, std::move(f)};
}

double WreathProduct::log2_order() const {
    return K_->order() * std::log2(static_cast<double>(T_->order())) + std::log2(static_cast<double>(K_->order()));
}

std::optional<std::uint64_t> WreathProduct::order() const {
    if (log2_order() >= 63) return std::nullopt;
    std::uint64_t o = K_->order();
    for (int i = 0; i < K_->order(); ++i) o *= T_->order();
    return o;
}

std::uint64_t WreathProduct::code(const Elem& a) const {
    if (!order()) throw CapExceeded("wreath: element codes exceed 64 bits");
    std::uint64_t c = a.top;
    for (int x = K_->order() - 1; x >= 0; --x) c = c * T_->order() + a.f[x];
    return c;
}

WreathProduct::Elem WreathProduct::decode(std::uint64_t c) const {
    Elem e;
    e.f.resize(K_->order());
    for (int x = 0; x < K_->order(); ++x) {
        e.f[x] = static_cast<int>(c % T_->order());
        c /= T_->order();
    }
    e.top = static_cast<int>(c);
    return e;
}

bool WreathProduct::less(const Elem& a, const Elem& b) const {
    if (a.top != b.top) return a.top < b.top;
    for (int x = K_->order() - 1; x >= 0; --x)
        if (a.f[x] != b.f[x]) return a.f[x] < b.f[x];
    return false;
}

std::size_t ElemHash::operator()(const WreathProduct::Elem& e) const {
    std::size_t h = static_cast<std::size_t>(e.top) * 0x9e3779b97f4a7c15ull;
    for (int v : e.f) h = (h ^ static_cast<std::size_t>(v)) * 0x100000001b3ull;
    return h;
}

int WreathGroup::index(const WreathProduct::Elem& e) const { return static_cast<int>(product.code(e)); }

WreathGroup wreath(const GroupPtr& T, const GroupPtr& K, const Caps& caps) {
    WreathProduct P(T, K);
    auto o = P.order();
    if (!o || *o > caps.order)
        throw CapExceeded("wreath: order 2^" + std::to_string(P.log2_order()) + " exceeds the cap " +
                          std::to_string(caps.order));
    int n = static_cast<int>(*o);
    std::vector<WreathProduct::Elem> el(n);
    for (int i = 0; i < n; ++i) el[i] = P.decode(i);
    std::vector<int> mult(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) mult[static_cast<std::size_t>(a) * n + b] = static_cast<int>(P.code(P.mul(el[a], el[b])));
    auto W = make_group(n, std::move(mult), T->name() + " wr " + K->name());
    Homomorphism top{K, W, std::vector<int>(K->order())};
    for (int h = 0; h < K->order(); ++h) top.map[h] = static_cast<int>(P.code(P.top(h)));
    int nb = n / K->order();
    std::vector<int> be(nb);
    for (int i = 0; i < nb; ++i) be[i] = i;
    std::vector<int> codes(n);
    for (int i = 0; i < n; ++i) codes[i] = i;
    return WreathGroup{W, P, top, Subgroup{W, be}, codes};
}

int ImplicitSubgroup::index(const WreathProduct::Elem& e) const {
    auto it = std::lower_bound(elems.begin(), elems.end(), e, [](const WreathProduct::Elem& a, const WreathProduct::Elem& b) {
        if (a.top != b.top) return a.top < b.top;
        for (int x = static_cast<int>(a.f.size()) - 1; x >= 0; --x)
            if (a.f[x] != b.f[x]) return a.f[x] < b.f[x];
        return false;
    });
    if (it == elems.end() || !(*it == e)) throw Error("element outside the implicit subgroup");
    return static_cast<int>(it - elems.begin());
}

ImplicitSubgroup implicit_subgroup(const WreathProduct& W, const std::vector<WreathProduct::Elem>& gens,
                                   std::size_t cap) {
    std::unordered_map<WreathProduct::Elem, int, ElemHash> seen;
    std::vector<WreathProduct::Elem> el{W.identity()};
    std::vector<int> parent{-1}, via{-1};
    seen.emplace(el[0], 0);
    // right[i * g + j] = el[i] * gens[j]
    std::vector<int> right;
    int ng = static_cast<int>(gens.size());
    for (std::size_t i = 0; i < el.size(); ++i)
        for (int j = 0; j < ng; ++j) {
            auto y = W.mul(el[i], gens[j]);
            auto it = seen.find(y);
            if (it != seen.end()) {
                right.push_back(it->second);
                continue;
            }
            if (el.size() >= cap)
                throw CapExceeded("implicit wreath subgroup exceeds " + std::to_string(cap) + " elements");
            int id = static_cast<int>(el.size());
            seen.emplace(y, id);
            el.push_back(std::move(y));
            parent.push_back(static_cast<int>(i));
            via.push_back(j);
            right.push_back(id);
        }
    int n = static_cast<int>(el.size());
    // a * b = (a * parent(b)) * gen(b), filled in BFS order of b
    std::vector<int> tab(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a) tab[static_cast<std::size_t>(a) * n] = a;
    for (int b = 1; b < n; ++b)
        for (int a = 0; a < n; ++a) {
            int ap = tab[static_cast<std::size_t>(a) * n + parent[b]];
            tab[static_cast<std::size_t>(a) * n + b] = right[static_cast<std::size_t>(ap) * ng + via[b]];
        }
    // renumber by code order
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(), [&](int a, int b) { return W.less(el[a], el[b]); });
    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) pos[perm[i]] = i;
    std::vector<int> mult(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            mult[static_cast<std::size_t>(pos[a]) * n + pos[b]] = pos[tab[static_cast<std::size_t>(a) * n + b]];
    std::vector<WreathProduct::Elem> sorted(n);
    for (int i = 0; i < n; ++i) sorted[pos[i]] = std::move(el[i]);
    auto G = make_group(n, std::move(mult), "<" + W.base_factor()->name() + " wr " + W.top_group()->name() + ">");
    return ImplicitSubgroup{G, std::move(sorted)};
}

// -- standard embeddings ---------------------------------------------------------------

std::vector<int> standard_countermap(const Homomorphism& theta) {
    const FiniteGroup& A = *theta.dom;
    const FiniteGroup& H = *theta.cod;
    std::vector<int> pre(H.order(), -1);
    for (int a = 0; a < A.order(); ++a)
        if (pre[theta(a)] < 0) pre[theta(a)] = a;
    std::vector<int> img;
    for (int h = 0; h < H.order(); ++h)
        if (pre[h] >= 0) img.push_back(h);
    std::vector<int> c(H.order());
    for (int k = 0; k < H.order(); ++k) {
        int s = H.order();
        for (int i : img) s = std::min(s, H.mul(i, k));
        c[k] = pre[H.mul(k, H.inv(s))];
    }
    return c;
}

std::vector<WreathProduct::Elem> standard_embedding_elems(const Homomorphism& theta, const Homomorphism& x_in_t,
                                                          const std::vector<int>& cm) {
    const FiniteGroup& A = *theta.dom;
    const FiniteGroup& H = *theta.cod;
    Subgroup X = theta.kernel();
    if (x_in_t.dom->order() != X.size()) throw Error("standard embedding: map on the kernel has the wrong domain");
    if (!x_in_t.is_injective()) throw Error("standard embedding: kernel map is not injective");
    if (static_cast<int>(cm.size()) != H.order()) throw Error("standard embedding: countermap has the wrong length");
    std::vector<int> pos(A.order(), -1);
    for (int i = 0; i < X.size(); ++i) pos[X.elems[i]] = i;
    std::vector<WreathProduct::Elem> out(A.order());
    for (int a = 0; a < A.order(); ++a) {
        out[a].top = theta(a);
        out[a].f.resize(H.order());
        for (int k = 0; k < H.order(); ++k) {
            int v = A.mul(A.mul(A.inv(cm[H.mul(theta(a), k)]), a), cm[k]);
            if (pos[v] < 0) throw Error("standard embedding: countermap does not land in the kernel");
            out[a].f[k] = x_in_t(pos[v]);
        }
    }
    return out;
}

StandardEmbedding standard_embedding(const Homomorphism& theta, const Homomorphism& x_in_t, const Caps& caps) {
    auto W = wreath(x_in_t.cod, theta.cod, caps);
    auto el = standard_embedding_elems(theta, x_in_t, standard_countermap(theta));
    Homomorphism alpha{theta.dom, W.group, std::vector<int>(theta.dom->order())};
    for (int a = 0; a < theta.dom->order(); ++a) alpha.map[a] = W.index(el[a]);
    alpha.verify();
    if (!alpha.is_injective()) throw Error("standard embedding is not injective");
    return {std::move(W), std::move(alpha)};
}

StandardEmbedding standard_embedding(const Homomorphism& theta, const Caps& caps) {
    auto X = materialize(theta.kernel());
    return standard_embedding(theta, identity_hom(X.group), caps);
}

std::vector<int> base_vector(const WreathGroup& W, int w) {
    auto e = W.product.decode(W.element_code[w]);
    if (e.top != 0) throw Error("base_vector: element is not in the base group");
    return e.f;
}

// -- Buckley --------------------------------------------------------------------------

BuckleyReport buckley_check(int p, const GroupPtr& H, int n_max, const Caps& caps) {
    require_p_group(H, p);
    auto W = wreath(cyclic(p), H, caps);
    auto P = augmentation_ideal_powers(H, p);
    auto D = dimension_series(W.group, p);
    auto gp = lower_central_p_series(W.group, p);
    auto g = lower_central_series(W.group);
    int h = H->order();
    auto dim_of = [&](int size) {
        int d = 0;
        while (size > 1) {
            size /= p;
            ++d;
        }
        return d;
    };
    BuckleyReport rep;
    rep.n_max = n_max;
    rep.holds = true;
    for (int n = 0; n <= n_max; ++n) {
        RowSpace omega_n(p, h);
        if (n == 0)
            for (int k = 0; k < h; ++k) {
                std::vector<int> v(h, 0);
                v[k] = 1;
                omega_n.add(v);
            }
        else if (n <= static_cast<int>(P.powers.size()))
            omega_n = P.powers[n - 1].space;
        BuckleyLevel L;
        L.n = n;
        L.dim_omega = omega_n.dim();
        bool eq = true;
        int* dims[3] = {&L.dim_dimension, &L.dim_gamma_p, &L.dim_gamma};
        const Filtration* sers[3] = {&D, &gp, &g};
        for (int s = 0; s < 3; ++s) {
            Subgroup S = intersect(sers[s]->term(n + 1), W.base);
            int d = dim_of(S.size());
            *dims[s] = d;
            if (d != L.dim_omega) eq = false;
            for (int w : S.elems)
                if (!omega_n.contains(base_vector(W, w))) eq = false;
        }
        L.equal = eq;
        rep.holds = rep.holds && eq;
        rep.levels.push_back(L);
    }
    rep.wreath_class = g.length();
    rep.omega_class = P.nilpotency_class;
    return rep;
}

}  // namespace residuap
