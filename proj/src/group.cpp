#include "residuap/group.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace residuap {

bool is_prime(long long p) {
    if (p < 2) return false;
    for (long long d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

FiniteGroup::FiniteGroup(int order, std::vector<int> mult, std::string name)
    : n_(order), mult_(std::move(mult)), name_(std::move(name)) {
    if (n_ <= 0) throw Error("group order must be positive");
    if (mult_.size() != static_cast<std::size_t>(n_) * n_)
        throw Error("multiplication table has wrong size");
    for (int g = 0; g < n_; ++g)
        if (mul(0, g) != g || mul(g, 0) != g) throw Error("index 0 is not the identity");
    std::vector<int> seen(n_, -1);
    for (int a = 0; a < n_; ++a) {
        for (int b = 0; b < n_; ++b) {
            int c = mul(a, b);
            if (c < 0 || c >= n_) throw Error("table entry out of range");
            if (seen[c] == a) throw Error("row is not a permutation");
            seen[c] = a;
        }
    }
    std::fill(seen.begin(), seen.end(), -1);
    for (int b = 0; b < n_; ++b)
        for (int a = 0; a < n_; ++a) {
            int c = mul(a, b);
            if (seen[c] == b) throw Error("column is not a permutation");
            seen[c] = b;
        }
    inv_.assign(n_, -1);
    for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b)
            if (mul(a, b) == 0) {
                inv_[a] = b;
                break;
            }
    for (int a = 0; a < n_; ++a)
        if (mul(inv_[a], a) != 0) throw Error("element without two-sided inverse");
}

void FiniteGroup::check_axioms(std::uint64_t seed, int samples) const {
    auto assoc = [&](int a, int b, int c) {
        if (mul(mul(a, b), c) != mul(a, mul(b, c))) throw Error("associativity fails");
    };
    if (n_ <= 256) {
        for (int a = 0; a < n_; ++a)
            for (int b = 0; b < n_; ++b)
                for (int c = 0; c < n_; ++c) assoc(a, b, c);
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> d(0, n_ - 1);
        for (int i = 0; i < samples; ++i) assoc(d(rng), d(rng), d(rng));
    }
}

int FiniteGroup::pow(int a, long long e) const {
    if (e < 0) {
        a = inv(a);
        e = -e;
    }
    int r = 0;
    while (e) {
        if (e & 1) r = mul(r, a);
        a = mul(a, a);
        e >>= 1;
    }
    return r;
}

int FiniteGroup::element_order(int a) const {
    int k = 1;
    for (int x = a; x != 0; x = mul(x, a)) ++k;
    return k;
}

bool FiniteGroup::is_abelian() const {
    for (int a = 0; a < n_; ++a)
        for (int b = a + 1; b < n_; ++b)
            if (mul(a, b) != mul(b, a)) return false;
    return true;
}

int FiniteGroup::prime() const {
    if (n_ == 1) return 0;
    int m = n_, p = 2;
    while (m % p) ++p;
    while (m % p == 0) m /= p;
    return m == 1 ? p : -1;
}

bool FiniteGroup::is_p_group(int p) const { return n_ == 1 || prime() == p; }

GroupPtr make_group(int order, std::vector<int> mult, std::string name) {
    return std::make_shared<const FiniteGroup>(order, std::move(mult), std::move(name));
}

// -- subgroups ---------------------------------------------------------------

bool Subgroup::contains(int g) const { return std::binary_search(elems.begin(), elems.end(), g); }

bool Subgroup::subset_of(const Subgroup& o) const {
    return std::includes(o.elems.begin(), o.elems.end(), elems.begin(), elems.end());
}

std::vector<char> Subgroup::mask() const {
    std::vector<char> m(parent->order(), 0);
    for (int g : elems) m[g] = 1;
    return m;
}

Subgroup trivial_subgroup(const GroupPtr& G) { return {G, {0}}; }

Subgroup whole_group(const GroupPtr& G) {
    std::vector<int> e(G->order());
    std::iota(e.begin(), e.end(), 0);
    return {G, std::move(e)};
}

Subgroup subgroup_from_mask(const GroupPtr& G, const std::vector<char>& mask) {
    Subgroup s{G, {}};
    for (int g = 0; g < G->order(); ++g)
        if (mask[g]) s.elems.push_back(g);
    return s;
}

namespace {

// Grows a set closed under right multiplication by gens to one closed under gens+extra.
void close_under(const FiniteGroup& G, std::vector<char>& mask, std::vector<int>& list,
                 std::vector<int>& gens, const std::vector<int>& extra) {
    std::size_t old_gens = gens.size(), old_list = list.size();
    for (int g : extra) {
        if (g < 0 || g >= G.order()) throw Error("element index out of range");
        if (!mask[g] && std::find(gens.begin() + old_gens, gens.end(), g) == gens.end())
            gens.push_back(g);
    }
    if (gens.size() == old_gens) return;
    auto push = [&](int y) {
        if (!mask[y]) {
            mask[y] = 1;
            list.push_back(y);
        }
    };
    for (std::size_t i = 0; i < old_list; ++i)
        for (std::size_t j = old_gens; j < gens.size(); ++j) push(G.mul(list[i], gens[j]));
    for (std::size_t i = old_list; i < list.size(); ++i)
        for (std::size_t j = 0; j < gens.size(); ++j) push(G.mul(list[i], gens[j]));
}

Subgroup closure_of(const GroupPtr& G, std::vector<int> seed_elems) {
    std::vector<char> mask(G->order(), 0);
    std::vector<int> list{0};
    mask[0] = 1;
    std::vector<int> gens;
    close_under(*G, mask, list, gens, seed_elems);
    std::sort(list.begin(), list.end());
    return {G, std::move(list)};
}

}  // namespace

Subgroup subgroup_generated(const GroupPtr& G, const std::vector<int>& gens) {
    return closure_of(G, gens);
}

Subgroup normal_closure_in(const Subgroup& J, const std::vector<int>& gens) {
    const GroupPtr& G = J.parent;
    std::vector<int> jg = generators(J);
    std::vector<char> mask(G->order(), 0);
    std::vector<int> list{0};
    mask[0] = 1;
    std::vector<int> sg;
    close_under(*G, mask, list, sg, gens);
    for (std::size_t i = 0; i < sg.size(); ++i) {
        for (int j : jg) {
            int c = G->conj(sg[i], j);
            if (!mask[c]) close_under(*G, mask, list, sg, {c});
        }
    }
    std::sort(list.begin(), list.end());
    return {G, std::move(list)};
}

Subgroup normal_closure(const GroupPtr& G, const std::vector<int>& gens) {
    return normal_closure_in(whole_group(G), gens);
}

bool is_normal_in(const Subgroup& N, const Subgroup& J) {
    auto m = N.mask();
    for (int j : generators(J))
        for (int n : generators(N))
            if (!m[N.parent->conj(n, j)]) return false;
    return true;
}

bool is_normal(const Subgroup& N) { return is_normal_in(N, whole_group(N.parent)); }

Subgroup intersect(const Subgroup& A, const Subgroup& B) {
    Subgroup r{A.parent, {}};
    std::set_intersection(A.elems.begin(), A.elems.end(), B.elems.begin(), B.elems.end(),
                          std::back_inserter(r.elems));
    return r;
}

Subgroup join(const Subgroup& A, const Subgroup& B) {
    std::vector<int> g = generators(A);
    for (int x : generators(B)) g.push_back(x);
    return closure_of(A.parent, g);
}

Subgroup commutator(const Subgroup& A, const Subgroup& B) {
    const auto& G = *A.parent;
    std::vector<int> ga = generators(A), gb = generators(B), cs;
    for (int a : ga)
        for (int b : gb) cs.push_back(G.comm(a, b));
    return normal_closure_in(join(A, B), cs);
}

Subgroup power_subgroup(const Subgroup& A, long long e) {
    std::vector<int> ps;
    for (int a : A.elems) ps.push_back(A.parent->pow(a, e));
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    return closure_of(A.parent, ps);
}

Subgroup center(const GroupPtr& G) {
    auto gens = generators(whole_group(G));
    Subgroup z{G, {}};
    for (int x = 0; x < G->order(); ++x) {
        bool ok = true;
        for (int g : gens)
            if (G->mul(x, g) != G->mul(g, x)) {
                ok = false;
                break;
            }
        if (ok) z.elems.push_back(x);
    }
    return z;
}

std::vector<int> generators(const Subgroup& S) {
    const auto& G = *S.parent;
    std::vector<char> mask(G.order(), 0);
    std::vector<int> list{0};
    mask[0] = 1;
    std::vector<int> gens, picked;
    // prefer elements of large order: fewer generators
    std::vector<int> cand = S.elems;
    std::vector<int> ord(G.order(), 0);
    for (int x : cand) ord[x] = G.element_order(x);
    std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) { return ord[a] > ord[b]; });
    for (int x : cand) {
        if (list.size() == S.elems.size()) break;
        if (!mask[x]) {
            picked.push_back(x);
            close_under(G, mask, list, gens, {x});
        }
    }
    return picked;
}

namespace {

void collect_joins(const GroupPtr& G, std::vector<Subgroup> base, std::vector<Subgroup>& out) {
    std::set<std::vector<int>> seen;
    std::vector<Subgroup> all;
    for (auto& s : base)
        if (seen.insert(s.elems).second) all.push_back(s);
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = 0; j < base.size(); ++j) {
            if (base[j].subset_of(all[i])) continue;
            Subgroup s = join(all[i], base[j]);
            if (seen.insert(s.elems).second) all.push_back(s);
        }
    }
    Subgroup t = trivial_subgroup(G);
    if (seen.insert(t.elems).second) all.push_back(t);
    std::sort(all.begin(), all.end(), [](const Subgroup& a, const Subgroup& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a.elems < b.elems;
    });
    out = std::move(all);
}

}  // namespace

std::vector<Subgroup> normal_subgroups(const GroupPtr& G) {
    std::vector<Subgroup> base;
    std::vector<char> done(G->order(), 0);
    for (int x = 0; x < G->order(); ++x) {
        if (done[x]) continue;
        Subgroup n = normal_closure(G, {x});
        for (int y : n.elems)
            if (normal_closure(G, {y}) == n) done[y] = 1;
        done[x] = 1;
        base.push_back(n);
    }
    std::vector<Subgroup> out;
    collect_joins(G, base, out);
    return out;
}

std::vector<Subgroup> all_subgroups(const GroupPtr& G) {
    std::vector<Subgroup> base;
    std::vector<char> done(G->order(), 0);
    for (int x = 0; x < G->order(); ++x) {
        if (done[x]) continue;
        Subgroup c = subgroup_generated(G, {x});
        int o = c.size();
        for (int y : c.elems)
            if (G->element_order(y) == o) done[y] = 1;
        base.push_back(c);
    }
    std::vector<Subgroup> out;
    collect_joins(G, base, out);
    return out;
}

// -- homomorphisms --------------------------------------------------------------

bool Homomorphism::is_homomorphism() const {
    if (static_cast<int>(map.size()) != dom->order()) return false;
    for (int x : map)
        if (x < 0 || x >= cod->order()) return false;
    if (map[0] != 0) return false;
    auto gens = generators(whole_group(dom));
    for (int x = 0; x < dom->order(); ++x)
        for (int g : gens)
            if (map[dom->mul(x, g)] != cod->mul(map[x], map[g])) return false;
    return true;
}

void Homomorphism::verify() const {
    if (!is_homomorphism()) throw Error("map is not a homomorphism");
}

bool Homomorphism::is_injective() const { return kernel().trivial(); }

Subgroup Homomorphism::kernel() const {
    Subgroup k{dom, {}};
    for (int x = 0; x < dom->order(); ++x)
        if (map[x] == 0) k.elems.push_back(x);
    return k;
}

Subgroup Homomorphism::image() const { return image(whole_group(dom)); }

Subgroup Homomorphism::image(const Subgroup& S) const {
    std::vector<char> m(cod->order(), 0);
    for (int x : S.elems) m[map[x]] = 1;
    return subgroup_from_mask(cod, m);
}

Subgroup Homomorphism::preimage(const Subgroup& S) const {
    auto m = S.mask();
    Subgroup r{dom, {}};
    for (int x = 0; x < dom->order(); ++x)
        if (m[map[x]]) r.elems.push_back(x);
    return r;
}

Homomorphism identity_hom(const GroupPtr& G) {
    std::vector<int> m(G->order());
    std::iota(m.begin(), m.end(), 0);
    return {G, G, std::move(m)};
}

Homomorphism inclusion(const Subgroup& S, const GroupPtr& Sg) {
    return {Sg, S.parent, S.elems};
}

Homomorphism compose(const Homomorphism& second, const Homomorphism& first) {
    if (first.cod.get() != second.dom.get() && first.cod->order() != second.dom->order())
        throw Error("compose: domain mismatch");
    std::vector<int> m(first.dom->order());
    for (int x = 0; x < first.dom->order(); ++x) m[x] = second.map[first.map[x]];
    return {first.dom, second.cod, std::move(m)};
}

std::optional<Homomorphism> extend_hom(const GroupPtr& dom, const GroupPtr& cod,
                                       const std::vector<int>& gens,
                                       const std::vector<int>& imgs) {
    std::vector<int> m(dom->order(), -1);
    m[0] = 0;
    std::vector<int> queue{0};
    for (std::size_t i = 0; i < queue.size(); ++i) {
        int x = queue[i];
        for (std::size_t j = 0; j < gens.size(); ++j) {
            int y = dom->mul(x, gens[j]);
            int iy = cod->mul(m[x], imgs[j]);
            if (m[y] < 0) {
                m[y] = iy;
                queue.push_back(y);
            } else if (m[y] != iy) {
                return std::nullopt;
            }
        }
    }
    if (static_cast<int>(queue.size()) != dom->order()) throw Error("extend_hom: gens do not generate");
    return Homomorphism{dom, cod, std::move(m)};
}

namespace {

template <class Leaf>
void backtrack_images(const GroupPtr& dom, const GroupPtr& cod, const std::vector<int>& gens,
                      const std::vector<std::vector<int>>& cands, Leaf&& leaf) {
    std::vector<int> imgs(gens.size());
    std::vector<std::size_t> pos(gens.size(), 0);
    std::size_t k = 0;
    if (gens.empty()) {
        leaf(imgs);
        return;
    }
    while (true) {
        if (pos[k] < cands[k].size()) {
            imgs[k] = cands[k][pos[k]++];
            if (k + 1 == gens.size()) {
                if (!leaf(imgs)) return;
            } else {
                ++k;
                pos[k] = 0;
            }
        } else {
            if (k == 0) return;
            --k;
        }
    }
    (void)dom;
    (void)cod;
}

}  // namespace

std::vector<Homomorphism> all_homomorphisms(const GroupPtr& dom, const GroupPtr& cod,
                                            std::size_t limit) {
    auto gens = generators(whole_group(dom));
    std::vector<std::vector<int>> cands(gens.size());
    for (std::size_t i = 0; i < gens.size(); ++i) {
        int o = dom->element_order(gens[i]);
        for (int y = 0; y < cod->order(); ++y)
            if (o % cod->element_order(y) == 0) cands[i].push_back(y);
    }
    std::vector<Homomorphism> out;
    backtrack_images(dom, cod, gens, cands, [&](const std::vector<int>& imgs) {
        if (auto h = extend_hom(dom, cod, gens, imgs)) out.push_back(std::move(*h));
        return limit == 0 || out.size() < limit;
    });
    return out;
}

std::vector<Homomorphism> injective_homomorphisms(const GroupPtr& dom, const GroupPtr& cod) {
    auto gens = generators(whole_group(dom));
    std::vector<std::vector<int>> cands(gens.size());
    for (std::size_t i = 0; i < gens.size(); ++i) {
        int o = dom->element_order(gens[i]);
        for (int y = 0; y < cod->order(); ++y)
            if (cod->element_order(y) == o) cands[i].push_back(y);
    }
    std::vector<Homomorphism> out;
    if (cod->order() % dom->order()) return out;
    backtrack_images(dom, cod, gens, cands, [&](const std::vector<int>& imgs) {
        if (auto h = extend_hom(dom, cod, gens, imgs))
            if (h->is_injective()) out.push_back(std::move(*h));
        return true;
    });
    return out;
}

namespace {

std::vector<int> order_histogram(const FiniteGroup& G) {
    std::vector<int> h(G.order() + 1, 0);
    for (int x = 0; x < G.order(); ++x) ++h[G.element_order(x)];
    return h;
}

}  // namespace

std::optional<Homomorphism> find_isomorphism(const GroupPtr& G, const GroupPtr& H) {
    if (G->order() != H->order()) return std::nullopt;
    if (order_histogram(*G) != order_histogram(*H)) return std::nullopt;
    if (G->is_abelian() != H->is_abelian()) return std::nullopt;
    if (center(G).size() != center(H).size()) return std::nullopt;
    auto gens = generators(whole_group(G));
    std::vector<std::vector<int>> cands(gens.size());
    for (std::size_t i = 0; i < gens.size(); ++i) {
        int o = G->element_order(gens[i]);
        for (int y = 0; y < H->order(); ++y)
            if (H->element_order(y) == o) cands[i].push_back(y);
    }
    std::optional<Homomorphism> found;
    backtrack_images(G, H, gens, cands, [&](const std::vector<int>& imgs) {
        if (auto h = extend_hom(G, H, gens, imgs))
            if (h->is_injective()) {
                found = std::move(h);
                return false;
            }
        return true;
    });
    return found;
}

bool isomorphic(const GroupPtr& G, const GroupPtr& H) { return find_isomorphism(G, H).has_value(); }

Materialized materialize(const Subgroup& S, const std::string& name) {
    const auto& G = *S.parent;
    int n = S.size();
    std::vector<int> pos(G.order(), -1);
    for (int i = 0; i < n; ++i) pos[S.elems[i]] = i;
    std::vector<int> mult(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            int c = pos[G.mul(S.elems[i], S.elems[j])];
            if (c < 0) throw Error("materialize: set is not closed");
            mult[static_cast<std::size_t>(i) * n + j] = c;
        }
    auto g = make_group(n, std::move(mult), name);
    return {g, {g, S.parent, S.elems}};
}

Quotient quotient(const GroupPtr& G, const Subgroup& N) {
    if (!is_normal(N)) throw Error("quotient: subgroup is not normal");
    int n = G->order();
    std::vector<int> rep(n, -1);
    std::vector<int> reps;
    for (int g = 0; g < n; ++g) {
        if (rep[g] >= 0) continue;
        for (int x : N.elems) rep[G->mul(g, x)] = g;  // g is minimal: scanned in order
        reps.push_back(g);
    }
    std::vector<int> idx(n, -1);
    for (std::size_t i = 0; i < reps.size(); ++i) idx[reps[i]] = static_cast<int>(i);
    std::vector<int> proj(n);
    for (int g = 0; g < n; ++g) proj[g] = idx[rep[g]];
    int q = static_cast<int>(reps.size());
    std::vector<int> mult(static_cast<std::size_t>(q) * q);
    for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b) mult[static_cast<std::size_t>(a) * q + b] = proj[G->mul(reps[a], reps[b])];
    std::string nm = G->name().empty() ? "" : G->name() + "/N";
    auto Q = make_group(q, std::move(mult), nm);
    return {Q, {G, Q, std::move(proj)}, std::move(reps)};
}

Product direct_product(const GroupPtr& G, const GroupPtr& H, const std::string& name) {
    int a = G->order(), b = H->order(), n = a * b;
    std::vector<int> mult(static_cast<std::size_t>(n) * n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            mult[static_cast<std::size_t>(x) * n + y] =
                G->mul(x / b, y / b) * b + H->mul(x % b, y % b);
    auto P = make_group(n, std::move(mult),
                        name.empty() ? G->name() + "x" + H->name() : name);
    Product r{P, {G, P, {}}, {H, P, {}}, {P, G, {}}, {P, H, {}}};
    for (int x = 0; x < a; ++x) r.in1.map.push_back(x * b);
    for (int y = 0; y < b; ++y) r.in2.map.push_back(y);
    for (int x = 0; x < n; ++x) {
        r.pr1.map.push_back(x / b);
        r.pr2.map.push_back(x % b);
    }
    return r;
}

void GroupAction::verify() const {
    if (static_cast<int>(act.size()) != actor->order()) throw Error("action: wrong number of maps");
    for (const auto& m : act) {
        Homomorphism h{target, target, m};
        if (!h.is_homomorphism() || !h.is_injective()) throw Error("action: map is not an automorphism");
    }
    for (int a = 0; a < actor->order(); ++a)
        for (int b = 0; b < actor->order(); ++b) {
            const auto& ab = act[actor->mul(a, b)];
            for (int x = 0; x < target->order(); ++x)
                if (ab[x] != act[a][act[b][x]]) throw Error("action: not a homomorphism");
        }
}

Product semidirect_product(const GroupPtr& B, const GroupPtr& H, const GroupAction& action,
                           const std::string& name) {
    action.verify();
    int a = B->order(), b = H->order(), n = a * b;
    std::vector<int> mult(static_cast<std::size_t>(n) * n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            int b1 = x / b, h1 = x % b, b2 = y / b, h2 = y % b;
            mult[static_cast<std::size_t>(x) * n + y] =
                B->mul(b1, action.act[h1][b2]) * b + H->mul(h1, h2);
        }
    auto P = make_group(n, std::move(mult), name.empty() ? B->name() + ":" + H->name() : name);
    Product r{P, {B, P, {}}, {H, P, {}}, {P, B, {}}, {P, H, {}}};
    for (int x = 0; x < a; ++x) r.in1.map.push_back(x * b);
    for (int y = 0; y < b; ++y) r.in2.map.push_back(y);
    for (int x = 0; x < n; ++x) r.pr2.map.push_back(x % b);
    r.pr1.dom = nullptr;
    return r;
}

std::optional<Homomorphism> is_retract(const GroupPtr& G, const Subgroup& H, const Caps& caps) {
    // generating set of G starting with generators of H, whose images are forced
    auto hg = generators(H);
    std::vector<int> gens = hg;
    {
        Subgroup cur = subgroup_generated(G, gens);
        for (int x : generators(whole_group(G)))
            if (!cur.contains(x)) {
                gens.push_back(x);
                cur = subgroup_generated(G, gens);
            }
        for (int x = 0; x < G->order() && cur.size() < G->order(); ++x)
            if (!cur.contains(x)) {
                gens.push_back(x);
                cur = subgroup_generated(G, gens);
            }
    }
    std::vector<std::vector<int>> cands(gens.size());
    double space = 1;
    for (std::size_t i = 0; i < gens.size(); ++i) {
        if (i < hg.size()) {
            cands[i] = {hg[i]};
        } else {
            int o = G->element_order(gens[i]);
            for (int y : H.elems)
                if (o % G->element_order(y) == 0) cands[i].push_back(y);
            space *= static_cast<double>(cands[i].size());
        }
    }
    if (space > static_cast<double>(caps.order) * 4096.0)
        throw CapExceeded("is_retract: search space " + std::to_string(space) + " exceeds cap");
    std::optional<Homomorphism> found;
    backtrack_images(G, G, gens, cands, [&](const std::vector<int>& imgs) {
        if (auto h = extend_hom(G, G, gens, imgs)) {
            bool ok = true;
            for (int x : H.elems)
                if (h->map[x] != x) {
                    ok = false;
                    break;
                }
            if (ok) {
                found = std::move(h);
                return false;
            }
        }
        return true;
    });
    if (!found) return std::nullopt;
    // as a map G -> H
    Materialized m = materialize(H);
    std::vector<int> pos(G->order(), -1);
    for (int i = 0; i < H.size(); ++i) pos[H.elems[i]] = i;
    Homomorphism r{G, m.group, {}};
    for (int x : found->map) r.map.push_back(pos[x]);
    return r;
}

std::vector<std::vector<int>> automorphisms(const GroupPtr& G, const Caps& caps) {
    if (static_cast<std::size_t>(G->order()) > caps.aut)
        throw CapExceeded("automorphisms: order " + std::to_string(G->order()) + " exceeds cap " +
                          std::to_string(caps.aut));
    auto gens = generators(whole_group(G));
    std::vector<std::vector<int>> cands(gens.size());
    for (std::size_t i = 0; i < gens.size(); ++i) {
        int o = G->element_order(gens[i]);
        for (int y = 0; y < G->order(); ++y)
            if (G->element_order(y) == o) cands[i].push_back(y);
    }
    std::vector<std::vector<int>> out;
    backtrack_images(G, G, gens, cands, [&](const std::vector<int>& imgs) {
        if (auto h = extend_hom(G, G, gens, imgs))
            if (h->is_injective()) out.push_back(std::move(h->map));
        return true;
    });
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<int>> permutation_closure(int n, const std::vector<std::vector<int>>& gens,
                                                  std::size_t cap) {
    std::vector<int> id(n);
    std::iota(id.begin(), id.end(), 0);
    std::vector<std::vector<int>> list{id};
    std::set<std::vector<int>> seen{id};
    for (std::size_t i = 0; i < list.size(); ++i) {
        for (const auto& g : gens) {
            std::vector<int> c(n);
            for (int x = 0; x < n; ++x) c[x] = list[i][g[x]];
            if (seen.insert(c).second) {
                list.push_back(std::move(c));
                if (list.size() > cap) throw CapExceeded("permutation group exceeds cap");
            }
        }
    }
    std::sort(list.begin() + 1, list.end());
    return list;
}

GroupPtr permutation_group(const std::vector<std::vector<int>>& elems, const std::string& name) {
    int m = static_cast<int>(elems.size());
    std::map<std::vector<int>, int> idx;
    for (int i = 0; i < m; ++i) idx[elems[i]] = i;
    int d = m ? static_cast<int>(elems[0].size()) : 0;
    std::vector<int> mult(static_cast<std::size_t>(m) * m);
    std::vector<int> c(d);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            for (int x = 0; x < d; ++x) c[x] = elems[a][elems[b][x]];  // a after b
            auto it = idx.find(c);
            if (it == idx.end()) throw Error("permutation set not closed");
            mult[static_cast<std::size_t>(a) * m + b] = it->second;
        }
    return make_group(m, std::move(mult), name);
}

AutGroup automorphism_subgroup(const GroupPtr& G, const std::vector<std::vector<int>>& gens,
                               const Caps& caps) {
    auto perms = permutation_closure(G->order(), gens, caps.order);
    auto A = permutation_group(perms, "Aut");
    GroupAction act{A, G, perms};
    return {A, perms, act};
}

AutGroup automorphism_group(const GroupPtr& G, const Caps& caps) {
    auto perms = automorphisms(G, caps);
    // identity first
    std::vector<int> id(G->order());
    std::iota(id.begin(), id.end(), 0);
    auto it = std::find(perms.begin(), perms.end(), id);
    std::iter_swap(perms.begin(), it);
    std::sort(perms.begin() + 1, perms.end());
    if (perms.size() > caps.order) throw CapExceeded("automorphism group exceeds order cap");
    auto A = permutation_group(perms, "Aut(" + G->name() + ")");
    GroupAction act{A, G, perms};
    return {A, perms, act};
}

}  // namespace residuap
