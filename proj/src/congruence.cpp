#include "residuap/congruence.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace residuap {

namespace {

long long ipow(long long b, int e) {
    long long r = 1;
    while (e-- > 0) r *= b;
    return r;
}

long long md(long long a, long long m) {
    a %= m;
    return a < 0 ? a + m : a;
}

struct M2 {
    long long a, b, c, d;
};

M2 mul2(const M2& x, const M2& y, long long m) {
    return {(x.a * y.a + x.b * y.c) % m, (x.a * y.b + x.b * y.d) % m, (x.c * y.a + x.d * y.c) % m,
            (x.c * y.b + x.d * y.d) % m};
}

M2 inv2(const M2& x, long long m) { return {x.d, md(-x.b, m), md(-x.c, m), x.a}; }

M2 pow2(M2 x, long long e, long long m) {
    M2 r{1, 0, 0, 1};
    while (e) {
        if (e & 1) r = mul2(r, x, m);
        x = mul2(x, x, m);
        e >>= 1;
    }
    return r;
}

std::uint64_t code2(const M2& x, long long m) {
    return static_cast<std::uint64_t>(((x.a * m + x.b) * m + x.c) * m + x.d);
}

M2 decode2(std::uint64_t c, long long m) {
    auto um = static_cast<std::uint64_t>(m);
    M2 x;
    x.d = static_cast<long long>(c % um);
    c /= um;
    x.c = static_cast<long long>(c % um);
    c /= um;
    x.b = static_cast<long long>(c % um);
    x.a = static_cast<long long>(c / um);
    return x;
}

M2 to2(const ModMatrix& M) { return {M.a[0], M.a[1], M.a[2], M.a[3]}; }
ModMatrix from2(const M2& x, long long m) {
    ModMatrix M;
    M.n = 2;
    M.m = m;
    M.a = {x.a, x.b, x.c, x.d};
    return M;
}

// largest i <= k with x = 1 mod p^i
int level2(const M2& x, int p, int k) {
    int i = 0;
    long long q = 1;
    while (i < k) {
        q *= p;
        if (md(x.a - 1, q) || x.b % q || x.c % q || md(x.d - 1, q)) break;
        ++i;
    }
    return i;
}

// BFS closure of a set of 2x2 matrices
std::vector<std::uint64_t> closure2(const std::vector<M2>& gens, long long m) {
    std::unordered_set<std::uint64_t> seen;
    std::vector<M2> queue{{1, 0, 0, 1}};
    seen.insert(code2(queue[0], m));
    for (std::size_t h = 0; h < queue.size(); ++h)
        for (const auto& g : gens) {
            M2 y = mul2(queue[h], g, m);
            if (seen.insert(code2(y, m)).second) queue.push_back(y);
        }
    std::vector<std::uint64_t> out(seen.begin(), seen.end());
    std::sort(out.begin(), out.end());
    return out;
}

// greedy generating set of a finite set of matrices closed under multiplication
std::vector<M2> greedy_generators(const std::vector<std::uint64_t>& elems, long long m) {
    std::vector<M2> gens;
    std::vector<std::uint64_t> cur = closure2(gens, m);
    for (auto c : elems) {
        if (std::binary_search(cur.begin(), cur.end(), c)) continue;
        gens.push_back(decode2(c, m));
        cur = closure2(gens, m);
        if (cur.size() == elems.size()) break;
    }
    return gens;
}

}  // namespace

ModMatrix ModMatrix::identity(int n, long long m) {
    ModMatrix I;
    I.n = n;
    I.m = m;
    I.a.assign(static_cast<std::size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i) I.a[static_cast<std::size_t>(i) * n + i] = 1 % m;
    return I;
}

ModMatrix ModMatrix::operator*(const ModMatrix& o) const {
    ModMatrix r;
    r.n = n;
    r.m = m;
    r.a.assign(a.size(), 0);
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) {
            long long x = at(i, l);
            if (!x) continue;
            for (int j = 0; j < n; ++j) {
                auto& t = r.a[static_cast<std::size_t>(i) * n + j];
                t = (t + x * o.at(l, j)) % m;
            }
        }
    return r;
}

ModMatrix ModMatrix::pow(long long e) const {
    ModMatrix r = identity(n, m), x = *this;
    while (e) {
        if (e & 1) r = r * x;
        x = x * x;
        e >>= 1;
    }
    return r;
}

long long ModMatrix::det() const {
    IMat M(n, std::vector<long long>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M[i][j] = at(i, j);
    return md(idet(M), m);
}

bool ModMatrix::is_identity() const { return *this == identity(n, m); }

ModMatrix ModMatrix::reduce(long long m2) const {
    if (m2 <= 0 || m % m2) throw Error("reduce: modulus does not divide");
    ModMatrix r = *this;
    r.m = m2;
    for (auto& x : r.a) x %= m2;
    return r;
}

long long sl2_order_formula(int p, int k) { return ipow(p, 3 * k - 2) * (static_cast<long long>(p) * p - 1); }

CongruenceTower::CongruenceTower(int p, int k, const Caps& caps) : p_(p), k_(k) {
    if (!is_prime(p) || k < 1) throw Error("congruence tower: need a prime p and k >= 1");
    if (ipow(p, 3 * k) > static_cast<long long>(caps.wreath)) throw CapExceeded("congruence tower: p^(3k) exceeds the cap");
    m_ = ipow(p, k);
    const long long m = m_;
    for (long long a = 0; a < m; ++a) {
        bool unit = a % p != 0;
        long long ainv = 0;
        if (unit)
            for (long long t = 1; t < m; ++t)
                if (a * t % m == 1) {
                    ainv = t;
                    break;
                }
        for (long long b = 0; b < m; ++b)
            for (long long c = 0; c < m; ++c) {
                long long rhs = (1 + b * c) % m;
                if (unit) {
                    codes_.push_back(code2({a, b, c, rhs * ainv % m}, m));
                } else {
                    for (long long d = 0; d < m; ++d)
                        if (a * d % m == rhs) codes_.push_back(code2({a, b, c, d}, m));
                }
            }
    }
    if (static_cast<long long>(codes_.size()) != sl2_order_formula(p, k))
        throw Error("congruence tower: order formula violated");
}

std::uint64_t CongruenceTower::code(const ModMatrix& M) const { return code2(to2(M), m_); }

ModMatrix CongruenceTower::element(std::size_t i) const { return from2(decode2(codes_.at(i), m_), m_); }

std::size_t CongruenceTower::index(const ModMatrix& M) const {
    auto c = code(M);
    auto it = std::lower_bound(codes_.begin(), codes_.end(), c);
    if (it == codes_.end() || *it != c) throw Error("congruence tower: not an element");
    return static_cast<std::size_t>(it - codes_.begin());
}

int CongruenceTower::level(const ModMatrix& M) const { return level2(to2(M), p_, k_); }

std::vector<std::size_t> CongruenceTower::members(int i) const {
    std::vector<std::size_t> out;
    for (std::size_t x = 0; x < codes_.size(); ++x)
        if (level2(decode2(codes_[x], m_), p_, k_) >= i) out.push_back(x);
    return out;
}

GroupPtr CongruenceTower::materialize(int i, const Caps& caps) const {
    auto mem = members(i);
    if (static_cast<long long>(mem.size()) > static_cast<long long>(caps.order)) throw CapExceeded("congruence tower: subgroup exceeds order cap");
    std::vector<std::uint64_t> cs;
    const auto id = code2({1, 0, 0, 1}, m_);
    cs.push_back(id);
    for (auto x : mem)
        if (codes_[x] != id) cs.push_back(codes_[x]);
    std::vector<std::uint64_t> sorted = cs;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> pos(cs.size());
    for (std::size_t j = 0; j < cs.size(); ++j)
        pos[std::lower_bound(sorted.begin(), sorted.end(), cs[j]) - sorted.begin()] = static_cast<int>(j);
    const int n = static_cast<int>(cs.size());
    std::vector<int> mult(static_cast<std::size_t>(n) * n);
    for (int x = 0; x < n; ++x) {
        M2 X = decode2(cs[x], m_);
        for (int y = 0; y < n; ++y) {
            auto c = code2(mul2(X, decode2(cs[y], m_), m_), m_);
            mult[static_cast<std::size_t>(x) * n + y] =
                pos[std::lower_bound(sorted.begin(), sorted.end(), c) - sorted.begin()];
        }
    }
    std::string name = i == 0 ? "SL(2,Z/" + std::to_string(m_) + ")"
                              : "G_" + std::to_string(i) + "(SL(2,Z/" + std::to_string(m_) + "))";
    return make_group(n, std::move(mult), name);
}

std::vector<int> CongruenceTower::layer_coords(const ModMatrix& M, int i) const {
    M2 x = to2(M);
    if (level2(x, p_, k_) < i) throw Error("layer_coords: matrix not in G_i");
    long long q = ipow(p_, i);
    return {static_cast<int>(((x.a - 1) / q) % p_), static_cast<int>((x.b / q) % p_),
            static_cast<int>((x.c / q) % p_)};
}

Filtration tower_filtration(const CongruenceTower& T, int i, const Caps& caps) {
    auto G = T.materialize(i, caps);
    // element j of G is the j-th matrix of the materialized list; recover levels by the same ordering
    auto mem = T.members(i);
    std::vector<int> lev;
    const ModMatrix I = ModMatrix::identity(2, T.modulus());
    lev.push_back(T.k());
    for (auto x : mem) {
        auto M = T.element(x);
        if (M == I) continue;
        lev.push_back(T.level(M));
    }
    std::vector<Subgroup> terms;
    for (int j = i; j <= T.k(); ++j) {
        std::vector<char> mask(G->order());
        for (int g = 0; g < G->order(); ++g) mask[g] = lev[g] >= j;
        terms.push_back(subgroup_from_mask(G, mask));
    }
    return make_filtration(G, std::move(terms));
}

CongruenceLayerReport congruence_layer_check(int p, int k, const Caps& caps) {
    CongruenceTower T(p, k, caps);
    const long long m = T.modulus();
    CongruenceLayerReport r;
    r.order_ok = static_cast<long long>(T.order()) == sl2_order_formula(p, k);
    // codes of G_i for i = 0..k
    std::vector<std::vector<std::uint64_t>> G(k + 1);
    std::vector<int> lev(T.order());
    for (std::size_t x = 0; x < T.order(); ++x) {
        auto X = to2(T.element(x));
        lev[x] = level2(X, p, k);
        for (int i = 0; i <= lev[x]; ++i) G[i].push_back(code2(X, m));
    }
    auto lvl = [&](const M2& x) { return level2(x, p, k); };
    for (int i = 1; i < k; ++i) {
        r.layer_orders.push_back(static_cast<int>(G[i].size() / G[i + 1].size()));
        bool ok = static_cast<long long>(G[i].size()) == ipow(p, 3) * static_cast<long long>(G[i + 1].size());
        // exponent p modulo G_{i+1}
        for (auto c : G[i])
            if (ok && lvl(pow2(decode2(c, m), p, m)) < i + 1) ok = false;
        // generators commute modulo the normal subgroup G_{i+1}
        auto gens = greedy_generators(G[i], m);
        for (std::size_t a = 0; ok && a < gens.size(); ++a)
            for (std::size_t b = a + 1; ok && b < gens.size(); ++b) {
                M2 c = mul2(mul2(inv2(gens[a], m), inv2(gens[b], m), m), mul2(gens[a], gens[b], m), m);
                if (lvl(c) < i + 1) ok = false;
            }
        r.layer_elementary.push_back(ok);
    }
    const long long budget = 60'000'000;
    r.commutators_ok = true;
    r.commutators_checked = true;
    for (int i = 1; i < k; ++i)
        for (int j = i; j < k; ++j) {
            int target = std::min(i + j, k);
            if (static_cast<long long>(G[i].size()) * static_cast<long long>(G[j].size()) <= budget) {
                for (auto ca : G[i]) {
                    M2 A = decode2(ca, m), Ai = inv2(A, m);
                    for (auto cb : G[j]) {
                        M2 B = decode2(cb, m);
                        M2 c = mul2(mul2(Ai, inv2(B, m), m), mul2(A, B, m), m);
                        if (lvl(c) < target) r.commutators_ok = false;
                    }
                }
            } else {
                r.commutators_checked = false;
                auto ga = greedy_generators(G[i], m), gb = greedy_generators(G[j], m);
                for (auto& A : ga)
                    for (auto& B : gb) {
                        M2 c = mul2(mul2(inv2(A, m), inv2(B, m), m), mul2(A, B, m), m);
                        if (lvl(c) < target) r.commutators_ok = false;
                    }
            }
        }
    r.power_clause = true;
    for (int i = 1; i <= k; ++i)
        for (auto c : G[i])
            if (lvl(pow2(decode2(c, m), p, m)) < std::min(i * p, k)) r.power_clause = false;
    return r;
}

bool PowerMapReport::all_injective() const {
    return std::all_of(injective.begin(), injective.end(), [](bool b) { return b; }) &&
           std::all_of(well_defined.begin(), well_defined.end(), [](bool b) { return b; }) &&
           std::all_of(homomorphism.begin(), homomorphism.end(), [](bool b) { return b; });
}

PowerMapReport power_map_injectivity(int p, int k, const Caps& caps) {
    if (p == 2) throw Error("power map injectivity: p must be odd");
    CongruenceTower T(p, k, caps);
    const long long m = T.modulus();
    PowerMapReport r;
    auto enc = [p](const std::vector<int>& v) { return (v[0] * p + v[1]) * p + v[2]; };
    const int L = p * p * p;
    for (int i = 1; i <= k - 2; ++i) {
        std::vector<int> f(L, -1);
        bool wd = true;
        for (std::size_t x = 0; x < T.order(); ++x) {
            auto M = T.element(x);
            if (T.level(M) < i) continue;
            int c = enc(T.layer_coords(M, i));
            auto P = from2(pow2(to2(M), p, m), m);
            if (T.level(P) < i + 1) {
                wd = false;
                continue;
            }
            int d = enc(T.layer_coords(P, i + 1));
            if (f[c] == -1)
                f[c] = d;
            else if (f[c] != d)
                wd = false;
        }
        for (int c = 0; c < L; ++c)
            if (f[c] == -1) wd = false;
        bool hom = wd, inj = wd;
        if (wd) {
            auto add = [p](int a, int b) {
                int r = 0, s = 1;
                for (int t = 0; t < 3; ++t) {
                    r += ((a % p + b % p) % p) * s;
                    a /= p;
                    b /= p;
                    s *= p;
                }
                return r;
            };
            // enc is big-endian but addition is digitwise, so the order does not matter
            for (int a = 0; a < L && hom; ++a)
                for (int b = 0; b < L && hom; ++b)
                    if (f[add(a, b)] != add(f[a], f[b])) hom = false;
            for (int a = 1; a < L; ++a)
                if (f[a] == 0) inj = false;
        }
        r.well_defined.push_back(wd);
        r.homomorphism.push_back(hom);
        r.injective.push_back(inj);
    }
    return r;
}

UnitriangularOrder unitriangular_order(int n, int p, int d, const IMat& N) {
    if (!is_prime(p) || d < 1) throw Error("unitriangular order: need a prime p and d >= 1");
    if (p < n) throw Error("unitriangular order: requires p >= n");
    if (static_cast<int>(N.size()) != n) throw Error("unitriangular order: wrong size");
    const long long q = ipow(p, d);
    ModMatrix M = ModMatrix::identity(n, q);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(N[i].size()) != n) throw Error("unitriangular order: wrong size");
        for (int j = 0; j < n; ++j) {
            long long v = md(N[i][j], q);
            if (j <= i && v) throw Error("unitriangular order: N not strictly upper triangular");
            if (j > i) M.a[static_cast<std::size_t>(i) * n + j] = v;
        }
    }
    UnitriangularOrder r;
    ModMatrix X = M;
    const long long bound = q * ipow(p, n);
    while (!X.is_identity()) {
        X = X * M;
        if (++r.order > bound) throw Error("unitriangular order: no finite order found");
    }
    r.within_exponent = r.order <= q;
    for (int s = 1; s < n; ++s) {
        bool nonzero = false, unit = false;
        for (int i = 0; i + s < n; ++i) {
            long long v = M.at(i, i + s);
            if (v) nonzero = true;
            if (v % p) unit = true;
        }
        if (nonzero) {
            r.unit_codiagonal = unit;
            break;
        }
    }
    r.exact = r.order == q;
    return r;
}

void Presentation::verify() const {
    if (ngens < 0) throw Error("presentation: negative generator count");
    for (const auto& w : relators)
        for (int l : w)
            if (l == 0 || std::abs(l) > ngens) throw Error("presentation: relator letter out of range");
}

IMat relation_matrix(const Presentation& P) {
    P.verify();
    IMat M;
    for (const auto& w : P.relators) {
        std::vector<long long> row(P.ngens, 0);
        for (int l : w) row[std::abs(l) - 1] += l > 0 ? 1 : -1;
        M.push_back(row);
    }
    return M;
}

SmithAbelianization smith_abelianization(const Presentation& P) {
    SmithAbelianization r;
    r.relation_matrix = relation_matrix(P);
    if (P.ngens == 0) {
        r.verified = true;
        return r;
    }
    IMat M = r.relation_matrix;
    if (M.empty()) M.push_back(std::vector<long long>(P.ngens, 0));
    r.smith = smith_normal_form(M);
    const auto& s = r.smith;
    r.free_rank = P.ngens - static_cast<int>(s.diag.size());
    for (long long d : s.diag)
        if (std::llabs(d) > 1) r.torsion.push_back(std::llabs(d));
    bool ok = imat_mul(imat_mul(s.U, M), s.V) == s.D;
    ok = ok && std::llabs(idet(s.U)) == 1 && std::llabs(idet(s.V)) == 1;
    for (std::size_t i = 0; i < s.D.size(); ++i)
        for (std::size_t j = 0; j < s.D[i].size(); ++j)
            if (i != j && s.D[i][j]) ok = false;
    for (std::size_t i = 0; i < s.diag.size(); ++i) {
        if (s.D[i][i] != s.diag[i] || !s.diag[i]) ok = false;
        if (i + 1 < s.diag.size() && s.diag[i + 1] % s.diag[i]) ok = false;
    }
    r.verified = ok;
    if (!ok) throw Error("smith abelianization: verification failed");
    return r;
}

namespace {

IMat imat_identity(int n) {
    IMat I(n, std::vector<long long>(n, 0));
    for (int i = 0; i < n; ++i) I[i][i] = 1;
    return I;
}

IMat checked_mul(const IMat& A, const IMat& B) {
    const std::size_t n = A.size();
    IMat C(n, std::vector<long long>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            __int128 s = 0;
            for (std::size_t l = 0; l < n; ++l) s += static_cast<__int128>(A[i][l]) * B[l][j];
            if (s > (static_cast<__int128>(1) << 62) || s < -(static_cast<__int128>(1) << 62))
                throw Error("matrix group: integer overflow while evaluating a word");
            C[i][j] = static_cast<long long>(s);
        }
    return C;
}

// inverse of a determinant-one integer matrix by cofactors
IMat unimodular_inverse(const IMat& A) {
    const int n = static_cast<int>(A.size());
    if (n == 1) return {{1}};
    IMat R(n, std::vector<long long>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            IMat minor;
            for (int r = 0; r < n; ++r) {
                if (r == i) continue;
                std::vector<long long> row;
                for (int c = 0; c < n; ++c)
                    if (c != j) row.push_back(A[r][c]);
                minor.push_back(row);
            }
            R[j][i] = ((i + j) % 2 ? -1 : 1) * idet(minor);
        }
    return R;
}

bool unipotent(const IMat& M) {
    const int n = static_cast<int>(M.size());
    IMat N = M;
    for (int i = 0; i < n; ++i) N[i][i] -= 1;
    IMat P = N;
    for (int t = 1; t < n; ++t) P = checked_mul(P, N);
    for (auto& row : P)
        for (auto x : row)
            if (x) return false;
    return true;
}

std::vector<long long> exponent_sums(const std::vector<int>& w, int r) {
    std::vector<long long> e(r, 0);
    for (int l : w) e[std::abs(l) - 1] += l > 0 ? 1 : -1;
    return e;
}

struct Packer {
    long long q;
    int bits, slots;
    std::uint64_t pack(const std::vector<long long>& v) const {
        std::uint64_t c = 0;
        for (auto x : v) c = (c << bits) | static_cast<std::uint64_t>(x);
        return c;
    }
};

}  // namespace

IMat MatrixGroupSpec::evaluate(const std::vector<int>& word) const {
    IMat R = imat_identity(n);
    for (int l : word) {
        if (l == 0 || std::abs(l) > static_cast<int>(gens.size())) throw Error("matrix group: letter out of range");
        const IMat& g = gens[std::abs(l) - 1];
        R = checked_mul(R, l > 0 ? g : unimodular_inverse(g));
    }
    return R;
}

void MatrixGroupSpec::verify() const {
    if (n < 1) throw Error("matrix group: bad dimension");
    for (const auto& g : gens) {
        if (static_cast<int>(g.size()) != n) throw Error("matrix group: generator has the wrong size");
        for (const auto& row : g)
            if (static_cast<int>(row.size()) != n) throw Error("matrix group: generator has the wrong size");
        if (idet(g) != 1) throw Error("matrix group: generator does not have determinant 1");
    }
    if (presentation.ngens != static_cast<int>(gens.size()))
        throw Error("matrix group: presentation has the wrong number of generators");
    presentation.verify();
    for (const auto& w : presentation.relators)
        if (evaluate(w) != imat_identity(n)) throw Error("matrix group: relator does not evaluate to the identity");
    for (const auto& T : subgroups) {
        std::vector<IMat> ms;
        for (const auto& w : T) {
            ms.push_back(evaluate(w));
            if (!unipotent(ms.back())) throw Error("matrix group: subgroup generator is not unipotent");
        }
        for (std::size_t a = 0; a < ms.size(); ++a)
            for (std::size_t b = a + 1; b < ms.size(); ++b)
                if (checked_mul(ms[a], ms[b]) != checked_mul(ms[b], ms[a]))
                    throw Error("matrix group: subgroup is not abelian");
    }
}

bool SubgroupLevelReport::level_is(int l) const {
    return !level.empty() && std::all_of(level.begin(), level.end(), [l](int x) { return x == l; });
}

std::optional<int> MatrixFiltrationReport::level() const {
    std::optional<int> out;
    for (const auto& s : subgroups)
        for (int l : s.level) {
            if (l == -99) return std::nullopt;
            if (out && *out != l) return std::nullopt;
            out = l;
        }
    return out;
}

MatrixFiltrationReport matrix_p_filtration(const MatrixGroupSpec& spec, int p, int k_max, const Caps& caps) {
    spec.verify();
    if (!is_prime(p) || k_max < 1) throw Error("matrix filtration: need a prime p and k_max >= 1");
    const int n = spec.n, r = static_cast<int>(spec.gens.size());
    MatrixFiltrationReport rep;
    rep.p = p;
    rep.k_max = k_max;

    // theta: exponent sums followed by the free columns of V
    auto ab = smith_abelianization(spec.presentation);
    const int nz = static_cast<int>(ab.smith.diag.size());
    std::vector<int> free_cols;
    if (r > 0) {
        if (ab.smith.V.empty())
            for (int j = 0; j < r; ++j) free_cols.push_back(j);
        else
            for (int j = nz; j < r; ++j) free_cols.push_back(j);
    }
    rep.theta_rank = static_cast<int>(free_cols.size());
    const int s = rep.theta_rank;
    auto theta = [&](const std::vector<int>& w) {
        auto e = exponent_sums(w, r);
        std::vector<long long> t(s, 0);
        for (int c = 0; c < s; ++c)
            for (int i = 0; i < r; ++i)
                t[c] += e[i] * (ab.smith.V.empty() ? (i == free_cols[c]) : ab.smith.V[i][free_cols[c]]);
        return t;
    };
    std::vector<std::vector<long long>> gen_theta;
    std::vector<IMat> gen_inv;
    for (int i = 0; i < r; ++i) {
        gen_theta.push_back(theta({i + 1}));
        gen_inv.push_back(unimodular_inverse(spec.gens[i]));
    }

    rep.subgroups.resize(spec.subgroups.size());
    const long long cap = static_cast<long long>(caps.wreath);
    for (int k = 1; k <= k_max; ++k) {
        const long long q = ipow(p, k);
        int bits = 1;
        while ((1LL << bits) < q) ++bits;
        Packer pk{q, bits, n * n + s};
        if (bits * pk.slots > 64) throw CapExceeded("matrix filtration: modulus too large to pack");
        using Elt = std::vector<long long>;  // n*n matrix entries then theta, all mod q
        auto reduce_int = [&](const IMat& M, const std::vector<long long>& t) {
            Elt e;
            for (const auto& row : M)
                for (auto x : row) e.push_back(md(x, q));
            for (auto x : t) e.push_back(md(x, q));
            return e;
        };
        auto mul = [&](const Elt& x, const Elt& y) {
            Elt z(x.size(), 0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    long long v = 0;
                    for (int l = 0; l < n; ++l) v = (v + x[i * n + l] * y[l * n + j]) % q;
                    z[i * n + j] = v;
                }
            for (int c = 0; c < s; ++c) z[n * n + c] = (x[n * n + c] + y[n * n + c]) % q;
            return z;
        };
        Elt id = reduce_int(imat_identity(n), std::vector<long long>(s, 0));

        // image of G at level k
        std::vector<Elt> step;
        for (int i = 0; i < r; ++i) {
            step.push_back(reduce_int(spec.gens[i], gen_theta[i]));
            std::vector<long long> neg(s);
            for (int c = 0; c < s; ++c) neg[c] = -gen_theta[i][c];
            step.push_back(reduce_int(gen_inv[i], neg));
        }
        std::unordered_map<std::uint64_t, std::size_t> seen;
        std::vector<Elt> image{id};
        seen[pk.pack(id)] = 0;
        bool complete = true;
        for (std::size_t h = 0; h < image.size() && complete; ++h)
            for (const auto& g : step) {
                Elt y = mul(image[h], g);
                if (seen.emplace(pk.pack(y), image.size()).second) {
                    image.push_back(std::move(y));
                    if (static_cast<long long>(image.size()) > cap) {
                        complete = false;
                        break;
                    }
                }
            }
        rep.image_complete.push_back(complete);
        rep.image_orders.push_back(complete ? static_cast<long long>(image.size()) : 0);

        if (k == k_max && complete) {
            // G_j image = elements trivial at level j; level 1 part as a finite group
            auto lev = [&](const Elt& e) {
                int j = 0;
                long long qq = 1;
                while (j < k) {
                    qq *= p;
                    bool ok = true;
                    for (int a = 0; a < n && ok; ++a)
                        for (int b = 0; b < n && ok; ++b)
                            if (md(e[a * n + b] - (a == b), qq)) ok = false;
                    for (int c = 0; c < s && ok; ++c)
                        if (e[n * n + c] % qq) ok = false;
                    if (!ok) break;
                    ++j;
                }
                return j;
            };
            std::vector<std::size_t> sub;
            for (std::size_t x = 0; x < image.size(); ++x)
                if (lev(image[x]) >= 1) sub.push_back(x);  // image[0] is the identity
            if (static_cast<long long>(sub.size()) <= static_cast<long long>(caps.order)) {
                std::unordered_map<std::uint64_t, int> pos;
                for (std::size_t j = 0; j < sub.size(); ++j) pos[pk.pack(image[sub[j]])] = static_cast<int>(j);
                const int N = static_cast<int>(sub.size());
                std::vector<int> tab(static_cast<std::size_t>(N) * N);
                for (int a = 0; a < N; ++a)
                    for (int b = 0; b < N; ++b)
                        tab[static_cast<std::size_t>(a) * N + b] = pos.at(pk.pack(mul(image[sub[a]], image[sub[b]])));
                auto Gp = make_group(N, std::move(tab), "image of G_1");
                std::vector<Subgroup> terms;
                for (int j = 1; j <= k; ++j) {
                    std::vector<char> mask(N);
                    for (int a = 0; a < N; ++a) mask[a] = lev(image[sub[a]]) >= j;
                    terms.push_back(subgroup_from_mask(Gp, mask));
                }
                auto F = make_filtration(Gp, std::move(terms));
                rep.top_image_checked = true;
                rep.top_image_central_p = F.is_central_p(p);
            }
        }

        // G_k n T relative to the generators of T
        for (std::size_t ti = 0; ti < spec.subgroups.size(); ++ti) {
            const auto& words = spec.subgroups[ti];
            const int qn = static_cast<int>(words.size());
            std::vector<Elt> tg;
            for (const auto& w : words) tg.push_back(reduce_int(spec.evaluate(w), theta(w)));
            // S = <t_1..t_j> in the level-k quotient, with exponent vectors
            std::unordered_map<std::uint64_t, std::vector<long long>> S;
            std::vector<Elt> Selts{id};
            S[pk.pack(id)] = std::vector<long long>(qn, 0);
            IMat basis;
            for (int j = 0; j < qn; ++j) {
                Elt x = tg[j];
                long long c = 1;
                while (!S.count(pk.pack(x))) {
                    x = mul(x, tg[j]);
                    if (++c > cap) throw CapExceeded("matrix filtration: subgroup order exceeds the cap");
                }
                std::vector<long long> row(qn, 0);
                const auto& e = S.at(pk.pack(x));
                for (int i = 0; i < qn; ++i) row[i] = -e[i];
                row[j] += c;
                basis.push_back(row);
                std::vector<Elt> next;
                const std::size_t before = Selts.size();
                for (std::size_t a = 0; a < before; ++a) {
                    Elt y = Selts[a];
                    auto ev = S.at(pk.pack(y));
                    for (long long t = 1; t < c; ++t) {
                        y = mul(y, tg[j]);
                        ev[j] = t;
                        S[pk.pack(y)] = ev;
                        next.push_back(y);
                    }
                }
                for (auto& y : next) Selts.push_back(std::move(y));
                if (static_cast<long long>(Selts.size()) > cap)
                    throw CapExceeded("matrix filtration: subgroup order exceeds the cap");
            }
            auto& sr = rep.subgroups[ti];
            sr.lattice.push_back(basis);
            long long g = 0;
            for (const auto& row : basis)
                for (auto v : row) g = std::gcd(g, std::llabs(v));
            int c = -1;
            if (g > 0) {
                int e = 0;
                long long h = g;
                while (h % p == 0) {
                    h /= p;
                    ++e;
                }
                long long det = 1;
                for (int j = 0; j < qn; ++j) det *= basis[j][j];
                if (h == 1 && std::llabs(det) == ipow(g, qn)) c = e;
            } else if (qn == 0) {
                c = 0;
            }
            sr.exponent.push_back(c);
            sr.level.push_back(c >= 0 ? c - k + 1 : -99);
        }
    }
    return rep;
}

}  // namespace residuap
