#include <doctest.h>

#include <random>

#include "residuap/congruence.hpp"
#include "residuap/filtration.hpp"

using namespace residuap;

namespace {

long long brute_sl2_count(long long m) {
    long long n = 0;
    for (long long a = 0; a < m; ++a)
        for (long long b = 0; b < m; ++b)
            for (long long c = 0; c < m; ++c)
                for (long long d = 0; d < m; ++d) n += ((a * d - b * c) % m + m) % m == 1 % m;
    return n;
}

long long brute_kernel_count(long long m, long long q) {
    long long n = 0;
    for (long long a = 1; a < m; a += q)
        for (long long b = 0; b < m; b += q)
            for (long long c = 0; c < m; c += q)
                for (long long d = 1; d < m; d += q) n += ((a * d - b * c) % m + m) % m == 1;
    return n;
}

// smallest m > 0 with a 2x2 integer unipotent matrix power = I mod q and m * theta = 0 mod q
long long brute_cyclic_index(const IMat& U, long long theta, long long q) {
    long long a = 1, b = 0, c = 0, d = 1;
    for (long long m = 1; m <= q * q; ++m) {
        long long na = (a * U[0][0] + b * U[1][0]) % q, nb = (a * U[0][1] + b * U[1][1]) % q;
        long long nc = (c * U[0][0] + d * U[1][0]) % q, nd = (c * U[0][1] + d * U[1][1]) % q;
        a = (na + q) % q, b = (nb + q) % q, c = (nc + q) % q, d = (nd + q) % q;
        if (a == 1 % q && b == 0 && c == 0 && d == 1 % q && (m * theta) % q == 0) return m;
    }
    return -1;
}

MatrixGroupSpec cyclic_unipotent(long long x) {
    MatrixGroupSpec s;
    s.n = 2;
    s.gens = {{{1, x}, {0, 1}}};
    s.presentation.ngens = 1;
    s.subgroups = {{{1}}};
    return s;
}

}  // namespace

TEST_CASE("orders of SL(2, Z/p^k) against enumeration") {
    for (auto [p, k] : std::vector<std::pair<int, int>>{{2, 1}, {2, 2}, {2, 3}, {3, 1}, {3, 2}, {3, 3}}) {
        CongruenceTower T(p, k);
        long long m = T.modulus();
        CHECK(static_cast<long long>(T.order()) == brute_sl2_count(m));
        CHECK(static_cast<long long>(T.order()) == sl2_order_formula(p, k));
        for (int i = 1; i <= k; ++i) {
            long long q = 1;
            for (int t = 0; t < i; ++t) q *= p;
            CHECK(static_cast<long long>(T.members(i).size()) == brute_kernel_count(m, q));
        }
    }
    CHECK(CongruenceTower(2, 1).order() == 6);
    CHECK(CongruenceTower(3, 1).order() == 24);
    CHECK(CongruenceTower(2, 2).members(1).size() == 8);
    CHECK(CongruenceTower(3, 2).members(2).size() == 1);
    CHECK_THROWS_AS(CongruenceTower(3, 5), CapExceeded);
    CHECK_THROWS_AS(CongruenceTower(4, 1), Error);
}

TEST_CASE("SL(2,Z/4) modulo its first congruence subgroup") {
    CongruenceTower T(2, 2);
    auto G = T.materialize(0);
    CHECK(G->order() == 48);
    auto F = tower_filtration(T, 0);
    auto Q = quotient(G, F.term(2));
    CHECK(Q.group->order() == 6);
    CHECK_FALSE(Q.group->is_abelian());
    CHECK(isomorphic(Q.group, CongruenceTower(2, 1).materialize(0)));
}

TEST_CASE("congruence layers are elementary abelian of rank three") {
    auto r = congruence_layer_check(3, 3);
    CHECK(r.order_ok);
    CHECK(r.layer_orders == std::vector<int>{27, 27});
    CHECK(r.layer_elementary == std::vector<bool>{true, true});
    CHECK(r.commutators_ok);
    CHECK(r.commutators_checked);
    CHECK_FALSE(r.power_clause);  // Z/27 is not of characteristic 3

    // independent check through the materialized G_1
    CongruenceTower T(3, 3);
    auto F = tower_filtration(T, 1);
    REQUIRE(F.group->order() == 729);
    auto Q1 = quotient(F.group, F.term(2));
    CHECK(Q1.group->order() == 27);
    CHECK(Q1.group->is_abelian());
    for (int x = 0; x < 27; ++x) CHECK(Q1.group->pow(x, 3) == 0);
    CHECK(commutator(F.term(1), F.term(1)).subset_of(F.term(2)));
    CHECK(commutator(F.term(1), F.term(2)).subset_of(F.term(3)));
    CHECK(F.is_central_p(3));
}

TEST_CASE("first congruence subgroup of SL(2,Z/8) has commutators in the second") {
    auto r = congruence_layer_check(2, 3);
    CHECK(r.commutators_ok);
    CHECK(r.commutators_checked);
    CongruenceTower T(2, 3);
    auto F = tower_filtration(T, 1);
    CHECK(F.group->order() == 64);
    CHECK(commutator(F.term(1), F.term(1)).subset_of(F.term(2)));
}

TEST_CASE("level one towers have no layers") {
    for (int p : {2, 3, 5}) {
        auto r = congruence_layer_check(p, 1);
        CHECK(r.layer_orders.empty());
        CHECK(r.layer_elementary.empty());
        CHECK(r.commutators_ok);
    }
}

TEST_CASE("the congruence filtration of G_1 is uniformly potent up to its horizon") {
    CongruenceTower T(3, 3);
    auto F = tower_filtration(T, 1);
    auto rep = classify_potency(F, 3, 1);
    CHECK(rep.p_potent);
    CHECK(rep.strongly);
    CHECK(rep.uniformly);
}

TEST_CASE("cube map between congruence layers") {
    auto r3 = power_map_injectivity(3, 3);
    CHECK(r3.injective == std::vector<bool>{true});
    CHECK(r3.homomorphism == std::vector<bool>{true});
    auto r4 = power_map_injectivity(3, 4);
    CHECK(r4.injective == std::vector<bool>{true, true});
    CHECK(r4.all_injective());
    CHECK_THROWS_AS(power_map_injectivity(2, 3), Error);
    CHECK(power_map_injectivity(5, 2).injective.empty());

    // oracle: x -> x^3 on the materialized G_1 of SL(2,Z/27), through quotient maps
    CongruenceTower T(3, 3);
    auto F = tower_filtration(T, 1);
    auto Q12 = quotient(F.group, F.term(2));
    std::vector<int> img(Q12.group->order(), -1);
    bool wd = true, inj = true;
    for (int x : F.term(1).elems) {
        int y = F.group->pow(x, 3);
        CHECK(F.term(2).contains(y));
        // F.term(3) is trivial, so the layer G_2/G_3 is G_2 itself
        int c = Q12.proj(x);
        if (img[c] == -1)
            img[c] = y;
        else if (img[c] != y)
            wd = false;
    }
    for (int c = 1; c < Q12.group->order(); ++c)
        if (img[c] == 0) inj = false;
    CHECK(wd);
    CHECK(inj);
}

TEST_CASE("unitriangular orders") {
    auto a = unitriangular_order(2, 3, 2, {{0, 1}, {0, 0}});
    CHECK(a.order == 9);
    CHECK(a.exact);
    CHECK(a.unit_codiagonal);
    CHECK(unitriangular_order(2, 3, 2, {{0, 0}, {0, 0}}).order == 1);
    auto c = unitriangular_order(2, 3, 2, {{0, 3}, {0, 0}});
    CHECK(c.order == 3);
    CHECK_FALSE(c.unit_codiagonal);
    CHECK_THROWS_AS(unitriangular_order(3, 2, 2, {{0, 1, 0}, {0, 0, 1}, {0, 0, 0}}), Error);
    CHECK_THROWS_AS(unitriangular_order(2, 3, 2, {{0, 1}, {1, 0}}), Error);

    std::mt19937 rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        int n = 2 + static_cast<int>(rng() % 2);
        int p = n == 2 ? (rng() % 2 ? 2 : 3) : 3;
        int d = 1 + static_cast<int>(rng() % 3);
        long long q = 1;
        for (int t = 0; t < d; ++t) q *= p;
        IMat N(n, std::vector<long long>(n, 0));
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) N[i][j] = static_cast<long long>(rng() % q);
        auto r = unitriangular_order(n, p, d, N);
        // plain repeated multiplication
        ModMatrix M = ModMatrix::identity(n, q);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) M.a[i * n + j] = N[i][j];
        long long o = 1;
        for (ModMatrix X = M; !X.is_identity(); X = X * M) ++o;
        CHECK(r.order == o);
        CHECK(r.within_exponent);
        if (r.unit_codiagonal) CHECK(r.order == q);
    }
}

TEST_CASE("abelianization through Smith form") {
    auto a = smith_abelianization({2, {{1, 1, -2, -2, -2}}});
    CHECK(a.free_rank == 1);
    CHECK(a.torsion.empty());
    CHECK(a.verified);
    auto b = smith_abelianization({1, {{1, 1, 1, 1, 1}}});
    CHECK(b.free_rank == 0);
    CHECK(b.torsion == std::vector<long long>{5});
    auto c = smith_abelianization({2, {{-1, -2, 1, 2}}});
    CHECK(c.free_rank == 2);
    CHECK(c.torsion.empty());
    CHECK(smith_abelianization({3, {}}).free_rank == 3);
    CHECK_THROWS_AS(smith_abelianization({1, {{2}}}), Error);

    // oracle: square nonsingular relation matrices have |H_1| = |det|, rank by elimination over Q
    std::mt19937 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        int r = 1 + static_cast<int>(rng() % 3);
        Presentation P{r, {}};
        for (int i = 0; i < r; ++i) {
            std::vector<int> w;
            int len = 1 + static_cast<int>(rng() % 8);
            for (int t = 0; t < len; ++t) w.push_back((rng() % 2 ? 1 : -1) * (1 + static_cast<int>(rng() % r)));
            P.relators.push_back(w);
        }
        auto M = relation_matrix(P);
        long long det = idet(M);
        auto s = smith_abelianization(P);
        CHECK(s.verified);
        if (det) {
            long long prod = 1;
            for (auto t : s.torsion) prod *= t;
            CHECK(s.free_rank == 0);
            CHECK(prod == std::llabs(det));
        } else {
            CHECK(s.free_rank >= 1);
        }
        for (std::size_t i = 1; i < s.torsion.size(); ++i) CHECK(s.torsion[i] % s.torsion[i - 1] == 0);
    }
}

TEST_CASE("unipotent cyclic group at p = 3 sits at level one") {
    auto spec = cyclic_unipotent(1);
    auto r = matrix_p_filtration(spec, 3, 3);
    REQUIRE(r.subgroups.size() == 1);
    CHECK(r.theta_rank == 1);
    CHECK(r.subgroups[0].exponent == std::vector<int>{1, 2, 3});
    CHECK(r.subgroups[0].level_is(1));
    CHECK(r.level() == 1);
    CHECK(r.image_orders == std::vector<long long>{3, 9, 27});
    CHECK(r.top_image_checked);
    CHECK(r.top_image_central_p);
    long long q = 1;
    for (int k = 1; k <= 3; ++k) {
        q *= 3;
        CHECK(r.subgroups[0].lattice[k - 1][0][0] == brute_cyclic_index(spec.gens[0], 1, q));
    }
}

TEST_CASE("unipotent cyclic group at p = 2 matches direct power congruences") {
    auto spec = cyclic_unipotent(1);
    auto r = matrix_p_filtration(spec, 2, 3);
    long long q = 1;
    for (int k = 1; k <= 3; ++k) {
        q *= 2;
        long long idx = brute_cyclic_index(spec.gens[0], 1, q);
        CHECK(r.subgroups[0].lattice[k - 1][0][0] == idx);
        CHECK(idx == q);
    }
    CHECK(r.level() == 1);
}

TEST_CASE("two-generator free matrix group at p = 5") {
    MatrixGroupSpec spec;
    spec.n = 2;
    spec.gens = {{{1, 2}, {0, 1}}, {{1, 0}, {2, 1}}};
    spec.presentation.ngens = 2;
    spec.subgroups = {{{1}}};
    Caps caps;
    auto r = matrix_p_filtration(spec, 5, 3, caps);
    CHECK(r.theta_rank == 2);
    CHECK(r.image_complete[0]);
    CHECK(3000 % r.image_orders[0] == 0);
    long long q = 1;
    for (int k = 1; k <= 3; ++k) {
        q *= 5;
        CHECK(r.subgroups[0].lattice[k - 1][0][0] == brute_cyclic_index(spec.gens[0], 1, q));
        CHECK(r.subgroups[0].exponent[k - 1] == k);
    }
    CHECK(r.subgroups[0].level_is(1));
}

TEST_CASE("rank two unipotent subgroup") {
    MatrixGroupSpec spec;
    spec.n = 3;
    spec.gens = {{{1, 1, 0}, {0, 1, 0}, {0, 0, 1}}, {{1, 0, 1}, {0, 1, 0}, {0, 0, 1}}};
    spec.presentation = {2, {{-1, -2, 1, 2}}};
    spec.subgroups = {{{1}, {2}}, {{1, 1, 2}}};
    auto r = matrix_p_filtration(spec, 3, 2);
    CHECK(r.subgroups[0].exponent == std::vector<int>{1, 2});
    CHECK(r.subgroups[1].level_is(1));
    CHECK(r.level() == 1);
}

TEST_CASE("matrix group inputs are validated") {
    auto bad = cyclic_unipotent(1);
    bad.gens[0] = {{2, 1}, {1, 1}};
    CHECK_THROWS_AS(matrix_p_filtration(bad, 3, 1), Error);
    auto rel = cyclic_unipotent(1);
    rel.presentation.relators = {{1, 1}};
    CHECK_THROWS_AS(rel.verify(), Error);
    MatrixGroupSpec nu;
    nu.gens = {{{2, 1}, {1, 1}}};
    nu.presentation.ngens = 1;
    nu.subgroups = {{{1}}};
    CHECK_THROWS_AS(nu.verify(), Error);
    auto det = cyclic_unipotent(1);
    det.gens[0] = {{1, 1}, {0, 2}};
    CHECK_THROWS_AS(det.verify(), Error);
}
