#include <doctest.h>

#include <random>
#include <set>

#include "residuap/algebra.hpp"
#include "residuap/catalog.hpp"

using namespace residuap;

namespace {

AlgebraElement pow_elem(const AlgebraElement& a, int k) {
    AlgebraElement r = algebra_unit(a.group, a.p, 0);
    for (int i = 0; i < k; ++i) r = r * a;
    return r;
}

std::vector<std::string> p_groups(int cap2, int cap3) {
    std::vector<std::string> v;
    for (const auto& n : catalog_p_group_names()) {
        auto G = catalog_group(n);
        int p = G->prime();
        if ((p == 2 && G->order() <= cap2) || (p == 3 && G->order() <= cap3) || (p > 3 && G->order() <= 49))
            v.push_back(n);
    }
    return v;
}

}  // namespace

TEST_CASE("augmentation ideal powers of cyclic groups") {
    auto C4 = catalog_group("C4");
    auto P = augmentation_ideal_powers(C4, 2);
    CHECK(P.dims == std::vector<int>{3, 2, 1, 0});
    CHECK(P.nilpotency_class == 3);
    // (1 + x)^3 != 0 = (1 + x)^4 in F_2[C_4]
    auto y = algebra_unit(C4, 2, 0) + algebra_unit(C4, 2, 1);
    CHECK_FALSE(pow_elem(y, 3).zero());
    CHECK(pow_elem(y, 4).zero());

    for (int p : {2, 3, 5, 7}) {
        auto C = cyclic(p);
        auto Q = augmentation_ideal_powers(C, p);
        CHECK(Q.nilpotency_class == p - 1);
        auto z = algebra_unit(C, p, 1) - algebra_unit(C, p, 0);
        CHECK_FALSE(pow_elem(z, p - 1).zero());
        CHECK(pow_elem(z, p).zero());
        CHECK(jennings_class_formula(C, p) == p - 1);
    }

    auto T = trivial_group();
    auto Z = augmentation_ideal_powers(T, 3);
    CHECK(Z.dims == std::vector<int>{0});
    CHECK(Z.nilpotency_class == 0);
    CHECK_THROWS_AS(augmentation_ideal_powers(catalog_group("S3"), 2), Error);
}

TEST_CASE("augmentation ideal powers are two-sided ideals") {
    for (const char* n : {"D8", "Q8", "Heis27", "C4xC2", "C9:C3"}) {
        auto G = catalog_group(n);
        auto P = augmentation_ideal_powers(G, G->prime());
        for (const auto& I : P.powers) CHECK(I.two_sided());
    }
}

TEST_CASE("Jennings series equals the dimension series") {
    auto C4 = catalog_group("C4");
    auto J = jennings_series(C4, 2);
    REQUIRE(J.size() == 3);
    CHECK(J.term(2).elems == std::vector<int>{0, 2});
    CHECK(J.term(3).trivial());

    for (const char* n : {"C2^3", "C3^2", "C5^2"}) {
        auto G = catalog_group(n);
        auto E = jennings_series(G, G->prime());
        CHECK(E.term(1).size() == G->order());
        CHECK(E.term(2).trivial());
    }
    for (const auto& n : p_groups(64, 81)) {
        auto G = catalog_group(n);
        int p = G->prime();
        CAPTURE(n);
        auto Jn = jennings_series(G, p);
        CHECK(same_terms(Jn, dimension_series_recursive(G, p)));
        CHECK(same_terms(Jn, dimension_series_lazard(G, p)));
    }
}

TEST_CASE("Jennings nilpotency class formula") {
    for (const auto& n : p_groups(64, 81)) {
        auto G = catalog_group(n);
        int p = G->prime();
        CAPTURE(n);
        CHECK(augmentation_ideal_powers(G, p).nilpotency_class == jennings_class_formula(G, p));
    }
}

TEST_CASE("annihilator of omega") {
    auto C2 = catalog_group("C2");
    auto A2 = annihilator_omega(C2, 2);
    CHECK(A2.dim() == 1);
    CHECK(A2.contains({1, 1}));

    auto C4 = catalog_group("C4");
    auto y = algebra_unit(C4, 2, 0) + algebra_unit(C4, 2, 1);
    auto cube = pow_elem(y, 3);
    CHECK(cube.coeffs == std::vector<int>{1, 1, 1, 1});
    auto A4 = annihilator_omega(C4, 2);
    CHECK(A4.dim() == 1);
    CHECK(A4.contains(cube.coeffs));

    auto A3 = annihilator_omega(catalog_group("C3"), 3);
    CHECK(A3.contains({1, 1, 1}));
    for (const char* n : {"D8", "Q8", "Heis27", "C2^3"}) {
        auto G = catalog_group(n);
        auto A = annihilator_omega(G, G->prime());
        CHECK(A.dim() == 1);
        CHECK(A.contains(algebra_hat(G, G->prime()).coeffs));
    }
}

TEST_CASE("wreath products") {
    auto C2 = catalog_group("C2");
    auto W = wreath(C2, C2);
    CHECK(W.group->order() == 8);
    CHECK(isomorphic(W.group, catalog_group("D8")));
    W.top.verify();
    CHECK(is_normal(W.base));
    CHECK(lower_central_series(W.group).length() == 2);

    auto C3 = catalog_group("C3");
    auto W3 = wreath(C3, C3);
    CHECK(W3.group->order() == 81);
    CHECK(W3.group->is_p_group(3));
    CHECK(lower_central_series(W3.group).length() == 3);

    // the law, spot-tested on an implicit product too large for a table
    WreathProduct big(catalog_group("C4"), catalog_group("D8"));
    std::mt19937 rng(7);
    auto rnd = [&]() {
        WreathProduct::Elem e{static_cast<int>(rng() % 8), std::vector<int>(8)};
        for (auto& v : e.f) v = static_cast<int>(rng() % 4);
        return e;
    };
    for (int i = 0; i < 200; ++i) {
        auto a = rnd(), b = rnd(), c = rnd();
        CHECK(big.mul(big.mul(a, b), c) == big.mul(a, big.mul(b, c)));
        CHECK(big.mul(a, big.inv(a)) == big.identity());
        CHECK(big.decode(big.code(a)) == a);
    }
    CHECK_THROWS_AS(wreath(catalog_group("C4"), catalog_group("D8")), CapExceeded);
}

TEST_CASE("wreath class is one more than the class of omega") {
    for (const char* n : {"C2", "C4", "C2^2", "C3", "C8"}) {
        auto H = catalog_group(n);
        int p = H->prime();
        auto W = wreath(cyclic(p), H);
        CAPTURE(n);
        CHECK(lower_central_series(W.group).length() == 1 + augmentation_ideal_powers(H, p).nilpotency_class);
    }
}

TEST_CASE("standard embeddings") {
    auto C4 = catalog_group("C4");
    auto C2 = catalog_group("C2");
    Homomorphism theta{C4, C2, {0, 1, 0, 1}};
    auto E = standard_embedding(theta);
    CHECK(E.W.group->order() == 8);
    CHECK(E.alpha.is_homomorphism());
    CHECK(E.alpha.is_injective());
    auto img = E.alpha.image();
    CHECK(img.size() == 4);
    CHECK(isomorphic(materialize(img).group, C4));
    CHECK(isomorphic(E.W.group, catalog_group("D8")));

    // trivial theta: every f_a is constant
    auto Q8 = catalog_group("Q8");
    Homomorphism triv{Q8, C2, std::vector<int>(8, 0)};
    auto Et = standard_embedding(triv, Caps{});
    for (int a = 0; a < 8; ++a) {
        auto e = Et.W.product.decode(Et.W.element_code[Et.alpha(a)]);
        CHECK(e.top == 0);
        CHECK(e.f[0] == e.f[1]);
    }

    // A = X x H with X central: f_r = r hat H
    auto P = direct_product(C2, catalog_group("C4"));
    auto E2 = standard_embedding(P.pr2);
    for (int x : P.in1.image().elems) {
        auto e = E2.W.product.decode(E2.W.element_code[E2.alpha(x)]);
        CHECK(e.top == 0);
        for (int k = 1; k < 4; ++k) CHECK(e.f[k] == e.f[0]);
    }
    // kernel mismatch is reported
    Homomorphism wrong{C4, C2, {0, 1, 0, 1}};
    auto X = materialize(subgroup_generated(C4, {1}));
    CHECK_THROWS_AS(standard_embedding(wrong, identity_hom(X.group)), Error);
}

TEST_CASE("standard embeddings are injective homomorphisms") {
    for (const char* n : {"D8", "Q8", "C4xC2", "C8", "D16", "M16", "Heis27"}) {
        auto A = catalog_group(n);
        for (const auto& N : normal_subgroups(A)) {
            auto Q = quotient(A, N);
            Caps c;
            c.order = 1 << 14;
            WreathProduct wp(materialize(N).group, Q.group);
            if (wp.log2_order() > 12) continue;
            auto E = standard_embedding(Q.proj, c);
            CAPTURE(n);
            CHECK(E.alpha.is_injective());
            CHECK(E.alpha.is_homomorphism());
        }
    }
}

TEST_CASE("Buckley equalities") {
    auto r = buckley_check(2, catalog_group("C2"), 2);
    CHECK(r.holds);
    CHECK(r.levels[1].dim_gamma == 1);
    CHECK(r.levels[1].dim_omega == 1);

    auto r4 = buckley_check(2, catalog_group("C4"), 3);
    CHECK(r4.holds);
    for (const auto& L : r4.levels) CHECK(L.equal);

    auto r3 = buckley_check(3, catalog_group("C3"), 3);
    CHECK(r3.holds);

    auto rt = buckley_check(5, trivial_group(), 2);
    CHECK(rt.holds);
    CHECK(rt.levels[1].dim_omega == 0);
    CHECK(rt.levels[1].dim_gamma == 0);

    CHECK_THROWS_AS(buckley_check(2, catalog_group("C2^3"), 1, Caps{256}), CapExceeded);
}

TEST_CASE("fully invariant subgroups meet the base in their projection") {
    for (const char* n : {"C2", "C4", "C2^2", "C3"}) {
        auto H = catalog_group(n);
        int p = H->prime();
        auto W = wreath(cyclic(p), H);
        int nb = W.base.size();
        for (const auto& F : {lower_central_series(W.group), lower_central_p_series(W.group, p)}) {
            for (int k = 1; k <= F.size(); ++k) {
                const auto& S = F.term(k);
                std::set<std::vector<int>> meet, proj;
                for (int w : S.elems) {
                    auto e = W.product.decode(W.element_code[w]);
                    proj.insert(e.f);
                    if (w < nb) meet.insert(e.f);
                }
                CHECK(meet == proj);
                // left ideal: closed under left translation by H
                for (const auto& f : meet)
                    for (int h = 0; h < H->order(); ++h) CHECK(meet.count(left_translate(*H, h, f)));
            }
        }
    }
}
