#include "residuap/catalog.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>

#include "residuap/io.hpp"

namespace residuap {

namespace {

template <class F>
GroupPtr from_rule(int n, F&& rule, const std::string& name) {
    std::vector<int> mult(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) mult[static_cast<std::size_t>(a) * n + b] = rule(a, b);
    return make_group(n, std::move(mult), name);
}

int ipow(int b, int e) {
    int r = 1;
    while (e--) r *= b;
    return r;
}

}  // namespace

GroupPtr trivial_group() { return make_group(1, {0}, "C1"); }

GroupPtr cyclic(int n) {
    return from_rule(n, [n](int a, int b) { return (a + b) % n; }, "C" + std::to_string(n));
}

GroupPtr elementary_abelian(int p, int r) {
    int n = ipow(p, r);
    return from_rule(
        n,
        [p, r](int a, int b) {
            int c = 0, w = 1;
            for (int i = 0; i < r; ++i) {
                c += ((a % p + b % p) % p) * w;
                a /= p;
                b /= p;
                w *= p;
            }
            return c;
        },
        "C" + std::to_string(p) + "^" + std::to_string(r));
}

GroupPtr abelian(const std::vector<int>& orders) {
    int n = 1;
    std::string name;
    for (int o : orders) {
        n *= o;
        name += (name.empty() ? "C" : "xC") + std::to_string(o);
    }
    return from_rule(
        n,
        [&orders](int a, int b) {
            int c = 0, w = 1;
            for (int i = static_cast<int>(orders.size()) - 1; i >= 0; --i) {
                int o = orders[i];
                c += ((a % o + b % o) % o) * w;
                a /= o;
                b /= o;
                w *= o;
            }
            return c;
        },
        name);
}

GroupPtr metacyclic(int m, int k, int r, const std::string& name) {
    std::vector<int> rp(k);
    rp[0] = 1;
    for (int j = 1; j < k; ++j) rp[j] = rp[j - 1] * r % m;
    if (rp[k - 1] * r % m != 1) throw Error("metacyclic: r^k != 1 mod m");
    return from_rule(
        m * k,
        [&](int x, int y) {
            int i = x % m, j = x / m, a = y % m, b = y / m;
            return ((j + b) % k) * m + (i + rp[j] * a) % m;
        },
        name);
}

GroupPtr dihedral(int order) {
    int n = order / 2;
    return metacyclic(n, 2, n - 1, "D" + std::to_string(order));
}

GroupPtr dicyclic(int order) {
    int m = order / 4, n2 = 2 * m;
    std::string name = (m & (m - 1)) == 0 ? "Q" + std::to_string(order) : "Dic" + std::to_string(order);
    return from_rule(
        order,
        [=](int x, int y) {
            int i = x % n2, j = x / n2, a = y % n2, b = y / n2;
            int e = j ? i - a : i + a;
            int t = j + b;
            if (t == 2) {
                e += m;
                t = 0;
            }
            return t * n2 + ((e % n2) + n2) % n2;
        },
        name);
}

GroupPtr heisenberg(int p) {
    int p2 = p * p;
    return from_rule(
        p * p2,
        [=](int x, int y) {
            int a = x % p, b = x / p % p, c = x / p2;
            int a2 = y % p, b2 = y / p % p, c2 = y / p2;
            return (a + a2) % p + p * ((b + b2) % p) + p2 * ((c + c2 + a * b2) % p);
        },
        "Heis" + std::to_string(p * p2));
}

namespace {

GroupPtr pauli16() {
    // i^k X^a Z^b with Z X = -X Z
    return from_rule(
        16,
        [](int x, int y) {
            int k = x % 4, a = x / 4 % 2, b = x / 8;
            int k2 = y % 4, a2 = y / 4 % 2, b2 = y / 8;
            return (k + k2 + 2 * b * a2) % 4 + 4 * (a ^ a2) + 8 * (b ^ b2);
        },
        "Pauli16");
}

GroupPtr c2sq_c4() {
    // (C4 x C2) : C2 with c a c^-1 = ab, b central
    auto B = abelian({4, 2});
    auto H = cyclic(2);
    std::vector<int> id(8), sh(8);
    for (int x = 0; x < 8; ++x) {
        int i = x / 2, j = x % 2;
        id[x] = x;
        sh[x] = i * 2 + (i + j) % 2;
    }
    GroupAction act{H, B, {id, sh}};
    auto P = semidirect_product(B, H, act, "C2^2:C4");
    return P.group;
}

GroupPtr renamed(const GroupPtr& g, const std::string& name) {
    return make_group(g->order(), g->table(), name);
}

GroupPtr build(const std::string& name) {
    if (name == "1" || name == "C1") return trivial_group();
    static const std::map<std::string, std::vector<int>> ab = {
        {"C4xC2", {4, 2}},     {"C4xC4", {4, 4}}, {"C8xC2", {8, 2}},
        {"C4xC2^2", {4, 2, 2}}, {"C9xC3", {9, 3}}, {"C3xC3", {3, 3}},
        {"C2xC2", {2, 2}}};
    if (auto it = ab.find(name); it != ab.end()) return renamed(abelian(it->second), name);
    if (name == "D8") return dihedral(8);
    if (name == "D16") return dihedral(16);
    if (name == "Q8") return dicyclic(8);
    if (name == "Q16") return dicyclic(16);
    if (name == "SD16") return metacyclic(8, 2, 3, "SD16");
    if (name == "M16") return metacyclic(8, 2, 5, "M16");
    if (name == "C4:C4") return metacyclic(4, 4, 3, "C4:C4");
    if (name == "C9:C3") return metacyclic(9, 3, 4, "C9:C3");
    if (name == "S3") return metacyclic(3, 2, 2, "S3");
    if (name == "C2^2:C4") return c2sq_c4();
    if (name == "Pauli16") return pauli16();
    if (name == "D8xC2") return direct_product(dihedral(8), cyclic(2), "D8xC2").group;
    if (name == "Q8xC2") return direct_product(dicyclic(8), cyclic(2), "Q8xC2").group;
    if (name.rfind("Heis", 0) == 0) {
        int n = std::atoi(name.c_str() + 4);
        for (int p = 2; p * p * p <= n; ++p)
            if (p * p * p == n) return heisenberg(p);
    }
    if (name.size() > 1 && name[0] == 'C') {
        auto caret = name.find('^');
        try {
            if (caret == std::string::npos) {
                std::size_t used = 0;
                int n = std::stoi(name.substr(1), &used);
                if (used + 1 == name.size() && n >= 1) return cyclic(n);
            } else {
                int p = std::stoi(name.substr(1, caret - 1));
                int r = std::stoi(name.substr(caret + 1));
                if (is_prime(p) && r >= 1) return elementary_abelian(p, r);
            }
        } catch (const std::logic_error&) {
        }
    }
    throw Error("unknown catalog group '" + name + "'");
}

}  // namespace

GroupPtr catalog_group(const std::string& name) {
    if (const char* dir = std::getenv("RESIDUAP_CATALOG")) {
        std::ifstream in(std::string(dir) + "/" + name + ".json");
        if (in) return read_group_stream(in, name + ".json");
    }
    static std::map<std::string, GroupPtr> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
    auto g = build(name);
    cache[name] = g;
    return g;
}

std::vector<std::string> catalog_names() {
    std::vector<std::string> v;
    for (int n = 1; n <= 32; ++n) v.push_back("C" + std::to_string(n));
    for (int r = 2; r <= 6; ++r) v.push_back("C2^" + std::to_string(r));
    for (int r = 2; r <= 4; ++r) v.push_back("C3^" + std::to_string(r));
    for (const char* s : {"C5^2", "C7^2", "C4xC2", "C4xC4", "C8xC2", "C4xC2^2", "C9xC3", "D8", "Q8",
                          "D16", "SD16", "Q16", "M16", "C4:C4", "C2^2:C4", "D8xC2", "Q8xC2",
                          "Pauli16", "Heis27", "C9:C3", "S3"})
        v.push_back(s);
    return v;
}

std::vector<std::string> catalog_p_group_names() {
    std::vector<std::string> v;
    for (const auto& n : catalog_names()) {
        auto g = catalog_group(n);
        if (g->order() > 1 && g->prime() > 0) v.push_back(n);
    }
    return v;
}

std::vector<std::string> two_groups_upto16() {
    return {"C1",      "C2",      "C4",     "C2^2",  "C8",   "C4xC2", "C2^3",  "D8",
            "Q8",      "C16",     "C4xC4",  "C2^2:C4", "C4:C4", "C8xC2", "M16", "D16",
            "SD16",    "Q16",     "C4xC2^2", "D8xC2", "Q8xC2", "Pauli16", "C2^4"};
}

}  // namespace residuap
