#include "residuap/abelian.hpp"

#include <numeric>

#include "residuap/catalog.hpp"

namespace residuap {

namespace {

long long ext_gcd(long long a, long long b, long long& x, long long& y) {
    if (b == 0) {
        x = a >= 0 ? 1 : -1;
        y = 0;
        return std::llabs(a);
    }
    long long x1, y1;
    long long g = ext_gcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

long long pmod(long long a, long long m) {
    a %= m;
    return a < 0 ? a + m : a;
}

// Hermite-style insertion into a lattice containing e Z^n; entries stay below e.
void lattice_insert(IMat& H, std::vector<long long> v, long long e) {
    int n = static_cast<int>(v.size());
    for (auto& c : v) c = pmod(c, e);
    for (int i = 0; i < n; ++i) {
        if (v[i] == 0) continue;
        if (H[i][i] == 0) {
            H[i] = v;
            return;
        }
        long long a, b;
        long long g = ext_gcd(H[i][i], v[i], a, b);
        long long hq = H[i][i] / g, vq = v[i] / g;
        std::vector<long long> r(n), w(n);
        for (int j = 0; j < n; ++j) {
            r[j] = a * H[i][j] + b * v[j];
            w[j] = hq * v[j] - vq * H[i][j];
        }
        for (int j = i + 1; j < n; ++j) {
            r[j] = pmod(r[j], e);
            w[j] = pmod(w[j], e);
        }
        H[i] = r;
        v = w;
    }
}

}  // namespace

AbelianCoords abelian_coordinates(const GroupPtr& A) {
    if (!A->is_abelian()) throw Error("group " + A->name() + " is not abelian");
    AbelianCoords ac;
    ac.group = A;
    ac.gens = generators(whole_group(A));
    int n = A->order(), r = static_cast<int>(ac.gens.size());
    ac.coords.assign(n, {});
    ac.coords[0].assign(r, 0);
    std::vector<int> order{0};
    for (std::size_t q = 0; q < order.size(); ++q) {
        int x = order[q];
        for (int i = 0; i < r; ++i) {
            int y = A->mul(x, ac.gens[i]);
            if (!ac.coords[y].empty()) continue;
            ac.coords[y] = ac.coords[x];
            ac.coords[y][i] += 1;
            order.push_back(y);
        }
    }
    long long e = 1;
    for (int x = 0; x < n; ++x) e = std::lcm(e, static_cast<long long>(A->element_order(x)));
    IMat H(r, std::vector<long long>(r, 0));
    for (int i = 0; i < r; ++i) {
        std::vector<long long> v(r, 0);
        v[i] = e;
        H[i] = v;
    }
    for (int x = 0; x < n; ++x)
        for (int i = 0; i < r; ++i) {
            std::vector<long long> v = ac.coords[x];
            v[i] += 1;
            const auto& w = ac.coords[A->mul(x, ac.gens[i])];
            for (int j = 0; j < r; ++j) v[j] -= w[j];
            lattice_insert(H, v, e);
        }
    ac.relations = H;
    return ac;
}

bool Cokernel::finite() const {
    for (auto o : orders)
        if (o == 0) return false;
    return true;
}

int Cokernel::free_rank() const {
    int r = 0;
    for (auto o : orders) r += o == 0;
    return r;
}

std::vector<long long> Cokernel::torsion() const {
    std::vector<long long> t;
    for (auto o : orders)
        if (o) t.push_back(o);
    return t;
}

std::vector<long long> Cokernel::reduce(const std::vector<long long>& x) const {
    if (static_cast<int>(x.size()) != ngens) throw Error("cokernel: vector has the wrong length");
    std::vector<long long> out(orders.size());
    for (std::size_t k = 0; k < orders.size(); ++k) {
        long long y = 0;
        for (int i = 0; i < ngens; ++i) y += x[i] * V[i][cols[k]];
        out[k] = orders[k] ? pmod(y, orders[k]) : y;
    }
    return out;
}

int Cokernel::element(const std::vector<long long>& x) const {
    if (!finite()) throw Error("cokernel is infinite");
    auto r = reduce(x);
    long long idx = 0;
    for (std::size_t k = 0; k < orders.size(); ++k) idx = idx * orders[k] + r[k];
    return static_cast<int>(idx);
}

Cokernel cokernel(const IMat& relations, int ngens) {
    Cokernel c;
    c.ngens = ngens;
    std::vector<long long> diag;
    if (relations.empty() || ngens == 0) {
        c.V.assign(ngens, std::vector<long long>(ngens, 0));
        for (int i = 0; i < ngens; ++i) c.V[i][i] = 1;
    } else {
        for (const auto& row : relations)
            if (static_cast<int>(row.size()) != ngens) throw Error("cokernel: relation has the wrong length");
        auto s = smith_normal_form(relations);
        c.V = s.V;
        diag = s.diag;
    }
    for (int i = 0; i < ngens; ++i) {
        long long d = i < static_cast<int>(diag.size()) ? std::llabs(diag[i]) : 0;
        if (d == 1) continue;
        c.orders.push_back(d);
        c.cols.push_back(i);
    }
    if (c.finite()) {
        long long total = 1;
        for (auto o : c.orders) {
            total *= o;
            if (total > (1 << 24)) throw CapExceeded("cokernel: finite group too large to tabulate");
        }
        std::vector<int> ords(c.orders.begin(), c.orders.end());
        c.group = ords.empty() ? trivial_group() : abelian(ords);
    }
    return c;
}

AbelianInvariants invariants(const Cokernel& c) { return {c.torsion(), c.free_rank()}; }

AbelianInvariants invariants(const GroupPtr& A) {
    auto ac = abelian_coordinates(A);
    return invariants(cokernel(ac.relations, static_cast<int>(ac.gens.size())));
}

AbelianColimit abelian_colimit(const std::vector<GroupPtr>& groups, const std::vector<Identification>& ids) {
    std::vector<AbelianCoords> co;
    std::vector<int> off{0};
    for (const auto& g : groups) {
        co.push_back(abelian_coordinates(g));
        off.push_back(off.back() + static_cast<int>(co.back().gens.size()));
    }
    int n = off.back();
    IMat rel;
    for (std::size_t v = 0; v < groups.size(); ++v)
        for (const auto& row : co[v].relations) {
            std::vector<long long> r(n, 0);
            for (std::size_t j = 0; j < row.size(); ++j) r[off[v] + j] = row[j];
            rel.push_back(r);
        }
    for (const auto& id : ids) {
        if (id.a < 0 || id.a >= static_cast<int>(groups.size()) || id.b < 0 || id.b >= static_cast<int>(groups.size()))
            throw Error("colimit: identification names a missing group");
        std::vector<long long> r(n, 0);
        const auto& ca = co[id.a].coords.at(id.x);
        const auto& cb = co[id.b].coords.at(id.y);
        for (std::size_t j = 0; j < ca.size(); ++j) r[off[id.a] + j] += ca[j];
        for (std::size_t j = 0; j < cb.size(); ++j) r[off[id.b] + j] -= cb[j];
        rel.push_back(r);
    }
    auto ck = cokernel(rel, n);
    AbelianColimit out;
    out.group = ck.group;
    for (std::size_t v = 0; v < groups.size(); ++v) {
        Homomorphism h{groups[v], ck.group, std::vector<int>(groups[v]->order())};
        for (int x = 0; x < groups[v]->order(); ++x) {
            std::vector<long long> e(n, 0);
            for (std::size_t j = 0; j < co[v].coords[x].size(); ++j) e[off[v] + j] = co[v].coords[x][j];
            h.map[x] = ck.element(e);
        }
        h.verify();
        out.maps.push_back(std::move(h));
    }
    return out;
}

}  // namespace residuap
