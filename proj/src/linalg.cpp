#include "residuap/linalg.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>

namespace residuap {

int mod(long long a, int p) {
    long long r = a % p;
    return static_cast<int>(r < 0 ? r + p : r);
}

int inv_mod(int a, int p) {
    long long t = 0, nt = 1, r = p, nr = mod(a, p);
    while (nr) {
        long long q = r / nr;
        t -= q * nt;
        std::swap(t, nt);
        r -= q * nr;
        std::swap(r, nr);
    }
    if (r != 1) throw std::domain_error("inv_mod: not invertible");
    return mod(t, p);
}

Vec RowSpace::reduce(Vec v) const {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        int c = v[piv_[i]];
        if (!c) continue;
        for (int k = 0; k < n_; ++k) v[k] = mod(v[k] - static_cast<long long>(c) * rows_[i][k], p_);
    }
    return v;
}

bool RowSpace::contains(const Vec& v) const {
    Vec r = reduce(v);
    return std::all_of(r.begin(), r.end(), [](int x) { return x == 0; });
}

bool RowSpace::add(Vec v) {
    for (auto& x : v) x = mod(x, p_);
    v = reduce(std::move(v));
    int pc = -1;
    for (int k = 0; k < n_; ++k)
        if (v[k]) {
            pc = k;
            break;
        }
    if (pc < 0) return false;
    int s = inv_mod(v[pc], p_);
    for (auto& x : v) x = static_cast<int>(static_cast<long long>(x) * s % p_);
    for (auto& row : rows_) {
        int c = row[pc];
        if (!c) continue;
        for (int k = 0; k < n_; ++k) row[k] = mod(row[k] - static_cast<long long>(c) * v[k], p_);
    }
    auto pos = std::lower_bound(piv_.begin(), piv_.end(), pc) - piv_.begin();
    piv_.insert(piv_.begin() + pos, pc);
    rows_.insert(rows_.begin() + pos, std::move(v));
    return true;
}

RowSpace span(const Mat& rows, int p, int n) {
    RowSpace s(p, n);
    for (const auto& r : rows) s.add(r);
    return s;
}

int rank(const Mat& M, int p) {
    if (M.empty()) return 0;
    return span(M, p, static_cast<int>(M[0].size())).dim();
}

Mat rref(const Mat& M, int p) {
    if (M.empty()) return {};
    return span(M, p, static_cast<int>(M[0].size())).rows();
}

Mat nullspace(const Mat& M, int p) {
    if (M.empty()) return {};
    int n = static_cast<int>(M[0].size());
    RowSpace s = span(M, p, n);
    const auto& piv = s.pivots();
    Mat basis;
    for (int f = 0; f < n; ++f) {
        if (std::binary_search(piv.begin(), piv.end(), f)) continue;
        Vec x(n, 0);
        x[f] = 1;
        for (std::size_t i = 0; i < piv.size(); ++i) x[piv[i]] = mod(-s.rows()[i][f], p);
        basis.push_back(std::move(x));
    }
    return basis;
}

Mat identity_mat(int n) {
    Mat I(n, Vec(n, 0));
    for (int i = 0; i < n; ++i) I[i][i] = 1;
    return I;
}

Mat mat_mul(const Mat& A, const Mat& B, int p) {
    if (A.empty()) return {};
    std::size_t m = B.empty() ? 0 : B[0].size();
    Mat C(A.size(), Vec(m, 0));
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t k = 0; k < B.size(); ++k) {
            int a = A[i][k];
            if (!a) continue;
            for (std::size_t j = 0; j < m; ++j)
                C[i][j] = static_cast<int>((C[i][j] + static_cast<long long>(a) * B[k][j]) % p);
        }
    return C;
}

Vec vec_mat(const Vec& v, const Mat& M, int p) {
    std::size_t m = M.empty() ? 0 : M[0].size();
    Vec r(m, 0);
    for (std::size_t k = 0; k < M.size(); ++k) {
        if (!v[k]) continue;
        for (std::size_t j = 0; j < m; ++j)
            r[j] = static_cast<int>((r[j] + static_cast<long long>(v[k]) * M[k][j]) % p);
    }
    return r;
}

namespace {

// Gauss-Jordan on packed rows [A | I] over F_2
std::optional<Mat> inverse_f2(const Mat& M) {
    int n = static_cast<int>(M.size());
    int w = (2 * n + 63) / 64;
    std::vector<std::vector<std::uint64_t>> R(n, std::vector<std::uint64_t>(w, 0));
    auto set = [](std::vector<std::uint64_t>& row, int j) { row[j / 64] |= std::uint64_t{1} << (j % 64); };
    auto get = [](const std::vector<std::uint64_t>& row, int j) { return (row[j / 64] >> (j % 64)) & 1; };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            if (M[i][j] & 1) set(R[i], j);
        set(R[i], n + i);
    }
    for (int c = 0; c < n; ++c) {
        int r = c;
        while (r < n && !get(R[r], c)) ++r;
        if (r == n) return std::nullopt;
        std::swap(R[r], R[c]);
        for (int r2 = 0; r2 < n; ++r2)
            if (r2 != c && get(R[r2], c))
                for (int k = c / 64; k < w; ++k) R[r2][k] ^= R[c][k];
    }
    Mat I(n, Vec(n, 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) I[i][j] = static_cast<int>(get(R[i], n + j));
    return I;
}

}  // namespace

std::optional<Mat> inverse(const Mat& M, int p) {
    if (p == 2) return inverse_f2(M);
    int n = static_cast<int>(M.size());
    Mat A = M;
    for (auto& row : A)
        for (auto& x : row) x = mod(x, p);
    Mat I = identity_mat(n);
    for (int c = 0; c < n; ++c) {
        int r = c;
        while (r < n && A[r][c] == 0) ++r;
        if (r == n) return std::nullopt;
        std::swap(A[r], A[c]);
        std::swap(I[r], I[c]);
        int s = inv_mod(A[c][c], p);
        for (int k = 0; k < n; ++k) {
            A[c][k] = A[c][k] * s % p;
            I[c][k] = I[c][k] * s % p;
        }
        for (int r2 = 0; r2 < n; ++r2) {
            if (r2 == c) continue;
            int f = A[r2][c];
            if (!f) continue;
            int g = p - f;
            for (int k = 0; k < n; ++k) {
                if (A[c][k]) A[r2][k] = (A[r2][k] + g * A[c][k]) % p;
                if (I[c][k]) I[r2][k] = (I[r2][k] + g * I[c][k]) % p;
            }
        }
    }
    return I;
}

RowSpace intersect(const RowSpace& A, const RowSpace& B) {
    // x in A ∩ B iff x = a M_A = b M_B; solve [M_A; -M_B] kernel from the left
    int n = A.width(), p = A.p();
    int da = A.dim(), db = B.dim();
    RowSpace out(p, n);
    if (!da || !db) return out;
    // columns: unknowns (a, b); equations: n coordinates
    Mat E(n, Vec(da + db, 0));
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < da; ++i) E[k][i] = A.rows()[i][k];
        for (int i = 0; i < db; ++i) E[k][da + i] = mod(-B.rows()[i][k], p);
    }
    for (const auto& sol : nullspace(E, p)) {
        Vec x(n, 0);
        for (int i = 0; i < da; ++i)
            for (int k = 0; k < n; ++k) x[k] = static_cast<int>((x[k] + static_cast<long long>(sol[i]) * A.rows()[i][k]) % p);
        out.add(x);
    }
    return out;
}

std::optional<Vec> solve_left(const Mat& M, const Vec& b, int p) {
    // x M = b  <=>  M^T x^T = b^T
    int r = static_cast<int>(M.size());
    int n = static_cast<int>(b.size());
    // augmented system over unknowns x (r of them): rows = coordinates
    Mat A(n, Vec(r + 1, 0));
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < r; ++i) A[k][i] = mod(M[i][k], p);
        A[k][r] = mod(b[k], p);
    }
    RowSpace s = span(A, p, r + 1);
    Vec x(r, 0);
    for (std::size_t i = 0; i < s.pivots().size(); ++i) {
        int pc = s.pivots()[i];
        if (pc == r) return std::nullopt;
        x[pc] = s.rows()[i][r];
    }
    return x;
}

// -- integers ---------------------------------------------------------------

IMat imat_mul(const IMat& A, const IMat& B) {
    if (A.empty()) return {};
    std::size_t m = B.empty() ? 0 : B[0].size();
    IMat C(A.size(), std::vector<long long>(m, 0));
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t k = 0; k < B.size(); ++k)
            for (std::size_t j = 0; j < m; ++j) C[i][j] += A[i][k] * B[k][j];
    return C;
}

long long idet(IMat M) {
    int n = static_cast<int>(M.size());
    if (n == 0) return 1;
    long long sign = 1, prev = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (M[k][k] == 0) {
            int r = k + 1;
            while (r < n && M[r][k] == 0) ++r;
            if (r == n) return 0;
            std::swap(M[r], M[k]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) / prev;
        prev = M[k][k];
    }
    return sign * M[n - 1][n - 1];
}

Smith smith_normal_form(const IMat& M0) {
    Smith s;
    s.rows = static_cast<int>(M0.size());
    s.cols = s.rows ? static_cast<int>(M0[0].size()) : 0;
    int m = s.rows, n = s.cols;
    IMat D = M0;
    IMat U(m, std::vector<long long>(m, 0)), V(n, std::vector<long long>(n, 0));
    for (int i = 0; i < m; ++i) U[i][i] = 1;
    for (int j = 0; j < n; ++j) V[j][j] = 1;
    auto row_op = [&](int dst, int src, long long f) {  // row dst -= f * row src
        for (int j = 0; j < n; ++j) D[dst][j] -= f * D[src][j];
        for (int j = 0; j < m; ++j) U[dst][j] -= f * U[src][j];
    };
    auto col_op = [&](int dst, int src, long long f) {  // col dst -= f * col src
        for (int i = 0; i < m; ++i) D[i][dst] -= f * D[i][src];
        for (int i = 0; i < n; ++i) V[i][dst] -= f * V[i][src];
    };
    auto swap_rows = [&](int a, int b) {
        std::swap(D[a], D[b]);
        std::swap(U[a], U[b]);
    };
    auto swap_cols = [&](int a, int b) {
        for (int i = 0; i < m; ++i) std::swap(D[i][a], D[i][b]);
        for (int i = 0; i < n; ++i) std::swap(V[i][a], V[i][b]);
    };
    int t = 0;
    while (t < m && t < n) {
        // pivot: smallest nonzero absolute value in the remaining block
        long long best = 0;
        int bi = -1, bj = -1;
        for (int i = t; i < m; ++i)
            for (int j = t; j < n; ++j)
                if (D[i][j] && (best == 0 || std::llabs(D[i][j]) < best)) {
                    best = std::llabs(D[i][j]);
                    bi = i;
                    bj = j;
                }
        if (bi < 0) break;
        swap_rows(t, bi);
        swap_cols(t, bj);
        bool clean = false;
        while (!clean) {
            clean = true;
            for (int i = t + 1; i < m; ++i) {
                long long q = D[i][t] / D[t][t];
                if (q) row_op(i, t, q);
                if (D[i][t]) {
                    clean = false;
                    if (std::llabs(D[i][t]) < std::llabs(D[t][t])) swap_rows(i, t);
                }
            }
            for (int j = t + 1; j < n; ++j) {
                long long q = D[t][j] / D[t][t];
                if (q) col_op(j, t, q);
                if (D[t][j]) {
                    clean = false;
                    if (std::llabs(D[t][j]) < std::llabs(D[t][t])) swap_cols(j, t);
                }
            }
            if (clean) {
                // divisibility: the pivot must divide every remaining entry
                for (int i = t + 1; i < m && clean; ++i)
                    for (int j = t + 1; j < n; ++j)
                        if (D[i][j] % D[t][t]) {
                            // add row i to row t and continue reducing
                            row_op(t, i, -1);
                            clean = false;
                            break;
                        }
            }
        }
        if (D[t][t] < 0) {
            for (int j = 0; j < n; ++j) D[t][j] = -D[t][j];
            for (int j = 0; j < m; ++j) U[t][j] = -U[t][j];
        }
        s.diag.push_back(D[t][t]);
        ++t;
    }
    s.D = std::move(D);
    s.U = std::move(U);
    s.V = std::move(V);
    return s;
}

}  // namespace residuap
