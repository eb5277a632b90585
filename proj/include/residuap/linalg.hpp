#pragma once

#include <optional>
#include <vector>

namespace residuap {

using Vec = std::vector<int>;
using Mat = std::vector<Vec>;

int mod(long long a, int p);
int inv_mod(int a, int p);

// Row space over F_p kept in reduced echelon form.
class RowSpace {
public:
    RowSpace(int p, int n) : p_(p), n_(n) {}
    int p() const { return p_; }
    int width() const { return n_; }
    int dim() const { return static_cast<int>(rows_.size()); }
    // true if v was not in the span
    bool add(Vec v);
    bool contains(const Vec& v) const;
    Vec reduce(Vec v) const;
    const Mat& rows() const { return rows_; }
    const std::vector<int>& pivots() const { return piv_; }
    bool operator==(const RowSpace& o) const { return rows_ == o.rows_; }

private:
    int p_, n_;
    Mat rows_;
    std::vector<int> piv_;
};

int rank(const Mat& M, int p);
Mat rref(const Mat& M, int p);
// basis of {x : M x = 0}
Mat nullspace(const Mat& M, int p);
std::optional<Mat> inverse(const Mat& M, int p);
Mat mat_mul(const Mat& A, const Mat& B, int p);
Vec vec_mat(const Vec& v, const Mat& M, int p);  // row vector times matrix
Mat identity_mat(int n);
RowSpace span(const Mat& rows, int p, int n);
RowSpace intersect(const RowSpace& A, const RowSpace& B);
// solve x M = b (x a row vector), if possible
std::optional<Vec> solve_left(const Mat& M, const Vec& b, int p);

// Integer matrices.
using IMat = std::vector<std::vector<long long>>;

struct Smith {
    IMat D, U, V;                 // U * M * V = D
    std::vector<long long> diag;  // nonzero diagonal entries, each dividing the next
    int rows = 0, cols = 0;
};
Smith smith_normal_form(const IMat& M);
IMat imat_mul(const IMat& A, const IMat& B);
long long idet(IMat M);  // exact for small matrices (Bareiss)

}  // namespace residuap
