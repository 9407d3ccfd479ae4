#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace gdce {

// Dense row-major matrix of doubles. Small sizes only; the denoiser works in
// stacked-row form (nodes: n x d, pairs: P x d) so everything below is a
// handful of tiny GEMMs.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
    double* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return a.data() + static_cast<std::size_t>(r) * cols; }
    std::size_t size() const { return a.size(); }
    void zero() { std::fill(a.begin(), a.end(), 0.0); }

    bool operator==(const Mat&) const = default;
};

// Y += X * W^T  (X: R x K, W: C x K, Y: R x C) — linear-layer forward.
inline void gemm_nt(const Mat& x, const Mat& w, Mat& y) {
    assert(x.cols == w.cols && y.rows == x.rows && y.cols == w.rows);
    for (int r = 0; r < x.rows; ++r) {
        const double* xr = x.row(r);
        double* yr = y.row(r);
        for (int c = 0; c < w.rows; ++c) {
            const double* wr = w.row(c);
            double acc = 0.0;
            for (int k = 0; k < x.cols; ++k) acc += xr[k] * wr[k];
            yr[c] += acc;
        }
    }
}

// Y += X * W  (X: R x K, W: K x C, Y: R x C) — backward through a linear layer.
inline void gemm_nn(const Mat& x, const Mat& w, Mat& y) {
    assert(x.cols == w.rows && y.rows == x.rows && y.cols == w.cols);
    for (int r = 0; r < x.rows; ++r) {
        const double* xr = x.row(r);
        double* yr = y.row(r);
        for (int k = 0; k < x.cols; ++k) {
            const double xv = xr[k];
            if (xv == 0.0) continue;
            const double* wr = w.row(k);
            for (int c = 0; c < w.cols; ++c) yr[c] += xv * wr[c];
        }
    }
}

// Y += X^T * W  (X: K x R, W: K x C, Y: R x C) — weight gradients.
inline void gemm_tn(const Mat& x, const Mat& w, Mat& y) {
    assert(x.rows == w.rows && y.rows == x.cols && y.cols == w.cols);
    for (int k = 0; k < x.rows; ++k) {
        const double* xr = x.row(k);
        const double* wr = w.row(k);
        for (int r = 0; r < x.cols; ++r) {
            const double xv = xr[r];
            if (xv == 0.0) continue;
            double* yr = y.row(r);
            for (int c = 0; c < w.cols; ++c) yr[c] += xv * wr[c];
        }
    }
}

inline void add_row_broadcast(Mat& y, const Mat& bias) {  // bias: 1 x C
    assert(bias.rows == 1 && bias.cols == y.cols);
    for (int r = 0; r < y.rows; ++r) {
        double* yr = y.row(r);
        for (int c = 0; c < y.cols; ++c) yr[c] += bias.a[c];
    }
}

inline void add_col_sums(const Mat& y, Mat& out) {  // out: 1 x C
    assert(out.rows == 1 && out.cols == y.cols);
    for (int r = 0; r < y.rows; ++r) {
        const double* yr = y.row(r);
        for (int c = 0; c < y.cols; ++c) out.a[c] += yr[c];
    }
}

inline void tanh_inplace(Mat& y) {
    for (double& v : y.a) v = std::tanh(v);
}

// dx = dy ⊙ (1 - y^2), with y the cached tanh output.
inline void tanh_backward(const Mat& y, const Mat& dy, Mat& dx) {
    assert(y.rows == dy.rows && y.cols == dy.cols);
    dx = dy;
    for (std::size_t i = 0; i < y.a.size(); ++i) dx.a[i] *= 1.0 - y.a[i] * y.a[i];
}

inline void axpy(double s, const Mat& x, Mat& y) {
    assert(x.rows == y.rows && x.cols == y.cols);
    for (std::size_t i = 0; i < x.a.size(); ++i) y.a[i] += s * x.a[i];
}

inline Mat mean_rows(const Mat& x) {  // 1 x C
    Mat out(1, x.cols);
    add_col_sums(x, out);
    for (double& v : out.a) v /= x.rows;
    return out;
}

}  // namespace gdce
