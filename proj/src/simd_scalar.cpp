// Reference lane. The loop structure below defines the canonical operation
// order that every other lane must reproduce bit-for-bit.

#include <cmath>

#include "simd_backends.hpp"

namespace banf::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_scalar(const double* x, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += x[i];
        s1 += x[i + 1];
        s2 += x[i + 2];
        s3 += x[i + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; i < n; ++i) s += x[i];
    return s;
}

void axpy_scalar(double* y, double alpha, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void relu_scalar(double* y, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_scalar(double* dx, const double* x, const double* dy, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (x[i] > 0.0) dx[i] += dy[i];
}

bool all_finite_scalar(const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(x[i])) return false;
    return true;
}

void affine_fwd_scalar(double* y, const double* x, const double* w, const double* b,
                       std::size_t rows, std::size_t in, std::size_t out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x + r * in;
        double* yr = y + r * out;
        for (std::size_t o = 0; o < out; ++o) yr[o] = dot_scalar(xr, w + o * in, in) + b[o];
    }
}

void affine_bwd_input_scalar(double* dx, const double* dy, const double* w,
                             std::size_t rows, std::size_t in, std::size_t out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* dyr = dy + r * out;
        double* dxr = dx + r * in;
        for (std::size_t o = 0; o < out; ++o) axpy_scalar(dxr, dyr[o], w + o * in, in);
    }
}

void affine_bwd_params_scalar(double* dw, double* db, const double* dy, const double* x,
                              std::size_t rows, std::size_t in, std::size_t out,
                              std::size_t o_begin, std::size_t o_end) {
    for (std::size_t o = o_begin; o < o_end; ++o) {
        double* dwo = dw + o * in;
        double acc = db[o];
        for (std::size_t r = 0; r < rows; ++r) {
            const double g = dy[r * out + o];
            axpy_scalar(dwo, g, x + r * in, in);
            acc += g;
        }
        db[o] = acc;
    }
}

void sgd_scalar(double* p, const double* g, std::size_t n, double lr) {
    for (std::size_t i = 0; i < n; ++i) p[i] -= lr * g[i];
}

void rmsprop_scalar(double* p, double* acc, const double* g, std::size_t n,
                    double lr, double decay, double eps) {
    const double one_minus = 1.0 - decay;
    for (std::size_t i = 0; i < n; ++i) {
        acc[i] = decay * acc[i] + one_minus * (g[i] * g[i]);
        p[i] -= lr * g[i] / std::sqrt(acc[i] + eps);
    }
}

void adam_scalar(double* p, double* m, double* v, const double* g, std::size_t n,
                 double lr, double beta1, double beta2, double eps,
                 double bc1, double bc2) {
    const double om1 = 1.0 - beta1;
    const double om2 = 1.0 - beta2;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + om1 * g[i];
        v[i] = beta2 * v[i] + om2 * (g[i] * g[i]);
        const double mh = m[i] * bc1;
        const double vh = v[i] * bc2;
        p[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
}

} // namespace

const Ops kScalarOps = {
    dot_scalar,
    sum_scalar,
    axpy_scalar,
    relu_scalar,
    relu_bwd_scalar,
    all_finite_scalar,
    affine_fwd_scalar,
    affine_bwd_input_scalar,
    affine_bwd_params_scalar,
    sgd_scalar,
    rmsprop_scalar,
    adam_scalar,
};

} // namespace banf::simd
