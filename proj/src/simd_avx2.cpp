// AVX2 lane. Mirrors the scalar lane's canonical operation order exactly:
// vector lane j holds the partial sum over indices congruent to j mod 4, and
// elementwise ops use plain mul/add (no FMA), so results match the scalar
// lane bit-for-bit. This file is compiled with -mavx2 and only ever called
// after a runtime CPU check.

#if defined(BANF_HAVE_AVX2_LANE)

#include <cmath>
#include <immintrin.h>

#include "simd_backends.hpp"

namespace banf::simd {
namespace {

inline double hsum4(__m256d acc) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    double s = hsum4(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum4(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

void axpy_avx2(double* y, double alpha, const double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void relu_avx2(double* y, const double* x, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_avx2(double* dx, const double* x, const double* dy, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
        const __m256d add = _mm256_and_pd(mask, _mm256_loadu_pd(dy + i));
        _mm256_storeu_pd(dx + i, _mm256_add_pd(_mm256_loadu_pd(dx + i), add));
    }
    for (; i < n; ++i)
        if (x[i] > 0.0) dx[i] += dy[i];
    return;
}

bool all_finite_avx2(const double* x, std::size_t n) {
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    const __m256d inf = _mm256_set1_pd(__builtin_inf());
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a = _mm256_and_pd(_mm256_loadu_pd(x + i), abs_mask);
        // NaN compares false against anything, so it fails the < inf test too.
        const __m256d ok = _mm256_cmp_pd(a, inf, _CMP_LT_OQ);
        if (_mm256_movemask_pd(ok) != 0xf) return false;
    }
    for (; i < n; ++i)
        if (!std::isfinite(x[i])) return false;
    return true;
}

void affine_fwd_avx2(double* y, const double* x, const double* w, const double* b,
                     std::size_t rows, std::size_t in, std::size_t out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x + r * in;
        double* yr = y + r * out;
        for (std::size_t o = 0; o < out; ++o) yr[o] = dot_avx2(xr, w + o * in, in) + b[o];
    }
}

void affine_bwd_input_avx2(double* dx, const double* dy, const double* w,
                           std::size_t rows, std::size_t in, std::size_t out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* dyr = dy + r * out;
        double* dxr = dx + r * in;
        for (std::size_t o = 0; o < out; ++o) axpy_avx2(dxr, dyr[o], w + o * in, in);
    }
}

void affine_bwd_params_avx2(double* dw, double* db, const double* dy, const double* x,
                            std::size_t rows, std::size_t in, std::size_t out,
                            std::size_t o_begin, std::size_t o_end) {
    for (std::size_t o = o_begin; o < o_end; ++o) {
        double* dwo = dw + o * in;
        double acc = db[o];
        for (std::size_t r = 0; r < rows; ++r) {
            const double g = dy[r * out + o];
            axpy_avx2(dwo, g, x + r * in, in);
            acc += g;
        }
        db[o] = acc;
    }
}

void sgd_avx2(double* p, const double* g, std::size_t n, double lr) {
    const __m256d vlr = _mm256_set1_pd(lr);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vp = _mm256_loadu_pd(p + i);
        vp = _mm256_sub_pd(vp, _mm256_mul_pd(vlr, _mm256_loadu_pd(g + i)));
        _mm256_storeu_pd(p + i, vp);
    }
    for (; i < n; ++i) p[i] -= lr * g[i];
}

void rmsprop_avx2(double* p, double* acc, const double* g, std::size_t n,
                  double lr, double decay, double eps) {
    const __m256d vd = _mm256_set1_pd(decay);
    const __m256d vod = _mm256_set1_pd(1.0 - decay);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vg = _mm256_loadu_pd(g + i);
        __m256d va = _mm256_loadu_pd(acc + i);
        va = _mm256_add_pd(_mm256_mul_pd(vd, va), _mm256_mul_pd(vod, _mm256_mul_pd(vg, vg)));
        _mm256_storeu_pd(acc + i, va);
        const __m256d denom = _mm256_sqrt_pd(_mm256_add_pd(va, veps));
        __m256d vp = _mm256_loadu_pd(p + i);
        vp = _mm256_sub_pd(vp, _mm256_div_pd(_mm256_mul_pd(vlr, vg), denom));
        _mm256_storeu_pd(p + i, vp);
    }
    const double one_minus = 1.0 - decay;
    for (; i < n; ++i) {
        acc[i] = decay * acc[i] + one_minus * (g[i] * g[i]);
        p[i] -= lr * g[i] / std::sqrt(acc[i] + eps);
    }
}

void adam_avx2(double* p, double* m, double* v, const double* g, std::size_t n,
               double lr, double beta1, double beta2, double eps,
               double bc1, double bc2) {
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d vo1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d vo2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d vbc1 = _mm256_set1_pd(bc1);
    const __m256d vbc2 = _mm256_set1_pd(bc2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vg = _mm256_loadu_pd(g + i);
        __m256d vm = _mm256_loadu_pd(m + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        vm = _mm256_add_pd(_mm256_mul_pd(vb1, vm), _mm256_mul_pd(vo1, vg));
        vv = _mm256_add_pd(_mm256_mul_pd(vb2, vv), _mm256_mul_pd(vo2, _mm256_mul_pd(vg, vg)));
        _mm256_storeu_pd(m + i, vm);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mh = _mm256_mul_pd(vm, vbc1);
        const __m256d vh = _mm256_mul_pd(vv, vbc2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vh), veps);
        __m256d vp = _mm256_loadu_pd(p + i);
        vp = _mm256_sub_pd(vp, _mm256_div_pd(_mm256_mul_pd(vlr, mh), denom));
        _mm256_storeu_pd(p + i, vp);
    }
    const double om1 = 1.0 - beta1;
    const double om2 = 1.0 - beta2;
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + om1 * g[i];
        v[i] = beta2 * v[i] + om2 * (g[i] * g[i]);
        const double mh = m[i] * bc1;
        const double vh = v[i] * bc2;
        p[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
}

} // namespace

const Ops kAvx2Ops = {
    dot_avx2,
    sum_avx2,
    axpy_avx2,
    relu_avx2,
    relu_bwd_avx2,
    all_finite_avx2,
    affine_fwd_avx2,
    affine_bwd_input_avx2,
    affine_bwd_params_avx2,
    sgd_avx2,
    rmsprop_avx2,
    adam_avx2,
};

} // namespace banf::simd

#endif // BANF_HAVE_AVX2_LANE
