#pragma once

#include <cstddef>
#include <string>

namespace banf::simd {

// Lane-dispatched arithmetic kernels for the training inner loops.
//
// Every backend implements the same canonical operation order: reductions use
// four interleaved partial sums combined as (s0+s1)+(s2+s3) plus a sequential
// tail, and elementwise ops keep one accumulation chain per element. IEEE-754
// add/mul/div/sqrt are exactly specified, so all lanes produce bit-identical
// results; the equivalence tests assert exact equality, and results do not
// depend on which lane the host selects.
//
// Preconditions: inputs are finite unless stated otherwise; ranges may alias
// only where documented.

enum class Lane { Scalar, Avx2 };

struct Ops {
    // sum_i a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i x[i]
    double (*sum)(const double* x, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double* y, double alpha, const double* x, std::size_t n);
    // y[i] = max(x[i], 0)
    void (*relu)(double* y, const double* x, std::size_t n);
    // dx[i] += dy[i] where x[i] > 0
    void (*relu_bwd)(double* dx, const double* x, const double* dy, std::size_t n);
    // true iff every element is finite (works on non-finite input)
    bool (*all_finite)(const double* x, std::size_t n);

    // y[r*out+o] = dot(x[r*in..], w[o*in..]) + b[o]
    void (*affine_fwd)(double* y, const double* x, const double* w, const double* b,
                       std::size_t rows, std::size_t in, std::size_t out);
    // dx[r*in+i] += sum_o dy[r*out+o] * w[o*in+i]
    void (*affine_bwd_input)(double* dx, const double* dy, const double* w,
                             std::size_t rows, std::size_t in, std::size_t out);
    // for o in [o_begin,o_end): dw[o*in+i] += sum_r dy[r*out+o]*x[r*in+i],
    //                           db[o]      += sum_r dy[r*out+o]
    void (*affine_bwd_params)(double* dw, double* db, const double* dy, const double* x,
                              std::size_t rows, std::size_t in, std::size_t out,
                              std::size_t o_begin, std::size_t o_end);

    // p[i] -= lr * g[i]
    void (*sgd_step)(double* p, const double* g, std::size_t n, double lr);
    // acc = decay*acc + (1-decay)*g^2 ; p -= lr * g / sqrt(acc + eps)
    void (*rmsprop_step)(double* p, double* acc, const double* g, std::size_t n,
                         double lr, double decay, double eps);
    // m,v updates with precomputed bias corrections bc1 = 1/(1-beta1^t), bc2 = 1/(1-beta2^t)
    void (*adam_step)(double* p, double* m, double* v, const double* g, std::size_t n,
                      double lr, double beta1, double beta2, double eps,
                      double bc1, double bc2);
};

/// Active lane's ops. Selection happens once: AVX2 when the CPU supports it,
/// unless the BANF_KERNELS environment variable (scalar|avx2|auto) overrides.
const Ops& ops();

/// Explicit lane, for equivalence tests. Throws ConfigError if unavailable.
const Ops& ops_for(Lane lane);

Lane active_lane();
bool lane_available(Lane lane);
std::string lane_name(Lane lane);

} // namespace banf::simd
