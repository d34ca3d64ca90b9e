#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "banf/lattice.hpp"

namespace banf {

/// Reconstruction kernel for lattice-sampled signals. All kernels are
/// symmetric, compactly supported and interpolating: kappa(0) = 1 and
/// kappa(n) = 0 at every other integer offset (offsets are measured in
/// sampling periods).
///
///   Linear    triangle kernel, support 1 period each side; frequency
///             response sinc^2, so it is an approximate low-pass.
///   Sinc      truncated sinc with a box window, `order` periods of total
///             support (order/2 each side); near-ideal low-pass.
///   Bicubic   Keys cubic (a = -1/2), support 2.
///   Lanczos   sinc windowed by a wider sinc, support `a`.
struct Kernel {
    enum class Kind { Linear, Sinc, Bicubic, Lanczos };

    Kind kind = Kind::Linear;
    int order = 6; // Sinc: total support in periods; must be even
    int a = 2;     // Lanczos support radius

    // When set (2-D/3-D only), tensor-product weights are zeroed outside the
    // Euclidean ball of the support radius and renormalized.
    bool circular = false;

    double radius() const;
    void validate() const;

    static Kernel linear() { return Kernel{}; }
    static Kernel sinc(int order = 6) { return Kernel{Kind::Sinc, order, 2, false}; }
    static Kernel bicubic() { return Kernel{Kind::Bicubic, 6, 2, false}; }
    static Kernel lanczos(int a = 2) { return Kernel{Kind::Lanczos, 6, a, false}; }
};

Kernel kernel_from_string(const std::string& kind, int order = 6, int a = 2);
std::string kernel_to_string(const Kernel& k);

/// Kernel weight at a signed offset measured in sampling periods. Offsets
/// within 1e-9 of an integer snap to it so the interpolating property holds
/// exactly at lattice nodes.
double kernel_eval(const Kernel& kernel, double offset);

struct NodeWeight {
    std::uint32_t index; // linear lattice node index
    double weight;
};

/// Lattice nodes inside the kernel support around `p` (d-dimensional, in
/// [0,1]^d) with tensor-product weights. Out-of-range node indices clamp to
/// the boundary (duplicates merge), per-axis weights renormalize to sum to 1,
/// so the weights always form a partition of unity. Zero-weight nodes are
/// dropped.
void contributing_nodes(const double* p, const Lattice& lattice, const Kernel& kernel,
                        std::vector<NodeWeight>& out);

std::vector<NodeWeight> contributing_nodes(const std::vector<double>& p, const Lattice& lattice,
                                           const Kernel& kernel);

} // namespace banf
