#include "banf/interp_kernel.hpp"

#include <algorithm>
#include <cmath>

namespace banf {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kSnapTol = 1e-9;

double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = kPi * x;
    return std::sin(px) / px;
}

// Keys cubic with a = -1/2; exact zeros at |u| = 1, 2.
double keys_cubic(double u) {
    constexpr double a = -0.5;
    u = std::abs(u);
    if (u < 1.0) return ((a + 2.0) * u - (a + 3.0)) * u * u + 1.0;
    if (u < 2.0) return ((a * u - 5.0 * a) * u + 8.0 * a) * u - 4.0 * a;
    return 0.0;
}

} // namespace

double Kernel::radius() const {
    switch (kind) {
    case Kind::Linear: return 1.0;
    case Kind::Sinc: return static_cast<double>(order) / 2.0;
    case Kind::Bicubic: return 2.0;
    case Kind::Lanczos: return static_cast<double>(a);
    }
    return 1.0;
}

void Kernel::validate() const {
    if (kind == Kind::Sinc && (order < 2 || order % 2 != 0))
        throw ConfigError("sinc kernel order must be a positive even number");
    if (kind == Kind::Lanczos && a < 1) throw ConfigError("lanczos support must be >= 1");
}

Kernel kernel_from_string(const std::string& kind, int order, int a) {
    Kernel k;
    if (kind == "linear")
        k = Kernel::linear();
    else if (kind == "sinc")
        k = Kernel::sinc(order);
    else if (kind == "bicubic")
        k = Kernel::bicubic();
    else if (kind == "lanczos")
        k = Kernel::lanczos(a);
    else
        throw ConfigError("unknown kernel '" + kind + "' (linear|sinc|bicubic|lanczos)");
    k.validate();
    return k;
}

std::string kernel_to_string(const Kernel& k) {
    switch (k.kind) {
    case Kernel::Kind::Linear: return "linear";
    case Kernel::Kind::Sinc: return "sinc" + std::to_string(k.order);
    case Kernel::Kind::Bicubic: return "bicubic";
    case Kernel::Kind::Lanczos: return "lanczos" + std::to_string(k.a);
    }
    return "?";
}

double kernel_eval(const Kernel& kernel, double offset) {
    const double r = kernel.radius();
    double u = offset;
    const double nearest = std::nearbyint(u);
    if (std::abs(u - nearest) <= kSnapTol) u = nearest;
    if (std::abs(u) > r) return 0.0;

    switch (kernel.kind) {
    case Kernel::Kind::Linear: {
        const double au = std::abs(u);
        return au >= 1.0 ? 0.0 : 1.0 - au;
    }
    case Kernel::Kind::Sinc:
        if (u == nearest) return u == 0.0 ? 1.0 : 0.0;
        return sinc(u);
    case Kernel::Kind::Bicubic:
        return keys_cubic(u);
    case Kernel::Kind::Lanczos:
        if (u == nearest) return u == 0.0 ? 1.0 : 0.0;
        return sinc(u) * sinc(u / static_cast<double>(kernel.a));
    }
    return 0.0;
}

CutoffInfo cutoff_frequency(const Lattice& lattice) {
    const double r = static_cast<double>(lattice.resolution);
    return CutoffInfo{2.0 * kPi * r, r / 2.0};
}

namespace {

struct AxisEntry {
    std::int64_t t; // clamped node index
    double w;
    double u; // offset in periods (for circular support)
};

thread_local std::vector<AxisEntry> tl_axis[3];

// Per-axis support nodes, clamped, merged and renormalized.
void axis_nodes(double x, const Lattice& lattice, const Kernel& kernel,
                std::vector<AxisEntry>& out) {
    out.clear();
    double s = lattice.to_node_space(std::clamp(x, 0.0, 1.0));
    const double snapped = std::nearbyint(s);
    if (std::abs(s - snapped) <= kSnapTol) s = snapped;

    const double r = kernel.radius();
    const std::int64_t lo = static_cast<std::int64_t>(std::ceil(s - r));
    const std::int64_t hi = static_cast<std::int64_t>(std::floor(s + r));
    const std::int64_t max_node = static_cast<std::int64_t>(lattice.nodes_per_axis()) - 1;

    double total = 0.0;
    for (std::int64_t t = lo; t <= hi; ++t) {
        const double w = kernel_eval(kernel, s - static_cast<double>(t));
        if (w == 0.0) continue;
        const std::int64_t tc = std::clamp<std::int64_t>(t, 0, max_node);
        if (!out.empty() && out.back().t == tc)
            out.back().w += w; // merged clamped duplicates at the boundary
        else
            out.push_back({tc, w, s - static_cast<double>(t)});
        total += w;
    }
    if (out.empty()) {
        // Degenerate only if every weight vanished; fall back to the nearest node.
        const std::int64_t tc = std::clamp<std::int64_t>(
            static_cast<std::int64_t>(std::nearbyint(s)), 0, max_node);
        out.push_back({tc, 1.0, 0.0});
        total = 1.0;
    }
    for (auto& e : out) e.w /= total;
}

} // namespace

void contributing_nodes(const double* p, const Lattice& lattice, const Kernel& kernel,
                        std::vector<NodeWeight>& out) {
    out.clear();
    const std::size_t dim = lattice.dim;
    for (std::size_t a = 0; a < dim; ++a) axis_nodes(p[a], lattice, kernel, tl_axis[a]);

    const std::size_t n = lattice.nodes_per_axis();
    const bool circular = kernel.circular && dim >= 2;
    const double r2 = kernel.radius() * kernel.radius();

    double total = 0.0;
    if (dim == 1) {
        for (const auto& e : tl_axis[0]) {
            out.push_back({static_cast<std::uint32_t>(e.t), e.w});
            total += e.w;
        }
    } else if (dim == 2) {
        for (const auto& ey : tl_axis[1])
            for (const auto& ex : tl_axis[0]) {
                double w = ex.w * ey.w;
                if (w == 0.0) continue;
                if (circular && ex.u * ex.u + ey.u * ey.u > r2) continue;
                out.push_back({static_cast<std::uint32_t>(ey.t * n + ex.t), w});
                total += w;
            }
    } else {
        for (const auto& ez : tl_axis[2])
            for (const auto& ey : tl_axis[1])
                for (const auto& ex : tl_axis[0]) {
                    double w = ex.w * ey.w * ez.w;
                    if (w == 0.0) continue;
                    if (circular && ex.u * ex.u + ey.u * ey.u + ez.u * ez.u > r2) continue;
                    out.push_back(
                        {static_cast<std::uint32_t>((ez.t * n + ey.t) * n + ex.t), w});
                    total += w;
                }
    }

    if (out.empty() || total == 0.0) {
        // Circular trimming removed everything (can happen right at a corner);
        // keep the nearest node so constants are still reproduced.
        std::size_t t[3] = {0, 0, 0};
        for (std::size_t a = 0; a < dim; ++a) {
            const double s = lattice.to_node_space(std::clamp(p[a], 0.0, 1.0));
            t[a] = static_cast<std::size_t>(
                std::clamp<std::int64_t>(static_cast<std::int64_t>(std::nearbyint(s)), 0,
                                         static_cast<std::int64_t>(n) - 1));
        }
        out.clear();
        out.push_back({static_cast<std::uint32_t>(lattice.node_index(t)), 1.0});
        return;
    }

    // Weights form a partition of unity even after clamping and trimming.
    if (total != 1.0)
        for (auto& e : out) e.weight /= total;
}

std::vector<NodeWeight> contributing_nodes(const std::vector<double>& p, const Lattice& lattice,
                                           const Kernel& kernel) {
    if (p.size() != lattice.dim) throw ConfigError("point dimension does not match lattice");
    std::vector<NodeWeight> out;
    contributing_nodes(p.data(), lattice, kernel, out);
    return out;
}

} // namespace banf
