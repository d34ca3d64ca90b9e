#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "banf/errors.hpp"

namespace banf {

/// Uniform sampling grid over [0,1]^d with sampling period T = 1/resolution.
/// Vertex-centered placement (the default) puts nodes at t*T for
/// t = 0..resolution, so the closed domain boundary carries nodes and a
/// resolution-r grid has r+1 nodes per axis. Cell-centered placement puts
/// nodes at (t+1/2)*T for t = 0..resolution-1.
struct Lattice {
    std::size_t resolution = 2;
    std::size_t dim = 1;
    bool cell_centered = false;

    Lattice() = default;
    Lattice(std::size_t r, std::size_t d, bool centered = false)
        : resolution(r), dim(d), cell_centered(centered) {
        if (r < 2) throw ConfigError("lattice resolution must be >= 2");
        if (d < 1 || d > 3) throw ConfigError("lattice dimension must be 1, 2 or 3");
    }

    double period() const { return 1.0 / static_cast<double>(resolution); }

    std::size_t nodes_per_axis() const { return cell_centered ? resolution : resolution + 1; }

    std::size_t node_count() const {
        std::size_t n = 1;
        for (std::size_t i = 0; i < dim; ++i) n *= nodes_per_axis();
        return n;
    }

    double node_coord(std::size_t t) const {
        return cell_centered ? (static_cast<double>(t) + 0.5) * period()
                             : static_cast<double>(t) * period();
    }

    /// Node-space coordinate of a domain point (node t sits at integer t).
    double to_node_space(double x) const {
        return cell_centered ? x * static_cast<double>(resolution) - 0.5
                             : x * static_cast<double>(resolution);
    }

    /// Linear index with axis 0 fastest.
    std::size_t node_index(const std::size_t* t) const {
        const std::size_t n = nodes_per_axis();
        std::size_t idx = 0;
        for (std::size_t a = dim; a-- > 0;) idx = idx * n + t[a];
        return idx;
    }

    void node_position(std::size_t index, double* out) const {
        const std::size_t n = nodes_per_axis();
        for (std::size_t a = 0; a < dim; ++a) {
            out[a] = node_coord(index % n);
            index /= n;
        }
    }
};

struct CutoffInfo {
    double omega;   // radians per unit length, 2*pi/T
    double nyquist; // cycles per unit length, resolution/2
};

/// Frequency bound of a resolution-r lattice: the reconstruction's spectrum
/// is supported below omega = 2*pi*r rad/unit, and the alias-free band is
/// the Nyquist band r/2 cycles/unit.
CutoffInfo cutoff_frequency(const Lattice& lattice);

} // namespace banf
