#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "banf/param_store.hpp"
#include "banf/rng.hpp"
#include "banf/tape.hpp"
#include "banf/tensor.hpp"

namespace banf {

// ---------------------------------------------------------------------------
// Backbones

/// Raw coordinates go straight into the head (plain MLP field).
struct CoordsBackbone {};

/// One value vector per lattice node; evaluation returns the nearest node's
/// values. Meant to be sampled exactly at lattice nodes, where it is a pure
/// lookup table.
struct DirectBackbone {
    std::size_t resolution = 0;
    std::size_t channels = 1;
};

/// Feature grid with resolution^d cells ((resolution+1)^d vertices at t/res),
/// multilinearly interpolated.
struct DenseGridBackbone {
    std::size_t resolution = 0;
    std::size_t feature_dim = 2;
};

/// Multi-resolution hash grid. Level resolutions follow a geometric
/// progression from res_min to res_max; levels whose full vertex grid fits
/// in the table are indexed densely (injective), larger ones through the
/// usual coordinate-prime XOR hash.
struct HashGridBackbone {
    std::size_t levels = 8;
    std::size_t table_size = 1u << 15;
    std::size_t feature_dim = 2;
    std::size_t res_min = 16;
    std::size_t res_max = 256;

    std::size_t level_resolution(std::size_t level) const;
};

using Backbone = std::variant<CoordsBackbone, DirectBackbone, DenseGridBackbone, HashGridBackbone>;

/// Coordinate field f(x; theta): backbone encoder composed with an MLP head.
/// DirectBackbone carries no head (the table holds output values directly).
struct FieldArch {
    std::size_t domain_dim = 1;
    Backbone backbone;
    std::optional<MlpSpec> head;

    std::size_t out_channels() const;
    std::size_t feature_dim() const; // backbone output width
    void validate() const;

    std::string to_json_string() const;
    static FieldArch from_json_string(const std::string& s);
};

// ---------------------------------------------------------------------------
// Initialization

struct InitPolicy {
    enum class Mode { NearZero, Standard, SphereSdf };

    Mode mode = Mode::NearZero;
    double sigma = 0.1;         // NearZero: weight/feature std
    double sphere_radius = 0.4; // SphereSdf: target zero-set radius
    std::uint64_t seed = 0;

    static InitPolicy near_zero(std::uint64_t seed, double sigma = 0.1) {
        return InitPolicy{Mode::NearZero, sigma, 0.4, seed};
    }
    static InitPolicy standard(std::uint64_t seed) {
        return InitPolicy{Mode::Standard, 0.1, 0.4, seed};
    }
    static InitPolicy sphere_sdf(std::uint64_t seed, double radius) {
        return InitPolicy{Mode::SphereSdf, 0.1, radius, seed};
    }
};

/// Builds the parameter store for `arch`. Deterministic per seed.
/// NearZero draws every weight/feature from N(0, sigma^2), zeroes biases and
/// zeroes the head's final layer (no head: the value table itself), so the
/// freshly initialized field is exactly zero. SphereSdf (3-D, one channel)
/// pre-fits the field to the signed distance of a centered sphere.
ParamStore init_field(const FieldArch& arch, const InitPolicy& policy);

// ---------------------------------------------------------------------------
// Evaluation

/// Records backbone + head on the tape; returns the output node (rows = points).
Tape::NodeId field_forward(Tape& tape, const FieldArch& arch, const Tensor& points);

/// Inference path; arithmetic identical to the tape path.
Tensor eval_field(const FieldArch& arch, const ParamStore& params, const Tensor& points);

// ---------------------------------------------------------------------------
// Encoder primitives (exposed for direct use and testing)

/// Multilinear interpolation plan over a vertex grid with `cells` cells per
/// axis ((cells+1)^d vertices at t/cells); 2^d corner entries per point.
GatherPlan multilinear_plan(std::size_t cells, std::size_t dim, const Tensor& points);

/// Plan for one hash-grid level (vertex indices mapped through the table).
GatherPlan hash_level_plan(const HashGridBackbone& cfg, std::size_t level, std::size_t dim,
                           const Tensor& points);

/// Table slot for a vertex of a level grid; pure function of its arguments.
std::uint32_t hash_table_index(const std::uint32_t* vertex, std::size_t dim,
                               std::size_t table_size, std::size_t level_res);

/// Feature of a single point from a dense grid table ((res+1)^d x feat rows).
Tensor dense_grid_encode(const DenseGridBackbone& grid, std::size_t dim, const Tensor& table,
                         const Tensor& points);

/// Concatenated per-level features for a batch of points.
Tensor hash_encode(const HashGridBackbone& cfg, std::size_t dim, const ParamStore& params,
                   const Tensor& points);

/// Parameter names used by init_field / field_forward.
std::vector<std::string> field_param_names(const FieldArch& arch);

} // namespace banf
