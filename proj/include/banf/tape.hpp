#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "banf/param_store.hpp"
#include "banf/tensor.hpp"

namespace banf {

enum class Activation { Identity, Relu, Softplus };

Activation activation_from_string(const std::string& s);
std::string activation_to_string(Activation a);

/// CSR plan for weighted row gathers: output row r is the weighted sum of
/// source rows indices[offsets[r]..offsets[r+1]). Weights are constants of
/// the plan; gradients flow to the gathered rows only.
struct GatherPlan {
    std::size_t out_rows = 0;
    std::vector<std::uint32_t> offsets; // out_rows + 1 entries
    std::vector<std::uint32_t> indices;
    std::vector<double> weights;

    void reserve_rows(std::size_t rows, std::size_t per_row);
    void validate(std::size_t src_rows) const;
};

/// Records the fixed set of forward primitives the field architectures use
/// and replays them in reverse for exact gradients. Ops execute eagerly;
/// every intermediate is checked for finiteness.
class Tape {
public:
    using NodeId = std::size_t;

    explicit Tape(const ParamStore& params) : params_(&params) {}

    NodeId input(Tensor values);

    /// y = x W^T + b with W: (out,in), b: (out).
    NodeId affine(NodeId x, const std::string& w_name, const std::string& b_name);

    NodeId activation(NodeId x, Activation kind);

    /// Weighted gather of rows from the named parameter table.
    NodeId grid_gather(const std::string& table_name, GatherPlan plan);

    /// Weighted gather of rows from an intermediate node.
    NodeId row_gather(NodeId src, GatherPlan plan);

    NodeId concat_cols(const std::vector<NodeId>& parts);

    /// scale * sum((y - target)^2), accumulated as a plain sequential sum so
    /// losses are reproducible. Produces a 1x1 node.
    NodeId sum_sq_error(NodeId y, const Tensor& target, double scale);

    const Tensor& value(NodeId id) const;
    double scalar(NodeId id) const;

    /// Reverse pass from `out` seeded with `seed` (same shape as the output).
    /// The tape is consumed; call reset() to record a new pass.
    GradMap backward(NodeId out, const Tensor& seed);

    void reset();
    bool empty() const { return ops_.empty(); }

private:
    struct Op {
        enum class Kind { Input, Affine, Activation, GridGather, RowGather, ConcatCols, SumSqError };
        Kind kind;
        NodeId out = 0;
        NodeId a = 0;
        std::vector<NodeId> parts;
        std::string w_name, b_name;
        Activation act = Activation::Identity;
        GatherPlan plan;
        Tensor target;
        double scale = 1.0;
    };

    NodeId push_value(Tensor t, const Op& op_for_error);
    void check_finite(const Tensor& t, const Op& op) const;
    static std::string op_label(const Op& op);

    const ParamStore* params_;
    std::vector<Tensor> values_;
    std::vector<Op> ops_;
    bool consumed_ = false;
};

/// Shape of an MLP head: in -> width (x hidden_layers, each followed by the
/// activation) -> out, final layer linear.
struct MlpSpec {
    std::size_t in_dim = 0;
    std::size_t width = 0;
    std::size_t hidden_layers = 0;
    std::size_t out_dim = 1;
    Activation act = Activation::Relu;

    std::size_t layer_count() const { return hidden_layers + 1; }
    std::size_t layer_in(std::size_t layer) const { return layer == 0 ? in_dim : width; }
    std::size_t layer_out(std::size_t layer) const { return layer == hidden_layers ? out_dim : width; }
    std::string w_name(const std::string& prefix, std::size_t layer) const;
    std::string b_name(const std::string& prefix, std::size_t layer) const;
};

/// Builds the MLP on the tape; params named "<prefix>w<i>"/"<prefix>b<i>".
Tape::NodeId mlp_forward(Tape& tape, const MlpSpec& spec, Tape::NodeId x, const std::string& prefix);

/// Inference-only convenience; identical arithmetic to the tape path.
Tensor mlp_forward(const ParamStore& params, const MlpSpec& spec, const Tensor& x,
                   const std::string& prefix);

} // namespace banf
