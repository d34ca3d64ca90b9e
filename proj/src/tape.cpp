#include "banf/tape.hpp"

#include <algorithm>
#include <cmath>

#include "banf/errors.hpp"
#include "banf/parallel.hpp"
#include "banf/simd.hpp"

namespace banf {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double softplus(double x) {
    if (x > 30.0) return x;
    return std::log1p(std::exp(x));
}

// Rows per block so one block is ~100k flops; keeps pool overhead invisible.
std::size_t affine_grain(std::size_t in, std::size_t out) {
    const std::size_t flops_per_row = std::max<std::size_t>(1, 2 * in * out);
    return std::clamp<std::size_t>(100000 / flops_per_row, 16, 4096);
}

} // namespace

Activation activation_from_string(const std::string& s) {
    if (s == "identity") return Activation::Identity;
    if (s == "relu") return Activation::Relu;
    if (s == "softplus") return Activation::Softplus;
    throw ConfigError("unknown activation '" + s + "'");
}

std::string activation_to_string(Activation a) {
    switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Softplus: return "softplus";
    }
    return "?";
}

void GatherPlan::reserve_rows(std::size_t rows, std::size_t per_row) {
    out_rows = 0;
    offsets.clear();
    offsets.reserve(rows + 1);
    offsets.push_back(0);
    indices.clear();
    indices.reserve(rows * per_row);
    weights.clear();
    weights.reserve(rows * per_row);
}

void GatherPlan::validate(std::size_t src_rows) const {
    if (offsets.size() != out_rows + 1 || indices.size() != weights.size() ||
        offsets.back() != indices.size())
        throw ConfigError("malformed gather plan");
    for (std::uint32_t idx : indices)
        if (idx >= src_rows) throw ConfigError("gather index out of range");
}

std::string Tape::op_label(const Op& op) {
    switch (op.kind) {
    case Op::Kind::Input: return "input";
    case Op::Kind::Affine: return "affine '" + op.w_name + "'";
    case Op::Kind::Activation: return "activation " + activation_to_string(op.act);
    case Op::Kind::GridGather: return "grid gather '" + op.w_name + "'";
    case Op::Kind::RowGather: return "interpolation gather";
    case Op::Kind::ConcatCols: return "concat";
    case Op::Kind::SumSqError: return "squared-error loss";
    }
    return "?";
}

void Tape::check_finite(const Tensor& t, const Op& op) const {
    if (!simd::ops().all_finite(t.data.data(), t.data.size()))
        throw NumericError("non-finite values after " + op_label(op));
}

Tape::NodeId Tape::push_value(Tensor t, const Op& op_for_error) {
    check_finite(t, op_for_error);
    values_.push_back(std::move(t));
    return values_.size() - 1;
}

Tape::NodeId Tape::input(Tensor values) {
    Op op;
    op.kind = Op::Kind::Input;
    op.out = push_value(std::move(values), op);
    ops_.push_back(std::move(op));
    return ops_.back().out;
}

Tape::NodeId Tape::affine(NodeId x, const std::string& w_name, const std::string& b_name) {
    const Tensor& xv = value(x);
    const Tensor& w = params_->at(w_name);
    const Tensor& b = params_->at(b_name);
    if (w.shape.size() != 2)
        throw ConfigError("affine weight '" + w_name + "' must be 2-D, got " + shape_string(w.shape));
    const std::size_t out = w.shape[0];
    const std::size_t in = w.shape[1];
    if (xv.cols() != in)
        throw ConfigError("affine '" + w_name + "': input has " + std::to_string(xv.cols()) +
                          " columns, weight expects " + std::to_string(in));
    if (b.numel() != out)
        throw ConfigError("affine bias '" + b_name + "' must have " + std::to_string(out) + " values");

    const std::size_t rows = xv.rows();
    Tensor y = Tensor::zeros({rows, out});
    const auto& k = simd::ops();
    parallel_for(rows, affine_grain(in, out), [&](std::size_t r0, std::size_t r1) {
        k.affine_fwd(y.data.data() + r0 * out, xv.data.data() + r0 * in,
                     w.data.data(), b.data.data(), r1 - r0, in, out);
    });

    Op op;
    op.kind = Op::Kind::Affine;
    op.a = x;
    op.w_name = w_name;
    op.b_name = b_name;
    op.out = push_value(std::move(y), op);
    ops_.push_back(std::move(op));
    return ops_.back().out;
}

Tape::NodeId Tape::activation(NodeId x, Activation kind) {
    const Tensor& xv = value(x);
    Tensor y = Tensor::zeros(xv.shape);
    const std::size_t n = xv.numel();
    switch (kind) {
    case Activation::Identity:
        y.data = xv.data;
        break;
    case Activation::Relu:
        simd::ops().relu(y.data.data(), xv.data.data(), n);
        break;
    case Activation::Softplus:
        for (std::size_t i = 0; i < n; ++i) y.data[i] = softplus(xv.data[i]);
        break;
    }
    Op op;
    op.kind = Op::Kind::Activation;
    op.a = x;
    op.act = kind;
    op.out = push_value(std::move(y), op);
    ops_.push_back(std::move(op));
    return ops_.back().out;
}

namespace {

Tensor gather_rows(const Tensor& src, const GatherPlan& plan) {
    const std::size_t cols = src.cols();
    Tensor y = Tensor::zeros({plan.out_rows, cols});
    parallel_for(plan.out_rows, 1024, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            double* yr = y.data.data() + r * cols;
            for (std::uint32_t j = plan.offsets[r]; j < plan.offsets[r + 1]; ++j) {
                const double w = plan.weights[j];
                const double* s = src.data.data() + static_cast<std::size_t>(plan.indices[j]) * cols;
                for (std::size_t c = 0; c < cols; ++c) yr[c] += w * s[c];
            }
        }
    });
    return y;
}

void scatter_rows(Tensor& dst, const GatherPlan& plan, const Tensor& dy) {
    const std::size_t cols = dst.cols();
    for (std::size_t r = 0; r < plan.out_rows; ++r) {
        const double* g = dy.data.data() + r * cols;
        for (std::uint32_t j = plan.offsets[r]; j < plan.offsets[r + 1]; ++j) {
            const double w = plan.weights[j];
            double* d = dst.data.data() + static_cast<std::size_t>(plan.indices[j]) * cols;
            for (std::size_t c = 0; c < cols; ++c) d[c] += w * g[c];
        }
    }
}

} // namespace

Tape::NodeId Tape::grid_gather(const std::string& table_name, GatherPlan plan) {
    const Tensor& table = params_->at(table_name);
    if (table.shape.size() != 2)
        throw ConfigError("gather table '" + table_name + "' must be 2-D");
    plan.validate(table.rows());

    Tensor y = gather_rows(table, plan);
    Op op;
    op.kind = Op::Kind::GridGather;
    op.w_name = table_name;
    op.plan = std::move(plan);
    op.out = push_value(std::move(y), op);
    ops_.push_back(std::move(op));
    return ops_.back().out;
}

Tape::NodeId Tape::row_gather(NodeId src, GatherPlan plan) {
    const Tensor& sv = value(src);
    plan.validate(sv.rows());
    Tensor y = gather_rows(sv, plan);
    Op op;
    op.kind = Op::Kind::RowGather;
    op.a = src;
    op.plan = std::move(plan);
    op.out = push_value(std::move(y), op);
    ops_.push_back(std::move(op));
    return ops_.back().out;
}

Tape::NodeId Tape::concat_cols(const std::vector<NodeId>& parts) {
    if (parts.empty()) throw ConfigError("concat of zero parts");
    const std::size_t rows = value(parts[0]).rows();
    std::size_t cols = 0;
    for (NodeId p : parts) {
        if (value(p).rows() != rows) throw ConfigError("concat parts disagree on row count");
        cols += value(p).cols();
    }
    Tensor y = Tensor::zeros({rows, cols});
    std::size_t col0 = 0;
    for (NodeId p : parts) {
        const Tensor& pv = value(p);
        const std::size_t pc = pv.cols();
        for (std::size_t r = 0; r < rows; ++r) {
            const double* s = pv.data.data() + r * pc;
            double* d = y.data.data() + r * cols + col0;
            for (std::size_t c = 0; c < pc; ++c) d[c] = s[c];
        }
        col0 += pc;
    }
    Op op;
    op.kind = Op::Kind::ConcatCols;
    op.parts = parts;
    op.out = push_value(std::move(y), op);
    ops_.push_back(std::move(op));
    return ops_.back().out;
}

Tape::NodeId Tape::sum_sq_error(NodeId y, const Tensor& target, double scale) {
    const Tensor& yv = value(y);
    if (!yv.same_shape(target))
        throw ConfigError("loss target shape " + shape_string(target.shape) +
                          " does not match output " + shape_string(yv.shape));
    // Fixed sequential reduction.
    double acc = 0.0;
    for (std::size_t i = 0; i < yv.numel(); ++i) {
        const double d = yv.data[i] - target.data[i];
        acc += d * d;
    }
    Tensor loss{{std::size_t(1), std::size_t(1)}, {scale * acc}};
    Op op;
    op.kind = Op::Kind::SumSqError;
    op.a = y;
    op.target = target;
    op.scale = scale;
    op.out = push_value(std::move(loss), op);
    ops_.push_back(std::move(op));
    return ops_.back().out;
}

const Tensor& Tape::value(NodeId id) const {
    if (id >= values_.size()) throw UsageError("invalid tape node id");
    return values_[id];
}

double Tape::scalar(NodeId id) const {
    const Tensor& t = value(id);
    if (t.numel() != 1) throw UsageError("node is not a scalar");
    return t.data[0];
}

void Tape::reset() {
    values_.clear();
    ops_.clear();
    consumed_ = false;
}

GradMap Tape::backward(NodeId out, const Tensor& seed) {
    if (ops_.empty()) throw UsageError("backward called without a recorded forward pass");
    if (consumed_) throw UsageError("tape already consumed; call reset() before the next pass");
    if (out >= values_.size()) throw UsageError("invalid output node for backward");
    if (!seed.same_shape(values_[out]))
        throw ConfigError("seed gradient shape " + shape_string(seed.shape) +
                          " does not match output " + shape_string(values_[out].shape));
    consumed_ = true;

    std::vector<Tensor> node_grads(values_.size());
    node_grads[out] = seed;
    GradMap grads;
    const auto& k = simd::ops();

    auto grad_of = [&](NodeId id) -> Tensor& {
        if (node_grads[id].empty() && values_[id].numel() > 0)
            node_grads[id] = Tensor::zeros(values_[id].shape);
        return node_grads[id];
    };

    for (std::size_t oi = ops_.size(); oi-- > 0;) {
        const Op& op = ops_[oi];
        const Tensor& gy = node_grads[op.out];
        if (gy.empty()) continue;

        switch (op.kind) {
        case Op::Kind::Input:
            break;
        case Op::Kind::Affine: {
            const Tensor& xv = values_[op.a];
            const Tensor& w = params_->at(op.w_name);
            const std::size_t out_dim = w.shape[0];
            const std::size_t in_dim = w.shape[1];
            const std::size_t rows = xv.rows();

            Tensor& gx = grad_of(op.a);
            parallel_for(rows, affine_grain(in_dim, out_dim), [&](std::size_t r0, std::size_t r1) {
                k.affine_bwd_input(gx.data.data() + r0 * in_dim, gy.data.data() + r0 * out_dim,
                                   w.data.data(), r1 - r0, in_dim, out_dim);
            });

            Tensor& gw = grads.accumulate(op.w_name, w.shape);
            Tensor& gb = grads.accumulate(op.b_name, params_->at(op.b_name).shape);
            parallel_for(out_dim, std::max<std::size_t>(1, out_dim / 8),
                         [&](std::size_t o0, std::size_t o1) {
                             k.affine_bwd_params(gw.data.data(), gb.data.data(), gy.data.data(),
                                                 xv.data.data(), rows, in_dim, out_dim, o0, o1);
                         });
            break;
        }
        case Op::Kind::Activation: {
            const Tensor& xv = values_[op.a];
            Tensor& gx = grad_of(op.a);
            const std::size_t n = xv.numel();
            switch (op.act) {
            case Activation::Identity:
                k.axpy(gx.data.data(), 1.0, gy.data.data(), n);
                break;
            case Activation::Relu:
                k.relu_bwd(gx.data.data(), xv.data.data(), gy.data.data(), n);
                break;
            case Activation::Softplus:
                for (std::size_t i = 0; i < n; ++i) gx.data[i] += gy.data[i] * sigmoid(xv.data[i]);
                break;
            }
            break;
        }
        case Op::Kind::GridGather: {
            const Tensor& table = params_->at(op.w_name);
            Tensor& gt = grads.accumulate(op.w_name, table.shape);
            scatter_rows(gt, op.plan, gy);
            break;
        }
        case Op::Kind::RowGather: {
            Tensor& gx = grad_of(op.a);
            scatter_rows(gx, op.plan, gy);
            break;
        }
        case Op::Kind::ConcatCols: {
            const std::size_t cols = values_[op.out].cols();
            const std::size_t rows = values_[op.out].rows();
            std::size_t col0 = 0;
            for (NodeId p : op.parts) {
                Tensor& gp = grad_of(p);
                const std::size_t pc = values_[p].cols();
                for (std::size_t r = 0; r < rows; ++r) {
                    const double* s = gy.data.data() + r * cols + col0;
                    double* d = gp.data.data() + r * pc;
                    for (std::size_t c = 0; c < pc; ++c) d[c] += s[c];
                }
                col0 += pc;
            }
            break;
        }
        case Op::Kind::SumSqError: {
            const Tensor& yv = values_[op.a];
            Tensor& gx = grad_of(op.a);
            const double g = gy.data[0] * op.scale * 2.0;
            for (std::size_t i = 0; i < yv.numel(); ++i)
                gx.data[i] += g * (yv.data[i] - op.target.data[i]);
            break;
        }
        }
    }
    return grads;
}

std::string MlpSpec::w_name(const std::string& prefix, std::size_t layer) const {
    return prefix + "w" + std::to_string(layer);
}

std::string MlpSpec::b_name(const std::string& prefix, std::size_t layer) const {
    return prefix + "b" + std::to_string(layer);
}

Tape::NodeId mlp_forward(Tape& tape, const MlpSpec& spec, Tape::NodeId x, const std::string& prefix) {
    Tape::NodeId h = x;
    for (std::size_t layer = 0; layer < spec.layer_count(); ++layer) {
        h = tape.affine(h, spec.w_name(prefix, layer), spec.b_name(prefix, layer));
        if (layer + 1 < spec.layer_count() && spec.act != Activation::Identity)
            h = tape.activation(h, spec.act);
    }
    return h;
}

Tensor mlp_forward(const ParamStore& params, const MlpSpec& spec, const Tensor& x,
                   const std::string& prefix) {
    Tape tape(params);
    const auto in = tape.input(x);
    const auto out = mlp_forward(tape, spec, in, prefix);
    return tape.value(out);
}

} // namespace banf
