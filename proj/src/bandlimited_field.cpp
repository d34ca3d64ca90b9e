#include "banf/bandlimited_field.hpp"

#include <algorithm>

#include "banf/errors.hpp"
#include "banf/parallel.hpp"

namespace banf {

BandLimitedField::BandLimitedField(FieldArch arch, ParamStore params, Lattice lattice,
                                   Kernel kernel)
    : arch_(std::move(arch)), params_(std::move(params)), lattice_(lattice), kernel_(kernel) {
    arch_.validate();
    kernel_.validate();
    if (arch_.domain_dim != lattice_.dim)
        throw ConfigError("field and lattice dimensions disagree");
}

namespace {

// Epoch-stamped membership map: avoids clearing a node_count-sized array on
// every training step.
struct DedupScratch {
    std::vector<std::uint32_t> stamp;
    std::vector<std::uint32_t> compact;
    std::uint32_t epoch = 0;

    void begin(std::size_t node_count) {
        if (stamp.size() < node_count) {
            stamp.assign(node_count, 0);
            compact.assign(node_count, 0);
            epoch = 0;
        }
        if (++epoch == 0) { // wrapped
            std::fill(stamp.begin(), stamp.end(), 0);
            epoch = 1;
        }
    }
};

thread_local DedupScratch tl_dedup;
thread_local std::vector<NodeWeight> tl_nodes;

} // namespace

Tape::NodeId BandLimitedField::forward(Tape& tape, const Tensor& points,
                                       const Lattice& lattice) const {
    if (points.cols() != lattice.dim)
        throw ConfigError("points do not match the lattice dimension");
    const std::size_t n = points.rows();
    const std::size_t node_count = lattice.node_count();

    DedupScratch& dedup = tl_dedup;
    dedup.begin(node_count);

    GatherPlan plan;
    plan.reserve_rows(n, std::size_t(1) << lattice.dim);
    std::vector<std::uint32_t> unique_nodes; // first-occurrence order

    for (std::size_t r = 0; r < n; ++r) {
        contributing_nodes(points.row(r), lattice, kernel_, tl_nodes);
        for (const NodeWeight& nw : tl_nodes) {
            std::uint32_t slot;
            if (dedup.stamp[nw.index] == dedup.epoch) {
                slot = dedup.compact[nw.index];
            } else {
                slot = static_cast<std::uint32_t>(unique_nodes.size());
                unique_nodes.push_back(nw.index);
                dedup.stamp[nw.index] = dedup.epoch;
                dedup.compact[nw.index] = slot;
            }
            plan.indices.push_back(slot);
            plan.weights.push_back(nw.weight);
        }
        plan.offsets.push_back(static_cast<std::uint32_t>(plan.indices.size()));
        ++plan.out_rows;
    }

    Tensor node_pts = Tensor::zeros({unique_nodes.size(), lattice.dim});
    for (std::size_t i = 0; i < unique_nodes.size(); ++i)
        lattice.node_position(unique_nodes[i], node_pts.row(i));

    const auto inner = field_forward(tape, arch_, node_pts);
    return tape.row_gather(inner, std::move(plan));
}

const Tensor& BandLimitedField::node_values(const Lattice& lattice) const {
    if (cache_.version != params_.version() || cache_.resolution != lattice.resolution ||
        cache_.cell_centered != lattice.cell_centered) {
        const std::size_t count = lattice.node_count();
        Tensor pts = Tensor::zeros({count, lattice.dim});
        for (std::size_t i = 0; i < count; ++i) lattice.node_position(i, pts.row(i));
        cache_.values = eval_field(arch_, params_, pts);
        cache_.version = params_.version();
        cache_.resolution = lattice.resolution;
        cache_.cell_centered = lattice.cell_centered;
    }
    return cache_.values;
}

Tensor BandLimitedField::eval(const Tensor& points, const Lattice& lattice) const {
    if (points.cols() != lattice.dim)
        throw ConfigError("points do not match the lattice dimension");
    const Tensor& nodes = node_values(lattice);
    const std::size_t n = points.rows();
    const std::size_t c = nodes.cols();
    Tensor out = Tensor::zeros({n, c});

    parallel_for(n, 2048, [&](std::size_t r0, std::size_t r1) {
        std::vector<NodeWeight>& scratch = tl_nodes;
        for (std::size_t r = r0; r < r1; ++r) {
            contributing_nodes(points.row(r), lattice, kernel_, scratch);
            double* dst = out.row(r);
            for (const NodeWeight& nw : scratch) {
                const double* src = nodes.row(nw.index);
                for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += nw.weight * src[ch];
            }
        }
    });
    return out;
}

Tensor bandlimited_eval(const BandLimitedField& field, const Tensor& points) {
    return field.eval(points);
}

} // namespace banf
