#pragma once

#include <cstdint>

#include "banf/field.hpp"
#include "banf/interp_kernel.hpp"
#include "banf/lattice.hpp"

namespace banf {

/// A field evaluated only at lattice nodes and reconstructed continuously
/// with a band-limited interpolation kernel. The reconstruction's spectrum
/// is confined to the lattice's band up to the kernel's stop-band leakage
/// (exactly for an ideal sinc), so training through this wrapper low-pass
/// filters the signal during optimization instead of after it.
class BandLimitedField {
public:
    BandLimitedField() = default;
    BandLimitedField(FieldArch arch, ParamStore params, Lattice lattice, Kernel kernel);

    /// Training path: evaluates the inner field at the contributing lattice
    /// nodes of the batch (deduplicated) and records the kernel-weighted
    /// reconstruction on the tape, so gradients flow to the inner parameters.
    /// `tape` must have been constructed over this field's params.
    Tape::NodeId forward(Tape& tape, const Tensor& points) const {
        return forward(tape, points, lattice_);
    }
    Tape::NodeId forward(Tape& tape, const Tensor& points, const Lattice& lattice) const;

    /// Inference path: node values are baked once per parameter version and
    /// reused; arithmetic per point matches the training path bit-for-bit.
    Tensor eval(const Tensor& points) const { return eval(points, lattice_); }
    Tensor eval(const Tensor& points, const Lattice& lattice) const;

    const FieldArch& arch() const { return arch_; }
    const Lattice& lattice() const { return lattice_; }
    const Kernel& kernel() const { return kernel_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    /// Inner-field values at every node of `lattice`, baked lazily.
    const Tensor& node_values(const Lattice& lattice) const;

private:
    FieldArch arch_;
    ParamStore params_;
    Lattice lattice_;
    Kernel kernel_;

    struct BakeCache {
        std::uint64_t version = ~std::uint64_t(0);
        std::size_t resolution = 0;
        bool cell_centered = false;
        Tensor values;
    };
    mutable BakeCache cache_;
};

/// Convenience for the common case.
Tensor bandlimited_eval(const BandLimitedField& field, const Tensor& points);

} // namespace banf
