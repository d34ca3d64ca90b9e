#pragma once

// Shared helpers for the unit and acceptance suites: random tensors and the
// central finite-difference gradient oracle. The oracle never goes through
// Tape::backward, so it stays independent of the reverse-mode path it checks.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "banf/param_store.hpp"
#include "banf/rng.hpp"
#include "banf/tensor.hpp"

namespace banf::test {

inline Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0,
                            double hi = 1.0) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t probes = 0;
    std::string worst = "";
};

/// Compares reverse-mode gradients against central finite differences
/// (h = 1e-5, 64-bit). Relative error uses an absolute floor of 1e-8 so
/// near-zero gradients do not blow up the ratio.
///
/// `loss` must re-run the full forward pass from the (possibly perturbed)
/// parameter store. `probes` entries are drawn at random across all params.
inline GradCheckResult grad_check(ParamStore& params, const GradMap& analytic,
                                  const std::function<double()>& loss, std::size_t probes,
                                  Rng& rng, double h = 1e-5) {
    GradCheckResult res;
    std::vector<std::pair<std::size_t, std::size_t>> coords; // (entry, flat index)
    for (std::size_t e = 0; e < params.entries().size(); ++e)
        for (std::size_t i = 0; i < params.entries()[e].second.numel(); ++i)
            coords.emplace_back(e, i);
    if (coords.empty()) return res;

    for (std::size_t p = 0; p < probes; ++p) {
        const auto [e, i] = coords[rng.below(coords.size())];
        auto& [name, tensor] = params.entries()[e];
        const double saved = tensor.data[i];

        tensor.data[i] = saved + h;
        const double up = loss();
        tensor.data[i] = saved - h;
        const double down = loss();
        tensor.data[i] = saved;

        const double fd = (up - down) / (2.0 * h);
        const Tensor* g = analytic.find(name);
        const double an = g ? g->data[i] : 0.0;
        const double denom = std::max({std::abs(fd), std::abs(an), 1e-8 / 1e-4});
        const double rel = std::abs(fd - an) / denom;
        if (rel > res.max_rel_err) {
            res.max_rel_err = rel;
            res.worst = name + "[" + std::to_string(i) + "]";
        }
        ++res.probes;
    }
    return res;
}

inline double rms(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return a.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(a.size()));
}

} // namespace banf::test
