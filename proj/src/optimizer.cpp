#include "banf/optimizer.hpp"

#include <cmath>

#include "banf/errors.hpp"
#include "banf/simd.hpp"

namespace banf {

OptAlgo opt_algo_from_string(const std::string& s) {
    if (s == "sgd") return OptAlgo::Sgd;
    if (s == "rmsprop") return OptAlgo::RmsProp;
    if (s == "adam") return OptAlgo::Adam;
    throw ConfigError("unknown optimizer '" + s + "'");
}

std::string opt_algo_to_string(OptAlgo a) {
    switch (a) {
    case OptAlgo::Sgd: return "sgd";
    case OptAlgo::RmsProp: return "rmsprop";
    case OptAlgo::Adam: return "adam";
    }
    return "?";
}

OptState::OptState(OptConfig cfg) : cfg_(cfg) {
    if (cfg_.eps <= 0.0) throw ConfigError("optimizer eps must be positive");
    if (cfg_.lr <= 0.0) throw ConfigError("learning rate must be positive");
}

Tensor& OptState::slot(std::unordered_map<std::string, Tensor>& m, const std::string& name,
                       const std::vector<std::size_t>& shape) {
    auto it = m.find(name);
    if (it == m.end()) it = m.emplace(name, Tensor::zeros(shape)).first;
    return it->second;
}

void OptState::step(ParamStore& params, const GradMap& grads) {
    ++steps_;
    const auto& k = simd::ops();

    // Bias corrections for Adam, shared across parameters this step.
    const double bc1 = 1.0 / (1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_)));
    const double bc2 = 1.0 / (1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_)));

    for (auto& [name, p] : params.entries()) {
        const Tensor* g = grads.find(name);
        const std::size_t n = p.numel();
        if (g != nullptr) {
            if (g->shape != p.shape)
                throw ConfigError("gradient shape mismatch for parameter '" + name + "'");
            if (!k.all_finite(g->data.data(), n))
                throw NumericError("non-finite gradient for parameter '" + name + "'");
        }
        if (zeros_.size() < n) zeros_.resize(n, 0.0);
        const double* gp = g ? g->data.data() : zeros_.data();

        switch (cfg_.algo) {
        case OptAlgo::Sgd:
            k.sgd_step(p.data.data(), gp, n, cfg_.lr);
            break;
        case OptAlgo::RmsProp: {
            Tensor& acc = slot(v_, name, p.shape);
            k.rmsprop_step(p.data.data(), acc.data.data(), gp, n, cfg_.lr, cfg_.decay, cfg_.eps);
            break;
        }
        case OptAlgo::Adam: {
            Tensor& m = slot(m_, name, p.shape);
            Tensor& v = slot(v_, name, p.shape);
            k.adam_step(p.data.data(), m.data.data(), v.data.data(), gp, n, cfg_.lr, cfg_.beta1,
                        cfg_.beta2, cfg_.eps, bc1, bc2);
            break;
        }
        }
    }
    params.bump_version();
}

} // namespace banf
