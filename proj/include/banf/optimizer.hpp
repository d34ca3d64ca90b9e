#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "banf/param_store.hpp"

namespace banf {

enum class OptAlgo { Sgd, RmsProp, Adam };

OptAlgo opt_algo_from_string(const std::string& s);
std::string opt_algo_to_string(OptAlgo a);

struct OptConfig {
    OptAlgo algo = OptAlgo::Adam;
    double lr = 1e-3;
    double beta1 = 0.9;   // Adam
    double beta2 = 0.999; // Adam
    double decay = 0.9;   // RMSProp squared-gradient average
    double eps = 1e-8;
};

/// Per-parameter optimizer state. Accumulator shapes mirror the parameter
/// shapes; a gradient entry missing from the map counts as exactly zero.
class OptState {
public:
    explicit OptState(OptConfig cfg);

    /// One update over every parameter in store order. Deterministic; throws
    /// NumericError naming the parameter if its gradient is non-finite.
    void step(ParamStore& params, const GradMap& grads);

    std::size_t step_count() const { return steps_; }
    const OptConfig& config() const { return cfg_; }

private:
    Tensor& slot(std::unordered_map<std::string, Tensor>& m, const std::string& name,
                 const std::vector<std::size_t>& shape);

    OptConfig cfg_;
    std::size_t steps_ = 0;
    std::unordered_map<std::string, Tensor> m_;
    std::unordered_map<std::string, Tensor> v_;
    std::vector<double> zeros_;
};

} // namespace banf
