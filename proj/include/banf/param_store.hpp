#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "banf/tensor.hpp"

namespace banf {

/// Named parameter tensors for one field level. Iteration follows insertion
/// order, so every pass over the store is deterministic. Shapes are fixed
/// once added; `version` ticks on every optimizer step.
class ParamStore {
public:
    Tensor& add(const std::string& name, Tensor t);

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;

    std::size_t size() const { return entries_.size(); }
    std::size_t total_values() const;

    const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
    std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }

    std::uint64_t version() const { return version_; }
    void bump_version() { ++version_; }

    bool same_values(const ParamStore& other) const;

private:
    std::vector<std::pair<std::string, Tensor>> entries_;
    std::unordered_map<std::string, std::size_t> index_;
    std::uint64_t version_ = 0;
};

/// Gradients keyed by parameter name. Parameters untouched by the forward
/// pass have no entry; callers treat a missing entry as an exact zero.
class GradMap {
public:
    /// Returns the accumulator for `name`, zero-initialized on first use.
    Tensor& accumulate(const std::string& name, const std::vector<std::size_t>& shape);

    const Tensor* find(const std::string& name) const;

    const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, Tensor>> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

} // namespace banf
