#include "banf/param_store.hpp"

#include "banf/errors.hpp"
#include "banf/simd.hpp"

namespace banf {

Tensor& ParamStore::add(const std::string& name, Tensor t) {
    if (contains(name)) throw ConfigError("duplicate parameter name '" + name + "'");
    if (!simd::ops().all_finite(t.data.data(), t.data.size()))
        throw NumericError("parameter '" + name + "' holds non-finite values");
    index_.emplace(name, entries_.size());
    entries_.emplace_back(name, std::move(t));
    return entries_.back().second;
}

Tensor& ParamStore::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
    return entries_[it->second].second;
}

const Tensor& ParamStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
    return entries_[it->second].second;
}

std::size_t ParamStore::total_values() const {
    std::size_t n = 0;
    for (const auto& [name, t] : entries_) n += t.numel();
    return n;
}

bool ParamStore::same_values(const ParamStore& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].first != other.entries_[i].first) return false;
        if (entries_[i].second.shape != other.entries_[i].second.shape) return false;
        if (entries_[i].second.data != other.entries_[i].second.data) return false;
    }
    return true;
}

Tensor& GradMap::accumulate(const std::string& name, const std::vector<std::size_t>& shape) {
    auto it = index_.find(name);
    if (it != index_.end()) {
        Tensor& t = entries_[it->second].second;
        if (t.shape != shape)
            throw ConfigError("gradient shape mismatch for '" + name + "': " +
                              shape_string(t.shape) + " vs " + shape_string(shape));
        return t;
    }
    index_.emplace(name, entries_.size());
    entries_.emplace_back(name, Tensor::zeros(shape));
    return entries_.back().second;
}

const Tensor* GradMap::find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return nullptr;
    return &entries_[it->second].second;
}

} // namespace banf
