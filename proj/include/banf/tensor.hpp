#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "banf/errors.hpp"

namespace banf {

/// Dense row-major tensor of 64-bit floats. Shapes are fixed at creation.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != numel_of(shape))
            throw ConfigError("tensor data size does not match shape");
    }

    static std::size_t numel_of(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return n;
    }

    static Tensor zeros(std::vector<std::size_t> s) {
        std::size_t n = numel_of(s);
        return Tensor{std::move(s), std::vector<double>(n, 0.0)};
    }

    static Tensor full(std::vector<std::size_t> s, double v) {
        std::size_t n = numel_of(s);
        return Tensor{std::move(s), std::vector<double>(n, v)};
    }

    std::size_t numel() const { return data.size(); }
    bool empty() const { return data.empty(); }

    // 2D helpers; most tensors here are (rows, cols) batches.
    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const {
        if (shape.size() < 2) return shape.size() == 1 ? 1 : 0;
        std::size_t c = 1;
        for (std::size_t i = 1; i < shape.size(); ++i) c *= shape[i];
        return c;
    }

    double* row(std::size_t r) { return data.data() + r * cols(); }
    const double* row(std::size_t r) const { return data.data() + r * cols(); }

    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

inline std::string shape_string(const std::vector<std::size_t>& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += std::to_string(s[i]);
        if (i + 1 < s.size()) out += ",";
    }
    return out + ")";
}

} // namespace banf
