#pragma once

#include <cassert>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sleepssl {

using MatrixRM =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatrixRM>;
using ConstMapRM = Eigen::Map<const MatrixRM>;

// Dense row-major float tensor, rank 1..4. Kept deliberately simple: shape +
// flat storage, with Eigen maps for the matrix-shaped views the layers need.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(static_cast<std::size_t>(count(shape)), 0.0f);
    }
    Tensor(std::vector<int> s, std::vector<float> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<std::int64_t>(data.size()) != count(shape))
            throw std::invalid_argument("tensor: data size does not match shape");
    }

    static std::int64_t count(const std::vector<int>& s) {
        std::int64_t n = 1;
        for (int d : s) n *= d;
        return n;
    }

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
    int dim(int i) const { return shape.at(static_cast<std::size_t>(i)); }
    int rank() const { return static_cast<int>(shape.size()); }

    float* ptr() { return data.data(); }
    const float* ptr() const { return data.data(); }

    // View as [rows x cols]; product must match the element count.
    MapRM mat(int rows, int cols) {
        assert(static_cast<std::int64_t>(rows) * cols == size());
        return MapRM(data.data(), rows, cols);
    }
    ConstMapRM mat(int rows, int cols) const {
        assert(static_cast<std::int64_t>(rows) * cols == size());
        return ConstMapRM(data.data(), rows, cols);
    }
    // View as [dim0 x rest].
    MapRM mat2() {
        return mat(shape.at(0), static_cast<int>(size() / shape.at(0)));
    }
    ConstMapRM mat2() const {
        return mat(shape.at(0), static_cast<int>(size() / shape.at(0)));
    }

    void fill(float v) { std::fill(data.begin(), data.end(), v); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape.size(); ++i)
            s += (i ? "x" : "") + std::to_string(shape[i]);
        return s + "]";
    }
};

inline void check_finite(const Tensor& t, const char* what) {
    for (float v : t.data)
        if (!std::isfinite(v))
            throw std::runtime_error(std::string("non-finite value in ") + what);
}

}  // namespace sleepssl
