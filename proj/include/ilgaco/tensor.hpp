#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <string_view>
#include <vector>

namespace ilgaco {

// Dense row-major matrix of doubles. Row vectors are Tensor2 with rows == 1.
struct Tensor2 {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Tensor2() = default;
    Tensor2(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    size_t size() const { return rows * cols; }

    double& at(size_t i, size_t j) { return data[i * cols + j]; }
    double at(size_t i, size_t j) const { return data[i * cols + j]; }

    double* row(size_t i) { return data.data() + i * cols; }
    const double* row(size_t i) const { return data.data() + i * cols; }

    bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    bool all_finite() const;

    bool operator==(const Tensor2& o) const {
        return rows == o.rows && cols == o.cols && data == o.data;
    }
};

// [rows x cols] from nested initializer, for tests and small fixtures.
Tensor2 tensor_from(std::initializer_list<std::initializer_list<double>> rows);

Tensor2 transposed(const Tensor2& x);

// Named parameter with a gradient buffer of identical shape.
struct Param {
    std::string name;
    Tensor2 value;
    Tensor2 grad;
};

class ParamSet {
public:
    // Registers a parameter; the gradient buffer is allocated zero-filled.
    Tensor2& add(std::string name, Tensor2 init);

    size_t size() const { return params_.size(); }
    Param& operator[](size_t i) { return params_[i]; }
    const Param& operator[](size_t i) const { return params_[i]; }

    Param* find(std::string_view name);
    const Param* find(std::string_view name) const;

    void zero_grad();
    size_t total_values() const;
    bool all_finite() const;

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

private:
    std::deque<Param> params_;  // deque: references from add() survive growth
};

}  // namespace ilgaco
