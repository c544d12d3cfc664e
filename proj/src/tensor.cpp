#include "ilgaco/tensor.hpp"

#include <cmath>
#include <cstdio>

#include "ilgaco/error.hpp"

namespace ilgaco {

namespace {
WarnHandler g_warn_handler = nullptr;
}

WarnHandler set_warn_handler(WarnHandler handler) {
    WarnHandler prev = g_warn_handler;
    g_warn_handler = handler;
    return prev;
}

void warn(const std::string& msg) {
    if (g_warn_handler != nullptr) {
        g_warn_handler(msg);
    } else {
        std::fprintf(stderr, "warning: %s\n", msg.c_str());
    }
}

bool Tensor2::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

Tensor2 tensor_from(std::initializer_list<std::initializer_list<double>> rows) {
    Tensor2 t(rows.size(), rows.size() ? rows.begin()->size() : 0);
    size_t i = 0;
    for (const auto& r : rows) {
        if (r.size() != t.cols) {
            throw_dimension("tensor_from: ragged rows");
        }
        size_t j = 0;
        for (double v : r) {
            t.at(i, j++) = v;
        }
        ++i;
    }
    return t;
}

Tensor2 transposed(const Tensor2& x) {
    Tensor2 t(x.cols, x.rows);
    for (size_t i = 0; i < x.rows; ++i) {
        for (size_t j = 0; j < x.cols; ++j) {
            t.at(j, i) = x.at(i, j);
        }
    }
    return t;
}

Tensor2& ParamSet::add(std::string name, Tensor2 init) {
    if (find(name) != nullptr) {
        throw_usage("duplicate parameter name: " + name);
    }
    Param p;
    p.name = std::move(name);
    p.grad = Tensor2(init.rows, init.cols, 0.0);
    p.value = std::move(init);
    params_.push_back(std::move(p));
    return params_.back().value;
}

Param* ParamSet::find(std::string_view name) {
    for (auto& p : params_) {
        if (p.name == name) {
            return &p;
        }
    }
    return nullptr;
}

const Param* ParamSet::find(std::string_view name) const {
    return const_cast<ParamSet*>(this)->find(name);
}

void ParamSet::zero_grad() {
    for (auto& p : params_) {
        p.grad.fill(0.0);
    }
}

size_t ParamSet::total_values() const {
    size_t n = 0;
    for (const auto& p : params_) {
        n += p.value.size();
    }
    return n;
}

bool ParamSet::all_finite() const {
    for (const auto& p : params_) {
        if (!p.value.all_finite()) {
            return false;
        }
    }
    return true;
}

}  // namespace ilgaco
