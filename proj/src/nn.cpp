#include "ilgaco/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ilgaco/error.hpp"
#include "ilgaco/kernels.hpp"

namespace ilgaco {

namespace {

std::string shape_str(const Tensor2& t) {
    return "[" + std::to_string(t.rows) + " x " + std::to_string(t.cols) + "]";
}

}  // namespace

Tensor2 affine_forward(const Tensor2& x, const Tensor2& w, const Tensor2& b) {
    if (x.cols != w.rows) {
        throw_dimension("affine_forward: x " + shape_str(x) + " does not conform with w " + shape_str(w));
    }
    if (b.rows != 1 || b.cols != w.cols) {
        throw_dimension("affine_forward: bias " + shape_str(b) + " does not match w " + shape_str(w));
    }
    Tensor2 out(x.rows, w.cols);
    for (size_t i = 0; i < out.rows; ++i) {
        std::copy(b.data.begin(), b.data.end(), out.row(i));
    }
    kernels::active().matmul_acc(x.data.data(), w.data.data(), out.data.data(),
                                 x.rows, x.cols, w.cols);
    return out;
}

void affine_backward(const Tensor2& x, const Tensor2& w, const Tensor2& dout,
                     Tensor2* dx, Tensor2& dw, Tensor2& db) {
    if (dout.rows != x.rows || dout.cols != w.cols) {
        throw_dimension("affine_backward: dout " + shape_str(dout) + " does not match x " +
                        shape_str(x) + " * w " + shape_str(w));
    }
    if (!dw.same_shape(w) || db.rows != 1 || db.cols != w.cols) {
        throw_dimension("affine_backward: gradient buffers do not match parameter shapes");
    }
    const auto& k = kernels::active();

    // dw += x^T * dout
    const Tensor2 xt = transposed(x);
    k.matmul_acc(xt.data.data(), dout.data.data(), dw.data.data(),
                 xt.rows, xt.cols, dout.cols);

    // db += column sums of dout
    for (size_t i = 0; i < dout.rows; ++i) {
        k.axpy(1.0, dout.row(i), db.row(0), dout.cols);
    }

    if (dx != nullptr) {
        *dx = Tensor2(x.rows, x.cols);
        const Tensor2 wt = transposed(w);
        k.matmul_acc(dout.data.data(), wt.data.data(), dx->data.data(),
                     dout.rows, dout.cols, wt.cols);
    }
}

Tensor2 relu(const Tensor2& x) {
    Tensor2 out(x.rows, x.cols);
    kernels::active().relu(x.data.data(), out.data.data(), x.size());
    return out;
}

Tensor2 relu_backward(const Tensor2& pre, const Tensor2& dout) {
    if (!pre.same_shape(dout)) {
        throw_dimension("relu_backward: pre " + shape_str(pre) + " vs dout " + shape_str(dout));
    }
    Tensor2 dx(pre.rows, pre.cols);
    kernels::active().relu_backward(pre.data.data(), dout.data.data(), dx.data.data(), pre.size());
    return dx;
}

std::vector<double> softmax(std::span<const double> logits, double temperature) {
    if (!(temperature > 0.0)) {
        throw_domain("softmax: temperature must be > 0, got " + std::to_string(temperature));
    }
    std::vector<double> out(logits.size());
    double zmax = -std::numeric_limits<double>::infinity();
    for (double z : logits) {
        zmax = std::max(zmax, z);
    }
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp((logits[i] - zmax) / temperature);
        sum += out[i];
    }
    for (double& p : out) {
        p /= sum;
    }
    return out;
}

Tensor2 softmax_rows(const Tensor2& logits, double temperature) {
    Tensor2 out(logits.rows, logits.cols);
    for (size_t i = 0; i < logits.rows; ++i) {
        const auto p = softmax(std::span(logits.row(i), logits.cols), temperature);
        std::copy(p.begin(), p.end(), out.row(i));
    }
    return out;
}

AdamState make_adam(const ParamSet& params, double lr,
                    double beta1, double beta2, double eps) {
    AdamState s;
    s.lr = lr;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.eps = eps;
    for (const auto& p : params) {
        s.m.emplace_back(p.value.rows, p.value.cols, 0.0);
        s.v.emplace_back(p.value.rows, p.value.cols, 0.0);
    }
    return s;
}

void adam_step(ParamSet& params, AdamState& state) {
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw_usage("adam_step: state not initialized for this parameter set");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    const auto& k = kernels::active();
    for (size_t i = 0; i < params.size(); ++i) {
        Param& p = params[i];
        if (!state.m[i].same_shape(p.value)) {
            throw_usage("adam_step: moment shape mismatch for " + p.name);
        }
        k.adam_update(p.value.data.data(), state.m[i].data.data(), state.v[i].data.data(),
                      p.grad.data.data(), p.value.size(),
                      state.lr, state.beta1, state.beta2, state.eps, bc1, bc2);
    }
    params.zero_grad();
}

double grad_check(const std::function<double()>& f, ParamSet& params, double eps) {
    if (!(eps > 0.0)) {
        throw_domain("grad_check: eps must be > 0");
    }
    double max_rel = 0.0;
    for (auto& p : params) {
        for (size_t i = 0; i < p.value.size(); ++i) {
            const double saved = p.value.data[i];
            p.value.data[i] = saved + eps;
            const double fp = f();
            p.value.data[i] = saved - eps;
            const double fm = f();
            p.value.data[i] = saved;
            if (!std::isfinite(fp) || !std::isfinite(fm)) {
                throw_numeric("grad_check: non-finite loss at parameter " + p.name);
            }
            const double numeric = (fp - fm) / (2.0 * eps);
            const double analytic = p.grad.data[i];
            const double denom = std::max(std::abs(numeric) + std::abs(analytic), 1e-8);
            max_rel = std::max(max_rel, std::abs(numeric - analytic) / denom);
        }
    }
    return max_rel;
}

}  // namespace ilgaco
