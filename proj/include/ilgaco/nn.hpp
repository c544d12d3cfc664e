#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ilgaco/tensor.hpp"

namespace ilgaco {

// ---------------------------------------------------------------------------
// Layer primitives. Forward functions allocate their outputs; backward
// functions accumulate into parameter gradients (+=) and overwrite input
// gradients.
// ---------------------------------------------------------------------------

// out[B x H] = x[B x D] * w[D x H] + b (b is 1 x H, broadcast over rows)
Tensor2 affine_forward(const Tensor2& x, const Tensor2& w, const Tensor2& b);

// Given d(out), accumulates dw += x^T * dout and db += column sums of dout,
// and writes dx = dout * w^T (skipped when dx == nullptr).
void affine_backward(const Tensor2& x, const Tensor2& w, const Tensor2& dout,
                     Tensor2* dx, Tensor2& dw, Tensor2& db);

Tensor2 relu(const Tensor2& x);

// dx = dout where pre > 0, else 0
Tensor2 relu_backward(const Tensor2& pre, const Tensor2& dout);

// Temperature softmax of one logit vector; max-subtracted for stability.
// temperature must be > 0.
std::vector<double> softmax(std::span<const double> logits, double temperature = 1.0);

// Row-wise temperature softmax.
Tensor2 softmax_rows(const Tensor2& logits, double temperature = 1.0);

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
    std::vector<Tensor2> m;  // first moments, one per parameter
    std::vector<Tensor2> v;  // second moments
    size_t step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

AdamState make_adam(const ParamSet& params, double lr,
                    double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// One bias-corrected Adam step over all parameters; zeroes gradients after
// applying them. Throws Usage if the state does not match the ParamSet.
void adam_step(ParamSet& params, AdamState& state);

// ---------------------------------------------------------------------------
// Gradient verification
// ---------------------------------------------------------------------------

// Central-difference check of the analytic gradients currently stored in
// `params` against the scalar loss `f` (which must read the parameter
// values and must not touch the gradient buffers). Returns the maximum
// relative error over all coordinates. Throws Numeric if f is not finite.
double grad_check(const std::function<double()>& f, ParamSet& params, double eps = 1e-5);

}  // namespace ilgaco
