#pragma once

#include <cstdint>
#include <vector>

#include "ilgaco/tensor.hpp"

namespace ilgaco {

struct LossConfig {
    // Softening temperature for both teacher and student distributions.
    double temperature = 2.0;
    // Weight on each distilled sample's term; the default compensates the
    // temperature-squared shrinkage of distillation gradients.
    double distill_scale = 4.0;
    // When true, the distillation sum divides by the number of masked
    // samples instead of the batch size (zero masked samples -> zero term).
    bool average_over_masked = false;

    void validate() const;
};

// A loss value split into its two terms, with the gradient with respect to
// the student logits.
struct LossResult {
    double loss = 0.0;
    double cross = 0.0;
    double distill = 0.0;
    Tensor2 dlogits;
};

// Mean cross-entropy over the batch. dlogits = (softmax - onehot) / B.
LossResult cross_entropy(const Tensor2& logits, const std::vector<uint32_t>& labels);

// Masked distillation: samples with mask[i] != 0 pay the cross-entropy
// between the teacher's and student's temperature-softened distributions;
// the rest contribute exactly zero loss and zero gradient.
LossResult distillation(const Tensor2& student_logits, const Tensor2& teacher_logits,
                        const std::vector<uint8_t>& mask, const LossConfig& config);

// Classification plus masked distillation in one pass:
//   L = CE(logits, labels) + (1/B) * sum_i mask_i * scale * H(teacher_i, student_i)
// Pass teacher_logits == nullptr for the plain classification loss (first
// increment, no teacher yet); mask is ignored in that case.
LossResult composite_loss(const Tensor2& student_logits, const std::vector<uint32_t>& labels,
                          const Tensor2* teacher_logits, const std::vector<uint8_t>& mask,
                          const LossConfig& config);

}  // namespace ilgaco
