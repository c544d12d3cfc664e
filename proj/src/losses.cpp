#include "ilgaco/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ilgaco/error.hpp"

namespace ilgaco {

namespace {

// log-softmax of one row at the given temperature; numerically safe for
// any finite logits.
void log_softmax_row(const double* z, size_t n, double temperature, std::vector<double>& out) {
    out.resize(n);
    double mx = z[0];
    for (size_t j = 1; j < n; ++j) mx = std::max(mx, z[j]);
    double sum = 0.0;
    for (size_t j = 0; j < n; ++j) {
        out[j] = (z[j] - mx) / temperature;
        sum += std::exp(out[j]);
    }
    const double lse = std::log(sum);
    for (size_t j = 0; j < n; ++j) out[j] -= lse;
}

void require_finite(const Tensor2& t, const char* what) {
    if (!t.all_finite()) {
        throw_numeric(std::string(what) + " contains a non-finite value");
    }
}

}  // namespace

void LossConfig::validate() const {
    if (!(temperature > 0.0)) {
        throw_domain("loss temperature must be > 0");
    }
    if (!(distill_scale >= 0.0)) {
        throw_domain("distill_scale must be >= 0");
    }
}

LossResult cross_entropy(const Tensor2& logits, const std::vector<uint32_t>& labels) {
    if (labels.size() != logits.rows) {
        throw_dimension("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(logits.rows) + " logit rows");
    }
    if (logits.rows == 0 || logits.cols == 0) {
        throw_dimension("cross_entropy: empty logits");
    }
    require_finite(logits, "cross_entropy logits");

    const size_t b = logits.rows;
    const size_t c = logits.cols;
    LossResult res;
    res.dlogits = Tensor2(b, c);
    std::vector<double> logp;
    double total = 0.0;
    for (size_t i = 0; i < b; ++i) {
        if (labels[i] >= c) {
            throw_validation("cross_entropy: label " + std::to_string(labels[i]) +
                             " out of range for " + std::to_string(c) + " classes");
        }
        log_softmax_row(logits.row(i), c, 1.0, logp);
        total -= logp[labels[i]];
        for (size_t j = 0; j < c; ++j) {
            res.dlogits.at(i, j) = std::exp(logp[j]) / static_cast<double>(b);
        }
        res.dlogits.at(i, labels[i]) -= 1.0 / static_cast<double>(b);
    }
    res.cross = total / static_cast<double>(b);
    res.loss = res.cross;
    if (!std::isfinite(res.loss)) {
        throw_numeric("cross_entropy produced a non-finite loss");
    }
    return res;
}

LossResult distillation(const Tensor2& student_logits, const Tensor2& teacher_logits,
                        const std::vector<uint8_t>& mask, const LossConfig& config) {
    config.validate();
    if (!student_logits.same_shape(teacher_logits)) {
        throw_dimension("distillation: student and teacher logits differ in shape");
    }
    if (mask.size() != student_logits.rows) {
        throw_dimension("distillation: mask length " + std::to_string(mask.size()) +
                        " != batch size " + std::to_string(student_logits.rows));
    }
    if (student_logits.rows == 0 || student_logits.cols == 0) {
        throw_dimension("distillation: empty logits");
    }
    require_finite(student_logits, "distillation student logits");
    require_finite(teacher_logits, "distillation teacher logits");

    const size_t b = student_logits.rows;
    const size_t c = student_logits.cols;
    const double t = config.temperature;

    size_t masked = 0;
    for (uint8_t m : mask) masked += m != 0 ? 1 : 0;
    const double denom = config.average_over_masked ? static_cast<double>(std::max<size_t>(masked, 1))
                                                    : static_cast<double>(b);

    LossResult res;
    res.dlogits = Tensor2(b, c);
    std::vector<double> logp, logq;
    double total = 0.0;
    for (size_t i = 0; i < b; ++i) {
        if (mask[i] == 0) continue;  // untouched rows stay exactly zero
        log_softmax_row(student_logits.row(i), c, t, logp);
        log_softmax_row(teacher_logits.row(i), c, t, logq);
        double h = 0.0;
        for (size_t j = 0; j < c; ++j) {
            const double q = std::exp(logq[j]);
            h -= q * logp[j];
            res.dlogits.at(i, j) =
                config.distill_scale * (std::exp(logp[j]) - q) / (t * denom);
        }
        total += config.distill_scale * h;
    }
    res.distill = total / denom;
    res.loss = res.distill;
    if (!std::isfinite(res.loss)) {
        throw_numeric("distillation produced a non-finite loss");
    }
    return res;
}

LossResult composite_loss(const Tensor2& student_logits, const std::vector<uint32_t>& labels,
                          const Tensor2* teacher_logits, const std::vector<uint8_t>& mask,
                          const LossConfig& config) {
    config.validate();
    LossResult res = cross_entropy(student_logits, labels);
    if (teacher_logits == nullptr) {
        return res;
    }
    LossResult dist = distillation(student_logits, *teacher_logits, mask, config);
    res.distill = dist.distill;
    res.loss = res.cross + res.distill;
    for (size_t i = 0; i < res.dlogits.data.size(); ++i) {
        res.dlogits.data[i] += dist.dlogits.data[i];
    }
    if (!std::isfinite(res.loss)) {
        throw_numeric("composite loss is non-finite");
    }
    return res;
}

}  // namespace ilgaco
