#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ilgaco/dataset.hpp"
#include "ilgaco/eval.hpp"
#include "ilgaco/memory.hpp"
#include "ilgaco/model.hpp"
#include "ilgaco/trainer.hpp"

namespace ilgaco {

enum class Method { Ilgaco, Lwf, Icarl, Joint };

std::string method_name(Method method);
Method method_from_name(const std::string& name);  // Validation on unknown names

// Per-class mean signatures of the stored exemplars under the current
// model; the nearest-mean classifier's state. Recomputed after every step.
struct ClassMeans {
    Tensor2 means;               // C x E
    std::vector<size_t> counts;  // exemplars behind each mean (0 = missing)
};

ClassMeans compute_class_means(const GaitModel& model, const ExemplarMemory& memory);

// Nearest-mean-of-exemplars: mean signature over the video's windows,
// then the class with the closest mean (ties to the lowest class id).
// Requires a mean for every class.
uint32_t nme_classify(const GaitModel& model, const ClassMeans& means, const TestVideo& video);

// model and means are captured by reference and must outlive the classifier.
VideoClassifier nme_classifier(const GaitModel& model, const ClassMeans& means);

// Memory-free baseline step: distill every sample of the new factor
// against the step-start teacher while learning it. No memory, no
// balanced fine-tune. step_index keeps the random streams aligned with
// the other methods.
ModelSnapshot lwf_step(GaitModel& model, const std::vector<GaitSample>& new_windows,
                       const TrainConfig& config, size_t step_index,
                       const TrainHooks& hooks = {});

// Memory baseline step: identical to the main method's snapshot/pool/train
// stages (bit-identical batches under the same seed), then the memory
// update — but no balanced fine-tune, and classification goes through
// nearest means instead of the softmax head.
ModelSnapshot icarl_step(GaitModel& model, ExemplarMemory& memory,
                         const std::vector<GaitSample>& new_windows,
                         const TrainConfig& config, ClassMeans* means_out = nullptr,
                         const TrainHooks& hooks = {});

struct MethodRunResult {
    Method method = Method::Ilgaco;
    std::vector<uint32_t> factor_order;
    std::vector<EvalReport> reports;  // one per step (one total for joint)
    Trajectory trajectory;
    double final_average = 0.0;
    std::optional<GaitModel> model;
    std::optional<ExemplarMemory> memory;  // absent for lwf and joint
};

// Runs any method over the same dataset/order/config so comparisons only
// differ in the method itself.
MethodRunResult run_method(const Dataset& dataset, Method method,
                           const std::vector<uint32_t>& factor_order,
                           const TrainConfig& config, const TrainHooks& hooks = {});

}  // namespace ilgaco
