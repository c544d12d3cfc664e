#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ilgaco/dataset.hpp"
#include "ilgaco/eval.hpp"
#include "ilgaco/losses.hpp"
#include "ilgaco/memory.hpp"
#include "ilgaco/model.hpp"
#include "ilgaco/rng.hpp"

namespace ilgaco {

// Per-batch window perturbations; each piece is off at its zero value.
struct AugmentConfig {
    double gaussian_noise_std = 0.05;
    double frame_dropout_prob = 0.1;   // dropped frame replaced by its neighbor
    uint32_t temporal_shift_max = 14;  // circular shift of the window phase

    void validate(uint32_t win_len) const;
};

struct TrainConfig {
    uint32_t iterations_main = 2000;
    uint32_t iterations_finetune = 2000;
    double lr_main = 1e-3;
    double lr_finetune = 1e-4;  // must stay below lr_main
    uint32_t batch_size = 32;
    LossConfig loss;
    uint64_t memory_capacity = 400;
    AugmentConfig augment;
    uint64_t seed = 7;

    void validate() const;
};

// Derived-stream tags (see rng.hpp), one per training phase and step. The
// baseline methods reuse the same tags, so phases two methods share draw
// identical batch and augmentation sequences.
namespace streams {
inline constexpr uint64_t kModelInit = 21;
inline constexpr uint64_t kBatches = 22;
inline constexpr uint64_t kAugment = 23;
inline constexpr uint64_t kFinetuneBatches = 24;
inline constexpr uint64_t kFinetuneAugment = 25;
}  // namespace streams

// Observation points for tests and progress reporting; default-constructed
// hooks observe nothing.
struct TrainHooks {
    // Called when a phase starts: "train_initial", "snapshot", "pool",
    // "train_main", "finetune", "memory_update".
    std::function<void(const std::string&)> on_stage;
    // Called once per iteration with the sampled pool indices.
    std::function<void(const std::vector<size_t>&)> on_batch;
    // Called after each full incremental step (memory already updated).
    std::function<void(size_t step, const GaitModel&, const ExemplarMemory&)> on_step;
};

// Rotates frames so the window starts `shift` frames later (circular).
Tensor2 circular_shift(const Tensor2& frames, size_t shift);

// Shift, then neighbor-copy frame dropout, then additive Gaussian noise.
GaitSample augment_window(const GaitSample& sample, const AugmentConfig& config, Rng& rng);

// The shared mini-batch loop: uniform batches from the pool, per-batch
// augmentation, composite loss against the (optional) teacher, Adam. The
// pool's old/new flags become the distillation mask.
void train_loop(GaitModel& model, const std::vector<PoolSample>& pool,
                const ModelSnapshot* teacher, uint32_t iterations, double lr,
                const TrainConfig& config, Rng& batch_rng, Rng& augment_rng,
                const TrainHooks& hooks = {});

// Plain cross-entropy training of a fresh model on the first factor.
void train_initial(GaitModel& model, const std::vector<GaitSample>& windows,
                   const TrainConfig& config, const TrainHooks& hooks = {});

// One four-stage incremental step: snapshot the teacher, pool memory with
// the new windows, train with the composite loss, balanced fine-tune, and
// update the memory with the fine-tuned model. Returns the teacher.
ModelSnapshot incremental_step(GaitModel& model, ExemplarMemory& memory,
                               const std::vector<GaitSample>& new_windows,
                               const TrainConfig& config, const TrainHooks& hooks = {});

// Fine-tunes on an exactly balanced subset: the current quota q per
// (factor, class) for every stored factor plus the new one (new-factor
// samples herded with the current model), at lr_finetune.
void balanced_finetune(GaitModel& model, const ExemplarMemory& memory,
                       const std::vector<GaitSample>& new_windows,
                       const ModelSnapshot& teacher, const TrainConfig& config,
                       size_t step_index, const TrainHooks& hooks = {});

struct IncrementalRunResult {
    std::vector<uint32_t> factor_order;
    std::vector<EvalReport> reports;  // one per step, full test set each time
    Trajectory trajectory;
    std::optional<GaitModel> model;          // final
    std::optional<ExemplarMemory> memory;    // final
};

// The full pipeline: initial training on factor_order[0], memory seeding,
// then one incremental step per remaining factor, evaluating every factor's
// test split after each step.
IncrementalRunResult run_incremental(const Dataset& dataset,
                                     const std::vector<uint32_t>& factor_order,
                                     const TrainConfig& config, const TrainHooks& hooks = {});

// Non-incremental upper bound: one cross-entropy run on the union of the
// factors' training windows. With a single factor this is bit-identical to
// train_initial.
std::pair<GaitModel, EvalReport> joint_train(const Dataset& dataset,
                                             const std::vector<uint32_t>& factors,
                                             const TrainConfig& config,
                                             const TrainHooks& hooks = {});

}  // namespace ilgaco
