#include "ilgaco/trainer.hpp"

#include <algorithm>
#include <cstring>
#include <string>
#include <utility>

#include "ilgaco/error.hpp"
#include "ilgaco/nn.hpp"

namespace ilgaco {

void AugmentConfig::validate(uint32_t win_len) const {
    std::vector<std::string> bad;
    if (!(gaussian_noise_std >= 0.0)) bad.push_back("gaussian_noise_std must be >= 0");
    if (!(frame_dropout_prob >= 0.0) || frame_dropout_prob > 1.0) {
        bad.push_back("frame_dropout_prob must be in [0, 1]");
    }
    if (temporal_shift_max > win_len) {
        bad.push_back("temporal_shift_max " + std::to_string(temporal_shift_max) +
                      " exceeds window length " + std::to_string(win_len));
    }
    if (!bad.empty()) {
        std::string msg = "invalid augment config:";
        for (const auto& b : bad) msg += " " + b + ";";
        throw_validation(msg);
    }
}

void TrainConfig::validate() const {
    std::vector<std::string> bad;
    if (iterations_main < 1) bad.push_back("iterations_main must be >= 1");
    if (iterations_finetune < 1) bad.push_back("iterations_finetune must be >= 1");
    if (batch_size < 1) bad.push_back("batch_size must be >= 1");
    if (!(lr_main > 0.0)) bad.push_back("lr_main must be > 0");
    if (!(lr_finetune >= 0.0)) bad.push_back("lr_finetune must be >= 0");
    if (lr_finetune >= lr_main) bad.push_back("lr_finetune must be below lr_main");
    if (!bad.empty()) {
        std::string msg = "invalid train config:";
        for (const auto& b : bad) msg += " " + b + ";";
        throw_validation(msg);
    }
    loss.validate();
}

Tensor2 circular_shift(const Tensor2& frames, size_t shift) {
    const size_t t = frames.rows;
    if (t == 0) return frames;
    shift %= t;
    if (shift == 0) return frames;
    Tensor2 out(t, frames.cols);
    for (size_t i = 0; i < t; ++i) {
        const size_t src = (i + shift) % t;
        std::memcpy(out.row(i), frames.row(src), frames.cols * sizeof(double));
    }
    return out;
}

GaitSample augment_window(const GaitSample& sample, const AugmentConfig& config, Rng& rng) {
    GaitSample out = sample;
    const size_t t = out.window.rows;

    if (config.temporal_shift_max > 0) {
        const size_t shift = rng.index(config.temporal_shift_max + 1);
        out.window = circular_shift(out.window, shift);
    }
    if (config.frame_dropout_prob > 0.0 && t > 1) {
        for (size_t i = 0; i < t; ++i) {
            if (rng.uniform() < config.frame_dropout_prob) {
                const size_t neighbor = i == 0 ? 1 : i - 1;
                std::memcpy(out.window.row(i), out.window.row(neighbor),
                            out.window.cols * sizeof(double));
            }
        }
    }
    if (config.gaussian_noise_std > 0.0) {
        for (auto& v : out.window.data) v += config.gaussian_noise_std * rng.normal();
    }
    return out;
}

void train_loop(GaitModel& model, const std::vector<PoolSample>& pool,
                const ModelSnapshot* teacher, uint32_t iterations, double lr,
                const TrainConfig& config, Rng& batch_rng, Rng& augment_rng,
                const TrainHooks& hooks) {
    if (pool.empty()) {
        throw_validation("train_loop: empty training pool");
    }
    config.augment.validate(static_cast<uint32_t>(pool.front().sample->window.rows));

    AdamState adam = make_adam(model.params(), lr);
    std::vector<size_t> indices(config.batch_size);
    std::vector<GaitSample> batch;
    std::vector<const GaitSample*> ptrs;
    std::vector<uint32_t> labels;
    std::vector<uint8_t> mask;

    for (uint32_t it = 0; it < iterations; ++it) {
        for (auto& idx : indices) idx = batch_rng.index(pool.size());
        if (hooks.on_batch) hooks.on_batch(indices);

        batch.clear();
        ptrs.clear();
        labels.clear();
        mask.clear();
        for (size_t idx : indices) {
            batch.push_back(augment_window(*pool[idx].sample, config.augment, augment_rng));
            labels.push_back(pool[idx].sample->subject);
            mask.push_back(pool[idx].old ? 1 : 0);
        }
        for (const auto& s : batch) ptrs.push_back(&s);

        const GaitModel::Forward fwd = model.forward(ptrs);
        Tensor2 teacher_logits;
        if (teacher != nullptr) {
            teacher_logits = teacher->logits(ptrs);
        }
        const LossResult res = composite_loss(fwd.logits, labels,
                                              teacher != nullptr ? &teacher_logits : nullptr,
                                              mask, config.loss);
        model.backward(fwd, res.dlogits);
        adam_step(model.params(), adam);
    }
}

void train_initial(GaitModel& model, const std::vector<GaitSample>& windows,
                   const TrainConfig& config, const TrainHooks& hooks) {
    config.validate();
    if (windows.empty()) {
        throw_validation("train_initial: no training windows");
    }
    if (hooks.on_stage) hooks.on_stage("train_initial");

    std::vector<PoolSample> pool;
    pool.reserve(windows.size());
    for (const auto& w : windows) pool.push_back({&w, false});

    Rng batch_rng(derive_seed(config.seed, streams::kBatches, 0));
    Rng augment_rng(derive_seed(config.seed, streams::kAugment, 0));
    train_loop(model, pool, nullptr, config.iterations_main, config.lr_main, config,
               batch_rng, augment_rng, hooks);
}

ModelSnapshot incremental_step(GaitModel& model, ExemplarMemory& memory,
                               const std::vector<GaitSample>& new_windows,
                               const TrainConfig& config, const TrainHooks& hooks) {
    config.validate();
    if (new_windows.empty()) {
        throw_validation("incremental_step: no windows for the new factor");
    }
    if (memory.factor_count() == 0) {
        throw_usage("incremental_step: memory holds no factor; run train_initial and seed the memory first");
    }
    const size_t step_index = memory.factor_count();

    if (hooks.on_stage) hooks.on_stage("snapshot");
    ModelSnapshot teacher(model);

    if (hooks.on_stage) hooks.on_stage("pool");
    const std::vector<PoolSample> pool = training_pool(memory, new_windows);

    if (hooks.on_stage) hooks.on_stage("train_main");
    Rng batch_rng(derive_seed(config.seed, streams::kBatches, step_index));
    Rng augment_rng(derive_seed(config.seed, streams::kAugment, step_index));
    train_loop(model, pool, &teacher, config.iterations_main, config.lr_main, config,
               batch_rng, augment_rng, hooks);

    if (hooks.on_stage) hooks.on_stage("finetune");
    balanced_finetune(model, memory, new_windows, teacher, config, step_index, hooks);

    if (hooks.on_stage) hooks.on_stage("memory_update");
    memory.update(new_windows, model);

    return teacher;
}

void balanced_finetune(GaitModel& model, const ExemplarMemory& memory,
                       const std::vector<GaitSample>& new_windows,
                       const ModelSnapshot& teacher, const TrainConfig& config,
                       size_t step_index, const TrainHooks& hooks) {
    if (memory.factor_count() == 0) {
        throw_usage("balanced_finetune: memory is empty");
    }
    const uint32_t classes = model.config().num_classes;
    const uint64_t q = quota(memory.capacity(), memory.factor_count(), classes);
    if (q == 0) {
        warn("balanced_finetune skipped: per-cell quota is zero");
        return;
    }

    std::vector<PoolSample> subset;
    for (const auto& cell : memory.cells()) {
        if (cell.samples.size() < q) {
            throw_validation("balanced_finetune: factor " + std::to_string(cell.factor) + " class " +
                             std::to_string(cell.cls) + " holds " + std::to_string(cell.samples.size()) +
                             " samples, quota needs " + std::to_string(q));
        }
        for (size_t i = 0; i < q; ++i) subset.push_back({&cell.samples[i], true});
    }

    // The new factor contributes q herded samples per class as well.
    std::vector<std::vector<const GaitSample*>> by_class(classes);
    for (const auto& s : new_windows) {
        if (s.subject < classes) by_class[s.subject].push_back(&s);
    }
    for (uint32_t c = 0; c < classes; ++c) {
        const auto& members = by_class[c];
        if (members.size() < q) {
            throw_validation("balanced_finetune: new factor class " + std::to_string(c) + " has " +
                             std::to_string(members.size()) + " samples, quota needs " + std::to_string(q));
        }
        const Tensor2 sigs =
            model.forward(std::vector<const GaitSample*>(members.begin(), members.end())).signatures;
        const HerdingRanking ranking = herding_select(sigs, q);
        for (size_t idx : ranking.order) subset.push_back({members[idx], false});
    }

    Rng batch_rng(derive_seed(config.seed, streams::kFinetuneBatches, step_index));
    Rng augment_rng(derive_seed(config.seed, streams::kFinetuneAugment, step_index));
    train_loop(model, subset, &teacher, config.iterations_finetune, config.lr_finetune, config,
               batch_rng, augment_rng, hooks);
}

IncrementalRunResult run_incremental(const Dataset& dataset,
                                     const std::vector<uint32_t>& factor_order,
                                     const TrainConfig& config, const TrainHooks& hooks) {
    config.validate();
    const SplitPlan splits = incremental_splits(dataset, factor_order);

    ModelConfig mc;
    mc.frame_dim = dataset.spec.frame_dim;
    mc.num_classes = dataset.spec.num_subjects;
    GaitModel model(mc, derive_seed(config.seed, streams::kModelInit));
    ExemplarMemory memory(config.memory_capacity);

    IncrementalRunResult result;
    result.factor_order = factor_order;

    train_initial(model, splits.train_windows[0], config, hooks);
    if (hooks.on_stage) hooks.on_stage("memory_update");
    memory.update(splits.train_windows[0], model);
    if (hooks.on_step) hooks.on_step(0, model, memory);

    EvalReport report = full_report(splits.test_videos, factor_order, softmax_classifier(model));
    result.trajectory.append(factor_order[0], report);
    result.reports.push_back(std::move(report));

    for (size_t step = 1; step < factor_order.size(); ++step) {
        incremental_step(model, memory, splits.train_windows[step], config, hooks);
        if (hooks.on_step) hooks.on_step(step, model, memory);
        EvalReport r = full_report(splits.test_videos, factor_order, softmax_classifier(model));
        result.trajectory.append(factor_order[step], r);
        result.reports.push_back(std::move(r));
    }

    result.model.emplace(std::move(model));
    result.memory.emplace(std::move(memory));
    return result;
}

std::pair<GaitModel, EvalReport> joint_train(const Dataset& dataset,
                                             const std::vector<uint32_t>& factors,
                                             const TrainConfig& config, const TrainHooks& hooks) {
    config.validate();
    const SplitPlan splits = incremental_splits(dataset, factors);

    std::vector<GaitSample> all;
    for (const auto& step_windows : splits.train_windows) {
        all.insert(all.end(), step_windows.begin(), step_windows.end());
    }

    ModelConfig mc;
    mc.frame_dim = dataset.spec.frame_dim;
    mc.num_classes = dataset.spec.num_subjects;
    GaitModel model(mc, derive_seed(config.seed, streams::kModelInit));

    train_initial(model, all, config, hooks);

    EvalReport report = full_report(splits.test_videos, factors, softmax_classifier(model));
    return {std::move(model), std::move(report)};
}

}  // namespace ilgaco
