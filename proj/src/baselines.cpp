#include "ilgaco/baselines.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "ilgaco/error.hpp"

namespace ilgaco {

std::string method_name(Method method) {
    switch (method) {
        case Method::Ilgaco: return "ilgaco";
        case Method::Lwf: return "lwf";
        case Method::Icarl: return "icarl";
        case Method::Joint: return "joint";
    }
    throw_usage("method_name: bad enum value");
}

Method method_from_name(const std::string& name) {
    if (name == "ilgaco") return Method::Ilgaco;
    if (name == "lwf") return Method::Lwf;
    if (name == "icarl") return Method::Icarl;
    if (name == "joint") return Method::Joint;
    throw_validation("unknown method '" + name + "' (expected ilgaco, lwf, icarl or joint)");
}

ClassMeans compute_class_means(const GaitModel& model, const ExemplarMemory& memory) {
    const uint32_t classes = model.config().num_classes;
    ClassMeans cm;
    cm.means = Tensor2(classes, model.config().embedding);
    cm.counts.assign(classes, 0);

    for (const auto& cell : memory.cells()) {
        if (cell.samples.empty()) continue;
        std::vector<const GaitSample*> batch;
        for (const auto& s : cell.samples) batch.push_back(&s);
        const Tensor2 sigs = model.forward(batch).signatures;
        for (size_t i = 0; i < sigs.rows; ++i) {
            const uint32_t c = cell.samples[i].subject;
            for (size_t j = 0; j < sigs.cols; ++j) cm.means.at(c, j) += sigs.at(i, j);
            ++cm.counts[c];
        }
    }
    for (uint32_t c = 0; c < classes; ++c) {
        if (cm.counts[c] == 0) continue;
        for (size_t j = 0; j < cm.means.cols; ++j) {
            cm.means.at(c, j) /= static_cast<double>(cm.counts[c]);
        }
    }
    return cm;
}

uint32_t nme_classify(const GaitModel& model, const ClassMeans& means, const TestVideo& video) {
    if (video.windows.empty()) {
        throw_validation("nme_classify: video " + std::to_string(video.sequence_id) + " has no windows");
    }
    for (size_t c = 0; c < means.counts.size(); ++c) {
        if (means.counts[c] == 0) {
            throw_validation("nme_classify: class " + std::to_string(c) + " has no mean (no exemplars)");
        }
    }

    std::vector<const GaitSample*> batch;
    for (const auto& w : video.windows) batch.push_back(&w);
    const Tensor2 sigs = model.forward(batch).signatures;

    std::vector<double> query(sigs.cols, 0.0);
    for (size_t i = 0; i < sigs.rows; ++i) {
        for (size_t j = 0; j < sigs.cols; ++j) query[j] += sigs.at(i, j) / static_cast<double>(sigs.rows);
    }

    double best = std::numeric_limits<double>::infinity();
    size_t best_c = 0;
    for (size_t c = 0; c < means.means.rows; ++c) {
        double d2 = 0.0;
        for (size_t j = 0; j < means.means.cols; ++j) {
            const double diff = query[j] - means.means.at(c, j);
            d2 += diff * diff;
        }
        if (d2 < best) {  // strict: ties keep the lowest class id
            best = d2;
            best_c = c;
        }
    }
    return static_cast<uint32_t>(best_c);
}

VideoClassifier nme_classifier(const GaitModel& model, const ClassMeans& means) {
    return [&model, &means](const TestVideo& video) { return nme_classify(model, means, video); };
}

ModelSnapshot lwf_step(GaitModel& model, const std::vector<GaitSample>& new_windows,
                       const TrainConfig& config, size_t step_index, const TrainHooks& hooks) {
    config.validate();
    if (new_windows.empty()) {
        throw_validation("lwf_step: no windows for the new factor");
    }

    if (hooks.on_stage) hooks.on_stage("snapshot");
    ModelSnapshot teacher(model);

    if (hooks.on_stage) hooks.on_stage("pool");
    std::vector<PoolSample> pool;
    pool.reserve(new_windows.size());
    for (const auto& w : new_windows) pool.push_back({&w, true});  // distill everything

    if (hooks.on_stage) hooks.on_stage("train_main");
    Rng batch_rng(derive_seed(config.seed, streams::kBatches, step_index));
    Rng augment_rng(derive_seed(config.seed, streams::kAugment, step_index));
    train_loop(model, pool, &teacher, config.iterations_main, config.lr_main, config,
               batch_rng, augment_rng, hooks);
    return teacher;
}

ModelSnapshot icarl_step(GaitModel& model, ExemplarMemory& memory,
                         const std::vector<GaitSample>& new_windows,
                         const TrainConfig& config, ClassMeans* means_out,
                         const TrainHooks& hooks) {
    config.validate();
    if (new_windows.empty()) {
        throw_validation("icarl_step: no windows for the new factor");
    }
    if (memory.factor_count() == 0) {
        throw_usage("icarl_step: memory holds no factor; run train_initial and seed the memory first");
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

    if (hooks.on_stage) hooks.on_stage("memory_update");
    memory.update(new_windows, model);

    if (means_out != nullptr) {
        *means_out = compute_class_means(model, memory);
    }
    return teacher;
}

MethodRunResult run_method(const Dataset& dataset, Method method,
                           const std::vector<uint32_t>& factor_order,
                           const TrainConfig& config, const TrainHooks& hooks) {
    MethodRunResult result;
    result.method = method;
    result.factor_order = factor_order;

    if (method == Method::Ilgaco) {
        IncrementalRunResult run = run_incremental(dataset, factor_order, config, hooks);
        result.reports = std::move(run.reports);
        result.trajectory = std::move(run.trajectory);
        result.model = std::move(run.model);
        result.memory = std::move(run.memory);
        result.final_average = result.reports.back().average;
        return result;
    }

    if (method == Method::Joint) {
        auto [model, report] = joint_train(dataset, factor_order, config, hooks);
        result.trajectory.append(factor_order.back(), report);
        result.final_average = report.average;
        result.reports.push_back(std::move(report));
        result.model.emplace(std::move(model));
        return result;
    }

    config.validate();
    const SplitPlan splits = incremental_splits(dataset, factor_order);

    ModelConfig mc;
    mc.frame_dim = dataset.spec.frame_dim;
    mc.num_classes = dataset.spec.num_subjects;
    GaitModel model(mc, derive_seed(config.seed, streams::kModelInit));

    if (method == Method::Lwf) {
        train_initial(model, splits.train_windows[0], config, hooks);
        EvalReport report = full_report(splits.test_videos, factor_order, softmax_classifier(model));
        result.trajectory.append(factor_order[0], report);
        result.reports.push_back(std::move(report));
        for (size_t step = 1; step < factor_order.size(); ++step) {
            lwf_step(model, splits.train_windows[step], config, step, hooks);
            EvalReport r = full_report(splits.test_videos, factor_order, softmax_classifier(model));
            result.trajectory.append(factor_order[step], r);
            result.reports.push_back(std::move(r));
        }
        result.final_average = result.reports.back().average;
        result.model.emplace(std::move(model));
        return result;
    }

    // iCaRL
    ExemplarMemory memory(config.memory_capacity);
    train_initial(model, splits.train_windows[0], config, hooks);
    if (hooks.on_stage) hooks.on_stage("memory_update");
    memory.update(splits.train_windows[0], model);
    if (hooks.on_step) hooks.on_step(0, model, memory);
    ClassMeans means = compute_class_means(model, memory);

    EvalReport report = full_report(splits.test_videos, factor_order, nme_classifier(model, means));
    result.trajectory.append(factor_order[0], report);
    result.reports.push_back(std::move(report));

    for (size_t step = 1; step < factor_order.size(); ++step) {
        icarl_step(model, memory, splits.train_windows[step], config, &means, hooks);
        if (hooks.on_step) hooks.on_step(step, model, memory);
        EvalReport r = full_report(splits.test_videos, factor_order, nme_classifier(model, means));
        result.trajectory.append(factor_order[step], r);
        result.reports.push_back(std::move(r));
    }
    result.final_average = result.reports.back().average;
    result.model.emplace(std::move(model));
    result.memory.emplace(std::move(memory));
    return result;
}

}  // namespace ilgaco
