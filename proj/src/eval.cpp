#include "ilgaco/eval.hpp"

#include <algorithm>
#include <string>

#include "ilgaco/error.hpp"
#include "ilgaco/nn.hpp"

namespace ilgaco {

VideoPrediction video_predict(const GaitModel& model, const TestVideo& video) {
    if (video.windows.empty()) {
        throw_validation("video_predict: video " + std::to_string(video.sequence_id) + " has no windows");
    }
    std::vector<const GaitSample*> batch;
    batch.reserve(video.windows.size());
    for (const auto& w : video.windows) batch.push_back(&w);

    const Tensor2 logits = model.forward(batch).logits;
    const Tensor2 probs = softmax_rows(logits);

    VideoPrediction pred;
    pred.sequence_id = video.sequence_id;
    pred.mean_probs.assign(probs.cols, 0.0);
    for (size_t i = 0; i < probs.rows; ++i) {
        for (size_t j = 0; j < probs.cols; ++j) {
            pred.mean_probs[j] += probs.at(i, j) / static_cast<double>(probs.rows);
        }
    }
    size_t best = 0;
    for (size_t j = 1; j < pred.mean_probs.size(); ++j) {
        if (pred.mean_probs[j] > pred.mean_probs[best]) best = j;  // ties keep lowest id
    }
    pred.predicted = static_cast<uint32_t>(best);
    return pred;
}

VideoClassifier softmax_classifier(const GaitModel& model) {
    return [&model](const TestVideo& video) { return video_predict(model, video).predicted; };
}

double rank1(const std::vector<TestVideo>& videos, const VideoClassifier& classify) {
    if (videos.empty()) {
        throw_validation("rank1: no test videos");
    }
    size_t correct = 0;
    for (const auto& v : videos) {
        if (classify(v) == v.subject) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(videos.size());
}

double rank1_softmax(const GaitModel& model, const std::vector<TestVideo>& videos) {
    return rank1(videos, softmax_classifier(model));
}

EvalReport full_report(const std::map<uint32_t, std::vector<TestVideo>>& test_videos,
                       const std::vector<uint32_t>& eval_factors,
                       const VideoClassifier& classify) {
    if (eval_factors.empty()) {
        throw_validation("full_report: no factors to evaluate");
    }
    EvalReport report;
    double sum = 0.0;
    for (uint32_t factor : eval_factors) {
        const auto it = test_videos.find(factor);
        if (it == test_videos.end()) {
            throw_validation("full_report: no test videos for factor " + std::to_string(factor));
        }
        const double pct = rank1(it->second, classify);
        report.factor_ids.push_back(factor);
        report.rank1_pct.push_back(pct);
        report.video_counts.push_back(it->second.size());
        sum += pct;
    }
    report.average = sum / static_cast<double>(eval_factors.size());
    return report;
}

void Trajectory::append(uint32_t added_factor, const EvalReport& report) {
    if (rows.empty()) {
        eval_factors = report.factor_ids;
    } else if (eval_factors != report.factor_ids) {
        throw_usage("trajectory: report factors changed between steps");
    }
    step_factors.push_back(added_factor);
    rows.push_back(report.rank1_pct);
}

double Trajectory::at(size_t step, uint32_t factor) const {
    if (step >= rows.size()) {
        throw_usage("trajectory: step " + std::to_string(step) + " out of range");
    }
    for (size_t j = 0; j < eval_factors.size(); ++j) {
        if (eval_factors[j] == factor) return rows[step][j];
    }
    throw_usage("trajectory: factor " + std::to_string(factor) + " not tracked");
}

}  // namespace ilgaco
