#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "ilgaco/dataset.hpp"
#include "ilgaco/model.hpp"

namespace ilgaco {

struct VideoPrediction {
    uint32_t sequence_id = 0;
    uint32_t predicted = 0;
    std::vector<double> mean_probs;  // sums to 1
};

// Scores a whole test sequence: average the softmax over its windows, then
// take the argmax (ties to the lowest class id).
VideoPrediction video_predict(const GaitModel& model, const TestVideo& video);

// Maps a test video to a predicted class. Reports share this one code path
// across the softmax head and the nearest-mean classifier.
using VideoClassifier = std::function<uint32_t(const TestVideo&)>;

// The model is captured by reference and must outlive the classifier.
VideoClassifier softmax_classifier(const GaitModel& model);

// 100 * correct / total over the given videos.
double rank1(const std::vector<TestVideo>& videos, const VideoClassifier& classify);
double rank1_softmax(const GaitModel& model, const std::vector<TestVideo>& videos);

// Per-factor Rank-1 plus their arithmetic mean, over the full test split of
// every requested factor (learned or not).
struct EvalReport {
    std::vector<uint32_t> factor_ids;
    std::vector<double> rank1_pct;     // parallel to factor_ids
    std::vector<size_t> video_counts;  // parallel to factor_ids
    double average = 0.0;
};

EvalReport full_report(const std::map<uint32_t, std::vector<TestVideo>>& test_videos,
                       const std::vector<uint32_t>& eval_factors,
                       const VideoClassifier& classify);

// Accuracy per (incremental step, test factor); the matrix behind the
// step-by-step line plots.
struct Trajectory {
    std::vector<uint32_t> eval_factors;     // one column per test factor
    std::vector<uint32_t> step_factors;     // factor added at each step (one row per step)
    std::vector<std::vector<double>> rows;  // rows[step][column]

    void append(uint32_t added_factor, const EvalReport& report);
    double at(size_t step, uint32_t factor) const;
};

}  // namespace ilgaco
