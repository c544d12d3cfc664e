#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ilgaco/rng.hpp"
#include "ilgaco/tensor.hpp"

namespace ilgaco {

// Sliding-window defaults used for both training and test sequences.
inline constexpr uint32_t kWindowLen = 28;
inline constexpr double kWindowOverlap = 0.6;

enum class FactorKind : uint32_t {
    Viewpoint = 0,  // camera angle in degrees
    Condition = 1,  // walking condition label
};

// A condition the same subjects are observed under; the unit of incremental
// learning.
struct CovariateFactor {
    uint32_t id = 0;
    FactorKind kind = FactorKind::Viewpoint;
    double angle_deg = 0.0;  // viewpoint only
    std::string label;       // condition only

    std::string display_name() const;
};

struct DatasetSpec {
    uint32_t num_subjects = 20;
    std::vector<CovariateFactor> factors;
    uint32_t frames_per_sequence = 84;
    uint32_t frame_dim = 32;
    uint32_t train_sequences = 4;  // per (subject, factor)
    uint32_t test_sequences = 2;   // per (subject, factor)
    double noise_std = 0.05;
    uint64_t seed = 42;

    // 20 subjects, 5 viewpoints (0..180 degrees) plus nm/bg/cl conditions.
    static DatasetSpec defaults();

    // Throws Validation listing every violated bound.
    void validate() const;

    std::vector<uint32_t> factor_ids(FactorKind kind) const;
    const CovariateFactor& factor(uint32_t id) const;
};

// One recorded walk: an ordered stack of frame vectors.
struct FrameSequence {
    uint32_t subject = 0;
    uint32_t factor = 0;
    uint32_t sequence_id = 0;  // position in the dataset's canonical order
    bool is_test = false;
    Tensor2 frames;  // frame_count x frame_dim
};

// One fixed-length window cut from a sequence.
struct GaitSample {
    uint32_t subject = 0;
    uint32_t factor = 0;
    uint32_t source_sequence = 0;
    uint32_t window_start = 0;
    Tensor2 window;  // win_len x frame_dim
};

struct Dataset {
    DatasetSpec spec;
    std::vector<FrameSequence> sequences;  // canonical order: subject, factor, train then test

    std::vector<const FrameSequence*> train_of(uint32_t factor) const;
    std::vector<const FrameSequence*> test_of(uint32_t factor) const;
};

// ---------------------------------------------------------------------------
// Synthetic generation. Frame t of a sequence is
//     A_f * u_s + b_f + g(phase_t, s) + noise
// with u_s a per-subject latent, (A_f, b_f) a per-factor linear map and
// offset, and g a subject-specific periodic component of period kWindowLen.
// Viewpoint factor maps vary smoothly with the camera angle; condition
// factor maps are independent draws with larger offsets. Everything is a
// pure function of the spec (including its seed).
// ---------------------------------------------------------------------------

// The deterministic latent state behind a dataset; exposed so tests can
// render sequences at chosen phases.
class GeneratorModel {
public:
    explicit GeneratorModel(const DatasetSpec& spec);

    // Renders frames for (subject, factor) starting at the given gait
    // phase. noise_rng may be null for a noise-free render.
    Tensor2 render(uint32_t subject, uint32_t factor, double phase_offset,
                   uint32_t frame_count, Rng* noise_rng) const;

private:
    const DatasetSpec spec_;
    std::vector<std::vector<double>> subject_latent_;     // per subject, frame_dim
    std::vector<std::vector<double>> gait_amp_;           // per subject, frame_dim
    std::vector<std::vector<double>> gait_phase_;         // per subject, frame_dim
    std::vector<Tensor2> factor_map_;                     // per factor, D x D
    std::vector<std::vector<double>> factor_offset_;      // per factor, frame_dim
};

Dataset generate_dataset(const DatasetSpec& spec);

// Cuts a sequence into fixed-length windows. stride = round((1-overlap) *
// win_len), at least 1. Sequences shorter than win_len yield no windows.
std::vector<GaitSample> window_sequence(const FrameSequence& seq,
                                        uint32_t win_len = kWindowLen,
                                        double overlap = kWindowOverlap);

// A test sequence with its windows, scored as one video.
struct TestVideo {
    uint32_t subject = 0;
    uint32_t factor = 0;
    uint32_t sequence_id = 0;
    std::vector<GaitSample> windows;
};

// Per-step training windows (the newly added factor only) plus every
// factor's test videos, which stay available at all steps.
struct SplitPlan {
    std::vector<uint32_t> factor_order;
    std::vector<std::vector<GaitSample>> train_windows;    // per step
    std::map<uint32_t, std::vector<TestVideo>> test_videos;  // per factor
};

SplitPlan incremental_splits(const Dataset& dataset,
                             const std::vector<uint32_t>& factor_order,
                             uint32_t win_len = kWindowLen,
                             double overlap = kWindowOverlap);

// Binary dataset files, magic "ILGC". Layout in docs/formats.md. The
// in-memory forms exist so callers can checksum or embed the exact bytes.
std::string serialize_dataset(const Dataset& dataset);
Dataset parse_dataset(const std::string& bytes, const std::string& origin);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace ilgaco
