#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ilgaco/dataset.hpp"
#include "ilgaco/nn.hpp"
#include "ilgaco/tensor.hpp"

namespace ilgaco {

struct ModelConfig {
    uint32_t frame_dim = 32;
    uint32_t hidden = 64;
    uint32_t embedding = 32;
    uint32_t num_classes = 20;  // fixed across incremental steps

    void validate() const;
};

// Set-pooled gait recognizer. Every frame of a window runs through a
// two-layer MLP encoder, the frame embeddings are pooled with an
// elementwise max (ties resolve to the lowest frame index, also in the
// gradient), and the pooled signature feeds an affine classifier. The
// signature is the representation distances and class means operate on.
class GaitModel {
public:
    GaitModel(const ModelConfig& config, uint64_t seed);

    const ModelConfig& config() const { return config_; }
    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }

    // Everything backward() needs, plus the signatures and logits callers
    // want. B = batch size, T = frames per window.
    struct Forward {
        size_t batch = 0;
        size_t frames = 0;
        Tensor2 input;       // (B*T) x D, stacked windows
        Tensor2 pre1, act1;  // (B*T) x H
        Tensor2 pre2, act2;  // (B*T) x E
        Tensor2 signatures;  // B x E, max over each window's frames
        std::vector<size_t> argmax;  // B*E winning frame index per pooled value
        Tensor2 logits;      // B x C
    };

    Forward forward(const std::vector<const GaitSample*>& batch) const;

    // Accumulates d(loss)/d(params) into the gradient buffers given
    // d(loss)/d(logits). The max pool routes each pooled gradient to the
    // single winning frame.
    void backward(const Forward& fwd, const Tensor2& dlogits);

    // Pooled embedding of one window, 1 x E.
    Tensor2 signature(const GaitSample& sample) const;

private:
    ModelConfig config_;
    ParamSet params_;
};

// Frozen deep copy of a model, used as the distillation teacher. Only
// exposes const inference, so training the live model cannot disturb it.
class ModelSnapshot {
public:
    explicit ModelSnapshot(const GaitModel& model);

    const ModelConfig& config() const { return model_.config(); }
    Tensor2 logits(const std::vector<const GaitSample*>& batch) const;
    Tensor2 signatures(const std::vector<const GaitSample*>& batch) const;

private:
    GaitModel model_;
};

// Binary model checkpoints, magic "ILGM". Layout in docs/formats.md.
void save_model(const GaitModel& model, const std::filesystem::path& path);
GaitModel load_model(const std::filesystem::path& path);

}  // namespace ilgaco
