#include "ilgaco/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "binio.hpp"
#include "ilgaco/error.hpp"
#include "ilgaco/kernels.hpp"
#include "ilgaco/rng.hpp"

namespace ilgaco {

namespace {

enum : uint64_t { kTagModelInit = 11 };

Tensor2 uniform_init(size_t rows, size_t cols, size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor2 w(rows, cols);
    for (auto& v : w.data) v = rng.uniform(-bound, bound);
    return w;
}

}  // namespace

void ModelConfig::validate() const {
    std::vector<std::string> bad;
    if (frame_dim < 1) bad.push_back("frame_dim must be >= 1");
    if (hidden < 1) bad.push_back("hidden must be >= 1");
    if (embedding < 1) bad.push_back("embedding must be >= 1");
    if (num_classes < 2) bad.push_back("num_classes must be >= 2");
    if (!bad.empty()) {
        std::string msg = "invalid model config:";
        for (const auto& b : bad) msg += " " + b + ";";
        throw_validation(msg);
    }
}

GaitModel::GaitModel(const ModelConfig& config, uint64_t seed) : config_(config) {
    config.validate();
    const size_t d = config.frame_dim;
    const size_t h = config.hidden;
    const size_t e = config.embedding;
    const size_t c = config.num_classes;

    // One stream per layer so layer sizes never shift each other's draws.
    Rng r0(derive_seed(seed, kTagModelInit, 0));
    Rng r1(derive_seed(seed, kTagModelInit, 1));
    Rng r2(derive_seed(seed, kTagModelInit, 2));
    params_.add("enc1.w", uniform_init(d, h, d, r0));
    params_.add("enc1.b", Tensor2(1, h));
    params_.add("enc2.w", uniform_init(h, e, h, r1));
    params_.add("enc2.b", Tensor2(1, e));
    params_.add("cls.w", uniform_init(e, c, e, r2));
    params_.add("cls.b", Tensor2(1, c));
}

GaitModel::Forward GaitModel::forward(const std::vector<const GaitSample*>& batch) const {
    if (batch.empty()) {
        throw_usage("forward: empty batch");
    }
    const size_t t = batch.front()->window.rows;
    const size_t d = config_.frame_dim;
    for (const GaitSample* s : batch) {
        if (s == nullptr) throw_usage("forward: null sample in batch");
        if (s->window.cols != d) {
            throw_dimension("forward: window frame dim " + std::to_string(s->window.cols) +
                            " != model frame dim " + std::to_string(d));
        }
        if (s->window.rows != t) {
            throw_dimension("forward: windows in one batch must have equal frame counts");
        }
    }
    if (t == 0) {
        throw_dimension("forward: windows have no frames");
    }

    Forward fwd;
    fwd.batch = batch.size();
    fwd.frames = t;
    fwd.input = Tensor2(batch.size() * t, d);
    for (size_t b = 0; b < batch.size(); ++b) {
        std::memcpy(fwd.input.row(b * t), batch[b]->window.data.data(), t * d * sizeof(double));
    }

    const Param* w1 = params_.find("enc1.w");
    const Param* b1 = params_.find("enc1.b");
    const Param* w2 = params_.find("enc2.w");
    const Param* b2 = params_.find("enc2.b");
    const Param* wc = params_.find("cls.w");
    const Param* bc = params_.find("cls.b");

    fwd.pre1 = affine_forward(fwd.input, w1->value, b1->value);
    fwd.act1 = relu(fwd.pre1);
    fwd.pre2 = affine_forward(fwd.act1, w2->value, b2->value);
    fwd.act2 = relu(fwd.pre2);

    const size_t e = config_.embedding;
    fwd.signatures = Tensor2(fwd.batch, e);
    fwd.argmax.assign(fwd.batch * e, 0);
    for (size_t b = 0; b < fwd.batch; ++b) {
        for (size_t j = 0; j < e; ++j) {
            double best = fwd.act2.at(b * t, j);
            size_t best_t = 0;
            for (size_t f = 1; f < t; ++f) {
                const double v = fwd.act2.at(b * t + f, j);
                if (v > best) {  // ties keep the lowest frame index
                    best = v;
                    best_t = f;
                }
            }
            fwd.signatures.at(b, j) = best;
            fwd.argmax[b * e + j] = best_t;
        }
    }

    fwd.logits = affine_forward(fwd.signatures, wc->value, bc->value);
    return fwd;
}

void GaitModel::backward(const Forward& fwd, const Tensor2& dlogits) {
    if (dlogits.rows != fwd.batch || dlogits.cols != config_.num_classes) {
        throw_dimension("backward: dlogits must be batch x num_classes");
    }
    Param* w1 = params_.find("enc1.w");
    Param* b1 = params_.find("enc1.b");
    Param* w2 = params_.find("enc2.w");
    Param* b2 = params_.find("enc2.b");
    Param* wc = params_.find("cls.w");
    Param* bc = params_.find("cls.b");

    Tensor2 dsig;
    affine_backward(fwd.signatures, wc->value, dlogits, &dsig, wc->grad, bc->grad);

    // Un-pool: each signature coordinate came from exactly one frame.
    const size_t t = fwd.frames;
    const size_t e = config_.embedding;
    Tensor2 dact2(fwd.batch * t, e);
    for (size_t b = 0; b < fwd.batch; ++b) {
        for (size_t j = 0; j < e; ++j) {
            dact2.at(b * t + fwd.argmax[b * e + j], j) += dsig.at(b, j);
        }
    }

    Tensor2 dpre2 = relu_backward(fwd.pre2, dact2);
    Tensor2 dact1;
    affine_backward(fwd.act1, w2->value, dpre2, &dact1, w2->grad, b2->grad);
    Tensor2 dpre1 = relu_backward(fwd.pre1, dact1);
    affine_backward(fwd.input, w1->value, dpre1, nullptr, w1->grad, b1->grad);
}

Tensor2 GaitModel::signature(const GaitSample& sample) const {
    const std::vector<const GaitSample*> batch{&sample};
    Forward fwd = forward(batch);
    return fwd.signatures;
}

ModelSnapshot::ModelSnapshot(const GaitModel& model) : model_(model) {}

Tensor2 ModelSnapshot::logits(const std::vector<const GaitSample*>& batch) const {
    return model_.forward(batch).logits;
}

Tensor2 ModelSnapshot::signatures(const std::vector<const GaitSample*>& batch) const {
    return model_.forward(batch).signatures;
}

// ---------------------------------------------------------------------------
// Checkpoints (magic "ILGM", version 1)
// ---------------------------------------------------------------------------

namespace {

using binio::put_f64;
using binio::put_u32;

constexpr const char* kParamOrder[] = {"enc1.w", "enc1.b", "enc2.w", "enc2.b", "cls.w", "cls.b"};

}  // namespace

void save_model(const GaitModel& model, const std::filesystem::path& path) {
    std::string out;
    out += "ILGM";
    put_u32(out, 1);  // version
    put_u32(out, model.config().frame_dim);
    put_u32(out, model.config().hidden);
    put_u32(out, model.config().embedding);
    put_u32(out, model.config().num_classes);
    for (const char* name : kParamOrder) {
        const Param* p = model.params().find(name);
        put_u32(out, static_cast<uint32_t>(p->value.rows));
        put_u32(out, static_cast<uint32_t>(p->value.cols));
        for (double v : p->value.data) put_f64(out, v);
    }

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw_validation("cannot open for writing: " + path.string());
    }
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) {
        throw_validation("write failed: " + path.string());
    }
}

GaitModel load_model(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw_validation("cannot open model file: " + path.string());
    }
    std::string buf((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    binio::Cursor cur{buf, "model " + path.string()};

    if (cur.bytes(4, "magic") != "ILGM") {
        throw_format("bad magic in " + path.string() + ": expected ILGM");
    }
    const uint32_t version = cur.u32("version");
    if (version != 1) {
        throw_format("unsupported model format version " + std::to_string(version));
    }
    ModelConfig config;
    config.frame_dim = cur.u32("frame_dim");
    config.hidden = cur.u32("hidden");
    config.embedding = cur.u32("embedding");
    config.num_classes = cur.u32("num_classes");
    config.validate();

    GaitModel model(config, 0);
    for (const char* name : kParamOrder) {
        Param* p = model.params().find(name);
        const uint32_t rows = cur.u32("param rows");
        const uint32_t cols = cur.u32("param cols");
        if (rows != p->value.rows || cols != p->value.cols) {
            throw_format(std::string("parameter ") + name + " has shape " + std::to_string(rows) +
                         "x" + std::to_string(cols) + ", expected " + std::to_string(p->value.rows) +
                         "x" + std::to_string(p->value.cols));
        }
        for (auto& v : p->value.data) v = cur.f64("param data");
    }
    if (cur.pos != buf.size()) {
        throw_format("trailing bytes in model file at offset " + std::to_string(cur.pos));
    }
    return model;
}

}  // namespace ilgaco
