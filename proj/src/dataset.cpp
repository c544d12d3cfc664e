#include "ilgaco/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "binio.hpp"
#include "ilgaco/error.hpp"

namespace ilgaco {

namespace {

constexpr double kPi = 3.14159265358979323846;

// stream tags for derive_seed
enum : uint64_t {
    kTagSubject = 1,
    kTagGait = 2,
    kTagViewFamily = 3,
    kTagConditionMap = 4,
    kTagSequence = 5,
};

constexpr double kLatentScale = 1.0;
constexpr double kGaitAmpLo = 0.15;
constexpr double kGaitAmpHi = 0.55;
constexpr double kViewpointOffsetScale = 0.35;
constexpr double kConditionOffsetScale = 0.8;

}  // namespace

std::string CovariateFactor::display_name() const {
    if (kind == FactorKind::Viewpoint) {
        const int a = static_cast<int>(std::lround(angle_deg));
        char buf[8];
        std::snprintf(buf, sizeof buf, "%03d", a);
        return buf;
    }
    return label;
}

DatasetSpec DatasetSpec::defaults() {
    DatasetSpec spec;
    uint32_t id = 0;
    for (double angle : {0.0, 45.0, 90.0, 135.0, 180.0}) {
        spec.factors.push_back({id++, FactorKind::Viewpoint, angle, ""});
    }
    for (const char* label : {"nm", "bg", "cl"}) {
        spec.factors.push_back({id++, FactorKind::Condition, 0.0, label});
    }
    return spec;
}

void DatasetSpec::validate() const {
    std::vector<std::string> bad;
    if (num_subjects < 2) bad.push_back("num_subjects must be >= 2");
    if (frame_dim < 4) bad.push_back("frame_dim must be >= 4");
    if (frames_per_sequence < kWindowLen) bad.push_back("frames_per_sequence must be >= window length");
    if (train_sequences < 1) bad.push_back("train_sequences must be >= 1");
    if (test_sequences < 1) bad.push_back("test_sequences must be >= 1");
    if (factors.empty()) bad.push_back("at least one factor is required");
    if (!(noise_std >= 0.0)) bad.push_back("noise_std must be >= 0");
    std::set<uint32_t> ids;
    for (const auto& f : factors) {
        if (!ids.insert(f.id).second) bad.push_back("duplicate factor id " + std::to_string(f.id));
        if (f.kind == FactorKind::Viewpoint && (f.angle_deg < 0.0 || f.angle_deg > 180.0)) {
            bad.push_back("viewpoint angle out of [0, 180] for factor " + std::to_string(f.id));
        }
    }
    if (!bad.empty()) {
        std::string msg = "invalid dataset spec:";
        for (const auto& b : bad) msg += " " + b + ";";
        throw_validation(msg);
    }
}

std::vector<uint32_t> DatasetSpec::factor_ids(FactorKind kind) const {
    std::vector<uint32_t> out;
    for (const auto& f : factors) {
        if (f.kind == kind) out.push_back(f.id);
    }
    return out;
}

const CovariateFactor& DatasetSpec::factor(uint32_t id) const {
    for (const auto& f : factors) {
        if (f.id == id) return f;
    }
    throw_validation("unknown factor id " + std::to_string(id));
}

std::vector<const FrameSequence*> Dataset::train_of(uint32_t factor) const {
    std::vector<const FrameSequence*> out;
    for (const auto& s : sequences) {
        if (s.factor == factor && !s.is_test) out.push_back(&s);
    }
    return out;
}

std::vector<const FrameSequence*> Dataset::test_of(uint32_t factor) const {
    std::vector<const FrameSequence*> out;
    for (const auto& s : sequences) {
        if (s.factor == factor && s.is_test) out.push_back(&s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

GeneratorModel::GeneratorModel(const DatasetSpec& spec) : spec_(spec) {
    spec.validate();
    const size_t d = spec.frame_dim;

    for (uint32_t s = 0; s < spec.num_subjects; ++s) {
        Rng rng(derive_seed(spec.seed, kTagSubject, s));
        std::vector<double> u(d);
        for (auto& v : u) v = kLatentScale * rng.normal();
        subject_latent_.push_back(std::move(u));

        Rng grng(derive_seed(spec.seed, kTagGait, s));
        std::vector<double> amp(d), phase(d);
        for (size_t i = 0; i < d; ++i) {
            amp[i] = grng.uniform(kGaitAmpLo, kGaitAmpHi);
            phase[i] = grng.uniform(0.0, 2.0 * kPi);
        }
        gait_amp_.push_back(std::move(amp));
        gait_phase_.push_back(std::move(phase));
    }

    // Viewpoint offsets share two direction vectors so that b_f moves
    // smoothly with the camera angle.
    Rng family(derive_seed(spec.seed, kTagViewFamily, 0));
    std::vector<double> dir1(d), dir2(d);
    for (size_t i = 0; i < d; ++i) dir1[i] = family.normal();
    for (size_t i = 0; i < d; ++i) dir2[i] = family.normal();

    for (const auto& f : spec.factors) {
        Tensor2 map(d, d, 0.0);
        std::vector<double> offset(d, 0.0);
        if (f.kind == FactorKind::Viewpoint) {
            // Paired-coordinate rotations whose rate grows with the pair
            // index, so distant cameras decorrelate more than near ones.
            const double theta = f.angle_deg * kPi / 180.0;
            const size_t pairs = d / 2;
            for (size_t p = 0; p < pairs; ++p) {
                const double freq =
                    0.5 + (pairs > 1 ? 1.5 * static_cast<double>(p) / static_cast<double>(pairs - 1) : 0.0);
                const double c = std::cos(theta * freq);
                const double s = std::sin(theta * freq);
                map.at(2 * p, 2 * p) = c;
                map.at(2 * p, 2 * p + 1) = -s;
                map.at(2 * p + 1, 2 * p) = s;
                map.at(2 * p + 1, 2 * p + 1) = c;
            }
            if (d % 2 == 1) map.at(d - 1, d - 1) = 1.0;
            for (size_t i = 0; i < d; ++i) {
                offset[i] = kViewpointOffsetScale *
                            (std::sin(theta) * dir1[i] + (f.angle_deg / 180.0) * dir2[i]);
            }
        } else {
            // Independent mixing: a product of random Givens rotations plus
            // a larger offset.
            Rng rng(derive_seed(spec.seed, kTagConditionMap, f.id));
            for (size_t i = 0; i < d; ++i) map.at(i, i) = 1.0;
            const size_t rotations = 2 * d;
            for (size_t r = 0; r < rotations; ++r) {
                const size_t a = rng.index(d);
                size_t b = rng.index(d - 1);
                if (b >= a) ++b;
                const double alpha = rng.uniform(0.0, 2.0 * kPi);
                const double c = std::cos(alpha);
                const double s = std::sin(alpha);
                for (size_t j = 0; j < d; ++j) {
                    const double ra = map.at(a, j);
                    const double rb = map.at(b, j);
                    map.at(a, j) = c * ra - s * rb;
                    map.at(b, j) = s * ra + c * rb;
                }
            }
            for (size_t i = 0; i < d; ++i) {
                offset[i] = kConditionOffsetScale * rng.normal();
            }
        }
        factor_map_.push_back(std::move(map));
        factor_offset_.push_back(std::move(offset));
    }
}

Tensor2 GeneratorModel::render(uint32_t subject, uint32_t factor, double phase_offset,
                               uint32_t frame_count, Rng* noise_rng) const {
    if (subject >= spec_.num_subjects) {
        throw_validation("render: subject " + std::to_string(subject) + " out of range");
    }
    size_t fidx = spec_.factors.size();
    for (size_t i = 0; i < spec_.factors.size(); ++i) {
        if (spec_.factors[i].id == factor) fidx = i;
    }
    if (fidx == spec_.factors.size()) {
        throw_validation("render: unknown factor id " + std::to_string(factor));
    }

    const size_t d = spec_.frame_dim;
    const auto& u = subject_latent_[subject];
    const auto& amp = gait_amp_[subject];
    const auto& phi = gait_phase_[subject];
    const auto& map = factor_map_[fidx];
    const auto& offset = factor_offset_[fidx];

    // A_f * u_s is frame-independent
    std::vector<double> mapped(d, 0.0);
    for (size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (size_t j = 0; j < d; ++j) acc += map.at(i, j) * u[j];
        mapped[i] = acc;
    }

    Tensor2 frames(frame_count, d);
    for (uint32_t t = 0; t < frame_count; ++t) {
        const double phase = phase_offset + static_cast<double>(t);
        double* row = frames.row(t);
        for (size_t i = 0; i < d; ++i) {
            const double gait = amp[i] * std::sin(2.0 * kPi * phase / kWindowLen + phi[i]);
            double v = mapped[i] + offset[i] + gait;
            if (noise_rng != nullptr && spec_.noise_std > 0.0) {
                v += spec_.noise_std * noise_rng->normal();
            }
            row[i] = v;
        }
    }
    return frames;
}

Dataset generate_dataset(const DatasetSpec& spec) {
    spec.validate();
    const GeneratorModel model(spec);

    Dataset ds;
    ds.spec = spec;
    uint32_t seq_id = 0;
    for (uint32_t s = 0; s < spec.num_subjects; ++s) {
        for (const auto& f : spec.factors) {
            const uint32_t total = spec.train_sequences + spec.test_sequences;
            for (uint32_t r = 0; r < total; ++r) {
                Rng rng(derive_seed(spec.seed, kTagSequence, seq_id));
                const double phase = rng.uniform(0.0, static_cast<double>(kWindowLen));
                FrameSequence seq;
                seq.subject = s;
                seq.factor = f.id;
                seq.sequence_id = seq_id;
                seq.is_test = r >= spec.train_sequences;
                seq.frames = model.render(s, f.id, phase, spec.frames_per_sequence, &rng);
                ds.sequences.push_back(std::move(seq));
                ++seq_id;
            }
        }
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Windowing and splits
// ---------------------------------------------------------------------------

std::vector<GaitSample> window_sequence(const FrameSequence& seq, uint32_t win_len, double overlap) {
    if (win_len < 1) {
        throw_validation("window_sequence: win_len must be >= 1");
    }
    if (!(overlap >= 0.0) || overlap >= 1.0) {
        throw_validation("window_sequence: overlap must be in [0, 1)");
    }
    std::vector<GaitSample> out;
    const size_t len = seq.frames.rows;
    if (len < win_len) {
        return out;  // caller decides whether to skip the sequence
    }
    const auto stride = static_cast<size_t>(
        std::max<long>(1, std::lround((1.0 - overlap) * static_cast<double>(win_len))));
    for (size_t start = 0; start + win_len <= len; start += stride) {
        GaitSample s;
        s.subject = seq.subject;
        s.factor = seq.factor;
        s.source_sequence = seq.sequence_id;
        s.window_start = static_cast<uint32_t>(start);
        s.window = Tensor2(win_len, seq.frames.cols);
        std::copy(seq.frames.row(start), seq.frames.row(start) + win_len * seq.frames.cols,
                  s.window.data.begin());
        out.push_back(std::move(s));
    }
    return out;
}

SplitPlan incremental_splits(const Dataset& dataset, const std::vector<uint32_t>& factor_order,
                             uint32_t win_len, double overlap) {
    std::set<uint32_t> known;
    for (const auto& f : dataset.spec.factors) known.insert(f.id);
    std::set<uint32_t> seen;
    for (uint32_t id : factor_order) {
        if (known.count(id) == 0) {
            throw_validation("incremental_splits: unknown factor id " + std::to_string(id));
        }
        if (!seen.insert(id).second) {
            throw_validation("incremental_splits: factor id " + std::to_string(id) + " repeated in order");
        }
    }
    if (factor_order.empty()) {
        throw_validation("incremental_splits: factor order is empty");
    }

    SplitPlan plan;
    plan.factor_order = factor_order;
    for (uint32_t id : factor_order) {
        std::vector<GaitSample> windows;
        for (const FrameSequence* seq : dataset.train_of(id)) {
            auto w = window_sequence(*seq, win_len, overlap);
            windows.insert(windows.end(), std::make_move_iterator(w.begin()),
                           std::make_move_iterator(w.end()));
        }
        plan.train_windows.push_back(std::move(windows));
    }
    for (const auto& f : dataset.spec.factors) {
        std::vector<TestVideo> videos;
        for (const FrameSequence* seq : dataset.test_of(f.id)) {
            TestVideo v;
            v.subject = seq->subject;
            v.factor = seq->factor;
            v.sequence_id = seq->sequence_id;
            v.windows = window_sequence(*seq, win_len, overlap);
            if (!v.windows.empty()) {
                videos.push_back(std::move(v));
            }
        }
        plan.test_videos.emplace(f.id, std::move(videos));
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Binary IO (little-endian, magic "ILGC", version 1)
// ---------------------------------------------------------------------------

using binio::put_f64;
using binio::put_u32;
using binio::put_u64;

std::string serialize_dataset(const Dataset& dataset) {
    std::string out;
    out += "ILGC";
    put_u32(out, 1);  // version
    put_u32(out, dataset.spec.num_subjects);
    put_u32(out, static_cast<uint32_t>(dataset.spec.factors.size()));
    for (const auto& f : dataset.spec.factors) {
        put_u32(out, f.id);
        put_u32(out, static_cast<uint32_t>(f.kind));
        put_f64(out, f.angle_deg);
        put_u32(out, static_cast<uint32_t>(f.label.size()));
        out += f.label;
    }
    put_u32(out, dataset.spec.frames_per_sequence);
    put_u32(out, dataset.spec.frame_dim);
    put_u32(out, dataset.spec.train_sequences);
    put_u32(out, dataset.spec.test_sequences);
    put_f64(out, dataset.spec.noise_std);
    put_u64(out, dataset.spec.seed);
    put_u32(out, static_cast<uint32_t>(dataset.sequences.size()));
    for (const auto& seq : dataset.sequences) {
        put_u32(out, seq.subject);
        put_u32(out, seq.factor);
        put_u32(out, static_cast<uint32_t>(seq.frames.rows));
        for (double v : seq.frames.data) put_f64(out, v);
    }
    return out;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    const std::string out = serialize_dataset(dataset);
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw_validation("cannot open for writing: " + path.string());
    }
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) {
        throw_validation("write failed: " + path.string());
    }
}

Dataset parse_dataset(const std::string& buf, const std::string& origin) {
    binio::Cursor cur{buf, "dataset " + origin};

    const std::string magic = cur.bytes(4, "magic");
    if (magic != "ILGC") {
        throw_format("bad magic in " + origin + ": expected ILGC");
    }
    const uint32_t version = cur.u32("version");
    if (version != 1) {
        throw_format("unsupported dataset format version " + std::to_string(version));
    }

    Dataset ds;
    ds.spec.num_subjects = cur.u32("num_subjects");
    const uint32_t num_factors = cur.u32("num_factors");
    for (uint32_t i = 0; i < num_factors; ++i) {
        CovariateFactor f;
        f.id = cur.u32("factor id");
        f.kind = static_cast<FactorKind>(cur.u32("factor kind"));
        if (f.kind != FactorKind::Viewpoint && f.kind != FactorKind::Condition) {
            throw_format("unknown factor kind in " + origin);
        }
        f.angle_deg = cur.f64("factor angle");
        const uint32_t label_len = cur.u32("label length");
        f.label = cur.bytes(label_len, "label");
        ds.spec.factors.push_back(std::move(f));
    }
    ds.spec.frames_per_sequence = cur.u32("frames_per_sequence");
    ds.spec.frame_dim = cur.u32("frame_dim");
    ds.spec.train_sequences = cur.u32("train_sequences");
    ds.spec.test_sequences = cur.u32("test_sequences");
    ds.spec.noise_std = cur.f64("noise_std");
    ds.spec.seed = cur.u64("seed");
    ds.spec.validate();

    const uint32_t num_sequences = cur.u32("sequence count");
    const uint32_t per_cell = ds.spec.train_sequences + ds.spec.test_sequences;
    const uint64_t expected =
        static_cast<uint64_t>(ds.spec.num_subjects) * ds.spec.factors.size() * per_cell;
    if (num_sequences != expected) {
        throw_format("sequence count " + std::to_string(num_sequences) + " does not match spec (expected " +
                     std::to_string(expected) + ")");
    }
    for (uint32_t i = 0; i < num_sequences; ++i) {
        FrameSequence seq;
        seq.subject = cur.u32("sequence subject");
        seq.factor = cur.u32("sequence factor");
        const uint32_t frame_count = cur.u32("frame count");
        seq.sequence_id = i;
        seq.is_test = (i % per_cell) >= ds.spec.train_sequences;
        seq.frames = Tensor2(frame_count, ds.spec.frame_dim);
        for (auto& v : seq.frames.data) {
            v = cur.f64("frame data");
        }
        ds.sequences.push_back(std::move(seq));
    }
    if (cur.pos != buf.size()) {
        throw_format("trailing bytes in dataset file at offset " + std::to_string(cur.pos));
    }
    return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw_validation("cannot open dataset file: " + path.string());
    }
    std::string buf((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    return parse_dataset(buf, path.string());
}

}  // namespace ilgaco
