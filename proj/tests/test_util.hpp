#pragma once

// Helpers shared by the test suites. Header-only; include after doctest.h.

#include <cstdint>
#include <string>

#include "ilgaco/dataset.hpp"
#include "ilgaco/error.hpp"

namespace test_util {

// Runs fn, expecting it to throw ilgaco::Error; returns the kind it threw
// with, or a sentinel when nothing (or something else) was thrown.
inline constexpr auto kNoThrow = static_cast<ilgaco::ErrorKind>(255);

template <typename Fn>
ilgaco::ErrorKind thrown_kind(Fn&& fn) {
    try {
        fn();
    } catch (const ilgaco::Error& e) {
        return e.kind();
    } catch (...) {
        return static_cast<ilgaco::ErrorKind>(254);
    }
    return kNoThrow;
}

inline ilgaco::CovariateFactor viewpoint(uint32_t id, double angle_deg) {
    ilgaco::CovariateFactor f;
    f.id = id;
    f.kind = ilgaco::FactorKind::Viewpoint;
    f.angle_deg = angle_deg;
    return f;
}

inline ilgaco::CovariateFactor condition(uint32_t id, std::string label) {
    ilgaco::CovariateFactor f;
    f.id = id;
    f.kind = ilgaco::FactorKind::Condition;
    f.label = std::move(label);
    return f;
}

// Small, fast dataset spec: 4 subjects, 2 viewpoints + 1 condition,
// 56-frame sequences (3 windows at the default 28/0.6 windowing),
// 2 train + 1 test sequences per cell.
inline ilgaco::DatasetSpec tiny_spec(uint64_t seed = 7) {
    ilgaco::DatasetSpec spec;
    spec.num_subjects = 4;
    spec.factors = {viewpoint(0, 0.0), viewpoint(1, 90.0), condition(2, "bg")};
    spec.frames_per_sequence = 56;
    spec.frame_dim = 8;
    spec.train_sequences = 2;
    spec.test_sequences = 1;
    spec.noise_std = 0.05;
    spec.seed = seed;
    return spec;
}

}  // namespace test_util
