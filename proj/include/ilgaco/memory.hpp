#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ilgaco/dataset.hpp"
#include "ilgaco/model.hpp"
#include "ilgaco/tensor.hpp"

namespace ilgaco {

// Per-(factor, class) sample budget: floor(N / (M * C)). Returns 0 with a
// capacity warning when N < M * C; throws Validation when M or C is zero.
uint64_t quota(uint64_t capacity, uint64_t factors, uint64_t classes);

// Greedy herding order over one cell's signatures: at each step the mean of
// the not-yet-selected signatures is recomputed and the unselected
// signature closest to it (ties to the lowest index) is appended.
struct HerdingRanking {
    std::vector<size_t> order;        // selected signature indices, best first
    std::vector<double> distances;    // distance to the running mean at selection
};

// signatures is population x E; k <= population.
HerdingRanking herding_select(const Tensor2& signatures, size_t k);

// One (factor, class) slot of the memory. Samples stay in herding order so
// truncation drops the least representative tail.
struct MemoryCell {
    uint32_t factor = 0;
    uint32_t cls = 0;
    std::vector<GaitSample> samples;
};

// Fixed-capacity exemplar store shared by all learned factors. Cells are
// kept balanced: every update re-derives the quota for the grown factor
// count, truncates old cells to it, and herds the new factor's samples
// into fresh cells. Stored exemplars are raw windows, so later steps can
// re-encode them with newer models.
class ExemplarMemory {
public:
    explicit ExemplarMemory(uint64_t capacity);

    uint64_t capacity() const { return capacity_; }
    size_t factor_count() const { return factors_.size(); }
    const std::vector<uint32_t>& factors() const { return factors_; }  // insertion order
    const std::vector<MemoryCell>& cells() const { return cells_; }
    size_t total_samples() const;

    // Adds a factor: truncates every existing cell to the new quota, then
    // herds quota exemplars per class from the new samples using the given
    // model's signatures. All samples must carry the same (new) factor id,
    // and every class must be represented.
    void update(const std::vector<GaitSample>& new_factor_samples, const GaitModel& model);

    // Replaces the full contents; only checkpoint loading uses this.
    void restore(std::vector<uint32_t> factors, std::vector<MemoryCell> cells);

private:
    uint64_t capacity_ = 0;
    std::vector<uint32_t> factors_;
    std::vector<MemoryCell> cells_;  // grouped by factor insertion order, class ascending
};

// A pooled training sample; `old` drives the distillation mask (memory
// exemplars distill, new-factor samples do not). Pointers alias the memory
// and the caller's vector, which must outlive the pool.
struct PoolSample {
    const GaitSample* sample = nullptr;
    bool old = false;
};

std::vector<PoolSample> training_pool(const ExemplarMemory& memory,
                                      const std::vector<GaitSample>& new_samples);

// Binary memory checkpoints, magic "ILGE". Layout in docs/formats.md.
void save_memory(const ExemplarMemory& memory, const std::filesystem::path& path);
ExemplarMemory load_memory(const std::filesystem::path& path);

}  // namespace ilgaco
