#include "ilgaco/memory.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "binio.hpp"
#include "ilgaco/error.hpp"

namespace ilgaco {

uint64_t quota(uint64_t capacity, uint64_t factors, uint64_t classes) {
    if (factors == 0 || classes == 0) {
        throw_validation("quota: factor and class counts must be >= 1");
    }
    const uint64_t q = capacity / (factors * classes);
    if (q == 0) {
        warn("memory capacity " + std::to_string(capacity) + " is below one sample per (factor, class) cell (" +
             std::to_string(factors) + " x " + std::to_string(classes) + "); cells will be empty");
    }
    return q;
}

HerdingRanking herding_select(const Tensor2& signatures, size_t k) {
    const size_t n = signatures.rows;
    if (n == 0 && k > 0) {
        throw_validation("herding_select: empty population");
    }
    if (k > n) {
        throw_validation("herding_select: k = " + std::to_string(k) + " exceeds population " + std::to_string(n));
    }
    const size_t e = signatures.cols;

    HerdingRanking ranking;
    std::vector<bool> selected(n, false);
    std::vector<double> mean(e);
    for (size_t pick = 0; pick < k; ++pick) {
        // mean of the signatures not yet selected
        std::fill(mean.begin(), mean.end(), 0.0);
        size_t remaining = 0;
        for (size_t i = 0; i < n; ++i) {
            if (selected[i]) continue;
            ++remaining;
            const double* row = signatures.row(i);
            for (size_t j = 0; j < e; ++j) mean[j] += row[j];
        }
        for (size_t j = 0; j < e; ++j) mean[j] /= static_cast<double>(remaining);

        double best = std::numeric_limits<double>::infinity();
        size_t best_i = n;
        for (size_t i = 0; i < n; ++i) {
            if (selected[i]) continue;
            const double* row = signatures.row(i);
            double d2 = 0.0;
            for (size_t j = 0; j < e; ++j) {
                const double diff = row[j] - mean[j];
                d2 += diff * diff;
            }
            if (d2 < best) {  // strict: ties keep the lowest index
                best = d2;
                best_i = i;
            }
        }
        selected[best_i] = true;
        ranking.order.push_back(best_i);
        ranking.distances.push_back(std::sqrt(best));
    }
    return ranking;
}

ExemplarMemory::ExemplarMemory(uint64_t capacity) : capacity_(capacity) {}

size_t ExemplarMemory::total_samples() const {
    size_t n = 0;
    for (const auto& cell : cells_) n += cell.samples.size();
    return n;
}

void ExemplarMemory::update(const std::vector<GaitSample>& new_factor_samples, const GaitModel& model) {
    if (new_factor_samples.empty()) {
        throw_validation("memory update: no samples for the new factor");
    }
    const uint32_t factor = new_factor_samples.front().factor;
    for (const auto& s : new_factor_samples) {
        if (s.factor != factor) {
            throw_validation("memory update: samples mix factors " + std::to_string(factor) + " and " +
                             std::to_string(s.factor));
        }
    }
    if (std::find(factors_.begin(), factors_.end(), factor) != factors_.end()) {
        throw_usage("memory update: factor " + std::to_string(factor) + " already stored");
    }
    const uint32_t classes = model.config().num_classes;

    // Group the new samples by class, preserving input order within each.
    std::vector<std::vector<const GaitSample*>> by_class(classes);
    for (const auto& s : new_factor_samples) {
        if (s.subject >= classes) {
            throw_validation("memory update: subject " + std::to_string(s.subject) + " out of range for " +
                             std::to_string(classes) + " classes");
        }
        by_class[s.subject].push_back(&s);
    }
    for (uint32_t c = 0; c < classes; ++c) {
        if (by_class[c].empty()) {
            throw_validation("memory update: class " + std::to_string(c) + " has no samples for factor " +
                             std::to_string(factor));
        }
    }

    const uint64_t q = quota(capacity_, factors_.size() + 1, classes);

    // Old factors give up their herding-rank tails first.
    for (auto& cell : cells_) {
        if (cell.samples.size() > q) cell.samples.resize(q);
    }

    for (uint32_t c = 0; c < classes; ++c) {
        const auto& members = by_class[c];
        Tensor2 sigs = model.forward(std::vector<const GaitSample*>(members.begin(), members.end())).signatures;
        const size_t take = std::min<size_t>(q, members.size());
        const HerdingRanking ranking = herding_select(sigs, take);
        MemoryCell cell;
        cell.factor = factor;
        cell.cls = c;
        for (size_t idx : ranking.order) cell.samples.push_back(*members[idx]);
        cells_.push_back(std::move(cell));
    }
    factors_.push_back(factor);
}

void ExemplarMemory::restore(std::vector<uint32_t> factors, std::vector<MemoryCell> cells) {
    factors_ = std::move(factors);
    cells_ = std::move(cells);
}

std::vector<PoolSample> training_pool(const ExemplarMemory& memory,
                                      const std::vector<GaitSample>& new_samples) {
    std::vector<PoolSample> pool;
    pool.reserve(memory.total_samples() + new_samples.size());
    for (const auto& cell : memory.cells()) {
        for (const auto& s : cell.samples) pool.push_back({&s, true});
    }
    for (const auto& s : new_samples) pool.push_back({&s, false});
    return pool;
}

// ---------------------------------------------------------------------------
// Checkpoints (magic "ILGE", version 1)
// ---------------------------------------------------------------------------

namespace {

using binio::put_f64;
using binio::put_u32;
using binio::put_u64;

}  // namespace

void save_memory(const ExemplarMemory& memory, const std::filesystem::path& path) {
    std::string out;
    out += "ILGE";
    put_u32(out, 1);  // version
    put_u64(out, memory.capacity());
    put_u32(out, static_cast<uint32_t>(memory.factors().size()));
    for (uint32_t f : memory.factors()) put_u32(out, f);
    put_u32(out, static_cast<uint32_t>(memory.cells().size()));
    for (const auto& cell : memory.cells()) {
        put_u32(out, cell.factor);
        put_u32(out, cell.cls);
        put_u32(out, static_cast<uint32_t>(cell.samples.size()));
        for (const auto& s : cell.samples) {
            put_u32(out, s.subject);
            put_u32(out, s.factor);
            put_u32(out, s.source_sequence);
            put_u32(out, s.window_start);
            put_u32(out, static_cast<uint32_t>(s.window.rows));
            put_u32(out, static_cast<uint32_t>(s.window.cols));
            for (double v : s.window.data) put_f64(out, v);
        }
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

ExemplarMemory load_memory(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw_validation("cannot open memory file: " + path.string());
    }
    std::string buf((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    binio::Cursor cur{buf, "memory " + path.string()};

    if (cur.bytes(4, "magic") != "ILGE") {
        throw_format("bad magic in " + path.string() + ": expected ILGE");
    }
    const uint32_t version = cur.u32("version");
    if (version != 1) {
        throw_format("unsupported memory format version " + std::to_string(version));
    }

    const uint64_t capacity = cur.u64("capacity");
    ExemplarMemory memory(capacity);

    const uint32_t num_factors = cur.u32("factor count");
    std::vector<uint32_t> factors(num_factors);
    for (auto& f : factors) f = cur.u32("factor id");

    const uint32_t num_cells = cur.u32("cell count");
    std::vector<MemoryCell> cells(num_cells);
    uint64_t total = 0;
    for (auto& cell : cells) {
        cell.factor = cur.u32("cell factor");
        cell.cls = cur.u32("cell class");
        const uint32_t count = cur.u32("cell sample count");
        total += count;
        cell.samples.resize(count);
        for (auto& s : cell.samples) {
            s.subject = cur.u32("sample subject");
            s.factor = cur.u32("sample factor");
            s.source_sequence = cur.u32("sample sequence");
            s.window_start = cur.u32("sample window start");
            const uint32_t rows = cur.u32("window rows");
            const uint32_t cols = cur.u32("window cols");
            s.window = Tensor2(rows, cols);
            for (auto& v : s.window.data) v = cur.f64("window data");
        }
    }
    if (cur.pos != buf.size()) {
        throw_format("trailing bytes in memory file at offset " + std::to_string(cur.pos));
    }
    if (total > capacity) {
        throw_format("memory file stores " + std::to_string(total) + " samples over capacity " +
                     std::to_string(capacity));
    }
    memory.restore(std::move(factors), std::move(cells));
    return memory;
}

}  // namespace ilgaco
