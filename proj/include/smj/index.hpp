#pragma once

#include "smj/tree.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace smj {

using Dataset = std::vector<std::vector<uint32_t>>;

struct QueryReport {
    std::optional<uint32_t> matched;   ///< first point passing the overlap test
    uint64_t candidates_examined = 0;  ///< bucket entries scanned (duplicates included)
    uint64_t verified_comparisons = 0; ///< overlap tests performed (one per distinct candidate)
    uint64_t paths_decoded = 0;        ///< leaf paths across repetitions and halves
    double wall_seconds = 0;
};

struct QueryOptions {
    /// Overlap count a candidate must exceed; defaults to w_2 * q.
    std::optional<double> overlap_threshold;
    /// Estimate overlaps from a sample instead of a full sorted intersection.
    bool sampled_verification = false;
    uint64_t verification_seed = 0;
};

struct BuildStats {
    uint64_t stored_entries = 0;
    uint64_t max_pairs_per_point = 0;
    uint32_t capacity_warnings = 0;  ///< points whose key-pair count exceeded the ceiling
};

/// Static supermajority filter index: per repetition, a sorted table from
/// 128-bit path-pair fingerprints to point ids. Immutable after build; safe
/// for concurrent queries.
class FilterIndex {
public:
    /// Decodes both tensored halves of every point at t_u and stores the id
    /// under every cross-product key pair. Parallelizes over (repetition x point).
    static FilterIndex build(const TreeConfig& config, std::shared_ptr<const Dataset> dataset,
                             uint64_t pairs_per_point_ceiling = uint64_t{1} << 20);

    QueryReport query(const std::vector<uint32_t>& x, const QueryOptions& options = {}) const;

    const TreeConfig& config() const { return config_; }
    const BuildStats& stats() const { return stats_; }
    const Dataset& dataset() const { return *dataset_; }

    /// Versioned binary container (magic "SMJ1"); fixed-width little-endian.
    void write(std::ostream& out) const;
    static FilterIndex read(std::istream& in, std::shared_ptr<const Dataset> dataset);

    /// Fingerprint of the serialized byte stream; equal seeds and datasets
    /// produce equal fingerprints on every platform.
    uint64_t fingerprint() const;

private:
    FilterIndex() = default;

    struct Entry {
        uint64_t hi, lo;
        uint32_t id;
        friend bool operator<(const Entry& a, const Entry& b) {
            if (a.hi != b.hi) return a.hi < b.hi;
            if (a.lo != b.lo) return a.lo < b.lo;
            return a.id < b.id;
        }
    };

    TreeConfig config_;
    std::vector<std::vector<Entry>> reps_;  // sorted per repetition
    std::shared_ptr<const Dataset> dataset_;
    BuildStats stats_;
};

}  // namespace smj
