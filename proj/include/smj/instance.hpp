#pragma once

#include "smj/divergence.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace smj {

/// A planted GapSS instance. Densities are declared with respect to the
/// padded prime universe q; elements themselves stay inside [0, d).
struct Instance {
    uint32_t d = 0;       ///< raw universe size
    uint64_t q = 0;       ///< next_prime(d); padded elements never occur in sets
    GapParams params{0, 0, 0, 0};
    std::vector<std::vector<uint32_t>> dataset;  ///< sorted sets of weight round(w_u*q)
    std::vector<std::vector<uint32_t>> queries;  ///< sorted sets of weight round(w_q*q)
    std::vector<std::pair<uint64_t, uint64_t>> planted;  ///< (query index, dataset index)
};

/// Exact-weight planted-instance generator. Every point is a uniform
/// round(w_u*q)-subset of [0,d); each planted pair shares exactly
/// round(w_1*q) elements; non-planted (query, point) overlaps above the
/// concentration ceiling w_2*q*(1 + 5*sqrt(ln n/(w_2 q))) are resampled.
/// Throws std::invalid_argument unless w_2*d >= 20 ln n.
Instance generate(uint64_t n, uint32_t d, const GapParams& params, uint64_t n_queries,
                  uint64_t seed, uint64_t n_planted);

inline Instance generate(uint64_t n, uint32_t d, const GapParams& params, uint64_t n_queries,
                         uint64_t seed) {
    return generate(n, d, params, n_queries, seed, n_queries);
}

/// Binary "GSS1" container; fixed-width little-endian. Round trips exactly.
void write_instance(const Instance& inst, std::ostream& out);
void write_instance(const Instance& inst, const std::filesystem::path& path);
Instance read_instance(std::istream& in);
Instance read_instance(const std::filesystem::path& path);

/// Line-oriented export: one set per line, space-separated element ids,
/// dataset first and queries after a separating "%" line.
void write_text(const Instance& inst, std::ostream& out);
void write_text(const Instance& inst, const std::filesystem::path& path);

/// Content hash of the serialized instance.
uint64_t instance_fingerprint(const Instance& inst);

}  // namespace smj
