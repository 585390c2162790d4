#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace smj {

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime(uint64_t n);

/// Smallest prime >= m. Throws std::overflow_error if none fits in 64 bits.
uint64_t next_prime(uint64_t m);

/// (a * b) mod q with a full 128-bit intermediate product.
inline uint64_t mulmod(uint64_t a, uint64_t b, uint64_t q) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % q);
}

/// Inverse of a modulo the prime q, by extended Euclid. a must be nonzero mod q.
uint64_t mod_inverse(uint64_t a, uint64_t q);

/// Per-level affine hash family over path prefixes:
///
///     h_i(r_1..r_i) = sum_j a_j r_j + b_i  (mod q)
///
/// Each level draws a fresh nonzero multiplier a_i and offset b_i from the
/// seed, so each h_i is 2-independent and the family is reproducible.
/// Prefix evaluation carries the running sum of a_j r_j, making each child
/// hash O(1): h_i(r o x) = prefix_sum(r) + b_i + a_i x.
class HashFamily {
public:
    /// Levels are 1-based; level i uses coefficients()[i-1].
    HashFamily(uint64_t seed, uint64_t prime, uint32_t levels);

    struct Level {
        uint64_t a;  // in [1, q-1]
        uint64_t b;  // in [0, q-1]
    };

    uint64_t prime() const { return q_; }
    uint64_t seed() const { return seed_; }
    uint32_t levels() const { return static_cast<uint32_t>(levels_.size()); }
    const Level& level(uint32_t i) const;  // 1-based

    /// sum_{j<=i} a_j r_j mod q, the reusable part of every level-i hash.
    uint64_t prefix_sum(std::span<const uint32_t> prefix) const;

    /// Full evaluation of h_i on a length-i prefix.
    /// Throws std::invalid_argument when i == 0 or i > levels or length mismatch.
    uint64_t hash_prefix(uint32_t i, std::span<const uint32_t> prefix) const;

private:
    uint64_t seed_;
    uint64_t q_;
    std::vector<Level> levels_;
};

/// Residues a*x mod q of a set, sorted, with the originating elements aligned
/// index-by-index. Immutable after construction.
class SortedMemberTable {
public:
    SortedMemberTable(std::span<const uint32_t> members, uint64_t a, uint64_t q);

    uint64_t coefficient() const { return a_; }
    uint64_t prime() const { return q_; }
    size_t size() const { return residues_.size(); }

    const std::vector<uint64_t>& residues() const { return residues_; }
    const std::vector<uint32_t>& companions() const { return companions_; }

private:
    uint64_t a_, q_;
    std::vector<uint64_t> residues_;
    std::vector<uint32_t> companions_;
};

/// { x in X : (eta + a*x) mod q < delta }, via one predecessor search on the
/// sorted residues plus a wrap-around scan. Time O(log|X| + output).
std::vector<uint32_t> sample_members(uint64_t eta, uint64_t a, uint64_t delta,
                                     const SortedMemberTable& table);

/// { x in [q] : (eta + a*x) mod q < delta } = { a^{-1}(v - eta) mod q : v in [delta] },
/// computed with one modular inverse in time O(delta).
std::vector<uint32_t> sample_universe(uint64_t eta, uint64_t a, uint64_t delta, uint64_t q);

}  // namespace smj
