#include "smj/hashing.hpp"

#include "smj/rng.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace smj {

namespace {

uint64_t powmod(uint64_t base, uint64_t exp, uint64_t mod) {
    uint64_t r = 1;
    base %= mod;
    while (exp > 0) {
        if (exp & 1) r = mulmod(r, base, mod);
        base = mulmod(base, base, mod);
        exp >>= 1;
    }
    return r;
}

bool miller_rabin(uint64_t n, uint64_t a) {
    if (a % n == 0) return true;
    uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) return true;
    for (int i = 1; i < s; ++i) {
        x = mulmod(x, x, n);
        if (x == n - 1) return true;
    }
    return false;
}

}  // namespace

bool is_prime(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    // This witness set decides primality for every n < 2^64.
    for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (!miller_rabin(n, a)) return false;
    }
    return true;
}

uint64_t next_prime(uint64_t m) {
    if (m < 2) throw std::invalid_argument("next_prime: m must be >= 2");
    for (uint64_t n = m;; ++n) {
        if (is_prime(n)) return n;
        if (n == UINT64_MAX) break;
    }
    throw std::overflow_error("next_prime: no 64-bit prime >= m");
}

uint64_t mod_inverse(uint64_t a, uint64_t q) {
    a %= q;
    if (a == 0) throw std::invalid_argument("mod_inverse: a is 0 mod q");
    // Extended Euclid on (a, q); q prime guarantees gcd 1.
    int64_t t = 0, new_t = 1;
    int64_t r = static_cast<int64_t>(q), new_r = static_cast<int64_t>(a);
    while (new_r != 0) {
        int64_t quot = r / new_r;
        t -= quot * new_t;
        std::swap(t, new_t);
        r -= quot * new_r;
        std::swap(r, new_r);
    }
    if (t < 0) t += static_cast<int64_t>(q);
    return static_cast<uint64_t>(t);
}

HashFamily::HashFamily(uint64_t seed, uint64_t prime, uint32_t levels)
    : seed_(seed), q_(prime) {
    if (prime < 2) throw std::invalid_argument("HashFamily: prime must be >= 2");
    levels_.reserve(levels);
    for (uint32_t i = 1; i <= levels; ++i) {
        Rng rng(derive(seed, i));
        Level lvl;
        lvl.a = 1 + rng.below(q_ - 1);
        lvl.b = rng.below(q_);
        levels_.push_back(lvl);
    }
}

const HashFamily::Level& HashFamily::level(uint32_t i) const {
    if (i == 0 || i > levels_.size()) {
        throw std::invalid_argument("HashFamily: levels are 1-based and bounded by the depth");
    }
    return levels_[i - 1];
}

uint64_t HashFamily::prefix_sum(std::span<const uint32_t> prefix) const {
    uint64_t s = 0;
    for (size_t j = 0; j < prefix.size(); ++j) {
        s = (s + mulmod(levels_[j].a, prefix[j], q_)) % q_;
    }
    return s;
}

uint64_t HashFamily::hash_prefix(uint32_t i, std::span<const uint32_t> prefix) const {
    if (i == 0) throw std::invalid_argument("hash_prefix: levels start at 1");
    if (i > levels_.size() || prefix.size() != i) {
        throw std::invalid_argument("hash_prefix: prefix length must equal the level");
    }
    return (prefix_sum(prefix) + levels_[i - 1].b) % q_;
}

SortedMemberTable::SortedMemberTable(std::span<const uint32_t> members, uint64_t a, uint64_t q)
    : a_(a % q), q_(q) {
    if (a_ == 0) throw std::invalid_argument("SortedMemberTable: a is 0 mod q");
    std::vector<size_t> order(members.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::vector<uint64_t> keys(members.size());
    for (size_t i = 0; i < members.size(); ++i) keys[i] = mulmod(a_, members[i], q_);
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
        return keys[i] < keys[j] || (keys[i] == keys[j] && members[i] < members[j]);
    });
    residues_.resize(members.size());
    companions_.resize(members.size());
    for (size_t i = 0; i < order.size(); ++i) {
        residues_[i] = keys[order[i]];
        companions_[i] = members[order[i]];
    }
}

std::vector<uint32_t> sample_members(uint64_t eta, uint64_t a, uint64_t delta,
                                     const SortedMemberTable& table) {
    const uint64_t q = table.prime();
    if ((a % q) != table.coefficient()) {
        throw std::invalid_argument("sample_members: table built with a different coefficient");
    }
    if (delta > q) throw std::invalid_argument("sample_members: delta > q");
    std::vector<uint32_t> out;
    if (delta == 0 || table.size() == 0) return out;
    eta %= q;
    if (delta == q) {
        out.assign(table.companions().begin(), table.companions().end());
        return out;
    }
    // Accepted residues s satisfy s in [lo, lo + delta) mod q with lo = -eta mod q.
    const auto& res = table.residues();
    uint64_t lo = (q - eta) % q;
    uint64_t hi = lo + delta;  // may exceed q, in which case the window wraps
    auto emit_range = [&](uint64_t from, uint64_t to) {
        auto first = std::lower_bound(res.begin(), res.end(), from);
        auto last = std::lower_bound(res.begin(), res.end(), to);
        for (auto it = first; it != last; ++it) {
            out.push_back(table.companions()[static_cast<size_t>(it - res.begin())]);
        }
    };
    if (hi <= q) {
        emit_range(lo, hi);
    } else {
        emit_range(lo, q);
        emit_range(0, hi - q);
    }
    return out;
}

std::vector<uint32_t> sample_universe(uint64_t eta, uint64_t a, uint64_t delta, uint64_t q) {
    a %= q;
    if (a == 0) throw std::invalid_argument("sample_universe: a is 0 mod q");
    if (delta > q) throw std::invalid_argument("sample_universe: delta > q");
    std::vector<uint32_t> out;
    out.reserve(delta);
    eta %= q;
    uint64_t a_inv = mod_inverse(a, q);
    for (uint64_t v = 0; v < delta; ++v) {
        uint64_t diff = (v + q - eta) % q;
        out.push_back(static_cast<uint32_t>(mulmod(a_inv, diff, q)));
    }
    return out;
}

}  // namespace smj
