#include "smj/rng.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace smj {

std::vector<uint32_t> Rng::sorted_subset(uint64_t n, uint64_t m) {
    if (m > n) throw std::invalid_argument("sorted_subset: m > n");
    // Sparse Fisher-Yates: only touched positions are materialized.
    std::unordered_map<uint64_t, uint64_t> swapped;
    swapped.reserve(2 * m);
    std::vector<uint32_t> out;
    out.reserve(m);
    for (uint64_t i = 0; i < m; ++i) {
        uint64_t j = i + below(n - i);
        auto at = [&](uint64_t k) {
            auto it = swapped.find(k);
            return it == swapped.end() ? k : it->second;
        };
        uint64_t vi = at(i), vj = at(j);
        out.push_back(static_cast<uint32_t>(vj));
        swapped[j] = vi;
        swapped[i] = vj;
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<uint32_t> Rng::sorted_subset_of(const std::vector<uint32_t>& population, uint64_t m) {
    auto idx = sorted_subset(population.size(), m);
    for (auto& v : idx) v = population[v];
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace smj
