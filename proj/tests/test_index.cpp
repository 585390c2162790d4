#include "smj/index.hpp"

#include "smj/wire.hpp"

#include "oracles.hpp"
#include "smj/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace smj;

namespace {

const GapParams kAnchor{0.1, 0.1, 0.05, 0.01};

// Exact-overlap pair over [0, q), sizes taken from the anchor densities.
std::pair<std::vector<uint32_t>, std::vector<uint32_t>> planted_pair(Rng& rng, uint64_t q,
                                                                     uint64_t sq, uint64_t su,
                                                                     uint64_t shared) {
    auto x = rng.sorted_subset(q, sq);
    auto inter = rng.sorted_subset_of(x, shared);
    std::vector<uint32_t> outside;
    size_t xi = 0;
    for (uint32_t e = 0; e < q; ++e) {
        if (xi < x.size() && x[xi] == e) {
            ++xi;
        } else {
            outside.push_back(e);
        }
    }
    auto fill = rng.sorted_subset_of(outside, su - shared);
    std::vector<uint32_t> y(inter);
    y.insert(y.end(), fill.begin(), fill.end());
    std::sort(y.begin(), y.end());
    return {std::move(x), std::move(y)};
}

std::shared_ptr<const Dataset> make_dataset(Rng& rng, uint64_t q, uint64_t size, size_t n) {
    auto data = std::make_shared<Dataset>();
    data->reserve(n);
    for (size_t i = 0; i < n; ++i) data->push_back(rng.sorted_subset(q, size));
    return data;
}

}  // namespace

TEST_CASE("build on an empty dataset") {
    TreeConfig config = configure(kAnchor, Thresholds{1.0, 1.0}, 2, 1009, 5, 2);
    FilterIndex index = FilterIndex::build(config, std::make_shared<const Dataset>());
    CHECK(index.stats().stored_entries == 0);
    QueryReport r = index.query(Rng(3).sorted_subset(1009, 101));
    CHECK(!r.matched);
    CHECK(r.candidates_examined == 0);
}

TEST_CASE("single point stores the cross product of its half decodings") {
    TreeConfig config = configure(kAnchor, Thresholds{0.5, 0.5}, 2, 1009, 11, 1);
    config.delta_seq = {8, 8};
    Rng rng(13);
    auto data = make_dataset(rng, 1009, 101, 1);
    FilterIndex index = FilterIndex::build(config, data);
    auto r1 = decode(config, 0, 1, (*data)[0], 0.5, Side::update);
    auto r2 = decode(config, 0, 2, (*data)[0], 0.5, Side::update);
    CHECK(index.stats().stored_entries == r1.size() * r2.size());
}

TEST_CASE("build rejects off-weight sets") {
    TreeConfig config = configure(kAnchor, Thresholds{1.0, 1.0}, 2, 1009, 5, 1);
    auto data = std::make_shared<Dataset>();
    data->push_back(Rng(3).sorted_subset(1009, 50));
    CHECK_THROWS_AS(FilterIndex::build(config, data), std::invalid_argument);
}

TEST_CASE("query finds an identical stored set whenever its decodings are nonempty") {
    TreeConfig config = configure(GapParams{0.1, 0.1, 0.1, 0.01}, Thresholds{1.0, 1.0}, 2,
                                  1009, 21, 8);
    Rng rng(29);
    auto data = make_dataset(rng, 1009, 101, 32);
    FilterIndex index = FilterIndex::build(config, data);
    int matched = 0, decodable = 0;
    for (size_t i = 0; i < data->size(); ++i) {
        const auto& x = (*data)[i];
        QueryReport r = index.query(x);
        bool any_rep = false;
        for (uint32_t rep = 0; rep < config.repetitions && !any_rep; ++rep) {
            any_rep = !decode(config, rep, 1, x, 1.0, Side::query).empty() &&
                      !decode(config, rep, 2, x, 1.0, Side::query).empty();
        }
        if (any_rep) {
            ++decodable;
            // identical sets share every key, and maximal overlap passes the test
            REQUIRE(r.matched.has_value());
            if (*r.matched == i) ++matched;
            CHECK(r.candidates_examined >= r.verified_comparisons);
            CHECK(r.verified_comparisons >= 1);
        }
    }
    CHECK(decodable > 0);
    CHECK(matched > 0);
}

TEST_CASE("query reports no match against disjoint data") {
    TreeConfig config = configure(kAnchor, Thresholds{0.5, 0.5}, 2, 1009, 31, 4);
    config.delta_seq = {16, 16};
    Rng rng(37);
    auto data = std::make_shared<Dataset>();
    for (int i = 0; i < 16; ++i) {
        auto y = rng.sorted_subset(504, 101);  // lower half of the universe
        data->push_back(std::move(y));
    }
    FilterIndex index = FilterIndex::build(config, data);
    std::vector<uint32_t> x;  // upper half: zero overlap with every point
    Rng rng2(38);
    for (auto e : rng2.sorted_subset(505, 101)) x.push_back(static_cast<uint32_t>(e + 504));
    QueryReport r = index.query(x);
    CHECK(!r.matched);
    CHECK(r.verified_comparisons <= r.candidates_examined);
}

TEST_CASE("identical seeds give byte-identical serializations") {
    TreeConfig config = configure(kAnchor, Thresholds{0.75, 0.75}, 4, 1009, 77, 2);
    Rng rng(41);
    auto data = make_dataset(rng, 1009, 101, 24);
    FilterIndex a = FilterIndex::build(config, data);
    FilterIndex b = FilterIndex::build(config, data);
    CHECK(a.fingerprint() == b.fingerprint());
    TreeConfig other = config;
    other.master_seed = 78;
    FilterIndex c = FilterIndex::build(other, data);
    CHECK(a.fingerprint() != c.fingerprint());
}

TEST_CASE("serialization round trips and validates") {
    TreeConfig config = configure(kAnchor, Thresholds{0.75, 0.75}, 4, 1009, 99, 2);
    Rng rng(43);
    auto data = make_dataset(rng, 1009, 101, 16);
    FilterIndex index = FilterIndex::build(config, data);

    std::stringstream buffer;
    index.write(buffer);
    FilterIndex loaded = FilterIndex::read(buffer, data);
    CHECK(loaded.fingerprint() == index.fingerprint());
    CHECK(loaded.stats().stored_entries == index.stats().stored_entries);

    // identical query behavior after the round trip
    auto x = rng.sorted_subset(1009, 101);
    QueryReport r1 = index.query(x);
    QueryReport r2 = loaded.query(x);
    CHECK(r1.matched == r2.matched);
    CHECK(r1.candidates_examined == r2.candidates_examined);

    SUBCASE("truncation fails with an offset") {
        std::stringstream full;
        index.write(full);
        std::string bytes = full.str();
        std::stringstream cut(bytes.substr(0, bytes.size() / 2));
        CHECK_THROWS_AS(FilterIndex::read(cut, data), wire::parse_error);
    }
    SUBCASE("bad magic is rejected") {
        std::stringstream bad("XXXX rest");
        CHECK_THROWS_AS(FilterIndex::read(bad, data), wire::parse_error);
    }
    SUBCASE("wrong dataset size is rejected") {
        std::stringstream full;
        index.write(full);
        auto short_data = std::make_shared<const Dataset>(
            Dataset(data->begin(), data->begin() + 8));
        CHECK_THROWS_AS(FilterIndex::read(full, short_data), wire::parse_error);
    }
}

TEST_CASE("collision probability grows with the intersection") {
    TreeConfig config = configure(kAnchor, Thresholds{1.0, 1.0}, 2, 1009, 2024, 1);
    const uint64_t q = 1009, s = 101;
    const int trials = 10000;
    std::vector<uint64_t> grid{10, 30, 50, 70, 90};
    std::vector<double> rates;
    for (uint64_t shared : grid) {
        int hits = 0;
        for (int trial = 0; trial < trials; ++trial) {
            Rng rng(derive(derive(7, shared), trial));
            auto [x, y] = planted_pair(rng, q, s, s, shared);
            TreeConfig fresh = config;
            fresh.master_seed = derive(derive(9, shared), trial);
            bool collide = true;
            for (uint32_t half = 1; half <= 2 && collide; ++half) {
                auto rx = decode(fresh, 0, half, x, 1.0, Side::query);
                auto ry = decode(fresh, 0, half, y, 1.0, Side::update);
                bool shared_path = false;
                for (const auto& a : rx) {
                    for (const auto& b : ry) {
                        shared_path = shared_path || a.elements == b.elements;
                    }
                }
                collide = collide && shared_path;
            }
            hits += collide ? 1 : 0;
        }
        rates.push_back(static_cast<double>(hits) / trials);
    }
    for (size_t i = 0; i + 1 < rates.size(); ++i) {
        double se = std::sqrt((rates[i] * (1 - rates[i]) + rates[i + 1] * (1 - rates[i + 1])) /
                              trials);
        CHECK(rates[i + 1] >= rates[i] - 2.0 * se);
    }
    CHECK(rates.back() > rates.front());
}

TEST_CASE("tensored far-pair key expectation stays below the analytic bound") {
    TreeConfig config = configure(kAnchor, Thresholds{0.75, 0.75}, 4, 1009, 4097, 1);
    const uint64_t q = 1009;
    const auto sq = static_cast<uint64_t>(std::llround(kAnchor.w_q * q));
    const auto su = static_cast<uint64_t>(std::llround(kAnchor.w_u * q));
    const auto s2 = static_cast<uint64_t>(std::llround(kAnchor.w_2 * q));
    const int trials = 4000;
    double sum = 0, sum_sq = 0;
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(derive(4242, trial));
        auto [x, y] = planted_pair(rng, q, sq, su, s2);
        TreeConfig fresh = config;
        fresh.master_seed = derive(17, trial);
        uint64_t product = 1;
        for (uint32_t half = 1; half <= 2 && product; ++half) {
            auto rx = decode(fresh, 0, half, x, 0.75, Side::query);
            auto ry = decode(fresh, 0, half, y, 0.75, Side::update);
            uint64_t common = 0;
            for (const auto& a : rx) {
                for (const auto& b : ry) {
                    common += a.elements == b.elements ? 1 : 0;
                }
            }
            product *= common;
        }
        sum += static_cast<double>(product);
        sum_sq += static_cast<double>(product) * product;
    }
    double mean = sum / trials;
    double se = std::sqrt(std::max(0.0, sum_sq / trials - mean * mean) / trials);
    // full-depth far bound: 2 Delta^k exp(-k D(T_2||P_2)) with k = 2K
    RhoBreakdown rb = rho_breakdown(
        GapParams{static_cast<double>(sq) / q, static_cast<double>(su) / q,
                  kAnchor.w_1, static_cast<double>(s2) / q},
        Thresholds{0.75, 0.75});
    double k = 2.0 * config.half_depth;
    double bound = 2.0 * std::exp(k * std::log(config.delta_target) - k * rb.div_far);
    CHECK(mean <= bound + 3.0 * se);
}

TEST_CASE("capacity ceiling only warns") {
    TreeConfig config = configure(kAnchor, Thresholds{0.0, 0.0}, 2, 1009, 5, 1);
    config.dir_u = Direction::at_least;  // vacuous pruning: every admitted path survives
    config.delta_seq = {8, 8};
    Rng rng(51);
    auto data = make_dataset(rng, 1009, 101, 2);
    FilterIndex index = FilterIndex::build(config, data, /*pairs_per_point_ceiling=*/100);
    CHECK(index.stats().capacity_warnings == 2);
    CHECK(index.stats().stored_entries == 0);
    FilterIndex roomy = FilterIndex::build(config, data, 10000);
    CHECK(roomy.stats().capacity_warnings == 0);
    CHECK(roomy.stats().stored_entries == 2 * 64 * 64);
}
