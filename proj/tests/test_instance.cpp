#include "smj/instance.hpp"

#include "smj/wire.hpp"

#include "smj/hashing.hpp"
#include "smj/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace smj;

namespace {

const GapParams kAnchor{0.1, 0.1, 0.05, 0.01};

uint64_t overlap(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    uint64_t n = 0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (a[i] > b[j]) {
            ++j;
        } else {
            ++n, ++i, ++j;
        }
    }
    return n;
}

}  // namespace

TEST_CASE("generated instances have exact weights and planted intersections") {
    Instance inst = generate(256, 1000, kAnchor, 50, 12345);
    CHECK(inst.q == 1009);
    const auto su = static_cast<uint64_t>(std::llround(kAnchor.w_u * 1009));
    const auto sq = static_cast<uint64_t>(std::llround(kAnchor.w_q * 1009));
    const auto s1 = static_cast<uint64_t>(std::llround(kAnchor.w_1 * 1009));
    for (const auto& y : inst.dataset) {
        CHECK(y.size() == su);
        CHECK(std::is_sorted(y.begin(), y.end()));
        CHECK(y.back() < 1000);
    }
    for (const auto& x : inst.queries) CHECK(x.size() == sq);
    REQUIRE(inst.planted.size() == 50);
    for (const auto& [qi, pi] : inst.planted) {
        CHECK(overlap(inst.queries[qi], inst.dataset[pi]) == s1);
    }
}

TEST_CASE("non-planted overlaps respect the concentration guard") {
    Instance inst = generate(256, 1000, kAnchor, 50, 99);
    double w2q = kAnchor.w_2 * static_cast<double>(inst.q);
    double ceiling = w2q * (1.0 + 5.0 * std::sqrt(std::log(256.0) / w2q));
    for (size_t qi = 0; qi < inst.queries.size(); ++qi) {
        for (size_t pi = 0; pi < inst.dataset.size(); ++pi) {
            if (qi == pi && qi < inst.planted.size()) continue;
            CHECK(static_cast<double>(overlap(inst.queries[qi], inst.dataset[pi])) <= ceiling);
        }
    }
}

TEST_CASE("non-planted overlaps match the hypergeometric law") {
    Instance inst = generate(1024, 1000, kAnchor, 64, 2024);
    const double q = static_cast<double>(inst.q);
    const double sq = std::llround(kAnchor.w_q * q);
    const double su = std::llround(kAnchor.w_u * q);
    // sets live in [0, d) but are uniform there; overlap of two independent
    // uniform subsets of [0, d) is hypergeometric with population d
    const double d = 1000.0;
    double mean_expect = sq * su / d;
    double var_expect = mean_expect * (1.0 - sq / d) * ((d - su) / (d - 1.0));
    double sum = 0, sum_sq = 0;
    uint64_t count = 0;
    for (size_t qi = 0; qi < inst.queries.size(); ++qi) {
        for (size_t pi = inst.planted.size(); pi < inst.dataset.size(); ++pi) {
            auto v = static_cast<double>(overlap(inst.queries[qi], inst.dataset[pi]));
            sum += v;
            sum_sq += v * v;
            ++count;
        }
    }
    double mean = sum / static_cast<double>(count);
    double var = sum_sq / static_cast<double>(count) - mean * mean;
    double se = std::sqrt(var_expect / static_cast<double>(count));
    CHECK(std::fabs(mean - mean_expect) <= 3.0 * se + 1e-6);
    CHECK(std::fabs(var - var_expect) <= 0.1 * var_expect);
}

TEST_CASE("full-overlap planted pair reproduces the query") {
    GapParams equal{0.1, 0.1, 0.1, 0.01};
    Instance inst = generate(1, 1000, equal, 1, 7);
    REQUIRE(inst.planted.size() == 1);
    CHECK(inst.dataset[0] == inst.queries[0]);
}

TEST_CASE("generation is deterministic at byte level") {
    Instance a = generate(64, 1000, kAnchor, 16, 5);
    Instance b = generate(64, 1000, kAnchor, 16, 5);
    CHECK(instance_fingerprint(a) == instance_fingerprint(b));
    Instance c = generate(64, 1000, kAnchor, 16, 6);
    CHECK(instance_fingerprint(a) != instance_fingerprint(c));
}

TEST_CASE("precondition w_2 d >= 20 ln n is enforced") {
    CHECK_THROWS_AS(generate(1024, 1000, GapParams{0.1, 0.1, 0.05, 0.005}, 8, 1),
                    std::invalid_argument);
}

TEST_CASE("GSS1 round trip") {
    Instance inst = generate(32, 1000, kAnchor, 8, 31);
    std::stringstream buffer;
    write_instance(inst, buffer);
    Instance loaded = read_instance(buffer);
    CHECK(loaded.d == inst.d);
    CHECK(loaded.q == inst.q);
    CHECK(loaded.dataset == inst.dataset);
    CHECK(loaded.queries == inst.queries);
    CHECK(loaded.planted == inst.planted);
    CHECK(instance_fingerprint(loaded) == instance_fingerprint(inst));

    SUBCASE("ten random instances round trip by fingerprint") {
        for (uint64_t seed = 0; seed < 10; ++seed) {
            Instance fresh = generate(16, 800, kAnchor, 4, seed);
            std::stringstream buf;
            write_instance(fresh, buf);
            CHECK(instance_fingerprint(read_instance(buf)) == instance_fingerprint(fresh));
        }
    }
    SUBCASE("truncated files report the failing offset") {
        std::stringstream full;
        write_instance(inst, full);
        std::string bytes = full.str();
        std::stringstream cut(bytes.substr(0, 40));
        try {
            read_instance(cut);
            FAIL("expected parse_error");
        } catch (const wire::parse_error& e) {
            CHECK(e.offset() <= 40);
            CHECK(std::string(e.what()).find("offset") != std::string::npos);
        }
    }
    SUBCASE("bad magic is rejected at offset zero") {
        std::stringstream bad("NOPE");
        CHECK_THROWS_AS(read_instance(bad), wire::parse_error);
    }
}

TEST_CASE("text export") {
    Instance inst = generate(4, 1000, kAnchor, 2, 77);
    std::stringstream out;
    write_text(inst, out);
    std::string line;
    size_t lines = 0, separators = 0;
    while (std::getline(out, line)) {
        if (line == "%") {
            ++separators;
        } else {
            ++lines;
        }
    }
    CHECK(lines == inst.dataset.size() + inst.queries.size());
    CHECK(separators == 1);
}
