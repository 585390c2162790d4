#include "smj/hashing.hpp"

#include "oracles.hpp"
#include "smj/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace smj;

TEST_CASE("next_prime") {
    CHECK(next_prime(100) == 101);
    CHECK(next_prime(2) == 2);
    CHECK(next_prime(1000000) == 1000003);
    CHECK(oracles::trial_division_prime(next_prime(1000000)));
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        uint64_t m = 2 + rng.below(1 << 20);
        uint64_t p = next_prime(m);
        CHECK(p >= m);
        CHECK(oracles::trial_division_prime(p));
        for (uint64_t x = m; x < p; ++x) CHECK(!oracles::trial_division_prime(x));
    }
}

TEST_CASE("hash_prefix evaluates the affine form") {
    HashFamily family(9, 101, 4);
    for (uint32_t i = 1; i <= 4; ++i) {
        CHECK(family.level(i).a >= 1);
        CHECK(family.level(i).a < 101);
        CHECK(family.level(i).b < 101);
    }
    std::vector<uint32_t> prefix{2, 3};
    uint64_t expect =
        (family.level(1).a * 2 + family.level(2).a * 3 + family.level(2).b) % 101;
    CHECK(family.hash_prefix(2, prefix) == expect);
    CHECK_THROWS_AS(family.hash_prefix(0, {}), std::invalid_argument);
    CHECK_THROWS_AS(family.hash_prefix(5, std::vector<uint32_t>(5, 1)), std::invalid_argument);
    CHECK_THROWS_AS(family.hash_prefix(2, prefix = {1}), std::invalid_argument);
}

TEST_CASE("hash family is reproducible from the seed") {
    HashFamily a(1234, 1009, 6), b(1234, 1009, 6), c(1235, 1009, 6);
    bool differs = false;
    for (uint32_t i = 1; i <= 6; ++i) {
        CHECK(a.level(i).a == b.level(i).a);
        CHECK(a.level(i).b == b.level(i).b);
        differs = differs || a.level(i).a != c.level(i).a || a.level(i).b != c.level(i).b;
    }
    CHECK(differs);
}

TEST_CASE("empirical collision rate stays near 1/q") {
    const uint64_t q = 10007;
    Rng rng(17);
    uint64_t collisions = 0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        HashFamily family(rng.next(), q, 3);
        std::vector<uint32_t> r1{static_cast<uint32_t>(rng.below(q)),
                                 static_cast<uint32_t>(rng.below(q)),
                                 static_cast<uint32_t>(rng.below(q))};
        std::vector<uint32_t> r2 = r1;
        r2[rng.below(3)] = static_cast<uint32_t>(rng.below(q));
        if (r1 == r2) continue;
        if (family.hash_prefix(3, r1) == family.hash_prefix(3, r2)) ++collisions;
    }
    CHECK(static_cast<double>(collisions) / trials <= 1.5 / static_cast<double>(q));
}

TEST_CASE("sample_universe matches brute force") {
    const uint64_t q = 101;
    Rng rng(5);
    for (int t = 0; t < 500; ++t) {
        uint64_t a = 1 + rng.below(q - 1);
        uint64_t eta = rng.below(q);
        uint64_t delta = rng.below(q + 1);
        auto got = sample_universe(eta, a, delta, q);
        std::set<uint32_t> expect;
        for (uint32_t x = 0; x < q; ++x) {
            if ((eta + a * x) % q < delta) expect.insert(x);
        }
        CHECK(std::set<uint32_t>(got.begin(), got.end()) == expect);
        CHECK(got.size() == expect.size());
    }
    CHECK(sample_universe(0, 7, 1, q) == std::vector<uint32_t>{0});
    CHECK(sample_universe(3, 7, 0, q).empty());
    CHECK(sample_universe(3, 7, q, q).size() == q);
}

TEST_CASE("sample_members matches brute force and the universe restriction") {
    const uint64_t q = 1009;
    Rng rng(11);
    for (int t = 0; t < 10000; ++t) {
        uint64_t a = 1 + rng.below(q - 1);
        uint64_t eta = rng.below(q);
        uint64_t delta = rng.below(q + 1);
        auto x = rng.sorted_subset(q, 1 + rng.below(60));
        SortedMemberTable table(x, a, q);
        auto got = sample_members(eta, a, delta, table);
        std::set<uint32_t> expect;
        for (uint32_t e : x) {
            if ((eta + a * e) % q < delta) expect.insert(e);
        }
        CHECK(std::set<uint32_t>(got.begin(), got.end()) == expect);
        CHECK(got.size() == expect.size());

        auto universe = sample_universe(eta, a, delta, q);
        std::set<uint32_t> via_universe;
        for (uint32_t e : universe) {
            if (std::binary_search(x.begin(), x.end(), e)) via_universe.insert(e);
        }
        CHECK(via_universe == expect);
    }
}

TEST_CASE("sample_members covers both wrap boundaries") {
    const uint64_t q = 101;
    std::vector<uint32_t> x;
    for (uint32_t e = 0; e < q; ++e) x.push_back(e);
    // a = 1 makes residues equal elements, so the window is transparent.
    SortedMemberTable table(x, 1, q);

    // window [q - 2, q) plus [0, 3): wraps with the larger part on the right
    auto got = sample_members(2, 1, 5, table);
    std::set<uint32_t> expect{99, 100, 0, 1, 2};
    CHECK(std::set<uint32_t>(got.begin(), got.end()) == expect);

    // window starting at 0 exactly (eta = 0): no wrap
    got = sample_members(0, 1, 3, table);
    CHECK(std::set<uint32_t>(got.begin(), got.end()) == std::set<uint32_t>{0, 1, 2});

    // window ending at q exactly: no wrap, touches the top residue
    got = sample_members(1, 1, 1, table);
    CHECK(std::set<uint32_t>(got.begin(), got.end()) == std::set<uint32_t>{100});

    CHECK(sample_members(55, 1, 0, table).empty());
    CHECK(sample_members(55, 1, q, table).size() == q);
}

TEST_CASE("mod_inverse") {
    Rng rng(23);
    for (int t = 0; t < 200; ++t) {
        uint64_t q = next_prime(2 + rng.below(1 << 16));
        uint64_t a = 1 + rng.below(q - 1);
        CHECK(mulmod(a, mod_inverse(a, q), q) == 1);
    }
    CHECK_THROWS_AS(mod_inverse(0, 7), std::invalid_argument);
}
