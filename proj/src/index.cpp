#include "smj/index.hpp"

#include "smj/parallel.hpp"
#include "smj/rng.hpp"
#include "smj/wire.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace smj {

namespace {

struct Fingerprint {
    uint64_t hi, lo;
};

Fingerprint path_fingerprint(const std::vector<uint32_t>& elements, uint64_t salt) {
    uint64_t hi = mix64(salt ^ 0x8e72d4f01a5b3c96ull);
    uint64_t lo = mix64(salt ^ 0x243f6a8885a308d3ull);
    for (uint32_t e : elements) {
        hi = mix64(hi ^ (e + 0x9e3779b97f4a7c15ull));
        lo = mix64(lo ^ (e + 0x7f4a7c159e3779b9ull));
    }
    return {hi, lo};
}

Fingerprint combine(const Fingerprint& a, const Fingerprint& b) {
    return {mix64(a.hi ^ mix64(b.hi)), mix64(a.lo ^ mix64(b.lo))};
}

uint64_t intersection_size(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    uint64_t count = 0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (a[i] > b[j]) {
            ++j;
        } else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

}  // namespace

FilterIndex FilterIndex::build(const TreeConfig& config, std::shared_ptr<const Dataset> dataset,
                               uint64_t pairs_per_point_ceiling) {
    config.validate();
    if (!dataset) throw std::invalid_argument("build: dataset must not be null");
    const auto expected = static_cast<uint64_t>(
        std::llround(config.params.w_u * static_cast<double>(config.universe_prime)));
    for (const auto& y : *dataset) {
        if (y.size() != expected) {
            throw std::invalid_argument("build: every stored set must have weight w_u*q");
        }
    }

    FilterIndex index;
    index.config_ = config;
    index.dataset_ = std::move(dataset);
    const Dataset& points = *index.dataset_;
    const uint32_t R = config.repetitions;

    // One shard per (repetition, point); concatenated in index order below,
    // so the result is independent of the thread schedule.
    std::vector<std::vector<Entry>> shards(static_cast<size_t>(R) * points.size());
    std::vector<uint64_t> task_pairs(shards.size(), 0);

    parallel_for(shards.size(), [&](uint64_t task) {
        auto rep = static_cast<uint32_t>(task / points.size());
        auto id = static_cast<uint32_t>(task % points.size());
        const auto& y = points[id];
        auto r1 = decode(config, rep, 1, y, config.thresholds.t_u, Side::update);
        if (r1.empty()) return;
        auto r2 = decode(config, rep, 2, y, config.thresholds.t_u, Side::update);
        if (r2.empty()) return;
        uint64_t pairs = static_cast<uint64_t>(r1.size()) * r2.size();
        task_pairs[task] = pairs;
        if (pairs > pairs_per_point_ceiling) {
            return;  // the point is skipped for this repetition, not an error
        }
        std::vector<Entry>& shard = shards[task];
        shard.reserve(pairs);
        std::vector<Fingerprint> f2;
        f2.reserve(r2.size());
        for (const auto& p : r2) f2.push_back(path_fingerprint(p.elements, 2));
        for (const auto& p1 : r1) {
            Fingerprint f1 = path_fingerprint(p1.elements, 1);
            for (const Fingerprint& f : f2) {
                Fingerprint key = combine(f1, f);
                shard.push_back(Entry{key.hi, key.lo, id});
            }
        }
    });

    index.reps_.resize(R);
    for (uint32_t rep = 0; rep < R; ++rep) {
        uint64_t total = 0;
        for (size_t id = 0; id < points.size(); ++id) {
            total += shards[static_cast<size_t>(rep) * points.size() + id].size();
        }
        auto& table = index.reps_[rep];
        table.reserve(total);
        for (size_t id = 0; id < points.size(); ++id) {
            auto& shard = shards[static_cast<size_t>(rep) * points.size() + id];
            table.insert(table.end(), shard.begin(), shard.end());
            shard.clear();
            shard.shrink_to_fit();
        }
        std::sort(table.begin(), table.end());
        index.stats_.stored_entries += table.size();
    }
    for (size_t id = 0; id < points.size(); ++id) {
        bool over = false;
        for (uint32_t rep = 0; rep < R; ++rep) {
            uint64_t pairs = task_pairs[static_cast<size_t>(rep) * points.size() + id];
            index.stats_.max_pairs_per_point = std::max(index.stats_.max_pairs_per_point, pairs);
            over = over || pairs > pairs_per_point_ceiling;
        }
        index.stats_.capacity_warnings += over ? 1 : 0;
    }
    return index;
}

QueryReport FilterIndex::query(const std::vector<uint32_t>& x, const QueryOptions& options) const {
    auto start = std::chrono::steady_clock::now();
    QueryReport report;
    const auto& cfg = config_;
    double threshold = options.overlap_threshold.value_or(
        cfg.params.w_2 * static_cast<double>(cfg.universe_prime));

    const Dataset& points = *dataset_;
    std::vector<uint8_t> seen(points.size(), 0);
    Rng verify_rng(derive(options.verification_seed, 0x7e57));

    auto verify = [&](uint32_t id) {
        const auto& y = points[id];
        if (!options.sampled_verification) {
            return static_cast<double>(intersection_size(x, y)) > threshold;
        }
        // Sampled overlap test: probe members of x, scale the hit count.
        const auto& p = cfg.params;
        double n_points = static_cast<double>(points.size());
        auto samples = static_cast<uint64_t>(std::ceil(
            std::min(p.w_q, p.w_u) / p.w_2 * std::log(std::max(2.0, n_points))));
        samples = std::min<uint64_t>(std::max<uint64_t>(samples, 16), x.size());
        uint64_t hits = 0;
        for (uint64_t s = 0; s < samples; ++s) {
            uint32_t e = x[verify_rng.below(x.size())];
            if (std::binary_search(y.begin(), y.end(), e)) ++hits;
        }
        double estimate = static_cast<double>(hits) / samples * static_cast<double>(x.size());
        return estimate > threshold;
    };

    for (uint32_t rep = 0; rep < cfg.repetitions && !report.matched; ++rep) {
        auto r1 = decode(cfg, rep, 1, x, cfg.thresholds.t_q, Side::query);
        report.paths_decoded += r1.size();
        if (r1.empty()) continue;
        auto r2 = decode(cfg, rep, 2, x, cfg.thresholds.t_q, Side::query);
        report.paths_decoded += r2.size();
        if (r2.empty()) continue;

        const auto& table = reps_[rep];
        for (const auto& p1 : r1) {
            Fingerprint f1 = path_fingerprint(p1.elements, 1);
            for (const auto& p2 : r2) {
                Fingerprint key = combine(f1, path_fingerprint(p2.elements, 2));
                Entry probe{key.hi, key.lo, 0};
                auto it = std::lower_bound(table.begin(), table.end(), probe);
                for (; it != table.end() && it->hi == key.hi && it->lo == key.lo; ++it) {
                    ++report.candidates_examined;
                    if (seen[it->id]) continue;
                    seen[it->id] = 1;
                    ++report.verified_comparisons;
                    if (verify(it->id)) {
                        report.matched = it->id;
                        break;
                    }
                }
                if (report.matched) break;
            }
            if (report.matched) break;
        }
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

namespace {

constexpr char kMagic[4] = {'S', 'M', 'J', '1'};
constexpr uint16_t kVersion = 1;

}  // namespace

void FilterIndex::write(std::ostream& out) const {
    out.write(kMagic, 4);
    wire::put<uint16_t>(out, kVersion);
    const TreeConfig& c = config_;
    wire::put<uint32_t>(out, c.half_depth);
    wire::put<double>(out, c.thresholds.t_q);
    wire::put<double>(out, c.thresholds.t_u);
    wire::put<double>(out, c.requested.t_q);
    wire::put<double>(out, c.requested.t_u);
    wire::put<uint8_t>(out, static_cast<uint8_t>(c.dir_q));
    wire::put<uint8_t>(out, static_cast<uint8_t>(c.dir_u));
    wire::put<double>(out, c.delta_target);
    wire::put<uint32_t>(out, c.repetitions);
    wire::put<uint64_t>(out, c.master_seed);
    wire::put<uint64_t>(out, c.universe_prime);
    wire::put<double>(out, c.params.w_q);
    wire::put<double>(out, c.params.w_u);
    wire::put<double>(out, c.params.w_1);
    wire::put<double>(out, c.params.w_2);
    wire::put<uint32_t>(out, static_cast<uint32_t>(c.delta_seq.size()));
    for (uint64_t d : c.delta_seq) wire::put<uint64_t>(out, d);
    for (const auto& s : c.slack_seq) {
        wire::put<double>(out, s[0]);
        wire::put<double>(out, s[1]);
    }
    wire::put<uint64_t>(out, dataset_->size());

    for (const auto& table : reps_) {
        wire::put<uint64_t>(out, table.size());
        // Runs of equal fingerprints share one key record.
        size_t i = 0;
        while (i < table.size()) {
            size_t j = i;
            while (j < table.size() && table[j].hi == table[i].hi && table[j].lo == table[i].lo) {
                ++j;
            }
            wire::put<uint64_t>(out, table[i].hi);
            wire::put<uint64_t>(out, table[i].lo);
            wire::put<uint32_t>(out, static_cast<uint32_t>(j - i));
            for (size_t r = i; r < j; ++r) wire::put<uint32_t>(out, table[r].id);
            i = j;
        }
    }
}

FilterIndex FilterIndex::read(std::istream& in, std::shared_ptr<const Dataset> dataset) {
    wire::Reader reader(in);
    char magic[4];
    reader.raw(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) reader.fail("bad magic, expected SMJ1");
    auto version = reader.get<uint16_t>();
    if (version != kVersion) {
        reader.fail("unsupported index version " + std::to_string(version));
    }
    FilterIndex index;
    TreeConfig& c = index.config_;
    c.half_depth = reader.get<uint32_t>();
    c.thresholds.t_q = reader.get<double>();
    c.thresholds.t_u = reader.get<double>();
    c.requested.t_q = reader.get<double>();
    c.requested.t_u = reader.get<double>();
    c.dir_q = static_cast<Direction>(reader.get<uint8_t>());
    c.dir_u = static_cast<Direction>(reader.get<uint8_t>());
    c.delta_target = reader.get<double>();
    c.repetitions = reader.get<uint32_t>();
    c.master_seed = reader.get<uint64_t>();
    c.universe_prime = reader.get<uint64_t>();
    c.params.w_q = reader.get<double>();
    c.params.w_u = reader.get<double>();
    c.params.w_1 = reader.get<double>();
    c.params.w_2 = reader.get<double>();
    auto K = reader.get<uint32_t>();
    if (K != c.half_depth) reader.fail("schedule length disagrees with the half depth");
    c.delta_seq.resize(K);
    for (auto& d : c.delta_seq) d = reader.get<uint64_t>();
    c.slack_seq.resize(K);
    for (auto& s : c.slack_seq) {
        s[0] = reader.get<double>();
        s[1] = reader.get<double>();
    }
    auto n_points = reader.get<uint64_t>();
    if (!dataset || dataset->size() != n_points) {
        reader.fail("dataset size disagrees with the serialized index");
    }
    index.dataset_ = std::move(dataset);
    c.snap_distortion_q = std::fabs(c.thresholds.t_q - c.requested.t_q);
    c.snap_distortion_u = std::fabs(c.thresholds.t_u - c.requested.t_u);
    c.validate();

    index.reps_.resize(c.repetitions);
    for (auto& table : index.reps_) {
        auto entries = reader.get<uint64_t>();
        table.reserve(entries);
        while (table.size() < entries) {
            auto hi = reader.get<uint64_t>();
            auto lo = reader.get<uint64_t>();
            auto run = reader.get<uint32_t>();
            if (table.size() + run > entries) reader.fail("run overflows the entry count");
            for (uint32_t r = 0; r < run; ++r) {
                auto id = reader.get<uint32_t>();
                if (id >= n_points) reader.fail("point id out of range");
                table.push_back(Entry{hi, lo, id});
            }
        }
        if (!std::is_sorted(table.begin(), table.end())) reader.fail("entries not sorted");
        index.stats_.stored_entries += table.size();
    }
    return index;
}

uint64_t FilterIndex::fingerprint() const {
    std::ostringstream buffer;
    write(buffer);
    std::string bytes = buffer.str();
    uint64_t h = 0x51a7f00dull;
    for (unsigned char b : bytes) h = mix64(h ^ b);
    return h;
}

}  // namespace smj
