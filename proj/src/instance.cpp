#include "smj/instance.hpp"

#include "smj/hashing.hpp"
#include "smj/parallel.hpp"
#include "smj/rng.hpp"
#include "smj/wire.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace smj {

namespace {

uint64_t overlap(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    uint64_t count = 0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (a[i] > b[j]) {
            ++j;
        } else {
            ++count, ++i, ++j;
        }
    }
    return count;
}

std::vector<uint32_t> complement_within(const std::vector<uint32_t>& sorted, uint32_t d) {
    std::vector<uint32_t> out;
    out.reserve(d - sorted.size());
    size_t i = 0;
    for (uint32_t e = 0; e < d; ++e) {
        if (i < sorted.size() && sorted[i] == e) {
            ++i;
        } else {
            out.push_back(e);
        }
    }
    return out;
}

}  // namespace

Instance generate(uint64_t n, uint32_t d, const GapParams& params, uint64_t n_queries,
                  uint64_t seed, uint64_t n_planted) {
    params.validate();
    if (n == 0 || d < 2) throw std::invalid_argument("generate: need n >= 1 and d >= 2");
    if (n_planted > n_queries || n_planted > n) {
        throw std::invalid_argument("generate: more planted pairs than queries or points");
    }
    double ln_n = std::log(static_cast<double>(std::max<uint64_t>(n, 2)));
    if (params.w_2 * d < 20.0 * ln_n) {
        throw std::invalid_argument("generate: requires w_2*d >= 20 ln n");
    }

    Instance inst;
    inst.d = d;
    inst.q = next_prime(d);
    inst.params = params;
    const double q = static_cast<double>(inst.q);
    const auto size_q = static_cast<uint64_t>(std::llround(params.w_q * q));
    const auto size_u = static_cast<uint64_t>(std::llround(params.w_u * q));
    const auto size_1 = static_cast<uint64_t>(std::llround(params.w_1 * q));
    if (size_u > d || size_q > d) {
        throw std::invalid_argument("generate: set weight exceeds the raw universe");
    }
    const double ceiling =
        params.w_2 * q * (1.0 + 5.0 * std::sqrt(ln_n / (params.w_2 * q)));

    inst.queries.resize(n_queries);
    parallel_for(n_queries, [&](uint64_t i) {
        Rng rng(derive(derive(seed, 0x9ee1), i));
        inst.queries[i] = rng.sorted_subset(d, size_q);
    });

    inst.dataset.resize(n);
    parallel_for(n, [&](uint64_t i) {
        Rng rng(derive(derive(seed, 0xda7a), i));
        if (i < n_planted) {
            // Planted partner of query i: exact intersection inside the
            // query, remainder uniform outside it.
            const auto& x = inst.queries[i];
            std::vector<uint32_t> outside = complement_within(x, d);
            for (uint32_t attempt = 0;; ++attempt) {
                std::vector<uint32_t> y = rng.sorted_subset_of(x, size_1);
                std::vector<uint32_t> fill = rng.sorted_subset_of(outside, size_u - size_1);
                y.insert(y.end(), fill.begin(), fill.end());
                std::sort(y.begin(), y.end());
                bool ok = true;
                // The planted point must still look random to every other query.
                for (uint64_t qi = 0; qi < n_queries && ok; ++qi) {
                    if (qi == i) continue;
                    if (static_cast<double>(overlap(inst.queries[qi], y)) > ceiling) ok = false;
                }
                if (ok) {
                    inst.dataset[i] = std::move(y);
                    break;
                }
                if (attempt > 256) throw std::runtime_error("generate: concentration guard stuck");
            }
        } else {
            for (uint32_t attempt = 0;; ++attempt) {
                std::vector<uint32_t> y = rng.sorted_subset(d, size_u);
                bool ok = true;
                for (uint64_t qi = 0; qi < n_queries && ok; ++qi) {
                    if (static_cast<double>(overlap(inst.queries[qi], y)) > ceiling) ok = false;
                }
                if (ok) {
                    inst.dataset[i] = std::move(y);
                    break;
                }
                if (attempt > 256) throw std::runtime_error("generate: concentration guard stuck");
            }
        }
    });

    inst.planted.reserve(n_planted);
    for (uint64_t i = 0; i < n_planted; ++i) inst.planted.emplace_back(i, i);
    return inst;
}

namespace {

constexpr char kMagic[4] = {'G', 'S', 'S', '1'};
constexpr uint16_t kVersion = 1;

void write_set(std::ostream& out, const std::vector<uint32_t>& s) {
    wire::put<uint32_t>(out, static_cast<uint32_t>(s.size()));
    for (uint32_t e : s) wire::put<uint32_t>(out, e);
}

std::vector<uint32_t> read_set(wire::Reader& reader, uint32_t d) {
    auto len = reader.get<uint32_t>();
    std::vector<uint32_t> s(len);
    uint32_t prev = 0;
    for (uint32_t i = 0; i < len; ++i) {
        s[i] = reader.get<uint32_t>();
        if (s[i] >= d) reader.fail("set element outside [0, d)");
        if (i > 0 && s[i] <= prev) reader.fail("set elements not strictly ascending");
        prev = s[i];
    }
    return s;
}

}  // namespace

void write_instance(const Instance& inst, std::ostream& out) {
    out.write(kMagic, 4);
    wire::put<uint16_t>(out, kVersion);
    wire::put<uint32_t>(out, inst.d);
    wire::put<uint32_t>(out, static_cast<uint32_t>(inst.q));
    wire::put<uint64_t>(out, inst.dataset.size());
    wire::put<uint64_t>(out, inst.queries.size());
    wire::put<double>(out, inst.params.w_q);
    wire::put<double>(out, inst.params.w_u);
    wire::put<double>(out, inst.params.w_1);
    wire::put<double>(out, inst.params.w_2);
    for (const auto& s : inst.dataset) write_set(out, s);
    for (const auto& s : inst.queries) write_set(out, s);
    for (const auto& [qi, pi] : inst.planted) {
        wire::put<uint64_t>(out, qi);
        wire::put<uint64_t>(out, pi);
    }
}

void write_instance(const Instance& inst, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_instance: cannot open " + path.string());
    write_instance(inst, out);
}

Instance read_instance(std::istream& in) {
    wire::Reader reader(in);
    char magic[4];
    reader.raw(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) reader.fail("bad magic, expected GSS1");
    auto version = reader.get<uint16_t>();
    if (version != kVersion) reader.fail("unsupported instance version " + std::to_string(version));
    Instance inst;
    inst.d = reader.get<uint32_t>();
    inst.q = reader.get<uint32_t>();
    auto n = reader.get<uint64_t>();
    auto n_queries = reader.get<uint64_t>();
    inst.params.w_q = reader.get<double>();
    inst.params.w_u = reader.get<double>();
    inst.params.w_1 = reader.get<double>();
    inst.params.w_2 = reader.get<double>();
    inst.params.validate();
    if (!is_prime(inst.q) || inst.q < inst.d) reader.fail("q is not a prime >= d");
    inst.dataset.reserve(n);
    for (uint64_t i = 0; i < n; ++i) inst.dataset.push_back(read_set(reader, inst.d));
    inst.queries.reserve(n_queries);
    for (uint64_t i = 0; i < n_queries; ++i) inst.queries.push_back(read_set(reader, inst.d));
    while (!reader.at_eof()) {
        auto qi = reader.get<uint64_t>();
        auto pi = reader.get<uint64_t>();
        if (qi >= n_queries || pi >= n) reader.fail("planted pair index out of range");
        inst.planted.emplace_back(qi, pi);
    }
    return inst;
}

Instance read_instance(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_instance: cannot open " + path.string());
    return read_instance(in);
}

void write_text(const Instance& inst, std::ostream& out) {
    for (const auto& s : inst.dataset) {
        for (size_t i = 0; i < s.size(); ++i) {
            if (i) out << ' ';
            out << s[i];
        }
        out << '\n';
    }
    out << "%\n";
    for (const auto& s : inst.queries) {
        for (size_t i = 0; i < s.size(); ++i) {
            if (i) out << ' ';
            out << s[i];
        }
        out << '\n';
    }
}

void write_text(const Instance& inst, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_text: cannot open " + path.string());
    write_text(inst, out);
}

uint64_t instance_fingerprint(const Instance& inst) {
    std::ostringstream buffer;
    write_instance(inst, buffer);
    std::string bytes = buffer.str();
    uint64_t h = 0x6e57a9ceull;
    for (unsigned char b : bytes) h = mix64(h ^ b);
    return h;
}

}  // namespace smj
