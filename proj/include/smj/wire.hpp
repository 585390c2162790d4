#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace smj::wire {

// Fixed-width little-endian scalar I/O, independent of host byte order.

template <typename T>
void put(std::ostream& out, T value) {
    static_assert(std::is_integral_v<T> || std::is_floating_point_v<T>);
    if constexpr (std::is_floating_point_v<T>) {
        uint64_t bits;
        static_assert(sizeof(T) == 8);
        std::memcpy(&bits, &value, 8);
        put<uint64_t>(out, bits);
    } else {
        using U = std::make_unsigned_t<T>;
        auto u = static_cast<U>(value);
        char buf[sizeof(U)];
        for (size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((u >> (8 * i)) & 0xff);
        out.write(buf, sizeof(U));
    }
}

/// Stream reader that tracks the byte offset for error reporting.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    uint64_t offset() const { return offset_; }

    template <typename T>
    T get() {
        if constexpr (std::is_floating_point_v<T>) {
            static_assert(sizeof(T) == 8);
            uint64_t bits = get<uint64_t>();
            T value;
            std::memcpy(&value, &bits, 8);
            return value;
        } else {
            using U = std::make_unsigned_t<T>;
            char buf[sizeof(U)];
            in_.read(buf, sizeof(U));
            if (in_.gcount() != static_cast<std::streamsize>(sizeof(U))) {
                fail("unexpected end of file");
            }
            U u = 0;
            for (size_t i = 0; i < sizeof(U); ++i) {
                u |= static_cast<U>(static_cast<unsigned char>(buf[i])) << (8 * i);
            }
            offset_ += sizeof(U);
            return static_cast<T>(u);
        }
    }

    void raw(char* dst, size_t n) {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n)) fail("unexpected end of file");
        offset_ += n;
    }

    bool at_eof() {
        return in_.peek() == std::char_traits<char>::eof();
    }

    [[noreturn]] void fail(const std::string& what) const;

private:
    std::istream& in_;
    uint64_t offset_ = 0;
};

/// Malformed-file error carrying the byte offset where parsing stopped.
struct parse_error : std::runtime_error {
    parse_error(uint64_t offset, const std::string& what)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    uint64_t offset() const { return offset_; }

private:
    uint64_t offset_;
};

inline void Reader::fail(const std::string& what) const { throw parse_error(offset_, what); }

}  // namespace smj::wire
