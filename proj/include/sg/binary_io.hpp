#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "sg/errors.hpp"

// Little-endian primitive I/O used by every binary container in this
// project. Byte order is explicit so snapshots are portable across hosts.
namespace sg::bin {

inline void put_u8(std::ostream& os, uint8_t v) { os.put(char(v)); }

inline void put_u32(std::ostream& os, uint32_t v) {
    char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char((v >> 24) & 0xff)};
    os.write(b, 4);
}

inline void put_u64(std::ostream& os, uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

inline void put_f32(std::ostream& os, float v) { put_u32(os, std::bit_cast<uint32_t>(v)); }
inline void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<uint64_t>(v)); }

inline void put_str(std::ostream& os, const std::string& s) {
    put_u32(os, uint32_t(s.size()));
    os.write(s.data(), std::streamsize(s.size()));
}

[[noreturn]] inline void truncated() { throw DataError("binary input truncated"); }

inline uint8_t get_u8(std::istream& is) {
    int c = is.get();
    if (c == std::istream::traits_type::eof()) truncated();
    return uint8_t(c);
}

inline uint32_t get_u32(std::istream& is) {
    char b[4];
    if (!is.read(b, 4)) truncated();
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(b[i])) << (8 * i);
    return v;
}

inline uint64_t get_u64(std::istream& is) {
    char b[8];
    if (!is.read(b, 8)) truncated();
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(uint8_t(b[i])) << (8 * i);
    return v;
}

inline float get_f32(std::istream& is) { return std::bit_cast<float>(get_u32(is)); }
inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

inline std::string get_str(std::istream& is, uint32_t max_len = 1u << 20) {
    uint32_t n = get_u32(is);
    if (n > max_len) throw DataError("binary input: string length " + std::to_string(n) + " implausible");
    std::string s(n, '\0');
    if (n && !is.read(s.data(), n)) truncated();
    return s;
}

inline void expect_magic(std::istream& is, const char (&magic)[5], const std::string& what) {
    char b[4];
    if (!is.read(b, 4)) truncated();
    if (b[0] != magic[0] || b[1] != magic[1] || b[2] != magic[2] || b[3] != magic[3])
        throw DataError(what + ": bad magic bytes (expected '" + std::string(magic, 4) + "')");
}

inline void put_magic(std::ostream& os, const char (&magic)[5]) { os.write(magic, 4); }

} // namespace sg::bin
