#pragma once

// Little-endian primitive encoding shared by the dataset and checkpoint files.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "nomadet/error.hpp"

namespace nomadet::binio {

template <typename U>
void put_uint(std::ostream& os, U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFFU));
}

inline void put_u8(std::ostream& os, std::uint8_t v) { put_uint(os, v); }
inline void put_u16(std::ostream& os, std::uint16_t v) { put_uint(os, v); }
inline void put_u32(std::ostream& os, std::uint32_t v) { put_uint(os, v); }
inline void put_u64(std::ostream& os, std::uint64_t v) { put_uint(os, v); }
inline void put_f32(std::ostream& os, float v) { put_u32(os, std::bit_cast<std::uint32_t>(v)); }

class Reader {
public:
    Reader(std::istream& is, std::string what) : is_(is), what_(std::move(what)) {}

    template <typename U>
    U get_uint() {
        unsigned char buf[sizeof(U)];
        if (!is_.read(reinterpret_cast<char*>(buf), sizeof(U)))
            throw TruncatedError(what_ + ": file is truncated");
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(buf[i]) << (8 * i));
        return v;
    }

    std::uint8_t u8() { return get_uint<std::uint8_t>(); }
    std::uint16_t u16() { return get_uint<std::uint16_t>(); }
    std::uint32_t u32() { return get_uint<std::uint32_t>(); }
    std::uint64_t u64() { return get_uint<std::uint64_t>(); }
    float f32() { return std::bit_cast<float>(u32()); }

    void magic(const char (&expected)[5]) {
        char got[4];
        if (!is_.read(got, 4)) throw TruncatedError(what_ + ": file is truncated");
        if (std::memcmp(got, expected, 4) != 0)
            throw BadMagicError(what_ + ": bad magic (expected \"" + std::string(expected, 4) + "\")");
    }

    bool at_end() { return is_.peek() == std::char_traits<char>::eof(); }

private:
    std::istream& is_;
    std::string what_;
};

}  // namespace nomadet::binio
