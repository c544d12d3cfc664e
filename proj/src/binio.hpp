#pragma once

// Little-endian byte writers and a bounds-checked reader shared by the
// binary file formats (dataset, model, exemplar memory). Internal to src/.

#include <cstdint>
#include <cstring>
#include <sstream>
#include <string>

#include "ilgaco/error.hpp"

namespace ilgaco::binio {

inline void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

// Sequential reader over a byte buffer. `origin` names the buffer (file
// kind plus path) so every error points at its source.
struct Cursor {
    const std::string& buf;
    std::string origin;
    size_t pos = 0;

    void need(size_t n, const char* what) const {
        if (pos + n > buf.size()) {
            std::ostringstream os;
            os << "truncated " << origin << ": need " << n << " bytes for " << what
               << " at offset " << pos << ", file has " << buf.size();
            throw_format(os.str());
        }
    }

    uint32_t u32(const char* what) {
        need(4, what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        }
        pos += 4;
        return v;
    }

    uint64_t u64(const char* what) {
        need(8, what);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        }
        pos += 8;
        return v;
    }

    double f64(const char* what) {
        const uint64_t bits = u64(what);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

    std::string bytes(size_t n, const char* what) {
        need(n, what);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

}  // namespace ilgaco::binio
