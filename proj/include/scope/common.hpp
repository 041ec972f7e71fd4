#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scope {

/// Token ids; the universal text representation across the pipeline.
using TokenSeq = std::vector<int>;

/// Half-open index range [begin, end) into a continuation.
struct BlockRange {
    int begin = 0;
    int end = 0;
    int size() const { return end - begin; }
};

// Error taxonomy. The CLI maps these to exit codes and structured stderr.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct DataError : Error {
    using Error::Error;
};
struct ModelError : Error {
    using Error::Error;
};
struct TransportError : Error {
    using Error::Error;
};
struct ProtocolError : Error {
    using Error::Error;
};

inline uint64_t fnv1a64(std::string_view bytes, uint64_t seed = 14695981039346656037ull) {
    uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string to_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string digest_string(uint64_t h) { return "fnv1a64:" + to_hex(h); }

}  // namespace scope
