#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>

namespace bpsforge {

struct BpsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : BpsError {
    using BpsError::BpsError;
};
struct ConfigError : BpsError {
    using BpsError::BpsError;
};
struct ModelError : BpsError {
    using BpsError::BpsError;
};
struct AlignmentError : BpsError {
    using BpsError::BpsError;
};
// Alignment search exceeded its state cap; the enclosing trial is scored as failed.
struct AlignmentCapError : AlignmentError {
    using AlignmentError::AlignmentError;
};
struct ReplayError : BpsError {
    using BpsError::BpsError;
};
struct SimulationError : BpsError {
    using BpsError::BpsError;
};
struct AssemblyError : BpsError {
    using BpsError::BpsError;
};
struct OptimizeError : BpsError {
    using BpsError::BpsError;
};

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

// Level comes from BPS_FORGE_LOG_LEVEL (error|warn|info|debug), default warn.
LogLevel log_level();
void log_message(LogLevel level, const std::string& msg);

inline void log_warn(const std::string& msg) { log_message(LogLevel::warn, msg); }
inline void log_info(const std::string& msg) { log_message(LogLevel::info, msg); }
inline void log_debug(const std::string& msg) { log_message(LogLevel::debug, msg); }

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stable child-seed derivation: mixing is order-sensitive, so (seed, k1) and
// (seed, k2) streams never collide for k1 != k2.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) {
    return splitmix64(seed ^ splitmix64(key));
}

template <typename... Keys>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key, Keys... rest) {
    return derive_seed(derive_seed(seed, key), rest...);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

}  // namespace bpsforge
