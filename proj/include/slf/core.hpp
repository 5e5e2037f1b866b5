#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace slf {

/// 2-D point / vector in meters. Value type used for measurements,
/// position estimates and error vectors.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

/// Marker for absent feature values. Serialized as an empty field in text
/// formats; trees route it through each split's learned default direction.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

// -- error types ------------------------------------------------------------

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// First two window measurements coincide; no rotation basis exists.
struct DegenerateBasis : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sequence shorter than the requested window length.
struct InsufficientLength : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fewer than two measurements available for online estimation.
struct InsufficientHistory : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Innovation covariance not invertible in a Kalman update.
struct SingularInnovation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fixed-point iteration exhausted its budget without settling.
struct ConvergenceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// -- seedable, splittable RNG ----------------------------------------------

/// 64-bit finalizer used to derive independent substreams from a master
/// seed. Changing the number of tracks never perturbs earlier streams
/// because stream i depends only on (seed, i).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Engine for substream `stream_id` of master seed `seed`.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream_id) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(~stream_id)));
}

/// FNV-1a, used for dataset fingerprints in model manifests.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xCBF29CE484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    return fnv1a64(s.data(), s.size());
}

}  // namespace slf
