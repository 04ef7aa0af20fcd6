#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace kbbbc {

/// Named sub-streams. Each operator draws from its own stream so that
/// changing one component (e.g. the clustering initialiser) never shifts
/// the numbers seen by another.
enum class Substream : std::uint64_t {
    Init = 1,
    Bang = 2,
    KMeans = 3,
    KMedoids = 4,
    Silhouette = 5,
    Identification = 6,
    Quantification = 7,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Deterministic random stream over mt19937_64.
///
/// The standard distributions are implementation-defined, so the conversions
/// to uniform and normal variates are done here to keep sequences bit-exact
/// across standard libraries.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    /// Independent child stream; depends only on this stream's seed and the tag.
    RngStream derive(std::uint64_t tag) const {
        return RngStream(splitmix64(seed_ ^ splitmix64(tag + 0x632BE59BD9B4E019ull)));
    }
    RngStream derive(Substream tag) const { return derive(static_cast<std::uint64_t>(tag)); }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Unbiased integer in [0, n).
    std::uint64_t index(std::uint64_t n) {
        if (n == 0) {
            throw std::invalid_argument("RngStream::index: empty range");
        }
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v = engine_();
        while (v >= limit) {
            v = engine_();
        }
        return v % n;
    }

    /// Standard normal variate (Marsaglia polar method, spare value cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        double v = 0.0;
        double s = 0.0;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        has_spare_ = true;
        return u * factor;
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace kbbbc
