#pragma once

#include <cmath>
#include <cstdint>

namespace oligoshare::rng {

// 64-bit finalizer with full avalanche; the workhorse behind the
// counter-based generator below.
inline std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

// Counter-based random stream: output k is a hash of (key, k), so a stream
// is reproducible from its key alone, and child streams derived from
// integer keys are statistically independent of the parent and of each
// other. This makes Monte Carlo results independent of execution order and
// thread count: stream (seed -> trial -> attempt) is the same object no
// matter which worker draws from it.
class Stream {
  public:
    explicit Stream(std::uint64_t key) : key_(key) {}

    // Deterministic sub-stream for integer key k (trial index, attempt
    // index, ...). Distinct (parent, k) pairs map to distinct keys with
    // overwhelming probability.
    Stream child(std::uint64_t k) const {
        return Stream(mix(key_ + 0x9E3779B97F4A7C15ULL * (k + 1)));
    }

    std::uint64_t next_u64() {
        return mix(key_ + 0xD1B54A32D192ED03ULL * ++counter_);
    }

    // Uniform on (0, 1), never exactly 0 or 1: 53-bit mantissa centered in
    // its bucket.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; generates two values per trip and
    // caches the spare.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace oligoshare::rng
