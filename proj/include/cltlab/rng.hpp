#pragma once

#include <cmath>
#include <cstdint>

namespace cltlab {

// Counter-based splittable stream. A stream is keyed by (seed, stream_id);
// draws are a pure function of (key, counter), so replicates that use
// disjoint stream ids are reproducible regardless of scheduling.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : key_(derive_key(seed, stream_id)), counter_(0) {}

    std::uint64_t next_u64() {
        return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
    }

    // Uniform on (0, 1]; never returns 0 so quantile transforms are safe.
    double uniform01() {
        const std::uint64_t r = next_u64() >> 11;  // 53 bits
        return (static_cast<double>(r) + 1.0) * 0x1.0p-53;
    }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) {
        const std::uint64_t r = next_u64() >> 11;
        return lo + (hi - lo) * static_cast<double>(r) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // Box-Muller on (0,1] uniforms.
        const double u = uniform01();
        const double v = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t key() const { return key_; }

    static std::uint64_t mix64(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream_id) {
        return mix64(mix64(seed) ^ mix64(stream_id ^ 0x5851f42d4c957f2dULL));
    }

    std::uint64_t key_;
    std::uint64_t counter_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace cltlab
