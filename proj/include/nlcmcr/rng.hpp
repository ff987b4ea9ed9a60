#pragma once

#include <cstdint>
#include <random>

namespace nlcmcr {

// Seeded random stream. One instance per chain; identical (seed, stream)
// pairs reproduce the same draw sequence on every platform, since
// mt19937_64 and everything layered on top of it here is fully specified.
class RngState {
  public:
    explicit RngState(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on the open interval (0,1).
    double uniform();

    // Standard normal (Box-Muller, cached partner draw).
    double normal();

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace nlcmcr
