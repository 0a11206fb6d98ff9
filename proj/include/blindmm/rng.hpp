#pragma once

#include <array>
#include <cstdint>

namespace blindmm {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11): a keyed bijection on
/// 128-bit counters.
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// Counter-based random stream keyed by (seed, stream_id). Draw j of a stream
/// depends only on (seed, stream_id, j), so streams can be generated on any
/// thread in any order.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal via Marsaglia's polar method.
    double normal();

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace blindmm
