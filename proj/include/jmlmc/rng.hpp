#pragma once

#include <array>
#include <cstdint>

namespace jmlmc {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Maps a 128-bit counter and a 64-bit key to 128 bits.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

/// Sub-stream purposes inside one coefficient realization.
enum class StreamPurpose : std::uint64_t { field = 0, partition = 1, jumps = 2, synthetic = 3 };

/// Counter-based random stream.
///
/// A stream is identified by (seed, id). `child(k)` derives a statistically
/// independent sub-stream from the pair (id, k), so any hierarchy such as
/// replication / level / sample / purpose maps to a fixed stream no matter
/// which worker evaluates it or in which order.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) noexcept;

    RandomStream child(std::uint64_t index) const noexcept;
    RandomStream child(StreamPurpose purpose) const noexcept {
        return child(static_cast<std::uint64_t>(purpose));
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t id() const noexcept { return id_; }

    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform on (lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Standard normal by the Box-Muller transform.
    double normal() noexcept;

private:
    RandomStream(std::uint64_t seed, std::uint64_t id) noexcept;

    PhiloxKey key() const noexcept;

    std::uint64_t seed_;
    std::uint64_t id_;
    std::uint64_t block_ = 0;
    PhiloxCounter buffer_{};
    int used_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace jmlmc
