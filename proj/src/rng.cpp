#include "jmlmc/rng.hpp"

#include <cmath>
#include <numbers>

namespace jmlmc {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// Domain separation between data blocks and child-id derivation.
constexpr std::uint32_t kChildSalt = 0x5BD1E995u;

inline void philox_round(PhiloxCounter& ctr, const PhiloxKey& key) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        philox_round(ctr, key);
    }
    return ctr;
}

RandomStream::RandomStream(std::uint64_t seed) noexcept : RandomStream(seed, 0) {}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t id) noexcept : seed_(seed), id_(id) {}

PhiloxKey RandomStream::key() const noexcept {
    return {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
}

RandomStream RandomStream::child(std::uint64_t index) const noexcept {
    PhiloxKey k = key();
    k[1] ^= kChildSalt;
    const PhiloxCounter out = philox4x32_10(
        {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
         static_cast<std::uint32_t>(id_), static_cast<std::uint32_t>(id_ >> 32)},
        k);
    const std::uint64_t child_id = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    return RandomStream(seed_, child_id);
}

std::uint32_t RandomStream::next_u32() noexcept {
    if (used_ == 4) {
        buffer_ = philox4x32_10(
            {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
             static_cast<std::uint32_t>(id_), static_cast<std::uint32_t>(id_ >> 32)},
            key());
        ++block_;
        used_ = 0;
    }
    return buffer_[used_++];
}

std::uint64_t RandomStream::next_u64() noexcept {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
}

double RandomStream::uniform() noexcept {
    // Midpoint of one of 2^53 equal cells: never 0, never 1.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_normal_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

}  // namespace jmlmc
