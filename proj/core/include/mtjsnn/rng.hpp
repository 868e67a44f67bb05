#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include "mtjsnn/vec3.hpp"

namespace mtjsnn::rng {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
// A draw is a pure function of (key, counter), so independent streams are
// cheap and results do not depend on the execution schedule.

struct Block {
    std::array<std::uint32_t, 4> w;
};

namespace detail {

inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline void round_once(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mul_hi_lo(kMul0, c[0], hi0, lo0);
    mul_hi_lo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace detail

inline Block philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) {
        detail::round_once(ctr, key);
        if (r < 9) {
            key[0] += detail::kWeyl0;
            key[1] += detail::kWeyl1;
        }
    }
    return Block{ctr};
}

inline Block block_at(std::uint64_t key, std::uint64_t stream_id, std::uint64_t block) {
    return philox4x32(
        {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
         static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)},
        {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)});
}

// Domain separation tags, xor-ed into the 64-bit key so draws made for one
// purpose never collide with another purpose under the same user seed.
inline constexpr std::uint64_t TAG_TRIAL = 0x9E3779B97F4A7C15ull;      // switching trials
inline constexpr std::uint64_t TAG_BIAS = 0xBF58476D1CE4E5B9ull;       // bias/reset refinement
inline constexpr std::uint64_t TAG_TRAIN = 0x94D049BB133111EBull;      // weight init + shuffling
inline constexpr std::uint64_t TAG_SNN = 0xD6E8FEB86659FD93ull;        // spiking-run draws
inline constexpr std::uint64_t TAG_VARIATION = 0xA24BAED4963EE407ull;  // chip variation draws

// Packs the spiking-run coordinates into one stream id.
// Budget: image 20 bits, time-step 18 bits, layer 4 bits, neuron 22 bits.
inline std::uint64_t snn_stream(std::uint64_t image, std::uint64_t t, std::uint64_t layer,
                                std::uint64_t neuron) {
    if (image >= (1ull << 20) || t >= (1ull << 18) || layer >= (1ull << 4) ||
        neuron >= (1ull << 22)) {
        throw std::out_of_range("rng: snn stream coordinate out of range");
    }
    return (image << 44) | (t << 26) | (layer << 22) | neuron;
}

inline double to_uniform01(std::uint32_t u) {
    return (static_cast<double>(u) + 0.5) * 0x1p-32;  // in (0,1)
}

// One Bernoulli draw tied to (key, stream). Uses lane 0 of block 0.
inline bool bernoulli(std::uint64_t key, std::uint64_t stream_id, double p) {
    return to_uniform01(block_at(key, stream_id, 0).w[0]) < p;
}

// Buffered sequential stream: uniforms and Box-Muller gaussians.
class Stream {
public:
    Stream(std::uint64_t key, std::uint64_t stream_id) : key_(key), id_(stream_id) {}

    std::uint32_t next_u32() {
        if (pos_ == 4) {
            buf_ = block_at(key_, id_, block_++).w;
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    double uniform01() { return to_uniform01(next_u32()); }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0,1] so the log stays finite
        const double u1 = (static_cast<double>(next_u32()) + 1.0) * 0x1p-32;
        const double u2 = to_uniform01(next_u32());
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Vec3 gaussian3() {
        const double a = gaussian(), b = gaussian(), c = gaussian();
        return {a, b, c};
    }

private:
    std::uint64_t key_;
    std::uint64_t id_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace mtjsnn::rng
