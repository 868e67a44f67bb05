#include <cmath>
#include <set>

#include "doctest.h"
#include "mtjsnn/rng.hpp"

using namespace mtjsnn;

TEST_CASE("philox4x32-10 known-answer vectors") {
    // Random123 kat_vectors (Salmon et al., SC 2011)
    auto b = rng::philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(b.w[0] == 0x6627e8d5u);
    CHECK(b.w[1] == 0xe169c58du);
    CHECK(b.w[2] == 0xbc57ac4cu);
    CHECK(b.w[3] == 0x9b00dbd8u);

    b = rng::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                        {0xffffffffu, 0xffffffffu});
    CHECK(b.w[0] == 0x408f276du);
    CHECK(b.w[1] == 0x41c83b0eu);
    CHECK(b.w[2] == 0xa20bc7c6u);
    CHECK(b.w[3] == 0x6d5451fdu);

    b = rng::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                        {0xa4093822u, 0x299f31d0u});
    CHECK(b.w[0] == 0xd16cfe09u);
    CHECK(b.w[1] == 0x94fdccebu);
    CHECK(b.w[2] == 0x5001e420u);
    CHECK(b.w[3] == 0x24126ea1u);
}

TEST_CASE("uniforms stay inside (0,1) and streams are deterministic") {
    rng::Stream a(123, 7);
    rng::Stream b(123, 7);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform01();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        CHECK(u == b.uniform01());
    }
}

TEST_CASE("distinct stream ids give distinct sequences") {
    rng::Stream a(123, 1), b(123, 2), c(124, 1);
    int diff_ab = 0, diff_ac = 0;
    for (int i = 0; i < 64; ++i) {
        const auto ua = a.next_u32();
        diff_ab += ua != b.next_u32();
        diff_ac += ua != c.next_u32();
    }
    CHECK(diff_ab > 60);
    CHECK(diff_ac > 60);
}

TEST_CASE("gaussian moments") {
    rng::Stream s(99, 0);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = s.gaussian();
        sum += g;
        sum2 += g * g;
        sum4 += g * g * g * g;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));  // 4 sigma
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
    CHECK(sum4 / n == doctest::Approx(3.0).epsilon(0.05));  // normal kurtosis
}

TEST_CASE("snn stream packing is injective over a sample and range-checked") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t img : {0ull, 3ull, 59999ull}) {
        for (std::uint64_t t : {0ull, 19ull, 499ull}) {
            for (std::uint64_t layer : {0ull, 1ull, 3ull}) {
                for (std::uint64_t n : {0ull, 77ull, 3455ull}) {
                    CHECK(seen.insert(rng::snn_stream(img, t, layer, n)).second);
                }
            }
        }
    }
    CHECK_THROWS_AS((void)rng::snn_stream(1ull << 20, 0, 0, 0), std::out_of_range);
    CHECK_THROWS_AS((void)rng::snn_stream(0, 1ull << 18, 0, 0), std::out_of_range);
    CHECK_THROWS_AS((void)rng::snn_stream(0, 0, 16, 0), std::out_of_range);
    CHECK_THROWS_AS((void)rng::snn_stream(0, 0, 0, 1ull << 22), std::out_of_range);
}

TEST_CASE("one-shot bernoulli endpoints and rate") {
    for (int i = 0; i < 200; ++i) {
        CHECK_FALSE(rng::bernoulli(5, static_cast<std::uint64_t>(i), 0.0));
        CHECK(rng::bernoulli(5, static_cast<std::uint64_t>(i), 1.0));
    }
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) hits += rng::bernoulli(17, static_cast<std::uint64_t>(i), 0.3);
    const double rate = static_cast<double>(hits) / n;
    CHECK(std::abs(rate - 0.3) < 4.0 * std::sqrt(0.3 * 0.7 / n));
}
