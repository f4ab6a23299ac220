// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#include "jbb/parallel.hpp"
#include "jbb/rng.hpp"
#include "jbb/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace jbb;

TEST_CASE("Philox4x32-10 known-answer vectors")
{
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("generators are reproducible and streams differ")
{
    CounterRng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i)
        CHECK(a() == b());
    CounterRng d(42);
    CHECK(d() != c());

    const CounterRng root(5);
    std::set<std::uint64_t> firsts;
    for (std::uint64_t i = 0; i < 1000; ++i)
    {
        CounterRng s = root.substream(i);
        firsts.insert(s());
    }
    CHECK(firsts.size() == 1000);
    CHECK(root.substream(3).stream() == root.substream(3).stream());
}

TEST_CASE("uniform and complex normal moments")
{
    CounterRng rng(2024);
    MeanAccumulator u, z2, re, im, re2;
    double lo = 1.0, hi = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i)
    {
        const double x = rng.uniform();
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        u.add(x);
        const std::complex<double> z = rng.complex_normal(2.5);
        z2.add(std::norm(z));
        re.add(z.real());
        im.add(z.imag());
        re2.add(z.real() * z.real());
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK(std::abs(u.mean() - 0.5) < 4 * u.std_error());
    CHECK(std::abs(z2.mean() - 2.5) < 4 * z2.std_error());
    CHECK(std::abs(re.mean()) < 4 * re.std_error());
    CHECK(std::abs(im.mean()) < 4 * im.std_error());
    CHECK(std::abs(re2.mean() - 1.25) < 4 * re2.std_error());
    // |z|^2 is exponential: variance equals squared mean
    CHECK(z2.variance() == doctest::Approx(6.25).epsilon(0.03));
}

TEST_CASE("compensated summation keeps small terms")
{
    CompensatedSum s;
    s.add(1e16);
    for (int i = 0; i < 1000; ++i)
        s.add(1.0);
    s.add(-1e16);
    CHECK(s.value() == 1000.0);
}

TEST_CASE("mean and regression accumulators merge exactly")
{
    MeanAccumulator all, left, right;
    RegressionAccumulator rall, rl, rr;
    for (int i = 0; i < 100; ++i)
    {
        const double x = i * 0.1, y = 3.0 - 2.0 * x + ((i % 3) - 1) * 0.01;
        all.add(y);
        rall.add(x, y);
        (i < 37 ? left : right).add(y);
        (i < 37 ? rl : rr).add(x, y);
    }
    left.merge(right);
    rl.merge(rr);
    CHECK(left.count() == 100);
    CHECK(left.mean() == doctest::Approx(all.mean()).epsilon(1e-14));
    CHECK(left.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
    CHECK(rl.slope() == doctest::Approx(rall.slope()).epsilon(1e-12));
    CHECK(rall.slope() == doctest::Approx(-2.0).epsilon(1e-3));
    CHECK(rall.slope_std_error() > 0.0);
}

TEST_CASE("parallel_for visits every index once and rethrows")
{
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits)
        CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [](std::size_t i) {
                                     if (i == 7)
                                         throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
    CHECK(resolve_threads(3) == 3);
    CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("chunked reduction does not depend on the thread count")
{
    const CounterRng root(11);
    auto run = [&](unsigned threads) {
        return chunked_reduce<MeanAccumulator>(10000, threads, root,
                                               [](MeanAccumulator &acc, CounterRng &rng, std::size_t, std::size_t n) {
                                                   for (std::size_t i = 0; i < n; ++i)
                                                       acc.add(rng.normal());
                                               });
    };
    const MeanAccumulator one = run(1), four = run(4), seven = run(7);
    CHECK(one.count() == 10000);
    CHECK(one.mean() == four.mean());
    CHECK(one.mean() == seven.mean());
    CHECK(one.variance() == seven.variance());
}
