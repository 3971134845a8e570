#include "doctest.h"

#include <cmath>
#include <complex>

#include "sleepssl/signal/augment.hpp"
#include "sleepssl/signal/stft.hpp"

using namespace sleepssl;

namespace {

EegEpoch ramp_epoch(int n) {
    std::vector<float> s(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        s[static_cast<std::size_t>(i)] = static_cast<float>(i) / (n - 1);
    return EegEpoch(std::move(s));
}

EegEpoch random_epoch(int n, Rng& rng) {
    std::normal_distribution<float> d(0.0f, 1.0f);
    std::vector<float> s(static_cast<std::size_t>(n));
    for (auto& v : s) v = d(rng);
    return EegEpoch(std::move(s));
}

// Direct O(L * n_fft) DFT spectrogram, independent of the fft path.
Spectrogram naive_spectrogram(const EegEpoch& e, int n_fft, int hop) {
    const int len = static_cast<int>(e.samples.size());
    Spectrogram sp;
    sp.n_fft = n_fft;
    sp.hop = hop;
    sp.frames = (len - n_fft) / hop + 1;
    sp.bins = n_fft / 2 + 1;
    sp.magnitudes.assign(static_cast<std::size_t>(sp.frames) * sp.bins, 0.0f);
    for (int f = 0; f < sp.frames; ++f)
        for (int b = 0; b < sp.bins; ++b) {
            std::complex<double> acc = 0.0;
            for (int i = 0; i < n_fft; ++i) {
                const double w =
                    0.5 * (1.0 - std::cos(2.0 * M_PI * i / (n_fft - 1)));
                const double x = e.samples[static_cast<std::size_t>(f * hop + i)] * w;
                const double ang = -2.0 * M_PI * b * i / n_fft;
                acc += x * std::complex<double>(std::cos(ang), std::sin(ang));
            }
            sp.magnitudes[static_cast<std::size_t>(f) * sp.bins + b] =
                static_cast<float>(std::log1p(std::abs(acc)));
        }
    return sp;
}

}  // namespace

TEST_CASE("jitter keeps constant signals and respects the p2p bound") {
    Rng rng = make_rng(1, "aug");
    EegEpoch constant(std::vector<float>{5, 5, 5, 5});
    auto out = jitter(constant, 0.3f, rng);
    CHECK(out.samples == constant.samples);

    EegEpoch e(std::vector<float>{-1, 0, 1});  // p2p = 2
    for (int i = 0; i < 50; ++i) {
        auto j = jitter(e, 0.1f, rng);
        for (std::size_t k = 0; k < e.samples.size(); ++k)
            CHECK(std::abs(j.samples[k] - e.samples[k]) <= 0.2f + 1e-7f);
    }
}

TEST_CASE("jitter rejects empty epochs and bad ratios") {
    Rng rng = make_rng(1, "aug");
    CHECK_THROWS_AS(jitter(EegEpoch{}, 0.1f, rng), std::invalid_argument);
    EegEpoch e(std::vector<float>{1, 2});
    CHECK_THROWS_AS(jitter(e, 0.0f, rng), std::invalid_argument);
    CHECK_THROWS_AS(jitter(e, 1.5f, rng), std::invalid_argument);
}

TEST_CASE("jitter is seed deterministic") {
    EegEpoch e = ramp_epoch(3000);
    Rng a = make_rng(42, "aug");
    Rng b = make_rng(42, "aug");
    CHECK(jitter(e, 0.05f, a).samples == jitter(e, 0.05f, b).samples);
}

TEST_CASE("mask zero-fills bounded non-overlapping runs") {
    Rng rng = make_rng(7, "aug");
    EegEpoch e = ramp_epoch(3000);
    for (auto& v : e.samples) v += 1.0f;  // keep all samples nonzero

    auto ident = mask(e, 0, 0.2f, rng);
    CHECK(ident.samples == e.samples);

    auto m = mask(e, 3, 0.2f, rng);
    int changed = 0;
    for (std::size_t i = 0; i < e.samples.size(); ++i) {
        if (m.samples[i] != e.samples[i]) {
            CHECK(m.samples[i] == 0.0f);
            ++changed;
        }
    }
    CHECK(changed > 0);
    CHECK(changed <= static_cast<int>(0.2f * 3000));

    Rng r1 = make_rng(7, "aug");
    Rng r2 = make_rng(7, "aug");
    CHECK(mask(e, 3, 0.2f, r1).samples == mask(e, 3, 0.2f, r2).samples);
}

TEST_CASE("mask rejects infeasible segment counts") {
    Rng rng = make_rng(7, "aug");
    EegEpoch e = ramp_epoch(10);
    CHECK_THROWS_AS(mask(e, 5, 0.2f, rng), std::invalid_argument);
}

TEST_CASE("flip reverses, is an involution, and honors probability 0") {
    Rng rng = make_rng(3, "aug");
    EegEpoch e(std::vector<float>{1, 2, 3});
    auto f = flip(e, 1.0f, rng);
    CHECK(f.samples == std::vector<float>{3, 2, 1});
    auto ff = flip(f, 1.0f, rng);
    CHECK(ff.samples == e.samples);
    auto id = flip(e, 0.0f, rng);
    CHECK(id.samples == e.samples);
}

TEST_CASE("flip sign variant inverts amplitudes") {
    Rng rng = make_rng(3, "aug");
    EegEpoch e(std::vector<float>{1, -2, 3});
    auto f = flip(e, 1.0f, rng, /*sign_instead=*/true);
    CHECK(f.samples == std::vector<float>{-1, 2, -3});
}

TEST_CASE("scale applies one scalar per epoch") {
    Rng rng = make_rng(3, "aug");
    EegEpoch e = ramp_epoch(100);
    for (auto& v : e.samples) v += 0.5f;
    auto s = scale(e, 0.5f, rng);
    const float ratio = s.samples[10] / e.samples[10];
    for (std::size_t i = 0; i < e.samples.size(); ++i)
        CHECK(s.samples[i] == doctest::Approx(e.samples[i] * ratio).epsilon(1e-6));
    CHECK(ratio >= 0.1f);
    CHECK(ratio <= 2.0f);

    Rng r1 = make_rng(3, "aug");
    Rng r2 = make_rng(3, "aug");
    CHECK(scale(e, 0.5f, r1).samples == scale(e, 0.5f, r2).samples);

    // sigma -> 0+ limit is the identity
    Rng r3 = make_rng(3, "aug");
    auto id = scale(e, 1e-12f, r3);
    CHECK(id.samples == e.samples);
}

TEST_CASE("augmentation families compose and stay deterministic") {
    AugmentationConfig cfg;
    cfg.jitter_ratio = 1e-7f;
    cfg.mask_segments = 0;
    EegEpoch e = ramp_epoch(3000);
    Rng rng = make_rng(5, "aug");
    auto t1 = augment_t1(e, cfg, rng);
    for (std::size_t i = 0; i < e.samples.size(); ++i)
        CHECK(t1.samples[i] == doctest::Approx(e.samples[i]).epsilon(1e-5));

    AugmentationConfig c2;
    c2.flip_probability = 1.0f;
    c2.scale_sigma = 1e-12f;
    EegEpoch small(std::vector<float>{1, 2, 3});
    Rng r2 = make_rng(5, "aug");
    auto t2 = augment_t2(small, c2, r2);
    CHECK(t2.samples == std::vector<float>{3, 2, 1});

    AugmentationConfig c3;  // defaults
    Rng ra = make_rng(9, "aug");
    Rng rb = make_rng(9, "aug");
    CHECK(augment_t1(e, c3, ra).samples == augment_t1(e, c3, rb).samples);
    Rng rc = make_rng(9, "aug");
    Rng rd = make_rng(9, "aug");
    CHECK(augment_t2(e, c3, rc).samples == augment_t2(e, c3, rd).samples);
}

TEST_CASE("augmentations preserve length and sample rate (property)") {
    AugmentationConfig cfg;
    Rng rng = make_rng(11, "prop");
    for (int i = 0; i < 200; ++i) {
        EegEpoch e = random_epoch(300, rng);
        auto a = augment_t1(e, cfg, rng);
        auto b = augment_t2(e, cfg, rng);
        CHECK(a.length() == e.length());
        CHECK(b.length() == e.length());
        CHECK(a.sample_rate_hz == e.sample_rate_hz);
        CHECK(b.sample_rate_hz == e.sample_rate_hz);
    }
}

TEST_CASE("stft shape and trivial zero case") {
    EegEpoch e(std::vector<float>(3000, 0.0f));
    auto sp = stft_spectrogram(e, 256, 64);
    CHECK(sp.frames == 43);
    CHECK(sp.bins == 129);
    for (float v : sp.magnitudes) CHECK(v == 0.0f);

    EegEpoch tiny(std::vector<float>(100, 1.0f));
    CHECK_THROWS_AS(stft_spectrogram(tiny, 256, 64), std::invalid_argument);
}

TEST_CASE("stft of a bin-centered sinusoid peaks at that bin") {
    const int n_fft = 256, hop = 64, len = 3000, bin = 10;
    std::vector<float> s(len);
    for (int i = 0; i < len; ++i)
        s[static_cast<std::size_t>(i)] = static_cast<float>(
            std::sin(2.0 * M_PI * bin * i / n_fft));
    auto sp = stft_spectrogram(EegEpoch(std::move(s)), n_fft, hop);
    for (int f = 0; f < sp.frames; ++f) {
        int argmax = 0;
        for (int b = 1; b < sp.bins; ++b)
            if (sp.at(f, b) > sp.at(f, argmax)) argmax = b;
        CHECK(argmax == bin);
    }
}

TEST_CASE("stft matches a naive dft oracle") {
    Rng rng = make_rng(13, "stft");
    for (int trial = 0; trial < 5; ++trial) {
        EegEpoch e = random_epoch(512, rng);
        auto fast = stft_spectrogram(e, 256, 64);
        auto slow = naive_spectrogram(e, 256, 64);
        REQUIRE(fast.frames == slow.frames);
        REQUIRE(fast.bins == slow.bins);
        for (std::size_t i = 0; i < fast.magnitudes.size(); ++i) {
            const double a = fast.magnitudes[i], b = slow.magnitudes[i];
            CHECK(std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(b)));
        }
    }
}
