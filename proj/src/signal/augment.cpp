#include "sleepssl/signal/augment.hpp"

#include <algorithm>
#include <cmath>

namespace sleepssl {

namespace {
std::atomic<std::uint64_t> g_label_reads{0};
}

std::uint64_t label_access_count() { return g_label_reads.load(); }
void bump_label_access() { g_label_reads.fetch_add(1); }

EegEpoch jitter(const EegEpoch& epoch, float ratio, Rng& rng) {
    epoch.validate();
    if (!(ratio > 0.0f && ratio < 1.0f))
        throw std::invalid_argument("jitter ratio must be in (0,1)");
    auto [mn, mx] = std::minmax_element(epoch.samples.begin(), epoch.samples.end());
    const float p2p = *mx - *mn;
    if (p2p == 0.0f) return epoch;
    EegEpoch out = epoch;
    std::uniform_real_distribution<float> u(-ratio * p2p, ratio * p2p);
    for (float& v : out.samples) v += u(rng);
    return out;
}

EegEpoch mask(const EegEpoch& epoch, int segments, float max_fraction, Rng& rng) {
    epoch.validate();
    if (!(max_fraction > 0.0f && max_fraction < 1.0f))
        throw std::invalid_argument("mask max_fraction must be in (0,1)");
    if (segments < 0) throw std::invalid_argument("mask segments must be >= 0");
    EegEpoch out = epoch;
    if (segments == 0) return out;

    const int n = static_cast<int>(epoch.samples.size());
    const int budget = static_cast<int>(max_fraction * n);
    // Per-segment cap keeps total masked length within budget even when all
    // segments draw the maximum.
    const int seg_cap = std::max(1, budget / segments);
    if (segments > budget)
        throw std::invalid_argument("mask: segments * min length exceeds budget");

    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    std::uniform_int_distribution<int> len_dist(1, seg_cap);
    std::uniform_int_distribution<int> pos_dist(0, n - 1);
    int placed = 0, attempts = 0;
    // Rejection sampling for non-overlapping runs; the budget guarantees
    // enough room, the attempt cap is a safety stop for pathological draws.
    while (placed < segments && attempts < 10000) {
        ++attempts;
        int len = len_dist(rng);
        int start = pos_dist(rng);
        if (start + len > n) continue;
        bool free = true;
        for (int i = start; i < start + len; ++i)
            if (taken[static_cast<std::size_t>(i)]) { free = false; break; }
        if (!free) continue;
        for (int i = start; i < start + len; ++i) {
            taken[static_cast<std::size_t>(i)] = 1;
            out.samples[static_cast<std::size_t>(i)] = 0.0f;
        }
        ++placed;
    }
    if (placed < segments)
        throw std::runtime_error("mask: could not place non-overlapping segments");
    return out;
}

EegEpoch flip(const EegEpoch& epoch, float probability, Rng& rng, bool sign_instead) {
    epoch.validate();
    if (probability < 0.0f || probability > 1.0f)
        throw std::invalid_argument("flip probability must be in [0,1]");
    EegEpoch out = epoch;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < static_cast<double>(probability)) {
        if (sign_instead)
            for (float& v : out.samples) v = -v;
        else
            std::reverse(out.samples.begin(), out.samples.end());
    }
    return out;
}

EegEpoch scale(const EegEpoch& epoch, float sigma, Rng& rng) {
    epoch.validate();
    if (!(sigma > 0.0f)) throw std::invalid_argument("scale sigma must be > 0");
    std::normal_distribution<float> n(1.0f, sigma);
    const float s = std::clamp(n(rng), 0.1f, 2.0f);
    EegEpoch out = epoch;
    for (float& v : out.samples) v *= s;
    return out;
}

EegEpoch augment_t1(const EegEpoch& epoch, const AugmentationConfig& cfg, Rng& rng) {
    EegEpoch j = jitter(epoch, cfg.jitter_ratio, rng);
    return mask(j, cfg.mask_segments, cfg.mask_max_fraction, rng);
}

EegEpoch augment_t2(const EegEpoch& epoch, const AugmentationConfig& cfg, Rng& rng) {
    EegEpoch f = flip(epoch, cfg.flip_probability, rng, cfg.flip_sign_instead);
    return scale(f, cfg.scale_sigma, rng);
}

}  // namespace sleepssl
