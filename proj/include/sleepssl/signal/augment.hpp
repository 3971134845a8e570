#pragma once

#include "sleepssl/rng.hpp"
#include "sleepssl/signal/types.hpp"

namespace sleepssl {

// Augmentation family T1: jitter then mask.
// Augmentation family T2: flip then scale.
// Every op is pure given (input, rng state); identical seeds give
// bit-identical outputs.

// Adds per-sample uniform noise in [-ratio*p2p, +ratio*p2p] where p2p is the
// peak-to-peak amplitude of the input. A constant signal (p2p == 0) is
// returned unchanged.
EegEpoch jitter(const EegEpoch& epoch, float ratio, Rng& rng);

// Zeroes `segments` non-overlapping contiguous runs; total masked length is
// at most max_fraction * L. Unmasked samples are untouched.
EegEpoch mask(const EegEpoch& epoch, int segments, float max_fraction,
              Rng& rng);

// With the given probability reverses the time axis (or inverts the sign when
// sign_instead is set).
EegEpoch flip(const EegEpoch& epoch, float probability, Rng& rng,
              bool sign_instead = false);

// Multiplies the whole epoch by one scalar drawn from N(1, sigma^2), clipped
// to [0.1, 2.0].
EegEpoch scale(const EegEpoch& epoch, float sigma, Rng& rng);

EegEpoch augment_t1(const EegEpoch& epoch, const AugmentationConfig& cfg,
                    Rng& rng);
EegEpoch augment_t2(const EegEpoch& epoch, const AugmentationConfig& cfg,
                    Rng& rng);

}  // namespace sleepssl
