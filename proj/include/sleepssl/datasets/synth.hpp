#pragma once

#include <array>

#include "sleepssl/datasets/types.hpp"
#include "sleepssl/rng.hpp"

namespace sleepssl {

// Stage-conditioned synthetic sleep EEG: each stage has a characteristic
// spectral recipe (alpha-dominant wake, theta for N1, theta + spindle bursts
// for N2, high-amplitude delta for N3, low-amplitude mixed theta/beta REM)
// over pink noise, and the stage sequence follows a fixed Markov chain.
struct SynthConfig {
    int n_subjects = 8;
    int epochs_per_subject = 120;
    std::uint64_t seed = 0;
    int sample_rate_hz = 100;
};

using StageMatrix = std::array<std::array<double, 5>, 5>;

// Fixture transition matrix (rows sum to 1, order W, N1, N2, N3, REM).
const StageMatrix& synth_transition_matrix();

// Stationary distribution of the transition matrix (power iteration).
std::array<double, 5> synth_stationary_distribution();

std::vector<SubjectRecord> synth_generate(const SynthConfig& cfg);

// One labeled epoch; exposed for tests probing the per-stage spectra.
EegEpoch synth_epoch(SleepStage stage, int sample_rate_hz, Rng& rng);

}  // namespace sleepssl
