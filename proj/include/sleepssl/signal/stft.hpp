#pragma once

#include "sleepssl/signal/types.hpp"

namespace sleepssl {

// Short-time Fourier magnitude: Hann window, no center padding, one-sided
// spectrum, log(1+|.|) compression. frames = floor((L - n_fft)/hop) + 1,
// bins = n_fft/2 + 1. Throws if the signal is shorter than one window.
Spectrogram stft_spectrogram(const EegEpoch& epoch, int n_fft = 256,
                             int hop = 64);

}  // namespace sleepssl
