#include "sleepssl/signal/stft.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace sleepssl {

namespace {

// FFTW plan creation is not thread-safe; execution with per-call buffers is.
std::mutex g_plan_mutex;

struct RealFft {
    int n;
    fftw_plan plan;
    double* in;
    fftw_complex* out;

    explicit RealFft(int n_) : n(n_) {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        in = fftw_alloc_real(static_cast<std::size_t>(n));
        out = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
        plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    }
    ~RealFft() {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        fftw_destroy_plan(plan);
        fftw_free(in);
        fftw_free(out);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;
};

}  // namespace

Spectrogram stft_spectrogram(const EegEpoch& epoch, int n_fft, int hop) {
    epoch.validate();
    const int len = static_cast<int>(epoch.samples.size());
    if (len < n_fft)
        throw std::invalid_argument("stft: signal shorter than one fft window");
    if (hop <= 0) throw std::invalid_argument("stft: hop must be positive");

    Spectrogram spec;
    spec.n_fft = n_fft;
    spec.hop = hop;
    spec.frames = (len - n_fft) / hop + 1;
    spec.bins = n_fft / 2 + 1;
    spec.magnitudes.assign(
        static_cast<std::size_t>(spec.frames) * spec.bins, 0.0f);

    std::vector<double> hann(static_cast<std::size_t>(n_fft));
    for (int i = 0; i < n_fft; ++i)
        hann[static_cast<std::size_t>(i)] =
            0.5 * (1.0 - std::cos(2.0 * M_PI * i / (n_fft - 1)));

    thread_local std::unique_ptr<RealFft> fft;
    if (!fft || fft->n != n_fft) fft = std::make_unique<RealFft>(n_fft);

    for (int f = 0; f < spec.frames; ++f) {
        const int off = f * hop;
        for (int i = 0; i < n_fft; ++i)
            fft->in[i] = static_cast<double>(epoch.samples[
                             static_cast<std::size_t>(off + i)]) *
                         hann[static_cast<std::size_t>(i)];
        fftw_execute(fft->plan);
        for (int b = 0; b < spec.bins; ++b) {
            const double re = fft->out[b][0];
            const double im = fft->out[b][1];
            const double mag = std::sqrt(re * re + im * im);
            spec.magnitudes[static_cast<std::size_t>(f) * spec.bins + b] =
                static_cast<float>(std::log1p(mag));
        }
    }
    return spec;
}

}  // namespace sleepssl
