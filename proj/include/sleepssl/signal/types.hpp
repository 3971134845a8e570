#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sleepssl {

enum class SleepStage : int { W = 0, N1 = 1, N2 = 2, N3 = 3, REM = 4 };
inline constexpr int kNumStages = 5;

inline const char* stage_name(SleepStage s) {
    switch (s) {
        case SleepStage::W: return "W";
        case SleepStage::N1: return "N1";
        case SleepStage::N2: return "N2";
        case SleepStage::N3: return "N3";
        case SleepStage::REM: return "REM";
    }
    return "?";
}

// Counts every label read so the pretraining paths can prove they never
// touched annotations (supervised training is the one exception).
std::uint64_t label_access_count();
void bump_label_access();

// One 30 s single-channel EEG segment. Canonical epochs are 3000 samples at
// 100 Hz; the augmentations work on any non-empty length.
struct EegEpoch {
    std::vector<float> samples;
    int sample_rate_hz = 100;

    EegEpoch() = default;
    EegEpoch(std::vector<float> s, int rate = 100,
             std::optional<SleepStage> lbl = std::nullopt)
        : samples(std::move(s)), sample_rate_hz(rate), label_(lbl) {}

    std::size_t length() const { return samples.size(); }

    bool has_label() const { return label_.has_value(); }
    SleepStage label() const {
        bump_label_access();
        if (!label_) throw std::runtime_error("epoch has no label");
        return *label_;
    }
    void set_label(std::optional<SleepStage> l) { label_ = l; }

    void validate() const {
        if (samples.empty()) throw std::invalid_argument("empty epoch");
        for (float v : samples)
            if (!std::isfinite(v))
                throw std::invalid_argument("non-finite sample in epoch");
    }

  private:
    std::optional<SleepStage> label_;
};

// Time-frequency magnitudes, [frames x bins], log(1+|stft|) compressed.
struct Spectrogram {
    int frames = 0;
    int bins = 0;
    int n_fft = 256;
    int hop = 64;
    std::vector<float> magnitudes;  // row-major frames x bins

    float at(int f, int b) const {
        return magnitudes[static_cast<std::size_t>(f) * bins + b];
    }
};

struct AugmentationConfig {
    float jitter_ratio = 0.1f;
    int mask_segments = 5;
    float mask_max_fraction = 0.2f;
    float flip_probability = 0.5f;
    bool flip_sign_instead = false;  // optional variant: amplitude inversion
    float scale_sigma = 0.5f;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(jitter_ratio > 0.0f && jitter_ratio < 1.0f))
            throw std::invalid_argument("jitter_ratio must be in (0,1)");
        if (mask_segments < 0)
            throw std::invalid_argument("mask_segments must be >= 0");
        if (!(mask_max_fraction > 0.0f && mask_max_fraction < 1.0f))
            throw std::invalid_argument("mask_max_fraction must be in (0,1)");
        if (flip_probability < 0.0f || flip_probability > 1.0f)
            throw std::invalid_argument("flip_probability must be in [0,1]");
        if (!(scale_sigma > 0.0f))
            throw std::invalid_argument("scale_sigma must be > 0");
    }
};

}  // namespace sleepssl
