#include "sleepssl/datasets/synth.hpp"

#include <cmath>

#include "sleepssl/rng.hpp"

namespace sleepssl {

namespace {

// Voss-McCartney pink noise: octave-rate random rows summed.
class PinkNoise {
  public:
    explicit PinkNoise(Rng& rng) : rng_(rng) {
        for (auto& r : rows_) r = draw();
    }
    float next() {
        ++counter_;
        for (int j = 0; j < kRows; ++j)
            if ((counter_ & ((1u << j) - 1)) == 0) rows_[j] = draw();
        float s = 0;
        for (float r : rows_) s += r;
        return s / kRows;
    }

  private:
    static constexpr int kRows = 8;
    float draw() {
        std::uniform_real_distribution<float> u(-1.0f, 1.0f);
        return u(rng_);
    }
    Rng& rng_;
    std::array<float, kRows> rows_{};
    unsigned counter_ = 0;
};

struct Oscillator {
    double freq, amp, phase;
};

Oscillator draw_osc(Rng& rng, double f_lo, double f_hi, double amp) {
    std::uniform_real_distribution<double> f(f_lo, f_hi);
    std::uniform_real_distribution<double> p(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> a(0.8, 1.2);
    return {f(rng), amp * a(rng), p(rng)};
}

}  // namespace

const StageMatrix& synth_transition_matrix() {
    // order: W, N1, N2, N3, REM
    static const StageMatrix m = {{
        {0.70, 0.20, 0.06, 0.02, 0.02},
        {0.10, 0.40, 0.40, 0.02, 0.08},
        {0.03, 0.05, 0.70, 0.15, 0.07},
        {0.02, 0.02, 0.25, 0.65, 0.06},
        {0.08, 0.10, 0.17, 0.02, 0.63},
    }};
    return m;
}

std::array<double, 5> synth_stationary_distribution() {
    const auto& t = synth_transition_matrix();
    std::array<double, 5> p{0.2, 0.2, 0.2, 0.2, 0.2};
    for (int iter = 0; iter < 2000; ++iter) {
        std::array<double, 5> next{};
        for (int j = 0; j < 5; ++j)
            for (int i = 0; i < 5; ++i) next[j] += p[i] * t[i][j];
        p = next;
    }
    return p;
}

EegEpoch synth_epoch(SleepStage stage, int sample_rate_hz, Rng& rng) {
    const int n = 30 * sample_rate_hz;
    std::vector<Oscillator> oscs;
    double pink_amp = 0.5;
    bool spindles = false;
    switch (stage) {
        case SleepStage::W:
            oscs.push_back(draw_osc(rng, 8, 12, 1.0));
            oscs.push_back(draw_osc(rng, 8, 12, 0.7));
            oscs.push_back(draw_osc(rng, 18, 25, 0.2));
            break;
        case SleepStage::N1:
            oscs.push_back(draw_osc(rng, 4, 8, 0.8));
            oscs.push_back(draw_osc(rng, 4, 8, 0.6));
            oscs.push_back(draw_osc(rng, 8, 12, 0.3));
            pink_amp = 0.6;
            break;
        case SleepStage::N2:
            oscs.push_back(draw_osc(rng, 4, 8, 0.7));
            oscs.push_back(draw_osc(rng, 4, 8, 0.5));
            spindles = true;
            break;
        case SleepStage::N3:
            oscs.push_back(draw_osc(rng, 0.5, 4, 2.5));
            oscs.push_back(draw_osc(rng, 0.5, 4, 2.0));
            oscs.push_back(draw_osc(rng, 4, 8, 0.3));
            break;
        case SleepStage::REM:
            oscs.push_back(draw_osc(rng, 4, 8, 0.4));
            oscs.push_back(draw_osc(rng, 15, 25, 0.3));
            pink_amp = 0.4;
            break;
    }

    PinkNoise pink(rng);
    std::vector<float> s(static_cast<std::size_t>(n), 0.0f);
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate_hz;
        double v = pink_amp * pink.next();
        for (const auto& o : oscs)
            v += o.amp * std::sin(2.0 * M_PI * o.freq * t + o.phase);
        s[static_cast<std::size_t>(i)] = static_cast<float>(v);
    }

    if (spindles) {
        std::uniform_int_distribution<int> count(2, 4);
        std::uniform_real_distribution<double> dur(0.5, 1.0);
        const int bursts = count(rng);
        for (int b = 0; b < bursts; ++b) {
            const double len_s = dur(rng);
            const int len = static_cast<int>(len_s * sample_rate_hz);
            std::uniform_int_distribution<int> start_d(0, n - len - 1);
            const int start = start_d(rng);
            Oscillator sp = draw_osc(rng, 12, 14, 1.5);
            for (int i = 0; i < len; ++i) {
                const double env =
                    0.5 * (1.0 - std::cos(2.0 * M_PI * i / (len - 1)));
                const double t =
                    static_cast<double>(start + i) / sample_rate_hz;
                s[static_cast<std::size_t>(start + i)] += static_cast<float>(
                    env * sp.amp * std::sin(2.0 * M_PI * sp.freq * t + sp.phase));
            }
        }
    }
    return EegEpoch(std::move(s), sample_rate_hz, stage);
}

std::vector<SubjectRecord> synth_generate(const SynthConfig& cfg) {
    if (cfg.n_subjects <= 0 || cfg.epochs_per_subject <= 0)
        throw std::invalid_argument("synth: counts must be positive");
    const auto stat = synth_stationary_distribution();
    const auto& trans = synth_transition_matrix();

    std::vector<SubjectRecord> out;
    out.reserve(static_cast<std::size_t>(cfg.n_subjects));
    for (int subj = 0; subj < cfg.n_subjects; ++subj) {
        Rng rng = make_rng(cfg.seed, "synth", static_cast<std::uint64_t>(subj));
        SubjectRecord rec;
        rec.subject_id = "synth-" + std::to_string(subj);
        rec.source = RecordSource::SYNTH;
        rec.sample_rate_hz = cfg.sample_rate_hz;

        std::discrete_distribution<int> init(stat.begin(), stat.end());
        int state = init(rng);
        for (int e = 0; e < cfg.epochs_per_subject; ++e) {
            rec.epochs.push_back(synth_epoch(static_cast<SleepStage>(state),
                                             cfg.sample_rate_hz, rng));
            std::discrete_distribution<int> step(trans[state].begin(),
                                                 trans[state].end());
            state = step(rng);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace sleepssl
