#include "sleepssl/datasets/split.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <fftw3.h>

#include "sleepssl/rng.hpp"

namespace sleepssl {

DatasetSplit split_subjects(std::vector<std::string> subjects, int n_pretext,
                            int n_train, int n_test, std::uint64_t seed) {
    if (n_pretext < 0 || n_train < 0 || n_test < 0)
        throw std::invalid_argument("split: negative group size");
    if (static_cast<std::size_t>(n_pretext) + n_train + n_test > subjects.size())
        throw std::invalid_argument(
            "split: group sizes exceed the number of subjects");
    Rng rng = make_rng(seed, "split");
    std::shuffle(subjects.begin(), subjects.end(), rng);
    DatasetSplit out;
    out.seed = seed;
    auto it = subjects.begin();
    out.pretext.assign(it, it + n_pretext);
    it += n_pretext;
    out.train.assign(it, it + n_train);
    it += n_train;
    out.test.assign(it, it + n_test);
    return out;
}

void ensure_subject_disjoint(const std::vector<std::string>& a,
                             const std::vector<std::string>& b,
                             const char* context) {
    std::set<std::string> seen(a.begin(), a.end());
    for (const auto& id : b)
        if (seen.count(id))
            throw std::runtime_error(std::string("subject leakage in ") +
                                     context + ": " + id +
                                     " appears in both groups");
}

SubjectRecord segment_epochs(const ContinuousRecording& rec) {
    if (rec.sample_rate_hz <= 0)
        throw std::invalid_argument("segment: invalid sample rate");
    const int epoch_len = 30 * rec.sample_rate_hz;
    const int n_epochs = static_cast<int>(rec.signal.size()) / epoch_len;

    SubjectRecord out;
    out.subject_id = rec.subject_id;
    out.source = rec.source;
    out.sample_rate_hz = rec.sample_rate_hz;

    for (int e = 0; e < n_epochs; ++e) {
        const double onset = 30.0 * e;
        std::optional<SleepStage> label;
        if (rec.has_annotations) {
            for (const auto& [t, stage] : rec.stage_annotations)
                if (onset >= t - 1e-9 && onset < t + 30.0 - 1e-9) {
                    label = stage;
                    break;
                }
            if (!label) continue;  // unannotated/movement epochs are dropped
        }
        std::vector<float> samples(
            rec.signal.begin() + static_cast<std::ptrdiff_t>(e) * epoch_len,
            rec.signal.begin() + static_cast<std::ptrdiff_t>(e + 1) * epoch_len);
        out.epochs.emplace_back(std::move(samples), rec.sample_rate_hz, label);
    }
    return out;
}

std::vector<float> resample(const std::vector<float>& signal, int from_hz,
                            int to_hz) {
    if (from_hz <= 0 || to_hz <= 0)
        throw std::invalid_argument("resample: rates must be positive");
    if (from_hz == to_hz) return signal;
    const int n = static_cast<int>(signal.size());
    if (n == 0) return {};
    const int m = static_cast<int>(
        std::llround(static_cast<double>(n) * to_hz / from_hz));
    if (m == 0) return {};

    std::vector<double> in(signal.begin(), signal.end());
    std::vector<double> spec_re(static_cast<std::size_t>(n) + 2, 0.0);
    fftw_plan fwd = fftw_plan_dft_r2c_1d(
        n, in.data(), reinterpret_cast<fftw_complex*>(spec_re.data()),
        FFTW_ESTIMATE);
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);

    const int bins_in = n / 2 + 1;
    const int bins_out = m / 2 + 1;
    std::vector<double> spec_out(2 * static_cast<std::size_t>(bins_out), 0.0);
    const int keep = std::min(bins_in, bins_out);
    for (int b = 0; b < keep; ++b) {
        spec_out[2 * static_cast<std::size_t>(b)] =
            spec_re[2 * static_cast<std::size_t>(b)];
        spec_out[2 * static_cast<std::size_t>(b) + 1] =
            spec_re[2 * static_cast<std::size_t>(b) + 1];
    }
    std::vector<double> out(static_cast<std::size_t>(m));
    fftw_plan bwd = fftw_plan_dft_c2r_1d(
        m, reinterpret_cast<fftw_complex*>(spec_out.data()), out.data(),
        FFTW_ESTIMATE);
    fftw_execute(bwd);
    fftw_destroy_plan(bwd);

    std::vector<float> result(static_cast<std::size_t>(m));
    const double scale = 1.0 / n;  // c2r is unnormalized
    for (int i = 0; i < m; ++i)
        result[static_cast<std::size_t>(i)] =
            static_cast<float>(out[static_cast<std::size_t>(i)] * scale);
    return result;
}

}  // namespace sleepssl
