#include "doctest.h"

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>

#include "sleepssl/datasets/cache.hpp"
#include "sleepssl/datasets/edf.hpp"
#include "sleepssl/datasets/split.hpp"
#include "sleepssl/datasets/synth.hpp"

using namespace sleepssl;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> subject_ids(int n) {
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("s" + std::to_string(i));
    return ids;
}

// naive periodogram power in [f_lo, f_hi) Hz
double band_power(const std::vector<float>& x, int rate, double f_lo,
                  double f_hi) {
    const int n = static_cast<int>(x.size());
    double total = 0;
    for (int k = 1; k <= n / 2; ++k) {
        const double f = static_cast<double>(k) * rate / n;
        if (f < f_lo || f >= f_hi) continue;
        std::complex<double> acc = 0;
        for (int i = 0; i < n; ++i)
            acc += static_cast<double>(x[static_cast<std::size_t>(i)]) *
                   std::exp(std::complex<double>(0, -2.0 * M_PI * k * i / n));
        total += std::norm(acc);
    }
    return total;
}

int dft_peak_bin(const std::vector<float>& x) {
    const int n = static_cast<int>(x.size());
    double best = -1;
    int best_k = 0;
    for (int k = 1; k <= n / 2; ++k) {
        std::complex<double> acc = 0;
        for (int i = 0; i < n; ++i)
            acc += static_cast<double>(x[static_cast<std::size_t>(i)]) *
                   std::exp(std::complex<double>(0, -2.0 * M_PI * k * i / n));
        if (std::norm(acc) > best) {
            best = std::norm(acc);
            best_k = k;
        }
    }
    return best_k;
}

}  // namespace

TEST_CASE("subject splits have requested sizes and are deterministic") {
    auto s1 = split_subjects(subject_ids(78), 58, 10, 10, 7);
    CHECK(s1.pretext.size() == 58);
    CHECK(s1.train.size() == 10);
    CHECK(s1.test.size() == 10);

    auto s2 = split_subjects(subject_ids(326), 264, 31, 31, 7);
    CHECK(s2.pretext.size() == 264);
    CHECK(s2.train.size() == 31);
    CHECK(s2.test.size() == 31);

    auto s3 = split_subjects(subject_ids(78), 58, 10, 10, 7);
    CHECK(s1.pretext == s3.pretext);
    CHECK(s1.train == s3.train);
    CHECK(s1.test == s3.test);

    CHECK_NOTHROW(ensure_subject_disjoint(s1.pretext, s1.train, "test"));
    CHECK_NOTHROW(ensure_subject_disjoint(s1.train, s1.test, "test"));
    CHECK_THROWS_AS(ensure_subject_disjoint(s1.train, s1.train, "test"),
                    std::runtime_error);

    CHECK_THROWS_AS(split_subjects(subject_ids(10), 8, 2, 2, 1),
                    std::invalid_argument);
}

TEST_CASE("epoch segmentation drops the trailing partial window") {
    ContinuousRecording rec;
    rec.subject_id = "x";
    rec.sample_rate_hz = 100;
    rec.signal.assign(9000, 1.0f);  // 90 s
    CHECK(segment_epochs(rec).epochs.size() == 3);

    rec.signal.assign(8900, 1.0f);  // 89 s
    auto seg = segment_epochs(rec);
    CHECK(seg.epochs.size() == 2);
    CHECK(seg.epochs[0].length() == 3000);
    CHECK_FALSE(seg.epochs[0].has_label());
}

TEST_CASE("epoch labels align with a fixture hypnogram") {
    ContinuousRecording rec;
    rec.subject_id = "x";
    rec.sample_rate_hz = 100;
    rec.signal.assign(12000, 0.5f);  // 4 epochs
    rec.has_annotations = true;
    rec.stage_annotations = {{0.0, SleepStage::W},
                             {30.0, SleepStage::N1},
                             // 60..90 s unannotated -> dropped
                             {90.0, SleepStage::REM}};
    auto seg = segment_epochs(rec);
    REQUIRE(seg.epochs.size() == 3);
    CHECK(seg.epochs[0].label() == SleepStage::W);
    CHECK(seg.epochs[1].label() == SleepStage::N1);
    CHECK(seg.epochs[2].label() == SleepStage::REM);
}

TEST_CASE("resample length arithmetic and identity") {
    std::vector<float> x(37500, 0.0f);  // 5 min at 125 Hz
    CHECK(resample(x, 125, 100).size() == 30000);
    std::vector<float> y = {1, 2, 3};
    CHECK(resample(y, 100, 100) == y);
}

TEST_CASE("resample preserves a sinusoid's frequency") {
    const int from = 125, to = 100, secs = 30;
    std::vector<float> x(static_cast<std::size_t>(from) * secs);
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = static_cast<float>(
            std::sin(2.0 * M_PI * 10.0 * static_cast<double>(i) / from));
    auto y = resample(x, from, to);
    REQUIRE(y.size() == static_cast<std::size_t>(to) * secs);
    const int peak = dft_peak_bin(y);
    const double peak_hz = static_cast<double>(peak) / secs;
    CHECK(std::abs(peak_hz - 10.0) < 0.1);
}

TEST_CASE("synthetic data is seed deterministic") {
    SynthConfig cfg{2, 5, 123};
    auto a = synth_generate(cfg);
    auto b = synth_generate(cfg);
    REQUIRE(a.size() == 2);
    for (std::size_t s = 0; s < a.size(); ++s) {
        REQUIRE(a[s].epochs.size() == 5);
        for (std::size_t e = 0; e < 5; ++e) {
            CHECK(a[s].epochs[e].samples == b[s].epochs[e].samples);
            CHECK(a[s].epochs[e].label() == b[s].epochs[e].label());
        }
    }
    CHECK(a[0].epochs[0].length() == 3000);
}

TEST_CASE("synthetic N3 epochs are delta dominated") {
    Rng rng = make_rng(5, "n3");
    for (int i = 0; i < 10; ++i) {
        auto e = synth_epoch(SleepStage::N3, 100, rng);
        const double low = band_power(e.samples, 100, 0.01, 4.0);
        const double all = band_power(e.samples, 100, 0.01, 50.0);
        CHECK(low / all > 0.5);
    }
}

TEST_CASE("synthetic class histogram approaches the stationary distribution") {
    const auto stat = synth_stationary_distribution();
    double sum = 0;
    for (double p : stat) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    // 10k epochs; use short fake-rate epochs to keep generation cheap
    SynthConfig cfg{10, 1000, 11};
    cfg.sample_rate_hz = 2;
    auto recs = synth_generate(cfg);
    std::array<int, 5> counts{};
    int total = 0;
    for (const auto& r : recs)
        for (const auto& e : r.epochs) {
            counts[static_cast<std::size_t>(static_cast<int>(e.label()))]++;
            ++total;
        }
    for (int c = 0; c < 5; ++c) {
        const double frac = static_cast<double>(counts[
                                static_cast<std::size_t>(c)]) / total;
        CHECK(std::abs(frac - stat[static_cast<std::size_t>(c)]) < 0.05);
    }
}

TEST_CASE("cache round-trip is bit exact") {
    const auto dir = fs::temp_directory_path() / "sleepssl_cache_test";
    fs::remove_all(dir);

    SynthConfig cfg{2, 4, 42};
    auto recs = synth_generate(cfg);
    recs[1].epochs[2].set_label(std::nullopt);  // mixed labeled/unlabeled
    cache_write(recs, dir.string());
    auto back = cache_read(dir.string());
    REQUIRE(back.size() == recs.size());
    for (std::size_t s = 0; s < recs.size(); ++s) {
        CHECK(back[s].subject_id == recs[s].subject_id);
        CHECK(back[s].sample_rate_hz == recs[s].sample_rate_hz);
        REQUIRE(back[s].epochs.size() == recs[s].epochs.size());
        for (std::size_t e = 0; e < recs[s].epochs.size(); ++e) {
            CHECK(back[s].epochs[e].samples == recs[s].epochs[e].samples);
            CHECK(back[s].epochs[e].has_label() ==
                  recs[s].epochs[e].has_label());
        }
    }

    // empty record -> valid zero-epoch file
    SubjectRecord empty;
    empty.subject_id = "empty";
    cache_write({empty}, dir.string());
    auto loaded = cache_read_subjects(dir.string(), {"empty"});
    CHECK(loaded[0].epochs.empty());

    // corrupted sidecar -> explicit parse error
    std::ofstream bad(dir / "broken.json");
    bad << "{ not json";
    bad.close();
    CHECK_THROWS_WITH_AS(cache_read(dir.string()),
                         doctest::Contains("corrupted cache sidecar"),
                         std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("edf write/read round-trip within quantization") {
    const auto dir = fs::temp_directory_path() / "sleepssl_edf_test";
    fs::create_directories(dir);
    const std::string path = (dir / "fixture.edf").string();

    const int rate = 100;
    std::vector<float> sig(static_cast<std::size_t>(rate) * 90);
    for (std::size_t i = 0; i < sig.size(); ++i)
        sig[i] = 50.0f * static_cast<float>(
                     std::sin(2.0 * M_PI * 3.0 * static_cast<double>(i) / rate));
    write_edf(path, "EEG Fpz-Cz", sig, rate);

    auto rec = ingest_edf(path, "EEG Fpz-Cz");
    CHECK(rec.sample_rate_hz == rate);
    REQUIRE(rec.signal.size() == sig.size());
    const float quantum = 100.0f / 65535.0f;  // p2p / 16-bit range
    for (std::size_t i = 0; i < sig.size(); ++i)
        CHECK(std::abs(rec.signal[i] - sig[i]) <= 1.5f * quantum);
    CHECK_FALSE(rec.has_annotations);
    fs::remove_all(dir);
}

TEST_CASE("edf missing channel error lists available channels") {
    const auto dir = fs::temp_directory_path() / "sleepssl_edf_test2";
    fs::create_directories(dir);
    const std::string path = (dir / "f.edf").string();
    std::vector<float> sig(3000, 0.0f);
    write_edf(path, "EEG C4-A1", sig, 100);
    CHECK_THROWS_WITH_AS(ingest_edf(path, "EEG Fpz-Cz"),
                         doctest::Contains("EEG C4-A1"), std::runtime_error);
    CHECK_THROWS_AS(ingest_edf((dir / "nope.edf").string(), "x"),
                    std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("edf hypnogram annotations drive epoch labels") {
    const auto dir = fs::temp_directory_path() / "sleepssl_edf_test3";
    fs::create_directories(dir);
    const std::string path = (dir / "h.edf").string();

    const int rate = 125;  // SHHS-style rate
    std::vector<float> sig(static_cast<std::size_t>(rate) * 120, 0.0f);
    for (std::size_t i = 0; i < sig.size(); ++i)
        sig[i] = static_cast<float>(std::sin(0.01 * static_cast<double>(i)));
    std::vector<SleepStage> hyp = {SleepStage::W, SleepStage::N2,
                                   SleepStage::N3, SleepStage::REM};
    write_edf(path, "EEG C4-A1", sig, rate, &hyp);

    auto rec = ingest_edf(path, "EEG C4-A1");
    CHECK(rec.sample_rate_hz == 125);
    REQUIRE(rec.has_annotations);
    REQUIRE(rec.stage_annotations.size() == 4);

    // full pipeline: resample to 100 Hz then epoch with labels
    rec.signal = resample(rec.signal, 125, 100);
    rec.sample_rate_hz = 100;
    auto seg = segment_epochs(rec);
    REQUIRE(seg.epochs.size() == 4);
    CHECK(seg.epochs[0].label() == SleepStage::W);
    CHECK(seg.epochs[1].label() == SleepStage::N2);
    CHECK(seg.epochs[2].label() == SleepStage::N3);
    CHECK(seg.epochs[3].label() == SleepStage::REM);
    CHECK(seg.epochs[0].length() == 3000);
    fs::remove_all(dir);
}
