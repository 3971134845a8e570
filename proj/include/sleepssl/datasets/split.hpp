#pragma once

#include "sleepssl/datasets/types.hpp"

namespace sleepssl {

// Deterministic subject-level split: shuffle under the seed, then take the
// requested pretext/train/test counts in order.
DatasetSplit split_subjects(std::vector<std::string> subjects, int n_pretext,
                            int n_train, int n_test, std::uint64_t seed);

// Throws when any subject id appears in more than one of the given groups.
// Every evaluation entry point runs this before fitting anything.
void ensure_subject_disjoint(const std::vector<std::string>& a,
                             const std::vector<std::string>& b,
                             const char* context);

// 30 s non-overlapping epoching; the trailing partial window is dropped.
// When the recording carries annotations, epochs take their stage label and
// unannotated epochs are dropped; otherwise epochs stay unlabeled.
SubjectRecord segment_epochs(const ContinuousRecording& rec);

// Fourier resampling; output length = round(len * to / from).
std::vector<float> resample(const std::vector<float>& signal, int from_hz,
                            int to_hz);

}  // namespace sleepssl
