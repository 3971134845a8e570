#pragma once

#include "sleepssl/datasets/types.hpp"

namespace sleepssl {

// Reads one channel of a 16-bit European Data Format file into a continuous
// recording, picking up sleep-stage annotations from an "EDF Annotations"
// track when present. Throws with the list of available channels when the
// requested one is missing.
ContinuousRecording ingest_edf(const std::string& path,
                               const std::string& channel);

// Minimal EDF(+) writer used for fixtures and interchange: one data channel
// (16-bit, physical range from the signal), 30 s records, and an optional
// hypnogram written as one stage annotation per 30 s.
void write_edf(const std::string& path, const std::string& channel,
               const std::vector<float>& signal, int sample_rate_hz,
               const std::vector<SleepStage>* hypnogram = nullptr);

}  // namespace sleepssl
