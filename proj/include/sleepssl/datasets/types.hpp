#pragma once

#include <string>
#include <vector>

#include "sleepssl/signal/types.hpp"

namespace sleepssl {

enum class RecordSource { EDF, SYNTH };

struct SubjectRecord {
    std::string subject_id;
    std::vector<EegEpoch> epochs;
    RecordSource source = RecordSource::SYNTH;
    int sample_rate_hz = 100;
};

// Continuous signal before epoching, as ingested from a file. Stage
// annotations are (onset seconds, stage) pairs covering 30 s each.
struct ContinuousRecording {
    std::string subject_id;
    std::vector<float> signal;
    int sample_rate_hz = 100;
    RecordSource source = RecordSource::EDF;
    std::vector<std::pair<double, SleepStage>> stage_annotations;
    bool has_annotations = false;
};

struct DatasetSplit {
    std::vector<std::string> pretext;
    std::vector<std::string> train;
    std::vector<std::string> test;
    std::uint64_t seed = 0;
};

}  // namespace sleepssl
