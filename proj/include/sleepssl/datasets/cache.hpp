#pragma once

#include "sleepssl/datasets/types.hpp"

namespace sleepssl {

// On-disk cache: per subject a raw little-endian float32 file with all
// epochs concatenated, plus a JSON sidecar (subject_id, n_epochs, labels,
// rate). read(write(x)) is bit-exact. Files are written atomically.
void cache_write(const std::vector<SubjectRecord>& records,
                 const std::string& dir);
std::vector<SubjectRecord> cache_read(const std::string& dir);

// Load only the named subjects (order follows `ids`).
std::vector<SubjectRecord> cache_read_subjects(
    const std::string& dir, const std::vector<std::string>& ids);

}  // namespace sleepssl
