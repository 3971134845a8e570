#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sleepssl/signal/types.hpp"

namespace sleepssl {

struct MetricSet {
    double accuracy = 0;
    double kappa = 0;
    double macro_f1 = 0;
    std::array<double, kNumStages> per_class_f1{};
    std::array<std::array<std::int64_t, kNumStages>, kNumStages>
        confusion{};  // [true][pred]
};

// Accuracy, Cohen's kappa and macro F1 over the 5 stage classes. A class
// absent from both truth and prediction contributes F1 = 0 to the macro
// average. Degenerate agreement (expected agreement 1) maps to kappa = 1
// when predictions equal labels and 0 otherwise.
MetricSet compute_metrics(const std::vector<int>& y_true,
                          const std::vector<int>& y_pred);

}  // namespace sleepssl
