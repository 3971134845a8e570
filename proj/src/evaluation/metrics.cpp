#include "sleepssl/evaluation/metrics.hpp"

#include <stdexcept>

namespace sleepssl {

MetricSet compute_metrics(const std::vector<int>& y_true,
                          const std::vector<int>& y_pred) {
    if (y_true.empty() || y_true.size() != y_pred.size())
        throw std::invalid_argument(
            "compute_metrics: need equal non-empty label vectors");

    MetricSet m;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i], p = y_pred[i];
        if (t < 0 || t >= kNumStages || p < 0 || p >= kNumStages)
            throw std::invalid_argument("compute_metrics: label out of range");
        m.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]++;
    }

    const double n = static_cast<double>(y_true.size());
    double trace = 0, pe = 0;
    for (int k = 0; k < kNumStages; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        trace += static_cast<double>(m.confusion[uk][uk]);
        double row = 0, col = 0;
        for (int j = 0; j < kNumStages; ++j) {
            row += static_cast<double>(m.confusion[uk][static_cast<std::size_t>(j)]);
            col += static_cast<double>(m.confusion[static_cast<std::size_t>(j)][uk]);
        }
        pe += (row / n) * (col / n);

        const double tp = static_cast<double>(m.confusion[uk][uk]);
        const double denom = row + col;  // 2TP + FP + FN
        m.per_class_f1[uk] = denom > 0 ? 2.0 * tp / denom : 0.0;
        m.macro_f1 += m.per_class_f1[uk] / kNumStages;
    }

    m.accuracy = trace / n;
    if (pe >= 1.0 - 1e-12)
        m.kappa = m.accuracy >= 1.0 - 1e-12 ? 1.0 : 0.0;
    else
        m.kappa = (m.accuracy - pe) / (1.0 - pe);
    return m;
}

}  // namespace sleepssl
