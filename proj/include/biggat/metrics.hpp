#pragma once

#include <array>
#include <string>
#include <vector>

#include "biggat/matrix.hpp"

namespace biggat {

/// Classification metrics for one event (or an average row). Balanced
/// accuracy and macro F1 average only over classes present in the true
/// labels, so events missing a class entirely stay interpretable.
struct MetricsReport {
  std::string event_id;
  std::array<std::array<long, 3>, 3> confusion{};  // rows = true class
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  double macro_f1 = 0.0;
  long n_nodes = 0;
};

/// Builds the confusion matrix and the three metrics from label vectors.
/// Per-class F1 is 0 when precision + recall is 0.
MetricsReport evaluate_predictions(const std::vector<int>& y_true,
                                   const std::vector<int>& y_pred,
                                   const std::string& event_id = "");

/// Argmax per row; ties break toward the lowest class index.
std::vector<int> argmax_classes(const Mat& logits);

/// Unweighted mean of the per-event metrics; confusion matrices are summed.
MetricsReport average_reports(const std::vector<MetricsReport>& reports);

}  // namespace biggat
