#include "biggat/metrics.hpp"

#include <stdexcept>

namespace biggat {

MetricsReport evaluate_predictions(const std::vector<int>& y_true,
                                   const std::vector<int>& y_pred,
                                   const std::string& event_id) {
  if (y_true.empty() || y_true.size() != y_pred.size()) {
    throw std::invalid_argument("metrics: empty or mismatched label vectors");
  }
  MetricsReport rep;
  rep.event_id = event_id;
  rep.n_nodes = static_cast<long>(y_true.size());
  long correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    int t = y_true[i];
    int p = y_pred[i];
    if (t < 0 || t > 2 || p < 0 || p > 2) {
      throw std::invalid_argument("metrics: class label out of range");
    }
    ++rep.confusion[t][p];
    if (t == p) {
      ++correct;
    }
  }
  rep.accuracy = static_cast<double>(correct) / static_cast<double>(rep.n_nodes);

  double recall_sum = 0.0, f1_sum = 0.0;
  int present = 0;
  for (int c = 0; c < 3; ++c) {
    long tp = rep.confusion[c][c];
    long truth = rep.confusion[c][0] + rep.confusion[c][1] + rep.confusion[c][2];
    long predicted = rep.confusion[0][c] + rep.confusion[1][c] + rep.confusion[2][c];
    if (truth == 0) {
      continue;  // class absent from the true labels
    }
    ++present;
    double recall = static_cast<double>(tp) / static_cast<double>(truth);
    recall_sum += recall;
    double precision = predicted == 0 ? 0.0
                                      : static_cast<double>(tp) /
                                            static_cast<double>(predicted);
    double f1 = (precision + recall) == 0.0
                    ? 0.0
                    : 2.0 * precision * recall / (precision + recall);
    f1_sum += f1;
  }
  rep.balanced_accuracy = recall_sum / present;
  rep.macro_f1 = f1_sum / present;
  return rep;
}

std::vector<int> argmax_classes(const Mat& logits) {
  std::vector<int> out(logits.rows, 0);
  for (int i = 0; i < logits.rows; ++i) {
    auto row = logits.row(i);
    int best = 0;
    for (int c = 1; c < logits.cols; ++c) {
      if (row[c] > row[best]) {  // strict: ties stay with the lower class
        best = c;
      }
    }
    out[i] = best;
  }
  return out;
}

MetricsReport average_reports(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) {
    throw std::invalid_argument("metrics: no reports to average");
  }
  MetricsReport avg;
  avg.event_id = "average";
  for (const MetricsReport& r : reports) {
    avg.accuracy += r.accuracy;
    avg.balanced_accuracy += r.balanced_accuracy;
    avg.macro_f1 += r.macro_f1;
    avg.n_nodes += r.n_nodes;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        avg.confusion[i][j] += r.confusion[i][j];
      }
    }
  }
  double k = static_cast<double>(reports.size());
  avg.accuracy /= k;
  avg.balanced_accuracy /= k;
  avg.macro_f1 /= k;
  return avg;
}

}  // namespace biggat
