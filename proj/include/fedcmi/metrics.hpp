#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "fedcmi/data.hpp"
#include "fedcmi/imbalance.hpp"
#include "fedcmi/model.hpp"

namespace fedcmi {

// Top-1 accuracies of the global model on the server-held test split. The
// per-modality probes use the single-modality forward path (SP branch for
// fedcmi, zero-filled fusion for the plain baseline), bucketed by true label
// for the per-class view.
struct RoundMetrics {
  double joint_acc = 0.0;
  double acc_m0 = 0.0;
  double acc_m1 = 0.0;
  std::vector<std::array<double, 3>> per_class;  // C x (joint, m0, m1)
  std::vector<std::size_t> class_counts;
  LossBreakdown mean_loss;   // mean over participating clients, filled by the server loop
  double mean_rho = 1.0;     // mean rho^m over participating multimodal clients
};

// argmax per row, ties broken toward the lowest class index
inline std::vector<int> argmax_rows(const Tensor2& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.cols(); ++c)
      if (logits(r, c) > logits(r, best)) best = c;
    out[r] = static_cast<int>(best);
  }
  return out;
}

inline RoundMetrics evaluate(const ModelParams& params, const MultimodalDataset& test) {
  if (test.size() == 0) throw ParamError("evaluate: empty test set");
  if (test.x_m0.cols() != params.cfg.dim_m0 || test.x_m1.cols() != params.cfg.dim_m1)
    throw ShapeError("evaluate: dataset dims do not match ArchConfig");
  std::size_t num_classes = test.num_classes;

  ForwardOutputs fwd = forward_full(params, test.x_m0, test.x_m1);
  std::array<std::vector<int>, 3> preds;
  preds[0] = argmax_rows(fwd.joint_logits);
  preds[1] = argmax_rows(forward_unimodal(params, Modality::m0, test.x_m0));
  preds[2] = argmax_rows(forward_unimodal(params, Modality::m1, test.x_m1));

  RoundMetrics m;
  m.per_class.assign(num_classes, {0.0, 0.0, 0.0});
  m.class_counts.assign(num_classes, 0);
  std::array<std::vector<std::size_t>, 3> class_hits;
  for (auto& v : class_hits) v.assign(num_classes, 0);
  std::array<std::size_t, 3> hits{0, 0, 0};

  for (std::size_t i = 0; i < test.size(); ++i) {
    auto y = static_cast<std::size_t>(test.y[i]);
    ++m.class_counts[y];
    for (int head = 0; head < 3; ++head) {
      if (preds[head][i] == test.y[i]) {
        ++hits[head];
        ++class_hits[head][y];
      }
    }
  }
  double n = static_cast<double>(test.size());
  m.joint_acc = static_cast<double>(hits[0]) / n;
  m.acc_m0 = static_cast<double>(hits[1]) / n;
  m.acc_m1 = static_cast<double>(hits[2]) / n;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (m.class_counts[c] == 0) continue;
    double cn = static_cast<double>(m.class_counts[c]);
    for (int head = 0; head < 3; ++head)
      m.per_class[c][static_cast<std::size_t>(head)] =
          static_cast<double>(class_hits[head][c]) / cn;
  }
  return m;
}

}  // namespace fedcmi
