#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fedcmi/autodiff.hpp"
#include "fedcmi/model.hpp"
#include "fedcmi/tensor.hpp"

namespace fedcmi {

// FedCMI-specific quantities: discrepancy ratios between the two modalities,
// class-wise temperature adaptation, the gated cross-modal distillation loss,
// the proximal term and total-loss assembly.

struct DiscrepancyStats {
  double rho_batch = 1.0;          // current mini-batch ratio
  std::vector<double> rho_class;   // per-class ratio over the full local set
  double rho_overall = 1.0;        // mean of rho_class
  std::vector<double> temps;       // adapted student temperature per class
};

// Ground-truth softmax confidence of one modality, summed over the batch.
inline double truth_confidence_sum(const Tensor2& sp_logits, const std::vector<int>& labels) {
  Tensor2 p = softmax_rows(sp_logits, 1.0);
  double acc = 0.0;
  for (std::size_t k = 0; k < p.rows(); ++k)
    acc += p(k, static_cast<std::size_t>(labels[k]));
  return acc;
}

// rho_t = sum_k s_k^{m0} / sum_k s_k^{m1}; > 1 means m0 is currently better.
inline double batch_discrepancy_ratio(const Tensor2& sp_logits_m0, const Tensor2& sp_logits_m1,
                                      const std::vector<int>& labels) {
  if (labels.empty()) throw ParamError("batch_discrepancy_ratio: empty batch");
  if (sp_logits_m0.rows() != labels.size() || sp_logits_m1.rows() != labels.size())
    throw ShapeError("batch_discrepancy_ratio: logit rows must match labels");
  return truth_confidence_sum(sp_logits_m0, labels) / truth_confidence_sum(sp_logits_m1, labels);
}

struct ClasswiseDiscrepancy {
  std::vector<double> rho_class;
  double rho_overall = 1.0;
};

// Per-class ratios over the client's full local dataset. Classes absent from
// the local data take the mean ratio of the present classes (neutral fill),
// so unseen classes get no temperature adaptation.
inline ClasswiseDiscrepancy classwise_discrepancy(const Tensor2& sp_logits_m0,
                                                  const Tensor2& sp_logits_m1,
                                                  const std::vector<int>& labels,
                                                  std::size_t num_classes) {
  if (labels.empty()) throw ParamError("classwise_discrepancy: empty dataset");
  Tensor2 p0 = softmax_rows(sp_logits_m0, 1.0);
  Tensor2 p1 = softmax_rows(sp_logits_m1, 1.0);
  std::vector<double> sum0(num_classes, 0.0), sum1(num_classes, 0.0);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    auto c = static_cast<std::size_t>(labels[k]);
    if (c >= num_classes) throw IndexError("classwise_discrepancy: label out of range");
    sum0[c] += p0(k, c);
    sum1[c] += p1(k, c);
  }
  ClasswiseDiscrepancy out;
  out.rho_class.assign(num_classes, 0.0);
  double present_sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (sum1[c] > 0.0) {
      out.rho_class[c] = sum0[c] / sum1[c];
      present_sum += out.rho_class[c];
      ++present;
    }
  }
  double fill = present_sum / static_cast<double>(present);
  for (std::size_t c = 0; c < num_classes; ++c)
    if (sum1[c] == 0.0) out.rho_class[c] = fill;
  out.rho_overall = fill;
  return out;
}

inline constexpr double kDefaultTempFloor = 0.1;

// Class-wise temperature adaptation. For the dominant-m0 case the student
// temperature shrinks where the teacher's class advantage exceeds the
// average; the dominant-m1 case applies the same rule to reciprocal ratios.
// Results are clamped to [t_min, T].
inline std::vector<double> adapt_temperature(const std::vector<double>& rho_class,
                                             double rho_overall, double temp, double beta,
                                             double t_min = kDefaultTempFloor) {
  if (!(temp > 0.0) || !(beta > 0.0)) throw ParamError("adapt_temperature: T and beta must be positive");
  if (!(t_min > 0.0) || t_min > temp) throw ParamError("adapt_temperature: need 0 < t_min <= T");
  if (!(rho_overall > 0.0)) throw ParamError("adapt_temperature: rho_overall must be positive");
  std::vector<double> temps(rho_class.size(), temp);
  for (std::size_t c = 0; c < rho_class.size(); ++c) {
    double rc = rho_class[c];
    if (!(rc > 0.0)) throw ParamError("adapt_temperature: class ratios must be positive");
    double advantage = rho_overall > 1.0 ? rc / rho_overall : rho_overall / rc;
    if (advantage <= 1.0) continue;
    double denom = 1.0 + beta * std::log(advantage);
    double t = denom > 0.0 ? temp / denom : t_min;
    temps[c] = std::min(temp, std::max(t_min, t));
  }
  return temps;
}

// Eq.-style gate: the better modality this batch teaches the other one.
// Ties go to m1 as teacher.
inline Modality choose_teacher(double rho_batch) {
  return rho_batch > 1.0 ? Modality::m0 : Modality::m1;
}

// Response-based distillation: frozen global teacher probabilities at base
// temperature T against the local student IP branch at the class-adapted
// temperature of each sample's label. Gradient flows only into the student.
inline Var distillation_loss(GradTape& t, const Tensor2& teacher_logits_global,
                             Var student_ip_logits, const std::vector<int>& labels, double temp,
                             const std::vector<double>& class_temps, bool t2_scale = false) {
  const Tensor2& student = t.value(student_ip_logits);
  if (teacher_logits_global.cols() != student.cols())
    throw ShapeError("distillation_loss: class counts differ");
  if (teacher_logits_global.rows() != student.rows() || labels.size() != student.rows())
    throw ShapeError("distillation_loss: batch sizes differ");
  Tensor2 teacher_probs = softmax_rows(teacher_logits_global, temp);
  std::vector<double> row_temps(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    auto c = static_cast<std::size_t>(labels[k]);
    if (c >= class_temps.size()) throw IndexError("distillation_loss: label out of range");
    row_temps[k] = class_temps[c];
  }
  Var student_probs = t.softmax_rows(student_ip_logits, std::move(row_temps));
  Var loss = t.mean_kl(std::move(teacher_probs), student_probs);
  return t2_scale ? t.scale(loss, temp * temp) : loss;
}

// (1/2)||phi_b - phi_b^global||^2 over matching keys; mu is applied once at
// total-loss assembly.
inline Var prox_term(GradTape& t, const std::map<std::string, Var>& local,
                     const std::map<std::string, const Tensor2*>& global) {
  if (local.size() != global.size())
    throw UsageError("prox_term: local and global key sets differ in size");
  Var total{};
  auto git = global.begin();
  for (const auto& [key, var] : local) {
    if (git->first != key) throw UsageError("prox_term: key mismatch at " + key);
    Var piece = t.half_sq_diff(var, *git->second);
    total = total.valid() ? t.add(total, piece) : piece;
    ++git;
  }
  if (!total.valid()) throw UsageError("prox_term: empty parameter set");
  return total;
}

enum class ClientKind { multimodal, unimodal };

struct LossBreakdown {
  double ce_joint = 0.0;
  double ce_m0 = 0.0;
  double ce_m1 = 0.0;
  double rd = 0.0;
  double prox = 0.0;
  double total = 0.0;
  Modality teacher = Modality::m1;

  static double combine(double ce_joint, double ce_m0, double ce_m1, double rd, double prox,
                        double kappa, double mu) {
    return ce_joint + ce_m0 + ce_m1 + kappa * rd + mu * prox;
  }

  LossBreakdown& operator+=(const LossBreakdown& o) {
    ce_joint += o.ce_joint;
    ce_m0 += o.ce_m0;
    ce_m1 += o.ce_m1;
    rd += o.rd;
    prox += o.prox;
    total += o.total;
    return *this;
  }

  LossBreakdown scaled(double f) const {
    LossBreakdown b = *this;
    b.ce_joint *= f;
    b.ce_m0 *= f;
    b.ce_m1 *= f;
    b.rd *= f;
    b.prox *= f;
    b.total *= f;
    return b;
  }
};

struct AssembledLoss {
  Var total;
  LossBreakdown breakdown;
};

struct LossHyper {
  double kappa = 0.0;
  double mu = 0.0;
  double temp = 3.0;
  bool t2_scale = false;
};

inline Var mean_ce_of_logits(GradTape& t, Var logits, const std::vector<int>& labels) {
  return t.mean_cross_entropy(t.softmax_rows(logits, 1.0), labels);
}

// Total multimodal FedCMI loss: joint CE + both SP-branch CEs + kappa * gated
// distillation + mu * prox over base modules.
inline AssembledLoss assemble_total_loss(GradTape& t, const ForwardVars& fwd,
                                         const std::vector<int>& labels,
                                         const DiscrepancyStats& stats,
                                         const Tensor2& teacher_logits_global,
                                         const std::map<std::string, Var>& local_base,
                                         const std::map<std::string, const Tensor2*>& global_base,
                                         const LossHyper& hp) {
  if (stats.temps.empty()) throw UsageError("assemble_total_loss: missing discrepancy stats");
  Modality teacher = choose_teacher(stats.rho_batch);
  Modality student = other(teacher);

  Var ce_joint = mean_ce_of_logits(t, fwd.joint_logits, labels);
  Var ce_m0 = mean_ce_of_logits(t, fwd.sp_logits[0], labels);
  Var ce_m1 = mean_ce_of_logits(t, fwd.sp_logits[1], labels);
  Var rd = distillation_loss(t, teacher_logits_global, fwd.ip_logits[idx(student)], labels,
                             hp.temp, stats.temps, hp.t2_scale);
  Var prox = prox_term(t, local_base, global_base);

  Var total = t.add(t.add(ce_joint, ce_m0), ce_m1);
  if (hp.kappa != 0.0) total = t.add(total, t.scale(rd, hp.kappa));
  if (hp.mu != 0.0) total = t.add(total, t.scale(prox, hp.mu));

  AssembledLoss out;
  out.total = total;
  out.breakdown.ce_joint = t.value(ce_joint)(0, 0);
  out.breakdown.ce_m0 = t.value(ce_m0)(0, 0);
  out.breakdown.ce_m1 = t.value(ce_m1)(0, 0);
  out.breakdown.rd = t.value(rd)(0, 0);
  out.breakdown.prox = t.value(prox)(0, 0);
  out.breakdown.total = t.value(total)(0, 0);
  out.breakdown.teacher = teacher;
  return out;
}

// Missing-modality loss: branch CE plus mu * prox over the modules actually
// trained. Used for both architectures' unimodal clients.
inline AssembledLoss unimodal_total_loss(GradTape& t, Var branch_logits,
                                         const std::vector<int>& labels, Modality m,
                                         const std::map<std::string, Var>& trained,
                                         const std::map<std::string, const Tensor2*>& global,
                                         double mu) {
  Var ce = mean_ce_of_logits(t, branch_logits, labels);
  Var prox = prox_term(t, trained, global);
  Var total = mu != 0.0 ? t.add(ce, t.scale(prox, mu)) : ce;
  AssembledLoss out;
  out.total = total;
  (m == Modality::m0 ? out.breakdown.ce_m0 : out.breakdown.ce_m1) = t.value(ce)(0, 0);
  out.breakdown.prox = t.value(prox)(0, 0);
  out.breakdown.total = t.value(total)(0, 0);
  return out;
}

}  // namespace fedcmi
