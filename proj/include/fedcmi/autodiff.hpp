#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "fedcmi/tensor.hpp"

namespace fedcmi {

// Reverse-mode tape over Tensor2 values. Every recorded op stores its output
// and a pullback that scatters the output gradient to its inputs. Node ids
// only reference earlier nodes, so creation order is already topological and
// backward() is a single reverse sweep. A tape is confined to one logical
// thread and used for one loss.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class GradTape {
 public:
  Var leaf(Tensor2 v) {
    check_finite(v, "leaf");
    return push(std::move(v), {});
  }

  const Tensor2& value(Var v) const { return node(v).value; }
  const Tensor2& grad(Var v) const { return node(v).grad; }
  std::size_t size() const { return nodes_.size(); }

  Var affine(Var x, Var w, Var b) {
    Tensor2 out = fedcmi::affine(value(x), value(w), value(b));
    return push(std::move(out), [x, w, b](GradTape& t, const Tensor2& g) {
      t.accum(x, matmul_nn(g, t.value(w)));
      t.accum(w, matmul_tn(g, t.value(x)));
      t.accum(b, col_sums(g));
    });
  }

  Var relu(Var x) {
    Tensor2 out = fedcmi::relu(value(x));
    return push(std::move(out), [x](GradTape& t, const Tensor2& g) {
      Tensor2 dx = g;
      const Tensor2& v = t.value(x);
      for (std::size_t i = 0; i < dx.size(); ++i)
        if (v.data()[i] <= 0.0) dx.data()[i] = 0.0;
      t.accum(x, std::move(dx));
    });
  }

  Var add(Var a, Var b) {
    Tensor2 out = fedcmi::add(value(a), value(b));
    return push(std::move(out), [a, b](GradTape& t, const Tensor2& g) {
      t.accum(a, g);
      t.accum(b, g);
    });
  }

  Var scale(Var a, double c) {
    Tensor2 out = fedcmi::scale(value(a), c);
    return push(std::move(out), [a, c](GradTape& t, const Tensor2& g) {
      t.accum(a, fedcmi::scale(g, c));
    });
  }

  Var concat_cols(Var a, Var b) {
    Tensor2 out = fedcmi::concat_cols(value(a), value(b));
    std::size_t split = value(a).cols();
    return push(std::move(out), [a, b, split](GradTape& t, const Tensor2& g) {
      Tensor2 ga(g.rows(), split);
      Tensor2 gb(g.rows(), g.cols() - split);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < split; ++c) ga(r, c) = g(r, c);
        for (std::size_t c = split; c < g.cols(); ++c) gb(r, c - split) = g(r, c);
      }
      t.accum(a, std::move(ga));
      t.accum(b, std::move(gb));
    });
  }

  Var softmax_rows(Var logits, std::vector<double> row_temps) {
    Tensor2 out = fedcmi::softmax_rows(value(logits), row_temps);
    int self = static_cast<int>(nodes_.size());
    return push(std::move(out),
                [logits, self, temps = std::move(row_temps)](GradTape& t, const Tensor2& g) {
                  const Tensor2& p = t.nodes_[self].value;
                  Tensor2 dl(p.rows(), p.cols());
                  for (std::size_t r = 0; r < p.rows(); ++r) {
                    double dot = 0.0;
                    for (std::size_t c = 0; c < p.cols(); ++c) dot += g(r, c) * p(r, c);
                    for (std::size_t c = 0; c < p.cols(); ++c)
                      dl(r, c) = p(r, c) * (g(r, c) - dot) / temps[r];
                  }
                  t.accum(logits, std::move(dl));
                });
  }

  Var softmax_rows(Var logits, double temp) {
    return softmax_rows(logits, std::vector<double>(value(logits).rows(), temp));
  }

  // mean over rows of -log(probs[r, labels[r]] + eps)
  Var mean_cross_entropy(Var probs, const std::vector<int>& labels) {
    const Tensor2& p = value(probs);
    if (labels.size() != p.rows())
      throw ShapeError("mean_cross_entropy: one label per row required");
    double acc = 0.0;
    for (std::size_t r = 0; r < p.rows(); ++r) {
      auto y = static_cast<std::size_t>(labels[r]);
      if (y >= p.cols()) throw IndexError("mean_cross_entropy: label out of range");
      acc -= std::log(p(r, y) + kLogEps);
    }
    double n = static_cast<double>(p.rows());
    // the pullback differentiates exactly what the forward computes,
    // -log(p + eps), so finite differences agree at any saturation level
    return push(Tensor2(1, 1, {acc / n}), [probs, labels, n](GradTape& t, const Tensor2& g) {
      const Tensor2& pv = t.value(probs);
      Tensor2 dp(pv.rows(), pv.cols());
      for (std::size_t r = 0; r < pv.rows(); ++r) {
        auto y = static_cast<std::size_t>(labels[r]);
        dp(r, y) = -g(0, 0) / (n * (pv(r, y) + kLogEps));
      }
      t.accum(probs, std::move(dp));
    });
  }

  // mean over rows of KL(teacher_row || student_row); the teacher is a
  // constant and receives no gradient
  Var mean_kl(Tensor2 teacher_probs, Var student_probs) {
    const Tensor2& q = value(student_probs);
    check_same_shape(teacher_probs, q, "mean_kl");
    double acc = 0.0;
    for (std::size_t r = 0; r < q.rows(); ++r) {
      for (std::size_t c = 0; c < q.cols(); ++c) {
        double pt = teacher_probs(r, c);
        if (pt <= 0.0) continue;
        acc += pt * (std::log(pt) - std::log(q(r, c) + kLogEps));
      }
    }
    double n = static_cast<double>(q.rows());
    return push(Tensor2(1, 1, {acc / n}),
                [student_probs, pt = std::move(teacher_probs), n](GradTape& t, const Tensor2& g) {
                  const Tensor2& qv = t.value(student_probs);
                  Tensor2 dq(qv.rows(), qv.cols());
                  for (std::size_t r = 0; r < qv.rows(); ++r)
                    for (std::size_t c = 0; c < qv.cols(); ++c)
                      dq(r, c) = -g(0, 0) * pt(r, c) / (n * (qv(r, c) + kLogEps));
                  t.accum(student_probs, std::move(dq));
                });
  }

  // 0.5 * ||p - ref||^2 as a scalar node; ref is constant
  Var half_sq_diff(Var p, Tensor2 ref) {
    check_same_shape(value(p), ref, "half_sq_diff");
    double acc = 0.5 * sum_sq_diff(value(p), ref);
    return push(Tensor2(1, 1, {acc}), [p, ref = std::move(ref)](GradTape& t, const Tensor2& g) {
      Tensor2 dp = sub(t.value(p), ref);
      t.accum(p, fedcmi::scale(dp, g(0, 0)));
    });
  }

  // Seeds d(loss)=1 and sweeps the tape once in reverse. loss must be a 1x1
  // node recorded on this tape.
  void backward(Var loss) {
    const Tensor2& l = node(loss).value;
    if (l.rows() != 1 || l.cols() != 1)
      throw UsageError("backward: loss must be a scalar node");
    if (swept_) throw UsageError("backward: tape already swept");
    swept_ = true;
    for (auto& n : nodes_)
      if (n.grad.empty()) n.grad = Tensor2(n.value.rows(), n.value.cols());
    nodes_[static_cast<std::size_t>(loss.id)].grad(0, 0) = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      auto& n = nodes_[i];
      if (n.pullback) n.pullback(*this, n.grad);
    }
  }

 private:
  struct Node {
    Tensor2 value;
    Tensor2 grad;
    std::function<void(GradTape&, const Tensor2&)> pullback;
  };

  Var push(Tensor2 v, std::function<void(GradTape&, const Tensor2&)> pb) {
    nodes_.push_back(Node{std::move(v), Tensor2(), std::move(pb)});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  const Node& node(Var v) const {
    if (!v.valid() || static_cast<std::size_t>(v.id) >= nodes_.size())
      throw UsageError("GradTape: variable not on this tape");
    return nodes_[static_cast<std::size_t>(v.id)];
  }

  void accum(Var v, const Tensor2& g) {
    Tensor2& dst = nodes_[static_cast<std::size_t>(v.id)].grad;
    for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += g.data()[i];
  }

  std::vector<Node> nodes_;
  bool swept_ = false;
};

}  // namespace fedcmi
