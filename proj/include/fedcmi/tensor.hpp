#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fedcmi/errors.hpp"

namespace fedcmi {

// Dense row-major matrix of doubles. Rows are samples, columns are features;
// that orientation is fixed project-wide. Vectors are 1xN tensors.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw ShapeError("Tensor2: data length " + std::to_string(data_.size()) +
                       " != rows*cols " + std::to_string(rows_ * cols_));
  }

  static Tensor2 row(std::vector<double> v) {
    std::size_t n = v.size();
    return Tensor2(1, n, std::move(v));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Tensor2& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void check_finite(const Tensor2& t, const char* what) {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!std::isfinite(t.data()[i]))
      throw UsageError(std::string(what) + ": non-finite entry");
}

inline void check_same_shape(const Tensor2& a, const Tensor2& b, const char* what) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
}

inline Tensor2 add(const Tensor2& a, const Tensor2& b) {
  check_same_shape(a, b, "add");
  Tensor2 out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

inline Tensor2 sub(const Tensor2& a, const Tensor2& b) {
  check_same_shape(a, b, "sub");
  Tensor2 out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

inline Tensor2 scale(const Tensor2& a, double c) {
  Tensor2 out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= c;
  return out;
}

inline void axpy(Tensor2& acc, double c, const Tensor2& x) {
  check_same_shape(acc, x, "axpy");
  for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += c * x.data()[i];
}

// y = x * W^T + b, per row. W is (out_dim x in_dim), b is 1 x out_dim.
inline Tensor2 affine(const Tensor2& x, const Tensor2& w, const Tensor2& b) {
  if (x.cols() != w.cols())
    throw ShapeError("affine: input cols " + std::to_string(x.cols()) +
                     " != weight in_dim " + std::to_string(w.cols()));
  if (b.rows() != 1 || b.cols() != w.rows())
    throw ShapeError("affine: bias must be 1x" + std::to_string(w.rows()));
  Tensor2 out(x.rows(), w.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t o = 0; o < w.rows(); ++o) {
      double acc = b(0, o);
      for (std::size_t i = 0; i < x.cols(); ++i) acc += x(r, i) * w(o, i);
      out(r, o) = acc;
    }
  }
  check_finite(out, "affine");
  return out;
}

// grad wrt x of affine: g * W
inline Tensor2 matmul_nn(const Tensor2& g, const Tensor2& w) {
  if (g.cols() != w.rows()) throw ShapeError("matmul_nn: inner dims differ");
  Tensor2 out(g.rows(), w.cols());
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t k = 0; k < g.cols(); ++k) {
      double gv = g(r, k);
      if (gv == 0.0) continue;
      for (std::size_t c = 0; c < w.cols(); ++c) out(r, c) += gv * w(k, c);
    }
  return out;
}

// grad wrt W of affine: g^T * x
inline Tensor2 matmul_tn(const Tensor2& g, const Tensor2& x) {
  if (g.rows() != x.rows()) throw ShapeError("matmul_tn: row counts differ");
  Tensor2 out(g.cols(), x.cols());
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t o = 0; o < g.cols(); ++o) {
      double gv = g(r, o);
      if (gv == 0.0) continue;
      for (std::size_t i = 0; i < x.cols(); ++i) out(o, i) += gv * x(r, i);
    }
  return out;
}

inline Tensor2 col_sums(const Tensor2& a) {
  Tensor2 out(1, a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(0, c) += a(r, c);
  return out;
}

inline Tensor2 relu(const Tensor2& x) {
  Tensor2 out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::max(0.0, out.data()[i]);
  return out;
}

inline Tensor2 concat_cols(const Tensor2& a, const Tensor2& b) {
  if (a.rows() != b.rows()) throw ShapeError("concat_cols: row counts differ");
  Tensor2 out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c);
    for (std::size_t c = 0; c < b.cols(); ++c) out(r, a.cols() + c) = b(r, c);
  }
  return out;
}

// Row-wise softmax with per-row temperature, max-subtracted for stability.
inline Tensor2 softmax_rows(const Tensor2& logits, const std::vector<double>& row_temps) {
  if (row_temps.size() != logits.rows())
    throw ShapeError("softmax_rows: one temperature per row required");
  for (double t : row_temps)
    if (!(t > 0.0)) throw ParamError("softmax_rows: temperature must be positive");
  Tensor2 out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    double t = row_temps[r];
    double mx = -INFINITY;
    for (std::size_t c = 0; c < logits.cols(); ++c) mx = std::max(mx, logits(r, c) / t);
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      double e = std::exp(logits(r, c) / t - mx);
      out(r, c) = e;
      sum += e;
    }
    for (std::size_t c = 0; c < logits.cols(); ++c) out(r, c) /= sum;
  }
  check_finite(out, "softmax_rows");
  return out;
}

inline Tensor2 softmax_rows(const Tensor2& logits, double temp) {
  return softmax_rows(logits, std::vector<double>(logits.rows(), temp));
}

// softmax over a single logit vector
inline std::vector<double> softmax(const std::vector<double>& logits, double temp) {
  Tensor2 p = softmax_rows(Tensor2::row(logits), temp);
  return std::vector<double>(p.data(), p.data() + p.size());
}

inline constexpr double kLogEps = 1e-12;  // additive floor inside every log

// -log(probs[label] + eps) for one distribution
inline double cross_entropy(const std::vector<double>& probs, std::size_t label) {
  if (label >= probs.size())
    throw IndexError("cross_entropy: label " + std::to_string(label) + " out of range");
  return -std::log(probs[label] + kLogEps);
}

// sum_c p_t[c] * log(p_t[c] / (p_s[c] + eps)), with 0 * log(0/q) := 0
inline double kl_forward(const std::vector<double>& p_teacher,
                         const std::vector<double>& p_student) {
  if (p_teacher.size() != p_student.size())
    throw ShapeError("kl_forward: distribution lengths differ");
  double acc = 0.0;
  for (std::size_t c = 0; c < p_teacher.size(); ++c) {
    double pt = p_teacher[c];
    if (pt <= 0.0) continue;
    acc += pt * (std::log(pt) - std::log(p_student[c] + kLogEps));
  }
  return acc;
}

inline double sum_sq_diff(const Tensor2& a, const Tensor2& b) {
  check_same_shape(a, b, "sum_sq_diff");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a.data()[i] - b.data()[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace fedcmi
