#pragma once

// Independent oracles used by the tests: naive reference implementations and
// a central finite-difference gradient checker. Nothing here touches the
// library's own computation paths beyond calling the function under test.

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fedcmi/model.hpp"
#include "fedcmi/rng.hpp"
#include "fedcmi/tensor.hpp"

namespace oracles {

using fedcmi::GradMap;
using fedcmi::ModelParams;
using fedcmi::Rng;
using fedcmi::Tensor2;

// y = x * W^T + b via an explicit triple loop
inline Tensor2 naive_affine(const Tensor2& x, const Tensor2& w, const Tensor2& b) {
  Tensor2 out(x.rows(), w.rows());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t o = 0; o < w.rows(); ++o) {
      double acc = 0.0;
      for (std::size_t i = 0; i < x.cols(); ++i) acc += x(r, i) * w(o, i);
      out(r, o) = acc + b(0, o);
    }
  return out;
}

inline std::vector<double> naive_softmax(const std::vector<double>& logits, double temp) {
  std::vector<double> p(logits.size());
  double mx = logits[0] / temp;
  for (double v : logits) mx = std::max(mx, v / temp);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] / temp - mx);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

inline double naive_kl(const std::vector<double>& p, const std::vector<double>& q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) acc += p[i] * std::log(p[i] / (q[i] + 1e-12));
  return acc;
}

inline double gauss_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline Tensor2 random_tensor(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  Tensor2 t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = scale * rng.next_gauss();
  return t;
}

inline std::vector<int> random_labels(Rng& rng, std::size_t n, std::size_t num_classes) {
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(rng.next_below(num_classes));
  return y;
}

// Central finite differences of loss_fn with respect to every entry of every
// registered model parameter. loss_fn must recompute the loss from the
// model's current values.
inline GradMap fd_gradients(ModelParams& model, const std::function<double()>& loss_fn,
                            double h = 1e-5) {
  GradMap out;
  fedcmi::visit_params(model, [&](const std::string& key, Tensor2& t) {
    Tensor2 g(t.rows(), t.cols());
    for (std::size_t i = 0; i < t.size(); ++i) {
      double saved = t.data()[i];
      t.data()[i] = saved + h;
      double up = loss_fn();
      t.data()[i] = saved - h;
      double down = loss_fn();
      t.data()[i] = saved;
      g.data()[i] = (up - down) / (2.0 * h);
    }
    out.emplace(key, std::move(g));
  });
  return out;
}

struct GradCheck {
  double worst_rel = 0.0;  // worst |a-b| / (atol + rtol*max(|a|,|b|)), in units of the tolerance
  std::string worst_key;
  std::size_t compared = 0;

  bool pass() const { return worst_rel < 1.0; }
};

// Standard two-sided gradient check: an entry passes when
// |tape - fd| <= atol + rtol * max(|tape|, |fd|). The absolute term absorbs
// central-difference roundoff on entries whose true gradient is zero;
// meaningful entries are held to the relative tolerance. Gradients absent
// from `got` are required to be zero in `want`.
inline GradCheck compare_grads(const GradMap& got, const GradMap& want, double rtol = 1e-4,
                               double atol = 1e-6) {
  GradCheck res;
  for (const auto& [key, fd] : want) {
    auto it = got.find(key);
    for (std::size_t i = 0; i < fd.size(); ++i) {
      double a = it == got.end() ? 0.0 : it->second.data()[i];
      double b = fd.data()[i];
      double excess = std::abs(a - b) / (atol + rtol * std::max(std::abs(a), std::abs(b)));
      if (excess > res.worst_rel) {
        res.worst_rel = excess;
        res.worst_key = key;
      }
      ++res.compared;
    }
  }
  return res;
}

// Nudge every parameter away from zero so finite differences never evaluate
// exactly on a relu kink (freshly initialized biases are zero and dead rows
// would otherwise sit on one).
inline void jitter_params(ModelParams& model, Rng& rng, double scale = 0.05) {
  fedcmi::visit_params(model, [&](const std::string&, Tensor2& t) {
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] += scale * rng.next_gauss();
  });
}

}  // namespace oracles
