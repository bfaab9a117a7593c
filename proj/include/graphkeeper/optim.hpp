#pragma once

#include <cmath>
#include <vector>

#include "graphkeeper/numerics.hpp"

namespace gk {

struct AdamOptions {
  double learning_rate = 5e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 5e-4;  // L2 term added to the gradient
};

// Adaptive-moment update over a fixed, ordered list of parameter matrices.
class Adam {
 public:
  explicit Adam(AdamOptions opts = {}) : opts_(opts) {}

  void step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads) {
    if (params.size() != grads.size()) throw ValidationError("adam: params/grads length mismatch");
    if (m_.empty()) {
      for (const Matrix* p : params) {
        m_.push_back(Matrix::Zero(p->rows(), p->cols()));
        v_.push_back(Matrix::Zero(p->rows(), p->cols()));
      }
    }
    if (m_.size() != params.size()) throw ValidationError("adam: parameter list changed size");
    ++t_;
    const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      Matrix& p = *params[i];
      const Matrix g = *grads[i] + opts_.weight_decay * p;
      m_[i] = opts_.beta1 * m_[i] + (1.0 - opts_.beta1) * g;
      v_[i] = opts_.beta2 * v_[i] + (1.0 - opts_.beta2) * g.cwiseProduct(g);
      p.array() -= opts_.learning_rate * (m_[i].array() / bc1) /
                   ((v_[i].array() / bc2).sqrt() + opts_.eps);
    }
  }

  long steps() const { return t_; }

 private:
  AdamOptions opts_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long t_ = 0;
};

}  // namespace gk
