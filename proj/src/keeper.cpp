#include "graphkeeper/keeper.hpp"

namespace gk {

namespace {

void check_one_hot(const Matrix& y, const char* what) {
  for (Index i = 0; i < y.rows(); ++i) {
    int ones = 0;
    for (Index j = 0; j < y.cols(); ++j) {
      if (y(i, j) == 1.0) {
        ++ones;
      } else if (y(i, j) != 0.0) {
        ones = -1;
        break;
      }
    }
    if (ones != 1) throw ValidationError(std::string(what) + ": row " + std::to_string(i) + " is not one-hot");
  }
}

void check_block(const DomainBlock& block, Index width, const char* what) {
  if (block.classes.begin < 0 || block.classes.width() < 1) {
    throw ValidationError(std::string(what) + ": empty or negative class block");
  }
  if (block.classes.width() != width) {
    throw ValidationError(std::string(what) + ": class block width " + std::to_string(block.classes.width()) +
                          " != target columns " + std::to_string(width));
  }
}

}  // namespace

int RidgeState::column_class(Index j) const {
  Index offset = 0;
  for (const auto& b : blocks) {
    if (j < offset + b.classes.width()) return b.classes.begin + static_cast<int>(j - offset);
    offset += b.classes.width();
  }
  throw BoundsError("ridge state: column " + std::to_string(j) + " out of range");
}

Matrix one_hot(std::span<const int> labels, int num_classes) {
  Matrix y = Matrix::Zero(static_cast<Index>(labels.size()), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw BoundsError("one_hot: label " + std::to_string(labels[i]) + " outside [0, " +
                        std::to_string(num_classes) + ")");
    }
    y(static_cast<Index>(i), labels[i]) = 1.0;
  }
  return y;
}

RidgeState init_state(const Matrix& x, const Matrix& y, double lambda, DomainBlock block) {
  if (!(lambda > 0.0)) throw ValidationError("init_state: lambda must be positive");
  if (x.rows() < 1) throw ValidationError("init_state: no rows");
  if (y.rows() != x.rows()) throw ValidationError("init_state: X and Y row counts differ");
  check_one_hot(y, "init_state");
  check_block(block, y.cols(), "init_state");
  require_finite(x, "init_state(X)");

  const Index h = x.cols();
  Matrix gram = x.transpose() * x;
  gram.diagonal().array() += lambda;
  RidgeState s;
  s.lambda = lambda;
  s.M = spd_solve(gram, Matrix::Identity(h, h));
  s.M = 0.5 * (s.M + s.M.transpose()).eval();
  s.W = spd_solve(gram, x.transpose() * y);
  s.blocks.push_back(block);
  return s;
}

RidgeState update_state(const RidgeState& state, const Matrix& x, const Matrix& y,
                        DomainBlock block, UpdatePath path) {
  const Index h = state.feature_dim();
  if (x.rows() < 1) throw ValidationError("update_state: no rows");
  if (x.cols() != h) {
    throw ValidationError("update_state: embedding width " + std::to_string(x.cols()) +
                          " != classifier width " + std::to_string(h));
  }
  if (y.rows() != x.rows()) throw ValidationError("update_state: X and Y row counts differ");
  check_one_hot(y, "update_state");
  check_block(block, y.cols(), "update_state");
  for (const auto& b : state.blocks) {
    if (b.classes.overlaps(block.classes)) {
      throw ValidationError("update_state: class block [" + std::to_string(block.classes.begin) + ", " +
                            std::to_string(block.classes.end) + ") overlaps domain " +
                            std::to_string(b.domain_id));
    }
    if (b.domain_id == block.domain_id) {
      throw ValidationError("update_state: domain " + std::to_string(block.domain_id) + " already registered");
    }
  }
  require_finite(x, "update_state(X)");

  const Index n = x.rows();
  if (path == UpdatePath::kAuto) path = n <= h ? UpdatePath::kCapacitance : UpdatePath::kGram;

  Matrix m_new;
  if (path == UpdatePath::kCapacitance) {
    // Woodbury: M - M X^T (I + X M X^T)^{-1} X M.
    const Matrix xm = x * state.M;  // n x h
    Matrix cap = xm * x.transpose();
    cap = 0.5 * (cap + cap.transpose()).eval();
    cap.diagonal().array() += 1.0;
    m_new = state.M - xm.transpose() * spd_solve(cap, xm);
  } else {
    // (M^{-1} + X^T X)^{-1}, both inverses on the h x h system.
    Matrix precision = spd_solve(state.M, Matrix::Identity(h, h));
    precision = 0.5 * (precision + precision.transpose()).eval();
    precision += x.transpose() * x;
    m_new = spd_solve(precision, Matrix::Identity(h, h));
  }
  m_new = 0.5 * (m_new + m_new.transpose()).eval();

  RidgeState out;
  out.lambda = state.lambda;
  out.M = m_new;
  const Matrix mxt = m_new * x.transpose();  // h x n
  out.W.resize(h, state.W.cols() + y.cols());
  out.W.leftCols(state.W.cols()) = state.W - mxt * (x * state.W);
  out.W.rightCols(y.cols()) = mxt * y;
  out.blocks = state.blocks;
  out.blocks.push_back(block);
  return out;
}

Prediction predict(const RidgeState& state, const Matrix& x) {
  if (x.cols() != state.feature_dim()) {
    throw ValidationError("predict: embedding width " + std::to_string(x.cols()) + " != classifier width " +
                          std::to_string(state.feature_dim()));
  }
  Prediction p;
  const Matrix logits = x * state.W;
  p.probabilities = softmax_rows(logits);
  for (Index col : argmax_rows(logits)) p.classes.push_back(state.column_class(col));
  return p;
}

Matrix batch_oracle(const std::vector<Matrix>& xs, const std::vector<Matrix>& ys, double lambda) {
  if (xs.empty() || xs.size() != ys.size()) throw ValidationError("batch_oracle: need matching, nonempty X/Y lists");
  Index rows = 0, cols = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].rows() != ys[i].rows() || xs[i].cols() != xs[0].cols()) {
      throw ValidationError("batch_oracle: inconsistent block shapes");
    }
    rows += xs[i].rows();
    cols += ys[i].cols();
  }
  Matrix x(rows, xs[0].cols());
  Matrix y = Matrix::Zero(rows, cols);
  Index r = 0, c = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x.middleRows(r, xs[i].rows()) = xs[i];
    y.block(r, c, ys[i].rows(), ys[i].cols()) = ys[i];
    r += xs[i].rows();
    c += ys[i].cols();
  }
  return ridge_solve_batch(x, y, lambda);
}

}  // namespace gk
