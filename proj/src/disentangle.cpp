#include "graphkeeper/disentangle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace gk {

void PrototypeSet::append(TaggedPrototype p) {
  require_finite(p.vector, "prototype");
  if (!entries_.empty() && entries_.front().vector.size() != p.vector.size()) {
    throw ValidationError("prototype set: dimension mismatch");
  }
  entries_.push_back(std::move(p));
}

Matrix PrototypeSet::as_matrix(Index dim) const {
  Matrix out(static_cast<Index>(entries_.size()), dim);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].vector.size() != dim) throw ValidationError("prototype set: dimension mismatch");
    out.row(static_cast<Index>(i)) = entries_[i].vector.transpose();
  }
  return out;
}

namespace {

// Row-normalises m; returns norms through `norms`.
Matrix normalize_rows(const Matrix& m, Vector& norms, const char* what) {
  norms = m.rowwise().norm();
  for (Index i = 0; i < norms.size(); ++i) {
    if (!(norms(i) > 0.0)) {
      throw NumericalError(std::string(what) + ": row " + std::to_string(i) +
                           " has zero norm, cosine similarity undefined");
    }
  }
  return norms.cwiseInverse().asDiagonal() * m;
}

// Gradient through u = x / |x|: dL/dx = (g - (g.u) u) / |x|, row-wise.
Matrix through_normalization(const Matrix& grad_unit, const Matrix& unit, const Vector& norms) {
  const Vector radial = (grad_unit.cwiseProduct(unit)).rowwise().sum();
  return norms.cwiseInverse().asDiagonal() * (grad_unit - radial.asDiagonal() * unit);
}

}  // namespace

IntraLoss intra_loss(const Matrix& x, const Matrix& x_aug, std::span<const int> labels) {
  const Index n = x.rows();
  if (x_aug.rows() != n || x_aug.cols() != x.cols() || static_cast<Index>(labels.size()) != n) {
    throw ValidationError("intra_loss: X, X_aug and labels must be row-aligned");
  }
  IntraLoss out;
  out.grad_x = Matrix::Zero(n, x.cols());
  out.grad_xaug = Matrix::Zero(n, x.cols());
  if (n == 0) return out;

  Vector nx, na;
  const Matrix ux = normalize_rows(x, nx, "intra_loss(X)");
  const Matrix ua = normalize_rows(x_aug, na, "intra_loss(X_aug)");
  const Matrix sim = ux * ua.transpose();

  // dL/dsim_jo = softmax_all(j, o) - softmax_pos(j, o).
  Matrix grad_sim(n, n);
  double value = 0.0;
  for (Index j = 0; j < n; ++j) {
    const double shift = sim.row(j).maxCoeff();
    double all = 0.0, pos = 0.0;
    for (Index o = 0; o < n; ++o) {
      const double e = std::exp(sim(j, o) - shift);
      all += e;
      if (labels[static_cast<std::size_t>(o)] == labels[static_cast<std::size_t>(j)]) pos += e;
    }
    value -= std::log(pos) - std::log(all);
    for (Index o = 0; o < n; ++o) {
      const double e = std::exp(sim(j, o) - shift);
      const bool same = labels[static_cast<std::size_t>(o)] == labels[static_cast<std::size_t>(j)];
      grad_sim(j, o) = e / all - (same ? e / pos : 0.0);
    }
  }
  out.value = value;
  out.grad_x = through_normalization(grad_sim * ua, ux, nx);
  out.grad_xaug = through_normalization(grad_sim.transpose() * ux, ua, na);
  return out;
}

InterLoss inter_loss(const Matrix& x, const Matrix& prototypes, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("inter_loss: epsilon must be positive");
  InterLoss out;
  out.grad_x = Matrix::Zero(x.rows(), x.cols());
  if (prototypes.rows() == 0 || x.rows() == 0) return out;
  if (prototypes.cols() != x.cols()) throw ValidationError("inter_loss: prototype width mismatch");

  const double inv_n = 1.0 / static_cast<double>(x.rows());
  double value = 0.0;
  for (Index j = 0; j < x.rows(); ++j) {
    for (Index k = 0; k < prototypes.rows(); ++k) {
      const auto diff = (x.row(j) - prototypes.row(k)).eval();
      const double q = diff.squaredNorm() + epsilon;
      value += 1.0 / q;
      out.grad_x.row(j) -= (2.0 * inv_n / (q * q)) * diff;
    }
  }
  out.value = value * inv_n;
  return out;
}

LossReport total_loss(const Matrix& x, const Matrix& x_aug, std::span<const int> labels,
                      const Matrix& prototypes, double gamma1, double gamma2, double epsilon) {
  if (gamma1 < 0.0 || gamma2 < 0.0) throw ValidationError("total_loss: weights must be nonnegative");
  const IntraLoss intra = intra_loss(x, x_aug, labels);
  const InterLoss inter = inter_loss(x, prototypes, epsilon);
  LossReport r;
  r.intra = intra.value;
  r.inter = inter.value;
  r.total = gamma1 * intra.value + gamma2 * inter.value;
  r.grad_x = gamma1 * intra.grad_x + gamma2 * inter.grad_x;
  r.grad_xaug = gamma1 * intra.grad_xaug;
  return r;
}

std::vector<int> dbscan(const Matrix& points, double eps, int min_pts) {
  if (!(eps > 0.0)) throw ValidationError("dbscan: eps must be positive");
  if (min_pts < 1) throw ValidationError("dbscan: min_pts must be >= 1");
  const Index n = points.rows();
  const double eps2 = eps * eps;

  std::vector<std::vector<Index>> neighbors(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if ((points.row(i) - points.row(j)).squaredNorm() <= eps2) {
        neighbors[static_cast<std::size_t>(i)].push_back(j);
      }
    }
  }
  auto is_core = [&](Index i) {
    return static_cast<int>(neighbors[static_cast<std::size_t>(i)].size()) >= min_pts;
  };

  constexpr int kUnvisited = -2;
  std::vector<int> label(static_cast<std::size_t>(n), kUnvisited);
  int cluster = 0;
  for (Index i = 0; i < n; ++i) {
    if (label[static_cast<std::size_t>(i)] != kUnvisited) continue;
    if (!is_core(i)) {
      label[static_cast<std::size_t>(i)] = kNoise;
      continue;
    }
    label[static_cast<std::size_t>(i)] = cluster;
    std::deque<Index> frontier(neighbors[static_cast<std::size_t>(i)].begin(),
                               neighbors[static_cast<std::size_t>(i)].end());
    while (!frontier.empty()) {
      const Index q = frontier.front();
      frontier.pop_front();
      int& lq = label[static_cast<std::size_t>(q)];
      if (lq == kNoise) lq = cluster;  // border point
      if (lq != kUnvisited) continue;
      lq = cluster;
      if (is_core(q)) {
        const auto& nq = neighbors[static_cast<std::size_t>(q)];
        frontier.insert(frontier.end(), nq.begin(), nq.end());
      }
    }
    ++cluster;
  }
  return label;
}

double median_knn_distance(const Matrix& points, int k) {
  const Index n = points.rows();
  if (n < 2) return 0.0;
  const auto kk = static_cast<std::size_t>(std::min<Index>(k, n - 1));
  std::vector<double> kth;
  kth.reserve(static_cast<std::size_t>(n));
  std::vector<double> d;
  for (Index i = 0; i < n; ++i) {
    d.clear();
    for (Index j = 0; j < n; ++j)
      if (j != i) d.push_back((points.row(i) - points.row(j)).norm());
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk - 1), d.end());
    kth.push_back(d[kk - 1]);
  }
  const auto mid = kth.size() / 2;
  std::nth_element(kth.begin(), kth.begin() + static_cast<std::ptrdiff_t>(mid), kth.end());
  double med = kth[mid];
  if (kth.size() % 2 == 0) {
    med = 0.5 * (med + *std::max_element(kth.begin(), kth.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return med;
}

std::vector<TaggedPrototype> extract_prototypes(const Matrix& x, std::span<const int> labels,
                                                const PrototypeOptions& opts, int domain_id) {
  if (static_cast<Index>(labels.size()) != x.rows()) {
    throw ValidationError("extract_prototypes: labels must align with X");
  }
  require_finite(x, "extract_prototypes");
  // Identical points give a zero median distance; any positive radius then
  // groups them.
  double eps = opts.eps ? *opts.eps : median_knn_distance(x, 4);
  if (!(eps > 0.0)) eps = 1e-12;

  std::vector<TaggedPrototype> out;
  const std::vector<int> assignment = x.rows() > 0 ? dbscan(x, eps, opts.min_pts) : std::vector<int>{};
  const int clusters = assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;

  auto centroid_of = [&](auto&& member) {
    Vector sum = Vector::Zero(x.cols());
    Index count = 0;
    for (Index i = 0; i < x.rows(); ++i) {
      if (member(i)) {
        sum += x.row(i).transpose();
        ++count;
      }
    }
    return std::pair{Vector(sum / static_cast<double>(std::max<Index>(count, 1))), count};
  };

  if (clusters > 0) {
    for (int c = 0; c < clusters; ++c) {
      auto [v, count] = centroid_of([&](Index i) { return assignment[static_cast<std::size_t>(i)] == c; });
      out.push_back({domain_id, c, std::move(v)});
    }
    return out;
  }
  std::map<int, int> classes;
  for (int y : labels)
    if (y >= 0) classes.emplace(y, 0);
  int cluster_id = 0;
  for (const auto& [y, unused] : classes) {
    auto [v, count] = centroid_of([&](Index i) { return labels[static_cast<std::size_t>(i)] == y; });
    out.push_back({domain_id, cluster_id++, std::move(v)});
  }
  return out;
}

}  // namespace gk
