#include "graphkeeper/metrics.hpp"

#include <string>

#include "graphkeeper/errors.hpp"

namespace gk {

void AccuracyMatrix::append_row(std::vector<double> row) {
  if (row.size() != rows_.size() + 1) {
    throw ValidationError("accuracy matrix: row " + std::to_string(rows_.size()) + " needs " +
                          std::to_string(rows_.size() + 1) + " entries, got " + std::to_string(row.size()));
  }
  for (double a : row) {
    if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("accuracy matrix: entry outside [0, 1]");
  }
  rows_.push_back(std::move(row));
}

double AccuracyMatrix::at(int i, int j) const {
  if (i < 0 || i >= size() || j < 0 || j > i) {
    throw BoundsError("accuracy matrix: (" + std::to_string(i) + ", " + std::to_string(j) + ") outside lower triangle");
  }
  return rows_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
}

Metrics metrics(const AccuracyMatrix& m) {
  const int t = m.size();
  if (t < 1) throw ValidationError("metrics: empty accuracy matrix");
  Metrics out;
  double sum = 0.0;
  for (int j = 0; j < t; ++j) sum += m.at(t - 1, j);
  out.average_accuracy = sum / t;
  if (t > 1) {
    double drop = 0.0;
    for (int j = 0; j < t - 1; ++j) drop += m.at(t - 1, j) - m.at(j, j);
    out.average_forgetting = drop / (t - 1);
  }
  return out;
}

}  // namespace gk
