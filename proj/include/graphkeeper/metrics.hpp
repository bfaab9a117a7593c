#pragma once

#include <vector>

namespace gk {

// Lower-triangular record: entry (i, j), j <= i, is the accuracy on domain j
// after learning domain i. Rows are appended once and never rewritten.
class AccuracyMatrix {
 public:
  AccuracyMatrix() = default;
  explicit AccuracyMatrix(const std::vector<std::vector<double>>& rows) {
    for (const auto& r : rows) append_row(r);
  }

  // Row i must hold exactly i + 1 entries in [0, 1].
  void append_row(std::vector<double> row);

  int size() const { return static_cast<int>(rows_.size()); }
  double at(int i, int j) const;
  const std::vector<std::vector<double>>& rows() const { return rows_; }

 private:
  std::vector<std::vector<double>> rows_;
};

struct Metrics {
  double average_accuracy = 0.0;
  double average_forgetting = 0.0;
};

// AA = mean of the last row; AF = mean over j < T of (M[T][j] - M[j][j]),
// defined as 0 for a single domain.
Metrics metrics(const AccuracyMatrix& m);

}  // namespace gk
