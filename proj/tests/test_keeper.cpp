#include <doctest.h>

#include "graphkeeper/keeper.hpp"
#include "test_util.hpp"

using namespace gk;

namespace {

struct Sequence {
  std::vector<Matrix> xs;
  std::vector<Matrix> ys;     // local one-hot
  std::vector<int> widths;
};

Sequence random_sequence(Index h, int domains, Index min_rows, Index max_rows, std::uint64_t seed) {
  Rng rng(seed);
  Sequence s;
  for (int d = 0; d < domains; ++d) {
    const Index n = min_rows + static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_rows - min_rows + 1)));
    const int c = 2 + static_cast<int>(rng.below(3));
    std::vector<int> labels;
    for (Index i = 0; i < n; ++i) labels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(c))));
    s.xs.push_back(gaussian_matrix(n, h, rng));
    s.ys.push_back(one_hot(labels, c));
    s.widths.push_back(c);
  }
  return s;
}

RidgeState run_sequence(const Sequence& s, double lambda, UpdatePath path, const std::vector<int>& order) {
  RidgeState state;
  int offset = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const int d = order[k];
    const DomainBlock block{d, {offset, offset + s.widths[d]}};
    offset += s.widths[d];
    state = k == 0 ? init_state(s.xs[d], s.ys[d], lambda, block) : update_state(state, s.xs[d], s.ys[d], block, path);
  }
  return state;
}

std::vector<int> iota_order(int n) {
  std::vector<int> o(n);
  for (int i = 0; i < n; ++i) o[i] = i;
  return o;
}

Matrix oracle_inverse(const std::vector<Matrix>& xs, double lambda) {
  const Index h = xs.front().cols();
  Matrix g = lambda * Matrix::Identity(h, h);
  for (const auto& x : xs) g += x.transpose() * x;
  return test::gauss_jordan_inverse(g);
}

}  // namespace

TEST_CASE("init_state: worked examples") {
  const RidgeState s = init_state(Matrix::Identity(2, 2), Matrix::Identity(2, 2), 1.0, {0, {0, 2}});
  CHECK((s.W - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((s.M - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(s.blocks.size() == 1);

  const Matrix x = test::random_matrix(20, 8, 1);
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) labels.push_back(i % 3);
  const Matrix y = one_hot(labels, 3);
  const RidgeState r = init_state(x, y, 0.5, {0, {0, 3}});
  CHECK((r.W - ridge_solve_batch(x, y, 0.5)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((r.W - batch_oracle({x}, {y}, 0.5)).cwiseAbs().maxCoeff() <= 1e-10);

  const RidgeState big = init_state(x, y, 1e12, {0, {0, 3}});
  CHECK(big.W.norm() <= 1e-9 * (x.transpose() * y).norm());
}

TEST_CASE("init_state: validation") {
  const Matrix x = test::random_matrix(3, 2, 1);
  Matrix y = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(init_state(x, y, 0.0, {0, {0, 3}}), ValidationError);
  CHECK_THROWS_AS(init_state(x, y, -1.0, {0, {0, 3}}), ValidationError);
  y(0, 1) = 1.0;
  CHECK_THROWS_AS(init_state(x, y, 1.0, {0, {0, 3}}), ValidationError);
  CHECK_THROWS_AS(init_state(x, Matrix::Identity(3, 3), 1.0, {0, {0, 2}}), ValidationError);
  CHECK_THROWS_AS(one_hot(std::vector<int>{0, 3}, 3), ValidationError);
}

TEST_CASE("update_state: worked Woodbury step") {
  const RidgeState s1 = init_state(Matrix::Identity(2, 2), Matrix::Identity(2, 2), 1.0, {0, {0, 2}});
  Matrix x2(1, 2), y2(1, 1), m2(2, 2), w2(2, 3);
  x2 << 1, 1;
  y2 << 1;
  m2 << 0.375, -0.125, -0.125, 0.375;
  w2 << 0.375, -0.125, 0.25, -0.125, 0.375, 0.25;
  for (UpdatePath path : {UpdatePath::kAuto, UpdatePath::kCapacitance, UpdatePath::kGram}) {
    const RidgeState s2 = update_state(s1, x2, y2, {1, {2, 3}}, path);
    CHECK((s2.M - m2).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((s2.W - w2).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(s2.column_class(2) == 2);
  }
  const Matrix oracle = batch_oracle({Matrix::Identity(2, 2), x2}, {Matrix::Identity(2, 2), y2}, 1.0);
  CHECK((oracle - w2).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("update_state: zero data contributes nothing") {
  const Matrix x = test::random_matrix(10, 4, 2);
  std::vector<int> labels{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  const RidgeState s = init_state(x, one_hot(labels, 2), 1.0, {0, {0, 2}});
  const RidgeState z = update_state(s, Matrix::Zero(3, 4), one_hot(std::vector<int>{0, 1, 2}, 3), {1, {2, 5}});
  CHECK((z.M - s.M).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((z.W.leftCols(2) - s.W).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(z.W.rightCols(3).isZero(0.0));
}

TEST_CASE("update_state: validation") {
  const RidgeState s = init_state(Matrix::Identity(2, 2), Matrix::Identity(2, 2), 1.0, {0, {0, 2}});
  const Matrix y = Matrix::Identity(1, 1);
  CHECK_THROWS_AS(update_state(s, Matrix::Ones(1, 3), y, {1, {2, 3}}), ValidationError);
  CHECK_THROWS_AS(update_state(s, Matrix::Ones(1, 2), y, {1, {1, 2}}), ValidationError);
  CHECK_THROWS_AS(update_state(s, Matrix::Ones(1, 2), y, {0, {2, 3}}), ValidationError);
  CHECK_THROWS_AS(update_state(s, Matrix::Ones(1, 2), Matrix::Identity(1, 2), {1, {2, 3}}), ValidationError);
}

TEST_CASE("recursion matches the batch solve on every prefix") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Sequence s = random_sequence(8, 4, 10, 30, seed);
    RidgeState state;
    int offset = 0;
    for (int d = 0; d < 4; ++d) {
      const DomainBlock block{d, {offset, offset + s.widths[d]}};
      offset += s.widths[d];
      state = d == 0 ? init_state(s.xs[d], s.ys[d], 1.0, block) : update_state(state, s.xs[d], s.ys[d], block);
      const std::vector<Matrix> xs(s.xs.begin(), s.xs.begin() + d + 1);
      const std::vector<Matrix> ys(s.ys.begin(), s.ys.begin() + d + 1);
      const Matrix oracle = batch_oracle(xs, ys, 1.0);
      CHECK((state.W - oracle).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK((state.M - state.M.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((state.M - oracle_inverse(xs, 1.0)).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(state.M).eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("capacitance and Gram paths agree") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Sequence s = random_sequence(6, 3, 2, 14, 100 + seed);
    const RidgeState a = run_sequence(s, 0.3, UpdatePath::kCapacitance, iota_order(3));
    const RidgeState b = run_sequence(s, 0.3, UpdatePath::kGram, iota_order(3));
    CHECK((a.W - b.W).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((a.M - b.M).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("domain order changes only the column layout") {
  const Sequence s = random_sequence(8, 3, 10, 25, 7);
  const RidgeState fwd = run_sequence(s, 1.0, UpdatePath::kAuto, {0, 1, 2});
  const RidgeState rev = run_sequence(s, 1.0, UpdatePath::kAuto, {2, 0, 1});
  // Map each domain's columns between the two layouts.
  for (int d = 0; d < 3; ++d) {
    auto find = [&](const RidgeState& st) {
      for (const auto& b : st.blocks)
        if (b.domain_id == d) return b.classes;
      FAIL("missing block");
      return ClassBlock{};
    };
    const ClassBlock a = find(fwd), b = find(rev);
    CHECK((fwd.W.middleCols(a.begin, a.width()) - rev.W.middleCols(b.begin, b.width())).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("batch_oracle is invariant to within-domain row order") {
  const Sequence s = random_sequence(5, 2, 8, 12, 3);
  const auto& ys = s.ys;
  const Matrix base = batch_oracle(s.xs, ys, 1.0);
  std::vector<Matrix> xs = s.xs, yr = ys;
  xs[1] = xs[1].colwise().reverse().eval();
  yr[1] = yr[1].colwise().reverse().eval();
  CHECK((batch_oracle(xs, yr, 1.0) - base).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("predict") {
  RidgeState s = init_state(Matrix::Identity(3, 3), Matrix::Identity(3, 3), 1.0, {0, {0, 3}});
  s.W.setZero();
  const Prediction uniform = predict(s, test::random_matrix(4, 3, 1));
  CHECK((uniform.probabilities.array() - 1.0 / 3).abs().maxCoeff() <= 1e-15);
  CHECK(uniform.classes == std::vector<int>(4, 0));

  const Sequence seq = random_sequence(6, 2, 10, 20, 9);
  const RidgeState r = run_sequence(seq, 1.0, UpdatePath::kAuto, {1, 0});
  const Matrix x = test::random_matrix(15, 6, 2);
  const Prediction p = predict(r, x);
  CHECK((p.probabilities.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
  const auto arg = argmax_rows(Matrix(x * r.W));
  for (Index i = 0; i < 15; ++i) CHECK(p.classes[i] == r.column_class(arg[i]));
  CHECK_THROWS_AS(predict(r, test::random_matrix(2, 5, 1)), ValidationError);
}
