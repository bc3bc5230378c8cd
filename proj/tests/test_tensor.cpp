#include <gtest/gtest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "kgran/tensor.hpp"

namespace kgran {
namespace {

using testing::check_gradients;
using testing::random_tensor;
using testing::weighted_sum;

Matrix<double> mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix<double> m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

TEST(Tensor, RejectsEmptyExtents) {
  EXPECT_THROW(Tensor<double>(0, 3), ShapeError);
  EXPECT_THROW(Tensor<double>(2, 0), ShapeError);
  Tensor<double> t(2, 3, true);
  EXPECT_EQ(t.shape(), (std::vector<Index>{2, 3}));
  EXPECT_EQ(t.grad().rows(), 2);
}

TEST(Matmul, HandExample) {
  Tape<double> tape;
  const auto y = matmul(tape.constant(mat({{1, 2}, {3, 4}})), tape.constant(mat({{1}, {1}})));
  EXPECT_EQ(y.value(), mat({{3}, {7}}));
}

TEST(Matmul, IdentityIsNeutral) {
  Rng rng(3);
  Tensor<double> a = random_tensor(rng, 4, 5);
  Tape<double> tape;
  const auto y = matmul(tape.leaf(a), tape.constant(Matrix<double>::Identity(5, 5)));
  EXPECT_EQ(y.value(), a.values());
}

TEST(Matmul, InnerDimensionMismatchThrows) {
  Tape<double> tape;
  EXPECT_THROW(matmul(tape.constant(Matrix<double>::Zero(2, 3)), tape.constant(Matrix<double>::Zero(2, 1))),
               ShapeError);
}

TEST(Matmul, AdjointIsOuterProduct) {
  Rng rng(11);
  Tensor<double> a = random_tensor(rng, 3, 4);
  Tensor<double> b = random_tensor(rng, 4, 1);
  Tape<double> tape;
  const Matrix<double> gbar = mat({{0.5}, {-1.0}, {2.0}});
  const auto loss = sum(mul(matmul(tape.leaf(a), tape.leaf(b)), tape.constant(gbar)));
  tape.backward(loss);
  EXPECT_TRUE(a.grad().isApprox(gbar * b.values().transpose(), 1e-14));
  const auto check = check_gradients({{"a", &a}, {"b", &b}}, [&](Tape<double>& t) {
    return sum(mul(matmul(t.leaf(a), t.leaf(b)), t.constant(gbar)));
  });
  EXPECT_LT(check.max_rel_error, 1e-6) << check.worst;
}

TEST(Pointwise, ClosedForms) {
  Tape<double> tape;
  const auto zero = tape.constant(Matrix<double>::Zero(1, 1));
  EXPECT_EQ(sigmoid(zero).scalar(), 0.5);
  EXPECT_EQ(tanh(zero).scalar(), 0.0);
  const auto c = concat({tape.constant(mat({{1}, {2}})), tape.constant(mat({{3}}))});
  EXPECT_EQ(c.value(), mat({{1}, {2}, {3}}));
  const auto h = hstack(std::span<const Var<double>>(std::vector<Var<double>>{tape.constant(mat({{1}, {2}})),
                                                                              tape.constant(mat({{3}, {4}}))}));
  EXPECT_EQ(h.value(), mat({{1, 3}, {2, 4}}));
  EXPECT_EQ(one_minus(tape.constant(mat({{0.25}}))).scalar(), 0.75);
  EXPECT_EQ(scale(tape.constant(mat({{2}})), 3.0).scalar(), 6.0);
}

TEST(Pointwise, ShapeMismatchThrows) {
  Tape<double> tape;
  const auto a = tape.constant(Matrix<double>::Zero(2, 1));
  const auto b = tape.constant(Matrix<double>::Zero(3, 1));
  EXPECT_THROW(add(a, b), ShapeError);
  EXPECT_THROW(mul(a, b), ShapeError);
  EXPECT_THROW(sub(a, b), ShapeError);
}

TEST(Softmax, UniformOnEqualScores) {
  Tape<double> tape;
  const auto p = softmax(tape.constant(Matrix<double>::Zero(3, 1)));
  for (Index i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(p.value()(i), 1.0 / 3.0);
}

TEST(Softmax, LargeScoresDoNotOverflow) {
  Tape<double> tape;
  const auto p = softmax(tape.constant(mat({{1000}, {0}})));
  EXPECT_TRUE(p.value().allFinite());
  EXPECT_NEAR(p.value()(0), 1.0, 1e-15);
  EXPECT_NEAR(p.value()(1), 0.0, 1e-15);
}

TEST(Softmax, SumsToOneAndPositive) {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(8));
    Vector<double> s(n);
    for (Index i = 0; i < n; ++i) s(i) = rng.uniform(-30, 30);
    const Vector<double> p = softmax_values(s);
    EXPECT_NEAR(p.sum(), 1.0, 1e-9);
    EXPECT_TRUE((p.array() > 0).all());
  }
}

TEST(Softmax, GradientMatchesFiniteDifferences) {
  Rng rng(8);
  Tensor<double> s = random_tensor(rng, 5, 1, 3.0);
  const auto check = check_gradients({{"s", &s}}, [&](Tape<double>& t) { return weighted_sum(softmax(t.leaf(s))); });
  EXPECT_LT(check.max_rel_error, 1e-6) << check.worst;
}

TEST(Backward, SumGivesOnes) {
  Rng rng(1);
  Tensor<double> x = random_tensor(rng, 3, 2);
  Tape<double> tape;
  tape.backward(sum(tape.leaf(x)));
  EXPECT_EQ(x.grad(), Matrix<double>::Ones(3, 2));
}

TEST(Backward, ProductRule) {
  Tensor<double> x(mat({{2}}), true), y(mat({{3}}), true);
  Tape<double> tape;
  tape.backward(mul(tape.leaf(x), tape.leaf(y)));
  EXPECT_EQ(x.grad()(0, 0), 3.0);
  EXPECT_EQ(y.grad()(0, 0), 2.0);
}

TEST(Backward, SecondBackwardOnSameTapeThrows) {
  Tensor<double> x(mat({{2}}), true);
  Tape<double> tape;
  const auto loss = mul(tape.leaf(x), tape.leaf(x));
  tape.backward(loss);
  EXPECT_TRUE(tape.consumed());
  EXPECT_THROW(tape.backward(loss), TapeError);
  EXPECT_EQ(x.grad()(0, 0), 4.0);
}

TEST(Backward, NonScalarLossThrows) {
  Tape<double> tape;
  EXPECT_THROW(tape.backward(tape.constant(Matrix<double>::Zero(2, 1))), ShapeError);
}

TEST(Backward, ForeignVariableThrows) {
  Tape<double> a, b;
  const auto x = a.constant(mat({{1}}));
  EXPECT_THROW(add(x, b.constant(mat({{1}}))), TapeError);
}

TEST(Backward, RunsInReverseRecordingOrder) {
  std::vector<int> visited;
  Tensor<double> x(mat({{1}}), true);
  Tape<double> tape;
  auto chain = tape.leaf(x);
  for (int k = 0; k < 4; ++k) {
    const std::size_t in = chain.id();
    Matrix<double> v = chain.value();
    chain = tape.record(std::move(v), {chain}, [&visited, k, in](Tape<double>& t, std::size_t self) {
      visited.push_back(k);
      t.accumulate(in, t.grad(self));
    });
  }
  tape.backward(chain);
  EXPECT_EQ(visited, (std::vector<int>{3, 2, 1, 0}));
  EXPECT_EQ(x.grad()(0, 0), 1.0);
}

TEST(Backward, GradientsAccumulateAcrossTapes) {
  Tensor<double> x(mat({{1.5}}), true);
  for (int k = 0; k < 3; ++k) {
    Tape<double> tape;
    tape.backward(sum(tape.leaf(x)));
  }
  EXPECT_EQ(x.grad()(0, 0), 3.0);
  x.zero_grad();
  EXPECT_EQ(x.grad()(0, 0), 0.0);
}

TEST(Backward, ConstantsReceiveNoGradient) {
  Tape<double> tape;
  const auto c = tape.constant(mat({{2}}));
  const auto y = sigmoid(c);
  EXPECT_FALSE(tape.needs_grad(y.id()));
  tape.backward(y);
  EXPECT_EQ(tape.grad(c.id()).size(), 0);
}

TEST(NegativeLog, ClampsAtFloor) {
  Tensor<double> p(mat({{0.0}, {1.0}}), true);
  Tape<double> tape;
  const auto l = negative_log(tape.leaf(p), 0, 1e-12);
  EXPECT_DOUBLE_EQ(l.scalar(), -std::log(1e-12));
  tape.backward(l);
  EXPECT_EQ(p.grad(), Matrix<double>::Zero(2, 1));
}

TEST(Dropout, IdentityCases) {
  Rng rng(4);
  Tape<double> tape;
  const auto x = tape.constant(mat({{1}, {2}, {3}}));
  EXPECT_EQ(dropout(x, 0.0, rng, true).id(), x.id());
  EXPECT_EQ(dropout(x, 0.9, rng, false).id(), x.id());
  EXPECT_EQ(rng, Rng(4));
  EXPECT_THROW(dropout(x, 1.0, rng, true), DropoutError);
  EXPECT_THROW(dropout(x, -0.1, rng, true), DropoutError);
}

TEST(Dropout, FixedSeedGivesIdenticalMask) {
  Rng a(17), b(17);
  Tape<double> tape;
  const auto x = tape.constant(Matrix<double>::Ones(50, 1));
  EXPECT_EQ(dropout(x, 0.5, a, true).value(), dropout(x, 0.5, b, true).value());
}

TEST(Dropout, InvertedScalingPreservesMean) {
  Rng rng(23);
  Tape<double> tape;
  const auto x = tape.constant(Matrix<double>::Constant(100000, 1, 2.5));
  for (double p : {0.1, 0.5, 0.8}) {
    const double mean = dropout(x, p, rng, true).value().mean();
    EXPECT_NEAR(mean, 2.5, 0.02 * 2.5) << "p=" << p;
  }
}

TEST(Dropout, GradientUsesSameMask) {
  Rng rng(2);
  Tensor<double> x = random_tensor(rng, 6, 1);
  const auto check = check_gradients({{"x", &x}}, [&](Tape<double>& t) {
    Rng local(77);
    return weighted_sum(dropout(t.leaf(x), 0.5, local, true));
  });
  EXPECT_LT(check.max_rel_error, 1e-6) << check.worst;
}

// Property sweep: every differentiable op on random small shapes.
TEST(GradientProperty, EveryOpOnRandomShapes) {
  double worst = 0.0;
  std::string where;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    const Index r = 1 + static_cast<Index>(rng.below(8));
    const Index k = 1 + static_cast<Index>(rng.below(8));
    const Index c = 1 + static_cast<Index>(rng.below(8));
    Tensor<double> a = random_tensor(rng, r, k);
    Tensor<double> b = random_tensor(rng, k, c);
    Tensor<double> p = random_tensor(rng, r, k);
    Tensor<double> q = random_tensor(rng, r, k);
    Tensor<double> col = random_tensor(rng, r, 1, 2.0);
    Tensor<double> col2 = random_tensor(rng, r, 1, 2.0);
    Tensor<double> prob(softmax_values(random_tensor(rng, r, 1).values().col(0) * 2.0), true);
    const Index pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(r)));
    const double factor = rng.uniform(-2, 2);

    const std::vector<std::pair<std::string, testing::LossFn>> cases = {
        {"matmul", [&](Tape<double>& t) { return weighted_sum(matmul(t.leaf(a), t.leaf(b))); }},
        {"add", [&](Tape<double>& t) { return weighted_sum(add(t.leaf(p), t.leaf(q))); }},
        {"sub", [&](Tape<double>& t) { return weighted_sum(sub(t.leaf(p), t.leaf(q))); }},
        {"mul", [&](Tape<double>& t) { return weighted_sum(mul(t.leaf(p), t.leaf(q))); }},
        {"scale", [&](Tape<double>& t) { return weighted_sum(scale(t.leaf(p), factor)); }},
        {"one_minus", [&](Tape<double>& t) { return weighted_sum(one_minus(t.leaf(p))); }},
        {"sigmoid", [&](Tape<double>& t) { return weighted_sum(sigmoid(t.leaf(p))); }},
        {"tanh", [&](Tape<double>& t) { return weighted_sum(tanh(t.leaf(p))); }},
        {"concat", [&](Tape<double>& t) { return weighted_sum(concat({t.leaf(col), t.leaf(col2)})); }},
        {"hstack",
         [&](Tape<double>& t) {
           const std::vector<Var<double>> parts{t.leaf(col), t.leaf(col2), t.leaf(col)};
           return weighted_sum(hstack(std::span<const Var<double>>(parts)));
         }},
        {"softmax", [&](Tape<double>& t) { return weighted_sum(softmax(t.leaf(col))); }},
        {"sum", [&](Tape<double>& t) { return sum(mul(t.leaf(p), t.leaf(p))); }},
        {"negative_log", [&](Tape<double>& t) { return negative_log(t.leaf(prob), pick, 1e-12); }},
    };
    for (const auto& [name, fn] : cases) {
      const auto check = check_gradients({{"a", &a}, {"b", &b}, {"p", &p}, {"q", &q}, {"col", &col},
                                          {"col2", &col2}, {"prob", &prob}},
                                         fn);
      if (check.max_rel_error > worst) {
        worst = check.max_rel_error;
        where = name + " seed " + std::to_string(seed) + " " + check.worst;
      }
    }
  }
  EXPECT_LT(worst, 1e-4) << where;
}

TEST(Determinism, RepeatedForwardIsBitIdentical) {
  auto run = [] {
    Rng init(9);
    Tensor<double> w = random_tensor(init, 4, 4);
    Rng drop(10);
    Tape<double> tape;
    return dropout(tanh(matmul(tape.leaf(w), tape.constant(Matrix<double>::Ones(4, 1)))), 0.3, drop, true).value();
  };
  EXPECT_EQ(run(), run());
}

TEST(Float32, OpsCompileAndAgreeWithDouble) {
  Tape<float> tf;
  Tape<double> td;
  Matrix<double> m = mat({{0.3, -0.2}, {1.1, 0.4}});
  const auto yf = softmax(matmul(tf.constant(m.cast<float>()), tf.constant(Matrix<float>::Ones(2, 1))));
  const auto yd = softmax(matmul(td.constant(m), td.constant(Matrix<double>::Ones(2, 1))));
  EXPECT_TRUE(yf.value().cast<double>().isApprox(yd.value(), 1e-6));
}

}  // namespace
}  // namespace kgran
