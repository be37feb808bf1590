#include <gtest/gtest.h>

#include <cmath>

#include "omd/diagnostics.hpp"
#include "omd/loss.hpp"
#include "oracles.hpp"

using omd::Loss;
using omd::LossKind;
using omd::LossModel;
using omd::Sample;
using omd::Vector;

namespace {

const LossKind kAll[] = {LossKind::LeastSquares, LossKind::Logistic, LossKind::Sigmoid, LossKind::SquaredHinge,
                         LossKind::Huber};
const LossKind kConvex[] = {LossKind::LeastSquares, LossKind::Logistic, LossKind::SquaredHinge, LossKind::Huber};

// Textbook forms, no stabilization.
double naive_value(LossKind k, double a, double y) {
  switch (k) {
    case LossKind::LeastSquares: return 0.5 * (a - y) * (a - y);
    case LossKind::Logistic: return std::log(1 + std::exp(-a * y));
    case LossKind::Sigmoid: return 1 / (1 + std::exp(a * y));
    case LossKind::SquaredHinge: return std::pow(std::max(0.0, 1 - a * y), 2);
    case LossKind::Huber: {
      const double u = std::abs(a - y);
      return u <= 1 ? u * u / 2 : u - 0.5;
    }
  }
  return NAN;
}

}  // namespace

TEST(Loss, ConvexFlag) {
  for (auto k : kAll) EXPECT_EQ(Loss{k}.convex(), k != LossKind::Sigmoid);
}

TEST(Loss, NameRoundTrip) {
  for (auto k : kAll) EXPECT_EQ(omd::parse_loss_kind(omd::to_string(k)), k);
  EXPECT_THROW(omd::parse_loss_kind("hinge"), omd::Error);
}

TEST(LossValue, Examples) {
  EXPECT_DOUBLE_EQ(omd::loss_value(Loss{LossKind::LeastSquares}, 3, 1), 2.0);
  EXPECT_EQ(omd::loss_value(Loss{LossKind::SquaredHinge}, 2, 1), 0.0);
  EXPECT_DOUBLE_EQ(omd::loss_value(Loss{LossKind::Huber}, 3, 0), 2.5);
}

TEST(LossValue, AgreesWithNaiveForms) {
  oracle::Gen g(20);
  for (auto k : kAll) {
    for (int i = 0; i < 1000; ++i) {
      const double a = g.uniform(-5, 5);
      const double y = g.uniform(-1, 1);
      EXPECT_NEAR(omd::loss_value(Loss{k}, a, y), naive_value(k, a, y), 1e-12) << omd::to_string(k);
    }
  }
}

TEST(LossValue, LogisticStableForLargeMargins) {
  const Loss l{LossKind::Logistic};
  EXPECT_NEAR(omd::loss_value(l, -1000, 1), 1000, 1e-9);
  // log(1 + e^-40) rounds to 0 if evaluated naively.
  EXPECT_NEAR(omd::loss_value(l, 40, 1), std::exp(-40.0), 1e-12 * std::exp(-40.0));
  EXPECT_GE(omd::loss_value(l, 1000, 1), 0.0);
  EXPECT_TRUE(std::isfinite(omd::loss_derivative(l, -1000, 1)));
  EXPECT_NEAR(omd::loss_derivative(l, -1000, 1), -1.0, 1e-15);
}

TEST(LossDerivative, Examples) {
  EXPECT_DOUBLE_EQ(omd::loss_derivative(Loss{LossKind::LeastSquares}, 3, 1), 2.0);
  EXPECT_DOUBLE_EQ(omd::loss_derivative(Loss{LossKind::Logistic}, 0, 1), -0.5);
  EXPECT_DOUBLE_EQ(omd::loss_derivative(Loss{LossKind::Huber}, 0.5, 0), 0.5);
}

TEST(LossDerivative, FiniteDifferenceProperty) {
  oracle::Gen g(21);
  for (auto k : kAll) {
    for (int i = 0; i < 1000; ++i) {
      const double a = g.uniform(-4, 4);
      const double y = g.uniform(-1, 1);
      if (std::abs(std::abs(a - y) - 1) < 1e-3 || std::abs(a * y - 1) < 1e-3) continue;
      const double h = 1e-6;
      const double fd = (naive_value(k, a + h, y) - naive_value(k, a - h, y)) / (2 * h);
      EXPECT_NEAR(omd::loss_derivative(Loss{k}, a, y), fd, 1e-6) << omd::to_string(k);
    }
  }
}

TEST(LipschitzConstant, Examples) {
  EXPECT_EQ(omd::lipschitz_constant(Loss{LossKind::LeastSquares}), 1.0);
  EXPECT_EQ(omd::lipschitz_constant(Loss{LossKind::Logistic}), 0.25);
  EXPECT_EQ(omd::lipschitz_constant(Loss{LossKind::SquaredHinge}), 2.0);
  EXPECT_EQ(omd::lipschitz_constant(Loss{LossKind::Huber}), 1.0);
  EXPECT_NEAR(omd::lipschitz_constant(Loss{LossKind::Sigmoid}), 1.0 / (6.0 * std::sqrt(3.0)), 1e-15);
}

// Supremum of |phi'(a) - phi'(b)| / |a - b| over a dense grid, labels in [-1, 1].
TEST(LipschitzConstant, DifferenceQuotientSupremum) {
  for (auto k : kAll) {
    const double ell = omd::lipschitz_constant(Loss{k});
    double sup = 0;
    for (double y = -1; y <= 1.0 + 1e-12; y += 0.125) {
      double prev = omd::loss_derivative(Loss{k}, -6, y);
      for (double a = -6 + 1e-3; a <= 6; a += 1e-3) {
        const double cur = omd::loss_derivative(Loss{k}, a, y);
        sup = std::max(sup, std::abs(cur - prev) / 1e-3);
        prev = cur;
      }
    }
    EXPECT_LE(sup, ell + 1e-8) << omd::to_string(k);
    EXPECT_GE(sup, 0.99 * ell) << omd::to_string(k) << " declared constant is not tight";
  }
}

TEST(SampleGradient, Examples) {
  const LossModel ls(Loss{LossKind::LeastSquares}, 0.0);
  EXPECT_EQ(omd::sample_gradient(ls, {0, 0}, Sample{{1, 0}, 1}), (Vector{-1, 0}));
  for (auto k : kAll) {
    const Vector g = omd::sample_gradient(LossModel(Loss{k}, 0.0), {0.3, -2}, Sample{omd::zeros(2), 0.5});
    EXPECT_EQ(g, omd::zeros(2));
  }
  const LossModel reg(Loss{LossKind::LeastSquares}, 1.0);
  EXPECT_EQ(omd::sample_gradient(reg, {1, 0}, Sample{{1, 0}, 1}), (Vector{2, 0}));
}

TEST(SampleGradient, MatchesFiniteDifferenceOfSampleLoss) {
  oracle::Gen g(22);
  for (auto k : kAll) {
    const LossModel m(Loss{k}, 0.3);
    for (int i = 0; i < 200; ++i) {
      const Vector w(g.vec(3, -2, 2));
      const Sample z{Vector(g.vec(3, -1, 1)), g.uniform(-1, 1)};
      const Vector grad = omd::sample_gradient(m, w, z);
      for (size_t j = 0; j < 3; ++j) {
        Vector a = w, b = w;
        a[j] += 1e-6;
        b[j] -= 1e-6;
        const double fd = (omd::sample_loss(m, a, z) - omd::sample_loss(m, b, z)) / 2e-6;
        EXPECT_NEAR(grad[j], fd, 1e-5) << omd::to_string(k);
      }
    }
  }
}

TEST(LossModel, RejectsNegativeLambda) {
  EXPECT_THROW(LossModel(Loss{LossKind::LeastSquares}, -0.1), omd::DomainError);
}

TEST(SmoothnessBound, Examples) {
  const LossModel ls(Loss{LossKind::LeastSquares}, 0.0);
  EXPECT_EQ(omd::smoothness_bound(ls, 1.0), 2.0);
  EXPECT_EQ(omd::sharp_smoothness_bound(ls, 1.0), 1.0);
  EXPECT_EQ(omd::smoothness_bound(ls, 0.0), 0.0);
  EXPECT_EQ(omd::smoothness_bound(LossModel(Loss{LossKind::SquaredHinge}, 0.5), 2.0), 17.0);
  EXPECT_EQ(omd::sharp_smoothness_bound(LossModel(Loss{LossKind::SquaredHinge}, 0.5), 2.0), 17.0);
}

TEST(Cocoercivity, Examples) {
  const LossModel ls(Loss{LossKind::LeastSquares}, 0.0);
  const Sample z{{1, 0}, 0};
  EXPECT_EQ(omd::cocoercivity_margin(ls, z, {0.4, 1}, {0.4, 1}, 1.0), 0.0);
  EXPECT_NEAR(omd::cocoercivity_margin(ls, z, {1, 0}, {0, 0}, 1.0), 0.0, 1e-15);
  EXPECT_THROW(omd::cocoercivity_margin(LossModel(Loss{LossKind::Sigmoid}, 0.0), z, {1, 0}, {0, 0}, 1.0),
               omd::DomainError);
}

TEST(Cocoercivity, RandomInstancesProperty) {
  oracle::Gen g(23);
  double worst = INFINITY;
  for (auto k : kConvex) {
    for (int i = 0; i < 10000 / 4; ++i) {
      const double lambda = g.uniform(0, 1);
      const LossModel m(Loss{k}, lambda);
      const double R = g.uniform(0.1, 3);
      Vector x(g.vec(3, -1, 1));
      const double nx = omd::p_norm(x, 2.0);
      if (nx > 0) x *= g.uniform(0, R) / nx;
      const Sample z{x, g.uniform(-1, 1)};
      const double margin = omd::cocoercivity_margin(m, z, Vector(g.vec(3, -4, 4)), Vector(g.vec(3, -4, 4)),
                                                     omd::smoothness_bound(m, R));
      worst = std::min(worst, margin);
    }
  }
  EXPECT_GE(worst, -1e-10);
}

TEST(Convexity, MidpointInequalityProperty) {
  oracle::Gen g(24);
  for (auto k : kConvex) {
    const LossModel m(Loss{k}, 0.2);
    for (int i = 0; i < 2000; ++i) {
      const Vector a(g.vec(3, -4, 4));
      const Vector b(g.vec(3, -4, 4));
      const Sample z{Vector(g.vec(3, -1, 1)), g.uniform(-1, 1)};
      const Vector mid = 0.5 * (a + b);
      EXPECT_LE(omd::sample_loss(m, mid, z), 0.5 * (omd::sample_loss(m, a, z) + omd::sample_loss(m, b, z)) + 1e-12);
    }
  }
}
