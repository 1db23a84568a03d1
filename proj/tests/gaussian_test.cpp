// Copyright 2026 The covrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "covrec/gaussian.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "covrec/interferometer.hpp"

namespace covrec {
namespace {

using Complex = std::complex<double>;
const Complex kI(0.0, 1.0);

TwoModeCoefficients random_coefficients(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return {std::abs(g(rng)), std::abs(g(rng)), {g(rng), g(rng)},
          {g(rng), g(rng)}, {g(rng), g(rng)}, {g(rng), g(rng)}};
}

TEST(BuildCovariance, VacuumIsZero) {
  const Covariance cov = build_covariance(TwoModeCoefficients{});
  EXPECT_EQ(cov.n_modes(), 2);
  EXPECT_EQ(cov.ordering(), Ordering::normal);
  EXPECT_TRUE(cov.matrix().isZero(0.0));
}

TEST(BuildCovariance, TwinBeamLayout) {
  const double s = std::sqrt(2.0);
  const TwoModeCoefficients twin{1.0, 1.0, {}, {}, kI * s, {}};
  Eigen::Matrix4cd expected;
  // Basis (β1, β1*, β2, β2*); D block [[D̄*, D], [D*, D̄]] with D = i√2.
  expected << -1.0, 0.0, 0.0, kI * s,
              0.0, -1.0, -kI * s, 0.0,
              0.0, kI * s, -1.0, 0.0,
              -kI * s, 0.0, 0.0, -1.0;
  EXPECT_TRUE(build_covariance(twin).matrix().isApprox(expected, 1e-15));
}

TEST(BuildCovariance, RoundTripsArbitraryCoefficients) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const TwoModeCoefficients x = random_coefficients(rng);
    EXPECT_EQ(extract_coefficients(build_covariance(x)), x);
  }
}

TEST(BuildCovariance, RoundTripsFourModeCoefficients) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  FourModeCoefficients x;
  for (auto& b : x.b) b = std::abs(g(rng));
  for (auto& c : x.c) c = {g(rng), g(rng)};
  for (auto& d : x.d) d = {g(rng), g(rng)};
  for (auto& d : x.dbar) d = {g(rng), g(rng)};
  const auto y = extract_four_mode(build_covariance(x));
  EXPECT_EQ(y.b, x.b);
  EXPECT_EQ(y.c, x.c);
  EXPECT_EQ(y.d, x.d);
  EXPECT_EQ(y.dbar, x.dbar);
}

TEST(BuildCovariance, RejectsNonFinite) {
  TwoModeCoefficients x;
  x.c2 = {std::numeric_limits<double>::quiet_NaN(), 0.0};
  EXPECT_THROW(build_covariance(x), std::invalid_argument);
  x = {};
  x.b1 = std::numeric_limits<double>::infinity();
  EXPECT_THROW(build_covariance(x), std::invalid_argument);
}

TEST(Covariance, RejectsBrokenLayout) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  m(0, 0) = -1.0;  // (1,1) and (2,2) entries must agree
  EXPECT_THROW(Covariance(m, Ordering::normal), std::invalid_argument);
  EXPECT_THROW(Covariance(Eigen::MatrixXcd::Zero(3, 3), Ordering::normal),
               std::invalid_argument);
}

TEST(Covariance, MomentAccessorsMatchDefinitions) {
  const TwoModeCoefficients x{0.3, 0.7, {0.1, 0.2}, {-0.3, 0.05},
                              {0.2, -0.1}, {0.15, 0.25}};
  const Covariance cov = build_covariance(x);
  const auto n = cov.normal_moments();
  const auto m = cov.anomalous_moments();
  EXPECT_DOUBLE_EQ(n(0, 0).real(), 0.3);
  EXPECT_EQ(n(0, 1), -x.dbar12);  // <a_1^† a_2> = -D̄_12
  EXPECT_EQ(m(0, 1), x.d12);
  EXPECT_EQ(m(1, 1), x.c2);
  EXPECT_EQ(cov.dbar(0, 1), x.dbar12);
}

TEST(SymmetricOrdering, VacuumGetsHalf) {
  const Covariance sym = to_symmetric_ordering(Covariance::vacuum(2));
  EXPECT_EQ(sym.ordering(), Ordering::symmetric);
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(4, 4);
  expected.diagonal().setConstant(-0.5);
  EXPECT_TRUE(sym.matrix().isApprox(expected, 0.0) || sym.matrix() == expected);
}

TEST(SymmetricOrdering, TwiceIsAnError) {
  const Covariance sym = to_symmetric_ordering(Covariance::vacuum(2));
  EXPECT_THROW(to_symmetric_ordering(sym), std::invalid_argument);
  EXPECT_THROW(to_normal_ordering(Covariance::vacuum(2)), std::invalid_argument);
}

TEST(SymmetricOrdering, OnlyDiagonalBEntriesShift) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Covariance cov = build_covariance(random_coefficients(rng));
    const Eigen::MatrixXcd diff =
        to_symmetric_ordering(cov).matrix() - cov.matrix();
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(4, 4);
    expected.diagonal().setConstant(-0.5);
    EXPECT_TRUE(diff.isApprox(expected, 1e-15));
    EXPECT_TRUE(to_normal_ordering(to_symmetric_ordering(cov))
                    .matrix()
                    .isApprox(cov.matrix(), 1e-15));
  }
}

TEST(SymmetricOrdering, PureTwinBeamDeterminant) {
  for (double bp : {0.0, 0.5, 1.0, 5.0, 20.0}) {
    for (double phi : {0.0, 0.4, 2.0}) {
      const Covariance sym =
          to_symmetric_ordering(build_covariance(twin_beam(TwinBeamSource{bp, phi})));
      EXPECT_NEAR(sym.matrix().determinant().real(), 1.0 / 16.0, 1e-12 * (1 + bp * bp))
          << "b_p=" << bp;
      EXPECT_NEAR(sym.matrix().determinant().imag(), 0.0, 1e-12 * (1 + bp * bp));
    }
  }
}

TEST(Physicality, Examples) {
  EXPECT_TRUE(physicality_check(to_symmetric_ordering(Covariance::vacuum(2))));
  TwoModeCoefficients squeezed;
  squeezed.b1 = 1.0;
  squeezed.c1 = std::sqrt(2.0);
  EXPECT_TRUE(physicality_check(to_symmetric_ordering(build_covariance(squeezed))));
  squeezed.c1 = 2.0;
  EXPECT_FALSE(physicality_check(to_symmetric_ordering(build_covariance(squeezed))));
}

TEST(Physicality, SingleModeBoundIsSharp) {
  for (double b : {0.1, 1.0, 4.0}) {
    TwoModeCoefficients x;
    x.b1 = b;
    const double bound = std::sqrt(b * (b + 1.0));
    x.c1 = std::polar(bound * (1.0 - 1e-6), 0.7);
    EXPECT_TRUE(is_physical(x));
    x.c1 = std::polar(bound * (1.0 + 1e-3), 0.7);
    EXPECT_FALSE(is_physical(x));
  }
}

TEST(Physicality, CorrelationsBoundedByOccupations) {
  // |D_12|^2 <= b1(b2 + 1) and |D̄_12|^2 <= b1 b2 are necessary.
  TwoModeCoefficients x{1.0, 1.0, {}, {}, {}, {}};
  x.dbar12 = 1.01;
  EXPECT_FALSE(is_physical(x));
  x.dbar12 = 0.99;
  EXPECT_TRUE(is_physical(x));
  x = twin_beam(TwinBeamSource{1.0, 0.0});
  x.d12 *= 1.001;
  EXPECT_FALSE(is_physical(x));
}

TEST(CharFn, Examples) {
  const Covariance twin = build_covariance(twin_beam(TwinBeamSource{1.0, 0.0}));
  EXPECT_EQ(char_fn_eval(twin, Eigen::VectorXcd::Zero(4)), Complex(1.0));
  Eigen::VectorXcd beta(4);
  beta << Complex(0.3, 0.2), Complex(0.3, -0.2), Complex(-1.0, 0.5), Complex(-1.0, -0.5);
  EXPECT_EQ(char_fn_eval(Covariance::vacuum(2), beta), Complex(1.0));
  beta << 1.0, 1.0, 0.0, 0.0;
  EXPECT_NEAR(std::abs(char_fn_eval(twin, beta) - std::exp(-1.0)), 0.0, 1e-15);
}

TEST(CharFn, MatchesHermitianFormOnConjugatePairs) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const Covariance cov = build_covariance(random_physical_state(rng, 2.0));
  for (int trial = 0; trial < 20; ++trial) {
    const Complex b1(g(rng), g(rng)), b2(g(rng), g(rng));
    Eigen::VectorXcd beta(4);
    beta << b1, std::conj(b1), b2, std::conj(b2);
    const Complex form = (beta.adjoint() * cov.matrix() * beta)(0) / 2.0;
    EXPECT_NEAR(std::abs(char_fn_eval(cov, beta) - std::exp(form)), 0.0, 1e-12);
    // Real exponent for a Hermitian A.
    EXPECT_NEAR(form.imag(), 0.0, 1e-12);
  }
}

TEST(CharFn, RejectsBadInput) {
  const Covariance vac = Covariance::vacuum(2);
  EXPECT_THROW(char_fn_eval(vac, Eigen::VectorXcd::Zero(3)), std::invalid_argument);
  Eigen::VectorXcd beta = Eigen::VectorXcd::Zero(4);
  beta(1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(char_fn_eval(vac, beta), std::invalid_argument);
  EXPECT_THROW(char_fn_eval(to_symmetric_ordering(vac), Eigen::VectorXcd::Zero(4)),
               std::invalid_argument);
}

TEST(IntensityMoments, Examples) {
  EXPECT_EQ(intensity_moments(FourModeCoefficients{}).cross_w,
            (std::array<double, 6>{}));
  FourModeCoefficients x;
  x.b[0] = 1.0;
  x.c[0] = kI;
  x.d[pair_index(1, 3)] = Complex(1.0, 1.0);
  x.dbar[pair_index(1, 3)] = 1.0;
  const IntensityMoments w = intensity_moments(x);
  EXPECT_DOUBLE_EQ(w.mean_w[0], 1.0);
  EXPECT_DOUBLE_EQ(w.var_w[0], 2.0);
  EXPECT_DOUBLE_EQ(w.cross_w[pair_index(1, 3)], 3.0);
  EXPECT_DOUBLE_EQ(w.cross_w[pair_index(0, 1)], 0.0);
}

TEST(PairIndex, EnumeratesSixPairs) {
  for (std::size_t p = 0; p < kDetectorPairs; ++p) {
    const auto [j, k] = kDetectorPairList[p];
    EXPECT_EQ(pair_index(j, k), p);
    EXPECT_EQ(pair_index(k, j), p);
  }
}

TEST(MomentOracle, Examples) {
  EXPECT_NEAR(moment_oracle(Covariance::vacuum(2), 0, 1), 0.0, 1e-12);
  const Covariance twin = build_covariance(twin_beam(TwinBeamSource{1.0, 0.0}));
  EXPECT_NEAR(moment_oracle(twin, 0, 1), 2.0, 1e-7);
  EXPECT_THROW(moment_oracle(twin, 1, 1), std::invalid_argument);
}

TEST(MomentOracle, AgreesWithClosedFormOnFourModeStates) {
  std::mt19937_64 rng(21);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto four = build_fig1_network(random_physical_state(rng, 2.0),
                                         random_physical_state(rng, 2.0));
    const Covariance cov = build_covariance(four);
    const IntensityMoments w = intensity_moments(four);
    for (const auto& [j, k] : kDetectorPairList) {
      worst = std::max(worst, std::abs(moment_oracle(cov, j, k) -
                                       w.cross_w[pair_index(j, k)]));
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(MomentOracle, ExtendedPrecisionAgrees) {
  std::mt19937_64 rng(5);
  const auto x = random_physical_state(rng, 1.5);
  BasicTwoModeCoefficients<long double> xl{x.b1, x.b2, x.c1, x.c2, x.d12, x.dbar12};
  const auto cov = build_covariance(xl);
  const long double closed = std::norm(xl.d12) + std::norm(xl.dbar12);
  EXPECT_NEAR(static_cast<double>(moment_oracle(cov, 0, 1) - closed), 0.0, 1e-8);
}

}  // namespace
}  // namespace covrec
