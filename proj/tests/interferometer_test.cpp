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

#include "covrec/interferometer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"

namespace covrec {
namespace {

using Complex = std::complex<double>;
const Complex kI(0.0, 1.0);

void expect_coefficients_near(const TwoModeCoefficients& a,
                              const TwoModeCoefficients& b, double tol) {
  EXPECT_NEAR(a.b1, b.b1, tol);
  EXPECT_NEAR(a.b2, b.b2, tol);
  EXPECT_NEAR(std::abs(a.c1 - b.c1), 0.0, tol);
  EXPECT_NEAR(std::abs(a.c2 - b.c2), 0.0, tol);
  EXPECT_NEAR(std::abs(a.d12 - b.d12), 0.0, tol);
  EXPECT_NEAR(std::abs(a.dbar12 - b.dbar12), 0.0, tol);
}

double total_photons(const Covariance& cov) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < cov.n_modes(); ++j) sum += cov.b(j);
  return sum;
}

TEST(TwinBeam, Examples) {
  EXPECT_EQ(twin_beam(TwinBeamSource{0.0, 1.3}), TwoModeCoefficients{});
  const auto t0 = twin_beam(TwinBeamSource{1.0, 0.0});
  EXPECT_DOUBLE_EQ(t0.b1, 1.0);
  EXPECT_DOUBLE_EQ(t0.b2, 1.0);
  EXPECT_NEAR(std::abs(t0.d12 - Complex(0.0, 1.41421356237309505)), 0.0, 1e-15);
  const auto t1 = twin_beam(TwinBeamSource{1.0, std::numbers::pi / 2});
  EXPECT_NEAR(std::abs(t1.d12 - Complex(-std::sqrt(2.0), 0.0)), 0.0, 1e-15);
  EXPECT_EQ(t1.c1, Complex{});
  EXPECT_EQ(t1.dbar12, Complex{});
  EXPECT_THROW(twin_beam(TwinBeamSource{-0.1, 0.0}), std::invalid_argument);
}

TEST(TwinBeam, MatchesParametricAmplifierOnVacuum) {
  // a_1 -> cosh(√G) a_1 + i e^{iφ} sinh(√G) a_2^†, and symmetrically.
  for (double gain : {0.0, 0.3, 1.0, 2.5}) {
    const double phi = 0.8;
    const double g = std::sqrt(gain);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(2, 2) * std::cosh(g);
    Eigen::MatrixXcd v(2, 2);
    const Complex off = kI * std::polar(std::sinh(g), phi);
    v << 0.0, off, off, 0.0;
    const auto amplified =
        extract_coefficients(apply_bogoliubov(Covariance::vacuum(2), u, v));
    expect_coefficients_near(amplified, twin_beam(TwinBeamSource::from_gain(gain, phi)),
                             1e-12);
  }
}

TEST(BeamSplitter, ValidatesTransmissivity) {
  EXPECT_THROW(BeamSplitter(1.2, 0.0), std::invalid_argument);
  EXPECT_THROW(BeamSplitter(-0.1, 0.0), std::invalid_argument);
  const BeamSplitter bs(0.6, 0.3);
  EXPECT_DOUBLE_EQ(bs.r(), 0.8);
}

TEST(BeamSplitter, IdentityWhenFullyTransmitting) {
  std::mt19937_64 rng(1);
  const auto x = random_physical_state(rng, 2.0);
  expect_coefficients_near(apply_beam_splitter(x, BeamSplitter(1.0, 0.4)), x, 1e-15);
}

TEST(BeamSplitter, BalancedMixOfTwinBeamGivesOppositeSqueezing) {
  for (double bp : {0.1, 1.0, 10.0}) {
    for (double phi : {0.0, 1.1, -2.0}) {
      const auto out =
          apply_beam_splitter(twin_beam(TwinBeamSource{bp, phi}), BeamSplitter::balanced());
      const Complex expected = kI * std::polar(1.0, phi) * std::sqrt(bp * (bp + 1.0));
      EXPECT_NEAR(std::abs(out.c1 - expected), 0.0, 1e-12 * (1 + bp));
      EXPECT_NEAR(std::abs(out.c2 + expected), 0.0, 1e-12 * (1 + bp));
      EXPECT_NEAR(std::abs(out.d12), 0.0, 1e-12 * (1 + bp));
      EXPECT_NEAR(out.b1, bp, 1e-12 * (1 + bp));
      EXPECT_NEAR(out.b2, bp, 1e-12 * (1 + bp));
    }
  }
}

TEST(BeamSplitter, AgreesWithHeisenbergPropagation) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = random_physical_state(rng, 3.0);
    const double t = unit(rng);
    const double theta = 2 * std::numbers::pi * unit(rng);
    const auto expected = oracle::coefficients_of(
        oracle::propagate(oracle::moments_of(x), oracle::splitter(t, theta)));
    expect_coefficients_near(apply_beam_splitter(x, BeamSplitter(t, theta)), expected,
                             1e-12);
  }
}

TEST(BeamSplitter, RejectsInvalidModes) {
  const Covariance vac = Covariance::vacuum(2);
  EXPECT_THROW(apply_beam_splitter(vac, 0, 0, BeamSplitter()), std::invalid_argument);
  EXPECT_THROW(apply_beam_splitter(vac, 0, 2, BeamSplitter()), std::invalid_argument);
  EXPECT_THROW(apply_phase_shift(vac, 3, 0.1), std::invalid_argument);
  EXPECT_THROW(apply_beam_splitter(to_symmetric_ordering(vac), 0, 1, BeamSplitter()),
               std::invalid_argument);
}

TEST(PhaseShift, Examples) {
  std::mt19937_64 rng(4);
  const auto x = random_physical_state(rng, 2.0);
  expect_coefficients_near(apply_phase_shift(x, 0, 0.0), x, 1e-15);

  TwoModeCoefficients squeezed;
  squeezed.b1 = 1.0;
  squeezed.c1 = 1.0;
  EXPECT_NEAR(std::abs(apply_phase_shift(squeezed, 0, std::numbers::pi).c1 - 1.0), 0.0,
              1e-15);

  const auto twin = twin_beam(TwinBeamSource{1.0, 0.0});
  EXPECT_NEAR(std::abs(apply_phase_shift(twin, 0, std::numbers::pi / 2).d12 -
                       kI * twin.d12),
              0.0, 1e-15);
}

TEST(PhaseShift, TransformsEachCoefficient) {
  std::mt19937_64 rng(6);
  const auto x = random_physical_state(rng, 2.0);
  const double theta = 0.37;
  const Complex e = std::polar(1.0, theta);
  const auto y = apply_phase_shift(x, 0, theta);
  EXPECT_NEAR(y.b1, x.b1, 1e-14);
  EXPECT_NEAR(std::abs(y.c1 - e * e * x.c1), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(y.c2 - x.c2), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(y.d12 - e * x.d12), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(y.dbar12 - std::conj(e) * x.dbar12), 0.0, 1e-14);
  const auto z = apply_phase_shift(x, 1, theta);
  EXPECT_NEAR(std::abs(z.dbar12 - e * x.dbar12), 0.0, 1e-14);
}

TEST(Squeezer, VacuumBecomesPureSqueezedState) {
  const double r = 0.6, psi = 1.2;
  const auto x = extract_coefficients(apply_squeezer(Covariance::vacuum(2), 0, r, psi));
  EXPECT_NEAR(x.b1, std::sinh(r) * std::sinh(r), 1e-14);
  EXPECT_NEAR(std::abs(x.c1 + std::polar(std::cosh(r) * std::sinh(r), psi)), 0.0, 1e-14);
  EXPECT_NEAR(std::norm(x.c1), x.b1 * (x.b1 + 1.0), 1e-12);
  EXPECT_TRUE(is_physical(x));
}

TEST(PassiveTransforms, PreservePhotonNumberAndPhysicality) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Covariance cov = build_covariance(
        build_fig1_network(random_physical_state(rng, 2.0), random_physical_state(rng, 2.0)));
    const double before = total_photons(cov);
    for (int step = 0; step < 5; ++step) {
      const auto j = static_cast<Eigen::Index>(4 * unit(rng));
      const auto k = (j + 1 + static_cast<Eigen::Index>(3 * unit(rng))) % 4;
      cov = unit(rng) < 0.5
                ? apply_beam_splitter(cov, j, k, BeamSplitter(unit(rng), 6.28 * unit(rng)))
                : apply_phase_shift(cov, j, 6.28 * unit(rng));
    }
    EXPECT_NEAR(total_photons(cov), before, 1e-12 * (1 + before));
    EXPECT_TRUE(physicality_check(cov));
  }
}

TEST(RandomState, IsPhysicalAndBounded) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 500; ++trial) {
    const auto x = random_physical_state(rng, 1.5);
    EXPECT_TRUE(is_physical(x));
    EXPECT_GE(x.b1, 0.0);
    EXPECT_LE(x.b1, 1.5 + 1e-12);
    EXPECT_LE(x.b2, 1.5 + 1e-12);
  }
}

TEST(PrepareReference, PureTwin) {
  ReferencePreparation prep;
  prep.variant = ReferenceVariant::pure_twin;
  prep.source = {1.0, 0.0};
  expect_coefficients_near(prepare_reference(prep),
                           {1.0, 1.0, {}, {}, kI * std::sqrt(2.0), {}}, 1e-15);
}

TEST(PrepareReference, BalancedMix) {
  ReferencePreparation prep;
  prep.variant = ReferenceVariant::balanced_mix;
  prep.source = {1.0, 0.0};
  const auto r = prepare_reference(prep);
  EXPECT_NEAR(std::abs(r.c1 - kI * std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r.c2 + kI * std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r.d12), 0.0, 1e-15);
}

TEST(PrepareReference, SingleArmVacuumSigns) {
  for (double bp : {0.1, 1.0, 10.0}) {
    ReferencePreparation prep;
    prep.variant = ReferenceVariant::single_arm_vacuum;
    prep.source = {bp, 0.9};
    prep.arm = VacuumArm::two;
    const auto plus = prepare_reference(prep);
    expect_coefficients_near(plus, {bp / 2, bp / 2, {}, {}, {}, bp / 2}, 1e-12 * (1 + bp));
    prep.arm = VacuumArm::one;
    const auto minus = prepare_reference(prep);
    expect_coefficients_near(minus, {bp / 2, bp / 2, {}, {}, {}, -bp / 2}, 1e-12 * (1 + bp));
  }
}

TEST(PrepareReference, ModulatorRotatesDbar) {
  ReferencePreparation prep;
  prep.variant = ReferenceVariant::single_arm_vacuum;
  prep.source = {1.0, 0.0};
  prep.modulator_theta = 0.5;
  const auto r = prepare_reference(prep);
  EXPECT_NEAR(std::abs(r.dbar12 - std::polar(0.5, -0.5)), 0.0, 1e-15);
}

TEST(PrepareReference, VacuumVariant) {
  ReferencePreparation prep;
  prep.variant = ReferenceVariant::vacuum;
  prep.source = {3.0, 0.0};
  EXPECT_EQ(prepare_reference(prep), TwoModeCoefficients{});
}

TEST(Fig1Network, VacuumInputs) {
  const auto out = build_fig1_network(TwoModeCoefficients{}, TwoModeCoefficients{});
  for (double b : out.b) EXPECT_EQ(b, 0.0);
  for (auto d : out.d) EXPECT_EQ(d, Complex{});
}

TEST(Fig1Network, VacuumUnknownPureTwinReference) {
  const auto out =
      build_fig1_network(TwoModeCoefficients{}, twin_beam(TwinBeamSource{1.0, 0.0}));
  for (double b : out.b) EXPECT_NEAR(b, 0.5, 1e-15);
}

TEST(Fig1Network, AgreesWithHeisenbergPropagation) {
  std::mt19937_64 rng(12);
  const std::array<double, 4> unit_eta{1, 1, 1, 1}, no_dark{};
  for (int trial = 0; trial < 100; ++trial) {
    const auto unknown = random_physical_state(rng, 2.0);
    const auto reference = random_physical_state(rng, 2.0);
    const auto w = intensity_moments(build_fig1_network(unknown, reference));
    const auto direct = oracle::network_moments(unknown, reference, unit_eta, no_dark);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(w.mean_w[j], direct.mean[j], 1e-12);
    for (std::size_t p = 0; p < 6; ++p) EXPECT_NEAR(w.cross_w[p], direct.cross[p], 1e-12);
  }
}

TEST(Fig1Network, RejectsUnphysicalInputs) {
  TwoModeCoefficients bad;
  bad.b1 = 1.0;
  bad.c1 = 2.0;
  EXPECT_THROW(build_fig1_network(bad, TwoModeCoefficients{}), std::invalid_argument);
  EXPECT_THROW(build_fig1_network(TwoModeCoefficients{}, bad), std::invalid_argument);
}

}  // namespace
}  // namespace covrec
