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

#ifndef COVREC_RECONSTRUCTION_HPP_
#define COVREC_RECONSTRUCTION_HPP_

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covrec/detection.hpp"
#include "covrec/errors.hpp"
#include "covrec/gaussian.hpp"
#include "covrec/interferometer.hpp"

namespace covrec {

/// Which sinusoid model a sweep follows:
///   im:  y(φ) = Im{e^{-iφ} Z}
///   re:  y(θ) = Re{e^{-iθ} Z*}
enum class FitKind { im, re };

/// Samples of one moment combination over a phase grid. `sigmas` is either
/// empty or holds the standard error of each value.
struct PhaseSweep {
  std::vector<double> phases;
  std::vector<double> values;
  std::vector<double> sigmas;

  /// Lengths match, entries finite, and at least three phases are distinct
  /// modulo 2π. Throws std::invalid_argument otherwise.
  void validate() const;
};

struct SinusoidFit {
  std::complex<double> z{};
  /// sqrt(Σ residual²).
  double residual_norm = 0.0;
  std::size_t points = 0;
  /// Only when every sample has a positive standard error and dof > 0.
  std::optional<double> chi2_per_dof;
  /// Standard error of |z| propagated from the sample errors (0 if none).
  double sigma_abs = 0.0;
};

/// Linear least squares in the {cos, sin} basis. Needs at least two phases
/// that are not all equal modulo π; throws NumericalError when the design
/// matrix is rank deficient.
SinusoidFit fit_sinusoid(std::span<const double> phases,
                         std::span<const double> values, FitKind kind,
                         std::span<const double> sigmas = {});

/// Validates the sweep, then fits.
SinusoidFit fit_sinusoid(const PhaseSweep& sweep, FitKind kind);

/// n uniform points on [0, 2π).
std::vector<double> uniform_phase_grid(std::size_t n);

struct ExperimentPlan {
  /// Mean photon-pair number of the reference twin beam.
  double b_p = 1.0;
  /// Pump-phase grid for the balanced-mix and pure-twin sweeps.
  std::vector<double> phi_grid = uniform_phase_grid(12);
  /// Modulator-phase grid for the single-arm sweep.
  std::vector<double> theta_grid = uniform_phase_grid(12);
  DetectorBank det{};
  /// Empty means exact (noiseless) records.
  std::optional<std::uint64_t> shots;
  std::uint64_t seed = 0;
  VacuumArm arm = VacuumArm::two;
  NoiseModel noise{};
  /// Also evaluate the shortcut that assumes B_1 = B_2 and C_1 = C_2.
  bool assume_symmetric = false;

  /// RMS fit residual allowed on exact records.
  double residual_tolerance = 1e-8;
  /// Reduced χ² allowed on finite-shot records.
  double chi2_threshold = 4.0;
  /// Allowed disagreement between the two |C_j| estimates, in standard errors.
  double magnitude_sigmas = 5.0;

  void validate() const;
};

struct SweepPoint {
  double phase = 0.0;
  MeasurementRecord record;
};

/// Everything measured in one run: the vacuum-reference record, the
/// balanced-mix and pure-twin pump-phase sweeps, and the single-arm
/// modulator sweep.
struct ExperimentRecords {
  MeasurementRecord vacuum;
  std::vector<SweepPoint> balanced_mix;
  std::vector<SweepPoint> pure_twin;
  std::vector<SweepPoint> single_arm;
  VacuumArm arm = VacuumArm::two;
};

/// Reference preparation used at one sweep point.
ReferencePreparation preparation_for(ReferenceVariant variant,
                                     const ExperimentPlan& plan, double phase);

/// Forward model: propagates unknown ⊗ reference through the network for
/// every preparation and phase, then detects (exactly, or with the finite-shot
/// noise model seeded per record from plan.seed).
ExperimentRecords simulate_experiment(const TwoModeCoefficients& unknown,
                                      const ExperimentPlan& plan);

struct BEstimate {
  double b1 = 0.0;
  double b2 = 0.0;
  double sigma_b1 = 0.0;
  double sigma_b2 = 0.0;
  /// Set when an estimate came out negative; the raw value is kept.
  bool negative = false;
};

/// B_1 = 2(<m_1> - n_d1)/η_1 and B_2 = 2(<m_3> - n_d3)/η_3 from a record
/// taken with the reference inputs in vacuum.
BEstimate retrieve_B(const MeasurementRecord& vacuum_record,
                     const DetectorBank& det);

struct CEstimate {
  std::complex<double> c1{};
  std::complex<double> c2{};
  SinusoidFit fit1;
  SinusoidFit fit2;
  /// <ΔW_j^2>_N from the vacuum-reference record.
  std::array<double, 2> intensity_variance{};
  /// B_j^2 subtracted from <ΔW_j^2>_N; may be negative under noise.
  std::array<double, 2> abs_c_squared_vacuum{};
  std::array<double, 2> sigma_abs_c_vacuum{};
  std::array<bool, 2> magnitude_mismatch{};
};

/// Balanced-mix pump-phase sweep: subtracts the phase-independent terms from
/// <Δm_1Δm_2> (mode 1) and <Δm_3Δm_4> (mode 2) and fits Im{e^{-iφ}C_j}. The
/// magnitudes are cross-checked against the vacuum-reference variances.
CEstimate retrieve_C(const MeasurementRecord& vacuum_record,
                     std::span<const SweepPoint> sweep,
                     const ExperimentPlan& plan, const BEstimate& known_b);

/// Per-mode sweeps retrieve_C fits, exposed for inspection and export.
std::array<PhaseSweep, 2> balanced_mix_sweeps(const MeasurementRecord& vacuum_record,
                                              std::span<const SweepPoint> sweep,
                                              const ExperimentPlan& plan,
                                              const BEstimate& known_b);

/// For a state known to satisfy B_1 = B_2 and C_1 = C_2:
/// (<Δm_3Δm_4>/η_3η_4 - <Δm_1Δm_2>/η_1η_2)/sqrt(B_p(B_p+1)) = Im{e^{-iφ}C}.
SinusoidFit retrieve_C_symmetric(std::span<const SweepPoint> sweep,
                                 const ExperimentPlan& plan);

struct DEstimate {
  std::complex<double> value{};
  SinusoidFit fit;
  /// Same coefficient from the complementary detector pairs.
  std::complex<double> alternate{};
  SinusoidFit alternate_fit;
};

/// Pure-twin pump-phase sweep:
/// (<Δm_1Δm_3>/η_1η_3 - <Δm_1Δm_4>/η_1η_4)/sqrt(B_p(B_p+1)) = Im{e^{-iφ}D_12};
/// the alternate uses (<Δm_2Δm_4>/η_2η_4 - <Δm_2Δm_3>/η_2η_3).
DEstimate retrieve_D12(std::span<const SweepPoint> sweep,
                       const ExperimentPlan& plan);

/// Single-arm modulator sweep:
/// (2/B_p)(<Δm_1Δm_3>/η_1η_3 - <Δm_1Δm_4>/η_1η_4) = ±Re{e^{-iθ}D̄_12*},
/// '+' when input c'_2 is in vacuum.
DEstimate retrieve_Dbar12(std::span<const SweepPoint> sweep,
                          const ExperimentPlan& plan, VacuumArm arm);

struct StepResidual {
  std::string step;
  double residual_norm = 0.0;
  std::optional<double> chi2_per_dof;
  bool flagged = false;
};

struct CoefficientErrors {
  double b1 = 0.0;
  double b2 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double d12 = 0.0;
  double dbar12 = 0.0;

  double max() const;
};

CoefficientErrors coefficient_errors(const TwoModeCoefficients& recovered,
                                     const TwoModeCoefficients& truth);

/// Recovered twin-beam parameters when the unknown is a second copy of the
/// reference source.
struct SelfCheck {
  double nominal_b_p = 0.0;
  double nominal_phi = 0.0;
  double recovered_b_p = 0.0;
  double recovered_phi = 0.0;
  /// |D_12|^2 - B_1 B_2 - (B_1 + B_2)/2; zero for a pure twin beam.
  double purity_defect = 0.0;
  double b_p_error() const;
  /// Wrapped to [0, π].
  double phi_error() const;
};

struct ReconstructionReport {
  TwoModeCoefficients recovered;
  std::vector<StepResidual> residuals;
  std::vector<ReferencePreparation> used_preparations;
  std::optional<CoefficientErrors> ground_truth_error;
  std::optional<SelfCheck> self_check;

  /// |C_j| from the vacuum-reference variances (cross-check only); the
  /// square is kept raw since it can go negative under noise.
  std::array<double, 2> abs_c_squared_vacuum{};
  std::optional<std::complex<double>> c_symmetric;
  std::complex<double> d12_alternate{};
  std::complex<double> dbar12_alternate{};
  bool physical = true;
  std::vector<std::string> flags;
  std::optional<std::uint64_t> shots;
  std::uint64_t seed = 0;

  bool ok() const { return flags.empty(); }
};

/// Runs the retrieval steps in order B -> C -> D_12 -> D̄_12.
ReconstructionReport reconstruct(const ExperimentRecords& records,
                                 const ExperimentPlan& plan);

/// simulate_experiment + reconstruct, with ground-truth errors attached.
ReconstructionReport run_pipeline(const TwoModeCoefficients& unknown,
                                  const ExperimentPlan& plan);

/// Uses a twin beam identical to the reference (b_p from the plan, pump
/// phase `phi`) as the unknown and compares what comes back with it.
ReconstructionReport run_self_check(const ExperimentPlan& plan, double phi = 0.0);

}  // namespace covrec

#endif  // COVREC_RECONSTRUCTION_HPP_
