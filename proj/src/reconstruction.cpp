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

#include "covrec/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace covrec {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phase(double phase) {
  double w = std::fmod(phase, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

double reference_contrast(double b_p) { return std::sqrt(b_p * (b_p + 1.0)); }

void require_contrast(double b_p) {
  if (!(b_p > 0.0) || !std::isfinite(b_p)) {
    throw std::invalid_argument("reference needs b_p > 0 for phase contrast");
  }
}

// <Δm_j Δm_k>/(η_j η_k) and its standard error.
struct Normalized {
  double value;
  double sigma;
};

Normalized normalized_cross(const MeasurementRecord& r, const DetectorBank& det,
                            std::size_t j, std::size_t k) {
  const double scale = det.eta[j] * det.eta[k];
  return {r.cross(j, k) / scale, r.cross_sigma(j, k) / scale};
}

// (first - second) * factor, errors added in quadrature.
Normalized difference(Normalized first, Normalized second, double factor) {
  return {(first.value - second.value) * factor,
          std::hypot(first.sigma, second.sigma) * std::abs(factor)};
}

template <typename Combine>
PhaseSweep collect(std::span<const SweepPoint> sweep, Combine&& combine) {
  PhaseSweep out;
  bool all_sigmas = true;
  for (const auto& point : sweep) {
    const Normalized v = combine(point.record);
    out.phases.push_back(point.phase);
    out.values.push_back(v.value);
    out.sigmas.push_back(v.sigma);
    all_sigmas = all_sigmas && v.sigma > 0.0;
  }
  if (!all_sigmas) out.sigmas.clear();
  return out;
}

bool residual_flagged(const SinusoidFit& fit, const ExperimentPlan& plan) {
  if (fit.chi2_per_dof) return *fit.chi2_per_dof > plan.chi2_threshold;
  if (fit.points == 0) return false;
  return fit.residual_norm / std::sqrt(static_cast<double>(fit.points)) >
         plan.residual_tolerance;
}

StepResidual make_residual(std::string step, const SinusoidFit& fit,
                           const ExperimentPlan& plan) {
  return {std::move(step), fit.residual_norm, fit.chi2_per_dof,
          residual_flagged(fit, plan)};
}

}  // namespace

void PhaseSweep::validate() const {
  if (phases.size() != values.size()) {
    throw std::invalid_argument("phase sweep lengths differ");
  }
  if (!sigmas.empty() && sigmas.size() != values.size()) {
    throw std::invalid_argument("phase sweep sigma length differs");
  }
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (!std::isfinite(phases[i]) || !std::isfinite(values[i])) {
      throw std::invalid_argument("non-finite phase sweep entry");
    }
  }
  std::vector<double> wrapped;
  wrapped.reserve(phases.size());
  for (double p : phases) wrapped.push_back(wrap_phase(p));
  std::sort(wrapped.begin(), wrapped.end());
  constexpr double kSame = 1e-12;
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < wrapped.size(); ++i) {
    if (i == 0 || wrapped[i] - wrapped[i - 1] > kSame) ++distinct;
  }
  if (distinct > 1 && kTwoPi - wrapped.back() + wrapped.front() <= kSame) {
    --distinct;
  }
  if (distinct < 3) {
    throw std::invalid_argument("phase sweep needs >= 3 distinct phases mod 2pi");
  }
}

SinusoidFit fit_sinusoid(std::span<const double> phases,
                         std::span<const double> values, FitKind kind,
                         std::span<const double> sigmas) {
  const auto n = static_cast<Eigen::Index>(phases.size());
  if (values.size() != phases.size() ||
      (!sigmas.empty() && sigmas.size() != phases.size())) {
    throw std::invalid_argument("sinusoid fit inputs differ in length");
  }
  if (n < 2) throw NumericalError("sinusoid fit needs at least two phases");
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = std::cos(phases[i]);
    design(i, 1) = std::sin(phases[i]);
    y(i) = values[i];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design,
                                         Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(1) <= 1e-10 * sv(0)) {
    throw NumericalError("phase grid is degenerate modulo pi");
  }
  const Eigen::Vector2d coef = svd.solve(y);
  const Eigen::VectorXd residual = y - design * coef;

  SinusoidFit fit;
  fit.points = static_cast<std::size_t>(n);
  fit.residual_norm = residual.norm();
  const double a = coef(0);
  const double b = coef(1);
  fit.z = kind == FitKind::im ? std::complex<double>(-b, a)
                              : std::complex<double>(a, -b);

  const bool weighted =
      !sigmas.empty() &&
      std::all_of(sigmas.begin(), sigmas.end(), [](double s) { return s > 0.0; });
  if (weighted) {
    const Eigen::Matrix2d gram_inv = (design.transpose() * design).inverse();
    Eigen::Matrix2d middle = Eigen::Matrix2d::Zero();
    double chi2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s2 = sigmas[i] * sigmas[i];
      middle += s2 * design.row(i).transpose() * design.row(i);
      chi2 += residual(i) * residual(i) / s2;
    }
    const Eigen::Matrix2d cov = gram_inv * middle * gram_inv;
    const double mag = std::hypot(a, b);
    if (mag > 1e-300) {
      const Eigen::Vector2d g(a / mag, b / mag);
      fit.sigma_abs = std::sqrt(std::max(0.0, g.dot(cov * g)));
    } else {
      fit.sigma_abs = std::sqrt(cov.trace() / 2.0);
    }
    if (n > 2) fit.chi2_per_dof = chi2 / static_cast<double>(n - 2);
  }
  return fit;
}

SinusoidFit fit_sinusoid(const PhaseSweep& sweep, FitKind kind) {
  sweep.validate();
  return fit_sinusoid(sweep.phases, sweep.values, kind, sweep.sigmas);
}

std::vector<double> uniform_phase_grid(std::size_t n) {
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
  }
  return grid;
}

void ExperimentPlan::validate() const {
  require_contrast(b_p);
  det.validate();
  if (shots && *shots < 2) throw std::invalid_argument("shots must be >= 2");
  PhaseSweep phi{phi_grid, std::vector<double>(phi_grid.size(), 0.0), {}};
  phi.validate();
  PhaseSweep theta{theta_grid, std::vector<double>(theta_grid.size(), 0.0), {}};
  theta.validate();
  if (!(noise.multiplier >= 0.0)) {
    throw std::invalid_argument("noise multiplier must be >= 0");
  }
}

ReferencePreparation preparation_for(ReferenceVariant variant,
                                     const ExperimentPlan& plan, double phase) {
  ReferencePreparation prep;
  prep.variant = variant;
  prep.source = TwinBeamSource{plan.b_p, 0.0};
  prep.arm = plan.arm;
  switch (variant) {
    case ReferenceVariant::vacuum:
      break;
    case ReferenceVariant::pure_twin:
    case ReferenceVariant::balanced_mix:
      prep.source.phi = phase;
      break;
    case ReferenceVariant::single_arm_vacuum:
      prep.modulator_theta = phase;
      break;
  }
  return prep;
}

ExperimentRecords simulate_experiment(const TwoModeCoefficients& unknown,
                                      const ExperimentPlan& plan) {
  plan.validate();
  if (!is_physical(unknown)) {
    throw std::invalid_argument("unknown state is not physical");
  }
  std::uint64_t stream = 0;
  auto measure = [&](const ReferencePreparation& prep) {
    const FourModeCoefficients state =
        build_fig1_network(unknown, prepare_reference(prep));
    const std::uint64_t index = stream++;
    if (!plan.shots) return exact_measurement(state, plan.det);
    return sample_measurement(state, plan.det, *plan.shots,
                              derive_seed(plan.seed, index), plan.noise);
  };
  auto sweep = [&](ReferenceVariant variant, const std::vector<double>& grid) {
    std::vector<SweepPoint> out;
    out.reserve(grid.size());
    for (double phase : grid) {
      out.push_back({phase, measure(preparation_for(variant, plan, phase))});
    }
    return out;
  };

  ExperimentRecords records;
  records.arm = plan.arm;
  records.vacuum = measure(preparation_for(ReferenceVariant::vacuum, plan, 0.0));
  records.balanced_mix = sweep(ReferenceVariant::balanced_mix, plan.phi_grid);
  records.pure_twin = sweep(ReferenceVariant::pure_twin, plan.phi_grid);
  records.single_arm = sweep(ReferenceVariant::single_arm_vacuum, plan.theta_grid);
  return records;
}

BEstimate retrieve_B(const MeasurementRecord& vacuum_record,
                     const DetectorBank& det) {
  det.validate();
  BEstimate out;
  out.b1 = 2.0 * (vacuum_record.mean_m[0] - det.dark[0]) / det.eta[0];
  out.b2 = 2.0 * (vacuum_record.mean_m[2] - det.dark[2]) / det.eta[2];
  out.sigma_b1 = 2.0 * vacuum_record.sigma_mean[0] / det.eta[0];
  out.sigma_b2 = 2.0 * vacuum_record.sigma_mean[2] / det.eta[2];
  out.negative = out.b1 < 0.0 || out.b2 < 0.0;
  return out;
}

std::array<PhaseSweep, 2> balanced_mix_sweeps(const MeasurementRecord& vacuum_record,
                                              std::span<const SweepPoint> sweep,
                                              const ExperimentPlan& plan,
                                              const BEstimate& known_b) {
  require_contrast(plan.b_p);
  const double bp = plan.b_p;
  const double s = reference_contrast(bp);
  const DetectorBank& det = plan.det;
  const std::array<double, 2> b{known_b.b1, known_b.b2};
  const std::array<std::pair<std::size_t, std::size_t>, 2> pairs{{{0, 1}, {2, 3}}};
  // Mode 1 carries -Im{e^{-iφ}C_1}, mode 2 carries +Im{e^{-iφ}C_2}.
  const std::array<double, 2> sign{-1.0, 1.0};

  std::array<PhaseSweep, 2> out;
  for (std::size_t mode = 0; mode < 2; ++mode) {
    const auto [j, k] = pairs[mode];
    const double variance = 4.0 * normalized_cross(vacuum_record, det, j, k).value;
    const double offset =
        (2.0 * bp * bp + bp * (1.0 - 2.0 * b[mode]) + variance) / 4.0;
    const double factor = sign[mode] * 2.0 / s;
    out[mode] = collect(sweep, [&](const MeasurementRecord& r) {
      const Normalized m = normalized_cross(r, det, j, k);
      return Normalized{(m.value - offset) * factor, m.sigma * std::abs(factor)};
    });
  }
  return out;
}

CEstimate retrieve_C(const MeasurementRecord& vacuum_record,
                     std::span<const SweepPoint> sweep,
                     const ExperimentPlan& plan, const BEstimate& known_b) {
  const auto sweeps = balanced_mix_sweeps(vacuum_record, sweep, plan, known_b);
  const DetectorBank& det = plan.det;
  CEstimate out;
  out.fit1 = fit_sinusoid(sweeps[0], FitKind::im);
  out.fit2 = fit_sinusoid(sweeps[1], FitKind::im);
  out.c1 = out.fit1.z;
  out.c2 = out.fit2.z;

  const std::array<std::pair<std::size_t, std::size_t>, 2> pairs{{{0, 1}, {2, 3}}};
  const std::array<double, 2> b{known_b.b1, known_b.b2};
  const std::array<double, 2> sigma_b{known_b.sigma_b1, known_b.sigma_b2};
  const std::array<const SinusoidFit*, 2> fits{&out.fit1, &out.fit2};
  for (std::size_t mode = 0; mode < 2; ++mode) {
    const auto [j, k] = pairs[mode];
    const Normalized m = normalized_cross(vacuum_record, det, j, k);
    out.intensity_variance[mode] = 4.0 * m.value;
    out.abs_c_squared_vacuum[mode] = 4.0 * m.value - b[mode] * b[mode];
    const double sigma_sq =
        std::hypot(4.0 * m.sigma, 2.0 * b[mode] * sigma_b[mode]);
    const double mag = std::sqrt(std::max(0.0, out.abs_c_squared_vacuum[mode]));
    out.sigma_abs_c_vacuum[mode] = sigma_sq / (2.0 * mag + std::sqrt(sigma_sq));
    if (!std::isfinite(out.sigma_abs_c_vacuum[mode])) out.sigma_abs_c_vacuum[mode] = 0.0;

    // Compared as squares: the square root is ill-conditioned near |C| = 0.
    const double fitted = std::abs(fits[mode]->z);
    const double sigma = std::hypot(sigma_sq, 2.0 * fitted * fits[mode]->sigma_abs);
    const double allowed = plan.magnitude_sigmas * sigma +
                           plan.residual_tolerance * (1.0 + out.intensity_variance[mode]);
    out.magnitude_mismatch[mode] =
        std::abs(fitted * fitted - out.abs_c_squared_vacuum[mode]) > allowed;
  }
  return out;
}

SinusoidFit retrieve_C_symmetric(std::span<const SweepPoint> sweep,
                                 const ExperimentPlan& plan) {
  require_contrast(plan.b_p);
  const double factor = 1.0 / reference_contrast(plan.b_p);
  const auto values = collect(sweep, [&](const MeasurementRecord& r) {
    return difference(normalized_cross(r, plan.det, 2, 3),
                      normalized_cross(r, plan.det, 0, 1), factor);
  });
  return fit_sinusoid(values, FitKind::im);
}

DEstimate retrieve_D12(std::span<const SweepPoint> sweep,
                       const ExperimentPlan& plan) {
  require_contrast(plan.b_p);
  const double factor = 1.0 / reference_contrast(plan.b_p);
  DEstimate out;
  out.fit = fit_sinusoid(collect(sweep,
                                 [&](const MeasurementRecord& r) {
                                   return difference(
                                       normalized_cross(r, plan.det, 0, 2),
                                       normalized_cross(r, plan.det, 0, 3), factor);
                                 }),
                         FitKind::im);
  out.alternate_fit = fit_sinusoid(
      collect(sweep,
              [&](const MeasurementRecord& r) {
                return difference(normalized_cross(r, plan.det, 1, 3),
                                  normalized_cross(r, plan.det, 1, 2), factor);
              }),
      FitKind::im);
  out.value = out.fit.z;
  out.alternate = out.alternate_fit.z;
  return out;
}

DEstimate retrieve_Dbar12(std::span<const SweepPoint> sweep,
                          const ExperimentPlan& plan, VacuumArm arm) {
  require_contrast(plan.b_p);
  const double sign = arm == VacuumArm::two ? 1.0 : -1.0;
  const double factor = sign * 2.0 / plan.b_p;
  DEstimate out;
  out.fit = fit_sinusoid(collect(sweep,
                                 [&](const MeasurementRecord& r) {
                                   return difference(
                                       normalized_cross(r, plan.det, 0, 2),
                                       normalized_cross(r, plan.det, 0, 3), factor);
                                 }),
                         FitKind::re);
  out.alternate_fit = fit_sinusoid(
      collect(sweep,
              [&](const MeasurementRecord& r) {
                return difference(normalized_cross(r, plan.det, 1, 3),
                                  normalized_cross(r, plan.det, 1, 2), factor);
              }),
      FitKind::re);
  out.value = out.fit.z;
  out.alternate = out.alternate_fit.z;
  return out;
}

double CoefficientErrors::max() const {
  return std::max({b1, b2, c1, c2, d12, dbar12});
}

CoefficientErrors coefficient_errors(const TwoModeCoefficients& recovered,
                                     const TwoModeCoefficients& truth) {
  return {std::abs(recovered.b1 - truth.b1),   std::abs(recovered.b2 - truth.b2),
          std::abs(recovered.c1 - truth.c1),   std::abs(recovered.c2 - truth.c2),
          std::abs(recovered.d12 - truth.d12), std::abs(recovered.dbar12 - truth.dbar12)};
}

double SelfCheck::b_p_error() const { return std::abs(recovered_b_p - nominal_b_p); }

double SelfCheck::phi_error() const {
  const double d = wrap_phase(recovered_phi - nominal_phi);
  return std::min(d, kTwoPi - d);
}

ReconstructionReport reconstruct(const ExperimentRecords& records,
                                 const ExperimentPlan& plan) {
  plan.validate();
  if (records.balanced_mix.empty()) throw std::invalid_argument("missing balanced_mix records");
  if (records.pure_twin.empty()) throw std::invalid_argument("missing pure_twin records");
  if (records.single_arm.empty()) {
    throw std::invalid_argument("missing single_arm_vacuum records");
  }
  ReconstructionReport report;
  report.shots = plan.shots;
  report.seed = plan.seed;
  for (auto variant : {ReferenceVariant::vacuum, ReferenceVariant::balanced_mix,
                       ReferenceVariant::pure_twin,
                       ReferenceVariant::single_arm_vacuum}) {
    auto prep = preparation_for(variant, plan, 0.0);
    prep.arm = records.arm;
    report.used_preparations.push_back(prep);
  }

  const BEstimate b = retrieve_B(records.vacuum, plan.det);
  report.recovered.b1 = b.b1;
  report.recovered.b2 = b.b2;
  if (b.negative) report.flags.push_back("negative_b");

  const CEstimate c = retrieve_C(records.vacuum, records.balanced_mix, plan, b);
  report.recovered.c1 = c.c1;
  report.recovered.c2 = c.c2;
  report.abs_c_squared_vacuum = c.abs_c_squared_vacuum;
  report.residuals.push_back(make_residual("c1", c.fit1, plan));
  report.residuals.push_back(make_residual("c2", c.fit2, plan));
  if (c.magnitude_mismatch[0]) report.flags.push_back("c1_magnitude_mismatch");
  if (c.magnitude_mismatch[1]) report.flags.push_back("c2_magnitude_mismatch");

  if (plan.assume_symmetric) {
    const SinusoidFit sym = retrieve_C_symmetric(records.balanced_mix, plan);
    report.c_symmetric = sym.z;
    StepResidual step = make_residual("c_symmetric", sym, plan);
    const double allowed = plan.magnitude_sigmas * std::hypot(b.sigma_b1, b.sigma_b2) +
                           plan.residual_tolerance * (1.0 + std::abs(b.b1));
    if (std::abs(b.b1 - b.b2) > allowed) step.flagged = true;
    report.residuals.push_back(step);
  }

  const DEstimate d = retrieve_D12(records.pure_twin, plan);
  report.recovered.d12 = d.value;
  report.d12_alternate = d.alternate;
  report.residuals.push_back(make_residual("d12", d.fit, plan));

  const DEstimate dbar = retrieve_Dbar12(records.single_arm, plan, records.arm);
  report.recovered.dbar12 = dbar.value;
  report.dbar12_alternate = dbar.alternate;
  report.residuals.push_back(make_residual("dbar12", dbar.fit, plan));

  for (const auto& step : report.residuals) {
    if (step.flagged) report.flags.push_back(step.step + "_residual");
  }
  report.physical = is_physical(report.recovered);
  if (!report.physical) report.flags.push_back("unphysical");
  return report;
}

ReconstructionReport run_pipeline(const TwoModeCoefficients& unknown,
                                  const ExperimentPlan& plan) {
  ReconstructionReport report = reconstruct(simulate_experiment(unknown, plan), plan);
  report.ground_truth_error = coefficient_errors(report.recovered, unknown);
  return report;
}

ReconstructionReport run_self_check(const ExperimentPlan& plan, double phi) {
  const TwinBeamSource source{plan.b_p, phi};
  ReconstructionReport report = run_pipeline(twin_beam(source), plan);
  const auto& r = report.recovered;
  SelfCheck check;
  check.nominal_b_p = plan.b_p;
  check.nominal_phi = phi;
  check.recovered_b_p = (r.b1 + r.b2) / 2.0;
  // d12 = i e^{iφ} sqrt(b_p(b_p+1)).
  check.recovered_phi = std::arg(r.d12 * std::complex<double>(0.0, -1.0));
  check.purity_defect = std::norm(r.d12) - r.b1 * r.b2 - (r.b1 + r.b2) / 2.0;
  report.self_check = check;
  return report;
}

}  // namespace covrec
