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

#include "covrec/detection.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace covrec {
namespace {

// Mode i of the unknown state feeds detectors (2i, 2i+1).
constexpr std::size_t unknown_mode_of(std::size_t detector) { return detector / 2; }

}  // namespace

void DetectorBank::validate() const {
  for (std::size_t j = 0; j < kDetectorModes; ++j) {
    if (!(eta[j] > 0.0 && eta[j] <= 1.0)) {
      throw std::invalid_argument("detector efficiency must lie in (0, 1]");
    }
    if (!(dark[j] >= 0.0) || !std::isfinite(dark[j])) {
      throw std::invalid_argument("dark-count rate must be >= 0");
    }
  }
}

MeasurementRecord exact_measurement(const FourModeCoefficients& state,
                                    const DetectorBank& det) {
  det.validate();
  const IntensityMoments w = intensity_moments(state);
  MeasurementRecord out;
  for (std::size_t j = 0; j < kDetectorModes; ++j) {
    out.mean_m[j] = det.eta[j] * w.mean_w[j] + det.dark[j];
  }
  for (const auto& [j, k] : kDetectorPairList) {
    const std::size_t p = pair_index(j, k);
    out.cross_mm[p] = det.eta[j] * det.eta[k] * w.cross_w[p];
  }
  return out;
}

MeasurementRecord closed_form_moments(const TwoModeCoefficients& unknown,
                                      const TwoModeCoefficients& reference,
                                      const DetectorBank& det) {
  det.validate();
  const auto& u = unknown;
  const auto& r = reference;
  const auto& eta = det.eta;

  auto same_arm = [](double b, std::complex<double> c, double br,
                     std::complex<double> cr) {
    return b * b + std::norm(c) + br * br + std::norm(cr) - 2.0 * b * br -
           2.0 * std::real(c * std::conj(cr));
  };
  const double common = std::norm(u.d12) + std::norm(u.dbar12) +
                        std::norm(r.d12) + std::norm(r.dbar12);
  const double interference = 2.0 * std::real(u.d12 * std::conj(r.d12)) +
                              2.0 * std::real(u.dbar12 * std::conj(r.dbar12));

  MeasurementRecord out;
  out.cross_mm[pair_index(0, 1)] =
      eta[0] * eta[1] / 4.0 * same_arm(u.b1, u.c1, r.b1, r.c1);
  out.cross_mm[pair_index(2, 3)] =
      eta[2] * eta[3] / 4.0 * same_arm(u.b2, u.c2, r.b2, r.c2);
  out.cross_mm[pair_index(0, 2)] = eta[0] * eta[2] / 4.0 * (common + interference);
  out.cross_mm[pair_index(0, 3)] = eta[0] * eta[3] / 4.0 * (common - interference);
  out.cross_mm[pair_index(1, 2)] = eta[1] * eta[2] / 4.0 * (common - interference);
  out.cross_mm[pair_index(1, 3)] = eta[1] * eta[3] / 4.0 * (common + interference);

  const std::array<double, 2> b_unknown{u.b1, u.b2};
  const std::array<double, 2> b_reference{r.b1, r.b2};
  for (std::size_t j = 0; j < kDetectorModes; ++j) {
    const std::size_t mode = unknown_mode_of(j);
    out.mean_m[j] =
        eta[j] * (b_unknown[mode] + b_reference[mode]) / 2.0 + det.dark[j];
  }
  return out;
}

MeasurementRecord estimator_sigmas(const FourModeCoefficients& state,
                                   const DetectorBank& det, std::uint64_t shots,
                                   const NoiseModel& noise) {
  if (shots < 2) throw std::invalid_argument("shots must be >= 2");
  if (!(noise.multiplier >= 0.0)) {
    throw std::invalid_argument("noise multiplier must be >= 0");
  }
  const MeasurementRecord exact = exact_measurement(state, det);
  const IntensityMoments w = intensity_moments(state);
  const double n = static_cast<double>(shots);

  std::array<double, kDetectorModes> count_var{};
  for (std::size_t j = 0; j < kDetectorModes; ++j) {
    count_var[j] = det.eta[j] * det.eta[j] * w.var_w[j] +
                   det.eta[j] * w.mean_w[j] + det.dark[j];
  }
  MeasurementRecord out = exact;
  out.shots = shots;
  for (std::size_t j = 0; j < kDetectorModes; ++j) {
    out.sigma_mean[j] = noise.multiplier * std::sqrt(count_var[j] / n);
  }
  for (const auto& [j, k] : kDetectorPairList) {
    const std::size_t p = pair_index(j, k);
    const double cov = exact.cross_mm[p];
    out.sigma_cross[p] =
        noise.multiplier * std::sqrt((count_var[j] * count_var[k] + cov * cov) / n);
  }
  return out;
}

MeasurementRecord sample_measurement(const FourModeCoefficients& state,
                                     const DetectorBank& det,
                                     std::uint64_t shots, std::uint64_t seed,
                                     const NoiseModel& noise) {
  MeasurementRecord out = estimator_sigmas(state, det, shots, noise);
  out.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t j = 0; j < kDetectorModes; ++j) {
    out.mean_m[j] += out.sigma_mean[j] * gauss(rng);
  }
  for (std::size_t p = 0; p < kDetectorPairs; ++p) {
    out.cross_mm[p] += out.sigma_cross[p] * gauss(rng);
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace covrec
