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

#ifndef COVREC_DETECTION_HPP_
#define COVREC_DETECTION_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>

#include "covrec/gaussian.hpp"

namespace covrec {

/// Efficiencies η_j ∈ (0, 1] and dark counts n_dj ≥ 0 (per measurement
/// window) of detectors D1..D4.
struct DetectorBank {
  std::array<double, kDetectorModes> eta{1.0, 1.0, 1.0, 1.0};
  std::array<double, kDetectorModes> dark{};

  /// Throws std::invalid_argument when an entry is out of range.
  void validate() const;
};

/// First and second photocount moments at the four detectors.
///
/// `shots` empty means the values are exact. For finite shots the record
/// also carries the standard error of each entry and the seed it was drawn
/// with.
struct MeasurementRecord {
  std::array<double, kDetectorModes> mean_m{};
  std::array<double, kDetectorPairs> cross_mm{};
  std::array<double, kDetectorModes> sigma_mean{};
  std::array<double, kDetectorPairs> sigma_cross{};
  std::optional<std::uint64_t> shots;
  std::optional<std::uint64_t> seed;

  bool exact() const { return !shots.has_value(); }
  /// <Δm_j Δm_k> for zero-based detector indices.
  double cross(std::size_t j, std::size_t k) const {
    return cross_mm[pair_index(j, k)];
  }
  double cross_sigma(std::size_t j, std::size_t k) const {
    return sigma_cross[pair_index(j, k)];
  }
};

/// <m_j> = η_j B'_j + n_dj and <Δm_j Δm_k> = η_j η_k (|D'_jk|^2 + |D̄'_jk|^2).
MeasurementRecord exact_measurement(const FourModeCoefficients& state,
                                    const DetectorBank& det);

/// The six photocount cross-moments written directly in terms of the unknown
/// and reference coefficients (balanced zero-phase BS2/BS3), plus the means.
/// Equal to exact_measurement(build_fig1_network(unknown, reference), det).
MeasurementRecord closed_form_moments(const TwoModeCoefficients& unknown,
                                      const TwoModeCoefficients& reference,
                                      const DetectorBank& det);

struct NoiseModel {
  /// Scales every per-entry standard deviation.
  double multiplier = 1.0;
};

/// Per-entry standard deviation of the sample estimators of the photocount
/// moments after `shots` frames, treating counts as jointly Gaussian:
/// sd(<m_j>) = sqrt(V_j / N),  sd(<Δm_j Δm_k>) = sqrt((V_j V_k + K_jk^2) / N)
/// with V_j = η_j^2 <ΔW_j^2> + η_j B'_j + n_dj and K_jk the exact covariance.
MeasurementRecord estimator_sigmas(const FourModeCoefficients& state,
                                   const DetectorBank& det, std::uint64_t shots,
                                   const NoiseModel& noise = {});

/// Exact moments plus zero-mean Gaussian perturbations with the standard
/// deviations of estimator_sigmas(). Deterministic for a fixed seed.
/// Throws std::invalid_argument for shots < 2.
MeasurementRecord sample_measurement(const FourModeCoefficients& state,
                                     const DetectorBank& det,
                                     std::uint64_t shots, std::uint64_t seed,
                                     const NoiseModel& noise = {});

/// splitmix64 mix of (seed, stream), for independent per-record streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace covrec

#endif  // COVREC_DETECTION_HPP_
