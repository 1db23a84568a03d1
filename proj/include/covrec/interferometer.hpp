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

#ifndef COVREC_INTERFEROMETER_HPP_
#define COVREC_INTERFEROMETER_HPP_

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string_view>
#include <type_traits>

#include "covrec/gaussian.hpp"

namespace covrec {

/// Lossless two-mode mixer
///
///   out_j =  t a_j + r e^{iθ} a_k
///   out_k = -r e^{-iθ} a_j + t a_k,   r = sqrt(1 - t^2).
template <typename Scalar>
class BasicBeamSplitter {
 public:
  BasicBeamSplitter() = default;
  BasicBeamSplitter(Scalar t, Scalar theta) : t_(t), theta_(theta) {
    if (!std::isfinite(t) || !std::isfinite(theta) || t < Scalar(0) ||
        t > Scalar(1)) {
      throw std::invalid_argument("beam splitter needs t in [0, 1]");
    }
  }

  static BasicBeamSplitter balanced(Scalar theta = Scalar(0)) {
    return BasicBeamSplitter(Scalar(1) / std::sqrt(Scalar(2)), theta);
  }

  Scalar t() const { return t_; }
  Scalar r() const { return std::sqrt(std::max(Scalar(0), Scalar(1) - t_ * t_)); }
  Scalar theta() const { return theta_; }

 private:
  Scalar t_{1};
  Scalar theta_{0};
};

using BeamSplitter = BasicBeamSplitter<double>;

/// Pure twin beam from parametric down-conversion of vacuum; b_p is the mean
/// photon-pair number and phi the pump phase.
template <typename Scalar>
struct BasicTwinBeamSource {
  Scalar b_p{0};
  Scalar phi{0};

  /// b_p = sinh^2(sqrt(G)).
  static BasicTwinBeamSource from_gain(Scalar gain, Scalar phi = Scalar(0)) {
    if (!(gain >= Scalar(0))) throw std::invalid_argument("negative gain");
    const Scalar s = std::sinh(std::sqrt(gain));
    return {s * s, phi};
  }
};

using TwinBeamSource = BasicTwinBeamSource<double>;

enum class ReferenceVariant { vacuum, pure_twin, balanced_mix, single_arm_vacuum };

/// Which input of BS1 is left in vacuum for the single-arm reference.
enum class VacuumArm { one = 1, two = 2 };

constexpr std::string_view to_string(ReferenceVariant v) {
  switch (v) {
    case ReferenceVariant::vacuum: return "vacuum";
    case ReferenceVariant::pure_twin: return "pure_twin";
    case ReferenceVariant::balanced_mix: return "balanced_mix";
    case ReferenceVariant::single_arm_vacuum: return "single_arm_vacuum";
  }
  return "unknown";
}

template <typename Scalar>
struct BasicReferencePreparation {
  ReferenceVariant variant{ReferenceVariant::pure_twin};
  BasicTwinBeamSource<Scalar> source{};
  VacuumArm arm{VacuumArm::two};
  /// Phase imposed on mode c_1 between BS1 and BS2.
  Scalar modulator_theta{0};
  /// BS1 phase shift; the reference coefficients quoted for the retrieval
  /// steps hold for 0.
  Scalar bs1_theta{0};
};

using ReferencePreparation = BasicReferencePreparation<double>;

template <typename Scalar>
BasicTwoModeCoefficients<Scalar> twin_beam(
    const BasicTwinBeamSource<Scalar>& source) {
  if (!std::isfinite(source.b_p) || !std::isfinite(source.phi)) {
    throw std::invalid_argument("non-finite twin-beam parameters");
  }
  if (source.b_p < Scalar(0)) {
    throw std::invalid_argument("twin beam needs b_p >= 0");
  }
  using Complex = std::complex<Scalar>;
  BasicTwoModeCoefficients<Scalar> out;
  out.b1 = out.b2 = source.b_p;
  out.d12 = Complex(0, 1) * std::polar(Scalar(1), source.phi) *
            std::sqrt(source.b_p * (source.b_p + Scalar(1)));
  return out;
}

/// Bogoliubov map a -> U a + V a^† applied to the state. Passive maps
/// (V = 0) conjugate A by S = U ⊕ U* interleaved, in either ordering; active
/// maps act on the symmetric form, where no reordering terms appear.
template <typename Scalar>
BasicCovariance<Scalar> apply_bogoliubov(const BasicCovariance<Scalar>& state,
                                         const std::type_identity_t<ComplexMatrix<Scalar>>& u,
                                         const std::type_identity_t<ComplexMatrix<Scalar>>& v) {
  const Eigen::Index n = state.n_modes();
  if (u.rows() != n || u.cols() != n || v.rows() != n || v.cols() != n) {
    throw std::invalid_argument("transform size does not match the state");
  }
  if (!u.allFinite() || !v.allFinite()) {
    throw std::invalid_argument("non-finite transform");
  }
  const bool passive = v.cwiseAbs().maxCoeff() == Scalar(0);
  // In the A layout the active block picks up the opposite sign of V
  // relative to the operator map: A = -K V_sym K with K = diag(1, -1, ...).
  ComplexMatrix<Scalar> s(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < n; ++l) {
      s(2 * i, 2 * l) = u(i, l);
      s(2 * i, 2 * l + 1) = -v(i, l);
      s(2 * i + 1, 2 * l) = -std::conj(v(i, l));
      s(2 * i + 1, 2 * l + 1) = std::conj(u(i, l));
    }
  }
  const bool to_sym = !passive && state.ordering() == Ordering::normal;
  const BasicCovariance<Scalar> in = to_sym ? to_symmetric_ordering(state) : state;
  const ComplexMatrix<Scalar> a = s * in.matrix() * s.adjoint();
  // Re-pack through the moment matrices to remove round-off asymmetry.
  ComplexMatrix<Scalar> nn(n, n), mm(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      nn(j, k) = -a(2 * j + 1, 2 * k + 1);
      mm(j, k) = a(2 * j, 2 * k + 1);
    }
  }
  auto packed = BasicCovariance<Scalar>::from_moments(nn, mm, in.ordering());
  return to_sym ? to_normal_ordering(packed) : packed;
}

template <typename Scalar>
BasicCovariance<Scalar> apply_passive(const BasicCovariance<Scalar>& state,
                                      const std::type_identity_t<ComplexMatrix<Scalar>>& u) {
  return apply_bogoliubov<Scalar>(
      state, u, ComplexMatrix<Scalar>::Zero(u.rows(), u.cols()));
}

template <typename Scalar>
BasicCovariance<Scalar> apply_beam_splitter(const BasicCovariance<Scalar>& state,
                                            Eigen::Index j, Eigen::Index k,
                                            const BasicBeamSplitter<Scalar>& bs) {
  using Complex = std::complex<Scalar>;
  const Eigen::Index n = state.n_modes();
  if (j == k || j < 0 || k < 0 || j >= n || k >= n) {
    throw std::invalid_argument("beam splitter needs two distinct valid modes");
  }
  if (state.ordering() != Ordering::normal) {
    throw std::invalid_argument("beam splitter expects normal ordering");
  }
  ComplexMatrix<Scalar> u = ComplexMatrix<Scalar>::Identity(n, n);
  const Scalar t = bs.t();
  const Scalar r = bs.r();
  u(j, j) = Complex(t);
  u(j, k) = r * std::polar(Scalar(1), bs.theta());
  u(k, j) = -r * std::polar(Scalar(1), -bs.theta());
  u(k, k) = Complex(t);
  return apply_passive(state, u);
}

/// a_j -> e^{iθ} a_j.
template <typename Scalar>
BasicCovariance<Scalar> apply_phase_shift(const BasicCovariance<Scalar>& state,
                                          Eigen::Index j, Scalar theta) {
  const Eigen::Index n = state.n_modes();
  if (j < 0 || j >= n) throw std::invalid_argument("invalid mode index");
  if (!std::isfinite(theta)) throw std::invalid_argument("non-finite phase");
  ComplexMatrix<Scalar> u = ComplexMatrix<Scalar>::Identity(n, n);
  u(j, j) = std::polar(Scalar(1), theta);
  return apply_passive(state, u);
}

/// a_j -> cosh(r) a_j - e^{iψ} sinh(r) a_j^†.
template <typename Scalar>
BasicCovariance<Scalar> apply_squeezer(const BasicCovariance<Scalar>& state,
                                       Eigen::Index j, Scalar r, Scalar psi) {
  const Eigen::Index n = state.n_modes();
  if (j < 0 || j >= n) throw std::invalid_argument("invalid mode index");
  ComplexMatrix<Scalar> u = ComplexMatrix<Scalar>::Identity(n, n);
  ComplexMatrix<Scalar> v = ComplexMatrix<Scalar>::Zero(n, n);
  u(j, j) = std::cosh(r);
  v(j, j) = -std::polar(std::sinh(r), psi);
  return apply_bogoliubov(state, u, v);
}

template <typename Scalar>
BasicTwoModeCoefficients<Scalar> apply_beam_splitter(
    const BasicTwoModeCoefficients<Scalar>& state,
    const BasicBeamSplitter<Scalar>& bs) {
  return extract_coefficients(apply_beam_splitter(build_covariance(state), 0, 1, bs));
}

template <typename Scalar>
BasicTwoModeCoefficients<Scalar> apply_phase_shift(
    const BasicTwoModeCoefficients<Scalar>& state, Eigen::Index j,
    Scalar theta) {
  return extract_coefficients(apply_phase_shift(build_covariance(state), j, theta));
}

/// Thermal occupations (n1, n2) with no correlations.
template <typename Scalar>
BasicTwoModeCoefficients<Scalar> thermal_state(Scalar n1, Scalar n2) {
  if (!(n1 >= Scalar(0)) || !(n2 >= Scalar(0))) {
    throw std::invalid_argument("thermal occupation must be >= 0");
  }
  BasicTwoModeCoefficients<Scalar> out;
  out.b1 = n1;
  out.b2 = n2;
  return out;
}

/// Single-mode squeezed thermal states on both modes, optionally mixed.
template <typename Scalar>
struct BasicSqueezedSpec {
  std::array<Scalar, 2> thermal{};
  std::array<Scalar, 2> r{};
  std::array<Scalar, 2> psi{};
  BasicBeamSplitter<Scalar> mixer{};
};

using SqueezedSpec = BasicSqueezedSpec<double>;

template <typename Scalar>
BasicTwoModeCoefficients<Scalar> squeezed_state(
    const BasicSqueezedSpec<Scalar>& spec) {
  auto cov = build_covariance(thermal_state(spec.thermal[0], spec.thermal[1]));
  for (Eigen::Index j = 0; j < 2; ++j) {
    cov = apply_squeezer(cov, j, spec.r[j], spec.psi[j]);
  }
  return extract_coefficients(apply_beam_splitter(cov, 0, 1, spec.mixer));
}

/// Random physical two-mode state: thermal -> random passive -> single-mode
/// squeezers -> random passive. Every b_j stays within [0, max_b].
template <typename Scalar, typename Rng>
BasicTwoModeCoefficients<Scalar> random_physical_state(Rng& rng, Scalar max_b) {
  if (!(max_b >= Scalar(0))) throw std::invalid_argument("max_b must be >= 0");
  std::uniform_real_distribution<Scalar> unit(Scalar(0), Scalar(1));
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  auto random_passive = [&](BasicCovariance<Scalar> cov) {
    cov = apply_phase_shift(cov, 0, two_pi * unit(rng));
    cov = apply_phase_shift(cov, 1, two_pi * unit(rng));
    cov = apply_beam_splitter(cov, 0, 1,
                              BasicBeamSplitter<Scalar>(unit(rng), two_pi * unit(rng)));
    return apply_phase_shift(cov, 0, two_pi * unit(rng));
  };
  const Scalar n_max = max_b / Scalar(2);
  auto cov = build_covariance(thermal_state(n_max * unit(rng), n_max * unit(rng)));
  cov = random_passive(cov);
  // (n_max + ½) cosh(2r) - ½ <= max_b bounds each squeezed occupation.
  const Scalar cosh_max = (max_b + Scalar(0.5)) / (n_max + Scalar(0.5));
  for (Eigen::Index j = 0; j < 2; ++j) {
    const Scalar ch = Scalar(1) + (cosh_max - Scalar(1)) * unit(rng);
    cov = apply_squeezer(cov, j, std::acosh(ch) / Scalar(2), two_pi * unit(rng));
  }
  return extract_coefficients(random_passive(cov));
}

/// Reference coefficients (B^R, C^R, D^R, D̄^R) for the chosen preparation.
template <typename Scalar>
BasicTwoModeCoefficients<Scalar> prepare_reference(
    const BasicReferencePreparation<Scalar>& prep) {
  const auto bs1 = BasicBeamSplitter<Scalar>::balanced(prep.bs1_theta);
  BasicCovariance<Scalar> cov = BasicCovariance<Scalar>::vacuum(2);
  switch (prep.variant) {
    case ReferenceVariant::vacuum:
      break;
    case ReferenceVariant::pure_twin:
      cov = build_covariance(twin_beam(prep.source));
      break;
    case ReferenceVariant::balanced_mix:
      cov = apply_beam_splitter(build_covariance(twin_beam(prep.source)), 0, 1, bs1);
      break;
    case ReferenceVariant::single_arm_vacuum: {
      // One constituent of the twin beam is thermal with b_p photons.
      const auto source = twin_beam(prep.source);
      const auto input = prep.arm == VacuumArm::two
                             ? thermal_state(source.b1, Scalar(0))
                             : thermal_state(Scalar(0), source.b2);
      cov = apply_beam_splitter(build_covariance(input), 0, 1, bs1);
      break;
    }
  }
  if (prep.modulator_theta != Scalar(0)) {
    cov = apply_phase_shift(cov, 0, prep.modulator_theta);
  }
  return extract_coefficients(cov);
}

/// Four-mode state in front of detectors D1..D4: the product of the unknown
/// (a_1, a_2) and reference (c_1, c_2) states, with balanced zero-phase
/// splitters mixing (a_1, c_1) -> (a'_1, a'_2) and (a_2, c_2) -> (a'_3, a'_4).
template <typename Scalar>
BasicCovariance<Scalar> fig1_network_covariance(
    const BasicTwoModeCoefficients<Scalar>& unknown,
    const BasicTwoModeCoefficients<Scalar>& reference) {
  if (!is_physical(unknown)) throw std::invalid_argument("unphysical unknown state");
  if (!is_physical(reference)) throw std::invalid_argument("unphysical reference state");
  const auto u = build_covariance(unknown);
  const auto r = build_covariance(reference);
  // Mode order before mixing: (a_1, c_1, a_2, c_2).
  constexpr std::array<Eigen::Index, 2> kUnknownSlot{0, 2};
  constexpr std::array<Eigen::Index, 2> kReferenceSlot{1, 3};
  ComplexMatrix<Scalar> nn = ComplexMatrix<Scalar>::Zero(4, 4);
  ComplexMatrix<Scalar> mm = ComplexMatrix<Scalar>::Zero(4, 4);
  const auto un = u.normal_moments(), um = u.anomalous_moments();
  const auto rn = r.normal_moments(), rm = r.anomalous_moments();
  for (Eigen::Index j = 0; j < 2; ++j) {
    for (Eigen::Index k = 0; k < 2; ++k) {
      nn(kUnknownSlot[j], kUnknownSlot[k]) = un(j, k);
      mm(kUnknownSlot[j], kUnknownSlot[k]) = um(j, k);
      nn(kReferenceSlot[j], kReferenceSlot[k]) = rn(j, k);
      mm(kReferenceSlot[j], kReferenceSlot[k]) = rm(j, k);
    }
  }
  auto cov = BasicCovariance<Scalar>::from_moments(nn, mm);
  const auto balanced = BasicBeamSplitter<Scalar>::balanced();
  cov = apply_beam_splitter(cov, 0, 1, balanced);
  return apply_beam_splitter(cov, 2, 3, balanced);
}

template <typename Scalar>
BasicFourModeCoefficients<Scalar> build_fig1_network(
    const BasicTwoModeCoefficients<Scalar>& unknown,
    const BasicTwoModeCoefficients<Scalar>& reference) {
  return extract_four_mode(fig1_network_covariance(unknown, reference));
}

}  // namespace covrec

#endif  // COVREC_INTERFEROMETER_HPP_
