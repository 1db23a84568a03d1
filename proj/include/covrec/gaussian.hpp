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

#ifndef COVREC_GAUSSIAN_HPP_
#define COVREC_GAUSSIAN_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

namespace covrec {

enum class Ordering { normal, symmetric };

template <typename Scalar>
using ComplexMatrix =
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

/// Normally-ordered covariance coefficients of a zero-mean two-mode
/// Gaussian state:
///
///   b_j = <Δa_j^† Δa_j>,  c_j = <Δa_j^2>,
///   d12 = <Δa_1 Δa_2>,    dbar12 = -<Δa_1^† Δa_2>.
///
/// Plain aggregate; physicality is checked by is_physical(), not enforced on
/// construction, so that unphysical inputs can be represented and rejected.
template <typename Scalar>
struct BasicTwoModeCoefficients {
  using Complex = std::complex<Scalar>;

  Scalar b1{0};
  Scalar b2{0};
  Complex c1{};
  Complex c2{};
  Complex d12{};
  Complex dbar12{};

  bool operator==(const BasicTwoModeCoefficients&) const = default;
};

using TwoModeCoefficients = BasicTwoModeCoefficients<double>;

inline constexpr std::size_t kDetectorModes = 4;
inline constexpr std::size_t kDetectorPairs = 6;

/// Index of the unordered pair (j, k), j < k, among four modes:
/// (0,1) (0,2) (0,3) (1,2) (1,3) (2,3).
constexpr std::size_t pair_index(std::size_t j, std::size_t k) {
  if (j > k) std::swap(j, k);
  return j * (2 * kDetectorModes - j - 1) / 2 + (k - j - 1);
}

inline constexpr std::array<std::pair<std::size_t, std::size_t>, kDetectorPairs>
    kDetectorPairList{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Coefficients B'_i, C'_i, D'_jk, D̄'_jk of the four fields in front of the
/// detectors; pair arrays are indexed by pair_index().
template <typename Scalar>
struct BasicFourModeCoefficients {
  using Complex = std::complex<Scalar>;

  std::array<Scalar, kDetectorModes> b{};
  std::array<Complex, kDetectorModes> c{};
  std::array<Complex, kDetectorPairs> d{};
  std::array<Complex, kDetectorPairs> dbar{};
};

using FourModeCoefficients = BasicFourModeCoefficients<double>;

namespace detail {

template <typename Scalar>
bool is_finite(std::complex<Scalar> z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

template <typename Scalar>
void require_finite(std::complex<Scalar> z, const char* what) {
  if (!is_finite(z)) {
    throw std::invalid_argument(std::string("non-finite ") + what);
  }
}

}  // namespace detail

/// Complex covariance matrix of an n-mode zero-mean Gaussian state in the
/// interleaved basis (β_1, β_1*, β_2, β_2*, ...):
///
///   diagonal 2x2 block j:   [[-B_j, C_j], [C_j*, -B_j]]
///   off-diagonal block jk:  [[D̄_jk*, D_jk], [D_jk*, D̄_jk]]
///
/// with D_jk = <Δa_j Δa_k> and D̄_jk = -<Δa_j^† Δa_k>. Under symmetric
/// ordering the B entries carry the extra vacuum ½.
template <typename Scalar>
class BasicCovariance {
 public:
  using Complex = std::complex<Scalar>;
  using Matrix = ComplexMatrix<Scalar>;
  using Index = Eigen::Index;

  static BasicCovariance vacuum(Index n_modes,
                                Ordering ordering = Ordering::normal) {
    if (n_modes <= 0) throw std::invalid_argument("n_modes must be positive");
    Matrix m = Matrix::Zero(2 * n_modes, 2 * n_modes);
    if (ordering == Ordering::symmetric) {
      m.diagonal().setConstant(Complex(Scalar(-0.5)));
    }
    return BasicCovariance(std::move(m), ordering);
  }

  /// Packs number-type moments `normal(j,k) = <a_j^† a_k>` (hermitian; with
  /// ½δ_jk included when `ordering` is symmetric) and pair moments
  /// `anomalous(j,k) = <a_j a_k>` (symmetric) into the interleaved layout.
  /// Inputs are hermitized/symmetrized so the result satisfies the layout
  /// exactly.
  static BasicCovariance from_moments(const Matrix& normal,
                                      const Matrix& anomalous,
                                      Ordering ordering = Ordering::normal) {
    const Index n = normal.rows();
    if (n <= 0 || normal.cols() != n || anomalous.rows() != n ||
        anomalous.cols() != n) {
      throw std::invalid_argument("moment matrices must be square and equal");
    }
    const Matrix nn = (normal + normal.adjoint()) / Scalar(2);
    const Matrix mm = (anomalous + anomalous.transpose()) / Scalar(2);
    Matrix a(2 * n, 2 * n);
    for (Index j = 0; j < n; ++j) {
      for (Index k = 0; k < n; ++k) {
        a(2 * j, 2 * k) = -nn(k, j);
        a(2 * j, 2 * k + 1) = mm(j, k);
        a(2 * j + 1, 2 * k) = std::conj(mm(j, k));
        a(2 * j + 1, 2 * k + 1) = -nn(j, k);
      }
    }
    return BasicCovariance(std::move(a), ordering);
  }

  /// Validates the layout; throws std::invalid_argument on non-finite entries
  /// or entries that break the conjugation symmetry beyond round-off.
  BasicCovariance(Matrix matrix, Ordering ordering)
      : matrix_(std::move(matrix)), ordering_(ordering) {
    validate();
  }

  Index n_modes() const { return matrix_.rows() / 2; }
  const Matrix& matrix() const { return matrix_; }
  Ordering ordering() const { return ordering_; }

  Scalar b(Index j) const { return -matrix_(2 * j, 2 * j).real(); }
  Complex c(Index j) const { return matrix_(2 * j, 2 * j + 1); }
  /// <Δa_j Δa_k>.
  Complex d(Index j, Index k) const { return matrix_(2 * j, 2 * k + 1); }
  /// -<Δa_j^† Δa_k>.
  Complex dbar(Index j, Index k) const {
    return matrix_(2 * j + 1, 2 * k + 1);
  }

  /// <a_j^† a_k> (including ½δ_jk under symmetric ordering).
  Matrix normal_moments() const {
    const Index n = n_modes();
    Matrix out(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k) out(j, k) = -matrix_(2 * j + 1, 2 * k + 1);
    return out;
  }

  /// <a_j a_k>.
  Matrix anomalous_moments() const {
    const Index n = n_modes();
    Matrix out(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k) out(j, k) = matrix_(2 * j, 2 * k + 1);
    return out;
  }

 private:
  void validate() const {
    const Index dim = matrix_.rows();
    if (dim == 0 || dim % 2 != 0 || matrix_.cols() != dim) {
      throw std::invalid_argument("covariance matrix must be 2n x 2n");
    }
    if (!matrix_.allFinite()) {
      throw std::invalid_argument("non-finite covariance entry");
    }
    const Scalar tol =
        Scalar(1e-12) * (Scalar(1) + matrix_.cwiseAbs().maxCoeff());
    const Index n = dim / 2;
    for (Index j = 0; j < n; ++j) {
      for (Index k = 0; k < n; ++k) {
        const bool ok =
            std::abs(matrix_(2 * j, 2 * k) -
                     std::conj(matrix_(2 * j + 1, 2 * k + 1))) <= tol &&
            std::abs(matrix_(2 * j + 1, 2 * k) -
                     std::conj(matrix_(2 * j, 2 * k + 1))) <= tol &&
            std::abs(matrix_(2 * j, 2 * k + 1) - matrix_(2 * k, 2 * j + 1)) <=
                tol &&
            std::abs(matrix_(2 * j + 1, 2 * k + 1) -
                     std::conj(matrix_(2 * k + 1, 2 * j + 1))) <= tol;
        if (!ok) {
          throw std::invalid_argument(
              "covariance matrix violates the conjugation layout");
        }
      }
    }
  }

  Matrix matrix_;
  Ordering ordering_;
};

using Covariance = BasicCovariance<double>;

template <typename Scalar>
BasicCovariance<Scalar> build_covariance(
    const BasicTwoModeCoefficients<Scalar>& x) {
  using Complex = std::complex<Scalar>;
  detail::require_finite(Complex(x.b1), "b1");
  detail::require_finite(Complex(x.b2), "b2");
  detail::require_finite(x.c1, "c1");
  detail::require_finite(x.c2, "c2");
  detail::require_finite(x.d12, "d12");
  detail::require_finite(x.dbar12, "dbar12");
  ComplexMatrix<Scalar> n(2, 2), m(2, 2);
  n << Complex(x.b1), -x.dbar12, -std::conj(x.dbar12), Complex(x.b2);
  m << x.c1, x.d12, x.d12, x.c2;
  return BasicCovariance<Scalar>::from_moments(n, m);
}

template <typename Scalar>
BasicCovariance<Scalar> build_covariance(
    const BasicFourModeCoefficients<Scalar>& x) {
  using Complex = std::complex<Scalar>;
  ComplexMatrix<Scalar> n(4, 4), m(4, 4);
  for (std::size_t j = 0; j < kDetectorModes; ++j) {
    detail::require_finite(Complex(x.b[j]), "b");
    detail::require_finite(x.c[j], "c");
    n(j, j) = x.b[j];
    m(j, j) = x.c[j];
  }
  for (const auto& [j, k] : kDetectorPairList) {
    const std::size_t p = pair_index(j, k);
    detail::require_finite(x.d[p], "d");
    detail::require_finite(x.dbar[p], "dbar");
    n(j, k) = -x.dbar[p];
    n(k, j) = -std::conj(x.dbar[p]);
    m(j, k) = m(k, j) = x.d[p];
  }
  return BasicCovariance<Scalar>::from_moments(n, m);
}

template <typename Scalar>
BasicTwoModeCoefficients<Scalar> extract_coefficients(
    const BasicCovariance<Scalar>& m) {
  if (m.n_modes() != 2) {
    throw std::invalid_argument("extract_coefficients needs a two-mode state");
  }
  if (m.ordering() != Ordering::normal) {
    throw std::invalid_argument("extract_coefficients needs normal ordering");
  }
  return {m.b(0), m.b(1), m.c(0), m.c(1), m.d(0, 1), m.dbar(0, 1)};
}

template <typename Scalar>
BasicFourModeCoefficients<Scalar> extract_four_mode(
    const BasicCovariance<Scalar>& m) {
  if (m.n_modes() != 4 || m.ordering() != Ordering::normal) {
    throw std::invalid_argument(
        "extract_four_mode needs a normally-ordered four-mode state");
  }
  BasicFourModeCoefficients<Scalar> out;
  for (std::size_t j = 0; j < kDetectorModes; ++j) {
    out.b[j] = m.b(j);
    out.c[j] = m.c(j);
  }
  for (const auto& [j, k] : kDetectorPairList) {
    out.d[pair_index(j, k)] = m.d(j, k);
    out.dbar[pair_index(j, k)] = m.dbar(j, k);
  }
  return out;
}

/// B_j -> B_j + ½ on every same-mode entry; everything else is unchanged.
template <typename Scalar>
BasicCovariance<Scalar> to_symmetric_ordering(const BasicCovariance<Scalar>& m) {
  if (m.ordering() != Ordering::normal) {
    throw std::invalid_argument("state is already symmetrically ordered");
  }
  auto a = m.matrix();
  a.diagonal().array() -= Scalar(0.5);
  return BasicCovariance<Scalar>(std::move(a), Ordering::symmetric);
}

template <typename Scalar>
BasicCovariance<Scalar> to_normal_ordering(const BasicCovariance<Scalar>& m) {
  if (m.ordering() != Ordering::symmetric) {
    throw std::invalid_argument("state is already normally ordered");
  }
  auto a = m.matrix();
  a.diagonal().array() += Scalar(0.5);
  return BasicCovariance<Scalar>(std::move(a), Ordering::normal);
}

inline constexpr double kDefaultPhysicalityTol = 1e-9;

/// Robertson-Schrödinger condition <ξ ξ^†> ≥ 0 for ξ = (a_1, a_1^†, ...).
/// The Gram matrix follows from A_S by flipping the sign of the equal-parity
/// entries and adding the commutator form ½·diag(1, -1, 1, -1, ...).
/// Normally-ordered input is converted first.
template <typename Scalar>
bool physicality_check(const BasicCovariance<Scalar>& m,
                       Scalar tol = Scalar(kDefaultPhysicalityTol)) {
  const BasicCovariance<Scalar> sym =
      m.ordering() == Ordering::normal ? to_symmetric_ordering(m) : m;
  const auto& a = sym.matrix();
  const Eigen::Index dim = a.rows();
  ComplexMatrix<Scalar> gram(dim, dim);
  for (Eigen::Index p = 0; p < dim; ++p) {
    for (Eigen::Index q = 0; q < dim; ++q) {
      gram(p, q) = (p % 2 == q % 2) ? -a(p, q) : a(p, q);
    }
    gram(p, p) += (p % 2 == 0) ? Scalar(0.5) : Scalar(-0.5);
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<Scalar>> solver(
      gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) return false;
  return solver.eigenvalues().minCoeff() >= -tol;
}

template <typename Scalar>
bool is_physical(const BasicTwoModeCoefficients<Scalar>& x,
                 Scalar tol = Scalar(kDefaultPhysicalityTol)) {
  try {
    return physicality_check(build_covariance(x), tol);
  } catch (const std::invalid_argument&) {
    return false;
  }
}

template <typename Scalar>
bool is_physical(const BasicFourModeCoefficients<Scalar>& x,
                 Scalar tol = Scalar(kDefaultPhysicalityTol)) {
  try {
    return physicality_check(build_covariance(x), tol);
  } catch (const std::invalid_argument&) {
    return false;
  }
}

/// Normally-ordered characteristic function exp(β^† A_N β / 2), with `beta`
/// laid out as (β_1, β_1*, β_2, β_2*, ...). The quadratic form is evaluated
/// as (Pβ)^T A β / 2 where P swaps each (β_j, β_j*) pair, so the starred
/// slots may be set independently: this is the analytic continuation
/// used when differentiating with respect to β_j and β_j* separately.
template <typename Scalar>
std::complex<Scalar> char_fn_eval(const BasicCovariance<Scalar>& m,
                                  const std::type_identity_t<ComplexVector<Scalar>>& beta) {
  if (m.ordering() != Ordering::normal) {
    throw std::invalid_argument("char_fn_eval needs normal ordering");
  }
  if (beta.size() != m.matrix().rows()) {
    throw std::invalid_argument("beta has the wrong length");
  }
  if (!beta.allFinite()) throw std::invalid_argument("non-finite beta");
  ComplexVector<Scalar> swapped(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); j += 2) {
    swapped(j) = beta(j + 1);
    swapped(j + 1) = beta(j);
  }
  const std::complex<Scalar> form = swapped.transpose() * m.matrix() * beta;
  return std::exp(form / Scalar(2));
}

template <typename Scalar>
struct BasicIntensityMoments {
  std::array<Scalar, kDetectorModes> mean_w{};
  std::array<Scalar, kDetectorModes> var_w{};
  std::array<Scalar, kDetectorPairs> cross_w{};
};

using IntensityMoments = BasicIntensityMoments<double>;

/// Normally-ordered integrated-intensity moments of a zero-mean Gaussian
/// state: <W_j> = B_j, <ΔW_j^2> = B_j^2 + |C_j|^2,
/// <ΔW_j ΔW_k> = |D_jk|^2 + |D̄_jk|^2.
template <typename Scalar>
BasicIntensityMoments<Scalar> intensity_moments(
    const BasicFourModeCoefficients<Scalar>& x) {
  BasicIntensityMoments<Scalar> out;
  for (std::size_t j = 0; j < kDetectorModes; ++j) {
    out.mean_w[j] = x.b[j];
    out.var_w[j] = x.b[j] * x.b[j] + std::norm(x.c[j]);
  }
  for (std::size_t p = 0; p < kDetectorPairs; ++p) {
    out.cross_w[p] = std::norm(x.d[p]) + std::norm(x.dbar[p]);
  }
  return out;
}

namespace detail {

// Central-difference estimate of the mixed derivative of `f` over `vars`
// (one step per variable), Richardson-extrapolated over `levels` halvings.
template <typename Scalar, typename F>
std::complex<Scalar> mixed_derivative(F&& f, std::size_t vars, Scalar h0,
                                      int levels) {
  auto central = [&](Scalar h) {
    std::complex<Scalar> acc{};
    const std::size_t corners = std::size_t{1} << vars;
    for (std::size_t mask = 0; mask < corners; ++mask) {
      std::array<Scalar, 4> x{};
      int sign = 1;
      for (std::size_t v = 0; v < vars; ++v) {
        const bool neg = (mask >> v) & 1U;
        x[v] = neg ? -h : h;
        if (neg) sign = -sign;
      }
      acc += Scalar(sign) * f(x);
    }
    return acc / std::pow(Scalar(2) * h, Scalar(vars));
  };
  std::array<std::complex<Scalar>, 8> table{};
  for (int i = 0; i <= levels; ++i) table[i] = central(h0 / std::pow(Scalar(2), i));
  for (int l = 1; l <= levels; ++l) {
    const Scalar w = std::pow(Scalar(4), l);
    for (int i = 0; i + l <= levels; ++i) {
      table[i] = (w * table[i + 1] - table[i]) / (w - Scalar(1));
    }
  }
  return table[0];
}

}  // namespace detail

/// <ΔW_j ΔW_k> obtained by differentiating char_fn_eval at the origin with
/// respect to β_j, -β_j*, β_k, -β_k*, minus the product of the two
/// second-order derivatives. Independent of the closed form in
/// intensity_moments(); used as a verification oracle.
template <typename Scalar>
Scalar moment_oracle(const BasicCovariance<Scalar>& m, Eigen::Index j,
                     Eigen::Index k) {
  using Complex = std::complex<Scalar>;
  if (m.ordering() != Ordering::normal) {
    throw std::invalid_argument("moment_oracle needs normal ordering");
  }
  const Eigen::Index n = m.n_modes();
  if (j == k || j < 0 || k < 0 || j >= n || k >= n) {
    throw std::invalid_argument("moment_oracle needs distinct valid modes");
  }
  // Steps are taken in the variables (β_j, -β_j*, β_k, -β_k*).
  auto eval = [&](Eigen::Index mode_a, Eigen::Index mode_b,
                  const std::array<Scalar, 4>& x) {
    ComplexVector<Scalar> beta = ComplexVector<Scalar>::Zero(2 * n);
    beta(2 * mode_a) = Complex(x[0]);
    beta(2 * mode_a + 1) = Complex(-x[1]);
    if (mode_b >= 0) {
      beta(2 * mode_b) = Complex(x[2]);
      beta(2 * mode_b + 1) = Complex(-x[3]);
    }
    return char_fn_eval(m, beta);
  };
  const Scalar scale =
      std::max(Scalar(1), m.matrix().cwiseAbs().maxCoeff());
  const Scalar h0 = Scalar(0.1) / std::sqrt(scale);
  constexpr int kLevels = 3;
  const Complex fourth = detail::mixed_derivative<Scalar>(
      [&](const std::array<Scalar, 4>& x) { return eval(j, k, x); }, 4, h0,
      kLevels);
  const Complex second_j = detail::mixed_derivative<Scalar>(
      [&](const std::array<Scalar, 4>& x) { return eval(j, -1, x); }, 2, h0,
      kLevels);
  const Complex second_k = detail::mixed_derivative<Scalar>(
      [&](const std::array<Scalar, 4>& x) { return eval(k, -1, x); }, 2, h0,
      kLevels);
  return (fourth - second_j * second_k).real();
}

}  // namespace covrec

#endif  // COVREC_GAUSSIAN_HPP_
