#pragma once

// Small complex-matrix kernel for the two-qubit electron-photon system.
//
// Basis-order contract (global): the 4-dim composite space is ordered
// (L H, L V, R H, R V), i.e. electron slot is the slow index and photon
// the fast one. Every module in this project relies on this ordering.

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace eraser {

using Complex = std::complex<double>;
using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;
using Vector2 = Eigen::Vector2cd;
using Vector4 = Eigen::Vector4cd;

inline constexpr double kDefaultTolerance = 1e-9;

enum class Subsystem { electron, photon };

/// Result of checking the density-matrix invariants on a candidate matrix.
/// `ok` is true when trace, Hermiticity and positivity all hold within the
/// tolerance; the deviations are reported regardless so callers can print
/// how far off a rejected matrix was.
struct DensityDiagnostic {
  bool ok = false;
  double trace_deviation = 0.0;
  double hermiticity_deviation = 0.0;
  double min_eigenvalue = 0.0;
  std::string message;
};

template <int N>
DensityDiagnostic check_density(const Eigen::Matrix<Complex, N, N>& m,
                                double tol = kDefaultTolerance);

/// Validated unit-trace Hermitian PSD matrix. Construction goes through
/// validate(), which throws std::invalid_argument naming the violated
/// invariant and its magnitude.
template <int N>
class DensityMatrix {
 public:
  static DensityMatrix validate(const Eigen::Matrix<Complex, N, N>& m,
                                double tol = kDefaultTolerance);

  const Eigen::Matrix<Complex, N, N>& mat() const { return mat_; }
  double tolerance() const { return tol_; }

  Complex operator()(int r, int c) const { return mat_(r, c); }

 private:
  DensityMatrix(Eigen::Matrix<Complex, N, N> m, double tol)
      : mat_(std::move(m)), tol_(tol) {}

  Eigen::Matrix<Complex, N, N> mat_;
  double tol_;
};

using DensityMatrix2 = DensityMatrix<2>;
using DensityMatrix4 = DensityMatrix<4>;

// Pauli matrices in the sigma_z eigenbasis ({|L>,|R>} electron,
// {|H>,|V>} photon).
Matrix2 pauli_x();
Matrix2 pauli_y();
Matrix2 pauli_z();
Matrix2 identity2();

/// Kronecker product with the electron factor on the left, so the result
/// follows the (LH, LV, RH, RV) basis order.
Matrix4 tensor_product(const Matrix2& electron, const Matrix2& photon);

/// Reduced density matrix after tracing out `traced`. Trace is preserved.
DensityMatrix2 partial_trace(const DensityMatrix4& rho, Subsystem traced);

/// Partial trace on a raw 4x4 (no validity requirements); used internally
/// where the intermediate is not a state.
Matrix2 partial_trace_raw(const Matrix4& m, Subsystem traced);

/// Eigenvalues in descending order with matching orthonormal eigenvectors
/// (columns). Throws if `m` is not Hermitian within `tol`.
template <int N>
struct Eigensystem {
  Eigen::Matrix<double, N, 1> values;       // descending
  Eigen::Matrix<Complex, N, N> vectors;     // column k pairs with values[k]
};

template <int N>
Eigensystem<N> hermitian_eigensystem(const Eigen::Matrix<Complex, N, N>& m,
                                     double tol = kDefaultTolerance);

/// Hermitian PSD square root: S with S*S == m. Eigenvalues in [-tol, 0)
/// are clamped to zero; anything below -tol is rejected.
template <int N>
Eigen::Matrix<Complex, N, N> psd_sqrt(const Eigen::Matrix<Complex, N, N>& m,
                                      double tol = kDefaultTolerance);

}  // namespace eraser
