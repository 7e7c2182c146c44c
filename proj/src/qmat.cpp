#include "eraser/qmat.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace eraser {

Matrix2 pauli_x() {
  Matrix2 m;
  m << 0, 1, 1, 0;
  return m;
}

Matrix2 pauli_y() {
  Matrix2 m;
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

Matrix2 pauli_z() {
  Matrix2 m;
  m << 1, 0, 0, -1;
  return m;
}

Matrix2 identity2() { return Matrix2::Identity(); }

Matrix4 tensor_product(const Matrix2& electron, const Matrix2& photon) {
  Matrix4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.block<2, 2>(2 * i, 2 * j) = electron(i, j) * photon;
  return out;
}

Matrix2 partial_trace_raw(const Matrix4& m, Subsystem traced) {
  Matrix2 out = Matrix2::Zero();
  if (traced == Subsystem::photon) {
    // keep electron indices, sum over photon diagonal
    for (int e = 0; e < 2; ++e)
      for (int f = 0; f < 2; ++f)
        for (int p = 0; p < 2; ++p) out(e, f) += m(2 * e + p, 2 * f + p);
  } else {
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q)
        for (int e = 0; e < 2; ++e) out(p, q) += m(2 * e + p, 2 * e + q);
  }
  return out;
}

DensityMatrix2 partial_trace(const DensityMatrix4& rho, Subsystem traced) {
  return DensityMatrix2::validate(partial_trace_raw(rho.mat(), traced),
                                  rho.tolerance());
}

template <int N>
DensityDiagnostic check_density(const Eigen::Matrix<Complex, N, N>& m,
                                double tol) {
  DensityDiagnostic d;
  d.trace_deviation = std::abs(m.trace() - Complex(1.0));
  d.hermiticity_deviation =
      (m - m.adjoint()).template lpNorm<Eigen::Infinity>();

  // positivity is checked on the Hermitian part so a slightly lopsided
  // matrix still yields a meaningful spectrum
  Eigen::Matrix<Complex, N, N> herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Complex, N, N>> es(herm);
  d.min_eigenvalue = es.eigenvalues().minCoeff();

  std::ostringstream msg;
  d.ok = true;
  if (d.trace_deviation > tol) {
    d.ok = false;
    msg << "trace deviates from 1 by " << d.trace_deviation << "; ";
  }
  if (d.hermiticity_deviation > tol) {
    d.ok = false;
    msg << "not Hermitian, max |M - M^dag| = " << d.hermiticity_deviation
        << "; ";
  }
  if (d.min_eigenvalue < -tol) {
    d.ok = false;
    msg << "negative eigenvalue " << d.min_eigenvalue << "; ";
  }
  d.message = d.ok ? "valid" : msg.str();
  return d;
}

template DensityDiagnostic check_density<2>(const Matrix2&, double);
template DensityDiagnostic check_density<4>(const Matrix4&, double);

template <int N>
DensityMatrix<N> DensityMatrix<N>::validate(
    const Eigen::Matrix<Complex, N, N>& m, double tol) {
  DensityDiagnostic d = check_density<N>(m, tol);
  if (!d.ok) throw std::invalid_argument("invalid density matrix: " + d.message);
  return DensityMatrix<N>(m, tol);
}

template class DensityMatrix<2>;
template class DensityMatrix<4>;

template <int N>
Eigensystem<N> hermitian_eigensystem(const Eigen::Matrix<Complex, N, N>& m,
                                     double tol) {
  double herm_dev = (m - m.adjoint()).template lpNorm<Eigen::Infinity>();
  if (herm_dev > tol) {
    throw std::invalid_argument("hermitian_eigensystem: input deviates from "
                                "Hermiticity by " + std::to_string(herm_dev));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Complex, N, N>> es(m);
  Eigensystem<N> out;
  // Eigen sorts ascending; flip to descending
  for (int k = 0; k < N; ++k) {
    out.values(k) = es.eigenvalues()(N - 1 - k);
    out.vectors.col(k) = es.eigenvectors().col(N - 1 - k);
  }
  return out;
}

template Eigensystem<2> hermitian_eigensystem<2>(const Matrix2&, double);
template Eigensystem<4> hermitian_eigensystem<4>(const Matrix4&, double);

template <int N>
Eigen::Matrix<Complex, N, N> psd_sqrt(const Eigen::Matrix<Complex, N, N>& m,
                                      double tol) {
  Eigensystem<N> es = hermitian_eigensystem<N>(m, tol);
  Eigen::Matrix<Complex, N, N> out = Eigen::Matrix<Complex, N, N>::Zero();
  for (int k = 0; k < N; ++k) {
    double lam = es.values(k);
    if (lam < -tol) {
      throw std::invalid_argument(
          "psd_sqrt: eigenvalue " + std::to_string(lam) + " below -tol");
    }
    lam = std::max(lam, 0.0);
    out += std::sqrt(lam) * es.vectors.col(k) *
           es.vectors.col(k).adjoint();
  }
  return out;
}

template Matrix2 psd_sqrt<2>(const Matrix2&, double);
template Matrix4 psd_sqrt<4>(const Matrix4&, double);

}  // namespace eraser
