#include "eraser/entanglement.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>

namespace eraser {

namespace {

Matrix4 spin_flip(const Matrix4& rho) {
  const Matrix4 yy = tensor_product(pauli_y(), pauli_y());
  return yy * rho.conjugate() * yy;
}

const Matrix2& pauli(int i) {
  static const Matrix2 s[3] = {pauli_x(), pauli_y(), pauli_z()};
  return s[i];
}

}  // namespace

void PauliCorrelators::validate(double tol) const {
  const double bound = 1.0 + tol;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(b(i)) > bound || std::abs(c(i)) > bound)
      throw std::invalid_argument("PauliCorrelators: single expectation out "
                                  "of range");
    for (int j = 0; j < 3; ++j)
      if (std::abs(d(i, j)) > bound)
        throw std::invalid_argument("PauliCorrelators: d(" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + ") out of range");
  }
}

double concurrence(const DensityMatrix4& rho) {
  // The Wootters lambda_i equal the singular values of
  // B = sqrt(rho) (sigma_y x sigma_y) sqrt(rho)^*, since B B^dag
  // reproduces sqrt(rho) rho_tilde sqrt(rho). Unlike square roots of
  // the eigenvalues of rho * rho_tilde, singular values carry no
  // sqrt-of-roundoff amplification near rank-deficient states.
  const Matrix4 root = psd_sqrt<4>(rho.mat());
  const Matrix4 yy = tensor_product(pauli_y(), pauli_y());
  const Matrix4 b = root * yy * root.conjugate();
  Eigen::JacobiSVD<Matrix4> svd(b);
  const auto& lam = svd.singularValues();  // descending
  const double c = lam(0) - lam(1) - lam(2) - lam(3);
  // separable states give c <= 0 analytically; snap roundoff-scale
  // positives to an exact zero so they never read as entangled
  if (c < kDefaultTolerance) return 0.0;
  return std::min(c, 1.0);
}

double concurrence_r_matrix(const DensityMatrix4& rho) {
  const Matrix4 root = psd_sqrt<4>(rho.mat());
  const Matrix4 inner = root * spin_flip(rho.mat()) * root;
  // inner is Hermitian PSD up to roundoff
  const Matrix4 herm = 0.5 * (inner + inner.adjoint());
  const Matrix4 r = psd_sqrt<4>(herm, 1e-8);
  Eigensystem<4> es = hermitian_eigensystem<4>(r, 1e-8);
  const double c = es.values(0) - es.values(1) - es.values(2) - es.values(3);
  return std::clamp(c, 0.0, 1.0);
}

double negativity(const DensityMatrix4& rho) {
  // partial transpose over the photon: transpose within each 2x2 block
  Matrix4 pt;
  for (int e = 0; e < 2; ++e)
    for (int f = 0; f < 2; ++f)
      pt.block<2, 2>(2 * e, 2 * f) =
          rho.mat().block<2, 2>(2 * e, 2 * f).transpose();
  Eigensystem<4> es = hermitian_eigensystem<4>(pt);
  double neg = 0.0;
  for (int k = 0; k < 4; ++k)
    if (es.values(k) < 0.0) neg += -es.values(k);
  return neg;
}

PauliCorrelators pauli_correlators(const DensityMatrix4& rho) {
  PauliCorrelators k;
  for (int i = 0; i < 3; ++i) {
    k.b(i) = std::real(
        (tensor_product(pauli(i), identity2()) * rho.mat()).trace());
    k.c(i) = std::real(
        (tensor_product(identity2(), pauli(i)) * rho.mat()).trace());
    for (int j = 0; j < 3; ++j)
      k.d(i, j) = std::real(
          (tensor_product(pauli(i), pauli(j)) * rho.mat()).trace());
  }
  return k;
}

double bell_fidelity(const PauliCorrelators& k) {
  return 0.25 * (1.0 + k.d(0, 0) - k.d(1, 1) + k.d(2, 2));
}

double witness_expectation(const PauliCorrelators& k) {
  return 0.5 - bell_fidelity(k);
}

EraserCriterion eraser_criterion(const PauliCorrelators& k) {
  const double lhs = std::abs(k.d(0, 0) + k.d(2, 2));
  // boundary states sit at lhs == 1 up to roundoff; never claim
  // entanglement from noise
  return {lhs, lhs > 1.0 + 1e-12};
}

BridgedCorrelators visibility_correlator_bridge(
    const std::vector<ConditionedBranch>& branches) {
  double total = 0.0;
  for (const auto& br : branches) total += br.probability;
  if (std::abs(total - 1.0) > 1e-10)
    throw std::invalid_argument(
        "visibility_correlator_bridge: branch probabilities sum to " +
        std::to_string(total));
  BridgedCorrelators out{0.0, 0.0};
  for (const auto& br : branches) {
    const Complex lr = br.rho_e(0, 1);
    out.d_x_basis += br.sign * br.probability * 2.0 * std::real(lr);
    out.d_y_basis += br.sign * br.probability * (-2.0 * std::imag(lr));
  }
  return out;
}

ReconstructionResult reconstruct_state(const PauliCorrelators& k) {
  // measured correlators carry shot noise, so entries may spill slightly
  // past 1; the eigenvalue clipping below restores physicality. Only
  // reject inputs that are badly out of range.
  k.validate(0.2);
  Matrix4 rho = Matrix4::Identity();
  for (int i = 0; i < 3; ++i) {
    rho += k.b(i) * tensor_product(pauli(i), identity2());
    rho += k.c(i) * tensor_product(identity2(), pauli(i));
    for (int j = 0; j < 3; ++j)
      rho += k.d(i, j) * tensor_product(pauli(i), pauli(j));
  }
  rho *= 0.25;

  Eigensystem<4> es = hermitian_eigensystem<4>(rho, 1e-8);
  double adjustment = 0.0;
  if (es.values.minCoeff() < 0.0) {
    // clip negative eigenvalues, renormalize; report trace distance moved
    Matrix4 fixed = Matrix4::Zero();
    double tr = 0.0;
    for (int q = 0; q < 4; ++q) {
      const double lam = std::max(es.values(q), 0.0);
      fixed += lam * es.vectors.col(q) * es.vectors.col(q).adjoint();
      tr += lam;
    }
    fixed /= tr;
    Eigensystem<4> diff = hermitian_eigensystem<4>(
        Matrix4(fixed - rho), 1e-8);
    adjustment = 0.5 * diff.values.cwiseAbs().sum();
    rho = fixed;
  }
  return {DensityMatrix4::validate(rho, 1e-8), adjustment};
}

EntanglementReport analyze_state(const DensityMatrix4& rho) {
  EntanglementReport r;
  r.concurrence = concurrence(rho);
  r.negativity = negativity(rho);
  const PauliCorrelators k = pauli_correlators(rho);
  r.bell_fidelity = bell_fidelity(k);
  r.witness_expectation = witness_expectation(k);
  const EraserCriterion ec = eraser_criterion(k);
  r.eraser_lhs = ec.lhs;
  if (r.witness_expectation < -1e-12) r.flags.push_back("witness");
  if (ec.entangled) r.flags.push_back("eraser_criterion");
  if (r.concurrence > 1e-12) r.flags.push_back("concurrence_positive");
  if (r.negativity > 1e-12) r.flags.push_back("negativity_positive");
  return r;
}

}  // namespace eraser
