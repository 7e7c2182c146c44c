#pragma once

// Entanglement quantification and certification for the two-qubit
// electron-photon state: concurrence, negativity, Pauli correlators,
// Bell-state fidelity, witness, the reduced eraser inequality, and
// linear-inversion tomography.

#include "eraser/model.hpp"
#include "eraser/qmat.hpp"

#include <optional>
#include <string>
#include <vector>

namespace eraser {

/// The 15 Pauli expectation values of a two-qubit state: electron singles
/// b_i = <sigma_i x id>, photon singles c_i = <id x sigma_i>, and
/// correlators d_ij = <sigma_i x sigma_j>, indices ordered (x, y, z).
struct PauliCorrelators {
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  Eigen::Matrix3d d = Eigen::Matrix3d::Zero();

  std::optional<Eigen::Vector3d> b_stderr;
  std::optional<Eigen::Vector3d> c_stderr;
  std::optional<Eigen::Matrix3d> d_stderr;

  /// Throws if any expectation leaves [-1-tol, 1+tol].
  void validate(double tol = kDefaultTolerance) const;
};

struct EntanglementReport {
  double concurrence = 0.0;
  double negativity = 0.0;
  double bell_fidelity = 0.0;
  double witness_expectation = 0.0;
  double eraser_lhs = 0.0;
  std::vector<std::string> flags;  // which sufficient conditions fired
};

/// Wootters concurrence, clamped to [0,1]. The lambda_i are the
/// descending square roots of the eigenvalues of rho * rho_tilde with
/// rho_tilde = (sigma_y x sigma_y) rho^* (sigma_y x sigma_y).
double concurrence(const DensityMatrix4& rho);

/// Same value through the Hermitian route: eigenvalues of
/// R = sqrt(sqrt(rho) rho_tilde sqrt(rho)). Kept as an independent
/// algebraic path; tests pin the two routes against each other.
double concurrence_r_matrix(const DensityMatrix4& rho);

/// Sum of |negative eigenvalues| of the partial transpose over the
/// photon subsystem. Zero iff separable for two qubits.
double negativity(const DensityMatrix4& rho);

/// All 15 Pauli expectations by trace contraction.
PauliCorrelators pauli_correlators(const DensityMatrix4& rho);

/// F = (1 + d_xx - d_yy + d_zz) / 4, the fidelity with the Bell state
/// (|LH> + |RV>)/sqrt(2). F > 1/2 certifies entanglement.
double bell_fidelity(const PauliCorrelators& k);

/// <W> = 1/2 - F for the witness W = id - |Bell><Bell|.
double witness_expectation(const PauliCorrelators& k);

struct EraserCriterion {
  double lhs;       // |d_xx + d_zz|
  bool entangled;   // lhs > 1 (sufficient only; false is not separability)
};

EraserCriterion eraser_criterion(const PauliCorrelators& k);

/// One photon-conditioned branch: the electron reduced state, the branch
/// probability, and the outcome sign (+1/-1) of the photon measurement.
struct ConditionedBranch {
  DensityMatrix2 rho_e;
  double probability;
  int sign;
};

struct BridgedCorrelators {
  double d_x_basis;  // <sigma_x^e x sigma_basis^ph>
  double d_y_basis;  // <sigma_y^e x sigma_basis^ph>
};

/// Reconstructs the electron-x and electron-y correlators for one photon
/// basis from the signed, probability-weighted fringe quadratures of the
/// conditioned states: cos-quadrature 2 Re(rho_LR) for sigma_x, the
/// sin-quadrature -2 Im(rho_LR) for sigma_y. Branch probabilities must
/// sum to 1.
BridgedCorrelators visibility_correlator_bridge(
    const std::vector<ConditionedBranch>& branches);

struct ReconstructionResult {
  DensityMatrix4 rho;
  /// Trace distance moved by the physicality projection (0 when the raw
  /// linear inversion was already PSD).
  double adjustment;
};

/// Linear inversion rho = (id + sum b_i s_i x id + c_i id x s_i +
/// sum d_ij s_i x s_j) / 4, followed by eigenvalue clipping and
/// renormalization when the raw result is not PSD.
ReconstructionResult reconstruct_state(const PauliCorrelators& k);

/// Full report for a state: measures, fidelity, witness, criterion.
EntanglementReport analyze_state(const DensityMatrix4& rho);

}  // namespace eraser
