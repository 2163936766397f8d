#pragma once

// The masked low-rank objective psi(C) = ||P_L o (K - C C^T)||_F^2 over L x q
// factors, its derivatives, and the eigenvector / Hessian diagnostics.
//
// Two Hessians are provided. hess_psi is the exact second derivative of psi
// and agrees with finite differences of grad_psi. hess_psi_closed_form is
// the published Kronecker expression
//   -4 I_q (x) (P_L o R) + 4 P_qL o {(C^T (x) C) M} + 4 (P_q o C^T C) (x) I_L
// with R = K - C C^T. The two differ (already at L = 2, q = 1 the closed form
// has a zero diagonal where the exact Hessian has 4 c_2^2, 4 c_1^2); the closed
// form is kept because its reduction at an aligned factor is what the
// nonsingularity argument is built on.

#include "covrank/linalg.hpp"

#include <utility>
#include <vector>

namespace covrank {

/// L x q factor C; Theta = C C^T.
class LowRankFactor {
public:
    LowRankFactor() = default;
    explicit LowRankFactor(Matrix entries);

    Index rows() const { return c_.rows(); }
    Index rank() const { return c_.cols(); }
    const Matrix& matrix() const { return c_; }
    Matrix gram() const { return c_ * c_.transpose(); }

private:
    Matrix c_;
};

double psi(const LowRankFactor& C, const CovMatrix& K);

/// -4 (P_L o (K - C C^T)) C.
Matrix grad_psi(const LowRankFactor& C, const CovMatrix& K);

/// Exact (Lq) x (Lq) Hessian of psi in column-major vec coordinates.
Matrix hess_psi(const LowRankFactor& C, const CovMatrix& K);

/// The published closed-form Hessian expression (see file comment).
Matrix hess_psi_closed_form(const LowRankFactor& C, const CovMatrix& K);

/// Workspace-based evaluation used by the optimizer: returns psi and writes
/// the gradient into `grad` without allocating when shapes are stable.
double psi_and_grad(const Matrix& C, const Matrix& K, Matrix& residual, Matrix& grad);

struct EigenvectorCheck {
    bool ok = false;
    // (eigenvector index, entry index) of every entry with |v| <= tol.
    std::vector<std::pair<Index, Index>> offending;
};

/// Whether every entry of the q leading eigenvectors of K exceeds tol in
/// magnitude.
EigenvectorCheck assumption_E_check(const CovMatrix& K, Index q, double tol = 1e-8);

struct HessianCheck {
    bool ok = false;
    double smallest_singular_value = 0.0;
    double largest_singular_value = 0.0;
    Index rotation_dimension = 0;  // directions removed before the spectrum is taken
};

/// Nonsingularity of the exact Hessian at C modulo the rotation orbit
/// {C O : O orthogonal}, along which psi is constant. For q = 1 nothing is
/// removed. ok iff the smallest singular value on the complement exceeds
/// rel_tol times the largest singular value of the full Hessian.
HessianCheck hessian_nonsingularity_check(const LowRankFactor& C, const CovMatrix& K,
                                          double rel_tol = 1e-8);

}  // namespace covrank
