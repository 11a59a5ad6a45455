#pragma once

#include "bp/types.hpp"

#include <Eigen/Dense>

#include <memory>

namespace bp {

/// Discrete fractional Fourier transform of one (even) size.
///
/// Built from the Hermite-like eigenvectors of the tridiagonal matrix
/// that commutes with the unitary DFT. F_a = U diag(e^{-j pi k a / 2}) U^T
/// with k the Hermite index of each eigenvector, so F_0 = I, F_1 is the
/// unitary DFT, and F_a F_b = F_{a+b}. Immutable and shareable across
/// threads once constructed.
class FrftPlan {
public:
    explicit FrftPlan(int n);

    int size() const { return n_; }

    /// Eigenvector matrix, one eigenvector per column.
    const Eigen::MatrixXd& basis() const { return basis_; }
    /// Hermite index per column (0..n-2 plus n; n-1 is skipped).
    const Eigen::VectorXd& orders() const { return orders_; }

    /// X_a = F_a x. Throws dimension_error on size mismatch.
    cvec apply(const cvec& x, double order_a) const;

    /// Eigenbasis coefficients of x as an (n x 2) [re | im] matrix.
    Eigen::MatrixXd coefficients(const cplx* x, std::size_t len) const;

    /// Rotate coefficients by e^{-j pi k a / 2} (in place, [re | im] pairs
    /// of columns).
    void rotate_coefficients(Eigen::MatrixXd& coeffs, double order_a,
                             int first_col = 0) const;

private:
    int n_;
    Eigen::MatrixXd basis_;
    Eigen::VectorXd orders_;
};

/// Process-wide plan cache (plans are expensive to build).
std::shared_ptr<const FrftPlan> shared_frft_plan(int n);

} // namespace bp
