#include "bp/frft.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace bp {

namespace {

// Eigen-decompose a symmetric tridiagonal block and return eigenvectors
// ordered by descending eigenvalue (Sturm: the i-th then has i sign
// changes, i.e. Hermite index grows with i).
void tridiag_eig_desc(const Eigen::VectorXd& diag, const Eigen::VectorXd& subdiag,
                      Eigen::MatrixXd& vecs) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, subdiag, Eigen::ComputeEigenvectors);
    const Eigen::MatrixXd& v = solver.eigenvectors(); // ascending eigenvalues
    const int m = static_cast<int>(diag.size());
    vecs.resize(m, m);
    for (int i = 0; i < m; ++i) vecs.col(i) = v.col(m - 1 - i);
}

} // namespace

FrftPlan::FrftPlan(int n) : n_(n) {
    if (n < 4 || n % 2 != 0)
        throw config_error("FrftPlan: size must be even and >= 4");

    const double two_pi = 2.0 * std::numbers::pi;
    auto s_diag = [&](int k) { return 2.0 * std::cos(two_pi * k / n) - 4.0; };

    // The commuting matrix S (diag 2cos(2 pi k / n) - 4, unit
    // off-diagonals, circulant corners) block-diagonalizes over the
    // DFT-even and DFT-odd symmetric subspaces; each block is Jacobi.
    const int ne = n / 2 + 1; // even block: e0, (e_k + e_{n-k})/sqrt2, e_{n/2}
    Eigen::VectorXd ed(ne), es(ne - 1);
    ed(0) = s_diag(0);
    for (int k = 1; k < n / 2; ++k) ed(k) = s_diag(k);
    ed(n / 2) = s_diag(n / 2);
    es(0) = std::numbers::sqrt2;
    for (int k = 1; k < n / 2 - 1; ++k) es(k) = 1.0;
    es(ne - 2) = std::numbers::sqrt2;

    const int no = n / 2 - 1; // odd block: (e_k - e_{n-k})/sqrt2
    Eigen::VectorXd od(no), os(std::max(no - 1, 0));
    for (int k = 1; k <= no; ++k) od(k - 1) = s_diag(k);
    for (int k = 0; k < no - 1; ++k) os(k) = 1.0;

    Eigen::MatrixXd ev, ov;
    tridiag_eig_desc(ed, es, ev);
    tridiag_eig_desc(od, os, ov);

    basis_.setZero(n, n);
    orders_.resize(n);

    const double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
    int col = 0;
    // Hermite indices 0,2,...,n-2 and n for the even subspace,
    // 1,3,...,n-3 for the odd one; index n-1 does not occur for even n.
    for (int i = 0; i < ne; ++i, ++col) {
        orders_(col) = (i < ne - 1) ? 2.0 * i : static_cast<double>(n);
        basis_(0, col) = ev(0, i);
        for (int k = 1; k < n / 2; ++k) {
            basis_(k, col) = ev(k, i) * inv_sqrt2;
            basis_(n - k, col) = ev(k, i) * inv_sqrt2;
        }
        basis_(n / 2, col) = ev(n / 2, i);
    }
    for (int i = 0; i < no; ++i, ++col) {
        orders_(col) = 2.0 * i + 1.0;
        for (int k = 1; k <= no; ++k) {
            basis_(k, col) = ov(k - 1, i) * inv_sqrt2;
            basis_(n - k, col) = -ov(k - 1, i) * inv_sqrt2;
        }
    }
}

Eigen::MatrixXd FrftPlan::coefficients(const cplx* x, std::size_t len) const {
    if (static_cast<int>(len) != n_)
        throw dimension_error("FrftPlan: signal length does not match plan size");
    Eigen::MatrixXd xm(n_, 2);
    for (int i = 0; i < n_; ++i) {
        xm(i, 0) = x[i].real();
        xm(i, 1) = x[i].imag();
    }
    return basis_.transpose() * xm;
}

void FrftPlan::rotate_coefficients(Eigen::MatrixXd& coeffs, double order_a,
                                   int first_col) const {
    const double half_pi = std::numbers::pi / 2.0;
    for (int i = 0; i < n_; ++i) {
        const double ang = -half_pi * orders_(i) * order_a;
        const double c = std::cos(ang), s = std::sin(ang);
        const double re = coeffs(i, first_col), im = coeffs(i, first_col + 1);
        // e^{j ang} (re + j im)
        coeffs(i, first_col) = re * c - im * s;
        coeffs(i, first_col + 1) = re * s + im * c;
    }
}

cvec FrftPlan::apply(const cvec& x, double order_a) const {
    Eigen::MatrixXd c = coefficients(x.data(), x.size());
    rotate_coefficients(c, order_a);
    Eigen::MatrixXd y = basis_ * c;
    cvec out(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) out[i] = cplx(y(i, 0), y(i, 1));
    return out;
}

std::shared_ptr<const FrftPlan> shared_frft_plan(int n) {
    static std::mutex mtx;
    static std::map<int, std::shared_ptr<const FrftPlan>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto plan = std::make_shared<const FrftPlan>(n);
    cache.emplace(n, plan);
    return plan;
}

} // namespace bp
