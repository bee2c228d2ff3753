#pragma once

// Independent reference computations used by the test suites and the selftest.
// None of these route through the production solvers they are compared against:
// the propagator oracle builds the Hamiltonian from an explicit DFT matrix, the
// scattering oracle uses transfer matrices, and sums are evaluated term by term.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "modeflow/core/grid.hpp"

namespace modeflow::verify {

using cplx = std::complex<double>;

/// Compensated (Neumaier) summation.
class NeumaierSum {
public:
    void add(double v)
    {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// exp(-i H t / hbar) psi0 for the grid Hamiltonian H = D^{-1} diag(hbar^2 k^2/2m) D + diag(V),
/// with D the explicit N x N DFT matrix, evaluated by Hermitian eigendecomposition.
inline std::vector<cplx> dense_propagator(const SpatialGrid& grid, std::span<const double> v, double hbar, double mass,
                                          double t, std::span<const cplx> psi0)
{
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXcd dft(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index j = 0; j < n; ++j)
            dft(k, j) = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * j) / static_cast<double>(n));
    Eigen::VectorXd kinetic(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double kk = grid.wavenumber(static_cast<std::size_t>(k));
        kinetic(k) = hbar * hbar * kk * kk / (2.0 * mass);
    }
    Eigen::MatrixXcd h = dft.adjoint() * kinetic.asDiagonal() * dft / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) h(i, i) += v[static_cast<std::size_t>(i)];
    h = 0.5 * (h + h.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd phases(n);
    for (Eigen::Index i = 0; i < n; ++i) phases(i) = std::polar(1.0, -es.eigenvalues()(i) * t / hbar);
    Eigen::VectorXcd x0(n);
    for (Eigen::Index i = 0; i < n; ++i) x0(i) = psi0[static_cast<std::size_t>(i)];
    const Eigen::VectorXcd out = es.eigenvectors() * phases.asDiagonal() * (es.eigenvectors().adjoint() * x0);
    return {out.data(), out.data() + n};
}

/// Largest eigenvalue magnitude of the same grid Hamiltonian (for dt E_max / hbar checks).
inline double max_grid_energy(const SpatialGrid& grid, std::span<const double> v, double hbar, double mass)
{
    double vmax = 0.0;
    for (double x : v) vmax = std::max(vmax, std::abs(x));
    return hbar * hbar * grid.k_max() * grid.k_max() / (2.0 * mass) + vmax;
}

/// Classical RK4 integration of x'' = -(k/m) x, returns x(t).
inline double oscillator_position_rk4(double x0, double p0, double stiffness, double mass, double t, std::size_t steps)
{
    double x = x0, p = p0;
    const double h = t / static_cast<double>(steps);
    auto fx = [&](double pp) { return pp / mass; };
    auto fp = [&](double xx) { return -stiffness * xx; };
    for (std::size_t i = 0; i < steps; ++i) {
        const double k1x = fx(p), k1p = fp(x);
        const double k2x = fx(p + 0.5 * h * k1p), k2p = fp(x + 0.5 * h * k1x);
        const double k3x = fx(p + 0.5 * h * k2p), k3p = fp(x + 0.5 * h * k2x);
        const double k4x = fx(p + h * k3p), k4p = fp(x + h * k3x);
        x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
        p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    }
    return x;
}

/// First-order upwind transport of a periodic 1D density f_t + c f_x = 0 with
/// steps of Courant number |c| dt / dx <= 1.
inline std::vector<double> upwind_advect(std::vector<double> f, double speed, double dx, double t, std::size_t steps)
{
    const std::size_t n = f.size();
    const double courant = speed * (t / static_cast<double>(steps)) / dx;
    std::vector<double> next(n);
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            if (courant >= 0.0) {
                const std::size_t im = (i + n - 1) % n;
                next[i] = f[i] - courant * (f[i] - f[im]);
            } else {
                const std::size_t ip = (i + 1) % n;
                next[i] = f[i] - courant * (f[ip] - f[i]);
            }
        }
        f.swap(next);
    }
    return f;
}

/// Wigner function of a normalized Gaussian of position spread sigma centred at x0
/// with mean wavenumber k0.
inline double gaussian_wigner(double x, double k, double x0, double sigma, double k0)
{
    const double dx = x - x0, dk = k - k0;
    return std::exp(-dx * dx / (2.0 * sigma * sigma) - 2.0 * sigma * sigma * dk * dk) / std::numbers::pi;
}

/// Wigner function of the normalized cat state c [g(x - a) + g(x + a)], g a real
/// Gaussian of position spread sigma.
inline double cat_state_wigner(double x, double k, double a, double sigma)
{
    const double c2 = 1.0 / (2.0 * (1.0 + std::exp(-a * a / (2.0 * sigma * sigma))));
    return c2 * (gaussian_wigner(x, k, a, sigma, 0.0) + gaussian_wigner(x, k, -a, sigma, 0.0)
                 + 2.0 * gaussian_wigner(x, k, 0.0, sigma, 0.0) * std::cos(2.0 * a * k));
}

/// Transmission probability through piecewise-constant potential segments
/// (value, width), embedded between zero-potential leads, from a transfer-matrix
/// solve at energy E with the given hbar.
inline double transfer_matrix_transmission(std::span<const std::pair<double, double>> segments, double energy,
                                           double mass, double hbar)
{
    using M2 = Eigen::Matrix2cd;
    auto wavenumber = [&](double v) { return std::sqrt(cplx(2.0 * mass * (energy - v), 0.0)) / hbar; };
    // interface matrix mapping (A, B) coefficients of region with k1 to region with k2 at position x
    auto interface = [](cplx k1, cplx k2, double x) {
        const cplx i(0.0, 1.0);
        M2 m1, m2;
        m1 << std::exp(i * k1 * x), std::exp(-i * k1 * x), i * k1 * std::exp(i * k1 * x), -i * k1 * std::exp(-i * k1 * x);
        m2 << std::exp(i * k2 * x), std::exp(-i * k2 * x), i * k2 * std::exp(i * k2 * x), -i * k2 * std::exp(-i * k2 * x);
        return M2(m2.inverse() * m1);
    };
    const cplx k_lead = wavenumber(0.0);
    M2 total = M2::Identity();
    cplx k_prev = k_lead;
    cplx det = 1.0; // each interface contributes det = k1 / k2
    double x = 0.0;
    for (const auto& [v, w] : segments) {
        const cplx k = wavenumber(v);
        total = interface(k_prev, k, x) * total;
        det *= k_prev / k;
        x += w;
        k_prev = k;
    }
    total = interface(k_prev, k_lead, x) * total;
    det *= k_prev / k_lead;
    // incoming (1, r) on the left maps to (t, 0) on the right: t = det(M) / M22.
    // The determinant is taken from the analytic product because forming it from
    // the entries cancels exponentially large terms.
    const cplx tr = det / total(1, 1);
    return std::norm(tr);
}

} // namespace modeflow::verify
