#pragma once

// Per-mode tunnelling through rectangular barriers and the two-exponential
// current-versus-gap model with its least-squares fit.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "modeflow/core/error.hpp"
#include "modeflow/mode_dynamics.hpp"

namespace modeflow {

/// Physical constants used by physical-unit runs (SI).
namespace si {
inline constexpr double electron_mass = 9.1093837015e-31; // kg
inline constexpr double electron_volt = 1.602176634e-19;  // J
inline constexpr double angstrom = 1e-10;                 // m
} // namespace si

struct BarrierScenario {
    double mass = 1.0;
    double energy = 0.5; // E
    double height = 1.0; // V
    double width = 1.0;  // s
    double eta = 1.0;

    void validate() const
    {
        if (!(mass > 0.0)) throw DomainError("BarrierScenario: mass must be > 0");
        if (!(energy > 0.0)) throw DomainError("BarrierScenario: energy must be > 0");
        if (!(height > energy)) throw DomainError("BarrierScenario: need 0 < E < V");
        if (!(width > 0.0)) throw DomainError("BarrierScenario: width must be > 0");
        if (!(eta > 0.0)) throw DomainError("BarrierScenario: eta must be > 0");
    }
};

/// Evanescent decay constant of mode n, n sqrt(2 m (V - E)) / eta.
inline double kappa_mode(const BarrierScenario& sc, int n)
{
    if (!(sc.height > sc.energy)) throw DomainError("kappa_mode: requires E < V");
    if (n < 1) throw DomainError("kappa_mode: mode index must be >= 1");
    if (!(sc.mass > 0.0) || !(sc.eta > 0.0)) throw DomainError("kappa_mode: mass and eta must be > 0");
    const double kappa1 = std::sqrt(2.0 * sc.mass * (sc.height - sc.energy)) / sc.eta;
    return static_cast<double>(n) * kappa1;
}

/// T = [1 + V^2 sinh^2(kappa_n s) / (4 E (V - E))]^{-1}, evaluated through
/// log-sum-exp so deep barriers underflow gracefully instead of overflowing.
inline double transmission_rectangular(const BarrierScenario& sc, int n)
{
    sc.validate();
    const double ks = kappa_mode(sc, n) * sc.width;
    const double c = sc.height * sc.height / (4.0 * sc.energy * (sc.height - sc.energy));
    if (ks < 20.0) {
        const double sh = std::sinh(ks);
        return 1.0 / (1.0 + c * sh * sh);
    }
    // sinh^2(x) = e^{2x} (1 - e^{-2x})^2 / 4
    const double log_term = std::log(c / 4.0) + 2.0 * ks + 2.0 * std::log1p(-std::exp(-2.0 * ks));
    return std::exp(-log_term) / (1.0 + std::exp(-log_term));
}

/// ln T, accurate for arbitrarily thick barriers.
inline double log_transmission_rectangular(const BarrierScenario& sc, int n)
{
    sc.validate();
    const double ks = kappa_mode(sc, n) * sc.width;
    const double c = sc.height * sc.height / (4.0 * sc.energy * (sc.height - sc.energy));
    if (ks < 20.0) {
        const double sh = std::sinh(ks);
        return -std::log1p(c * sh * sh);
    }
    const double log_term = std::log(c / 4.0) + 2.0 * ks + 2.0 * std::log1p(-std::exp(-2.0 * ks));
    return -(log_term + std::log1p(std::exp(-log_term)));
}

/// Two-exponential current model c1 e^{-kappa1 dx} + c2 e^{-kappa2 dx}, dx = gap + offset.
struct TunnelFit {
    double c1 = 0.0;
    double c2 = 0.0;
    double kappa1 = 1.0;
    double kappa2 = 2.0;
    double offset = 0.0;

    void validate() const
    {
        if (!(c1 >= 0.0) || !(c2 >= 0.0)) throw DomainError("TunnelFit: amplitudes must be >= 0");
        if (!(kappa1 > 0.0) || !(kappa2 > kappa1)) throw DomainError("TunnelFit: need kappa2 > kappa1 > 0");
    }

    /// Fits of Binnig-type current curves quoted in the literature (amperes, 1/angstrom);
    /// gaps measured from the position of the 1e-6 A point.
    static TunnelFit plot_d() { return {0.116e-2, 2.26, 1.745, 3.5, 4.4}; }
    static TunnelFit plot_e() { return {0.22e-4, 0.735e-3, 1.72, 3.4, 2.17}; }
};

struct CurrentComponents {
    double first = 0.0;
    double second = 0.0;
    double total() const { return first + second; }
};

inline CurrentComponents current_components_at(double delta_x, const TunnelFit& fit)
{
    return {fit.c1 * std::exp(-fit.kappa1 * delta_x), fit.c2 * std::exp(-fit.kappa2 * delta_x)};
}

inline double current_model(double gap, const TunnelFit& fit)
{
    if (!(gap >= 0.0)) throw DomainError("current_model: gap must be >= 0");
    return current_components_at(gap + fit.offset, fit).total();
}

/// The dx (= gap + offset) at which the model current equals `total`, by bisection
/// on the monotone decreasing model.
inline double delta_x_at_current(const TunnelFit& fit, double total)
{
    if (!(total > 0.0)) throw DomainError("delta_x_at_current: current must be > 0");
    auto f = [&](double dx) { return std::log(current_components_at(dx, fit).total()) - std::log(total); };
    double lo = -50.0, hi = 50.0;
    while (f(lo) < 0.0) lo *= 2.0;
    while (f(hi) > 0.0) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Component currents at the point where the model total equals `total`.
inline CurrentComponents component_split(const TunnelFit& fit, double total)
{
    return current_components_at(delta_x_at_current(fit, total), fit);
}

struct CurrentSamples {
    std::vector<double> gaps;     // angstrom, strictly increasing
    std::vector<double> currents; // ampere, > 0

    void validate() const
    {
        if (gaps.size() != currents.size()) throw DataError("CurrentSamples: gaps and currents differ in length");
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            if (!(currents[i] > 0.0)) throw DataError("CurrentSamples: currents must be > 0");
            if (i > 0 && !(gaps[i] > gaps[i - 1])) throw DataError("CurrentSamples: gaps must be strictly increasing");
        }
    }
};

/// Model currents at the given gaps with multiplicative log-normal noise
/// I -> I exp(sigma z), z standard normal; sigma = 0 gives exact model values.
inline CurrentSamples synthesize_currents(const TunnelFit& fit, std::vector<double> gaps, double noise_sigma,
                                          std::uint64_t seed)
{
    if (!(noise_sigma >= 0.0)) throw DomainError("synthesize_currents: noise sigma must be >= 0");
    CurrentSamples out{std::move(gaps), {}};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    out.currents.reserve(out.gaps.size());
    for (double g : out.gaps) {
        const double clean = current_model(g, fit);
        out.currents.push_back(noise_sigma > 0.0 ? clean * std::exp(noise_sigma * z(rng)) : clean);
    }
    out.validate();
    return out;
}

/// n evenly spaced gaps on [lo, hi].
inline std::vector<double> uniform_gaps(double lo, double hi, std::size_t n)
{
    if (n < 2 || !(hi > lo)) throw DomainError("uniform_gaps: need n >= 2 and hi > lo");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

struct FitResult {
    TunnelFit fit;
    double residual_norm = 0.0;               // ||ln I_model - ln I||_2
    std::optional<double> kappa_ratio;        // empty when the second exponential is not resolved
    bool single_exponential = false;
    bool converged = false;
    int iterations = 0;
    std::array<double, 4> std_errors{};       // (ln c1, kappa1, ln c2, kappa2)
    Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();
};

class FitError : public Error {
public:
    FitError(const std::string& what, FitResult best) : Error(what), best_(std::move(best)) {}
    const FitResult& best_so_far() const noexcept { return best_; }

private:
    FitResult best_;
};

struct FitOptions {
    double offset = 0.0;
    int max_iterations = 200;
    double tolerance = 1e-12;          // relative step / cost change
    double second_component_floor = 1e-3; // c2 share at the smallest gap below this => single exponential
    double min_kappa_separation = 1.05;   // kappa2 / kappa1 below this => single exponential
    double min_f_statistic = 10.0;        // extra-sum-of-squares F for the two added parameters
};

namespace detail {

struct LineFit {
    double intercept;
    double slope;
};

inline LineFit least_squares_line(std::span<const double> x, std::span<const double> y)
{
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / den;
    return {(sy - slope * sx) / n, slope};
}

// Model in log space with parameters (ln c1, kappa1, ln c2, kappa2).
inline double log_model(const Eigen::Vector4d& p, double dx)
{
    const double a = p(0) - p(1) * dx, b = p(2) - p(3) * dx;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

} // namespace detail

/// Nonlinear least squares on ln I with a damped Gauss-Newton (Levenberg-Marquardt)
/// iteration. Starting values come from splitting the ln I curve at its largest
/// second difference and fitting a line to each side.
inline FitResult fit_double_exponential(const CurrentSamples& data, const FitOptions& opt = {})
{
    data.validate();
    const std::size_t m = data.gaps.size();
    if (m < 8) throw DataError("fit_double_exponential: need at least 8 samples");
    std::vector<double> dx(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
        dx[i] = data.gaps[i] + opt.offset;
        y[i] = std::log(data.currents[i]);
    }
    const double decades = (*std::max_element(y.begin(), y.end()) - *std::min_element(y.begin(), y.end())) / std::log(10.0);
    if (decades < 3.0) throw DataError("fit_double_exponential: samples must span at least 3 decades of current");

    // Knee: largest second difference of ln I (uniform or not, use the divided form).
    std::size_t knee = 2;
    double best_curv = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double s1 = (y[i] - y[i - 1]) / (dx[i] - dx[i - 1]);
        const double s2 = (y[i + 1] - y[i]) / (dx[i + 1] - dx[i]);
        const double curv = (s2 - s1) / (0.5 * (dx[i + 1] - dx[i - 1]));
        if (curv > best_curv) {
            best_curv = curv;
            knee = i;
        }
    }
    knee = std::clamp<std::size_t>(knee, 2, m - 3);

    FitResult result;
    result.fit.offset = opt.offset;
    const auto far = detail::least_squares_line(std::span(dx).subspan(knee), std::span(y).subspan(knee));
    // Near side: remove the extrapolated far component, fit what remains.
    std::vector<double> near_x, near_y;
    for (std::size_t i = 0; i <= knee; ++i) {
        const double rest = data.currents[i] - std::exp(far.intercept + far.slope * dx[i]);
        if (rest > 0.0) {
            near_x.push_back(dx[i]);
            near_y.push_back(std::log(rest));
        }
    }
    Eigen::Vector4d p;
    const double k1 = std::max(-far.slope, 1e-6);
    if (near_x.size() >= 2) {
        const auto near = detail::least_squares_line(near_x, near_y);
        p << far.intercept, k1, near.intercept, std::max(-near.slope, 1.5 * k1);
    } else {
        p << far.intercept, k1, far.intercept - 10.0, 2.0 * k1;
    }

    auto residuals = [&](const Eigen::Vector4d& q) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < m; ++i) r(static_cast<Eigen::Index>(i)) = detail::log_model(q, dx[i]) - y[i];
        return r;
    };
    auto jacobian = [&](const Eigen::Vector4d& q) {
        Eigen::MatrixXd j(static_cast<Eigen::Index>(m), 4);
        for (std::size_t i = 0; i < m; ++i) {
            const double a = q(0) - q(1) * dx[i], b = q(2) - q(3) * dx[i];
            const double mx = std::max(a, b);
            const double ea = std::exp(a - mx), eb = std::exp(b - mx);
            const double wa = ea / (ea + eb), wb = eb / (ea + eb);
            const auto r = static_cast<Eigen::Index>(i);
            j(r, 0) = wa;
            j(r, 1) = -wa * dx[i];
            j(r, 2) = wb;
            j(r, 3) = -wb * dx[i];
        }
        return j;
    };

    double lambda = 1e-3;
    Eigen::VectorXd r = residuals(p);
    double cost = r.squaredNorm();
    int it = 0;
    bool converged = false;
    for (; it < opt.max_iterations; ++it) {
        const Eigen::MatrixXd j = jacobian(p);
        const Eigen::Matrix4d jtj = j.transpose() * j;
        const Eigen::Vector4d g = j.transpose() * r;
        bool accepted = false;
        for (int tries = 0; tries < 40; ++tries) {
            Eigen::Matrix4d a = jtj;
            for (int d = 0; d < 4; ++d) a(d, d) += lambda * std::max(jtj(d, d), 1e-12);
            const Eigen::Vector4d step = a.ldlt().solve(-g);
            const Eigen::Vector4d trial = p + step;
            const Eigen::VectorXd rt = residuals(trial);
            const double ct = rt.squaredNorm();
            if (std::isfinite(ct) && ct <= cost) {
                const double rel_step = step.norm() / std::max(p.norm(), 1e-300);
                const double rel_cost = (cost - ct) / std::max(cost, 1e-300);
                p = trial;
                r = rt;
                cost = ct;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (rel_step < opt.tolerance || rel_cost < opt.tolerance * opt.tolerance || cost < 1e-28) converged = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            // no downhill step at any damping: a stationary point
            converged = g.norm() < 1e-8 * std::max(1.0, std::sqrt(cost));
            break;
        }
        if (converged) break;
    }

    // keep the labels ordered: component 1 is the slower decay
    if (p(3) < p(1)) {
        std::swap(p(0), p(2));
        std::swap(p(1), p(3));
    }

    result.iterations = it + 1;
    result.converged = converged;
    result.residual_norm = std::sqrt(cost);
    result.fit.c1 = std::exp(p(0));
    result.fit.kappa1 = p(1);
    result.fit.c2 = std::exp(p(2));
    result.fit.kappa2 = p(3);

    const Eigen::MatrixXd j = jacobian(p);
    const double dof = static_cast<double>(m) - 4.0;
    const double sigma2 = cost / std::max(dof, 1.0);
    result.covariance = (j.transpose() * j).ldlt().solve(Eigen::Matrix4d::Identity()) * sigma2;
    for (int d = 0; d < 4; ++d) result.std_errors[static_cast<std::size_t>(d)] = std::sqrt(std::max(result.covariance(d, d), 0.0));

    const auto line = detail::least_squares_line(dx, y);
    double line_cost = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double e = line.intercept + line.slope * dx[i] - y[i];
        line_cost += e * e;
    }
    // A second exponential must both carry current and explain significantly more
    // than a straight line in ln I does.
    const double f_stat = ((line_cost - cost) / 2.0) / std::max(cost / std::max(dof, 1.0), 1e-300);
    const auto parts = current_components_at(dx.front(), result.fit);
    const double share2 = parts.second / parts.total();
    const bool resolved = share2 >= opt.second_component_floor && result.fit.kappa1 > 0.0
                          && result.fit.kappa2 / result.fit.kappa1 >= opt.min_kappa_separation
                          && f_stat >= opt.min_f_statistic;
    if (!resolved) {
        // report the best single exponential instead of a spurious second term
        result.single_exponential = true;
        result.fit.c1 = std::exp(line.intercept);
        result.fit.kappa1 = -line.slope;
        result.fit.c2 = 0.0;
        result.fit.kappa2 = 0.0;
        result.kappa_ratio.reset();
        result.residual_norm = std::sqrt(line_cost);
        result.converged = true;
        return result;
    }
    result.kappa_ratio = result.fit.kappa2 / result.fit.kappa1;
    if (!converged) throw FitError("fit_double_exponential: no convergence after " + std::to_string(it) + " iterations",
                                   result);
    return result;
}

/// Per-mode currents I_n = a(n) T(sc, n) attempt_rate.
struct ModeCurrents {
    BarrierScenario scenario;
    ModeWeights weights;
    double attempt_rate = 1.0;
    std::vector<std::pair<int, double>> currents;

    /// I_n as a function of barrier width.
    double at_width(int n, double width) const
    {
        BarrierScenario sc = scenario;
        sc.width = width;
        return weights.at(n) * transmission_rectangular(sc, n) * attempt_rate;
    }

    double log_at_width(int n, double width) const
    {
        BarrierScenario sc = scenario;
        sc.width = width;
        return std::log(weights.at(n)) + log_transmission_rectangular(sc, n) + std::log(attempt_rate);
    }
};

inline ModeCurrents mode_resolved_current(const BarrierScenario& sc, const ModeWeights& weights, double attempt_rate)
{
    sc.validate();
    if (!weights.is_normalized()) throw ConfigError("mode_resolved_current: weights must be normalized");
    if (!(attempt_rate > 0.0)) throw DomainError("mode_resolved_current: attempt_rate must be > 0");
    ModeCurrents out{sc, weights, attempt_rate, {}};
    for (const auto& [n, a] : weights.map()) out.currents.emplace_back(n, a * transmission_rectangular(sc, n) * attempt_rate);
    return out;
}

/// Width at which I_n2 = I_n1, searched on (0, max_width]; empty when the two
/// curves do not cross there. With kappa_n2 > kappa_n1 the ratio I_n2/I_n1 falls
/// monotonically with width.
inline std::optional<double> crossover_width(const ModeCurrents& mc, int n1, int n2, double max_width)
{
    auto f = [&](double s) { return mc.log_at_width(n2, s) - mc.log_at_width(n1, s); };
    double lo = 1e-12 * max_width, hi = max_width;
    const double flo = f(lo), fhi = f(hi);
    if (!(flo > 0.0 && fhi < 0.0)) return std::nullopt;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
        if (hi - lo < 1e-15 * hi) break;
    }
    return 0.5 * (lo + hi);
}

/// Deep-barrier (WKB) crossover ln[(a2 T02)/(a1 T01)] / (2 kappa2 - 2 kappa1), where
/// T ~ T0 e^{-2 kappa s} and T0 = 16 E (V - E) / V^2 for every mode.
inline double wkb_crossover_width(const BarrierScenario& sc, const ModeWeights& w, int n1, int n2)
{
    const double t0 = 16.0 * sc.energy * (sc.height - sc.energy) / (sc.height * sc.height);
    return std::log((w.at(n2) * t0) / (w.at(n1) * t0)) / (2.0 * kappa_mode(sc, n2) - 2.0 * kappa_mode(sc, n1));
}

} // namespace modeflow
