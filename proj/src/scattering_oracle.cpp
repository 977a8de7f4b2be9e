#include "boxres/scattering_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "boxres/error.hpp"

namespace boxres {

namespace {

constexpr std::size_t kSweepBatch = 32; // fixed so results do not depend on the CPU
constexpr double kMinConditioning = 0.25;
constexpr int kMaxSeriesTerms = 400;

struct MatchPoint {
    double r;
    double u; // relative amplitude; only ratios between the two points matter
};

double wrap_phase(double eta) {
    eta = std::fmod(eta, std::numbers::pi);
    if (eta < 0.0) {
        eta += std::numbers::pi;
    }
    if (eta >= std::numbers::pi) {
        eta -= std::numbers::pi;
    }
    return eta;
}

void check_match_radius(const PotentialSpec& spec, double match_radius) {
    if (!(match_radius > 0.0) || !std::isfinite(match_radius)) {
        throw ParameterError("matching radius must be positive");
    }
    const double tail = eval_finite_range(spec, match_radius);
    if (!(std::fabs(tail) < 1e-12)) {
        throw ParameterError("finite-range potential at the matching radius is " +
                             std::to_string(tail) + ", needs to be below 1e-12");
    }
}

void check_energy(double energy) {
    if (!(energy > 0.0) || !std::isfinite(energy)) {
        throw DomainError("phase shifts need a positive finite energy");
    }
}

/// Returns eta in [0, pi) and the normalized determinant of the 2x2 match.
std::pair<double, double> match(const PotentialSpec& spec, double k, MatchPoint a, MatchPoint b) {
    const double gamma = spec.z / k;
    const CoulombAsymptotic fa = coulomb_asymptotic(spec.l, gamma, k * a.r);
    const CoulombAsymptotic fb = coulomb_asymptotic(spec.l, gamma, k * b.r);
    const double det = fa.s * fb.c - fb.s * fa.c;
    const double amp = std::hypot(fa.s, fa.c) * std::hypot(fb.s, fb.c);
    const double coef_s = (a.u * fb.c - b.u * fa.c) / det;
    const double coef_c = (fa.s * b.u - fb.s * a.u) / det;
    return {wrap_phase(std::atan2(coef_c, coef_s)), std::fabs(det) / amp};
}

/// Integrates all `energies` to match_radius + separation in one batch.
std::vector<std::pair<double, double>> match_batch(const PotentialSpec& spec,
                                                   std::span<const double> energies,
                                                   double match_radius, double separation,
                                                   const IntegrationParams& params) {
    const GridPlan plan = plan_grid(params.with_box(match_radius + separation));
    const kernels::RadialTable table = build_table(spec, plan.r0, plan.step, plan.steps);
    const auto probe = static_cast<std::size_t>(
        std::llround((match_radius - plan.r0) / plan.step));
    if (probe == 0 || probe >= plan.steps) {
        throw ParameterError("matching points collapse onto one grid point");
    }
    std::vector<kernels::LaneResult> lanes(energies.size());
    kernels::shoot(table, energies, lanes, probe);

    const double r_probe = plan.r0 + static_cast<double>(probe) * plan.step;
    const double r_end = table.r_end();
    std::vector<std::pair<double, double>> out;
    out.reserve(energies.size());
    for (std::size_t i = 0; i < energies.size(); ++i) {
        const kernels::LaneResult& res = lanes[i];
        if (!std::isfinite(res.u_end) || !std::isfinite(res.u_probe)) {
            throw IntegrationError("non-finite solution at E = " + std::to_string(energies[i]));
        }
        const MatchPoint a{r_probe, res.u_probe};
        const MatchPoint b{r_end, std::ldexp(res.u_end, res.scale_exp - res.probe_scale_exp)};
        out.push_back(match(spec, std::sqrt(2.0 * energies[i]), a, b));
    }
    return out;
}

PhaseShiftSample make_sample(const PotentialSpec& spec, double energy, double eta) {
    PhaseShiftSample s;
    s.energy = energy;
    s.k = std::sqrt(2.0 * energy);
    s.gamma_sommerfeld = spec.z / s.k;
    s.eta = eta;
    return s;
}

/// Residuals (model - data) over the window in scaled parameters
/// x = (t_gamma, Gamma/half_width, b0, b1, b2).
struct BreitWignerResiduals {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    using QRSolver = Eigen::ColPivHouseholderQR<JacobianType>;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    const Eigen::VectorXd& energy;
    const Eigen::VectorXd& t;
    const Eigen::VectorXd& eta;
    double center;
    double half;

    int inputs() const { return 5; }
    int values() const { return static_cast<int>(energy.size()); }

    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
        const double e_gamma = center + half * x[0];
        const double a = 0.5 * half * x[1];
        for (Eigen::Index i = 0; i < energy.size(); ++i) {
            const double bg = x[2] + t[i] * (x[3] + t[i] * x[4]);
            f[i] = bg + std::atan2(a, e_gamma - energy[i]) - eta[i];
        }
        return 0;
    }

    int df(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
        const double e_gamma = center + half * x[0];
        const double a = 0.5 * half * x[1];
        for (Eigen::Index i = 0; i < energy.size(); ++i) {
            const double d = e_gamma - energy[i];
            const double q = 1.0 / (a * a + d * d);
            jac(i, 0) = -half * a * q;
            jac(i, 1) = 0.5 * half * d * q;
            jac(i, 2) = 1.0;
            jac(i, 3) = t[i];
            jac(i, 4) = t[i] * t[i];
        }
        return 0;
    }
};

} // namespace

CoulombAsymptotic coulomb_asymptotic(int l, double gamma, double rho) {
    if (!(rho > 0.0)) {
        throw DomainError("asymptotic Coulomb functions need rho > 0");
    }
    const double ll = static_cast<double>(l) * (l + 1.0);
    double f = 1.0;
    double g = 0.0;
    double fk = 1.0;
    double gk = 0.0;
    double last_size = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kMaxSeriesTerms; ++k) {
        const double denom = (2.0 * k + 2.0) * rho;
        const double a = (2.0 * k + 1.0) * gamma / denom;
        const double b = (ll - k * (k + 1.0) + gamma * gamma) / denom;
        const double fn = a * fk - b * gk;
        const double gn = a * gk + b * fk;
        const double size = std::fabs(fn) + std::fabs(gn);
        if (size >= last_size) {
            break; // asymptotic series: stop at the smallest term
        }
        f += fn;
        g += gn;
        fk = fn;
        gk = gn;
        last_size = size;
        if (size < 1e-17 * (std::fabs(f) + std::fabs(g))) {
            break;
        }
    }
    const double theta = rho - 0.5 * l * std::numbers::pi - gamma * std::log(2.0 * rho);
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    return {g * ct + f * st, f * ct - g * st};
}

PhaseShiftSample phase_shift(const PotentialSpec& spec, double energy, double match_radius,
                             const IntegrationParams& params) {
    validate(spec);
    check_energy(energy);
    check_match_radius(spec, match_radius);
    const double k = std::sqrt(2.0 * energy);
    double separation = 0.5 * std::numbers::pi / k;
    const double e[1] = {energy};
    auto [eta, cond] = match_batch(spec, e, match_radius, separation, params).front();
    if (cond < kMinConditioning) {
        separation *= 0.75;
        std::tie(eta, cond) = match_batch(spec, e, match_radius, separation, params).front();
    }
    return make_sample(spec, energy, eta);
}

std::vector<PhaseShiftSample> phase_shift_sweep(const PotentialSpec& spec,
                                                std::span<const double> energies,
                                                double match_radius,
                                                const IntegrationParams& params) {
    validate(spec);
    check_match_radius(spec, match_radius);
    for (double e : energies) {
        check_energy(e);
    }
    std::vector<PhaseShiftSample> out;
    out.reserve(energies.size());
    for (std::size_t first = 0; first < energies.size(); first += kSweepBatch) {
        const auto batch = energies.subspan(first, std::min(kSweepBatch, energies.size() - first));
        const double e_low = *std::min_element(batch.begin(), batch.end());
        const double separation = 0.5 * std::numbers::pi / std::sqrt(2.0 * e_low);
        const auto matched = match_batch(spec, batch, match_radius, separation, params);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if (matched[i].second < kMinConditioning) {
                out.push_back(phase_shift(spec, batch[i], match_radius, params));
            } else {
                out.push_back(make_sample(spec, batch[i], matched[i].first));
            }
        }
    }
    return out;
}

std::vector<PhaseShiftSample> unwrap_phases(std::span<const PhaseShiftSample> samples) {
    std::vector<PhaseShiftSample> out(samples.begin(), samples.end());
    for (std::size_t i = 1; i < out.size(); ++i) {
        const double turns = std::round((out[i - 1].eta - out[i].eta) / std::numbers::pi);
        out[i].eta += turns * std::numbers::pi;
    }
    return out;
}

double breit_wigner_phase(const BreitWignerFit& fit, double energy) {
    const double t = (energy - fit.center) / fit.half_width;
    const auto& b = fit.background;
    return b[0] + t * (b[1] + t * b[2]) + std::atan2(0.5 * fit.width, fit.e_gamma - energy);
}

BreitWignerFit fit_breit_wigner(std::span<const PhaseShiftSample> samples, EnergyInterval window) {
    if (!(window.lo < window.hi) || !std::isfinite(window.lo) || !std::isfinite(window.hi)) {
        throw ParameterError("fit window must satisfy lo < hi");
    }
    std::vector<PhaseShiftSample> inside;
    for (const PhaseShiftSample& s : samples) {
        if (s.energy >= window.lo && s.energy <= window.hi) {
            inside.push_back(s);
        }
    }
    if (inside.size() < 7) {
        throw ParameterError("Breit-Wigner fit needs at least 7 samples in the window, got " +
                             std::to_string(inside.size()));
    }
    const auto n = static_cast<Eigen::Index>(inside.size());
    const double center = 0.5 * (window.lo + window.hi);
    const double half = 0.5 * (window.hi - window.lo);
    Eigen::VectorXd energy(n), t(n), eta(n);
    Eigen::MatrixXd design(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        energy[i] = inside[static_cast<std::size_t>(i)].energy;
        eta[i] = inside[static_cast<std::size_t>(i)].eta;
        t[i] = (energy[i] - center) / half;
        design(i, 0) = 1.0;
        design(i, 1) = t[i];
        design(i, 2) = t[i] * t[i];
    }

    // Coarse search with the background projected out.
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, 3);
    constexpr int kCentres = 81;
    constexpr int kWidths = 61;
    double best_cost = std::numeric_limits<double>::infinity();
    double best_e = center;
    double best_w = half;
    Eigen::VectorXd target(n);
    for (int i = 0; i < kCentres; ++i) {
        const double e_gamma = window.lo + (window.hi - window.lo) * i / (kCentres - 1.0);
        for (int j = 0; j < kWidths; ++j) {
            const double width = 2.0 * half * std::pow(10.0, -4.0 + 4.0 * j / (kWidths - 1.0));
            for (Eigen::Index m = 0; m < n; ++m) {
                target[m] = eta[m] - std::atan2(0.5 * width, e_gamma - energy[m]);
            }
            const double cost = (target - q * (q.transpose() * target)).squaredNorm();
            if (cost < best_cost) {
                best_cost = cost;
                best_e = e_gamma;
                best_w = width;
            }
        }
    }

    for (Eigen::Index m = 0; m < n; ++m) {
        target[m] = eta[m] - std::atan2(0.5 * best_w, best_e - energy[m]);
    }
    const Eigen::Vector3d b0 = qr.solve(target);
    Eigen::VectorXd x(5);
    x << (best_e - center) / half, best_w / half, b0[0], b0[1], b0[2];

    BreitWignerResiduals functor{energy, t, eta, center, half};
    Eigen::LevenbergMarquardt<BreitWignerResiduals> lm(functor);
    lm.setXtol(1e-15);
    lm.setFtol(1e-15);
    lm.setMaxfev(4000);
    const auto status = lm.minimize(x);
    using Status = Eigen::LevenbergMarquardtSpace::Status;
    if (status == Status::ImproperInputParameters || status == Status::TooManyFunctionEvaluation ||
        status == Status::NotStarted || status == Status::Running || status == Status::UserAsked) {
        throw FitError("Breit-Wigner refinement did not converge", best_e, best_w);
    }

    BreitWignerFit fit;
    fit.e_gamma = center + half * x[0];
    fit.width = half * x[1];
    fit.background = {x[2], x[3], x[4]};
    fit.center = center;
    fit.half_width = half;
    if (!std::isfinite(fit.e_gamma) || !std::isfinite(fit.width) || !(fit.width > 0.0)) {
        throw FitError("Breit-Wigner refinement produced a non-positive width", best_e, best_w);
    }
    if (fit.e_gamma < window.lo || fit.e_gamma > window.hi) {
        throw FitError("fitted resonance energy left the window", best_e, best_w);
    }
    if (fit.width > window.hi - window.lo) {
        throw FitError("fitted width exceeds the window; the window is too narrow to separate "
                       "resonance and background",
                       best_e, best_w);
    }
    Eigen::VectorXd resid(n);
    functor(x, resid);
    fit.residual = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
    return fit;
}

} // namespace boxres
