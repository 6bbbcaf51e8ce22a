#include "dforge/gdsm.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dforge/rng.hpp"

namespace dforge {

NoiseSchedule::NoiseSchedule(double t_data, double t_max)
    : t_data_(t_data), t_max_(t_max) {
    if (!(t_max > t_data)) throw DataError("NoiseSchedule: need t_max > t_data");
}

double NoiseSchedule::tau_max() const {
    const double s_max = sigma(t_max_);
    const double s_data = sigma_data();
    return std::sqrt(s_max * s_max - s_data * s_data);
}

IdentitySchedule::IdentitySchedule(double sigma_data, double t_max)
    : NoiseSchedule(sigma_data, t_max) {
    if (sigma_data <= 0) throw DataError("IdentitySchedule: sigma_data must be > 0");
}

CosineSchedule::CosineSchedule(double sigma_data, double sigma_max, double t_max)
    : NoiseSchedule(0.0, t_max), sigma_max_(sigma_max) {
    if (sigma_max <= 0) throw DataError("CosineSchedule: sigma_max must be > 0");
    if (sigma_data <= 0 || sigma_data >= sigma_max)
        throw DataError("CosineSchedule: need 0 < sigma_data < sigma_max");
    t_data_ = sigma_inverse(sigma_data);
}

double CosineSchedule::sigma(double t) const {
    return sigma_max_ * (1.0 - std::cos(std::numbers::pi * t / (2.0 * t_max_)));
}

double CosineSchedule::sigma_inverse(double s) const {
    if (s < 0 || s > sigma_max_ * 2.0)
        throw DataError("CosineSchedule: value outside schedule range");
    const double x = 1.0 - s / sigma_max_;
    return 2.0 * t_max_ / std::numbers::pi * std::acos(std::clamp(x, -1.0, 1.0));
}

GdsmCoeffs coeffs(double t, const NoiseSchedule& schedule, double sigma_target) {
    const double s_t = schedule.sigma(t);
    const double s_data = schedule.sigma_data();
    const double denom = s_t * s_t - sigma_target * sigma_target;
    if (denom <= 0)
        throw DataError("gdsm coeffs: need sigma_target < sigma(t)");
    return {(s_t * s_t - s_data * s_data) / denom,
            (s_data * s_data - sigma_target * sigma_target) / denom};
}

GdsmCoeffs reparam_coeffs(double tau, double sigma_data, double sigma_target) {
    const double denom =
        tau * tau + sigma_data * sigma_data - sigma_target * sigma_target;
    if (denom <= 0)
        throw DataError("gdsm reparam coeffs: non-positive denominator");
    return {tau * tau / denom,
            (sigma_data * sigma_data - sigma_target * sigma_target) / denom};
}

double recover_t(double tau, const NoiseSchedule& schedule) {
    const double hi = schedule.tau_max();
    if (tau < 0 || tau > hi * (1.0 + 1e-12))
        throw DataError("recover_t: tau outside (0, tau_max]");
    const double s_data = schedule.sigma_data();
    return schedule.sigma_inverse(std::sqrt(tau * tau + s_data * s_data));
}

ForwardSample forward_corrupt(const ImageF& x_data, double tau,
                              const NoiseSchedule& schedule, std::uint64_t seed) {
    if (tau < 0) throw DataError("forward_corrupt: tau must be >= 0");
    CounterRng rng(seed);
    ForwardSample out;
    out.tau = tau;
    out.t = recover_t(tau, schedule);
    out.x_t = ImageF(x_data.height, x_data.width, x_data.channels);
    for (std::size_t i = 0; i < x_data.data.size(); ++i)
        out.x_t.data[i] = x_data.data[i] + tau * rng.normal(i);
    return out;
}

double gdsm_loss(const TimeDenoiserFn& h, const std::vector<ImageF>& batch,
                 const NoiseSchedule& schedule, double sigma_target,
                 int draws_per_image, std::uint64_t seed,
                 const TauSampler& tau_sampler) {
    if (batch.empty()) throw DataError("gdsm_loss: empty batch");
    if (draws_per_image < 1) throw DataError("gdsm_loss: draws_per_image must be >= 1");

    const double tau_hi = schedule.tau_max();
    const double s_data = schedule.sigma_data();
    auto sample_tau = tau_sampler
                          ? tau_sampler
                          : TauSampler([tau_hi](double u) { return u * tau_hi; });

    CounterRng tau_rng(seed);
    double acc = 0.0;
    std::uint64_t draw_index = 0;
    for (const ImageF& x_data : batch) {
        for (int d = 0; d < draws_per_image; ++d, ++draw_index) {
            const double tau = sample_tau(tau_rng.next_uniform());
            const ForwardSample fs =
                forward_corrupt(x_data, tau, schedule, seed ^ (0x9E3779B9ull + draw_index));
            const GdsmCoeffs cf = reparam_coeffs(tau, s_data, sigma_target);

            const ImageF est = h(fs.x_t, fs.t);
            if (!est.same_shape(x_data))
                throw DataError("gdsm_loss: denoiser changed shape");
            double se = 0.0;
            for (std::size_t i = 0; i < x_data.data.size(); ++i) {
                const double r = cf.gamma * est.data[i] + cf.delta * fs.x_t.data[i] -
                                 x_data.data[i];
                if (!std::isfinite(r)) throw DataError("gdsm_loss: non-finite estimate");
                se += r * r;
            }
            acc += se / static_cast<double>(x_data.data.size());
        }
    }
    return acc / static_cast<double>(batch.size() * draws_per_image);
}

AffineFit fit_affine_minimizer(double sigma0, double sigma_data, double sigma_t,
                               std::int64_t n_samples, std::uint64_t seed) {
    if (n_samples < 100000)
        throw DataError("fit_affine_minimizer: need at least 1e5 samples");
    if (sigma_t <= sigma_data || sigma_t <= 0)
        throw DataError("fit_affine_minimizer: need sigma_t > sigma_data >= 0");

    // Objective at fixed t, sigma_target = 0:
    //   E (gamma*h(X_t) + delta*X_t - X_data)^2,  h(x) = alpha*x + beta.
    // Substituting u = gamma*alpha, v = gamma*beta reduces it to the least
    // squares of (X_data - delta*X_t) on X_t.
    const double st2 = sigma_t * sigma_t;
    const double sd2 = sigma_data * sigma_data;
    const double gamma = (st2 - sd2) / st2;
    const double delta = sd2 / st2;

    CounterRng rng(seed);
    double sx = 0, sxx = 0, sy = 0, sxy = 0;
    const double extra = std::sqrt(st2 - sd2);
    for (std::int64_t i = 0; i < n_samples; ++i) {
        const double x0 = sigma0 * rng.normal(3 * static_cast<std::uint64_t>(i));
        const double xd = x0 + sigma_data * rng.normal(3 * static_cast<std::uint64_t>(i) + 1);
        const double xt = xd + extra * rng.normal(3 * static_cast<std::uint64_t>(i) + 2);
        const double y = xd - delta * xt;
        sx += xt;
        sxx += xt * xt;
        sy += y;
        sxy += xt * y;
    }
    const double n = static_cast<double>(n_samples);
    const double var_x = sxx / n - (sx / n) * (sx / n);
    if (var_x <= 0) throw DataError("fit_affine_minimizer: degenerate variance");
    const double cov_xy = sxy / n - (sx / n) * (sy / n);
    const double u = cov_xy / var_x;
    const double v = sy / n - u * (sx / n);
    return {u / gamma, v / gamma};
}

// ---------------------------------------------------------------------------
// Self-check suite

GdsmCheckHooks::GdsmCheckHooks()
    : reparam([](double tau, double s_data, double s_target) {
          return reparam_coeffs(tau, s_data, s_target);
      }) {}

namespace {

ImageF scalar_image(double v) { return ImageF(1, 1, 1, v); }

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

CheckResult check_coefficient_identities() {
    CounterRng rng(101);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double s_data = 0.05 + 0.5 * rng.next_uniform();
        const double s_t = s_data + 0.01 + 2.0 * rng.next_uniform();
        const double s_target = s_data * rng.next_uniform();  // < s_data < s_t
        IdentitySchedule sched(s_data, s_t + 1.0);
        const GdsmCoeffs c = coeffs(s_t, sched, s_target);
        worst = std::max(worst, std::fabs(c.gamma + c.delta - 1.0));
        const double tau = std::sqrt(s_t * s_t - s_data * s_data);
        const GdsmCoeffs cr = reparam_coeffs(tau, s_data, s_target);
        worst = std::max(worst, std::fabs(cr.gamma + cr.delta - 1.0));
    }
    return {"coefficient identities", worst <= 1e-12,
            "max |gamma+delta-1| = " + format_double(worst) + " over 10^4 draws"};
}

CheckResult check_reparam_consistency(const GdsmCheckHooks& hooks) {
    CounterRng rng(202);
    double worst = 0.0;
    for (int i = 0; i < 5000; ++i) {
        const double s_data = 0.05 + 0.5 * rng.next_uniform();
        const double t_max = s_data * (2.0 + 8.0 * rng.next_uniform());
        const double s_target = s_data * rng.next_uniform();
        IdentitySchedule ident(s_data, t_max);
        CosineSchedule cosine(s_data, 1.5 * ident.sigma(t_max), t_max);
        for (const NoiseSchedule* sched :
             {static_cast<const NoiseSchedule*>(&ident),
              static_cast<const NoiseSchedule*>(&cosine)}) {
            const double tau = sched->tau_max() * std::max(rng.next_uniform(), 1e-6);
            const GdsmCoeffs via_t = coeffs(recover_t(tau, *sched), *sched, s_target);
            const GdsmCoeffs direct = hooks.reparam(tau, s_data, s_target);
            worst = std::max({worst, std::fabs(via_t.gamma - direct.gamma),
                              std::fabs(via_t.delta - direct.delta)});
        }
    }
    return {"reparam consistency", worst <= 1e-10,
            "max coefficient gap = " + format_double(worst) +
                " over identity+cosine schedules"};
}

CheckResult check_minimizer_oracle() {
    const AffineFit fit = fit_affine_minimizer(1.0, 0.2, 0.5, 1000000, 42);
    const double analytic = 1.0 / (1.0 + 0.25);  // sigma0^2/(sigma0^2+sigma_t^2)
    const bool ok = std::fabs(fit.slope - analytic) <= 0.02 &&
                    std::fabs(fit.intercept) <= 0.02;
    return {"minimizer oracle", ok,
            "slope " + format_double(fit.slope) + " vs analytic " +
                format_double(analytic) + ", intercept " +
                format_double(fit.intercept)};
}

CheckResult check_perfect_oracle_zero() {
    IdentitySchedule sched(0.2, 2.0);
    const double s_data = sched.sigma_data();
    // Residual-cancelling h knows its x_data; the loss must vanish identically.
    double worst = 0.0;
    std::size_t b = 0;
    for (double xd : {0.3, -0.1, 0.7}) {
        TimeDenoiserFn h = [&sched, s_data, xd](const ImageF& x_t, double t) {
            const double tau2 = sched.sigma(t) * sched.sigma(t) - s_data * s_data;
            const GdsmCoeffs c =
                reparam_coeffs(std::sqrt(std::max(tau2, 0.0)), s_data, 0.0);
            ImageF out(1, 1, 1);
            out.data[0] = xd / c.gamma - (c.delta / c.gamma) * x_t.data[0];
            return out;
        };
        worst = std::max(worst, gdsm_loss(h, {scalar_image(xd)}, sched, 0.0, 16, 7 + b));
        ++b;
    }
    return {"perfect-oracle loss", worst <= 1e-18,
            "max loss " + format_double(worst) + " (exact cancellation)"};
}

CheckResult check_posterior_mean_optimality() {
    const double sigma0 = 1.0, s_data = 0.2;
    IdentitySchedule sched(s_data, 10.0 * s_data);
    CounterRng data_rng(11);
    std::vector<ImageF> batch;
    for (int i = 0; i < 512; ++i) {
        const double x0 = sigma0 * data_rng.next_normal();
        batch.push_back(scalar_image(x0 + s_data * data_rng.next_normal()));
    }
    TimeDenoiserFn posterior = [&](const ImageF& x_t, double t) {
        const double st2 = sched.sigma(t) * sched.sigma(t);
        ImageF out(1, 1, 1);
        out.data[0] = sigma0 * sigma0 / (sigma0 * sigma0 + st2) * x_t.data[0];
        return out;
    };
    const double base = gdsm_loss(posterior, batch, sched, 0.0, 64, 99);
    CounterRng pert_rng(12);
    int wins = 0;
    for (int k = 0; k < 10; ++k) {
        // affine perturbation of fixed magnitude 0.1, random direction
        const double theta = 2.0 * std::numbers::pi * pert_rng.next_uniform();
        const double a = 0.1 * std::cos(theta);
        const double b = 0.1 * std::sin(theta);
        TimeDenoiserFn perturbed = [&, a, b](const ImageF& x_t, double t) {
            ImageF out = posterior(x_t, t);
            out.data[0] += a + b * x_t.data[0];
            return out;
        };
        if (gdsm_loss(perturbed, batch, sched, 0.0, 64, 99) > base) ++wins;
    }
    return {"posterior-mean optimality", wins == 10,
            "posterior mean beat " + std::to_string(wins) + "/10 perturbations"};
}

CheckResult check_supervised_phase_optimum() {
    // Second training phase: plain MSE of h(x_data, t_data) against the clean
    // signal. On the Gaussian toy the optimum slope is s0^2/(s0^2+s_data^2).
    const double sigma0 = 1.0, s_data = 0.2;
    CounterRng rng(21);
    std::vector<std::pair<double, double>> pairs;  // (x_data, x0)
    for (int i = 0; i < 20000; ++i) {
        const double x0 = sigma0 * rng.next_normal();
        pairs.emplace_back(x0 + s_data * rng.next_normal(), x0);
    }
    auto mse_of_slope = [&](double slope) {
        double s = 0.0;
        for (const auto& [xd, x0] : pairs) {
            const double r = slope * xd - x0;
            s += r * r;
        }
        return s / static_cast<double>(pairs.size());
    };
    const double analytic = sigma0 * sigma0 / (sigma0 * sigma0 + s_data * s_data);
    const double base = mse_of_slope(analytic);
    const bool ok = mse_of_slope(analytic + 0.05) > base &&
                    mse_of_slope(analytic - 0.05) > base;
    return {"supervised phase optimum", ok,
            "analytic slope " + format_double(analytic) + " is a local minimum"};
}

}  // namespace

std::vector<CheckResult> run_gdsm_checks(const GdsmCheckHooks& hooks) {
    return {
        check_coefficient_identities(),
        check_reparam_consistency(hooks),
        check_minimizer_oracle(),
        check_perfect_oracle_zero(),
        check_posterior_mean_optimality(),
        check_supervised_phase_optimum(),
    };
}

}  // namespace dforge
