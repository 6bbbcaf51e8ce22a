#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dforge/image.hpp"

namespace dforge {

// Generalized denoising score matching: learn a denoiser from noisy data by
// corrupting it further and regressing back with closed-form coefficients.
// sigma(t) is the corruption schedule; the observed data sits at t_data with
// sigma(t_data) = sigma_data.

class NoiseSchedule {
public:
    virtual ~NoiseSchedule() = default;

    virtual double sigma(double t) const = 0;
    virtual double sigma_inverse(double s) const = 0;
    virtual std::string name() const = 0;

    double t_data() const { return t_data_; }
    double t_max() const { return t_max_; }
    double sigma_data() const { return sigma(t_data_); }
    // Range of the added-noise std under the tau change of variables:
    // tau_max = sqrt(sigma(T)^2 - sigma_data^2).
    double tau_max() const;

protected:
    NoiseSchedule(double t_data, double t_max);
    double t_data_;
    double t_max_;
};

// sigma(t) = t. The default; t_max conventionally 10 * sigma_data.
class IdentitySchedule final : public NoiseSchedule {
public:
    IdentitySchedule(double sigma_data, double t_max);
    double sigma(double t) const override { return t; }
    double sigma_inverse(double s) const override { return s; }
    std::string name() const override { return "identity"; }
};

// sigma(t) = sigma_max * (1 - cos(pi*t / (2*t_max))), a slow-start alternative.
class CosineSchedule final : public NoiseSchedule {
public:
    CosineSchedule(double sigma_data, double sigma_max, double t_max);
    double sigma(double t) const override;
    double sigma_inverse(double s) const override;
    std::string name() const override { return "cosine"; }

private:
    double sigma_max_;
};

struct GdsmCoeffs {
    double gamma = 0.0;
    double delta = 0.0;
};

// gamma = (s_t^2 - s_data^2) / (s_t^2 - s_target^2),
// delta = (s_data^2 - s_target^2) / (s_t^2 - s_target^2); gamma + delta = 1.
GdsmCoeffs coeffs(double t, const NoiseSchedule& schedule, double sigma_target);

// tau parameterization with sigma_tau = tau (the added-noise std):
// gamma' = tau^2 / (tau^2 + s_data^2 - s_target^2),
// delta' = (s_data^2 - s_target^2) / (tau^2 + s_data^2 - s_target^2).
GdsmCoeffs reparam_coeffs(double tau, double sigma_data, double sigma_target);

// t = sigma^-1(sqrt(tau^2 + sigma_data^2)); tau must lie in (0, tau_max].
double recover_t(double tau, const NoiseSchedule& schedule);

struct ForwardSample {
    ImageF x_t;
    double t = 0.0;
    double tau = 0.0;
};

// x_t = x_data + tau * Z with seeded standard normal Z.
ForwardSample forward_corrupt(const ImageF& x_data, double tau,
                              const NoiseSchedule& schedule, std::uint64_t seed);

// Abstract denoiser h(x_t, t) -> estimate; analytic toys or wrapped models.
using TimeDenoiserFn = std::function<ImageF(const ImageF&, double)>;

// tau |-> tau given a uniform draw u in (0,1]; default is uniform on (0, tau_max].
using TauSampler = std::function<double(double)>;

// Monte-Carlo estimate of E || gamma'*h(x_t,t) + delta'*x_t - x_data ||^2 with
// the norm averaged per sample. draws_per_image corruptions per batch element.
double gdsm_loss(const TimeDenoiserFn& h, const std::vector<ImageF>& batch,
                 const NoiseSchedule& schedule, double sigma_target,
                 int draws_per_image, std::uint64_t seed,
                 const TauSampler& tau_sampler = {});

struct AffineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Brute-force oracle for the minimizer of the fixed-t objective at
// sigma_target = 0 on the scalar Gaussian toy X0 ~ N(0, sigma0^2):
// simulates the chain X0 -> X_data -> X_t and least-squares fits the affine h.
// The analytic answer is the posterior-mean slope sigma0^2/(sigma0^2+sigma_t^2)
// and intercept 0, independent of sigma_data.
AffineFit fit_affine_minimizer(double sigma0, double sigma_data, double sigma_t,
                               std::int64_t n_samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Self-check suite (the `gdsm-check` CLI surface).

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Hooks exist so the suite can be pointed at deliberately wrong formulas in
// negative-control tests; defaults are the real implementations.
struct GdsmCheckHooks {
    std::function<GdsmCoeffs(double, double, double)> reparam;  // (tau, s_data, s_target)
    GdsmCheckHooks();
};

std::vector<CheckResult> run_gdsm_checks(const GdsmCheckHooks& hooks = GdsmCheckHooks());

}  // namespace dforge
