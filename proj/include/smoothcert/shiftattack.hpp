#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "smoothcert/classifier.hpp"
#include "smoothcert/diffusion.hpp"
#include "smoothcert/rng.hpp"

namespace smoothcert {

struct AttackParams {
    double sigma = 0.5;
    double eta = 0.1;
    std::size_t M = 1;
    double r_adv = kUnboundedRadius;  // per-coordinate clamp radius
    std::uint64_t seed = 1;
};

struct AttackResult {
    Tensor x_adv;       // x_{0|t*} built from the final eps
    Tensor eps_final;   // eps_M
    std::vector<double> loss_trace;  // loss at eps_0 .. eps_M (M+1 entries)
};

namespace detail {

struct ShiftEval {
    Tensor x0t;
    double loss;
    Tensor eps_grad;  // d loss / d eps, empty unless requested
};

/// Noise -> single-shot denoise -> classifier loss, with the full chain rule
/// back to eps:
///   x_t   = sqrt(ab) x + sqrt(1-ab) eps
///   x0t   = (x_t - sqrt(1-ab) eps_hat(x_t)) / sqrt(ab)
///   dL/dx_t = (1/sqrt(ab)) dL/dx0t - (sqrt(1-ab)/sqrt(ab)) J_eps_hat^T dL/dx0t
///   dL/deps = sqrt(1-ab) dL/dx_t
inline ShiftEval eval_shift_loss(const Tensor& x, int y, const Classifier& clf,
                                 const Denoiser& den, std::size_t t_star, const Tensor& eps,
                                 bool want_grad) {
    const DiffusionSchedule& s = den.schedule;
    double ab = s.alpha_bar[t_star - 1];
    double root_ab = std::sqrt(ab);
    double root_1mab = std::sqrt(1.0 - ab);

    Tensor x_t = forward_noise(x, t_star, eps, s);
    auto [eps_hat, den_tape] = net_forward(den.net, x_t, den.timestep_embedding(t_star));
    Tensor x0t = x_t;
    axpy(-root_1mab, eps_hat, x0t);
    x0t = scale(x0t, 1.0 / root_ab);

    auto [logits, clf_tape] = net_forward(clf.net, x0t);
    auto ce = cross_entropy(logits, y);

    ShiftEval out{std::move(x0t), ce.loss, Tensor()};
    if (!want_grad) return out;

    Tensor g_x0t = net_backward(clf.net, clf_tape, ce.logit_cotangent).input_grad;
    Tensor g_xt = scale(g_x0t, 1.0 / root_ab);
    Tensor den_cot = scale(g_x0t, -root_1mab / root_ab);
    Tensor through_denoiser = net_backward(den.net, den_tape, den_cot).input_grad;
    axpy(1.0, through_denoiser, g_xt);
    out.eps_grad = scale(g_xt, root_1mab);
    return out;
}

}  // namespace detail

/// Sign-gradient ascent on the diffusion noise, projected per coordinate into
/// [eps_0 - r_adv, eps_0 + r_adv]. Returns the denoised sample at eps_M, the
/// final eps, and the loss at every iterate including eps_0. sign(0) = 0.
inline AttackResult find_extreme_shift(const Tensor& x, int y, const Classifier& clf,
                                       const Denoiser& den, const AttackParams& params,
                                       const Rng& eps_rng) {
    std::size_t t_star = select_tstar(params.sigma, den.schedule);
    Tensor eps0 = eps_rng.gaussian({x.size()});
    Tensor eps = eps0;

    std::vector<double> trace;
    for (std::size_t m = 1; m <= params.M; ++m) {
        auto ev = detail::eval_shift_loss(x, y, clf, den, t_star, eps, /*want_grad=*/true);
        if (!std::isfinite(ev.loss)) throw AttackError("find_extreme_shift: non-finite loss", m);
        trace.push_back(ev.loss);
        for (std::size_t i = 0; i < eps.size(); ++i) {
            double g = ev.eps_grad[i];
            double step = g > 0.0 ? params.eta : g < 0.0 ? -params.eta : 0.0;
            double drift = eps[i] + step - eps0[i];
            if (std::isfinite(params.r_adv)) {
                drift = std::clamp(drift, -params.r_adv, params.r_adv);
            }
            eps[i] = eps0[i] + drift;
        }
    }
    auto final_ev = detail::eval_shift_loss(x, y, clf, den, t_star, eps, /*want_grad=*/false);
    if (!std::isfinite(final_ev.loss)) {
        throw AttackError("find_extreme_shift: non-finite loss", params.M + 1);
    }
    trace.push_back(final_ev.loss);
    return {std::move(final_ev.x0t), std::move(eps), std::move(trace)};
}

inline AttackResult find_extreme_shift(const Tensor& x, int y, const Classifier& clf,
                                       const Denoiser& den, const AttackParams& params) {
    return find_extreme_shift(x, y, clf, den, params,
                              Rng{params.seed, rng_ctx::kAttackInit, 0});
}

}  // namespace smoothcert
