#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "smoothcert/adam.hpp"
#include "smoothcert/dataset.hpp"
#include "smoothcert/net.hpp"
#include "smoothcert/rng.hpp"
#include "smoothcert/serialize.hpp"

namespace smoothcert {

/// DDPM beta schedule with the derived alpha-bar products and the equivalent
/// Gaussian noise level sigma_equiv[t] = sqrt((1-abar_t)/abar_t).
/// Timesteps are 1-based; arrays are indexed t-1.
struct DiffusionSchedule {
    std::size_t T = 0;
    double beta_start = 0.0;
    double beta_end = 0.0;
    std::vector<double> beta;
    std::vector<double> alpha_bar;
    std::vector<double> sigma_equiv;
};

inline DiffusionSchedule build_schedule(std::size_t T, double beta_start, double beta_end) {
    if (T < 1 || !(beta_start > 0.0) || !(beta_end >= beta_start) || !(beta_end < 1.0)) {
        throw std::domain_error("build_schedule: need T >= 1 and 0 < beta_start <= beta_end < 1");
    }
    DiffusionSchedule s;
    s.T = T;
    s.beta_start = beta_start;
    s.beta_end = beta_end;
    s.beta.resize(T);
    s.alpha_bar.resize(T);
    s.sigma_equiv.resize(T);
    double prod = 1.0;
    for (std::size_t i = 0; i < T; ++i) {
        s.beta[i] = T == 1 ? beta_start
                           : beta_start + (beta_end - beta_start) * double(i) / double(T - 1);
        prod *= 1.0 - s.beta[i];
        s.alpha_bar[i] = prod;
        s.sigma_equiv[i] = std::sqrt((1.0 - prod) / prod);
    }
    return s;
}

/// x_t = sqrt(abar_t) x0 + sqrt(1-abar_t) eps
inline Tensor forward_noise(const Tensor& x0, std::size_t t, const Tensor& eps,
                            const DiffusionSchedule& s) {
    if (t < 1 || t > s.T) throw std::domain_error("forward_noise: t out of range");
    require_same_shape(x0, eps, "forward_noise");
    double ab = s.alpha_bar[t - 1];
    Tensor out = scale(x0, std::sqrt(ab));
    axpy(std::sqrt(1.0 - ab), eps, out);
    return out;
}

/// Timestep whose equivalent noise level is closest to sigma; ties toward
/// the smaller t.
inline std::size_t select_tstar(double sigma, const DiffusionSchedule& s) {
    std::size_t best = 1;
    double best_gap = std::abs(sigma - s.sigma_equiv[0]);
    for (std::size_t t = 2; t <= s.T; ++t) {
        double gap = std::abs(sigma - s.sigma_equiv[t - 1]);
        if (gap < best_gap) {
            best_gap = gap;
            best = t;
        }
    }
    return best;
}

/// x_{0|t} = (x_t - sqrt(1-abar_t) eps_hat(x_t,t)) / sqrt(abar_t).
/// The output is deliberately unclamped.
template <class NoisePredictor>
Tensor single_shot_denoise(const Tensor& x_t, std::size_t t, NoisePredictor&& predict_noise,
                           const DiffusionSchedule& s) {
    if (t < 1 || t > s.T) throw std::domain_error("single_shot_denoise: t out of range");
    double ab = s.alpha_bar[t - 1];
    Tensor eps_hat = predict_noise(x_t, t);
    require_same_shape(x_t, eps_hat, "single_shot_denoise");
    Tensor out = x_t;
    axpy(-std::sqrt(1.0 - ab), eps_hat, out);
    return scale(out, 1.0 / std::sqrt(ab));
}

/// Noise predictor: a feedforward net conditioned on the 2-vector
/// [t/T, sigma_equiv[t]/sigma_equiv[T]] appended to the input.
struct Denoiser {
    FeedForwardNet net;  // conditioning_dim == 2
    DiffusionSchedule schedule;

    Tensor timestep_embedding(std::size_t t) const {
        return Tensor::vec({double(t) / double(schedule.T),
                            schedule.sigma_equiv[t - 1] / schedule.sigma_equiv[schedule.T - 1]});
    }

    Tensor predict_noise(const Tensor& x_t, std::size_t t) const {
        auto [out, tape] = net_forward(net, x_t, timestep_embedding(t));
        return out;
    }

    Tensor denoise(const Tensor& x_t, std::size_t t) const {
        return single_shot_denoise(
            x_t, t, [this](const Tensor& x, std::size_t tt) { return predict_noise(x, tt); },
            schedule);
    }
};

struct DenoiserTrainConfig {
    std::vector<std::size_t> hidden = {128, 64};
    std::size_t epochs = 100;
    std::size_t batch = 16;
    double lr = 1e-3;
    std::uint64_t seed = 1;
};

struct DenoiserTraining {
    Denoiser denoiser;
    std::vector<double> epoch_loss;  // mean squared-residual norm per epoch
};

namespace rng_ctx {
// Fixed stream contexts so parallel and sequential runs agree.
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kShuffle = 2;
inline constexpr std::uint64_t kDenoiserNoise = 3;
inline constexpr std::uint64_t kTrainNoise = 4;
inline constexpr std::uint64_t kAttackInit = 5;
inline constexpr std::uint64_t kCertify = 6;
}  // namespace rng_ctx

namespace detail {

inline std::vector<std::size_t> shuffled_indices(std::size_t n, const Rng& rng,
                                                 std::uint64_t epoch) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng r = rng.with_context(rng_ctx::kShuffle).with_index(epoch);
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = std::size_t(r.word(i) % i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace detail

/// DDPM training: fresh (t, eps) per example per step, squared-residual loss,
/// Adam updates per minibatch.
inline DenoiserTraining train_denoiser(const LabeledDataset& ds, const DiffusionSchedule& schedule,
                                       const DenoiserTrainConfig& cfg) {
    if (ds.size() == 0) throw std::domain_error("train_denoiser: empty dataset");
    std::size_t d = ds.dim();
    Rng rng{cfg.seed, 0, 0};
    FeedForwardNet net = FeedForwardNet::make(d, 2, cfg.hidden, d);
    net.init_params(rng.with_context(rng_ctx::kInit));
    AdamOptimizer opt(net, AdamConfig{cfg.lr});
    Denoiser den{net, schedule};

    std::vector<double> trace;
    std::uint64_t global_step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto order = detail::shuffled_indices(ds.size(), rng, epoch);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
            std::size_t stop = std::min(start + cfg.batch, order.size());
            auto grads = zero_grads(den.net);
            double inv_batch = 1.0 / double(stop - start);
            for (std::size_t bi = start; bi < stop; ++bi, ++global_step) {
                std::size_t i = order[bi];
                Rng draw = rng.with_context(rng_ctx::kDenoiserNoise).with_index(global_step);
                std::size_t t = 1 + std::size_t(draw.word(~0ULL) % schedule.T);
                Tensor eps({d});
                draw.fill_normal(eps);
                Tensor x_t = forward_noise(ds.inputs[i], t, eps, schedule);
                auto [pred, tape] = net_forward(den.net, x_t, den.timestep_embedding(t));
                Tensor residual = sub(pred, eps);
                double loss = dot(residual, residual);
                if (!std::isfinite(loss)) {
                    throw TrainingError("train_denoiser: non-finite loss", global_step);
                }
                epoch_loss += loss;
                auto back = net_backward(den.net, tape, scale(residual, 2.0 * inv_batch));
                accumulate_grads(grads, back.param_grads);
            }
            opt.step(den.net, grads);
        }
        trace.push_back(epoch_loss / double(ds.size()));
    }
    return {std::move(den), std::move(trace)};
}

/// Schedule sidecar "SCH1": u32 T, f64 beta_start, f64 beta_end.
inline void save_schedule(const DiffusionSchedule& s, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path);
    detail::write_magic(os, "SCH1");
    detail::write_u32(os, static_cast<std::uint32_t>(s.T));
    detail::write_f64(os, s.beta_start);
    detail::write_f64(os, s.beta_end);
}

inline DiffusionSchedule load_schedule(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path);
    detail::check_magic(is, "SCH1", path);
    std::uint32_t T = detail::read_u32(is, "T");
    double bs = detail::read_f64(is, "beta_start");
    double be = detail::read_f64(is, "beta_end");
    return build_schedule(T, bs, be);
}

inline void save_denoiser(const Denoiser& d, const std::string& net_path,
                          const std::string& schedule_path) {
    save_net(d.net, net_path);
    save_schedule(d.schedule, schedule_path);
}

inline Denoiser load_denoiser(const std::string& net_path, const std::string& schedule_path) {
    return Denoiser{load_net(net_path, /*conditioning_dim=*/2), load_schedule(schedule_path)};
}

}  // namespace smoothcert
