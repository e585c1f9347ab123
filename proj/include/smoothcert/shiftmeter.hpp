#pragma once

#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "smoothcert/dataset.hpp"
#include "smoothcert/diffusion.hpp"
#include "smoothcert/rng.hpp"

namespace smoothcert {

struct ShiftPair {
    std::size_t index = 0;
    double l2_delta = 0.0;     // ||delta||_2, the denoiserless input distance
    double l2_denoised = 0.0;  // ||x - x_{0|t*}(delta)||_2
};

struct SigmaShiftBlock {
    double sigma = 0.0;
    std::size_t t_star = 0;
    double mean = 0.0;  // mean denoised distance
    double stddev = 0.0;
    std::size_t count = 0;
    std::vector<ShiftPair> pairs;  // sorted by sample index
};

struct ShiftReport {
    std::vector<SigmaShiftBlock> blocks;  // one per requested sigma
};

/// Measures the single-shot denoiser's covariate shift: for each sigma, draw
/// delta ~ N(0, sigma^2 I), noise via the certification-path formula, denoise,
/// and record both the raw and the denoised l2 distance to the clean sample.
inline ShiftReport shift_study(const LabeledDataset& ds, const Denoiser& den,
                               const std::vector<double>& sigmas, std::size_t n_samples,
                               std::uint64_t seed, std::size_t threads = 1) {
    if (n_samples > ds.size()) throw std::domain_error("shift_study: n_samples > dataset size");
    ShiftReport report;
    for (std::size_t si = 0; si < sigmas.size(); ++si) {
        double sigma = sigmas[si];
        SigmaShiftBlock block;
        block.sigma = sigma;
        block.t_star = select_tstar(sigma, den.schedule);
        block.count = n_samples;
        block.pairs.resize(n_samples);
        double ab = den.schedule.alpha_bar[block.t_star - 1];

        std::size_t n_workers = std::max<std::size_t>(1, std::min(threads, n_samples));
        auto work = [&](std::size_t w) {
            for (std::size_t i = w; i < n_samples; i += n_workers) {
                Rng rng{seed, 0x5417F7 + si, i};
                Tensor delta({ds.dim()});
                for (std::size_t j = 0; j < delta.size(); ++j) {
                    delta[j] = sigma * rng.normal(j);
                }
                Tensor x_t = scale(add(ds.inputs[i], delta), std::sqrt(ab));
                Tensor x0t = den.denoise(x_t, block.t_star);
                block.pairs[i] = {i, l2_norm(delta), l2_distance(ds.inputs[i], x0t)};
            }
        };
        if (n_workers == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work, w);
            for (auto& t : pool) t.join();
        }

        double sum = 0.0, sumsq = 0.0;
        for (const auto& p : block.pairs) {
            sum += p.l2_denoised;
            sumsq += p.l2_denoised * p.l2_denoised;
        }
        block.mean = sum / double(n_samples);
        double var = sumsq / double(n_samples) - block.mean * block.mean;
        block.stddev = std::sqrt(var > 0.0 ? var : 0.0);
        report.blocks.push_back(std::move(block));
    }
    return report;
}

}  // namespace smoothcert
