#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "smoothcert/classifier.hpp"
#include "smoothcert/dataset.hpp"
#include "smoothcert/diffusion.hpp"
#include "smoothcert/rng.hpp"
#include "smoothcert/stats.hpp"

namespace smoothcert {

/// Noise -> (optional single-shot denoise) -> base classifier.
struct SmoothedPipeline {
    Classifier classifier;
    std::optional<Denoiser> denoiser;
    double sigma = 0.5;
    std::size_t t_star = 0;  // derived once when a denoiser is present

    static SmoothedPipeline make(Classifier clf, std::optional<Denoiser> den, double sigma) {
        if (!(sigma > 0.0)) throw std::domain_error("SmoothedPipeline: sigma must be > 0");
        SmoothedPipeline p{std::move(clf), std::move(den), sigma, 0};
        if (p.denoiser) p.t_star = select_tstar(sigma, p.denoiser->schedule);
        return p;
    }

    /// Classify one noisy realization x + delta. With a denoiser the
    /// certification-path formula x_{t*} = sqrt(abar_{t*}) (x + delta) feeds
    /// the single-shot denoiser.
    int classify_noisy(const Tensor& x, const Tensor& delta) const {
        Tensor noisy = add(x, delta);
        if (!denoiser) return predict_base(classifier, noisy);
        double ab = denoiser->schedule.alpha_bar[t_star - 1];
        Tensor x_t = scale(noisy, std::sqrt(ab));
        return predict_base(classifier, denoiser->denoise(x_t, t_star));
    }
};

struct CertifyParams {
    std::size_t n0 = 100;
    std::size_t n = 10000;
    double alpha = 0.001;
    std::uint64_t seed = 1;
};

inline constexpr int kAbstain = -1;

struct CertificationRecord {
    std::size_t index = 0;
    int label = 0;
    int prediction = kAbstain;
    double radius = 0.0;
    double seconds = 0.0;

    bool abstained() const { return prediction == kAbstain; }
    bool correct() const { return prediction == label; }
};

/// Class counts over `count` noisy draws. Draw i uses rng stream index
/// draw_base + i, so counts are identical for any thread partition.
inline std::vector<std::size_t> sample_under_noise(const SmoothedPipeline& pipeline,
                                                   const Tensor& x, std::size_t count,
                                                   const Rng& rng, std::uint64_t draw_base = 0,
                                                   std::size_t threads = 1) {
    if (count < 1) throw std::domain_error("sample_under_noise: count must be >= 1");
    std::size_t C = std::size_t(pipeline.classifier.num_classes());
    std::size_t n_workers = std::max<std::size_t>(1, std::min(threads, count));
    std::vector<std::vector<std::size_t>> partial(n_workers, std::vector<std::size_t>(C, 0));

    auto work = [&](std::size_t w) {
        Tensor delta({x.size()});
        for (std::size_t i = w; i < count; i += n_workers) {
            Rng draw = rng.with_index(draw_base + i);
            for (std::size_t j = 0; j < delta.size(); ++j) {
                delta[j] = pipeline.sigma * draw.normal(j);
            }
            partial[w][std::size_t(pipeline.classify_noisy(x, delta))] += 1;
        }
    };
    if (n_workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    std::vector<std::size_t> counts(C, 0);
    for (const auto& p : partial) {
        for (std::size_t c = 0; c < C; ++c) counts[c] += p[c];
    }
    return counts;
}

namespace detail {

inline std::size_t argmax_count(const std::vector<std::size_t>& counts) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[best]) best = c;
    }
    return best;
}

}  // namespace detail

/// Majority vote with an exact two-sided binomial test on the top two counts;
/// abstains unless the p-value clears alpha.
inline int predict_smoothed(const SmoothedPipeline& pipeline, const Tensor& x,
                            const CertifyParams& params, const Rng& rng,
                            std::size_t threads = 1) {
    auto counts = sample_under_noise(pipeline, x, params.n, rng, 0, threads);
    std::size_t top = detail::argmax_count(counts);
    std::size_t second = top == 0 ? 1 : 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (c != top && counts[c] > counts[second]) second = c;
    }
    std::size_t na = counts[top], nb = counts[second];
    if (na == nb) return kAbstain;
    double p = binom_two_sided_pvalue(na, na + nb);
    return p <= params.alpha ? int(top) : kAbstain;
}

struct CertifyOutcome {
    int prediction = kAbstain;
    double radius = 0.0;
};

/// Cohen-style CERTIFY: n0-draw guess, n fresh estimation draws, one-sided
/// Clopper-Pearson lower bound, radius sigma * quantile(p_lower). The guess
/// draws are discarded, never pooled into the estimate.
inline CertifyOutcome certify(const SmoothedPipeline& pipeline, const Tensor& x,
                              const CertifyParams& params, const Rng& rng,
                              std::size_t threads = 1) {
    if (params.n0 < 1 || params.n < params.n0) {
        throw std::domain_error("certify: need n0 >= 1 and n >= n0");
    }
    auto guess_counts = sample_under_noise(pipeline, x, params.n0, rng, 0, threads);
    std::size_t c_hat = detail::argmax_count(guess_counts);
    auto counts = sample_under_noise(pipeline, x, params.n, rng, params.n0, threads);
    double p_lower = clopper_pearson_lower(counts[c_hat], params.n, params.alpha);
    if (p_lower <= 0.5) return {kAbstain, 0.0};
    return {int(c_hat), pipeline.sigma * std_normal_quantile(p_lower)};
}

/// Two-sided certified radius (sigma/2)(quantile(p_a) - quantile(p_b)).
inline double certified_radius_theorem(double p_a, double p_b, double sigma) {
    if (!(p_a > p_b)) throw std::domain_error("certified_radius_theorem: need p_a > p_b");
    return 0.5 * sigma * (std_normal_quantile(p_a) - std_normal_quantile(p_b));
}

struct CertificationReport {
    std::vector<CertificationRecord> records;
    double acr = 0.0;
    std::vector<double> radii;
    std::vector<double> certified_accuracy;  // fraction correct with radius > r
};

inline std::vector<double> default_radius_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 12; ++i) g.push_back(0.25 * i);
    return g;
}

/// Runs CERTIFY over a dataset. Sample i uses rng context = sample index, so
/// the report is identical for any thread count.
inline CertificationReport evaluate_certification(const SmoothedPipeline& pipeline,
                                                  const LabeledDataset& ds,
                                                  const CertifyParams& params,
                                                  std::vector<double> radii = default_radius_grid(),
                                                  std::size_t threads = 1,
                                                  std::size_t max_samples = 0) {
    if (ds.size() == 0) throw std::domain_error("evaluate_certification: empty dataset");
    std::size_t n_samples = max_samples == 0 ? ds.size() : std::min(max_samples, ds.size());

    CertificationReport report;
    report.radii = std::move(radii);
    report.records.resize(n_samples);

    std::size_t n_workers = std::max<std::size_t>(1, std::min(threads, n_samples));
    auto work = [&](std::size_t w) {
        for (std::size_t i = w; i < n_samples; i += n_workers) {
            auto t0 = std::chrono::steady_clock::now();
            Rng rng{params.seed, rng_ctx::kCertify + (i << 8), 0};
            auto outcome = certify(pipeline, ds.inputs[i], params, rng, 1);
            auto t1 = std::chrono::steady_clock::now();
            report.records[i] = {i, ds.labels[i], outcome.prediction, outcome.radius,
                                 std::chrono::duration<double>(t1 - t0).count()};
        }
    };
    if (n_workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    double acr = 0.0;
    report.certified_accuracy.assign(report.radii.size(), 0.0);
    for (const auto& rec : report.records) {
        if (rec.abstained() || !rec.correct()) continue;
        acr += rec.radius;
        for (std::size_t k = 0; k < report.radii.size(); ++k) {
            if (rec.radius > report.radii[k]) report.certified_accuracy[k] += 1.0;
        }
    }
    report.acr = acr / double(n_samples);
    for (auto& v : report.certified_accuracy) v /= double(n_samples);
    return report;
}

}  // namespace smoothcert
