#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "smoothcert/adam.hpp"
#include "smoothcert/classifier.hpp"
#include "smoothcert/dataset.hpp"
#include "smoothcert/shiftattack.hpp"

namespace smoothcert {

struct ClassifierTraining {
    Classifier classifier;
    std::vector<double> epoch_loss;
};

/// Trains under one of four regimes:
///   kClean    - raw inputs
///   kGaussAug - x + delta, delta ~ N(0, sigma^2 I)
///   kNtdAug   - noised by the training-path formula, single-shot denoised
///   kAdvEps   - extreme-shift samples from the sign-gradient noise attack
/// kNtdAug is the eta=0 degenerate case of kAdvEps and shares its code path,
/// so the two produce bitwise identical trajectories under shared seeds.
inline ClassifierTraining train_classifier(const LabeledDataset& ds, const TrainConfig& cfg,
                                           const Denoiser* denoiser = nullptr,
                                           const FeedForwardNet* init = nullptr) {
    if (ds.size() == 0) throw std::domain_error("train_classifier: empty dataset");
    bool needs_denoiser = cfg.regime == Regime::kNtdAug || cfg.regime == Regime::kAdvEps;
    if (needs_denoiser && denoiser == nullptr) {
        throw std::invalid_argument("train_classifier: regime requires a denoiser and schedule");
    }
    std::size_t d = ds.dim();
    Rng rng{cfg.seed, 0, 0};
    Classifier clf;
    if (init != nullptr) {
        clf.net = *init;
    } else {
        clf.net = FeedForwardNet::make(d, 0, cfg.hidden, std::size_t(ds.num_classes));
        clf.net.init_params(rng.with_context(rng_ctx::kInit));
    }
    AdamOptimizer opt(clf.net, AdamConfig{cfg.lr});

    AttackParams attack;
    attack.sigma = cfg.sigma;
    attack.eta = cfg.regime == Regime::kAdvEps ? cfg.eta : 0.0;
    attack.M = cfg.regime == Regime::kAdvEps ? cfg.M : 1;
    attack.r_adv = cfg.regime == Regime::kAdvEps ? cfg.r_adv : kUnboundedRadius;

    std::vector<double> trace;
    std::uint64_t global_step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto order = detail::shuffled_indices(ds.size(), rng, epoch);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
            std::size_t stop = std::min(start + cfg.batch, order.size());
            auto grads = zero_grads(clf.net);
            double inv_batch = 1.0 / double(stop - start);
            for (std::size_t bi = start; bi < stop; ++bi, ++global_step) {
                std::size_t i = order[bi];
                Rng draw = rng.with_context(rng_ctx::kTrainNoise).with_index(global_step);
                Tensor x_train;
                switch (cfg.regime) {
                    case Regime::kClean:
                        x_train = ds.inputs[i];
                        break;
                    case Regime::kGaussAug: {
                        x_train = ds.inputs[i];
                        for (std::size_t j = 0; j < d; ++j) {
                            x_train[j] += cfg.sigma * draw.normal(j);
                        }
                        break;
                    }
                    case Regime::kNtdAug:
                    case Regime::kAdvEps:
                        x_train = find_extreme_shift(ds.inputs[i], ds.labels[i], clf, *denoiser,
                                                     attack, draw)
                                      .x_adv;
                        break;
                }
                auto [logits, tape] = net_forward(clf.net, x_train);
                auto ce = cross_entropy(logits, ds.labels[i]);
                if (!std::isfinite(ce.loss)) {
                    throw TrainingError("train_classifier: non-finite loss", global_step);
                }
                epoch_loss += ce.loss;
                auto back = net_backward(clf.net, tape, scale(ce.logit_cotangent, inv_batch));
                accumulate_grads(grads, back.param_grads);
            }
            opt.step(clf.net, grads);
        }
        trace.push_back(epoch_loss / double(ds.size()));
    }
    return {std::move(clf), std::move(trace)};
}

inline double train_accuracy(const Classifier& clf, const LabeledDataset& ds) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (predict_base(clf, ds.inputs[i]) == ds.labels[i]) ++hit;
    }
    return ds.size() == 0 ? 0.0 : double(hit) / double(ds.size());
}

}  // namespace smoothcert
