#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "smoothcert/net.hpp"
#include "smoothcert/tensor.hpp"

namespace smoothcert {

struct Classifier {
    FeedForwardNet net;  // conditioning_dim == 0

    int num_classes() const { return int(net.output_dim()); }
};

struct CrossEntropyResult {
    double loss;
    Tensor logit_cotangent;  // softmax(logits) - onehot(y)
};

/// Fused softmax cross-entropy with max-shift stabilization.
inline CrossEntropyResult cross_entropy(const Tensor& logits, int y) {
    if (y < 0 || std::size_t(y) >= logits.size()) {
        throw ShapeError("cross_entropy: label out of range");
    }
    double mx = logits[0];
    for (std::size_t i = 1; i < logits.size(); ++i) mx = std::max(mx, logits[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) sum += std::exp(logits[i] - mx);
    double lse = mx + std::log(sum);
    Tensor cot({logits.size()});
    for (std::size_t i = 0; i < logits.size(); ++i) cot[i] = std::exp(logits[i] - lse);
    cot[std::size_t(y)] -= 1.0;
    return {lse - logits[std::size_t(y)], std::move(cot)};
}

inline Tensor softmax(const Tensor& logits) {
    double mx = logits[0];
    for (std::size_t i = 1; i < logits.size(); ++i) mx = std::max(mx, logits[i]);
    double sum = 0.0;
    Tensor out({logits.size()});
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= sum;
    return out;
}

/// Argmax of the logits; ties break toward the lowest class index.
inline int predict_base(const Classifier& clf, const Tensor& x) {
    auto [logits, tape] = net_forward(clf.net, x);
    int best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i) {
        if (logits[i] > logits[std::size_t(best)]) best = int(i);
    }
    return best;
}

enum class Regime { kClean, kGaussAug, kNtdAug, kAdvEps };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::kClean: return "clean";
        case Regime::kGaussAug: return "gauss_aug";
        case Regime::kNtdAug: return "ntd_aug";
        case Regime::kAdvEps: return "adv_eps";
    }
    return "?";
}

inline constexpr double kUnboundedRadius = std::numeric_limits<double>::infinity();

struct TrainConfig {
    Regime regime = Regime::kClean;
    double sigma = 0.0;   // all regimes except kClean
    double eta = 0.1;     // kAdvEps only
    std::size_t M = 1;    // kAdvEps only
    double r_adv = kUnboundedRadius;  // kAdvEps only
    std::vector<std::size_t> hidden = {128, 64};
    std::size_t epochs = 100;
    std::size_t batch = 16;
    double lr = 1e-3;
    std::uint64_t seed = 1;
};

}  // namespace smoothcert
