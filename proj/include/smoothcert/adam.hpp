#pragma once

#include <cmath>
#include <vector>

#include "smoothcert/net.hpp"
#include "smoothcert/tensor.hpp"

namespace smoothcert {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_hat = 1e-8;
};

/// One bias-corrected Adam update on a single tensor. step_index starts at 1.
inline void adam_step(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v,
                      const AdamConfig& cfg, long step_index) {
    require_same_shape(param, grad, "adam_step");
    require_same_shape(param, m, "adam_step");
    require_same_shape(param, v, "adam_step");
    double bc1 = 1.0 - std::pow(cfg.beta1, double(step_index));
    double bc2 = 1.0 - std::pow(cfg.beta2, double(step_index));
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        double m_hat = m[i] / bc1;
        double v_hat = v[i] / bc2;
        param[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps_hat);
    }
}

/// Adam state bound to one net's parameter list.
class AdamOptimizer {
public:
    AdamOptimizer(const FeedForwardNet& net, AdamConfig cfg) : cfg_(cfg) {
        for (const auto& layer : net.layers()) {
            m_.push_back({Tensor(layer.weight.shape()), Tensor(layer.bias.shape())});
            v_.push_back({Tensor(layer.weight.shape()), Tensor(layer.bias.shape())});
        }
    }

    void step(FeedForwardNet& net, const std::vector<LayerGrads>& grads) {
        ++step_;
        auto& layers = net.mutable_layers();
        for (std::size_t i = 0; i < layers.size(); ++i) {
            adam_step(layers[i].weight, grads[i].weight, m_[i].weight, v_[i].weight, cfg_, step_);
            adam_step(layers[i].bias, grads[i].bias, m_[i].bias, v_[i].bias, cfg_, step_);
        }
    }

    long step_count() const { return step_; }

private:
    AdamConfig cfg_;
    std::vector<LayerGrads> m_, v_;
    long step_ = 0;
};

/// Elementwise grad accumulator matching a net's parameter shapes.
inline std::vector<LayerGrads> zero_grads(const FeedForwardNet& net) {
    std::vector<LayerGrads> g;
    for (const auto& layer : net.layers()) {
        g.push_back({Tensor(layer.weight.shape()), Tensor(layer.bias.shape())});
    }
    return g;
}

inline void accumulate_grads(std::vector<LayerGrads>& acc, const std::vector<LayerGrads>& g,
                             double scale = 1.0) {
    for (std::size_t i = 0; i < acc.size(); ++i) {
        axpy(scale, g[i].weight, acc[i].weight);
        axpy(scale, g[i].bias, acc[i].bias);
    }
}

}  // namespace smoothcert
