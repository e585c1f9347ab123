#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "smoothcert/rng.hpp"
#include "smoothcert/tensor.hpp"

namespace smoothcert {

enum class Activation : std::uint8_t { kReLU = 0, kIdentity = 1 };

struct Layer {
    Tensor weight;  // rows = output dim, cols = input dim
    Tensor bias;    // length rows
    Activation act = Activation::kReLU;

    std::size_t in_dim() const { return weight.cols(); }
    std::size_t out_dim() const { return weight.rows(); }
};

/// Dense feedforward network. Conditioning inputs (e.g. a timestep embedding)
/// are appended after the data slice; conditioning_dim is 0 for classifiers.
class FeedForwardNet {
public:
    FeedForwardNet() = default;

    FeedForwardNet(std::size_t input_dim, std::size_t conditioning_dim, std::vector<Layer> layers)
        : input_dim_(input_dim), conditioning_dim_(conditioning_dim), layers_(std::move(layers)) {
        validate();
    }

    /// Hidden layers use ReLU, the output layer Identity.
    static FeedForwardNet make(std::size_t input_dim, std::size_t conditioning_dim,
                               const std::vector<std::size_t>& hidden, std::size_t output_dim) {
        std::vector<Layer> layers;
        std::size_t prev = input_dim + conditioning_dim;
        for (std::size_t h : hidden) {
            layers.push_back({Tensor({h, prev}), Tensor({h}), Activation::kReLU});
            prev = h;
        }
        layers.push_back({Tensor({output_dim, prev}), Tensor({output_dim}), Activation::kIdentity});
        return FeedForwardNet(input_dim, conditioning_dim, std::move(layers));
    }

    std::size_t input_dim() const { return input_dim_; }
    std::size_t conditioning_dim() const { return conditioning_dim_; }
    std::size_t output_dim() const { return layers_.back().out_dim(); }
    std::size_t num_layers() const { return layers_.size(); }

    const std::vector<Layer>& layers() const { return layers_; }

    /// Mutable access bumps the revision so stale tapes are detectable.
    std::vector<Layer>& mutable_layers() {
        ++revision_;
        return layers_;
    }

    std::uint64_t revision() const { return revision_; }

    /// Glorot-uniform weights, zero biases; deterministic in the rng coords.
    void init_params(const Rng& rng) {
        auto& ls = mutable_layers();
        std::uint64_t draw = 0;
        for (auto& layer : ls) {
            double bound = std::sqrt(6.0 / double(layer.in_dim() + layer.out_dim()));
            for (std::size_t i = 0; i < layer.weight.size(); ++i) {
                layer.weight[i] = bound * (2.0 * rng.uniform(draw++) - 1.0);
            }
            for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] = 0.0;
        }
    }

private:
    void validate() const {
        if (layers_.empty()) throw ShapeError("FeedForwardNet: no layers");
        if (layers_.front().in_dim() != input_dim_ + conditioning_dim_) {
            throw ShapeError("FeedForwardNet: first layer width != input_dim + conditioning_dim");
        }
        for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
            if (layers_[i].out_dim() != layers_[i + 1].in_dim()) {
                throw ShapeError("FeedForwardNet: layer dimension chain broken");
            }
        }
        for (const auto& l : layers_) {
            if (l.bias.size() != l.out_dim()) throw ShapeError("FeedForwardNet: bias length");
        }
    }

    std::size_t input_dim_ = 0;
    std::size_t conditioning_dim_ = 0;
    std::vector<Layer> layers_;
    std::uint64_t revision_ = 0;
};

/// Cached per-layer pre-activations and activations from one forward pass.
struct GradTape {
    Tensor input;              // concatenated data ++ conditioning
    std::vector<Tensor> pre;   // pre-activation per layer
    std::vector<Tensor> act;   // post-activation per layer
    const FeedForwardNet* net = nullptr;
    std::uint64_t revision = 0;
};

struct LayerGrads {
    Tensor weight;
    Tensor bias;
};

struct NetBackwardResult {
    std::vector<LayerGrads> param_grads;
    Tensor input_grad;  // gradient w.r.t. the data slice only
    Tensor full_input_grad;  // data ++ conditioning slices
};

inline std::pair<Tensor, GradTape> net_forward(const FeedForwardNet& net, const Tensor& input,
                                               const Tensor& conditioning = Tensor()) {
    if (input.size() != net.input_dim()) {
        throw ShapeError("net_forward: input length != input_dim");
    }
    if (conditioning.size() != net.conditioning_dim()) {
        throw ShapeError("net_forward: conditioning length != conditioning_dim");
    }
    GradTape tape;
    tape.net = &net;
    tape.revision = net.revision();
    tape.input = Tensor({input.size() + conditioning.size()});
    for (std::size_t i = 0; i < input.size(); ++i) tape.input[i] = input[i];
    for (std::size_t i = 0; i < conditioning.size(); ++i) tape.input[input.size() + i] = conditioning[i];

    const Tensor* cur = &tape.input;
    for (const auto& layer : net.layers()) {
        Tensor pre({layer.out_dim()});
        for (std::size_t r = 0; r < layer.out_dim(); ++r) {
            double acc = layer.bias[r];
            const double* w = layer.weight.data().data() + r * layer.in_dim();
            const double* x = cur->data().data();
            for (std::size_t c = 0; c < layer.in_dim(); ++c) acc += w[c] * x[c];
            pre[r] = acc;
        }
        Tensor act = pre;
        if (layer.act == Activation::kReLU) {
            for (std::size_t i = 0; i < act.size(); ++i) act[i] = act[i] > 0.0 ? act[i] : 0.0;
        }
        tape.pre.push_back(std::move(pre));
        tape.act.push_back(std::move(act));
        cur = &tape.act.back();
    }
    return {tape.act.back(), std::move(tape)};
}

inline NetBackwardResult net_backward(const FeedForwardNet& net, const GradTape& tape,
                                      const Tensor& output_cotangent) {
    if (tape.net != &net || tape.revision != net.revision()) {
        throw ShapeError("net_backward: tape does not match this net (stale or foreign tape)");
    }
    if (output_cotangent.size() != net.output_dim()) {
        throw ShapeError("net_backward: cotangent length != output_dim");
    }
    const auto& layers = net.layers();
    NetBackwardResult out;
    out.param_grads.resize(layers.size());

    Tensor delta = output_cotangent;
    for (std::size_t li = layers.size(); li-- > 0;) {
        const Layer& layer = layers[li];
        // Through the activation.
        if (layer.act == Activation::kReLU) {
            for (std::size_t i = 0; i < delta.size(); ++i) {
                if (tape.pre[li][i] <= 0.0) delta[i] = 0.0;
            }
        }
        const Tensor& in_act = li == 0 ? tape.input : tape.act[li - 1];
        LayerGrads g{Tensor({layer.out_dim(), layer.in_dim()}), Tensor({layer.out_dim()})};
        for (std::size_t r = 0; r < layer.out_dim(); ++r) {
            double d = delta[r];
            g.bias[r] = d;
            double* gw = g.weight.data().data() + r * layer.in_dim();
            const double* x = in_act.data().data();
            for (std::size_t c = 0; c < layer.in_dim(); ++c) gw[c] = d * x[c];
        }
        out.param_grads[li] = std::move(g);

        Tensor prev_delta({layer.in_dim()});
        for (std::size_t r = 0; r < layer.out_dim(); ++r) {
            double d = delta[r];
            if (d == 0.0) continue;
            const double* w = layer.weight.data().data() + r * layer.in_dim();
            for (std::size_t c = 0; c < layer.in_dim(); ++c) prev_delta[c] += d * w[c];
        }
        delta = std::move(prev_delta);
    }
    out.full_input_grad = delta;
    out.input_grad = Tensor({net.input_dim()});
    for (std::size_t i = 0; i < net.input_dim(); ++i) out.input_grad[i] = delta[i];
    return out;
}

}  // namespace smoothcert
