#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace rlbd {

enum class Activation { relu, identity };

// Feed-forward network with flat parameter/gradient storage and manual
// backpropagation. Layout per layer l: weight matrix (rows = layer_sizes[l],
// cols = layer_sizes[l-1]) followed by the bias vector.
class Mlp {
  public:
    Mlp() = default;

    // Hidden layers use `hidden_act`; the output layer is identity.
    // Weights and biases are initialised uniformly in +-1/sqrt(fan_in).
    static Mlp make(const std::vector<int>& layer_sizes, std::uint64_t seed,
                    Activation hidden_act = Activation::relu);

    // Deterministic forward pass; caches activations for backward.
    const std::vector<double>& forward(std::span<const double> input);

    // Accumulates dLoss/dParams into grads() for the most recent forward.
    // `output_gradient` is dLoss/dOutput. Throws without a prior forward.
    void backward(std::span<const double> output_gradient);

    void zero_grads();

    // Convenience for scalar-output networks.
    double forward_scalar(std::span<const double> input) { return forward(input)[0]; }

    const std::vector<int>& layer_sizes() const { return sizes_; }
    int input_size() const { return sizes_.front(); }
    int output_size() const { return sizes_.back(); }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    std::vector<double>& grads() { return grads_; }
    const std::vector<double>& grads() const { return grads_; }

    nlohmann::json to_json() const;
    static Mlp from_json(const nlohmann::json& j);

  private:
    std::vector<int> sizes_;
    std::vector<Activation> acts_;  // one per non-input layer
    std::vector<double> params_;
    std::vector<double> grads_;
    std::vector<std::size_t> w_off_, b_off_;  // per-layer offsets into params_

    // forward cache: activations_[0] = input, activations_[l] = post-act of
    // layer l; pre_[l-1] = pre-activation of layer l.
    std::vector<std::vector<double>> activations_;
    std::vector<std::vector<double>> pre_;
    std::vector<std::vector<double>> delta_;  // backward scratch
    bool have_forward_ = false;

    void build_offsets();
};

enum class OptimizerKind { sgd, adam };

// Parameter update state; one instance per network.
struct Optimizer {
    OptimizerKind kind = OptimizerKind::sgd;
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step_count = 0;
    std::vector<double> m, v;  // adam moments, lazily sized

    void step(Mlp& net);

    nlohmann::json to_json() const;
    static Optimizer from_json(const nlohmann::json& j);
};

OptimizerKind optimizer_kind_from_string(const std::string& s);
std::string to_string(OptimizerKind k);

}  // namespace rlbd
