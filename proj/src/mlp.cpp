#include "rlbd/mlp.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace rlbd {

void Mlp::build_offsets() {
    const int n_layers = static_cast<int>(sizes_.size()) - 1;
    w_off_.resize(n_layers);
    b_off_.resize(n_layers);
    std::size_t off = 0;
    for (int l = 0; l < n_layers; ++l) {
        w_off_[l] = off;
        off += static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l];
        b_off_[l] = off;
        off += sizes_[l + 1];
    }
    params_.assign(off, 0.0);
    grads_.assign(off, 0.0);
    activations_.assign(n_layers + 1, {});
    pre_.assign(n_layers, {});
    delta_.assign(n_layers, {});
    for (int l = 0; l < n_layers; ++l) {
        pre_[l].assign(sizes_[l + 1], 0.0);
        delta_[l].assign(sizes_[l + 1], 0.0);
        activations_[l + 1].assign(sizes_[l + 1], 0.0);
    }
    activations_[0].assign(sizes_[0], 0.0);
}

Mlp Mlp::make(const std::vector<int>& layer_sizes, std::uint64_t seed, Activation hidden_act) {
    if (layer_sizes.size() < 2) throw std::invalid_argument("Mlp: need input and output layers");
    for (int n : layer_sizes) {
        if (n <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
    }
    Mlp net;
    net.sizes_ = layer_sizes;
    const int n_layers = static_cast<int>(layer_sizes.size()) - 1;
    net.acts_.assign(n_layers, hidden_act);
    net.acts_.back() = Activation::identity;
    net.build_offsets();

    std::mt19937_64 rng(seed);
    for (int l = 0; l < n_layers; ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer_sizes[l]));
        std::uniform_real_distribution<double> dist(-bound, bound);
        const std::size_t n_w = static_cast<std::size_t>(layer_sizes[l + 1]) * layer_sizes[l];
        for (std::size_t i = 0; i < n_w; ++i) net.params_[net.w_off_[l] + i] = dist(rng);
        for (int i = 0; i < layer_sizes[l + 1]; ++i) net.params_[net.b_off_[l] + i] = dist(rng);
    }
    return net;
}

const std::vector<double>& Mlp::forward(std::span<const double> input) {
    if (static_cast<int>(input.size()) != sizes_.front()) {
        throw std::invalid_argument("Mlp::forward: input length does not match input layer");
    }
    std::copy(input.begin(), input.end(), activations_[0].begin());
    const int n_layers = static_cast<int>(sizes_.size()) - 1;
    for (int l = 0; l < n_layers; ++l) {
        const int n_in = sizes_[l];
        const int n_out = sizes_[l + 1];
        const double* w = params_.data() + w_off_[l];
        const double* b = params_.data() + b_off_[l];
        const double* in = activations_[l].data();
        double* z = pre_[l].data();
        double* out = activations_[l + 1].data();
        for (int i = 0; i < n_out; ++i) {
            double acc = b[i];
            const double* row = w + static_cast<std::size_t>(i) * n_in;
            for (int j = 0; j < n_in; ++j) acc += row[j] * in[j];
            z[i] = acc;
            out[i] = (acts_[l] == Activation::relu && acc < 0.0) ? 0.0 : acc;
        }
    }
    have_forward_ = true;
    return activations_.back();
}

void Mlp::backward(std::span<const double> output_gradient) {
    if (!have_forward_) throw std::logic_error("Mlp::backward: no forward pass cached");
    if (static_cast<int>(output_gradient.size()) != sizes_.back()) {
        throw std::invalid_argument("Mlp::backward: gradient length does not match output layer");
    }
    const int n_layers = static_cast<int>(sizes_.size()) - 1;
    // delta for the output layer
    for (int i = 0; i < sizes_.back(); ++i) {
        double d = output_gradient[i];
        if (acts_[n_layers - 1] == Activation::relu && pre_[n_layers - 1][i] <= 0.0) d = 0.0;
        delta_[n_layers - 1][i] = d;
    }
    for (int l = n_layers - 1; l >= 0; --l) {
        const int n_in = sizes_[l];
        const int n_out = sizes_[l + 1];
        const double* in = activations_[l].data();
        const double* d = delta_[l].data();
        double* gw = grads_.data() + w_off_[l];
        double* gb = grads_.data() + b_off_[l];
        for (int i = 0; i < n_out; ++i) {
            const double di = d[i];
            if (di != 0.0) {
                double* grow = gw + static_cast<std::size_t>(i) * n_in;
                for (int j = 0; j < n_in; ++j) grow[j] += di * in[j];
            }
            gb[i] += di;
        }
        if (l > 0) {
            const double* w = params_.data() + w_off_[l];
            double* dprev = delta_[l - 1].data();
            for (int j = 0; j < n_in; ++j) dprev[j] = 0.0;
            for (int i = 0; i < n_out; ++i) {
                const double di = d[i];
                if (di == 0.0) continue;
                const double* row = w + static_cast<std::size_t>(i) * n_in;
                for (int j = 0; j < n_in; ++j) dprev[j] += di * row[j];
            }
            for (int j = 0; j < n_in; ++j) {
                if (acts_[l - 1] == Activation::relu && pre_[l - 1][j] <= 0.0) dprev[j] = 0.0;
            }
        }
    }
}

void Mlp::zero_grads() { std::fill(grads_.begin(), grads_.end(), 0.0); }

nlohmann::json Mlp::to_json() const {
    nlohmann::json acts = nlohmann::json::array();
    for (auto a : acts_) acts.push_back(a == Activation::relu ? "relu" : "identity");
    return nlohmann::json{{"layer_sizes", sizes_}, {"activations", acts}, {"params", params_}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
    Mlp net;
    net.sizes_ = j.at("layer_sizes").get<std::vector<int>>();
    if (net.sizes_.size() < 2) throw std::invalid_argument("Mlp::from_json: bad shape header");
    for (const auto& a : j.at("activations")) {
        std::string s = a.get<std::string>();
        if (s == "relu") {
            net.acts_.push_back(Activation::relu);
        } else if (s == "identity") {
            net.acts_.push_back(Activation::identity);
        } else {
            throw std::invalid_argument("Mlp::from_json: unknown activation " + s);
        }
    }
    if (net.acts_.size() + 1 != net.sizes_.size()) {
        throw std::invalid_argument("Mlp::from_json: activation count does not match layers");
    }
    net.build_offsets();
    auto p = j.at("params").get<std::vector<double>>();
    if (p.size() != net.params_.size()) {
        throw std::invalid_argument("Mlp::from_json: parameter count does not match shape header");
    }
    net.params_ = std::move(p);
    return net;
}

void Optimizer::step(Mlp& net) {
    auto& p = net.params();
    const auto& g = net.grads();
    if (kind == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
        ++step_count;
        return;
    }
    if (m.size() != p.size()) {
        m.assign(p.size(), 0.0);
        v.assign(p.size(), 0.0);
    }
    ++step_count;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

nlohmann::json Optimizer::to_json() const {
    return nlohmann::json{{"kind", to_string(kind)}, {"lr", lr},
                          {"beta1", beta1},          {"beta2", beta2},
                          {"eps", eps},              {"step_count", step_count},
                          {"m", m},                  {"v", v}};
}

Optimizer Optimizer::from_json(const nlohmann::json& j) {
    Optimizer o;
    o.kind = optimizer_kind_from_string(j.at("kind").get<std::string>());
    o.lr = j.at("lr").get<double>();
    o.beta1 = j.at("beta1").get<double>();
    o.beta2 = j.at("beta2").get<double>();
    o.eps = j.at("eps").get<double>();
    o.step_count = j.at("step_count").get<long>();
    o.m = j.at("m").get<std::vector<double>>();
    o.v = j.at("v").get<std::vector<double>>();
    return o;
}

OptimizerKind optimizer_kind_from_string(const std::string& s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adam") return OptimizerKind::adam;
    throw std::invalid_argument("unknown optimizer kind: " + s);
}

std::string to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

}  // namespace rlbd
