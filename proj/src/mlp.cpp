#include "satenq/mlp.hpp"

#include <cmath>
#include <cstring>

#include "satenq/errors.hpp"

namespace satenq {

namespace {

void check_shapes(const MlpParams& p) {
    if (p.layer_sizes.size() < 2) throw ShapeError("mlp: need at least input and output layer");
    const auto n_layers = p.layer_sizes.size() - 1;
    if (p.weights.size() != n_layers || p.biases.size() != n_layers ||
        p.activations.size() != n_layers) {
        throw ShapeError("mlp: weight/bias/activation count does not match layer_sizes");
    }
}

}  // namespace

void MlpGrads::zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

void MlpGrads::axpy(double a, const MlpGrads& other) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (std::size_t i = 0; i < weights[l].size(); ++i) weights[l][i] += a * other.weights[l][i];
        for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += a * other.biases[l][i];
    }
}

MlpParams make_mlp(const std::vector<int>& layer_sizes, Rng& rng) {
    if (layer_sizes.size() < 2) throw ShapeError("make_mlp: need at least 2 layers");
    for (int s : layer_sizes)
        if (s <= 0) throw ShapeError("make_mlp: layer sizes must be positive");

    MlpParams p;
    p.layer_sizes = layer_sizes;
    const auto n_layers = layer_sizes.size() - 1;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const bool output_layer = (l + 1 == n_layers);
        const Activation act = output_layer ? Activation::identity : Activation::relu;
        const double scale =
            act == Activation::relu ? std::sqrt(2.0 / fan_in) : std::sqrt(1.0 / fan_in);
        std::vector<double> w(static_cast<std::size_t>(fan_in) * fan_out);
        for (auto& x : w) x = scale * rng.normal();
        p.weights.push_back(std::move(w));
        p.biases.emplace_back(fan_out, 0.0);
        p.activations.push_back(act);
    }
    return p;
}

MlpGrads zero_grads_like(const MlpParams& p) {
    MlpGrads g;
    for (const auto& w : p.weights) g.weights.emplace_back(w.size(), 0.0);
    for (const auto& b : p.biases) g.biases.emplace_back(b.size(), 0.0);
    return g;
}

std::vector<double> forward(const MlpParams& p, const std::vector<double>& input) {
    ForwardCache cache;
    return forward_cached(p, input, cache);
}

std::vector<double> forward_cached(const MlpParams& p, const std::vector<double>& input,
                                   ForwardCache& cache) {
    check_shapes(p);
    if (static_cast<int>(input.size()) != p.input_dim())
        throw ShapeError("forward: input length does not match input dim");

    cache.activations.assign(1, input);
    cache.pre.clear();
    const std::vector<double>* prev = &cache.activations[0];
    for (int l = 0; l < p.layer_count(); ++l) {
        const int in_dim = p.layer_sizes[l];
        const int out_dim = p.layer_sizes[l + 1];
        std::vector<double> z(out_dim);
        const double* w = p.weights[l].data();
        for (int i = 0; i < out_dim; ++i) {
            double acc = p.biases[l][i];
            const double* row = w + static_cast<std::size_t>(i) * in_dim;
            for (int j = 0; j < in_dim; ++j) acc += row[j] * (*prev)[j];
            z[i] = acc;
        }
        cache.pre.push_back(z);
        if (p.activations[l] == Activation::relu)
            for (auto& v : z) v = v > 0.0 ? v : 0.0;
        cache.activations.push_back(std::move(z));
        prev = &cache.activations.back();
    }
    return cache.activations.back();
}

void backward(const MlpParams& p, const ForwardCache& cache,
              const std::vector<double>& dloss_dout, MlpGrads& grads) {
    check_shapes(p);
    if (static_cast<int>(dloss_dout.size()) != p.output_dim())
        throw ShapeError("backward: upstream gradient length does not match output dim");
    for (double g : dloss_dout)
        if (!std::isfinite(g)) throw NumericError("backward: non-finite upstream gradient");
    if (cache.activations.size() != static_cast<std::size_t>(p.layer_count()) + 1)
        throw ShapeError("backward: cache does not match network depth");

    std::vector<double> delta = dloss_dout;
    for (int l = p.layer_count() - 1; l >= 0; --l) {
        const int in_dim = p.layer_sizes[l];
        const int out_dim = p.layer_sizes[l + 1];
        if (p.activations[l] == Activation::relu) {
            for (int i = 0; i < out_dim; ++i)
                if (cache.pre[l][i] <= 0.0) delta[i] = 0.0;
        }
        const std::vector<double>& a_prev = cache.activations[l];
        double* gw = grads.weights[l].data();
        for (int i = 0; i < out_dim; ++i) {
            const double d = delta[i];
            grads.biases[l][i] += d;
            double* row = gw + static_cast<std::size_t>(i) * in_dim;
            for (int j = 0; j < in_dim; ++j) row[j] += d * a_prev[j];
        }
        if (l > 0) {
            std::vector<double> next(in_dim, 0.0);
            const double* w = p.weights[l].data();
            for (int i = 0; i < out_dim; ++i) {
                const double d = delta[i];
                const double* row = w + static_cast<std::size_t>(i) * in_dim;
                for (int j = 0; j < in_dim; ++j) next[j] += d * row[j];
            }
            delta = std::move(next);
        }
    }
}

long long count_parameters(const MlpParams& p) {
    long long n = 0;
    for (const auto& w : p.weights) n += static_cast<long long>(w.size());
    for (const auto& b : p.biases) n += static_cast<long long>(b.size());
    return n;
}

bool all_finite(const MlpParams& p) {
    for (const auto& w : p.weights)
        for (double x : w)
            if (!std::isfinite(x)) return false;
    for (const auto& b : p.biases)
        for (double x : b)
            if (!std::isfinite(x)) return false;
    return true;
}

std::uint64_t params_checksum(const MlpParams& p) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](double x) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, sizeof bits);
        for (int k = 0; k < 8; ++k) {
            h ^= (bits >> (8 * k)) & 0xFF;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& w : p.weights)
        for (double x : w) mix(x);
    for (const auto& b : p.biases)
        for (double x : b) mix(x);
    return h;
}

AdamState make_adam(const MlpParams& p, AdamConfig cfg) {
    AdamState s;
    s.cfg = cfg;
    s.m = zero_grads_like(p);
    s.v = zero_grads_like(p);
    return s;
}

void adam_step(MlpParams& p, const MlpGrads& g, AdamState& opt) {
    for (const auto& gw : g.weights)
        for (double x : gw)
            if (!std::isfinite(x)) throw NumericError("adam_step: non-finite gradient");
    for (const auto& gb : g.biases)
        for (double x : gb)
            if (!std::isfinite(x)) throw NumericError("adam_step: non-finite gradient");

    opt.step += 1;
    const auto& c = opt.cfg;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(opt.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(opt.step));
    auto update = [&](std::vector<double>& param, const std::vector<double>& grad,
                      std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t i = 0; i < param.size(); ++i) {
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grad[i];
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            param[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
        }
    };
    for (int l = 0; l < p.layer_count(); ++l) {
        update(p.weights[l], g.weights[l], opt.m.weights[l], opt.v.weights[l]);
        update(p.biases[l], g.biases[l], opt.m.biases[l], opt.v.biases[l]);
    }
}

void sgd_step(MlpParams& p, const MlpGrads& g, double lr) {
    for (int l = 0; l < p.layer_count(); ++l) {
        for (std::size_t i = 0; i < p.weights[l].size(); ++i) p.weights[l][i] -= lr * g.weights[l][i];
        for (std::size_t i = 0; i < p.biases[l].size(); ++i) p.biases[l][i] -= lr * g.biases[l][i];
    }
}

}  // namespace satenq
