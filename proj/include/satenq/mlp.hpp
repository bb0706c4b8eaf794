#pragma once

#include <cstdint>
#include <vector>

#include "satenq/rng.hpp"

namespace satenq {

enum class Activation { relu, identity };

// Parameters of a dense fully-connected network. weights[l] is row-major
// (rows = units of layer l+1, cols = units of layer l). The output layer
// activation is always identity: Q-values are unbounded reals.
struct MlpParams {
    std::vector<int> layer_sizes;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    std::vector<Activation> activations;  // one per weight layer

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    int layer_count() const { return static_cast<int>(weights.size()); }
};

// Gradient (or optimizer moment) container shaped like an MlpParams.
struct MlpGrads {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    void zero();
    void axpy(double a, const MlpGrads& other);  // this += a * other
};

// He-scaled random initialization for ReLU layers, sqrt(1/fan_in) on the
// identity output layer, zero biases.
MlpParams make_mlp(const std::vector<int>& layer_sizes, Rng& rng);

MlpGrads zero_grads_like(const MlpParams& p);

std::vector<double> forward(const MlpParams& p, const std::vector<double>& input);

// Intermediate activations kept for backprop: activations[0] is the input,
// activations[l+1] the post-activation output of weight layer l.
struct ForwardCache {
    std::vector<std::vector<double>> activations;
    std::vector<std::vector<double>> pre;
};

std::vector<double> forward_cached(const MlpParams& p, const std::vector<double>& input,
                                   ForwardCache& cache);

// Accumulates dLoss/dtheta into grads given dLoss/doutput for the cached pass.
void backward(const MlpParams& p, const ForwardCache& cache,
              const std::vector<double>& dloss_dout, MlpGrads& grads);

long long count_parameters(const MlpParams& p);

bool all_finite(const MlpParams& p);

// 64-bit FNV-1a over the raw parameter bits; used for phase-separation checks.
std::uint64_t params_checksum(const MlpParams& p);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    MlpGrads m;
    MlpGrads v;
    long long step = 0;
};

AdamState make_adam(const MlpParams& p, AdamConfig cfg = {});

// Standard bias-corrected Adam update. Throws NumericError on non-finite
// gradients; callers abort the run and record a catastrophic failure.
void adam_step(MlpParams& p, const MlpGrads& g, AdamState& opt);

void sgd_step(MlpParams& p, const MlpGrads& g, double lr);

}  // namespace satenq
