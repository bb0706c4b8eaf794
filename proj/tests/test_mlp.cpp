#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "doctest.h"
#include "satenq/errors.hpp"
#include "satenq/mlp.hpp"
#include "satenq/rng.hpp"

using namespace satenq;

namespace {

// Independent forward pass written as plain scalar loops; the production
// version must agree with this to the last bit.
std::vector<double> forward_oracle(const MlpParams& p, const std::vector<double>& input) {
    std::vector<double> cur = input;
    for (int l = 0; l < p.layer_count(); ++l) {
        const int in_dim = p.layer_sizes[static_cast<std::size_t>(l)];
        const int out_dim = p.layer_sizes[static_cast<std::size_t>(l) + 1];
        std::vector<double> nxt(static_cast<std::size_t>(out_dim));
        for (int i = 0; i < out_dim; ++i) {
            double acc = p.biases[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)];
            for (int j = 0; j < in_dim; ++j)
                acc += p.weights[static_cast<std::size_t>(l)]
                                [static_cast<std::size_t>(i) * in_dim + static_cast<std::size_t>(j)] *
                       cur[static_cast<std::size_t>(j)];
            if (p.activations[static_cast<std::size_t>(l)] == Activation::relu && acc < 0.0)
                acc = 0.0;
            nxt[static_cast<std::size_t>(i)] = acc;
        }
        cur = std::move(nxt);
    }
    return cur;
}

double scalar_loss(MlpParams& p, const std::vector<double>& input,
                   const std::vector<double>& target) {
    const auto out = forward(p, input);
    double loss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double e = out[i] - target[i];
        loss += e * e;
    }
    return loss;
}

}  // namespace

TEST_CASE("forward matches an independently written scalar-loop oracle") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        MlpParams p = make_mlp({3, 8, 5, 2}, rng);
        std::vector<double> x(3);
        for (auto& v : x) v = rng.normal();
        const auto got = forward(p, x);
        const auto want = forward_oracle(p, x);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-14));
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(77);
    const double h = 1e-5;
    for (int trial = 0; trial < 5; ++trial) {
        MlpParams p = make_mlp({2, 32, 3}, rng);
        std::vector<double> x{rng.normal(), rng.normal()};
        std::vector<double> target{0.3, -0.7, 1.1};

        ForwardCache cache;
        const auto out = forward_cached(p, x, cache);
        std::vector<double> dout(out.size());
        for (std::size_t i = 0; i < out.size(); ++i) dout[i] = 2.0 * (out[i] - target[i]);
        MlpGrads grads = zero_grads_like(p);
        backward(p, cache, dout, grads);

        for (int l = 0; l < p.layer_count(); ++l) {
            for (std::size_t i = 0; i < p.weights[static_cast<std::size_t>(l)].size(); ++i) {
                double& w = p.weights[static_cast<std::size_t>(l)][i];
                const double keep = w;
                w = keep + h;
                const double up = scalar_loss(p, x, target);
                w = keep - h;
                const double dn = scalar_loss(p, x, target);
                w = keep;
                const double fd = (up - dn) / (2.0 * h);
                const double an = grads.weights[static_cast<std::size_t>(l)][i];
                if (std::abs(an) > 1e-8 || std::abs(fd) > 1e-8) {
                    const double rel =
                        std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-8});
                    CHECK(rel < 1e-4);
                }
            }
            for (std::size_t i = 0; i < p.biases[static_cast<std::size_t>(l)].size(); ++i) {
                double& b = p.biases[static_cast<std::size_t>(l)][i];
                const double keep = b;
                b = keep + h;
                const double up = scalar_loss(p, x, target);
                b = keep - h;
                const double dn = scalar_loss(p, x, target);
                b = keep;
                const double fd = (up - dn) / (2.0 * h);
                const double an = grads.biases[static_cast<std::size_t>(l)][i];
                if (std::abs(an) > 1e-8 || std::abs(fd) > 1e-8) {
                    const double rel =
                        std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-8});
                    CHECK(rel < 1e-4);
                }
            }
        }
    }
}

TEST_CASE("initialization is He-scaled with zero biases") {
    Rng rng(11);
    MlpParams p = make_mlp({256, 256, 4}, rng);
    // Hidden layer: sd should be sqrt(2/256).
    double sum = 0.0, sumsq = 0.0;
    for (double w : p.weights[0]) {
        sum += w;
        sumsq += w * w;
    }
    const double n = static_cast<double>(p.weights[0].size());
    const double mean = sum / n;
    const double sd = std::sqrt(sumsq / n - mean * mean);
    const double want_sd = std::sqrt(2.0 / 256.0);
    CHECK(std::abs(mean) < 4.0 * want_sd / std::sqrt(n));
    CHECK(sd == doctest::Approx(want_sd).epsilon(0.05));
    for (const auto& layer : p.biases)
        for (double b : layer) CHECK(b == 0.0);
    // Output layer scale is sqrt(1/fan_in), visibly smaller.
    double sumsq_out = 0.0;
    for (double w : p.weights[1]) sumsq_out += w * w;
    const double sd_out = std::sqrt(sumsq_out / static_cast<double>(p.weights[1].size()));
    CHECK(sd_out == doctest::Approx(std::sqrt(1.0 / 256.0)).epsilon(0.15));
}

TEST_CASE("parameter counts for the architectures in use") {
    Rng rng(1);
    CHECK(count_parameters(make_mlp({4, 32, 2}, rng)) == 226);
    CHECK(count_parameters(make_mlp({4, 64, 64, 2}, rng)) == 4610);
    CHECK(count_parameters(make_mlp({2, 32, 3}, rng)) == 195);
    CHECK(count_parameters(make_mlp({4, 32, 1}, rng)) == 193);
}

TEST_CASE("adam step reproduces a hand-computed update") {
    // One weight with preloaded moments: p=0.5, g=0.3, m=0.1, v=0.02, t=3.
    // After the step (t=4): m=0.12, v=0.02007, and with lr=1e-3 the
    // bias-corrected update gives the frozen value below (computed offline).
    MlpParams p;
    p.layer_sizes = {1, 1};
    p.weights = {{0.5}};
    p.biases = {{0.25}};
    p.activations = {Activation::identity};
    AdamState opt = make_adam(p);
    opt.step = 3;
    opt.m.weights[0][0] = 0.1;
    opt.v.weights[0][0] = 0.02;
    MlpGrads g = zero_grads_like(p);
    g.weights[0][0] = 0.3;
    adam_step(p, g, opt);
    CHECK(opt.step == 4);
    CHECK(opt.m.weights[0][0] == doctest::Approx(0.12).epsilon(1e-12));
    CHECK(opt.v.weights[0][0] == doctest::Approx(0.02007).epsilon(1e-12));
    CHECK(p.weights[0][0] == doctest::Approx(0.49984433906680736).epsilon(1e-12));
    CHECK(p.biases[0][0] == 0.25);  // zero gradient, zero moments: untouched
}

TEST_CASE("adam rejects non-finite gradients") {
    Rng rng(3);
    MlpParams p = make_mlp({2, 4, 1}, rng);
    AdamState opt = make_adam(p);
    MlpGrads g = zero_grads_like(p);
    g.weights[0][1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(adam_step(p, g, opt), NumericError);
}

TEST_CASE("shape violations throw") {
    Rng rng(5);
    MlpParams p = make_mlp({3, 4, 2}, rng);
    CHECK_THROWS_AS(forward(p, {1.0, 2.0}), ShapeError);
    CHECK_THROWS_AS(make_mlp({5}, rng), ShapeError);
    CHECK_THROWS_AS(make_mlp({3, 0, 2}, rng), ShapeError);
    ForwardCache cache;
    forward_cached(p, {1.0, 2.0, 3.0}, cache);
    MlpGrads grads = zero_grads_like(p);
    CHECK_THROWS_AS(backward(p, cache, {1.0}, grads), ShapeError);
}

TEST_CASE("checksum is sensitive to single-parameter changes") {
    Rng rng(9);
    MlpParams p = make_mlp({3, 8, 2}, rng);
    const auto before = params_checksum(p);
    CHECK(params_checksum(p) == before);
    p.weights[0][5] += 1e-15;
    CHECK(params_checksum(p) != before);
}

TEST_CASE("all_finite flags NaN and infinity") {
    Rng rng(13);
    MlpParams p = make_mlp({2, 3, 1}, rng);
    CHECK(all_finite(p));
    p.biases[1][0] = std::numeric_limits<double>::infinity();
    CHECK(!all_finite(p));
}

TEST_CASE("sgd step moves parameters opposite the gradient") {
    MlpParams p;
    p.layer_sizes = {1, 1};
    p.weights = {{1.0}};
    p.biases = {{0.5}};
    p.activations = {Activation::identity};
    MlpGrads g = zero_grads_like(p);
    g.weights[0][0] = 2.0;
    g.biases[0][0] = -4.0;
    sgd_step(p, g, 0.1);
    CHECK(p.weights[0][0] == doctest::Approx(0.8));
    CHECK(p.biases[0][0] == doctest::Approx(0.9));
}
