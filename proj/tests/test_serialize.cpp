#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "satenq/errors.hpp"
#include "satenq/mlp.hpp"
#include "satenq/replay.hpp"
#include "satenq/rng.hpp"
#include "satenq/serialize.hpp"

using namespace satenq;

TEST_CASE("mlp round-trip is bit-exact") {
    Rng rng(404);
    MlpParams p = make_mlp({5, 16, 16, 3}, rng);
    // Sprinkle in values that stress the decimal round-trip.
    p.weights[0][0] = 0.1;
    p.weights[0][1] = 1.0 / 3.0;
    p.weights[1][2] = 1e-300;
    p.biases[2][1] = -12345.678901234567;

    const nlohmann::json j = mlp_to_json(p);
    const MlpParams q = mlp_from_json(j);
    REQUIRE(q.layer_sizes == p.layer_sizes);
    REQUIRE(q.activations.size() == p.activations.size());
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        REQUIRE(q.weights[l].size() == p.weights[l].size());
        for (std::size_t i = 0; i < p.weights[l].size(); ++i) CHECK(q.weights[l][i] == p.weights[l][i]);
        for (std::size_t i = 0; i < p.biases[l].size(); ++i) CHECK(q.biases[l][i] == p.biases[l][i]);
    }
    CHECK(params_checksum(q) == params_checksum(p));
}

TEST_CASE("mlp round-trip survives a text detour") {
    Rng rng(7);
    MlpParams p = make_mlp({3, 32, 2}, rng);
    const std::string text = mlp_to_json(p).dump();
    const MlpParams q = mlp_from_json(nlohmann::json::parse(text));
    CHECK(params_checksum(q) == params_checksum(p));
}

TEST_CASE("adam state round-trip preserves moments and step") {
    Rng rng(21);
    MlpParams p = make_mlp({4, 8, 2}, rng);
    AdamState s = make_adam(p, AdamConfig{3e-4, 0.95, 0.9995, 1e-7});
    // Push it away from the all-zero initial state.
    MlpGrads g = zero_grads_like(p);
    for (auto& layer : g.weights)
        for (auto& x : layer) x = rng.normal();
    for (auto& layer : g.biases)
        for (auto& x : layer) x = rng.normal();
    adam_step(p, g, s);
    adam_step(p, g, s);

    const AdamState r = adam_from_json(adam_to_json(s), p);
    CHECK(r.step == s.step);
    CHECK(r.cfg.lr == s.cfg.lr);
    CHECK(r.cfg.beta1 == s.cfg.beta1);
    CHECK(r.cfg.beta2 == s.cfg.beta2);
    CHECK(r.cfg.eps == s.cfg.eps);
    for (std::size_t l = 0; l < s.m.weights.size(); ++l) {
        for (std::size_t i = 0; i < s.m.weights[l].size(); ++i) {
            CHECK(r.m.weights[l][i] == s.m.weights[l][i]);
            CHECK(r.v.weights[l][i] == s.v.weights[l][i]);
        }
        for (std::size_t i = 0; i < s.m.biases[l].size(); ++i) {
            CHECK(r.m.biases[l][i] == s.m.biases[l][i]);
            CHECK(r.v.biases[l][i] == s.v.biases[l][i]);
        }
    }
}

TEST_CASE("adam restore validates shape against the target network") {
    Rng rng(33);
    MlpParams p = make_mlp({4, 8, 2}, rng);
    AdamState s = make_adam(p);
    const nlohmann::json j = adam_to_json(s);
    MlpParams other = make_mlp({4, 9, 2}, rng);
    CHECK_THROWS_AS(adam_from_json(j, other), ShapeError);
}

TEST_CASE("transition round-trip keeps every field") {
    Transition t;
    t.state = {0.25, -1.5, 3.0};
    t.next_state = {0.5, 2.25, -0.125};
    t.action = 2;
    t.reward = -1.0 / 7.0;
    t.done = true;
    const Transition u = transition_from_json(transition_to_json(t));
    CHECK(u.state == t.state);
    CHECK(u.next_state == t.next_state);
    CHECK(u.action == t.action);
    CHECK(u.reward == t.reward);
    CHECK(u.done == t.done);
}

TEST_CASE("buffer dump lists transitions oldest first") {
    ReplayBuffer buf(3);
    for (int i = 0; i < 5; ++i) {
        Transition t;
        t.state = {static_cast<double>(i)};
        t.next_state = {static_cast<double>(i + 1)};
        t.reward = i;
        buf.push(t);
    }
    const nlohmann::json j = buffer_to_json(buf);
    REQUIRE(j.size() == 3);
    // Elements 0 and 1 were evicted.
    CHECK(j[0]["reward"].get<double>() == 2.0);
    CHECK(j[1]["reward"].get<double>() == 3.0);
    CHECK(j[2]["reward"].get<double>() == 4.0);
}

TEST_CASE("malformed documents are rejected") {
    CHECK_THROWS(mlp_from_json(nlohmann::json::object()));
    CHECK_THROWS(transition_from_json(nlohmann::json::array()));
}
