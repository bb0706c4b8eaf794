#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "satenq/baseline.hpp"
#include "satenq/errors.hpp"
#include "satenq/rng.hpp"

using namespace satenq;

namespace {

std::vector<double> one_hot(int idx, int n = 4) {
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    v[static_cast<std::size_t>(idx)] = 1.0;
    return v;
}

}  // namespace

TEST_CASE("episodic baseline: first update moves 1% of the way at decay 0.99") {
    EpisodicBaseline b(0.99);
    CHECK(b.query_key(2) == 0.0);
    b.update({2}, 1.0);
    CHECK(b.query_key(2) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(b.query(one_hot(2)) == doctest::Approx(0.01).epsilon(1e-12));
    // Untouched keys stay at the default.
    CHECK(b.query_key(0) == 0.0);
}

TEST_CASE("episodic baseline converges geometrically to a constant return") {
    EpisodicBaseline b(0.99);
    for (int i = 0; i < 500; ++i) b.update({7}, 1.0);
    // After n updates toward G=1 from 0: B = 1 - 0.99^n, frozen for n=500.
    CHECK(b.query_key(7) == doctest::Approx(0.9934295169575854).epsilon(1e-12));
}

TEST_CASE("episodic baseline hand-computed two-episode trajectory") {
    EpisodicBaseline b(0.5, 0.0);
    b.update({3}, 8.0);  // B = 0.5*0 + 0.5*8 = 4
    CHECK(b.query_key(3) == doctest::Approx(4.0));
    b.update({3}, 6.0);  // B = 0.5*4 + 0.5*6 = 5
    CHECK(b.query_key(3) == doctest::Approx(5.0));
}

TEST_CASE("episodic baseline counts each key once per episode") {
    EpisodicBaseline b(0.5);
    b.update({1, 1, 1, 2}, 10.0);  // key 1 visited thrice, updates once
    CHECK(b.query_key(1) == doctest::Approx(5.0));
    CHECK(b.query_key(2) == doctest::Approx(5.0));
}

TEST_CASE("decay 1 never moves") {
    EpisodicBaseline b(1.0, 0.25);
    b.update({0}, 100.0);
    CHECK(b.query_key(0) == 0.25);
}

TEST_CASE("episodic baseline stays inside the convex hull of its inputs") {
    EpisodicBaseline b(0.9);
    Rng rng(5);
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < 300; ++i) {
        const double g = rng.uniform(-2.0, 3.0);
        lo = std::min(lo, g);
        hi = std::max(hi, g);
        b.update({4}, g);
        CHECK(b.query_key(4) >= lo - 1e-12);
        CHECK(b.query_key(4) <= hi + 1e-12);
    }
}

TEST_CASE("on_episode_end routes one-hot states through distinct-key updates") {
    EpisodicBaseline b(0.5);
    Rng rng(1);
    b.on_episode_end({one_hot(0), one_hot(1), one_hot(0)}, 2.0, rng);
    CHECK(b.query_key(0) == doctest::Approx(1.0));
    CHECK(b.query_key(1) == doctest::Approx(1.0));
    CHECK(b.parameter_count() == 2);
}

TEST_CASE("one_hot_key picks the largest component") {
    CHECK(one_hot_key({0.0, 0.0, 1.0, 0.0}) == 2);
    CHECK(one_hot_key({1.0, 0.0}) == 0);
    CHECK_THROWS_AS(one_hot_key({}), ShapeError);
}

TEST_CASE("episodic baseline json round-trip") {
    EpisodicBaseline b(0.97, 0.5);
    b.update({1}, 3.0);
    b.update({5}, -2.0);
    auto restored = baseline_from_json(b.to_json());
    auto* eb = dynamic_cast<EpisodicBaseline*>(restored.get());
    REQUIRE(eb != nullptr);
    CHECK(eb->decay() == 0.97);
    CHECK(eb->query_key(1) == b.query_key(1));
    CHECK(eb->query_key(5) == b.query_key(5));
    CHECK(eb->query_key(9) == b.query_key(9));  // default value survives
}

// ---------------------------------------------------------- learned baseline

TEST_CASE("learned baseline trains to a constant target") {
    Rng rng(99);
    LearnedBaseline b(3, rng);
    std::vector<std::vector<double>> states;
    std::vector<double> returns;
    Rng srng(7);
    for (int i = 0; i < 64; ++i) {
        states.push_back({srng.normal(), srng.normal(), srng.normal()});
        returns.push_back(5.0);
    }
    double loss = 0.0;
    for (int i = 0; i < 3000; ++i) loss = b.train_step(states, returns);
    CHECK(loss < 1e-3);
    CHECK(b.query(states[0]) == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("train_step loss and gradient agree with finite differences") {
    Rng rng(3);
    LearnedBaseline b(2, rng, 8, 1e-3, 100, 4);
    const std::vector<std::vector<double>> states{{0.5, -1.0}, {1.5, 0.25}};
    const std::vector<double> returns{1.0, -2.0};
    // Reported loss is the pre-step mean squared error.
    double expect = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const double e = b.query(states[i]) - returns[i];
        expect += e * e;
    }
    expect /= static_cast<double>(states.size());
    const double loss = b.train_step(states, returns);
    CHECK(loss == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("learned baseline ring buffer caps stored pairs") {
    Rng rng(11);
    LearnedBaseline b(2, rng, 8, 1e-3, 10, 4);
    Rng erng(2);
    for (int ep = 0; ep < 7; ++ep) {
        std::vector<std::vector<double>> visited(3, {0.1, 0.2});
        b.on_episode_end(visited, 1.0, erng);
    }
    CHECK(b.stored_pairs() == 10);  // 21 pushed, capacity 10
}

TEST_CASE("learned baseline parameter count matches its architecture") {
    Rng rng(13);
    LearnedBaseline b(4, rng);  // [4, 32, 1]
    CHECK(b.parameter_count() == 193);
}

TEST_CASE("learned baseline json round-trip preserves predictions") {
    Rng rng(17);
    LearnedBaseline b(3, rng, 16, 1e-3, 50, 8);
    Rng erng(5);
    for (int ep = 0; ep < 20; ++ep)
        b.on_episode_end({{0.3, 0.1, -0.4}, {1.0, 0.0, 0.5}}, static_cast<double>(ep), erng);
    auto restored = baseline_from_json(b.to_json());
    auto* lb = dynamic_cast<LearnedBaseline*>(restored.get());
    REQUIRE(lb != nullptr);
    const std::vector<double> probe{0.2, -0.3, 0.7};
    CHECK(lb->query(probe) == b.query(probe));
    CHECK(lb->parameter_count() == b.parameter_count());
}

TEST_CASE("empty batches are contract violations") {
    Rng rng(19);
    LearnedBaseline b(2, rng);
    CHECK_THROWS_AS(b.train_step({}, {}), ContractError);
    EpisodicBaseline eb(0.9);
    Rng erng(1);
    // An episode with no visited states has nothing to update; allowed no-op.
    eb.on_episode_end({}, 1.0, erng);
    CHECK(eb.parameter_count() == 0);
}
