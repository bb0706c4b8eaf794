#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "satenq/errors.hpp"
#include "satenq/replay.hpp"
#include "satenq/rng.hpp"

using namespace satenq;

namespace {

Transition tagged(double tag) {
    Transition t;
    t.state = {tag};
    t.next_state = {tag + 0.5};
    t.action = static_cast<int>(tag) % 3;
    t.reward = tag;
    return t;
}

}  // namespace

TEST_CASE("push grows until capacity then evicts oldest first") {
    ReplayBuffer buf(3);
    CHECK(buf.size() == 0);
    buf.push(tagged(0));
    CHECK(buf.size() == 1);
    buf.push(tagged(1));
    buf.push(tagged(2));
    CHECK(buf.size() == 3);
    buf.push(tagged(3));  // evicts 0
    buf.push(tagged(4));  // evicts 1
    CHECK(buf.size() == 3);
    CHECK(buf.total_pushed() == 5);
    CHECK(buf.at(0).reward == 2.0);
    CHECK(buf.at(1).reward == 3.0);
    CHECK(buf.at(2).reward == 4.0);
    CHECK_THROWS_AS(buf.at(3), ContractError);
}

TEST_CASE("size-1 buffer returns its one element for any batch") {
    ReplayBuffer buf(8);
    buf.push(tagged(7));
    Rng rng(1);
    const auto batch = buf.sample(4, rng);
    REQUIRE(batch.size() == 4);
    for (const auto& t : batch) CHECK(t.reward == 7.0);
}

TEST_CASE("sampling an empty buffer is a contract violation") {
    ReplayBuffer buf(4);
    Rng rng(2);
    CHECK_THROWS_AS(buf.sample(1, rng), ContractError);
    CHECK_THROWS_AS(buf.sample_one(rng), ContractError);
}

TEST_CASE("sampling is uniform over contents") {
    ReplayBuffer buf(10);
    for (int i = 0; i < 10; ++i) buf.push(tagged(i));
    Rng rng(555);
    std::map<int, int> counts;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) ++counts[static_cast<int>(buf.sample_one(rng).reward)];
    for (int i = 0; i < 10; ++i) {
        const double freq = counts[i] / static_cast<double>(n);
        CHECK(std::abs(freq - 0.1) < 0.005);
    }
}

TEST_CASE("fixed seed gives identical batch sequences") {
    ReplayBuffer buf(50);
    for (int i = 0; i < 50; ++i) buf.push(tagged(i));
    Rng a(9), b(9);
    for (int trial = 0; trial < 10; ++trial) {
        const auto ba = buf.sample(16, a);
        const auto bb = buf.sample(16, b);
        for (std::size_t i = 0; i < ba.size(); ++i) CHECK(ba[i].reward == bb[i].reward);
    }
}

TEST_CASE("pool of one buffer behaves like that buffer") {
    ReplayBuffer buf(5);
    for (int i = 0; i < 5; ++i) buf.push(tagged(i));
    const PooledView pool = PooledView::snapshot({&buf});
    CHECK(pool.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(pool.at(i).reward == buf.at(i).reward);
}

TEST_CASE("pooled sampling weights elements, not buffers") {
    ReplayBuffer small(10), large(30);
    for (int i = 0; i < 10; ++i) small.push(tagged(0));
    for (int i = 0; i < 30; ++i) large.push(tagged(1));
    const PooledView pool = PooledView::snapshot({&small, &large});
    REQUIRE(pool.size() == 40);
    Rng rng(31337);
    const int n = 1000000;
    long long from_large = 0;
    for (int i = 0; i < n; ++i)
        if (pool.sample_one(rng).reward == 1.0) ++from_large;
    const double freq = from_large / static_cast<double>(n);
    // 30 of 40 elements: expect 0.75, sd ~ sqrt(.75*.25/n) ~ 4.3e-4.
    CHECK(std::abs(freq - 0.75) < 0.005);
}

TEST_CASE("pooling only empty buffers is a contract violation") {
    ReplayBuffer a(4), b(4);
    CHECK_THROWS_AS(PooledView::snapshot({&a, &b}), ContractError);
    CHECK_THROWS_AS(PooledView::snapshot({}), ContractError);
}

TEST_CASE("pool is a snapshot: later pushes do not leak in") {
    ReplayBuffer buf(5);
    buf.push(tagged(1));
    const PooledView pool = PooledView::snapshot({&buf});
    buf.push(tagged(2));
    CHECK(pool.size() == 1);
    CHECK(pool.at(0).reward == 1.0);
}

TEST_CASE("zero-capacity buffers are rejected") {
    CHECK_THROWS_AS(ReplayBuffer(0), ContractError);
}
