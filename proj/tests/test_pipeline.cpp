#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "satenq/baseline.hpp"
#include "satenq/ensemble.hpp"
#include "satenq/env.hpp"
#include "satenq/errors.hpp"
#include "satenq/pipeline.hpp"
#include "satenq/rng.hpp"
#include "satenq/serialize.hpp"

using namespace satenq;

namespace {

// Single identity-activation layer: Q_i(s) = sum_j W[i][j] s_j + b_i.
MlpParams linear_net(std::vector<double> w, std::vector<double> b) {
    MlpParams p;
    const int out = static_cast<int>(b.size());
    const int in = static_cast<int>(w.size()) / out;
    p.layer_sizes = {in, out};
    p.weights = {std::move(w)};
    p.biases = {std::move(b)};
    p.activations = {Activation::identity};
    return p;
}

Transition make_t(std::vector<double> s, std::vector<double> sp, int a, double r, bool done) {
    Transition t;
    t.state = std::move(s);
    t.next_state = std::move(sp);
    t.action = a;
    t.reward = r;
    t.done = done;
    return t;
}

EnvSpec grid_spec() {
    EnvSpec spec;
    spec.kind = EnvKind::gridworld;
    spec.gridworld.max_steps = 60;
    return spec;
}

}  // namespace

TEST_CASE("td target matches hand computation for both flavors") {
    // Target net: identity map plus bias, so Q_t(0.2, 0.4) = (0.7, 0.15).
    const auto target = linear_net({1.0, 0.0, 0.0, 1.0}, {0.5, -0.25});
    // Online net: constant (0.1, 0.9), argmax is action 1.
    const auto online = linear_net({0.0, 0.0, 0.0, 0.0}, {0.1, 0.9});
    const auto t = make_t({0.5, -1.0}, {0.2, 0.4}, 0, 1.0, false);

    CHECK(td_target(t, online, target, 0.9, TdFlavor::dqn) ==
          doctest::Approx(1.0 + 0.9 * 0.7).epsilon(1e-15));
    // Double flavor: online picks action 1, target prices it at 0.15.
    CHECK(td_target(t, online, target, 0.9, TdFlavor::double_dqn) ==
          doctest::Approx(1.0 + 0.9 * 0.15).epsilon(1e-15));

    const auto done_t = make_t({0.5, -1.0}, {0.2, 0.4}, 0, 2.5, true);
    CHECK(td_target(done_t, online, target, 0.9, TdFlavor::dqn) == 2.5);

    // gamma = 0 degenerates to the immediate reward even without done.
    CHECK(td_target(t, online, target, 0.0, TdFlavor::dqn) == doctest::Approx(1.0));
    CHECK(td_target(t, online, target, 0.0, TdFlavor::double_dqn) == doctest::Approx(1.0));
}

TEST_CASE("td target rejects non-finite bootstrap values") {
    const auto online = linear_net({0.0, 0.0, 0.0, 0.0}, {0.0, 0.0});
    auto bad = linear_net({1.0, 0.0, 0.0, 1.0}, {0.0, 0.0});
    bad.biases[0][0] = std::numeric_limits<double>::infinity();
    const auto t = make_t({0.0, 0.0}, {1.0, 1.0}, 0, 0.0, false);
    CHECK_THROWS_AS(td_target(t, online, bad, 0.9, TdFlavor::dqn), NumericError);
}

TEST_CASE("td loss and gradient match a hand-worked single transition") {
    Rng rng(3u);
    StudentState student = make_student({2, 2}, 8, rng);
    student.online = linear_net({0.0, 0.0, 0.0, 0.0}, {0.1, 0.9});
    student.target = linear_net({1.0, 0.0, 0.0, 1.0}, {0.5, -0.25});

    const std::vector<Transition> batch{make_t({0.5, -1.0}, {0.2, 0.4}, 0, 1.0, false)};
    auto [loss, grads] = td_loss_and_grad(batch, student, 0.9, TdFlavor::dqn);
    // y = 1.63, Q(s, 0) = 0.1, so the loss is 1.53^2 and dQ = -3.06.
    CHECK(loss == doctest::Approx(2.3409).epsilon(1e-13));
    CHECK(grads.biases[0][0] == doctest::Approx(-3.06).epsilon(1e-13));
    CHECK(grads.biases[0][1] == 0.0);
    CHECK(grads.weights[0][0] == doctest::Approx(-3.06 * 0.5).epsilon(1e-13));
    CHECK(grads.weights[0][1] == doctest::Approx(-3.06 * -1.0).epsilon(1e-13));

    auto [loss2, grads2] = td_loss_and_grad(batch, student, 0.9, TdFlavor::double_dqn);
    (void)grads2;
    CHECK(loss2 == doctest::Approx((0.1 - 1.135) * (0.1 - 1.135)).epsilon(1e-13));
}

TEST_CASE("td gradient agrees with finite differences") {
    Rng rng(17u);
    StudentState student = make_student({3, 8, 2}, 16, rng);
    Rng trng(18u);
    student.target = make_mlp({3, 8, 2}, trng);

    std::vector<Transition> batch;
    Rng drng(19u);
    for (int i = 0; i < 4; ++i) {
        std::vector<double> s{drng.normal(), drng.normal(), drng.normal()};
        std::vector<double> sp{drng.normal(), drng.normal(), drng.normal()};
        batch.push_back(make_t(s, sp, drng.uniform_int(2), drng.normal(), i == 3));
    }

    // dqn flavor: the target ignores the online net, so the semi-gradient is
    // the full gradient and plain finite differences apply.
    auto [loss, grads] = td_loss_and_grad(batch, student, 0.9, TdFlavor::dqn);
    (void)loss;
    const double h = 1e-5;
    int checked = 0;
    for (int l = 0; l < student.online.layer_count(); ++l)
        for (std::size_t i = 0; i < student.online.weights[l].size(); i += 5) {
            double& w = student.online.weights[l][i];
            const double keep = w;
            w = keep + h;
            const double up = td_loss_and_grad(batch, student, 0.9, TdFlavor::dqn).first;
            w = keep - h;
            const double dn = td_loss_and_grad(batch, student, 0.9, TdFlavor::dqn).first;
            w = keep;
            const double fd = (up - dn) / (2.0 * h);
            const double an = grads.weights[l][i];
            if (std::abs(an) > 1e-8) {
                CHECK(std::abs(fd - an) / std::max(std::abs(an), 1e-12) < 1e-4);
                ++checked;
            }
        }
    CHECK(checked > 5);
}

TEST_CASE("td loss input validation") {
    Rng rng(5u);
    StudentState student = make_student({2, 2}, 8, rng);
    CHECK_THROWS_AS(td_loss_and_grad({}, student, 0.9, TdFlavor::dqn), ContractError);
    const std::vector<Transition> bad{make_t({0.0, 0.0}, {0.0, 0.0}, 7, 0.0, false)};
    CHECK_THROWS_AS(td_loss_and_grad(bad, student, 0.9, TdFlavor::dqn), ContractError);
}

TEST_CASE("fresh student ships synced nets, empty buffer, unstepped optimizer") {
    Rng rng(9u);
    const StudentState s = make_student({4, 16, 16, 2}, 123, rng);
    CHECK(params_checksum(s.online) == params_checksum(s.target));
    CHECK(s.buffer.size() == 0);
    CHECK(s.opt.step == 0);
    CHECK(count_parameters(s.online) == 4 * 16 + 16 + 16 * 16 + 16 + 16 * 2 + 2);
}

TEST_CASE("distilling a single-learner ensemble into its own copy is a no-op") {
    EnsembleConfig cfg;
    cfg.k = 1;
    cfg.weak_layer_sizes = {64, 32, 4};
    cfg.buffer_capacity = 500;
    cfg.batch_size = 8;
    cfg.eps_decay_steps = 100;
    std::vector<std::unique_ptr<Env>> envs;
    envs.push_back(make_env(grid_spec()));
    EpisodicBaseline baseline(0.99);
    Rng master(31u);
    WeakEnsemble ensemble(cfg, std::move(envs), &baseline, master);
    ensemble.phase1_episode();
    const PooledView pool = PooledView::snapshot(ensemble.buffers());
    REQUIRE(pool.size() > 0);

    Rng srng(32u);
    StudentState student = make_student({64, 32, 4}, 100, srng);
    student.online = ensemble.learners()[0].online;
    const auto before = params_checksum(student.online);

    Rng drng(33u);
    const auto curve = distill(student, pool, ensemble, 5, 8, drng);
    for (double loss : curve) CHECK(loss == 0.0);
    // Zero gradients drive a zero Adam update, bit for bit.
    CHECK(params_checksum(student.online) == before);
    CHECK(params_checksum(student.target) == before);
}

TEST_CASE("distillation converges toward the ensemble and seeds the target") {
    EnsembleConfig cfg;
    cfg.k = 2;
    cfg.weak_layer_sizes = {64, 32, 4};
    cfg.buffer_capacity = 1000;
    cfg.batch_size = 16;
    cfg.eps_decay_steps = 100;
    std::vector<std::unique_ptr<Env>> envs;
    for (int i = 0; i < 2; ++i) envs.push_back(make_env(grid_spec()));
    EpisodicBaseline baseline(0.99);
    Rng master(41u);
    WeakEnsemble ensemble(cfg, std::move(envs), &baseline, master);
    for (int e = 0; e < 3; ++e) ensemble.phase1_episode();
    const PooledView pool = PooledView::snapshot(ensemble.buffers());

    Rng srng(42u);
    StudentState student = make_student({64, 16, 16, 4}, 100, srng);
    Rng drng(43u);
    const auto curve = distill(student, pool, ensemble, 300, 32, drng);
    REQUIRE(curve.size() == 300);
    const double first = mean({curve.begin(), curve.begin() + 30});
    const double last = mean({curve.end() - 30, curve.end()});
    CHECK(last < 0.2 * first);
    CHECK(params_checksum(student.target) == params_checksum(student.online));
}

TEST_CASE("training loop is deterministic and validates its config") {
    auto run_once = [] {
        Rng master(55u);
        Rng init = master.stream(1);
        StudentState s = make_student({64, 16, 4}, 2000, init);
        auto env = make_env(grid_spec());
        TrainLoopConfig loop;
        loop.steps = 400;
        loop.eps_decay_steps = 200;
        Rng e = master.stream(2), a = master.stream(3), b = master.stream(4);
        const auto returns = dqn_train_loop(s, *env, loop, e, a, b);
        return std::make_pair(returns, params_checksum(s.online));
    };
    const auto r1 = run_once();
    const auto r2 = run_once();
    CHECK(r1.first == r2.first);
    CHECK(r1.second == r2.second);
    REQUIRE(!r1.first.empty());
    for (double g : r1.first) {
        CHECK(g <= 1.0);
        CHECK(g >= -0.01 * 60);
    }

    Rng master(56u);
    Rng init = master.stream(1);
    StudentState s = make_student({64, 16, 4}, 100, init);
    auto env = make_env(grid_spec());
    TrainLoopConfig bad;
    bad.steps = -1;
    bad.eps_decay_steps = 10;
    Rng e = master.stream(2), a = master.stream(3), b = master.stream(4);
    CHECK_THROWS_AS(dqn_train_loop(s, *env, bad, e, a, b), ContractError);
    bad.steps = 10;
    bad.eps_decay_steps = 0;
    CHECK_THROWS_AS(dqn_train_loop(s, *env, bad, e, a, b), ContractError);
}

TEST_CASE("evaluation is deterministic, shape-checked, and bounded") {
    Rng rng(61u);
    const MlpParams net = make_mlp({64, 16, 4}, rng);
    Rng e1(7u), e2(7u);
    const auto a = evaluate_policy(net, grid_spec(), 8, e1);
    const auto b = evaluate_policy(net, grid_spec(), 8, e2);
    CHECK(a.returns == b.returns);
    CHECK(a.returns.size() == 8);
    CHECK(a.success_rate >= 0.0);
    CHECK(a.success_rate <= 1.0);

    const MlpParams wrong = make_mlp({3, 4, 2}, rng);
    Rng e3(7u);
    CHECK_THROWS_AS(evaluate_policy(wrong, grid_spec(), 2, e3), ShapeError);
    CHECK_THROWS_AS(evaluate_policy(net, grid_spec(), 0, e3), ContractError);
}

TEST_CASE("per-environment success conventions") {
    CHECK(episode_success(EnvKind::cartpole, false, true));
    CHECK_FALSE(episode_success(EnvKind::cartpole, true, false));
    CHECK(episode_success(EnvKind::gridworld, true, false));
    CHECK_FALSE(episode_success(EnvKind::gridworld, false, true));
    CHECK(episode_success(EnvKind::acrobot, true, false));
    CHECK_FALSE(episode_success(EnvKind::acrobot, false, true));
}

TEST_CASE("reference, worst-case, and failure thresholds per environment") {
    EnvSpec cp;
    cp.kind = EnvKind::cartpole;
    CHECK(optimal_reference(cp) == doctest::Approx(500.0));
    CHECK(worst_case_return(cp) == doctest::Approx(0.0));
    CHECK(failure_threshold(cp) == doctest::Approx(250.0));
    cp.max_steps_override = 200;
    CHECK(optimal_reference(cp) == doctest::Approx(200.0));
    CHECK(failure_threshold(cp) == doctest::Approx(100.0));

    EnvSpec ab;
    ab.kind = EnvKind::acrobot;
    CHECK(optimal_reference(ab) == doctest::Approx(-100.0));
    CHECK(worst_case_return(ab) == doctest::Approx(-500.0));
    // Negative scale: halfway between worst and reference.
    CHECK(failure_threshold(ab) == doctest::Approx(-300.0));

    EnvSpec gw = grid_spec();
    CHECK(worst_case_return(gw) == doctest::Approx(-0.01 * 60));
    const double opt = optimal_reference(gw);
    CHECK(opt > 0.0);
    CHECK(failure_threshold(gw) == doctest::Approx(0.5 * opt));
}

TEST_CASE("run config round-trips through json with a stable hash") {
    RunConfig cfg;
    cfg.kind = Algorithm::sat_enq;
    cfg.label = "sat_enq_probe";
    cfg.env = grid_spec();
    cfg.seed = 99;
    cfg.total_steps = 1234;
    cfg.sat.margin = 0.75;
    cfg.polish_lr = 2e-4;
    cfg.phase1_per_learner = false;

    const auto j = run_config_to_json(cfg);
    const RunConfig back = run_config_from_json(j);
    CHECK(run_config_to_json(back).dump() == j.dump());
    CHECK(run_config_hash(back) == run_config_hash(cfg));

    RunConfig other = cfg;
    other.sat.margin = 0.5;
    CHECK(run_config_hash(other) != run_config_hash(cfg));
}

TEST_CASE("run metrics round-trip through json") {
    Rng rng(71u);
    RunMetrics m;
    m.algorithm = "double_dqn";
    m.env_name = "acrobot";
    m.seed = 4;
    m.config_hash = 0xdeadbeefcafe;
    m.eval_return_mean = -123.5;
    m.eval_return_std = 17.25;
    m.success_rate = 0.85;
    m.eval_returns = {-120.0, -127.0};
    m.failed = false;
    m.failure_reason = "";
    m.train_curve = {-500.0, -400.0, -288.5};
    m.env_steps = 20000;
    m.phase1_env_steps = 12000;
    m.phase1_rounds = 37;
    m.diversity = 0.42;
    m.has_diversity = true;
    m.distill_first_window = 3.5;
    m.distill_final_window = 0.002;
    m.wall_seconds = 12.75;
    m.student_params = 4610;
    m.weak_params_total = 904;
    m.baseline_params = 193;
    m.final_policy = mlp_to_json(make_mlp({2, 3, 2}, rng));
    m.has_policy = true;

    const RunMetrics back = RunMetrics::from_json(m.to_json());
    CHECK(back.to_json().dump() == m.to_json().dump());
    CHECK(back.eval_returns == m.eval_returns);
    CHECK(back.train_curve == m.train_curve);
    CHECK(back.phase1_rounds == 37);
}

TEST_CASE("execute_run converts numeric divergence into a failed record") {
    RunConfig cfg;
    cfg.kind = Algorithm::dqn;
    cfg.label = "dqn";
    cfg.env = grid_spec();
    cfg.total_steps = 400;
    cfg.opt.lr = 1e12;  // guaranteed blow-up within a few updates
    cfg.eval_episodes = 4;

    const RunMetrics m = execute_run(cfg);
    CHECK(m.failed);
    CHECK(!m.failure_reason.empty());
    CHECK(m.eval_return_mean == doctest::Approx(worst_case_return(cfg.env)));
    CHECK_FALSE(m.has_policy);
    CHECK(m.wall_seconds >= 0.0);
    CHECK(m.algorithm == "dqn");
}

TEST_CASE("run dispatch and config validation reject bad input") {
    RunConfig cfg;
    cfg.kind = Algorithm::sat_enq;
    cfg.env = grid_spec();
    CHECK_THROWS_AS(run_baseline(cfg), ContractError);

    RunConfig bad = cfg;
    bad.baseline_decay = 1.5;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = cfg;
    bad.polish_lr = 0.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = cfg;
    bad.eval_episodes = 0;
    CHECK_THROWS_AS(validate(bad), ConfigError);

    CHECK(algorithm_name(Algorithm::sat_enq) == "sat_enq");
    CHECK(algorithm_name(Algorithm::dqn) == "dqn");
    CHECK(algorithm_name(Algorithm::double_dqn) == "double_dqn");
}
