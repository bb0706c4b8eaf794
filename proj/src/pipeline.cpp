#include "satenq/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "satenq/errors.hpp"
#include "satenq/gridworld.hpp"
#include "satenq/serialize.hpp"
#include "satenq/stats.hpp"

namespace satenq {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

int argmax_action(const std::vector<double>& q) {
    return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

std::vector<int> build_layers(int in, int hidden, int hidden_layers, int out) {
    std::vector<int> sizes{in};
    for (int i = 0; i < hidden_layers; ++i) sizes.push_back(hidden);
    sizes.push_back(out);
    return sizes;
}

double window_mean(const std::vector<double>& xs, bool first) {
    if (xs.empty()) return 0.0;
    const std::size_t w = std::max<std::size_t>(1, xs.size() / 10);
    std::vector<double> slice;
    if (first)
        slice.assign(xs.begin(), xs.begin() + w);
    else
        slice.assign(xs.end() - w, xs.end());
    return mean(slice);
}

std::string hinge_direction_name(HingeDirection d) {
    return d == HingeDirection::as_printed ? "as_printed" : "as_prose";
}

HingeDirection hinge_direction_from_name(const std::string& s) {
    if (s == "as_printed") return HingeDirection::as_printed;
    if (s == "as_prose") return HingeDirection::as_prose;
    throw ConfigError("unknown hinge_direction: " + s);
}

}  // namespace

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::sat_enq: return "sat_enq";
        case Algorithm::dqn: return "dqn";
        case Algorithm::double_dqn: return "double_dqn";
    }
    throw ConfigError("algorithm_name: unknown algorithm");
}

void validate(const RunConfig& cfg) {
    validate(cfg.sat);
    if (cfg.total_steps <= 0) throw ConfigError("RunConfig: total_steps must be positive");
    if (cfg.phase1_fraction <= 0.0 || cfg.phase1_fraction > 1.0)
        throw ConfigError("RunConfig: phase1_fraction must lie in (0, 1]");
    if (cfg.n_distill < 0) throw ConfigError("RunConfig: n_distill must be >= 0");
    if (cfg.k < 1) throw ConfigError("RunConfig: k must be >= 1");
    if (cfg.batch_size < 1) throw ConfigError("RunConfig: batch_size must be >= 1");
    if (cfg.weak_hidden < 1 || cfg.student_hidden < 1 || cfg.baseline_hidden < 1)
        throw ConfigError("RunConfig: hidden widths must be >= 1");
    if (cfg.weak_hidden_layers < 1 || cfg.student_hidden_layers < 1)
        throw ConfigError("RunConfig: hidden layer counts must be >= 1");
    if (cfg.baseline_decay < 0.0 || cfg.baseline_decay > 1.0)
        throw ConfigError("RunConfig: baseline_decay must lie in [0, 1]");
    if (cfg.eval_episodes < 1) throw ConfigError("RunConfig: eval_episodes must be >= 1");
    if (cfg.eps_decay_fraction <= 0.0 || cfg.eps_decay_fraction > 1.0 ||
        cfg.polish_eps_decay_fraction <= 0.0 || cfg.polish_eps_decay_fraction > 1.0)
        throw ConfigError("RunConfig: eps decay fractions must lie in (0, 1]");
    if (cfg.polish_lr <= 0.0) throw ConfigError("RunConfig: polish_lr must be positive");
    if (cfg.baseline_train_steps < 1)
        throw ConfigError("RunConfig: baseline_train_steps must be >= 1");
    if (cfg.env.action_noise_prob < 0.0 || cfg.env.action_noise_prob > 1.0)
        throw ConfigError("RunConfig: action_noise_prob must lie in [0, 1]");
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
    return {{"kind", algorithm_name(cfg.kind)},
            {"label", cfg.label},
            {"env",
             {{"kind", env_kind_name(cfg.env.kind)},
              {"gridworld",
               {{"size", cfg.env.gridworld.size},
                {"slip_prob", cfg.env.gridworld.slip_prob},
                {"step_penalty", cfg.env.gridworld.step_penalty},
                {"goal_reward", cfg.env.gridworld.goal_reward},
                {"max_steps", cfg.env.gridworld.max_steps}}},
              {"action_noise_prob", cfg.env.action_noise_prob},
              {"max_steps_override", cfg.env.max_steps_override}}},
            {"seed", cfg.seed},
            {"total_steps", cfg.total_steps},
            {"phase1_fraction", cfg.phase1_fraction},
            {"phase1_per_learner", cfg.phase1_per_learner},
            {"n_distill", cfg.n_distill},
            {"do_polish", cfg.do_polish},
            {"k", cfg.k},
            {"batch_size", cfg.batch_size},
            {"sat",
             {{"margin", cfg.sat.margin},
              {"hinge_weight", cfg.sat.hinge_weight},
              {"gamma", cfg.sat.gamma},
              {"target_sync_interval", cfg.sat.target_sync_interval},
              {"satisficing", cfg.sat.satisficing},
              {"hinge_direction", hinge_direction_name(cfg.sat.hinge_direction)}}},
            {"opt",
             {{"lr", cfg.opt.lr},
              {"beta1", cfg.opt.beta1},
              {"beta2", cfg.opt.beta2},
              {"eps", cfg.opt.eps}}},
            {"weak_hidden", cfg.weak_hidden},
            {"weak_hidden_layers", cfg.weak_hidden_layers},
            {"student_hidden", cfg.student_hidden},
            {"student_hidden_layers", cfg.student_hidden_layers},
            {"weak_buffer_capacity", cfg.weak_buffer_capacity},
            {"student_buffer_capacity", cfg.student_buffer_capacity},
            {"baseline_decay", cfg.baseline_decay},
            {"baseline_hidden", cfg.baseline_hidden},
            {"baseline_buffer_capacity", cfg.baseline_buffer_capacity},
            {"baseline_batch", cfg.baseline_batch},
            {"baseline_train_steps", cfg.baseline_train_steps},
            {"eps_start", cfg.eps_start},
            {"eps_end", cfg.eps_end},
            {"eps_decay_fraction", cfg.eps_decay_fraction},
            {"polish_eps_start", cfg.polish_eps_start},
            {"polish_eps_end", cfg.polish_eps_end},
            {"polish_eps_decay_fraction", cfg.polish_eps_decay_fraction},
            {"polish_lr", cfg.polish_lr},
            {"polish_warm_buffer", cfg.polish_warm_buffer},
            {"eval_episodes", cfg.eval_episodes},
            {"diversity_probe_states", cfg.diversity_probe_states}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "sat_enq")
        cfg.kind = Algorithm::sat_enq;
    else if (kind == "dqn")
        cfg.kind = Algorithm::dqn;
    else if (kind == "double_dqn")
        cfg.kind = Algorithm::double_dqn;
    else
        throw ConfigError("run_config_from_json: unknown kind " + kind);
    cfg.label = j.at("label").get<std::string>();
    const auto& je = j.at("env");
    cfg.env.kind = env_kind_from_name(je.at("kind").get<std::string>());
    const auto& jg = je.at("gridworld");
    cfg.env.gridworld.size = jg.at("size").get<int>();
    cfg.env.gridworld.slip_prob = jg.at("slip_prob").get<double>();
    cfg.env.gridworld.step_penalty = jg.at("step_penalty").get<double>();
    cfg.env.gridworld.goal_reward = jg.at("goal_reward").get<double>();
    cfg.env.gridworld.max_steps = jg.at("max_steps").get<int>();
    cfg.env.action_noise_prob = je.at("action_noise_prob").get<double>();
    cfg.env.max_steps_override = je.at("max_steps_override").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.total_steps = j.at("total_steps").get<long long>();
    cfg.phase1_fraction = j.at("phase1_fraction").get<double>();
    cfg.phase1_per_learner = j.at("phase1_per_learner").get<bool>();
    cfg.n_distill = j.at("n_distill").get<int>();
    cfg.do_polish = j.at("do_polish").get<bool>();
    cfg.k = j.at("k").get<int>();
    cfg.batch_size = j.at("batch_size").get<int>();
    const auto& js = j.at("sat");
    cfg.sat.margin = js.at("margin").get<double>();
    cfg.sat.hinge_weight = js.at("hinge_weight").get<double>();
    cfg.sat.gamma = js.at("gamma").get<double>();
    cfg.sat.target_sync_interval = js.at("target_sync_interval").get<int>();
    cfg.sat.satisficing = js.at("satisficing").get<bool>();
    cfg.sat.hinge_direction = hinge_direction_from_name(js.at("hinge_direction").get<std::string>());
    const auto& jo = j.at("opt");
    cfg.opt.lr = jo.at("lr").get<double>();
    cfg.opt.beta1 = jo.at("beta1").get<double>();
    cfg.opt.beta2 = jo.at("beta2").get<double>();
    cfg.opt.eps = jo.at("eps").get<double>();
    cfg.weak_hidden = j.at("weak_hidden").get<int>();
    cfg.weak_hidden_layers = j.at("weak_hidden_layers").get<int>();
    cfg.student_hidden = j.at("student_hidden").get<int>();
    cfg.student_hidden_layers = j.at("student_hidden_layers").get<int>();
    cfg.weak_buffer_capacity = j.at("weak_buffer_capacity").get<std::size_t>();
    cfg.student_buffer_capacity = j.at("student_buffer_capacity").get<std::size_t>();
    cfg.baseline_decay = j.at("baseline_decay").get<double>();
    cfg.baseline_hidden = j.at("baseline_hidden").get<int>();
    cfg.baseline_buffer_capacity = j.at("baseline_buffer_capacity").get<int>();
    cfg.baseline_batch = j.at("baseline_batch").get<int>();
    cfg.baseline_train_steps = j.at("baseline_train_steps").get<int>();
    cfg.eps_start = j.at("eps_start").get<double>();
    cfg.eps_end = j.at("eps_end").get<double>();
    cfg.eps_decay_fraction = j.at("eps_decay_fraction").get<double>();
    cfg.polish_eps_start = j.at("polish_eps_start").get<double>();
    cfg.polish_eps_end = j.at("polish_eps_end").get<double>();
    cfg.polish_eps_decay_fraction = j.at("polish_eps_decay_fraction").get<double>();
    cfg.polish_lr = j.at("polish_lr").get<double>();
    cfg.polish_warm_buffer = j.at("polish_warm_buffer").get<bool>();
    cfg.eval_episodes = j.at("eval_episodes").get<int>();
    cfg.diversity_probe_states = j.at("diversity_probe_states").get<int>();
    return cfg;
}

std::uint64_t run_config_hash(const RunConfig& cfg) {
    // Seed excluded: records from different seeds of the same experiment
    // share one config identity.
    nlohmann::json j = run_config_to_json(cfg);
    j.erase("seed");
    return fnv1a(j.dump());
}

nlohmann::json RunMetrics::to_json() const {
    return {{"schema_version", 1},
            {"algorithm", algorithm},
            {"env", env_name},
            {"seed", seed},
            {"config_hash", config_hash},
            {"eval_return_mean", eval_return_mean},
            {"eval_return_std", eval_return_std},
            {"success_rate", success_rate},
            {"eval_returns", eval_returns},
            {"failed", failed},
            {"failure_reason", failure_reason},
            {"train_curve", train_curve},
            {"env_steps", env_steps},
            {"phase1_env_steps", phase1_env_steps},
            {"phase1_rounds", phase1_rounds},
            {"diversity", diversity},
            {"has_diversity", has_diversity},
            {"distill_first_window", distill_first_window},
            {"distill_final_window", distill_final_window},
            {"wall_seconds", wall_seconds},
            {"student_params", student_params},
            {"weak_params_total", weak_params_total},
            {"baseline_params", baseline_params},
            {"final_policy", final_policy},
            {"has_policy", has_policy}};
}

RunMetrics RunMetrics::from_json(const nlohmann::json& j) {
    RunMetrics m;
    m.algorithm = j.at("algorithm").get<std::string>();
    m.env_name = j.at("env").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_hash = j.at("config_hash").get<std::uint64_t>();
    m.eval_return_mean = j.at("eval_return_mean").get<double>();
    m.eval_return_std = j.at("eval_return_std").get<double>();
    m.success_rate = j.at("success_rate").get<double>();
    m.eval_returns = j.at("eval_returns").get<std::vector<double>>();
    m.failed = j.at("failed").get<bool>();
    m.failure_reason = j.at("failure_reason").get<std::string>();
    m.train_curve = j.at("train_curve").get<std::vector<double>>();
    m.env_steps = j.at("env_steps").get<long long>();
    m.phase1_env_steps = j.at("phase1_env_steps").get<long long>();
    m.phase1_rounds = j.at("phase1_rounds").get<int>();
    m.diversity = j.at("diversity").get<double>();
    m.has_diversity = j.at("has_diversity").get<bool>();
    m.distill_first_window = j.at("distill_first_window").get<double>();
    m.distill_final_window = j.at("distill_final_window").get<double>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
    m.student_params = j.at("student_params").get<long long>();
    m.weak_params_total = j.at("weak_params_total").get<long long>();
    m.baseline_params = j.at("baseline_params").get<long long>();
    m.final_policy = j.at("final_policy");
    m.has_policy = j.at("has_policy").get<bool>();
    return m;
}

bool episode_success(EnvKind kind, bool terminal, bool truncated) {
    // CartPole succeeds by surviving to the cap; the other two succeed by
    // reaching their terminal condition before it.
    if (kind == EnvKind::cartpole) return truncated;
    return terminal && !truncated;
}

double optimal_reference(const EnvSpec& spec) {
    switch (spec.kind) {
        case EnvKind::gridworld: return gridworld_optimal(spec.gridworld).optimal_return;
        case EnvKind::cartpole:
            return spec.max_steps_override > 0 ? spec.max_steps_override : 500.0;
        case EnvKind::acrobot: return -100.0;
    }
    throw ConfigError("optimal_reference: unknown environment kind");
}

double worst_case_return(const EnvSpec& spec) {
    switch (spec.kind) {
        case EnvKind::gridworld:
            return spec.gridworld.step_penalty * spec.gridworld.max_steps;
        case EnvKind::cartpole: return 0.0;
        case EnvKind::acrobot:
            return -(spec.max_steps_override > 0 ? spec.max_steps_override : 500.0);
    }
    throw ConfigError("worst_case_return: unknown environment kind");
}

double failure_threshold(const EnvSpec& spec) {
    const double ref = optimal_reference(spec);
    if (ref > 0.0) return 0.5 * ref;
    // Negative-return scale: halfway between the worst case and the
    // reference plays the role of "50% of optimal".
    return 0.5 * (worst_case_return(spec) + ref);
}

EvalResult evaluate_policy(const MlpParams& net, const EnvSpec& spec, int episodes, Rng& rng) {
    if (episodes < 1) throw ContractError("evaluate_policy: episodes must be >= 1");
    auto env = make_env(spec);
    if (env->observation_dim() != net.input_dim() || env->action_count() != net.output_dim())
        throw ShapeError("evaluate_policy: net shape does not match environment");
    EvalResult res;
    int successes = 0;
    for (int e = 0; e < episodes; ++e) {
        std::vector<double> state = env->reset(rng);
        double episode_return = 0.0;
        EnvStepResult last;
        while (!env->episode_done()) {
            const int action = argmax_action(forward(net, state));
            last = env->step(action, rng);
            episode_return += last.reward;
            state = last.next_state;
        }
        res.returns.push_back(episode_return);
        if (episode_success(spec.kind, last.done && !last.truncated, last.truncated)) ++successes;
    }
    res.mean = mean(res.returns);
    res.stddev = res.returns.size() >= 2 ? sample_stddev(res.returns) : 0.0;
    res.success_rate = static_cast<double>(successes) / episodes;
    return res;
}

StudentState make_student(const std::vector<int>& layer_sizes, std::size_t buffer_capacity,
                          Rng& rng, AdamConfig opt_cfg) {
    MlpParams online = make_mlp(layer_sizes, rng);
    MlpParams target = online;
    AdamState opt = make_adam(online, opt_cfg);
    return StudentState{std::move(online), std::move(target), std::move(opt),
                        ReplayBuffer(buffer_capacity)};
}

double td_target(const Transition& t, const MlpParams& online, const MlpParams& target,
                 double gamma, TdFlavor flavor) {
    if (t.done) return t.reward;
    const auto q_target = forward(target, t.next_state);
    double boot;
    if (flavor == TdFlavor::dqn) {
        boot = *std::max_element(q_target.begin(), q_target.end());
    } else {
        // Action chosen by the online net, valued by the target net.
        const auto q_online = forward(online, t.next_state);
        boot = q_target[argmax_action(q_online)];
    }
    if (!std::isfinite(boot)) throw NumericError("td_target: non-finite bootstrap value");
    return t.reward + gamma * boot;
}

std::pair<double, MlpGrads> td_loss_and_grad(const std::vector<Transition>& batch,
                                             StudentState& student, double gamma,
                                             TdFlavor flavor) {
    if (batch.empty()) throw ContractError("td_loss_and_grad: empty batch");
    MlpGrads grads = zero_grads_like(student.online);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    const int n_actions = student.online.output_dim();
    double loss = 0.0;
    ForwardCache cache;
    std::vector<double> dout(n_actions);
    for (const Transition& t : batch) {
        if (t.action < 0 || t.action >= n_actions)
            throw ContractError("td_loss_and_grad: action out of range");
        const double y = td_target(t, student.online, student.target, gamma, flavor);
        const auto q_all = forward_cached(student.online, t.state, cache);
        const double td = q_all[t.action] - y;
        if (!std::isfinite(td)) throw NumericError("td_loss_and_grad: non-finite TD error");
        loss += td * td * inv_n;
        std::fill(dout.begin(), dout.end(), 0.0);
        dout[t.action] = 2.0 * td * inv_n;
        backward(student.online, cache, dout, grads);
    }
    return {loss, std::move(grads)};
}

std::vector<double> distill(StudentState& student, const PooledView& pool,
                            const WeakEnsemble& ensemble, int steps, int batch_size, Rng& rng) {
    if (pool.size() == 0) throw ContractError("distill: empty pool");
    const int n_actions = student.online.output_dim();
    std::vector<double> curve;
    curve.reserve(steps);
    ForwardCache cache;
    std::vector<double> dout(n_actions);
    for (int step = 0; step < steps; ++step) {
        const auto batch = pool.sample(batch_size, rng);
        MlpGrads grads = zero_grads_like(student.online);
        const double inv = 1.0 / (static_cast<double>(batch.size()) * n_actions);
        double loss = 0.0;
        for (const Transition& t : batch) {
            const auto teacher = ensemble.q_ens(t.state);
            const auto out = forward_cached(student.online, t.state, cache);
            for (int a = 0; a < n_actions; ++a) {
                const double err = out[a] - teacher[a];
                loss += err * err * inv;
                dout[a] = 2.0 * err * inv;
            }
            backward(student.online, cache, dout, grads);
        }
        if (!std::isfinite(loss)) throw NumericError("distill: non-finite loss");
        adam_step(student.online, grads, student.opt);
        curve.push_back(loss);
    }
    // Distillation also seeds the polish target net.
    student.target = student.online;
    return curve;
}

std::vector<double> dqn_train_loop(StudentState& student, Env& env, const TrainLoopConfig& cfg,
                                   Rng& env_rng, Rng& action_rng, Rng& batch_rng) {
    if (cfg.steps < 0) throw ContractError("dqn_train_loop: negative step budget");
    if (cfg.eps_decay_steps <= 0) throw ContractError("dqn_train_loop: eps_decay_steps must be > 0");
    std::vector<double> episode_returns;
    long long steps_done = 0;
    int episodes_done = 0;
    while (steps_done < cfg.steps) {
        std::vector<double> state = env.reset(env_rng);
        double episode_return = 0.0;
        while (!env.episode_done() && steps_done < cfg.steps) {
            const double frac = std::min(
                1.0, static_cast<double>(steps_done) / static_cast<double>(cfg.eps_decay_steps));
            const double eps = cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac;
            int action;
            if (action_rng.uniform() < eps) {
                action = action_rng.uniform_int(env.action_count());
            } else {
                action = argmax_action(forward(student.online, state));
            }
            const EnvStepResult res = env.step(action, env_rng);
            episode_return += res.reward;
            student.buffer.push(
                Transition{state, res.next_state, action, res.reward, res.done && !res.truncated});
            const std::size_t n = std::min<std::size_t>(cfg.batch_size, student.buffer.size());
            const auto batch = student.buffer.sample(n, batch_rng);
            auto [loss, grads] = td_loss_and_grad(batch, student, cfg.gamma, cfg.flavor);
            (void)loss;
            adam_step(student.online, grads, student.opt);
            state = res.next_state;
            ++steps_done;
        }
        if (env.episode_done()) {
            episode_returns.push_back(episode_return);
            ++episodes_done;
            if (episodes_done % cfg.target_sync_interval == 0) student.target = student.online;
        }
    }
    return episode_returns;
}

RunMetrics run_sat_enq(const RunConfig& cfg) {
    validate(cfg);
    Rng master(cfg.seed);
    auto probe_env = make_env(cfg.env);
    const int in = probe_env->observation_dim();
    const int out = probe_env->action_count();

    RunMetrics m;
    m.algorithm = cfg.label;
    m.env_name = env_kind_name(cfg.env.kind);
    m.seed = cfg.seed;
    m.config_hash = run_config_hash(cfg);

    // Shared aspiration baseline: table for discrete states, net otherwise.
    std::unique_ptr<Baseline> baseline;
    if (cfg.env.kind == EnvKind::gridworld) {
        baseline = std::make_unique<EpisodicBaseline>(cfg.baseline_decay);
    } else {
        Rng binit = master.stream(5);
        baseline = std::make_unique<LearnedBaseline>(in, binit, cfg.baseline_hidden, cfg.opt.lr,
                                                     cfg.baseline_buffer_capacity,
                                                     cfg.baseline_batch,
                                                     cfg.baseline_train_steps);
    }

    const long long phase1_share =
        std::max<long long>(1, std::llround(cfg.phase1_fraction * cfg.total_steps));
    const long long phase1_budget = cfg.phase1_per_learner ? phase1_share * cfg.k : phase1_share;

    EnsembleConfig ens_cfg;
    ens_cfg.k = cfg.k;
    ens_cfg.weak_layer_sizes = build_layers(in, cfg.weak_hidden, cfg.weak_hidden_layers, out);
    ens_cfg.buffer_capacity = cfg.weak_buffer_capacity;
    ens_cfg.batch_size = cfg.batch_size;
    ens_cfg.sat = cfg.sat;
    ens_cfg.opt = cfg.opt;
    ens_cfg.eps_start = cfg.eps_start;
    ens_cfg.eps_end = cfg.eps_end;
    ens_cfg.eps_decay_steps =
        std::max<long long>(1, std::llround(cfg.eps_decay_fraction * phase1_budget));

    std::vector<std::unique_ptr<Env>> envs;
    for (int i = 0; i < cfg.k; ++i) envs.push_back(make_env(cfg.env));
    WeakEnsemble ensemble(ens_cfg, std::move(envs), baseline.get(), master);

    // ---- Phase 1: satisficing weak learners ----
    while (ensemble.env_steps() < phase1_budget) {
        const auto returns = ensemble.phase1_episode();
        m.train_curve.push_back(mean(returns));
    }
    m.phase1_rounds = ensemble.episodes();
    m.phase1_env_steps = ensemble.env_steps();

    std::vector<std::uint64_t> weak_checksums;
    for (const auto& learner : ensemble.learners()) {
        weak_checksums.push_back(params_checksum(learner.online));
        m.weak_params_total += count_parameters(learner.online);
    }
    m.baseline_params = baseline->parameter_count();

    const PooledView pool = PooledView::snapshot(ensemble.buffers());

    // Ensemble disagreement on states the learners actually saw.
    if (pool.size() > 0 && cfg.diversity_probe_states > 0) {
        Rng probe_rng = master.stream(6);
        std::vector<std::vector<double>> probe_states;
        const int n_probe = std::min<int>(cfg.diversity_probe_states, static_cast<int>(pool.size()));
        for (int i = 0; i < n_probe; ++i) probe_states.push_back(pool.sample_one(probe_rng).state);
        m.diversity = ensemble.diversity(probe_states);
        m.has_diversity = true;
    }

    // ---- Phase 2: distill, then polish ----
    Rng student_init = master.stream(10);
    StudentState student =
        make_student(build_layers(in, cfg.student_hidden, cfg.student_hidden_layers, out),
                     cfg.student_buffer_capacity, student_init, cfg.opt);
    m.student_params = count_parameters(student.online);

    if (cfg.n_distill > 0) {
        Rng distill_rng = master.stream(11);
        const auto curve = distill(student, pool, ensemble, cfg.n_distill, cfg.batch_size,
                                   distill_rng);
        m.distill_first_window = window_mean(curve, true);
        m.distill_final_window = window_mean(curve, false);
    }

    // Polish always gets the non-phase-1 share of the nominal budget; under
    // the per-learner reading Phase 1 consumes more than its share, which the
    // env_steps accounting below reports.
    const long long polish_budget =
        cfg.do_polish ? std::max<long long>(0, cfg.total_steps - phase1_share) : 0;
    if (polish_budget > 0) {
        auto polish_env = make_env(cfg.env);
        student.opt.cfg.lr = cfg.polish_lr;
        if (cfg.polish_warm_buffer) {
            // Interleave by age across learners so the ring buffer, if it
            // overflows, evicts the globally oldest experience first.
            const auto buffers = ensemble.buffers();
            std::size_t longest = 0;
            for (const auto* b : buffers) longest = std::max(longest, b->size());
            for (std::size_t i = 0; i < longest; ++i)
                for (const auto* b : buffers)
                    if (i < b->size()) student.buffer.push(b->at(i));
        }
        TrainLoopConfig loop;
        loop.flavor = TdFlavor::double_dqn;
        loop.steps = polish_budget;
        loop.gamma = cfg.sat.gamma;
        loop.batch_size = cfg.batch_size;
        loop.eps_start = cfg.polish_eps_start;
        loop.eps_end = cfg.polish_eps_end;
        loop.eps_decay_steps =
            std::max<long long>(1, std::llround(cfg.polish_eps_decay_fraction * polish_budget));
        loop.target_sync_interval = cfg.sat.target_sync_interval;
        Rng env_rng = master.stream(12), action_rng = master.stream(13),
            batch_rng = master.stream(14);
        const auto episode_returns =
            dqn_train_loop(student, *polish_env, loop, env_rng, action_rng, batch_rng);
        m.train_curve.insert(m.train_curve.end(), episode_returns.begin(), episode_returns.end());
    }
    m.env_steps = m.phase1_env_steps + polish_budget;

    // Phase separation: Phase 2 must leave the weak learners untouched.
    for (int i = 0; i < ensemble.k(); ++i)
        if (params_checksum(ensemble.learners()[i].online) != weak_checksums[i])
            throw ContractError("run_sat_enq: weak learner parameters changed after Phase 1");

    Rng eval_rng = master.stream(20);
    const EvalResult eval = evaluate_policy(student.online, cfg.env, cfg.eval_episodes, eval_rng);
    m.eval_returns = eval.returns;
    m.eval_return_mean = eval.mean;
    m.eval_return_std = eval.stddev;
    m.success_rate = eval.success_rate;
    m.failed = eval.mean < failure_threshold(cfg.env);
    m.final_policy = mlp_to_json(student.online);
    m.has_policy = true;
    return m;
}

RunMetrics run_baseline(const RunConfig& cfg) {
    validate(cfg);
    if (cfg.kind == Algorithm::sat_enq)
        throw ContractError("run_baseline: use run_sat_enq for the sat_enq algorithm");
    Rng master(cfg.seed);
    auto env = make_env(cfg.env);
    const int in = env->observation_dim();
    const int out = env->action_count();

    RunMetrics m;
    m.algorithm = cfg.label;
    m.env_name = env_kind_name(cfg.env.kind);
    m.seed = cfg.seed;
    m.config_hash = run_config_hash(cfg);

    Rng init = master.stream(10);
    StudentState agent =
        make_student(build_layers(in, cfg.student_hidden, cfg.student_hidden_layers, out),
                     cfg.student_buffer_capacity, init, cfg.opt);
    m.student_params = count_parameters(agent.online);

    TrainLoopConfig loop;
    loop.flavor = cfg.kind == Algorithm::dqn ? TdFlavor::dqn : TdFlavor::double_dqn;
    loop.steps = cfg.total_steps;
    loop.gamma = cfg.sat.gamma;
    loop.batch_size = cfg.batch_size;
    loop.eps_start = cfg.eps_start;
    loop.eps_end = cfg.eps_end;
    loop.eps_decay_steps =
        std::max<long long>(1, std::llround(cfg.eps_decay_fraction * cfg.total_steps));
    loop.target_sync_interval = cfg.sat.target_sync_interval;
    Rng env_rng = master.stream(12), action_rng = master.stream(13), batch_rng = master.stream(14);
    m.train_curve = dqn_train_loop(agent, *env, loop, env_rng, action_rng, batch_rng);
    m.env_steps = cfg.total_steps;

    Rng eval_rng = master.stream(20);
    const EvalResult eval = evaluate_policy(agent.online, cfg.env, cfg.eval_episodes, eval_rng);
    m.eval_returns = eval.returns;
    m.eval_return_mean = eval.mean;
    m.eval_return_std = eval.stddev;
    m.success_rate = eval.success_rate;
    m.failed = eval.mean < failure_threshold(cfg.env);
    m.final_policy = mlp_to_json(agent.online);
    m.has_policy = true;
    return m;
}

RunMetrics execute_run(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    RunMetrics m;
    try {
        m = cfg.kind == Algorithm::sat_enq ? run_sat_enq(cfg) : run_baseline(cfg);
    } catch (const NumericError& e) {
        // Divergence is a result, not a crash: record the worst-case return
        // and flag the run as a catastrophic failure.
        m = RunMetrics{};
        m.algorithm = cfg.label;
        m.env_name = env_kind_name(cfg.env.kind);
        m.seed = cfg.seed;
        m.config_hash = run_config_hash(cfg);
        m.failed = true;
        m.failure_reason = e.what();
        m.eval_return_mean = worst_case_return(cfg.env);
        m.eval_return_std = 0.0;
        m.success_rate = 0.0;
        m.final_policy = nullptr;
        m.has_policy = false;
    }
    const auto t1 = std::chrono::steady_clock::now();
    m.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    return m;
}

}  // namespace satenq
