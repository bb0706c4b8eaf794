#include "satenq/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

#include "satenq/errors.hpp"
#include "satenq/serialize.hpp"
#include "satenq/stats.hpp"

namespace fs = std::filesystem;

namespace satenq {

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& why) {
    throw ConfigError("config." + path + ": " + why);
}

double expect_number(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) bad_field(path, "expected a number");
    return j.get<double>();
}

long long expect_integer(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number_integer()) bad_field(path, "expected an integer");
    return j.get<long long>();
}

bool expect_boolean(const nlohmann::json& j, const std::string& path) {
    if (!j.is_boolean()) bad_field(path, "expected a boolean");
    return j.get<bool>();
}

std::string expect_string(const nlohmann::json& j, const std::string& path) {
    if (!j.is_string()) bad_field(path, "expected a string");
    return j.get<std::string>();
}

void apply_env_object(const nlohmann::json& j, EnvSpec& env) {
    if (!j.is_object()) bad_field("env", "expected an object");
    bool have_kind = false;
    for (const auto& [key, value] : j.items()) {
        const std::string path = "env." + key;
        if (key == "kind") {
            env.kind = env_kind_from_name(expect_string(value, path));
            have_kind = true;
        } else if (key == "size") {
            env.gridworld.size = static_cast<int>(expect_integer(value, path));
        } else if (key == "slip_prob") {
            env.gridworld.slip_prob = expect_number(value, path);
        } else if (key == "step_penalty") {
            env.gridworld.step_penalty = expect_number(value, path);
        } else if (key == "goal_reward") {
            env.gridworld.goal_reward = expect_number(value, path);
        } else if (key == "max_steps") {
            env.gridworld.max_steps = static_cast<int>(expect_integer(value, path));
        } else if (key == "action_noise_prob") {
            env.action_noise_prob = expect_number(value, path);
        } else if (key == "max_steps_override") {
            env.max_steps_override = static_cast<int>(expect_integer(value, path));
        } else {
            bad_field(path, "unknown key");
        }
    }
    if (!have_kind) bad_field("env.kind", "required");
}

void apply_override(const std::string& key, const nlohmann::json& value, RunConfig& cfg) {
    const std::string path = "overrides." + key;
    if (key == "total_steps")
        cfg.total_steps = expect_integer(value, path);
    else if (key == "phase1_fraction")
        cfg.phase1_fraction = expect_number(value, path);
    else if (key == "phase1_per_learner")
        cfg.phase1_per_learner = expect_boolean(value, path);
    else if (key == "n_distill")
        cfg.n_distill = static_cast<int>(expect_integer(value, path));
    else if (key == "do_polish")
        cfg.do_polish = expect_boolean(value, path);
    else if (key == "k")
        cfg.k = static_cast<int>(expect_integer(value, path));
    else if (key == "batch_size")
        cfg.batch_size = static_cast<int>(expect_integer(value, path));
    else if (key == "margin")
        cfg.sat.margin = expect_number(value, path);
    else if (key == "hinge_weight")
        cfg.sat.hinge_weight = expect_number(value, path);
    else if (key == "gamma")
        cfg.sat.gamma = expect_number(value, path);
    else if (key == "target_sync_interval")
        cfg.sat.target_sync_interval = static_cast<int>(expect_integer(value, path));
    else if (key == "satisficing")
        cfg.sat.satisficing = expect_boolean(value, path);
    else if (key == "hinge_direction") {
        const std::string s = expect_string(value, path);
        if (s == "as_printed")
            cfg.sat.hinge_direction = HingeDirection::as_printed;
        else if (s == "as_prose")
            cfg.sat.hinge_direction = HingeDirection::as_prose;
        else
            bad_field(path, "expected 'as_printed' or 'as_prose'");
    } else if (key == "lr")
        cfg.opt.lr = expect_number(value, path);
    else if (key == "weak_hidden")
        cfg.weak_hidden = static_cast<int>(expect_integer(value, path));
    else if (key == "weak_hidden_layers")
        cfg.weak_hidden_layers = static_cast<int>(expect_integer(value, path));
    else if (key == "student_hidden")
        cfg.student_hidden = static_cast<int>(expect_integer(value, path));
    else if (key == "student_hidden_layers")
        cfg.student_hidden_layers = static_cast<int>(expect_integer(value, path));
    else if (key == "weak_buffer_capacity")
        cfg.weak_buffer_capacity = static_cast<std::size_t>(expect_integer(value, path));
    else if (key == "student_buffer_capacity")
        cfg.student_buffer_capacity = static_cast<std::size_t>(expect_integer(value, path));
    else if (key == "baseline_decay")
        cfg.baseline_decay = expect_number(value, path);
    else if (key == "baseline_hidden")
        cfg.baseline_hidden = static_cast<int>(expect_integer(value, path));
    else if (key == "baseline_buffer_capacity")
        cfg.baseline_buffer_capacity = static_cast<int>(expect_integer(value, path));
    else if (key == "baseline_batch")
        cfg.baseline_batch = static_cast<int>(expect_integer(value, path));
    else if (key == "baseline_train_steps")
        cfg.baseline_train_steps = static_cast<int>(expect_integer(value, path));
    else if (key == "eps_start")
        cfg.eps_start = expect_number(value, path);
    else if (key == "eps_end")
        cfg.eps_end = expect_number(value, path);
    else if (key == "eps_decay_fraction")
        cfg.eps_decay_fraction = expect_number(value, path);
    else if (key == "polish_eps_start")
        cfg.polish_eps_start = expect_number(value, path);
    else if (key == "polish_eps_end")
        cfg.polish_eps_end = expect_number(value, path);
    else if (key == "polish_eps_decay_fraction")
        cfg.polish_eps_decay_fraction = expect_number(value, path);
    else if (key == "polish_lr")
        cfg.polish_lr = expect_number(value, path);
    else if (key == "polish_warm_buffer")
        cfg.polish_warm_buffer = expect_boolean(value, path);
    else if (key == "eval_episodes")
        cfg.eval_episodes = static_cast<int>(expect_integer(value, path));
    else if (key == "diversity_probe_states")
        cfg.diversity_probe_states = static_cast<int>(expect_integer(value, path));
    else
        bad_field(path, "unknown key");
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    ExperimentConfig cfg;
    bool have_algorithms = false, have_seeds = false, have_env = false, have_total = false;
    for (const auto& [key, value] : j.items()) {
        if (key == "name") {
            cfg.name = expect_string(value, "name");
        } else if (key == "output_dir") {
            cfg.output_dir = expect_string(value, "output_dir");
        } else if (key == "reproduction_target") {
            cfg.reproduction_target = expect_string(value, "reproduction_target");
        } else if (key == "algorithms") {
            if (!value.is_array() || value.empty())
                bad_field("algorithms", "expected a non-empty array of strings");
            for (std::size_t i = 0; i < value.size(); ++i)
                cfg.algorithms.push_back(
                    expect_string(value[i], "algorithms[" + std::to_string(i) + "]"));
            have_algorithms = true;
        } else if (key == "seeds") {
            if (!value.is_array() || value.empty())
                bad_field("seeds", "expected a non-empty array of non-negative integers");
            for (std::size_t i = 0; i < value.size(); ++i) {
                const long long s = expect_integer(value[i], "seeds[" + std::to_string(i) + "]");
                if (s < 0) bad_field("seeds[" + std::to_string(i) + "]", "must be >= 0");
                cfg.seeds.push_back(static_cast<std::uint64_t>(s));
            }
            have_seeds = true;
        } else if (key == "env") {
            apply_env_object(value, cfg.base.env);
            have_env = true;
        } else if (key == "overrides") {
            if (!value.is_object()) bad_field("overrides", "expected an object");
            for (const auto& [okey, ovalue] : value.items()) {
                apply_override(okey, ovalue, cfg.base);
                if (okey == "total_steps") have_total = true;
            }
        } else {
            bad_field(key, "unknown key");
        }
    }
    if (!have_algorithms) bad_field("algorithms", "required");
    if (!have_seeds) bad_field("seeds", "required");
    if (!have_env) bad_field("env", "required");
    if (!have_total)
        cfg.base.total_steps = cfg.base.env.kind == EnvKind::gridworld ? 10000 : 20000;
    // Every label must parse and the resulting config must validate.
    for (const auto& label : cfg.algorithms) validate(apply_algorithm_label(cfg.base, label));
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    return experiment_config_from_json(j);
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
    return {{"name", cfg.name},
            {"output_dir", cfg.output_dir},
            {"reproduction_target", cfg.reproduction_target},
            {"algorithms", cfg.algorithms},
            {"seeds", cfg.seeds},
            {"base", run_config_to_json(cfg.base)}};
}

RunConfig apply_algorithm_label(RunConfig base, const std::string& label) {
    base.label = label;
    if (label == "sat_enq") {
        base.kind = Algorithm::sat_enq;
        return base;
    }
    if (label == "dqn") {
        base.kind = Algorithm::dqn;
        return base;
    }
    if (label == "double_dqn") {
        base.kind = Algorithm::double_dqn;
        return base;
    }
    if (label == "sat_enq_nosat") {
        base.kind = Algorithm::sat_enq;
        base.sat.satisficing = false;
        base.sat.hinge_weight = 0.0;
        return base;
    }
    if (label == "sat_enq_nopolish") {
        base.kind = Algorithm::sat_enq;
        base.do_polish = false;
        return base;
    }
    const std::string k_prefix = "sat_enq_k";
    const std::string m_prefix = "sat_enq_m";
    if (label.rfind(k_prefix, 0) == 0) {
        const std::string suffix = label.substr(k_prefix.size());
        std::size_t used = 0;
        int k = 0;
        try {
            k = std::stoi(suffix, &used);
        } catch (const std::exception&) {
            throw ConfigError("algorithm label '" + label + "': bad learner count");
        }
        if (used != suffix.size() || k < 1)
            throw ConfigError("algorithm label '" + label + "': bad learner count");
        base.kind = Algorithm::sat_enq;
        base.k = k;
        return base;
    }
    if (label.rfind(m_prefix, 0) == 0) {
        const std::string suffix = label.substr(m_prefix.size());
        std::size_t used = 0;
        double m = 0.0;
        try {
            m = std::stod(suffix, &used);
        } catch (const std::exception&) {
            throw ConfigError("algorithm label '" + label + "': bad margin");
        }
        if (used != suffix.size() || m < 0.0)
            throw ConfigError("algorithm label '" + label + "': bad margin");
        base.kind = Algorithm::sat_enq;
        base.sat.margin = m;
        return base;
    }
    throw ConfigError("unknown algorithm label: " + label);
}

std::string pick_reference_algorithm(const std::vector<RunMetrics>& runs) {
    for (const auto& r : runs)
        if (r.algorithm == "sat_enq") return "sat_enq";
    return runs.empty() ? std::string{} : runs.front().algorithm;
}

AggregateReport aggregate(const std::vector<RunMetrics>& runs,
                          const std::string& reference_algorithm) {
    AggregateReport report;
    report.reference_algorithm = reference_algorithm;
    if (!runs.empty()) report.env_name = runs.front().env_name;

    std::vector<std::string> order;
    for (const auto& r : runs)
        if (std::find(order.begin(), order.end(), r.algorithm) == order.end())
            order.push_back(r.algorithm);

    std::vector<double> reference_returns;
    for (const auto& r : runs)
        if (r.algorithm == reference_algorithm) reference_returns.push_back(r.eval_return_mean);

    for (const auto& name : order) {
        AlgorithmAggregate agg;
        agg.algorithm = name;
        double failures = 0.0, success = 0.0, wall = 0.0;
        const RunMetrics* first = nullptr;
        for (const auto& r : runs) {
            if (r.algorithm != name) continue;
            if (!first) first = &r;
            agg.returns.push_back(r.eval_return_mean);
            failures += r.failed ? 1.0 : 0.0;
            success += r.success_rate;
            wall += r.wall_seconds;
        }
        agg.seeds = static_cast<int>(agg.returns.size());
        agg.mean = mean(agg.returns);
        if (agg.seeds >= 2) {
            agg.variance = sample_variance(agg.returns);
            agg.stddev = std::sqrt(agg.variance);
            agg.spread_defined = true;
        }
        agg.failure_rate = failures / agg.seeds;
        agg.success_rate = success / agg.seeds;
        agg.mean_wall_seconds = wall / agg.seeds;
        if (first && first->student_params > 0) {
            agg.params_ratio =
                static_cast<double>(first->weak_params_total + first->baseline_params +
                                    first->student_params) /
                static_cast<double>(first->student_params);
        }
        if (name != reference_algorithm && reference_returns.size() >= 2 && agg.seeds >= 2) {
            const LeveneResult lev = levene_brown_forsythe({reference_returns, agg.returns});
            agg.levene_p = lev.p_value;
            agg.levene_defined = true;
        }
        report.algorithms.push_back(std::move(agg));
    }
    return report;
}

std::string record_filename(const RunConfig& cfg) {
    std::ostringstream os;
    os << cfg.label << '_' << env_kind_name(cfg.env.kind) << "_s" << cfg.seed << '_' << std::hex
       << run_config_hash(cfg) << ".json";
    return os.str();
}

void save_record_atomic(const RunMetrics& m, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot write record: " + tmp);
        out << m.to_json().dump(2) << '\n';
        if (!out) throw IoError("short write on record: " + tmp);
    }
    fs::rename(tmp, path);
}

RunMetrics load_record(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open record: " + path);
    nlohmann::json j;
    try {
        in >> j;
        return RunMetrics::from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("record " + path + " is corrupt: " + e.what());
    }
}

SuiteResult run_suite(const ExperimentConfig& cfg, bool verbose) {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("cannot create output dir " + cfg.output_dir + ": " + ec.message());

    SuiteResult result;
    for (const auto& label : cfg.algorithms) {
        RunConfig cell = apply_algorithm_label(cfg.base, label);
        for (std::uint64_t seed : cfg.seeds) {
            cell.seed = seed;
            const std::string path = cfg.output_dir + "/" + record_filename(cell);
            RunMetrics m;
            if (fs::exists(path)) {
                m = load_record(path);
                if (m.algorithm != label || m.seed != seed)
                    throw IoError("record " + path + " does not match its cell");
                ++result.skipped;
                if (verbose)
                    std::cout << "[suite] reuse " << label << " seed " << seed << '\n';
            } else {
                if (verbose)
                    std::cout << "[suite] run   " << label << " seed " << seed << std::flush;
                m = execute_run(cell);
                save_record_atomic(m, path);
                ++result.executed;
                if (verbose)
                    std::cout << "  -> return " << m.eval_return_mean << " ("
                              << m.wall_seconds << "s)" << '\n';
            }
            result.runs.push_back(std::move(m));
        }
    }
    result.report = aggregate(result.runs, pick_reference_algorithm(result.runs));
    return result;
}

RobustnessResult robustness_eval(const MlpParams& policy, const EnvSpec& clean_spec,
                                 double noise_prob, int episodes, std::uint64_t seed) {
    EnvSpec clean = clean_spec;
    clean.action_noise_prob = 0.0;
    EnvSpec noisy = clean_spec;
    noisy.action_noise_prob = noise_prob;
    Rng clean_rng(seed), noisy_rng(seed);
    RobustnessResult res;
    res.clean_mean = evaluate_policy(policy, clean, episodes, clean_rng).mean;
    res.noisy_mean = evaluate_policy(policy, noisy, episodes, noisy_rng).mean;
    if (res.clean_mean > 0.0) {
        res.ratio = res.noisy_mean / res.clean_mean;
        res.ratio_defined = true;
    }
    return res;
}

void write_csv(const AggregateReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write csv: " + path);
    out << "algorithm,env,seeds,mean,std,variance,failure_rate,levene_p,time,params_ratio\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& a : report.algorithms) {
        out << a.algorithm << ',' << report.env_name << ',' << a.seeds << ','
            << format_double(a.mean) << ',' << format_double(a.spread_defined ? a.stddev : nan)
            << ',' << format_double(a.spread_defined ? a.variance : nan) << ','
            << format_double(a.failure_rate) << ','
            << format_double(a.levene_defined ? a.levene_p : nan) << ','
            << format_double(a.mean_wall_seconds) << ',' << format_double(a.params_ratio) << '\n';
    }
    if (!out) throw IoError("short write on csv: " + path);
}

AggregateReport read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("csv " + path + " is empty");
    if (line != "algorithm,env,seeds,mean,std,variance,failure_rate,levene_p,time,params_ratio")
        throw IoError("csv " + path + " has an unexpected header");
    AggregateReport report;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 10) throw IoError("csv " + path + ": malformed row: " + line);
        AlgorithmAggregate a;
        a.algorithm = fields[0];
        report.env_name = fields[1];
        a.seeds = std::stoi(fields[2]);
        a.mean = std::stod(fields[3]);
        a.stddev = std::stod(fields[4]);
        a.variance = std::stod(fields[5]);
        a.spread_defined = !std::isnan(a.stddev);
        a.failure_rate = std::stod(fields[6]);
        a.levene_p = std::stod(fields[7]);
        a.levene_defined = !std::isnan(a.levene_p);
        a.mean_wall_seconds = std::stod(fields[8]);
        a.params_ratio = std::stod(fields[9]);
        report.algorithms.push_back(std::move(a));
    }
    return report;
}

void write_plot_data(const std::vector<RunMetrics>& runs, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create plot dir " + dir + ": " + ec.message());

    std::vector<std::string> order;
    for (const auto& r : runs)
        if (std::find(order.begin(), order.end(), r.algorithm) == order.end())
            order.push_back(r.algorithm);

    for (const auto& name : order) {
        std::size_t max_len = 0;
        std::vector<const RunMetrics*> group;
        for (const auto& r : runs)
            if (r.algorithm == name) {
                group.push_back(&r);
                max_len = std::max(max_len, r.train_curve.size());
            }
        const std::string path = dir + "/curve_" + name + ".dat";
        std::ofstream out(path);
        if (!out) throw IoError("cannot write plot data: " + path);
        for (std::size_t e = 0; e < max_len; ++e) {
            std::vector<double> vals;
            for (const auto* r : group)
                if (e < r->train_curve.size()) vals.push_back(r->train_curve[e]);
            const double m = mean(vals);
            const double sd = vals.size() >= 2 ? sample_stddev(vals) : 0.0;
            out << e << ' ' << format_double(m) << ' ' << format_double(sd) << '\n';
        }
        if (!out) throw IoError("short write on plot data: " + path);
    }
}

ExperimentConfig reproduction_target(const std::string& tag, const std::string& output_dir) {
    ExperimentConfig cfg;
    cfg.name = tag;
    cfg.reproduction_target = tag;
    cfg.output_dir = output_dir;
    for (std::uint64_t s = 0; s < 10; ++s) cfg.seeds.push_back(s);

    auto cartpole = [&]() {
        cfg.base.env.kind = EnvKind::cartpole;
        cfg.base.total_steps = 20000;
    };
    if (tag == "table1") {
        cfg.base.env.kind = EnvKind::gridworld;
        cfg.base.total_steps = 10000;
        cfg.algorithms = {"sat_enq", "dqn", "double_dqn"};
    } else if (tag == "table2" || tag == "table3") {
        // table3 reuses table2's trained policies; identical cells on disk.
        cartpole();
        cfg.algorithms = {"sat_enq", "dqn", "double_dqn"};
    } else if (tag == "table5") {
        cfg.base.env.kind = EnvKind::acrobot;
        cfg.base.total_steps = 20000;
        cfg.algorithms = {"sat_enq", "double_dqn"};
    } else if (tag == "ablation_k") {
        cartpole();
        cfg.algorithms = {"sat_enq", "sat_enq_k1"};
    } else if (tag == "ablation_nosat") {
        cartpole();
        cfg.algorithms = {"sat_enq", "sat_enq_nosat"};
    } else if (tag == "ablation_nopolish") {
        cartpole();
        cfg.algorithms = {"sat_enq", "sat_enq_nopolish"};
    } else if (tag == "ablation_margin") {
        cartpole();
        cfg.algorithms = {"sat_enq_m0.1", "sat_enq_m0.5", "sat_enq_m1.0", "sat_enq_m2.0"};
    } else {
        throw ConfigError("unknown reproduction target: " + tag);
    }
    return cfg;
}

}  // namespace satenq
