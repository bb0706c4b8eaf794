// Command-line front end: single runs, config-driven suites, theory
// verification, one-command reproductions, and report/plot emission.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "satenq/errors.hpp"
#include "satenq/harness.hpp"
#include "satenq/serialize.hpp"
#include "satenq/theory.hpp"

namespace fs = std::filesystem;
using namespace satenq;

namespace {

void print_report(const AggregateReport& report) {
    std::cout << "env: " << report.env_name << "   reference: " << report.reference_algorithm
              << "\n";
    std::cout << std::left << std::setw(18) << "algorithm" << std::right << std::setw(7) << "seeds"
              << std::setw(12) << "mean" << std::setw(12) << "std" << std::setw(14) << "variance"
              << std::setw(10) << "fail%" << std::setw(12) << "levene_p" << std::setw(10)
              << "time_s" << std::setw(9) << "params" << "\n";
    for (const auto& a : report.algorithms) {
        std::cout << std::left << std::setw(18) << a.algorithm << std::right << std::setw(7)
                  << a.seeds << std::setw(12) << std::fixed << std::setprecision(2) << a.mean;
        if (a.spread_defined)
            std::cout << std::setw(12) << a.stddev << std::setw(14) << a.variance;
        else
            std::cout << std::setw(12) << "-" << std::setw(14) << "-";
        std::cout << std::setw(10) << std::setprecision(1) << 100.0 * a.failure_rate;
        if (a.levene_defined)
            std::cout << std::setw(12) << std::setprecision(5) << a.levene_p;
        else
            std::cout << std::setw(12) << "-";
        std::cout << std::setw(10) << std::setprecision(1) << a.mean_wall_seconds << std::setw(9)
                  << std::setprecision(2) << a.params_ratio << "\n";
    }
    std::cout.unsetf(std::ios::fixed);
    std::cout << std::setprecision(6);
}

std::vector<RunMetrics> load_records_in(const std::string& dir) {
    std::vector<RunMetrics> records;
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
        try {
            records.push_back(load_record(p));
        } catch (const IoError&) {
            // Not a run record (e.g. a theory summary); skip it.
        }
    }
    return records;
}

int cmd_train(const std::string& algorithm, const std::string& env_name, std::uint64_t seed,
              long long steps, double slip, double noise, const std::string& out_dir) {
    RunConfig base;
    base.env.kind = env_kind_from_name(env_name);
    base.env.gridworld.slip_prob = slip;
    base.env.action_noise_prob = noise;
    base.total_steps = steps > 0 ? steps : (base.env.kind == EnvKind::gridworld ? 10000 : 20000);
    RunConfig cfg = apply_algorithm_label(base, algorithm);
    cfg.seed = seed;
    validate(cfg);

    std::cout << "training " << algorithm << " on " << env_name << ", seed " << seed << ", "
              << cfg.total_steps << " env steps\n";
    const RunMetrics m = execute_run(cfg);

    fs::create_directories(out_dir);
    const std::string path = out_dir + "/" + record_filename(cfg);
    save_record_atomic(m, path);

    std::cout << "eval return " << m.eval_return_mean << " +- " << m.eval_return_std
              << "  success rate " << m.success_rate << "  failed " << (m.failed ? "yes" : "no")
              << "\n";
    if (m.has_diversity) std::cout << "phase-1 diversity " << m.diversity << "\n";
    if (!m.failure_reason.empty()) std::cout << "failure reason: " << m.failure_reason << "\n";
    std::cout << "record: " << path << "\n";
    return 0;
}

int cmd_suite(const std::string& config_path) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    std::cout << "suite '" << cfg.name << "': " << cfg.algorithms.size() << " algorithms x "
              << cfg.seeds.size() << " seeds -> " << cfg.output_dir << "\n";
    const SuiteResult result = run_suite(cfg, true);
    std::cout << "executed " << result.executed << ", reused " << result.skipped << "\n";
    print_report(result.report);
    const std::string csv = cfg.output_dir + "/report.csv";
    write_csv(result.report, csv);
    write_plot_data(result.runs, cfg.output_dir);
    std::cout << "wrote " << csv << "\n";
    return 0;
}

int cmd_verify_theory(int pairs, long long samples, int mdps, std::uint64_t seed,
                      const std::string& out_path) {
    TheoryConfig cfg;
    cfg.variance_pairs = pairs;
    cfg.samples_per_pair = samples;
    cfg.mdp_count = mdps;
    cfg.seed = seed;
    const TheorySummary sum = run_theory_suite(cfg);

    auto line = [](const std::string& name, bool ok) {
        std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
    };
    std::cout << "variance non-increase: " << sum.variance_pairs << " pairs, "
              << sum.variance_violations << " violations, max ratio " << sum.max_variance_ratio
              << "\n";
    line("variance non-increase under clipping", sum.theorem1_pass);
    std::cout << "decomposition identities: eq3 rel err " << sum.max_eq3_rel_err
              << ", eq4 rel err " << sum.max_eq4_rel_err << ", reduction err "
              << sum.max_reduction_abs_err << "\n";
    line("variance decomposition identities", sum.corollary1_pass);
    std::cout << "operator checks: " << sum.mdp_count << " MDPs, max contraction ratio "
              << sum.max_contraction_ratio << " (gamma " << sum.gamma << "), "
              << sum.convergence_failures << " convergence failures, " << sum.bound_violations
              << " bound violations\n";
    std::cout << "note: " << sum.bound_note << "\n";
    line("contraction + boundedness + convergence", sum.proposition1_pass);

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw IoError("cannot write theory summary: " + out_path);
        out << sum.to_json().dump(2) << '\n';
        std::cout << "summary: " << out_path << "\n";
    }
    return sum.all_pass ? 0 : 1;
}

int cmd_reproduce(const std::string& target, std::string out_dir, double noise) {
    if (out_dir.empty())
        out_dir = "runs/" + std::string(target == "table3" ? "table2" : target);
    const ExperimentConfig cfg = reproduction_target(target, out_dir);
    std::cout << "reproducing " << target << " into " << out_dir << "\n";
    const SuiteResult result = run_suite(cfg, true);
    print_report(result.report);
    write_csv(result.report, out_dir + "/report.csv");
    write_plot_data(result.runs, out_dir);

    if (target == "table3") {
        // Robustness pass over the policies the suite just trained.
        std::cout << "\nrobustness at " << 100.0 * noise << "% action noise:\n";
        std::ofstream out(out_dir + "/robustness.csv");
        if (!out) throw IoError("cannot write robustness csv");
        out << "algorithm,seed,clean,noisy,ratio\n";
        for (const auto& r : result.runs) {
            if (!r.has_policy) continue;
            const MlpParams policy = mlp_from_json(r.final_policy);
            EnvSpec spec;
            spec.kind = env_kind_from_name(r.env_name);
            const RobustnessResult rob =
                robustness_eval(policy, spec, noise, 100, r.seed + 900001);
            out << r.algorithm << ',' << r.seed << ',' << rob.clean_mean << ',' << rob.noisy_mean
                << ',' << (rob.ratio_defined ? std::to_string(rob.ratio) : "nan") << '\n';
        }
        std::cout << "wrote " << out_dir << "/robustness.csv\n";
    }
    return 0;
}

int cmd_report(const std::string& dir) {
    const auto records = load_records_in(dir);
    if (records.empty()) {
        std::cout << "no run records in " << dir << "\n";
        return 0;
    }
    const AggregateReport report = aggregate(records, pick_reference_algorithm(records));
    print_report(report);
    write_csv(report, dir + "/report.csv");
    std::cout << "wrote " << dir << "/report.csv\n";
    return 0;
}

int cmd_plot_data(const std::string& dir, const std::string& out) {
    const auto records = load_records_in(dir);
    if (records.empty()) {
        std::cout << "no run records in " << dir << "\n";
        return 0;
    }
    const std::string target = out.empty() ? dir : out;
    write_plot_data(records, target);
    std::cout << "wrote curve files to " << target << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"satisficing ensemble Q-learning: training, verification, reproduction"};
    app.require_subcommand(1);

    // train
    std::string algorithm = "sat_enq", env_name, out_dir = "runs";
    std::uint64_t seed = 0;
    long long steps = 0;
    double slip = 0.2, noise = 0.0;
    auto* train = app.add_subcommand("train", "train one run and write its record");
    train->add_option("--algorithm", algorithm,
                      "sat_enq | dqn | double_dqn | sat_enq_k<N> | sat_enq_nosat | "
                      "sat_enq_nopolish | sat_enq_m<M>");
    train->add_option("--env", env_name, "gridworld | cartpole | acrobot")->required();
    train->add_option("--seed", seed, "master seed");
    train->add_option("--steps", steps, "env-step budget (0 = env default)");
    train->add_option("--slip", slip, "gridworld slip probability");
    train->add_option("--noise", noise, "action-noise probability");
    train->add_option("--out-dir", out_dir, "record directory");

    // suite
    std::string config_path;
    auto* suite = app.add_subcommand("suite", "run a config-driven grid of cells");
    suite->add_option("--config", config_path, "experiment config (json)")->required();

    // verify-theory
    int pairs = 1000, mdps = 1000;
    long long samples = 100000;
    std::uint64_t theory_seed = 12345;
    std::string theory_out = "theory_summary.json";
    auto* verify = app.add_subcommand("verify-theory", "run the theory verification suite");
    verify->add_option("--pairs", pairs, "random (distribution, threshold) pairs");
    verify->add_option("--samples", samples, "Monte Carlo samples per pair");
    verify->add_option("--mdps", mdps, "random MDPs for the operator checks");
    verify->add_option("--seed", theory_seed, "suite seed");
    verify->add_option("--out", theory_out, "summary json path (empty = skip)");

    // reproduce
    std::string target, reproduce_dir;
    double reproduce_noise = 0.1;
    auto* reproduce = app.add_subcommand("reproduce", "run a preconfigured experiment");
    reproduce
        ->add_option("--target", target,
                     "table1 | table2 | table3 | table5 | ablation_k | ablation_nosat | "
                     "ablation_nopolish | ablation_margin")
        ->required();
    reproduce->add_option("--out-dir", reproduce_dir, "output directory (default runs/<target>)");
    reproduce->add_option("--noise", reproduce_noise, "action-noise level for table3");

    // report
    std::string report_dir;
    auto* report = app.add_subcommand("report", "aggregate the records in a directory");
    report->add_option("--dir", report_dir, "record directory")->required();

    // plot-data
    std::string plot_dir, plot_out;
    auto* plot = app.add_subcommand("plot-data", "emit per-episode return curves");
    plot->add_option("--dir", plot_dir, "record directory")->required();
    plot->add_option("--out", plot_out, "curve output directory (default = --dir)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed())
            return cmd_train(algorithm, env_name, seed, steps, slip, noise, out_dir);
        if (suite->parsed()) return cmd_suite(config_path);
        if (verify->parsed())
            return cmd_verify_theory(pairs, samples, mdps, theory_seed, theory_out);
        if (reproduce->parsed()) return cmd_reproduce(target, reproduce_dir, reproduce_noise);
        if (report->parsed()) return cmd_report(report_dir);
        if (plot->parsed()) return cmd_plot_data(plot_dir, plot_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
