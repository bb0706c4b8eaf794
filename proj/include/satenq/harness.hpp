#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "satenq/pipeline.hpp"

namespace satenq {

// One suite = a grid of (algorithm label x seed) cells over a shared base
// run configuration.
struct ExperimentConfig {
    std::string name = "experiment";
    std::string output_dir = "runs";
    std::vector<std::string> algorithms;
    std::vector<std::uint64_t> seeds;
    RunConfig base;                     // label/kind/seed are filled per cell
    std::string reproduction_target;    // tag when preconfigured, else empty
};

// Strict schema validation: unknown keys and ill-typed values are rejected
// with their field path.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

// Algorithm labels: "sat_enq", "dqn", "double_dqn", and the ablation forms
// "sat_enq_k<int>", "sat_enq_nosat", "sat_enq_nopolish", "sat_enq_m<float>".
RunConfig apply_algorithm_label(RunConfig base, const std::string& label);

struct AlgorithmAggregate {
    std::string algorithm;
    int seeds = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double variance = 0.0;
    bool spread_defined = false;  // needs >= 2 seeds
    double failure_rate = 0.0;    // fraction of seeds flagged failed
    double success_rate = 0.0;    // mean per-run eval success rate
    double levene_p = 0.0;        // vs the reference algorithm
    bool levene_defined = false;
    double mean_wall_seconds = 0.0;
    double params_ratio = 1.0;    // (weak + baseline + student) / student
    std::vector<double> returns;  // one final eval mean per seed
};

struct AggregateReport {
    std::string env_name;
    std::string reference_algorithm;
    std::vector<AlgorithmAggregate> algorithms;
};

AggregateReport aggregate(const std::vector<RunMetrics>& runs,
                          const std::string& reference_algorithm);
// Reference defaults to "sat_enq" when present, else the first algorithm.
std::string pick_reference_algorithm(const std::vector<RunMetrics>& runs);

// Record identity: <label>_<env>_s<seed>_<confighash>.json in the suite dir.
std::string record_filename(const RunConfig& cfg);
void save_record_atomic(const RunMetrics& m, const std::string& path);
RunMetrics load_record(const std::string& path);

struct SuiteResult {
    AggregateReport report;
    std::vector<RunMetrics> runs;
    int executed = 0;
    int skipped = 0;  // completed cells found on disk and reused
};

// Executes every cell, persisting each record as soon as it finishes;
// re-running a finished suite trains nothing.
SuiteResult run_suite(const ExperimentConfig& cfg, bool verbose = false);

struct RobustnessResult {
    double clean_mean = 0.0;
    double noisy_mean = 0.0;
    double ratio = 0.0;
    bool ratio_defined = false;  // clean mean must be positive
};

// 100-episode greedy evaluation on the clean and the action-noise env; both
// evaluations share one seed, so zero noise gives ratio exactly 1.
RobustnessResult robustness_eval(const MlpParams& policy, const EnvSpec& clean_spec,
                                 double noise_prob, int episodes, std::uint64_t seed);

void write_csv(const AggregateReport& report, const std::string& path);
AggregateReport read_csv(const std::string& path);

// Per-algorithm (episode, mean, std) training curves, one file per
// algorithm; row count = the longest curve among that algorithm's seeds.
void write_plot_data(const std::vector<RunMetrics>& runs, const std::string& dir);

// Preconfigured suites: table1, table2, table3, table5, ablation_k,
// ablation_nosat, ablation_nopolish, ablation_margin.
ExperimentConfig reproduction_target(const std::string& tag, const std::string& output_dir);

}  // namespace satenq
