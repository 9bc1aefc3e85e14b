#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ihf/agent.hpp"
#include "ihf/decoder.hpp"
#include "ihf/mcts.hpp"
#include "ihf/records.hpp"
#include "ihf/shaping.hpp"

namespace ihf::harness {

/// Mode labels accepted in ExperimentConfig::modes. The last two are the
/// shaped-reward ablations (t = 0 and beta = 1).
inline const std::vector<std::string> kModes = {"none", "full", "shaped", "simple", "no_baseline", "no_beta"};

struct DecoderExperiment {
    decoder::DecoderParams params{};
    decoder::SyntheticEegConfig synth{};
    int n_per_class = 200;
    int folds = 10;
    double shift_tilt = 0.15;      // added to the background tilt of the shifted domain
    double shift_drift = 3.0;      // multiplies the drift amplitude of the shifted domain
    double shift_latency = 200.0;  // ms, ERP delay of the negative-control domain
};

struct ExperimentConfig {
    std::string game = "maze";
    std::string map;            // empty: built-in layout
    std::string subjects_file;  // empty: built-in profiles
    std::vector<std::string> subjects = {"01", "02", "03", "04", "05"};
    std::vector<std::string> modes = {"none", "full", "shaped"};
    std::vector<int> k = {10, 20};
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    shaping::SoftQParams soft_q{0.03, 0.9};
    shaping::BetaSchedule beta{};
    mcts::MctsConfig mcts{};  // k and seed are set per run
    int random_transitions = 2000;
    shaping::TrainConfig reward_training{};  // seed is set per run
    agent::AgentConfig agent{};
    double full_access_penalty = -1.0;
    DecoderExperiment decoder{};
    std::string output_dir = "results";

    /// Throws std::invalid_argument naming the first bad field.
    void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Missing keys keep their defaults; unknown keys are an error.
void from_json(const nlohmann::json& j, ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);

struct MetricsRow {
    std::string mode;
    std::string subject;  // "-" for runs that use no subject
    int k = 0;            // 0 for runs that use no demonstrations
    int runs = 0;
    double complete_mean = 0.0;
    double complete_std = 0.0;  // population std over seeds
    int converged = 0;
    double queries_mean = 0.0;
    std::optional<double> speedup;    // complete(none) / complete(mode)
    std::optional<double> reduction;  // 1 - queries(mode) / queries(full), same subject
};
using MetricsTable = std::vector<MetricsRow>;

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<RunRecord> runs;  // fixed order independent of scheduling
    MetricsTable table;
};

/// WORKERS from the environment, else the hardware concurrency, at least 1.
int worker_count();

/// Runs task(i) for i in [0, n) on up to `workers` threads. Every task runs;
/// afterwards the exception of the lowest failing index, if any, is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task);

/// Per (subject, K, seed): trajectories, labels, reward fit, then one
/// training run per requested mode. NoFeedback runs once per seed and
/// FullAccess once per (subject, seed), since neither reads demonstrations.
ExperimentResult run_experiment(const ExperimentConfig& config, int workers = worker_count());

/// Shaped paired with one ablation variant: "no_baseline", "no_beta" or "simple".
ExperimentResult ablate(const ExperimentConfig& config, const std::string& variant, int workers = worker_count());

MetricsTable compute_metrics(const std::vector<RunRecord>& runs);

/// Mean and population std of success curves padded with their final value
/// to the longest run.
struct CurveBand {
    std::vector<double> mean;
    std::vector<double> std;
};
CurveBand aggregate_curves(const std::vector<const RunRecord*>& runs);

struct PlotFile {
    std::string name;
    std::string contents;
};
/// One CSV per (subject, K) with a mean/std column pair per mode, preceded
/// by a single "# config: ..." provenance line.
std::vector<PlotFile> emit_plots(const ExperimentConfig& config, const std::vector<RunRecord>& runs);

std::string format_percent(double fraction);
std::string summary_text(const ExperimentConfig& config, const MetricsTable& table);

nlohmann::json runs_document(const ExperimentConfig& config, const std::vector<RunRecord>& runs);
nlohmann::json metrics_document(const ExperimentConfig& config, const MetricsTable& table);

/// runs.json, metrics.json, curves_*.csv and summary.txt under `dir`.
void write_artifacts(const ExperimentResult& result, const std::filesystem::path& dir);
/// Rebuilds metrics, curves and summary from runs.json.
ExperimentResult report(const std::filesystem::path& dir);
/// Recomputes every derived file from runs.json and lists each mismatch.
std::vector<std::string> verify(const std::filesystem::path& dir);

struct DecoderSummary {
    decoder::CvReport cv;
    decoder::TransferReport shifted;
    decoder::TransferReport morphology;  // negative control
};
DecoderSummary run_decoder_experiment(const DecoderExperiment& config);
nlohmann::json decoder_document(const DecoderExperiment& config, const DecoderSummary& summary);

std::string dump(const nlohmann::json& j);  // pretty, trailing newline
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace ihf::harness
