#pragma once

#include "mctl/classifier.hpp"
#include "mctl/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mctl {

/// Which samples the downstream classifier is trained on.
enum class ClassifierMode {
    SourceOnly, // projected source only
    Augmented,  // projected source plus generated targets labeled with the target-train labels
};

std::optional<ClassifierMode> parse_mode(const std::string& text);
std::string to_string(ClassifierMode mode);

struct DataSource {
    /// Synthetic task; its seed is replaced by the run seed.
    std::optional<SyntheticSpec> synthetic;
    /// Share of the synthetic target domain used for (unlabeled) training;
    /// the rest is the labeled test split.
    double target_train_fraction = 2.0 / 3.0;

    std::filesystem::path source;
    std::filesystem::path target_train;
    std::filesystem::path target_test;
    std::string label_col = "y";
};

struct ExperimentConfig {
    DataSource data;
    ClassifierMode mode = ClassifierMode::SourceOnly;
    double classifier_ridge = 1e-3;
    bool standardize = true;
    MctlConfig solver;
    std::uint64_t seed = 0;
    int seeds = 1;
    std::filesystem::path out_dir = "mctl-out";

    void validate() const;
    std::vector<std::uint64_t> seed_list() const;
};

/// Flat JSON with the same key names as the command-line flags.
nlohmann::json to_json(const ExperimentConfig& cfg);
/// Reads a config object or a run manifest (its "config" member). Keys not
/// present keep the values already in `base`.
ExperimentConfig from_json(const nlohmann::json& j, ExperimentConfig base = {});

struct Task {
    std::string name;
    Dataset source;       // labeled
    Dataset target_train; // labels (if any) used only in augmented mode
    Dataset target_test;  // labeled
};

/// Loads or synthesizes the task for `seed` and standardizes it with
/// statistics of source + target_train.
Task load_task(const ExperimentConfig& cfg, std::uint64_t seed);

struct RunResult {
    std::string task;
    std::string variant;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    int iterations = 0;
    double wall_ms = 0.0;
    std::vector<LossBreakdown> history;
    std::vector<std::string> warnings;
};

/// fit -> project -> train_classifier -> evaluate on one task.
RunResult run_adaptation(const Task& task, const ExperimentConfig& cfg, std::uint64_t seed,
                         const MctlConfig& solver, const IterationSink& sink = {});

/// Same classifier on the standardized raw features, no adaptation.
double run_baseline(const Task& task, const ExperimentConfig& cfg);

/// "mctl", "mctl-s", "mctl/drop-lgdm", ...
std::string variant_label(const MctlConfig& solver);

/// MCTL_THREADS if set to a positive integer, else the hardware concurrency.
int thread_count();

/// Runs job(i) for i in [0, count) on up to `threads` workers; results keep
/// index order, so output does not depend on the thread count.
template <class Result, class Job>
std::vector<Result> parallel_map(std::size_t count, int threads, Job job);

/// Solver config for each ablation row: full, drop-lgdm, drop-ggdm, drop-lrc.
std::vector<MctlConfig> ablation_variants(const MctlConfig& base);

} // namespace mctl

#include "mctl/detail/parallel.hpp"
