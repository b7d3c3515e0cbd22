#pragma once

#include "mctl/experiment.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mctl {

/// task,variant,seed,accuracy,iterations,wall_ms
void write_results_csv(const std::filesystem::path& path, const std::vector<RunResult>& rows);

/// iter,lgdm,ggdm,nuclear,penalty,total
void write_convergence_csv(const std::filesystem::path& path, const std::vector<LossBreakdown>& history);

/// Line plots of the total and of each term per iteration.
void write_convergence_svg(const std::filesystem::path& path, const std::vector<LossBreakdown>& history,
                           const std::string& title);

struct AccuracySummary {
    std::string variant;
    double mean = 0.0;
    double stddev = 0.0; // sample standard deviation; 0 for a single run
    std::size_t runs = 0;
};

AccuracySummary summarize(const std::string& variant, const std::vector<double>& accuracies);

/// variant,mean_accuracy,std_accuracy,seeds,mean_drop  (drop relative to the first row)
void write_ablation_csv(const std::filesystem::path& path, const std::vector<AccuracySummary>& rows);

struct PairedAccuracy {
    std::uint64_t seed = 0;
    double mctl = 0.0;
    double mctl_s = 0.0;
};

/// seed,mctl_accuracy,mctl_s_accuracy,gap followed by a "mean" row.
void write_compare_csv(const std::filesystem::path& path, const std::vector<PairedAccuracy>& rows);

/// Resolved config, seeds, version and thread count.
void write_manifest(const std::filesystem::path& path, const std::string& command, const ExperimentConfig& cfg,
                    int threads);

std::string version_string();

} // namespace mctl
