#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mctl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// A feature matrix with one sample per column, plus optional integer labels.
struct Dataset {
    Matrix features; // m x n
    std::optional<std::vector<int>> labels;
    std::string name;

    Index dim() const { return features.rows(); }
    Index size() const { return features.cols(); }
    bool labeled() const { return labels.has_value(); }

    /// Throws InputError on NaN/Inf entries or a label vector of the wrong length.
    void validate() const;
    /// Labels, or InputError naming `what` when the dataset is unlabeled.
    const std::vector<int>& require_labels(const std::string& what) const;
};

/// Horizontal concatenation; the result is labeled only if both inputs are.
Dataset concat(const Dataset& a, const Dataset& b, std::string name = {});

/// Columns of `data` selected by `indices`, labels carried along.
Dataset select(const Dataset& data, const std::vector<Index>& indices, std::string name = {});

enum class SyntheticKind { RotatedGaussians, TwoMoonsShift, LocalityShift };

std::optional<SyntheticKind> parse_synthetic_kind(const std::string& text);
std::string to_string(SyntheticKind kind);

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::RotatedGaussians;
    int n_per_class = 20;
    int classes = 3;
    double rotation_deg = 30.0;
    double noise_sigma = 0.3;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DomainPair {
    Dataset source;
    Dataset target;
};

/// Seeded desk-scale domain-shift tasks. Pure function of `spec`.
///
/// RotatedGaussians: class means on the unit circle, isotropic noise; the
/// target reuses the source draw (same seed) rotated by `rotation_deg`.
///
/// TwoMoonsShift: interleaved half circles (classes alternate between the
/// two moons); the target is rotated about the data centroid.
///
/// LocalityShift: every class is a ring of tight sub-clusters. The target
/// moves each sub-cluster by an offset; offsets cancel within a class so the
/// class means (and hence the global mean) are unchanged while neighborhoods
/// are not.
DomainPair generate(const SyntheticSpec& spec);

/// Reads a headered, comma-separated numeric table; each row becomes a sample
/// column. `label_column` names an integer column that is split off as labels.
Dataset load_csv(const std::filesystem::path& path,
                 const std::optional<std::string>& label_column = std::nullopt);

/// Writes `data` in the format `load_csv` reads. Feature columns are named
/// f0..f{m-1}; labels (if any) go last under `label_column`.
void save_csv(const Dataset& data, const std::filesystem::path& path,
              const std::string& label_column = "y");

/// Per-dimension z-scoring with statistics of `fit_on`. Zero-variance
/// dimensions map to 0.
std::vector<Dataset> standardize(const Dataset& fit_on, const std::vector<Dataset>& apply_to);

/// Deterministic seeded split: a `fraction` of samples go to `first`,
/// stratified by label when labels are present.
struct Split {
    Dataset first;
    Dataset second;
};
Split split(const Dataset& data, double fraction, std::uint64_t seed);

} // namespace mctl
