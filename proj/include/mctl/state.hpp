#pragma once

#include "mctl/kernel_graph.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mctl {

enum class Variant { Mctl, MctlS };

std::optional<Variant> parse_variant(const std::string& text);
std::string to_string(Variant variant);

/// Terms removed from the objective. Gating is exact: dropped terms vanish
/// from M(Z), the Z gradient, and the reported losses.
struct Ablation {
    bool drop_lgdm = false;
    bool drop_ggdm = false;
    bool drop_lrc = false; // also disables the J / R1 / mu machinery

    bool any() const { return drop_lgdm || drop_ggdm || drop_lrc; }
    /// "full", "drop-lgdm", ... (single drops) or a '+'-joined list.
    std::string label() const;
};

std::optional<Ablation> parse_ablation(const std::string& text);

struct MctlConfig {
    double tau = 1.0;
    double lambda1 = 1.0;
    int k_neighbors = 5;
    /// Subspace dimension; unset means d = n (all training samples).
    std::optional<int> subspace_dim;
    KernelSpec kernel;
    double step_alpha = 1e-3;
    int inner_z_steps = 1;
    double mu0 = 0.1;
    double mu_max = 1e6;
    double mu_growth = 1.01;
    int max_outer_iters = 15;
    double tol_rel = 1e-5;
    Variant variant = Variant::Mctl;
    Ablation ablation;
    /// Ridge added to K in the Phi eigenproblem; unset means 1e-6 * tr(K) / n.
    std::optional<double> eig_ridge;
    bool recompute_affinity = false;

    double effective_tau() const { return ablation.drop_ggdm ? 0.0 : tau; }
    double effective_lambda1() const { return ablation.drop_lrc ? 0.0 : lambda1; }
    bool uses_lrc() const { return !ablation.drop_lrc; }
    bool uses_lgdm() const { return !ablation.drop_lgdm; }

    /// Checks everything that does not depend on the data size.
    void validate() const;
    /// d for a pool of n samples; ConfigError unless 1 <= d <= n.
    Index resolve_dim(Index n) const;
    double resolve_ridge(const Matrix& K) const;
};

/// One evaluation of the augmented Lagrangian, split by term. Dropped terms
/// are reported as 0; total = lgdm + tau*ggdm + lambda1*nuclear + penalty
/// with the configured weights.
struct LossBreakdown {
    double lgdm = 0.0;
    double ggdm = 0.0;
    double nuclear = 0.0;
    double penalty = 0.0;
    double total = 0.0;
};

struct SolverState {
    Matrix Phi; // n x d
    Matrix Z;   // n_S x n_T
    Matrix J;   // n_S x n_T
    Matrix R1;  // n_S x n_T
    double mu = 0.0;
    int iter = 0;
    std::vector<LossBreakdown> history;
    std::vector<std::string> warnings;
};

} // namespace mctl
