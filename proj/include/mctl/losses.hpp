#pragma once

#include "mctl/state.hpp"

namespace mctl {

/// Projected Gram blocks shared by the loss and gradient evaluations for a
/// fixed Phi: A = Phi^T K_S, B = Phi^T K_T and their cross products.
struct ProjectedGrams {
    Matrix A;  // d x n_S
    Matrix B;  // d x n_T
    Matrix ss; // A^T A
    Matrix st; // A^T B

    static ProjectedGrams from(const Matrix& Phi, const GramSet& grams);
};

/// Local generative discrepancy: (1/n_T^2) sum_pq W_pq |g_p - t_q|^2 with
/// g = Phi^T K_S Z and t = Phi^T K_T, evaluated in trace form.
double lgdm_loss(const Matrix& Phi, const Matrix& Z, const GramSet& grams, const AffinityGraph& graph);
double lgdm_loss(const ProjectedGrams& pg, const Matrix& Z, const AffinityGraph& graph);

/// Manifold term of the simplified model: (2/n_T^2) Tr(G L G^T), G = Phi^T K_S Z.
double lgdm_s_loss(const Matrix& Phi, const Matrix& Z, const GramSet& grams, const AffinityGraph& graph);
double lgdm_s_loss(const ProjectedGrams& pg, const Matrix& Z, const AffinityGraph& graph);

/// Global generative discrepancy: (1/n_T^2) |Phi^T (K_S Z - K_T) 1|^2.
double ggdm_loss(const Matrix& Phi, const Matrix& Z, const GramSet& grams);
double ggdm_loss(const ProjectedGrams& pg, const Matrix& Z);

/// Sum of singular values.
double nuclear_norm(const Matrix& Z);

/// Full augmented Lagrangian at `state` (variant and ablation from `cfg`).
LossBreakdown augmented_lagrangian(const SolverState& state, const GramSet& grams,
                                   const AffinityGraph& graph, const MctlConfig& cfg);

/// The Z-dependent smooth part (manifold + tau*ggdm + multiplier + penalty),
/// i.e. the augmented Lagrangian without lambda1*|J|_*.
double smooth_objective(const ProjectedGrams& pg, const Matrix& Z, const SolverState& state,
                        const AffinityGraph& graph, const MctlConfig& cfg);

} // namespace mctl
