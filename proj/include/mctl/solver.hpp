#pragma once

#include "mctl/losses.hpp"

#include <functional>

namespace mctl {

/// Result of one Phi solve.
struct PhiUpdate {
    Matrix Phi;
    Vector eigenvalues;       // the d selected generalized eigenvalues
    double ridge = 0.0;       // epsilon used in K + eps*I
    double ortho_ridged = 0.0; // max |Phi^T (K + eps I) Phi - I|
    double ortho_raw = 0.0;    // max |Phi^T K Phi - I|
};

/// M(Z) of the Phi eigenproblem, symmetrized.
Matrix phi_system(const Matrix& Z, const GramSet& grams, const AffinityGraph& graph, const MctlConfig& cfg);

/// Solves M v = lambda (K + ridge I) v and keeps the d smallest eigenpairs,
/// normalized so Phi^T (K + ridge I) Phi = I; see update_phi for the order.
PhiUpdate solve_phi(const Matrix& M, const Matrix& K, double ridge, Index d);

/// Solves M(Z) v = lambda (K + eps I) v and keeps the d smallest eigenpairs,
/// normalized so Phi^T (K + eps I) Phi = I. Directions whose normalization
/// comes mostly from the ridge (v^T K v < 1/2) lie in the numerical null
/// space of K, where the constraint Phi^T K Phi = I cannot hold; they are
/// taken only after every feasible direction.
PhiUpdate update_phi(const SolverState& state, const GramSet& grams, const AffinityGraph& graph,
                     const MctlConfig& cfg);

/// Singular value thresholding of S = Z + R1/mu at lambda1/mu.
Matrix update_j(const SolverState& state, const MctlConfig& cfg);

/// Singular value thresholding of an arbitrary matrix.
Matrix svt(const Matrix& S, double threshold);

/// Gradient of the augmented Lagrangian with respect to Z.
Matrix grad_z(const SolverState& state, const GramSet& grams, const AffinityGraph& graph, const MctlConfig& cfg);
Matrix grad_z(const ProjectedGrams& pg, const SolverState& state, const AffinityGraph& graph,
              const MctlConfig& cfg);

struct ZUpdate {
    Matrix Z;
    double alpha = 0.0; // step size after any halvings
    int halvings = 0;
    bool stalled = false;
};

/// inner_z_steps gradient steps with halving backtracking on the augmented
/// Lagrangian (at most 20 halvings per step). A step that still increases the
/// objective after 20 halvings is not taken and `stalled` is set.
ZUpdate update_z(const SolverState& state, const GramSet& grams, const AffinityGraph& graph,
                 const MctlConfig& cfg);

/// Per-iteration record passed to the fit observer.
struct IterationReport {
    int iter = 0;
    LossBreakdown loss;
    double ortho_ridged = 0.0;
    double ortho_raw = 0.0;
    double mu = 0.0;
    double alpha = 0.0;
    bool stalled = false;
};

using IterationSink = std::function<void(const IterationReport&)>;

/// A trained adaptation: projection, generative matrix and what is needed to
/// project new samples.
struct AdaptationModel {
    Matrix Phi;
    Matrix Z;
    KernelSpec kernel;
    Dataset training_pool; // [X_S, X_T]
    Index n_S = 0;
    Index n_T = 0;

    int iterations = 0;
    std::vector<LossBreakdown> history;
    std::vector<std::string> warnings;
};

/// Alternating optimization: Phi eigen-solve, J thresholding, Z gradient
/// step, multiplier and penalty updates, until the relative change of the
/// total falls below tol_rel or max_outer_iters is reached.
AdaptationModel fit(const Dataset& source, const Dataset& target, const MctlConfig& cfg,
                    const IterationSink& sink = {});

enum class Projection { Source, GeneratedTarget, NewTarget };

/// d x batch projection. `samples` is read only for NewTarget.
Matrix project(const AdaptationModel& model, const Dataset& samples, Projection which);

} // namespace mctl
