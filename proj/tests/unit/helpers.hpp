#pragma once

#include "mctl/kernel_graph.hpp"
#include "mctl/state.hpp"

#include <cstdint>
#include <random>

namespace mctl::testing {

/// Entries i.i.d. standard normal from a fixed seed.
inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            m(i, j) = dist(rng);
    return m;
}

inline Dataset random_dataset(Index dim, Index count, std::uint64_t seed) {
    Dataset d;
    d.features = random_matrix(dim, count, seed);
    d.name = "random";
    return d;
}

inline double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

inline double max_rel_error(const Matrix& got, const Matrix& want) {
    const double scale = std::max(want.cwiseAbs().maxCoeff(), 1e-300);
    return (got - want).cwiseAbs().maxCoeff() / scale;
}

/// Random grams, graph and solver state for gradient and loss checks.
struct Problem {
    GramSet grams;
    AffinityGraph graph;
    SolverState state;
};

inline Problem random_problem(Index n_S, Index n_T, Index m, std::uint64_t seed, double mu = 1.0,
                              int k = 2, Index d = 0) {
    Problem p;
    const Dataset src = random_dataset(m, n_S, seed);
    const Dataset tgt = random_dataset(m, n_T, seed + 1);
    p.grams = build_gram_set(src, tgt, KernelSpec{});
    p.graph = knn_graph(tgt, k);
    const Index n = n_S + n_T;
    p.state.Phi = random_matrix(n, d > 0 ? d : n, seed + 2) * 0.3;
    p.state.Z = random_matrix(n_S, n_T, seed + 3);
    p.state.J = random_matrix(n_S, n_T, seed + 4);
    p.state.R1 = random_matrix(n_S, n_T, seed + 5);
    p.state.mu = mu;
    return p;
}

} // namespace mctl::testing
