#include "helpers.hpp"
#include "mctl/error.hpp"
#include "mctl/losses.hpp"
#include "mctl/oracle.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace mctl;
using namespace mctl::testing;

namespace {

ProjectedGrams manual_pg(const Matrix& A, const Matrix& B) {
    return {A, B, A.transpose() * A, A.transpose() * B};
}

// Z with A Z = B; exists whenever A (d x n_S) has full row rank.
Matrix perfect_z(const ProjectedGrams& pg) {
    return pg.A.completeOrthogonalDecomposition().solve(pg.B);
}

} // namespace

TEST_CASE("lgdm hand example") {
    // 1-D targets at 0 and 1, linked to each other, generated = targets.
    Matrix A(1, 2), B(1, 2);
    A << 0, 1;
    B << 0, 1;
    const AffinityGraph g = graph_from_affinity((Matrix(2, 2) << 0, 1, 1, 0).finished(), 1);
    const Matrix Z = Matrix::Identity(2, 2);
    // raw pair sum is 2; scaled by 1/n_T^2 = 1/4
    CHECK(lgdm_loss(manual_pg(A, B), Z, g) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(oracle::lgdm_pairwise(A * Z, B, g.W) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("lgdm trace form equals the pairwise sum") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const Problem p = random_problem(6, 4, 3, 10 * seed, 1.0, 2, 3);
        const ProjectedGrams pg = ProjectedGrams::from(p.state.Phi, p.grams);
        const double trace = lgdm_loss(pg, p.state.Z, p.graph);
        const double pairwise = oracle::lgdm_pairwise(pg.A * p.state.Z, pg.B, p.graph.W);
        CAPTURE(seed);
        CHECK(rel_diff(trace, pairwise) <= 1e-9);
        CHECK(trace == doctest::Approx(lgdm_loss(p.state.Phi, p.state.Z, p.grams, p.graph)).epsilon(1e-14));
        CHECK(trace >= -1e-12);
    }
}

TEST_CASE("perfect generation collapses lgdm to twice the manifold term") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        // 8 source samples in 3-D: A (d=3) has full row rank, so B is reachable.
        const Problem p = random_problem(8, 5, 3, 7 + seed, 1.0, 2, 3);
        const ProjectedGrams pg = ProjectedGrams::from(p.state.Phi, p.grams);
        const Matrix Z = perfect_z(pg);
        REQUIRE((pg.A * Z - pg.B).norm() <= 1e-10 * pg.B.norm());
        const double nt = 5.0;
        const double manifold = 2.0 * (pg.B * p.graph.L * pg.B.transpose()).trace() / (nt * nt);
        CAPTURE(seed);
        CHECK(rel_diff(lgdm_loss(pg, Z, p.graph), manifold) <= 1e-9);
        // and the simplified model's term evaluated at the same Z agrees
        CHECK(rel_diff(lgdm_s_loss(pg, Z, p.graph), manifold) <= 1e-9);
    }
}

TEST_CASE("lgdm shape errors") {
    const Problem p = random_problem(4, 3, 2, 1);
    CHECK_THROWS_AS(lgdm_loss(p.state.Phi, Matrix::Zero(3, 3), p.grams, p.graph), InputError);
    CHECK_THROWS_AS(ggdm_loss(p.state.Phi, Matrix::Zero(4, 2), p.grams), InputError);
    CHECK_THROWS_AS(lgdm_loss(Matrix::Zero(5, 2), p.state.Z, p.grams, p.graph), InputError);
}

TEST_CASE("ggdm examples") {
    // generated at (1,1) twice, targets at the origin: mean discrepancy sum (2,2)
    Matrix A = Matrix::Identity(2, 2), B = Matrix::Zero(2, 2);
    Matrix Z(2, 2);
    Z << 1, 1, 1, 1;
    CHECK(ggdm_loss(manual_pg(A, B), Z) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(ggdm_loss(manual_pg(A, A), Matrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("ggdm is quadratic in Phi and invariant to target order") {
    const Problem p = random_problem(6, 5, 3, 99, 1.0, 2, 4);
    const double base = ggdm_loss(p.state.Phi, p.state.Z, p.grams);
    CHECK(ggdm_loss(3.0 * p.state.Phi, p.state.Z, p.grams) == doctest::Approx(9.0 * base).epsilon(1e-12));

    // permute target samples together with the columns of Z and K_T
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
    perm.indices() << 3, 0, 4, 1, 2;
    GramSet g = p.grams;
    g.K_T = g.K_T * perm;
    const Matrix Zp = p.state.Z * perm;
    CHECK(ggdm_loss(p.state.Phi, Zp, g) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("nuclear norm examples and bounds") {
    CHECK(nuclear_norm(Matrix::Zero(3, 2)) == 0.0);
    CHECK(nuclear_norm(Vector(Eigen::Vector2d(3, 4)).asDiagonal().toDenseMatrix()) ==
          doctest::Approx(7.0).epsilon(1e-15));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix Z = random_matrix(5, 4, seed);
        Eigen::SelfAdjointEigenSolver<Matrix> es(Z.transpose() * Z);
        const double reference = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
        const double nuc = nuclear_norm(Z);
        CHECK(std::abs(nuc - reference) <= 1e-9);
        const double spectral = std::sqrt(es.eigenvalues().maxCoeff());
        CHECK(nuc >= spectral - 1e-12);
        CHECK(nuc >= Z.norm() - 1e-12);
    }
}

TEST_CASE("augmented lagrangian sums its terms") {
    const Problem p = random_problem(8, 6, 4, 5, 2.5, 2, 5);
    MctlConfig cfg;
    cfg.tau = 0.7;
    cfg.lambda1 = 1.3;
    const LossBreakdown lb = augmented_lagrangian(p.state, p.grams, p.graph, cfg);
    const auto& s = p.state;
    const double lgdm = lgdm_loss(s.Phi, s.Z, p.grams, p.graph);
    const double ggdm = ggdm_loss(s.Phi, s.Z, p.grams);
    const double nuc = nuclear_norm(s.J);
    const Matrix gap = s.Z - s.J;
    const double penalty = (s.R1.transpose() * gap).trace() + 0.5 * s.mu * gap.squaredNorm();
    CHECK(rel_diff(lb.lgdm, lgdm) <= 1e-12);
    CHECK(rel_diff(lb.ggdm, ggdm) <= 1e-12);
    CHECK(rel_diff(lb.nuclear, nuc) <= 1e-12);
    CHECK(rel_diff(lb.penalty, penalty) <= 1e-12);
    CHECK(rel_diff(lb.total, lgdm + 0.7 * ggdm + 1.3 * nuc + penalty) <= 1e-9);
}

TEST_CASE("augmented lagrangian special points") {
    Problem p = random_problem(5, 4, 3, 6);
    MctlConfig cfg;
    SUBCASE("Z = J and R1 = 0 leave no penalty") {
        p.state.J = p.state.Z;
        p.state.R1.setZero();
        const LossBreakdown lb = augmented_lagrangian(p.state, p.grams, p.graph, cfg);
        CHECK(lb.penalty == 0.0);
        CHECK(rel_diff(lb.total, lb.lgdm + lb.ggdm + lb.nuclear) <= 1e-12);
    }
    SUBCASE("Z = J = 0 leaves the target-only constants") {
        p.state.Z.setZero();
        p.state.J.setZero();
        const LossBreakdown lb = augmented_lagrangian(p.state, p.grams, p.graph, cfg);
        const ProjectedGrams pg = ProjectedGrams::from(p.state.Phi, p.grams);
        const double nt2 = 16.0;
        const double lgdm0 = (pg.B * p.graph.D * pg.B.transpose()).trace() / nt2;
        const double ggdm0 = (pg.B * Vector::Ones(4)).squaredNorm() / nt2;
        CHECK(rel_diff(lb.total, lgdm0 + ggdm0) <= 1e-12);
    }
    SUBCASE("dropped terms are reported as zero") {
        cfg.ablation = {true, true, true};
        const LossBreakdown lb = augmented_lagrangian(p.state, p.grams, p.graph, cfg);
        CHECK(lb.lgdm == 0.0);
        CHECK(lb.ggdm == 0.0);
        CHECK(lb.nuclear == 0.0);
        CHECK(lb.penalty == 0.0);
        CHECK(lb.total == 0.0);
    }
    SUBCASE("simplified variant reports the manifold term") {
        cfg.variant = Variant::MctlS;
        const LossBreakdown lb = augmented_lagrangian(p.state, p.grams, p.graph, cfg);
        CHECK(rel_diff(lb.lgdm, lgdm_s_loss(p.state.Phi, p.state.Z, p.grams, p.graph)) <= 1e-12);
    }
}
