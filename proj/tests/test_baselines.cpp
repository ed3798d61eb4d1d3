#include <doctest.h>

#include "mvbsc/baselines.hpp"
#include "mvbsc/linalg.hpp"
#include "mvbsc/metrics.hpp"
#include "mvbsc/model.hpp"
#include "mvbsc/rng.hpp"

using namespace mvbsc;

TEST_SUITE("baselines") {

TEST_CASE("kernel addition") {
    SimilarityView a, b;
    a.w = Matrix::Constant(3, 3, 0.5);
    b.w = Matrix::Constant(3, 3, 0.5);
    CHECK((kernel_addition({a}) - a.w).cwiseAbs().maxCoeff() == 0.0);
    CHECK((kernel_addition({a, b}) - Matrix::Constant(3, 3, 1.0)).cwiseAbs().maxCoeff() == 0.0);

    SimilarityView c;
    c.w = Matrix::Zero(4, 4);
    CHECK_THROWS_AS(kernel_addition({a, c}), DimensionError);
}

TEST_CASE("kernel addition: diagonal accumulates m * omega0") {
    const MembershipMatrix z = membership_m1(30, 3, 2);
    const BlockIntensity omega = omega_simulation(z, 0.4);
    const SimilarityView v1 = sample_view(z, omega, 0.2, {-1.0, 1.0}, 1.0, 1);
    const SimilarityView v2 = sample_view(z, omega, 0.3, {-1.0, 1.0}, 1.0, 2);
    const SymMatrix sum = kernel_addition({v1, v2});
    for (int i = 0; i < 30; ++i) CHECK(sum(i, i) == doctest::Approx(2.0));
}

TEST_CASE("laplacian: constant matrix collapses to zero") {
    const SymMatrix w = Matrix::Constant(5, 5, 0.7);
    CHECK(laplacian(w, false).cwiseAbs().maxCoeff() == 0.0);
    CHECK(laplacian(w, true).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("laplacian: zero row sums and PSD") {
    Rng rng(3);
    SymMatrix w(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = i; j < 8; ++j) {
            w(i, j) = rng.uniform(-1.0, 1.0);
            w(j, i) = w(i, j);
        }
    const SymMatrix l = laplacian(w, false);
    for (int i = 0; i < 8; ++i) CHECK(l.row(i).sum() == doctest::Approx(0.0).epsilon(1e-10));

    const EigenPairs spec = eig_sym_topk(l, 8, EigMode::by_value);
    CHECK(spec.values[7] >= -1e-8);

    const SymMatrix ln = laplacian(w, true);
    const EigenPairs nspec = eig_sym_topk(ln, 8, EigMode::by_value);
    CHECK(nspec.values[7] >= -1e-8);
    CHECK(nspec.values[0] <= 2.0 + 1e-8);
}

TEST_CASE("raw spectral baseline: noiseless population recovers exactly") {
    const MembershipMatrix z = membership_m1(60, 4, 5);
    const BlockIntensity omega = omega_simulation(z, 0.4);
    const PopulationSimilarity pw = population_similarity(z, omega);
    const ClusteringResult res =
        spectral_cluster_baseline(pw.script_w, 4, BaselineVariant::raw, KMeansParams{}, 3);
    CHECK(matched_accuracy(res.labels, z) == doctest::Approx(1.0));
}

TEST_CASE("laplacian baseline: disconnected components recover exactly") {
    // 0/1 block-diagonal adjacency with three components
    const int n = 30;
    SymMatrix w = Matrix::Zero(n, n);
    std::vector<int> labels(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        labels[static_cast<size_t>(i)] = i / 10;
        for (int j = 0; j < n; ++j)
            if (i / 10 == j / 10 && i != j) w(i, j) = 1.0;
    }
    const MembershipMatrix z(3, labels);
    for (auto variant : {BaselineVariant::laplacian, BaselineVariant::normalized_laplacian}) {
        const ClusteringResult res =
            spectral_cluster_baseline(w, 3, variant, KMeansParams{}, 4);
        CHECK(matched_accuracy(res.labels, z) == doctest::Approx(1.0));
    }
}

TEST_CASE("KA on identical views spans the single-view subspace") {
    const MembershipMatrix z = membership_m1(40, 4, 6);
    const BlockIntensity omega = omega_simulation(z, 0.4);
    const SimilarityView v = sample_view(z, omega, 0.2, {-1.0, 1.0}, 1.0, 7);
    const SymMatrix sum = kernel_addition({v, v, v});
    const Matrix u_sum = eig_sym_topk(sum, 4, EigMode::by_abs_value).vectors;
    const Matrix u_one = eig_sym_topk(v.w, 4, EigMode::by_abs_value).vectors;
    CHECK((u_sum * u_sum.transpose() - u_one * u_one.transpose()).cwiseAbs().maxCoeff() < 1e-8);
}

}  // TEST_SUITE
