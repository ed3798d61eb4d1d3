#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mvbsc/metrics.hpp"
#include "mvbsc/model.hpp"
#include "mvbsc/rng.hpp"
#include "mvbsc/weights.hpp"
#include "oracles.hpp"

using namespace mvbsc;

namespace {

MembershipMatrix from_raw(const std::vector<int>& labels) {
    const int K = 1 + *std::max_element(labels.begin(), labels.end());
    return MembershipMatrix(K, labels);
}

struct Instance {
    MembershipMatrix truth;
    DistanceModel dm;
    std::vector<SimilarityView> views;
};

Instance make_instance(int n, int K, double s1, double s2, std::uint64_t seed) {
    Instance inst;
    inst.truth = membership_m1(n, K, mix_seed(seed, 0));
    inst.dm = index_distance(n, 0.1);
    inst.dm.delta = compute_delta(inst.truth, inst.dm);
    const BlockIntensity o1 = omega_simulation(inst.truth, 0.4);
    const BlockIntensity o2 = omega_simulation(inst.truth, 0.6);
    inst.views = {sample_view(inst.truth, o1, s1, {-1.0, 1.0}, 1.0, mix_seed(seed, 1)),
                  sample_view(inst.truth, o2, s2, {-1.0, 1.0}, 1.0, mix_seed(seed, 2))};
    return inst;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("nmi: identical partitions up to relabeling score 1") {
    const MembershipMatrix x = from_raw({0, 0, 1, 1, 2, 2});
    const MembershipMatrix y = from_raw({2, 2, 0, 0, 1, 1});
    CHECK(nmi(x, y) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("nmi: independent partitions score 0") {
    const MembershipMatrix x = from_raw({0, 0, 1, 1});
    const MembershipMatrix y = from_raw({0, 1, 0, 1});
    CHECK(nmi(x, y) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("nmi: frozen hand example matches the contingency oracle") {
    const std::vector<int> xr = {0, 0, 0, 1, 1, 1};
    const std::vector<int> yr = {0, 0, 1, 1, 2, 2};
    const double got = nmi(from_raw(xr), from_raw(yr));
    CHECK(got == doctest::Approx(0.52954057805756172).epsilon(1e-12));
    CHECK(std::abs(got - oracles::nmi_contingency(xr, yr)) < 1e-12);
}

TEST_CASE("nmi: agrees with the oracle on random partitions, exactly") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 8 + static_cast<int>(rng.uniform_int(0, 20));
        std::vector<int> xr(static_cast<size_t>(n)), yr(static_cast<size_t>(n));
        // surjective draws
        for (;;) {
            const int kx = 2 + static_cast<int>(rng.uniform_int(0, 3));
            const int ky = 2 + static_cast<int>(rng.uniform_int(0, 3));
            std::set<int> sx, sy;
            for (int i = 0; i < n; ++i) {
                xr[static_cast<size_t>(i)] = static_cast<int>(rng.uniform_int(0, kx - 1));
                yr[static_cast<size_t>(i)] = static_cast<int>(rng.uniform_int(0, ky - 1));
                sx.insert(xr[static_cast<size_t>(i)]);
                sy.insert(yr[static_cast<size_t>(i)]);
            }
            if (static_cast<int>(sx.size()) == kx && static_cast<int>(sy.size()) == ky) break;
        }
        const double got = nmi(from_raw(xr), from_raw(yr));
        CHECK(std::abs(got - oracles::nmi_contingency(xr, yr)) < 1e-12);
    }
}

TEST_CASE("nmi: symmetry and label-permutation invariance") {
    Rng rng(5);
    const MembershipMatrix x = from_raw({0, 1, 2, 0, 1, 2, 0, 0});
    const MembershipMatrix y = from_raw({0, 0, 1, 1, 2, 2, 2, 0});
    CHECK(std::abs(nmi(x, y) - nmi(y, x)) < 1e-12);

    const MembershipMatrix x_relab = from_raw({1, 2, 0, 1, 2, 0, 1, 1});
    CHECK(std::abs(nmi(x, y) - nmi(x_relab, y)) < 1e-12);
}

TEST_CASE("nmi: single-cluster partition is degenerate") {
    const MembershipMatrix x(1, {0, 0, 0});
    const MembershipMatrix y = from_raw({0, 1, 2});
    bool degenerate = false;
    CHECK(nmi(x, y, &degenerate) == 0.0);
    CHECK(degenerate);
}

TEST_CASE("matched accuracy: relabeled truth and one moved node") {
    const MembershipMatrix x = from_raw({0, 0, 1, 1, 2, 2});
    const MembershipMatrix y = from_raw({1, 1, 2, 2, 0, 0});
    CHECK(matched_accuracy(x, y) == doctest::Approx(1.0));

    std::vector<int> labels(100);
    for (int i = 0; i < 100; ++i) labels[static_cast<size_t>(i)] = i / 25;
    std::vector<int> moved = labels;
    moved[0] = 3;
    CHECK(matched_accuracy(from_raw(moved), from_raw(labels)) == doctest::Approx(0.99));
}

TEST_CASE("matched accuracy: matches exhaustive permutation search") {
    Rng rng(6);
    for (int trial = 0; trial < 60; ++trial) {
        const int K = 3;
        std::vector<int> xr(9), yr(9);
        std::set<int> sx, sy;
        for (;;) {
            sx.clear();
            sy.clear();
            for (int i = 0; i < 9; ++i) {
                xr[static_cast<size_t>(i)] = static_cast<int>(rng.uniform_int(0, K - 1));
                yr[static_cast<size_t>(i)] = static_cast<int>(rng.uniform_int(0, K - 1));
                sx.insert(xr[static_cast<size_t>(i)]);
                sy.insert(yr[static_cast<size_t>(i)]);
            }
            if (static_cast<int>(sx.size()) == K && static_cast<int>(sy.size()) == K) break;
        }
        Eigen::MatrixXi table = Eigen::MatrixXi::Zero(K, K);
        for (int i = 0; i < 9; ++i) ++table(xr[static_cast<size_t>(i)], yr[static_cast<size_t>(i)]);
        const double expected =
            static_cast<double>(oracles::best_assignment_exhaustive(table)) / 9.0;
        CHECK(matched_accuracy(from_raw(xr), from_raw(yr)) == doctest::Approx(expected));
    }
}

TEST_CASE("matched accuracy: K-mismatched partitions use padded matching") {
    const MembershipMatrix x = from_raw({0, 0, 1, 1, 2, 2});
    const MembershipMatrix y = from_raw({0, 0, 0, 1, 1, 1});
    const double acc = matched_accuracy(x, y);
    CHECK(acc > 0.0);
    CHECK(acc <= 1.0);
}

TEST_CASE("matched accuracy: pigeonhole floor on balanced partitions") {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const int K = 2 + static_cast<int>(rng.uniform_int(0, 2));
        const int per = 4;
        const int n = K * per;
        std::vector<int> xr(static_cast<size_t>(n)), yr(static_cast<size_t>(n));
        std::vector<int> pool;
        for (int k = 0; k < K; ++k)
            for (int c = 0; c < per; ++c) pool.push_back(k);
        auto shuffle_into = [&](std::vector<int>& dst) {
            std::vector<int> bag = pool;
            for (int i = n - 1; i > 0; --i)
                std::swap(bag[static_cast<size_t>(i)],
                          bag[static_cast<size_t>(rng.uniform_int(0, i))]);
            dst = bag;
        };
        shuffle_into(xr);
        shuffle_into(yr);
        CHECK(matched_accuracy(from_raw(xr), from_raw(yr)) >= 1.0 / K - 1e-12);
    }
}

TEST_CASE("misclustered set: empty on a noiseless run and bounded by n") {
    const Instance inst = make_instance(120, 6, 0.0, 0.0, 11);
    const ClusteringResult res =
        run_mvbsc(inst.views, inst.dm, 6, WeightRule::uniform(),
                  BandwidthRule::simulation(inst.truth.n_max()), KMeansParams{}, 3);
    const std::set<int> bad = misclustered_set_oracle(res, inst.truth);
    CHECK(bad.empty());
}

TEST_CASE("misclustered set: tracks one minus accuracy at medium noise") {
    double gap = 0.0;
    const int reps = 8;
    for (int r = 0; r < reps; ++r) {
        const Instance inst = make_instance(300, 15, 0.4, 0.6, 600 + static_cast<std::uint64_t>(r));
        const ClusteringResult res =
            run_mvbsc(inst.views, inst.dm, 15, WeightRule::snr(),
                      BandwidthRule::simulation(inst.truth.n_max()), KMeansParams{}, 5);
        const double rate =
            static_cast<double>(misclustered_set_oracle(res, inst.truth).size()) / inst.truth.n;
        CHECK(rate >= 0.0);
        CHECK(rate <= 1.0);
        const double err = 1.0 - matched_accuracy(res.labels, inst.truth);
        gap += std::abs(rate - err);
    }
    CHECK(gap / reps < 0.05);
}

TEST_CASE("select_k: span 0 returns the centre") {
    const Instance inst = make_instance(80, 4, 0.1, 0.1, 13);
    const KSelection sel =
        select_k(inst.views, inst.dm, inst.truth, 4, 0.0, 1, WeightRule::uniform(),
                 BandwidthRule::simulation(inst.truth.n_max()), KMeansParams{}, 3);
    CHECK(sel.chosen_k == 4);
    CHECK(sel.trace.size() == 1);
}

TEST_CASE("select_k: noiseless scan lands on the true K") {
    const Instance inst = make_instance(200, 8, 0.0, 0.0, 14);
    const KSelection sel =
        select_k(inst.views, inst.dm, inst.truth, 8, 0.25, 1, WeightRule::uniform(),
                 BandwidthRule::simulation(inst.truth.n_max()), KMeansParams{}, 3, 2);
    CHECK(sel.chosen_k == 8);
    CHECK(sel.trace.size() == 5);  // 6..10
}

TEST_CASE("select_k: empty range rejected") {
    const Instance inst = make_instance(40, 4, 0.1, 0.1, 15);
    CHECK_THROWS_AS(select_k(inst.views, inst.dm, inst.truth, 4, -0.5, 1,
                             WeightRule::uniform(), BandwidthRule::simulation(10),
                             KMeansParams{}, 1),
                    ConfigError);
}

TEST_CASE("lambda grid: single view needs no runs") {
    const Instance inst = make_instance(40, 4, 0.1, 0.1, 16);
    const GridSearchResult grid = lambda_grid_search(
        {inst.views[0]}, inst.dm, 4, inst.truth, 0.05, GridCriterion::nmi,
        BandwidthRule::simulation(inst.truth.n_max()), KMeansParams{}, 1);
    CHECK(grid.best.lambdas == std::vector<double>{1.0});
}

TEST_CASE("lambda grid: refuses m > 3") {
    const Instance inst = make_instance(40, 4, 0.1, 0.1, 17);
    const std::vector<SimilarityView> four = {inst.views[0], inst.views[1], inst.views[0],
                                              inst.views[1]};
    CHECK_THROWS_AS(lambda_grid_search(four, inst.dm, 4, inst.truth, 0.05, GridCriterion::nmi,
                                       BandwidthRule::simulation(10), KMeansParams{}, 1),
                    ConfigError);
}

TEST_CASE("lambda grid: optimum dominates the SNR rule up to grid slack") {
    const Instance inst = make_instance(200, 10, 0.4, 0.6, 18);
    const BandwidthRule bw = BandwidthRule::simulation(inst.truth.n_max());
    const ClusteringResult snr_run =
        run_mvbsc(inst.views, inst.dm, 10, WeightRule::snr(), bw, KMeansParams{}, 9);
    const double snr_score = matched_accuracy(snr_run.labels, inst.truth);

    const GridSearchResult grid =
        lambda_grid_search(inst.views, inst.dm, 10, inst.truth, 0.05,
                           GridCriterion::accuracy, bw, KMeansParams{}, 9, 2);
    CHECK(grid.best_score >= snr_score - 0.01);
}

}  // TEST_SUITE
