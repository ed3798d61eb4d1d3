#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "mvbsc/cluster.hpp"
#include "mvbsc/types.hpp"

namespace mvbsc {

// Normalized mutual information in [0, 1] (natural log, 0 log 0 = 0).
// A single-cluster partition on either side makes the normalizer vanish;
// such calls return 0 and set *degenerate when provided.
double nmi(const MembershipMatrix& x, const MembershipMatrix& x0,
           bool* degenerate = nullptr);

// Agreement fraction under the best label permutation (confusion matrix +
// exact assignment; padded square when the group counts differ).
double matched_accuracy(const MembershipMatrix& x, const MembershipMatrix& x0);

// Definition-style mis-clustered set: nodes whose fitted k-means centroid is
// at least (2 n_max)^-1/2 from their aligned population embedding row.
// Ground truth supplies U* = Z* Delta^-1 and n_max.
std::set<int> misclustered_set_oracle(const ClusteringResult& result,
                                      const MembershipMatrix& z_true);

struct KSelection {
    int chosen_k = 0;
    std::vector<std::pair<int, double>> trace;  // (K, NMI vs reference)
};

// Scan K over [ceil((1-span) k_center), floor((1+span) k_center)] and pick
// the highest NMI against the reference labels; ties go to the smaller K.
KSelection select_k(const std::vector<SimilarityView>& views, const DistanceModel& dm,
                    const MembershipMatrix& reference, int k_center, double span,
                    int step, const WeightRule& weight_rule,
                    const BandwidthRule& bandwidth_rule, const KMeansParams& kmeans_params,
                    std::uint64_t seed, int threads = 1);

enum class GridCriterion { nmi, accuracy };

struct GridSearchResult {
    WeightVector best;
    double best_score = 0.0;
    std::vector<std::pair<std::vector<double>, double>> trace;  // (lambda, score)
};

// Dense simplex grid over the view weights (spacing grid_step); each grid
// point runs the pipeline with fixed weights and is scored against the
// reference. Refuses m > 3.
GridSearchResult lambda_grid_search(const std::vector<SimilarityView>& views,
                                    const DistanceModel& dm, int K,
                                    const MembershipMatrix& reference, double grid_step,
                                    GridCriterion criterion,
                                    const BandwidthRule& bandwidth_rule,
                                    const KMeansParams& kmeans_params, std::uint64_t seed,
                                    int threads = 1);

}  // namespace mvbsc
