#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mvbsc/banding.hpp"
#include "mvbsc/linalg.hpp"
#include "mvbsc/types.hpp"

namespace mvbsc {

struct KMeansParams {
    int restarts = 25;
    int max_iter = 300;
    bool track_history = false;  // record per-iteration objectives of the best run
};

struct KMeansResult {
    std::vector<int> labels;
    Matrix centroids;  // K x dim
    double objective = 0.0;
    std::vector<double> objective_history;
};

// Lloyd iterations with k-means++ seeding per restart; best of `restarts`
// runs. Emptied clusters are reseeded at the point farthest from its
// assigned centroid. The objective is checked nonincreasing each step.
KMeansResult kmeans(const Matrix& points, int K, const KMeansParams& params,
                    std::uint64_t seed);

// Top-K absolute-eigenvalue eigenvectors of the banded view.
Matrix view_embedding(const SimilarityView& w, const DistanceModel& dm, double h, int K);

// Top-K eigenvectors (descending eigenvalue) of sum_s lambda_s U_s U_s^T,
// computed through the rank-(m K) Gram factorization. Zero-weight views drop
// out exactly. A near-tie between the K-th and (K+1)-th eigenvalue appends
// an ambiguous-subspace warning.
Matrix fuse_projectors(const std::vector<Matrix>& embeddings, const WeightVector& lambda,
                       int K, std::vector<std::string>* warnings = nullptr);

struct WeightRule {
    enum class Kind { snr, q, uniform, fixed } kind = Kind::snr;
    std::vector<double> fixed_lambdas;  // for Kind::fixed

    static WeightRule snr() { return {Kind::snr, {}}; }
    static WeightRule q() { return {Kind::q, {}}; }
    static WeightRule uniform() { return {Kind::uniform, {}}; }
    static WeightRule fixed(std::vector<double> l) { return {Kind::fixed, std::move(l)}; }
};

struct BandwidthRule {
    enum class Kind { theorem34, simulation, fixed } kind = Kind::simulation;
    std::vector<double> fixed_h;      // for Kind::fixed (length 1 = shared)
    std::optional<int> n_max;         // largest cluster size for the closed form;
                                      // defaults to ceil(n / K) when absent

    static BandwidthRule theorem34(std::optional<int> n_max = std::nullopt) {
        return {Kind::theorem34, {}, n_max};
    }
    static BandwidthRule simulation(std::optional<int> n_max = std::nullopt) {
        return {Kind::simulation, {}, n_max};
    }
    static BandwidthRule fixed(std::vector<double> h) { return {Kind::fixed, std::move(h), {}}; }
};

// The full pipeline: banding, per-view embeddings, weight selection (with a
// uniform-weight pilot clustering for the data-driven rules), projector
// fusion, final k-means.
ClusteringResult run_mvbsc(const std::vector<SimilarityView>& views, const DistanceModel& dm,
                       int K, const WeightRule& weight_rule, const BandwidthRule& bandwidth_rule,
                       const KMeansParams& kmeans_params, std::uint64_t seed);

// Bandwidths for every view under the rule (exposed for diagnostics/tests).
std::vector<double> resolve_bandwidths(const std::vector<SimilarityView>& views,
                                       const DistanceModel& dm, int K,
                                       const BandwidthRule& rule);

}  // namespace mvbsc
