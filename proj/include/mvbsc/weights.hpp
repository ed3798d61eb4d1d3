#pragma once

#include <cstdint>
#include <vector>

#include "mvbsc/types.hpp"

namespace mvbsc {

struct KMeansParams;  // cluster.hpp

struct SigmaEstimate {
    double sigma_hat = 0.0;
    Matrix omega_hat;  // K x K block means
    std::vector<std::string> warnings;
};

// Block-mean / mean-squared-error noise estimate: sigma^2 = 2/(K(K+1)) *
// (MSE^2_within + MSE^2_across), diagonals excluded. Clusters whose within
// denominator n_k(n_k-1)/2 - 1 would be <= 0 contribute no within term.
SigmaEstimate estimate_sigma(const SimilarityView& w, const MembershipMatrix& z);

// |K-th largest-in-magnitude eigenvalue| of the banded view.
double estimate_gamma(const SymMatrix& banded, int K);

// lambda_s proportional to (gamma_s / sigma_s)^2, normalized to the simplex.
WeightVector lambda_snr(const std::vector<ViewDiagnostics>& diags);

// lambda_s proportional to h_s^-1 (gamma_s / sigma_s)^2.
WeightVector lambda_q(const std::vector<ViewDiagnostics>& diags);

// Surrogate objective q_h(lambda) = sum_s (lambda_s sigma_s / gamma_s)^2 h_s.
double q_objective(const WeightVector& lambda, const std::vector<ViewDiagnostics>& diags);

struct BandwidthRule;  // cluster.hpp

// One uniform-weight mvBSC pass; the resulting labels feed estimate_sigma.
MembershipMatrix pilot_clustering_for_sigma(const std::vector<SimilarityView>& views,
                                            const DistanceModel& dm, int K,
                                            const BandwidthRule& bandwidth,
                                            const KMeansParams& kmeans_params,
                                            std::uint64_t seed);

}  // namespace mvbsc
