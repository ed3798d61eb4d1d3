#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvbsc/rng.hpp"
#include "mvbsc/types.hpp"

namespace mvbsc {

// ----- membership generators (simulation designs) -----

// Contiguous index blocks with heterogeneous sizes: sizes drawn uniformly,
// rescaled to sum to n with each size >= max(2, floor(0.35 * n / K)).
MembershipMatrix membership_m1(int n, int K, std::uint64_t size_seed);

// Independently with probability p, reassign each node uniformly to one of
// the l clusters whose centroids (mean node index) are nearest its own.
// Draws producing an empty cluster are rejected and retried (up to 100x).
MembershipMatrix perturb_membership(const MembershipMatrix& z, double p, int l,
                                    std::uint64_t seed);

// ----- intensity / view generators -----

// Omega_kk = diag_value; Omega_kl = offdiag_scale * |c_k - c_l|^-(alpha+1)
// with c_k the mean node index (1-based) of cluster k.
BlockIntensity omega_simulation(const MembershipMatrix& z, double alpha,
                                double diag_value = 1.0, double offdiag_scale = 0.6);

PopulationSimilarity population_similarity(const MembershipMatrix& z,
                                           const BlockIntensity& omega);

struct ClipRange {
    double lo = -1.0;
    double hi = 1.0;
};

// W_ij = clamp(script_w_ij + N(0, sigma^2)) for i < j, mirrored; W_ii = diag_value.
SimilarityView sample_view(const MembershipMatrix& z, const BlockIntensity& omega,
                           double sigma, ClipRange clip, double diag_value,
                           std::uint64_t seed);

// ----- distance models -----

// d_ij = |i - j| * scale; d0 = scale.
DistanceModel index_distance(int n, double scale);

// ICD9 numeric distance with eta tie-break for distinct codes that share a
// numeric form. V/E chapters are offset by 1000/2000 so they never mix with
// plain numeric codes.
DistanceModel icd9_distance(const std::vector<std::string>& codes, double eta);

double icd9_numeric_value(const std::string& code);

// Cluster radius: max over clusters of the distance from any member to the
// cluster's medoid node (argmin of within-cluster distance sums, lowest
// index on ties).
double compute_delta(const MembershipMatrix& z, const DistanceModel& dm);

// ----- generator self-checks -----

struct TailViolationReport {
    double max_ratio = 0.0;     // max over the h grid of tail / bound
    double worst_h = 0.0;
    bool passed = true;         // max_ratio <= 1
    int grid_points = 0;
};

// Evaluates the population tail bound max_i sum_{j: d_ij > h} |W_ij| <=
// L * n_max * ((h - 2 delta) / d0)^-alpha over the grid of observed
// distances above 2 delta. Diagonals are excluded from tail sums.
TailViolationReport validate_population(const PopulationSimilarity& pw,
                                        const DistanceModel& dm,
                                        const MembershipMatrix& z, double alpha,
                                        double L);

// Numerical check of the decay-class envelope: symmetric, |entries| <= L,
// and eigenvalues inside [beta, 1/beta] (positive definiteness only when
// beta = 0). Heavily perturbed memberships can push centroids together and
// eject the generated intensity from the class; callers that need
// identifiability should screen with this.
bool block_intensity_in_class(const BlockIntensity& omega, double L, double beta = 0.0);

}  // namespace mvbsc
