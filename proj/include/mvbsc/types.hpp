#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mvbsc/errors.hpp"

namespace mvbsc {

// Raw carrier for symmetric n x n similarity/population matrices.
using SymMatrix = Eigen::MatrixXd;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline void symmetrize(SymMatrix& a) {
    a = ((a + a.transpose()) * 0.5).eval();
}

// Hard K-partition of n nodes. Labels are 0-based internally; file formats
// and reports use 1-based group ids.
struct MembershipMatrix {
    int n = 0;
    int K = 0;
    std::vector<int> labels;  // size n, values in [0, K)

    MembershipMatrix() = default;
    MembershipMatrix(int K_, std::vector<int> labels_);

    std::vector<int> cluster_sizes() const;
    int n_min() const;
    int n_max() const;
    std::vector<std::vector<int>> groups() const;  // node indices per cluster

    // n x K indicator matrix Z
    Matrix indicator() const;
    // Z * diag(1/sqrt(n_k)): orthonormal basis of the membership subspace
    Matrix normalized_indicator() const;

    bool operator==(const MembershipMatrix& other) const {
        return n == other.n && K == other.K && labels == other.labels;
    }
};

// Pairwise prior distances with the minimum gap d0 and the optional cluster
// radius bound delta (the confidence lever on the prior knowledge).
struct DistanceModel {
    int n = 0;
    Matrix d;  // n x n, symmetric, zero diagonal, positive off-diagonal
    double d0 = 0.0;
    std::optional<double> delta;

    static DistanceModel from_matrix(Matrix dist, std::optional<double> delta = std::nullopt);
};

// K x K block intensity in the polynomial-decay class.
struct BlockIntensity {
    int K = 0;
    Matrix omega;  // symmetric, entries in [-L, L]
    double L = 1.0;
    double alpha = 0.0;   // decay exponent, >= 0
    double beta = 0.0;    // eigenvalue bound in (0, 1]; 0 = unknown
};

// One observed view: symmetric W with constant diagonal omega0 and bound L.
// sigma/alpha are generator metadata; absent for real data.
struct SimilarityView {
    SymMatrix w;
    double L = 1.0;
    double omega0 = 1.0;
    std::optional<double> sigma;
    std::optional<double> alpha;
    std::vector<std::string> ids;  // node identifiers; empty = index-identified

    int n() const { return static_cast<int>(w.rows()); }
};

// Noise-free population similarity Z* Omega Z*^T.
struct PopulationSimilarity {
    SymMatrix script_w;
    double L = 1.0;
    double alpha = 0.0;
};

// Convex view weights.
struct WeightVector {
    std::vector<double> lambdas;

    int m() const { return static_cast<int>(lambdas.size()); }
    void validate(double tol = 1e-9) const;
};

// Per-view noise/signal diagnostics feeding the weight rules.
struct ViewDiagnostics {
    std::optional<double> sigma_hat;  // absent when the weight rule skipped estimation
    double gamma_hat = 0.0;           // |K-th largest-in-magnitude eigenvalue| of the banded view
    double h = 0.0;                   // bandwidth used
    Matrix omega_hat;                 // K x K estimated block means (may be empty)
    bool degenerate = false;          // gamma_hat <= 0: view excluded from fusion
};

struct ClusteringResult {
    MembershipMatrix labels;
    Matrix embedding;           // n x K, orthonormal columns
    Matrix centroids;           // K x K
    WeightVector weights;       // length m; excluded views carry 0
    std::vector<double> bandwidths;
    double kmeans_objective = 0.0;
    std::vector<ViewDiagnostics> diagnostics;
    std::vector<std::string> warnings;
};

}  // namespace mvbsc
