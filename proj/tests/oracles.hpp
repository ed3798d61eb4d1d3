// Test-only reference implementations, independent of the library code paths
// they are used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "mvbsc/rng.hpp"

namespace oracles {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// All partitions of n items into exactly K nonempty blocks, as label vectors
// in restricted-growth form.
inline void enumerate_partitions(int n, int K, std::vector<std::vector<int>>& out) {
    std::vector<int> labels(static_cast<size_t>(n), 0);
    // labels[i] <= 1 + max(labels[0..i-1]); keep only those using exactly K labels
    std::function<void(int, int)> rec = [&](int i, int used) {
        if (n - i < K - used) return;  // cannot reach K blocks anymore
        if (i == n) {
            if (used == K) out.push_back(labels);
            return;
        }
        for (int g = 0; g < std::min(used + 1, K); ++g) {
            labels[static_cast<size_t>(i)] = g;
            rec(i + 1, std::max(used, g + 1));
        }
    };
    rec(0, 0);
}

inline double kmeans_objective(const MatrixXd& points, const std::vector<int>& labels, int K) {
    const int n = static_cast<int>(points.rows());
    MatrixXd centroids = MatrixXd::Zero(K, points.cols());
    std::vector<int> counts(static_cast<size_t>(K), 0);
    for (int i = 0; i < n; ++i) {
        centroids.row(labels[static_cast<size_t>(i)]) += points.row(i);
        ++counts[static_cast<size_t>(labels[static_cast<size_t>(i)])];
    }
    for (int k = 0; k < K; ++k) centroids.row(k) /= static_cast<double>(counts[static_cast<size_t>(k)]);
    double obj = 0.0;
    for (int i = 0; i < n; ++i)
        obj += (points.row(i) - centroids.row(labels[static_cast<size_t>(i)])).squaredNorm();
    return obj;
}

// Global optimum of the k-means objective by exhaustive partition search.
inline double brute_force_kmeans(const MatrixXd& points, int K) {
    std::vector<std::vector<int>> partitions;
    enumerate_partitions(static_cast<int>(points.rows()), K, partitions);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& labels : partitions)
        best = std::min(best, kmeans_objective(points, labels, K));
    return best;
}

// NMI from scratch: map-based contingency table, explicit MI and entropies.
inline double nmi_contingency(const std::vector<int>& x, const std::vector<int>& x0) {
    const double n = static_cast<double>(x.size());
    std::map<std::pair<int, int>, int> joint;
    std::map<int, int> ax, bx;
    for (size_t i = 0; i < x.size(); ++i) {
        ++joint[{x[i], x0[i]}];
        ++ax[x[i]];
        ++bx[x0[i]];
    }
    double mi = 0.0;
    for (const auto& [cell, count] : joint) {
        const double pxy = count / n;
        const double px = ax[cell.first] / n;
        const double py = bx[cell.second] / n;
        mi += pxy * std::log(pxy / (px * py));
    }
    double hx = 0.0, hy = 0.0;
    for (const auto& [label, count] : ax) hx -= (count / n) * std::log(count / n);
    for (const auto& [label, count] : bx) hy -= (count / n) * std::log(count / n);
    if (hx == 0.0 || hy == 0.0) return 0.0;
    return mi / std::sqrt(hx * hy);
}

// Closed-form eigenvalues of symmetric 2x2 / 3x3 matrices (descending).
inline std::vector<double> sym_eigenvalues_2x2(const MatrixXd& a) {
    const double mean = (a(0, 0) + a(1, 1)) / 2.0;
    const double disc = std::sqrt(std::pow((a(0, 0) - a(1, 1)) / 2.0, 2) + a(0, 1) * a(0, 1));
    return {mean + disc, mean - disc};
}

inline std::vector<double> sym_eigenvalues_3x3(const MatrixXd& a) {
    const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    const double q = a.trace() / 3.0;
    const double p2 = std::pow(a(0, 0) - q, 2) + std::pow(a(1, 1) - q, 2) +
                      std::pow(a(2, 2) - q, 2) + 2.0 * p1;
    if (p2 <= 1e-300) return {q, q, q};
    const double p = std::sqrt(p2 / 6.0);
    const MatrixXd b = (a - q * MatrixXd::Identity(3, 3)) / p;
    double r = b.determinant() / 2.0;
    r = std::clamp(r, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    const double e2 = 3.0 * q - e1 - e3;
    std::vector<double> vals = {e1, e2, e3};
    std::sort(vals.rbegin(), vals.rend());
    return vals;
}

// Exhaustive max-weight assignment over all K! permutations.
inline long long best_assignment_exhaustive(const Eigen::MatrixXi& confusion) {
    const int K = static_cast<int>(confusion.rows());
    std::vector<int> perm(static_cast<size_t>(K));
    std::iota(perm.begin(), perm.end(), 0);
    long long best = std::numeric_limits<long long>::min();
    do {
        long long total = 0;
        for (int k = 0; k < K; ++k) total += confusion(k, perm[static_cast<size_t>(k)]);
        best = std::max(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Haar-ish random orthonormal matrix via QR of a Gaussian draw.
inline MatrixXd random_orthonormal(mvbsc::Rng& rng, int n, int k) {
    MatrixXd g(n, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<MatrixXd> qr(g);
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, k);
    return q;
}

// Random point on the probability simplex (uniform via exponential spacings).
inline std::vector<double> random_simplex(mvbsc::Rng& rng, int m) {
    std::vector<double> v(static_cast<size_t>(m));
    double total = 0.0;
    for (double& x : v) {
        x = -std::log(1.0 - rng.uniform());
        total += x;
    }
    for (double& x : v) x /= total;
    return v;
}

// Exhaustive minimizer of the weighted consensus objective
// sum_s lambda_s || P_s - P_Z ||_F^2 over all K-partitions Z.
inline std::vector<int> consensus_partition_exhaustive(const std::vector<MatrixXd>& projectors,
                                                       const std::vector<double>& lambda,
                                                       int n, int K) {
    std::vector<std::vector<int>> partitions;
    enumerate_partitions(n, K, partitions);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_labels;
    for (const auto& labels : partitions) {
        MatrixXd z = MatrixXd::Zero(n, K);
        std::vector<int> counts(static_cast<size_t>(K), 0);
        for (int i = 0; i < n; ++i) {
            z(i, labels[static_cast<size_t>(i)]) = 1.0;
            ++counts[static_cast<size_t>(labels[static_cast<size_t>(i)])];
        }
        MatrixXd pz = MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (labels[static_cast<size_t>(i)] == labels[static_cast<size_t>(j)])
                    pz(i, j) = 1.0 / counts[static_cast<size_t>(labels[static_cast<size_t>(i)])];
        double obj = 0.0;
        for (size_t s = 0; s < projectors.size(); ++s)
            obj += lambda[s] * (projectors[s] - pz).squaredNorm();
        if (obj < best) {
            best = obj;
            best_labels = labels;
        }
    }
    return best_labels;
}

}  // namespace oracles
