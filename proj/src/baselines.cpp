#include "mvbsc/baselines.hpp"

#include <cmath>

#include "mvbsc/linalg.hpp"

namespace mvbsc {

SymMatrix kernel_addition(const std::vector<SimilarityView>& views) {
    if (views.empty()) throw ConfigError("kernel_addition: no views");
    SymMatrix sum = views.front().w;
    for (size_t s = 1; s < views.size(); ++s) {
        if (views[s].w.rows() != sum.rows())
            throw DimensionError("kernel_addition: views differ in size");
        sum += views[s].w;
    }
    return sum;
}

SymMatrix laplacian(const SymMatrix& w, bool normalized) {
    const Eigen::Index n = w.rows();
    SymMatrix a = w.array() - w.minCoeff();
    a.diagonal().setZero();
    const Vector deg = a.rowwise().sum();
    if (!normalized) {
        SymMatrix l = -a;
        l.diagonal() += deg;
        return l;
    }
    Vector inv_sqrt(n);
    for (Eigen::Index i = 0; i < n; ++i)
        inv_sqrt[i] = deg[i] > 0.0 ? 1.0 / std::sqrt(deg[i]) : 0.0;
    SymMatrix l = -(inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal());
    for (Eigen::Index i = 0; i < n; ++i) l(i, i) += deg[i] > 0.0 ? 1.0 : 0.0;
    return l;
}

ClusteringResult spectral_cluster_baseline(const SymMatrix& w, int K,
                                           BaselineVariant variant,
                                           const KMeansParams& kmeans_params,
                                           std::uint64_t seed) {
    const int n = static_cast<int>(w.rows());
    if (K < 1 || K > n) throw ConfigError("spectral_cluster_baseline: need 1 <= K <= n");

    Matrix embedding;
    if (variant == BaselineVariant::raw) {
        embedding = eig_sym_topk(w, K, EigMode::by_abs_value).vectors;
    } else {
        const SymMatrix l = laplacian(w, variant == BaselineVariant::normalized_laplacian);
        // K smallest eigenvalues of L = K largest of -L
        embedding = eig_sym_topk((-l).eval(), K, EigMode::by_value).vectors;
        if (variant == BaselineVariant::normalized_laplacian) {
            for (int i = 0; i < n; ++i) {
                const double norm = embedding.row(i).norm();
                if (norm > 0.0) embedding.row(i) /= norm;
            }
        }
    }

    const KMeansResult km = kmeans(embedding, K, kmeans_params, seed);
    ClusteringResult result;
    result.labels = MembershipMatrix(K, km.labels);
    result.embedding = std::move(embedding);
    result.centroids = km.centroids;
    result.kmeans_objective = km.objective;
    result.weights = WeightVector{{1.0}};
    return result;
}

}  // namespace mvbsc
