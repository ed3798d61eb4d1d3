#pragma once

#include <cstdint>
#include <vector>

#include "mvbsc/cluster.hpp"
#include "mvbsc/types.hpp"

namespace mvbsc {

// Elementwise sum of all view matrices (kernel addition).
SymMatrix kernel_addition(const std::vector<SimilarityView>& views);

// Graph Laplacian of w - min(w) (shifted to a nonnegative adjacency, zero
// diagonal). Normalized variant: I - D^-1/2 A D^-1/2 with isolated rows
// mapped to zero.
SymMatrix laplacian(const SymMatrix& w, bool normalized);

enum class BaselineVariant { raw, laplacian, normalized_laplacian };

// Plain spectral clustering: raw uses the top-K absolute-eigenvalue
// eigenvectors of w; the Laplacian variants use the K smallest eigenvalues
// of L, with row normalization for the normalized variant.
ClusteringResult spectral_cluster_baseline(const SymMatrix& w, int K,
                                           BaselineVariant variant,
                                           const KMeansParams& kmeans_params,
                                           std::uint64_t seed);

}  // namespace mvbsc
