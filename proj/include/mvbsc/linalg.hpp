#pragma once

#include <vector>

#include "mvbsc/types.hpp"

namespace mvbsc {

// Top-k eigenpairs of a dense symmetric matrix, sorted by descending |value|
// or descending signed value.
struct EigenPairs {
    Vector values;   // length k
    Matrix vectors;  // n x k, column-orthonormal
};

enum class EigMode { by_abs_value, by_value };

// Deterministic ordering: the requested sort key first, ties broken by
// descending signed value then by the solver's original (ascending) index.
// Each eigenvector has its first coordinate above 1e-12 made positive.
EigenPairs eig_sym_topk(const SymMatrix& a, int k, EigMode mode);

// u * u^T for column-orthonormal u (checked within 1e-8).
SymMatrix projector(const Matrix& u);

// Orthonormal Q minimising ||u_hat - u_star * Q||_F (polar factor of
// u_star^T * u_hat). Rank-deficient cross-products yield an arbitrary
// orthonormal completion.
Matrix procrustes_align(const Matrix& u_hat, const Matrix& u_star);

// Permutation pi maximising sum_k confusion(k, pi[k]); exact O(K^3)
// assignment via shortest augmenting paths.
std::vector<int> best_label_matching(const Eigen::MatrixXi& confusion);

// Spectral norm of a symmetric matrix (largest |eigenvalue|).
double sym_spectral_norm(const SymMatrix& a);

}  // namespace mvbsc
