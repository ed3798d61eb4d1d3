#include "mvbsc/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mvbsc {

namespace {

void fix_sign(Matrix& vectors) {
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
        for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
            const double x = vectors(i, j);
            if (std::abs(x) > 1e-12) {
                if (x < 0) vectors.col(j) = -vectors.col(j);
                break;
            }
        }
    }
}

}  // namespace

EigenPairs eig_sym_topk(const SymMatrix& a, int k, EigMode mode) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw DimensionError("eig_sym_topk: matrix is not square");
    if (k < 1 || k > n) throw DimensionError("eig_sym_topk: k must be in [1, n]");
    if (!a.allFinite()) throw InputError("eig_sym_topk: non-finite entries");

    const SymMatrix sym = (a + a.transpose()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eig_sym_topk: eigendecomposition failed");

    const Vector& vals = solver.eigenvalues();  // ascending
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    auto tie_break = [&](int i, int j) {
        if (vals[i] != vals[j]) return vals[i] > vals[j];
        return i < j;
    };
    if (mode == EigMode::by_abs_value) {
        std::sort(order.begin(), order.end(), [&](int i, int j) {
            const double ai = std::abs(vals[i]), aj = std::abs(vals[j]);
            if (ai != aj) return ai > aj;
            return tie_break(i, j);
        });
    } else {
        std::sort(order.begin(), order.end(), tie_break);
    }

    EigenPairs out;
    out.values.resize(k);
    out.vectors.resize(n, k);
    for (int j = 0; j < k; ++j) {
        out.values[j] = vals[order[j]];
        out.vectors.col(j) = solver.eigenvectors().col(order[j]);
    }
    fix_sign(out.vectors);
    return out;
}

SymMatrix projector(const Matrix& u) {
    const Matrix gram = u.transpose() * u;
    const double dev = (gram - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
    if (dev > 1e-8) throw InputError("projector: columns not orthonormal (deviation " +
                                     std::to_string(dev) + ")");
    return u * u.transpose();
}

Matrix procrustes_align(const Matrix& u_hat, const Matrix& u_star) {
    if (u_hat.rows() != u_star.rows() || u_hat.cols() != u_star.cols())
        throw DimensionError("procrustes_align: shape mismatch");
    const Matrix cross = u_star.transpose() * u_hat;
    Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

std::vector<int> best_label_matching(const Eigen::MatrixXi& confusion) {
    const int n = static_cast<int>(confusion.rows());
    if (confusion.cols() != n) throw DimensionError("best_label_matching: matrix not square");
    if (n == 0) return {};
    if ((confusion.array() < 0).any())
        throw InputError("best_label_matching: negative counts");

    // Min-cost assignment on negated counts (potentials + augmenting paths);
    // rows/columns are 1-based inside, p[j] = row matched to column j (0 = free).
    const long long kInf = std::numeric_limits<long long>::max() / 4;
    auto cost = [&](int i, int j) {  // 1-based
        return -static_cast<long long>(confusion(i - 1, j - 1));
    };

    std::vector<long long> u(n + 1, 0), v(n + 1, 0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<long long> minv(n + 1, kInf);
        std::vector<char> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            long long delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const long long cur = cost(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> perm(static_cast<size_t>(n), -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) perm[static_cast<size_t>(p[j] - 1)] = j - 1;
    return perm;
}

double sym_spectral_norm(const SymMatrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(((a + a.transpose()) * 0.5).eval(),
                                                 Eigen::EigenvaluesOnly);
    const Vector& vals = solver.eigenvalues();
    return std::max(std::abs(vals[0]), std::abs(vals[vals.size() - 1]));
}

}  // namespace mvbsc
