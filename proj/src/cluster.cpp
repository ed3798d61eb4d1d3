#include "mvbsc/cluster.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mvbsc/rng.hpp"
#include "mvbsc/weights.hpp"

namespace mvbsc {

namespace {

double squared_distance(const Matrix& points, int i, const Matrix& centroids, int k) {
    return (points.row(i) - centroids.row(k)).squaredNorm();
}

// k-means++ seeding
Matrix seed_centroids(const Matrix& points, int K, Rng& rng) {
    const int n = static_cast<int>(points.rows());
    Matrix centroids(K, points.cols());
    const int first = static_cast<int>(rng.uniform_int(0, n - 1));
    centroids.row(0) = points.row(first);

    Vector dist2(n);
    for (int i = 0; i < n; ++i) dist2[i] = (points.row(i) - centroids.row(0)).squaredNorm();

    for (int k = 1; k < K; ++k) {
        const double total = dist2.sum();
        int chosen;
        if (total > 0.0) {
            const double r = rng.uniform() * total;
            double acc = 0.0;
            chosen = n - 1;
            for (int i = 0; i < n; ++i) {
                acc += dist2[i];
                if (acc >= r) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = static_cast<int>(rng.uniform_int(0, n - 1));
        }
        centroids.row(k) = points.row(chosen);
        for (int i = 0; i < n; ++i)
            dist2[i] = std::min(dist2[i], (points.row(i) - centroids.row(k)).squaredNorm());
    }
    return centroids;
}

struct LloydRun {
    std::vector<int> labels;
    Matrix centroids;
    double objective = std::numeric_limits<double>::infinity();
    std::vector<double> history;
};

LloydRun lloyd(const Matrix& points, int K, const KMeansParams& params, Rng& rng) {
    const int n = static_cast<int>(points.rows());
    LloydRun run;
    run.centroids = seed_centroids(points, K, rng);
    run.labels.assign(static_cast<size_t>(n), 0);

    double prev_obj = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < params.max_iter; ++iter) {
        // assignment step; ties go to the lowest centroid index
        bool changed = false;
        double obj = 0.0;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = squared_distance(points, i, run.centroids, 0);
            for (int k = 1; k < K; ++k) {
                const double d = squared_distance(points, i, run.centroids, k);
                if (d < best_d) {
                    best_d = d;
                    best = k;
                }
            }
            if (run.labels[static_cast<size_t>(i)] != best) {
                run.labels[static_cast<size_t>(i)] = best;
                changed = true;
            }
            obj += best_d;
        }

        // empty-cluster repair: reseed at the point farthest from its centroid
        std::vector<int> counts(static_cast<size_t>(K), 0);
        for (int g : run.labels) ++counts[static_cast<size_t>(g)];
        std::vector<char> taken(static_cast<size_t>(n), false);
        bool repaired = false;
        for (int k = 0; k < K; ++k) {
            if (counts[static_cast<size_t>(k)] > 0) continue;
            int far = -1;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                if (taken[static_cast<size_t>(i)]) continue;
                if (counts[static_cast<size_t>(run.labels[static_cast<size_t>(i)])] <= 1) continue;
                const double d = squared_distance(points, i, run.centroids,
                                                  run.labels[static_cast<size_t>(i)]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far < 0) throw NumericalError("kmeans: cannot repair empty cluster");
            --counts[static_cast<size_t>(run.labels[static_cast<size_t>(far)])];
            run.labels[static_cast<size_t>(far)] = k;
            counts[static_cast<size_t>(k)] = 1;
            run.centroids.row(k) = points.row(far);
            taken[static_cast<size_t>(far)] = true;
            repaired = true;
        }
        if (repaired) {
            changed = true;
            obj = 0.0;
            for (int i = 0; i < n; ++i)
                obj += squared_distance(points, i, run.centroids, run.labels[static_cast<size_t>(i)]);
        }

        if (obj > prev_obj + 1e-9)
            throw NumericalError("kmeans: objective increased during Lloyd iteration");
        prev_obj = obj;
        if (params.track_history) run.history.push_back(obj);

        // update step
        Matrix sums = Matrix::Zero(K, points.cols());
        for (int i = 0; i < n; ++i) sums.row(run.labels[static_cast<size_t>(i)]) += points.row(i);
        for (int k = 0; k < K; ++k)
            run.centroids.row(k) = sums.row(k) / static_cast<double>(counts[static_cast<size_t>(k)]);

        if (!changed && iter > 0) break;
    }

    run.objective = 0.0;
    for (int i = 0; i < n; ++i)
        run.objective += squared_distance(points, i, run.centroids, run.labels[static_cast<size_t>(i)]);
    return run;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int K, const KMeansParams& params,
                    std::uint64_t seed) {
    const int n = static_cast<int>(points.rows());
    if (K < 1 || n < K) throw ConfigError("kmeans: need 1 <= K <= n");
    if (params.restarts < 1) throw ConfigError("kmeans: restarts must be >= 1");
    if (!points.allFinite()) throw InputError("kmeans: non-finite coordinates");

    LloydRun best;
    for (int r = 0; r < params.restarts; ++r) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
        LloydRun run = lloyd(points, K, params, rng);
        if (run.objective < best.objective) best = std::move(run);
    }

    KMeansResult result;
    result.labels = std::move(best.labels);
    result.centroids = std::move(best.centroids);
    result.objective = best.objective;
    result.objective_history = std::move(best.history);
    return result;
}

Matrix view_embedding(const SimilarityView& w, const DistanceModel& dm, double h, int K) {
    if (K > w.n()) throw DimensionError("view_embedding: K exceeds n");
    const SymMatrix banded = band(w.w, dm, h);
    return eig_sym_topk(banded, K, EigMode::by_abs_value).vectors;
}

Matrix fuse_projectors(const std::vector<Matrix>& embeddings, const WeightVector& lambda,
                       int K, std::vector<std::string>* warnings) {
    if (embeddings.empty()) throw ConfigError("fuse_projectors: no embeddings");
    if (static_cast<int>(lambda.lambdas.size()) != static_cast<int>(embeddings.size()))
        throw InputError("fuse_projectors: weight/embedding length mismatch");
    lambda.validate();
    const Eigen::Index n = embeddings.front().rows();
    for (const Matrix& u : embeddings)
        if (u.rows() != n || u.cols() != embeddings.front().cols())
            throw DimensionError("fuse_projectors: embeddings differ in shape");

    // M = sum_s lambda_s U_s U_s^T = B B^T with B = [sqrt(lambda_s) U_s];
    // the top-K eigenpairs of M come from the (m K) x (m K) Gram of B.
    std::vector<int> active;
    for (size_t s = 0; s < lambda.lambdas.size(); ++s)
        if (lambda.lambdas[s] > 0.0) active.push_back(static_cast<int>(s));
    if (active.empty()) throw ConfigError("fuse_projectors: all weights are zero");

    const Eigen::Index kc = embeddings.front().cols();
    Matrix b(n, static_cast<Eigen::Index>(active.size()) * kc);
    for (size_t t = 0; t < active.size(); ++t)
        b.middleCols(static_cast<Eigen::Index>(t) * kc, kc) =
            std::sqrt(lambda.lambdas[static_cast<size_t>(active[t])]) *
            embeddings[static_cast<size_t>(active[t])];

    const Matrix gram = b.transpose() * b;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
    if (solver.info() != Eigen::Success)
        throw NumericalError("fuse_projectors: Gram eigendecomposition failed");

    const Eigen::Index r = gram.rows();
    if (K > r) throw DimensionError("fuse_projectors: K exceeds fused rank bound");
    // eigenvalues ascending; top-K are the last K (signed order; M is PSD)
    const double gap_low = K < r ? solver.eigenvalues()[r - K - 1] : 0.0;
    if (warnings && std::abs(solver.eigenvalues()[r - K] - gap_low) <= 1e-12)
        warnings->push_back("fuse_projectors: K-th and (K+1)-th eigenvalues coincide; "
                            "fused subspace is ambiguous");

    Matrix fused(n, K);
    for (int j = 0; j < K; ++j) {
        const Eigen::Index idx = r - 1 - j;
        const double value = solver.eigenvalues()[idx];
        if (!(value > 1e-13))
            throw NumericalError("fuse_projectors: fused matrix is rank deficient");
        fused.col(j) = b * solver.eigenvectors().col(idx) / std::sqrt(value);
    }
    for (int j = 0; j < K; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = fused(i, j);
            if (std::abs(x) > 1e-12) {
                if (x < 0) fused.col(j) = -fused.col(j);
                break;
            }
        }
    }
    return fused;
}

std::vector<double> resolve_bandwidths(const std::vector<SimilarityView>& views,
                                       const DistanceModel& dm, int K,
                                       const BandwidthRule& rule) {
    const size_t m = views.size();
    std::vector<double> h(m);
    if (rule.kind == BandwidthRule::Kind::fixed) {
        if (rule.fixed_h.size() == 1) {
            std::fill(h.begin(), h.end(), rule.fixed_h.front());
        } else if (rule.fixed_h.size() == m) {
            h = rule.fixed_h;
        } else {
            throw ConfigError("bandwidth rule: fixed h must list 1 or m values");
        }
        for (double v : h)
            if (v < 0.0) throw ConfigError("bandwidth rule: h must be >= 0");
        return h;
    }

    const int n = views.front().n();
    const int n_max = rule.n_max.value_or((n + K - 1) / K);
    const BandwidthVariant variant = rule.kind == BandwidthRule::Kind::theorem34
                                         ? BandwidthVariant::theorem34
                                         : BandwidthVariant::simulation;
    for (size_t s = 0; s < m; ++s) {
        if (!views[s].alpha.has_value())
            throw ConfigError("bandwidth rule: view " + std::to_string(s + 1) +
                              " has no decay exponent; use a fixed bandwidth");
        h[s] = select_bandwidth(dm, n_max, *views[s].alpha, views[s].L, n, variant);
    }
    return h;
}

ClusteringResult run_mvbsc(const std::vector<SimilarityView>& views, const DistanceModel& dm,
                       int K, const WeightRule& weight_rule, const BandwidthRule& bandwidth_rule,
                       const KMeansParams& kmeans_params, std::uint64_t seed) {
    if (views.empty()) throw ConfigError("mvbsc: need at least one view");
    const int n = views.front().n();
    if (dm.n != n) throw InputError("mvbsc: distance model size differs from views");
    for (const auto& v : views)
        if (v.n() != n) throw InputError("mvbsc: views differ in size");
    if (K < 1 || K > n) throw ConfigError("mvbsc: need 1 <= K <= n");

    const size_t m = views.size();
    ClusteringResult result;
    result.bandwidths = resolve_bandwidths(views, dm, K, bandwidth_rule);
    result.diagnostics.resize(m);

    std::vector<Matrix> embeddings(m);
    std::vector<char> excluded(m, false);
    size_t active_count = 0;
    for (size_t s = 0; s < m; ++s) {
        const SymMatrix banded = band(views[s].w, dm, result.bandwidths[s]);
        const EigenPairs pairs = eig_sym_topk(banded, K, EigMode::by_abs_value);
        embeddings[s] = pairs.vectors;
        auto& diag = result.diagnostics[s];
        diag.h = result.bandwidths[s];
        diag.gamma_hat = std::abs(pairs.values[K - 1]);
        const double scale = std::abs(pairs.values[0]);
        if (!(diag.gamma_hat > 0.0) || diag.gamma_hat <= 1e-13 * std::max(1.0, scale)) {
            if (m == 1)
                throw NumericalError("mvbsc: the only view is spectrally degenerate (gamma_K ~ 0)");
            diag.degenerate = true;
            excluded[s] = true;
            result.warnings.push_back("mvbsc: view " + std::to_string(s + 1) +
                                      " excluded (gamma_K ~ 0)");
            continue;
        }
        ++active_count;
    }
    if (active_count == 0) throw NumericalError("mvbsc: all views are degenerate");

    // weights over the active views
    std::vector<double> lambdas(m, 0.0);
    switch (weight_rule.kind) {
        case WeightRule::Kind::uniform: {
            for (size_t s = 0; s < m; ++s)
                if (!excluded[s]) lambdas[s] = 1.0 / static_cast<double>(active_count);
            break;
        }
        case WeightRule::Kind::fixed: {
            if (weight_rule.fixed_lambdas.size() != m)
                throw ConfigError("mvbsc: fixed weights must list one value per view");
            WeightVector fixed{weight_rule.fixed_lambdas};
            fixed.validate();
            for (size_t s = 0; s < m; ++s) {
                if (excluded[s] && fixed.lambdas[s] > 0.0)
                    throw NumericalError("mvbsc: fixed weight on degenerate view " +
                                         std::to_string(s + 1));
                lambdas[s] = fixed.lambdas[s];
            }
            break;
        }
        case WeightRule::Kind::snr:
        case WeightRule::Kind::q: {
            // uniform-weight pilot supplies the membership for sigma estimation
            std::vector<double> pilot_lambda(m, 0.0);
            for (size_t s = 0; s < m; ++s)
                if (!excluded[s]) pilot_lambda[s] = 1.0 / static_cast<double>(active_count);
            std::vector<std::string> pilot_warnings;
            const Matrix pilot_fused =
                fuse_projectors(embeddings, WeightVector{pilot_lambda}, K, &pilot_warnings);
            const KMeansResult pilot_km =
                kmeans(pilot_fused, K, kmeans_params, mix_seed(seed, 1));
            const MembershipMatrix pilot_z(K, pilot_km.labels);

            std::vector<ViewDiagnostics> active_diags;
            std::vector<size_t> active_idx;
            bool any_zero_sigma = false;
            for (size_t s = 0; s < m; ++s) {
                if (excluded[s]) continue;
                SigmaEstimate est = estimate_sigma(views[s], pilot_z);
                auto& diag = result.diagnostics[s];
                diag.sigma_hat = est.sigma_hat;
                diag.omega_hat = std::move(est.omega_hat);
                for (auto& msg : est.warnings) result.warnings.push_back(std::move(msg));
                if (est.sigma_hat <= 1e-12) any_zero_sigma = true;
                active_diags.push_back(diag);
                active_idx.push_back(s);
            }

            if (any_zero_sigma) {
                // noiseless views dominate: spread the mass over them
                size_t zero_count = 0;
                for (const auto& d : active_diags)
                    if (*d.sigma_hat <= 1e-12) ++zero_count;
                for (size_t t = 0; t < active_idx.size(); ++t)
                    lambdas[active_idx[t]] = *active_diags[t].sigma_hat <= 1e-12
                                                 ? 1.0 / static_cast<double>(zero_count)
                                                 : 0.0;
                result.warnings.push_back(
                    "mvbsc: sigma_hat = 0 for some view; weights set to the noiseless views");
            } else {
                const WeightVector lw = weight_rule.kind == WeightRule::Kind::snr
                                            ? lambda_snr(active_diags)
                                            : lambda_q(active_diags);
                for (size_t t = 0; t < active_idx.size(); ++t)
                    lambdas[active_idx[t]] = lw.lambdas[t];
            }
            break;
        }
    }
    result.weights = WeightVector{lambdas};

    result.embedding = fuse_projectors(embeddings, result.weights, K, &result.warnings);
    const KMeansResult km = kmeans(result.embedding, K, kmeans_params, mix_seed(seed, 2));
    result.labels = MembershipMatrix(K, km.labels);
    result.centroids = km.centroids;
    result.kmeans_objective = km.objective;
    return result;
}

}  // namespace mvbsc
