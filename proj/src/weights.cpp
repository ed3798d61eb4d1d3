#include "mvbsc/weights.hpp"

#include <cmath>

#include "mvbsc/cluster.hpp"
#include "mvbsc/linalg.hpp"

namespace mvbsc {

SigmaEstimate estimate_sigma(const SimilarityView& w, const MembershipMatrix& z) {
    if (w.n() != z.n) throw InputError("estimate_sigma: view and membership sizes differ");
    const int K = z.K;
    const auto groups = z.groups();

    SigmaEstimate out;
    out.omega_hat = Matrix::Zero(K, K);

    double mse_within = 0.0;
    for (int k = 0; k < K; ++k) {
        const auto& g = groups[static_cast<size_t>(k)];
        const auto nk = static_cast<long long>(g.size());
        const long long pairs = nk * (nk - 1) / 2;
        if (pairs > 0) {
            double mean = 0.0;
            for (size_t a = 0; a < g.size(); ++a)
                for (size_t b = a + 1; b < g.size(); ++b) mean += w.w(g[a], g[b]);
            mean /= static_cast<double>(pairs);
            out.omega_hat(k, k) = mean;
        }
        if (pairs - 1 <= 0) {
            out.warnings.push_back("estimate_sigma: cluster " + std::to_string(k + 1) +
                                   " too small for a within-group term; skipped");
            continue;
        }
        double ss = 0.0;
        for (size_t a = 0; a < g.size(); ++a)
            for (size_t b = a + 1; b < g.size(); ++b) {
                const double dev = w.w(g[a], g[b]) - out.omega_hat(k, k);
                ss += dev * dev;
            }
        mse_within += ss / static_cast<double>(pairs - 1);
    }

    double mse_across = 0.0;
    for (int k = 0; k < K; ++k) {
        for (int l = k + 1; l < K; ++l) {
            const auto& gk = groups[static_cast<size_t>(k)];
            const auto& gl = groups[static_cast<size_t>(l)];
            const long long pairs = static_cast<long long>(gk.size()) * static_cast<long long>(gl.size());
            double mean = 0.0;
            for (int i : gk)
                for (int j : gl) mean += w.w(i, j);
            mean /= static_cast<double>(pairs);
            out.omega_hat(k, l) = mean;
            out.omega_hat(l, k) = mean;
            if (pairs - 1 <= 0) {
                out.warnings.push_back("estimate_sigma: cluster pair (" + std::to_string(k + 1) +
                                       ", " + std::to_string(l + 1) +
                                       ") too small for an across-group term; skipped");
                continue;
            }
            double ss = 0.0;
            for (int i : gk)
                for (int j : gl) {
                    const double dev = w.w(i, j) - mean;
                    ss += dev * dev;
                }
            mse_across += ss / static_cast<double>(pairs - 1);
        }
    }

    const double var = 2.0 / (static_cast<double>(K) * (K + 1)) * (mse_within + mse_across);
    out.sigma_hat = std::sqrt(std::max(var, 0.0));
    return out;
}

double estimate_gamma(const SymMatrix& banded, int K) {
    const EigenPairs pairs = eig_sym_topk(banded, K, EigMode::by_abs_value);
    return std::abs(pairs.values[K - 1]);
}

namespace {

WeightVector normalize_scores(std::vector<double> scores) {
    double total = 0.0;
    for (double s : scores) total += s;
    if (!(total > 0.0)) throw NumericalError("weight rule: all view scores vanish");
    for (double& s : scores) s /= total;
    // exact simplex: absorb rounding into the largest weight
    double sum = 0.0;
    size_t arg = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        sum += scores[i];
        if (scores[i] > scores[arg]) arg = i;
    }
    scores[arg] += 1.0 - sum;
    return WeightVector{std::move(scores)};
}

void check_diags(const std::vector<ViewDiagnostics>& diags, bool need_h) {
    if (diags.empty()) throw ConfigError("weight rule: no views");
    for (size_t s = 0; s < diags.size(); ++s) {
        if (!diags[s].sigma_hat.has_value())
            throw ConfigError("weight rule: sigma_hat missing for view " + std::to_string(s + 1));
        if (*diags[s].sigma_hat == 0.0)
            throw NumericalError("weight rule: degenerate view " + std::to_string(s + 1) +
                                 " with sigma_hat = 0");
        if (!(diags[s].gamma_hat > 0.0))
            throw NumericalError("weight rule: view " + std::to_string(s + 1) +
                                 " has nonpositive gamma_hat");
        if (need_h && !(diags[s].h > 0.0))
            throw ConfigError("weight rule: bandwidth missing for view " + std::to_string(s + 1));
    }
}

}  // namespace

WeightVector lambda_snr(const std::vector<ViewDiagnostics>& diags) {
    check_diags(diags, false);
    std::vector<double> scores(diags.size());
    for (size_t s = 0; s < diags.size(); ++s) {
        const double r = diags[s].gamma_hat / *diags[s].sigma_hat;
        scores[s] = r * r;
    }
    return normalize_scores(std::move(scores));
}

WeightVector lambda_q(const std::vector<ViewDiagnostics>& diags) {
    check_diags(diags, true);
    bool equal_h = true;
    for (size_t s = 1; s < diags.size(); ++s)
        if (diags[s].h != diags[0].h) equal_h = false;
    std::vector<double> scores(diags.size());
    for (size_t s = 0; s < diags.size(); ++s) {
        const double r = diags[s].gamma_hat / *diags[s].sigma_hat;
        // constant h cancels; skipping the division keeps the collapse to the
        // SNR rule bit-exact
        scores[s] = equal_h ? r * r : r * r / diags[s].h;
    }
    return normalize_scores(std::move(scores));
}

double q_objective(const WeightVector& lambda, const std::vector<ViewDiagnostics>& diags) {
    if (lambda.lambdas.size() != diags.size())
        throw InputError("q_objective: weight/diagnostics length mismatch");
    double q = 0.0;
    for (size_t s = 0; s < diags.size(); ++s) {
        const double r = lambda.lambdas[s] * *diags[s].sigma_hat / diags[s].gamma_hat;
        q += r * r * diags[s].h;
    }
    return q;
}

MembershipMatrix pilot_clustering_for_sigma(const std::vector<SimilarityView>& views,
                                            const DistanceModel& dm, int K,
                                            const BandwidthRule& bandwidth,
                                            const KMeansParams& kmeans_params,
                                            std::uint64_t seed) {
    const ClusteringResult pilot =
        run_mvbsc(views, dm, K, WeightRule::uniform(), bandwidth, kmeans_params, seed);
    return pilot.labels;
}

}  // namespace mvbsc
