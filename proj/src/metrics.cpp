#include "mvbsc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mvbsc/linalg.hpp"
#include "mvbsc/parallel.hpp"
#include "mvbsc/rng.hpp"

namespace mvbsc {

namespace {

Eigen::MatrixXi contingency(const MembershipMatrix& x, const MembershipMatrix& x0) {
    Eigen::MatrixXi table = Eigen::MatrixXi::Zero(x.K, x0.K);
    for (int i = 0; i < x.n; ++i)
        ++table(x.labels[static_cast<size_t>(i)], x0.labels[static_cast<size_t>(i)]);
    return table;
}

}  // namespace

double nmi(const MembershipMatrix& x, const MembershipMatrix& x0, bool* degenerate) {
    if (x.n != x0.n) throw InputError("nmi: partitions cover different node counts");
    if (degenerate) *degenerate = false;
    const Eigen::MatrixXi table = contingency(x, x0);
    const double n = static_cast<double>(x.n);

    const auto a = x.cluster_sizes();
    const auto b = x0.cluster_sizes();
    double ha = 0.0, hb = 0.0;
    for (int sz : a) ha += sz * std::log(sz / n);
    for (int sz : b) hb += sz * std::log(sz / n);
    if (ha == 0.0 || hb == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }

    // identical partitions up to relabeling have a bijective support: the
    // value is exactly 1 there, ahead of any rounding in the sums
    if (x.K == x0.K) {
        bool bijective = true;
        for (int k = 0; k < x.K && bijective; ++k) {
            int nonzero = 0;
            for (int l = 0; l < x0.K; ++l)
                if (table(k, l) > 0) {
                    ++nonzero;
                    if (table(k, l) != a[static_cast<size_t>(k)] ||
                        table(k, l) != b[static_cast<size_t>(l)])
                        bijective = false;
                }
            if (nonzero != 1) bijective = false;
        }
        if (bijective && x.K > 1) return 1.0;
    }

    double mi = 0.0;
    for (int k = 0; k < x.K; ++k)
        for (int l = 0; l < x0.K; ++l) {
            const int c = table(k, l);
            if (c == 0) continue;
            mi += c * std::log(n * c / (static_cast<double>(a[static_cast<size_t>(k)]) *
                                        b[static_cast<size_t>(l)]));
        }

    double value = mi / std::sqrt(ha * hb);
    value = std::clamp(value, 0.0, 1.0);
    return value;
}

double matched_accuracy(const MembershipMatrix& x, const MembershipMatrix& x0) {
    if (x.n != x0.n) throw InputError("matched_accuracy: partitions cover different node counts");
    const int K = std::max(x.K, x0.K);
    Eigen::MatrixXi table = Eigen::MatrixXi::Zero(K, K);
    table.topLeftCorner(x.K, x0.K) = contingency(x, x0);
    const std::vector<int> perm = best_label_matching(table);
    long long agree = 0;
    for (int k = 0; k < K; ++k) agree += table(k, perm[static_cast<size_t>(k)]);
    return static_cast<double>(agree) / static_cast<double>(x.n);
}

std::set<int> misclustered_set_oracle(const ClusteringResult& result,
                                      const MembershipMatrix& z_true) {
    const int n = z_true.n;
    if (result.labels.n != n) throw InputError("misclustered_set_oracle: size mismatch");
    const Matrix u_star = z_true.normalized_indicator();
    const Matrix q = procrustes_align(result.embedding, u_star);
    const Matrix aligned = u_star * q;
    const double threshold = std::sqrt(1.0 / (2.0 * static_cast<double>(z_true.n_max())));

    std::set<int> bad;
    for (int i = 0; i < n; ++i) {
        const int fitted = result.labels.labels[static_cast<size_t>(i)];
        const double dev = (result.centroids.row(fitted) - aligned.row(i)).norm();
        if (dev >= threshold) bad.insert(i);
    }
    return bad;
}

KSelection select_k(const std::vector<SimilarityView>& views, const DistanceModel& dm,
                    const MembershipMatrix& reference, int k_center, double span,
                    int step, const WeightRule& weight_rule,
                    const BandwidthRule& bandwidth_rule, const KMeansParams& kmeans_params,
                    std::uint64_t seed, int threads) {
    if (k_center < 1) throw ConfigError("select_k: k_center must be >= 1");
    if (span < 0.0) throw ConfigError("select_k: span must be >= 0");
    if (step < 1) throw ConfigError("select_k: step must be >= 1");
    const int lo = std::max(1, static_cast<int>(std::ceil((1.0 - span) * k_center)));
    const int hi = static_cast<int>(std::floor((1.0 + span) * k_center));
    if (hi < lo) throw ConfigError("select_k: empty scan range");

    std::vector<int> ks;
    for (int k = lo; k <= hi; k += step) ks.push_back(k);

    KSelection sel;
    sel.trace.resize(ks.size());
    parallel_for(static_cast<int>(ks.size()), threads, [&](int idx) {
        const int k = ks[static_cast<size_t>(idx)];
        const ClusteringResult res = run_mvbsc(views, dm, k, weight_rule, bandwidth_rule,
                                           kmeans_params,
                                           mix_seed(seed, static_cast<std::uint64_t>(k)));
        sel.trace[static_cast<size_t>(idx)] = {k, nmi(res.labels, reference)};
    });

    sel.chosen_k = sel.trace.front().first;
    double best = sel.trace.front().second;
    for (const auto& [k, score] : sel.trace) {
        if (score > best) {  // ties keep the smaller K (trace is ascending in K)
            best = score;
            sel.chosen_k = k;
        }
    }
    return sel;
}

namespace {

void enumerate_simplex(int m, double step, std::vector<double>& point,
                       std::vector<std::vector<double>>& out) {
    const int ticks = static_cast<int>(std::lround(1.0 / step));
    if (static_cast<int>(point.size()) == m - 1) {
        double rest = 1.0;
        for (double v : point) rest -= v;
        if (rest < -1e-12) return;
        std::vector<double> full = point;
        full.push_back(std::max(rest, 0.0));
        out.push_back(std::move(full));
        return;
    }
    double used = 0.0;
    for (double v : point) used += v;
    for (int t = 0; t <= ticks; ++t) {
        const double v = static_cast<double>(t) / ticks;
        if (used + v > 1.0 + 1e-12) break;
        point.push_back(v);
        enumerate_simplex(m, step, point, out);
        point.pop_back();
    }
}

}  // namespace

GridSearchResult lambda_grid_search(const std::vector<SimilarityView>& views,
                                    const DistanceModel& dm, int K,
                                    const MembershipMatrix& reference, double grid_step,
                                    GridCriterion criterion,
                                    const BandwidthRule& bandwidth_rule,
                                    const KMeansParams& kmeans_params, std::uint64_t seed,
                                    int threads) {
    const int m = static_cast<int>(views.size());
    if (m < 1) throw ConfigError("lambda_grid_search: no views");
    if (m > 3)
        throw ConfigError("lambda_grid_search: dense grids above m = 3 explode; "
                          "use the closed-form weight rules instead");
    if (!(grid_step > 0.0 && grid_step <= 1.0))
        throw ConfigError("lambda_grid_search: grid_step must be in (0, 1]");

    GridSearchResult result;
    if (m == 1) {
        result.best = WeightVector{{1.0}};
        result.best_score = 1.0;
        result.trace.push_back({{1.0}, 1.0});
        return result;
    }

    std::vector<std::vector<double>> grid;
    std::vector<double> scratch;
    enumerate_simplex(m, grid_step, scratch, grid);

    std::vector<double> scores(grid.size(), 0.0);
    parallel_for(static_cast<int>(grid.size()), threads, [&](int idx) {
        const ClusteringResult res =
            run_mvbsc(views, dm, K, WeightRule::fixed(grid[static_cast<size_t>(idx)]),
                  bandwidth_rule, kmeans_params, mix_seed(seed, static_cast<std::uint64_t>(idx)));
        scores[static_cast<size_t>(idx)] = criterion == GridCriterion::nmi
                                               ? nmi(res.labels, reference)
                                               : matched_accuracy(res.labels, reference);
    });

    size_t arg = 0;
    for (size_t i = 0; i < grid.size(); ++i) {
        result.trace.push_back({grid[i], scores[i]});
        if (scores[i] > scores[arg]) arg = i;
    }
    result.best = WeightVector{grid[arg]};
    result.best_score = scores[arg];
    return result;
}

}  // namespace mvbsc
