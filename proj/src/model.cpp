#include "mvbsc/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

namespace mvbsc {

MembershipMatrix::MembershipMatrix(int K_, std::vector<int> labels_)
    : n(static_cast<int>(labels_.size())), K(K_), labels(std::move(labels_)) {
    if (K < 1) throw InputError("MembershipMatrix: K must be >= 1");
    std::vector<int> sizes(static_cast<size_t>(K), 0);
    for (int g : labels) {
        if (g < 0 || g >= K) throw InputError("MembershipMatrix: label out of range");
        ++sizes[static_cast<size_t>(g)];
    }
    for (int k = 0; k < K; ++k)
        if (sizes[static_cast<size_t>(k)] == 0)
            throw InputError("MembershipMatrix: empty group " + std::to_string(k + 1));
}

std::vector<int> MembershipMatrix::cluster_sizes() const {
    std::vector<int> sizes(static_cast<size_t>(K), 0);
    for (int g : labels) ++sizes[static_cast<size_t>(g)];
    return sizes;
}

int MembershipMatrix::n_min() const {
    const auto s = cluster_sizes();
    return *std::min_element(s.begin(), s.end());
}

int MembershipMatrix::n_max() const {
    const auto s = cluster_sizes();
    return *std::max_element(s.begin(), s.end());
}

std::vector<std::vector<int>> MembershipMatrix::groups() const {
    std::vector<std::vector<int>> g(static_cast<size_t>(K));
    for (int i = 0; i < n; ++i) g[static_cast<size_t>(labels[static_cast<size_t>(i)])].push_back(i);
    return g;
}

Matrix MembershipMatrix::indicator() const {
    Matrix z = Matrix::Zero(n, K);
    for (int i = 0; i < n; ++i) z(i, labels[static_cast<size_t>(i)]) = 1.0;
    return z;
}

Matrix MembershipMatrix::normalized_indicator() const {
    Matrix u = indicator();
    const auto sizes = cluster_sizes();
    for (int k = 0; k < K; ++k) u.col(k) /= std::sqrt(static_cast<double>(sizes[static_cast<size_t>(k)]));
    return u;
}

void WeightVector::validate(double tol) const {
    double sum = 0.0;
    for (double l : lambdas) {
        if (l < 0.0) throw ConfigError("weights must be nonnegative");
        sum += l;
    }
    if (std::abs(sum - 1.0) > tol) throw ConfigError("weights must sum to 1");
}

DistanceModel DistanceModel::from_matrix(Matrix dist, std::optional<double> delta) {
    DistanceModel dm;
    dm.n = static_cast<int>(dist.rows());
    if (dist.cols() != dm.n) throw InputError("DistanceModel: matrix not square");
    double d0 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dm.n; ++i) {
        if (dist(i, i) != 0.0) throw InputError("DistanceModel: nonzero diagonal");
        for (int j = i + 1; j < dm.n; ++j) {
            const double v = dist(i, j);
            if (!(v > 0.0)) throw InputError("DistanceModel: off-diagonal distances must be positive");
            if (std::abs(v - dist(j, i)) > 0.0) dist(j, i) = v;  // enforce exact symmetry
            d0 = std::min(d0, v);
        }
    }
    dm.d = std::move(dist);
    dm.d0 = dm.n > 1 ? d0 : 0.0;
    dm.delta = delta;
    return dm;
}

// ----- membership generators -----

MembershipMatrix membership_m1(int n, int K, std::uint64_t size_seed) {
    if (K < 1 || n < K) throw ConfigError("membership_m1: need n >= K >= 1");
    const int min_size = std::max(2, static_cast<int>(std::floor(0.35 * n / K)));
    if (n < 2 * K || n < min_size * K)
        throw ConfigError("membership_m1: n too small for K with the minimum-size rule");

    Rng rng(size_seed);
    std::vector<double> raw(static_cast<size_t>(K));
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
        raw[static_cast<size_t>(k)] = rng.uniform(0.45, 1.55);
        total += raw[static_cast<size_t>(k)];
    }

    std::vector<int> sizes(static_cast<size_t>(K));
    int sum = 0;
    for (int k = 0; k < K; ++k) {
        int s = static_cast<int>(std::lround(raw[static_cast<size_t>(k)] / total * n));
        s = std::max(s, min_size);
        sizes[static_cast<size_t>(k)] = s;
        sum += s;
    }
    // deterministic rebalance to hit sum(sizes) == n exactly
    while (sum > n) {
        int arg = 0;
        for (int k = 1; k < K; ++k)
            if (sizes[static_cast<size_t>(k)] > sizes[static_cast<size_t>(arg)]) arg = k;
        if (sizes[static_cast<size_t>(arg)] <= min_size)
            throw ConfigError("membership_m1: cannot satisfy minimum-size rule");
        --sizes[static_cast<size_t>(arg)];
        --sum;
    }
    while (sum < n) {
        int arg = 0;
        for (int k = 1; k < K; ++k)
            if (sizes[static_cast<size_t>(k)] < sizes[static_cast<size_t>(arg)]) arg = k;
        ++sizes[static_cast<size_t>(arg)];
        ++sum;
    }

    std::vector<int> labels(static_cast<size_t>(n));
    int pos = 0;
    for (int k = 0; k < K; ++k)
        for (int c = 0; c < sizes[static_cast<size_t>(k)]; ++c) labels[static_cast<size_t>(pos++)] = k;
    return MembershipMatrix(K, std::move(labels));
}

namespace {

// mean node index (1-based) per cluster
std::vector<double> mean_index_centroids(const MembershipMatrix& z) {
    std::vector<double> c(static_cast<size_t>(z.K), 0.0);
    std::vector<int> cnt(static_cast<size_t>(z.K), 0);
    for (int i = 0; i < z.n; ++i) {
        c[static_cast<size_t>(z.labels[static_cast<size_t>(i)])] += i + 1;
        ++cnt[static_cast<size_t>(z.labels[static_cast<size_t>(i)])];
    }
    for (int k = 0; k < z.K; ++k) c[static_cast<size_t>(k)] /= cnt[static_cast<size_t>(k)];
    return c;
}

}  // namespace

MembershipMatrix perturb_membership(const MembershipMatrix& z, double p, int l,
                                    std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw ConfigError("perturb_membership: p must be in [0, 1]");
    if (l < 1) throw ConfigError("perturb_membership: l must be >= 1");
    if (l >= z.K) throw ConfigError("perturb_membership: l must be < K");

    const auto centroids = mean_index_centroids(z);
    // l nearest other clusters per cluster, ties toward the lower index
    std::vector<std::vector<int>> neighbors(static_cast<size_t>(z.K));
    for (int k = 0; k < z.K; ++k) {
        std::vector<int> others;
        for (int j = 0; j < z.K; ++j)
            if (j != k) others.push_back(j);
        std::sort(others.begin(), others.end(), [&](int a, int b) {
            const double da = std::abs(centroids[static_cast<size_t>(a)] - centroids[static_cast<size_t>(k)]);
            const double db = std::abs(centroids[static_cast<size_t>(b)] - centroids[static_cast<size_t>(k)]);
            if (da != db) return da < db;
            return a < b;
        });
        others.resize(static_cast<size_t>(l));
        neighbors[static_cast<size_t>(k)] = std::move(others);
    }

    Rng rng(seed);
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<int> labels = z.labels;
        for (int i = 0; i < z.n; ++i) {
            if (rng.uniform() < p) {
                const auto& nb = neighbors[static_cast<size_t>(z.labels[static_cast<size_t>(i)])];
                labels[static_cast<size_t>(i)] =
                    nb[static_cast<size_t>(rng.uniform_int(0, l - 1))];
            }
        }
        std::vector<int> sizes(static_cast<size_t>(z.K), 0);
        for (int g : labels) ++sizes[static_cast<size_t>(g)];
        if (std::find(sizes.begin(), sizes.end(), 0) == sizes.end())
            return MembershipMatrix(z.K, std::move(labels));
    }
    throw NumericalError("perturb_membership: could not avoid empty clusters after 100 retries");
}

// ----- intensity / view generators -----

BlockIntensity omega_simulation(const MembershipMatrix& z, double alpha,
                                double diag_value, double offdiag_scale) {
    if (alpha < 0.0) throw ConfigError("omega_simulation: alpha must be >= 0");
    const auto c = mean_index_centroids(z);
    BlockIntensity out;
    out.K = z.K;
    out.alpha = alpha;
    out.omega = Matrix::Zero(z.K, z.K);
    for (int k = 0; k < z.K; ++k) {
        out.omega(k, k) = diag_value;
        for (int j = k + 1; j < z.K; ++j) {
            const double gap = std::abs(c[static_cast<size_t>(k)] - c[static_cast<size_t>(j)]);
            if (gap == 0.0)
                throw NumericalError("omega_simulation: coincident centroids for clusters " +
                                     std::to_string(k + 1) + " and " + std::to_string(j + 1));
            const double v = offdiag_scale * std::pow(gap, -(alpha + 1.0));
            out.omega(k, j) = v;
            out.omega(j, k) = v;
        }
    }
    out.L = out.omega.cwiseAbs().maxCoeff();
    return out;
}

PopulationSimilarity population_similarity(const MembershipMatrix& z,
                                           const BlockIntensity& omega) {
    if (omega.K != z.K) throw InputError("population_similarity: K mismatch");
    PopulationSimilarity pw;
    pw.script_w.resize(z.n, z.n);
    for (int i = 0; i < z.n; ++i)
        for (int j = 0; j < z.n; ++j)
            pw.script_w(i, j) = omega.omega(z.labels[static_cast<size_t>(i)],
                                            z.labels[static_cast<size_t>(j)]);
    pw.L = omega.L;
    pw.alpha = omega.alpha;
    return pw;
}

SimilarityView sample_view(const MembershipMatrix& z, const BlockIntensity& omega,
                           double sigma, ClipRange clip, double diag_value,
                           std::uint64_t seed) {
    if (sigma < 0.0) throw ConfigError("sample_view: sigma must be >= 0");
    if (!(clip.lo < clip.hi)) throw ConfigError("sample_view: invalid clip range");

    const PopulationSimilarity pw = population_similarity(z, omega);
    Rng rng(seed);
    SimilarityView view;
    view.w.resize(z.n, z.n);
    for (int i = 0; i < z.n; ++i) {
        view.w(i, i) = diag_value;
        for (int j = i + 1; j < z.n; ++j) {
            double v = pw.script_w(i, j);
            if (sigma > 0.0) v += rng.normal(0.0, sigma);
            v = std::clamp(v, clip.lo, clip.hi);
            view.w(i, j) = v;
            view.w(j, i) = v;
        }
    }
    view.L = std::max(std::abs(clip.lo), std::abs(clip.hi));
    view.omega0 = diag_value;
    view.sigma = sigma;
    view.alpha = omega.alpha;
    return view;
}

// ----- distance models -----

DistanceModel index_distance(int n, double scale) {
    if (n < 2) throw ConfigError("index_distance: need n >= 2");
    if (!(scale > 0.0)) throw ConfigError("index_distance: scale must be positive");
    Matrix d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(i, j) = std::abs(i - j) * scale;
    DistanceModel dm;
    dm.n = n;
    dm.d = std::move(d);
    dm.d0 = scale;
    return dm;
}

double icd9_numeric_value(const std::string& code) {
    std::string body = code;
    double offset = 0.0;
    if (!body.empty() && std::isalpha(static_cast<unsigned char>(body[0]))) {
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(body[0])));
        if (c == 'V')
            offset = 1000.0;
        else if (c == 'E')
            offset = 2000.0;
        else
            throw IngestionError("icd9_distance: unparseable code '" + code + "'");
        body = body.substr(1);
    }
    if (body.empty()) throw IngestionError("icd9_distance: unparseable code '" + code + "'");
    size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(body, &consumed);
    } catch (const std::exception&) {
        throw IngestionError("icd9_distance: unparseable code '" + code + "'");
    }
    if (consumed != body.size() || !(value >= 0.0))
        throw IngestionError("icd9_distance: unparseable code '" + code + "'");
    return offset + value;
}

DistanceModel icd9_distance(const std::vector<std::string>& codes, double eta) {
    const int n = static_cast<int>(codes.size());
    if (n < 2) throw ConfigError("icd9_distance: need at least 2 codes");
    if (!(eta > 0.0)) throw ConfigError("icd9_distance: eta must be positive");

    std::vector<double> num(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) num[static_cast<size_t>(i)] = icd9_numeric_value(codes[static_cast<size_t>(i)]);

    Matrix d = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double v = std::abs(num[static_cast<size_t>(i)] - num[static_cast<size_t>(j)]);
            if (v == 0.0 && codes[static_cast<size_t>(i)] != codes[static_cast<size_t>(j)]) v = eta;
            if (v == 0.0)
                throw IngestionError("icd9_distance: duplicate code '" + codes[static_cast<size_t>(i)] + "'");
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return DistanceModel::from_matrix(std::move(d));
}

double compute_delta(const MembershipMatrix& z, const DistanceModel& dm) {
    if (dm.n != z.n) throw InputError("compute_delta: size mismatch");
    double delta = 0.0;
    for (const auto& members : z.groups()) {
        // medoid: argmin of within-cluster distance sums, lowest index on ties
        int medoid = members.front();
        double best = std::numeric_limits<double>::infinity();
        for (int i : members) {
            double s = 0.0;
            for (int j : members) s += dm.d(i, j);
            if (s < best) {
                best = s;
                medoid = i;
            }
        }
        for (int i : members) delta = std::max(delta, dm.d(i, medoid));
    }
    return delta;
}

// ----- generator self-checks -----

bool block_intensity_in_class(const BlockIntensity& omega, double L, double beta) {
    if (omega.omega.rows() != omega.K || omega.omega.cols() != omega.K) return false;
    if ((omega.omega - omega.omega.transpose()).cwiseAbs().maxCoeff() > 0.0) return false;
    if (omega.omega.cwiseAbs().maxCoeff() > L) return false;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(omega.omega, Eigen::EigenvaluesOnly);
    const double lo = solver.eigenvalues()[0];
    const double hi = solver.eigenvalues()[omega.K - 1];
    if (beta > 0.0) return lo >= beta && hi <= 1.0 / beta;
    return lo > 0.0;
}

TailViolationReport validate_population(const PopulationSimilarity& pw,
                                        const DistanceModel& dm,
                                        const MembershipMatrix& z, double alpha,
                                        double L) {
    const int n = static_cast<int>(pw.script_w.rows());
    if (dm.n != n || z.n != n) throw InputError("validate_population: size mismatch");
    if (!dm.delta.has_value()) throw ConfigError("validate_population: delta unset");
    const double two_delta = 2.0 * *dm.delta;
    const double n_max = z.n_max();

    // candidate bandwidths: distinct observed distances above 2*delta,
    // decimated to at most 512 grid points
    std::set<double> distinct;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (dm.d(i, j) > two_delta) distinct.insert(dm.d(i, j));

    TailViolationReport report;
    if (distinct.empty()) return report;  // no distances beyond 2*delta: trivially passes

    std::vector<double> grid(distinct.begin(), distinct.end());
    if (grid.size() > 512) {
        std::vector<double> sub;
        sub.reserve(512);
        for (size_t t = 0; t < 512; ++t)
            sub.push_back(grid[t * (grid.size() - 1) / 511]);
        sub.erase(std::unique(sub.begin(), sub.end()), sub.end());
        grid = std::move(sub);
    }

    // per-row (distance, |w|) sorted descending by distance, with suffix sums
    std::vector<std::vector<std::pair<double, double>>> rows(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& r = rows[static_cast<size_t>(i)];
        r.reserve(static_cast<size_t>(n - 1));
        for (int j = 0; j < n; ++j)
            if (j != i) r.emplace_back(dm.d(i, j), std::abs(pw.script_w(i, j)));
        std::sort(r.begin(), r.end());
        double acc = 0.0;
        for (auto it = r.rbegin(); it != r.rend(); ++it) {
            acc += it->second;
            it->second = acc;  // suffix sum of |w| over distances >= this one
        }
    }

    report.grid_points = static_cast<int>(grid.size());
    for (double h : grid) {
        double tail = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto& r = rows[static_cast<size_t>(i)];
            auto it = std::upper_bound(r.begin(), r.end(), std::make_pair(h, std::numeric_limits<double>::infinity()));
            if (it != r.end()) tail = std::max(tail, it->second);
        }
        const double bound = L * n_max * std::pow((h - two_delta) / dm.d0, -alpha);
        const double ratio = bound > 0.0 ? tail / bound : (tail > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        if (ratio > report.max_ratio) {
            report.max_ratio = ratio;
            report.worst_h = h;
        }
    }
    report.passed = report.max_ratio <= 1.0;
    return report;
}

}  // namespace mvbsc
