#include "mvbsc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "mvbsc/baselines.hpp"
#include "mvbsc/metrics.hpp"
#include "mvbsc/parallel.hpp"
#include "mvbsc/rng.hpp"
#include "mvbsc/version.hpp"

namespace mvbsc {

ModelDesign model_design(const std::string& model) {
    if (model == "M1") return {0.0, 0};
    if (model == "M2") return {0.01, 4};
    if (model == "M3") return {0.1, 2};
    if (model == "M4") return {0.05, 6};
    if (model == "M5") return {0.1, 8};
    throw ConfigError("unknown model '" + model + "' (expected M1..M5)");
}

MembershipMatrix make_truth(const std::string& model, int n, int K, std::uint64_t seed) {
    const ModelDesign design = model_design(model);
    MembershipMatrix z = membership_m1(n, K, mix_seed(seed, 0));
    if (design.p > 0.0) z = perturb_membership(z, design.p, design.l, mix_seed(seed, 1));
    return z;
}

void SimulateConfig::validate() const {
    if (n < 4) throw ConfigError("config: n too small");
    if (K < 2 || K > n) throw ConfigError("config: need 2 <= K <= n");
    if (models.empty()) throw ConfigError("config: no models listed");
    for (const auto& m : models) model_design(m);
    if (methods.empty()) throw ConfigError("config: no methods listed");
    if (replications < 1) throw ConfigError("config: replications must be >= 1");
    const auto sig = resolved_sigma();
    if (sig.size() != alpha.size())
        throw ConfigError("config: sigma and alpha must list one value per view");
    for (double s : sig)
        if (s < 0.0) throw ConfigError("config: sigma must be >= 0");
    if (bandwidth != "simulation" && bandwidth != "theorem34")
        throw ConfigError("config: bandwidth must be 'simulation' or 'theorem34'");
    if (delta_policy != "d0" && delta_policy != "radius" && delta_policy != "fixed")
        throw ConfigError("config: delta must be 'd0', 'radius', or a number");
    if (delta_policy == "fixed" && !(delta_value > 0.0))
        throw ConfigError("config: fixed delta must be positive");
    if (format != "csv" && format != "json")
        throw ConfigError("config: format must be 'csv' or 'json'");
    if (!(clip_lo < clip_hi)) throw ConfigError("config: empty clip range");
}

std::vector<double> SimulateConfig::resolved_sigma() const {
    if (!sigma.empty()) return sigma;
    if (noise == "low") return {0.2, 0.4};
    if (noise == "medium") return {0.4, 0.6};
    if (noise == "high") return {0.6, 0.8};
    throw ConfigError("config: noise must be low|medium|high or sigma must be given");
}

namespace {

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (double x : v) out += format_double(x) + ";";
    return out;
}

}  // namespace

std::string SimulateConfig::config_hash() const {
    std::string canon;
    canon += "v=" + std::string(kVersion) + "|n=" + std::to_string(n);
    canon += "|dist=" + std::to_string(static_cast<int>(distance.kind)) + ":" +
             format_double(distance.param) + ":" + distance.path;
    canon += "|models=";
    for (const auto& m : models) canon += m + ";";
    canon += "|K=" + std::to_string(K);
    canon += "|sigma=" + join_doubles(resolved_sigma());
    canon += "|alpha=" + join_doubles(alpha);
    canon += "|omega=" + format_double(omega_diag) + "," + format_double(omega_scale);
    canon += "|clip=" + format_double(clip_lo) + "," + format_double(clip_hi) + "," +
             format_double(view_diag);
    canon += "|delta=" + delta_policy + ":" + format_double(delta_value);
    canon += "|seed=" + std::to_string(seed);
    canon += "|methods=";
    for (const auto& m : methods) canon += m + ";";
    canon += "|bw=" + bandwidth;
    canon += "|km=" + std::to_string(kmeans.restarts) + "," + std::to_string(kmeans.max_iter);
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
    return buf;
}

// ----- config file -----

namespace {

std::string trim_ws(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            out.push_back(trim_ws(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    const std::string last = trim_ws(cur);
    if (!last.empty() || !out.empty()) out.push_back(last);
    out.erase(std::remove(out.begin(), out.end(), std::string()), out.end());
    return out;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    for (const auto& tok : split_list(text)) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': bad number '" + tok + "'");
        }
    }
    return out;
}

double parse_double(const std::string& text, const std::string& key) {
    try {
        return std::stod(trim_ws(text));
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad number '" + text + "'");
    }
}

long long parse_int(const std::string& text, const std::string& key) {
    try {
        return std::stoll(trim_ws(text));
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad integer '" + text + "'");
    }
}

}  // namespace

SimulateConfig parse_simulate_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");

    SimulateConfig cfg;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim_ws(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
            section = t.substr(1, t.size() - 2);
            if (section != "data" && section != "model" && section != "methods" &&
                section != "kmeans" && section != "output")
                throw ConfigError("config: unknown section [" + section + "]");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim_ws(t.substr(0, eq));
        const std::string value = trim_ws(t.substr(eq + 1));

        if (section == "data") {
            if (key == "n")
                cfg.n = static_cast<int>(parse_int(value, key));
            else if (key == "distance")
                cfg.distance = DistanceSpec::parse(value);
            else
                throw ConfigError("config: unknown key '" + key + "' in section [data]");
        } else if (section == "model") {
            if (key == "model" || key == "models")
                cfg.models = split_list(value);
            else if (key == "K")
                cfg.K = static_cast<int>(parse_int(value, key));
            else if (key == "noise")
                cfg.noise = value;
            else if (key == "sigma")
                cfg.sigma = parse_double_list(value, key);
            else if (key == "alpha")
                cfg.alpha = parse_double_list(value, key);
            else if (key == "delta") {
                if (value == "d0" || value == "radius") {
                    cfg.delta_policy = value;
                } else {
                    cfg.delta_policy = "fixed";
                    cfg.delta_value = parse_double(value, key);
                }
            }
            else if (key == "omega_diag")
                cfg.omega_diag = parse_double(value, key);
            else if (key == "omega_scale")
                cfg.omega_scale = parse_double(value, key);
            else if (key == "clip") {
                const auto lohi = parse_double_list(value, key);
                if (lohi.size() != 2) throw ConfigError("config key 'clip': need lo,hi");
                cfg.clip_lo = lohi[0];
                cfg.clip_hi = lohi[1];
            } else if (key == "diag")
                cfg.view_diag = parse_double(value, key);
            else if (key == "seed")
                cfg.seed = static_cast<std::uint64_t>(parse_int(value, key));
            else
                throw ConfigError("config: unknown key '" + key + "' in section [model]");
        } else if (section == "methods") {
            if (key == "methods")
                cfg.methods = split_list(value);
            else if (key == "replications")
                cfg.replications = static_cast<int>(parse_int(value, key));
            else if (key == "bandwidth")
                cfg.bandwidth = value;
            else
                throw ConfigError("config: unknown key '" + key + "' in section [methods]");
        } else if (section == "kmeans") {
            if (key == "restarts")
                cfg.kmeans.restarts = static_cast<int>(parse_int(value, key));
            else if (key == "max_iter")
                cfg.kmeans.max_iter = static_cast<int>(parse_int(value, key));
            else
                throw ConfigError("config: unknown key '" + key + "' in section [kmeans]");
        } else if (section == "output") {
            if (key == "dir")
                cfg.output_dir = value;
            else if (key == "format")
                cfg.format = value;
            else if (key == "threads")
                cfg.threads = static_cast<int>(parse_int(value, key));
            else
                throw ConfigError("config: unknown key '" + key + "' in section [output]");
        } else {
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": key outside any section");
        }
    }
    cfg.validate();
    return cfg;
}

// ----- simulation -----

ReplicationData generate_replication(const SimulateConfig& config, const std::string& model,
                                     int replication) {
    const std::uint64_t rep_seed = config.seed ^ static_cast<std::uint64_t>(replication);
    ReplicationData data;
    data.truth = make_truth(model, config.n, config.K, rep_seed);
    data.dm = load_distance(config.distance, config.n, {}, std::nullopt);
    if (config.delta_policy == "d0")
        data.dm.delta = data.dm.d0;
    else if (config.delta_policy == "radius")
        data.dm.delta = compute_delta(data.truth, data.dm);
    else
        data.dm.delta = config.delta_value;

    const auto sigmas = config.resolved_sigma();
    for (size_t s = 0; s < sigmas.size(); ++s) {
        data.omegas.push_back(omega_simulation(data.truth, config.alpha[s], config.omega_diag,
                                               config.omega_scale));
        data.views.push_back(sample_view(data.truth, data.omegas.back(), sigmas[s],
                                         {config.clip_lo, config.clip_hi}, config.view_diag,
                                         mix_seed(rep_seed, 10 + s)));
    }
    return data;
}

namespace {

struct MethodInstance {
    std::string name;   // row label, e.g. "mvbsc_q" or "single_w1"
    std::string family; // config token it came from
    int view = -1;      // >= 0 for per-view baselines
};

std::vector<MethodInstance> expand_methods(const std::vector<std::string>& methods, int m) {
    std::vector<MethodInstance> out;
    for (const auto& name : methods) {
        if (name == "mvbsc_q" || name == "mvbsc_snr" || name == "mvbsc_uniform" ||
            name == "mvbsc_oracle" || name == "ka" || name == "kal" || name == "normkal") {
            out.push_back({name, name, -1});
        } else if (name == "single_w" || name == "single_l" || name == "single_norml") {
            for (int v = 0; v < m; ++v)
                out.push_back({name + std::to_string(v + 1), name, v});
        } else {
            throw ConfigError("unknown method '" + name + "'");
        }
    }
    return out;
}

struct CellScore {
    double accuracy = 0.0;
    double nmi_score = 0.0;
};

CellScore score_labels(const MembershipMatrix& got, const MembershipMatrix& truth) {
    return {matched_accuracy(got, truth), nmi(got, truth)};
}

CellScore run_method(const MethodInstance& method, const SimulateConfig& config,
                     const ReplicationData& data, std::uint64_t method_seed) {
    const BandwidthRule bw = config.bandwidth == "theorem34"
                                 ? BandwidthRule::theorem34(data.truth.n_max())
                                 : BandwidthRule::simulation(data.truth.n_max());

    if (method.family == "mvbsc_q" || method.family == "mvbsc_snr" ||
        method.family == "mvbsc_uniform") {
        const WeightRule rule = method.family == "mvbsc_q"
                                    ? WeightRule::q()
                                    : method.family == "mvbsc_snr" ? WeightRule::snr()
                                                                   : WeightRule::uniform();
        const ClusteringResult res =
            run_mvbsc(data.views, data.dm, config.K, rule, bw, config.kmeans, method_seed);
        return score_labels(res.labels, data.truth);
    }
    if (method.family == "mvbsc_oracle") {
        const GridSearchResult grid =
            lambda_grid_search(data.views, data.dm, config.K, data.truth, 0.05,
                               GridCriterion::accuracy, bw, config.kmeans, method_seed, 1);
        const ClusteringResult res = run_mvbsc(data.views, data.dm, config.K,
                                           WeightRule::fixed(grid.best.lambdas), bw,
                                           config.kmeans, method_seed);
        return score_labels(res.labels, data.truth);
    }

    SymMatrix target;
    BaselineVariant variant = BaselineVariant::raw;
    if (method.family == "ka" || method.family == "kal" || method.family == "normkal") {
        target = kernel_addition(data.views);
        variant = method.family == "ka" ? BaselineVariant::raw
                  : method.family == "kal" ? BaselineVariant::laplacian
                                           : BaselineVariant::normalized_laplacian;
    } else {
        target = data.views[static_cast<size_t>(method.view)].w;
        variant = method.family == "single_w" ? BaselineVariant::raw
                  : method.family == "single_l" ? BaselineVariant::laplacian
                                                : BaselineVariant::normalized_laplacian;
    }
    const ClusteringResult res =
        spectral_cluster_baseline(target, config.K, variant, config.kmeans, method_seed);
    return score_labels(res.labels, data.truth);
}

// rows reused across interrupted runs; keyed by the config hash
struct Checkpoint {
    std::string path;
    std::string hash;
    // (model, rep) -> method -> score
    std::map<std::pair<std::string, int>, std::map<std::string, CellScore>> rows;
    std::map<std::pair<std::string, int>, bool> complete;
    std::mutex write_mutex;
    std::ofstream out;

    void load() {
        std::ifstream in(path);
        if (!in) return;
        std::string line;
        bool hash_ok = false;
        while (std::getline(in, line)) {
            std::istringstream ss(line);
            std::string tag;
            ss >> tag;
            if (tag == "H") {
                std::string h;
                ss >> h;
                hash_ok = h == hash;
                if (!hash_ok) return;  // stale checkpoint from another config
            } else if (tag == "R" && hash_ok) {
                int rep;
                std::string model, method;
                double acc, nm;
                if (ss >> rep >> model >> method >> acc >> nm)
                    rows[{model, rep}][method] = {acc, nm};
            } else if (tag == "C" && hash_ok) {
                int rep;
                std::string model;
                if (ss >> rep >> model) complete[{model, rep}] = true;
            }
        }
    }

    void open_for_append(bool fresh) {
        out.open(path, fresh ? std::ios::trunc : std::ios::app);
        if (!out) throw IngestionError("cannot write checkpoint '" + path + "'");
        if (fresh) out << "H " << hash << "\n" << std::flush;
    }

    void record(const std::string& model, int rep,
                const std::map<std::string, CellScore>& methods) {
        std::lock_guard<std::mutex> lock(write_mutex);
        for (const auto& [name, score] : methods)
            out << "R " << rep << " " << model << " " << name << " "
                << format_double(score.accuracy) << " " << format_double(score.nmi_score) << "\n";
        out << "C " << rep << " " << model << "\n" << std::flush;
    }
};

}  // namespace

SimulationOutput run_simulation(const SimulateConfig& config, bool write_files) {
    config.validate();
    const auto sigmas = config.resolved_sigma();
    const int m = static_cast<int>(sigmas.size());
    const auto methods = expand_methods(config.methods, m);

    std::filesystem::create_directories(config.output_dir);

    Checkpoint checkpoint;
    checkpoint.hash = config.config_hash();
    checkpoint.path = config.output_dir + "/checkpoint_" + checkpoint.hash + ".txt";
    checkpoint.load();
    checkpoint.open_for_append(checkpoint.rows.empty());

    const int threads = config.threads > 0 ? config.threads : default_threads();

    // cells: model-major, replication-minor; each holds every method's score
    struct Cell {
        std::map<std::string, CellScore> scores;
    };
    std::vector<std::vector<Cell>> cells(config.models.size());
    for (auto& v : cells) v.resize(static_cast<size_t>(config.replications));

    const int total = static_cast<int>(config.models.size()) * config.replications;
    parallel_for(total, threads, [&](int idx) {
        const size_t model_idx = static_cast<size_t>(idx) / config.replications;
        const int rep = idx % config.replications;
        const std::string& model = config.models[model_idx];

        const auto key = std::make_pair(model, rep);
        if (auto it = checkpoint.complete.find(key);
            it != checkpoint.complete.end() && it->second) {
            const auto& stored = checkpoint.rows[key];
            bool have_all = true;
            for (const auto& method : methods)
                if (!stored.count(method.name)) have_all = false;
            if (have_all) {
                cells[model_idx][static_cast<size_t>(rep)].scores = stored;
                return;
            }
        }

        const ReplicationData data = generate_replication(config, model, rep);
        std::map<std::string, CellScore> scores;
        for (size_t mi = 0; mi < methods.size(); ++mi) {
            const std::uint64_t method_seed =
                mix_seed(config.seed ^ static_cast<std::uint64_t>(rep), 100 + mi);
            scores[methods[mi].name] = run_method(methods[mi], config, data, method_seed);
        }
        checkpoint.record(model, rep, scores);
        cells[model_idx][static_cast<size_t>(rep)].scores = std::move(scores);
    });

    // per-view families additionally report the per-replication best view
    std::vector<std::string> families_with_max;
    for (const auto& name : config.methods)
        if (name == "single_w" || name == "single_l" || name == "single_norml")
            if (m > 1) families_with_max.push_back(name);

    SimulationOutput output;
    for (size_t model_idx = 0; model_idx < config.models.size(); ++model_idx) {
        const std::string& model = config.models[model_idx];
        for (int rep = 0; rep < config.replications; ++rep) {
            auto& cell = cells[model_idx][static_cast<size_t>(rep)];
            for (const auto& method : methods) {
                const CellScore& s = cell.scores.at(method.name);
                output.records.push_back({model, method.name, config.noise, config.K, rep,
                                          s.accuracy, s.nmi_score});
            }
            for (const auto& family : families_with_max) {
                CellScore best{-1.0, -1.0};
                for (int v = 0; v < m; ++v) {
                    const CellScore& s = cell.scores.at(family + std::to_string(v + 1));
                    best.accuracy = std::max(best.accuracy, s.accuracy);
                    best.nmi_score = std::max(best.nmi_score, s.nmi_score);
                }
                output.records.push_back({model, family + "_max", config.noise, config.K, rep,
                                          best.accuracy, best.nmi_score});
            }
        }
    }

    // summary: mean / sample sd per (model, method)
    std::vector<std::string> row_order;
    for (const auto& method : methods) row_order.push_back(method.name);
    for (const auto& family : families_with_max) row_order.push_back(family + "_max");
    for (const auto& model : config.models) {
        for (const auto& name : row_order) {
            std::vector<double> acc, nm;
            for (const auto& r : output.records)
                if (r.model == model && r.method == name) {
                    acc.push_back(r.accuracy);
                    nm.push_back(r.nmi_score);
                }
            auto mean_sd = [](const std::vector<double>& v) {
                double mean = 0.0;
                for (double x : v) mean += x;
                mean /= static_cast<double>(v.size());
                double ss = 0.0;
                for (double x : v) ss += (x - mean) * (x - mean);
                const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
                return std::make_pair(mean, sd);
            };
            const auto [am, asd] = mean_sd(acc);
            const auto [nmm, nsd] = mean_sd(nm);
            output.summary.push_back({model, name, am, asd, nmm, nsd});
        }
    }

    if (write_files) {
        output.replication_csv = config.output_dir + "/replications.csv";
        output.summary_csv = config.output_dir + "/summary.csv";
        write_replication_csv(output.records, output.replication_csv);
        write_summary_csv(output.summary, output.summary_csv);
        if (config.format == "json") {
            nlohmann::json j = nlohmann::json::array();
            for (const auto& row : output.summary)
                j.push_back({{"model", row.model},
                             {"method", row.method},
                             {"acc_mean", row.acc_mean},
                             {"acc_sd", row.acc_sd},
                             {"nmi_mean", row.nmi_mean},
                             {"nmi_sd", row.nmi_sd}});
            std::ofstream out(config.output_dir + "/summary.json");
            out << j.dump(2) << "\n";
        }
    }
    return output;
}

}  // namespace mvbsc
