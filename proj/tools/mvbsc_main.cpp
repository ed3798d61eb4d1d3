#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "mvbsc/harness.hpp"
#include "mvbsc/metrics.hpp"
#include "mvbsc/parallel.hpp"
#include "mvbsc/version.hpp"

namespace {

using namespace mvbsc;

SimilarityView load_view_sniffed(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IngestionError("cannot open '" + path + "'");
    char magic[4] = {0, 0, 0, 0};
    probe.read(magic, 4);
    const bool binary = probe.gcount() == 4 && magic[0] == 'M' && magic[1] == 'V' &&
                        magic[2] == 'B' && magic[3] == 'S';
    return load_similarity(path, binary ? MatrixFormat::binary : MatrixFormat::csv, warnings);
}

std::vector<SimilarityView> load_views(const std::vector<std::string>& paths,
                                       const std::vector<double>& alphas) {
    if (paths.empty()) throw ConfigError("need at least one --view");
    if (!alphas.empty() && alphas.size() != paths.size())
        throw ConfigError("--alpha must list one value per view");
    std::vector<SimilarityView> views;
    std::vector<std::string> warnings;
    for (size_t i = 0; i < paths.size(); ++i) {
        views.push_back(load_view_sniffed(paths[i], &warnings));
        if (!alphas.empty()) views.back().alpha = alphas[i];
    }
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    const auto& first = views.front();
    for (size_t i = 1; i < views.size(); ++i) {
        if (views[i].n() != first.n())
            throw IngestionError("views differ in node count");
        if (views[i].ids != first.ids) {
            std::string detail;
            for (int k = 0; k < first.n() && detail.size() < 200; ++k)
                if (views[i].ids[static_cast<size_t>(k)] != first.ids[static_cast<size_t>(k)])
                    detail += (detail.empty() ? "" : ", ") + first.ids[static_cast<size_t>(k)];
            throw IngestionError("views disagree on node ids (pre-align them): " + detail);
        }
    }
    return views;
}

WeightRule parse_weight_rule(const std::string& text) {
    if (text == "snr") return WeightRule::snr();
    if (text == "q") return WeightRule::q();
    if (text == "uniform") return WeightRule::uniform();
    if (text.rfind("fixed:", 0) == 0) {
        std::vector<double> l;
        std::string tok;
        std::istringstream ss(text.substr(6));
        while (std::getline(ss, tok, ',')) l.push_back(std::stod(tok));
        return WeightRule::fixed(std::move(l));
    }
    throw ConfigError("unknown weight rule '" + text + "' (snr | q | uniform | fixed:a,b,...)");
}

BandwidthRule parse_bandwidth_rule(const std::string& text, std::optional<int> n_max) {
    if (text == "simulation") return BandwidthRule::simulation(n_max);
    if (text == "theorem34") return BandwidthRule::theorem34(n_max);
    if (text.rfind("fixed:", 0) == 0) {
        std::vector<double> h;
        std::string tok;
        std::istringstream ss(text.substr(6));
        while (std::getline(ss, tok, ',')) h.push_back(std::stod(tok));
        return BandwidthRule::fixed(std::move(h));
    }
    throw ConfigError("unknown bandwidth rule '" + text +
                      "' (simulation | theorem34 | fixed:h[,h2,...])");
}

MembershipMatrix to_membership(const std::vector<std::pair<std::string, int>>& raw,
                               const std::vector<std::string>& order) {
    std::map<std::string, int> by_id;
    for (const auto& [id, cluster] : raw) by_id[id] = cluster;
    std::map<int, int> dense;
    std::vector<int> labels;
    labels.reserve(order.size());
    for (const auto& id : order) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw IngestionError("node '" + id + "' missing from labels");
        const auto [pos, inserted] = dense.emplace(it->second, static_cast<int>(dense.size()));
        labels.push_back(pos->second);
    }
    return MembershipMatrix(static_cast<int>(dense.size()), std::move(labels));
}

int run_cluster(const std::vector<std::string>& view_paths, const std::string& distance_text,
                int K, const std::string& weight_text, const std::string& bandwidth_text,
                const std::vector<double>& alphas, std::optional<double> delta,
                std::optional<int> n_max, const KMeansParams& km, std::uint64_t seed,
                const std::string& output_dir) {
    auto views = load_views(view_paths, alphas);
    const DistanceSpec spec = DistanceSpec::parse(distance_text);
    const DistanceModel dm = load_distance(spec, views.front().n(), views.front().ids, delta);

    const ClusteringResult result =
        run_mvbsc(views, dm, K, parse_weight_rule(weight_text),
                     parse_bandwidth_rule(bandwidth_text, n_max), km, seed);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";

    std::filesystem::create_directories(output_dir);
    write_report(result, views.front().ids, seed, output_dir + "/report.json");
    write_labels_csv(result.labels, views.front().ids, output_dir + "/labels.csv");
    std::cout << "clustered " << result.labels.n << " nodes into " << result.labels.K
              << " groups; lambda =";
    for (double l : result.weights.lambdas) std::cout << " " << format_double(l);
    std::cout << "\nreport: " << output_dir << "/report.json\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-view banded spectral clustering"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::uint64_t seed = 20240501;
    int threads = 0;
    std::string output_dir = ".";
    std::string format = "csv";
    app.add_option("--seed", seed, "base RNG seed");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
    app.add_option("--output-dir", output_dir, "output directory");
    app.add_option("--format", format, "output format: csv | json")
        ->check(CLI::IsMember({"csv", "json"}));

    // simulate
    auto* sim = app.add_subcommand("simulate", "run the benchmark protocol from a config file");
    std::string config_path;
    sim->add_option("--config", config_path, "config file")->required();

    // cluster
    auto* clu = app.add_subcommand("cluster", "cluster user-supplied similarity views");
    std::vector<std::string> view_paths;
    std::string distance_text = "index:0.1";
    int K = 0;
    std::string weight_text = "snr";
    std::string bandwidth_text = "simulation";
    std::vector<double> alphas;
    double delta_value = -1.0;
    int n_max_value = 0;
    KMeansParams km;
    clu->add_option("--view", view_paths, "similarity matrix file (repeatable)")->required();
    clu->add_option("--distance", distance_text, "index:SCALE | icd9:ETA | matrix:PATH");
    clu->add_option("--k", K, "number of groups")->required();
    clu->add_option("--weight-rule", weight_text, "snr | q | uniform | fixed:a,b,...");
    clu->add_option("--bandwidth-rule", bandwidth_text, "simulation | theorem34 | fixed:h[,..]");
    clu->add_option("--alpha", alphas, "decay exponent per view")->delimiter(',');
    clu->add_option("--delta", delta_value, "cluster radius bound for the bandwidth formula");
    clu->add_option("--nmax", n_max_value, "largest cluster size for the bandwidth formula");
    clu->add_option("--restarts", km.restarts, "k-means restarts");
    clu->add_option("--max-iter", km.max_iter, "k-means iteration cap");

    // evaluate
    auto* eva = app.add_subcommand("evaluate", "score a clustering against reference labels");
    std::string labels_path, reference_path;
    eva->add_option("--labels", labels_path, "labels CSV or report JSON")->required();
    eva->add_option("--reference", reference_path, "reference labels CSV or report JSON")
        ->required();

    // select-k
    auto* sel = app.add_subcommand("select-k", "scan K around a center by reference NMI");
    int k_center = 0;
    double span = 0.2;
    int step = 1;
    sel->add_option("--view", view_paths, "similarity matrix file (repeatable)")->required();
    sel->add_option("--distance", distance_text, "index:SCALE | icd9:ETA | matrix:PATH");
    sel->add_option("--reference", reference_path, "reference labels")->required();
    sel->add_option("--k-center", k_center, "center of the scan")->required();
    sel->add_option("--span", span, "scan fraction around the center");
    sel->add_option("--step", step, "scan stride");
    sel->add_option("--weight-rule", weight_text, "snr | q | uniform | fixed:a,b,...");
    sel->add_option("--bandwidth-rule", bandwidth_text, "simulation | theorem34 | fixed:h[,..]");
    sel->add_option("--alpha", alphas, "decay exponent per view")->delimiter(',');
    sel->add_option("--delta", delta_value, "cluster radius bound");
    sel->add_option("--nmax", n_max_value, "largest cluster size for the bandwidth formula");

    CLI11_PARSE(app, argc, argv);

    try {
        const std::optional<double> delta =
            delta_value >= 0.0 ? std::optional<double>(delta_value) : std::nullopt;
        const std::optional<int> n_max =
            n_max_value > 0 ? std::optional<int>(n_max_value) : std::nullopt;

        if (sim->parsed()) {
            SimulateConfig cfg = parse_simulate_config(config_path);
            for (const auto* opt : {"--seed", "--threads", "--output-dir", "--format"}) {
                if (app.count(opt) == 0) continue;
                if (std::string(opt) == "--seed") cfg.seed = seed;
                if (std::string(opt) == "--threads") cfg.threads = threads;
                if (std::string(opt) == "--output-dir") cfg.output_dir = output_dir;
                if (std::string(opt) == "--format") cfg.format = format;
            }
            const SimulationOutput out = run_simulation(cfg);
            std::cout << "wrote " << out.replication_csv << " and " << out.summary_csv << "\n";
            for (const auto& row : out.summary)
                std::cout << row.model << " " << row.method << ": acc " << row.acc_mean
                          << " (sd " << row.acc_sd << "), nmi " << row.nmi_mean << " (sd "
                          << row.nmi_sd << ")\n";
            return 0;
        }

        if (clu->parsed())
            return run_cluster(view_paths, distance_text, K, weight_text, bandwidth_text,
                               alphas, delta, n_max, km, seed, output_dir);

        if (eva->parsed()) {
            const auto got = load_labels(labels_path);
            const auto ref = load_labels(reference_path);
            std::vector<std::string> order;
            order.reserve(ref.size());
            for (const auto& [id, cluster] : ref) order.push_back(id);
            std::sort(order.begin(), order.end());
            if (got.size() != ref.size())
                throw IngestionError("label files cover different node counts");
            const MembershipMatrix x = to_membership(got, order);
            const MembershipMatrix x0 = to_membership(ref, order);
            const double nmi_score = nmi(x, x0);
            const double acc = matched_accuracy(x, x0);
            std::cout << "nmi " << format_double(nmi_score) << "\n"
                      << "accuracy " << format_double(acc) << "\n";
            std::filesystem::create_directories(output_dir);
            nlohmann::json j{{"nmi", nmi_score}, {"accuracy", acc}};
            std::ofstream out(output_dir + "/scores.json");
            out << j.dump(2) << "\n";
            return 0;
        }

        if (sel->parsed()) {
            auto views = load_views(view_paths, alphas);
            const DistanceSpec spec = DistanceSpec::parse(distance_text);
            DistanceModel dm = load_distance(spec, views.front().n(), views.front().ids, delta);
            const auto ref_raw = load_labels(reference_path);
            std::vector<std::string> order = views.front().ids;
            if (order.empty())
                for (int i = 0; i < views.front().n(); ++i)
                    order.push_back("v" + std::to_string(i + 1));
            const MembershipMatrix reference = to_membership(ref_raw, order);

            const int workers = threads > 0 ? threads : default_threads();
            const KSelection selection =
                select_k(views, dm, reference, k_center, span, step,
                         parse_weight_rule(weight_text),
                         parse_bandwidth_rule(bandwidth_text, n_max), km, seed, workers);

            std::filesystem::create_directories(output_dir);
            std::ofstream trace(output_dir + "/k_scan.csv");
            trace << "K,nmi\n";
            for (const auto& [k, score] : selection.trace)
                trace << k << "," << format_double(score) << "\n";
            std::cout << "chosen K: " << selection.chosen_k << "\n"
                      << "trace: " << output_dir << "/k_scan.csv\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IngestionError& e) {
        std::cerr << "ingestion error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
