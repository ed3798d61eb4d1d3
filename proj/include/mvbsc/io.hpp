#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvbsc/types.hpp"

namespace mvbsc {

enum class MatrixFormat { csv, binary };

// CSV: one header row of node identifiers, then an n x n numeric body.
// Binary: magic "MVBS", version u16, n u64 (little endian), n(n+1)/2
// upper-triangle doubles row-major, then length-prefixed UTF-8 node ids.
SimilarityView load_similarity(const std::string& path, MatrixFormat format,
                               std::vector<std::string>* warnings = nullptr);

void save_similarity(const SimilarityView& view, const std::string& path,
                     MatrixFormat format);

struct DistanceSpec {
    enum class Kind { index, icd9, matrix } kind = Kind::index;
    double param = 0.1;  // index scale or icd9 eta
    std::string path;    // matrix file

    // "index:0.1" | "icd9:0.005" | "matrix:/path/to.csv"
    static DistanceSpec parse(const std::string& text);
};

// Materializes the distance model for n nodes with the given identifiers
// (ids may be empty for index distances). Matrix files must carry exactly
// the same identifiers in the same order.
DistanceModel load_distance(const DistanceSpec& spec, int n,
                            const std::vector<std::string>& ids,
                            std::optional<double> delta = std::nullopt);

// JSON run report: labels (node id -> 1-based cluster), weights, bandwidths,
// per-view sigma/gamma estimates, K, seed, k-means objective, version.
void write_report(const ClusteringResult& result, const std::vector<std::string>& ids,
                  std::uint64_t seed, const std::string& path);

// Two-column CSV: node id, 1-based cluster id.
void write_labels_csv(const MembershipMatrix& labels, const std::vector<std::string>& ids,
                      const std::string& path);

// Reads either the JSON report or the two-column CSV back into (ids, labels).
std::vector<std::pair<std::string, int>> load_labels(const std::string& path);

// Experiment tables ---------------------------------------------------------

struct ReplicationRecord {
    std::string model;
    std::string method;
    std::string noise;
    int K = 0;
    int replication = 0;
    double accuracy = 0.0;
    double nmi_score = 0.0;
};

struct SummaryRow {
    std::string model;
    std::string method;
    double acc_mean = 0.0;
    double acc_sd = 0.0;
    double nmi_mean = 0.0;
    double nmi_sd = 0.0;
};

void write_replication_csv(const std::vector<ReplicationRecord>& records,
                           const std::string& path);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);

// Helpers shared by the harness/CLI.
std::string format_double(double v);            // shortest exact decimal (%.17g)
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace mvbsc
