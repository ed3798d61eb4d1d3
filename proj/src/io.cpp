#include "mvbsc/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mvbsc/model.hpp"
#include "mvbsc/version.hpp"

namespace mvbsc {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t");
    size_t e = s.find_last_not_of(" \t");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

double parse_entry(const std::string& text, int row, int col) {
    const std::string t = trim(text);
    size_t consumed = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &consumed);
    } catch (const std::exception&) {
        throw IngestionError("non-numeric entry at row " + std::to_string(row) + ", column " +
                             std::to_string(col) + ": '" + t + "'");
    }
    if (consumed != t.size())
        throw IngestionError("non-numeric entry at row " + std::to_string(row) + ", column " +
                             std::to_string(col) + ": '" + t + "'");
    if (!std::isfinite(v))
        throw IngestionError("non-finite entry at row " + std::to_string(row) + ", column " +
                             std::to_string(col));
    return v;
}

struct RawMatrix {
    std::vector<std::string> ids;
    Matrix values;
};

RawMatrix load_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw IngestionError("'" + path + "' is empty");

    RawMatrix raw;
    for (auto& f : split_csv_line(line)) raw.ids.push_back(trim(f));
    const int n = static_cast<int>(raw.ids.size());
    raw.values.resize(n, n);

    int row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        if (row >= n)
            throw IngestionError("'" + path + "': more than " + std::to_string(n) + " data rows");
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != n)
            throw IngestionError("'" + path + "': row " + std::to_string(row + 1) + " has " +
                                 std::to_string(fields.size()) + " columns, expected " +
                                 std::to_string(n));
        for (int j = 0; j < n; ++j)
            raw.values(row, j) = parse_entry(fields[static_cast<size_t>(j)], row + 1, j + 1);
        ++row;
    }
    if (row != n)
        throw IngestionError("'" + path + "': " + std::to_string(row) + " data rows, expected " +
                             std::to_string(n));
    return raw;
}

template <typename T>
void write_le(std::ofstream& out, T value) {
    // host is little-endian on every supported target; write raw
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in, const std::string& what) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw IngestionError("truncated binary matrix while reading " + what);
    return value;
}

SimilarityView finalize_view(RawMatrix raw, bool csv, std::vector<std::string>* warnings) {
    const int n = static_cast<int>(raw.ids.size());
    if (csv) {
        double max_gap = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                max_gap = std::max(max_gap, std::abs(raw.values(i, j) - raw.values(j, i)));
                const double avg = 0.5 * (raw.values(i, j) + raw.values(j, i));
                raw.values(i, j) = avg;
                raw.values(j, i) = avg;
            }
        if (max_gap > 0.0 && warnings)
            warnings->push_back("symmetrized by averaging; max asymmetry " +
                                format_double(max_gap));
    }

    const double omega0 = raw.values(0, 0);
    for (int i = 1; i < n; ++i)
        if (std::abs(raw.values(i, i) - omega0) > 1e-9)
            throw IngestionError("inconsistent diagonal at row " + std::to_string(i + 1) + ": " +
                                 format_double(raw.values(i, i)) + " vs " + format_double(omega0));

    SimilarityView view;
    view.w = std::move(raw.values);
    view.ids = std::move(raw.ids);
    view.omega0 = omega0;
    view.L = view.w.cwiseAbs().maxCoeff();
    return view;
}

constexpr char kMagic[4] = {'M', 'V', 'B', 'S'};
constexpr std::uint16_t kBinaryVersion = 1;

}  // namespace

SimilarityView load_similarity(const std::string& path, MatrixFormat format,
                               std::vector<std::string>* warnings) {
    if (format == MatrixFormat::csv) return finalize_view(load_csv_matrix(path), true, warnings);

    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestionError("cannot open '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IngestionError("'" + path + "' is not a binary similarity file");
    const auto version = read_le<std::uint16_t>(in, "version");
    if (version != kBinaryVersion)
        throw IngestionError("unsupported binary version " + std::to_string(version));
    const auto n64 = read_le<std::uint64_t>(in, "node count");
    if (n64 == 0 || n64 > (1ULL << 20)) throw IngestionError("implausible node count");
    const int n = static_cast<int>(n64);

    RawMatrix raw;
    raw.values.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = read_le<double>(in, "matrix entry");
            if (!std::isfinite(v))
                throw IngestionError("non-finite entry at row " + std::to_string(i + 1) +
                                     ", column " + std::to_string(j + 1));
            raw.values(i, j) = v;
            raw.values(j, i) = v;
        }
    raw.ids.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto len = read_le<std::uint32_t>(in, "node id length");
        std::string id(len, '\0');
        in.read(id.data(), static_cast<std::streamsize>(len));
        if (!in) throw IngestionError("truncated binary matrix while reading node ids");
        raw.ids.push_back(std::move(id));
    }
    return finalize_view(std::move(raw), false, warnings);
}

void save_similarity(const SimilarityView& view, const std::string& path,
                     MatrixFormat format) {
    const int n = view.n();
    std::vector<std::string> ids = view.ids;
    if (ids.empty()) {
        ids.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) ids.push_back("v" + std::to_string(i + 1));
    }

    if (format == MatrixFormat::csv) {
        std::ofstream out(path);
        if (!out) throw IngestionError("cannot write '" + path + "'");
        for (int j = 0; j < n; ++j) out << (j ? "," : "") << ids[static_cast<size_t>(j)];
        out << "\n";
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j)
                out << (j ? "," : "") << format_double(view.w(i, j));
            out << "\n";
        }
        return;
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestionError("cannot write '" + path + "'");
    out.write(kMagic, 4);
    write_le(out, kBinaryVersion);
    write_le(out, static_cast<std::uint64_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) write_le(out, view.w(i, j));
    for (const auto& id : ids) {
        write_le(out, static_cast<std::uint32_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
    }
}

DistanceSpec DistanceSpec::parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string head = colon == std::string::npos ? text : text.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    DistanceSpec spec;
    if (head == "index") {
        spec.kind = Kind::index;
        spec.param = rest.empty() ? 0.1 : std::stod(rest);
    } else if (head == "icd9") {
        spec.kind = Kind::icd9;
        spec.param = rest.empty() ? 0.005 : std::stod(rest);
    } else if (head == "matrix") {
        if (rest.empty()) throw ConfigError("distance spec 'matrix:' needs a path");
        spec.kind = Kind::matrix;
        spec.path = rest;
    } else {
        throw ConfigError("unknown distance spec '" + text + "' (index:SCALE | icd9:ETA | matrix:PATH)");
    }
    return spec;
}

DistanceModel load_distance(const DistanceSpec& spec, int n,
                            const std::vector<std::string>& ids,
                            std::optional<double> delta) {
    switch (spec.kind) {
        case DistanceSpec::Kind::index: {
            DistanceModel dm = index_distance(n, spec.param);
            dm.delta = delta;
            return dm;
        }
        case DistanceSpec::Kind::icd9: {
            if (ids.empty())
                throw IngestionError("icd9 distance requires node identifiers on the views");
            DistanceModel dm = icd9_distance(ids, spec.param);
            dm.delta = delta;
            return dm;
        }
        case DistanceSpec::Kind::matrix: {
            RawMatrix raw = load_csv_matrix(spec.path);
            if (static_cast<int>(raw.ids.size()) != n)
                throw IngestionError("distance matrix covers " + std::to_string(raw.ids.size()) +
                                     " nodes, views have " + std::to_string(n));
            if (!ids.empty()) {
                std::string missing;
                for (int i = 0; i < n; ++i)
                    if (raw.ids[static_cast<size_t>(i)] != ids[static_cast<size_t>(i)]) {
                        missing += (missing.empty() ? "" : ", ") + ids[static_cast<size_t>(i)];
                        if (missing.size() > 200) break;
                    }
                if (!missing.empty())
                    throw IngestionError("distance matrix node ids do not match the views: " +
                                         missing);
            }
            symmetrize(raw.values);
            try {
                return DistanceModel::from_matrix(std::move(raw.values), delta);
            } catch (const InputError& e) {
                throw IngestionError(std::string("invalid distance matrix: ") + e.what());
            }
        }
    }
    throw ConfigError("unreachable distance spec kind");
}

void write_report(const ClusteringResult& result, const std::vector<std::string>& ids,
                  std::uint64_t seed, const std::string& path) {
    const int n = result.labels.n;
    std::vector<std::string> names = ids;
    if (names.empty()) {
        names.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) names.push_back("v" + std::to_string(i + 1));
    }

    nlohmann::json j;
    j["version"] = kVersion;
    j["seed"] = seed;
    j["K"] = result.labels.K;
    j["kmeans_objective"] = result.kmeans_objective;
    j["lambda"] = result.weights.lambdas;
    j["bandwidths"] = result.bandwidths;
    nlohmann::json diag = nlohmann::json::array();
    for (const auto& d : result.diagnostics) {
        nlohmann::json entry;
        entry["h"] = d.h;
        entry["gamma_hat"] = d.gamma_hat;
        if (d.sigma_hat.has_value()) entry["sigma_hat"] = *d.sigma_hat;
        entry["degenerate"] = d.degenerate;
        diag.push_back(std::move(entry));
    }
    j["views"] = std::move(diag);
    nlohmann::json labels;
    for (int i = 0; i < n; ++i)
        labels[names[static_cast<size_t>(i)]] = result.labels.labels[static_cast<size_t>(i)] + 1;
    j["labels"] = std::move(labels);
    if (!result.warnings.empty()) j["warnings"] = result.warnings;

    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

void write_labels_csv(const MembershipMatrix& labels, const std::vector<std::string>& ids,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write '" + path + "'");
    out << "node,cluster\n";
    for (int i = 0; i < labels.n; ++i) {
        const std::string id = ids.empty() ? "v" + std::to_string(i + 1) : ids[static_cast<size_t>(i)];
        out << id << "," << labels.labels[static_cast<size_t>(i)] + 1 << "\n";
    }
}

std::vector<std::pair<std::string, int>> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open '" + path + "'");

    std::vector<std::pair<std::string, int>> out;
    // JSON report?
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        nlohmann::json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw IngestionError("cannot parse '" + path + "': " + e.what());
        }
        if (!j.contains("labels"))
            throw IngestionError("'" + path + "' has no labels object");
        for (auto it = j["labels"].begin(); it != j["labels"].end(); ++it)
            out.emplace_back(it.key(), it.value().get<int>());
        return out;
    }

    std::string line;
    bool first = true;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2)
            throw IngestionError("'" + path + "': line " + std::to_string(row) +
                                 " must be 'node,cluster'");
        if (first && trim(fields[1]) == "cluster") {
            first = false;
            continue;  // header
        }
        first = false;
        try {
            out.emplace_back(trim(fields[0]), std::stoi(trim(fields[1])));
        } catch (const std::exception&) {
            throw IngestionError("'" + path + "': bad cluster id on line " + std::to_string(row));
        }
    }
    if (out.empty()) throw IngestionError("'" + path + "' contains no labels");
    return out;
}

void write_replication_csv(const std::vector<ReplicationRecord>& records,
                           const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write '" + path + "'");
    out << "model,method,noise,K,replication,accuracy,nmi\n";
    for (const auto& r : records)
        out << r.model << "," << r.method << "," << r.noise << "," << r.K << ","
            << r.replication << "," << format_double(r.accuracy) << ","
            << format_double(r.nmi_score) << "\n";
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write '" + path + "'");
    out << "model,method,acc_mean,acc_sd,nmi_mean,nmi_sd\n";
    char buf[64];
    for (const auto& r : rows) {
        out << r.model << "," << r.method;
        for (double v : {r.acc_mean, r.acc_sd, r.nmi_mean, r.nmi_sd}) {
            std::snprintf(buf, sizeof(buf), "%.6f", v);
            out << "," << buf;
        }
        out << "\n";
    }
}

}  // namespace mvbsc
