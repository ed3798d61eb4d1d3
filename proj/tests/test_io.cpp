#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mvbsc/cluster.hpp"
#include "mvbsc/io.hpp"
#include "mvbsc/model.hpp"
#include "mvbsc/rng.hpp"

using namespace mvbsc;

namespace {

std::string temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "mvbsc_io_tests";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

SimilarityView random_view(Rng& rng, int n) {
    SimilarityView v;
    v.w.resize(n, n);
    for (int i = 0; i < n; ++i) {
        v.w(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            v.w(i, j) = rng.uniform(-1.0, 1.0);
            v.w(j, i) = v.w(i, j);
        }
    }
    for (int i = 0; i < n; ++i) v.ids.push_back("node" + std::to_string(i + 1));
    return v;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("csv similarity: tiny worked example") {
    const std::string path = temp_path("tiny.csv");
    write_text(path, "a,b\n1,0.5\n0.5,1\n");
    const SimilarityView v = load_similarity(path, MatrixFormat::csv);
    CHECK(v.n() == 2);
    CHECK(v.omega0 == doctest::Approx(1.0));
    CHECK(v.L == doctest::Approx(1.0));
    CHECK(v.ids == std::vector<std::string>{"a", "b"});
    CHECK(v.w(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("binary round trip is bit-exact") {
    Rng rng(1);
    const SimilarityView v = random_view(rng, 17);
    const std::string path = temp_path("roundtrip.mvbs");
    save_similarity(v, path, MatrixFormat::binary);
    const SimilarityView back = load_similarity(path, MatrixFormat::binary);
    CHECK(back.ids == v.ids);
    CHECK((back.w - v.w).cwiseAbs().maxCoeff() == 0.0);

    // writing again produces identical bytes
    const std::string path2 = temp_path("roundtrip2.mvbs");
    save_similarity(back, path2, MatrixFormat::binary);
    CHECK(read_bytes(path) == read_bytes(path2));
}

TEST_CASE("csv round trip is exact through 17 significant digits") {
    Rng rng(2);
    const SimilarityView v = random_view(rng, 9);
    const std::string path = temp_path("roundtrip.csv");
    save_similarity(v, path, MatrixFormat::csv);
    const SimilarityView back = load_similarity(path, MatrixFormat::csv);
    CHECK((back.w - v.w).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("asymmetric csv is averaged with a warning") {
    const std::string path = temp_path("asym.csv");
    write_text(path, "a,b\n1,0.5005\n0.4995,1\n");
    std::vector<std::string> warnings;
    const SimilarityView v = load_similarity(path, MatrixFormat::csv, &warnings);
    CHECK(v.w(0, 1) == doctest::Approx(0.5));
    CHECK(v.w(1, 0) == doctest::Approx(0.5));
    REQUIRE(!warnings.empty());
    CHECK(warnings.front().find("asymmetry") != std::string::npos);
}

TEST_CASE("ingestion errors carry coordinates") {
    const std::string bad_entry = temp_path("bad_entry.csv");
    write_text(bad_entry, "a,b\n1,zap\n0.5,1\n");
    CHECK_THROWS_WITH_AS(load_similarity(bad_entry, MatrixFormat::csv),
                         doctest::Contains("row 1"), IngestionError);

    const std::string bad_shape = temp_path("bad_shape.csv");
    write_text(bad_shape, "a,b\n1,0.5\n");
    CHECK_THROWS_AS(load_similarity(bad_shape, MatrixFormat::csv), IngestionError);

    const std::string bad_diag = temp_path("bad_diag.csv");
    write_text(bad_diag, "a,b\n1,0.5\n0.5,0.9\n");
    CHECK_THROWS_WITH_AS(load_similarity(bad_diag, MatrixFormat::csv),
                         doctest::Contains("diagonal"), IngestionError);

    const std::string bad_nan = temp_path("bad_nan.csv");
    write_text(bad_nan, "a,b\n1,nan\nnan,1\n");
    CHECK_THROWS_AS(load_similarity(bad_nan, MatrixFormat::csv), IngestionError);
}

TEST_CASE("distance specs") {
    const DistanceSpec idx = DistanceSpec::parse("index:0.1");
    const DistanceModel dm = load_distance(idx, 500, {});
    CHECK(dm.d0 == doctest::Approx(0.1));

    const DistanceSpec icd = DistanceSpec::parse("icd9:0.005");
    const DistanceModel icd_dm = load_distance(icd, 2, {"331.1", "331.9"});
    CHECK(icd_dm.d(0, 1) == doctest::Approx(0.8));

    CHECK_THROWS_AS(DistanceSpec::parse("bogus:1"), ConfigError);
}

TEST_CASE("distance matrix file: negative entries rejected, ids must match") {
    const std::string neg = temp_path("neg_dist.csv");
    write_text(neg, "a,b\n0,-1\n-1,0\n");
    const DistanceSpec spec = DistanceSpec::parse("matrix:" + neg);
    CHECK_THROWS_AS(load_distance(spec, 2, {"a", "b"}), IngestionError);

    const std::string ok = temp_path("ok_dist.csv");
    write_text(ok, "a,b\n0,2\n2,0\n");
    const DistanceSpec ok_spec = DistanceSpec::parse("matrix:" + ok);
    const DistanceModel dm = load_distance(ok_spec, 2, {"a", "b"});
    CHECK(dm.d0 == doctest::Approx(2.0));

    CHECK_THROWS_WITH_AS(load_distance(ok_spec, 2, {"a", "zz"}), doctest::Contains("zz"),
                         IngestionError);
}

TEST_CASE("report: write, reload, identical labels; deterministic bytes") {
    const MembershipMatrix z = membership_m1(40, 4, 3);
    const DistanceModel dm_base = index_distance(40, 0.1);
    DistanceModel dm = dm_base;
    dm.delta = compute_delta(z, dm);
    const BlockIntensity omega = omega_simulation(z, 0.4);
    const std::vector<SimilarityView> views = {sample_view(z, omega, 0.1, {-1.0, 1.0}, 1.0, 4)};
    const ClusteringResult res = run_mvbsc(views, dm, 4, WeightRule::uniform(),
                                           BandwidthRule::simulation(z.n_max()),
                                           KMeansParams{}, 5);

    std::vector<std::string> ids;
    for (int i = 0; i < 40; ++i) ids.push_back("c" + std::to_string(i));

    const std::string report = temp_path("report.json");
    write_report(res, ids, 5, report);
    const auto loaded = load_labels(report);
    REQUIRE(loaded.size() == 40);
    for (const auto& [id, cluster] : loaded) {
        int idx = std::stoi(id.substr(1));
        CHECK(cluster == res.labels.labels[static_cast<size_t>(idx)] + 1);
    }

    const std::string report2 = temp_path("report2.json");
    write_report(res, ids, 5, report2);
    CHECK(read_bytes(report) == read_bytes(report2));

    const std::string labels_csv = temp_path("labels.csv");
    write_labels_csv(res.labels, ids, labels_csv);
    const auto csv_loaded = load_labels(labels_csv);
    CHECK(csv_loaded.size() == 40);
}

TEST_CASE("replication and summary csv shapes") {
    const std::vector<ReplicationRecord> records = {
        {"M1", "mvbsc_q", "medium", 25, 0, 0.95, 0.98},
        {"M1", "mvbsc_q", "medium", 25, 1, 0.97, 0.99},
    };
    const std::string rep_path = temp_path("reps.csv");
    write_replication_csv(records, rep_path);
    std::ifstream in(rep_path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "model,method,noise,K,replication,accuracy,nmi");

    const std::vector<SummaryRow> rows = {{"M1", "mvbsc_q", 0.96, 0.01, 0.985, 0.005}};
    const std::string sum_path = temp_path("summary.csv");
    write_summary_csv(rows, sum_path);
    std::ifstream sin(sum_path);
    std::getline(sin, header);
    CHECK(header == "model,method,acc_mean,acc_sd,nmi_mean,nmi_sd");
}

}  // TEST_SUITE
