#include "trajcast/harness.hpp"

#include "trajcast/errors.hpp"
#include "trajcast/io.hpp"
#include "trajcast/rng.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace trajcast;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("trajcast_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// One synthetic trading day of ticks on the 30s grid.
std::string grid_day_csv(std::int64_t day, long start_sec, long points, double base_price) {
    std::ostringstream os;
    os << "timestamp,price\n";
    for (long k = 0; k < points; ++k) {
        os << day * 86400 + start_sec + 30 * k << ',' << format_double(base_price + 0.001 * k)
           << "\n";
    }
    return os.str();
}

} // namespace

TEST_CASE("tick ingestion accepts a two-row file") {
    const TickSeries s = ticks_from_csv("timestamp,price\n0,1.0\n30,1.1\n");
    REQUIRE(s.size() == 2);
    CHECK(s.timestamps[0] == 0.0);
    CHECK(s.prices[1] == 1.1);
}

TEST_CASE("tick ingestion rejects out-of-order rows by line") {
    try {
        ticks_from_csv("timestamp,price\n0,1.0\n30,1.1\n20,1.2\n");
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
        CHECK(std::string(e.what()).find("out of order") != std::string::npos);
    }
}

TEST_CASE("tick ingestion rejects non-numeric prices by line") {
    try {
        ticks_from_csv("timestamp,price\n0,1.0\n30,oops\n");
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(ticks_from_csv("timestamp,price\n0,-1.0\n"), IngestError);
}

TEST_CASE("tick ingestion edge cases") {
    CHECK_THROWS_AS(ticks_from_csv(""), InsufficientDataError);
    CHECK_THROWS_AS(ticks_from_csv("timestamp,price\n"), InsufficientDataError);
    CHECK_THROWS_AS(ticks_from_csv("time,price\n0,1\n"), ConfigError);
    // Custom schema.
    const TickSeries s =
        ticks_from_csv("when,bid,mid\n10,0.9,1.0\n40,0.95,1.05\n", TickSchema{"when", "mid"});
    REQUIRE(s.size() == 2);
    CHECK(s.prices[1] == 1.05);
}

TEST_CASE("a five-hour session at 30s spacing has 601 grid points") {
    const std::string csv = grid_day_csv(19000, 13 * 3600, 601, 1.0);
    const TickSeries ticks = ticks_from_csv(csv);
    const SessionizeResult sr = sessionize(ticks, 13 * 3600, 18 * 3600, 30);
    CHECK(sr.grid_points == 601);
    REQUIRE(sr.sessions.size() == 1);
    CHECK(sr.sessions[0].values.size() == 601);
    CHECK(sr.sessions[0].coverage == 1.0);
    // Idempotence: a series already on the grid comes back unchanged.
    for (long k = 0; k < 601; ++k) {
        CHECK(sr.sessions[0].values[static_cast<std::size_t>(k)] ==
              ticks.prices[static_cast<std::size_t>(k)]);
    }
}

TEST_CASE("a single tick at session start with threshold zero gives a constant path") {
    std::ostringstream os;
    os << "timestamp,price\n" << 19000L * 86400 + 13 * 3600 << ",1.25\n";
    const TickSeries ticks = ticks_from_csv(os.str());
    const SessionizeResult sr = sessionize(ticks, 13 * 3600, 18 * 3600, 30, 0.0);
    REQUIRE(sr.sessions.size() == 1);
    for (double v : sr.sessions[0].values) {
        CHECK(v == 1.25);
    }
}

TEST_CASE("low-coverage days are dropped and reported") {
    // Day A fully covered, day B has one tick at 17:30 (coverage 1/601-ish).
    std::string csv = grid_day_csv(19000, 13 * 3600, 601, 1.0);
    csv += std::to_string(19001L * 86400 + 17 * 3600 + 1800) + ",2.0\n";
    const TickSeries ticks = ticks_from_csv(csv);
    const SessionizeResult sr = sessionize(ticks, 13 * 3600, 18 * 3600, 30, 0.95);
    CHECK(sr.sessions.size() == 1);
    REQUIRE(sr.dropped.size() == 1);
    CHECK(sr.dropped[0].day == 19001);
    CHECK(sr.dropped[0].coverage < 0.95);
    // With the threshold at zero the same day is kept, backfilled at the front.
    const SessionizeResult keep = sessionize(ticks, 13 * 3600, 18 * 3600, 30, 0.0);
    CHECK(keep.sessions.size() == 2);
    CHECK(keep.sessions[1].values.front() == 2.0);
}

TEST_CASE("sessionize validates its grid") {
    const TickSeries ticks = ticks_from_csv("timestamp,price\n0,1\n30,1\n");
    CHECK_THROWS_AS(sessionize(ticks, 18 * 3600, 13 * 3600, 30), ConfigError);
    CHECK_THROWS_AS(sessionize(ticks, 13 * 3600, 18 * 3600, 7), ConfigError);
    CHECK_THROWS_AS(sessionize(ticks, 13 * 3600, 18 * 3600, 30, 2.0), ConfigError);
    // All days below threshold: no qualifying days.
    std::ostringstream os;
    os << "timestamp,price\n" << 19000L * 86400 + 17 * 3600 << ",1.0\n";
    CHECK_THROWS_AS(sessionize(ticks_from_csv(os.str()), 13 * 3600, 18 * 3600, 30, 0.95),
                    InsufficientDataError);
}

TEST_CASE("one window per session with increasing anchors") {
    std::vector<SessionSeries> sessions;
    for (int s = 0; s < 5; ++s) {
        SessionSeries session;
        session.day = 19000 + s;
        session.values.assign(10, static_cast<double>(s));
        sessions.push_back(std::move(session));
    }
    sessions[2].values.resize(3); // too short for L + H
    long skipped = 0;
    const Dataset ds = windows_from_sessions(sessions, 3, 2, &skipped);
    CHECK(skipped == 1);
    REQUIRE(ds.size() == 4);
    for (std::size_t i = 1; i < ds.size(); ++i) {
        CHECK(ds.pairs[i].t > ds.pairs[i - 1].t);
    }
    CHECK(ds.pairs[0].t == 2);
    CHECK(ds.pairs[0].input.size() == 3);
    CHECK(ds.pairs[0].target.size() == 2);
}

TEST_CASE("parse_time_of_day") {
    CHECK(parse_time_of_day("13:00") == 46800);
    CHECK(parse_time_of_day("13:00:30") == 46830);
    CHECK(parse_time_of_day("46800") == 46800);
    CHECK_THROWS_AS(parse_time_of_day("25:00"), ConfigError);
    CHECK_THROWS_AS(parse_time_of_day("abc"), ConfigError);
}

TEST_CASE("experiment config JSON round-trips canonically") {
    ExperimentConfig cfg;
    cfg.mode = ExperimentMode::synthetic;
    cfg.process.kind = ProcessKind::heteroskedastic_martingale;
    cfg.process.x0 = 10.0;
    cfg.process.sigma = 0.2;
    cfg.process.vol = VolParams{0.001, 0.1, 0.85};
    cfg.T = 5000;
    cfg.L = 12;
    cfg.H = 6;
    cfg.stride = 2;
    cfg.seed = 99;
    cfg.predictors = {"flat", "zero", "linear", "nn", "knn"};
    cfg.compare = {"knn3", "flat"};
    cfg.knn_k = 3;
    const nlohmann::json j = cfg.to_json();
    const ExperimentConfig back = ExperimentConfig::from_json(j);
    CHECK(back.to_json().dump() == j.dump());
    CHECK_NOTHROW(back.validate());
}

TEST_CASE("config validation catches the H = 0 case before any work") {
    ExperimentConfig cfg;
    cfg.H = 0;
    cfg.out_dir = fresh_dir("h0") / "nested";
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
    CHECK(!fs::exists(cfg.out_dir));
}

TEST_CASE("config validation catches bad compare labels and predictors") {
    ExperimentConfig cfg;
    cfg.predictors = {"flat", "warp"};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.predictors = {"flat", "nn"};
    cfg.compare = {"nn", "linear"};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.compare = {"nn", "nn"};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.compare = {"nn", "flat"};
    CHECK_NOTHROW(cfg.validate());
    cfg.returns_view = true;
    cfg.predictors = {"flat", "nn", "oracle"};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("run_experiment is byte-deterministic in (config, seed)") {
    ExperimentConfig cfg;
    cfg.process.kind = ProcessKind::gaussian_random_walk;
    cfg.process.x0 = 2.0;
    cfg.process.sigma = 0.05;
    cfg.T = 3000;
    cfg.L = 6;
    cfg.H = 4;
    cfg.seed = 42;
    cfg.predictors = {"flat", "linear", "nn"};
    cfg.compare = {"nn", "flat"};

    cfg.out_dir = fresh_dir("det_a");
    const RunResult a = run_experiment(cfg);
    cfg.out_dir = fresh_dir("det_b");
    const RunResult b = run_experiment(cfg);

    for (const char* name : {"summary.json", "manifest.txt", "losses.csv", "path.csv",
                             "train.csv", "test.csv", "predictors.json"}) {
        CHECK(read_file(a.out_dir / name) == read_file(b.out_dir / name));
    }
    // A different seed changes the report.
    cfg.seed = 43;
    cfg.out_dir = fresh_dir("det_c");
    const RunResult c = run_experiment(cfg);
    CHECK(read_file(a.out_dir / "summary.json") != read_file(c.out_dir / "summary.json"));
}

TEST_CASE("flat forecasting wins a martingale price experiment") {
    // ~1200 windows at stride H; the fitted coefficient lands within noise of
    // 1, so the flat/linear gap at this sample size is pinned by the seed.
    ExperimentConfig cfg;
    cfg.process.kind = ProcessKind::gaussian_random_walk;
    cfg.process.x0 = 1.0;
    cfg.process.sigma = 0.1;
    cfg.T = 36021;
    cfg.L = 20;
    cfg.H = 30;
    cfg.seed = 22;
    cfg.predictors = {"flat", "linear", "nn"};
    cfg.compare = {"nn", "flat"};
    cfg.out_dir = fresh_dir("flat_wins");
    const RunResult result = run_experiment(cfg);

    const auto& risks = result.report.mean_risk;
    CHECK(risks.at("flat") < risks.at("linear"));
    CHECK(risks.at("flat") < risks.at("nn"));

    // Independent route: rebuild the flat losses from the recorded
    // innovations (the target minus the anchor value is the accumulated
    // noise over the horizon).
    const Path path = load_path_csv(result.out_dir / "path.csv");
    double oracle_sum = 0.0;
    for (const WindowPair& p : result.split.test.pairs) {
        double cum = 0.0;
        for (int h = 1; h <= cfg.H; ++h) {
            cum += path.innovations[static_cast<std::size_t>(p.t + h - 1)];
            const double err = cum;
            oracle_sum += err * err;
        }
    }
    const double oracle_flat = oracle_sum / static_cast<double>(result.split.test.size());
    CHECK(risks.at("flat") == doctest::Approx(oracle_flat).epsilon(1e-10));
}

TEST_CASE("manifest lists every artifact with its content hash") {
    ExperimentConfig cfg;
    cfg.process.sigma = 0.1;
    cfg.process.x0 = 1.0;
    cfg.T = 800;
    cfg.L = 4;
    cfg.H = 2;
    cfg.seed = 7;
    cfg.out_dir = fresh_dir("manifest");
    const RunResult result = run_experiment(cfg);

    REQUIRE(!result.manifest.entries.empty());
    std::size_t files_on_disk = 0;
    for (const auto& entry : fs::directory_iterator(result.out_dir)) {
        if (entry.path().filename() == "manifest.txt") continue;
        ++files_on_disk;
    }
    CHECK(files_on_disk == result.manifest.entries.size());
    for (const ManifestEntry& e : result.manifest.entries) {
        const std::string content = read_file(result.out_dir / e.name);
        CHECK(content.size() == e.bytes);
        CHECK(fnv1a64_hex(content) == e.hash);
    }
    const std::string text = read_file(result.out_dir / "manifest.txt");
    for (const ManifestEntry& e : result.manifest.entries) {
        CHECK(text.find(e.name) != std::string::npos);
        CHECK(text.find(e.hash) != std::string::npos);
    }
}

TEST_CASE("risk report emission round-trips") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    const std::vector<double> b{2.0, 2.0, 1.0};
    const RiskReport report = compare_report(a, b, "nn", "flat");
    const fs::path dir = fresh_dir("emit");
    const Manifest manifest =
        emit_risk_report(report, {{"nn", a}, {"flat", b}}, {}, dir, "deadbeef", 5);
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(fs::exists(dir / "ecdf_nn.csv"));
    CHECK(fs::exists(dir / "ecdf_flat.csv"));
    CHECK(fs::exists(dir / "logratio.csv"));
    CHECK(manifest.entries.size() >= 4);

    const nlohmann::json j = nlohmann::json::parse(read_file(dir / "summary.json"));
    CHECK(j.at("risk_ratio_a_over_b").get<double>() == report.risk_ratio_a_over_b);
    CHECK(j.at("win_rate_a_over_b").get<double>() == report.win_rate_a_over_b);
    CHECK(j.at("mean_risk").at("nn").get<double>() == report.mean_risk.at("nn"));

    // ECDF CSV re-parses to the same points.
    std::istringstream in(read_file(dir / "ecdf_nn.csv"));
    std::string line;
    std::getline(in, line);
    std::size_t i = 0;
    while (std::getline(in, line)) {
        const auto cells = split_csv_line(line);
        REQUIRE(cells.size() == 2);
        CHECK(parse_double(cells[0]) == report.ecdf_by_label.at("nn")[i].value);
        CHECK(parse_double(cells[1]) == report.ecdf_by_label.at("nn")[i].fraction);
        ++i;
    }
    CHECK(i == report.ecdf_by_label.at("nn").size());

    CHECK_THROWS_AS(emit_risk_report(report, {}, {}, fs::path{}, "x", 0), IoError);
}

TEST_CASE("bound report emission writes one row per grid point") {
    BoundReport report;
    report.design = DesignSpec{};
    report.seed = 3;
    report.mse.points = {{50, 1e-3, 1e-5, 4e-3, 1e-5, 0},
                         {100, 5e-4, 5e-6, 2e-3, 5e-6, 0},
                         {200, 2.5e-4, 2e-6, 1e-3, 2e-6, 0}};
    report.mse.loglog_slope = -1.0;
    report.mse_reps = 1000;
    const fs::path dir = fresh_dir("emit_bounds");
    const Manifest manifest = emit_bound_report(report, dir, "cafe");
    CHECK(manifest.entries.size() == 2); // summary.json + curves.csv
    std::istringstream in(read_file(dir / "curves.csv"));
    std::string line;
    std::size_t rows = 0;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 3);
}

TEST_CASE("ingest-mode experiment runs end to end") {
    // Two full synthetic days on the grid plus one sparse day that gets dropped.
    std::string csv = grid_day_csv(19000, 13 * 3600, 601, 1.0);
    {
        std::istringstream in(grid_day_csv(19001, 13 * 3600, 601, 1.1));
        std::string line;
        std::getline(in, line); // skip header
        while (std::getline(in, line)) {
            csv += line + "\n";
        }
    }
    csv += std::to_string(19002L * 86400 + 16 * 3600) + ",2.0\n";
    const fs::path dir = fresh_dir("ingest_run");
    write_file(dir / "ticks.csv", csv);

    ExperimentConfig cfg;
    cfg.mode = ExperimentMode::ingest;
    cfg.ingest = IngestSettings{};
    cfg.ingest->data_path = dir / "ticks.csv";
    cfg.L = 200;
    cfg.H = 50;
    cfg.fractions = {0.5, 0.25, 0.25};
    cfg.predictors = {"flat", "linear"};
    cfg.compare = {"linear", "flat"};
    cfg.out_dir = dir / "out";
    const RunResult result = run_experiment(cfg);
    CHECK(result.report.n == 1);
    CHECK(fs::exists(result.out_dir / "sessions.csv"));
    CHECK(fs::exists(result.out_dir / "dropped_days.csv"));
}
