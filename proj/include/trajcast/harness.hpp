#pragma once

#include "trajcast/bounds.hpp"
#include "trajcast/predictors.hpp"
#include "trajcast/risk.hpp"
#include "trajcast/sim.hpp"
#include "trajcast/windows.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace trajcast {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutDirEnvVar = "TRAJCAST_OUT_DIR";

// Validated tick data: strictly increasing timestamps, positive prices.
struct TickSeries {
    std::vector<double> timestamps; // UTC epoch seconds
    std::vector<double> prices;
    std::string instrument;

    std::size_t size() const { return timestamps.size(); }
};

struct TickSchema {
    std::string timestamp_col = "timestamp";
    std::string price_col = "price";
};

TickSeries ingest_ticks(const std::filesystem::path& file, const TickSchema& schema = {});
TickSeries ticks_from_csv(const std::string& content, const TickSchema& schema = {});

// One regular intraday grid obtained by last-observation-carried-forward.
struct SessionSeries {
    std::int64_t day = 0; // UTC day number (epoch / 86400)
    std::vector<double> values;
    double coverage = 0.0; // fraction of grid points with a prior tick that day
};

struct DroppedDay {
    std::int64_t day = 0;
    double coverage = 0.0;
};

struct SessionizeResult {
    std::vector<SessionSeries> sessions;
    std::vector<DroppedDay> dropped;
    long grid_points = 0;
};

// Resamples each UTC calendar day onto the grid [start_sec, end_sec] stepped
// by interval_sec. Grid values carry the last tick at or before the grid time
// (same day); leading points before the first tick are backfilled from it.
// Days whose coverage falls below min_coverage are dropped and reported.
SessionizeResult sessionize(const TickSeries& series, long start_sec, long end_sec,
                            long interval_sec, double min_coverage = 0.95);

// Builds one window pair per qualifying session, anchored at index L-1, with
// anchors offset so they increase across sessions. Sessions shorter than
// L + H are skipped and counted.
Dataset windows_from_sessions(const std::vector<SessionSeries>& sessions, int L, int H,
                              long* skipped = nullptr);

// "13:00", "13:00:30" or plain seconds-of-day.
long parse_time_of_day(const std::string& text);

enum class ExperimentMode { synthetic, ingest };

struct IngestSettings {
    std::filesystem::path data_path;
    TickSchema schema;
    long session_start = 13 * 3600;
    long session_end = 18 * 3600;
    long interval = 30;
    double min_coverage = 0.95;
};

struct ExperimentConfig {
    ExperimentMode mode = ExperimentMode::synthetic;
    ProcessModel process;
    long T = 20000;
    bool returns_view = false;
    std::optional<IngestSettings> ingest;
    int L = 20;
    int H = 30;
    int stride = 0; // 0 means "use H" (non-overlapping targets)
    std::array<double, 3> fractions{0.7, 0.1, 0.2};
    std::vector<std::string> predictors{"flat", "linear", "nn"};
    std::array<std::string, 2> compare{"nn", "flat"};
    int knn_k = 1;
    std::uint64_t seed = 1;
    std::filesystem::path out_dir;

    int effective_stride() const { return stride == 0 ? H : stride; }
    void validate() const;
    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
};

nlohmann::json process_model_to_json(const ProcessModel& model);
ProcessModel process_model_from_json(const nlohmann::json& j);

struct ManifestEntry {
    std::string name;
    std::string hash;
    std::size_t bytes = 0;
};

struct Manifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version = kVersion;
    std::vector<ManifestEntry> entries;

    std::string to_text() const;
};

struct RunResult {
    RiskReport report;
    std::map<std::string, std::vector<double>> losses_by_label;
    std::vector<long> test_anchors;
    SplitDataset split;
    std::filesystem::path out_dir;
    Manifest manifest;
};

// Full pipeline: simulate or ingest, window, split chronologically, fit on
// train, evaluate on test, compare, and write every artifact plus a manifest.
// Deterministic in (config, seed): repeated runs emit byte-identical files.
RunResult run_experiment(const ExperimentConfig& config);

// Builds the fitted predictor set for a config against a training set.
std::vector<std::unique_ptr<Predictor>> build_predictors(const ExperimentConfig& config,
                                                         const Dataset& train);

Manifest emit_risk_report(const RiskReport& report,
                          const std::map<std::string, std::vector<double>>& losses_by_label,
                          std::span<const long> test_anchors,
                          const std::filesystem::path& dir, const std::string& config_hash,
                          std::uint64_t seed);

Manifest emit_bound_report(const BoundReport& report, const std::filesystem::path& dir,
                           const std::string& config_hash);

// Settings for the verify-bounds pipeline; every section is optional.
struct BoundsConfig {
    DesignSpec design;
    std::uint64_t seed = 1;
    std::filesystem::path out_dir;

    bool run_coeff_mse = true;
    std::vector<long> mse_n_grid{50, 100, 200, 400, 800};
    long mse_reps = 2000;

    bool run_vn_tail = true;
    std::vector<std::pair<long, double>> vn_points{{30, 0.25}, {30, 0.5}, {60, 0.25}, {60, 0.5}};
    long vn_reps = 20000;

    bool run_ratio_tail = true;
    long ratio_n = 200;
    std::vector<double> ratio_t_grid{0.0, 0.002, 0.005, 0.01, 0.02};
    long ratio_reps = 5000;

    bool run_prop_risks = true;
    std::vector<long> risks_n_grid{50, 100, 200, 400};
    long risks_test_windows = 1000;
    long risks_reps = 200;

    bool run_erm = true;
    int erm_class_size = 5;
    std::vector<long> erm_n_grid{100, 1000, 10000};
    long erm_reps = 200;

    void validate() const;
    nlohmann::json to_json() const;
    static BoundsConfig from_json(const nlohmann::json& j);
};

struct BoundsRunResult {
    BoundReport report;
    std::filesystem::path out_dir;
    Manifest manifest;
};

BoundsRunResult run_verify_bounds(const BoundsConfig& config);

// Default output directory: config value, else $TRAJCAST_OUT_DIR, else "out".
std::filesystem::path resolve_out_dir(const std::filesystem::path& configured);

} // namespace trajcast
