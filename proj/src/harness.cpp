#include "trajcast/harness.hpp"

#include "trajcast/errors.hpp"
#include "trajcast/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace trajcast {

namespace {

// Rethrows module errors with a pipeline stage label, preserving the type so
// exit-code mapping still works.
template <typename F>
auto with_stage(const std::string& stage, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError("[" + stage + "] " + e.what());
    } catch (const InvalidInputError& e) {
        throw InvalidInputError("[" + stage + "] " + e.what());
    } catch (const InsufficientDataError& e) {
        throw InsufficientDataError("[" + stage + "] " + e.what());
    } catch (const DegenerateDesignError& e) {
        throw DegenerateDesignError("[" + stage + "] " + e.what());
    } catch (const IngestError& e) {
        throw IngestError("[" + stage + "] " + e.what());
    } catch (const IoError& e) {
        throw IoError("[" + stage + "] " + e.what());
    } catch (const Error& e) {
        throw Error("[" + stage + "] " + e.what());
    }
}

struct ArtifactWriter {
    fs::path dir;
    std::vector<ManifestEntry> entries;

    explicit ArtifactWriter(const fs::path& d) : dir(d) {
        if (dir.empty()) {
            throw IoError("empty output directory");
        }
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) {
            throw IoError("cannot create output directory: " + dir.string());
        }
    }

    void write(const std::string& name, std::string_view content) {
        write_file(dir / name, content);
        entries.push_back({name, fnv1a64_hex(content), content.size()});
    }
};

std::string ecdf_csv(const std::vector<EcdfPoint>& points) {
    std::ostringstream os;
    os << "loss,cum_fraction\n";
    for (const EcdfPoint& p : points) {
        os << format_double(p.value) << ',' << format_double(p.fraction) << "\n";
    }
    return os.str();
}

std::string logratio_csv(const RiskReport& report) {
    std::ostringstream os;
    os << "t,log10_ratio\n";
    for (std::size_t i = 0; i < report.log10_ratios.size(); ++i) {
        os << report.ratio_anchors[i] << ',' << format_double(report.log10_ratios[i]) << "\n";
    }
    return os.str();
}

std::string losses_csv(const std::map<std::string, std::vector<double>>& losses_by_label,
                       std::span<const long> anchors) {
    std::ostringstream os;
    os << "t";
    for (const auto& [label, _] : losses_by_label) {
        os << ',' << label;
    }
    os << "\n";
    const std::size_t n = losses_by_label.begin()->second.size();
    for (std::size_t i = 0; i < n; ++i) {
        os << (i < anchors.size() ? anchors[i] : static_cast<long>(i));
        for (const auto& [_, losses] : losses_by_label) {
            os << ',' << format_double(losses[i]);
        }
        os << "\n";
    }
    return os.str();
}

void append_risk_report_files(ArtifactWriter& writer, const RiskReport& report,
                              const std::map<std::string, std::vector<double>>& losses_by_label,
                              std::span<const long> anchors) {
    writer.write("summary.json", risk_report_to_json(report).dump(2) + "\n");
    for (const auto& [label, points] : report.ecdf_by_label) {
        writer.write("ecdf_" + label + ".csv", ecdf_csv(points));
    }
    writer.write("logratio.csv", logratio_csv(report));
    if (!losses_by_label.empty()) {
        writer.write("losses.csv", losses_csv(losses_by_label, anchors));
    }
}

Manifest finish_manifest(ArtifactWriter& writer, const std::string& config_hash,
                         std::uint64_t seed) {
    Manifest manifest;
    manifest.config_hash = config_hash;
    manifest.seed = seed;
    manifest.entries = writer.entries;
    std::sort(manifest.entries.begin(), manifest.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.name < b.name; });
    write_file(writer.dir / "manifest.txt", manifest.to_text());
    return manifest;
}

} // namespace

TickSeries ticks_from_csv(const std::string& content, const TickSchema& schema) {
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) {
        throw InsufficientDataError("ingest: empty tick file");
    }
    const auto header = split_csv_line(line);
    long ts_col = -1;
    long px_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == schema.timestamp_col) ts_col = static_cast<long>(i);
        if (header[i] == schema.price_col) px_col = static_cast<long>(i);
    }
    if (ts_col < 0 || px_col < 0) {
        throw ConfigError("ingest: columns '" + schema.timestamp_col + "' and '" +
                          schema.price_col + "' not both present in header");
    }

    TickSeries series;
    std::vector<std::string> problems;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() <= static_cast<std::size_t>(std::max(ts_col, px_col))) {
            problems.push_back("line " + std::to_string(line_no) + ": too few columns");
            continue;
        }
        double ts = 0.0;
        double px = 0.0;
        if (!try_parse_double(cells[static_cast<std::size_t>(ts_col)], ts)) {
            problems.push_back("line " + std::to_string(line_no) + ": bad timestamp '" +
                               cells[static_cast<std::size_t>(ts_col)] + "'");
            continue;
        }
        if (!try_parse_double(cells[static_cast<std::size_t>(px_col)], px)) {
            problems.push_back("line " + std::to_string(line_no) + ": bad price '" +
                               cells[static_cast<std::size_t>(px_col)] + "'");
            continue;
        }
        if (!(px > 0.0) || !std::isfinite(px)) {
            problems.push_back("line " + std::to_string(line_no) + ": price must be > 0");
            continue;
        }
        if (!series.timestamps.empty() && ts <= series.timestamps.back()) {
            problems.push_back("line " + std::to_string(line_no) + ": timestamp out of order");
            continue;
        }
        series.timestamps.push_back(ts);
        series.prices.push_back(px);
    }
    if (!problems.empty()) {
        std::string msg = "ingest: " + std::to_string(problems.size()) + " bad row(s): ";
        const std::size_t shown = std::min<std::size_t>(problems.size(), 8);
        for (std::size_t i = 0; i < shown; ++i) {
            msg += (i ? "; " : "") + problems[i];
        }
        if (problems.size() > shown) {
            msg += "; ...";
        }
        throw IngestError(msg);
    }
    if (series.timestamps.empty()) {
        throw InsufficientDataError("ingest: no data rows");
    }
    return series;
}

TickSeries ingest_ticks(const fs::path& file, const TickSchema& schema) {
    return ticks_from_csv(read_file(file), schema);
}

SessionizeResult sessionize(const TickSeries& series, long start_sec, long end_sec,
                            long interval_sec, double min_coverage) {
    if (!(0 <= start_sec && start_sec < end_sec && end_sec <= 86400)) {
        throw ConfigError("sessionize: need 0 <= start < end <= 86400");
    }
    if (interval_sec < 1 || (end_sec - start_sec) % interval_sec != 0) {
        throw ConfigError("sessionize: interval must divide the session length");
    }
    if (min_coverage < 0.0 || min_coverage > 1.0) {
        throw ConfigError("sessionize: min_coverage must lie in [0, 1]");
    }

    const long grid_points = (end_sec - start_sec) / interval_sec + 1;
    SessionizeResult result;
    result.grid_points = grid_points;

    std::size_t i = 0;
    const std::size_t n = series.size();
    while (i < n) {
        const auto day = static_cast<std::int64_t>(std::floor(series.timestamps[i] / 86400.0));
        std::size_t day_end = i;
        while (day_end < n &&
               static_cast<std::int64_t>(std::floor(series.timestamps[day_end] / 86400.0)) == day) {
            ++day_end;
        }

        const double base = static_cast<double>(day) * 86400.0;
        std::vector<double> values(static_cast<std::size_t>(grid_points));
        long covered = 0;
        long first_covered = grid_points;
        std::size_t cursor = i;
        double last_price = 0.0;
        bool have_last = false;
        for (long k = 0; k < grid_points; ++k) {
            const double grid_time = base + static_cast<double>(start_sec + k * interval_sec);
            while (cursor < day_end && series.timestamps[cursor] <= grid_time) {
                last_price = series.prices[cursor];
                have_last = true;
                ++cursor;
            }
            if (have_last) {
                values[static_cast<std::size_t>(k)] = last_price;
                if (first_covered == grid_points) {
                    first_covered = k;
                }
                ++covered;
            }
        }
        const double coverage = static_cast<double>(covered) / static_cast<double>(grid_points);
        if (coverage < min_coverage) {
            result.dropped.push_back({day, coverage});
        } else {
            // Backfill any leading points before the first same-day tick.
            const double fill = first_covered < grid_points
                                    ? values[static_cast<std::size_t>(first_covered)]
                                    : series.prices[i];
            for (long k = 0; k < std::min(first_covered, grid_points); ++k) {
                values[static_cast<std::size_t>(k)] = fill;
            }
            if (first_covered == grid_points) {
                std::fill(values.begin(), values.end(), fill);
            }
            result.sessions.push_back({day, std::move(values), coverage});
        }
        i = day_end;
    }

    if (result.sessions.empty()) {
        throw InsufficientDataError("sessionize: no qualifying days");
    }
    return result;
}

Dataset windows_from_sessions(const std::vector<SessionSeries>& sessions, int L, int H,
                              long* skipped) {
    if (L < 1 || H < 1) {
        throw ConfigError("windows_from_sessions: L and H must be >= 1");
    }
    Dataset ds;
    ds.L = L;
    ds.H = H;
    ds.stride = 1;
    long offset = 0;
    long skip_count = 0;
    for (const SessionSeries& s : sessions) {
        const long len = static_cast<long>(s.values.size());
        if (len < L + H) {
            ++skip_count;
            offset += len;
            continue;
        }
        WindowPair pair;
        pair.t = offset + L - 1;
        pair.input.assign(s.values.begin(), s.values.begin() + L);
        pair.target.assign(s.values.begin() + L, s.values.begin() + L + H);
        ds.pairs.push_back(std::move(pair));
        offset += len;
    }
    if (skipped != nullptr) {
        *skipped = skip_count;
    }
    if (ds.empty()) {
        throw InsufficientDataError("windows_from_sessions: no session is long enough for L + H");
    }
    return ds;
}

long parse_time_of_day(const std::string& text) {
    if (text.find(':') == std::string::npos) {
        try {
            const long sec = std::stol(text);
            if (sec < 0 || sec > 86400) {
                throw ConfigError("time of day out of range: " + text);
            }
            return sec;
        } catch (const std::logic_error&) {
            throw ConfigError("cannot parse time of day: " + text);
        }
    }
    int h = 0;
    int m = 0;
    int s = 0;
    const int fields = std::sscanf(text.c_str(), "%d:%d:%d", &h, &m, &s);
    if (fields < 2 || h < 0 || h > 24 || m < 0 || m > 59 || s < 0 || s > 59) {
        throw ConfigError("cannot parse time of day: " + text);
    }
    const long sec = 3600L * h + 60L * m + s;
    if (sec > 86400) {
        throw ConfigError("time of day out of range: " + text);
    }
    return sec;
}

namespace {

const std::set<std::string>& known_predictors() {
    static const std::set<std::string> names{"flat", "zero", "linear", "nn", "knn", "oracle"};
    return names;
}

std::string predictor_label(const std::string& name, int knn_k) {
    if (name == "knn") {
        return "knn" + std::to_string(knn_k);
    }
    return name;
}

} // namespace

void ExperimentConfig::validate() const {
    if (L < 1 || H < 1) {
        throw ConfigError("invalid config: L and H must be >= 1");
    }
    if (stride < 0) {
        throw ConfigError("invalid config: stride must be >= 0 (0 = use H)");
    }
    if (knn_k < 1) {
        throw ConfigError("invalid config: knn_k must be >= 1");
    }
    double frac_sum = 0.0;
    for (double f : fractions) {
        if (!(f > 0.0)) {
            throw ConfigError("invalid config: split fractions must be positive");
        }
        frac_sum += f;
    }
    if (std::abs(frac_sum - 1.0) > 1e-9) {
        throw ConfigError("invalid config: split fractions must sum to 1");
    }
    if (predictors.empty()) {
        throw ConfigError("invalid config: predictor list is empty");
    }
    std::set<std::string> labels;
    for (const std::string& name : predictors) {
        if (known_predictors().count(name) == 0) {
            throw ConfigError("invalid config: unknown predictor '" + name + "'");
        }
        labels.insert(predictor_label(name, knn_k));
    }
    for (const std::string& side : compare) {
        if (labels.count(side) == 0) {
            throw ConfigError("invalid config: compare label '" + side +
                              "' is not among the configured predictors");
        }
    }
    if (compare[0] == compare[1]) {
        throw ConfigError("invalid config: compare labels must differ");
    }
    if (mode == ExperimentMode::synthetic) {
        if (T < 2) {
            throw ConfigError("invalid config: T must be >= 2");
        }
        process.validate();
        const bool has_oracle =
            std::find(predictors.begin(), predictors.end(), "oracle") != predictors.end();
        if (has_oracle && returns_view) {
            throw ConfigError("invalid config: the oracle predictor is not available on the "
                              "returns view; the zero predictor is the conditional mean there");
        }
    } else {
        if (!ingest || ingest->data_path.empty()) {
            throw ConfigError("invalid config: ingest mode needs a data path");
        }
        if (std::find(predictors.begin(), predictors.end(), "oracle") != predictors.end()) {
            throw ConfigError("invalid config: the oracle predictor needs a simulated process");
        }
    }
}

nlohmann::json process_model_to_json(const ProcessModel& model) {
    nlohmann::json j;
    j["kind"] = to_string(model.kind);
    j["x0"] = model.x0;
    j["sigma"] = model.sigma;
    if (model.vol) {
        j["vol"] = {{"omega", model.vol->omega}, {"alpha", model.vol->alpha},
                    {"beta", model.vol->beta}};
        j["v_max"] = model.effective_v_max();
    }
    if (model.structure) {
        j["structure"] = {{"amplitude", model.structure->amplitude},
                          {"period", model.structure->period},
                          {"trend", model.structure->trend}};
    }
    return j;
}

ProcessModel process_model_from_json(const nlohmann::json& j) {
    ProcessModel model;
    model.kind = process_kind_from_string(j.at("kind").get<std::string>());
    model.x0 = j.value("x0", 0.0);
    model.sigma = j.value("sigma", 0.0);
    if (j.contains("vol")) {
        const nlohmann::json& v = j.at("vol");
        model.vol = VolParams{v.at("omega").get<double>(), v.at("alpha").get<double>(),
                              v.at("beta").get<double>()};
        model.v_max = j.value("v_max", -1.0);
    }
    if (j.contains("structure")) {
        const nlohmann::json& s = j.at("structure");
        model.structure = StructureParams{s.at("amplitude").get<double>(),
                                          s.at("period").get<long>(),
                                          s.at("trend").get<double>()};
    }
    return model;
}

// out_dir is deliberately excluded: it is environment, not experiment
// identity, so moving the output directory does not change the config hash.
nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["mode"] = mode == ExperimentMode::synthetic ? "synthetic" : "ingest";
    j["seed"] = seed;
    j["L"] = L;
    j["H"] = H;
    j["stride"] = stride;
    j["fractions"] = fractions;
    j["predictors"] = predictors;
    j["compare"] = compare;
    j["knn_k"] = knn_k;
    j["returns_view"] = returns_view;
    if (mode == ExperimentMode::synthetic) {
        j["process"] = process_model_to_json(process);
        j["T"] = T;
    } else {
        j["ingest"] = {{"data_path", ingest->data_path.string()},
                       {"timestamp_col", ingest->schema.timestamp_col},
                       {"price_col", ingest->schema.price_col},
                       {"session_start", ingest->session_start},
                       {"session_end", ingest->session_end},
                       {"interval", ingest->interval},
                       {"min_coverage", ingest->min_coverage}};
    }
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    const std::string mode = j.value("mode", "synthetic");
    if (mode == "synthetic") {
        cfg.mode = ExperimentMode::synthetic;
    } else if (mode == "ingest") {
        cfg.mode = ExperimentMode::ingest;
    } else {
        throw ConfigError("invalid config: unknown mode '" + mode + "'");
    }
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.L = j.value("L", 20);
    cfg.H = j.value("H", 30);
    cfg.stride = j.value("stride", 0);
    if (j.contains("fractions")) {
        cfg.fractions = j.at("fractions").get<std::array<double, 3>>();
    }
    if (j.contains("predictors")) {
        cfg.predictors = j.at("predictors").get<std::vector<std::string>>();
    }
    if (j.contains("compare")) {
        cfg.compare = j.at("compare").get<std::array<std::string, 2>>();
    }
    cfg.knn_k = j.value("knn_k", 1);
    cfg.returns_view = j.value("returns_view", false);
    if (j.contains("process")) {
        cfg.process = process_model_from_json(j.at("process"));
    }
    cfg.T = j.value("T", long{20000});
    if (j.contains("ingest")) {
        const nlohmann::json& g = j.at("ingest");
        IngestSettings settings;
        settings.data_path = g.value("data_path", std::string{});
        settings.schema.timestamp_col = g.value("timestamp_col", std::string{"timestamp"});
        settings.schema.price_col = g.value("price_col", std::string{"price"});
        settings.session_start = g.value("session_start", long{13 * 3600});
        settings.session_end = g.value("session_end", long{18 * 3600});
        settings.interval = g.value("interval", long{30});
        settings.min_coverage = g.value("min_coverage", 0.95);
        cfg.ingest = settings;
    }
    if (j.contains("out_dir")) {
        cfg.out_dir = j.at("out_dir").get<std::string>();
    }
    return cfg;
}

std::string Manifest::to_text() const {
    std::ostringstream os;
    os << "# trajcast manifest v1\n";
    os << "version=" << version << "\n";
    os << "config_hash=" << config_hash << "\n";
    os << "seed=" << seed << "\n";
    for (const ManifestEntry& e : entries) {
        os << "artifact " << e.name << " bytes=" << e.bytes << " fnv1a64=" << e.hash << "\n";
    }
    return os.str();
}

std::vector<std::unique_ptr<Predictor>> build_predictors(const ExperimentConfig& config,
                                                         const Dataset& train) {
    std::vector<std::unique_ptr<Predictor>> out;
    for (const std::string& name : config.predictors) {
        if (name == "flat") {
            out.push_back(std::make_unique<FlatPredictor>(config.H));
        } else if (name == "zero") {
            out.push_back(std::make_unique<ZeroPredictor>(config.H));
        } else if (name == "linear") {
            out.push_back(std::make_unique<LinearPredictor>(fit_linear_one_param(train)));
        } else if (name == "nn") {
            out.push_back(
                std::make_unique<NNPredictor>(NNIndex::from_dataset(train), 1, "train.csv"));
        } else if (name == "knn") {
            out.push_back(std::make_unique<NNPredictor>(NNIndex::from_dataset(train),
                                                        config.knn_k, "train.csv"));
        } else if (name == "oracle") {
            OracleSpec spec;
            spec.model = config.process;
            spec.mode = config.process.kind == ProcessKind::structured_seasonal
                            ? OracleMode::structured_mean
                            : OracleMode::flat_martingale;
            out.push_back(std::make_unique<OraclePredictor>(spec, config.H));
        } else {
            throw ConfigError("unknown predictor '" + name + "'");
        }
    }
    return out;
}

RunResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const std::string config_hash = fnv1a64_hex(config.to_json().dump());
    const fs::path out_dir = resolve_out_dir(config.out_dir);
    ArtifactWriter writer(out_dir);

    Dataset all;
    if (config.mode == ExperimentMode::synthetic) {
        Path path = with_stage("simulate", [&] {
            return simulate_path(config.process, config.T, config.seed);
        });
        if (config.returns_view) {
            path = with_stage("returns", [&] { return path_to_returns(path); });
        }
        writer.write("path.csv", path_to_csv(path));
        all = with_stage("windows", [&] {
            return make_windows(path, config.L, config.H, config.effective_stride());
        });
    } else {
        const TickSeries ticks = with_stage("ingest", [&] {
            return ingest_ticks(config.ingest->data_path, config.ingest->schema);
        });
        SessionizeResult sr = with_stage("sessionize", [&] {
            return sessionize(ticks, config.ingest->session_start, config.ingest->session_end,
                              config.ingest->interval, config.ingest->min_coverage);
        });
        if (config.returns_view) {
            for (SessionSeries& s : sr.sessions) {
                std::vector<double> diffs(s.values.size() - 1);
                for (std::size_t k = 0; k + 1 < s.values.size(); ++k) {
                    diffs[k] = s.values[k + 1] - s.values[k];
                }
                s.values = std::move(diffs);
            }
        }
        {
            std::ostringstream os;
            os << "session,day,t,value\n";
            for (std::size_t s = 0; s < sr.sessions.size(); ++s) {
                const SessionSeries& session = sr.sessions[s];
                for (std::size_t k = 0; k < session.values.size(); ++k) {
                    os << s << ',' << session.day << ',' << k << ','
                       << format_double(session.values[k]) << "\n";
                }
            }
            writer.write("sessions.csv", os.str());
        }
        if (!sr.dropped.empty()) {
            std::ostringstream os;
            os << "day,coverage\n";
            for (const DroppedDay& d : sr.dropped) {
                os << d.day << ',' << format_double(d.coverage) << "\n";
            }
            writer.write("dropped_days.csv", os.str());
        }
        all = with_stage("windows", [&] {
            return windows_from_sessions(sr.sessions, config.L, config.H);
        });
    }

    RunResult result;
    result.out_dir = out_dir;
    result.split = with_stage("split", [&] { return chrono_split(all, config.fractions); });
    writer.write("train.csv", dataset_to_csv(result.split.train));
    writer.write("val.csv", dataset_to_csv(result.split.val));
    writer.write("test.csv", dataset_to_csv(result.split.test));

    const auto predictors = with_stage("fit", [&] {
        return build_predictors(config, result.split.train);
    });
    {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : predictors) {
            arr.push_back(p->to_json());
        }
        writer.write("predictors.json", arr.dump(2) + "\n");
    }

    with_stage("evaluate", [&] {
        for (const auto& p : predictors) {
            result.losses_by_label[p->label()] = window_losses(*p, result.split.test);
        }
        return 0;
    });
    result.test_anchors.reserve(result.split.test.size());
    for (const WindowPair& pair : result.split.test.pairs) {
        result.test_anchors.push_back(pair.t);
    }

    result.report = with_stage("compare", [&] {
        return compare_report(result.losses_by_label.at(config.compare[0]),
                              result.losses_by_label.at(config.compare[1]), config.compare[0],
                              config.compare[1], result.test_anchors);
    });
    // The comparison covers the configured pair; the risk table covers every
    // evaluated predictor.
    for (const auto& [label, losses] : result.losses_by_label) {
        const MeanSe stats = mean_with_se(losses);
        result.report.mean_risk[label] = stats.mean;
        result.report.se_risk[label] = stats.se;
    }

    append_risk_report_files(writer, result.report, result.losses_by_label, result.test_anchors);
    result.manifest = finish_manifest(writer, config_hash, config.seed);
    return result;
}

Manifest emit_risk_report(const RiskReport& report,
                          const std::map<std::string, std::vector<double>>& losses_by_label,
                          std::span<const long> test_anchors, const fs::path& dir,
                          const std::string& config_hash, std::uint64_t seed) {
    ArtifactWriter writer(dir);
    append_risk_report_files(writer, report, losses_by_label, test_anchors);
    return finish_manifest(writer, config_hash, seed);
}

namespace {

std::string mse_curve_csv(const MseResult& mse) {
    std::ostringstream os;
    os << "n,mse,mse_se,bound,bound_se,rejected\n";
    for (const MsePoint& p : mse.points) {
        os << p.n << ',' << format_double(p.mse) << ',' << format_double(p.mse_se) << ','
           << format_double(p.bound) << ',' << format_double(p.bound_se) << ',' << p.rejected
           << "\n";
    }
    return os.str();
}

std::string vn_tail_csv(const std::vector<VnTailPoint>& points) {
    std::ostringstream os;
    os << "n,eta,threshold,freq,freq_se,bound,vacuous\n";
    for (const VnTailPoint& p : points) {
        os << p.n << ',' << format_double(p.eta) << ',' << format_double(p.threshold) << ','
           << format_double(p.freq) << ',' << format_double(p.freq_se) << ','
           << format_double(p.bound) << ',' << (p.vacuous ? 1 : 0) << "\n";
    }
    return os.str();
}

std::string ratio_tail_csv(const std::vector<RatioTailPoint>& points) {
    std::ostringstream os;
    os << "t,freq,freq_se,bound,bound_se,vacuous\n";
    for (const RatioTailPoint& p : points) {
        os << format_double(p.t) << ',' << format_double(p.freq) << ','
           << format_double(p.freq_se) << ',' << format_double(p.bound) << ','
           << format_double(p.bound_se) << ',' << (p.vacuous ? 1 : 0) << "\n";
    }
    return os.str();
}

std::string risks_csv(const RisksResult& risks) {
    std::ostringstream os;
    os << "n,nn_risk,nn_se,nn_design_term,lin_risk,lin_se,lin_excess,lin_excess_se,rejected\n";
    for (const RiskCurvePoint& p : risks.points) {
        os << p.n << ',' << format_double(p.nn_risk) << ',' << format_double(p.nn_se) << ','
           << format_double(p.nn_design_term) << ',' << format_double(p.lin_risk) << ','
           << format_double(p.lin_se) << ',' << format_double(p.lin_excess) << ','
           << format_double(p.lin_excess_se) << ',' << p.rejected << "\n";
    }
    return os.str();
}

std::string erm_csv(const ErmResult& erm) {
    std::ostringstream os;
    os << "n,mean_delta,mean_regret,select_true_freq,samplewise_violations\n";
    for (const ErmPoint& p : erm.points) {
        os << p.n << ',' << format_double(p.mean_delta) << ',' << format_double(p.mean_regret)
           << ',' << format_double(p.select_true_freq) << ',' << p.samplewise_violations << "\n";
    }
    return os.str();
}

} // namespace

Manifest emit_bound_report(const BoundReport& report, const fs::path& dir,
                           const std::string& config_hash) {
    ArtifactWriter writer(dir);
    writer.write("summary.json", bound_report_to_json(report).dump(2) + "\n");
    if (!report.mse.points.empty()) {
        writer.write("curves.csv", mse_curve_csv(report.mse));
    }
    if (!report.vn_tail.empty()) {
        writer.write("vn_tail.csv", vn_tail_csv(report.vn_tail));
    }
    if (!report.ratio_tail.empty()) {
        writer.write("ratio_tail.csv", ratio_tail_csv(report.ratio_tail));
    }
    if (!report.risks.points.empty()) {
        writer.write("risks.csv", risks_csv(report.risks));
    }
    if (!report.erm.points.empty()) {
        writer.write("erm.csv", erm_csv(report.erm));
    }
    return finish_manifest(writer, config_hash, report.seed);
}

void BoundsConfig::validate() const {
    design.validate();
    if (run_coeff_mse && mse_n_grid.empty()) {
        throw ConfigError("invalid config: coeff_mse enabled with empty n grid");
    }
    if (run_vn_tail && vn_points.empty()) {
        throw ConfigError("invalid config: vn_tail enabled with no points");
    }
    if (run_ratio_tail && ratio_t_grid.empty()) {
        throw ConfigError("invalid config: ratio_tail enabled with empty t grid");
    }
    if (run_prop_risks && risks_n_grid.empty()) {
        throw ConfigError("invalid config: prop_risks enabled with empty n grid");
    }
    if (run_erm && erm_n_grid.empty()) {
        throw ConfigError("invalid config: erm enabled with empty n grid");
    }
}

nlohmann::json BoundsConfig::to_json() const {
    nlohmann::json j;
    j["design"] = design_to_json(design);
    j["seed"] = seed;
    j["coeff_mse"] = {{"enabled", run_coeff_mse}, {"n_grid", mse_n_grid}, {"reps", mse_reps}};
    nlohmann::json vn = nlohmann::json::array();
    for (const auto& [n, eta] : vn_points) {
        vn.push_back({{"n", n}, {"eta", eta}});
    }
    j["vn_tail"] = {{"enabled", run_vn_tail}, {"points", std::move(vn)}, {"reps", vn_reps}};
    j["ratio_tail"] = {{"enabled", run_ratio_tail}, {"n", ratio_n}, {"t_grid", ratio_t_grid},
                       {"reps", ratio_reps}};
    j["prop_risks"] = {{"enabled", run_prop_risks}, {"n_grid", risks_n_grid},
                       {"test_windows", risks_test_windows}, {"reps", risks_reps}};
    j["erm"] = {{"enabled", run_erm}, {"class_size", erm_class_size}, {"n_grid", erm_n_grid},
                {"reps", erm_reps}};
    return j;
}

BoundsConfig BoundsConfig::from_json(const nlohmann::json& j) {
    BoundsConfig cfg;
    if (j.contains("design")) {
        cfg.design = design_from_json(j.at("design"));
    }
    cfg.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("coeff_mse")) {
        const nlohmann::json& s = j.at("coeff_mse");
        cfg.run_coeff_mse = s.value("enabled", true);
        if (s.contains("n_grid")) cfg.mse_n_grid = s.at("n_grid").get<std::vector<long>>();
        cfg.mse_reps = s.value("reps", cfg.mse_reps);
    }
    if (j.contains("vn_tail")) {
        const nlohmann::json& s = j.at("vn_tail");
        cfg.run_vn_tail = s.value("enabled", true);
        if (s.contains("points")) {
            cfg.vn_points.clear();
            for (const nlohmann::json& p : s.at("points")) {
                cfg.vn_points.emplace_back(p.at("n").get<long>(), p.at("eta").get<double>());
            }
        }
        cfg.vn_reps = s.value("reps", cfg.vn_reps);
    }
    if (j.contains("ratio_tail")) {
        const nlohmann::json& s = j.at("ratio_tail");
        cfg.run_ratio_tail = s.value("enabled", true);
        cfg.ratio_n = s.value("n", cfg.ratio_n);
        if (s.contains("t_grid")) cfg.ratio_t_grid = s.at("t_grid").get<std::vector<double>>();
        cfg.ratio_reps = s.value("reps", cfg.ratio_reps);
    }
    if (j.contains("prop_risks")) {
        const nlohmann::json& s = j.at("prop_risks");
        cfg.run_prop_risks = s.value("enabled", true);
        if (s.contains("n_grid")) cfg.risks_n_grid = s.at("n_grid").get<std::vector<long>>();
        cfg.risks_test_windows = s.value("test_windows", cfg.risks_test_windows);
        cfg.risks_reps = s.value("reps", cfg.risks_reps);
    }
    if (j.contains("erm")) {
        const nlohmann::json& s = j.at("erm");
        cfg.run_erm = s.value("enabled", true);
        cfg.erm_class_size = s.value("class_size", cfg.erm_class_size);
        if (s.contains("n_grid")) cfg.erm_n_grid = s.at("n_grid").get<std::vector<long>>();
        cfg.erm_reps = s.value("reps", cfg.erm_reps);
    }
    if (j.contains("out_dir")) {
        cfg.out_dir = j.at("out_dir").get<std::string>();
    }
    return cfg;
}

BoundsRunResult run_verify_bounds(const BoundsConfig& config) {
    config.validate();
    const std::string config_hash = fnv1a64_hex(config.to_json().dump());

    BoundsRunResult result;
    result.report.design = config.design;
    result.report.seed = config.seed;

    if (config.run_coeff_mse) {
        result.report.mse = with_stage("coeff_mse", [&] {
            return estimate_coeff_mse(config.design, config.mse_n_grid, config.mse_reps,
                                      config.seed);
        });
        result.report.mse_reps = config.mse_reps;
    }
    if (config.run_vn_tail) {
        with_stage("vn_tail", [&] {
            for (const auto& [n, eta] : config.vn_points) {
                result.report.vn_tail.push_back(
                    check_vn_tail(config.design, n, eta, config.vn_reps, config.seed));
            }
            return 0;
        });
        result.report.vn_reps = config.vn_reps;
    }
    if (config.run_ratio_tail) {
        result.report.ratio_tail = with_stage("ratio_tail", [&] {
            return check_ratio_tail(config.design, config.ratio_n, config.ratio_t_grid,
                                    config.ratio_reps, config.seed);
        });
        result.report.ratio_reps = config.ratio_reps;
        result.report.ratio_n = config.ratio_n;
    }
    if (config.run_prop_risks) {
        result.report.risks = with_stage("prop_risks", [&] {
            return check_prop_risks(config.design, config.risks_n_grid,
                                    config.risks_test_windows, config.risks_reps, config.seed);
        });
        result.report.risks_reps = config.risks_reps;
    }
    if (config.run_erm) {
        result.report.erm = with_stage("erm", [&] {
            return check_erm_consistency(config.design, config.erm_class_size, config.erm_n_grid,
                                         config.erm_reps, config.seed);
        });
        result.report.erm_reps = config.erm_reps;
    }

    result.out_dir = resolve_out_dir(config.out_dir);
    result.manifest = emit_bound_report(result.report, result.out_dir, config_hash);
    return result;
}

fs::path resolve_out_dir(const fs::path& configured) {
    if (!configured.empty()) {
        return configured;
    }
    if (const char* env = std::getenv(kOutDirEnvVar); env != nullptr && *env != '\0') {
        return env;
    }
    return "out";
}

} // namespace trajcast
