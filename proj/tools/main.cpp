// trajcast command-line front end: simulate / ingest / run / verify-bounds / report.

#include "trajcast/errors.hpp"
#include "trajcast/harness.hpp"
#include "trajcast/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using namespace trajcast;

ProcessModel model_from_flags(const std::string& kind, double x0, double sigma, double omega,
                              double alpha, double beta, double v_max, double amplitude,
                              long period, double trend) {
    ProcessModel model;
    model.kind = process_kind_from_string(kind);
    model.x0 = x0;
    model.sigma = sigma;
    model.v_max = v_max;
    if (model.kind == ProcessKind::heteroskedastic_martingale) {
        model.vol = VolParams{omega, alpha, beta};
    }
    if (model.kind == ProcessKind::structured_seasonal) {
        model.structure = StructureParams{amplitude, period, trend};
    }
    return model;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const std::size_t comma = csv.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(csv.substr(start));
            break;
        }
        out.push_back(csv.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

void print_risk_summary(const nlohmann::json& j) {
    std::cout << "risk report over " << j.at("n").get<long>() << " test windows\n";
    for (const auto& [label, risk] : j.at("mean_risk").items()) {
        std::cout << "  mean risk " << label << " = " << risk.get<double>()
                  << " (se " << j.at("se_risk").at(label).get<double>() << ")\n";
    }
    const auto& labels = j.at("labels");
    std::cout << "  risk ratio " << labels.at("a").get<std::string>() << "/"
              << labels.at("b").get<std::string>() << " = "
              << j.at("risk_ratio_a_over_b").get<double>() << "\n";
    std::cout << "  win rate  " << labels.at("a").get<std::string>() << ">"
              << labels.at("b").get<std::string>() << " = "
              << j.at("win_rate_a_over_b").get<double>() << "\n";
}

void print_bound_summary(const nlohmann::json& j) {
    std::cout << "bound report (sigma_coord=" << j.at("sigma_coord").get<double>()
              << ", sigma_xi=" << j.at("sigma_xi").get<double>() << ")\n";
    if (j.contains("coeff_mse")) {
        std::cout << "  coeff_mse: loglog slope = "
                  << j.at("coeff_mse").at("loglog_slope").get<double>() << "\n";
        for (const auto& p : j.at("coeff_mse").at("points")) {
            std::cout << "    n=" << p.at("n").get<long>() << " mse=" << p.at("mse").get<double>()
                      << " bound=" << p.at("bound").get<double>() << "\n";
        }
    }
    if (j.contains("vn_tail")) {
        for (const auto& p : j.at("vn_tail").at("points")) {
            std::cout << "  vn_tail n=" << p.at("n").get<long>() << " eta="
                      << p.at("eta").get<double>() << " freq=" << p.at("freq").get<double>()
                      << " bound=" << p.at("bound").get<double>() << "\n";
        }
    }
    if (j.contains("ratio_tail")) {
        for (const auto& p : j.at("ratio_tail").at("points")) {
            std::cout << "  ratio_tail t=" << p.at("t").get<double>() << " freq="
                      << p.at("freq").get<double>() << " bound=" << p.at("bound").get<double>()
                      << (p.at("vacuous").get<bool>() ? " (vacuous)" : "") << "\n";
        }
    }
    if (j.contains("prop_risks")) {
        std::cout << "  prop_risks: excess loglog slope = "
                  << j.at("prop_risks").at("excess_loglog_slope").get<double>() << "\n";
        for (const auto& p : j.at("prop_risks").at("points")) {
            std::cout << "    n=" << p.at("n").get<long>() << " nn=" << p.at("nn_risk").get<double>()
                      << " lin=" << p.at("lin_risk").get<double>()
                      << " excess=" << p.at("lin_excess").get<double>() << "\n";
        }
    }
    if (j.contains("erm")) {
        for (const auto& p : j.at("erm").at("points")) {
            std::cout << "  erm n=" << p.at("n").get<long>() << " delta="
                      << p.at("mean_delta").get<double>() << " regret="
                      << p.at("mean_regret").get<double>() << " select_true="
                      << p.at("select_true_freq").get<double>() << "\n";
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"trajectory forecasting experiments and bound verification"};
    app.require_subcommand(1);

    // --- simulate ---
    auto* sim_cmd = app.add_subcommand("simulate", "simulate a process path and write it as CSV");
    std::string sim_kind = "gaussian_random_walk";
    double sim_x0 = 1.0;
    double sim_sigma = 0.1;
    double sim_omega = 0.0;
    double sim_alpha = 0.0;
    double sim_beta = 0.0;
    double sim_vmax = -1.0;
    double sim_amplitude = 0.0;
    long sim_period = 1;
    double sim_trend = 0.0;
    long sim_T = 1000;
    std::uint64_t sim_seed = 1;
    bool sim_returns = false;
    std::string sim_out = "path.csv";
    sim_cmd->add_option("--kind", sim_kind,
                        "gaussian_random_walk | heteroskedastic_martingale | structured_seasonal");
    sim_cmd->add_option("--x0", sim_x0, "initial level");
    sim_cmd->add_option("--sigma", sim_sigma, "innovation scale");
    sim_cmd->add_option("--omega", sim_omega, "GARCH omega");
    sim_cmd->add_option("--alpha", sim_alpha, "GARCH alpha");
    sim_cmd->add_option("--beta", sim_beta, "GARCH beta");
    sim_cmd->add_option("--v-max", sim_vmax, "conditional variance cap (default 25*sigma^2)");
    sim_cmd->add_option("--amplitude", sim_amplitude, "seasonal amplitude");
    sim_cmd->add_option("--period", sim_period, "seasonal period");
    sim_cmd->add_option("--trend", sim_trend, "per-step trend");
    sim_cmd->add_option("--T", sim_T, "path length");
    sim_cmd->add_option("--seed", sim_seed, "random seed");
    sim_cmd->add_flag("--returns", sim_returns, "emit first differences instead of levels");
    sim_cmd->add_option("--out", sim_out, "output CSV file");

    // --- ingest ---
    auto* ingest_cmd = app.add_subcommand("ingest", "validate and sessionize a tick CSV");
    std::string ing_data;
    std::string ing_ts_col = "timestamp";
    std::string ing_px_col = "price";
    std::string ing_start = "13:00";
    std::string ing_end = "18:00";
    long ing_interval = 30;
    double ing_cov = 0.95;
    std::string ing_out = "sessions.csv";
    ingest_cmd->add_option("--data", ing_data, "tick CSV path")->required();
    ingest_cmd->add_option("--timestamp-col", ing_ts_col, "timestamp column name");
    ingest_cmd->add_option("--price-col", ing_px_col, "price column name");
    ingest_cmd->add_option("--session-start", ing_start, "session start (HH:MM or seconds)");
    ingest_cmd->add_option("--session-end", ing_end, "session end");
    ingest_cmd->add_option("--interval", ing_interval, "grid interval in seconds");
    ingest_cmd->add_option("--min-coverage", ing_cov, "coverage threshold for keeping a day");
    ingest_cmd->add_option("--out", ing_out, "output CSV file");

    // --- run ---
    auto* run_cmd = app.add_subcommand("run", "run a full forecasting experiment");
    std::string run_config;
    std::string run_mode;
    std::string run_kind;
    double run_x0 = 0.0;
    double run_sigma = 0.0;
    long run_T = 0;
    int run_L = 0;
    int run_H = 0;
    int run_stride = -1;
    std::uint64_t run_seed = 0;
    std::string run_predictors;
    std::string run_compare;
    std::string run_fractions;
    bool run_returns = false;
    std::string run_data;
    std::string run_out_dir;
    run_cmd->add_option("--config", run_config, "JSON config file");
    run_cmd->add_option("--mode", run_mode, "synthetic | ingest");
    run_cmd->add_option("--kind", run_kind, "process kind (synthetic mode)");
    run_cmd->add_option("--x0", run_x0, "initial level");
    run_cmd->add_option("--sigma", run_sigma, "innovation scale");
    run_cmd->add_option("--T", run_T, "path length");
    run_cmd->add_option("--L", run_L, "lookback length");
    run_cmd->add_option("--H", run_H, "forecast horizon");
    run_cmd->add_option("--stride", run_stride, "window stride (0 = H)");
    run_cmd->add_option("--seed", run_seed, "random seed");
    run_cmd->add_option("--predictors", run_predictors, "comma list: flat,zero,linear,nn,knn,oracle");
    run_cmd->add_option("--compare", run_compare, "two labels, e.g. nn,flat");
    run_cmd->add_option("--fractions", run_fractions, "train,val,test e.g. 0.7,0.1,0.2");
    run_cmd->add_flag("--returns", run_returns, "work on first differences");
    run_cmd->add_option("--data", run_data, "tick CSV (ingest mode)");
    run_cmd->add_option("--out-dir", run_out_dir, "output directory");

    // --- verify-bounds ---
    auto* vb_cmd = app.add_subcommand("verify-bounds", "Monte-Carlo verification of the bound suite");
    std::string vb_config;
    std::string vb_out_dir;
    std::uint64_t vb_seed = 0;
    vb_cmd->add_option("--config", vb_config, "JSON config file");
    vb_cmd->add_option("--out-dir", vb_out_dir, "output directory");
    vb_cmd->add_option("--seed", vb_seed, "random seed");

    // --- report ---
    auto* rep_cmd = app.add_subcommand("report", "pretty-print an emitted summary.json");
    std::string rep_summary;
    rep_cmd->add_option("--summary", rep_summary, "path to summary.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (sim_cmd->parsed()) {
            const ProcessModel model =
                model_from_flags(sim_kind, sim_x0, sim_sigma, sim_omega, sim_alpha, sim_beta,
                                 sim_vmax, sim_amplitude, sim_period, sim_trend);
            Path path = simulate_path(model, sim_T, sim_seed);
            if (sim_returns) {
                path = path_to_returns(path);
            }
            save_path_csv(path, sim_out);
            std::cout << "wrote " << sim_out << " (" << path.size() << " values)\n";
        } else if (ingest_cmd->parsed()) {
            TickSchema schema{ing_ts_col, ing_px_col};
            const TickSeries ticks = ingest_ticks(ing_data, schema);
            const SessionizeResult sr = sessionize(ticks, parse_time_of_day(ing_start),
                                                   parse_time_of_day(ing_end), ing_interval,
                                                   ing_cov);
            std::ostringstream os;
            os << "session,day,t,value\n";
            for (std::size_t s = 0; s < sr.sessions.size(); ++s) {
                for (std::size_t k = 0; k < sr.sessions[s].values.size(); ++k) {
                    os << s << ',' << sr.sessions[s].day << ',' << k << ','
                       << format_double(sr.sessions[s].values[k]) << "\n";
                }
            }
            write_file(ing_out, os.str());
            std::cout << "wrote " << ing_out << ": " << sr.sessions.size() << " sessions of "
                      << sr.grid_points << " points";
            if (!sr.dropped.empty()) {
                std::cout << "; dropped " << sr.dropped.size() << " day(s):";
                for (const DroppedDay& d : sr.dropped) {
                    std::cout << " day=" << d.day << " coverage=" << d.coverage;
                }
            }
            std::cout << "\n";
        } else if (run_cmd->parsed()) {
            ExperimentConfig cfg;
            if (!run_config.empty()) {
                cfg = ExperimentConfig::from_json(nlohmann::json::parse(read_file(run_config)));
            }
            // Flags win over file values.
            if (run_cmd->count("--mode")) {
                if (run_mode == "synthetic") cfg.mode = ExperimentMode::synthetic;
                else if (run_mode == "ingest") cfg.mode = ExperimentMode::ingest;
                else throw ConfigError("invalid config: unknown mode '" + run_mode + "'");
            }
            if (run_cmd->count("--kind")) {
                cfg.process.kind = process_kind_from_string(run_kind);
            }
            if (run_cmd->count("--x0")) cfg.process.x0 = run_x0;
            if (run_cmd->count("--sigma")) cfg.process.sigma = run_sigma;
            if (run_cmd->count("--T")) cfg.T = run_T;
            if (run_cmd->count("--L")) cfg.L = run_L;
            if (run_cmd->count("--H")) cfg.H = run_H;
            if (run_cmd->count("--stride")) cfg.stride = run_stride;
            if (run_cmd->count("--seed")) cfg.seed = run_seed;
            if (run_cmd->count("--predictors")) cfg.predictors = split_list(run_predictors);
            if (run_cmd->count("--compare")) {
                const auto pair = split_list(run_compare);
                if (pair.size() != 2) {
                    throw ConfigError("invalid config: --compare needs exactly two labels");
                }
                cfg.compare = {pair[0], pair[1]};
            }
            if (run_cmd->count("--fractions")) {
                const auto f = split_list(run_fractions);
                if (f.size() != 3) {
                    throw ConfigError("invalid config: --fractions needs three values");
                }
                cfg.fractions = {parse_double(f[0]), parse_double(f[1]), parse_double(f[2])};
            }
            if (run_cmd->count("--returns")) cfg.returns_view = run_returns;
            if (run_cmd->count("--data")) {
                if (!cfg.ingest) cfg.ingest = IngestSettings{};
                cfg.ingest->data_path = run_data;
            }
            if (run_cmd->count("--out-dir")) cfg.out_dir = run_out_dir;

            const RunResult result = run_experiment(cfg);
            std::cout << "artifacts in " << result.out_dir.string() << "\n";
            print_risk_summary(risk_report_to_json(result.report));
        } else if (vb_cmd->parsed()) {
            BoundsConfig cfg;
            if (!vb_config.empty()) {
                cfg = BoundsConfig::from_json(nlohmann::json::parse(read_file(vb_config)));
            }
            if (vb_cmd->count("--seed")) cfg.seed = vb_seed;
            if (vb_cmd->count("--out-dir")) cfg.out_dir = vb_out_dir;
            const BoundsRunResult result = run_verify_bounds(cfg);
            std::cout << "artifacts in " << result.out_dir.string() << "\n";
            print_bound_summary(bound_report_to_json(result.report));
        } else if (rep_cmd->parsed()) {
            const nlohmann::json j = nlohmann::json::parse(read_file(rep_summary));
            const std::string kind = j.value("kind", "");
            if (kind == "risk_report") {
                print_risk_summary(j);
            } else if (kind == "bound_report") {
                print_bound_summary(j);
            } else {
                throw IngestError("unrecognized summary kind: '" + kind + "'");
            }
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const InvalidInputError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const InsufficientDataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const DegenerateDesignError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const IngestError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
