#pragma once

#include "trajcast/predictors.hpp"
#include "trajcast/windows.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace trajcast {

// Trajectory-level squared loss: sum over the horizon of squared coordinate
// differences.
double traj_loss(std::span<const double> target, std::span<const double> forecast);

// Per-window losses in dataset order (deterministic reduction order).
std::vector<double> window_losses(const Predictor& predictor, const Dataset& dataset);

double empirical_risk(const Predictor& predictor, const Dataset& dataset);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0; // sample standard deviation / sqrt(N)
};

MeanSe mean_with_se(std::span<const double> xs);

struct EcdfPoint {
    double value = 0.0;
    double fraction = 0.0;
};

// Right-continuous ECDF with one point per distinct loss value; ends at 1.
std::vector<EcdfPoint> ecdf(std::span<const double> losses);

// Pairwise comparison of two loss sequences over the same windows.
// Windows where either loss is exactly zero are excluded from the log-ratios
// (log of zero is undefined) but still count toward win rate and risk ratio.
struct RiskReport {
    std::string label_a;
    std::string label_b;
    std::map<std::string, double> mean_risk;
    std::map<std::string, double> se_risk;
    std::map<std::string, std::vector<EcdfPoint>> ecdf_by_label;
    std::vector<long> ratio_anchors;
    std::vector<double> log10_ratios;
    std::size_t zero_loss_excluded = 0;
    double win_rate_a_over_b = 0.0;   // strict inequality loss_a > loss_b
    double risk_ratio_a_over_b = 0.0; // mean_a / mean_b
    std::size_t n = 0;
};

RiskReport compare_report(std::span<const double> losses_a, std::span<const double> losses_b,
                          const std::string& label_a, const std::string& label_b,
                          std::span<const long> anchors = {});

nlohmann::json risk_report_to_json(const RiskReport& report);

} // namespace trajcast
