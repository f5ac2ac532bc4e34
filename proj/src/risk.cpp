#include "trajcast/risk.hpp"

#include "trajcast/errors.hpp"

#include <algorithm>
#include <cmath>

namespace trajcast {

double traj_loss(std::span<const double> target, std::span<const double> forecast) {
    if (target.size() != forecast.size()) {
        throw InvalidInputError("traj_loss: target and forecast lengths differ");
    }
    double loss = 0.0;
    for (std::size_t h = 0; h < target.size(); ++h) {
        const double d = target[h] - forecast[h];
        loss += d * d;
    }
    return loss;
}

std::vector<double> window_losses(const Predictor& predictor, const Dataset& dataset) {
    if (dataset.empty()) {
        throw InsufficientDataError("window_losses: empty dataset");
    }
    std::vector<double> losses;
    losses.reserve(dataset.size());
    for (const WindowPair& pair : dataset.pairs) {
        losses.push_back(traj_loss(pair.target, predictor.predict(pair)));
    }
    return losses;
}

double empirical_risk(const Predictor& predictor, const Dataset& dataset) {
    const auto losses = window_losses(predictor, dataset);
    double sum = 0.0;
    for (double l : losses) {
        sum += l;
    }
    return sum / static_cast<double>(losses.size());
}

MeanSe mean_with_se(std::span<const double> xs) {
    if (xs.empty()) {
        throw InsufficientDataError("mean_with_se: empty sample");
    }
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    const double mean = sum / static_cast<double>(xs.size());
    if (xs.size() == 1) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (double x : xs) {
        const double d = x - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    return {mean, sd / std::sqrt(static_cast<double>(xs.size()))};
}

std::vector<EcdfPoint> ecdf(std::span<const double> losses) {
    if (losses.empty()) {
        throw InsufficientDataError("ecdf: empty input");
    }
    for (double l : losses) {
        if (!std::isfinite(l)) {
            throw InvalidInputError("ecdf: losses must be finite");
        }
    }
    std::vector<double> sorted(losses.begin(), losses.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<EcdfPoint> points;
    const auto n = static_cast<double>(sorted.size());
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) {
            ++j;
        }
        points.push_back({sorted[i], static_cast<double>(j + 1) / n});
        i = j + 1;
    }
    return points;
}

RiskReport compare_report(std::span<const double> losses_a, std::span<const double> losses_b,
                          const std::string& label_a, const std::string& label_b,
                          std::span<const long> anchors) {
    if (losses_a.size() != losses_b.size()) {
        throw InvalidInputError("compare_report: loss sequences have different lengths");
    }
    if (losses_a.empty()) {
        throw InsufficientDataError("compare_report: empty loss sequences");
    }
    if (!anchors.empty() && anchors.size() != losses_a.size()) {
        throw InvalidInputError("compare_report: anchors length mismatch");
    }

    RiskReport report;
    report.label_a = label_a;
    report.label_b = label_b;
    report.n = losses_a.size();

    const MeanSe a = mean_with_se(losses_a);
    const MeanSe b = mean_with_se(losses_b);
    report.mean_risk[label_a] = a.mean;
    report.mean_risk[label_b] = b.mean;
    report.se_risk[label_a] = a.se;
    report.se_risk[label_b] = b.se;
    report.ecdf_by_label[label_a] = ecdf(losses_a);
    report.ecdf_by_label[label_b] = ecdf(losses_b);

    std::size_t wins = 0;
    for (std::size_t i = 0; i < losses_a.size(); ++i) {
        if (losses_a[i] > losses_b[i]) {
            ++wins;
        }
        if (losses_a[i] == 0.0 || losses_b[i] == 0.0) {
            ++report.zero_loss_excluded;
            continue;
        }
        report.log10_ratios.push_back(std::log10(losses_a[i] / losses_b[i]));
        report.ratio_anchors.push_back(anchors.empty() ? static_cast<long>(i) : anchors[i]);
    }
    report.win_rate_a_over_b = static_cast<double>(wins) / static_cast<double>(report.n);
    report.risk_ratio_a_over_b = a.mean / b.mean;
    return report;
}

nlohmann::json risk_report_to_json(const RiskReport& report) {
    nlohmann::json j;
    j["kind"] = "risk_report";
    j["labels"] = {{"a", report.label_a}, {"b", report.label_b}};
    j["n"] = report.n;
    j["mean_risk"] = report.mean_risk;
    j["se_risk"] = report.se_risk;
    j["win_rate_a_over_b"] = report.win_rate_a_over_b;
    j["risk_ratio_a_over_b"] = report.risk_ratio_a_over_b;
    j["log10_ratio_zero_excluded"] = report.zero_loss_excluded;
    j["log10_ratios"] = report.log10_ratios;
    nlohmann::json ecdfs = nlohmann::json::object();
    for (const auto& [label, points] : report.ecdf_by_label) {
        nlohmann::json arr = nlohmann::json::array();
        for (const EcdfPoint& p : points) {
            arr.push_back({p.value, p.fraction});
        }
        ecdfs[label] = std::move(arr);
    }
    j["ecdf"] = std::move(ecdfs);
    return j;
}

} // namespace trajcast
