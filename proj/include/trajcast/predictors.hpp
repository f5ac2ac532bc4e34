#pragma once

#include "trajcast/sim.hpp"
#include "trajcast/windows.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace trajcast {

using Forecast = std::vector<double>;

// Repeats the last coordinate of the window H times.
Forecast flat_forecast(std::span<const double> window, int H);

Forecast zero_forecast(int H);

// One-parameter family f_a(u) = a * x(u) * (1, ..., 1), with x(u) the last
// coordinate of the window.
struct LinearOneParam {
    double a = 0.0;
    int H = 0;
    int L = 0;
};

// Closed-form least squares: a = sum_i x_i <Y_i, 1> / (H * sum_i x_i^2).
// Throws DegenerateDesignError when sum_i x_i^2 == 0.
LinearOneParam fit_linear_one_param(const Dataset& train);

Forecast linear_forecast(const LinearOneParam& model, std::span<const double> window);

// Training pairs held for exact nearest-neighbor lookup.
struct NNIndex {
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> targets;

    static NNIndex from_dataset(const Dataset& train);
    std::size_t size() const { return inputs.size(); }
};

// Exact 1-NN under Euclidean distance, linear scan. Distance ties resolve to
// the smallest training position.
Forecast nn_forecast(const NNIndex& index, std::span<const double> window);

// k-NN generalization: coordinatewise average of the k nearest targets,
// neighbors ordered by (distance, position).
Forecast knn_forecast(const NNIndex& index, std::span<const double> window, int k);

std::size_t nn_lookup(const NNIndex& index, std::span<const double> window);

enum class OracleMode {
    flat_martingale,
    structured_mean,
};

// Analytic conditional-mean forecaster for simulated processes.
struct OracleSpec {
    ProcessModel model;
    OracleMode mode = OracleMode::flat_martingale;

    void validate() const;
};

// flat_martingale: repeat the window's last value. structured_mean: the
// deterministic level at times t+1 .. t+H.
Forecast oracle_forecast(const OracleSpec& spec, long t, std::span<const double> window, int H);

// Uniform evaluation interface used by the risk module and the harness.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual Forecast predict(const WindowPair& pair) const = 0;
    virtual const std::string& label() const = 0;
    virtual nlohmann::json to_json() const = 0;
};

class FlatPredictor final : public Predictor {
public:
    explicit FlatPredictor(int H);
    Forecast predict(const WindowPair& pair) const override;
    const std::string& label() const override { return label_; }
    nlohmann::json to_json() const override;

private:
    int H_;
    std::string label_ = "flat";
};

class ZeroPredictor final : public Predictor {
public:
    explicit ZeroPredictor(int H);
    Forecast predict(const WindowPair& pair) const override;
    const std::string& label() const override { return label_; }
    nlohmann::json to_json() const override;

private:
    int H_;
    std::string label_ = "zero";
};

class LinearPredictor final : public Predictor {
public:
    explicit LinearPredictor(LinearOneParam model);
    Forecast predict(const WindowPair& pair) const override;
    const std::string& label() const override { return label_; }
    nlohmann::json to_json() const override;
    const LinearOneParam& model() const { return model_; }

private:
    LinearOneParam model_;
    std::string label_ = "linear";
};

class NNPredictor final : public Predictor {
public:
    // k = 1 gives the canonical interpolating predictor.
    NNPredictor(NNIndex index, int k = 1, std::string dataset_ref = {});
    Forecast predict(const WindowPair& pair) const override;
    const std::string& label() const override { return label_; }
    nlohmann::json to_json() const override;
    const NNIndex& index() const { return index_; }

private:
    NNIndex index_;
    int k_;
    std::string dataset_ref_;
    std::string label_;
};

class OraclePredictor final : public Predictor {
public:
    OraclePredictor(OracleSpec spec, int H);
    Forecast predict(const WindowPair& pair) const override;
    const std::string& label() const override { return label_; }
    nlohmann::json to_json() const override;

private:
    OracleSpec spec_;
    int H_;
    std::string label_ = "oracle";
};

nlohmann::json linear_to_json(const LinearOneParam& model);
LinearOneParam linear_from_json(const nlohmann::json& j);

} // namespace trajcast
