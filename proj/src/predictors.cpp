#include "trajcast/predictors.hpp"

#include "trajcast/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace trajcast {

Forecast flat_forecast(std::span<const double> window, int H) {
    if (window.empty()) {
        throw InvalidInputError("flat_forecast: empty window");
    }
    if (H < 1) {
        throw InvalidInputError("flat_forecast: H must be >= 1");
    }
    return Forecast(static_cast<std::size_t>(H), window.back());
}

Forecast zero_forecast(int H) {
    if (H < 1) {
        throw InvalidInputError("zero_forecast: H must be >= 1");
    }
    return Forecast(static_cast<std::size_t>(H), 0.0);
}

LinearOneParam fit_linear_one_param(const Dataset& train) {
    if (train.empty()) {
        throw InsufficientDataError("fit_linear_one_param: empty training set");
    }
    double num = 0.0;
    double energy = 0.0;
    for (const WindowPair& p : train.pairs) {
        const double x = p.input.back();
        double target_sum = 0.0;
        for (double y : p.target) {
            target_sum += y;
        }
        num += x * target_sum;
        energy += x * x;
    }
    if (energy == 0.0) {
        throw DegenerateDesignError("fit_linear_one_param: all window endpoints are zero (V_n = 0)");
    }
    LinearOneParam model;
    model.a = num / (static_cast<double>(train.H) * energy);
    model.H = train.H;
    model.L = train.L;
    return model;
}

Forecast linear_forecast(const LinearOneParam& model, std::span<const double> window) {
    if (window.empty()) {
        throw InvalidInputError("linear_forecast: empty window");
    }
    return Forecast(static_cast<std::size_t>(model.H), model.a * window.back());
}

NNIndex NNIndex::from_dataset(const Dataset& train) {
    if (train.empty()) {
        throw InsufficientDataError("NNIndex: empty training set");
    }
    NNIndex index;
    index.inputs.reserve(train.size());
    index.targets.reserve(train.size());
    for (const WindowPair& p : train.pairs) {
        index.inputs.push_back(p.input);
        index.targets.push_back(p.target);
    }
    return index;
}

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        d += diff * diff;
    }
    return d;
}

} // namespace

std::size_t nn_lookup(const NNIndex& index, std::span<const double> window) {
    if (index.inputs.empty()) {
        throw InvalidInputError("nn_lookup: empty index");
    }
    if (window.size() != index.inputs.front().size()) {
        throw InvalidInputError("nn_lookup: window dimension mismatch");
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < index.inputs.size(); ++i) {
        const double d = sq_dist(window, index.inputs[i]);
        if (d < best_d) { // strict: ties keep the earliest position
            best_d = d;
            best = i;
        }
    }
    return best;
}

Forecast nn_forecast(const NNIndex& index, std::span<const double> window) {
    return index.targets[nn_lookup(index, window)];
}

Forecast knn_forecast(const NNIndex& index, std::span<const double> window, int k) {
    if (k < 1 || static_cast<std::size_t>(k) > index.size()) {
        throw InvalidInputError("knn_forecast: k out of range");
    }
    if (window.size() != index.inputs.front().size()) {
        throw InvalidInputError("knn_forecast: window dimension mismatch");
    }
    std::vector<std::pair<double, std::size_t>> dist(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        dist[i] = {sq_dist(window, index.inputs[i]), i};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    const std::size_t H = index.targets.front().size();
    Forecast out(H, 0.0);
    for (int j = 0; j < k; ++j) {
        const auto& target = index.targets[dist[static_cast<std::size_t>(j)].second];
        for (std::size_t h = 0; h < H; ++h) {
            out[h] += target[h];
        }
    }
    for (double& v : out) {
        v /= static_cast<double>(k);
    }
    return out;
}

void OracleSpec::validate() const {
    model.validate();
    const bool structured = model.kind == ProcessKind::structured_seasonal;
    if (mode == OracleMode::structured_mean && !structured) {
        throw ConfigError("oracle: structured_mean mode requires a structured model");
    }
    if (mode == OracleMode::flat_martingale && structured) {
        throw ConfigError("oracle: flat_martingale mode requires a martingale model");
    }
}

Forecast oracle_forecast(const OracleSpec& spec, long t, std::span<const double> window, int H) {
    spec.validate();
    if (H < 1) {
        throw InvalidInputError("oracle_forecast: H must be >= 1");
    }
    if (spec.mode == OracleMode::flat_martingale) {
        return flat_forecast(window, H);
    }
    Forecast out(static_cast<std::size_t>(H));
    for (int h = 1; h <= H; ++h) {
        out[static_cast<std::size_t>(h - 1)] = structured_level(spec.model, t + h);
    }
    return out;
}

FlatPredictor::FlatPredictor(int H) : H_(H) {
    if (H < 1) {
        throw InvalidInputError("FlatPredictor: H must be >= 1");
    }
}

Forecast FlatPredictor::predict(const WindowPair& pair) const {
    return flat_forecast(pair.input, H_);
}

nlohmann::json FlatPredictor::to_json() const {
    return {{"kind", "flat"}, {"H", H_}};
}

ZeroPredictor::ZeroPredictor(int H) : H_(H) {
    if (H < 1) {
        throw InvalidInputError("ZeroPredictor: H must be >= 1");
    }
}

Forecast ZeroPredictor::predict(const WindowPair&) const {
    return zero_forecast(H_);
}

nlohmann::json ZeroPredictor::to_json() const {
    return {{"kind", "zero"}, {"H", H_}};
}

LinearPredictor::LinearPredictor(LinearOneParam model) : model_(model) {
    if (!std::isfinite(model_.a)) {
        throw InvalidInputError("LinearPredictor: coefficient must be finite");
    }
}

Forecast LinearPredictor::predict(const WindowPair& pair) const {
    return linear_forecast(model_, pair.input);
}

nlohmann::json LinearPredictor::to_json() const {
    return linear_to_json(model_);
}

NNPredictor::NNPredictor(NNIndex index, int k, std::string dataset_ref)
    : index_(std::move(index)), k_(k), dataset_ref_(std::move(dataset_ref)) {
    if (k_ < 1 || static_cast<std::size_t>(k_) > index_.size()) {
        throw InvalidInputError("NNPredictor: k out of range");
    }
    label_ = k_ == 1 ? "nn" : "knn" + std::to_string(k_);
}

Forecast NNPredictor::predict(const WindowPair& pair) const {
    if (k_ == 1) {
        return nn_forecast(index_, pair.input);
    }
    return knn_forecast(index_, pair.input, k_);
}

nlohmann::json NNPredictor::to_json() const {
    nlohmann::json j{{"kind", "nn"},
                     {"k", k_},
                     {"L", index_.inputs.front().size()},
                     {"H", index_.targets.front().size()},
                     {"n", index_.size()}};
    if (!dataset_ref_.empty()) {
        j["dataset"] = dataset_ref_;
    }
    return j;
}

OraclePredictor::OraclePredictor(OracleSpec spec, int H) : spec_(std::move(spec)), H_(H) {
    spec_.validate();
    if (H_ < 1) {
        throw InvalidInputError("OraclePredictor: H must be >= 1");
    }
}

Forecast OraclePredictor::predict(const WindowPair& pair) const {
    return oracle_forecast(spec_, pair.t, pair.input, H_);
}

nlohmann::json OraclePredictor::to_json() const {
    return {{"kind", "oracle"},
            {"mode", spec_.mode == OracleMode::flat_martingale ? "flat_martingale" : "structured_mean"},
            {"H", H_}};
}

nlohmann::json linear_to_json(const LinearOneParam& model) {
    return {{"kind", "linear_one_param"}, {"a", model.a}, {"H", model.H}, {"L", model.L}};
}

LinearOneParam linear_from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "linear_one_param") {
        throw ConfigError("linear_from_json: wrong kind");
    }
    LinearOneParam model;
    model.a = j.at("a").get<double>();
    model.H = j.at("H").get<int>();
    model.L = j.value("L", 0);
    return model;
}

} // namespace trajcast
