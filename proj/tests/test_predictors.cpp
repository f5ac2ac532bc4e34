#include "trajcast/predictors.hpp"

#include "trajcast/errors.hpp"
#include "trajcast/risk.hpp"
#include "trajcast/rng.hpp"
#include "trajcast/sim.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace trajcast;

namespace {

Dataset dataset_of(std::vector<WindowPair> pairs, int L, int H) {
    Dataset ds;
    ds.pairs = std::move(pairs);
    ds.L = L;
    ds.H = H;
    return ds;
}

// Test-side nearest neighbor, written independently of the library scan.
std::size_t naive_nn(const std::vector<std::vector<double>>& inputs,
                     std::span<const double> query) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        double d = 0.0;
        for (std::size_t j = 0; j < query.size(); ++j) {
            d += (query[j] - inputs[i][j]) * (query[j] - inputs[i][j]);
        }
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

} // namespace

TEST_CASE("flat forecast repeats the last coordinate") {
    CHECK(flat_forecast(std::vector<double>{1, 2, 3}, 2) == Forecast{3, 3});
    CHECK(flat_forecast(std::vector<double>{5}, 4) == Forecast{5, 5, 5, 5});
    CHECK_THROWS_AS(flat_forecast(std::vector<double>{}, 2), InvalidInputError);
}

TEST_CASE("zero forecast") {
    CHECK(zero_forecast(3) == Forecast{0, 0, 0});
    CHECK_THROWS_AS(zero_forecast(0), InvalidInputError);
}

TEST_CASE("least-squares coefficient on a single hand-checked pair") {
    // x = 2, Y = (3, 5): a = 2*(3+5) / (2*2^2) = 2
    const Dataset ds = dataset_of({{0, {2.0}, {3.0, 5.0}}}, 1, 2);
    const LinearOneParam fit = fit_linear_one_param(ds);
    CHECK(fit.a == 2.0);
    CHECK(fit.H == 2);
}

TEST_CASE("noiseless targets recover a = 1") {
    RngStream rng(3, 0);
    std::vector<WindowPair> pairs;
    for (long i = 0; i < 200; ++i) {
        const double x = rng.uniform(0.5, 1.5);
        pairs.push_back({i, {rng.normal(), x}, {x, x, x}});
    }
    const LinearOneParam fit = fit_linear_one_param(dataset_of(std::move(pairs), 2, 3));
    CHECK(fit.a == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("degenerate design is an error") {
    const Dataset ds = dataset_of({{0, {1.0, 0.0}, {1.0}}, {1, {2.0, 0.0}, {2.0}}}, 2, 1);
    CHECK_THROWS_AS(fit_linear_one_param(ds), DegenerateDesignError);
    Dataset empty;
    empty.L = 1;
    empty.H = 1;
    CHECK_THROWS_AS(fit_linear_one_param(empty), InsufficientDataError);
}

TEST_CASE("coefficient is invariant under rescaling the sample") {
    RngStream rng(8, 0);
    std::vector<WindowPair> pairs;
    std::vector<WindowPair> scaled;
    const double lambda = -3.7;
    for (long i = 0; i < 150; ++i) {
        WindowPair p{i, {rng.uniform(0.5, 1.5)}, {}};
        for (int h = 0; h < 4; ++h) {
            p.target.push_back(p.input[0] + rng.normal(0.0, 0.2));
        }
        WindowPair q = p;
        q.input[0] *= lambda;
        for (double& y : q.target) {
            y *= lambda;
        }
        pairs.push_back(std::move(p));
        scaled.push_back(std::move(q));
    }
    const double a0 = fit_linear_one_param(dataset_of(std::move(pairs), 1, 4)).a;
    const double a1 = fit_linear_one_param(dataset_of(std::move(scaled), 1, 4)).a;
    CHECK(a1 == doctest::Approx(a0).epsilon(1e-12));
}

TEST_CASE("linear forecast evaluation") {
    LinearOneParam unit{1.0, 3, 0};
    const std::vector<double> window{2.0, 4.0};
    CHECK(linear_forecast(unit, window) == flat_forecast(window, 3));
    LinearOneParam zero{0.0, 2, 0};
    CHECK(linear_forecast(zero, window) == Forecast{0, 0});
    LinearOneParam two{2.0, 2, 0};
    CHECK(linear_forecast(two, std::vector<double>{0.0, 1.5}) == Forecast{3, 3});
    CHECK_THROWS_AS(linear_forecast(unit, std::vector<double>{}), InvalidInputError);
}

TEST_CASE("nearest neighbor interpolates the training set") {
    RngStream rng(12, 0);
    std::vector<WindowPair> pairs;
    for (long i = 0; i < 64; ++i) {
        WindowPair p{i, {}, {}};
        for (int j = 0; j < 5; ++j) p.input.push_back(rng.normal());
        for (int h = 0; h < 3; ++h) p.target.push_back(rng.normal());
        pairs.push_back(std::move(p));
    }
    const NNIndex index = NNIndex::from_dataset(dataset_of(std::move(pairs), 5, 3));
    for (std::size_t i = 0; i < index.size(); ++i) {
        CHECK(nn_forecast(index, index.inputs[i]) == index.targets[i]);
    }
}

TEST_CASE("nearest neighbor picks the closer input") {
    NNIndex index;
    index.inputs = {{0.0, 0.0}, {2.0, 2.0}};
    index.targets = {{1.0}, {9.0}};
    CHECK(nn_forecast(index, std::vector<double>{0.4, 0.4}) == Forecast{1.0});
}

TEST_CASE("distance ties keep the earliest training position") {
    NNIndex index;
    index.inputs = {{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}};
    index.targets = {{7.0}, {8.0}, {9.0}};
    CHECK(nn_forecast(index, std::vector<double>{1.0, 1.0}) == Forecast{7.0});
}

TEST_CASE("nn rejects dimension mismatches") {
    NNIndex index;
    index.inputs = {{1.0, 2.0}};
    index.targets = {{0.0}};
    CHECK_THROWS_AS(nn_forecast(index, std::vector<double>{1.0}), InvalidInputError);
    NNIndex empty;
    CHECK_THROWS_AS(nn_forecast(empty, std::vector<double>{1.0}), InvalidInputError);
}

TEST_CASE("nn matches an independent linear scan on random queries") {
    RngStream rng(41, 0);
    NNIndex index;
    for (int i = 0; i < 128; ++i) {
        std::vector<double> in(6);
        for (double& v : in) v = rng.normal();
        index.inputs.push_back(std::move(in));
        index.targets.push_back({rng.normal()});
    }
    for (int q = 0; q < 2000; ++q) {
        std::vector<double> query(6);
        for (double& v : query) v = rng.normal();
        CHECK(nn_lookup(index, query) == naive_nn(index.inputs, query));
    }
}

TEST_CASE("knn averages the k nearest targets") {
    NNIndex index;
    index.inputs = {{0.0}, {1.0}, {10.0}};
    index.targets = {{0.0, 2.0}, {4.0, 6.0}, {100.0, 100.0}};
    CHECK(knn_forecast(index, std::vector<double>{0.4}, 2) == Forecast{2.0, 4.0});
    CHECK(knn_forecast(index, std::vector<double>{0.4}, 1) ==
          nn_forecast(index, std::vector<double>{0.4}));
    CHECK_THROWS_AS(knn_forecast(index, std::vector<double>{0.4}, 4), InvalidInputError);
    CHECK_THROWS_AS(knn_forecast(index, std::vector<double>{0.4}, 0), InvalidInputError);
}

TEST_CASE("oracle forecast modes") {
    ProcessModel martingale;
    martingale.kind = ProcessKind::gaussian_random_walk;
    martingale.sigma = 0.1;
    const OracleSpec flat_spec{martingale, OracleMode::flat_martingale};
    const std::vector<double> window{1.0, 2.0, 3.0};
    CHECK(oracle_forecast(flat_spec, 10, window, 4) == flat_forecast(window, 4));

    ProcessModel trend;
    trend.kind = ProcessKind::structured_seasonal;
    trend.sigma = 0.0;
    trend.structure = StructureParams{0.0, 1, 1.0};
    const OracleSpec mean_spec{trend, OracleMode::structured_mean};
    // Pure unit trend from x0 = 0: level(t) = t, window ends at level 7.
    const Forecast f = oracle_forecast(mean_spec, 7, std::vector<double>{6.0, 7.0}, 2);
    CHECK(f == Forecast{8.0, 9.0});

    CHECK_THROWS_AS(oracle_forecast(OracleSpec{martingale, OracleMode::structured_mean}, 0,
                                    window, 2),
                    ConfigError);
    CHECK_THROWS_AS(oracle_forecast(OracleSpec{trend, OracleMode::flat_martingale}, 0, window, 2),
                    ConfigError);
}

TEST_CASE("noiseless structured oracle has zero loss everywhere") {
    ProcessModel model;
    model.kind = ProcessKind::structured_seasonal;
    model.sigma = 0.0;
    model.x0 = 5.0;
    model.structure = StructureParams{2.0, 12, 0.25};
    const Path path = simulate_path(model, 400, 9);
    const Dataset ds = make_windows(path, 6, 4, 1);
    const OraclePredictor oracle(OracleSpec{model, OracleMode::structured_mean}, 4);
    for (double loss : window_losses(oracle, ds)) {
        CHECK(loss == 0.0);
    }
}

TEST_CASE("oracle risk is minimal among predictors on matching data") {
    // Martingale prices: the flat-mode oracle against fitted linear, NN, zero.
    {
        ProcessModel model;
        model.kind = ProcessKind::gaussian_random_walk;
        model.x0 = 5.0;
        model.sigma = 0.1;
        const Path path = simulate_path(model, 70000, 303);
        const Dataset all = make_windows(path, 4, 3, 3);
        REQUIRE(all.size() >= 20000);
        const SplitDataset split = chrono_split(all, {0.05, 0.05, 0.90});
        REQUIRE(split.test.size() >= 10000);

        const OraclePredictor oracle(OracleSpec{model, OracleMode::flat_martingale}, 3);
        const LinearPredictor linear(fit_linear_one_param(split.train));
        const NNPredictor nn(NNIndex::from_dataset(split.train), 1);
        const ZeroPredictor zero(3);

        const auto oracle_stats = mean_with_se(window_losses(oracle, split.test));
        for (const Predictor* other :
             std::initializer_list<const Predictor*>{&linear, &nn, &zero}) {
            const auto stats = mean_with_se(window_losses(*other, split.test));
            const double slack = 3.0 * std::sqrt(oracle_stats.se * oracle_stats.se +
                                                 stats.se * stats.se);
            CHECK(oracle_stats.mean <= stats.mean + slack);
        }
    }
    // Structured seasonal: the conditional-mean oracle against flat, zero, NN.
    {
        ProcessModel model;
        model.kind = ProcessKind::structured_seasonal;
        model.x0 = 2.0;
        model.sigma = 0.05;
        model.structure = StructureParams{1.0, 12, 0.01};
        const Path path = simulate_path(model, 60000, 404);
        const Dataset all = make_windows(path, 5, 4, 4);
        const SplitDataset split = chrono_split(all, {0.10, 0.05, 0.85});
        REQUIRE(split.test.size() >= 10000);

        const OraclePredictor oracle(OracleSpec{model, OracleMode::structured_mean}, 4);
        const FlatPredictor flat(4);
        const ZeroPredictor zero(4);
        const NNPredictor nn(NNIndex::from_dataset(split.train), 1);
        const LinearPredictor linear(fit_linear_one_param(split.train));

        const auto oracle_stats = mean_with_se(window_losses(oracle, split.test));
        for (const Predictor* other :
             std::initializer_list<const Predictor*>{&flat, &zero, &nn, &linear}) {
            const auto stats = mean_with_se(window_losses(*other, split.test));
            const double slack = 3.0 * std::sqrt(oracle_stats.se * oracle_stats.se +
                                                 stats.se * stats.se);
            CHECK(oracle_stats.mean <= stats.mean + slack);
        }
    }
}

TEST_CASE("fitted linear predictor serializes to a small JSON document") {
    const Dataset ds = dataset_of({{0, {2.0}, {3.0, 5.0}}}, 1, 2);
    const LinearOneParam fit = fit_linear_one_param(ds);
    const LinearOneParam back = linear_from_json(linear_to_json(fit));
    CHECK(back.a == fit.a);
    CHECK(back.H == fit.H);
    CHECK(back.L == fit.L);
}
