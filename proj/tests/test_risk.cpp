#include "trajcast/risk.hpp"

#include "trajcast/errors.hpp"
#include "trajcast/rng.hpp"
#include "trajcast/sim.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace trajcast;

TEST_CASE("trajectory loss basics") {
    CHECK(traj_loss(std::vector<double>{1, 1}, std::vector<double>{1, 1}) == 0.0);
    CHECK(traj_loss(std::vector<double>{1, 2}, std::vector<double>{0, 0}) == 5.0);
    CHECK_THROWS_AS(traj_loss(std::vector<double>{1}, std::vector<double>{1, 2}),
                    InvalidInputError);
}

TEST_CASE("zero predictor loss on returns equals the recorded noise energy") {
    ProcessModel model;
    model.kind = ProcessKind::gaussian_random_walk;
    model.x0 = 1.0;
    model.sigma = 0.1;
    const Path prices = simulate_path(model, 320000, 55);
    const Path returns = path_to_returns(prices);
    const int H = 30;
    const Dataset ds = make_windows(returns, 5, H, H);
    REQUIRE(ds.size() >= 10000);

    const ZeroPredictor zero(H);
    const auto losses = window_losses(zero, ds);

    // Identity: the loss of the zero forecast is the squared norm of the
    // innovations over the horizon, exactly.
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const WindowPair& p = ds.pairs[i];
        double expected = 0.0;
        for (int h = 1; h <= H; ++h) {
            const double e = prices.innovations[static_cast<std::size_t>(p.t + h)];
            expected += (returns.values[static_cast<std::size_t>(p.t + h)] - 0.0) *
                        (returns.values[static_cast<std::size_t>(p.t + h)] - 0.0);
            CHECK(returns.values[static_cast<std::size_t>(p.t + h)] == e);
        }
        CHECK(losses[i] == expected);
    }

    // Monte-Carlo value: H * sigma^2 = 0.3 within 3 standard errors.
    const MeanSe stats = mean_with_se(losses);
    CHECK(std::abs(stats.mean - 0.3) <= 3.0 * stats.se);
}

TEST_CASE("empirical risk trivial cases") {
    ProcessModel model;
    model.kind = ProcessKind::gaussian_random_walk;
    model.x0 = 1.0;
    model.sigma = 0.0;
    const Path path = simulate_path(model, 40, 1);
    const Dataset ds = make_windows(path, 3, 2, 1);
    const FlatPredictor flat(2);
    CHECK(empirical_risk(flat, ds) == 0.0);

    // One pair with trajectory loss 5: the n = 1 mean is the loss itself.
    Dataset one;
    one.L = 1;
    one.H = 2;
    one.pairs = {{0, {0.0}, {2.0, 1.0}}};
    const ZeroPredictor zero(2);
    CHECK(empirical_risk(zero, one) == 5.0);

    Dataset empty;
    empty.L = 1;
    empty.H = 2;
    CHECK_THROWS_AS(empirical_risk(zero, empty), InsufficientDataError);
}

TEST_CASE("empirical risk is size-weighted under concatenation") {
    RngStream rng(14, 0);
    auto make = [&](long n, long t0) {
        Dataset ds;
        ds.L = 1;
        ds.H = 2;
        for (long i = 0; i < n; ++i) {
            ds.pairs.push_back({t0 + i, {rng.normal()}, {rng.normal(), rng.normal()}});
        }
        return ds;
    };
    const Dataset d1 = make(37, 0);
    const Dataset d2 = make(63, 100);
    Dataset both = d1;
    both.pairs.insert(both.pairs.end(), d2.pairs.begin(), d2.pairs.end());
    const ZeroPredictor zero(2);
    const double r1 = empirical_risk(zero, d1);
    const double r2 = empirical_risk(zero, d2);
    const double r = empirical_risk(zero, both);
    const double expected = (37.0 * r1 + 63.0 * r2) / 100.0;
    CHECK(r == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ecdf steps") {
    const auto pts = ecdf(std::vector<double>{3, 1, 2});
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].value == 1.0);
    CHECK(pts[0].fraction == doctest::Approx(1.0 / 3));
    CHECK(pts[1].value == 2.0);
    CHECK(pts[1].fraction == doctest::Approx(2.0 / 3));
    CHECK(pts[2].value == 3.0);
    CHECK(pts[2].fraction == 1.0);

    const auto dup = ecdf(std::vector<double>{2, 2});
    REQUIRE(dup.size() == 1);
    CHECK(dup[0].value == 2.0);
    CHECK(dup[0].fraction == 1.0);

    CHECK_THROWS_AS(ecdf(std::vector<double>{}), InsufficientDataError);
    CHECK_THROWS_AS(ecdf(std::vector<double>{1.0, std::nan("")}), InvalidInputError);
}

TEST_CASE("ecdf ends at one and is permutation invariant") {
    RngStream rng(31, 0);
    std::vector<double> losses(5000);
    for (double& l : losses) {
        l = rng.uniform(0.0, 4.0);
    }
    const auto a = ecdf(losses);
    CHECK(a.back().fraction == 1.0);
    for (std::size_t i = 1; i < a.size(); ++i) {
        CHECK(a[i].fraction > a[i - 1].fraction);
        CHECK(a[i].value > a[i - 1].value);
    }
    std::reverse(losses.begin(), losses.end());
    const auto b = ecdf(losses);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].value == b[i].value);
        CHECK(a[i].fraction == b[i].fraction);
    }
}

TEST_CASE("ecdf obeys the DKW band against the sampling distribution") {
    // Exponential(1) losses; F(x) = 1 - exp(-x).
    RngStream rng(606, 0);
    const std::size_t n = 10000;
    std::vector<double> losses(n);
    for (double& l : losses) {
        l = -std::log(1.0 - rng.uniform01());
    }
    const auto pts = ecdf(losses);
    const double band = std::sqrt(std::log(2.0 / 0.01) / (2.0 * static_cast<double>(n)));
    double prev = 0.0;
    double max_dev = 0.0;
    for (const EcdfPoint& p : pts) {
        const double truth = 1.0 - std::exp(-p.value);
        max_dev = std::max(max_dev, std::abs(p.fraction - truth));
        max_dev = std::max(max_dev, std::abs(prev - truth));
        prev = p.fraction;
    }
    CHECK(max_dev <= band);
}

TEST_CASE("identical losses compare as ties") {
    const std::vector<double> losses{1.0, 2.0, 3.0};
    const RiskReport r = compare_report(losses, losses, "a", "b");
    CHECK(r.win_rate_a_over_b == 0.0);
    CHECK(r.risk_ratio_a_over_b == 1.0);
    CHECK(r.zero_loss_excluded == 0);
    for (double lr : r.log10_ratios) {
        CHECK(lr == 0.0);
    }
}

TEST_CASE("win rates of the two orientations and ties sum to one") {
    RngStream rng(77, 3);
    std::vector<double> a(4001);
    std::vector<double> b(4001);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = std::abs(rng.normal()) + 0.01;
        b[i] = i % 10 == 0 ? a[i] : std::abs(rng.normal()) + 0.01;
    }
    const RiskReport ab = compare_report(a, b, "a", "b");
    const RiskReport ba = compare_report(b, a, "b", "a");
    std::size_t ties = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == b[i]) ++ties;
    }
    const double tie_frac = static_cast<double>(ties) / static_cast<double>(a.size());
    CHECK(ab.win_rate_a_over_b + ba.win_rate_a_over_b + tie_frac ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ab.risk_ratio_a_over_b * ba.risk_ratio_a_over_b ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero losses are excluded from log ratios but kept elsewhere") {
    const std::vector<double> a{0.0, 2.0, 4.0};
    const std::vector<double> b{1.0, 0.0, 2.0};
    const RiskReport r = compare_report(a, b, "a", "b");
    CHECK(r.n == 3);
    CHECK(r.zero_loss_excluded == 2);
    REQUIRE(r.log10_ratios.size() == 1);
    CHECK(r.log10_ratios[0] == doctest::Approx(std::log10(2.0)));
    CHECK(r.ratio_anchors[0] == 2);
    CHECK(r.win_rate_a_over_b == doctest::Approx(2.0 / 3.0));
    CHECK(r.risk_ratio_a_over_b == doctest::Approx(2.0));

    CHECK_THROWS_AS(compare_report(a, std::vector<double>{1.0}, "a", "b"), InvalidInputError);
}

TEST_CASE("nn versus the trivial forecaster on window-level martingale data") {
    // Targets are current-level plus centered noise; the trivial forecast is
    // the Bayes predictor with risk H*sigma^2 and the 1-NN interpolator pays
    // about twice that, so the risk ratio sits near 2 plus the design term.
    RngStream x_rng(515, 0);
    RngStream noise_rng(515, 1);
    const int H = 30;
    const double sigma = 0.1;
    const long n_train = 500;
    const long n_test = 10000;

    Dataset train;
    train.L = 1;
    train.H = H;
    for (long i = 0; i < n_train; ++i) {
        WindowPair p{i, {x_rng.uniform(0.5, 1.5)}, {}};
        for (int h = 0; h < H; ++h) {
            p.target.push_back(p.input[0] + noise_rng.normal(0.0, sigma));
        }
        train.pairs.push_back(std::move(p));
    }
    Dataset test = train;
    test.pairs.clear();
    std::vector<std::vector<double>> test_eps(static_cast<std::size_t>(n_test));
    for (long i = 0; i < n_test; ++i) {
        WindowPair p{n_train + i, {x_rng.uniform(0.5, 1.5)}, {}};
        auto& eps = test_eps[static_cast<std::size_t>(i)];
        for (int h = 0; h < H; ++h) {
            eps.push_back(noise_rng.normal(0.0, sigma));
            p.target.push_back(p.input[0] + eps.back());
        }
        test.pairs.push_back(std::move(p));
    }

    const NNPredictor nn(NNIndex::from_dataset(train), 1);
    const FlatPredictor flat(H);
    const auto nn_losses = window_losses(nn, test);
    const auto flat_losses = window_losses(flat, test);
    const RiskReport report = compare_report(nn_losses, flat_losses, "nn", "flat");

    // Independent route: recompute both risks from the recorded noise and a
    // test-side neighbor scan.
    const NNIndex& index = nn.index();
    double nn_oracle = 0.0;
    double flat_oracle = 0.0;
    for (long i = 0; i < n_test; ++i) {
        const WindowPair& p = test.pairs[static_cast<std::size_t>(i)];
        std::size_t best = 0;
        double best_d = std::abs(p.input[0] - index.inputs[0][0]);
        for (std::size_t j = 1; j < index.inputs.size(); ++j) {
            const double d = std::abs(p.input[0] - index.inputs[j][0]);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        const auto& eps = test_eps[static_cast<std::size_t>(i)];
        for (int h = 0; h < H; ++h) {
            const double nn_err = p.input[0] + eps[static_cast<std::size_t>(h)] -
                                  index.targets[best][static_cast<std::size_t>(h)];
            nn_oracle += nn_err * nn_err;
            flat_oracle += eps[static_cast<std::size_t>(h)] * eps[static_cast<std::size_t>(h)];
        }
    }
    const double oracle_ratio = nn_oracle / flat_oracle;
    CHECK(report.risk_ratio_a_over_b ==
          doctest::Approx(oracle_ratio).epsilon(1e-9));
    CHECK(std::abs(report.risk_ratio_a_over_b - oracle_ratio) <=
          0.15 * oracle_ratio);
    CHECK(oracle_ratio > 1.6);
    CHECK(oracle_ratio < 2.4);
}
