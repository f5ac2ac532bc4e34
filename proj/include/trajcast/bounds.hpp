#pragma once

#include "trajcast/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace trajcast {

enum class XDistKind {
    uniform_interval,    // x ~ Uniform(lo, hi), 0 < lo < hi
    abs_gaussian_shifted // x = |mu + s*Z|, Z standard normal
};

struct XDist {
    XDistKind kind = XDistKind::uniform_interval;
    double p0 = 0.5; // lo or mu
    double p1 = 1.5; // hi or s
};

// Analytic P(|x| >= b) for the supported designs; this is what certifies the
// small-ball parameters instead of hoping for them empirically.
double smallball_prob(const XDist& dist, double b);

double x_second_moment(const XDist& dist);

double draw_x(const XDist& dist, RngStream& rng);

// Regression design used by every bound check. sigma is the coordinate noise
// standard deviation: eps_{i,h} ~ N(0, sigma^2) iid, so the scalar innovation
// xi_i = mean_h eps_{i,h} has variance sigma^2 / H. The tail and moment bounds
// are stated for xi, so they use sigma_xi = sigma / sqrt(H); reports carry
// both scales to avoid unit confusion.
struct DesignSpec {
    XDist x_dist;
    double b = 0.5;    // small-ball level
    double p = 1.0;    // small-ball probability certified by x_dist
    double sigma = 0.1;
    int H = 5;

    double sigma_xi() const;
    void validate() const;
};

struct MsePoint {
    long n = 0;
    double mse = 0.0;      // Monte-Carlo estimate of E[(a_hat - 1)^2]
    double mse_se = 0.0;
    double bound = 0.0;    // 4 * sigma_xi^2 * estimate of E[1/V_n]
    double bound_se = 0.0;
    long rejected = 0;     // degenerate designs redrawn
};

struct MseResult {
    std::vector<MsePoint> points;
    double loglog_slope = 0.0; // OLS slope of log(mse) against log(n)
};

// Coefficient mean-squared-error curve with the companion moment bound.
MseResult estimate_coeff_mse(const DesignSpec& design, std::span<const long> n_grid, long reps,
                             std::uint64_t seed);

struct VnTailPoint {
    long n = 0;
    double eta = 0.0;
    double threshold = 0.0; // b^2 * (p - eta) * n
    double freq = 0.0;      // empirical P(V_n <= threshold)
    double freq_se = 0.0;   // binomial standard error
    double bound = 0.0;     // exp(-2 * eta^2 * n)
    bool vacuous = false;   // bound >= 1: reported, never asserted
};

VnTailPoint check_vn_tail(const DesignSpec& design, long n, double eta, long reps,
                          std::uint64_t seed);

struct RatioTailPoint {
    double t = 0.0;
    double freq = 0.0;     // empirical P(|M_n| / V_n >= t)
    double freq_se = 0.0;
    double bound = 0.0;    // 2 * estimate of E[exp(-t^2 V_n / (2 sigma_xi^2))]
    double bound_se = 0.0;
    bool vacuous = false;
};

// The bound side is estimated from an independent batch of V_n draws so the
// two sides of the comparison carry independent Monte-Carlo noise.
std::vector<RatioTailPoint> check_ratio_tail(const DesignSpec& design, long n,
                                             std::span<const double> t_grid, long reps,
                                             std::uint64_t seed);

struct RiskCurvePoint {
    long n = 0;
    double nn_risk = 0.0;
    double nn_se = 0.0;
    double nn_design_term = 0.0; // H * estimate of E[(x(U) - x_nn)^2]
    double lin_risk = 0.0;       // plain Monte-Carlo mean loss
    double lin_se = 0.0;
    double lin_excess = 0.0;     // control-variate estimate of risk - H*sigma^2
    double lin_excess_se = 0.0;
    long rejected = 0;
};

struct RisksResult {
    std::vector<RiskCurvePoint> points;
    double excess_loglog_slope = 0.0;
};

// Fits the one-parameter least-squares predictor and the 1-NN interpolator on
// fresh training sets Y_i = x_i * 1_H + eps_i and evaluates both on fresh
// test pairs. The linear excess risk is additionally estimated with the
// recorded test noise as a control variate (loss - ||eps||^2), which removes
// the dominant noise term without touching the evaluation protocol.
RisksResult check_prop_risks(const DesignSpec& design, std::span<const long> n_grid,
                             long test_windows, long reps, std::uint64_t seed);

struct ErmPoint {
    long n = 0;
    double mean_delta = 0.0;  // mean over reps of sup_a |emp risk - pop risk|
    double mean_regret = 0.0; // mean over reps of R(selected) - min_a R(a)
    double select_true_freq = 0.0;
    long samplewise_violations = 0; // replications with regret > 2 * delta
};

struct ErmResult {
    std::vector<ErmPoint> points;
    std::vector<double> coeff_grid;
};

// Finite class {a_j} = linspace(0, 2, class_size); population risks are
// analytic: R(f_a) = H*sigma^2 + H*(a-1)^2*E[x^2].
ErmResult check_erm_consistency(const DesignSpec& design, int class_size,
                                std::span<const long> n_grid, long reps, std::uint64_t seed);

// Aggregated output of a verify-bounds run; sections are empty when the
// corresponding check was not requested.
struct BoundReport {
    DesignSpec design;
    std::uint64_t seed = 0;
    MseResult mse;
    long mse_reps = 0;
    std::vector<VnTailPoint> vn_tail;
    long vn_reps = 0;
    std::vector<RatioTailPoint> ratio_tail;
    long ratio_reps = 0;
    long ratio_n = 0;
    RisksResult risks;
    long risks_reps = 0;
    ErmResult erm;
    long erm_reps = 0;
};

nlohmann::json design_to_json(const DesignSpec& design);
DesignSpec design_from_json(const nlohmann::json& j);
nlohmann::json bound_report_to_json(const BoundReport& report);

// Least-squares slope of y against x; used for the log-log rate fits.
double ols_slope(std::span<const double> x, std::span<const double> y);

} // namespace trajcast
