#include "trajcast/bounds.hpp"

#include "trajcast/errors.hpp"
#include "trajcast/predictors.hpp"
#include "trajcast/risk.hpp"
#include "trajcast/windows.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

namespace trajcast {

namespace {

// Stream ids are (tag, slot, rep): tag separates draw purposes, slot indexes
// the grid point, rep the replication. Degenerate redraws shift the rep field
// by a large stride so every attempt sees a fresh stream.
constexpr std::uint64_t kTagDesignX = 1;
constexpr std::uint64_t kTagNoise = 2;
constexpr std::uint64_t kTagTestX = 3;
constexpr std::uint64_t kTagTestNoise = 4;
constexpr std::uint64_t kTagVBatch = 5;
constexpr std::uint64_t kTagErm = 6;
constexpr std::uint64_t kRedrawStride = 1ULL << 20;

constexpr std::uint64_t make_stream(std::uint64_t tag, std::uint64_t slot, std::uint64_t rep) {
    return (tag << 56) | ((slot & 0xFFFF) << 40) | rep;
}

double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2_v<double>);
}

double binomial_se(double freq, long reps) {
    return std::sqrt(freq * (1.0 - freq) / static_cast<double>(reps));
}

// 16-bit slot for a (n, eta) grid point so repeated calls under one seed land
// on disjoint streams.
std::uint64_t point_slot(long n, double eta) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xFF;
            h *= 0x100000001b3ULL;
        }
    };
    mix(static_cast<std::uint64_t>(n));
    std::uint64_t bits = 0;
    static_assert(sizeof(bits) == sizeof(eta));
    std::memcpy(&bits, &eta, sizeof(bits));
    mix(bits);
    return h & 0xFFFF;
}

// Draws the regressors for one replication, redrawing the whole design on the
// (measure-zero under the supported distributions) event V_n = 0.
std::vector<double> draw_design(const DesignSpec& design, long n, std::uint64_t seed,
                                std::uint64_t slot, std::uint64_t rep, long& rejected) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        if (attempt > 100) {
            throw ConfigError("design draw: too many degenerate redraws");
        }
        RngStream rng(seed, make_stream(kTagDesignX, slot, rep + attempt * kRedrawStride));
        std::vector<double> x(static_cast<std::size_t>(n));
        double energy = 0.0;
        for (double& xi : x) {
            xi = draw_x(design.x_dist, rng);
            energy += xi * xi;
        }
        if (energy > 0.0) {
            return x;
        }
        ++rejected;
    }
}

void enforce_rejection_budget(long rejected, long reps) {
    if (static_cast<double>(rejected) > 0.01 * static_cast<double>(reps)) {
        throw ConfigError("design rejection fraction above 1%; design is too degenerate");
    }
}

} // namespace

double smallball_prob(const XDist& dist, double b) {
    switch (dist.kind) {
    case XDistKind::uniform_interval: {
        const double lo = dist.p0;
        const double hi = dist.p1;
        if (b <= lo) return 1.0;
        if (b >= hi) return 0.0;
        return (hi - b) / (hi - lo);
    }
    case XDistKind::abs_gaussian_shifted: {
        const double mu = dist.p0;
        const double s = dist.p1;
        // P(|mu + sZ| >= b) = Phi((mu-b)/s) + 1 - Phi((mu+b)/s)
        return std_normal_cdf((mu - b) / s) + 1.0 - std_normal_cdf((mu + b) / s);
    }
    }
    throw Error("unknown XDistKind");
}

double x_second_moment(const XDist& dist) {
    switch (dist.kind) {
    case XDistKind::uniform_interval:
        return (dist.p0 * dist.p0 + dist.p0 * dist.p1 + dist.p1 * dist.p1) / 3.0;
    case XDistKind::abs_gaussian_shifted:
        return dist.p0 * dist.p0 + dist.p1 * dist.p1;
    }
    throw Error("unknown XDistKind");
}

double draw_x(const XDist& dist, RngStream& rng) {
    switch (dist.kind) {
    case XDistKind::uniform_interval:
        return rng.uniform(dist.p0, dist.p1);
    case XDistKind::abs_gaussian_shifted:
        return std::abs(dist.p0 + dist.p1 * rng.normal());
    }
    throw Error("unknown XDistKind");
}

double DesignSpec::sigma_xi() const {
    return sigma / std::sqrt(static_cast<double>(H));
}

void DesignSpec::validate() const {
    if (H < 1) {
        throw ConfigError("design: H must be >= 1");
    }
    // sigma == 0 is allowed for the noiseless-recovery checks; the tail bounds
    // that divide by sigma reject it at call time.
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw ConfigError("design: sigma must be finite and >= 0");
    }
    if (!(b > 0.0)) {
        throw ConfigError("design: small-ball level b must be > 0");
    }
    if (!(p > 0.0) || p > 1.0) {
        throw ConfigError("design: small-ball probability p must lie in (0, 1]");
    }
    if (x_dist.kind == XDistKind::uniform_interval && !(0.0 < x_dist.p0 && x_dist.p0 < x_dist.p1)) {
        throw ConfigError("design: uniform_interval requires 0 < lo < hi");
    }
    if (x_dist.kind == XDistKind::abs_gaussian_shifted && !(x_dist.p1 > 0.0)) {
        throw ConfigError("design: abs_gaussian_shifted requires s > 0");
    }
    if (smallball_prob(x_dist, b) < p - 1e-12) {
        throw ConfigError("design: x_dist does not certify P(|x| >= b) >= p");
    }
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw InvalidInputError("ols_slope: need two sequences of equal length >= 2");
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) {
        throw InvalidInputError("ols_slope: degenerate abscissa");
    }
    return sxy / sxx;
}

MseResult estimate_coeff_mse(const DesignSpec& design, std::span<const long> n_grid, long reps,
                             std::uint64_t seed) {
    design.validate();
    if (n_grid.empty()) {
        throw ConfigError("estimate_coeff_mse: empty n grid");
    }
    for (long n : n_grid) {
        if (n < 2) {
            throw ConfigError("estimate_coeff_mse: every n must be >= 2");
        }
    }
    if (reps < 100) {
        throw ConfigError("estimate_coeff_mse: reps must be >= 100");
    }

    const double sx = design.sigma_xi();
    MseResult result;
    result.points.reserve(n_grid.size());

    for (std::size_t slot = 0; slot < n_grid.size(); ++slot) {
        const long n = n_grid[slot];
        std::vector<double> sq_err(static_cast<std::size_t>(reps));
        std::vector<double> inv_v(static_cast<std::size_t>(reps));
        long rejected = 0;
        for (long r = 0; r < reps; ++r) {
            const auto x = draw_design(design, n, seed, slot, static_cast<std::uint64_t>(r), rejected);
            RngStream noise(seed, make_stream(kTagNoise, slot, static_cast<std::uint64_t>(r)));
            double m = 0.0;
            double v = 0.0;
            for (double xi : x) {
                m += xi * noise.normal(0.0, sx);
                v += xi * xi;
            }
            const double d = m / v;
            sq_err[static_cast<std::size_t>(r)] = d * d;
            inv_v[static_cast<std::size_t>(r)] = 1.0 / v;
        }
        enforce_rejection_budget(rejected, reps);
        const MeanSe err = mean_with_se(sq_err);
        const MeanSe iv = mean_with_se(inv_v);
        MsePoint point;
        point.n = n;
        point.mse = err.mean;
        point.mse_se = err.se;
        point.bound = 4.0 * sx * sx * iv.mean;
        point.bound_se = 4.0 * sx * sx * iv.se;
        point.rejected = rejected;
        result.points.push_back(point);
    }

    if (result.points.size() >= 2) {
        std::vector<double> lx;
        std::vector<double> ly;
        for (const MsePoint& p : result.points) {
            if (p.mse > 0.0) {
                lx.push_back(std::log(static_cast<double>(p.n)));
                ly.push_back(std::log(p.mse));
            }
        }
        result.loglog_slope =
            lx.size() >= 2 ? ols_slope(lx, ly) : std::numeric_limits<double>::quiet_NaN();
    } else {
        result.loglog_slope = std::numeric_limits<double>::quiet_NaN();
    }
    return result;
}

VnTailPoint check_vn_tail(const DesignSpec& design, long n, double eta, long reps,
                          std::uint64_t seed) {
    design.validate();
    if (n < 1) {
        throw ConfigError("check_vn_tail: n must be >= 1");
    }
    if (!(eta > 0.0) || !(eta < design.p)) {
        throw ConfigError("check_vn_tail: eta must lie in (0, p)");
    }
    if (reps < 1000) {
        throw ConfigError("check_vn_tail: reps must be >= 1000");
    }

    // Fold the grid point into the slot so different (n, eta) calls under the
    // same seed use disjoint streams.
    const std::uint64_t slot = point_slot(n, eta);

    long hits = 0;
    const double threshold =
        design.b * design.b * (design.p - eta) * static_cast<double>(n);
    for (long r = 0; r < reps; ++r) {
        RngStream rng(seed, make_stream(kTagDesignX, slot, static_cast<std::uint64_t>(r)));
        double v = 0.0;
        for (long i = 0; i < n; ++i) {
            const double x = draw_x(design.x_dist, rng);
            v += x * x;
        }
        if (v <= threshold) {
            ++hits;
        }
    }
    VnTailPoint point;
    point.n = n;
    point.eta = eta;
    point.threshold = threshold;
    point.freq = static_cast<double>(hits) / static_cast<double>(reps);
    point.freq_se = binomial_se(point.freq, reps);
    point.bound = std::exp(-2.0 * eta * eta * static_cast<double>(n));
    point.vacuous = point.bound >= 1.0;
    return point;
}

std::vector<RatioTailPoint> check_ratio_tail(const DesignSpec& design, long n,
                                             std::span<const double> t_grid, long reps,
                                             std::uint64_t seed) {
    design.validate();
    if (n < 1) {
        throw ConfigError("check_ratio_tail: n must be >= 1");
    }
    if (t_grid.empty()) {
        throw ConfigError("check_ratio_tail: empty t grid");
    }
    for (double t : t_grid) {
        if (t < 0.0) {
            throw ConfigError("check_ratio_tail: t must be >= 0");
        }
    }
    if (reps < 1000) {
        throw ConfigError("check_ratio_tail: reps must be >= 1000");
    }
    if (!(design.sigma > 0.0)) {
        throw ConfigError("check_ratio_tail: sigma must be > 0");
    }

    const double sx = design.sigma_xi();
    std::vector<double> ratios(static_cast<std::size_t>(reps));
    long rejected = 0;
    for (long r = 0; r < reps; ++r) {
        const auto x = draw_design(design, n, seed, 0, static_cast<std::uint64_t>(r), rejected);
        RngStream noise(seed, make_stream(kTagNoise, 0, static_cast<std::uint64_t>(r)));
        double m = 0.0;
        double v = 0.0;
        for (double xi : x) {
            m += xi * noise.normal(0.0, sx);
            v += xi * xi;
        }
        ratios[static_cast<std::size_t>(r)] = std::abs(m) / v;
    }
    enforce_rejection_budget(rejected, reps);

    // Independent V_n batch for the right-hand side.
    std::vector<double> v_batch(static_cast<std::size_t>(reps));
    for (long r = 0; r < reps; ++r) {
        RngStream rng(seed, make_stream(kTagVBatch, 0, static_cast<std::uint64_t>(r)));
        double v = 0.0;
        for (long i = 0; i < n; ++i) {
            const double x = draw_x(design.x_dist, rng);
            v += x * x;
        }
        v_batch[static_cast<std::size_t>(r)] = v;
    }

    std::vector<RatioTailPoint> points;
    points.reserve(t_grid.size());
    std::vector<double> rhs(static_cast<std::size_t>(reps));
    for (double t : t_grid) {
        long hits = 0;
        for (double ratio : ratios) {
            if (ratio >= t) {
                ++hits;
            }
        }
        for (std::size_t r = 0; r < v_batch.size(); ++r) {
            rhs[r] = std::exp(-t * t * v_batch[r] / (2.0 * sx * sx));
        }
        const MeanSe rhs_stats = mean_with_se(rhs);
        RatioTailPoint point;
        point.t = t;
        point.freq = static_cast<double>(hits) / static_cast<double>(reps);
        point.freq_se = binomial_se(point.freq, reps);
        point.bound = 2.0 * rhs_stats.mean;
        point.bound_se = 2.0 * rhs_stats.se;
        point.vacuous = point.bound >= 1.0;
        points.push_back(point);
    }
    return points;
}

RisksResult check_prop_risks(const DesignSpec& design, std::span<const long> n_grid,
                             long test_windows, long reps, std::uint64_t seed) {
    design.validate();
    if (n_grid.empty()) {
        throw ConfigError("check_prop_risks: empty n grid");
    }
    for (long n : n_grid) {
        if (n < 2) {
            throw ConfigError("check_prop_risks: every n must be >= 2");
        }
    }
    if (test_windows < 1000) {
        throw ConfigError("check_prop_risks: test_windows must be >= 1000");
    }
    if (reps < 1) {
        throw ConfigError("check_prop_risks: reps must be >= 1");
    }

    const int H = design.H;
    RisksResult result;
    result.points.reserve(n_grid.size());

    for (std::size_t slot = 0; slot < n_grid.size(); ++slot) {
        const long n = n_grid[slot];
        std::vector<double> nn_rep(static_cast<std::size_t>(reps));
        std::vector<double> lin_rep(static_cast<std::size_t>(reps));
        std::vector<double> excess_rep(static_cast<std::size_t>(reps));
        std::vector<double> design_rep(static_cast<std::size_t>(reps));
        long rejected = 0;

        for (long r = 0; r < reps; ++r) {
            const auto rep = static_cast<std::uint64_t>(r);
            const auto x = draw_design(design, n, seed, slot, rep, rejected);
            RngStream noise(seed, make_stream(kTagNoise, slot, rep));

            Dataset train;
            train.L = 1;
            train.H = H;
            train.pairs.resize(static_cast<std::size_t>(n));
            for (long i = 0; i < n; ++i) {
                WindowPair& pair = train.pairs[static_cast<std::size_t>(i)];
                pair.t = i;
                const double xi = x[static_cast<std::size_t>(i)];
                pair.input = {xi};
                pair.target.resize(static_cast<std::size_t>(H));
                for (int h = 0; h < H; ++h) {
                    pair.target[static_cast<std::size_t>(h)] = xi + noise.normal(0.0, design.sigma);
                }
            }

            const LinearOneParam lin = fit_linear_one_param(train);
            const NNIndex index = NNIndex::from_dataset(train);

            RngStream test_x(seed, make_stream(kTagTestX, slot, rep));
            RngStream test_noise(seed, make_stream(kTagTestNoise, slot, rep));
            double nn_sum = 0.0;
            double lin_sum = 0.0;
            double excess_sum = 0.0;
            double design_sum = 0.0;
            std::vector<double> target(static_cast<std::size_t>(H));
            std::vector<double> eps(static_cast<std::size_t>(H));
            for (long w = 0; w < test_windows; ++w) {
                const double xs = draw_x(design.x_dist, test_x);
                double eps_sq = 0.0;
                for (int h = 0; h < H; ++h) {
                    const double e = test_noise.normal(0.0, design.sigma);
                    eps[static_cast<std::size_t>(h)] = e;
                    eps_sq += e * e;
                    target[static_cast<std::size_t>(h)] = xs + e;
                }
                const double query[1] = {xs};
                const std::size_t j = nn_lookup(index, query);
                const double nn_loss = traj_loss(target, index.targets[j]);
                const double dx = xs - index.inputs[j][0];
                const double lin_loss = traj_loss(target, linear_forecast(lin, query));
                nn_sum += nn_loss;
                lin_sum += lin_loss;
                excess_sum += lin_loss - eps_sq;
                design_sum += dx * dx;
            }
            const auto w = static_cast<double>(test_windows);
            nn_rep[static_cast<std::size_t>(r)] = nn_sum / w;
            lin_rep[static_cast<std::size_t>(r)] = lin_sum / w;
            excess_rep[static_cast<std::size_t>(r)] = excess_sum / w;
            design_rep[static_cast<std::size_t>(r)] = static_cast<double>(H) * design_sum / w;
        }
        enforce_rejection_budget(rejected, reps);

        const MeanSe nn = mean_with_se(nn_rep);
        const MeanSe lin = mean_with_se(lin_rep);
        const MeanSe excess = mean_with_se(excess_rep);
        const MeanSe dterm = mean_with_se(design_rep);
        RiskCurvePoint point;
        point.n = n;
        point.nn_risk = nn.mean;
        point.nn_se = nn.se;
        point.nn_design_term = dterm.mean;
        point.lin_risk = lin.mean;
        point.lin_se = lin.se;
        point.lin_excess = excess.mean;
        point.lin_excess_se = excess.se;
        point.rejected = rejected;
        result.points.push_back(point);
    }

    if (result.points.size() >= 2) {
        std::vector<double> lx;
        std::vector<double> ly;
        for (const RiskCurvePoint& p : result.points) {
            if (p.lin_excess > 0.0) {
                lx.push_back(std::log(static_cast<double>(p.n)));
                ly.push_back(std::log(p.lin_excess));
            }
        }
        result.excess_loglog_slope =
            lx.size() >= 2 ? ols_slope(lx, ly) : std::numeric_limits<double>::quiet_NaN();
    } else {
        result.excess_loglog_slope = std::numeric_limits<double>::quiet_NaN();
    }
    return result;
}

ErmResult check_erm_consistency(const DesignSpec& design, int class_size,
                                std::span<const long> n_grid, long reps, std::uint64_t seed) {
    design.validate();
    if (class_size < 2) {
        throw ConfigError("check_erm_consistency: class size must be >= 2");
    }
    if (n_grid.empty()) {
        throw ConfigError("check_erm_consistency: empty n grid");
    }
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1])) {
            throw ConfigError("check_erm_consistency: n grid must be increasing and positive");
        }
    }
    if (reps < 1) {
        throw ConfigError("check_erm_consistency: reps must be >= 1");
    }

    const int H = design.H;
    const double ex2 = x_second_moment(design.x_dist);
    ErmResult result;
    result.coeff_grid.resize(static_cast<std::size_t>(class_size));
    for (int j = 0; j < class_size; ++j) {
        result.coeff_grid[static_cast<std::size_t>(j)] =
            2.0 * static_cast<double>(j) / static_cast<double>(class_size - 1);
    }

    // Analytic population risks; the minimizer is the grid point closest to 1.
    std::vector<double> pop_risk(result.coeff_grid.size());
    for (std::size_t j = 0; j < result.coeff_grid.size(); ++j) {
        const double da = result.coeff_grid[j] - 1.0;
        pop_risk[j] = static_cast<double>(H) * design.sigma * design.sigma +
                      static_cast<double>(H) * da * da * ex2;
    }
    std::size_t star = 0;
    for (std::size_t j = 1; j < pop_risk.size(); ++j) {
        if (pop_risk[j] < pop_risk[star]) {
            star = j;
        }
    }
    std::size_t true_idx = 0;
    for (std::size_t j = 1; j < result.coeff_grid.size(); ++j) {
        if (std::abs(result.coeff_grid[j] - 1.0) < std::abs(result.coeff_grid[true_idx] - 1.0)) {
            true_idx = j;
        }
    }

    result.points.reserve(n_grid.size());
    std::vector<double> emp_risk(result.coeff_grid.size());
    for (std::size_t slot = 0; slot < n_grid.size(); ++slot) {
        const long n = n_grid[slot];
        double delta_sum = 0.0;
        double regret_sum = 0.0;
        long true_hits = 0;
        long violations = 0;
        for (long r = 0; r < reps; ++r) {
            RngStream rng(seed, make_stream(kTagErm, slot, static_cast<std::uint64_t>(r)));
            double sxx = 0.0;
            double sxe = 0.0;
            double see = 0.0;
            for (long i = 0; i < n; ++i) {
                const double x = draw_x(design.x_dist, rng);
                double esum = 0.0;
                double esq = 0.0;
                for (int h = 0; h < H; ++h) {
                    const double e = rng.normal(0.0, design.sigma);
                    esum += e;
                    esq += e * e;
                }
                sxx += x * x;
                sxe += x * esum;
                see += esq;
            }
            const auto dn = static_cast<double>(n);
            double delta = 0.0;
            std::size_t sel = 0;
            for (std::size_t j = 0; j < result.coeff_grid.size(); ++j) {
                const double da = 1.0 - result.coeff_grid[j];
                emp_risk[j] =
                    (static_cast<double>(H) * da * da * sxx + 2.0 * da * sxe + see) / dn;
                delta = std::max(delta, std::abs(emp_risk[j] - pop_risk[j]));
                if (emp_risk[j] < emp_risk[sel]) {
                    sel = j;
                }
            }
            const double regret = pop_risk[sel] - pop_risk[star];
            delta_sum += delta;
            regret_sum += regret;
            if (sel == true_idx) {
                ++true_hits;
            }
            if (regret > 2.0 * delta) {
                ++violations;
            }
        }
        ErmPoint point;
        point.n = n;
        point.mean_delta = delta_sum / static_cast<double>(reps);
        point.mean_regret = regret_sum / static_cast<double>(reps);
        point.select_true_freq = static_cast<double>(true_hits) / static_cast<double>(reps);
        point.samplewise_violations = violations;
        result.points.push_back(point);
    }
    return result;
}

nlohmann::json design_to_json(const DesignSpec& design) {
    nlohmann::json dist;
    if (design.x_dist.kind == XDistKind::uniform_interval) {
        dist = {{"kind", "uniform_interval"}, {"lo", design.x_dist.p0}, {"hi", design.x_dist.p1}};
    } else {
        dist = {{"kind", "abs_gaussian_shifted"}, {"mu", design.x_dist.p0}, {"s", design.x_dist.p1}};
    }
    return {{"x_dist", dist}, {"b", design.b}, {"p", design.p},
            {"sigma", design.sigma}, {"H", design.H}};
}

DesignSpec design_from_json(const nlohmann::json& j) {
    DesignSpec design;
    const nlohmann::json& dist = j.at("x_dist");
    const std::string kind = dist.at("kind").get<std::string>();
    if (kind == "uniform_interval") {
        design.x_dist = {XDistKind::uniform_interval, dist.at("lo").get<double>(),
                         dist.at("hi").get<double>()};
    } else if (kind == "abs_gaussian_shifted") {
        design.x_dist = {XDistKind::abs_gaussian_shifted, dist.at("mu").get<double>(),
                         dist.at("s").get<double>()};
    } else {
        throw ConfigError("unknown x_dist kind: " + kind);
    }
    design.b = j.at("b").get<double>();
    design.p = j.at("p").get<double>();
    design.sigma = j.at("sigma").get<double>();
    design.H = j.at("H").get<int>();
    design.validate();
    return design;
}

nlohmann::json bound_report_to_json(const BoundReport& report) {
    nlohmann::json j;
    j["kind"] = "bound_report";
    j["design"] = design_to_json(report.design);
    j["seed"] = report.seed;
    j["sigma_coord"] = report.design.sigma;
    j["sigma_xi"] = report.design.sigma_xi();

    if (!report.mse.points.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (const MsePoint& p : report.mse.points) {
            rows.push_back({{"n", p.n}, {"mse", p.mse}, {"mse_se", p.mse_se},
                            {"bound", p.bound}, {"bound_se", p.bound_se},
                            {"rejected", p.rejected}});
        }
        j["coeff_mse"] = {{"reps", report.mse_reps}, {"loglog_slope", report.mse.loglog_slope},
                          {"points", std::move(rows)}};
    }
    if (!report.vn_tail.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (const VnTailPoint& p : report.vn_tail) {
            rows.push_back({{"n", p.n}, {"eta", p.eta}, {"threshold", p.threshold},
                            {"freq", p.freq}, {"freq_se", p.freq_se}, {"bound", p.bound},
                            {"vacuous", p.vacuous}});
        }
        j["vn_tail"] = {{"reps", report.vn_reps}, {"points", std::move(rows)}};
    }
    if (!report.ratio_tail.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (const RatioTailPoint& p : report.ratio_tail) {
            rows.push_back({{"t", p.t}, {"freq", p.freq}, {"freq_se", p.freq_se},
                            {"bound", p.bound}, {"bound_se", p.bound_se},
                            {"vacuous", p.vacuous}});
        }
        j["ratio_tail"] = {{"reps", report.ratio_reps}, {"n", report.ratio_n},
                           {"points", std::move(rows)}};
    }
    if (!report.risks.points.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (const RiskCurvePoint& p : report.risks.points) {
            rows.push_back({{"n", p.n}, {"nn_risk", p.nn_risk}, {"nn_se", p.nn_se},
                            {"nn_design_term", p.nn_design_term}, {"lin_risk", p.lin_risk},
                            {"lin_se", p.lin_se}, {"lin_excess", p.lin_excess},
                            {"lin_excess_se", p.lin_excess_se}, {"rejected", p.rejected}});
        }
        j["prop_risks"] = {{"reps", report.risks_reps},
                           {"excess_loglog_slope", report.risks.excess_loglog_slope},
                           {"points", std::move(rows)}};
    }
    if (!report.erm.points.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (const ErmPoint& p : report.erm.points) {
            rows.push_back({{"n", p.n}, {"mean_delta", p.mean_delta},
                            {"mean_regret", p.mean_regret},
                            {"select_true_freq", p.select_true_freq},
                            {"samplewise_violations", p.samplewise_violations}});
        }
        j["erm"] = {{"reps", report.erm_reps}, {"coeff_grid", report.erm.coeff_grid},
                    {"points", std::move(rows)}};
    }
    return j;
}

} // namespace trajcast
