#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace trajcast {

enum class ProcessKind {
    gaussian_random_walk,
    heteroskedastic_martingale,
    structured_seasonal,
};

std::string to_string(ProcessKind kind);
ProcessKind process_kind_from_string(const std::string& name);

// GARCH(1,1)-style conditional variance recursion v' = omega + alpha*e^2 + beta*v.
struct VolParams {
    double omega = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

struct StructureParams {
    double amplitude = 0.0;
    long period = 1;
    double trend = 0.0;
};

struct ProcessModel {
    ProcessKind kind = ProcessKind::gaussian_random_walk;
    double x0 = 0.0;
    double sigma = 0.0;
    std::optional<VolParams> vol;
    std::optional<StructureParams> structure;
    // Cap on the conditional innovation variance of the heteroskedastic kind.
    // Negative means "use the default", which is 25 * sigma^2.
    double v_max = -1.0;

    double effective_v_max() const;

    // Throws ConfigError when invariants are broken (sigma < 0, omega <= 0,
    // alpha + beta >= 1, period < 1, missing parameter blocks).
    void validate() const;
};

// One realized trajectory. For simulated paths the bookkeeping sequences make
// the construction auditable step by step:
//   values[t+1] == conditional_means[t] + innovations[t]      (as doubles)
//   values[t+1] - values[t] == innovations[t]                 (martingale kinds)
// Innovations are recorded as the realized double-precision increments, which
// is what makes both identities hold bitwise rather than approximately.
struct Path {
    std::vector<double> values;
    std::vector<double> innovations;       // size T-1 when present
    std::vector<double> conditional_means; // size T-1 when present
    std::vector<double> cond_variances;    // heteroskedastic kind only, size T-1
    std::uint64_t seed = 0;
    ProcessModel model;
    bool returns_view = false;

    std::size_t size() const { return values.size(); }
    bool has_innovations() const { return !innovations.empty(); }
};

// Deterministic level of the structured kind at integer time u:
//   x0 + trend*u + amplitude*sin(2*pi*u / period)
double structured_level(const ProcessModel& model, long u);

// Simulates T steps of the model; pure function of (model, T, seed).
Path simulate_path(const ProcessModel& model, long T, std::uint64_t seed);

// First differences, with conditional means / innovations re-derived from the
// source path's bookkeeping. Returns of a martingale path equal its recorded
// innovations exactly.
Path path_to_returns(const Path& path);

std::string path_to_csv(const Path& path);
Path path_from_csv(const std::string& content);
void save_path_csv(const Path& path, const std::filesystem::path& file);
Path load_path_csv(const std::filesystem::path& file);

} // namespace trajcast
