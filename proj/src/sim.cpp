#include "trajcast/sim.hpp"

#include "trajcast/errors.hpp"
#include "trajcast/io.hpp"
#include "trajcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace trajcast {

std::string to_string(ProcessKind kind) {
    switch (kind) {
    case ProcessKind::gaussian_random_walk: return "gaussian_random_walk";
    case ProcessKind::heteroskedastic_martingale: return "heteroskedastic_martingale";
    case ProcessKind::structured_seasonal: return "structured_seasonal";
    }
    throw Error("unknown ProcessKind");
}

ProcessKind process_kind_from_string(const std::string& name) {
    if (name == "gaussian_random_walk" || name == "grw") {
        return ProcessKind::gaussian_random_walk;
    }
    if (name == "heteroskedastic_martingale" || name == "garch") {
        return ProcessKind::heteroskedastic_martingale;
    }
    if (name == "structured_seasonal" || name == "structured") {
        return ProcessKind::structured_seasonal;
    }
    throw ConfigError("unknown process kind: " + name);
}

double ProcessModel::effective_v_max() const {
    return v_max < 0.0 ? 25.0 * sigma * sigma : v_max;
}

void ProcessModel::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw ConfigError("invalid model: sigma must be finite and >= 0");
    }
    if (!std::isfinite(x0)) {
        throw ConfigError("invalid model: x0 must be finite");
    }
    if (kind == ProcessKind::heteroskedastic_martingale) {
        if (!vol) {
            throw ConfigError("invalid model: heteroskedastic kind needs vol params");
        }
        if (!(vol->omega > 0.0)) {
            throw ConfigError("invalid model: omega must be > 0");
        }
        if (vol->alpha < 0.0 || vol->beta < 0.0) {
            throw ConfigError("invalid model: alpha and beta must be >= 0");
        }
        if (!(vol->alpha + vol->beta < 1.0)) {
            throw ConfigError("invalid model: alpha + beta must be < 1");
        }
    }
    if (kind == ProcessKind::structured_seasonal) {
        if (!structure) {
            throw ConfigError("invalid model: structured kind needs structure params");
        }
        if (structure->period < 1) {
            throw ConfigError("invalid model: period must be >= 1");
        }
    }
}

double structured_level(const ProcessModel& model, long u) {
    const StructureParams& s = *model.structure;
    const double phase =
        2.0 * std::numbers::pi_v<double> * static_cast<double>(u) / static_cast<double>(s.period);
    return model.x0 + s.trend * static_cast<double>(u) + s.amplitude * std::sin(phase);
}

Path simulate_path(const ProcessModel& model, long T, std::uint64_t seed) {
    if (T < 2) {
        throw InvalidInputError("invalid length: T must be >= 2");
    }
    model.validate();

    Path path;
    path.model = model;
    path.seed = seed;
    const auto steps = static_cast<std::size_t>(T - 1);
    path.values.resize(static_cast<std::size_t>(T));
    path.innovations.resize(steps);
    path.conditional_means.resize(steps);

    RngStream rng(seed, 0);

    switch (model.kind) {
    case ProcessKind::gaussian_random_walk: {
        path.values[0] = model.x0;
        for (std::size_t t = 0; t < steps; ++t) {
            const double x = path.values[t];
            const double eps = model.sigma * rng.normal();
            const double next = x + eps;
            path.values[t + 1] = next;
            path.conditional_means[t] = x;
            // Realized increment, so the decomposition is exact in doubles.
            path.innovations[t] = next - x;
        }
        break;
    }
    case ProcessKind::heteroskedastic_martingale: {
        const VolParams& vp = *model.vol;
        const double cap = model.effective_v_max();
        path.cond_variances.resize(steps);
        path.values[0] = model.x0;
        // Start the recursion at its stationary point; omega > 0 keeps it positive.
        double v = vp.omega / (1.0 - vp.alpha - vp.beta);
        for (std::size_t t = 0; t < steps; ++t) {
            const double x = path.values[t];
            const double sampling_var = std::min(v, cap);
            const double eps = std::sqrt(sampling_var) * rng.normal();
            const double next = x + eps;
            path.values[t + 1] = next;
            path.conditional_means[t] = x;
            path.innovations[t] = next - x;
            path.cond_variances[t] = v;
            v = vp.omega + vp.alpha * path.innovations[t] * path.innovations[t] + vp.beta * v;
        }
        break;
    }
    case ProcessKind::structured_seasonal: {
        path.values[0] = structured_level(model, 0);
        for (std::size_t t = 0; t < steps; ++t) {
            const double m = structured_level(model, static_cast<long>(t) + 1);
            const double eps = model.sigma * rng.normal();
            const double next = m + eps;
            path.values[t + 1] = next;
            path.conditional_means[t] = m;
            path.innovations[t] = next - m;
        }
        break;
    }
    }
    return path;
}

Path path_to_returns(const Path& path) {
    if (path.values.size() < 2) {
        throw InvalidInputError("invalid length: need at least 2 values for returns");
    }
    const std::size_t T = path.values.size();
    Path out;
    out.model = path.model;
    out.seed = path.seed;
    out.returns_view = true;
    out.values.resize(T - 1);
    for (std::size_t t = 0; t + 1 < T; ++t) {
        out.values[t] = path.values[t + 1] - path.values[t];
    }
    if (path.has_innovations() && T >= 3) {
        out.innovations.resize(T - 2);
        out.conditional_means.resize(T - 2);
        for (std::size_t s = 0; s + 2 < T; ++s) {
            out.conditional_means[s] = path.conditional_means[s + 1] - path.values[s + 1];
            out.innovations[s] = path.innovations[s + 1];
        }
    }
    return out;
}

namespace {

void append_model_header(std::ostringstream& os, const Path& path) {
    const ProcessModel& m = path.model;
    os << "# trajcast path v1"
       << " kind=" << to_string(m.kind)
       << " x0=" << format_double(m.x0)
       << " sigma=" << format_double(m.sigma);
    if (m.vol) {
        os << " omega=" << format_double(m.vol->omega)
           << " alpha=" << format_double(m.vol->alpha)
           << " beta=" << format_double(m.vol->beta)
           << " v_max=" << format_double(m.effective_v_max());
    }
    if (m.structure) {
        os << " amplitude=" << format_double(m.structure->amplitude)
           << " period=" << m.structure->period
           << " trend=" << format_double(m.structure->trend);
    }
    os << " seed=" << path.seed
       << " T=" << path.values.size()
       << " returns=" << (path.returns_view ? 1 : 0)
       << "\n";
}

} // namespace

std::string path_to_csv(const Path& path) {
    std::ostringstream os;
    append_model_header(os, path);
    const bool has_var = !path.cond_variances.empty();
    os << "t,value,innovation,conditional_mean";
    if (has_var) {
        os << ",conditional_variance";
    }
    os << "\n";
    for (std::size_t t = 0; t < path.values.size(); ++t) {
        os << t << ',' << format_double(path.values[t]) << ',';
        if (t >= 1 && t - 1 < path.innovations.size()) {
            os << format_double(path.innovations[t - 1]);
        }
        os << ',';
        if (t >= 1 && t - 1 < path.conditional_means.size()) {
            os << format_double(path.conditional_means[t - 1]);
        }
        if (has_var) {
            os << ',';
            if (t >= 1 && t - 1 < path.cond_variances.size()) {
                os << format_double(path.cond_variances[t - 1]);
            }
        }
        os << "\n";
    }
    return os.str();
}

namespace {

std::string header_field(const std::string& header, const std::string& key) {
    const std::string token = " " + key + "=";
    const std::size_t pos = header.find(token);
    if (pos == std::string::npos) {
        return {};
    }
    const std::size_t start = pos + token.size();
    std::size_t end = header.find(' ', start);
    if (end == std::string::npos) {
        end = header.size();
    }
    return header.substr(start, end - start);
}

} // namespace

Path path_from_csv(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# trajcast path", 0) != 0) {
        throw IngestError("not a trajcast path CSV (missing header comment)");
    }
    Path path;
    ProcessModel& m = path.model;
    m.kind = process_kind_from_string(header_field(line, "kind"));
    m.x0 = parse_double(header_field(line, "x0"));
    m.sigma = parse_double(header_field(line, "sigma"));
    const std::string omega = header_field(line, "omega");
    if (!omega.empty()) {
        m.vol = VolParams{parse_double(omega), parse_double(header_field(line, "alpha")),
                          parse_double(header_field(line, "beta"))};
        m.v_max = parse_double(header_field(line, "v_max"));
    }
    const std::string amplitude = header_field(line, "amplitude");
    if (!amplitude.empty()) {
        m.structure = StructureParams{parse_double(amplitude),
                                      static_cast<long>(parse_double(header_field(line, "period"))),
                                      parse_double(header_field(line, "trend"))};
    }
    path.seed = static_cast<std::uint64_t>(std::stoull(header_field(line, "seed")));
    path.returns_view = header_field(line, "returns") == "1";

    if (!std::getline(in, line)) {
        throw IngestError("path CSV truncated before column header");
    }
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() < 4) {
            throw IngestError("path CSV row " + std::to_string(row) + " has too few columns");
        }
        path.values.push_back(parse_double(cells[1]));
        if (row >= 1) {
            if (!cells[2].empty()) path.innovations.push_back(parse_double(cells[2]));
            if (!cells[3].empty()) path.conditional_means.push_back(parse_double(cells[3]));
            if (cells.size() >= 5 && !cells[4].empty()) {
                path.cond_variances.push_back(parse_double(cells[4]));
            }
        }
        ++row;
    }
    if (path.values.size() < 2) {
        throw InsufficientDataError("path CSV holds fewer than 2 values");
    }
    return path;
}

void save_path_csv(const Path& path, const std::filesystem::path& file) {
    write_file(file, path_to_csv(path));
}

Path load_path_csv(const std::filesystem::path& file) {
    return path_from_csv(read_file(file));
}

} // namespace trajcast
