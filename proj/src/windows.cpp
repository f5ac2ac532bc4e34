#include "trajcast/windows.hpp"

#include "trajcast/errors.hpp"
#include "trajcast/io.hpp"

#include <cmath>
#include <sstream>

namespace trajcast {

Dataset make_windows(std::span<const double> values, int L, int H, int stride) {
    if (L < 1 || H < 1 || stride < 1) {
        throw ConfigError("make_windows: L, H, stride must all be >= 1");
    }
    const long T = static_cast<long>(values.size());
    if (T < L + H) {
        throw InsufficientDataError("make_windows: path of length " + std::to_string(T) +
                                    " is shorter than L + H = " + std::to_string(L + H));
    }
    Dataset ds;
    ds.L = L;
    ds.H = H;
    ds.stride = stride;
    for (long t = L - 1; t + H < T; t += stride) {
        WindowPair pair;
        pair.t = t;
        pair.input.assign(values.begin() + (t - L + 1), values.begin() + t + 1);
        pair.target.assign(values.begin() + t + 1, values.begin() + t + 1 + H);
        ds.pairs.push_back(std::move(pair));
    }
    return ds;
}

Dataset make_windows(const Path& path, int L, int H, int stride) {
    return make_windows(std::span<const double>(path.values), L, H, stride);
}

SplitDataset chrono_split(const Dataset& dataset, const std::array<double, 3>& fractions) {
    if (dataset.empty()) {
        throw InsufficientDataError("chrono_split: empty dataset");
    }
    double sum = 0.0;
    for (double f : fractions) {
        if (!(f > 0.0)) {
            throw ConfigError("chrono_split: fractions must be strictly positive");
        }
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("chrono_split: fractions must sum to 1");
    }

    const auto n = static_cast<double>(dataset.size());
    const auto n_train = static_cast<std::size_t>(std::floor(fractions[0] * n));
    const auto n_val = static_cast<std::size_t>(std::floor(fractions[1] * n));

    auto slice = [&](std::size_t begin, std::size_t end) {
        Dataset part;
        part.L = dataset.L;
        part.H = dataset.H;
        part.stride = dataset.stride;
        part.pairs.assign(dataset.pairs.begin() + static_cast<long>(begin),
                          dataset.pairs.begin() + static_cast<long>(end));
        return part;
    };

    SplitDataset split;
    split.fractions = fractions;
    split.train = slice(0, n_train);
    split.val = slice(n_train, n_train + n_val);
    split.test = slice(n_train + n_val, dataset.size());
    return split;
}

std::string dataset_to_csv(const Dataset& dataset) {
    std::ostringstream os;
    os << "# trajcast dataset v1 L=" << dataset.L << " H=" << dataset.H
       << " stride=" << dataset.stride << " n=" << dataset.size() << "\n";
    os << "t";
    for (int j = 0; j < dataset.L; ++j) os << ",input_" << j;
    for (int h = 0; h < dataset.H; ++h) os << ",target_" << h;
    os << "\n";
    for (const WindowPair& p : dataset.pairs) {
        os << p.t;
        for (double v : p.input) os << ',' << format_double(v);
        for (double v : p.target) os << ',' << format_double(v);
        os << "\n";
    }
    return os.str();
}

Dataset dataset_from_csv(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# trajcast dataset", 0) != 0) {
        throw IngestError("not a trajcast dataset CSV (missing header comment)");
    }
    auto field = [&](const std::string& key) {
        const std::string token = " " + key + "=";
        const std::size_t pos = line.find(token);
        if (pos == std::string::npos) {
            throw IngestError("dataset CSV header missing field " + key);
        }
        std::size_t end = line.find(' ', pos + token.size());
        if (end == std::string::npos) end = line.size();
        return std::stol(line.substr(pos + token.size(), end - pos - token.size()));
    };
    Dataset ds;
    ds.L = static_cast<int>(field("L"));
    ds.H = static_cast<int>(field("H"));
    ds.stride = static_cast<int>(field("stride"));

    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw IngestError("dataset CSV truncated before column header");
    }
    const std::size_t expected = 1 + static_cast<std::size_t>(ds.L) + static_cast<std::size_t>(ds.H);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != expected) {
            throw IngestError("dataset CSV row " + std::to_string(row) + ": expected " +
                              std::to_string(expected) + " columns, got " +
                              std::to_string(cells.size()));
        }
        WindowPair p;
        p.t = std::stol(cells[0]);
        p.input.reserve(static_cast<std::size_t>(ds.L));
        p.target.reserve(static_cast<std::size_t>(ds.H));
        for (int j = 0; j < ds.L; ++j) {
            p.input.push_back(parse_double(cells[1 + static_cast<std::size_t>(j)]));
        }
        for (int h = 0; h < ds.H; ++h) {
            p.target.push_back(
                parse_double(cells[1 + static_cast<std::size_t>(ds.L) + static_cast<std::size_t>(h)]));
        }
        ds.pairs.push_back(std::move(p));
        ++row;
    }
    return ds;
}

void save_dataset_csv(const Dataset& dataset, const std::filesystem::path& file) {
    write_file(file, dataset_to_csv(dataset));
}

Dataset load_dataset_csv(const std::filesystem::path& file) {
    return dataset_from_csv(read_file(file));
}

} // namespace trajcast
