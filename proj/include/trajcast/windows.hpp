#pragma once

#include "trajcast/sim.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace trajcast {

// One supervised pair: input covers path indices [t-L+1, t], target covers
// [t+1, t+H]. input.back() is the value at the anchor time t.
struct WindowPair {
    long t = 0;
    std::vector<double> input;
    std::vector<double> target;
};

struct Dataset {
    std::vector<WindowPair> pairs;
    int L = 0;
    int H = 0;
    int stride = 1;

    std::size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }
};

struct SplitDataset {
    Dataset train;
    Dataset val;
    Dataset test;
    std::array<double, 3> fractions{};
};

// Anchors run t = L-1, L-1+stride, ... while t+H stays inside the series.
// With stride 1 the pair count is T - L - H + 1.
Dataset make_windows(std::span<const double> values, int L, int H, int stride);
Dataset make_windows(const Path& path, int L, int H, int stride);

// Chronological split with floor-based train/val sizing and the remainder
// going to test. Fractions must be positive and sum to 1 (1e-9 slack).
SplitDataset chrono_split(const Dataset& dataset, const std::array<double, 3>& fractions);

std::string dataset_to_csv(const Dataset& dataset);
Dataset dataset_from_csv(const std::string& content);
void save_dataset_csv(const Dataset& dataset, const std::filesystem::path& file);
Dataset load_dataset_csv(const std::filesystem::path& file);

} // namespace trajcast
