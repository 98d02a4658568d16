#pragma once

#include "csv.hpp"
#include "dynamics.hpp"
#include "network.hpp"
#include "pgm.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wta {

enum class BinarizePath { Circuit, Direct };

// Pixels at or above the threshold go to 255, the rest to 0. The circuit path
// runs a two-cell network (pixel vs threshold, intensities mapped linearly onto
// [0, vdd]) with the comparator reference placed half an intensity step below
// the balance point, so ties go to the pixel.
GrayImage binarize_image(const GrayImage& img, std::uint8_t threshold, const NetworkConfig& cfg,
                         BinarizePath path = BinarizePath::Circuit);

struct ActivationTable {
    std::size_t n_samples = 0;
    std::size_t n_classes = 0;
    std::vector<double> scores;        // row-major, in [0, 1]
    std::vector<std::size_t> labels;   // empty when the table has no label column
    double sample_period = 100e-9;     // s

    double score(std::size_t sample, std::size_t cls) const { return scores[sample * n_classes + cls]; }
};

void validate(const ActivationTable& t);

// Columns score_0..score_{k-1}, optional trailing label.
ActivationTable load_activations(const std::string& path, double sample_period);
ActivationTable parse_activations(const CsvTable& csv, double sample_period, const std::string& source);

struct ClassifySettings {
    std::optional<double> resolution; // V; default: kwta_resolution_bound for the network
    double ramp_fraction = 0.1;        // share of each sample period spent ramping to the next value
    double sample_period = 100e-9;     // s, used by the CLI when the table carries none

    bool operator==(const ClassifySettings&) const = default;
};

struct ClassificationResult {
    std::vector<long> winners;       // -1 when no single output is high
    std::vector<bool> ambiguous;     // top-two margin below the resolution
    std::vector<double> margins;     // V
    std::optional<double> accuracy;  // only with labels
    double resolution = 0.0;
};

// Drives one piecewise-linear stimulus per class (plateau per sample, short
// ramp between samples) and reads the buffered outputs at plateau midpoints.
ClassificationResult classify_trace(const ActivationTable& table, const NetworkConfig& cfg,
                                    const TransientConfig& tcfg, const ClassifySettings& settings = {});

void write_classification_csv(const ClassificationResult& r, const ActivationTable& table, const std::string& path);

} // namespace wta
