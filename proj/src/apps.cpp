#include "apps.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>

namespace wta {

namespace {

GrayImage binarize_direct(const GrayImage& img, std::uint8_t threshold)
{
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        out.pixels[i] = img.pixels[i] >= threshold ? 255 : 0;
    return out;
}

GrayImage binarize_circuit(const GrayImage& img, std::uint8_t threshold, const NetworkConfig& cfg)
{
    NetworkConfig pair = cfg;
    pair.k_cells = 2;
    pair.cell_devices.clear();
    pair.feedback_enabled = false;
    pair.dual_rail = false;
    pair.delta_winners = 1;
    const double lsb = cfg.vdd / 255.0;
    const double s = slope_voltage(cfg.device);
    // Pixel share of I_c at a gap of -lsb/2: the decision point sits between
    // "equal" (share 1/2) and "one step below".
    const double share = 1.0 / (1.0 + std::exp(0.5 * lsb / s));
    pair.i_m = {cfg.device.mirror_gain * cfg.i_c * share};
    validate(pair);

    GrayImage out(img.width, img.height);
    const double v_threshold = threshold * lsb;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const CellState cells[2] = {{img.pixels[i] * lsb, false}, {v_threshold, false}};
        out.pixels[i] = solve_dc(cells, pair).op.is_winner(0) ? 255 : 0;
    }
    return out;
}

} // namespace

GrayImage binarize_image(const GrayImage& img, std::uint8_t threshold, const NetworkConfig& cfg, BinarizePath path)
{
    if (img.pixels.size() != img.width * img.height)
        throw ParseError("binarize_image: pixel count does not match width x height");
    return path == BinarizePath::Direct ? binarize_direct(img, threshold) : binarize_circuit(img, threshold, cfg);
}

void validate(const ActivationTable& t)
{
    if (t.n_classes < 2)
        throw ConfigError("activation table needs at least 2 classes");
    if (t.n_samples < 1)
        throw ConfigError("activation table has no samples");
    if (t.scores.size() != t.n_samples * t.n_classes)
        throw ConfigError("activation table score count does not match samples x classes");
    if (!(t.sample_period > 0))
        throw ConfigError("sample period must be > 0");
    for (double s : t.scores)
        if (!(s >= 0.0 && s <= 1.0))
            throw ConfigError("activation scores must lie in [0, 1]");
    if (!t.labels.empty()) {
        if (t.labels.size() != t.n_samples)
            throw ConfigError("label count does not match sample count");
        for (std::size_t l : t.labels)
            if (l >= t.n_classes)
                throw ConfigError("label " + std::to_string(l) + " >= class count");
    }
}

ActivationTable parse_activations(const CsvTable& csv, double sample_period, const std::string& source)
{
    ActivationTable t;
    t.sample_period = sample_period;
    std::size_t k = 0;
    while (k < csv.header.size() && csv.header[k] == "score_" + std::to_string(k))
        ++k;
    const bool has_label = k + 1 == csv.header.size() && csv.header[k] == "label";
    if (k != csv.header.size() && !has_label)
        throw ParseError(source + ": header must be score_0..score_{k-1}[,label]");
    t.n_classes = k;
    t.n_samples = csv.rows.size();
    t.scores.reserve(t.n_samples * k);
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const std::string where = source + ": row " + std::to_string(r + 1);
        for (std::size_t c = 0; c < k; ++c)
            t.scores.push_back(parse_number(csv.rows[r][c], where));
        if (has_label) {
            const double l = parse_number(csv.rows[r][k], where);
            if (l < 0 || l != std::floor(l))
                throw ParseError(where + ": label must be a non-negative integer");
            t.labels.push_back(static_cast<std::size_t>(l));
        }
    }
    validate(t);
    return t;
}

ActivationTable load_activations(const std::string& path, double sample_period)
{
    return parse_activations(read_csv(path), sample_period, path);
}

ClassificationResult classify_trace(const ActivationTable& table, const NetworkConfig& cfg,
                                    const TransientConfig& tcfg, const ClassifySettings& settings)
{
    validate(table);
    validate(cfg);
    if (table.n_classes != cfg.k_cells)
        throw ConfigError("classify: table has " + std::to_string(table.n_classes) + " classes, network has "
                          + std::to_string(cfg.k_cells) + " cells");
    if (!(settings.ramp_fraction > 0 && settings.ramp_fraction < 1))
        throw ConfigError("classify.ramp_fraction must be in (0, 1)");

    const std::size_t k = table.n_classes;
    const std::size_t n = table.n_samples;
    const double period = table.sample_period;
    const double ramp = settings.ramp_fraction * period;

    ClassificationResult result;
    result.resolution = settings.resolution.value_or(
        kwta_resolution_bound(k, 1, reference_currents(cfg).front(), cfg.i_c, cfg.device));

    std::vector<Stimulus> stimuli;
    stimuli.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
        PiecewiseLinear w;
        w.points.reserve(2 * n);
        for (std::size_t j = 0; j < n; ++j) {
            const double v = table.score(j, c) * cfg.vdd;
            const double start = j == 0 ? 0.0 : static_cast<double>(j) * period + ramp;
            w.points.emplace_back(start, v);
            w.points.emplace_back(static_cast<double>(j + 1) * period, v);
        }
        stimuli.emplace_back(std::move(w));
    }

    TransientConfig t = tcfg;
    t.t_end = static_cast<double>(n) * period;
    RecordOptions record;
    record.stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(1e-9 / t.t_step)));
    const std::vector<CellState> cells(k);
    const TransientTrace trace = run_transient(cells, cfg, stimuli, t, record);
    const double spacing = static_cast<double>(record.stride) * t.t_step;

    std::size_t correct = 0;
    const double half = 0.5 * cfg.vdd;
    for (std::size_t j = 0; j < n; ++j) {
        const double t_mid = static_cast<double>(j) * period + 0.5 * (period + ramp);
        const auto idx = std::min(trace.time.size() - 1, static_cast<std::size_t>(std::llround(t_mid / spacing)));
        long winner = -1;
        for (std::size_t c = 0; c < k; ++c) {
            if (trace.outputs[c][idx] > half)
                winner = winner == -1 ? static_cast<long>(c) : -2;
        }
        if (winner == -2)
            winner = -1;
        result.winners.push_back(winner);

        std::vector<double> row(k);
        for (std::size_t c = 0; c < k; ++c)
            row[c] = table.score(j, c);
        std::partial_sort(row.begin(), row.begin() + 2, row.end(), std::greater<>());
        const double margin = (row[0] - row[1]) * cfg.vdd;
        result.margins.push_back(margin);
        result.ambiguous.push_back(margin < result.resolution);
        if (!table.labels.empty() && winner == static_cast<long>(table.labels[j]))
            ++correct;
    }
    if (!table.labels.empty())
        result.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    return result;
}

void write_classification_csv(const ClassificationResult& r, const ActivationTable& table, const std::string& path)
{
    const std::vector<std::string> header{"sample", "winner", "label", "ambiguous", "margin_V"};
    CsvWriter w(path, header);
    for (std::size_t j = 0; j < r.winners.size(); ++j) {
        const std::vector<std::string> fields{std::to_string(j), std::to_string(r.winners[j]),
                                              table.labels.empty() ? "" : std::to_string(table.labels[j]),
                                              r.ambiguous[j] ? "1" : "0", format_number(r.margins[j])};
        w.row(fields);
    }
    w.close();
}

} // namespace wta
