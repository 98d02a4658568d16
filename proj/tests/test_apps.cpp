#include <doctest.h>

#include "apps.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "errors.hpp"
#include "pgm.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

using namespace wta;

namespace oracle {
// Hand-written P2 with comments, tabs and CRLF; raster as decoded by Pillow 10.
constexpr std::string_view p2_text = "P2\n# created by hand\n 4   3\n# maxval next\n255\n 0 10\t20 30\n\n40   50 60 70\r\n"
                                     " 80 90 200 255\n";
const std::vector<std::uint8_t> p2_pixels{0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 200, 255};
} // namespace oracle

namespace {

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("wta_test_apps_" + name)).string();
}

GrayImage random_image(std::size_t w, std::size_t h, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> d(0, 255);
    GrayImage img(w, h);
    for (auto& p : img.pixels)
        p = static_cast<std::uint8_t>(d(rng));
    return img;
}

ActivationTable one_hot(std::size_t samples, std::size_t classes, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    ActivationTable t;
    t.n_samples = samples;
    t.n_classes = classes;
    t.scores.assign(samples * classes, 0.05);
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t label = rng() % classes;
        t.scores[s * classes + label] = 0.9;
        t.labels.push_back(label);
    }
    return t;
}

} // namespace

TEST_CASE("binarization examples")
{
    GrayImage img(4, 1);
    img.pixels = {0, 127, 128, 255};
    const NetworkConfig cfg;
    const std::vector<std::uint8_t> expected{0, 0, 255, 255};
    CHECK(binarize_image(img, 128, cfg, BinarizePath::Direct).pixels == expected);
    CHECK(binarize_image(img, 128, cfg, BinarizePath::Circuit).pixels == expected);
    CHECK(binarize_image(img, 0, cfg).pixels == std::vector<std::uint8_t>(4, 255));
    CHECK(binarize_image(img, 255, cfg).pixels == std::vector<std::uint8_t>{0, 0, 0, 255});
}

TEST_CASE("circuit binarization equals the threshold rule for every pixel value")
{
    GrayImage ramp(256, 1);
    for (std::size_t i = 0; i < 256; ++i)
        ramp.pixels[i] = static_cast<std::uint8_t>(i);
    const NetworkConfig cfg;
    for (int t : {0, 1, 17, 127, 128, 200, 254, 255}) {
        const auto thr = static_cast<std::uint8_t>(t);
        CHECK(binarize_image(ramp, thr, cfg) == binarize_image(ramp, thr, cfg, BinarizePath::Direct));
    }
    const GrayImage img = random_image(32, 16, 3);
    const GrayImage out = binarize_image(img, 90, cfg);
    CHECK(out.width == 32);
    CHECK(out.height == 16);
    for (auto p : out.pixels)
        CHECK((p == 0 || p == 255));
}

TEST_CASE("PGM decoding")
{
    const GrayImage img = parse_pgm(oracle::p2_text);
    CHECK(img.width == 4);
    CHECK(img.height == 3);
    CHECK(img.pixels == oracle::p2_pixels);

    const GrayImage rnd = random_image(13, 7, 11);
    CHECK(parse_pgm(encode_pgm(rnd, PgmFormat::Binary)) == rnd);
    CHECK(parse_pgm(encode_pgm(rnd, PgmFormat::Ascii)) == rnd);

    const std::string path = temp_path("round.pgm");
    save_pgm(rnd, path);
    CHECK(load_pgm(path) == rnd);
    std::filesystem::remove(path);
}

TEST_CASE("PGM errors")
{
    CHECK_THROWS_AS(parse_pgm("P6\n1 1\n255\n\0\0\0"), ParseError);
    CHECK_THROWS_AS(parse_pgm("P2\n2 2\n65535\n0 0 0 0\n"), UnsupportedFormatError);
    CHECK_THROWS_AS(parse_pgm("P2\n2 2\n255\n0 0 0\n"), ParseError);
    CHECK_THROWS_AS(parse_pgm("P5\n2 2\n255\nab"), ParseError);
    CHECK_THROWS_AS(parse_pgm("P2\n2 1\n255\n0 300\n"), ParseError);
    CHECK_THROWS_AS(parse_pgm("P2\n0 1\n255\n"), ParseError);
    CHECK_THROWS_AS(load_pgm(temp_path("missing.pgm")), IoError);
}

TEST_CASE("activation table parsing")
{
    const CsvTable csv = parse_csv("score_0,score_1,label\n0.1,0.9,1\n0.7,0.2,0\n");
    const ActivationTable t = parse_activations(csv, 50e-9, "t");
    CHECK(t.n_samples == 2);
    CHECK(t.n_classes == 2);
    CHECK(t.score(1, 0) == 0.7);
    CHECK(t.labels == std::vector<std::size_t>{1, 0});
    CHECK(t.sample_period == 50e-9);

    CHECK(parse_activations(parse_csv("score_0,score_1\n0.1,0.2\n"), 1e-7, "t").labels.empty());
    CHECK_THROWS_AS(parse_activations(parse_csv("a,b\n0.1,0.2\n"), 1e-7, "t"), ParseError);
    CHECK_THROWS_AS(parse_activations(parse_csv("score_0,score_1,label\n0.1,0.2,x\n"), 1e-7, "t"), ParseError);
    CHECK_THROWS_AS(parse_activations(parse_csv("score_0,score_1,label\n0.1,0.2,-1\n"), 1e-7, "t"), ParseError);
    CHECK_THROWS_AS(parse_activations(parse_csv("score_0,score_1\n0.1,1.5\n"), 1e-7, "t"), ConfigError);
    CHECK_THROWS_AS(parse_activations(parse_csv("score_0,score_1,label\n0.1,0.2,2\n"), 1e-7, "t"), ConfigError);
    CHECK_THROWS_AS(parse_activations(parse_csv("score_0\n0.1\n"), 1e-7, "t"), ConfigError);
    CHECK_THROWS_AS(parse_activations(parse_csv("score_0,score_1\n"), 1e-7, "t"), ConfigError);
}

TEST_CASE("classification of well-separated scores")
{
    NetworkConfig cfg;
    cfg.k_cells = 4;
    const ActivationTable t = one_hot(12, 4, 5);
    const ClassificationResult r = classify_trace(t, cfg, TransientConfig{});
    REQUIRE(r.winners.size() == 12);
    for (std::size_t s = 0; s < 12; ++s) {
        CHECK(r.winners[s] == static_cast<long>(t.labels[s]));
        CHECK_FALSE(r.ambiguous[s]);
        CHECK(r.margins[s] == doctest::Approx(0.85 * 1.2));
    }
    REQUIRE(r.accuracy);
    CHECK(*r.accuracy == 1.0);
    CHECK(r.resolution > 0);

    const std::string path = temp_path("classes.csv");
    write_classification_csv(r, t, path);
    const CsvTable back = read_csv(path);
    CHECK(back.header == std::vector<std::string>{"sample", "winner", "label", "ambiguous", "margin_V"});
    CHECK(back.rows.size() == 12);
    std::filesystem::remove(path);
}

TEST_CASE("sub-resolution margins are flagged")
{
    NetworkConfig cfg;
    cfg.i_m = {0.5257e-6};
    ActivationTable t;
    t.n_samples = 3;
    t.n_classes = 2;
    // 1 mV gap under the ~4 mV resolution, then clear separations.
    t.scores = {0.5, 0.5 + 1e-3 / 1.2, 0.2, 0.8, 0.9, 0.1};
    const ClassificationResult r = classify_trace(t, cfg, TransientConfig{});
    CHECK(r.resolution == doctest::Approx(0.003989894559935005).epsilon(1e-6));
    CHECK(r.ambiguous == std::vector<bool>{true, false, false});
    CHECK(r.margins[0] == doctest::Approx(1e-3).epsilon(1e-9));
    CHECK(r.winners[1] == 1);
    CHECK(r.winners[2] == 0);
    CHECK_FALSE(r.accuracy);

    ClassifySettings coarse;
    coarse.resolution = 0.9;
    CHECK(classify_trace(t, cfg, TransientConfig{}, coarse).ambiguous == std::vector<bool>{true, true, false});

    NetworkConfig three = cfg;
    three.k_cells = 3;
    CHECK_THROWS_AS(classify_trace(t, three, TransientConfig{}), ConfigError);
    coarse.ramp_fraction = 1.0;
    CHECK_THROWS_AS(classify_trace(t, cfg, TransientConfig{}, coarse), ConfigError);
}

TEST_CASE("config defaults and parsing")
{
    CHECK(parse_config("") == default_config());
    CHECK(parse_config("; nothing here\n# nor here\n") == default_config());

    const SimConfig c = parse_config("[network]\nk_cells = 10 ; ten cells\ncluster_size = 5\ni_m = 0.5e-6, 0.6e-6\nfeedback = yes\n"
                                     "[device]\nn_slope = 1.3 # comment\n[sizes]\nmf = 35/350\n");
    CHECK(c.network.k_cells == 10);
    CHECK(c.network.i_m == std::vector<double>{0.5e-6, 0.6e-6});
    CHECK(c.network.feedback_enabled);
    CHECK(c.network.device.n_slope == 1.3);
    CHECK(c.network.sizes.mf.width_nm == 35);
    CHECK(c.network.sizes.mf.length_nm == 350);

    CHECK_THROWS_WITH_AS(parse_config("[network]\ni_c = -1\n"), doctest::Contains("network.i_c"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("[network]\nbogus = 1\n"), doctest::Contains("network.bogus"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("[nowhere]\nx = 1\n"), doctest::Contains("nowhere"), ConfigError);
    CHECK_THROWS_AS(parse_config("k_cells = 3\n"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("[network]\nfeedback = maybe\n"), doctest::Contains("network.feedback"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("[network]\nvdd = abc\n"), doctest::Contains("network.vdd"), ConfigError);
    CHECK_THROWS_AS(load_config(temp_path("missing.ini")), IoError);
}

TEST_CASE("config text round trip")
{
    SimConfig c = default_config();
    set_config_value(c, "network.k_cells", "7");
    set_config_value(c, "device.temperature", "310.5");
    set_config_value(c, "corners.processes", "TT, FF");
    set_config_value(c, "monte-carlo.seed", "99");
    set_config_value(c, "classify.resolution", "0.004");
    const std::string text = to_config_text(c);
    const SimConfig back = parse_config(text);
    CHECK(back == c);
    CHECK(to_config_text(back) == text);
    CHECK(get_config_value(back, "network.k_cells") == "7");
    CHECK(get_config_value(back, "classify.resolution") == "0.004");
    CHECK(get_config_value(default_config(), "classify.resolution") == "auto");
    CHECK_THROWS_AS(get_config_value(c, "network.nope"), ConfigError);
    CHECK_THROWS_AS(set_config_value(c, "nope", "1"), ConfigError);
    for (const auto& key : config_keys())
        CHECK_NOTHROW(get_config_value(c, key));
}

TEST_CASE("config path resolution")
{
    const std::string path = temp_path("env.ini");
    {
        std::ofstream out(path);
        out << "[network]\nk_cells = 5\n";
    }
    ::setenv("WTA_CONFIG", path.c_str(), 1);
    CHECK(resolve_config_path("") == path);
    CHECK(resolve_config_path("explicit.ini") == "explicit.ini");
    CHECK(load_config(resolve_config_path("")).network.k_cells == 5);
    ::unsetenv("WTA_CONFIG");
    CHECK(resolve_config_path("").empty());
    std::filesystem::remove(path);
}

TEST_CASE("CSV numbers")
{
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> d(-1e-3, 1e-3);
    for (int i = 0; i < 200; ++i) {
        const double v = d(rng);
        CHECK(parse_number(format_number(v), "v") == doctest::Approx(v).epsilon(1e-11));
    }
    CHECK_THROWS_AS(parse_number("1.5x", "v"), ParseError);
    CHECK_THROWS_AS(parse_number("", "v"), ParseError);
    CHECK_THROWS_WITH_AS(parse_number("abc", "row 3"), doctest::Contains("row 3"), ParseError);

    const CsvTable t = parse_csv("a,b\n1,2\n3,4\n");
    CHECK(t.column("b") == 1u);
    CHECK_THROWS_AS(t.column("c"), ParseError);
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), ParseError);
}
