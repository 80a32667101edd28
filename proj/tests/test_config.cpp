#include "doctest.h"

#include "volterra/config.hpp"
#include "volterra/errors.hpp"
#include "volterra/experiments.hpp"

#include <sstream>

using namespace volterra;

namespace {

ExperimentConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

const char* kSample = R"(# trace-class weak study
[kernel]
variant = riesz
rho = 1.5

[domain]
length = 2.0
horizon = 1.0
initial = 1.0, 0, -0.5   # sine coefficients

[noise]
model = inverse_power
alpha = 1
truncation = 64

[ladder]
kind = time
steps = 16, 32, 64
elements = 128

[estimator]
kind = monte_carlo
paths = 500
functional = linear_sq
functional_mode = 2
seed = 18446744073709551615
reference_factor = 8

[output]
path = out.csv
drop_coarse = 1
)";

} // namespace

TEST_CASE("parse a complete config") {
    const auto c = parse(kSample);
    CHECK(c.variant == KernelVariant::riesz);
    CHECK(c.rho == 1.5);
    CHECK(c.length == 2.0);
    CHECK(c.initial == std::vector<double>{1.0, 0.0, -0.5});
    CHECK(c.noise == NoiseModel::inverse_power);
    CHECK(c.alpha == 1.0);
    CHECK(c.truncation == 64);
    CHECK(c.steps == std::vector<std::size_t>{16, 32, 64});
    CHECK(c.elements == std::vector<std::size_t>{128});
    CHECK(c.estimator == EstimatorKind::monte_carlo);
    CHECK(c.paths == 500);
    CHECK(c.functional == Functional::linear_sq);
    CHECK(c.functional_mode == 2);
    CHECK(c.seed == 18446744073709551615ull);
    CHECK(c.reference_factor == 8);
    CHECK(c.output == "out.csv");
    CHECK(c.drop_coarse == 1);
    CHECK_NOTHROW(c.validate());
    CHECK(c.covariance(64).truncation() == 64);
    CHECK(c.noise_modes(127) == 64);
}

TEST_CASE("canonical text round trip") {
    const auto c = parse(kSample);
    const auto again = parse(to_text(c));
    CHECK(to_text(again) == to_text(c));
    CHECK(config_hash(again) == config_hash(c));
    auto changed = c;
    changed.seed = 1;
    CHECK(config_hash(changed) != config_hash(c));
    for (const auto& [name, preset_config] : presets()) {
        CAPTURE(name);
        CHECK_NOTHROW(preset_config.validate());
        CHECK(to_text(parse(to_text(preset_config))) == to_text(preset_config));
    }
}

TEST_CASE("syntax errors") {
    CHECK_THROWS_AS(parse("[kernel]\nrhoo = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse("[kernels]\nrho = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse("rho = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse("[kernel]\nrho 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse("[kernel]\nrho = 1.5x\n"), ConfigError);
    CHECK_THROWS_AS(parse("[kernel]\nrho = 1.5\nrho = 1.6\n"), ConfigError);
    CHECK_THROWS_AS(parse("[kernel\nrho = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse("[ladder]\nsteps = 8, -16\n"), ConfigError);
    CHECK_THROWS_AS(parse("[noise]\nmodel = pink\n"), ConfigError);
    CHECK_THROWS_AS(parse("[domain]\nhorizon = nan\n"), ConfigError);
    try {
        parse("[kernel]\nrho = 1.5\n[noise]\nalpah = 1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
        CHECK(std::string(e.what()).find("noise.alpah") != std::string::npos);
    }
}

TEST_CASE("semantic validation") {
    auto base = parse(kSample);
    auto c = base;
    c.rho = 2.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = base;
    c.steps = {32, 16};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = base;
    c.steps = {16};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = base;
    c.drop_coarse = 2;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = base;
    c.reference_factor = 3;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = base;
    c.noise = NoiseModel::custom;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = base;
    c.steps = {1, 2};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = base;
    c.elements = {1};
    CHECK_THROWS_AS(c.validate(), ConfigError);
}
