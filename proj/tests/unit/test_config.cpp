#include <doctest.h>

#include "config.hpp"

#include <filesystem>
#include <string>

using namespace pcb;

namespace {

std::string message(const std::string& text)
{
    try {
        parse_config_text(text, "");
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_SUITE("config")
{
    TEST_CASE("minimal config takes defaults")
    {
        RunConfig c = parse_config_text(R"({"schema_version": 1})", "");
        CHECK(c.dimension == 1);
        CHECK(c.k0 == 1.0);
        CHECK(c.source.theta == 1.0);
        CHECK(c.source.coherence == CoherenceKind::gaussian);
        CHECK(c.scaling.regime == RegimeKind::kinetic);
        CHECK(c.scaling.epsilon == 0.05);
        CHECK_FALSE(c.has_experiment);
        CHECK_FALSE(c.has_analytic);
        CHECK(c.validate_suite == "analytic");
    }

    TEST_CASE("range errors name the field")
    {
        CHECK(message(R"({"schema_version": 1, "source": {"theta": 1.5}})") == "theta must lie in (0,1]");
        CHECK(message(R"({"schema_version": 1, "scaling": {"regime": "diffusive", "epsilon": 0.1}})")
                  .find("e^{-e}") != std::string::npos);
        CHECK(message(R"({"schema_version": 1, "source": {"colour": "red"}})") == "unknown key 'source.colour'");
        CHECK(message(R"({"schema_version": 1, "colour": 1})") == "unknown key 'colour'");
        CHECK(message(R"({"dimension": 1})") == "missing key 'schema_version'");
        CHECK(message(R"({"schema_version": 2})").find("version 1") != std::string::npos);
        CHECK(message(R"({"schema_version": 1, "dimension": 3})") == "dimension: must be 1 or 2");
        CHECK(message("{") .find("not valid JSON") != std::string::npos);
        CHECK(message(R"({"schema_version": 1, "grid": {"n": 8, "dx": 1}})").find("experiment") != std::string::npos);
        CHECK(message(R"({"schema_version": 1, "scaling": {"eta": 0.5}})").find("custom") != std::string::npos);
    }

    TEST_CASE("analytic defaults and sweeps")
    {
        RunConfig c = parse_config_text(R"({"schema_version": 1, "source": {"tau_s": 2.0}, "analytic": {}})", "");
        REQUIRE(c.has_analytic);
        CHECK(c.analytic.detector_T == 2.0);
        CHECK(c.analytic.sweep.values.size() == 41);
        CHECK(c.analytic.sweep.values.front() == doctest::Approx(0.1));
        CHECK(c.analytic.sweep.values.back() == doctest::Approx(1000.0));
        RunConfig lin = parse_config_text(
            R"({"schema_version": 1, "analytic": {"sweep": {"parameter": "z", "start": 0, "stop": 2, "count": 5, "spacing": "linear"}}})",
            "");
        CHECK(lin.analytic.sweep.values[1] == doctest::Approx(0.5));
        CHECK(message(R"({"schema_version": 1, "analytic": {"sweep": {"parameter": "colour", "values": [1]}}})")
                  .find("colour") != std::string::npos);
    }

    TEST_CASE("experiment section")
    {
        const char* text = R"({"schema_version": 1, "grid": {"n": 128, "dx": 0.5},
            "propagation": {"z_final": 1.0, "n_steps": 4},
            "experiment": {"n_realizations": 10, "seed": 99, "detector_T": 1.0, "probes": [{"r": [0], "x": [1]}]}})";
        RunConfig c = parse_config_text(text, "");
        REQUIRE(c.has_experiment);
        CHECK(c.experiment.master_seed == 99);
        CHECK(c.experiment.plan.n_steps == 4);
        CHECK(c.experiment.probes.size() == 1);
        CHECK(c.experiment.probes[0].x[0] == 1.0);
        CHECK(c.experiment.dt <= 0.25);
        CHECK(message(R"({"schema_version": 1, "grid": {"n": 128, "dx": 0.5}, "propagation": {"z_final": 1.0},
            "experiment": {"n_realizations": 1, "probes": [{}]}})")
                  .find("n_realizations") != std::string::npos);
        CHECK(message(R"({"schema_version": 1, "experiment": {"n_realizations": 4, "probes": [{}]}})")
                  .find("grid") != std::string::npos);
    }

    TEST_CASE("figure presets")
    {
        RunConfig c =
            parse_config_text(R"({"schema_version": 1, "dimension": 2, "figure": {"preset": "gaussian_panels"}})", "");
        REQUIRE(c.has_figure);
        CHECK(c.figure.curves.size() == 3);
        for (const auto& curve : c.figure.curves) {
            CHECK(curve.source.theta > 0.0);
            CHECK(curve.source.theta <= 1.0);
        }
        CHECK(message(R"({"schema_version": 1, "figure": {"preset": "gaussian_panels"}})").find("dimension") !=
              std::string::npos);
        CHECK(message(R"({"schema_version": 1, "dimension": 2, "figure": {"preset": "nope"}})") != "");
    }

    TEST_CASE("shipped configs parse")
    {
        int seen = 0;
        for (const auto& entry : std::filesystem::directory_iterator(PCB_CONFIG_DIR)) {
            if (entry.path().extension() != ".json")
                continue;
            CAPTURE(entry.path().string());
            CHECK_NOTHROW(parse_config(entry.path().string()));
            ++seen;
        }
        CHECK(seen >= 6);
        CHECK_THROWS_AS(parse_config(std::string(PCB_CONFIG_DIR) + "/does_not_exist.json"), Error);
    }
}
