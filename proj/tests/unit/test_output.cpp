#include <doctest.h>

#include "output.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace pcb;

TEST_SUITE("output")
{
    TEST_CASE("number formatting round-trips")
    {
        CHECK(format_real(0.1) == "0.10000000000000001");
        CHECK(format_real(2.0) == "2");
        CHECK(std::stod(format_real(M_PI)) == M_PI);
        CHECK(format_real(std::numeric_limits<double>::quiet_NaN()) == "nan");
        CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
    }

    TEST_CASE("curve csv")
    {
        CurveRow r;
        r.abscissa = 1.0;
        r.s_T = 1.5;
        r.theta = 0.25;
        std::string csv = curve_csv({r, r});
        std::istringstream in(csv);
        std::string header, line;
        std::getline(in, header);
        CHECK(header.rfind("abscissa,", 0) == 0);
        CHECK(header.find("s_T") != std::string::npos);
        CHECK(header.find("beta_case") != std::string::npos);
        int rows = 0;
        while (std::getline(in, line))
            ++rows;
        CHECK(rows == 2);
        CHECK(beta_case_name(BetaCase::theta_to_0) == "theta_to_0");
    }

    TEST_CASE("experiment csv")
    {
        ExperimentResult res;
        ResultRow row;
        row.stat = "intensity";
        row.mc_mean = 1.0;
        row.asymptotic = std::nan("");
        row.z_score = std::nan("");
        row.probe.r = {1.0, 2.0};
        res.rows = {row};
        std::string csv = experiment_csv(res, 2);
        CHECK(csv.find("intensity") != std::string::npos);
        CHECK(csv.find("1 2") != std::string::npos);
        CHECK(csv.find("nan") != std::string::npos);
    }

    TEST_CASE("svg plot")
    {
        PlotSpec p;
        p.title = "curves";
        p.series = {{"a", {0.1, 1.0, 10.0}, {1.0, 2.0, 1.5}}, {"b", {0.1, 10.0}, {0.5, 0.7}}};
        std::string svg = svg_plot(p);
        CHECK(svg.rfind("<svg", 0) == 0);
        CHECK(svg.find("</svg>") != std::string::npos);
        CHECK(svg.find("polyline") != std::string::npos);
        CHECK(svg.find(">a<") != std::string::npos);
    }

    TEST_CASE("output paths")
    {
        CHECK_THROWS_WITH_AS(require_writable(""), "an output path is required (--out)", Error);
        CHECK_THROWS_AS(require_writable("/nonexistent_dir_for_tests/x.csv"), Error);
        auto dir = std::filesystem::temp_directory_path();
        CHECK_NOTHROW(require_writable((dir / "pcb_out.csv").string()));
        CHECK(sibling_path("/a/b/c.csv", ".svg") == "/a/b/c.svg");
        std::string path = (dir / "pcb_write_test.txt").string();
        write_text_file(path, "hello\n");
        std::ifstream in(path);
        std::string s;
        std::getline(in, s);
        CHECK(s == "hello");
        std::filesystem::remove(path);
    }
}
