#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "carpetlab/atlas/survey.hpp"
#include "carpetlab/atlas/tile.hpp"
#include "carpetlab/cli.hpp"
#include "carpetlab/image_io.hpp"

using namespace carpetlab;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

nlohmann::json json_of(const Run& r) { return nlohmann::json::parse(r.out); }

fs::path tmp(const std::string& name) {
    const fs::path dir = fs::path(CARPETLAB_TEST_TMP) / "cli";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("classify") {
    const Run a = run({"classify", "--n", "3", "--lambda", "1+0i", "--json"});
    CHECK(a.code == 0);
    CHECK(json_of(a)["tag"] == "Cantor");
    const Run b = run({"--json", "classify", "--lambda", "1e-8"});
    CHECK(json_of(b)["tag"] == "CantorCircles");
    CHECK(json_of(b)["k"] == 2);
    const Run text = run({"classify", "--lambda", "1+0i"});
    CHECK(text.out.rfind("Cantor\n", 0) == 0);
    CHECK(text.out.find("stable") != std::string::npos);
}

TEST_CASE("carpet counts") {
    const Run r = run({"carpet", "--k", "3", "--depth", "2", "--counts"});
    CHECK(r.code == 0);
    CHECK(r.out.find("b_2=256") != std::string::npos);
    CHECK(r.out.find("l_2=1/27") != std::string::npos);
    const Run j = run({"--json", "carpet", "--k", "4", "--depth", "1", "--counts", "--squares"});
    CHECK(json_of(j)["b_m"] == "12");
    CHECK(json_of(j)["squares"].size() == 12);
}

TEST_CASE("image outputs") {
    const fs::path png = tmp("carpet.png");
    CHECK(run({"carpet", "--k", "3", "--depth", "1", "--resolution", "27", "-o", png.string()}).code == 0);
    const Raster r = read_raster(png);
    CHECK(r.width() == 27);
    CHECK(r.occupied_count() == 27 * 27 - 81);

    const fs::path pgm = tmp("julia.pgm");
    CHECK(run({"julia", "--lambda", "1e-8", "--size", "64", "-o", pgm.string(), "--format", "pgm"}).code == 0);
    CHECK(read_raster(pgm).width() == 64);

    const fs::path atlas = tmp("atlas.png");
    CHECK(run({"atlas", "--scale", "0.6", "--size", "128", "--n-max", "100", "-o", atlas.string()}).code == 0);
    CHECK(fs::file_size(atlas) > 100);
}

TEST_CASE("boxdim reads the raster it was given") {
    const fs::path pgm = tmp("ninths.pgm");
    CHECK(run({"carpet", "--standard", "--depth", "5", "--resolution", "729", "-o", pgm.string(), "--format", "pgm"}).code == 0);
    const Run r = run({"--json", "boxdim", "--input", pgm.string()});
    REQUIRE(r.code == 0);
    const auto doc = json_of(r);
    CHECK(std::abs(doc["fit"]["slope"].get<double>() - 1.8928) < 0.06);
    CHECK(doc["series"]["counts"].size() == doc["series"]["scales"].size());
    CHECK(doc["input_digest"].get<std::string>().size() == 64);
}

TEST_CASE("error paths and exit codes") {
    const Run missing = run({"boxdim", "--input", "missing.pgm"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("cannot read input") != std::string::npos);
    CHECK(std::count(missing.err.begin(), missing.err.end(), '\n') == 1);

    CHECK(run({"classify"}).code == 2);
    CHECK(run({"classify", "--lambda", "one"}).code == 2);
    CHECK(run({"classify", "--lambda", "0"}).code == 2);
    CHECK(run({"classify", "--n", "2", "--lambda", "1"}).code == 2);
    CHECK(run({"carpet", "--k", "2", "--depth", "1", "--counts"}).code == 2);
    CHECK(run({"boxdim", "--window", "1"}).code == 2);
    CHECK(run({"area", "--schedule", "100,50"}).code == 2);
    CHECK(run({"nosuch"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"--version"}).code == 0);
}

TEST_CASE("whyburn and area reports") {
    const Run w = run({"--json", "whyburn", "--carpet-k", "3", "--depth", "2", "--resolution", "243", "--eps", "0.4,0.3"});
    REQUIRE(w.code == 0);
    const auto doc = json_of(w);
    CHECK(doc.dump().find("carpet-consistent at this resolution") != std::string::npos);

    const Run a = run({"--json", "area", "--family", "quadratic", "--c", "0+0i", "--size", "256", "--schedule", "50,100"});
    REQUIRE(a.code == 0);
    const auto fractions = json_of(a)["fractions"];
    REQUIRE(fractions.size() == 2);
    CHECK(std::abs(fractions[0]["fraction"].get<double>() - 0.19634954084936207) < 0.01);
}

TEST_CASE("survey then classify agree") {
    const fs::path store = tmp("store");
    const Run s = run({"--json", "survey", "--region=-0.3,0.3,-0.3,0.3", "--grid", "8", "--n-max", "500", "--store",
                       store.string()});
    REQUIRE(s.code == 0);
    const auto doc = json_of(s);
    const auto cells = doc["cells"];
    REQUIRE(cells.size() == 64);
    atlas::SurveyRequest req;
    req.region = {-0.3, 0.3, -0.3, 0.3};
    req.width = req.height = 8;
    for (int j = 0; j < 8; ++j) {
        for (int i = 0; i < 8; ++i) {
            const std::string lambda = format_complex(req.cell_center(i, j));
            const Run c = run({"--json", "classify", "--n-max", "500", "--lambda", lambda});
            REQUIRE(c.code == 0);
            CHECK(json_of(c)["label"] == atlas::code_label(cells[j * 8 + i].get<int>()));
        }
    }
    // a second run is served from the store
    const Run again = run({"--json", "survey", "--region=-0.3,0.3,-0.3,0.3", "--grid", "8", "--n-max", "500", "--store",
                           store.string()});
    CHECK(again.out == s.out);
}
