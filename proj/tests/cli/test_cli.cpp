#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "contactnet/records.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kFixtures = CONTACTNET_FIXTURE_DIR;

fs::path scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("contactnet_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

// Runs the CLI with stdout/stderr discarded and returns its exit status.
int cli(const std::string& args) {
    const std::string cmd = quote(CONTACTNET_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::vector<json> jsonl(const fs::path& p) {
    std::vector<json> out;
    std::istringstream in(slurp(p));
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) out.push_back(json::parse(line));
    return out;
}

std::string fixture_csv() { return quote((kFixtures / "outbreak_seed42.csv").string()); }
std::string fixture_cfg() { return quote((kFixtures / "outbreak_seed42.json").string()); }
std::string out(const std::string& name) { return quote((scratch() / name).string()); }

}  // namespace

TEST_CASE("analyze: bundled fixture matches its generation-time expectation") {
    REQUIRE(cli("analyze --input " + fixture_csv() + " --output " + out("all.json")) == 0);
    auto doc = json::parse(slurp(scratch() / "all.json"));
    auto want = json::parse(slurp(kFixtures / "outbreak_seed42.expected.json"));
    const auto& rep = doc["report"];
    CHECK(rep["n_vertices"] == want["n_vertices"]);
    CHECK(rep["n_edges"] == want["n_edges"]);
    CHECK(rep["fitting_n"] == want["fitting_n"]);
    CHECK(rep["classification"]["chosen"] == want["chosen"]);
    CHECK(rep["classification"]["fits"].size() == 4);
    // lambda = n / sum(degrees) on the fitting sample.
    CHECK(rep["classification"]["fits"][0]["params"]["lambda"].get<double>() ==
          doctest::Approx(want["fitting_n"].get<double>() / want["degree_sum"].get<double>()).epsilon(1e-15));
    CHECK(doc["diagnostics"].empty());
    CHECK(doc["run_config"]["command"] == "analyze");
    CHECK(doc["run_config"]["rule"] == "min-se");
}

TEST_CASE("analyze: --families exp gives exactly one fit") {
    REQUIRE(cli("analyze --input " + fixture_csv() + " --families exp --output " + out("exp.json")) == 0);
    auto doc = json::parse(slurp(scratch() / "exp.json"));
    CHECK(doc["report"]["classification"]["fits"].size() == 1);
    CHECK(doc["run_config"]["families"] == json::array({"exponential"}));
}

TEST_CASE("analyze: tumbling output has one line per scheduled window plus a summary") {
    REQUIRE(cli("analyze --input " + fixture_csv() + " --window tumbling:1w --output " + out("tw.jsonl")) == 0);
    auto lines = jsonl(scratch() / "tw.jsonl");
    // Fixture spans 2014-03-01T08:00 to 2014-04-25T08:00 (55 days + 1 s): 8 weeks.
    REQUIRE(lines.size() == 9);
    for (std::size_t k = 0; k + 1 < lines.size(); ++k) {
        CHECK(lines[k]["type"] == "report");
        CHECK(lines[k]["index"] == k);
    }
    CHECK(lines.back()["type"] == "summary");
    CHECK(lines.back()["n_windows"] == 8);
}

TEST_CASE("stream and analyze emit the same reports") {
    for (std::string w : {"tumbling:1d", "cumulative:3d"}) {
        REQUIRE(cli("analyze --input " + fixture_csv() + " --window " + w + " --output " + out("a.jsonl")) == 0);
        REQUIRE(cli("stream --input " + fixture_csv() + " --window " + w + " --output " + out("s.jsonl")) == 0);
        auto a = jsonl(scratch() / "a.jsonl"), s = jsonl(scratch() / "s.jsonl");
        REQUIRE(a.size() == s.size());
        for (std::size_t k = 0; k + 1 < a.size(); ++k) CHECK(a[k] == s[k]);
        CHECK(s.back()["run_config"]["command"] == "stream");
    }
}

TEST_CASE("exit codes for bad input and bad flags") {
    write(scratch() / "bad.csv", "case_id,source_id,date,longitude,latitude\nC1,,not-a-date,0,0\nC2,,2014-03-01,0,0\n");
    const auto bad = out("bad.csv");
    CHECK(cli("analyze --input " + bad + " --strict") == 2);
    CHECK(cli("analyze --input " + bad + " --output " + out("lenient.json")) == 0);
    auto lenient = json::parse(slurp(scratch() / "lenient.json"));
    CHECK(lenient["diagnostics"].size() == 1);
    CHECK(lenient["report"]["n_vertices"] == 1);

    CHECK(cli("analyze --input " + out("missing.csv")) == 2);
    CHECK(cli("stream --input " + out("missing.csv")) == 2);
    CHECK(cli("analyze --input " + fixture_csv() + " --window hourly") == 64);
    CHECK(cli("analyze --input " + fixture_csv() + " --window tumbling:0m") == 64);
    CHECK(cli("analyze --input " + fixture_csv() + " --families exp,gamma") == 64);
    CHECK(cli("analyze --input " + fixture_csv() + " --rule best") == 64);
    CHECK(cli("analyze --input " + fixture_csv() + " --origin yesterday") == 64);
    CHECK(cli("analyze --input " + fixture_csv() + " --no-such-flag") == 64);
    CHECK(cli("analyze") == 64);
    CHECK(cli("stream --input " + fixture_csv() + " --window all") == 64);
    CHECK(cli("") == 64);
    CHECK(cli("--help") == 0);

    // Dangling source is a warning normally and a rejection under --strict.
    write(scratch() / "dangling.csv", "C2,C9,2014-03-01,0,0\nC3,C2,2014-03-02,0,0\n");
    CHECK(cli("analyze --input " + out("dangling.csv")) == 0);
    CHECK(cli("analyze --input " + out("dangling.csv") + " --strict") == 2);
}

TEST_CASE("degenerate sample still exits 0 with skip reasons") {
    write(scratch() / "pair.csv", "A,,2014-03-01,0,0\nB,A,2014-03-02,0,0\n");
    REQUIRE(cli("analyze --input " + out("pair.csv") + " --output " + out("pair.json")) == 0);
    auto doc = json::parse(slurp(scratch() / "pair.json"));
    CHECK(doc["report"]["fitting_n"] == 2);
    CHECK(doc["report"]["skipped"].size() >= 2);
}

TEST_CASE("JSONL input") {
    write(scratch() / "in.jsonl",
          R"({"case_id":"A","source_id":null,"date":"2014-03-01","longitude":0,"latitude":0})"
          "\n"
          R"({"case_id":"B","source_id":"A","date":"2014-03-02","longitude":0,"latitude":0})"
          "\n");
    REQUIRE(cli("analyze --input " + out("in.jsonl") + " --output " + out("jl.json")) == 0);
    auto doc = json::parse(slurp(scratch() / "jl.json"));
    CHECK(doc["run_config"]["format"] == "jsonl");
    CHECK(doc["report"]["n_edges"] == 1);
}

TEST_CASE("simulate: fixture regenerates byte for byte") {
    REQUIRE(cli("simulate --config " + fixture_cfg() + " --output " + out("sim42.csv")) == 0);
    CHECK(slurp(scratch() / "sim42.csv") == slurp(kFixtures / "outbreak_seed42.csv"));
}

TEST_CASE("simulate: p=0 yields only index cases; bad configs exit 64") {
    const auto regions = (fs::path(CONTACTNET_DATA_DIR) / "regions.json").string();
    write(scratch() / "p0.json", R"({"topology":"uniform-attachment","n_population":200,"p_transmit":0.0,"seed":1,
        "regions_file":")" + regions + R"(","index_cases":[{"region":"Conakry","start":"2014-03-01"},
        {"region":"Monrovia","start":"2014-03-05"}]})");
    REQUIRE(cli("simulate --config " + out("p0.json") + " --output " + out("p0.csv")) == 0);
    std::istringstream in(slurp(scratch() / "p0.csv"));
    contactnet::RecordReader reader(in, contactnet::RecordFormat::csv);
    auto recs = contactnet::read_all(reader);
    REQUIRE(recs.size() == 2);
    for (const auto& r : recs) CHECK_FALSE(r.source_id);

    write(scratch() / "badp.json", R"({"p_transmit":1.5,"index_cases":[{"longitude":0,"latitude":0,"start":"2014-03-01"}]})");
    CHECK(cli("simulate --config " + out("badp.json")) == 64);
    write(scratch() / "typo.json", R"({"n_popluation":10})");
    CHECK(cli("simulate --config " + out("typo.json")) == 64);
    write(scratch() / "broken.json", "{");
    CHECK(cli("simulate --config " + out("broken.json")) == 64);
    CHECK(cli("simulate --config " + out("absent.json")) == 2);
}

TEST_CASE("simulate n=1000, p=0.1, seed 7 analyzes without diagnostics") {
    const auto regions = (fs::path(CONTACTNET_DATA_DIR) / "regions.json").string();
    write(scratch() / "s7.json", R"({"topology":"preferential-attachment","n_population":1000,"p_transmit":0.1,
        "n_steps":365,"seed":7,"regions_file":")" + regions + R"(","index_cases":[{"region":"Gueckedou","start":"2014-03-01"}]})");
    REQUIRE(cli("simulate --config " + out("s7.json") + " --output " + out("s7.jsonl")) == 0);
    REQUIRE(cli("analyze --input " + out("s7.jsonl") + " --output " + out("s7.report.json")) == 0);
    auto doc = json::parse(slurp(scratch() / "s7.report.json"));
    CHECK(doc["diagnostics"].empty());
    CHECK(doc["report"]["n_vertices"].get<int>() >= 1);
}

TEST_CASE("plot: curves, scatter and the empty case") {
    REQUIRE(cli("analyze --input " + fixture_csv() + " --output " + out("plot_src.json")) == 0);
    REQUIRE(cli("plot --input " + out("plot_src.json") + " --output " + out("fig.svg")) == 0);
    auto svg = slurp(scratch() / "fig.svg");
    std::size_t curves = 0;
    for (auto p = svg.find("<polyline class=\"fit\""); p != std::string::npos; p = svg.find("<polyline class=\"fit\"", p + 1))
        ++curves;
    CHECK(curves == 4);
    CHECK(svg.find("<g class=\"empirical\"") != std::string::npos);
    CHECK(svg.find("data-scale=\"linear\"") != std::string::npos);

    REQUIRE(cli("plot --log-log --input " + fixture_csv() + " --output " + out("fig_ll.svg")) == 0);
    CHECK(slurp(scratch() / "fig_ll.svg").find("data-scale=\"log\"") != std::string::npos);

    REQUIRE(cli("analyze --input " + fixture_csv() + " --window cumulative:1w --output " + out("cw.jsonl")) == 0);
    CHECK(cli("plot --input " + out("cw.jsonl") + " --index 3 --output " + out("cw3.svg")) == 0);
    CHECK(cli("plot --input " + out("cw.jsonl") + " --index 99") == 64);

    write(scratch() / "empty.csv", "case_id,source_id,date,longitude,latitude\n");
    REQUIRE(cli("analyze --input " + out("empty.csv") + " --output " + out("empty.json")) == 0);
    CHECK(cli("plot --input " + out("empty.json") + " --output " + out("empty.svg")) == 65);
    CHECK(cli("plot --input " + out("empty.csv")) == 65);
    write(scratch() / "iso.csv", "A,,2014-03-01,0,0\nB,,2014-03-02,0,0\n");
    CHECK(cli("plot --input " + out("iso.csv")) == 65);
    CHECK(cli("plot --input " + out("nothing-here.json")) == 2);
}

TEST_CASE("repeated runs are byte-identical") {
    const std::vector<std::pair<std::string, std::string>> runs{
        {"analyze --input " + fixture_csv(), "det_all.json"},
        {"analyze --input " + fixture_csv() + " --window cumulative:1d", "det_cum.jsonl"},
        {"stream --input " + fixture_csv() + " --window tumbling:6h", "det_stream.jsonl"},
        {"simulate --config " + fixture_cfg(), "det_sim.csv"},
        {"plot --input " + fixture_csv(), "det_plot.svg"},
        {"plot --log-log --input " + fixture_csv(), "det_plot_ll.svg"},
    };
    for (const auto& [args, file] : runs) {
        REQUIRE(cli(args + " --output " + out(file)) == 0);
        const auto first = slurp(scratch() / file);
        REQUIRE(cli(args + " --output " + out(file)) == 0);
        CHECK(slurp(scratch() / file) == first);
        CHECK_FALSE(first.empty());
    }
}
