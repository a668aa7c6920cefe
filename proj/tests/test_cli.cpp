#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "bpsforge/event_log.hpp"
#include "bpsforge/parameters.hpp"
#include "bpsforge/simulator.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace bpsforge;
using namespace bpsforge::testing;

namespace {

struct CliFixture {
    fs::path dir;

    CliFixture() {
        dir = fs::temp_directory_path() / ("bpsforge_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~CliFixture() { fs::remove_all(dir); }

    std::string path(const std::string& name) const { return (dir / name).string(); }

    int run(const std::string& args) const {
        const std::string cmd = std::string(BPSFORGE_CLI_PATH) + " " + args + " > " +
                                path("stdout.txt") + " 2> " + path("stderr.txt");
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string stdout_text() const {
        std::ifstream in(path("stdout.txt"));
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }

    std::string write_sample_log(const std::string& name, int traces = 30) const {
        SeqLogBuilder builder;
        builder.add_traces({"a", "b", "d"}, traces * 2 / 3);
        builder.add_traces({"a", "c", "d"}, traces - traces * 2 / 3);
        const std::string p = path(name);
        write_csv_file(builder.build(), p);
        return p;
    }
};

}  // namespace

TEST_CASE("discover writes a loadable model and a report") {
    CliFixture fx;
    const std::string log = fx.write_sample_log("log.csv");
    const int code = fx.run("discover --log " + log + " --out " + fx.path("out") +
                            " --eta 0.0 --epsilon 0.4");
    CHECK(code == 0);
    CHECK(fs::exists(fx.path("out/model.json")));
    CHECK(fs::exists(fx.path("out/report.txt")));
    const BpsModel bps = BpsModel::load(fx.path("out/model.json"));
    CHECK(bps.trace_count_to_simulate == 30);
}

TEST_CASE("discover with a bad column map exits with code 2") {
    CliFixture fx;
    const std::string log = fx.write_sample_log("log.csv");
    const int code = fx.run("discover --log " + log + " --col-case nope --out " + fx.path("out2"));
    CHECK(code == 2);
}

TEST_CASE("discover warns when extreme thresholds degenerate the model") {
    CliFixture fx;
    SeqLogBuilder builder;
    builder.add_traces({"a", "b", "d"}, 20);
    builder.add_traces({"a", "c", "d"}, 4);
    builder.add_traces({"a", "b", "e", "d"}, 3);
    write_csv_file(builder.build(), fx.path("varied.csv"));

    CHECK(fx.run("discover --log " + fx.path("varied.csv") + " --out " + fx.path("deg") +
                 " --epsilon 1 --eta 1") == 0);
    std::ifstream in(fx.path("deg/report.txt"));
    std::ostringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str().find("warning:") != std::string::npos);
}

TEST_CASE("simulate emits one deterministic CSV per run with the model's trace count") {
    CliFixture fx;
    reference_bps_model(12).save(fx.path("model.json"));

    CHECK(fx.run("simulate --model " + fx.path("model.json") + " --out " + fx.path("sim") +
                 " --runs 3 --seed 5") == 0);
    for (int r = 0; r < 3; ++r) REQUIRE(fs::exists(fx.path("sim/simulated_" + std::to_string(r) + ".csv")));

    const EventLog log = parse_csv(fx.path("sim/simulated_0.csv"));
    CHECK(log.traces.size() == 12);

    // identical re-run is byte-identical
    CHECK(fx.run("simulate --model " + fx.path("model.json") + " --out " + fx.path("sim2") +
                 " --runs 1 --seed 5") == 0);
    CHECK(fx.run("simulate --model " + fx.path("model.json") + " --out " + fx.path("sim3") +
                 " --runs 1 --seed 5") == 0);
    std::ifstream a(fx.path("sim2/simulated_0.csv")), b(fx.path("sim3/simulated_0.csv"));
    std::ostringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
}

TEST_CASE("simulate with an invalid model exits with code 2") {
    CliFixture fx;
    std::ofstream(fx.path("broken.json")) << "{\"nodes\": []}";
    CHECK(fx.run("simulate --model " + fx.path("broken.json") + " --out " + fx.path("x")) == 2);
}

TEST_CASE("evaluate of a log against itself prints ELS 1 in every format") {
    CliFixture fx;
    const std::string log = fx.write_sample_log("log.csv", 12);

    CHECK(fx.run("evaluate --ground " + log + " --simulated " + log + " --format json") == 0);
    const nlohmann::json j = nlohmann::json::parse(fx.stdout_text());
    CHECK(j.at("els").get<double>() == doctest::Approx(1.0));
    CHECK(j.at("maeSeconds").get<double>() == doctest::Approx(0.0));

    CHECK(fx.run("evaluate --ground " + log + " --simulated " + log + " --format text") == 0);
    CHECK(fx.stdout_text().find("ELS: 1.0000") != std::string::npos);

    CHECK(fx.run("evaluate --ground " + log + " --simulated " + log + " --format csv --pairing " +
                 fx.path("pairing.csv")) == 0);
    CHECK(fs::exists(fx.path("pairing.csv")));
}

TEST_CASE("evaluate can dump the replay of the ground log") {
    CliFixture fx;
    const std::string log = fx.write_sample_log("log.csv", 9);
    CHECK(fx.run("discover --log " + log + " --out " + fx.path("d") + " --eta 0.0") == 0);
    CHECK(fx.run("evaluate --ground " + log + " --simulated " + log + " --model " +
                 fx.path("d/model.json") + " --replay-csv " + fx.path("replay.csv")) == 0);
    std::ifstream in(fx.path("replay.csv"));
    std::string header;
    std::getline(in, header);
    CHECK(header == "case_id,activity,start,end,processing_s,enablement,waiting_s");
}

TEST_CASE("optimize writes history.csv and best_model.json and prints the comparison") {
    CliFixture fx;
    const std::string log = fx.write_sample_log("log.csv", 18);
    const int code = fx.run("optimize --log " + log + " --out " + fx.path("opt") +
                            " --trials 3 --runs 1 --seed 2");
    CHECK(code == 0);
    REQUIRE(fs::exists(fx.path("opt/history.csv")));
    REQUIRE(fs::exists(fx.path("opt/best_model.json")));

    std::ifstream hist(fx.path("opt/history.csv"));
    std::string line;
    int rows = -1;  // header
    while (std::getline(hist, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);

    CHECK_NOTHROW(BpsModel::load(fx.path("opt/best_model.json")));
    CHECK(fx.stdout_text().find("Baseline (ELS)") != std::string::npos);
    CHECK(fx.stdout_text().find("Optimizer (ELS)") != std::string::npos);
}

TEST_CASE("optimize --keep-artifacts stores per-trial models") {
    CliFixture fx;
    const std::string log = fx.write_sample_log("log.csv", 12);
    CHECK(fx.run("optimize --log " + log + " --out " + fx.path("opt2") +
                 " --trials 2 --runs 1 --seed 3 --keep-artifacts") == 0);
    REQUIRE(fs::exists(fx.path("opt2/trials")));
    bool found_model = false;
    for (const auto& entry : fs::directory_iterator(fx.path("opt2/trials")))
        if (entry.path().extension() == ".json") found_model = true;
    CHECK(found_model);
}

TEST_CASE("unknown subcommand fails") {
    CliFixture fx;
    CHECK(fx.run("frobnicate") != 0);
}
