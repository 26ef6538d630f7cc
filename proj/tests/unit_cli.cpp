#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cli.hpp>
#include <sicra/analytics.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace sicra;

namespace {

struct CliResult {
    int code;
    std::string out, err;
};

CliResult invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream stream(line);
    while (std::getline(stream, cell, sep)) cells.push_back(cell);
    if (!line.empty() && line.back() == sep) cells.push_back("");
    return cells;
}

// CSV rows addressable by header name
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    explicit Table(const std::string& csv) {
        bool first = true;
        for (const std::string& line : split(csv, '\n')) {
            if (line.empty()) continue;
            if (first) {
                header = split(line, ',');
                first = false;
            } else {
                auto row = split(line, ',');
                row.resize(header.size());
                rows.push_back(std::move(row));
            }
        }
    }

    const std::string& at(std::size_t row, const std::string& column) const {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == column) return rows.at(row).at(c);
        throw std::out_of_range("no column " + column);
    }
};

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string& contents) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("sicra_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++) + ".tmp");
        std::ofstream(path) << contents;
    }
    ~TempFile() { std::filesystem::remove(path); }
    std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("help prints usage and succeeds") {
    const CliResult r = invoke({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("Usage") != std::string::npos);
    CHECK(r.out.find("analyze") != std::string::npos);
}

TEST_CASE("a subcommand is required") {
    const CliResult r = invoke({});
    CHECK(r.code == 2);
}

TEST_CASE("unknown configuration keys are named in the error") {
    const CliResult r = invoke({"analyze", "--set", "scenario.bogus=1"});
    CHECK(r.code == 2);
    CHECK(r.err.find("scenario.bogus") != std::string::npos);
}

TEST_CASE("invalid field values surface the core validation message") {
    const CliResult r = invoke({"simulate", "--set", "scenario.tx_prob=1.5"});
    CHECK(r.code == 2);
    CHECK(r.err.find("tx_prob") != std::string::npos);
}

TEST_CASE("malformed --set is rejected") {
    const CliResult r = invoke({"analyze", "--set", "scenario.tx_prob"});
    CHECK(r.code == 2);
    CHECK(r.err.find("key=value") != std::string::npos);
}

TEST_CASE("config file is parsed and --set takes precedence") {
    const TempFile cfg(
        "# comment line\n"
        "scenario.n_nodes = 7   # trailing comment\n"
        "scenario.tx_prob = 0.125\n"
        "\n"
        "scenario.arrival_prob=0.05\n");
    const CliResult r =
        invoke({"analyze", "--config", cfg.str(), "--set", "scenario.tx_prob=0.25"});
    REQUIRE(r.code == 0);
    const Table table(r.out);
    REQUIRE(table.rows.size() == 1);
    CHECK(table.at(0, "n_nodes") == "7");
    CHECK(std::stod(table.at(0, "tx_prob")) == 0.25);
    CHECK(std::stod(table.at(0, "arrival_prob")) == 0.05);
}

TEST_CASE("--seed beats both the config file and --set") {
    const TempFile cfg("scenario.seed = 3\nscenario.n_slots = 500\nscenario.n_runs = 1\n");
    const CliResult r = invoke({"simulate", "--config", cfg.str(), "--set",
                             "scenario.seed=4", "--seed", "99"});
    REQUIRE(r.code == 0);
    const Table table(r.out);
    CHECK(table.at(0, "seed") == "99");
}

TEST_CASE("analyze reproduces the closed-form report") {
    const CliResult r =
        invoke({"analyze", "--set", "scenario.n_nodes=5", "--set",
             "scenario.tx_prob=0.14", "--set", "scenario.arrival_prob=0.05"});
    REQUIRE(r.code == 0);
    const Table table(r.out);
    REQUIRE(table.rows.size() == 1);

    const LinkBudget budget = LinkBudget::equal_snr(20.0, 1.0, 5, 0.14, 0.05, 5);
    const AnalyticReport expected = analytic_report(budget);
    CHECK(std::stod(table.at(0, "q_s")) == expected.q_s);
    CHECK(std::stod(table.at(0, "throughput")) == expected.throughput);
    CHECK(std::stod(table.at(0, "avg_aoi")) == expected.avg_aoi);
    CHECK(std::stod(table.at(0, "deadline_violation")) ==
          expected.deadline_violation);
    CHECK(table.at(0, "unstable") == "0");
    CHECK(table.at(0, "axis") == "");
    CHECK(table.at(0, "value") == "");
}

TEST_CASE("analyze marks unstable points and leaves the age cell empty") {
    const CliResult r = invoke({"analyze", "--set", "scenario.n_nodes=10",
                             "--set", "scenario.tx_prob=0.05"});
    REQUIRE(r.code == 0);
    const Table table(r.out);
    CHECK(table.at(0, "unstable") == "1");
    CHECK(table.at(0, "avg_aoi") == "");
    CHECK(std::stod(table.at(0, "deadline_violation")) == 1.0);
    CHECK(r.err.find("unstable") != std::string::npos);
}

TEST_CASE("analyze refuses heterogeneous geometries") {
    const CliResult r = invoke({"analyze", "--set", "scenario.equal_snr=0"});
    CHECK(r.code == 2);
    CHECK(r.err.find("equal_snr") != std::string::npos);
}

TEST_CASE("analyze sweeps emit one row per value") {
    const CliResult r =
        invoke({"analyze", "--set", "sweep.axis=p_a", "--set",
             "sweep.values=0.01,0.02,0.03", "--set", "scenario.tx_prob=0.3",
             "--set", "scenario.n_nodes=2"});
    REQUIRE(r.code == 0);
    const Table table(r.out);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.at(1, "axis") == "p_a");
    CHECK(std::stod(table.at(1, "value")) == 0.02);
    CHECK(std::stod(table.at(1, "arrival_prob")) == 0.02);
}

TEST_CASE("simulate emits per-run rows then one aggregate row") {
    const std::vector<std::string> args = {
        "simulate", "--set", "scenario.n_nodes=2", "--set",
        "scenario.n_slots=800", "--set", "scenario.n_runs=3"};
    const CliResult r = invoke(args);
    REQUIRE(r.code == 0);
    const Table table(r.out);
    REQUIRE(table.rows.size() == 4);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(table.at(i, "kind") == "run");
        CHECK(table.at(i, "run_index") == std::to_string(i));
        CHECK(table.at(i, "avg_aoi_ci") == "");
        CHECK(std::stol(table.at(i, "generated")) >= 0);
    }
    CHECK(table.at(3, "kind") == "aggregate");
    CHECK(table.at(3, "run_index") == "");
    CHECK(table.at(3, "generated") == "");
    CHECK(std::stod(table.at(3, "throughput_ci")) >= 0.0);

    const CliResult again = invoke(args);
    CHECK(again.out == r.out);
}

TEST_CASE("simulate honours --out and --trace") {
    const TempFile out_file(""), trace_file("");
    const CliResult r =
        invoke({"simulate", "--set", "scenario.n_nodes=3", "--set",
             "scenario.n_slots=100", "--set", "scenario.n_runs=2", "--out",
             out_file.str(), "--trace", trace_file.str()});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());

    std::stringstream out_csv, trace_csv;
    out_csv << std::ifstream(out_file.path).rdbuf();
    trace_csv << std::ifstream(trace_file.path).rdbuf();
    const Table results(out_csv.str());
    CHECK(results.rows.size() == 3);

    const Table trace(trace_csv.str());
    REQUIRE(trace.rows.size() == 100);  // first run only
    CHECK(trace.header.size() == 4 + 3);
    CHECK(trace.at(0, "run") == "0");
    CHECK(trace.at(0, "slot") == "0");
    CHECK(trace.at(99, "slot") == "99");
    CHECK(std::stol(trace.at(7, "aoi_2")) >= 1);
}

TEST_CASE("sweep maps the load axis onto the per-node probability") {
    const CliResult r =
        invoke({"sweep", "--set", "scenario.n_nodes=8", "--set",
             "scenario.n_slots=400", "--set", "scenario.n_runs=2", "--set",
             "sweep.axis=G", "--set", "sweep.values=0.5,2"});
    REQUIRE(r.code == 0);
    const Table table(r.out);
    REQUIRE(table.rows.size() == 10);  // 2 points x 5 metrics
    CHECK(std::stod(table.at(0, "value")) == 0.5);
    CHECK(std::stod(table.at(0, "tx_prob")) == 0.0625);
    CHECK(std::stod(table.at(5, "tx_prob")) == 0.25);
    CHECK(table.at(0, "metric") == "avg_aoi");
    CHECK(table.at(4, "metric") == "q_s_empirical");
}

TEST_CASE("sweep requires an axis and values") {
    CHECK(invoke({"sweep", "--set", "scenario.n_slots=100"}).code == 2);
    CHECK(invoke({"sweep", "--set", "sweep.axis=nonsense", "--set",
               "sweep.values=1"})
              .code == 2);
    CHECK(invoke({"sweep", "--set", "sweep.axis=N", "--set", "sweep.values=2.5"})
              .code == 2);
}

TEST_CASE("sweep output is byte-identical across worker counts") {
    const std::vector<std::string> base = {
        "sweep",  "--set", "scenario.n_nodes=4",
        "--set",  "scenario.n_slots=600",
        "--set",  "scenario.n_runs=5",
        "--set",  "sweep.axis=p",
        "--set",  "sweep.values=0.1,0.3,0.6"};
    auto with_jobs = [&](const char* jobs) {
        auto args = base;
        args.push_back("--jobs");
        args.push_back(jobs);
        return invoke(args);
    };
    const CliResult serial = with_jobs("1");
    REQUIRE(serial.code == 0);
    CHECK(with_jobs("2").out == serial.out);
    CHECK(with_jobs("4").out == serial.out);
}

TEST_CASE("compare stays under the bound on an equal-SNR saturated sweep") {
    const CliResult r =
        invoke({"compare", "--set", "scenario.n_nodes=5", "--set",
             "scenario.n_slots=4000", "--set", "scenario.n_runs=4", "--set",
             "sweep.axis=p", "--set", "sweep.values=0.05,0.1"});
    REQUIRE(r.code == 0);
    const Table table(r.out);
    REQUIRE(table.rows.size() == 8);
    CHECK(r.err.find("max |z|") != std::string::npos);

    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (table.at(i, "metric") != "avg_aoi") continue;
        // p_a = 0.4 saturates every point: age diverges, so no z is computed
        CHECK(table.at(i, "analytic") == "");
        CHECK(table.at(i, "z") == "");
        CHECK(table.at(i, "note").find("unstable") != std::string::npos);
    }
    // deadline misses are certain on both sides; the z convention is 0
    CHECK(std::stod(table.at(3, "analytic")) == 1.0);
    CHECK(std::stod(table.at(3, "z")) == 0.0);
}

TEST_CASE("compare trips the exit code when strict and out of bound") {
    const std::vector<std::string> base = {
        "compare", "--set", "scenario.n_nodes=5",
        "--set",   "scenario.n_slots=3000",
        "--set",   "scenario.n_runs=4",
        "--set",   "sweep.axis=p",
        "--set",   "sweep.values=0.1",
        "--set",   "compare.z_bound=1e-6"};
    const CliResult strict = invoke(base);
    CHECK(strict.code == 1);
    CHECK(strict.out.find("z exceeds bound") != std::string::npos);

    auto relaxed_args = base;
    relaxed_args.push_back("--set");
    relaxed_args.push_back("compare.strict=0");
    const CliResult relaxed = invoke(relaxed_args);
    CHECK(relaxed.code == 0);
}

TEST_CASE("compare derives a sampled reference for small heterogeneous sets") {
    const CliResult r =
        invoke({"compare", "--set", "scenario.equal_snr=0", "--set",
             "channel.noise_power=1e-6", "--set", "scenario.n_nodes=3",
             "--set", "scenario.arrival_prob=0.9", "--set",
             "scenario.n_slots=6000", "--set", "scenario.n_runs=4", "--set",
             "sweep.axis=p", "--set", "sweep.values=0.3"});
    REQUIRE(r.code == 0);
    const Table table(r.out);
    REQUIRE(table.rows.size() == 4);
    CHECK(std::stod(table.at(0, "analytic")) > 0.0);
    CHECK(table.at(0, "z") != "");
    CHECK(table.at(0, "note").find("saturated-contention") != std::string::npos);
    CHECK(table.at(2, "analytic") == "");  // avg_aoi: no reference
    CHECK(table.at(2, "note").find("limited to q_s") != std::string::npos);
}

TEST_CASE("compare declines a reference it cannot defend") {
    // large heterogeneous sets and heterogeneous imperfect CSI have none
    const CliResult big =
        invoke({"compare", "--set", "scenario.equal_snr=0", "--set",
             "scenario.n_nodes=9", "--set", "scenario.n_slots=300", "--set",
             "scenario.n_runs=2", "--set", "sweep.axis=p", "--set",
             "sweep.values=0.2"});
    REQUIRE(big.code == 0);
    const Table btab(big.out);
    CHECK(btab.at(0, "analytic") == "");
    CHECK(btab.at(0, "note").find("more than 8") != std::string::npos);

    const CliResult csi =
        invoke({"compare", "--set", "scenario.equal_snr=0", "--set",
             "scenario.n_nodes=3", "--set", "scenario.sigma_eps_sq=0.1",
             "--set", "scenario.n_slots=300", "--set", "scenario.n_runs=2",
             "--set", "sweep.axis=p", "--set", "sweep.values=0.2"});
    REQUIRE(csi.code == 0);
    const Table ctab(csi.out);
    CHECK(ctab.at(0, "analytic") == "");
    CHECK(ctab.at(0, "note").find("imperfect CSI") != std::string::npos);
}

TEST_CASE("compare output is byte-identical across worker counts") {
    auto run = [](const char* jobs) {
        return invoke({"compare", "--set", "scenario.n_nodes=4", "--set",
                    "scenario.n_slots=800", "--set", "scenario.n_runs=6",
                    "--set", "sweep.axis=p", "--set", "sweep.values=0.1,0.25",
                    "--jobs", jobs});
    };
    const CliResult serial = run("1");
    REQUIRE(serial.code == 0);
    CHECK(run("3").out == serial.out);
}
