#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "shapekrrc/data_io.hpp"
#include "shapekrrc/evaluation.hpp"
#include "support.hpp"

using namespace shapekrrc;
using testsupport::TempDir;

namespace {

std::string g_cli_bin;

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

RunResult run_cli(const std::string& args, const TempDir& dir) {
    const std::string out_path = dir.file("cmd.out");
    const std::string err_path = dir.file("cmd.err");
    const std::string command = g_cli_bin + " " + args + " >" + out_path + " 2>" + err_path;
    const int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_text(out_path);
    result.err = read_text(err_path);
    return result;
}

int count_lines(const std::string& text) {
    int lines = 0;
    for (const char c : text) lines += c == '\n';
    return lines;
}

LandmarkDataset two_cluster_dataset(int per_class, double noise_sd, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 1));
    const std::vector<Preshape> templates = {random_preshape(6, rng), random_preshape(6, rng)};
    return generate_synthetic(templates, per_class, noise_sd, seed);
}

}  // namespace

TEST_CASE("preshape command normalizes a file") {
    TempDir dir("skr-cli");
    const std::string input = dir.file("in.csv");
    const std::string output = dir.file("out.csv");
    save_landmark_csv(two_cluster_dataset(10, 0.05, 5), input);

    const RunResult r = run_cli("preshape --input " + input + " --output " + output, dir);
    CHECK(r.exit_code == 0);
    const LandmarkDataset normalized = load_landmark_csv(output);
    CHECK(normalized.size() == 20);

    SUBCASE("output is a fixed point of re-normalization") {
        const std::string output2 = dir.file("out2.csv");
        const RunResult r2 =
            run_cli("preshape --input " + output + " --output " + output2, dir);
        CHECK(r2.exit_code == 0);
        const LandmarkDataset again = load_landmark_csv(output2);
        REQUIRE(again.size() == normalized.size());
        for (std::size_t i = 0; i < again.size(); ++i) {
            CHECK((again.records[i].points - normalized.records[i].points).cwiseAbs().maxCoeff() <
                  1e-12);
        }
    }
}

TEST_CASE("preshape command reports degenerate records") {
    TempDir dir("skr-cli");
    const std::string input = dir.file("in.csv");
    std::ofstream out(input);
    out << "id,label,x1,y1,x2,y2,x3,y3\n"
        << "good,0,1,0,-1,0,0,0\n"
        << "flat-1,0,2,2,2,2,2,2\n";
    out.close();

    const RunResult r =
        run_cli("preshape --input " + input + " --output " + dir.file("out.csv"), dir);
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("flat-1") != std::string::npos);
}

TEST_CASE("preshape command exits 2 on parse failures") {
    TempDir dir("skr-cli");
    const std::string input = dir.file("bad.csv");
    std::ofstream(input) << "id,label,x1,y1,x2,y2,x3,y3\nrow,0,1,oops,0,0,0,0\n";
    const RunResult r =
        run_cli("preshape --input " + input + " --output " + dir.file("out.csv"), dir);
    CHECK(r.exit_code == 2);

    const RunResult missing =
        run_cli("preshape --input " + dir.file("absent.csv") + " --output " + dir.file("o.csv"),
                dir);
    CHECK(missing.exit_code == 2);
}

TEST_CASE("kernel-check emits a PSD report for the embedded kernel") {
    TempDir dir("skr-cli");
    const std::string input = dir.file("in.csv");
    save_landmark_csv(two_cluster_dataset(15, 0.1, 6), input);
    const std::string report_path = dir.file("report.json");

    const RunResult r = run_cli("kernel-check --input " + input +
                                    " --kernel vwg --sigma-sq 1 --attempts 500 --trials 500"
                                    " --seed 3 --output " +
                                    report_path,
                                dir);
    REQUIRE(r.exit_code == 0);
    const nlohmann::json report = nlohmann::json::parse(read_text(report_path));
    CHECK(report.at("family") == "vwg");
    CHECK(report.at("n") == 30);
    CHECK(report.at("min_eigenvalue").get<double>() >= -1e-8);
    CHECK(report.at("negative_type_max").get<double>() <= 1e-8);
    CHECK(!report.contains("witness"));
}

TEST_CASE("kernel-check finds an intrinsic-kernel witness on geodesic data") {
    TempDir dir("skr-cli");
    // Points on a closed geodesic: the worst case for the intrinsic kernel.
    testsupport::GeodesicCircle circle(5);
    LandmarkDataset dataset;
    dataset.k = 5;
    Rng rng(9);
    for (int i = 0; i < 24; ++i) {
        LandmarkConfig record;
        record.id = "g" + std::to_string(i);
        record.label = 0;
        record.points = circle.at(uniform(rng, 0.0, std::numbers::pi)).coords();
        dataset.records.push_back(std::move(record));
    }
    dataset.class_names[0] = "geodesic";
    const std::string input = dir.file("in.csv");
    save_landmark_csv(dataset, input);

    const RunResult r = run_cli("kernel-check --input " + input +
                                    " --kernel rie --sigma-sq 100 --sigma-sq-grid 1,10,100"
                                    " --subset-size 8 --attempts 2000 --trials 200 --seed 4",
                                dir);
    REQUIRE(r.exit_code == 0);
    const nlohmann::json report = nlohmann::json::parse(r.out);
    REQUIRE(report.contains("witness"));
    CHECK(report.at("witness").at("min_eigenvalue").get<double>() < -1e-6);
}

TEST_CASE("kernel-check exits 2 on an empty dataset") {
    TempDir dir("skr-cli");
    const std::string input = dir.file("empty.csv");
    std::ofstream(input) << "id,label,x1,y1,x2,y2,x3,y3\n";
    const RunResult r = run_cli("kernel-check --input " + input + " --kernel vwg", dir);
    CHECK(r.exit_code == 2);
}

TEST_CASE("classify reaches full accuracy on separated resubstitution") {
    TempDir dir("skr-cli");
    const std::string train = dir.file("train.csv");
    save_landmark_csv(two_cluster_dataset(20, 0.01, 7), train);
    const std::string output = dir.file("pred.csv");

    const RunResult r = run_cli("classify --train " + train + " --test " + train +
                                    " --method vwg-krrc --lambda 1e-4 --sigma-sq 1 --output " +
                                    output,
                                dir);
    REQUIRE(r.exit_code == 0);
    const nlohmann::json metrics = nlohmann::json::parse(read_text(output + ".metrics.json"));
    CHECK(metrics.at("accuracy").get<double>() == doctest::Approx(1.0));
    CHECK(metrics.at("f1").get<double>() == doctest::Approx(1.0));
    CHECK(count_lines(read_text(output)) == 41);  // header + 40 predictions

    SUBCASE("identical invocations give byte-identical outputs") {
        const std::string output2 = dir.file("pred2.csv");
        const RunResult r2 = run_cli("classify --train " + train + " --test " + train +
                                         " --method vwg-krrc --lambda 1e-4 --sigma-sq 1 "
                                         "--output " +
                                         output2,
                                     dir);
        REQUIRE(r2.exit_code == 0);
        CHECK(read_text(output) == read_text(output2));
        // Metrics differ only in being re-written; compare bytes too.
        CHECK(read_text(output + ".metrics.json") == read_text(output2 + ".metrics.json"));
    }
}

TEST_CASE("classify usage errors exit 1") {
    TempDir dir("skr-cli");
    const RunResult r = run_cli("classify --train a.csv --test b.csv --method svm --output o.csv",
                                dir);
    CHECK(r.exit_code == 1);

    const RunResult missing = run_cli("classify --train a.csv", dir);
    CHECK(missing.exit_code == 1);

    const RunResult unknown_cmd = run_cli("frobnicate", dir);
    CHECK(unknown_cmd.exit_code == 1);
}

TEST_CASE("classify exits 4 when the factorization fails without the fallback") {
    TempDir dir("skr-cli");
    // One class on a closed geodesic: intrinsic Gram indefinite at large
    // bandwidth. Two classes so the classifier is well formed.
    testsupport::GeodesicCircle circle(5);
    LandmarkDataset dataset;
    dataset.k = 5;
    for (int i = 0; i < 8; ++i) {
        LandmarkConfig record;
        record.id = "c" + std::to_string(i);
        record.label = i < 4 ? 0 : 1;
        const double t = (i % 4) * std::numbers::pi / 4 + (i < 4 ? 0.0 : 0.02);
        record.points = circle.at(t).coords();
        dataset.records.push_back(std::move(record));
    }
    dataset.class_names[0] = "a";
    dataset.class_names[1] = "b";
    const std::string train = dir.file("train.csv");
    save_landmark_csv(dataset, train);

    const std::string base = "classify --train " + train + " --test " + train +
                             " --method rie-krrc --lambda 1e-9 --sigma-sq 100 --output " +
                             dir.file("pred.csv");
    const RunResult fail = run_cli(base, dir);
    CHECK(fail.exit_code == 4);

    const RunResult ok = run_cli(base + " --allow-indefinite", dir);
    CHECK(ok.exit_code == 0);
    CHECK(ok.err.find("indefinite") != std::string::npos);
}

TEST_CASE("metrics command scores an external prediction file") {
    TempDir dir("skr-cli");
    const std::string preds = dir.file("preds.csv");
    // Balanced two-class truth, everything predicted as class 0: macro
    // precision 1/4, recall 1/2, accuracy 1/2.
    std::ofstream out(preds);
    out << "id,true_label,predicted_label\n";
    for (int i = 0; i < 8; ++i) out << "r" << i << ',' << (i % 2) << ",0\n";
    out.close();

    const RunResult r = run_cli("metrics --input " + preds, dir);
    REQUIRE(r.exit_code == 0);
    const nlohmann::json report = nlohmann::json::parse(r.out);
    CHECK(report.at("precision").get<double>() == doctest::Approx(0.25));
    CHECK(report.at("recall").get<double>() == doctest::Approx(0.5));
    CHECK(report.at("accuracy").get<double>() == doctest::Approx(0.5));

    const RunResult bad = run_cli("metrics --input " + dir.file("absent.csv"), dir);
    CHECK(bad.exit_code == 2);
}

TEST_CASE("benchmark writes results, summary, and plot files") {
    TempDir dir("skr-cli");
    const std::string input = dir.file("data.csv");
    save_landmark_csv(two_cluster_dataset(20, 0.05, 8), input);
    const std::string out_dir = dir.file("bench");

    const RunResult r = run_cli("benchmark --input " + input + " --output " + out_dir +
                                    " --replicates 1 --subsample-sizes 10"
                                    " --lambda-grid 0.01 --sigma-sq-grid 1"
                                    " --method vwg-krrc --seed 17",
                                dir);
    REQUIRE(r.exit_code == 0);

    const std::string results = read_text(out_dir + "/results.csv");
    CHECK(count_lines(results) == 2);  // header + one cell
    CHECK(results.find("vwg-krrc,10,0,") != std::string::npos);

    const std::string summary = read_text(out_dir + "/summary.csv");
    CHECK(count_lines(summary) == 5);  // header + 4 metrics
    CHECK(std::filesystem::exists(out_dir + "/plots/vwg-krrc_ni10.csv"));
}

TEST_CASE("benchmark cells are reused under --resume") {
    TempDir dir("skr-cli");
    const std::string input = dir.file("data.csv");
    save_landmark_csv(two_cluster_dataset(20, 0.05, 9), input);
    const std::string out_dir = dir.file("bench");
    const std::string flags = "benchmark --input " + input + " --output " + out_dir +
                              " --replicates 2 --subsample-sizes 6,10"
                              " --lambda-grid 0.01,1 --sigma-sq-grid 0.5,5"
                              " --method vwg-krrc,naive-rrc --seed 21";

    const RunResult first = run_cli(flags, dir);
    REQUIRE(first.exit_code == 0);
    const std::string results = read_text(out_dir + "/results.csv");
    CHECK(count_lines(results) == 9);  // header + 2 methods x 2 sizes x 2 replicates

    // Wipe the merged outputs but keep the per-cell fragments.
    std::filesystem::remove(out_dir + "/results.csv");
    std::filesystem::remove(out_dir + "/summary.csv");
    const RunResult resumed = run_cli(flags + " --resume", dir);
    REQUIRE(resumed.exit_code == 0);
    CHECK(resumed.err.find("reusing 8 of 8") != std::string::npos);
    CHECK(read_text(out_dir + "/results.csv") == results);
}

TEST_CASE("resume ignores cells computed under a different plan") {
    TempDir dir("skr-cli");
    const std::string input = dir.file("data.csv");
    save_landmark_csv(two_cluster_dataset(15, 0.05, 12), input);
    const std::string out_dir = dir.file("bench");
    const std::string base = "benchmark --input " + input + " --output " + out_dir +
                             " --replicates 1 --subsample-sizes 5 --sigma-sq-grid 1"
                             " --method vwg-krrc --seed 3";

    REQUIRE(run_cli(base + " --lambda-grid 0.01", dir).exit_code == 0);
    const RunResult second = run_cli(base + " --lambda-grid 1 --resume", dir);
    REQUIRE(second.exit_code == 0);
    // The old cell was keyed under the other grid, so nothing is reused and
    // the fresh run reflects the new grid.
    CHECK(second.err.find("reusing") == std::string::npos);
    CHECK(read_text(out_dir + "/results.csv").find("vwg-krrc,5,0,1,") != std::string::npos);
}

TEST_CASE("benchmark output does not depend on the worker count") {
    TempDir dir("skr-cli");
    const std::string input = dir.file("data.csv");
    save_landmark_csv(two_cluster_dataset(25, 0.08, 10), input);

    const std::string common = "benchmark --input " + input +
                               " --replicates 2 --subsample-sizes 8"
                               " --lambda-grid 0.01,1 --sigma-sq-grid 1"
                               " --method vwg-krrc,rie-krrc --seed 33";
    const RunResult a = run_cli(common + " --output " + dir.file("w1") + " --workers 1", dir);
    const RunResult b = run_cli(common + " --output " + dir.file("w2") + " --workers 2", dir);
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(read_text(dir.file("w1") + "/results.csv") ==
          read_text(dir.file("w2") + "/results.csv"));
    CHECK(read_text(dir.file("w1") + "/summary.csv") ==
          read_text(dir.file("w2") + "/summary.csv"));
}

TEST_CASE("environment seed is honored") {
    TempDir dir("skr-cli");
    const std::string input = dir.file("data.csv");
    save_landmark_csv(two_cluster_dataset(12, 0.05, 11), input);

    const std::string flags = " benchmark --input " + input +
                              " --replicates 1 --subsample-sizes 5 --lambda-grid 0.1"
                              " --sigma-sq-grid 1 --method vwg-krrc --output ";
    // Seed via environment on one run, via flag on the other.
    const std::string out_env = dir.file("env.out");
    const std::string err_env = dir.file("env.err");
    const int status = std::system(("SHAPEKRRC_SEED=555 " + g_cli_bin + flags + dir.file("a") +
                                    " >" + out_env + " 2>" + err_env)
                                       .c_str());
    REQUIRE(WIFEXITED(status));
    REQUIRE(WEXITSTATUS(status) == 0);
    const RunResult explicit_seed = run_cli(flags + dir.file("b") + " --seed 555", dir);
    REQUIRE(explicit_seed.exit_code == 0);
    CHECK(read_text(dir.file("a") + "/results.csv") == read_text(dir.file("b") + "/results.csv"));
}

int main(int argc, char** argv) {
    doctest::Context context;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg.rfind("--cli-bin=", 0) == 0) g_cli_bin = arg.substr(10);
    }
    if (g_cli_bin.empty()) {
        std::fprintf(stderr, "usage: cli_tests --cli-bin=<path to shapekrrc binary>\n");
        return 2;
    }
    context.applyCommandLine(argc, argv);
    return context.run();
}
