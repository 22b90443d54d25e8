#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "fracstorm/config.hpp"
#include "fracstorm/io.hpp"
#include "fracstorm/validation.hpp"

using namespace fracstorm;

TEST_CASE("configuration round trip") {
    RunConfig cfg;
    cfg.set("model.alpha", "1.5");
    cfg.set("model.beta", "0.3");
    cfg.set("noise.kind", "riesz");
    cfg.set("noise.gamma", "0.25");
    cfg.set("grid.n", "40");
    cfg.set("time.T", "0.37");
    cfg.set("run.seed", "123456789012");
    cfg.set("sigma.table", "0:0;1:0.7;2:1.1");
    cfg.set("excite.backend", "montecarlo");
    cfg.set("excite.functional", "sup");
    cfg.set("initial.u0", "bump:2");
    const RunConfig back = RunConfig::parse(cfg.serialize());
    CHECK(back == cfg);
    CHECK(back.model.alpha == 1.5);
    CHECK(back.seed == 123456789012ULL);
}

TEST_CASE("configuration parsing: comments, whitespace and errors") {
    const RunConfig cfg = RunConfig::parse("# comment\n  model.beta = 0.7  \n\ntime.nt=10 # trailing\n");
    CHECK(cfg.model.beta == 0.7);
    CHECK(cfg.nt == 10);
    CHECK_THROWS_AS(RunConfig::parse("model.colour = red\n"), DomainError);
    CHECK_THROWS_AS(RunConfig::parse("model.alpha = two\n"), DomainError);
    CHECK_THROWS_AS(RunConfig::from_file("/nonexistent/fracstorm.cfg"), DomainError);
    try {
        RunConfig::parse("model.alpha = 1\nmodel.beta = 1\n");  // d = 1 is not below min(2, 1/beta) alpha = 1
        FAIL("expected a DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("violated") != std::string::npos);
    }
}

TEST_CASE("thread count falls back to FRACSTORM_THREADS") {
    CHECK(resolve_threads(3) == 3);
    ::setenv("FRACSTORM_THREADS", "5", 1);
    CHECK(resolve_threads(0) == 5);
    ::setenv("FRACSTORM_THREADS", "many", 1);
    CHECK_THROWS_AS(resolve_threads(0), DomainError);
    ::unsetenv("FRACSTORM_THREADS");
    CHECK(resolve_threads(0) == 0);
}

TEST_CASE("CSV output: comment line, header, quoting and full precision") {
    CHECK(io::format_double(0.1) == "0.10000000000000001");
    CHECK(io::CsvWriter::quote("plain") == "plain");
    CHECK(io::CsvWriter::quote("a,b") == "\"a,b\"");
    CHECK(io::CsvWriter::quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
    io::CsvWriter csv("fracstorm test seed=1", {"x", "label"});
    csv.row({io::format_double(1.5), "one, two"});
    CHECK(csv.str() == "# fracstorm test seed=1\r\nx,label\r\n1.5,\"one, two\"\r\n");
}

TEST_CASE("atomic write creates directories and leaves no temporary file") {
    const auto dir = std::filesystem::temp_directory_path() / "fracstorm_unit_io" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    const auto path = (dir / "out.csv").string();
    io::atomic_write(path, "first");
    io::atomic_write(path, "second");
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == "second");
    CHECK(!std::filesystem::exists(path + ".tmp"));
    std::filesystem::remove_all(dir.parent_path());
}

TEST_CASE("excitation JSON summary follows the documented schema") {
    ExcitationFit fit;
    fit.lambdas = {1e2, 1e3, 1e4, 1e5};
    fit.log_values = {10.0, 100.0, 1000.0, 10000.0};
    fit.log_stderr.assign(4, 0.0);
    fit.methods.assign(4, "time_stepping");
    fit.fit_indices = {0, 1, 2, 3};
    fit.residuals.assign(4, 0.0);
    fit.slope = 1.0;
    fit.theory = 1.0;
    fit.tolerance = 0.1;
    fit.t = 0.1;
    fit.pass = true;
    const auto j = nlohmann::json::parse(io::excitation_json(fit, "fracstorm x", 9));
    for (const char* key : {"version", "seed", "config", "functional", "backend", "t", "slope", "intercept", "theory",
                            "tolerance", "relative_error", "pass", "verdict", "lambdas", "log_E", "fit_indices", "residuals"})
        CHECK(j.contains(key));
    CHECK(j["seed"] == 9);
    CHECK(j["verdict"] == "PASS ±10%");
    CHECK(j["lambdas"].size() == 4);
    const std::string svg = io::excitation_svg(fit);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("validation report is byte-identical for identical seeds and rejects unknown suites") {
    ValidationOptions opt;
    opt.only = {"cli"};
    opt.seed = 7;
    const std::string a = format_report(run_validation(opt, {}));
    const std::string b = format_report(run_validation(opt, {}));
    CHECK(a == b);
    CHECK(a.find("checks passed") != std::string::npos);
    opt.only = {"nonsense"};
    CHECK_THROWS_AS(run_validation(opt, {}), DomainError);
}
