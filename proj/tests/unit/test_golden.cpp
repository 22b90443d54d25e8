#include "doctest.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fracstorm/excitation.hpp"
#include "fracstorm/fracfun.hpp"
#include "fracstorm/kernels.hpp"
#include "fracstorm/moments.hpp"
#include "fracstorm/riesz.hpp"

using namespace fracstorm;

namespace {

struct GoldenRow {
    std::string function;
    double p1 = 0.0, p2 = 0.0, input = 0.0, expected = 0.0, tolerance = 0.0;
    std::string source;
};

std::vector<GoldenRow> load_golden() {
    std::ifstream in(FRACSTORM_GOLDEN_CSV);
    REQUIRE(in.good());
    std::vector<GoldenRow> rows;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::stringstream ss(line);
        std::vector<std::string> cells;
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 7);
        const auto num = [](const std::string& s) { return s.empty() ? 0.0 : std::stod(s); };
        rows.push_back({cells[0], num(cells[1]), num(cells[2]), num(cells[3]), num(cells[4]), num(cells[5]), cells[6]});
    }
    return rows;
}

double evaluate(const GoldenRow& r) {
    if (r.function == "ml") return mittag_leffler(r.p1, r.input);
    if (r.function == "gsub") return stable_subordinator_density(r.p1, r.input);
    if (r.function == "finv") return inverse_subordinator_density(r.p1, r.p2, r.input);
    if (r.function == "stable") return stable_density(r.p1, 1.0, 1, r.p2, r.input);
    if (r.function == "cstar") return green_l2_constant(r.p1, r.p2, 1.0, static_cast<int>(r.input));
    if (r.function == "series") return lower_series(r.input, r.p1);
    if (r.function == "renewal") return renewal_volterra_solve(1.0, r.p2, r.p1, r.input, 256).values().back();
    if (r.function == "riesz") return riesz_cell_average(r.p1, static_cast<int>(r.input));
    if (r.function == "index") return theoretical_index(r.p1, r.p2, r.input, NoiseModel::white());
    FAIL("unknown golden function " << r.function);
    return 0.0;
}

}  // namespace

TEST_CASE("golden-value corpus") {
    const auto rows = load_golden();
    CHECK(rows.size() >= 10);
    for (const auto& r : rows) {
        INFO(r.function << "(" << r.p1 << ", " << r.p2 << "; " << r.input << ") from " << r.source);
        const double v = evaluate(r);
        CHECK(std::abs(v / r.expected - 1.0) <= r.tolerance);
    }
}
