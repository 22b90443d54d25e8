#include "fracstorm/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracstorm/error.hpp"

namespace fracstorm::io {

namespace fs = std::filesystem;

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
    const fs::path target(path);
    std::error_code ec;
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path(), ec);
        if (ec) domain_fail("cannot create directory " + target.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) domain_fail("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) domain_fail("write failed for " + tmp.string());
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        domain_fail("cannot rename into " + path);
    }
}

CsvWriter::CsvWriter(std::string comment, std::vector<std::string> header)
    : comment_(std::move(comment)), header_(std::move(header)) {}

CsvWriter& CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size()) domain_fail("CsvWriter: row width differs from the header");
    rows_.push_back(cells);
    return *this;
}

std::string CsvWriter::quote(const std::string& cell) {
    if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
    std::string q = "\"";
    for (char c : cell) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::string CsvWriter::str() const {
    std::ostringstream os;
    std::string comment = comment_;
    std::replace(comment.begin(), comment.end(), '\n', ' ');
    os << "# " << comment << "\r\n";
    auto line = [&os](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << quote(cells[i]);
        os << "\r\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return os.str();
}

std::string moment_field_csv(const MomentField& field, const std::string& comment) {
    CsvWriter csv(comment, {"t", "x", "log_M"});
    for (std::size_t j = 0; j < field.times.size(); ++j)
        for (int i = 0; i < field.grid.n; ++i)
            csv.row({format_double(field.times[j]), format_double(field.grid.nodes[i]),
                     format_double(field.log_M(static_cast<int>(j), i))});
    return csv.str();
}

std::string moment_estimate_csv(const MomentEstimate& est, const std::string& comment) {
    CsvWriter csv(comment, {"t", "x", "mean", "std_error"});
    for (std::size_t j = 0; j < est.times.size(); ++j)
        for (int i = 0; i < est.grid.n; ++i)
            csv.row({format_double(est.times[j]), format_double(est.grid.nodes[i]),
                     format_double(est.mean(static_cast<Eigen::Index>(j), i)),
                     format_double(est.std_error(static_cast<Eigen::Index>(j), i))});
    return csv.str();
}

std::string excitation_csv(const ExcitationFit& fit, const std::string& comment) {
    CsvWriter csv(comment, {"lambda", "log_E", "log_E_stderr", "functional", "backend", "method", "in_fit"});
    for (std::size_t i = 0; i < fit.lambdas.size(); ++i) {
        const bool used = std::find(fit.fit_indices.begin(), fit.fit_indices.end(), static_cast<int>(i)) !=
                          fit.fit_indices.end();
        csv.row({format_double(fit.lambdas[i]), format_double(fit.log_values[i]),
                 format_double(i < fit.log_stderr.size() ? fit.log_stderr[i] : 0.0), to_string(fit.functional),
                 to_string(fit.backend), i < fit.methods.size() ? fit.methods[i] : "", used ? "1" : "0"});
    }
    return csv.str();
}

std::string excitation_json(const ExcitationFit& fit, const std::string& config_summary, std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["version"] = FRACSTORM_VERSION;
    j["seed"] = seed;
    j["config"] = config_summary;
    j["functional"] = to_string(fit.functional);
    j["backend"] = to_string(fit.backend);
    j["t"] = fit.t;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["theory"] = fit.theory;
    j["tolerance"] = fit.tolerance;
    j["relative_error"] = fit.theory > 0.0 ? fit.slope / fit.theory - 1.0 : 0.0;
    j["pass"] = fit.pass;
    j["verdict"] = fit.verdict();
    j["lambdas"] = fit.lambdas;
    j["log_E"] = fit.log_values;
    j["fit_indices"] = fit.fit_indices;
    j["residuals"] = fit.residuals;
    return j.dump(2) + "\n";
}

std::string excitation_svg(const ExcitationFit& fit) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < fit.lambdas.size(); ++i) {
        if (!(fit.log_values[i] > 0.0) || !(fit.lambdas[i] > 0.0)) continue;
        xs.push_back(std::log(fit.lambdas[i]));
        ys.push_back(std::log(fit.log_values[i]));
    }
    const double W = 640.0;
    const double H = 420.0;
    const double ml = 70.0;
    const double mr = 20.0;
    const double mt = 40.0;
    const double mb = 55.0;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (xs.size() < 2) {
        os << "<text x=\"20\" y=\"30\">no points with E_t &gt; 1</text>\n</svg>\n";
        return os.str();
    }
    // theory line through the centroid of the fitted points
    double cx = 0.0;
    double cy = 0.0;
    for (int i : fit.fit_indices) {
        cx += std::log(fit.lambdas[i]);
        cy += std::log(fit.log_values[i]);
    }
    if (!fit.fit_indices.empty()) {
        cx /= fit.fit_indices.size();
        cy /= fit.fit_indices.size();
    } else {
        cx = xs.back();
        cy = ys.back();
    }
    const double x0 = *std::min_element(xs.begin(), xs.end());
    const double x1 = *std::max_element(xs.begin(), xs.end());
    const double ty0 = cy + fit.theory * (x0 - cx);
    const double ty1 = cy + fit.theory * (x1 - cx);
    double y0 = std::min({*std::min_element(ys.begin(), ys.end()), ty0, ty1});
    double y1 = std::max({*std::max_element(ys.begin(), ys.end()), ty0, ty1});
    const double pad = 0.05 * (y1 - y0 + 1e-12);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
    char buf[256];
    // axes
    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0;
        const double yv = y0 + (y1 - y0) * k / 4.0;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.2f</text>\n"
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.2f</text>\n",
                      px(xv), H - mb + 18.0, xv, ml - 6.0, py(yv) + 4.0, yv);
        os << buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">log lambda</text>\n"
                  "<text x=\"16\" y=\"%.1f\" transform=\"rotate(-90 16 %.1f)\" text-anchor=\"middle\">log log E_t</text>\n",
                  (ml + W - mr) / 2.0, H - 12.0, (mt + H - mb) / 2.0, (mt + H - mb) / 2.0);
    os << buf;
    // measured series
    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", px(xs[i]), py(ys[i]));
        os << buf;
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"#1f77b4\"/>\n", px(xs[i]),
                      py(ys[i]));
        os << buf;
    }
    // theory slope
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#d62728\" stroke-width=\"1.5\" "
                  "stroke-dasharray=\"6 4\"/>\n",
                  px(x0), py(ty0), px(x1), py(ty1));
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"22\" fill=\"#1f77b4\">fitted slope %.4f</text>\n"
                  "<text x=\"%.1f\" y=\"22\" fill=\"#d62728\">theory slope %.4f (%s)</text>\n",
                  ml, fit.slope, ml + 200.0, fit.theory, fit.verdict().c_str());
    os << buf << "</svg>\n";
    return os.str();
}

}  // namespace fracstorm::io
