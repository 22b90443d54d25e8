#pragma once

#include <string>
#include <vector>

#include "fracstorm/excitation.hpp"
#include "fracstorm/moments.hpp"
#include "fracstorm/simulate.hpp"

namespace fracstorm::io {

/// %.17g: round-trips every double.
std::string format_double(double x);

/// Writes `content` to a temporary sibling and renames it over `path`, so readers never see a
/// partial artifact. Parent directories are created. DomainError if the path is not writable.
void atomic_write(const std::string& path, const std::string& content);

/// RFC-4180 table with a leading `# comment` line and a header row.
class CsvWriter {
public:
    CsvWriter(std::string comment, std::vector<std::string> header);

    CsvWriter& row(const std::vector<std::string>& cells);
    std::string str() const;

    static std::string field(double x) { return format_double(x); }
    static std::string quote(const std::string& cell);

private:
    std::string comment_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Columns t, x, log_M (one row per grid point and time).
std::string moment_field_csv(const MomentField& field, const std::string& comment);

/// Columns t, x, mean, std_error.
std::string moment_estimate_csv(const MomentEstimate& est, const std::string& comment);

/// Columns lambda, log_E, log_E_stderr, functional, backend, method, in_fit.
std::string excitation_csv(const ExcitationFit& fit, const std::string& comment);

/// JSON summary of an excitation fit (schema in README).
std::string excitation_json(const ExcitationFit& fit, const std::string& config_summary, std::uint64_t seed);

/// Line chart of log log E_t against log λ with the fitted line and a line of the theoretical
/// slope through the fit centroid.
std::string excitation_svg(const ExcitationFit& fit);

}  // namespace fracstorm::io
