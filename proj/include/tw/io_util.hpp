#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tw {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Wrap an angle into [0, 2*pi).
inline double wrap_angle(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r == kTwoPi) r = 0.0;
    return r;
}

// Shortest-round-trip style formatting used for all CSV/JSON numeric output;
// %.17g text parses back to the identical double, which is what the
// byte-identical rerun contract relies on.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// FNV-1a, used for oracle cache keys.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

// Minimal CSV writer: quoting is unnecessary for our schemas (no commas in
// cells), so rows are joined verbatim.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void add_row(std::vector<std::string> cells);
    std::string to_string() const;
    void save(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Mean and standard error of a sample (stderr = stddev / sqrt(n), n>1).
struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};
MeanStderr mean_stderr(const std::vector<double>& xs);

double median(std::vector<double> xs);

// Empirical q-quantile (nearest-rank on sorted data).
double quantile(std::vector<double> xs, double q);

}  // namespace tw
