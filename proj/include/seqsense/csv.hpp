#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace seqsense {

inline constexpr int kCurveFormatVersion = 1;

struct CurveRow {
    double c = 0.0;
    std::vector<double> gamma0;
    std::vector<double> gamma1;
    double beta0 = 0.0;
    double beta1 = 0.0;
    double p_fa = 0.0;
    double p_fa_hw = 0.0;
    double p_md = 0.0;
    double p_md_hw = 0.0;
    double e0_n = 0.0;
    double e0_n_hw = 0.0;
    double e1_n = 0.0;
    double e1_n_hw = 0.0;
    std::int64_t truncated0 = 0;
    std::int64_t truncated1 = 0;
    std::optional<double> approx_e0_n;
    std::optional<double> approx_e1_n;
    std::optional<double> approx_p_fa_lo;
    std::optional<double> approx_p_fa_hi;
};

const std::vector<std::string>& curve_header();

/// Plain table; cells are written verbatim, so callers format numbers.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table curve_table(const std::vector<CurveRow>& rows);

/// Writes '#'-prefixed comment lines, then the header and rows.
void write_csv(std::ostream& out, const Table& table, const std::vector<std::string>& comments);

/// Empty string for nullopt.
std::string csv_number(std::optional<double> x);

}  // namespace seqsense
