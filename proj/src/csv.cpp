#include "seqsense/csv.hpp"

#include "seqsense/config.hpp"

namespace seqsense {

const std::vector<std::string>& curve_header() {
    static const std::vector<std::string> header{
        "c",         "gamma0",      "gamma1",      "beta0",          "beta1",         "p_fa",
        "p_fa_hw",   "p_md",        "p_md_hw",     "e0_n",           "e0_n_hw",       "e1_n",
        "e1_n_hw",   "truncated0",  "truncated1",  "approx_e0_n",    "approx_e1_n",   "approx_p_fa_lo",
        "approx_p_fa_hi"};
    return header;
}

std::string csv_number(std::optional<double> x) { return x ? format_double(*x) : std::string(); }

namespace {

std::string joined(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ';';
        s += format_double(xs[i]);
    }
    return s;
}

}  // namespace

Table curve_table(const std::vector<CurveRow>& rows) {
    Table t;
    t.header = curve_header();
    for (const CurveRow& r : rows) {
        t.rows.push_back({format_double(r.c), joined(r.gamma0), joined(r.gamma1), format_double(r.beta0),
                          format_double(r.beta1), format_double(r.p_fa), format_double(r.p_fa_hw),
                          format_double(r.p_md), format_double(r.p_md_hw), format_double(r.e0_n),
                          format_double(r.e0_n_hw), format_double(r.e1_n), format_double(r.e1_n_hw),
                          std::to_string(r.truncated0), std::to_string(r.truncated1), csv_number(r.approx_e0_n),
                          csv_number(r.approx_e1_n), csv_number(r.approx_p_fa_lo), csv_number(r.approx_p_fa_hi)});
    }
    return t;
}

void write_csv(std::ostream& out, const Table& table, const std::vector<std::string>& comments) {
    for (const auto& c : comments) out << "# " << c << '\n';
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
}

}  // namespace seqsense
