#ifndef SKELSTAT_REPORT_HPP
#define SKELSTAT_REPORT_HPP

#include <filesystem>
#include <string>

#include "skelstat/hypothesis.hpp"

namespace skelstat {

/// gop_kind,index,statistic,raw_p,bh_p,bonf_p,sig_raw,sig_bh,sig_bonf
std::string report_csv(const TestReport& report);

/// Options, group sizes, K and significance counts (overall and per kind).
std::string summary_json(const TestReport& report);

/// Sorted raw, BH and Bonferroni p-values against rank, with the alpha line.
std::string pvalue_svg(const TestReport& report);

/// One row per GOP: gop_kind,index,significant (BH at the FDR level).
std::string significance_map_csv(const TestReport& report);

/// Writes report.csv, summary.json, pvalues.svg and significance_map.csv.
void write_report(const TestReport& report, const std::filesystem::path& out_dir);

}  // namespace skelstat

#endif  // SKELSTAT_REPORT_HPP
