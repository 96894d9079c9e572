#include "skelstat/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "skelstat/io.hpp"

namespace skelstat {

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return format_real(v);
}

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string report_csv(const TestReport& report) {
  std::ostringstream out;
  out << "gop_kind,index,statistic,raw_p,bh_p,bonf_p,sig_raw,sig_bh,sig_bonf\n";
  for (const auto& g : report.gops) {
    out << to_string(g.id.kind) << ',' << g.id.index << ',' << num(g.statistic) << ',' << num(g.raw_p) << ','
        << num(g.bh_p) << ',' << num(g.bonf_p) << ',' << int(g.sig_raw) << ',' << int(g.sig_bh) << ','
        << int(g.sig_bonf) << '\n';
  }
  return out.str();
}

std::string summary_json(const TestReport& report) {
  using ojson = nlohmann::ordered_json;
  const StudyOptions& o = report.options;
  ojson j;
  j["mode"] = to_string(o.mode);
  j["scaling"] = o.scaling;
  j["euclideanization"] = to_string(o.euclid);
  j["permutations"] = o.permutations;
  j["seed"] = o.seed;
  j["alpha"] = o.alpha;
  j["fdr"] = o.fdr;
  j["n1"] = report.n1;
  j["n2"] = report.n2;
  j["n_spokes"] = report.n_spokes;
  j["n_points"] = report.n_points;
  j["K"] = report.k();
  j["K_formula"] = o.mode == StudyMode::Lp ? lp_gop_count(report.n_spokes, report.n_points)
                                           : gp_gop_count(report.n_spokes, report.n_points);
  j["significant"] = {{"raw", report.count_raw()}, {"bh", report.count_bh()}, {"bonferroni", report.count_bonf()}};

  std::map<std::string, std::array<int, 4>> by_kind;  // total, raw, bh, bonf
  ojson degenerate = ojson::array(), ridge = ojson::array(), errors = ojson::array();
  for (const auto& g : report.gops) {
    auto& c = by_kind[to_string(g.id.kind)];
    ++c[0];
    c[1] += g.sig_raw;
    c[2] += g.sig_bh;
    c[3] += g.sig_bonf;
    const ojson id = {{"gop_kind", to_string(g.id.kind)}, {"index", g.id.index}};
    if (g.degenerate) degenerate.push_back(id);
    if (g.ridge) ridge.push_back(id);
    if (!g.error.empty()) {
      ojson e = id;
      e["error"] = g.error;
      errors.push_back(e);
    }
  }
  ojson kinds = ojson::object();
  for (const auto& [name, c] : by_kind) {
    kinds[name] = {{"count", c[0]}, {"raw", c[1]}, {"bh", c[2]}, {"bonferroni", c[3]}};
  }
  j["by_kind"] = kinds;
  j["degenerate"] = degenerate;
  j["ridge"] = ridge;
  j["errors"] = errors;
  return j.dump(2) + "\n";
}

std::string pvalue_svg(const TestReport& report) {
  const double w = 640, h = 400, left = 60, right = 20, top = 30, bottom = 50;
  const double pw = w - left - right, ph = h - top - bottom;
  std::vector<double> raw, bh, bonf;
  for (const auto& g : report.gops) {
    raw.push_back(g.raw_p);
    bh.push_back(g.bh_p);
    bonf.push_back(g.bonf_p);
  }
  std::sort(raw.begin(), raw.end());
  std::sort(bh.begin(), bh.end());
  std::sort(bonf.begin(), bonf.end());
  const size_t k = raw.size();
  auto x_of = [&](size_t i) { return left + (k > 1 ? pw * static_cast<double>(i) / static_cast<double>(k - 1) : 0.0); };
  auto y_of = [&](double p) { return top + ph * (1.0 - std::clamp(p, 0.0, 1.0)); };
  auto polyline = [&](const std::vector<double>& v, const char* color) {
    std::string pts;
    for (size_t i = 0; i < v.size(); ++i) pts += svg_num(x_of(i)) + "," + svg_num(y_of(v[i])) + " ";
    return "  <polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
           "\"/>\n";
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  s << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "  <line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";
  s << "  <line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    s << "  <text x=\"" << left - 8 << "\" y=\"" << svg_num(y_of(t) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
      << t << "</text>\n";
  }
  s << "  <text x=\"" << left + pw / 2 << "\" y=\"" << h - 15 << "\" font-size=\"12\" text-anchor=\"middle\">GOP rank ("
    << k << " GOPs)</text>\n";
  s << "  <text x=\"15\" y=\"" << top + ph / 2 << "\" font-size=\"12\" transform=\"rotate(-90 15 " << top + ph / 2
    << ")\" text-anchor=\"middle\">p-value</text>\n";
  s << "  <line x1=\"" << left << "\" y1=\"" << svg_num(y_of(report.options.alpha)) << "\" x2=\"" << left + pw
    << "\" y2=\"" << svg_num(y_of(report.options.alpha)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  s << polyline(raw, "black") << polyline(bh, "blue") << polyline(bonf, "red");
  const char* labels[3][2] = {{"raw", "black"}, {"BH", "blue"}, {"Bonferroni", "red"}};
  for (int i = 0; i < 3; ++i) {
    s << "  <text x=\"" << left + 10 << "\" y=\"" << top + 15 + 15 * i << "\" font-size=\"12\" fill=\"" << labels[i][1]
      << "\">" << labels[i][0] << "</text>\n";
  }
  s << "  <text x=\"" << left + pw - 5 << "\" y=\"" << svg_num(y_of(report.options.alpha) - 4)
    << "\" font-size=\"11\" fill=\"gray\" text-anchor=\"end\">alpha = " << report.options.alpha << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

std::string significance_map_csv(const TestReport& report) {
  std::ostringstream out;
  out << "gop_kind,index,significant\n";
  for (const auto& g : report.gops) out << to_string(g.id.kind) << ',' << g.id.index << ',' << int(g.sig_bh) << '\n';
  return out.str();
}

void write_report(const TestReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir / "report.csv", report_csv(report));
  write_text_file(out_dir / "summary.json", summary_json(report));
  write_text_file(out_dir / "pvalues.svg", pvalue_svg(report));
  write_text_file(out_dir / "significance_map.csv", significance_map_csv(report));
}

}  // namespace skelstat
