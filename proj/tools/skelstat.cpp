// skelstat command-line interface.
// Exit codes: 0 success, 1 numerical failure, 2 usage, IO or validation error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "skelstat/error.hpp"
#include "skelstat/hypothesis.hpp"
#include "skelstat/io.hpp"
#include "skelstat/population.hpp"
#include "skelstat/reparam.hpp"
#include "skelstat/report.hpp"
#include "skelstat/simulation.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using namespace skelstat;

namespace {

void print_json(const ojson& j) { std::cout << j.dump(2) << std::endl; }

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// ---------------------------------------------------------------------------
// reparam

struct ReparamArgs {
  std::string in, out, direction = "gp2lp";
  bool scale = false;
  bool check = false;
  double target_size = 0.0;
};

int cmd_reparam(const ReparamArgs& a) {
  std::vector<std::string> warnings;
  ojson info;
  if (a.direction == "gp2lp") {
    const GpDsRep gp = load_gp(a.in, &warnings);
    LpDsRep lp = gp_to_lp(gp);
    info["unscaled_lp_size"] = lp.lp_size;
    if (a.scale) lp = scale_lp(lp);
    save_lp(lp, a.out);
    info["lp_size"] = lp.total_length();
    info["scaled"] = lp.scaled;
    info["n_spokes"] = lp.spoke_count();
    info["n_points"] = lp.point_count();
    info["K_lp"] = lp_gop_count(lp.spoke_count(), lp.point_count());
    info["K_gp"] = gp_gop_count(lp.spoke_count(), lp.point_count());
    if (a.check) {
      // Reconstruct and compare with the input posed at the canonical root.
      ReconstructOptions ro;
      if (lp.scaled) ro.target_size = lp.lp_size;
      const GpDsRep back = lp_to_gp(lp, ro);
      const GpDsRep posed = transform(gp, canonical_root_motion(gp));
      const double pos_err = (back.skeletal_points - posed.skeletal_points).cwiseAbs().maxCoeff();
      double dir_err = 0.0, len_err = 0.0;
      for (int i = 0; i < gp.spoke_count(); ++i) {
        dir_err = std::max(dir_err, geodesic_dist(back.spokes[i].dir, posed.spokes[i].dir));
        len_err = std::max(len_err, std::abs(back.spokes[i].length - posed.spokes[i].length));
      }
      const bool ok = pos_err < 1e-8 && dir_err < 1e-9;
      info["round_trip"] = {{"max_position_error", pos_err},
                            {"max_direction_error", dir_err},
                            {"max_length_error", len_err},
                            {"position_threshold", 1e-8},
                            {"direction_threshold", 1e-9},
                            {"pass", ok}};
    }
  } else if (a.direction == "lp2gp") {
    LpDsRep lp = load_lp(a.in, &warnings);
    if (a.scale) lp = scale_lp(lp);
    ReconstructOptions ro;
    if (a.target_size > 0) {
      ro.target_size = a.target_size;
    } else if (lp.scaled) {
      ro.target_size = lp.lp_size;
    }
    const GpDsRep gp = lp_to_gp(lp, ro);
    save_gp(gp, a.out);
    info["lp_size"] = lp.lp_size;
    info["n_spokes"] = gp.spoke_count();
    info["n_points"] = gp.point_count();
    info["K_lp"] = lp_gop_count(gp.spoke_count(), gp.point_count());
    info["K_gp"] = gp_gop_count(gp.spoke_count(), gp.point_count());
    info["gp_size"] = gp_size(gp);
  } else {
    throw ValidationError("--direction must be gp2lp or lp2gp");
  }
  print_warnings(warnings);
  print_json(info);
  return 0;
}

// ---------------------------------------------------------------------------
// mean

struct MeanArgs {
  std::string in_dir, out, reconstruct, tips, compare, init = "B";
  bool frechet = false, arithmetic = false, scale = false;
  double kappa_frame = 600.0;
  int threads = 0;
};

std::vector<LpDsRep> load_lp_dir(const fs::path& dir, std::vector<fs::path>* names = nullptr) {
  const auto files = list_dsrep_files(dir);
  if (files.empty()) throw ValidationError("no .json files in " + dir.string());
  std::vector<LpDsRep> out;
  std::vector<std::string> warnings;
  for (const auto& f : files) out.push_back(load_lp(f, &warnings));
  print_warnings(warnings);
  std::string mismatched;
  for (size_t i = 1; i < out.size(); ++i) {
    if (!structurally_equal(out[0], out[i])) mismatched += " " + files[i].filename().string();
  }
  if (!mismatched.empty())
    throw ValidationError("structural mismatch with " + files[0].filename().string() + ":" + mismatched);
  if (names) *names = files;
  return out;
}

int cmd_mean(const MeanArgs& a) {
  std::vector<LpDsRep> members = load_lp_dir(a.in_dir);
  if (a.scale) {
    for (auto& m : members) m = scale_lp(m);
  }
  const size_t n = members.size();
  const LpPopulation pop = LpPopulation::from_members(std::move(members));
  MeanOptions opt;
  opt.direction_mean = a.frechet ? DirectionMean::Frechet : DirectionMean::Pns;
  opt.length_mean = a.arithmetic ? LengthMean::Arithmetic : LengthMean::Geometric;
  if (a.init == "A") {
    opt.frame.initial = InitialFrame::CentroidRotation;
  } else if (a.init != "B") {
    throw ValidationError("--init must be A or B");
  }
  opt.threads = a.threads;
  const MeanLpResult res = mean_lp(pop, opt);
  print_warnings(res.warnings);
  save_lp(res.mean, a.out);

  ojson info;
  info["members"] = n;
  info["scaled"] = res.mean.scaled;
  info["renormalized"] = res.renormalized;
  info["lp_size"] = res.mean.lp_size;
  info["total_length"] = res.mean.total_length();
  info["warnings"] = res.warnings;
  if (!a.reconstruct.empty() || !a.tips.empty()) {
    ReconstructOptions ro;
    if (res.mean.scaled) ro.target_size = res.mean.lp_size;
    const GpDsRep gp = lp_to_gp(res.mean, ro);
    if (!a.reconstruct.empty()) save_gp(gp, a.reconstruct);
    if (!a.tips.empty()) {
      std::string csv = "x,y,z\n";
      const Samples3 tips = gp.tips();
      for (Eigen::Index i = 0; i < tips.rows(); ++i) {
        csv += format_real(tips(i, 0)) + "," + format_real(tips(i, 1)) + "," + format_real(tips(i, 2)) + "\n";
      }
      write_text_file(a.tips, csv);
    }
  }
  if (!a.compare.empty()) {
    const LpDsRep templ = load_lp(a.compare);
    if (!structurally_equal(templ, res.mean)) throw ValidationError("comparison template differs structurally");
    double worst = 0.0;
    int worst_node = -1;
    for (int j = 0; j < templ.point_count(); ++j) {
      for (int ax = 0; ax < 3; ++ax) {
        const double d = geodesic_dist(templ.frames[j].axis(ax), res.mean.frames[j].axis(ax));
        if (d > worst) {
          worst = d;
          worst_node = j;
        }
      }
    }
    const double bound = 3.0 / std::sqrt(static_cast<double>(n) * a.kappa_frame);
    info["compare"] = {{"max_frame_deviation", worst},
                       {"node", worst_node},
                       {"bound", bound},
                       {"kappa_frame", a.kappa_frame},
                       {"within_bound", worst < bound}};
  }
  print_json(info);
  return 0;
}

// ---------------------------------------------------------------------------
// test

struct TestArgs {
  std::string a_dir, b_dir, out, mode = "lp", scaling = "on", euclid = "pns";
  int permutations = 10000;
  std::uint64_t seed = 0;
  double alpha = 0.05, fdr = 0.05;
  int threads = 0;
};

int cmd_test(const TestArgs& a) {
  StudyOptions opt;
  if (a.mode == "lp") {
    opt.mode = StudyMode::Lp;
  } else if (a.mode == "gp") {
    opt.mode = StudyMode::Gp;
  } else {
    throw ValidationError("--mode must be lp or gp");
  }
  if (a.scaling != "on" && a.scaling != "off") throw ValidationError("--scaling must be on or off");
  opt.scaling = a.scaling == "on";
  if (a.euclid == "pns") {
    opt.euclid = Euclideanization::Pns;
  } else if (a.euclid == "tangent") {
    opt.euclid = Euclideanization::Tangent;
  } else {
    throw ValidationError("--euclid must be pns or tangent");
  }
  if (a.permutations < 1) throw ValidationError("--B must be at least 1");
  if (!(a.alpha > 0 && a.alpha < 1) || !(a.fdr > 0 && a.fdr < 1)) throw ValidationError("--alpha and --fdr must lie in (0, 1)");
  opt.permutations = a.permutations;
  opt.seed = a.seed;
  opt.alpha = a.alpha;
  opt.fdr = a.fdr;
  opt.threads = a.threads;

  const auto files_a = list_dsrep_files(a.a_dir);
  const auto files_b = list_dsrep_files(a.b_dir);
  if (files_a.empty() || files_b.empty()) throw ValidationError("both group directories must contain .json files");
  const std::string kind = file_kind(files_a.front());
  for (const auto* files : {&files_a, &files_b}) {
    for (const auto& f : *files) {
      if (file_kind(f) != kind) throw ValidationError("groups mix gp and lp files (" + f.filename().string() + ")");
    }
  }
  TestReport report;
  std::vector<std::string> warnings;
  if (kind == "lp") {
    std::vector<LpDsRep> ga, gb;
    for (const auto& f : files_a) ga.push_back(load_lp(f, &warnings));
    for (const auto& f : files_b) gb.push_back(load_lp(f, &warnings));
    report = run_study(ga, gb, opt);
  } else {
    std::vector<GpDsRep> ga, gb;
    for (const auto& f : files_a) ga.push_back(load_gp(f, &warnings));
    for (const auto& f : files_b) gb.push_back(load_gp(f, &warnings));
    report = run_study(ga, gb, opt);
  }
  print_warnings(warnings);
  write_report(report, a.out);
  std::cout << summary_json(report);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

LpDsRep template_from_config(const nlohmann::json& cfg, const fs::path& config_dir) {
  if (!cfg.contains("template")) return slab_template();
  const auto& t = cfg.at("template");
  if (t.contains("file")) {
    fs::path p = t.at("file").get<std::string>();
    if (p.is_relative()) p = config_dir / p;
    if (file_kind(p) == "gp") return gp_to_lp(load_gp(p));
    LpDsRep lp = load_lp(p);
    if (lp.scaled) throw ValidationError("study template must be unscaled");
    return lp;
  }
  const std::string kind = t.value("kind", std::string("slab"));
  if (kind == "slab") return slab_template();
  if (kind == "ellipsoid") {
    return gp_to_lp(ellipsoid_template(t.value("rows", 5), t.value("cols", 13), t.value("a", 3.0), t.value("b", 2.0),
                                       t.value("c", 1.0), t.value("crest", 20)));
  }
  throw ValidationError("template kind must be slab or ellipsoid");
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int threads) {
  const std::string text = read_text_file(config_path);
  StudySpec spec = study_spec_from_json(text);
  if (threads > 0) spec.threads = threads;
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
  const LpDsRep templ = template_from_config(cfg, fs::path(config_path).parent_path());
  const auto [ga, gb] = build_study(templ, spec);
  const fs::path out(out_dir);
  fs::create_directories(out / "groupA");
  fs::create_directories(out / "groupB");
  save_lp(templ, out / "template.json");
  auto write_group = [](const LpPopulation& pop, const fs::path& dir) {
    for (size_t i = 0; i < pop.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "member_%04zu.json", i);
      save_lp(pop.members[i], dir / name);
    }
  };
  write_group(ga, out / "groupA");
  write_group(gb, out / "groupB");

  ojson info;
  info["n_per_group"] = spec.n_per_group;
  info["seed"] = spec.seed;
  info["bend_nodes"] = spec.bend_nodes.empty() ? default_bend_nodes(templ.grid, 3) : spec.bend_nodes;
  info["bend_axis"] = to_string(spec.bend_axis);
  info["bend_mean_a"] = spec.bend_mean_a;
  info["bend_mean_b"] = spec.bend_mean_b;
  info["bend_kappa"] = std::isinf(spec.bend_kappa) ? ojson("inf") : ojson(spec.bend_kappa);
  auto kappa = [](double k) { return std::isinf(k) ? ojson("inf") : ojson(k); };
  info["noise"] = {{"kappa_frame", kappa(spec.noise.kappa_frame)},
                   {"kappa_spoke", kappa(spec.noise.kappa_spoke)},
                   {"kappa_conn", kappa(spec.noise.kappa_conn)},
                   {"sigma_factor", spec.noise.sigma_factor},
                   {"a_factor", spec.noise.a_factor},
                   {"b_factor", spec.noise.b_factor}};
  info["n_spokes"] = templ.spoke_count();
  info["n_points"] = templ.point_count();
  write_text_file(out / "study.json", info.dump(2) + "\n");
  print_json(info);
  return 0;
}

// ---------------------------------------------------------------------------
// deform and template

int cmd_deform(const std::string& in, const std::string& spec_path, const std::string& out) {
  const LpDsRep lp = load_lp(in);
  const DeformSpec spec = deform_spec_from_json(read_text_file(spec_path));
  const LpDsRep deformed = rotate_frames(lp, spec);
  save_lp(deformed, out);
  print_json({{"nodes", spec.target_nodes}, {"axis", to_string(spec.axis)}, {"angles", spec.angles}});
  return 0;
}

struct TemplateArgs {
  std::string out;
  int rows = 5, cols = 9, crest = 20;
  double a = 3.0, b = 2.0, c = 1.0;
  bool lp = false, slab = false;
};

int cmd_template(const TemplateArgs& t) {
  if (t.slab) {
    save_lp(slab_template(), t.out);
  } else {
    const GpDsRep gp = ellipsoid_template(t.rows, t.cols, t.a, t.b, t.c, t.crest);
    if (t.lp) {
      save_lp(gp_to_lp(gp), t.out);
    } else {
      save_gp(gp, t.out);
    }
  }
  return 0;
}

int fail(const char* kind, const std::string& message, int code) {
  ojson e = {{"error", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << e.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skelstat: statistical shape analysis of discrete skeletal representations"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: SKELSTAT_THREADS or all cores)");

  ReparamArgs ra;
  auto* reparam = app.add_subcommand("reparam", "Convert between GP and LP ds-reps");
  reparam->add_option("input", ra.in, "Input ds-rep file")->required();
  reparam->add_option("output", ra.out, "Output ds-rep file")->required();
  reparam->add_option("--direction", ra.direction, "gp2lp or lp2gp")->check(CLI::IsMember({"gp2lp", "lp2gp"}));
  reparam->add_flag("--scale", ra.scale, "Scale the LP to unit LP-size");
  reparam->add_flag("--check", ra.check, "gp2lp: reconstruct and report round-trip errors");
  reparam->add_option("--target-size", ra.target_size, "lp2gp: LP-size of the reconstruction");

  MeanArgs ma;
  auto* mean = app.add_subcommand("mean", "Mean LP-ds-rep of a directory of LP files");
  mean->add_option("input_dir", ma.in_dir)->required();
  mean->add_option("output", ma.out)->required();
  mean->add_flag("--frechet", ma.frechet, "Frechet instead of PNS direction means");
  mean->add_flag("--arithmetic", ma.arithmetic, "Arithmetic instead of geometric length means");
  mean->add_flag("--scale", ma.scale, "Scale every member before averaging");
  mean->add_option("--init", ma.init, "Initial frame strategy A or B");
  mean->add_option("--reconstruct", ma.reconstruct, "Write the reconstructed GP of the mean");
  mean->add_option("--tips", ma.tips, "Write the reconstructed spoke tips as CSV");
  mean->add_option("--compare", ma.compare, "LP template to compare frame GOPs against");
  mean->add_option("--kappa-frame", ma.kappa_frame, "Frame concentration used for the comparison bound");

  TestArgs ta;
  auto* test = app.add_subcommand("test", "Permutation tests between two groups");
  test->add_option("group_a", ta.a_dir)->required();
  test->add_option("group_b", ta.b_dir)->required();
  test->add_option("--out", ta.out, "Report directory")->required();
  test->add_option("--mode", ta.mode, "lp or gp");
  test->add_option("--scaling", ta.scaling, "on or off (GP mode GPA scaling)");
  test->add_option("--B", ta.permutations, "Number of permutations");
  test->add_option("--seed", ta.seed, "Random seed");
  test->add_option("--alpha", ta.alpha, "Significance level");
  test->add_option("--fdr", ta.fdr, "FDR level for BH");
  test->add_option("--euclid", ta.euclid, "pns or tangent");

  std::string sim_config, sim_out;
  auto* simulate = app.add_subcommand("simulate", "Generate the two-group bending study");
  simulate->add_option("config", sim_config)->required();
  simulate->add_option("out_dir", sim_out)->required();

  std::string def_in, def_spec, def_out;
  auto* deform = app.add_subcommand("deform", "Rotate frames of an LP-ds-rep");
  deform->add_option("input", def_in)->required();
  deform->add_option("spec", def_spec)->required();
  deform->add_option("output", def_out)->required();

  TemplateArgs tpl;
  auto* templ = app.add_subcommand("template", "Write the ellipsoid template");
  templ->add_option("output", tpl.out)->required();
  templ->add_option("--rows", tpl.rows);
  templ->add_option("--cols", tpl.cols);
  templ->add_option("--crest", tpl.crest);
  templ->add_option("--a", tpl.a);
  templ->add_option("--b", tpl.b);
  templ->add_option("--c", tpl.c);
  templ->add_flag("--lp", tpl.lp, "Write the LP form");
  templ->add_flag("--slab", tpl.slab, "Write the bent slab used by the simulation study (LP)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return fail("usage", e.what(), 2);
  }

  try {
    if (*reparam) return cmd_reparam(ra);
    if (*mean) {
      if (ma.threads == 0) ma.threads = threads;
      return cmd_mean(ma);
    }
    if (*test) {
      ta.threads = threads;
      return cmd_test(ta);
    }
    if (*simulate) return cmd_simulate(sim_config, sim_out, threads);
    if (*deform) return cmd_deform(def_in, def_spec, def_out);
    if (*templ) return cmd_template(tpl);
  } catch (const ValidationError& e) {
    return fail("validation", e.what(), 2);
  } catch (const fs::filesystem_error& e) {
    return fail("io", e.what(), 2);
  } catch (const NumericalError& e) {
    return fail("numerical", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 2;
}
