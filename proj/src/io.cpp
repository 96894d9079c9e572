#include "skelstat/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "skelstat/error.hpp"

namespace skelstat {

using ojson = nlohmann::ordered_json;

std::string format_real(double v) {
  if (!std::isfinite(v)) throw ValidationError("cannot serialize non-finite number");
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

bool is_scalar(const ojson& j) { return !j.is_array() && !j.is_object(); }

void emit(const ojson& j, std::ostringstream& out, int indent) {
  const std::string pad(static_cast<size_t>(indent) * 2, ' ');
  const std::string pad_in(static_cast<size_t>(indent + 1) * 2, ' ');
  if (j.is_number_float()) {
    out << format_real(j.get<double>());
  } else if (is_scalar(j)) {
    out << j.dump();
  } else if (j.is_array()) {
    const bool flat = std::all_of(j.begin(), j.end(), [](const ojson& e) { return is_scalar(e); }) ||
                        (j.size() <= 3 && std::all_of(j.begin(), j.end(), [](const ojson& e) {
                         return e.is_array() && std::all_of(e.begin(), e.end(), is_scalar);
                       }));
    if (j.empty()) {
      out << "[]";
    } else if (flat) {
      out << '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out << ", ";
        first = false;
        emit(e, out, indent);
      }
      out << ']';
    } else {
      out << "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        out << pad_in;
        emit(j[i], out, indent + 1);
        out << (i + 1 < j.size() ? ",\n" : "\n");
      }
      out << pad << ']';
    }
  } else {
    // Small objects (spokes, connections) stay on one line.
    const bool inline_obj = j.size() <= 4 && std::all_of(j.begin(), j.end(), [](const ojson& e) {
                              return is_scalar(e) || (e.is_array() && std::all_of(e.begin(), e.end(), is_scalar));
                            });
    if (inline_obj) {
      out << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ", ";
        first = false;
        out << ojson(it.key()).dump() << ": ";
        emit(it.value(), out, indent);
      }
      out << '}';
      return;
    }
    out << "{\n";
    size_t i = 0;
    for (auto it = j.begin(); it != j.end(); ++it, ++i) {
      out << pad_in << ojson(it.key()).dump() << ": ";
      emit(it.value(), out, indent + 1);
      out << (i + 1 < j.size() ? ",\n" : "\n");
    }
    out << pad << '}';
  }
}

std::string dump(const ojson& j) {
  std::ostringstream out;
  emit(j, out, 0);
  out << '\n';
  return out.str();
}

ojson vec_json(const Eigen::Vector3d& v) {
  ojson a = ojson::array();
  for (int k = 0; k < 3; ++k) a.push_back(v[k]);
  return a;
}

template <typename J>
const J& require(const J& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  return obj.at(key);
}

template <typename J>
double real_of(const J& j, const char* what) {
  if (!j.is_number()) throw ValidationError(std::string("expected a number for ") + what);
  return j.template get<double>();
}

template <typename J>
Eigen::Vector3d vec_of(const J& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(std::string("expected [x,y,z] for ") + what);
  return {real_of(j[0], what), real_of(j[1], what), real_of(j[2], what)};
}

Eigen::Vector3d unit_of(const nlohmann::json& j, const char* what, std::vector<std::string>* warnings) {
  Eigen::Vector3d v = vec_of(j, what);
  const double norm = v.norm();
  if (std::abs(norm - 1.0) > kUnitTolerance)
    throw ValidationError(std::string("non-unit direction for ") + what);
  // Rounding-level deviations are kept so that load(save(x)) == x bit for bit.
  if (std::abs(norm - 1.0) > 1e-12) {
    if (warnings) warnings->push_back(std::string("renormalized ") + what + " (norm " + format_real(norm) + ")");
    v /= norm;
  }
  return v;
}

ojson grid_json(const GridLayout& g) {
  ojson j;
  j["rows"] = g.rows;
  j["cols"] = g.cols;
  if (g.spine_extensions) {
    j["spine_extensions"] = ojson::array({(*g.spine_extensions)[0], (*g.spine_extensions)[1]});
  } else {
    j["spine_extensions"] = nullptr;
  }
  j["crest_order"] = g.crest_order;
  j["crest_parents"] = g.crest_parents;
  return j;
}

GridLayout grid_of(const nlohmann::json& j) {
  GridLayout g;
  g.rows = require(j, "rows").get<int>();
  g.cols = require(j, "cols").get<int>();
  const auto& ext = require(j, "spine_extensions");
  if (!ext.is_null()) {
    if (!ext.is_array() || ext.size() != 2) throw ValidationError("grid.spine_extensions must be [i, j]");
    g.spine_extensions = std::array<int, 2>{ext[0].get<int>(), ext[1].get<int>()};
  }
  g.crest_order = require(j, "crest_order").get<std::vector<int>>();
  if (j.contains("crest_parents")) g.crest_parents = j.at("crest_parents").get<std::vector<int>>();
  g.validate();
  return g;
}

ojson spokes_json(const std::vector<Spoke>& spokes) {
  ojson arr = ojson::array();
  for (const auto& s : spokes) {
    ojson o;
    o["tail"] = s.tail;
    o["kind"] = to_string(s.kind);
    o["dir"] = vec_json(s.dir);
    o["len"] = s.length;
    arr.push_back(o);
  }
  return arr;
}

std::vector<Spoke> spokes_of(const nlohmann::json& j, std::vector<std::string>* warnings) {
  if (!j.is_array()) throw ValidationError("spokes must be an array");
  std::vector<Spoke> out;
  for (const auto& o : j) {
    Spoke s;
    s.tail = require(o, "tail").get<int>();
    s.kind = spoke_kind_from_string(require(o, "kind").get<std::string>());
    s.length = real_of(require(o, "len"), "spoke length");
    if (!(s.length > 0.0)) throw ValidationError("non-positive spoke length");
    s.dir = unit_of(require(o, "dir"), "spoke direction", warnings);
    out.push_back(s);
  }
  return out;
}

nlohmann::json parse(const std::string& text, const char* expected_kind) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
  if (require(j, "format_version").get<int>() != kFormatVersion) throw ValidationError("unsupported format_version");
  const auto kind = require(j, "kind").get<std::string>();
  if (kind != expected_kind) throw ValidationError("expected kind '" + std::string(expected_kind) + "', got '" + kind + "'");
  return j;
}

template <typename F>
auto wrap_json_errors(F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("schema violation: ") + e.what());
  }
}

}  // namespace

std::string to_json(const GpDsRep& gp) {
  ojson j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "gp";
  j["grid"] = grid_json(gp.grid);
  ojson pts = ojson::array();
  for (int i = 0; i < gp.point_count(); ++i) pts.push_back(vec_json(gp.point(i)));
  j["skeletal_points"] = pts;
  j["spokes"] = spokes_json(gp.spokes);
  return dump(j);
}

GpDsRep gp_from_json(const std::string& text, std::vector<std::string>* warnings) {
  return wrap_json_errors([&] {
    const auto j = parse(text, "gp");
    GpDsRep gp;
    gp.grid = grid_of(require(j, "grid"));
    const auto& pts = require(j, "skeletal_points");
    if (!pts.is_array()) throw ValidationError("skeletal_points must be an array");
    gp.skeletal_points.resize(static_cast<Eigen::Index>(pts.size()), 3);
    for (size_t i = 0; i < pts.size(); ++i)
      gp.skeletal_points.row(static_cast<Eigen::Index>(i)) = vec_of(pts[i], "skeletal point").transpose();
    gp.spokes = spokes_of(require(j, "spokes"), warnings);
    gp.validate();
    return gp;
  });
}

std::string to_json(const LpDsRep& lp) {
  ojson j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "lp";
  j["grid"] = grid_json(lp.grid);
  ojson roles = ojson::array();
  for (auto r : lp.hierarchy.roles) roles.push_back(to_string(r));
  j["hierarchy"] = ojson{{"parent", lp.hierarchy.parent}, {"roles", roles}};
  j["spokes"] = spokes_json(lp.spokes);
  ojson frames = ojson::array();
  for (const auto& f : lp.frames) frames.push_back(ojson::array({vec_json(f.n()), vec_json(f.b()), vec_json(f.b_perp())}));
  j["frames"] = frames;
  ojson conns = ojson::array();
  for (const auto& c : lp.connections) {
    ojson o;
    o["dir"] = vec_json(c.dir);
    o["len"] = c.length;
    conns.push_back(o);
  }
  j["connections"] = conns;
  j["scaled"] = lp.scaled;
  j["lp_size"] = lp.lp_size;
  return dump(j);
}

LpDsRep lp_from_json(const std::string& text, std::vector<std::string>* warnings) {
  return wrap_json_errors([&] {
    const auto j = parse(text, "lp");
    LpDsRep lp;
    lp.grid = grid_of(require(j, "grid"));
    const auto& h = require(j, "hierarchy");
    std::vector<NodeRole> roles;
    for (const auto& r : require(h, "roles")) roles.push_back(node_role_from_string(r.get<std::string>()));
    lp.hierarchy = FrameHierarchy::from_parents(require(h, "parent").get<std::vector<int>>(), std::move(roles));
    lp.spokes = spokes_of(require(j, "spokes"), warnings);
    for (size_t i = 0; i < lp.spokes.size(); ++i) {
      if (lp.spokes[i].kind == SpokeKind::Crest) lp.hierarchy.crest_child_spoke[lp.spokes[i].tail] = static_cast<int>(i);
    }
    for (const auto& f : require(j, "frames")) {
      if (!f.is_array() || f.size() != 3) throw ValidationError("frame must be [[n],[b],[b_perp]]");
      lp.frames.emplace_back(unit_of(f[0], "frame n", warnings), unit_of(f[1], "frame b", warnings),
                             unit_of(f[2], "frame b_perp", warnings));
    }
    for (const auto& c : require(j, "connections")) {
      Connection conn;
      conn.length = real_of(require(c, "len"), "connection length");
      conn.dir = vec_of(require(c, "dir"), "connection direction");
      if (conn.length != 0.0) conn.dir = unit_of(c.at("dir"), "connection direction", warnings);
      lp.connections.push_back(conn);
    }
    lp.scaled = require(j, "scaled").get<bool>();
    lp.lp_size = real_of(require(j, "lp_size"), "lp_size");
    lp.validate();
    return lp;
  });
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
  if (!out) throw ValidationError("write failed for " + path.string());
}

GpDsRep load_gp(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  return gp_from_json(read_text_file(path), warnings);
}

LpDsRep load_lp(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  return lp_from_json(read_text_file(path), warnings);
}

void save_gp(const GpDsRep& gp, const std::filesystem::path& path) { write_text_file(path, to_json(gp)); }
void save_lp(const LpDsRep& lp, const std::filesystem::path& path) { write_text_file(path, to_json(lp)); }

std::string file_kind(const std::filesystem::path& path) {
  try {
    const auto j = nlohmann::json::parse(read_text_file(path));
    return require(j, "kind").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::vector<std::filesystem::path> list_dsrep_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace skelstat
