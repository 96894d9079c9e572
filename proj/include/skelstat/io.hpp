#ifndef SKELSTAT_IO_HPP
#define SKELSTAT_IO_HPP

// dsrep-json reading and writing. Numbers are written with 17 significant
// digits so that save(load(save(x))) reproduces the bytes of save(x).

#include <filesystem>
#include <string>
#include <vector>

#include "skelstat/dsrep.hpp"

namespace skelstat {

inline constexpr int kFormatVersion = 1;

/// Direction vectors whose norm is within this of 1 are renormalized on
/// load (with a warning); anything further off is rejected.
inline constexpr double kUnitTolerance = 1e-6;

GpDsRep gp_from_json(const std::string& text, std::vector<std::string>* warnings = nullptr);
LpDsRep lp_from_json(const std::string& text, std::vector<std::string>* warnings = nullptr);
std::string to_json(const GpDsRep& gp);
std::string to_json(const LpDsRep& lp);

GpDsRep load_gp(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);
LpDsRep load_lp(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);
void save_gp(const GpDsRep& gp, const std::filesystem::path& path);
void save_lp(const LpDsRep& lp, const std::filesystem::path& path);

/// "gp" or "lp", read from the file's `kind` field.
std::string file_kind(const std::filesystem::path& path);

/// All *.json files of a directory, sorted by name.
std::vector<std::filesystem::path> list_dsrep_files(const std::filesystem::path& dir);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Format a double with 17 significant digits (0 for +-0).
std::string format_real(double v);

}  // namespace skelstat

#endif  // SKELSTAT_IO_HPP
