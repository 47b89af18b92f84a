#pragma once

// Plain-text file formats: pitch trajectories, area functions and the
// exported parameter file.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "webster/acoustics.hpp"
#include "webster/errors.hpp"
#include "webster/glottal.hpp"

namespace webster {

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && std::isspace(static_cast<unsigned char>(*first))) ++first;
  while (last > first && std::isspace(static_cast<unsigned char>(*(last - 1)))) --last;
  if (first < last && *first == '+') ++first;
  const auto r = std::from_chars(first, last, v);
  if (r.ec != std::errc() || r.ptr != last) throw ConfigError(what + ": '" + text + "' is not a number");
  return v;
}

namespace detail {

/// Rows of whitespace-separated numbers; '#' starts a comment.
inline std::vector<std::vector<double>> read_table(std::istream& in, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) row.push_back(parse_double(tok, name));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return f;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  return f;
}

}  // namespace detail

/// Two columns (t in s, f0 in Hz). Rows must be uniformly spaced in time.
inline PitchTrajectory read_pitch(const std::filesystem::path& path) {
  auto f = detail::open_input(path);
  const auto rows = detail::read_table(f, path.string());
  if (rows.size() < 2) throw IoError("'" + path.string() + "': need at least two (t, f0) rows");
  std::vector<double> f0;
  for (const auto& r : rows) {
    if (r.size() != 2) throw IoError("'" + path.string() + "': expected two columns (t, f0)");
    f0.push_back(r[1]);
  }
  const double step = rows[1][0] - rows[0][0];
  if (!(step > 0.0)) throw IoError("'" + path.string() + "': time column must increase");
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (std::abs(rows[i][0] - rows[i - 1][0] - step) > 1e-6 * std::max(1.0, step) + 1e-9)
      throw IoError("'" + path.string() + "': time column must be uniformly spaced");
  return PitchTrajectory(std::move(f0), 1.0 / step);
}

inline void write_pitch(const std::filesystem::path& path, const PitchTrajectory& pitch) {
  auto f = detail::open_output(path);
  f << "# t_s f0_hz\n";
  for (std::size_t i = 0; i < pitch.f0.size(); ++i)
    f << format_double(static_cast<double>(i) / pitch.rate) << ' ' << format_double(pitch.f0[i]) << '\n';
}

namespace detail {

inline AreaFunction area_from_rows(const std::vector<std::vector<double>>& rows, const std::string& name) {
  if (rows.size() < 2) throw IoError(name + ": need at least two (x, A) rows");
  std::vector<double> a;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 2) throw IoError(name + ": expected two columns (x, A)");
    a.push_back(rows[i][1]);
  }
  if (rows.front()[0] != 0.0) throw IoError(name + ": first x must be 0 (glottis)");
  const double length = rows.back()[0];
  const double step = length / static_cast<double>(rows.size() - 1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (std::abs(rows[i][0] - step * static_cast<double>(i)) > 1e-6 * length)
      throw IoError(name + ": x must be uniformly spaced");
  try {
    return AreaFunction(length, std::move(a));
  } catch (const DomainError& e) {
    throw IoError(name + ": " + e.what());
  }
}

inline void write_area_rows(std::ostream& f, const AreaFunction& area) {
  const auto a = area.samples();
  for (std::size_t i = 0; i < a.size(); ++i)
    f << format_double(area.length() * static_cast<double>(i) / static_cast<double>(a.size() - 1)) << ' '
      << format_double(a[i]) << '\n';
}

}  // namespace detail

/// Two columns (x in m from the glottis, A); x uniformly spaced from 0 to L.
inline AreaFunction read_area(const std::filesystem::path& path) {
  auto f = detail::open_input(path);
  return detail::area_from_rows(detail::read_table(f, path.string()), "'" + path.string() + "'");
}

inline void write_area(const std::filesystem::path& path, const AreaFunction& area) {
  auto f = detail::open_output(path);
  f << "# x_m area\n";
  detail::write_area_rows(f, area);
}

/// Exported (A, zeta) with provenance:
///
///   # webster parameter file
///   zeta <value>
///   <key> <value>          provenance lines, any number
///   area
///   <x> <A>                one row per sample
struct ParameterFile {
  AreaFunction area;
  double zeta = 0.0;
  std::map<std::string, std::string> provenance;
};

inline void write_parameters(const std::filesystem::path& path, const ParameterFile& p) {
  auto f = detail::open_output(path);
  f << "# webster parameter file\n";
  f << "zeta " << format_double(p.zeta) << '\n';
  for (const auto& [k, v] : p.provenance) f << k << ' ' << v << '\n';
  f << "area\n";
  detail::write_area_rows(f, p.area);
}

inline ParameterFile read_parameters(const std::filesystem::path& path) {
  auto f = detail::open_input(path);
  const std::string name = "'" + path.string() + "'";
  ParameterFile p;
  bool have_zeta = false;
  std::string line;
  while (std::getline(f, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "area") {
      p.area = detail::area_from_rows(detail::read_table(f, name), name);
      if (!have_zeta) throw IoError(name + ": missing zeta");
      if (!(p.zeta >= 0.0)) throw IoError(name + ": zeta must be >= 0");
      return p;
    }
    std::string value;
    std::getline(ls >> std::ws, value);
    if (key == "zeta") {
      p.zeta = parse_double(value, name + " zeta");
      have_zeta = true;
    } else {
      p.provenance[key] = value;
    }
  }
  throw IoError(name + ": missing 'area' table");
}

}  // namespace webster
