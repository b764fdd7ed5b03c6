#ifndef SLIPINV_IO_HPP
#define SLIPINV_IO_HPP

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "slipinv/greens.hpp"
#include "slipinv/mesh.hpp"

namespace slipinv {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    std::size_t start = field.find_first_not_of(' ');
    out.push_back(start == std::string::npos ? std::string() : field.substr(start));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("parse error in " + where + ": bad number '" + s + "'");
  }
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

inline void expect_header(const std::vector<std::string>& got, const std::string& want,
                          const std::string& path) {
  std::string joined;
  for (std::size_t i = 0; i < got.size(); ++i) joined += (i ? "," : "") + got[i];
  if (joined != want)
    throw std::runtime_error("parse error in " + path + ": expected header '" + want +
                             "', got '" + joined + "'");
}

// Lossless double formatting shared by all writers.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline FaultMesh load_fault_mesh(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("parse error in " + path + ": empty file");
  detail::expect_header(detail::split_csv_line(line), "id,x_m,y_m,z_m,area_m2,depth_m", path);

  std::vector<std::array<double, 5>> rows;
  std::vector<long> ids;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = detail::split_csv_line(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (f.size() != 6) throw std::runtime_error("parse error in " + where + ": expected 6 fields");
    ids.push_back(static_cast<long>(detail::parse_double(f[0], where)));
    rows.push_back({detail::parse_double(f[1], where), detail::parse_double(f[2], where),
                    detail::parse_double(f[3], where), detail::parse_double(f[4], where),
                    detail::parse_double(f[5], where)});
  }

  FaultMesh mesh;
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  mesh.ids = std::move(ids);
  mesh.centroids.resize(m, 3);
  mesh.areas.resize(m);
  mesh.depths.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    mesh.centroids(i, 0) = rows[i][0];
    mesh.centroids(i, 1) = rows[i][1];
    mesh.centroids(i, 2) = rows[i][2];
    mesh.areas[i] = rows[i][3];
    mesh.depths[i] = rows[i][4];
  }
  mesh.validate();
  return mesh;
}

inline void save_fault_mesh(const FaultMesh& mesh, const std::string& path) {
  auto out = detail::open_output(path);
  out << "id,x_m,y_m,z_m,area_m2,depth_m\n";
  for (Eigen::Index i = 0; i < mesh.subfault_count(); ++i)
    out << mesh.ids[i] << ',' << detail::fmt_g17(mesh.centroids(i, 0)) << ','
        << detail::fmt_g17(mesh.centroids(i, 1)) << ',' << detail::fmt_g17(mesh.centroids(i, 2))
        << ',' << detail::fmt_g17(mesh.areas[i]) << ',' << detail::fmt_g17(mesh.depths[i]) << '\n';
}

inline StationSet load_stations(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("parse error in " + path + ": empty file");
  detail::expect_header(detail::split_csv_line(line), "label,x_m,y_m,z_m", path);

  StationSet s;
  std::vector<std::array<double, 3>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = detail::split_csv_line(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (f.size() != 4) throw std::runtime_error("parse error in " + where + ": expected 4 fields");
    s.labels.push_back(f[0]);
    rows.push_back({detail::parse_double(f[1], where), detail::parse_double(f[2], where),
                    detail::parse_double(f[3], where)});
  }
  s.coordinates.resize(static_cast<Eigen::Index>(rows.size()), 3);
  for (Eigen::Index i = 0; i < s.coordinates.rows(); ++i)
    s.coordinates.row(i) << rows[i][0], rows[i][1], rows[i][2];
  s.validate();
  return s;
}

inline void save_stations(const StationSet& s, const std::string& path) {
  auto out = detail::open_output(path);
  out << "label,x_m,y_m,z_m\n";
  for (Eigen::Index i = 0; i < s.station_count(); ++i)
    out << s.labels[i] << ',' << detail::fmt_g17(s.coordinates(i, 0)) << ','
        << detail::fmt_g17(s.coordinates(i, 1)) << ',' << detail::fmt_g17(s.coordinates(i, 2))
        << '\n';
}

/// Observation rows must follow the station order; sigmas come from config.
inline Eigen::VectorXd load_observation_values(const std::string& path,
                                               const std::vector<std::string>* station_labels) {
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("parse error in " + path + ": empty file");
  detail::expect_header(detail::split_csv_line(line), "label,ux_m,uy_m,uz_m", path);

  std::vector<double> vals;
  std::vector<std::string> labels;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = detail::split_csv_line(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (f.size() != 4) throw std::runtime_error("parse error in " + where + ": expected 4 fields");
    labels.push_back(f[0]);
    for (int c = 1; c < 4; ++c) vals.push_back(detail::parse_double(f[c], where));
  }
  if (station_labels) {
    if (labels.size() != station_labels->size())
      throw std::runtime_error(path + ": observation row count does not match station count");
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] != (*station_labels)[i])
        throw std::runtime_error(path + ": station label mismatch at row " + std::to_string(i) +
                                 " ('" + labels[i] + "' vs '" + (*station_labels)[i] + "')");
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

inline void save_observation_values(const Eigen::VectorXd& values,
                                    const std::vector<std::string>& labels,
                                    const std::string& path) {
  if (values.size() != 3 * static_cast<Eigen::Index>(labels.size()))
    throw std::invalid_argument("save_observation_values: length must be 3N");
  auto out = detail::open_output(path);
  out << "label,ux_m,uy_m,uz_m\n";
  for (std::size_t k = 0; k < labels.size(); ++k)
    out << labels[k] << ',' << detail::fmt_g17(values[3 * k]) << ','
        << detail::fmt_g17(values[3 * k + 1]) << ',' << detail::fmt_g17(values[3 * k + 2]) << '\n';
}

/// Headerless numeric CSV, one matrix row per line.
inline Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  auto in = detail::open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = detail::split_csv_line(line);
    const std::string where = path + ":" + std::to_string(lineno);
    std::vector<double> row;
    row.reserve(f.size());
    for (const auto& s : f) row.push_back(detail::parse_double(s, where));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("parse error in " + where + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("parse error in " + path + ": no rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

inline void save_matrix_csv(const Eigen::MatrixXd& m, const std::string& path) {
  auto out = detail::open_output(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << detail::fmt_g17(m(i, j));
    out << '\n';
  }
}

/// Raw little-endian float64, row-major, with a JSON sidecar at <path>.json.
inline void save_matrix_f64(const Eigen::MatrixXd& m, const std::string& path) {
  auto out = detail::open_output(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
  nlohmann::json sidecar{{"rows", m.rows()}, {"cols", m.cols()}};
  detail::open_output(path + ".json") << sidecar.dump() << '\n';
}

inline Eigen::MatrixXd load_matrix_f64(const std::string& path) {
  nlohmann::json sidecar;
  {
    auto side = detail::open_input(path + ".json");
    side >> sidecar;
  }
  const Eigen::Index rows = sidecar.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = sidecar.at("cols").get<Eigen::Index>();
  if (rows < 0 || cols < 0) throw std::runtime_error(path + ".json: negative shape");
  auto in = detail::open_input(path);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      double v;
      if (!in.read(reinterpret_cast<char*>(&v), sizeof(double)))
        throw std::runtime_error(path + ": truncated, expected " +
                                 std::to_string(rows * cols * 8) + " bytes");
      m(i, j) = v;
    }
  return m;
}

/// Accepts .f64 (with sidecar) or CSV based on the file extension.
inline Eigen::MatrixXd load_matrix_auto(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".f64") return load_matrix_f64(path);
  return load_matrix_csv(path);
}

inline GreensMatrix load_greens(const std::string& path) {
  GreensMatrix g;
  g.entries = load_matrix_auto(path);
  if (g.entries.rows() % 3 != 0 || g.entries.cols() % 2 != 0)
    throw std::runtime_error(path + ": greens matrix shape must be 3N x 2M");
  if (!g.entries.allFinite()) throw std::runtime_error(path + ": non-finite greens entry");
  return g;
}

}  // namespace slipinv

#endif
