#ifndef SLIPINV_TEST_HELPERS_HPP
#define SLIPINV_TEST_HELPERS_HPP

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include <Eigen/Core>
#include <Eigen/QR>

#include "slipinv/greens.hpp"
#include "slipinv/mesh.hpp"

namespace testutil {

// Fresh per-process scratch directory under the system temp dir.
inline std::string scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("slipinv_" + tag + "_" + std::to_string(::getpid()) + "_" +
              std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(dir);
  return dir.string();
}

// Regular nx-by-ny fault grid in the x/y plane, spacing in meters. Depth
// grows linearly along y from depth0 to depth1.
inline slipinv::FaultMesh grid_mesh(int nx, int ny, double spacing, double depth0 = 20000.0,
                                    double depth1 = 45000.0) {
  slipinv::FaultMesh mesh;
  const int m = nx * ny;
  mesh.ids.resize(m);
  mesh.centroids.resize(m, 3);
  mesh.areas.resize(m);
  mesh.depths.resize(m);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int k = j * nx + i;
      const double frac = ny > 1 ? static_cast<double>(j) / (ny - 1) : 0.0;
      const double depth = depth0 + frac * (depth1 - depth0);
      mesh.ids[k] = k;
      mesh.centroids.row(k) << i * spacing, j * spacing, -depth;
      mesh.areas[k] = spacing * spacing;
      mesh.depths[k] = depth;
    }
  return mesh;
}

inline slipinv::FaultMesh random_mesh(std::mt19937_64& gen, int m, double extent = 100000.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  slipinv::FaultMesh mesh;
  mesh.ids.resize(m);
  mesh.centroids.resize(m, 3);
  mesh.areas.resize(m);
  mesh.depths.resize(m);
  for (int i = 0; i < m; ++i) {
    mesh.ids[i] = i;
    const double depth = 10000.0 + 50000.0 * u(gen);
    mesh.centroids.row(i) << extent * u(gen), extent * u(gen), -depth;
    mesh.areas[i] = 1e7 * (0.5 + u(gen));
    mesh.depths[i] = depth;
  }
  return mesh;
}

inline slipinv::StationSet line_stations(int n, double spacing, double y = 5000.0) {
  slipinv::StationSet s;
  s.labels.resize(n);
  s.coordinates.resize(n, 3);
  for (int k = 0; k < n; ++k) {
    s.labels[k] = "ST" + std::to_string(k);
    s.coordinates.row(k) << k * spacing, y + 700.0 * k, 0.0;
  }
  return s;
}

// Random symmetric positive definite matrix with eigenvalues in [lo, hi].
inline Eigen::MatrixXd random_spd(std::mt19937_64& gen, int n, double lo = 0.5, double hi = 3.0) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = z(gen);
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd evals(n);
  for (int i = 0; i < n; ++i) evals[i] = u(gen);
  return q * evals.asDiagonal() * q.transpose();
}

inline Eigen::VectorXd random_vector(std::mt19937_64& gen, int n, double scale = 1.0) {
  std::normal_distribution<double> z(0.0, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = z(gen);
  return v;
}

}  // namespace testutil

#endif
