#ifndef SLIPINV_MESH_HPP
#define SLIPINV_MESH_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace slipinv {

/// Discretized fault: one row per subfault, all lengths in meters.
struct FaultMesh {
  std::vector<long> ids;
  Eigen::Matrix<double, Eigen::Dynamic, 3> centroids;  // (x, y, z)
  Eigen::VectorXd areas;                               // m^2
  Eigen::VectorXd depths;                              // m, >= 0

  Eigen::Index subfault_count() const { return areas.size(); }

  double pairwise_distance(Eigen::Index i, Eigen::Index j) const {
    return (centroids.row(i) - centroids.row(j)).norm();
  }

  void validate() const {
    const Eigen::Index m = subfault_count();
    if (m < 1) throw std::invalid_argument("fault mesh: needs at least one subfault");
    if (centroids.rows() != m || depths.size() != m || static_cast<Eigen::Index>(ids.size()) != m)
      throw std::invalid_argument("fault mesh: inconsistent field lengths");
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!centroids.row(i).allFinite())
        throw std::invalid_argument("fault mesh: non-finite centroid at row " + std::to_string(i));
      if (!(areas[i] > 0.0))
        throw std::invalid_argument("fault mesh: non-positive area at row " + std::to_string(i));
      if (!(depths[i] >= 0.0))
        throw std::invalid_argument("fault mesh: negative depth at row " + std::to_string(i));
    }
  }
};

struct StationSet {
  std::vector<std::string> labels;
  Eigen::Matrix<double, Eigen::Dynamic, 3> coordinates;  // (x, y, z) meters

  Eigen::Index station_count() const { return coordinates.rows(); }

  void validate() const {
    const Eigen::Index n = station_count();
    if (n < 1) throw std::invalid_argument("station set: needs at least one station");
    if (static_cast<Eigen::Index>(labels.size()) != n)
      throw std::invalid_argument("station set: label count mismatch");
    if (!coordinates.allFinite()) throw std::invalid_argument("station set: non-finite coordinate");
  }
};

}  // namespace slipinv

#endif
