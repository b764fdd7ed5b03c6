#ifndef SLIPINV_GREENS_HPP
#define SLIPINV_GREENS_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "slipinv/mesh.hpp"

namespace slipinv {

/// Dense 3N x 2M forward operator. Rows are station-major with per-station
/// order (u_x, u_y, u_z); columns are subfault-major with per-subfault order
/// (strike, dip).
struct GreensMatrix {
  Eigen::MatrixXd entries;

  Eigen::Index station_count() const { return entries.rows() / 3; }
  Eigen::Index subfault_count() const { return entries.cols() / 2; }

  void validate(Eigen::Index n_stations, Eigen::Index m_subfaults) const {
    if (entries.rows() != 3 * n_stations || entries.cols() != 2 * m_subfaults)
      throw std::invalid_argument("greens matrix: shape " + std::to_string(entries.rows()) + "x" +
                                  std::to_string(entries.cols()) + " does not match 3N x 2M");
    if (!entries.allFinite()) throw std::invalid_argument("greens matrix: non-finite entry");
  }
};

/// Observed displacements, length 3N in the Green's-matrix row convention,
/// with per-axis noise standard deviations in meters.
struct ObservationVector {
  Eigen::VectorXd values;
  Eigen::Vector3d axis_sigmas;

  void validate(Eigen::Index n_stations) const {
    if (values.size() != 3 * n_stations)
      throw std::invalid_argument("observations: length must be 3N");
    if (!values.allFinite()) throw std::invalid_argument("observations: non-finite value");
    if (!(axis_sigmas.array() > 0.0).all())
      throw std::invalid_argument("observations: axis sigmas must be positive");
  }
};

/// Per-(station, subfault) 3x2 traction blocks, station-major.
struct TractionBlocks {
  Eigen::Index n_stations = 0;
  Eigen::Index m_subfaults = 0;
  std::vector<Eigen::Matrix<double, 3, 2>> blocks;  // index k * m_subfaults + i

  const Eigen::Matrix<double, 3, 2>& at(Eigen::Index k, Eigen::Index i) const {
    return blocks[static_cast<std::size_t>(k * m_subfaults + i)];
  }
};

/// Scale each traction block by its subfault area and pack into the dense
/// operator, so that X*D reproduces the per-station area-weighted sum.
inline GreensMatrix assemble_greens(const TractionBlocks& tb, const Eigen::VectorXd& areas) {
  if (tb.n_stations < 1 || tb.m_subfaults < 1 ||
      static_cast<Eigen::Index>(tb.blocks.size()) != tb.n_stations * tb.m_subfaults)
    throw std::invalid_argument("assemble_greens: block grid shape mismatch");
  if (areas.size() != tb.m_subfaults)
    throw std::invalid_argument("assemble_greens: areas length must equal subfault count");

  GreensMatrix g;
  g.entries.resize(3 * tb.n_stations, 2 * tb.m_subfaults);
  for (Eigen::Index k = 0; k < tb.n_stations; ++k)
    for (Eigen::Index i = 0; i < tb.m_subfaults; ++i)
      g.entries.block<3, 2>(3 * k, 2 * i) = areas[i] * tb.at(k, i);
  return g;
}

namespace detail {
// Constant direction pattern for the synthetic kernel; rank 2 on purpose and
// scaled so that km-size subfaults with dm-scale slip yield cm-scale data.
inline Eigen::Matrix<double, 3, 2> synthetic_pattern() {
  Eigen::Matrix<double, 3, 2> p;
  p << 0.9, -0.3,
       0.4,  0.8,
      -0.5,  0.6;
  return 1e-10 * p;
}
}  // namespace detail

/// Deterministic distance-decay stand-in for an elastic Green's operator.
/// Not full column rank; intended as a test fixture, not physics.
inline GreensMatrix synthetic_kernel(const FaultMesh& mesh, const StationSet& stations,
                                     double decay_length) {
  if (!(decay_length > 0.0))
    throw std::invalid_argument("synthetic_kernel: decay_length must be positive");
  mesh.validate();
  stations.validate();

  const Eigen::Matrix<double, 3, 2> pattern = detail::synthetic_pattern();
  TractionBlocks tb;
  tb.n_stations = stations.station_count();
  tb.m_subfaults = mesh.subfault_count();
  tb.blocks.resize(static_cast<std::size_t>(tb.n_stations * tb.m_subfaults));
  for (Eigen::Index k = 0; k < tb.n_stations; ++k) {
    for (Eigen::Index i = 0; i < tb.m_subfaults; ++i) {
      const double dist = (stations.coordinates.row(k) - mesh.centroids.row(i)).norm();
      tb.blocks[static_cast<std::size_t>(k * tb.m_subfaults + i)] =
          std::exp(-dist / decay_length) * pattern;
    }
  }
  return assemble_greens(tb, mesh.areas);
}

}  // namespace slipinv

#endif
