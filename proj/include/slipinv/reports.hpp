#ifndef SLIPINV_REPORTS_HPP
#define SLIPINV_REPORTS_HPP

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "slipinv/io.hpp"
#include "slipinv/model_selection.hpp"
#include "slipinv/postproc.hpp"

namespace slipinv {

/// Slip vectors keyed by subfault id: `id,d_s_m,d_d_m`.
inline void save_slip_csv(const Eigen::VectorXd& d, const FaultMesh& mesh,
                          const std::string& path) {
  if (d.size() != 2 * mesh.subfault_count())
    throw std::invalid_argument("save_slip_csv: slip vector length must be 2M");
  auto out = detail::open_output(path);
  out << "id,d_s_m,d_d_m\n";
  for (Eigen::Index i = 0; i < mesh.subfault_count(); ++i)
    out << mesh.ids[i] << ',' << detail::fmt_g17(d[2 * i]) << ',' << detail::fmt_g17(d[2 * i + 1])
        << '\n';
}

inline Eigen::VectorXd load_slip_csv(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("parse error in " + path + ": empty file");
  detail::expect_header(detail::split_csv_line(line), "id,d_s_m,d_d_m", path);
  std::vector<double> vals;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = detail::split_csv_line(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (f.size() != 3) throw std::runtime_error("parse error in " + where + ": expected 3 fields");
    vals.push_back(detail::parse_double(f[1], where));
    vals.push_back(detail::parse_double(f[2], where));
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

inline void save_median_cv_csv(const Eigen::VectorXd& median, const CvResult& cv,
                               const FaultMesh& mesh, const std::string& path) {
  auto out = detail::open_output(path);
  out << "id,median_ds_m,median_dd_m,median_slip_m,cv_pct,cv_defined\n";
  for (Eigen::Index i = 0; i < mesh.subfault_count(); ++i) {
    const double mag = std::hypot(median[2 * i], median[2 * i + 1]);
    const bool def = cv.defined[static_cast<std::size_t>(i)];
    out << mesh.ids[i] << ',' << detail::fmt_g17(median[2 * i]) << ','
        << detail::fmt_g17(median[2 * i + 1]) << ',' << detail::fmt_g17(mag) << ','
        << (def ? detail::fmt_g17(cv.cv_percent[i]) : std::string("nan")) << ','
        << (def ? 1 : 0) << '\n';
  }
}

inline void save_map_mle_csv(const Eigen::VectorXd& map, const Eigen::VectorXd& mle,
                             const FaultMesh& mesh, const std::string& path) {
  auto out = detail::open_output(path);
  out << "id,map_ds_m,map_dd_m,mle_ds_m,mle_dd_m\n";
  for (Eigen::Index i = 0; i < mesh.subfault_count(); ++i)
    out << mesh.ids[i] << ',' << detail::fmt_g17(map[2 * i]) << ','
        << detail::fmt_g17(map[2 * i + 1]) << ',' << detail::fmt_g17(mle[2 * i]) << ','
        << detail::fmt_g17(mle[2 * i + 1]) << '\n';
}

inline void save_residual_quantiles_csv(const ResidualQuantiles& rq,
                                        const std::vector<std::string>& labels,
                                        const std::string& path) {
  static const char* axes[3] = {"x", "y", "z"};
  auto out = detail::open_output(path);
  out << "label,axis,q025_m,q500_m,q975_m\n";
  for (Eigen::Index j = 0; j < rq.q500.size(); ++j)
    out << labels[static_cast<std::size_t>(j / 3)] << ',' << axes[j % 3] << ','
        << detail::fmt_g17(rq.q025[j]) << ',' << detail::fmt_g17(rq.q500[j]) << ','
        << detail::fmt_g17(rq.q975[j]) << '\n';
}

inline void save_dic_table_csv(const std::vector<DicCell>& table, const std::string& path) {
  auto out = detail::open_output(path);
  out << "lambda_s_m,lambda_d_m,dic,p_d,mean_deviance,seed\n";
  for (const auto& cell : table) {
    out << detail::fmt_g17(cell.lambda_s) << ',' << detail::fmt_g17(cell.lambda_d) << ',';
    if (cell.valid)
      out << detail::fmt_g17(cell.dic) << ',' << detail::fmt_g17(cell.p_d) << ','
          << detail::fmt_g17(cell.mean_deviance);
    else
      out << "nan,nan,nan";
    out << ',' << cell.seed << '\n';
  }
}

inline nlohmann::json mw_summary_json(const MwPosterior& mw, bool map_defined, double mw_of_map) {
  nlohmann::json j{{"draw_count", mw.draws.size()},
                   {"undefined_count", mw.undefined_count},
                   {"median", mw.median},
                   {"q025", mw.q025},
                   {"q975", mw.q975}};
  if (map_defined) j["map"] = mw_of_map;
  return j;
}

}  // namespace slipinv

#endif
