#include "ceqr/metrics.hpp"

#include <cstdio>

namespace ceqr {

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

std::string metrics_csv_header() {
  return "step,episode,return,L_qr,L_cal_Z,L_nll,L_reg,L_cal_EL,L_interval,mean_psi_ep,"
         "mean_psi_al,greedy_agreement";
}

std::string metrics_csv_row(const MetricsRecord& r) {
  std::string row = std::to_string(r.step) + "," + std::to_string(r.episode) + "," +
                    format_number(r.episode_return);
  const auto loss = [&](double TrainStats::*field) {
    row += ",";
    if (r.losses) row += format_number((*r.losses).*field);
  };
  loss(&TrainStats::qr);
  loss(&TrainStats::cal_z);
  loss(&TrainStats::nll);
  loss(&TrainStats::reg);
  loss(&TrainStats::cal_el);
  loss(&TrainStats::interval);
  row += "," + format_number(r.mean_psi_ep) + "," + format_number(r.mean_psi_al) + "," +
         format_number(r.greedy_agreement);
  return row;
}

}  // namespace ceqr
