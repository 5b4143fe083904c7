#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>

namespace ceqr {

/// Loss components of one optimization step.
struct TrainStats {
  double qr = 0.0;
  double cal_z = 0.0;
  double nll = 0.0;
  double reg = 0.0;
  double cal_el = 0.0;
  double interval = 0.0;
  double total = 0.0;
};

/// One CSV row per training episode. Loss columns are episode means over the
/// optimization steps taken during the episode; they are left empty when no
/// step was taken (replay warm-up).
struct MetricsRecord {
  std::size_t step = 0;     ///< environment frames seen when the episode ended
  std::size_t episode = 0;
  double episode_return = 0.0;
  std::optional<TrainStats> losses;
  double mean_psi_ep = 0.0;
  double mean_psi_al = 0.0;
  double greedy_agreement = 0.0;
};

inline constexpr int kMetricsSchemaVersion = 1;

/// step,episode,return,L_qr,L_cal_Z,L_nll,L_reg,L_cal_EL,L_interval,mean_psi_ep,mean_psi_al,greedy_agreement
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRecord& record);

/// Fixed-format number used in every emitted CSV so reruns are byte-identical.
std::string format_number(double value);

}  // namespace ceqr
