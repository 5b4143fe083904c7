#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ceqr::gradcheck {

struct Options {
  std::size_t trials = 50;
  double step = 1e-5;
  double tolerance = 1e-4;
  std::uint64_t seed = 20240611;
  /// Restrict to the named losses (empty = all).
  std::vector<std::string> only;
  /// Test hook: scale analytic gradients by (1 + corrupt) before comparison.
  double corrupt = 0.0;
};

struct Row {
  std::string loss;
  std::size_t trials = 0;
  std::size_t parameters = 0;
  double max_relative_error = 0.0;
  bool passed = false;
};

/// Names of every loss covered by the suite, in report order.
std::vector<std::string> loss_names();

/// For each loss, composes it with a small two-layer ReLU network (at most
/// 100 parameters) on random inputs and compares analytic parameter gradients
/// against central finite differences. The relative error of a trial is
/// max_k |analytic_k - numeric_k| / max_k max(|analytic_k|, |numeric_k|).
/// Draws whose finite-difference stencil would straddle a loss kink are
/// redrawn.
std::vector<Row> run(const Options& options = {});

}  // namespace ceqr::gradcheck
