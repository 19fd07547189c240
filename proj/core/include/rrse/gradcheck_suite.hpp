#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rrse/gradcheck.hpp"

namespace rrse {

struct GradcheckRow {
  std::string name;
  std::string kind;  // "op" or "block"
  std::uint64_t seed = 0;
  GradcheckReport report;
};

/// Names of every op and block covered by the suite.
std::vector<std::string> gradcheck_case_names();

/// Runs each selected case once per seed in 64-bit. `filter` selects a case
/// by exact name or a family by prefix ("segse" -> segse_d1..d3); empty runs
/// everything. Unknown filters throw.
std::vector<GradcheckRow> run_gradcheck_suite(const std::string& filter = "",
                                              const std::vector<std::uint64_t>& seeds = {1, 2, 3},
                                              double tolerance = 1e-4);

/// Fixed-width text table of the rows.
std::string gradcheck_table(const std::vector<GradcheckRow>& rows);

}  // namespace rrse
