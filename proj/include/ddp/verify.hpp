#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddp/netgraph.hpp"

namespace ddp {

struct TrialResult {
  int trial;
  double max_error;
  double tolerance;
  bool pass;
  std::string note;
};

struct SuiteResult {
  std::string suite;
  std::vector<TrialResult> trials;
  bool pass;
};

// orthogonality, natgrad-equivalence, pathsgd-equivalence, rescaling, rank,
// gradcheck, reconstruction
const std::vector<std::string>& suite_names();

SuiteResult run_suite(const std::string& name, std::uint64_t seed, int trials);

// name may be a suite or "all"
std::vector<SuiteResult> run_suites(const std::string& name, std::uint64_t seed, int trials);

}  // namespace ddp
