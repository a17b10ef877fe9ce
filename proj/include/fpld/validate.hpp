#pragma once

// Fast invariant suite behind `fpld validate`.

#include <cstdint>
#include <string>
#include <vector>

namespace fpld {

struct PropertyResult {
  std::string name;
  std::string statistic_name;
  double statistic = 0;
  double threshold = 0;
  bool pass = false;
};

struct ValidationOptions {
  std::uint64_t seed = 20240601;
  // Test hook: added to every reconstruction in the dither checks.
  double quantizer_bias = 0.0;
};

std::vector<PropertyResult> run_validation(const ValidationOptions& opt = {});

}  // namespace fpld
