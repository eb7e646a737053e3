#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace house {

struct PropertyResult {
  std::string name;
  int trials = 0;
  double worst = 0.0;      // largest observed defect across trials
  double tolerance = 0.0;  // allowed bound on the defect
  bool passed = false;
};

// Runs the numeric property suite for reflection/projection chains in
// dimension k: orthogonality and determinant of materialized rotations, norm
// preservation, chain-vs-matrix path equivalence, reflection involution,
// rotation and projection inverses, rotation decomposition round trip, the
// projection distance-change law, and distance symmetry for involutive
// rotations. Throws std::invalid_argument for k < 2 or trials < 1.
std::vector<PropertyResult> run_property_suite(int k, int trials,
                                               std::uint64_t seed = 1);

// One aligned line per property; returns true when every property passed.
bool report_properties(std::ostream& out,
                       const std::vector<PropertyResult>& results);

}  // namespace house
