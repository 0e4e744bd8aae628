#pragma once

#include <string>
#include <vector>

namespace darwin::verification {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  /// One line per measured quantity, "name = value (limit)".
  std::vector<std::string> measurements;
  double seconds = 0.0;
};

CriterionResult kernel_equivalence();        // 1
CriterionResult hamiltonian_conservation();  // 2
CriterionResult inverse_c2_scaling();        // 3
CriterionResult coulomb_limit();             // 4
CriterionResult transverse_projector();      // 5
CriterionResult meissner_compensation();     // 6
CriterionResult nyquist_limit();             // 7
CriterionResult noise_identity();            // 8
CriterionResult ed_sanity();                 // 9
CriterionResult grid_convergence();          // 10

CriterionResult run_criterion(int id);

/// Suites: conservation, kernels, response-algebra, noise-identities, ed, all.
/// Throws std::invalid_argument for an unknown name.
std::vector<int> suite_criteria(const std::string& suite);
const std::vector<std::string>& suite_names();

/// "PASS  3  title  [m1; m2; ...]  (0.12 s)"
std::string format_result(const CriterionResult& r);

}  // namespace darwin::verification
