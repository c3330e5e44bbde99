// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace chsteer {

struct CriterionResult {
    int id;
    std::string name;
    bool pass;
    std::string detail;
};

/// Runs the verification matrix: exact-algebra certificates, solver
/// conservation and identity checks, the asymptotic and stability probes,
/// and both steering syntheses. jobs parallelizes independent solver runs;
/// only_id restricts the run to a single criterion (0 = all).
std::vector<CriterionResult> run_acceptance(std::uint64_t seed, int jobs, int only_id = 0);

/// One "PASS/FAIL criterion k: ..." line per result.
std::string acceptance_matrix(const std::vector<CriterionResult>& results);

bool all_pass(const std::vector<CriterionResult>& results);

std::string acceptance_csv(const std::vector<CriterionResult>& results);

}  // namespace chsteer
