#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace scfred::acceptance {

struct CriterionResult {
    int number = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct SuiteResult {
    std::vector<CriterionResult> criteria;
    bool all_pass() const {
        for (const auto& c : criteria)
            if (!c.pass) return false;
        return !criteria.empty();
    }
};

/// Runs the full acceptance battery. Randomized checks draw from the seed;
/// timings are informational and not part of any pass/fail decision.
SuiteResult run_suite(unsigned seed);

nlohmann::ordered_json to_json(const SuiteResult& result, unsigned seed,
                               const std::string& config_hash);

}  // namespace scfred::acceptance
