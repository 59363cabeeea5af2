#pragma once

#include <functional>
#include <string>
#include <vector>

namespace travwave::acceptance {

struct CheckLine {
    std::string what;
    bool ok = false;
    std::string detail;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    double seconds = 0.0;
    double budget = 0.0;  // wall-clock limit in seconds
    std::vector<CheckLine> checks;

    // "PASS  3 title (1.2 s / 30 s) first failing check or key numbers"
    std::string line() const;
};

int criterion_count();

// Runs the selected criteria (all when `only` is empty) in order, reporting
// each result as soon as it is available.
std::vector<CriterionResult> run(const std::vector<int>& only = {},
                                 const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace travwave::acceptance
