#pragma once

#include <limits>
#include <string>
#include <vector>

namespace orbsde {

// One failed (or barely passed) check. `margin` is signed: negative means the
// inequality under test was violated by that amount. Indices are 1-based so
// they can be quoted directly in reports.
struct Violation {
    std::string what;
    double margin = 0.0;
    std::vector<int> indices;
    std::vector<double> point;
};

struct ValidationReport {
    std::string subject;
    std::vector<Violation> violations;
    std::vector<std::string> notes;
    double worst_margin = std::numeric_limits<double>::infinity();

    bool pass() const { return violations.empty(); }

    void record(double margin, std::string what, std::vector<int> indices = {},
                std::vector<double> point = {}) {
        if (margin < worst_margin) worst_margin = margin;
        if (margin < 0.0)
            violations.push_back({std::move(what), margin, std::move(indices), std::move(point)});
    }

    std::string summary() const;
};

}  // namespace orbsde
