#pragma once

#include <cmath>
#include <map>
#include <string>

namespace heatobs {

// Measured quantity vs. the inequality right-hand side it is compared to,
// with the total numerical-error certificate and the parameters of the run.
struct BoundReport {
    std::string name;
    double measured = 0.0;
    double bound_rhs = 0.0;
    double certificate = 0.0;
    bool certified = true;
    std::map<std::string, double> params;
    std::string policy;

    double ratio() const {
        return bound_rhs > 0 ? measured / bound_rhs : std::nan("");
    }
    // the asserted inequality, allowing certificate slack
    bool holds() const { return measured <= bound_rhs + certificate; }
};

}  // namespace heatobs
