#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "heatobs/gaussian_field.hpp"

namespace heatobs {

// One sweep request as assembled from the command line / config file.
struct ExperimentConfig {
    std::string subcommand = "observe";
    int d = 1;
    std::vector<double> T{1.0};
    std::vector<double> N{1.0};
    std::vector<double> eps;   // empty = unperturbed runs only
    std::vector<double> r;     // window radii; empty = no window
    std::vector<double> s{1.0};
    int k = 1;
    double tau = 0.5;
    std::string field_text;    // serialized mixture; empty = unit Gaussian at 0
    std::string rule = "alternating";
    std::string growth = "constant";
    double tol = 1e-6;
    std::uint64_t seed = 0;
    int jobs = 1;

    GaussianMixtureField field() const;
};

std::string format17(double v);
std::uint64_t fnv1a(const std::string& s);

// Fitted constants for the nonconstructive bounds, keyed "bound:d=<dim>",
// persisted as JSON together with a fingerprint of the sweep that produced
// them.  A table whose fingerprint does not match the built-in sweep is
// ignored (constant() falls back to the raw value 1) until recalibrated.
struct CalibrationTable {
    int version = 1;
    std::string fingerprint;
    std::string sweep;
    std::map<std::string, double> constants;

    bool matches() const { return fingerprint == expected_fingerprint(); }
    double constant(const std::string& id) const;

    static std::string sweep_description();
    static std::string expected_fingerprint();
    static CalibrationTable load(const std::string& path);
    // Existing file at `path` is archived to `path`.bak before the write.
    void save(const std::string& path) const;
};

// All bound ids the calibration sweep knows how to fit.
std::vector<std::string> calibration_ids();

// Returns a copy of `base` with the requested constants refitted on the
// standard corpus; empty id list leaves the table untouched.  Any sweep
// failure throws before the table is mutated.
CalibrationTable run_calibration(const CalibrationTable& base,
                                 const std::vector<std::string>& ids);

struct RunResult {
    std::string header;
    std::vector<std::string> rows;  // sorted by the subcommand's key order
    int failures = 0;               // asserted inequalities broken beyond certificate
};

RunResult run_experiment(const ExperimentConfig& cfg, const CalibrationTable& table);

}  // namespace heatobs
