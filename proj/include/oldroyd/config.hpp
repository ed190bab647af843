#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "oldroyd/fixed_point.hpp"
#include "oldroyd/params.hpp"

namespace oldroyd {

// Run configuration, read from a flat `section.key = value` text file.
// Lines starting with '#' and blank lines are ignored. Unknown keys,
// malformed numbers and out-of-range values raise ConfigError.
struct RunConfig {
    // grid
    int dim = 2;
    int n = 32;
    double extent = 1.0;

    // fluid
    double eps = 0.1;
    double omega = 0.5;
    double We = 0.1;
    double alpha = 1.0;
    double a = 1.0;
    double m1 = 0.5;
    double M1 = 1.5;

    // pressure
    std::string pressure_kind = "linear";
    double kappa = 1.0;
    double cs = 1.0;
    std::vector<double> table_rho;
    std::vector<double> table_dp_drho;

    // time
    double T = 0.05;
    double dt = 1e-3;
    double stress_theta = 0.5;

    // solver
    double tol_lin = 1e-10;
    int max_lin_iter = 5000;
    double tol_fp = 1e-8;
    int max_iter = 50;

    // budget (B1, B2 <= 0 means size them from the data)
    double B1 = 0.0;
    double B2 = 0.0;
    double C2 = 1.0;
    double C3 = 1.0;
    double C5 = 1.0;
    double C6 = 1.0;
    double margin = 1.01;

    // ic
    std::string ic_velocity = "zero";
    double ic_velocity_amplitude = 0.0;
    std::string ic_density = "zero";
    double ic_density_amplitude = 0.0;
    std::string ic_stress = "zero";
    double ic_stress_amplitude = 0.0;

    // forcing
    std::string forcing = "zero";
    double forcing_amplitude = 0.0;
    double forcing_period = 0.02;

    // uniqueness
    double uniqueness_amplitude = 1e-4;  // sigma0 perturbation, cosine-density shape
    double uniqueness_delta = 0.0;       // <= 0: half the admissible limit
    double uniqueness_slack = 1.05;
    std::vector<int> uniqueness_resolutions{32, 64};

    // probe
    double probe_delta = 1e-3;
    int probe_levels = 3;
    double probe_band = 1.5;
    std::string probe_component = "all";  // all | w | pi | psi

    // mms
    std::vector<int> mms_resolutions{16, 32, 64};
    double mms_T = 0.01;

    // output
    std::string output_dir = "out";
    bool snapshots = true;

    std::size_t steps() const;
    FluidParams fluid() const;
    LinearSolveOptions linear() const;
    MapOptions map_options() const;
    IterateOptions iterate_options() const;
    SizingConstants sizing() const;

    // Range and name checks; throws ConfigError naming the offending key.
    void validate() const;

    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(std::istream& is, const std::string& source = "<stream>");
RunConfig load_config(const std::filesystem::path& path);

// Writes every key, so parse(serialize(c)) == c.
void serialize_config(std::ostream& os, const RunConfig& c);
std::string serialize_config(const RunConfig& c);

}  // namespace oldroyd
