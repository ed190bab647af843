#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "oldroyd/config.hpp"
#include "oldroyd/fixed_point.hpp"
#include "oldroyd/transport.hpp"
#include "oldroyd/velocity_solver.hpp"

namespace oldroyd {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNonConvergence = 3,
    kExitInvariant = 4,
};

// Grid, parameters, initial data and forcing described by a config.
struct Problem {
    GridPtr grid;
    FluidParams params;
    InitialData init;
    ForcingHistory forcing;
    double dt = 0.0;
    std::size_t steps = 0;
};

// `n_override` > 0 replaces grid.n.
Problem build_problem(const RunConfig& cfg, int n_override = 0);

struct InvariantCheck {
    std::string name;
    bool pass = true;
    double value = 0.0;
    double limit = 0.0;
};

// Everything the run command computes about a converged solution.
struct RunReport {
    IterationResult iteration;
    BudgetSizing budgets;
    MembershipReport membership;
    EstimateReport energy;      // velocity energy estimate
    EstimateReport regularity;  // higher-regularity estimate; ratio = C1_emp
    DissipationReport dissipation;
    TransportBoundReport density_bounds;
    TransportBoundReport stress_bounds;
    CoupledResidual residual;
    std::vector<InvariantCheck> invariants;

    bool all_pass() const;
    std::vector<std::string> violated() const;
};

// Solves the problem by fixed-point iteration and evaluates every monitor.
// Budgets come from the config when positive, otherwise from size_budgets.
// Solver failures propagate as StepFailure; non-convergence is reported in
// `iteration.status` and leaves the monitors empty.
RunReport solve_and_check(const Problem& problem, const RunConfig& cfg);

// CSV ledgers with a fixed column order.
void write_energy_ledger(std::ostream& os, const RunReport& report, const FluidParams& params);
void write_convergence_history(std::ostream& os, const IterationResult& it);

struct CommandOptions {
    std::filesystem::path out_dir;  // empty: use output.dir from the config
    int jobs = 1;
    std::ostream* log = nullptr;    // progress and tables; nullptr silences
};

// Each command writes its artifacts and a summary.json into the output
// directory and returns an ExitCode.
int cli_run(const RunConfig& cfg, const CommandOptions& opts);
int cli_mms(const RunConfig& cfg, const CommandOptions& opts);
int cli_uniqueness(const RunConfig& cfg, const CommandOptions& opts);
int cli_probe(const RunConfig& cfg, const CommandOptions& opts);

// Loads the config and dispatches; config errors become exit code 2 with a
// summary naming the problem.
int run_command(const std::string& command, const std::filesystem::path& config_path,
                const CommandOptions& opts);

// ============================================================================
// Verification studies used by the mms command
// ============================================================================

struct OrderRow {
    int resolution = 0;  // grid cells, or time steps for temporal studies
    double error = 0.0;
    double order = 0.0;  // against the previous row; 0 on the first
};

struct OrderStudy {
    std::string name;
    std::vector<OrderRow> rows;
    double required = 0.0;
    bool exact = false;  // every error at round-off level
    bool pass = true;
    double min_order() const;
};

OrderStudy mms_velocity_space(const RunConfig& cfg, int jobs = 1);
OrderStudy mms_velocity_time(const RunConfig& cfg, int jobs = 1);
OrderStudy mms_transport_still(const RunConfig& cfg);
OrderStudy mms_density_self(const RunConfig& cfg, int jobs = 1);
// Largest pre-projection mean drift of the density step per grid.
OrderStudy mms_density_mean_drift(const RunConfig& cfg, int jobs = 1);
OrderStudy mms_stress_self(const RunConfig& cfg, int jobs = 1);
OrderStudy mms_stress_relaxation(const RunConfig& cfg, double theta);

}  // namespace oldroyd
