#include <gtest/gtest.h>

#include "oldroyd/errors.hpp"
#include "oldroyd/fixed_point.hpp"
#include "oldroyd/harness.hpp"
#include "oldroyd/norms.hpp"
#include "oldroyd/presets.hpp"
#include "support.hpp"

using namespace oldroyd;
using namespace testing_support;

namespace {

RunConfig small_config() { return load_config(std::string(OLDROYD_SOURCE_DIR) + "/configs/smalldata2d.cfg"); }

InitialData zero_data(const GridPtr& g) {
    VectorField u(g);
    u.enforce_dirichlet();
    return {u, ScalarField(g), SymTensorField(g)};
}

ForcingHistory zero_forcing(const GridPtr& g, std::size_t steps) {
    VectorField f(g);
    f.enforce_dirichlet();
    return ForcingHistory(steps + 1, f);
}

// Converged small-data solution on the configured grid, computed once.
struct SmallData {
    RunConfig cfg = small_config();
    Problem pb = build_problem(cfg);
    IterationResult it = iterate(pb.init, pb.forcing, pb.dt, pb.steps, pb.params, cfg.iterate_options());
};

const SmallData& small() {
    static const SmallData s;
    return s;
}

bool bit_equal(const Field& a, const Field& b) {
    for (std::size_t i = 0; i < a.values().size(); ++i)
        if (a.values()[i] != b.values()[i]) return false;
    return true;
}

}  // namespace

TEST(PicardMap, ZeroTripleIsFixedPoint) {
    const auto g = unit(2, 16);
    const IterTriple x = constant_extension(zero_data(g), 1e-3, 5);
    const PicardResult r = picard_map(x, zero_forcing(g, 5), FluidParams{});
    for (std::size_t n = 0; n <= 5; ++n) {
        EXPECT_EQ(max_abs(r.next.w[n]), 0.0);
        EXPECT_EQ(max_abs(r.next.pi[n]), 0.0);
        EXPECT_EQ(max_abs(r.next.psi[n]), 0.0);
    }
}

TEST(PicardMap, PreservesInitialDataBitwise) {
    const SmallData& s = small();
    const IterTriple x = constant_extension(s.pb.init, s.pb.dt, s.pb.steps);
    const PicardResult r = picard_map(x, s.pb.forcing, s.pb.params, s.cfg.map_options());
    EXPECT_TRUE(bit_equal(r.next.w[0], s.pb.init.u0));
    EXPECT_TRUE(bit_equal(r.next.pi[0], s.pb.init.sigma0));
    EXPECT_TRUE(bit_equal(r.next.psi[0], s.pb.init.tau0));
    for (const auto& w : r.next.w) EXPECT_TRUE(w.satisfies_dirichlet());
}

// With input w the pure-diffusion trajectory and pi = psi = 0, the density and
// stress outputs are the standalone transport steps driven by w.
TEST(PicardMap, ComposesModuleSteps) {
    const auto g = unit(2, 24);
    const FluidParams p;
    const double dt = 1e-3;
    const std::size_t N = 6;
    InitialData init = zero_data(g);
    init.u0 = velocity_preset("vortex", g, 0.5);
    IterTriple x = constant_extension(init, dt, N);
    x.w = diffusion_trajectory(init.u0, dt, N, p);
    const PicardResult r = picard_map(x, zero_forcing(g, N), p);
    ScalarField sigma(g);
    SymTensorField tau(g);
    for (std::size_t n = 0; n < N; ++n) {
        sigma = step_density(sigma, x.w[n + 1], dt, p).sigma;
        tau = step_stress(tau, x.w[n + 1], dt, p);
        EXPECT_LT(max_abs(r.next.pi[n + 1] - sigma), 1e-12);
        EXPECT_LT(max_abs(r.next.psi[n + 1] - tau), 1e-12);
    }
    EXPECT_GT(max_abs(sigma), 0.0);
    EXPECT_GT(max_abs(tau), 0.0);
}

TEST(PicardMap, ContractsOnSmallData) {
    const SmallData& s = small();
    const IterTriple x0 = constant_extension(s.pb.init, s.pb.dt, s.pb.steps);
    const IterTriple x1 = picard_map(x0, s.pb.forcing, s.pb.params, s.cfg.map_options()).next;
    const IterTriple x2 = picard_map(x1, s.pb.forcing, s.pb.params, s.cfg.map_options()).next;
    EXPECT_LT(distance(x2, x1, s.pb.params).total(), distance(x1, x0, s.pb.params).total());
}

TEST(Distance, EnergyWeights) {
    const auto g = unit(2, 16);
    FluidParams p;
    p.alpha = 1.2;
    p.m1 = 1.0;
    IterTriple a = constant_extension(zero_data(g), 1e-3, 2), b = a;
    b.w[1] = velocity_preset("vortex", g, 1.0);
    b.pi[2] = ScalarField(g, 0.5);
    const Distance d = distance(a, b, p);
    EXPECT_DOUBLE_EQ(d.w, norm(b.w[1]));
    EXPECT_DOUBLE_EQ(d.pi, 0.5);
    EXPECT_EQ(d.psi, 0.0);
    EXPECT_NEAR(d.total(), std::sqrt(p.alpha) * d.w + p.eps / std::sqrt(p.alpha) * d.pi, 1e-15);
}

TEST(Iterate, ZeroDataConvergesInOneIteration) {
    const auto g = unit(2, 16);
    const IterationResult r = iterate(zero_data(g), zero_forcing(g, 4), 1e-3, 4, FluidParams{}, {});
    EXPECT_TRUE(r.converged());
    ASSERT_EQ(r.history.size(), 1u);
    EXPECT_EQ(r.history[0].distance.total(), 0.0);
}

TEST(Iterate, SmallDataConvergesMonotonically) {
    const IterationResult& r = small().it;
    ASSERT_TRUE(r.converged()) << r.message;
    EXPECT_TRUE(r.monotone());
    EXPECT_LT(r.max_ratio(), 0.9);
    EXPECT_LE(r.history.size(), 20u);
    for (std::size_t n = 0; n < r.solution.pi.size(); ++n) {
        EXPECT_LE(std::abs(mean(r.solution.pi[n])), 1e-12 * (1 + norm(r.solution.pi[n])));
        EXPECT_TRUE(r.solution.w[n].satisfies_dirichlet());
    }
}

TEST(Iterate, ConvergedSolutionHasSmallResidual) {
    const SmallData& s = small();
    const CoupledResidual c = coupled_residual(s.it.solution, s.pb.forcing, s.pb.params, s.cfg.map_options());
    EXPECT_LT(c.max(), 10 * s.cfg.tol_fp);
}

TEST(Iterate, DifferentGuessSameFixedPoint) {
    const SmallData& s = small();
    IterTriple guess = constant_extension(s.pb.init, s.pb.dt, s.pb.steps);
    guess.w = diffusion_trajectory(s.pb.init.u0, s.pb.dt, s.pb.steps, s.pb.params);
    const IterationResult other =
        iterate(s.pb.init, s.pb.forcing, s.pb.dt, s.pb.steps, s.pb.params, s.cfg.iterate_options(), &guess);
    ASSERT_TRUE(other.converged());
    const UniquenessReport u = uniqueness_experiment(s.it.solution, other.solution, 1.0, 0.0, s.pb.params);
    EXPECT_LE(u.e_final, std::pow(10 * s.cfg.tol_fp, 2));
}

TEST(Iterate, GuessMustStartFromInitialData) {
    const SmallData& s = small();
    IterTriple guess = constant_extension(s.pb.init, s.pb.dt, s.pb.steps);
    guess.pi[0].scale(2.0);
    EXPECT_THROW(iterate(s.pb.init, s.pb.forcing, s.pb.dt, s.pb.steps, s.pb.params, s.cfg.iterate_options(), &guess),
                 InvalidArgument);
}

// A window ten times longer loses the contraction: the iteration stalls,
// stops decreasing monotonically or leaves the invariant set.
TEST(Iterate, LongerWindowShowsLocality) {
    RunConfig cfg = small_config();
    cfg.T = 0.05;
    cfg.dt = 1e-3;
    cfg.max_iter = 20;
    const Problem pb = build_problem(cfg);
    IterateOptions o = cfg.iterate_options();
    const BudgetSizing b = size_budgets(pb.init, pb.forcing, pb.dt, pb.steps, pb.params, cfg.sizing());
    o.B1 = b.B1;
    o.B2 = b.B2;
    bool lost = false;
    try {
        const IterationResult r = iterate(pb.init, pb.forcing, pb.dt, pb.steps, pb.params, o);
        bool membership = true;
        for (const auto& h : r.history) membership = membership && h.membership_pass;
        lost = !r.converged() || !r.monotone() || !membership;
    } catch (const StepFailure&) {
        lost = true;
    }
    EXPECT_TRUE(lost);
}

TEST(Hypotheses, NamesTheViolation) {
    const auto g = unit(2, 16);
    const FluidParams p;
    InitialData d = zero_data(g);
    EXPECT_NO_THROW(require_initial_hypotheses(d, p));

    InitialData bad_u = d;
    bad_u.u0 = VectorField(g, 1.0);
    try {
        require_initial_hypotheses(bad_u, p);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("u0"), std::string::npos);
    }

    InitialData bad_mean = d;
    bad_mean.sigma0 = ScalarField(g, 1.0);
    try {
        require_initial_hypotheses(bad_mean, p);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("zero mean"), std::string::npos);
    }

    InitialData bad_band = d;
    bad_band.sigma0 = density_preset("cosine-density", g, 60.0);
    try {
        require_initial_hypotheses(bad_band, p);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("m1 <= alpha + eps^2 sigma0 <= M1"), std::string::npos);
    }
}

TEST(Membership, ZeroTriplePassesWithFullSlack) {
    const auto g = unit(2, 16);
    const InitialData d = zero_data(g);
    const MembershipReport m = check_membership(constant_extension(d, 1e-3, 3), d, 1.0, 1.0, FluidParams{});
    EXPECT_TRUE(m.pass);
    EXPECT_EQ(m.velocity_usage, 0.0);
    EXPECT_EQ(m.state_usage, 0.0);
    EXPECT_EQ(m.rate_usage, 0.0);
    EXPECT_GT(m.slack_min, 0.0);
}

TEST(Membership, BandViolationFails) {
    const auto g = unit(2, 16);
    const FluidParams p;
    const InitialData d = zero_data(g);
    IterTriple x = constant_extension(d, 1e-3, 3);
    x.pi[2][g->index(4, 4)] = -2 * p.alpha / (p.eps * p.eps);
    const MembershipReport m = check_membership(x, d, 1e6, 1e6, p);
    EXPECT_FALSE(m.pass);
    bool named = false;
    for (const auto& v : m.violations) named = named || v.find("band") != std::string::npos;
    EXPECT_TRUE(named);
}

TEST(Membership, SizedBudgetsContainSolution) {
    const SmallData& s = small();
    const BudgetSizing b = size_budgets(s.pb.init, s.pb.forcing, s.pb.dt, s.pb.steps, s.pb.params, s.cfg.sizing());
    EXPECT_GT(b.B1, b.C4 * b.norm_Au0 * b.norm_Au0);
    EXPECT_GT(b.B1, norm(s.pb.init.sigma0, 2));
    EXPECT_GT(b.B1, norm(s.pb.init.tau0, 2));
    const MembershipReport m = check_membership(s.it.solution, s.pb.init, b.B1, b.B2, s.pb.params);
    EXPECT_TRUE(m.pass);
}

TEST(Probe, ZeroPerturbationGivesZeroDifference) {
    const SmallData& s = small();
    Perturbation dir;
    dir.w = velocity_preset("vortex", s.pb.grid, 1.0);
    const IterTriple same = perturb(s.it.solution, dir, 0.0);
    const auto a = picard_map(same, s.pb.forcing, s.pb.params, s.cfg.map_options()).next;
    const auto b = picard_map(s.it.solution, s.pb.forcing, s.pb.params, s.cfg.map_options()).next;
    EXPECT_EQ(distance(a, b, s.pb.params).total(), 0.0);
}

// psi reaches the output only through the velocity forcing; the density and
// stress subproblems read w alone.
TEST(Probe, StressOnlyPerturbationLeavesDensity) {
    const SmallData& s = small();
    Perturbation dir;
    dir.psi = stress_preset("proportional-stress", velocity_preset("vortex", s.pb.grid, 1.0), 1.0);
    const ProbeReport r = continuity_probe(s.it.solution, dir, 1e-3, s.pb.forcing, s.pb.params, s.cfg.map_options());
    for (const auto& l : r.levels) {
        EXPECT_EQ(l.output.pi, 0.0);
        EXPECT_EQ(l.output.psi, 0.0);
        EXPECT_GT(l.output.w, 0.0);
    }
}

TEST(Probe, NearLinearShrinkage) {
    const SmallData& s = small();
    Perturbation dir;
    dir.w = velocity_preset("vortex", s.pb.grid, 1.0);
    dir.pi = density_preset("cosine-density", s.pb.grid, 1.0);
    const ProbeReport r = continuity_probe(s.it.solution, dir, 1e-3, s.pb.forcing, s.pb.params, s.cfg.map_options());
    EXPECT_TRUE(r.linear);
    ASSERT_EQ(r.ratios.size(), 2u);
    for (double q : r.ratios) EXPECT_NEAR(q, 2.0, 0.1);
}

TEST(Uniqueness, DeltaLimitFormula) {
    FluidParams p;
    p.eps = 0.1;
    p.omega = 0.5;
    p.We = 0.1;
    p.alpha = 1.0;
    EXPECT_NEAR(uniqueness_delta_limit(p), 1.0 / 0.15, 1e-12);
    p.eps = 1.0;
    p.We = 10.0;
    EXPECT_NEAR(uniqueness_delta_limit(p), std::min(1.0 / 15.0, 0.5), 1e-12);
}

TEST(Uniqueness, IdenticalSolutionsGiveZero) {
    const SmallData& s = small();
    const UniquenessReport u = uniqueness_experiment(s.it.solution, s.it.solution, 1.0, 0.0, s.pb.params);
    for (const auto& row : u.rows) EXPECT_EQ(row.e, 0.0);
    EXPECT_TRUE(u.envelope_holds);
}

TEST(Uniqueness, RejectsDeltaAtThreshold) {
    const SmallData& s = small();
    const double limit = uniqueness_delta_limit(s.pb.params);
    try {
        uniqueness_experiment(s.it.solution, s.it.solution, limit, 0.0, s.pb.params);
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("6.66"), std::string::npos) << e.what();
    }
}

TEST(Uniqueness, PerturbedDensityStaysUnderEnvelope) {
    const SmallData& s = small();
    InitialData init = s.pb.init;
    init.sigma0.add_scaled(density_preset("cosine-density", s.pb.grid, 1.0), 1e-4);
    const IterationResult other =
        iterate(init, s.pb.forcing, s.pb.dt, s.pb.steps, s.pb.params, s.cfg.iterate_options());
    ASSERT_TRUE(other.converged());
    const double delta = 0.5 * uniqueness_delta_limit(s.pb.params);
    const double C12 = fit_C12(s.it.solution, other.solution, delta, s.pb.params);
    const UniquenessReport u = uniqueness_experiment(s.it.solution, other.solution, delta, C12, s.pb.params, 1.05);
    EXPECT_TRUE(u.envelope_holds);
    EXPECT_GT(u.rows.front().e, 0.0);
    EXPECT_EQ(u.rows.size(), s.pb.steps + 1);
}

// The empirical regularity constant does not grow by more than 20% when the
// grid is refined.
TEST(EmpiricalConstants, RegularityConstantStableUnderRefinement) {
    const SmallData& s = small();
    const RunReport coarse = solve_and_check(s.pb, s.cfg);
    const Problem fine_pb = build_problem(s.cfg, 2 * s.cfg.n);
    const RunReport fine = solve_and_check(fine_pb, s.cfg);
    ASSERT_TRUE(coarse.iteration.converged());
    ASSERT_TRUE(fine.iteration.converged());
    EXPECT_GT(coarse.regularity.ratio, 0.0);
    EXPECT_LE(fine.regularity.ratio, 1.2 * coarse.regularity.ratio);
    EXPECT_TRUE(coarse.all_pass());
    EXPECT_TRUE(fine.all_pass());
}
