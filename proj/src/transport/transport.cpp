#include "oldroyd/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "oldroyd/errors.hpp"
#include "oldroyd/norms.hpp"
#include "oldroyd/operators.hpp"
#include "oldroyd/small_matrix.hpp"

namespace oldroyd {

std::array<double, 3> CharacteristicMap::position(std::size_t node) const {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = 0; a < grid->dim(); ++a) x[a] = departure[node][a] * grid->spacing(a);
    return x;
}

double interpolate(const Field& f, int c, const std::array<double, 3>& s) {
    const Grid& g = f.grid();
    const int dim = g.dim();
    std::array<std::size_t, 3> base{0, 0, 0};
    std::array<double, 3> frac{0.0, 0.0, 0.0};
    std::size_t origin = 0;
    for (int a = 0; a < dim; ++a) {
        const int b = std::min(static_cast<int>(std::floor(s[a])), g.cells(a) - 1);
        base[a] = static_cast<std::size_t>(std::max(b, 0));
        frac[a] = s[a] - static_cast<double>(base[a]);
        origin += base[a] * g.stride(a);
    }
    auto v = f.component(c);
    double sum = 0.0;
    for (int corner = 0; corner < (1 << dim); ++corner) {
        double wgt = 1.0;
        std::size_t idx = origin;
        for (int a = 0; a < dim; ++a) {
            if (corner & (1 << a)) {
                wgt *= frac[a];
                idx += g.stride(a);
            } else {
                wgt *= 1.0 - frac[a];
            }
        }
        sum += wgt * v[idx];
    }
    return sum;
}

CharacteristicMap trace(const VectorField& w, double dt) {
    if (!w.satisfies_dirichlet()) throw InvalidArgument("trace: velocity is not a Dirichlet field");
    if (!(dt > 0.0)) throw InvalidArgument("trace: dt must be positive");
    const Grid& g = w.grid();
    const int dim = g.dim();
    CharacteristicMap map;
    map.grid = w.grid_ptr();
    map.dt = dt;
    map.departure.resize(g.node_count());
    map.clipped.assign(g.node_count(), 0);

    auto clamp_to_box = [&g, dim](std::array<double, 3>& s) {
        double excursion = 0.0;
        for (int a = 0; a < dim; ++a) {
            const double hi = g.cells(a);
            if (s[a] < 0.0) {
                excursion = std::max(excursion, -s[a]);
                s[a] = 0.0;
            } else if (s[a] > hi) {
                excursion = std::max(excursion, s[a] - hi);
                s[a] = hi;
            }
        }
        return excursion;
    };

    for (std::size_t n = 0; n < g.node_count(); ++n) {
        const auto ijk = g.multi_index(n);
        std::array<double, 3> mid{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a) mid[a] = ijk[a] - 0.5 * dt * w(a, n) / g.spacing(a);
        clamp_to_box(mid);
        std::array<double, 3> dep{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a) dep[a] = ijk[a] - dt * interpolate(w, a, mid) / g.spacing(a);
        const double excursion = clamp_to_box(dep);
        if (excursion > kDepartureTolerance) {
            std::ostringstream msg;
            msg << "characteristic from node " << n << " leaves the domain by " << excursion
                << " cells; the velocity does not vanish on the boundary or dt |grad w| is too large";
            throw DepartureExcursion(msg.str(), n);
        }
        if (excursion > 0.0) {
            map.clipped[n] = 1;
            map.max_excursion = std::max(map.max_excursion, excursion);
        }
        map.departure[n] = dep;
    }
    return map;
}

void advect(const Field& src, const CharacteristicMap& map, Field& dst) {
    src.require_compatible(dst, "advect");
    if (!src.grid().same_layout(*map.grid)) throw InvalidArgument("advect: map on another grid");
    for (int c = 0; c < src.components(); ++c) {
        auto out = dst.component(c);
        for (std::size_t n = 0; n < out.size(); ++n) out[n] = interpolate(src, c, map.departure[n]);
    }
}

DensityStep step_density(const ScalarField& sigma_prev, const VectorField& w, double dt,
                         const FluidParams& params) {
    return step_density(sigma_prev, w, trace(w, dt), params);
}

DensityStep step_density(const ScalarField& sigma_prev, const VectorField& w,
                         const CharacteristicMap& map, const FluidParams& params) {
    const double dt = map.dt;
    const double c = params.alpha / (params.eps * params.eps);
    const ScalarField divw = divergence(w);
    ScalarField sigma(sigma_prev.grid_ptr());
    advect(sigma_prev, map, sigma);
    for (std::size_t n = 0; n < sigma.nodes(); ++n) {
        const double x = -dt * divw[n];
        sigma[n] = sigma[n] * std::exp(x) + c * std::expm1(x);
    }
    DensityStep out{sigma, mean(sigma), {}};
    out.sigma = mean_zero_project(sigma);
    out.band = density_band(out.sigma, params);
    require_density_band(out.sigma, params, params.band_low() * (1.0 - kBandTolerance),
                         params.band_high() * (1.0 + kBandTolerance), "density step");
    return out;
}

SymTensorField step_stress(const SymTensorField& tau_prev, const VectorField& w, double dt,
                           const FluidParams& params, double theta) {
    return step_stress(tau_prev, w, trace(w, dt), params, theta);
}

SymTensorField step_stress(const SymTensorField& tau_prev, const VectorField& w,
                           const CharacteristicMap& map, const FluidParams& params, double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("step_stress: theta must be in [0, 1]");
    const Grid& g = tau_prev.grid();
    const int dim = g.dim();
    const int m = sym_components(dim);
    const double dt = map.dt;
    const double We = params.We;

    std::vector<std::array<int, 2>> pairs(m);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) pairs[sym_index(i, j, dim)] = {i, j};

    const TensorField L = gradient(w);
    SymTensorField tau(tau_prev.grid_ptr());
    advect(tau_prev, map, tau);

    std::vector<double> M(m * m), A(m * m), rhs(m);
    for (std::size_t n = 0; n < g.node_count(); ++n) {
        Mat3 Ln{};
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) Ln[i][j] = L.at(i, j, n);

        for (int k = 0; k < m; ++k) {
            Mat3 E{};
            E[pairs[k][0]][pairs[k][1]] = 1.0;
            E[pairs[k][1]][pairs[k][0]] = 1.0;
            const Mat3 gk = g_term(Ln, E, params.a, dim);
            for (int p = 0; p < m; ++p) {
                const int i = pairs[p][0], j = pairs[p][1];
                M[p * m + k] = E[i][j] / We + 0.5 * (gk[i][j] + gk[j][i]);
            }
        }
        for (int p = 0; p < m; ++p) {
            const int i = pairs[p][0], j = pairs[p][1];
            double Mt = 0.0;
            for (int k = 0; k < m; ++k) Mt += M[p * m + k] * tau(k, n);
            const double D = 0.5 * (Ln[i][j] + Ln[j][i]);
            rhs[p] = tau(p, n) - (1.0 - theta) * dt * Mt + dt * 2.0 * params.omega / We * D;
            for (int k = 0; k < m; ++k) A[p * m + k] = (p == k ? 1.0 : 0.0) + theta * dt * M[p * m + k];
        }
        if (!solve_dense(A, rhs, m)) {
            const auto x = g.position(n);
            std::ostringstream msg;
            msg << "stress update singular at node " << n << " (x = " << x[0] << ", " << x[1];
            if (dim == 3) msg << ", " << x[2];
            msg << ")";
            throw SingularStressSystem(msg.str(), n);
        }
        for (int p = 0; p < m; ++p) tau(p, n) = rhs[p];
    }
    return tau;
}

// ---------------------------------------------------------------------------

double solve_rate_constant(double r, double L) {
    if (!(r > 0.0)) return 0.0;
    if (L <= 0.0) return r;
    double lo = 0.0, hi = r;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid * std::exp(mid * L) >= r) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

namespace {

template <class F>
void require_history(const std::vector<F>& x, const std::vector<VectorField>& w, double dt,
                     const char* context) {
    if (x.empty() || x.size() != w.size()) {
        throw InvalidArgument(std::string(context) + ": histories must be nonempty and equally long");
    }
    if (x.size() > 1 && !(dt > 0.0)) throw InvalidArgument(std::string(context) + ": dt must be positive");
}

template <class F>
double rate_h1(const F& a, const F& b, double dt) {
    F d = b - a;
    d.scale(1.0 / dt);
    return norm(d, 1);
}

}  // namespace

TransportBoundReport check_density_bounds(const std::vector<ScalarField>& sigma,
                                          const std::vector<VectorField>& w, double dt,
                                          const FluidParams& params) {
    require_history(sigma, w, dt, "check_density_bounds");
    TransportBoundReport rep;
    rep.initial_h2 = norm(sigma[0], 2);
    rep.initial_l2 = norm(sigma[0]);
    const double base = rep.initial_h2 + params.alpha / (params.eps * params.eps);
    rep.sup_norm = rep.initial_h2;
    rep.sup_h2_history.push_back(rep.initial_h2);
    rep.w_sup_h2 = norm(w[0], 2);

    // Rates at round-off level (the mean projection alone produces them) are
    // not evidence of transport and do not enter the fit.
    const double rate_floor = 1e-12 * (1.0 + base) / dt;
    auto fit = [&rep, base, rate_floor]() {
        const double L = rep.w_l1_h3;
        double cb = 0.0;
        if (rep.sup_norm > base) {
            cb = L > 0.0 ? std::log(rep.sup_norm / base) / L : std::numeric_limits<double>::infinity();
        }
        double cr = 0.0;
        if (rep.sup_rate > rate_floor) {
            cr = rep.w_sup_h2 > 0.0 ? solve_rate_constant(rep.sup_rate / (rep.w_sup_h2 * base), L)
                                    : std::numeric_limits<double>::infinity();
        }
        rep.C_bound = cb;
        rep.C_rate = cr;
        rep.C_omega = std::max(cb, cr);
    };
    fit();
    rep.running_C_omega.push_back(rep.C_omega);

    for (std::size_t n = 0; n + 1 < sigma.size(); ++n) {
        const double s2 = norm(sigma[n + 1], 2);
        rep.sup_h2_history.push_back(s2);
        rep.sup_norm = std::max(rep.sup_norm, s2);
        rep.sup_rate = std::max(rep.sup_rate, rate_h1(sigma[n], sigma[n + 1], dt));
        rep.w_l1_h3 += dt * norm(w[n + 1], 3);
        rep.w_sup_h2 = std::max(rep.w_sup_h2, norm(w[n + 1], 2));
        fit();
        rep.running_C_omega.push_back(rep.C_omega);
    }

    const double growth = std::exp(rep.C_omega * rep.w_l1_h3);
    rep.bound = base * growth;
    rep.rate_bound = rep.C_omega * rep.w_sup_h2 * base * growth;
    const double tol = 1e-12 * (1.0 + rep.bound);
    rep.holds = rep.sup_norm <= rep.bound + tol &&
                rep.sup_rate <= rep.rate_bound * (1.0 + 1e-12) + tol + rate_floor;
    return rep;
}

TransportBoundReport check_stress_bounds(const std::vector<SymTensorField>& tau,
                                         const std::vector<VectorField>& w, double dt,
                                         const FluidParams& params, double C_omega) {
    require_history(tau, w, dt, "check_stress_bounds");
    TransportBoundReport rep;
    rep.C_omega = C_omega;
    rep.initial_h2 = norm(tau[0], 2);
    rep.initial_l2 = norm(tau[0]);
    rep.sup_norm = rep.initial_h2;
    rep.sup_h2_history.push_back(rep.initial_h2);
    rep.w_sup_h2 = norm(w[0], 2);
    for (std::size_t n = 0; n + 1 < tau.size(); ++n) {
        const double t2 = norm(tau[n + 1], 2);
        rep.sup_h2_history.push_back(t2);
        rep.sup_norm = std::max(rep.sup_norm, t2);
        rep.sup_rate = std::max(rep.sup_rate, rate_h1(tau[n], tau[n + 1], dt));
        rep.w_l1_h3 += dt * norm(w[n + 1], 3);
        rep.w_sup_h2 = std::max(rep.w_sup_h2, norm(w[n + 1], 2));
    }

    // C_omega = 0 makes 2 omega / (C We) infinite: the bounds hold vacuously.
    const double inv = C_omega > 0.0 ? 1.0 / (C_omega * params.We)
                                     : std::numeric_limits<double>::infinity();
    const double growth = std::exp(C_omega * rep.w_l1_h3);
    const double amp = rep.initial_h2 + 2.0 * params.omega * inv;
    rep.bound = amp * growth;
    const double rate_scale = (rep.w_sup_h2 + inv) * amp * growth;
    rep.C0 = std::isfinite(rate_scale) && rate_scale > 0.0 ? rep.sup_rate / rate_scale : 0.0;
    rep.rate_bound = rep.C0 * rate_scale;
    rep.holds = rep.sup_norm <= rep.bound * (1.0 + 1e-12);
    return rep;
}

}  // namespace oldroyd
