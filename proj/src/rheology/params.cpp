#include "oldroyd/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "oldroyd/errors.hpp"

namespace oldroyd {

PressureLaw PressureLaw::linear() { return PressureLaw{}; }

PressureLaw PressureLaw::isothermal(double cs) {
    if (!(cs > 0.0)) throw ConfigError("isothermal pressure law needs cs > 0");
    PressureLaw law;
    law.kind_ = Kind::isothermal;
    law.cs_ = cs;
    return law;
}

PressureLaw PressureLaw::quadratic(double kappa) {
    if (!(kappa > 0.0)) throw ConfigError("quadratic pressure law needs kappa > 0");
    PressureLaw law;
    law.kind_ = Kind::quadratic;
    law.kappa_ = kappa;
    return law;
}

PressureLaw PressureLaw::table(std::vector<double> rho, std::vector<double> dp_drho) {
    if (rho.size() != dp_drho.size() || rho.size() < 3) {
        throw ConfigError("pressure table needs matching rho/dp_drho lists with at least 3 samples");
    }
    for (std::size_t i = 1; i < rho.size(); ++i) {
        if (!(rho[i] > rho[i - 1])) throw ConfigError("pressure table densities must increase strictly");
    }
    if (!(rho.front() > 0.0)) throw ConfigError("pressure table densities must be positive");

    PressureLaw law;
    law.kind_ = Kind::custom_table;
    law.rho_ = std::move(rho);
    law.dpdrho_ = std::move(dp_drho);

    // Natural cubic spline: tridiagonal system for the knot second derivatives.
    const std::size_t n = law.rho_.size();
    std::vector<double> m(n, 0.0), c(n, 0.0), d(n, 0.0);
    const auto& x = law.rho_;
    const auto& y = law.dpdrho_;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x[i] - x[i - 1];
        const double h1 = x[i + 1] - x[i];
        const double diag = 2.0 * (h0 + h1);
        const double rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        // Thomas forward sweep; sub-diagonal h0, super-diagonal h1.
        const double denom = diag - h0 * c[i - 1];
        c[i] = h1 / denom;
        d[i] = (rhs - h0 * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 1;) m[i] = d[i] - c[i] * m[i + 1];
    law.second_ = std::move(m);
    return law;
}

double PressureLaw::spline_eval(double rho, int derivative) const {
    const auto& x = rho_;
    auto it = std::upper_bound(x.begin(), x.end(), rho);
    std::size_t i = static_cast<std::size_t>(std::distance(x.begin(), it));
    i = std::clamp<std::size_t>(i, 1, x.size() - 1) - 1;
    const double h = x[i + 1] - x[i];
    const double A = (x[i + 1] - rho) / h;
    const double B = (rho - x[i]) / h;
    const double m0 = second_[i];
    const double m1 = second_[i + 1];
    if (derivative == 0) {
        return A * dpdrho_[i] + B * dpdrho_[i + 1] +
               ((A * A * A - A) * m0 + (B * B * B - B) * m1) * h * h / 6.0;
    }
    return (dpdrho_[i + 1] - dpdrho_[i]) / h - (3.0 * A * A - 1.0) * h * m0 / 6.0 +
           (3.0 * B * B - 1.0) * h * m1 / 6.0;
}

double PressureLaw::min_density() const noexcept {
    return kind_ == Kind::custom_table ? rho_.front() : 0.0;
}

double PressureLaw::max_density() const noexcept {
    return kind_ == Kind::custom_table ? rho_.back() : std::numeric_limits<double>::infinity();
}

double PressureLaw::dp_drho(double rho, double eps) const {
    switch (kind_) {
        case Kind::linear:
            return 1.0 / (eps * eps);
        case Kind::isothermal:
            return cs_ * cs_;
        case Kind::quadratic:
            return kappa_ * rho;
        case Kind::custom_table:
            return spline_eval(rho, 0);
    }
    return 0.0;
}

double PressureLaw::d2p_drho2(double rho, double /*eps*/) const {
    switch (kind_) {
        case Kind::linear:
        case Kind::isothermal:
            return 0.0;
        case Kind::quadratic:
            return kappa_;
        case Kind::custom_table:
            return spline_eval(rho, 1);
    }
    return 0.0;
}

double PressureLaw::remainder(double sigma, const FluidParams& params) const {
    const double rho = params.alpha + params.eps * params.eps * sigma;
    const double lo = std::max(params.band_low(), min_density());
    const double hi = std::min(params.band_high(), max_density());
    if (!(rho >= lo && rho <= hi)) {
        std::ostringstream msg;
        msg << "unphysical density " << rho << " outside the pressure law range [" << lo << ", "
            << hi << "]";
        throw PressureRangeError(msg.str(), rho);
    }
    switch (kind_) {
        case Kind::linear:
        case Kind::isothermal:
            return 0.0;
        case Kind::quadratic:
            return kappa_ * params.eps * params.eps * sigma;
        case Kind::custom_table:
            return spline_eval(rho, 0) - spline_eval(params.alpha, 0);
    }
    return 0.0;
}

double PressureLaw::remainder_lipschitz(const FluidParams& params) const {
    const double e2 = params.eps * params.eps;
    switch (kind_) {
        case Kind::linear:
        case Kind::isothermal:
            return 0.0;
        case Kind::quadratic:
            return kappa_ * e2;
        case Kind::custom_table: {
            const double lo = std::max(params.band_low(), min_density());
            const double hi = std::min(params.band_high(), max_density());
            double sup = 0.0;
            constexpr int kSamples = 512;
            for (int i = 0; i <= kSamples; ++i) {
                const double rho = lo + (hi - lo) * i / kSamples;
                sup = std::max(sup, std::abs(spline_eval(rho, 1)));
            }
            return sup * e2;
        }
    }
    return 0.0;
}

std::string PressureLaw::kind_name(Kind kind) {
    switch (kind) {
        case Kind::linear:
            return "linear";
        case Kind::isothermal:
            return "isothermal";
        case Kind::quadratic:
            return "quadratic";
        case Kind::custom_table:
            return "custom-table";
    }
    return "linear";
}

PressureLaw::Kind PressureLaw::parse_kind(const std::string& name) {
    if (name == "linear") return Kind::linear;
    if (name == "isothermal") return Kind::isothermal;
    if (name == "quadratic") return Kind::quadratic;
    if (name == "custom-table") return Kind::custom_table;
    throw ConfigError("unknown pressure.kind '" + name + "'");
}

void FluidParams::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("fluid parameters: " + what); };
    if (!(eps > 0.0 && eps <= 1.0)) fail("Mach number eps must lie in (0, 1]");
    if (!(omega > 0.0 && omega < 1.0)) fail("retardation ratio omega must lie in (0, 1)");
    if (!(We > 0.0)) fail("Weissenberg number We must be positive");
    if (!(alpha > 0.0)) fail("reference density alpha must be positive");
    if (!(a >= -1.0 && a <= 1.0)) fail("slip parameter a must lie in [-1, 1]");
    if (!(m1 > 0.0 && m1 <= M1)) fail("density bounds need 0 < m1 <= M1");
    if (!(m1 <= alpha && alpha <= M1)) fail("density bounds need m1 <= alpha <= M1");
    if (pressure.kind() == PressureLaw::Kind::custom_table &&
        !(pressure.min_density() <= alpha && alpha <= pressure.max_density())) {
        fail("pressure table must cover the reference density alpha");
    }
}

}  // namespace oldroyd
