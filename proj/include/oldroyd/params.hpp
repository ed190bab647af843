#pragma once

#include <string>
#include <vector>

namespace oldroyd {

struct FluidParams;

// Barotropic pressure law p(rho) in nondimensional variables.
//
// Only dp/drho enters the solver, through the pressure remainder
//   w(sigma) = dp/drho(alpha + eps^2 sigma) - dp/drho(alpha),
// which vanishes at sigma = 0 for every law.
class PressureLaw {
public:
    enum class Kind { linear, isothermal, quadratic, custom_table };

    // p = (rho - alpha) / eps^2
    static PressureLaw linear();
    // p = cs^2 rho
    static PressureLaw isothermal(double cs);
    // p = kappa rho^2 / 2
    static PressureLaw quadratic(double kappa);
    // dp/drho sampled at strictly increasing densities; natural cubic spline in between.
    static PressureLaw table(std::vector<double> rho, std::vector<double> dp_drho);

    Kind kind() const noexcept { return kind_; }
    double kappa() const noexcept { return kappa_; }
    double cs() const noexcept { return cs_; }
    const std::vector<double>& table_rho() const noexcept { return rho_; }
    const std::vector<double>& table_dp_drho() const noexcept { return dpdrho_; }

    double dp_drho(double rho, double eps) const;
    double d2p_drho2(double rho, double eps) const;

    // Densities where the law is defined; throws PressureRangeError outside.
    double min_density() const noexcept;
    double max_density() const noexcept;

    // w(sigma) at one value; throws PressureRangeError if alpha + eps^2 sigma
    // leaves [m1/2, 2 M1] or the law's own range.
    double remainder(double sigma, const FluidParams& params) const;

    // sup |dw/dsigma| over the operating band [m1/2, 2 M1].
    double remainder_lipschitz(const FluidParams& params) const;

    static std::string kind_name(Kind kind);
    static Kind parse_kind(const std::string& name);

private:
    double spline_eval(double rho, int derivative) const;

    Kind kind_ = Kind::linear;
    double kappa_ = 0.0;
    double cs_ = 0.0;
    std::vector<double> rho_;
    std::vector<double> dpdrho_;
    std::vector<double> second_;  // spline second derivatives at the knots
};

// Nondimensional parameters of the compressible Oldroyd-B system.
struct FluidParams {
    double eps = 0.1;    // Mach number, (0, 1]
    double omega = 0.5;  // retardation ratio, (0, 1)
    double We = 0.1;     // Weissenberg number, > 0
    double alpha = 1.0;  // reference density, > 0
    double a = 1.0;      // slip parameter, [-1, 1]
    double m1 = 0.5;     // lower density bound
    double M1 = 1.5;     // upper density bound
    PressureLaw pressure = PressureLaw::linear();

    // Throws ConfigError naming the first violated range.
    void validate() const;

    // Operating band for alpha + eps^2 sigma along solutions.
    double band_low() const noexcept { return 0.5 * m1; }
    double band_high() const noexcept { return 2.0 * M1; }
};

}  // namespace oldroyd
