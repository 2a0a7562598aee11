#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "casim/errors.hpp"

namespace casim::sorption {

/// 2x2 matrix of practical diffusion coefficients with cross terms.
/// Index 1 is the species whose equation the row belongs to (B in the
/// pre-breakthrough zone, A in zone I); index 2 is the product E.
struct DiffusionMatrix {
    double d11 = 0.0; // [m^2/s]
    double d12 = 0.0;
    double d21 = 0.0;
    double d22 = 0.0;

    double trace() const { return d11 + d22; }
    double det() const { return d11 * d22 - d12 * d21; }
    double discriminant() const { return (d11 - d22) * (d11 - d22) + 4.0 * d12 * d21; }

    void validate(const char* name) const
    {
        if (!(d11 > 0.0) || !(d22 > 0.0))
            throw validation_error(std::string(name) + ": main diffusion coefficients must be > 0");
        if (discriminant() < 0.0)
            throw validation_error(std::string(name) +
                                   ": complex eigenvalues, parabolic system is ill-posed");
        const double mu_min = 0.5 * (trace() - std::sqrt(discriminant()));
        if (!(mu_min > 0.0))
            throw validation_error(std::string(name) +
                                   ": non-positive eigenvalue, parabolic system is ill-posed");
    }
};

struct SorptionParams {
    DiffusionMatrix diffusion_be; // (B, E) pair: d11=D_BB, d12=D_BE, d21=D_EB, d22=D_EE
    DiffusionMatrix diffusion_ae; // (A, E) pair: d11=D_AA, d12=D_AE, d21=D_EA, d22=D_EE
    double alpha = 0.0;       // gas-phase mass transfer coefficient [m/s]
    double c_a_inf = 0.0;     // bulk gas concentration of A [mol/m^3]
    double c_b_inf = 0.0;     // bulk liquid concentration of B [mol/m^3]
    double henry = 0.0;       // Henry's constant [Pa m^3/mol]
    double p_a = 0.0;         // partial pressure of A [Pa]
    double layer_depth = 0.0; // L, large but finite numerical domain [m]

    void validate() const
    {
        diffusion_be.validate("diffusion (B,E)");
        diffusion_ae.validate("diffusion (A,E)");
        if (std::abs(diffusion_be.d22 - diffusion_ae.d22) >
            1e-9 * std::max(diffusion_be.d22, diffusion_ae.d22))
            throw validation_error("SorptionParams: D_EE must agree between the two zone blocks");
        if (!(alpha > 0.0)) throw validation_error("SorptionParams: alpha must be > 0");
        if (!(c_a_inf > 0.0) || !(c_b_inf > 0.0))
            throw validation_error("SorptionParams: bulk concentrations must be > 0");
        if (!(henry > 0.0) || !(p_a > 0.0))
            throw validation_error("SorptionParams: Henry constant and p_A must be > 0");
        if (!(layer_depth > 0.0)) throw validation_error("SorptionParams: layer depth must be > 0");
    }
};

/// Coefficients of the Laplace-space solution of the surface-reaction phase.
/// S_i are the inverse eigenvalues of the (B,E) diffusion matrix, lambda_i
/// the E/B component ratios of its eigenvectors, and R_i, T_i the
/// boundary-condition combinations that close the transformed system.
/// amp_b/amp_e are the resulting per-mode amplitudes of the concentration
/// deviations (B and E respectively) divided by alpha*C_Ainf; everything the
/// surface-phase operations need reduces to them.
struct LaplaceCoefficients {
    double s1 = 0.0, s2 = 0.0;          // [s/m^2]
    double lambda1 = 0.0, lambda2 = 0.0; // [-]; lambda2 = +inf in the diagonal limit
    double r1 = 0.0, r2 = 0.0;          // [-]
    double t1 = 0.0, t2 = 0.0;          // [-]
    bool diagonal_limit = false;         // mode 2 eigenvector has no B component
    std::array<double, 2> amp_b{};       // beta_i, [sqrt(s)/m * ...] per unit alpha*C_Ainf
    std::array<double, 2> amp_e{};       // epsilon_i
    // The linear system that fixed (T1, T2), archived for auditing:
    // bc_matrix * (T1, T2)^T = bc_rhs.
    std::array<double, 4> bc_matrix{};   // row-major 2x2
    std::array<double, 2> bc_rhs{};
};

namespace detail {

/// Inverse transform of p^{-3/2} exp(-q sqrt(p)):
/// Psi(q, t) = 2 sqrt(t/pi) exp(-q^2/(4t)) - q erfc(q / (2 sqrt(t))).
inline double psi_kernel(double q, double t)
{
    const double root = std::sqrt(t);
    return 2.0 * std::sqrt(t / M_PI) * std::exp(-q * q / (4.0 * t)) -
           q * std::erfc(q / (2.0 * root));
}

} // namespace detail

/// Eigen-decomposition of the (B,E) diffusion matrix plus the boundary
/// algebra of the transformed flux conditions (B consumed at rate
/// alpha*C_Ainf, E produced at twice that rate).
inline LaplaceCoefficients derive_laplace_coefficients(const SorptionParams& params)
{
    params.validate();
    const DiffusionMatrix& d = params.diffusion_be;
    const double disc = d.discriminant();
    const double scale = std::max(std::abs(d.d11), std::abs(d.d22));
    if (disc < 0.0)
        throw validation_error("derive_laplace_coefficients: complex eigenvalues, ill-posed matrix");
    const double root = std::sqrt(disc);
    if (root <= 1e-12 * scale)
        throw validation_error("derive_laplace_coefficients: repeated eigenvalue (S1 = S2); "
                               "use the diagonal-limit branch with distinct main coefficients");
    const double mu1 = 0.5 * (d.trace() + root); // fast mode
    const double mu2 = 0.5 * (d.trace() - root);
    if (!(mu2 > 0.0))
        throw validation_error("derive_laplace_coefficients: non-positive eigenvalue, ill-posed matrix");

    LaplaceCoefficients c;
    c.s1 = 1.0 / mu1;
    c.s2 = 1.0 / mu2;

    // E/B component ratio of each eigenvector; the better-conditioned of the
    // two equivalent expressions is used. A vanishing B component (possible
    // only when D_BE = 0) sends lambda to infinity.
    auto eigen_ratio = [&](double mu) -> double {
        const double den1 = d.d12;        // lambda = (mu - d11)/d12
        const double den2 = mu - d.d22;   // lambda = d21/(mu - d22)
        if (std::abs(den1) >= std::abs(den2))
            return den1 == 0.0 ? std::numeric_limits<double>::infinity() : (mu - d.d11) / den1;
        return d.d21 / den2;
    };
    double l1 = eigen_ratio(mu1);
    double l2 = eigen_ratio(mu2);

    if (std::isinf(l1)) { // keep the infinite-ratio mode in slot 2
        std::swap(l1, l2);
        std::swap(c.s1, c.s2);
    }
    c.lambda1 = l1;
    c.lambda2 = l2;
    c.diagonal_limit = std::isinf(l2);

    const double rs1 = std::sqrt(c.s1), rs2 = std::sqrt(c.s2);
    if (c.diagonal_limit) {
        // limit lambda2 -> inf of the generic amplitudes
        c.amp_b = {-rs1, 0.0};
        c.amp_e = {-l1 * rs1, (2.0 + l1) * rs2};
        c.r1 = l1;
        c.r2 = c.lambda2;
        c.t1 = c.t2 = std::numeric_limits<double>::quiet_NaN();
    } else {
        const double dl = l1 - l2;
        c.amp_b = {(2.0 + l2) * rs1 / dl, -(2.0 + l1) * rs2 / dl};
        c.amp_e = {l1 * c.amp_b[0], l2 * c.amp_b[1]};
        c.r1 = l1;
        c.r2 = l2;
        // (T1, T2) from matching the printed image coefficients:
        //   T1 + 2 T2            = -(2 + lambda2) S1
        //   lambda2 T1 + 2 lambda1 T2 = -(2 + lambda1) S2
        c.bc_matrix = {1.0, 2.0, l2, 2.0 * l1};
        c.bc_rhs = {-(2.0 + l2) * c.s1, -(2.0 + l1) * c.s2};
        const double det = 2.0 * l1 - 2.0 * l2;
        c.t1 = (c.bc_rhs[0] * 2.0 * l1 - 2.0 * c.bc_rhs[1]) / det;
        c.t2 = (c.bc_rhs[1] - l2 * c.bc_rhs[0]) / det;
    }
    return c;
}

/// Surface-phase breakthrough time: the moment the surface concentration of
/// B reaches zero, t* = pi C_Binf^2 / (4 alpha^2 C_Ainf^2 (sum beta_i)^2).
inline double compute_tstar(const SorptionParams& params, const LaplaceCoefficients& c)
{
    const double sum_b = c.amp_b[0] + c.amp_b[1];
    if (!(sum_b < -1e-300))
        throw validation_error("compute_tstar: degenerate parameters, surface B never depletes");
    const double ratio = params.c_b_inf / (2.0 * params.alpha * params.c_a_inf * (-sum_b));
    return M_PI * ratio * ratio;
}

/// Concentration profiles of B and E for 0 < t <= t*.
inline std::pair<double, double> pre_tstar_profiles(const SorptionParams& params,
                                                    const LaplaceCoefficients& c,
                                                    double x, double t)
{
    if (!(t > 0.0)) throw domain_error("pre_tstar_profiles: t must be > 0");
    if (x < 0.0) throw domain_error("pre_tstar_profiles: x must be >= 0");
    const double t_star = compute_tstar(params, c);
    if (t > t_star * (1.0 + 1e-12))
        throw domain_error("pre_tstar_profiles: t > t*, the reaction plane has detached; "
                           "use solve_moving_plane");
    const double m = params.alpha * params.c_a_inf;
    const double psi1 = detail::psi_kernel(x * std::sqrt(c.s1), t);
    const double psi2 = detail::psi_kernel(x * std::sqrt(c.s2), t);
    const double cb = params.c_b_inf + m * (c.amp_b[0] * psi1 + c.amp_b[1] * psi2);
    const double ce = m * (c.amp_e[0] * psi1 + c.amp_e[1] * psi2);
    return {cb, ce};
}

/// Surface values (x = 0) for 0 < t <= t*: both evolve as sqrt(t).
inline std::pair<double, double> surface_concentrations(const SorptionParams& params,
                                                        const LaplaceCoefficients& c, double t)
{
    if (!(t > 0.0)) throw domain_error("surface_concentrations: t must be > 0");
    const double t_star = compute_tstar(params, c);
    if (t > t_star * (1.0 + 1e-12))
        throw domain_error("surface_concentrations: t > t*, the reaction plane has detached; "
                           "use solve_moving_plane");
    const double m = 2.0 * params.alpha * params.c_a_inf * std::sqrt(t / M_PI);
    return {params.c_b_inf + m * (c.amp_b[0] + c.amp_b[1]),
            m * (c.amp_e[0] + c.amp_e[1])};
}

/// Surface concentration of the product at breakthrough — its maximum:
/// C_ES(t*) = -C_Binf (sum eps_i) / (sum beta_i). Independent of alpha and
/// C_Ainf; in the fully decoupled limit it reduces to
/// 2 C_Binf sqrt(D_BB/D_EE).
inline double max_product_surface_conc(const SorptionParams& params,
                                       const LaplaceCoefficients& c)
{
    const double sum_b = c.amp_b[0] + c.amp_b[1];
    if (!(sum_b < -1e-300))
        throw validation_error("max_product_surface_conc: degenerate parameters");
    return -params.c_b_inf * (c.amp_e[0] + c.amp_e[1]) / sum_b;
}

} // namespace casim::sorption
