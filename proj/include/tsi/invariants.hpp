#pragma once

#include <complex>
#include <vector>

#include "tsi/fields.hpp"

namespace tsi {

using cplx = std::complex<double>;

/* Moments M_n(t) = integral_0^1 s^n exp(i s t) ds for n = 0, 1, 2.
 * M0 is the segment-average factor ("phi1"), M0(0) = 1; M1, M2 feed the
 * first and second derivatives of the transport phase.  Power series below
 * |t| = 1/2, closed recurrences above: no cancellation regime anywhere. */
cplx moment0(double t);
cplx moment1(double t);
cplx moment2(double t);

/* Quadrature resolutions shared by the invariant routes.  Defaults follow
 * the project conventions; forward and inverse passes must use the same
 * values so quadrature bias cancels in the subtraction. */
struct quad_config {
    int y_grid = 1024;        // 1-D periodic quadratures / inverse map grid
    int cell_grid = 256;      // 2-D cell quadrature (per side)
    int line_intervals = 64;  // trapezoid intervals per unit step along d
    int bpart_s = 256;        // amplitude-part reduction: points along delta.x
    int bpart_sigma = 32;     // amplitude-part reduction: transverse average
};

/* Line integral of A from y to x (the phase of the parallel transport factor
 * exp(i phi)); evaluated analytically per Fourier mode. */
double transport_phase(const magnetic_potential& a, const vec2& x, const vec2& y);

/* Subprincipal amplitude b(x, y) = sum_j [w_j^2 - i d_j w_j] with
 * w_j = d_{x_j} phi - A_j(x); independent of the constant part a0. */
cplx amplitude_term(const magnetic_potential& a, const vec2& x, const vec2& y);

/* Monotone change of variables y(s) = s + A1_delta(s) on the circle, with
 * y' = 1 + B_delta/b0 > 0, plus its Newton-inverted sampling s(y) on a
 * uniform y-grid.  s(y+1) = s(y) + 1 and s(-y) = -s(y). */
struct change_of_variables {
    directional_data dd;
    int grid = 1024;
    std::vector<double> s_grid;  // s(y_m), y_m = -1/2 + m/grid

    double y_of_s(double s) const { return s + dd.a1_delta(s); }
    double yprime_of_s(double s) const { return 1.0 + dd.b_delta(s) / dd.b0; }
    double s_of_y(double y) const;       // fresh bracketed-Newton solve
    double sprime_at(int m) const {      // s'(y_m) from the sampled inverse
        return 1.0 / yprime_of_s(s_grid[std::size_t(m)]);
    }
    double remainder_at(int m) const {   // e(y_m) = s(y_m) - y_m, periodic odd
        return s_grid[std::size_t(m)] - (-0.5 + double(m) / grid);
    }
};

change_of_variables build_change_of_variables(const directional_data& dd,
                                              int grid = 1024);

/* Directional (fast) routes.  a0_dot_d0 is the pairing of the constant part
 * of the potential with the primitive vector; c0 the cell area. */
double leading_directional(const change_of_variables& cov, int k,
                           double a0_dot_d0, double c0);

double potential_directional(const change_of_variables& cov,
                             const directional_data& v_ray, int k,
                             double a0_dot_d0, double c0);

/* Amplitude contributions for all orders 1..kmax at once (the transverse
 * average is shared across orders).  Returns the +-summed values. */
std::vector<double> amplitude_directional(const magnetic_potential& a,
                                          const change_of_variables& cov,
                                          const dual_pair& dp, double a0_dot_d0,
                                          double c0, int kmax,
                                          const quad_config& cfg = {});

/* Raw routes: direct 2-D cell quadrature of the defining oscillatory
 * integrals, inner line integrals analytic per mode.  d = m e1 + n e2. */
cplx leading_raw(const magnetic_potential& a, int m, int n, int cell_grid = 256);

cplx subleading_raw(const magnetic_potential& a, const scalar_field& v, int m,
                    int n, int cell_grid = 256, int line_intervals = 64);

/* Wave-invariant table over a direction set: for each primitive direction and
 * order k, the +-summed leading and subleading coefficients. */
struct invariant_entry {
    double leading = 0.0;     // I(d) + I(-d)
    double subleading = 0.0;  // J(d) + J(-d)
    bool flagged = false;     // |cos(k a0.d0)| below the conditioning floor
};

struct invariant_table {
    lattice lat;
    int kmax = 0;
    double c0 = 0.0;  // fundamental cell area (det)
    std::map<ipair, std::vector<invariant_entry>> entries;  // dir -> k=1..kmax
};

inline int default_kmax(int cutoff) { return std::max(16, 4 * cutoff); }

invariant_table build_invariant_table(const scalar_field& b, const scalar_field& v,
                                      const vec2& a0,
                                      const std::vector<ipair>& directions,
                                      int kmax, const quad_config& cfg = {},
                                      double cosine_floor = 1e-3);

/* Compare a deterministic sample of table entries against the raw route;
 * returns the largest absolute discrepancy (scale: c0). */
double spot_check_table(const invariant_table& table, const scalar_field& b,
                        const scalar_field& v, const vec2& a0, int samples,
                        int max_order = 4, const quad_config& cfg = {});

}  // namespace tsi
