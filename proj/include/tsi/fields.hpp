#pragma once

#include <complex>
#include <map>
#include <optional>
#include <vector>

#include "tsi/lattice.hpp"

namespace tsi {

inline constexpr double two_pi = 6.283185307179586476925286766559;

/* Real, even, periodic scalar field as Fourier coefficients over L*:
 * F(x) = sum c_{pq} exp(2 pi i (p e1* + q e2*).x), with c real and
 * c_{-p,-q} = c_{p,q}.  Coefficients are stored for all listed indices. */
struct scalar_field {
    lattice lat;
    std::map<ipair, double> coeffs;
    int cutoff = 0;  // max |index coordinate| present

    double coeff(int p, int q) const {
        auto it = coeffs.find(ipair{p, q});
        return it == coeffs.end() ? 0.0 : it->second;
    }
    double mean() const { return coeff(0, 0); }
    double eval(const vec2& x) const;
};

/* Validates realness conventions (evenness) and optionally pins the mean so
 * the flux over one cell is exactly 2 pi (one flux quantum). */
scalar_field make_field(const lattice& lat, const std::map<ipair, double>& coeffs,
                        bool normalize_flux = false);

/* Magnetic potential split as A = A0 + a0 + A1 with A0(x) = (b0/2) x.perp(),
 * a0 constant, and A1 periodic, divergence-free in the canonical gauge:
 *   a_beta = b_beta (2 pi i)^{-1} |beta|^{-2} beta.perp().
 * mode vectors are stored explicitly so gauge-shifted potentials (A1 plus a
 * gradient of a periodic function) can be represented too. */
struct magnetic_potential {
    lattice lat;
    double b0 = 0.0;
    vec2 a0;
    std::map<ipair, std::array<std::complex<double>, 2>> modes;  // a_beta

    vec2 eval(const vec2& x) const;          // full A(x), real
    vec2 eval_periodic(const vec2& x) const; // A1(x) only
    // Fourier coefficient of curl A at the given index (b0 at the origin).
    std::complex<double> curl_coeff(int p, int q) const;
};

magnetic_potential make_potential(const scalar_field& b, const vec2& a0);

/* a0 -> a0 + 2 pi (p e1* + q e2*): a gauge shift by exp(2 pi i delta.x). */
magnetic_potential shifted_by_dual(const magnetic_potential& a, ipair delta);

/* A -> A + grad(phi) for periodic phi(x) = sum phi_beta exp(2 pi i beta.x);
 * phi must satisfy phi_{-beta} = conj(phi_beta) so the gradient is real. */
magnetic_potential with_gradient(const magnetic_potential& a,
                                 const std::map<ipair, std::complex<double>>& phi);

/* Restriction of B - b0 to the ray orthogonal to a primitive direction:
 * B_delta(s) = sum_p b_{p delta} exp(2 pi i p s), stored via p >= 1 (even).
 * A1_delta is the mean-zero antiderivative scaled so A1_delta' = B_delta/b0. */
struct directional_data {
    primitive_direction dir;
    double b0 = 0.0;
    std::map<int, double> ray;  // p >= 1 coefficients b_{p delta}

    double b_delta(double s) const;
    double a1_delta(double s) const;
    double max_abs_b_delta() const;  // sup bound sum 2|b_p|
    bool empty() const { return ray.empty(); }
};

directional_data directional(const scalar_field& b, const primitive_direction& dir);

/* sup-norm margin of the condition |B(x) - b0| < |b0| on a sampling grid. */
struct field_condition_report {
    double b0 = 0.0;
    double max_deviation = 0.0;  // max |B - b0| over the grid
    double margin = 0.0;         // |b0| - max_deviation
    bool ok = false;
};

field_condition_report check_field_condition(const scalar_field& b, int grid = 256);

/* Lattice vectors with |cos(a0 . d)| below the floor, up to |d| <= radius. */
struct cosine_violation {
    ipair d;
    double value = 0.0;
};

std::vector<cosine_violation> check_cosine_condition(const vec2& a0, const lattice& lat,
                                                     double radius, double floor = 1e-3);

}  // namespace tsi
