#pragma once

#include "tsi/invariants.hpp"

namespace tsi {

/* Known values of cos(k a0.d0) per canonical primitive direction, the extra
 * datum (beyond the invariant table) that pins the field reconstruction. */
struct cosine_data {
    std::map<ipair, std::vector<double>> values;  // dir -> k = 1..kmax
    double floor = 1e-3;

    double value(ipair dir, int k) const;
    bool has(ipair dir, int k) const;
};

cosine_data cosines_from_a0(const vec2& a0, const lattice& lat,
                            const std::vector<ipair>& directions, int kmax,
                            double floor = 1e-3);

/* Max deviation from the Chebyshev consistency relation
 * value(k) = T_k(value(1)); values derived from a genuine angle satisfy it
 * to rounding. */
double cosine_consistency(const cosine_data& cd);

/* A constant vector a0 whose cosines reproduce the given data on the
 * directions (1,0), (0,1), (1,1) at k=1 (any representative of the extended
 * class works downstream). */
vec2 realize_a0(const cosine_data& cd, const lattice& lat);

/* Density s'(y) of the inverse change of variables, recovered from leading
 * invariants: chat_k = I_sum(k) / (2 c0 cos(k a0.d0)), and
 * s'(y) = 1 + sum 2 chat_k cos(2 pi k y) with the constant pinned to 1 by
 * periodicity (s(y+1) = s(y)+1 forces unit mean). */
struct sprime_data {
    int grid = 0;
    std::vector<double> chat;    // k = 1..kmax
    std::vector<double> values;  // s'(y_m), y_m = -1/2 + m/grid
    double min_value = 0.0;
};

sprime_data recover_sprime(const std::vector<double>& leading,
                           const std::vector<double>& cosines, double c0,
                           double floor = 1e-3, int grid = 1024);

/* From s' back to the directional field: s(y) = y + sum (chat_k/(pi k))
 * sin(2 pi k y), Newton-inverted to y(s); A1_delta(s) = y(s) - s;
 * B_delta = b0 dA1_delta/ds; ray coefficients by cosine analysis on the
 * uniform s-grid. */
directional_data recover_directional_field(const sprime_data& sp, double b0,
                                           const primitive_direction& dir,
                                           int max_mode);

/* Merge per-direction ray coefficients into one field with the given mean;
 * every canonical direction required by the cutoff box must be present. */
scalar_field assemble_from_rays(const lattice& lat,
                                const std::map<ipair, directional_data>& rays,
                                int cutoff, double mean);

/* Electric potential from subleading invariants once the magnetic field is
 * known: what_k = (J_sum - amplitude part) / (2 c0 cos(k a0.d0));
 * W(y) = sum 2 what_k cos(2 pi k y) (zero constant: V has zero mean);
 * V_delta(s) = W(y(s)) y'(s) with the analytic forward map of the recovered
 * field; assembled over the same ray decomposition. */
scalar_field recover_potential(const invariant_table& table,
                               const cosine_data& cosines,
                               const scalar_field& recovered_b,
                               const vec2& a0_realization, int cutoff,
                               const quad_config& cfg = {});

/* Extended gauge class from invariants plus a known field: pick two table
 * directions forming a unimodular basis whose directional densities have a
 * usable first cosine coefficient a1 (the generic condition); then
 * cos(a0.d_j) = I_sum(d_j, 1)/(2 c0 a1_j) and products of
 * z_j = cos + i sin propagate the cosine to every lattice vector.
 *
 * The basis cosines leave the relative sign of the two sines open
 * (conjugating both z_j is the harmless a0 -> -a0 move; conjugating one
 * changes every mixed cosine), so the recovery resolves it from the data:
 * a third density-carrying direction when one exists, else high-order
 * subleading invariants on a mixed direction, which carry no potential
 * contribution above the support box and must match the amplitude-only
 * prediction.  When neither source separates the branches the class is
 * genuinely undetermined and the recovery fails with GenericityFailure. */
struct gauge_class_result {
    ipair d1, d2;                     // chosen basis directions
    double c1 = 0.0, c2 = 0.0;        // cos(a0.d1), cos(a0.d2)
    double s1 = 0.0, s2 = 0.0;        // matching sines; s1 >= 0, the sign
                                      // of s2 is the resolved orientation
    std::map<ipair, double> cosines;  // (m,n) -> cos(a0.(m e1 + n e2))
};

gauge_class_result recover_gauge_class(const invariant_table& table,
                                       const scalar_field& known_b,
                                       double radius, double a1_floor = 1e-6,
                                       double clamp_tol = 1e-6);

/* Cosine table cos(k a0.d0) for the given directions, derived from a
 * recovered gauge class (products of the basis cosines; exact Chebyshev
 * consistency by construction). */
cosine_data direction_cosines(const gauge_class_result& gc,
                              const std::vector<ipair>& directions, int kmax,
                              double floor = 1e-3);

/* Hypothesis bundle checked before any forward/inverse run: positive cell,
 * field condition |B - b0| < |b0|, no equal-length lattice vectors besides
 * mirrors, and (when a0 matters) cosines bounded away from zero. */
struct hypothesis_report {
    field_condition_report field;
    std::vector<equal_length_pair> length_violations;
    std::vector<cosine_violation> cosine_violations;
    bool ok() const {
        return field.ok && length_violations.empty() && cosine_violations.empty();
    }
};

/* The two geometric hypotheses live at different scales: equal-length
 * coincidences are a lattice property checked over a modest desk-scale
 * radius, while the cosine nonvanishing must hold out to the longest dual
 * vector the reconstruction divides by. */
hypothesis_report validate_problem(const scalar_field& b, const vec2& a0,
                                   double length_radius = 5.0,
                                   double cosine_radius = 6.0,
                                   double floor = 1e-3);

/* End-to-end round trip: forward invariants, then reconstruction against
 * either supplied cosines (field theorem) or cosines recovered from the
 * table and the true field (gauge-class theorem), with coefficient-space
 * error accounting against the ground truth. */
struct roundtrip_config {
    int cutoff = 2;
    int kmax = 0;  // 0: default_kmax(cutoff)
    quad_config quad;
    bool recover_class = false;  // derive cosines via recover_gauge_class
    double cosine_floor = 1e-3;
    double length_radius = 5.0;  // equal-length hypothesis check
    double cosine_radius = 6.0;  // cos(a0.d) nonvanishing check
    int spot_checks = 0;
};

struct direction_diagnostics {
    double min_cos = 1.0;     // worst conditioning |cos(k a0.d0)| over k
    double min_sprime = 0.0;  // recovered density floor
};

struct field_error {
    double rel_l2 = 0.0;  // coefficient-space relative l2
    double sup = 0.0;     // sup-norm of the difference on a sample grid
};

struct reconstruction_report {
    scalar_field recovered_b;
    scalar_field recovered_v;
    cosine_data cosines_used;
    std::map<ipair, direction_diagnostics> diagnostics;
    field_error b_error;
    field_error v_error;
    double spot_check_err = -1.0;  // largest raw-vs-fast discrepancy, if run
};

field_error compare_fields(const scalar_field& truth, const scalar_field& got,
                           int grid = 64);

reconstruction_report roundtrip(const scalar_field& b, const scalar_field& v,
                                const vec2& a0,
                                const roundtrip_config& cfg = {});

}  // namespace tsi
