#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "tsi/errors.hpp"

namespace tsi {

/* Plane vector with the small amount of algebra the lattice work needs.
 * perp() is the fixed 90-degree rotation v -> (-v2, v1) used throughout. */
struct vec2 {
    double x = 0.0;
    double y = 0.0;

    vec2() = default;
    vec2(double x_, double y_) : x(x_), y(y_) {}

    vec2 operator+(const vec2& o) const { return {x + o.x, y + o.y}; }
    vec2 operator-(const vec2& o) const { return {x - o.x, y - o.y}; }
    vec2 operator-() const { return {-x, -y}; }
    vec2 operator*(double c) const { return {c * x, c * y}; }
    vec2 perp() const { return {-y, x}; }
    double dot(const vec2& o) const { return x * o.x + y * o.y; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
};

inline vec2 operator*(double c, const vec2& v) { return v * c; }

/* Integer pair used for Fourier indices and for lattice coordinates. */
struct ipair {
    int p = 0;
    int q = 0;
    friend auto operator<=>(const ipair&, const ipair&) = default;
};

/* A rank-2 lattice L = Z e1 + Z e2 with det[e1;e2] > 0, together with the
 * dual basis (e1* . ej = delta_1j etc.).  The dual basis is the closed-form
 * 2x2 inverse: e1* = -e2.perp()/det, e2* = e1.perp()/det. */
struct lattice {
    vec2 e1, e2;    // basis of L
    vec2 e1s, e2s;  // dual basis of L*
    double det = 0.0;

    // Point of L with integer coordinates (m, n).
    vec2 point(int m, int n) const { return e1 * double(m) + e2 * double(n); }
    // Point of L* with integer coordinates (p, q).
    vec2 dual_point(int p, int q) const { return e1s * double(p) + e2s * double(q); }
};

lattice make_lattice(const vec2& e1, const vec2& e2);

/* Primitive decomposition d = k (m0 e1 + n0 e2), k >= 1, gcd(|m0|,|n0|) = 1,
 * with the canonical sign: first nonzero of (m0, n0) positive.  `flipped`
 * records whether the input pointed along -d0.  delta is the primitive dual
 * vector -n0 e1* + m0 e2* orthogonal to d. */
struct primitive_direction {
    int m0 = 0, n0 = 0;
    std::int64_t k = 0;
    bool flipped = false;
    vec2 d0;     // m0 e1 + n0 e2
    vec2 delta;  // -n0 e1* + m0 e2*
    ipair delta_index() const { return {-n0, m0}; }
};

primitive_direction primitive_decompose(const lattice& lat, int m, int n);

/* Completion of delta to a basis (delta, delta') of L* and the dual basis
 * (gamma, gamma') of L, so that gamma.delta = 1, gamma.delta' = 0, etc.
 * Integer coordinates are carried along for exactness checks. */
struct dual_pair {
    vec2 delta, delta_prime;
    vec2 gamma, gamma_prime;
    ipair delta_prime_index;   // coordinates of delta' in (e1*, e2*)
    ipair gamma_index;         // coordinates of gamma in (e1, e2)
    ipair gamma_prime_index;
};

dual_pair make_dual_pair(const lattice& lat, const primitive_direction& dir);

/* All nonzero lattice points with |point| <= radius, as integer coordinates.
 * Deterministic order (lexicographic in (m, n)). */
std::vector<ipair> enumerate_lattice_points(const lattice& lat, double radius);

/* Pairs (d, d') with equal length, d' != +-d, up to radius; both members are
 * canonicalized (first nonzero coordinate positive) and each unordered pair
 * is reported once.  Empty result means the length condition holds. */
struct equal_length_pair {
    ipair a, b;
    double length = 0.0;
};

std::vector<equal_length_pair> validate_length_condition(const lattice& lat,
                                                         double radius,
                                                         double tol_scale = 1e-9);

/* Canonical coprime directions (m0, n0) with |m0| <= cutoff and |n0| <= cutoff:
 * exactly the set whose rays p*(-n0, m0) cover every nonzero dual index with
 * max(|p|,|q|) <= cutoff.  Sorted lexicographically. */
std::vector<ipair> directions_for_cutoff(int cutoff);

/* Largest |p| such that p * delta_index stays inside the cutoff box. */
int ray_mode_limit(const primitive_direction& dir, int cutoff);

std::int64_t gcd64(std::int64_t a, std::int64_t b);

}  // namespace tsi
