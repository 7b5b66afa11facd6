#include "tsi/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

namespace tsi {

const char* errc_name(errc code) noexcept {
    switch (code) {
        case errc::invalid_argument: return "InvalidArgument";
        case errc::non_positive_determinant: return "NonPositiveDeterminant";
        case errc::zero_vector: return "ZeroVector";
        case errc::symmetry_violation: return "SymmetryViolation";
        case errc::zero_mean_field: return "ZeroMeanField";
        case errc::non_monotone: return "NonMonotone";
        case errc::non_positive: return "NonPositive";
        case errc::ill_conditioned: return "IllConditioned";
        case errc::incomplete_coverage: return "IncompleteCoverage";
        case errc::genericity_failure: return "GenericityFailure";
        case errc::clamp_violation: return "ClampViolation";
        case errc::flux_not_quantized: return "FluxNotQuantized";
        case errc::convergence_failure: return "ConvergenceFailure";
        case errc::nonzero_mean_potential: return "NonzeroMeanPotential";
        case errc::io_error: return "IoError";
        case errc::parse_error: return "ParseError";
    }
    return "UnknownError";
}

std::int64_t gcd64(std::int64_t a, std::int64_t b) {
    a = std::abs(a);
    b = std::abs(b);
    while (b != 0) {
        std::int64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

lattice make_lattice(const vec2& e1, const vec2& e2) {
    const double det = e1.x * e2.y - e1.y * e2.x;
    require(det > 0.0, errc::non_positive_determinant,
            "lattice basis must have positive determinant, got det = " +
                std::to_string(det));
    lattice lat;
    lat.e1 = e1;
    lat.e2 = e2;
    lat.det = det;
    lat.e1s = -(1.0 / det) * e2.perp();
    lat.e2s = (1.0 / det) * e1.perp();
    return lat;
}

primitive_direction primitive_decompose(const lattice& lat, int m, int n) {
    require(m != 0 || n != 0, errc::zero_vector,
            "cannot decompose the zero lattice vector");
    std::int64_t g = gcd64(m, n);
    int m0 = int(m / g), n0 = int(n / g);
    bool flipped = false;
    // Canonical sign: first nonzero coordinate positive.
    if (m0 < 0 || (m0 == 0 && n0 < 0)) {
        m0 = -m0;
        n0 = -n0;
        flipped = true;
    }
    primitive_direction dir;
    dir.m0 = m0;
    dir.n0 = n0;
    dir.k = g;
    dir.flipped = flipped;
    dir.d0 = lat.point(m0, n0);
    dir.delta = lat.dual_point(-n0, m0);
    return dir;
}

dual_pair make_dual_pair(const lattice& lat, const primitive_direction& dir) {
    // Extended Euclid: u*m0 + v*n0 = 1.  Then delta' = u e1* + v e2* makes
    // det[(-n0, m0); (u, v)] = -(m0 u + n0 v) = -1, a basis of L*.
    std::int64_t r0 = dir.m0, r1 = dir.n0;
    std::int64_t u0 = 1, u1 = 0, v0 = 0, v1 = 1;
    while (r1 != 0) {
        std::int64_t q = r0 / r1;
        std::tie(r0, r1) = std::pair{r1, r0 - q * r1};
        std::tie(u0, u1) = std::pair{u1, u0 - q * u1};
        std::tie(v0, v1) = std::pair{v1, v0 - q * v1};
    }
    // r0 = gcd = +-1 up to sign conventions; normalize to m0*u + n0*v = +1.
    std::int64_t u = u0, v = v0;
    if (r0 < 0) { u = -u; v = -v; }
    // The solution family is (u + t n0, v - t m0); pick minimal |u| + |v|.
    auto cost = [](std::int64_t a, std::int64_t b) { return std::abs(a) + std::abs(b); };
    bool improved = true;
    while (improved) {
        improved = false;
        for (int t : {1, -1}) {
            if (cost(u + t * dir.n0, v - t * dir.m0) < cost(u, v)) {
                u += t * dir.n0;
                v -= t * dir.m0;
                improved = true;
            }
        }
    }

    dual_pair dp;
    dp.delta = dir.delta;
    dp.delta_prime_index = {int(u), int(v)};
    dp.delta_prime = lat.dual_point(int(u), int(v));

    // (gamma, gamma') in L dual to (delta, delta'): with M = [[-n0, m0],[u, v]]
    // (rows = dual coordinates), gamma has e-coordinates M^{-1} (1,0)^T.
    const std::int64_t det = -std::int64_t(dir.n0) * v - std::int64_t(dir.m0) * u;  // = -1
    require(std::abs(det) == 1, errc::invalid_argument,
            "internal: dual completion not unimodular");
    // M^{-1} = (1/det) [[v, -m0], [-u, -n0]]
    const int g1 = int(v / det), g2 = int(-u / det);
    const int h1 = int(-dir.m0 / det), h2 = int(-dir.n0 / det);
    dp.gamma_index = {g1, g2};
    dp.gamma_prime_index = {h1, h2};
    dp.gamma = lat.point(g1, g2);
    dp.gamma_prime = lat.point(h1, h2);
    return dp;
}

std::vector<ipair> enumerate_lattice_points(const lattice& lat, double radius) {
    require(radius > 0.0, errc::invalid_argument, "enumeration radius must be positive");
    // |m e1 + n e2| >= sigma_min |(m,n)|, so the index box is radius/sigma_min.
    const double a = lat.e1.norm2(), b = lat.e1.dot(lat.e2), c = lat.e2.norm2();
    const double tr = a + c, disc = std::sqrt(std::max(0.0, (a - c) * (a - c) / 4 + b * b));
    const double smin2 = tr / 2 - disc;
    require(smin2 > 0.0, errc::invalid_argument, "degenerate lattice basis");
    const int bound = int(std::floor(radius / std::sqrt(smin2))) + 1;

    std::vector<ipair> out;
    for (int m = -bound; m <= bound; ++m)
        for (int n = -bound; n <= bound; ++n) {
            if (m == 0 && n == 0) continue;
            if (lat.point(m, n).norm() <= radius) out.push_back({m, n});
        }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {
ipair canonical_sign(ipair v) {
    if (v.p < 0 || (v.p == 0 && v.q < 0)) return {-v.p, -v.q};
    return v;
}
}  // namespace

std::vector<equal_length_pair> validate_length_condition(const lattice& lat,
                                                         double radius,
                                                         double tol_scale) {
    const double tol = tol_scale * radius;
    auto pts = enumerate_lattice_points(lat, radius);
    // Canonicalize signs and dedupe, then sort by length and scan neighbors.
    std::vector<ipair> reps;
    for (const auto& v : pts) reps.push_back(canonical_sign(v));
    std::sort(reps.begin(), reps.end());
    reps.erase(std::unique(reps.begin(), reps.end()), reps.end());

    struct entry {
        double len;
        ipair v;
    };
    std::vector<entry> es;
    es.reserve(reps.size());
    for (const auto& v : reps) es.push_back({lat.point(v.p, v.q).norm(), v});
    std::sort(es.begin(), es.end(), [](const entry& l, const entry& r) {
        return l.len < r.len || (l.len == r.len && l.v < r.v);
    });

    std::vector<equal_length_pair> bad;
    for (std::size_t i = 0; i < es.size(); ++i)
        for (std::size_t j = i + 1; j < es.size() && es[j].len - es[i].len <= tol; ++j)
            bad.push_back({es[i].v, es[j].v, es[i].len});
    return bad;
}

std::vector<ipair> directions_for_cutoff(int cutoff) {
    require(cutoff >= 1, errc::invalid_argument, "cutoff must be >= 1");
    std::vector<ipair> dirs;
    for (int m0 = 0; m0 <= cutoff; ++m0)
        for (int n0 = -cutoff; n0 <= cutoff; ++n0) {
            if (m0 == 0 && n0 <= 0) continue;   // canonical: first nonzero positive
            if (m0 == 0 && n0 != 1) continue;   // (0, n0) primitive only for n0 = 1
            if (gcd64(m0, n0) != 1) continue;
            dirs.push_back({m0, n0});
        }
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

int ray_mode_limit(const primitive_direction& dir, int cutoff) {
    const int w = std::max(std::abs(dir.m0), std::abs(dir.n0));
    return cutoff / w;
}

}  // namespace tsi
