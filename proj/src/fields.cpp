#include "tsi/fields.hpp"

#include <cmath>

namespace tsi {

double scalar_field::eval(const vec2& x) const {
    // Real even field: the sine parts cancel pairwise, so summing cosines
    // over all stored indices gives the exact value.
    double v = 0.0;
    for (const auto& [idx, c] : coeffs) {
        const vec2 beta = lat.dual_point(idx.p, idx.q);
        v += c * std::cos(two_pi * beta.dot(x));
    }
    return v;
}

scalar_field make_field(const lattice& lat, const std::map<ipair, double>& coeffs,
                        bool normalize_flux) {
    scalar_field f;
    f.lat = lat;
    f.coeffs = coeffs;
    for (const auto& [idx, c] : coeffs) {
        auto it = coeffs.find(ipair{-idx.p, -idx.q});
        require(it != coeffs.end() && it->second == c, errc::symmetry_violation,
                "field coefficient at (" + std::to_string(idx.p) + "," +
                    std::to_string(idx.q) + ") lacks an equal mirror entry");
        f.cutoff = std::max({f.cutoff, std::abs(idx.p), std::abs(idx.q)});
    }
    if (normalize_flux) f.coeffs[ipair{0, 0}] = two_pi / lat.det;
    return f;
}

vec2 magnetic_potential::eval_periodic(const vec2& x) const {
    std::complex<double> ax = 0.0, ay = 0.0;
    for (const auto& [idx, a] : modes) {
        const vec2 beta = lat.dual_point(idx.p, idx.q);
        const std::complex<double> ph =
            std::polar(1.0, two_pi * beta.dot(x));
        ax += a[0] * ph;
        ay += a[1] * ph;
    }
    return {ax.real(), ay.real()};
}

vec2 magnetic_potential::eval(const vec2& x) const {
    const vec2 a1 = eval_periodic(x);
    return {0.5 * b0 * (-x.y) + a0.x + a1.x, 0.5 * b0 * x.x + a0.y + a1.y};
}

std::complex<double> magnetic_potential::curl_coeff(int p, int q) const {
    if (p == 0 && q == 0) return b0;
    auto it = modes.find(ipair{p, q});
    if (it == modes.end()) return 0.0;
    const vec2 beta = lat.dual_point(p, q);
    const std::complex<double> i2pi(0.0, two_pi);
    return i2pi * (beta.x * it->second[1] - beta.y * it->second[0]);
}

magnetic_potential make_potential(const scalar_field& b, const vec2& a0) {
    require(b.mean() != 0.0, errc::zero_mean_field,
            "magnetic field must have nonzero mean (flux)");
    magnetic_potential a;
    a.lat = b.lat;
    a.b0 = b.mean();
    a.a0 = a0;
    for (const auto& [idx, c] : b.coeffs) {
        if (idx.p == 0 && idx.q == 0) continue;
        const vec2 beta = b.lat.dual_point(idx.p, idx.q);
        const vec2 bp = beta.perp();
        // a_beta = b_beta (2 pi i)^{-1} |beta|^{-2} beta.perp()
        const std::complex<double> scale =
            c / (std::complex<double>(0.0, two_pi) * beta.norm2());
        a.modes[idx] = {scale * bp.x, scale * bp.y};
    }
    return a;
}

magnetic_potential shifted_by_dual(const magnetic_potential& a, ipair delta) {
    magnetic_potential out = a;
    const vec2 d = a.lat.dual_point(delta.p, delta.q);
    out.a0 = out.a0 + two_pi * d;
    return out;
}

magnetic_potential with_gradient(const magnetic_potential& a,
                                 const std::map<ipair, std::complex<double>>& phi) {
    magnetic_potential out = a;
    for (const auto& [idx, c] : phi) {
        auto it = phi.find(ipair{-idx.p, -idx.q});
        require(it != phi.end() && std::abs(it->second - std::conj(c)) == 0.0,
                errc::symmetry_violation,
                "gauge function must be real (conjugate-even coefficients)");
        if (idx.p == 0 && idx.q == 0) continue;
        const vec2 beta = a.lat.dual_point(idx.p, idx.q);
        const std::complex<double> i2pi(0.0, two_pi);
        auto& mode = out.modes[idx];  // zero-initialized if absent
        mode[0] += i2pi * beta.x * c;
        mode[1] += i2pi * beta.y * c;
    }
    return out;
}

double directional_data::b_delta(double s) const {
    double v = 0.0;
    for (const auto& [p, c] : ray) v += 2.0 * c * std::cos(two_pi * p * s);
    return v;
}

double directional_data::a1_delta(double s) const {
    // Antiderivative normalized by b0: d/ds A1_delta = B_delta / b0.
    double v = 0.0;
    for (const auto& [p, c] : ray)
        v += c / (M_PI * p * b0) * std::sin(two_pi * p * s);
    return v;
}

double directional_data::max_abs_b_delta() const {
    double v = 0.0;
    for (const auto& [p, c] : ray) v += 2.0 * std::abs(c);
    return v;
}

directional_data directional(const scalar_field& b, const primitive_direction& dir) {
    directional_data dd;
    dd.dir = dir;
    dd.b0 = b.mean();
    const ipair di = dir.delta_index();  // (-n0, m0)
    for (const auto& [idx, c] : b.coeffs) {
        if (idx.p == 0 && idx.q == 0) continue;
        // Index lies on the ray iff it is an integer multiple of delta_index.
        const std::int64_t cross =
            std::int64_t(idx.p) * di.q - std::int64_t(idx.q) * di.p;
        if (cross != 0) continue;
        const int t = (di.p != 0) ? idx.p / di.p : idx.q / di.q;
        if (t > 0) {
            // Evenness of the source field guarantees the mirror coefficient.
            dd.ray[t] = c;
        }
    }
    return dd;
}

field_condition_report check_field_condition(const scalar_field& b, int grid) {
    require(grid >= 8, errc::invalid_argument, "field-condition grid too small");
    field_condition_report rep;
    rep.b0 = b.mean();
    double maxdev = 0.0;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            const vec2 x = b.lat.e1 * (double(i) / grid - 0.5) +
                           b.lat.e2 * (double(j) / grid - 0.5);
            maxdev = std::max(maxdev, std::abs(b.eval(x) - rep.b0));
        }
    rep.max_deviation = maxdev;
    rep.margin = std::abs(rep.b0) - maxdev;
    rep.ok = rep.margin > 0.0;
    return rep;
}

std::vector<cosine_violation> check_cosine_condition(const vec2& a0, const lattice& lat,
                                                     double radius, double floor) {
    std::vector<cosine_violation> out;
    for (const auto& idx : enumerate_lattice_points(lat, radius)) {
        if (idx.p < 0 || (idx.p == 0 && idx.q < 0)) continue;  // one per +-pair
        const double c = std::cos(a0.dot(lat.point(idx.p, idx.q)));
        if (std::abs(c) < floor) out.push_back({idx, c});
    }
    return out;
}

}  // namespace tsi
