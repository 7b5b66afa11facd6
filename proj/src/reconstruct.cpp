#include "tsi/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace tsi {

namespace {

std::string dir_name(ipair d) {
    std::ostringstream os;
    os << "(" << d.p << "," << d.q << ")";
    return os.str();
}

/* s'(y) and e(y) from the recovered cosine coefficients. */
double sprime_series(const std::vector<double>& chat, double y) {
    double v = 1.0;
    for (std::size_t k = 0; k < chat.size(); ++k)
        v += 2.0 * chat[k] * std::cos(two_pi * double(k + 1) * y);
    return v;
}

double remainder_series(const std::vector<double>& chat, double y) {
    double v = 0.0;
    for (std::size_t k = 0; k < chat.size(); ++k)
        v += chat[k] / (M_PI * double(k + 1)) * std::sin(two_pi * double(k + 1) * y);
    return v;
}

/* z^k on the unit circle; negative powers via conjugation. */
cplx zpow(cplx z, int k) {
    if (k < 0) {
        z = std::conj(z);
        k = -k;
    }
    cplx r = 1.0;
    for (int i = 0; i < k; ++i) r *= z;
    return r;
}

}  // namespace

double cosine_data::value(ipair dir, int k) const {
    auto it = values.find(dir);
    // A missing divisor is the same failure class as a vanishing one: the
    // invariant cannot be divided through for this direction and order.
    require(it != values.end() && k >= 1 && k <= int(it->second.size()),
            errc::ill_conditioned,
            "cosine data missing direction " + dir_name(dir) + " order " +
                std::to_string(k));
    return it->second[std::size_t(k - 1)];
}

bool cosine_data::has(ipair dir, int k) const {
    auto it = values.find(dir);
    return it != values.end() && k >= 1 && k <= int(it->second.size());
}

cosine_data cosines_from_a0(const vec2& a0, const lattice& lat,
                            const std::vector<ipair>& directions, int kmax,
                            double floor) {
    require(kmax >= 1, errc::invalid_argument, "kmax must be >= 1");
    cosine_data cd;
    cd.floor = floor;
    for (const auto& didx : directions) {
        const primitive_direction dir = primitive_decompose(lat, didx.p, didx.q);
        require(dir.k == 1 && !dir.flipped, errc::invalid_argument,
                "cosine directions must be canonical primitive vectors");
        const double a0d0 = a0.dot(dir.d0);
        auto& col = cd.values[didx];
        col.resize(std::size_t(kmax));
        for (int k = 1; k <= kmax; ++k)
            col[std::size_t(k - 1)] = std::cos(double(k) * a0d0);
    }
    return cd;
}

double cosine_consistency(const cosine_data& cd) {
    double worst = 0.0;
    for (const auto& [dir, col] : cd.values) {
        if (col.empty()) continue;
        const double c1 = col[0];
        double tprev = 1.0, tcur = c1;  // Chebyshev T_{k-1}, T_k
        for (std::size_t k = 2; k <= col.size(); ++k) {
            const double tnext = 2.0 * c1 * tcur - tprev;
            tprev = tcur;
            tcur = tnext;
            worst = std::max(worst, std::abs(col[k - 1] - tcur));
        }
    }
    return worst;
}

vec2 realize_a0(const cosine_data& cd, const lattice& lat) {
    const double c1 = cd.value({1, 0}, 1);
    const double c2 = cd.value({0, 1}, 1);
    const double c11 = cd.value({1, 1}, 1);
    require(std::abs(c1) <= 1.0 + 1e-9 && std::abs(c2) <= 1.0 + 1e-9,
            errc::invalid_argument, "cosine values outside [-1, 1]");
    const double p1 = std::acos(std::clamp(c1, -1.0, 1.0));
    const double p2 = std::acos(std::clamp(c2, -1.0, 1.0));
    // Any representative of the extended class serves; the (1,1) value fixes
    // the relative sign of the two principal angles.
    const double dplus = std::abs(std::cos(p1 + p2) - c11);
    const double dminus = std::abs(std::cos(p1 - p2) - c11);
    const double phi2 = (dplus <= dminus) ? p2 : -p2;
    return lat.e1s * p1 + lat.e2s * phi2;
}

sprime_data recover_sprime(const std::vector<double>& leading,
                           const std::vector<double>& cosines, double c0,
                           double floor, int grid) {
    require(!leading.empty() && leading.size() == cosines.size(),
            errc::invalid_argument, "leading invariants and cosines must align");
    require(c0 > 0.0, errc::invalid_argument, "cell area must be positive");
    require(grid >= 16, errc::invalid_argument, "density grid too small");
    sprime_data sp;
    sp.grid = grid;
    sp.chat.resize(leading.size());
    for (std::size_t k = 0; k < leading.size(); ++k) {
        require(std::abs(cosines[k]) >= floor, errc::ill_conditioned,
                "cosine factor " + std::to_string(cosines[k]) + " at order " +
                    std::to_string(k + 1) + " is below the floor " +
                    std::to_string(floor));
        sp.chat[k] = leading[k] / (2.0 * c0 * cosines[k]);
    }
    sp.values.resize(std::size_t(grid));
    double lowest = std::numeric_limits<double>::max();
    for (int m = 0; m < grid; ++m) {
        const double ym = -0.5 + double(m) / grid;
        sp.values[std::size_t(m)] = sprime_series(sp.chat, ym);
        lowest = std::min(lowest, sp.values[std::size_t(m)]);
    }
    sp.min_value = lowest;
    require(lowest > 0.0, errc::non_positive,
            "recovered density dips to " + std::to_string(lowest) +
                "; invariant data is inconsistent");
    return sp;
}

directional_data recover_directional_field(const sprime_data& sp, double b0,
                                           const primitive_direction& dir,
                                           int max_mode) {
    require(b0 != 0.0, errc::invalid_argument, "mean field must be nonzero");
    require(max_mode >= 1, errc::invalid_argument, "max_mode must be >= 1");
    const std::vector<double>& chat = sp.chat;
    // Positivity on a grid finer than the recovery grid: the series can dip
    // between the coarse samples when the data is corrupted.
    const int fine = 4 * std::max(sp.grid, 256);
    double lowest = std::numeric_limits<double>::max();
    for (int i = 0; i < fine; ++i)
        lowest = std::min(lowest, sprime_series(chat, double(i) / fine - 0.5));
    require(lowest > 0.0, errc::non_monotone,
            "density series is not positive between samples (min s' = " +
                std::to_string(lowest) + ")");

    double ebound = 1e-9;  // sup bound for |e|, brackets the inversion
    for (std::size_t k = 0; k < chat.size(); ++k)
        ebound += std::abs(chat[k]) / (M_PI * double(k + 1));

    const int n = sp.grid;
    std::vector<double> bvals(std::size_t(n), 0.0);
    double warm = -0.5;
    for (int m = 0; m < n; ++m) {
        const double sm = -0.5 + double(m) / n;
        // Solve y + e(y) = sm for y, Newton with a maintained bracket.
        double lo = sm - ebound, hi = sm + ebound;
        double y = std::clamp(warm, lo, hi);
        bool done = false;
        for (int iter = 0; iter < 120 && !done; ++iter) {
            const double f = y + remainder_series(chat, y) - sm;
            if (std::abs(f) < 1e-13) {
                done = true;
                break;
            }
            (f > 0.0 ? hi : lo) = y;
            double next = y - f / sprime_series(chat, y);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            y = next;
        }
        require(done, errc::convergence_failure,
                "directional inversion did not reach 1e-13 residual");
        warm = y + 1.0 / n;
        // B_delta(s) = b0 (y'(s) - 1) with y'(s) = 1/s'(y(s)).
        bvals[std::size_t(m)] = b0 * (1.0 / sprime_series(chat, y) - 1.0);
    }

    directional_data out;
    out.dir = dir;
    out.b0 = b0;
    for (int p = 1; p <= max_mode; ++p) {
        double acc = 0.0;
        for (int m = 0; m < n; ++m)
            acc += bvals[std::size_t(m)] * std::cos(two_pi * p * (-0.5 + double(m) / n));
        out.ray[p] = acc / n;
    }
    return out;
}

scalar_field assemble_from_rays(const lattice& lat,
                                const std::map<ipair, directional_data>& rays,
                                int cutoff, double mean) {
    require(cutoff >= 1, errc::invalid_argument, "cutoff must be >= 1");
    std::string missing;
    for (const auto& need : directions_for_cutoff(cutoff))
        if (rays.find(need) == rays.end()) missing += " " + dir_name(need);
    require(missing.empty(), errc::incomplete_coverage,
            "ray data missing for directions:" + missing);

    std::map<ipair, double> coeffs;
    coeffs[ipair{0, 0}] = mean;
    for (const auto& [didx, dd] : rays) {
        const ipair step = dd.dir.delta_index();
        for (const auto& [p, c] : dd.ray) {
            const ipair idx{p * step.p, p * step.q};
            if (std::max(std::abs(idx.p), std::abs(idx.q)) > cutoff) continue;
            // Canonical rays are disjoint, so no index can be claimed twice.
            require(coeffs.find(idx) == coeffs.end(), errc::invalid_argument,
                    "dual index " + dir_name(idx) + " claimed by two rays");
            coeffs[idx] = c;
            coeffs[ipair{-idx.p, -idx.q}] = c;
        }
    }
    return make_field(lat, coeffs);
}

scalar_field recover_potential(const invariant_table& table,
                               const cosine_data& cosines,
                               const scalar_field& recovered_b,
                               const vec2& a0_realization, int cutoff,
                               const quad_config& cfg) {
    require(table.c0 > 0.0, errc::invalid_argument, "table lacks a cell area");
    const lattice& lat = recovered_b.lat;
    // Quadrature-noise modes in the recovered field contribute to the
    // amplitude term at their own magnitude (orders below any potential
    // tolerance) yet each costs a full pass of the line-node quadrature, so
    // the subtraction field keeps only modes visible against the mean.
    scalar_field bsub = recovered_b;
    {
        const double thresh = 1e-10 * std::abs(recovered_b.mean());
        std::map<ipair, double> kept;
        for (const auto& [idx, c] : recovered_b.coeffs)
            if ((idx.p == 0 && idx.q == 0) || std::abs(c) >= thresh)
                kept[idx] = c;
        bsub = make_field(lat, kept);
    }
    const magnetic_potential pot = make_potential(bsub, a0_realization);
    std::map<ipair, directional_data> rays;
    for (const auto& [didx, col] : table.entries) {
        if (col.empty()) continue;
        const int kmax = int(col.size());
        const primitive_direction dir = primitive_decompose(lat, didx.p, didx.q);
        const directional_data dd = directional(bsub, dir);
        const change_of_variables cov = build_change_of_variables(dd, cfg.y_grid);
        const dual_pair dp = make_dual_pair(lat, dir);
        const double a0d0 = a0_realization.dot(dir.d0);
        // Subtract the amplitude contribution recomputed from the recovered
        // field with the same quadrature, so its bias cancels in the ratio.
        const std::vector<double> amp =
            amplitude_directional(pot, cov, dp, a0d0, table.c0, kmax, cfg);
        std::vector<double> what(std::size_t(kmax), 0.0);
        for (int k = 1; k <= kmax; ++k) {
            const double ck = cosines.value(didx, k);
            require(std::abs(ck) >= cosines.floor, errc::ill_conditioned,
                    "cosine factor at order " + std::to_string(k) +
                        " is below the floor");
            what[std::size_t(k - 1)] =
                (col[std::size_t(k - 1)].subleading - amp[std::size_t(k - 1)]) /
                (2.0 * table.c0 * ck);
        }
        // V_delta(s) = W(y(s)) y'(s) with the analytic forward map; the
        // constant of W is zero because V has zero cell average.
        const int n = cfg.y_grid;
        std::vector<double> vvals(std::size_t(n), 0.0);
        for (int m = 0; m < n; ++m) {
            const double s = -0.5 + double(m) / n;
            const double y = cov.y_of_s(s);
            double w = 0.0;
            for (int k = 1; k <= kmax; ++k)
                w += 2.0 * what[std::size_t(k - 1)] * std::cos(two_pi * k * y);
            vvals[std::size_t(m)] = w * cov.yprime_of_s(s);
        }
        directional_data vdd;
        vdd.dir = dir;
        vdd.b0 = 0.0;
        const int pmax = std::min(kmax, ray_mode_limit(dir, cutoff));
        for (int p = 1; p <= pmax; ++p) {
            double acc = 0.0;
            for (int m = 0; m < n; ++m)
                acc += vvals[std::size_t(m)] * std::cos(two_pi * p * (-0.5 + double(m) / n));
            vdd.ray[p] = acc / n;
        }
        rays[didx] = vdd;
    }
    return assemble_from_rays(lat, rays, cutoff, 0.0);
}

gauge_class_result recover_gauge_class(const invariant_table& table,
                                       const scalar_field& known_b,
                                       double radius, double a1_floor,
                                       double clamp_tol) {
    require(!table.entries.empty(), errc::invalid_argument,
            "invariant table is empty");
    require(table.c0 > 0.0, errc::invalid_argument, "table lacks a cell area");
    const lattice& lat = known_b.lat;

    struct candidate {
        ipair didx;
        primitive_direction dir;
        double a1 = 0.0;
    };
    std::vector<candidate> usable;
    for (const auto& [didx, col] : table.entries) {
        if (col.empty()) continue;
        const primitive_direction dir = primitive_decompose(lat, didx.p, didx.q);
        const directional_data dd = directional(known_b, dir);
        if (dd.empty()) continue;  // direction carries no field information
        const change_of_variables cov = build_change_of_variables(dd, 1024);
        double a1 = 0.0;
        for (int m = 0; m < cov.grid; ++m)
            a1 += cov.sprime_at(m) * std::cos(two_pi * (-0.5 + double(m) / cov.grid));
        a1 /= cov.grid;
        if (std::abs(a1) < a1_floor) continue;
        usable.push_back({didx, dir, a1});
    }

    const candidate* first = nullptr;
    const candidate* second = nullptr;
    for (std::size_t i = 0; i < usable.size() && !second; ++i)
        for (std::size_t j = i + 1; j < usable.size() && !second; ++j) {
            const int det = usable[i].dir.m0 * usable[j].dir.n0 -
                            usable[i].dir.n0 * usable[j].dir.m0;
            if (det == 1 || det == -1) {
                first = &usable[i];
                second = &usable[j];
            }
        }
    require(second != nullptr, errc::genericity_failure,
            "no unimodular direction pair with usable directional density "
            "(need two rays with a nonzero first cosine coefficient)");

    auto base_cosine = [&](const candidate& c) {
        const double raw =
            table.entries.at(c.didx)[0].leading / (2.0 * table.c0 * c.a1);
        require(std::abs(raw) <= 1.0 + clamp_tol, errc::clamp_violation,
                "recovered cosine " + std::to_string(raw) +
                    " lies outside [-1, 1] beyond tolerance");
        return std::clamp(raw, -1.0, 1.0);
    };

    gauge_class_result gc;
    gc.d1 = first->didx;
    gc.d2 = second->didx;
    gc.c1 = base_cosine(*first);
    gc.c2 = base_cosine(*second);
    gc.s1 = std::sqrt(std::max(0.0, 1.0 - gc.c1 * gc.c1));
    gc.s2 = std::sqrt(std::max(0.0, 1.0 - gc.c2 * gc.c2));

    const int det =
        first->dir.m0 * second->dir.n0 - first->dir.n0 * second->dir.m0;
    // Integer coordinates of a lattice index in the chosen unimodular basis.
    const auto coords = [&](const ipair& idx) {
        return std::pair<int, int>{
            (idx.p * second->dir.n0 - idx.q * second->dir.m0) / det,
            (idx.q * first->dir.m0 - idx.p * first->dir.n0) / det};
    };

    /* The two base cosines leave the relative sign of the sines open:
     * conjugating both z_j is the a0 -> -a0 move and changes nothing, but
     * conjugating only one changes every cosine that mixes the basis
     * directions.  Resolve the sign from the data before propagating. */
    /* A cosine recovered within quadrature error eps of +-1 carries a sine
     * of order sqrt(eps), so the floor must sit well above that scale; below
     * it the two branches agree to O(radius^2 * floor^2) and the choice is
     * immaterial. */
    constexpr double sin_floor = 1e-4;
    constexpr double separation = 1e-6;  // branches closer than this can't vote
    double sign = 1.0;
    bool resolved = gc.s1 <= sin_floor || gc.s2 <= sin_floor;

    // First source: a third density-carrying direction that depends on both
    // basis angles gives its own cosine directly; only one branch matches.
    for (const candidate& c : usable) {
        if (resolved) break;
        if (&c == first || &c == second) continue;
        const auto [alpha, beta] = coords(ipair{c.dir.m0, c.dir.n0});
        if (alpha == 0 || beta == 0) continue;
        const cplx za = zpow(cplx(gc.c1, gc.s1), alpha);
        const double plus = (za * zpow(cplx(gc.c2, gc.s2), beta)).real();
        const double minus = (za * zpow(cplx(gc.c2, -gc.s2), beta)).real();
        if (std::abs(plus - minus) <= separation) continue;
        const double direct = base_cosine(c);
        sign = std::abs(plus - direct) <= std::abs(minus - direct) ? 1.0 : -1.0;
        require(std::min(std::abs(plus - direct), std::abs(minus - direct)) <
                    1e-2,
                errc::ill_conditioned,
                "class cosines are mutually inconsistent on direction " +
                    dir_name(c.didx));
        resolved = true;
    }

    if (!resolved) {
        /* Second source: subleading invariants on a mixed direction at
         * orders above the ray mode limit of the support box.  There the
         * potential contributes nothing, so J_k = 2 c0 cos(k theta) K_k
         * with K_k computable from the known field alone (the amplitude is
         * independent of the constant part), and only the true branch
         * matches.  Assumes the potential shares the field's support box --
         * the standing contract of the whole reconstruction. */
        int box = 1;
        for (const auto& [didx, col] : table.entries)
            box = std::max({box, std::abs(didx.p), std::abs(didx.q)});
        for (const auto& [pq, c] : known_b.coeffs)
            box = std::max({box, std::abs(pq.p), std::abs(pq.q)});
        const quad_config light{512, 128, 32, 128, 16};
        const magnetic_potential probe = make_potential(known_b, vec2{0, 0});
        const double th1 = std::atan2(gc.s1, gc.c1);
        const double th2 = std::atan2(gc.s2, gc.c2);
        for (const auto& [didx, col] : table.entries) {
            if (resolved) break;
            const primitive_direction dir =
                primitive_decompose(lat, didx.p, didx.q);
            const auto [alpha, beta] = coords(ipair{dir.m0, dir.n0});
            if (alpha == 0 || beta == 0) continue;
            const int pmax = ray_mode_limit(dir, box);
            if (int(col.size()) <= pmax) continue;  // no potential-free orders
            const change_of_variables cov = build_change_of_variables(
                directional(known_b, dir), light.y_grid);
            // Passing angle 0 leaves the bare 2 c0 K_k per order.
            const std::vector<double> amp =
                amplitude_directional(probe, cov, make_dual_pair(lat, dir),
                                      0.0, table.c0, int(col.size()), light);
            double score_plus = 0.0, score_minus = 0.0, scale = 0.0;
            for (int k = pmax + 1; k <= int(col.size()); ++k) {
                const double measured = col[std::size_t(k - 1)].subleading;
                const double base = amp[std::size_t(k - 1)];
                score_plus +=
                    std::abs(measured -
                             std::cos(k * (alpha * th1 + beta * th2)) * base);
                score_minus +=
                    std::abs(measured -
                             std::cos(k * (alpha * th1 - beta * th2)) * base);
                scale += std::abs(base);
            }
            if (std::abs(score_plus - score_minus) <=
                1e-3 * std::max(scale, 1e-12))
                continue;  // branches not separated on this direction
            sign = score_plus <= score_minus ? 1.0 : -1.0;
            resolved = true;
        }
    }
    require(resolved, errc::genericity_failure,
            "relative orientation of the basis cosines is undetermined: no "
            "third direction separates the two candidate classes");
    gc.s2 *= sign;

    const cplx z1(gc.c1, gc.s1);
    const cplx z2(gc.c2, gc.s2);
    for (const auto& idx : enumerate_lattice_points(lat, radius)) {
        const auto [alpha, beta] = coords(idx);
        gc.cosines[idx] = (zpow(z1, alpha) * zpow(z2, beta)).real();
    }
    return gc;
}

cosine_data direction_cosines(const gauge_class_result& gc,
                              const std::vector<ipair>& directions, int kmax,
                              double floor) {
    require(kmax >= 1, errc::invalid_argument, "kmax must be >= 1");
    const int det = gc.d1.p * gc.d2.q - gc.d1.q * gc.d2.p;
    require(det == 1 || det == -1, errc::invalid_argument,
            "gauge-class basis is not unimodular");
    const cplx z1(gc.c1, gc.s1);  // sines carry the resolved orientation
    const cplx z2(gc.c2, gc.s2);
    cosine_data cd;
    cd.floor = floor;
    for (const auto& dir : directions) {
        const int alpha = (dir.p * gc.d2.q - dir.q * gc.d2.p) / det;
        const int beta = (dir.q * gc.d1.p - dir.p * gc.d1.q) / det;
        const cplx base = zpow(z1, alpha) * zpow(z2, beta);
        auto& col = cd.values[dir];
        col.resize(std::size_t(kmax));
        cplx z = 1.0;
        for (int k = 1; k <= kmax; ++k) {
            z *= base;
            col[std::size_t(k - 1)] = z.real();
        }
    }
    return cd;
}

hypothesis_report validate_problem(const scalar_field& b, const vec2& a0,
                                   double length_radius, double cosine_radius,
                                   double floor) {
    hypothesis_report rep;
    rep.field = check_field_condition(b);
    rep.length_violations = validate_length_condition(b.lat, length_radius);
    rep.cosine_violations = check_cosine_condition(a0, b.lat, cosine_radius, floor);
    return rep;
}

field_error compare_fields(const scalar_field& truth, const scalar_field& got,
                           int grid) {
    field_error err;
    double num = 0.0, den = 0.0;
    for (const auto& [idx, c] : truth.coeffs) {
        const double d = c - got.coeff(idx.p, idx.q);
        num += d * d;
        den += c * c;
    }
    for (const auto& [idx, c] : got.coeffs)
        if (truth.coeffs.find(idx) == truth.coeffs.end()) num += c * c;
    err.rel_l2 = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    double sup = 0.0;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            const vec2 x = truth.lat.e1 * (double(i) / grid) +
                           truth.lat.e2 * (double(j) / grid);
            sup = std::max(sup, std::abs(truth.eval(x) - got.eval(x)));
        }
    err.sup = sup;
    return err;
}

reconstruction_report roundtrip(const scalar_field& b, const scalar_field& v,
                                const vec2& a0, const roundtrip_config& cfg) {
    const lattice& lat = b.lat;
    const int kmax = cfg.kmax > 0 ? cfg.kmax : default_kmax(cfg.cutoff);

    // Reconstruction is only well-posed under these; refuse to run outside.
    const hypothesis_report hyp = validate_problem(
        b, a0, cfg.length_radius, cfg.cosine_radius, cfg.cosine_floor);
    require(hyp.field.ok, errc::invalid_argument,
            "field condition |B - b0| < |b0| fails (margin " +
                std::to_string(hyp.field.margin) + ")");
    require(hyp.length_violations.empty(), errc::invalid_argument,
            "lattice has equal-length vector pairs besides mirrors");
    require(hyp.cosine_violations.empty(), errc::ill_conditioned,
            "cos(a0.d) is within the floor of zero for some short d");

    const std::vector<ipair> directions = directions_for_cutoff(cfg.cutoff);
    const invariant_table table =
        build_invariant_table(b, v, a0, directions, kmax, cfg.quad, cfg.cosine_floor);

    reconstruction_report rep;
    if (cfg.spot_checks > 0)
        rep.spot_check_err =
            spot_check_table(table, b, v, a0, cfg.spot_checks, 4, cfg.quad);

    rep.cosines_used =
        cfg.recover_class
            ? direction_cosines(recover_gauge_class(table, b, cfg.cosine_radius),
                                directions, kmax, cfg.cosine_floor)
            : cosines_from_a0(a0, lat, directions, kmax, cfg.cosine_floor);

    std::map<ipair, directional_data> rays;
    const double b0 = two_pi / lat.det;
    for (const auto& [didx, col] : table.entries) {
        std::vector<double> lead(std::size_t(kmax), 0.0);
        std::vector<double> coss(std::size_t(kmax), 0.0);
        double min_cos = 1.0;
        for (int k = 1; k <= kmax; ++k) {
            lead[std::size_t(k - 1)] = col[std::size_t(k - 1)].leading;
            coss[std::size_t(k - 1)] = rep.cosines_used.value(didx, k);
            min_cos = std::min(min_cos, std::abs(coss[std::size_t(k - 1)]));
        }
        const sprime_data sp =
            recover_sprime(lead, coss, table.c0, cfg.cosine_floor, cfg.quad.y_grid);
        rep.diagnostics[didx] = {min_cos, sp.min_value};
        const primitive_direction dir = primitive_decompose(lat, didx.p, didx.q);
        rays[didx] = recover_directional_field(sp, b0, dir, kmax);
    }
    rep.recovered_b = assemble_from_rays(lat, rays, cfg.cutoff, b0);

    const vec2 a0_real = realize_a0(rep.cosines_used, lat);
    rep.recovered_v = recover_potential(table, rep.cosines_used, rep.recovered_b,
                                        a0_real, cfg.cutoff, cfg.quad);
    rep.b_error = compare_fields(b, rep.recovered_b);
    rep.v_error = compare_fields(v, rep.recovered_v);
    return rep;
}

}  // namespace tsi
