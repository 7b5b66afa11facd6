#include "tsi/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

namespace tsi {

namespace {

struct moment_set {
    cplx m0, m1, m2;
};

/* All three moments at once; the amplitude term needs the full set. */
moment_set compute_moments(double t) {
    moment_set r{0.0, 0.0, 0.0};
    if (std::abs(t) < 0.5) {
        // M_n(t) = sum_m (it)^m / (m! (n+m+1)); converges in ~18 terms and
        // avoids the removable singularity of the closed forms at t = 0.
        cplx term(1.0, 0.0);  // (it)^m / m!
        for (int m = 0; m < 40; ++m) {
            r.m0 += term / double(m + 1);
            r.m1 += term / double(m + 2);
            r.m2 += term / double(m + 3);
            term *= cplx(0.0, t) / double(m + 1);
            if (std::abs(term) < 1e-20) break;
        }
        return r;
    }
    // Away from zero the recurrences are cancellation-free.
    const cplx it(0.0, t);
    const cplx eit = std::exp(it);
    r.m0 = (eit - 1.0) / it;
    r.m1 = (eit - r.m0) / it;
    r.m2 = (eit - 2.0 * r.m1) / it;
    return r;
}

}  // namespace

cplx moment0(double t) { return compute_moments(t).m0; }
cplx moment1(double t) { return compute_moments(t).m1; }
cplx moment2(double t) { return compute_moments(t).m2; }

double transport_phase(const magnetic_potential& a, const vec2& x, const vec2& y) {
    const vec2 u = x - y;
    // Linear and constant parts integrate in closed form; u.perp().u = 0
    // removes the quadratic piece.
    double phase = 0.5 * a.b0 * u.dot(y.perp()) + a.a0.dot(u);
    cplx modes = 0.0;
    for (const auto& [idx, ab] : a.modes) {
        const vec2 beta = a.lat.dual_point(idx.p, idx.q);
        const cplx ua = u.x * ab[0] + u.y * ab[1];
        const cplx ey = std::polar(1.0, two_pi * beta.dot(y));
        modes += ua * moment0(two_pi * beta.dot(u)) * ey;
    }
    return phase + modes.real();  // imaginary part cancels over mirror modes
}

cplx amplitude_term(const magnetic_potential& a, const vec2& x, const vec2& y) {
    const vec2 u = x - y;
    const vec2 up = u.perp();
    // w_j = d_{x_j} phi - A_j(x).  The constant a0 cancels identically and
    // the linear parts collapse to -(b0/2) u.perp().
    cplx w[2] = {cplx(-0.5 * a.b0 * up.x, 0.0), cplx(-0.5 * a.b0 * up.y, 0.0)};
    cplx d2phi[2] = {0.0, 0.0};
    cplx diva[2] = {0.0, 0.0};
    const cplx iu(0.0, 1.0);
    for (const auto& [idx, ab] : a.modes) {
        const vec2 beta = a.lat.dual_point(idx.p, idx.q);
        const double theta = two_pi * beta.dot(u);
        const moment_set mm = compute_moments(theta);
        const cplx ey = std::polar(1.0, two_pi * beta.dot(y));
        const cplx ex = ey * std::polar(1.0, theta);  // exp(2 pi i beta.x)
        const cplx ua = u.x * ab[0] + u.y * ab[1];
        const cplx im1 = iu * mm.m1;
        const double bj[2] = {two_pi * beta.x, two_pi * beta.y};
        for (int j = 0; j < 2; ++j) {
            w[j] += (ab[j] * mm.m0 + ua * bj[j] * im1) * ey - ab[j] * ex;
            d2phi[j] += (2.0 * ab[j] * bj[j] * im1 - ua * bj[j] * bj[j] * mm.m2) * ey;
            diva[j] += iu * bj[j] * ab[j] * ex;
        }
    }
    cplx b = 0.0;
    for (int j = 0; j < 2; ++j) b += w[j] * w[j] - iu * (d2phi[j] - diva[j]);
    return b;
}

namespace {

/* Node values b(x + (t/L) d0, x) for t = 0..T in one sweep.  Along a line
 * the per-mode phases advance geometrically, so the oscillatory factors are
 * carried by recurrence instead of fresh trig; agrees with amplitude_term
 * at every node to rounding. */
void amplitude_line_nodes(const magnetic_potential& a, const vec2& x,
                          const vec2& d0, int L, int T, std::vector<cplx>& out) {
    struct line_mode {
        cplx ab0, ab1;        // mode vector components
        double bj0, bj1;      // 2 pi beta
        cplx da;              // d0 . a_beta
        double dtheta;        // phase step per node
        cplx ey, estep, eit;  // exp(2 pi i beta.x), step, running power
    };
    std::vector<line_mode> ms;
    ms.reserve(a.modes.size());
    for (const auto& [idx, ab] : a.modes) {
        const vec2 beta = a.lat.dual_point(idx.p, idx.q);
        line_mode m;
        m.ab0 = ab[0];
        m.ab1 = ab[1];
        m.bj0 = two_pi * beta.x;
        m.bj1 = two_pi * beta.y;
        m.da = d0.x * ab[0] + d0.y * ab[1];
        m.dtheta = two_pi * beta.dot(d0) / L;
        m.ey = std::polar(1.0, two_pi * beta.dot(x));
        m.estep = std::polar(1.0, m.dtheta);
        m.eit = 1.0;
        ms.push_back(m);
    }
    out.assign(std::size_t(T) + 1, 0.0);
    const cplx iu(0.0, 1.0);
    for (int t = 0; t <= T; ++t) {
        const double frac = double(t) / L;
        const vec2 up = (d0 * frac).perp();
        cplx w0(-0.5 * a.b0 * up.x, 0.0), w1(-0.5 * a.b0 * up.y, 0.0);
        cplx curv = 0.0;  // sum_j (d2phi_j - div A_j)
        for (auto& m : ms) {
            const double theta = m.dtheta * t;
            moment_set mm;
            if (std::abs(theta) < 0.5) {
                mm = compute_moments(theta);
            } else {
                const cplx it(0.0, theta);
                mm.m0 = (m.eit - 1.0) / it;
                mm.m1 = (m.eit - mm.m0) / it;
                mm.m2 = (m.eit - 2.0 * mm.m1) / it;
            }
            const cplx ex = m.ey * m.eit;
            const cplx ua = frac * m.da;
            const cplx im1 = iu * mm.m1;
            w0 += (m.ab0 * mm.m0 + ua * m.bj0 * im1) * m.ey - m.ab0 * ex;
            w1 += (m.ab1 * mm.m0 + ua * m.bj1 * im1) * m.ey - m.ab1 * ex;
            curv += (2.0 * (m.ab0 * m.bj0 + m.ab1 * m.bj1) * im1 -
                     ua * (m.bj0 * m.bj0 + m.bj1 * m.bj1) * mm.m2) *
                        m.ey -
                    iu * (m.bj0 * m.ab0 + m.bj1 * m.ab1) * ex;
            m.eit *= m.estep;
        }
        out[std::size_t(t)] = w0 * w0 + w1 * w1 - iu * curv;
    }
}

/* sup bound for |A1_delta|, giving a rigorous root bracket s in yr +- bound. */
double a1_sup_bound(const directional_data& dd) {
    double v = 0.0;
    for (const auto& [p, c] : dd.ray)
        v += std::abs(c) / (M_PI * double(p) * std::abs(dd.b0));
    return v;
}

/* Monotone scalar solve of s + A1_delta(s) = yr, Newton with a maintained
 * bracket and bisection fallback. */
double solve_inverse(const change_of_variables& cov, double yr, double s0,
                     double bound) {
    double lo = yr - bound, hi = yr + bound;
    double s = std::clamp(s0, lo, hi);
    for (int iter = 0; iter < 120; ++iter) {
        const double f = cov.y_of_s(s) - yr;
        if (std::abs(f) < 1e-13) return s;
        (f > 0.0 ? hi : lo) = s;
        const double fp = cov.yprime_of_s(s);
        double next = s - f / fp;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        s = next;
    }
    fail(errc::convergence_failure,
         "inverse change of variables did not reach 1e-13 residual");
}

}  // namespace

double change_of_variables::s_of_y(double y) const {
    const double shift = std::floor(y + 0.5);
    const double yr = y - shift;  // representative in [-1/2, 1/2)
    return shift + solve_inverse(*this, yr, yr, a1_sup_bound(dd) + 1e-9);
}

change_of_variables build_change_of_variables(const directional_data& dd, int grid) {
    require(grid >= 16, errc::invalid_argument, "inverse-map grid too small");
    require(dd.b0 != 0.0, errc::invalid_argument,
            "directional data needs a nonzero mean field");
    change_of_variables cov;
    cov.dd = dd;
    cov.grid = grid;
    // Monotonicity y'(s) = 1 + B_delta(s)/b0 > 0.  The cheap sup bound
    // settles fields well inside the hypothesis; otherwise scan finely.
    if (dd.max_abs_b_delta() >= std::abs(dd.b0)) {
        const int fine = std::max(4 * grid, 4096);
        double ymin = std::numeric_limits<double>::max();
        for (int i = 0; i < fine; ++i)
            ymin = std::min(ymin, cov.yprime_of_s(double(i) / fine));
        require(ymin > 0.0, errc::non_monotone,
                "travel-time change of variables loses monotonicity (min y' = " +
                    std::to_string(ymin) + ")");
    }
    const double bound = a1_sup_bound(dd) + 1e-9;
    cov.s_grid.resize(std::size_t(grid));
    double warm = -0.5;
    for (int m = 0; m < grid; ++m) {
        const double ym = -0.5 + double(m) / grid;
        warm = solve_inverse(cov, ym, warm, bound);
        cov.s_grid[std::size_t(m)] = warm;
    }
    return cov;
}

double leading_directional(const change_of_variables& cov, int k, double a0_dot_d0,
                           double c0) {
    require(k >= 1, errc::invalid_argument, "invariant order must be >= 1");
    const int grid = cov.grid;
    double acc = 0.0;
    for (int m = 0; m < grid; ++m) {
        const double ym = -0.5 + double(m) / grid;
        acc += std::cos(two_pi * k * ym) * cov.sprime_at(m);
    }
    return 2.0 * c0 * std::cos(double(k) * a0_dot_d0) * (acc / grid);
}

double potential_directional(const change_of_variables& cov,
                             const directional_data& v_ray, int k,
                             double a0_dot_d0, double c0) {
    require(k >= 1, errc::invalid_argument, "invariant order must be >= 1");
    if (v_ray.empty()) return 0.0;
    const int grid = cov.grid;
    double acc = 0.0;
    for (int m = 0; m < grid; ++m) {
        const double ym = -0.5 + double(m) / grid;
        acc += v_ray.b_delta(cov.s_grid[std::size_t(m)]) * cov.sprime_at(m) *
               std::cos(two_pi * k * ym);
    }
    return 2.0 * c0 * std::cos(double(k) * a0_dot_d0) * (acc / grid);
}

std::vector<double> amplitude_directional(const magnetic_potential& a,
                                          const change_of_variables& cov,
                                          const dual_pair& dp, double a0_dot_d0,
                                          double c0, int kmax,
                                          const quad_config& cfg) {
    require(kmax >= 1, errc::invalid_argument, "kmax must be >= 1");
    require(cfg.bpart_s >= 8 && cfg.bpart_sigma >= 2 && cfg.line_intervals >= 4,
            errc::invalid_argument, "amplitude quadrature too coarse");
    const int ns = cfg.bpart_s, nt = cfg.bpart_sigma, L = cfg.line_intervals;
    const vec2 d0 = cov.dd.dir.d0;

    // gbar[J][i]: unit-step line averages of the amplitude over
    // [J, J+1] along d0, averaged transversely; the full line average at
    // order k is then the prefix mean over J < k.  Sharing the node values
    // across J makes every order nearly free after the first.
    std::vector<std::vector<cplx>> gbar(std::size_t(kmax),
                                        std::vector<cplx>(std::size_t(ns), 0.0));
    std::vector<cplx> nodes;
    for (int i = 0; i < ns; ++i) {
        const double s = double(i) / ns;
        for (int r = 0; r < nt; ++r) {
            const vec2 x = dp.gamma * s + dp.gamma_prime * (double(r) / nt);
            amplitude_line_nodes(a, x, d0, L, kmax * L, nodes);
            for (int J = 0; J < kmax; ++J) {
                cplx acc = 0.5 * (nodes[std::size_t(J) * L] +
                                  nodes[std::size_t(J + 1) * L]);
                for (int t = J * L + 1; t < (J + 1) * L; ++t)
                    acc += nodes[std::size_t(t)];
                gbar[std::size_t(J)][std::size_t(i)] += acc / double(L) / double(nt);
            }
        }
    }

    // Oscillatory s-quadrature with the exact phase y(s) = s + A1_delta(s);
    // the +- pairing leaves 2 cos(k a0.d0) times the real part.
    std::vector<double> yvals(std::size_t(ns), 0.0);
    for (int i = 0; i < ns; ++i) yvals[std::size_t(i)] = cov.y_of_s(double(i) / ns);
    std::vector<cplx> prefix(std::size_t(ns), 0.0);
    std::vector<double> out(std::size_t(kmax), 0.0);
    for (int k = 1; k <= kmax; ++k) {
        cplx val = 0.0;
        for (int i = 0; i < ns; ++i) {
            prefix[std::size_t(i)] += gbar[std::size_t(k - 1)][std::size_t(i)];
            val += prefix[std::size_t(i)] *
                   std::polar(1.0, -two_pi * k * yvals[std::size_t(i)]);
        }
        val *= c0 / (double(k) * ns);
        out[std::size_t(k - 1)] = 2.0 * std::cos(double(k) * a0_dot_d0) * val.real();
    }
    return out;
}

namespace {

/* Phase of the reduced kernel: -A0(d).x plus the transport phase from x to
 * x + d; the two linear pieces combine to -b0 d.perp().x. */
double invariant_phase(const magnetic_potential& a, const vec2& d, const vec2& x) {
    return -0.5 * a.b0 * d.perp().dot(x) + transport_phase(a, x + d, x);
}

}  // namespace

cplx leading_raw(const magnetic_potential& a, int m, int n, int cell_grid) {
    require(m != 0 || n != 0, errc::zero_vector, "lattice direction must be nonzero");
    require(cell_grid >= 16, errc::invalid_argument, "cell grid too small");
    const vec2 d = a.lat.point(m, n);
    cplx acc = 0.0;
    for (int i = 0; i < cell_grid; ++i)
        for (int j = 0; j < cell_grid; ++j) {
            const vec2 x = a.lat.e1 * (double(i) / cell_grid) +
                           a.lat.e2 * (double(j) / cell_grid);
            acc += std::polar(1.0, invariant_phase(a, d, x));
        }
    return acc * (a.lat.det / double(cell_grid) / double(cell_grid));
}

cplx subleading_raw(const magnetic_potential& a, const scalar_field& v, int m,
                    int n, int cell_grid, int line_intervals) {
    require(m != 0 || n != 0, errc::zero_vector, "lattice direction must be nonzero");
    require(cell_grid >= 16 && line_intervals >= 4, errc::invalid_argument,
            "quadrature resolution too small");
    require(v.mean() == 0.0, errc::nonzero_mean_potential,
            "potential must have zero cell average");
    const vec2 d = a.lat.point(m, n);
    // Per-mode constants of the analytic line average of V along d.
    struct vterm {
        vec2 beta;
        cplx coeff;
    };
    std::vector<vterm> vterms;
    for (const auto& [idx, c] : v.coeffs) {
        if (idx.p == 0 && idx.q == 0) continue;
        const vec2 beta = v.lat.dual_point(idx.p, idx.q);
        vterms.push_back({beta, c * moment0(two_pi * beta.dot(d))});
    }
    cplx acc = 0.0;
    std::vector<cplx> nodes;
    for (int i = 0; i < cell_grid; ++i)
        for (int j = 0; j < cell_grid; ++j) {
            const vec2 x = a.lat.e1 * (double(i) / cell_grid) +
                           a.lat.e2 * (double(j) / cell_grid);
            cplx vline = 0.0;
            for (const auto& t : vterms)
                vline += t.coeff * std::polar(1.0, two_pi * t.beta.dot(x));
            amplitude_line_nodes(a, x, d, line_intervals, line_intervals, nodes);
            cplx bline = 0.5 * (nodes.front() + nodes.back());
            for (int t = 1; t < line_intervals; ++t) bline += nodes[std::size_t(t)];
            bline /= double(line_intervals);
            acc += (vline + bline) * std::polar(1.0, invariant_phase(a, d, x));
        }
    return acc * (a.lat.det / double(cell_grid) / double(cell_grid));
}

int worker_threads() {
    if (const char* env = std::getenv("TSI_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

invariant_table build_invariant_table(const scalar_field& b, const scalar_field& v,
                                      const vec2& a0,
                                      const std::vector<ipair>& directions,
                                      int kmax, const quad_config& cfg,
                                      double cosine_floor) {
    require(kmax >= 1, errc::invalid_argument, "kmax must be >= 1");
    // The directional reduction folds the linear phase -b0 d.perp().x into
    // exp(-2 pi i k delta.x), which needs exactly one flux quantum per cell.
    require(std::abs(b.mean() * b.lat.det - two_pi) < 1e-9 * two_pi,
            errc::flux_not_quantized,
            "directional invariants require cell flux 2 pi (one quantum)");
    require(v.mean() == 0.0, errc::nonzero_mean_potential,
            "potential must have zero cell average");

    invariant_table tab;
    tab.lat = b.lat;
    tab.kmax = kmax;
    tab.c0 = b.lat.det;
    const magnetic_potential pot = make_potential(b, a0);

    std::vector<std::vector<invariant_entry>> columns(directions.size());
    auto build_column = [&](std::size_t di) {
        const ipair didx = directions[di];
        const primitive_direction dir = primitive_decompose(b.lat, didx.p, didx.q);
        require(dir.k == 1 && !dir.flipped, errc::invalid_argument,
                "table directions must be canonical primitive vectors");
        const directional_data dd = directional(b, dir);
        const change_of_variables cov = build_change_of_variables(dd, cfg.y_grid);
        const dual_pair dp = make_dual_pair(b.lat, dir);
        const directional_data vray = directional(v, dir);
        const double a0d0 = a0.dot(dir.d0);
        const std::vector<double> amp =
            amplitude_directional(pot, cov, dp, a0d0, tab.c0, kmax, cfg);
        auto& col = columns[di];
        col.resize(std::size_t(kmax));
        for (int k = 1; k <= kmax; ++k) {
            invariant_entry& e = col[std::size_t(k - 1)];
            e.leading = leading_directional(cov, k, a0d0, tab.c0);
            e.subleading = potential_directional(cov, vray, k, a0d0, tab.c0) +
                           amp[std::size_t(k - 1)];
            e.flagged = std::abs(std::cos(double(k) * a0d0)) < cosine_floor;
        }
    };

    const int threads = std::min<int>(worker_threads(), int(directions.size()));
    if (threads <= 1) {
        for (std::size_t di = 0; di < directions.size(); ++di) build_column(di);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(std::size_t(threads), nullptr);
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&, w]() {
                try {
                    for (std::size_t di = std::size_t(w); di < directions.size();
                         di += std::size_t(threads))
                        build_column(di);
                } catch (...) {
                    errors[std::size_t(w)] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    for (std::size_t di = 0; di < directions.size(); ++di)
        tab.entries[directions[di]] = std::move(columns[di]);
    return tab;
}

double spot_check_table(const invariant_table& table, const scalar_field& b,
                        const scalar_field& v, const vec2& a0, int samples,
                        int max_order, const quad_config& cfg) {
    if (samples <= 0 || table.entries.empty()) return 0.0;
    const magnetic_potential pot = make_potential(b, a0);
    std::vector<ipair> dirs;
    for (const auto& [d, col] : table.entries) dirs.push_back(d);
    std::mt19937 rng(20250817u);  // fixed seed: deterministic sample
    std::uniform_int_distribution<std::size_t> pick_dir(0, dirs.size() - 1);
    std::uniform_int_distribution<int> pick_k(1, std::min(max_order, table.kmax));
    double worst = 0.0;
    for (int t = 0; t < samples; ++t) {
        const ipair dir = dirs[pick_dir(rng)];
        const int k = pick_k(rng);
        const invariant_entry& e = table.entries.at(dir)[std::size_t(k - 1)];
        const cplx ip = leading_raw(pot, k * dir.p, k * dir.q, cfg.cell_grid);
        const cplx im = leading_raw(pot, -k * dir.p, -k * dir.q, cfg.cell_grid);
        worst = std::max(worst, std::abs((ip + im).real() - e.leading));
        worst = std::max(worst, std::abs((ip + im).imag()));
    }
    return worst;
}

}  // namespace tsi
