#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "flagship.hpp"
#include "tsi/spectral_oracle.hpp"

using namespace tsi;

TEST_CASE("eigensolver on a hand-built 2x2") {
    // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
    Eigen::SparseMatrix<cplx> h(2, 2);
    h.insert(0, 0) = cplx(2.0, 0.0);
    h.insert(0, 1) = cplx(0.0, 1.0);
    h.insert(1, 0) = cplx(0.0, -1.0);
    h.insert(1, 1) = cplx(2.0, 0.0);
    h.makeCompressed();
    const std::vector<double> ev = lowest_eigenvalues(h, 2);
    REQUIRE(ev.size() == 2);
    CHECK(ev[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ev[1] == doctest::Approx(3.0).epsilon(1e-10));
    SUBCASE("count guard") {
        try {
            lowest_eigenvalues(h, 3);
            CHECK(false);
        } catch (const error& e) {
            CHECK(e.code() == errc::invalid_argument);
        }
    }
}

TEST_CASE("assembly guards and hermiticity") {
    const lattice lat = testing::flagship_lattice();
    const magnetic_potential a =
        make_potential(testing::flagship_b(), testing::flagship_a0());
    const scalar_field v = testing::flagship_v();
    SUBCASE("grid floor") {
        try {
            assemble_hamiltonian(a, v, 8);
            CHECK(false);
        } catch (const error& e) {
            CHECK(e.code() == errc::invalid_argument);
        }
    }
    SUBCASE("flux must be one quantum") {
        const magnetic_potential off = make_potential(
            make_field(lat, {{{0, 0}, 1.07 * two_pi / lat.det}}), {0, 0});
        try {
            assemble_hamiltonian(off, v, 16);
            CHECK(false);
        } catch (const error& e) {
            CHECK(e.code() == errc::flux_not_quantized);
        }
    }
    SUBCASE("assembled matrix is Hermitian to rounding") {
        const discrete_hamiltonian h = assemble_hamiltonian(a, v, 20);
        CHECK(h.matrix.rows() == 400);
        CHECK(h.hermiticity_defect() < 1e-12);
    }
}

TEST_CASE("constant-field levels sit on the Landau ladder") {
    const lattice sq = make_lattice({1, 0}, {0, 1});
    const magnetic_potential a =
        make_potential(make_field(sq, {{{0, 0}, two_pi}}), {0, 0});
    const scalar_field v = make_field(sq, {});
    const std::vector<double> ev =
        lowest_eigenvalues(assemble_hamiltonian(a, v, 64), 5);
    // Continuum levels (2j+1) b0 with b0 = 2 pi; the grid sits within 0.1%
    // at this resolution.  First value frozen from a reference run.
    for (int j = 0; j < 5; ++j)
        CHECK(std::abs(ev[std::size_t(j)] / ((2 * j + 1) * two_pi) - 1.0) <
              2e-3);
    CHECK(ev[0] == doctest::Approx(6.281981).epsilon(1e-5));
}

TEST_CASE("benchmark spectrum is reproduced") {
    const magnetic_potential a =
        make_potential(testing::flagship_b(), testing::flagship_a0());
    const std::vector<double> ev = lowest_eigenvalues(
        assemble_hamiltonian(a, testing::flagship_v(), 24), 5);
    const std::vector<double> frozen = {
        6.3240024229120877, 17.096986770725096, 27.071487120705001,
        38.964231540081073, 51.604872774974581};
    for (std::size_t i = 0; i < frozen.size(); ++i)
        CHECK(std::abs(ev[i] - frozen[i]) < 1e-7);
}

TEST_CASE("a constant potential offset shifts every level exactly") {
    const lattice lat = testing::flagship_lattice();
    const magnetic_potential a =
        make_potential(testing::flagship_b(), testing::flagship_a0());
    const double c = 0.37;
    std::map<ipair, double> vc = testing::flagship_v().coeffs;
    vc[ipair{0, 0}] += c;
    const std::vector<double> base = lowest_eigenvalues(
        assemble_hamiltonian(a, testing::flagship_v(), 20), 5);
    const std::vector<double> moved = lowest_eigenvalues(
        assemble_hamiltonian(a, make_field(lat, vc), 20), 5);
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(std::abs(moved[i] - (base[i] + c)) < 1e-9);
}

TEST_CASE("conjugation by a periodic gauge factor moves the matrix exactly") {
    const int n = 20;
    const magnetic_potential a =
        make_potential(testing::flagship_b(), testing::flagship_a0());
    const std::map<ipair, cplx> phi = {{{1, 0}, cplx(0.3, 0.1)},
                                       {{-1, 0}, cplx(0.3, -0.1)},
                                       {{0, 1}, cplx(-0.2, 0.05)},
                                       {{0, -1}, cplx(-0.2, -0.05)}};
    const magnetic_potential shifted = with_gradient(a, phi);
    const scalar_field v = testing::flagship_v();
    const Eigen::MatrixXcd h1 =
        Eigen::MatrixXcd(assemble_hamiltonian(a, v, n).matrix);
    const Eigen::MatrixXcd h2 =
        Eigen::MatrixXcd(assemble_hamiltonian(shifted, v, n).matrix);
    const lattice lat = a.lat;
    Eigen::VectorXcd d(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            // Index i*n + j addresses the site (j/n) e1 + (i/n) e2: the e1
            // coordinate varies fastest.
            const vec2 x = lat.e1 * (double(j) / n) + lat.e2 * (double(i) / n);
            cplx ph = 0.0;
            for (const auto& [beta, coeff] : phi)
                ph += coeff * std::exp(cplx(
                          0.0, two_pi * lat.dual_point(beta.p, beta.q).dot(x)));
            d(i * n + j) = std::exp(cplx(0.0, ph.real()));
        }
    const Eigen::MatrixXcd conj_h1 =
        d.asDiagonal() * h1 * d.asDiagonal().inverse();
    CHECK((conj_h1 - h2).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("spectral symmetries of the torus operator") {
    const magnetic_potential a =
        make_potential(testing::flagship_b(), testing::flagship_a0());
    const magnetic_potential mirrored =
        make_potential(testing::flagship_b(), -testing::flagship_a0());
    const magnetic_potential shifted = shifted_by_dual(a, {1, -1});
    const scalar_field v = testing::flagship_v();
    const int n = 32, count = 8;
    const auto base = lowest_eigenvalues(assemble_hamiltonian(a, v, n), count);
    SUBCASE("reflecting the constant part is isospectral") {
        const auto other =
            lowest_eigenvalues(assemble_hamiltonian(mirrored, v, n), count);
        CHECK(isospectrality_check(base, other, count) < 1e-6);
    }
    SUBCASE("shifting the constant part by a dual vector is isospectral") {
        const auto other =
            lowest_eigenvalues(assemble_hamiltonian(shifted, v, n), count);
        CHECK(isospectrality_check(base, other, count) < 1e-6);
    }
}

TEST_CASE("smoothed trace bookkeeping") {
    SUBCASE("empty spectrum gives zeros") {
        const std::vector<double> tr =
            smoothed_wave_trace({}, {0.0, 0.5, 1.0}, 5.0);
        REQUIRE(tr.size() == 3);
        for (double x : tr) CHECK(x == 0.0);
    }
    SUBCASE("hand-computed values") {
        const std::vector<double> spec = {1.0, 4.0, 9.0};
        const double w = 3.0;
        const std::vector<double> ts = {0.0, 0.5, 1.7};
        const std::vector<double> tr = smoothed_wave_trace(spec, ts, w);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            double expect = 0.0;
            for (double lam : spec)
                expect += std::cos(ts[i] * std::sqrt(lam)) *
                          std::exp(-lam / (2 * w * w));
            CHECK(tr[i] == doctest::Approx(expect).epsilon(1e-14));
        }
    }
    SUBCASE("width guard") {
        try {
            smoothed_wave_trace({1.0}, {0.0}, 0.0);
            CHECK(false);
        } catch (const error& e) {
            CHECK(e.code() == errc::invalid_argument);
        }
    }
}

TEST_CASE("trace peaks mark the short lattice lengths") {
    // Oblique cell with |e1| = 1 and |e2| = sqrt(2); the smoothed trace of
    // 100 low levels at window 11 peaks near t = 1 and t = sqrt(2).
    const lattice lat = make_lattice({1, 0}, {0.2, 1.4});
    const double b0 = two_pi / lat.det;
    const scalar_field b = make_field(lat, {{{0, 0}, b0},
                                            {{1, 0}, 0.9},
                                            {{-1, 0}, 0.9},
                                            {{0, 1}, 1.1},
                                            {{0, -1}, 1.1}});
    const magnetic_potential a = make_potential(b, {0.3, 0.7});
    const scalar_field v = make_field(lat, {});
    const std::vector<double> spec =
        lowest_eigenvalues(assemble_hamiltonian(a, v, 64), 100);
    const auto argmax_in = [&](double lo, double hi) {
        std::vector<double> ts;
        for (double t = lo; t <= hi + 1e-12; t += 0.005) ts.push_back(t);
        const std::vector<double> tr = smoothed_wave_trace(spec, ts, 11.0);
        std::size_t best = 0;
        for (std::size_t i = 1; i < tr.size(); ++i)
            if (std::abs(tr[i]) > std::abs(tr[best])) best = i;
        return ts[best];
    };
    const double p1 = argmax_in(0.8, 1.2);
    CHECK(p1 > 0.95);
    CHECK(p1 < 1.05);
    const double p2 = argmax_in(1.25, 1.60);
    CHECK(p2 > std::sqrt(2.0) - 0.0707);
    CHECK(p2 < std::sqrt(2.0) + 0.0707);
}
