"""End-to-end smoke tests for the Python bindings.

These exercise the wiring (construction, table build, round trip, discrete
spectrum, error translation), not numerical accuracy -- the C++ suites pin
the tolerances.
"""

import math

import pytest

import tsi

TWO_PI = 2.0 * math.pi


def benchmark_problem():
    lat = tsi.make_lattice(tsi.vec2(1.0, 0.0), tsi.vec2(0.4, 1.1))
    b0 = TWO_PI / lat.det
    b = tsi.make_field(
        lat,
        [(0, 0, b0), (1, 0, 0.8), (-1, 0, 0.8), (0, 1, 1.0), (0, -1, 1.0)],
    )
    v = tsi.make_field(
        lat, [(1, 0, 0.35), (-1, 0, 0.35), (0, 1, -0.2), (0, -1, -0.2)]
    )
    return lat, b, v, tsi.vec2(0.3, 0.7)


def test_field_construction_and_eval():
    lat, b, v, a0 = benchmark_problem()
    assert lat.det == pytest.approx(1.1)
    assert b.mean() == pytest.approx(TWO_PI / 1.1)
    assert b.coeff(0, 1) == pytest.approx(1.0)
    assert v.coeff(2, 2) == 0.0
    # eval at the origin is the plain sum of all stored coefficients
    total = sum(c for (_, _, c) in b.coefficients())
    assert b.eval(0.0, 0.0) == pytest.approx(total)


def test_hypotheses_hold_for_benchmark():
    _, b, _, a0 = benchmark_problem()
    rep = tsi.validate_problem(b, a0)
    assert rep["ok"]
    assert rep["field_margin"] > 0.0
    assert rep["length_violations"] == []
    assert rep["cosine_violations"] == []


def test_square_lattice_fails_length_condition():
    sq = tsi.make_lattice(tsi.vec2(1.0, 0.0), tsi.vec2(0.0, 1.0))
    b = tsi.make_field(sq, [(0, 0, TWO_PI)])
    rep = tsi.validate_problem(b, tsi.vec2(0.3, 0.7))
    assert not rep["ok"]
    assert len(rep["length_violations"]) > 0


def test_invariant_table_matches_pinned_value():
    _, b, v, a0 = benchmark_problem()
    table = tsi.build_invariant_table(b, v, a0, [(1, 0)], kmax=2)
    assert table.kmax == 2
    assert table.c0 == pytest.approx(1.1)
    column = table.column(1, 0)
    leading, subleading, flagged = column[0]
    assert leading == pytest.approx(-0.3623425100575, abs=1e-9)
    assert not flagged
    with pytest.raises(tsi.Error):
        table.column(3, 5)


def test_roundtrip_recovers_fields():
    _, b, v, a0 = benchmark_problem()
    rep = tsi.roundtrip(b, v, a0, cutoff=1, kmax=4)
    assert rep["b_error"]["rel_l2"] < 1e-2
    assert rep["v_error"]["rel_l2"] < 1e-1
    assert rep["recovered_b"].coeff(1, 0) == pytest.approx(0.8, abs=1e-2)
    assert rep["recovered_v"].coeff(0, 1) == pytest.approx(-0.2, abs=1e-2)


def test_discrete_spectrum_matches_pinned_values():
    _, b, v, a0 = benchmark_problem()
    h = tsi.assemble_hamiltonian(tsi.make_potential(b, a0), v, 24)
    assert h.n == 24
    assert h.hermiticity_defect() < 1e-12
    ev = tsi.lowest_eigenvalues(h, 3)
    expected = [6.3240024229120877, 17.096986770725096, 27.071487120705001]
    assert ev == pytest.approx(expected, abs=1e-6)
    tr = tsi.smoothed_wave_trace(ev, [0.0, 0.5], 5.0)
    assert len(tr) == 2


def test_errors_translate_to_python():
    with pytest.raises(tsi.Error):
        tsi.make_lattice(tsi.vec2(1.0, 0.0), tsi.vec2(0.0, -1.0))
    lat = tsi.make_lattice(tsi.vec2(1.0, 0.0), tsi.vec2(0.0, 1.0))
    with pytest.raises(tsi.Error):
        tsi.make_field(lat, [(1, 0, 0.5)])  # unbalanced mirror
    b = tsi.make_field(lat, [(0, 0, 1.0)])  # flux 1 != 2 pi
    with pytest.raises(tsi.Error):
        tsi.assemble_hamiltonian(tsi.make_potential(b, tsi.vec2(0, 0)), b, 24)
