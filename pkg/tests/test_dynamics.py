import math

import numpy as np
import pytest

from towline.dynamics import (
    ASystemSolution,
    SymmetricReport,
    a_system_residuals,
    a_system_solve,
    count_local_maxima,
    dabmn_evolve,
    dabmn_step,
    penny_terminal,
    plateau_terminal,
    static_terminal,
    symmetric_crosscheck,
    terminal_preset,
)
from towline.engine import penny_forfeit
from towline.solutions import standard_solution


def test_static_solution_is_fixed_point():
    q = standard_solution(3.0, (-5, 5))
    a, b, m, n = dabmn_step(q.m, q.n)
    np.testing.assert_allclose(m, q.m, atol=1e-12)
    np.testing.assert_allclose(n, q.n, atol=1e-12)
    np.testing.assert_allclose(a, q.a, atol=1e-12)
    np.testing.assert_allclose(b, q.b, atol=1e-12)


def test_single_open_vertex_reduces_to_one_turn_stakes():
    m = np.array([0.0, 0.4, 1.0])
    n = np.array([1.0, 0.7, 0.0])
    a, b, _, _ = dabmn_step(m, n)
    want = penny_forfeit(m[2] - m[0], n[0] - n[2])
    assert (a[0], b[0]) == pytest.approx(want)


def test_step_preserves_strictness_on_structured_rows():
    # equilibrium-shaped and preset rows keep strictly monotone images
    # (static case small enough that no increment saturates in value space)
    for m_ter, n_ter in (static_terminal(3.0, 3), plateau_terminal(5), penny_terminal(5)):
        a, b, m1, n1 = dabmn_step(m_ter, n_ter)
        assert np.all(np.diff(m1) > 0)
        assert np.all(np.diff(n1) < 0)


def test_step_strictness_does_not_propagate_in_general():
    # regression record: strict input rows can produce a non-monotone image
    # (found by direct inequality evaluation on random strict inputs)
    inc_m = [0.3292490526288415, 0.4713182327650842, 0.29836662675411424,
             0.09435703460332856, 0.06584299635704244, 0.2844104491017606,
             0.8681994056377615, 0.20550945257023973]
    inc_n = [0.7051414701796127, 0.2869127958722015, 0.11230378982447126,
             0.2328622342940117, 0.6940300259169244, 0.5265733945443497,
             0.5715794890549964, 0.48050606442167043]
    m = np.concatenate([[0.0], np.cumsum(inc_m)])
    n = np.concatenate([[0.0], np.cumsum(inc_n)])[::-1].copy()
    _, _, m1, _ = dabmn_step(m, n)
    assert np.any(np.diff(m1) <= 0)
    # the two-gap spreads the equations need stay positive, so the
    # evolution remains well posed
    assert np.all(m1[2:] - m1[:-2] > 0)


def test_step_rejects_non_positive_spreads():
    m = np.array([0.0, 0.5, 0.4, 0.45])  # two-gap spread negative at the right
    n = np.array([1.0, 0.6, 0.3, 0.0])
    with pytest.raises(ValueError, match="vertex"):
        dabmn_step(m, n)


def test_evolve_constant_under_static_terminal():
    K = 4
    m_ter, n_ter = static_terminal(3.0, K)
    sheet = dabmn_evolve(K, 50, m_ter, n_ter, stride=10)
    for row_m, row_n in zip(sheet.m_rows, sheet.n_rows):
        np.testing.assert_allclose(row_m, m_ter, atol=1e-10)
        np.testing.assert_allclose(row_n, n_ter, atol=1e-10)
    assert all(c <= 1e-10 for c in sheet.convergence[1:])


def test_evolve_reflection_symmetry():
    K = 5
    m_ter, n_ter = plateau_terminal(K)
    sheet = dabmn_evolve(K, 300, m_ter, n_ter, stride=50)
    for a_row, b_row in zip(sheet.a_rows, sheet.b_rows):
        np.testing.assert_allclose(b_row, a_row[::-1], rtol=1e-9, atol=1e-240)


def test_plateau_collapse_two_to_one():
    K = 8
    m_ter, n_ter = plateau_terminal(K)
    sheet = dabmn_evolve(K, 4200, m_ter, n_ter, stride=140)
    counts = [c for _, c in sheet.maxima_counts]
    assert counts[0] == 2
    assert counts[-1] == 1
    assert sheet.collapse_time is not None and sheet.collapse_time > 0
    assert len(sheet.times) == 30
    # final profile peaks at the centre
    final_a = sheet.a_rows[-1]
    assert int(np.argmax(final_a)) == K


def test_evolve_record_layout():
    K = 3
    m_ter, n_ter = penny_terminal(K)
    sheet = dabmn_evolve(K, 17, m_ter, n_ter, stride=5)
    assert sheet.times == [15, 10, 5, 0]
    assert sheet.a_rows.shape == (4, 2 * K + 1)
    assert sheet.m_rows.shape == (4, 2 * K + 3)


def test_evolve_validation():
    K = 3
    m_ter, n_ter = plateau_terminal(K)
    with pytest.raises(ValueError):
        dabmn_evolve(K, 0, m_ter, n_ter)
    with pytest.raises(ValueError):
        dabmn_evolve(K + 1, 10, m_ter, n_ter)
    bad = m_ter.copy()
    bad[3] = bad[4] + 0.01
    with pytest.raises(ValueError):
        dabmn_evolve(K, 10, bad, n_ter)


def test_terminal_presets():
    for name in ("plateau", "static", "penny"):
        m_ter, n_ter = terminal_preset(name, 4)
        assert len(m_ter) == 11
        assert np.all(np.diff(m_ter) > 0)
        assert np.all(np.diff(n_ter) < 0)
    with pytest.raises(ValueError):
        terminal_preset("cliff", 4)


def test_count_local_maxima():
    assert count_local_maxima(np.array([0.0, 1.0, 0.0, 2.0, 0.0])) == 2
    assert count_local_maxima(np.array([1.0, 2.0, 3.0])) == 1
    assert count_local_maxima(np.array([1e-300, 2e-300, 1.0, 1e-300, 1.5e-300])) == 1


def test_a_system_seeds():
    sol = a_system_solve("int", 1.0, 6)
    assert sol.value_at(0) == 1.0
    assert sol.value_at(1) == pytest.approx((-3.0 + math.sqrt(33.0)) / 4.0, rel=1e-14)
    assert sol.value_at(-1) == pytest.approx((1.0 - sol.value_at(1)) / 2.0, rel=1e-14)
    half = a_system_solve("half", 1.0, 6)
    assert half.value_at(-0.5) == 1.0
    assert half.value_at(0.5) == pytest.approx(2.0, rel=1e-14)


def test_a_system_residuals_tiny():
    for lattice in ("int", "half"):
        sol = a_system_solve(lattice, 1.0, 10)
        res = a_system_residuals(sol)
        assert res.size > 0
        assert res.max() <= 1e-12


def test_a_system_scaling_law():
    for lattice in ("int", "half"):
        base = a_system_solve(lattice, 1.0, 10)
        for lam in (0.25, 2.0, 7.5):
            scaled = a_system_solve(lattice, lam, 10)
            np.testing.assert_allclose(
                scaled.values, lam * base.values, rtol=1e-12, atol=1e-12
            )


def test_a_system_validation():
    with pytest.raises(ValueError):
        a_system_solve("int", 0.0, 5)
    with pytest.raises(ValueError):
        a_system_solve("diag", 1.0, 5)
    with pytest.raises(ValueError):
        a_system_solve("int", 1.0, 0)
    with pytest.raises(KeyError):
        a_system_solve("int", 1.0, 3).value_at(9)


def test_symmetric_crosscheck_report():
    report = symmetric_crosscheck((-10, 10))
    assert report.reflection_gap_3 <= 1e-8
    assert report.reflection_gap_1 <= 1e-8
    assert report.residual_int <= 1e-8
    assert report.residual_half <= 1e-8
    assert report.match_int <= 1e-8
    assert report.match_half <= 1e-8
    assert report.increment_identity_3 <= 1e-10
    assert report.increment_identity_1 <= 1e-10


def test_evolved_rows_satisfy_the_stepped_equations():
    K = 4
    m_ter, n_ter = plateau_terminal(K)
    sheet = dabmn_evolve(K, 12, m_ter, n_ter, stride=1)
    for r in range(1, len(sheet.times)):
        a = sheet.a_rows[r]
        b = sheet.b_rows[r]
        m_now, n_now = sheet.m_rows[r], sheet.n_rows[r]
        m_next, n_next = sheet.m_rows[r - 1], sheet.n_rows[r - 1]
        ab = a + b
        r1 = np.abs(ab * (m_now[1:-1] + a) - (a * m_next[2:] + b * m_next[:-2]))
        r2 = np.abs(ab * (n_now[1:-1] + b) - (a * n_next[2:] + b * n_next[:-2]))
        r3 = np.abs(ab * ab - b * (m_next[2:] - m_next[:-2]))
        r4 = np.abs(ab * ab - a * (n_next[:-2] - n_next[2:]))
        assert max(r1.max(), r2.max(), r3.max(), r4.max()) <= 1e-12
