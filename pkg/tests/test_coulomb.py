import numpy as np
import pytest

from cbod.coulomb import (
    CDProfile,
    HydrogenicState,
    RadialNodeError,
    berry_connection_formula,
    berry_connection_numeric,
    cd_potential,
    comparison_report,
    diagonal_cd_expectation,
    hydrogenic_energy,
    laguerre,
    printed_cd_bracket,
    radial_g_derivative,
    radial_norm,
    radial_overlap,
    radial_wavefunction,
    trap_level_energy,
)

ALL_SIX = [
    HydrogenicState(1, 0),
    HydrogenicState(2, 0),
    HydrogenicState(2, 1),
    HydrogenicState(3, 0),
    HydrogenicState(3, 1),
    HydrogenicState(3, 2),
]


def test_state_validation():
    with pytest.raises(ValueError):
        HydrogenicState(0, 0)
    with pytest.raises(ValueError):
        HydrogenicState(2, 2)
    with pytest.raises(ValueError):
        HydrogenicState(1, 0, g=-1.0)


def test_laguerre_conventions():
    x = np.linspace(0.0, 5.0, 7)
    assert np.all(laguerre(-1, 1, x) == 0.0)
    assert np.all(laguerre(0, 3, x) == 1.0)
    # L_2^1(x) = 3 - 3x + x^2/2
    assert laguerre(2, 1, x) == pytest.approx(3.0 - 3.0 * x + 0.5 * x**2)


def test_ground_state_value_at_origin():
    s = HydrogenicState(1, 0)
    assert radial_wavefunction(s, 0.0) == pytest.approx(2.0, rel=1e-14)
    # and decays like 2 e^{-r} in these units
    assert radial_wavefunction(s, 1.5) == pytest.approx(2.0 * np.exp(-1.5))


def test_node_radius_scaling():
    s = HydrogenicState(2, 0, g=3.0, m_f=2.0)
    nodes = s.node_radii()
    assert nodes.shape == (1,)
    assert nodes[0] == pytest.approx(2.0 * s.hbar**2 / (s.m_f * s.g), rel=1e-12)
    assert HydrogenicState(3, 0).node_radii().shape == (2,)
    assert HydrogenicState(3, 2).node_radii().shape == (0,)


def test_norms_and_orthogonality():
    for s in ALL_SIX:
        assert radial_norm(s) == pytest.approx(1.0, abs=1e-10)
    for a, b in [((1, 0), (2, 0)), ((2, 0), (3, 0)), ((2, 1), (3, 1))]:
        ov = radial_overlap(HydrogenicState(*a), HydrogenicState(*b))
        assert abs(ov) < 1e-10, (a, b, ov)
    with pytest.raises(ValueError):
        radial_overlap(HydrogenicState(1, 0), HydrogenicState(2, 0, m_f=2.0))


def test_energies():
    assert hydrogenic_energy(HydrogenicState(1, 0)) == pytest.approx(-0.5)
    assert hydrogenic_energy(HydrogenicState(2, 1)) == pytest.approx(-0.125)
    s = HydrogenicState(2, 0, g=3.0, m_f=2.0)
    assert hydrogenic_energy(s) == pytest.approx(-2.0 * 9.0 / 8.0)


def test_trap_level_energy_ladder():
    s = HydrogenicState(1, 0)
    assert trap_level_energy(s, 2.0, 3) == pytest.approx(2.0 * 4.5 - 0.5)
    assert trap_level_energy(s, 2.0, 4) - trap_level_energy(s, 2.0, 3) == (
        pytest.approx(2.0)
    )
    with pytest.raises(ValueError):
        trap_level_energy(s, 2.0, -1)


def test_bracket_closed_forms_nodeless_states():
    # states whose outer Laguerre factor is constant have a pure linear
    # bracket: 3/2 - m g r / hbar^2 for (1,0), 5/2 - m g r / (2 hbar^2)
    # for (2,1)
    g, m = 2.0, 1.5
    r = np.linspace(0.0, 6.0, 13)
    s10 = HydrogenicState(1, 0, g=g, m_f=m)
    assert radial_g_derivative(s10, r) == pytest.approx(1.5 - m * g * r)
    s21 = HydrogenicState(2, 1, g=g, m_f=m)
    assert radial_g_derivative(s21, r) == pytest.approx(2.5 - 0.5 * m * g * r)
    # scalar in, scalar out
    assert isinstance(radial_g_derivative(s10, 1.0), float)


def test_bracket_raises_at_node():
    s = HydrogenicState(2, 0)
    node = s.node_radii()[0]
    with pytest.raises(RadialNodeError, match="node"):
        radial_g_derivative(s, node)
    # fine slightly away from it
    val = radial_g_derivative(s, node * 1.05)
    assert np.isfinite(val)


def test_bracket_matches_fd_off_nodes():
    rng = np.random.default_rng(7)
    for s in ALL_SIX:
        nodes = s.node_radii()
        r = rng.uniform(0.2, 10.0, size=40) * s.bohr_radius
        if nodes.size:
            keep = np.min(np.abs(r[:, None] - nodes[None, :]), axis=1) > 0.1
            r = r[keep]
        br = radial_g_derivative(s, r)
        h = 1e-6 * s.g
        up = HydrogenicState(s.n, s.l, s.g + h, s.m_f, s.hbar)
        dn = HydrogenicState(s.n, s.l, s.g - h, s.m_f, s.hbar)
        fd = (radial_wavefunction(up, r) - radial_wavefunction(dn, r)) / (2 * h)
        ref = radial_wavefunction(s, r)
        assert np.allclose(br * ref / s.g, fd, rtol=1e-5, atol=1e-9)


def test_berry_connection_formula_values():
    assert berry_connection_formula(HydrogenicState(1, 0), 1.0) == 0.0
    assert berry_connection_formula(HydrogenicState(2, 0), 1.0) == (
        pytest.approx(-1.25)
    )
    assert berry_connection_formula(HydrogenicState(2, 1), 1.0) == (
        pytest.approx(-1.0)
    )
    # scales as gdot / g
    s = HydrogenicState(2, 1, g=4.0)
    assert berry_connection_formula(s, 2.0) == pytest.approx(-0.5)


def test_berry_connection_numeric_vanishes():
    # <R|d_g R> is half d_g<R|R> = 0 for any real normalized state
    for s in ALL_SIX:
        assert abs(berry_connection_numeric(s, 1.0)) < 1e-10, (s.n, s.l)


def test_diagonal_cd_expectation_vanishes():
    for s in ALL_SIX:
        assert abs(diagonal_cd_expectation(s)) < 1e-10, (s.n, s.l)


def test_cd_potential_ground_state_matches_printed():
    s = HydrogenicState(1, 0)
    r = np.linspace(0.0, 10.0, 41)
    prof = cd_potential(s, 0.7, r)
    assert isinstance(prof, CDProfile)
    assert prof.poles.size == 0
    assert prof.printed is not None
    assert np.max(np.abs(prof.coefficient - prof.printed)) < 1e-12
    assert prof.notes == []
    # and the bracket itself is the linear closed form times gdot/g
    assert prof.coefficient == pytest.approx(0.7 * (1.5 - r), abs=1e-12)


def test_cd_potential_static_coupling_is_zero():
    s = HydrogenicState(2, 0)
    r = np.linspace(0.1, 8.0, 17)
    prof = cd_potential(s, 0.0, r)
    assert np.all(prof.coefficient == 0.0)
    assert prof.berry_numeric == 0.0


def test_cd_potential_flags_divergent_printed_forms():
    r = np.linspace(0.1, 8.0, 17)
    for n, l in [(2, 0), (2, 1)]:
        prof = cd_potential(HydrogenicState(n, l), 1.0, r)
        assert prof.notes, (n, l)
    # states without a quoted form carry no printed array
    assert cd_potential(HydrogenicState(3, 1), 1.0, r).printed is None


def test_printed_forms_quoted_values():
    # (2,1) differs from the recurrence bracket by exactly the formula
    # connection constant -1
    s = HydrogenicState(2, 1)
    r = np.linspace(0.0, 9.0, 10)
    diff = printed_cd_bracket(s, r) - radial_g_derivative(s, r)
    assert diff == pytest.approx(np.ones_like(r))
    # (2,0) pole sits at hbar^2/(g m), not at the radial node 2 hbar^2/(g m)
    s20 = HydrogenicState(2, 0)
    vals = printed_cd_bracket(s20, np.array([1.0]))
    assert not np.isfinite(vals[0])
    assert np.isfinite(printed_cd_bracket(s20, np.array([2.0]))[0])


def test_comparison_report_rows():
    rows = comparison_report()
    assert [(row["n"], row["l"]) for row in rows] == [
        (1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2),
    ]
    by_state = {(row["n"], row["l"]): row for row in rows}
    assert by_state[(1, 0)]["formula_vs_numeric_flag"] is False
    assert by_state[(1, 0)]["printed_bracket_max_dev"] < 1e-12
    for key in [(2, 0), (2, 1)]:
        assert by_state[key]["formula_vs_numeric_flag"] is True
    assert by_state[(2, 0)]["printed_bracket_max_dev"] > 1.0
    assert by_state[(2, 1)]["printed_bracket_max_dev"] == pytest.approx(1.0)
    assert by_state[(3, 0)]["printed_bracket_max_dev"] is None
    assert by_state[(3, 0)]["n_poles"] == 2
    assert by_state[(3, 2)]["n_poles"] == 0
    for row in rows:
        assert abs(row["berry_numeric"]) < 1e-10
        assert abs(row["diagonal_cd_mean"]) < 1e-10
