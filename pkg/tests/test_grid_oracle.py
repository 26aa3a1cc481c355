import numpy as np
import pytest
import scipy.sparse as sp

from cbod.params import OscillatorParams, RampSchedule
from cbod.oscillators import exact_energy, exact_ground_state
from cbod.grid_oracle import (
    Grid,
    GridState,
    build_hamiltonian,
    eigenpairs_near,
    lowest_eigenpairs,
    overlap,
    propagate,
    sample_state,
    squeeze_operator,
)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(8, 4.0)  # too few points
    with pytest.raises(ValueError):
        Grid(64, -1.0)
    with pytest.raises(ValueError):
        Grid((64, 64), (4.0,))


def test_grid_geometry():
    g = Grid((33, 65), (2.0, 4.0))
    assert g.ndim == 2
    assert g.size == 33 * 65
    assert g.spacing[0] == pytest.approx(4.0 / 32)
    xs, xf = g.axes()
    assert xs[0] == -2.0 and xs[-1] == 2.0
    assert xf[0] == -4.0 and xf[-1] == 4.0
    # trapezoid weights integrate 1 over the box to the exact volume
    assert g.weights().sum() == pytest.approx(4.0 * 8.0, rel=1e-12)


def test_grid_centers_offset():
    g = Grid(32, 1.0, centers=5.0)
    x = g.axes()[0]
    assert x[0] == pytest.approx(4.0) and x[-1] == pytest.approx(6.0)


def test_harmonic_ground_energy_1d():
    # m=1, k=100: exact ground energy is 5.0
    g = Grid(512, 8.0 / np.sqrt(10.0))  # 8 characteristic lengths
    h = build_hamiltonian(g, 1.0, lambda x: 50.0 * x**2)
    w, v = lowest_eigenpairs(h, 3)
    assert w[0] == pytest.approx(5.0, rel=1e-3)
    assert w[1] == pytest.approx(15.0, rel=1e-3)


def test_coupled_2d_eigenvalues():
    p = OscillatorParams(10.0, 1.0, 100.0, 100.0, 50.0)
    ks, kf, ki = p.springs_at(0.0)
    sig = np.sqrt(np.diag(exact_ground_state(p).covariance()))
    g = Grid((128, 128), (7.0 * sig[0], 7.0 * sig[1]))
    h = build_hamiltonian(
        g,
        (p.m_s, p.m_f),
        lambda xs, xf: 0.5 * ks * xs**2 + 0.5 * kf * xf**2 + ki * xs * xf,
    )
    w, _ = lowest_eigenpairs(h, 2)
    assert w[0] == pytest.approx(exact_energy(p), rel=1e-3)
    # first excitation adds the softer mode quantum
    from cbod.oscillators import normal_mode_frame

    fr = normal_mode_frame(p)
    w_soft = min(fr.omega1, fr.omega2)
    assert w[1] == pytest.approx(exact_energy(p) + w_soft, rel=1e-3)


def test_nonfinite_potential_error_names_point():
    g = Grid(32, 2.0)

    def bad(x):
        v = 0.5 * x**2
        v[3] = np.inf
        return v

    with pytest.raises(ValueError) as err:
        build_hamiltonian(g, 1.0, bad)
    msg = str(err.value)
    x3 = g.axes()[0][3]
    assert "not finite" in msg and f"{float(x3)}" in msg


def test_potential_as_array_and_size_check():
    g = Grid(32, 2.0)
    x = g.axes()[0]
    h1 = build_hamiltonian(g, 1.0, 50.0 * x**2)
    h2 = build_hamiltonian(g, 1.0, lambda x: 50.0 * x**2)
    assert (h1 != h2).nnz == 0
    with pytest.raises(ValueError):
        build_hamiltonian(g, 1.0, np.ones(7))


def test_hamiltonian_is_symmetric():
    g = Grid((24, 24), (3.0, 3.0))
    h = build_hamiltonian(g, (2.0, 1.0), lambda a, b: a * b)
    assert abs(h - h.T).max() < 1e-12


def test_squeeze_operator_hermitian_and_matrix_elements():
    g = Grid(1024, 6.0)
    op = squeeze_operator(g)
    assert abs((op - op.conj().T)).max() < 1e-12
    # harmonic oscillator: <2|{x,p}|0> = i*hbar*sqrt(2)
    h = build_hamiltonian(g, 1.0, lambda x: 0.5 * x**2)
    w, v = lowest_eigenpairs(h, 3)
    elem = v[:, 2].conj() @ (op @ v[:, 0])
    # eigenvector signs are arbitrary, the magnitude is not
    assert abs(elem.imag) == pytest.approx(np.sqrt(2.0), rel=1e-3)
    assert abs(elem.real) < 1e-10


def test_eigensolver_paths_agree():
    g = Grid(600, 5.0)
    h = build_hamiltonian(g, 1.0, lambda x: 0.5 * x**2)
    w_tri, v_tri = lowest_eigenpairs(h, 4)  # tridiagonal route
    # a negligible entry two off the diagonal defeats the tridiagonal
    # detection and sends the same problem down the dense route
    eps = sp.csr_matrix(([1e-30, 1e-30], ([0, 2], [2, 0])), shape=h.shape)
    w_dense, _ = lowest_eigenpairs(h + eps, 4)
    assert np.allclose(w_tri, w_dense, atol=1e-10)
    w_sparse, _ = lowest_eigenpairs(h, 4, dense_cutoff=10)
    assert np.allclose(w_tri, w_sparse, atol=1e-8)


def test_eigenpairs_near_targets_excited_level():
    g = Grid(700, 5.0)
    h = build_hamiltonian(g, 1.0, lambda x: 0.5 * x**2)
    w, v = eigenpairs_near(h, 2.45)
    assert w[0] == pytest.approx(2.5, rel=1e-3)


def test_propagation_is_unitary_and_tracks_phase():
    g = Grid(512, 6.0)
    h = build_hamiltonian(g, 1.0, lambda x: 0.5 * x**2)
    w, v = lowest_eigenpairs(h, 1)
    psi0 = GridState(g, v[:, 0]).normalized()
    T = 2.0
    out = propagate(lambda t: h, psi0, T, T / 4000)
    assert out.meta["norm_drift"] < 1e-12
    assert out.meta["boundary_leak"] < 1e-10
    # eigenstate picks up exp(-i w T) only
    ov = overlap(psi0, out)
    assert abs(ov) == pytest.approx(1.0, abs=1e-10)
    assert np.angle(ov) == pytest.approx(-w[0] * T, abs=1e-6)


def test_propagation_second_order_in_dt():
    g = Grid(384, 1.2)
    m = 1.0
    ramp = RampSchedule(100.0, 60.0, 0.4)
    x = g.axes()[0]
    kin = build_hamiltonian(g, m)
    h_of_t = lambda t: (kin + sp.diags(0.5 * ramp.value(t) * x**2)).tocsr()
    w, v = lowest_eigenpairs(h_of_t(0.0), 1)
    psi0 = GridState(g, v[:, 0]).normalized()
    ref = propagate(h_of_t, psi0, 0.4, 0.4 / 32000).values
    errs = []
    for steps in (1000, 2000, 4000):
        out = propagate(h_of_t, psi0, 0.4, 0.4 / steps)
        errs.append(np.linalg.norm(out.values - ref) * np.sqrt(g.spacing[0]))
    r1 = errs[0] / errs[1]
    r2 = errs[1] / errs[2]
    assert 3.5 < r1 < 4.5, errs
    assert 3.5 < r2 < 4.5, errs


def test_spatial_second_order_convergence():
    # ground-energy error drops ~4x when the spacing halves
    errors = []
    for n in (257, 513):
        g = Grid(n, 8.0 / np.sqrt(10.0))
        h = build_hamiltonian(g, 1.0, lambda x: 50.0 * x**2)
        w, _ = lowest_eigenpairs(h, 1)
        errors.append(abs(w[0] - 5.0))
    ratio = errors[0] / errors[1]
    assert 3.5 < ratio < 4.5, errors


def test_sampled_gaussian_pair_matches_static_fidelity():
    from cbod.oscillators import boa_ground_state, static_fidelity

    p = OscillatorParams(10.0, 1.0, 100.0, 100.0, 50.0)
    sig = np.sqrt(np.diag(exact_ground_state(p).covariance()))
    g = Grid((192, 192), (8.0 * sig[0], 8.0 * sig[1]))
    a = sample_state(g, exact_ground_state(p).amplitude).normalized()
    b = sample_state(g, boa_ground_state(p).amplitude).normalized()
    f_grid = abs(overlap(a, b)) ** 2
    assert f_grid == pytest.approx(static_fidelity(p), abs=1e-6)


def test_boundary_fraction_flags_wide_state():
    g = Grid(64, 3.0)
    tight = sample_state(g, lambda x: np.exp(-4.0 * x**2)).normalized()
    wide = sample_state(g, lambda x: np.exp(-0.05 * x**2)).normalized()
    assert tight.boundary_fraction() < 1e-10
    assert wide.boundary_fraction() > 1e-3
