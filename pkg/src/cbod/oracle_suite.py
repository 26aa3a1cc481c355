"""Cross-module consistency checks, runnable as one named suite.

Each check pits a closed form against an independent numerical route
(quadrature, finite differences, grid eigensolves, Crank-Nicolson) and
reports a measured deviation against its threshold.  The CLI's
oracle-check experiment prints one line per check and fails if any
check fails; the test suite reuses the same machinery.
"""

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .params import OscillatorParams, RampSchedule, ramp_eval
from .oscillators import (
    GaussianState1D,
    exact_ground_state,
    exact_energy,
    boa_ground_state,
    boa_frame,
    normal_mode_frame,
    static_fidelity,
    geometric_quantities,
    overlap_by_quadrature,
)
from .cd_engine import (
    boa_frequency_tables,
    fd_derivative,
    exact_cd,
    cbod_cd,
    cbod_effective_springs,
    spectral_cd_matrix,
)
from .dynamics import (
    solve_ermakov,
    scaled_state,
    evolve_cbod,
    dynamic_fidelity,
)
from . import grid_oracle as go
from . import coulomb as cl


@dataclass
class OracleCheck:
    name: str
    measured: float
    threshold: float
    ok: bool
    seconds: float
    detail: str = ""


def _check(name, measured, threshold, t0, detail=""):
    return OracleCheck(
        name=name,
        measured=float(measured),
        threshold=float(threshold),
        ok=bool(measured <= threshold),
        seconds=time.perf_counter() - t0,
        detail=detail,
    )


def _random_params(rng):
    """A physically valid random parameter set (positive springs,
    positive-definite coupling)."""
    while True:
        ks = rng.uniform(20.0, 200.0)
        kf = rng.uniform(20.0, 200.0)
        ki = rng.uniform(-0.9, 0.9) * np.sqrt(ks * kf)
        ms = rng.uniform(1.0, 200.0)
        mf = rng.uniform(0.5, 2.0)
        if ks * kf - ki**2 > 1.0:
            return OscillatorParams(ms, mf, ks, kf, ki)


def check_ramp_endpoints():
    t0 = time.perf_counter()
    dev = 0.0
    for (k0, k1, Tf) in ((50.0, 25.0, 1.0), (1.0, 30.0, 0.05), (100.0, -40.0, 2.5)):
        r = RampSchedule(k0, k1, Tf)
        v0, d0, s0 = ramp_eval(r, 0.0)
        v1, d1, s1 = ramp_eval(r, Tf)
        dev = max(
            dev,
            abs(v0 - k0),
            abs(v1 - (k0 + k1)),
            abs(d0),
            abs(d1),
            abs(s0),
            abs(s1),
        )
    return _check("ramp endpoint values and flat derivatives", dev, 1e-12, t0)


def check_frame_reassembly(n_sets=20, seed=1):
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    dev = 0.0
    for _ in range(n_sets):
        p = _random_params(rng)
        fr = normal_mode_frame(p)
        ks, kf, ki = p.springs_at(0.0)
        k_lab = np.array([[ks, ki], [ki, kf]])
        back = fr.lab_to_mode.T @ np.diag([fr.kappa1, fr.kappa2]) @ fr.lab_to_mode
        dev = max(dev, np.abs(back - k_lab).max() / np.abs(k_lab).max())
        linv = np.linalg.inv(fr.lab_to_mode)
        m_mode = linv.T @ np.diag([p.m_s, p.m_f]) @ linv
        dev = max(dev, np.abs(m_mode - fr.mu * np.eye(2)).max() / fr.mu)
    return _check("normal-mode frame reassembles lab springs and masses", dev, 1e-10, t0)


def check_overlap_quadrature(n_sets=20, seed=2):
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    dev = 0.0
    for _ in range(n_sets):
        p = _random_params(rng)
        a = exact_ground_state(p)
        b = boa_ground_state(p)
        closed = a.overlap(b)
        quad = overlap_by_quadrature(a, b)
        dev = max(dev, abs(closed - quad))
    return _check("closed-form Gaussian overlap vs 2D quadrature", dev, 1e-8, t0)


def check_static_fidelity_grid(n_pts=96):
    t0 = time.perf_counter()
    p = OscillatorParams(10.0, 1.0, 100.0, 100.0, 50.0)
    ks, kf, ki = p.springs_at(0.0)
    sig = np.sqrt(np.diag(exact_ground_state(p).covariance()))
    g = go.Grid((n_pts, n_pts), (7.0 * sig[0], 7.0 * sig[1]))
    h = go.build_hamiltonian(
        g,
        (p.m_s, p.m_f),
        lambda xs, xf: 0.5 * ks * xs**2 + 0.5 * kf * xf**2 + ki * xs * xf,
    )
    w, v = go.lowest_eigenpairs(h, 1)
    vg = go.GridState(g, v[:, 0]).normalized()
    boa = go.sample_state(g, boa_ground_state(p).amplitude).normalized()
    f_grid = abs(go.overlap(boa, vg)) ** 2
    dev = abs(f_grid - static_fidelity(p))
    e_dev = abs(w[0] - exact_energy(p, 0.0)) / abs(exact_energy(p, 0.0))
    return _check(
        "static fidelity and ground energy vs 2D grid",
        max(dev, e_dev),
        1e-3,
        t0,
        detail=f"fidelity dev {dev:.2e}, energy rel dev {e_dev:.2e}",
    )


def check_cd_endpoints():
    t0 = time.perf_counter()
    p = OscillatorParams(10.0, 1.0, RampSchedule(50.0, 25.0, 1.0), 100.0, 50.0)
    dev = 0.0
    for t in (0.0, 1.0):
        for term in exact_cd(p, t) + cbod_cd(p, t):
            dev = max(dev, abs(term.coefficient))
        springs = cbod_effective_springs(p, t)
        ks, kf, ki = p.springs_at(t)
        dev = max(dev, abs(springs.gamma_s - ks), abs(springs.gamma_f - kf))
    return _check("CD terms vanish and effective springs match at endpoints", dev, 1e-12, t0)


def check_frequency_chains():
    t0 = time.perf_counter()
    p = OscillatorParams(
        10.0, 1.0, RampSchedule(50.0, 25.0, 1.0), RampSchedule(100.0, -20.0, 1.0), 50.0
    )
    ts = np.linspace(0.05, 0.95, 7)
    dev = 0.0
    (ws, dws, d2ws), (wf, dwf, d2wf) = boa_frequency_tables(p, ts)
    for i, t in enumerate(ts):
        for (w_fn, d1, d2) in (
            (lambda u: boa_frequency_tables(p, u)[0][0], dws[i], d2ws[i]),
            (lambda u: boa_frequency_tables(p, u)[1][0], dwf[i], d2wf[i]),
        ):
            fd1 = fd_derivative(w_fn, t, 1e-4, order=1)
            fd2 = fd_derivative(w_fn, t, 1e-3, order=2)
            dev = max(dev, abs(d1 - fd1) / max(abs(d1), 1.0))
            dev = max(dev, abs(d2 - fd2) / max(abs(d2), 1.0))
    return _check("analytic frequency derivatives vs Richardson FD", dev, 1e-5, t0)


def check_spectral_cd_two_level():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    dev = 0.0
    for _ in range(10):
        e1, e2 = np.sort(rng.uniform(-2.0, 2.0, 2))
        if e2 - e1 < 0.1:
            e2 = e1 + 0.1
        v = rng.uniform(-1.0, 1.0)
        de1, de2, dv = rng.uniform(-1.0, 1.0, 3)
        h0 = np.array([[e1, v], [v, e2]])
        dh = np.array([[de1, dv], [dv, de2]])
        h1 = spectral_cd_matrix(h0, dh)
        theta_dot = (dv * (e1 - e2) - v * (de1 - de2)) / ((e1 - e2) ** 2 + 4 * v**2)
        sy = np.array([[0.0, -1j], [1j, 0.0]])
        dev = max(dev, np.abs(h1 - theta_dot * sy).max())
    return _check("two-level spectral CD equals the rotation-rate closed form", dev, 1e-12, t0)


def check_spectral_cd_vs_squeeze(n_pts=1536, n_keep=48, n_states=10):
    """Sum-over-states CD built from grid eigenstates vs the closed form.

    The grid Hamiltonian is truncated to its lowest n_keep eigenstates
    (the 1D spectrum is nondegenerate there; the untruncated FD band top
    has parity doublets that the degeneracy guard rejects by design).
    {x, p} only couples n to n +/- 2, so the truncation is harmless for
    the compared lowest-10 block.
    """
    t0 = time.perf_counter()
    m = 1.0
    ramp = RampSchedule(100.0, 60.0, 1.0)
    t_probe = 0.37
    g = go.Grid(n_pts, 3.0)
    x = g.axes()[0]
    kin = go.build_hamiltonian(g, m)
    k_val, k_dot, _ = ramp_eval(ramp, t_probe)
    h0 = kin + sp.diags(0.5 * k_val * x**2)
    w, v = go.lowest_eigenpairs(h0, n_keep)
    h0_t = np.diag(w)
    dh_t = (v.T * (0.5 * k_dot * x**2)) @ v
    h1 = spectral_cd_matrix(h0_t, dh_t)
    omega = np.sqrt(k_val / m)
    omega_dot = k_dot / (2.0 * m * omega)
    analytic = (-omega_dot / (4.0 * omega)) * (go.squeeze_operator(g) @ v)
    proj_a = v.conj().T @ analytic
    dev = np.linalg.norm(h1[:n_states, :n_states] - proj_a[:n_states, :n_states])
    dev /= np.linalg.norm(proj_a[:n_states, :n_states])
    herm = np.abs(h1 - h1.conj().T).max()
    diag = np.abs(np.diag(h1)).max()
    ok_extra = herm <= 1e-12 and diag <= 1e-10
    chk = _check(
        "spectral CD matches -(dw/4w){x,p} on the low subspace",
        dev,
        1e-3,
        t0,
        detail=f"hermiticity {herm:.2e}, eigenbasis diagonal {diag:.2e}",
    )
    chk.ok = chk.ok and ok_extra
    return chk


def check_ermakov_fixed_point():
    t0 = time.perf_counter()
    sol = solve_ermakov(lambda t: 7.0, 7.0, 2.0, steps=4000)
    dev = np.abs(sol.b - 1.0).max()
    return _check("Ermakov constant-frequency fixed point", dev, 1e-10, t0)


def check_ermakov_sudden_jump():
    t0 = time.perf_counter()
    w0, w1, Tf = 10.0, 6.0, 1.0
    sol = solve_ermakov(lambda t: w1, w0, Tf, steps=200000)
    ts = sol.times
    closed = np.sqrt(
        np.cos(w1 * ts) ** 2 + (w0 / w1) ** 2 * np.sin(w1 * ts) ** 2
    )
    dev = np.abs(sol.b - closed).max()
    return _check("Ermakov sudden-jump closed form", dev, 1e-8, t0)


def check_scaled_state_vs_cn(n_pts=512, n_steps=8000):
    t0 = time.perf_counter()
    m = 1.0
    ramp = RampSchedule(100.0, 60.0, 0.4)
    omega = lambda t: np.sqrt(ramp.value(t) / m)
    sol = solve_ermakov(omega, omega(0.0), ramp.Tf)
    init = GaussianState1D(a=m * omega(0.0)).normalized()
    fin = scaled_state(init, sol, m, ramp.Tf)
    g = go.Grid(n_pts, 1.2)
    x = g.axes()[0]
    kin = go.build_hamiltonian(g, m)
    h_of_t = lambda t: (kin + sp.diags(0.5 * ramp.value(t) * x**2)).tocsr()
    psi0 = go.sample_state(g, init.amplitude).normalized()
    out = go.propagate(h_of_t, psi0, ramp.Tf, ramp.Tf / n_steps)
    targ = go.sample_state(g, fin.amplitude).normalized()
    dev = 1.0 - abs(go.overlap(targ, out))
    return _check("Ermakov scaled state vs 1D Crank-Nicolson", dev, 1e-4, t0)


def check_riccati_vs_mode_ermakov():
    t0 = time.perf_counter()
    p = OscillatorParams(10.0, 1.0, RampSchedule(50.0, 25.0, 5.0), 100.0, 50.0)
    fr = evolve_cbod(p, 5.0, method="riccati").fidelity
    fm = evolve_cbod(p, 5.0, method="mode_ermakov").fidelity
    return _check(
        "width-matrix and frozen-frame methods agree on slow ramps",
        abs(fr - fm),
        1e-6,
        t0,
        detail=f"riccati {fr:.10f}, mode_ermakov {fm:.10f}",
    )


def check_static_ramp_identity():
    t0 = time.perf_counter()
    p = OscillatorParams(10.0, 1.0, RampSchedule(50.0, 0.0, 1.0), 100.0, 50.0)
    dev = abs(dynamic_fidelity(p, 1.0) - 1.0)
    return _check("zero-amplitude ramp evolves with unit fidelity", dev, 1e-10, t0)


def check_cbod_vs_cn_2d(n_pts=64, n_steps=1500):
    t0 = time.perf_counter()
    p = OscillatorParams(10.0, 1.0, RampSchedule(50.0, 25.0, 0.1), 100.0, 50.0)
    Tf = 0.1
    res = evolve_cbod(p, Tf)
    c0 = exact_ground_state(p, 0.0).covariance()
    c1 = exact_ground_state(p, Tf).covariance()
    sig = np.sqrt(np.maximum(np.diag(c0), np.diag(c1)))
    g = go.Grid((n_pts, n_pts), (7.0 * sig[0], 7.0 * sig[1]))
    kin = go.build_hamiltonian(g, (p.m_s, p.m_f))
    xs, xf = (arr.ravel() for arr in g.meshgrid())
    sq_s = go.squeeze_operator(g, 0)
    sq_f = go.squeeze_operator(g, 1)

    def h_of_t(t):
        ks, kf, ki = p.springs_at(t)
        h = kin + sp.diags(0.5 * ks * xs**2 + 0.5 * kf * xf**2 + ki * xs * xf)
        slow, fast = cbod_cd(p, t)
        if slow.coefficient != 0.0:
            h = h + slow.coefficient * sq_s
        if fast.coefficient != 0.0:
            h = h + fast.coefficient * sq_f
        return h.tocsr()

    psi0 = go.sample_state(g, exact_ground_state(p, 0.0).amplitude).normalized()
    out = go.propagate(h_of_t, psi0, Tf, Tf / n_steps)
    targ = go.sample_state(g, exact_ground_state(p, Tf).amplitude).normalized()
    f_cn = abs(go.overlap(targ, out)) ** 2
    return _check(
        "2D evolution vs Crank-Nicolson of the pre-absorption Hamiltonian",
        abs(f_cn - res.fidelity),
        1e-2,
        t0,
        detail=f"CN {f_cn:.6f}, width-matrix {res.fidelity:.6f}",
    )


def check_boa_geometry():
    t0 = time.perf_counter()
    p = OscillatorParams(10.0, 1.0, 100.0, 100.0, 50.0)
    fr = boa_frame(p)
    connection, metric = geometric_quantities(p)
    # displaced-Gaussian overlap deficit gives the fast-state metric by FD
    a = p.m_f * fr.omega_f  # hbar = 1
    delta = 1e-4
    ov = np.exp(-a * delta**2 / 4.0)  # analytic displaced overlap magnitude
    metric_fd = (1.0 - ov**2) / delta**2 * fr.slope**2
    dev = abs(metric_fd - metric) / metric
    dev = max(dev, abs(connection))
    return _check("BOA metric matches displaced-overlap rate; connection is zero", dev, 1e-6, t0)


def check_coulomb_norms():
    t0 = time.perf_counter()
    dev = 0.0
    for n in range(1, 5):
        for l in range(0, n):
            dev = max(dev, abs(cl.radial_norm(cl.HydrogenicState(n, l)) - 1.0))
    for l in (0, 1, 2, 3):
        for n1 in range(l + 1, 5):
            for n2 in range(n1 + 1, 5):
                dev = max(
                    dev,
                    abs(cl.radial_overlap(cl.HydrogenicState(n1, l), cl.HydrogenicState(n2, l))),
                )
    return _check("hydrogenic radial norms and orthogonality", dev, 1e-8, t0)


def check_coulomb_bracket_fd(seed=4):
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    dev = 0.0
    for n in range(1, 4):
        for l in range(0, n):
            s = cl.HydrogenicState(n, l, g=1.3, m_f=0.8)
            nodes = s.node_radii()
            count = 0
            while count < 50:
                r0 = rng.uniform(0.05, 15.0)
                if nodes.size and np.min(np.abs(r0 - nodes)) < 0.05:
                    continue
                count += 1
                h = 1e-6 * s.g
                up = cl.radial_wavefunction(cl.HydrogenicState(n, l, s.g + h, s.m_f), r0)
                dn = cl.radial_wavefunction(cl.HydrogenicState(n, l, s.g - h, s.m_f), r0)
                b_fd = (up - dn) / (2 * h) * s.g / cl.radial_wavefunction(s, r0)
                b = cl.radial_g_derivative(s, r0)
                dev = max(dev, abs(b - b_fd) / max(abs(b), 1e-9))
    return _check("radial g-derivative bracket vs finite differences", dev, 1e-6, t0)


def check_coulomb_berry_zero():
    t0 = time.perf_counter()
    dev = 0.0
    for n in range(1, 5):
        for l in range(0, n):
            s = cl.HydrogenicState(n, l)
            dev = max(dev, abs(cl.berry_connection_numeric(s, 1.0)))
            dev = max(dev, abs(cl.diagonal_cd_expectation(s)))
    return _check("numeric connection and diagonal CD mean vanish", dev, 1e-8, t0)


def check_coulomb_grid_energy():
    t0 = time.perf_counter()
    s = cl.HydrogenicState(1, 0)
    n_pts, r_max = 3000, 30.0
    dr = r_max / n_pts
    g = go.Grid(n_pts, 0.5 * (r_max - dr), centers=0.5 * (r_max + dr))
    h = go.build_hamiltonian(g, s.m_f, lambda r: -s.g / r)
    w, _ = go.lowest_eigenpairs(h, 1)
    exact = cl.hydrogenic_energy(s)
    dev = abs(w[0] - exact) / abs(exact)
    return _check("hydrogenic binding energy vs radial grid", dev, 1e-3, t0)


ALL_CHECKS = (
    check_ramp_endpoints,
    check_frame_reassembly,
    check_overlap_quadrature,
    check_static_fidelity_grid,
    check_cd_endpoints,
    check_frequency_chains,
    check_spectral_cd_two_level,
    check_spectral_cd_vs_squeeze,
    check_ermakov_fixed_point,
    check_ermakov_sudden_jump,
    check_scaled_state_vs_cn,
    check_riccati_vs_mode_ermakov,
    check_static_ramp_identity,
    check_cbod_vs_cn_2d,
    check_boa_geometry,
    check_coulomb_norms,
    check_coulomb_bracket_fd,
    check_coulomb_berry_zero,
    check_coulomb_grid_energy,
)


def run_oracle_suite(checks=ALL_CHECKS):
    """Run every named check; returns the list of OracleCheck results."""
    return [fn() for fn in checks]
