"""Counterdiabatic control terms for driven oscillator frames.

A single harmonic oscillator with ramped frequency omega(t) is kept in
its instantaneous ground state by adding the squeezing term

    H_cd = -(omega'/4 omega) * (x p + p x),

and absorbing that term into a unitary rescaling shifts the working
frequency to

    omega_T^2 = omega^2 - 3 omega'^2/(4 omega^2) + omega''/(2 omega).

This module evaluates those quantities for the exact normal modes and
for the Born-Oppenheimer pair, exposes the effective springs of the
approximately-driven coupled system, and provides the generic spectral
construction of the CD Hamiltonian for arbitrary Hermitian matrices.

Frequency derivatives are evaluated analytically by chaining the ramp
derivatives through the frame formulas; finite differences of the frame
frequencies (``fd_derivative``) serve as the independent cross-check.
"""

from dataclasses import dataclass

import numpy as np

from .oscillators import ImaginaryFrequencyError, mode_spring_trajectory


class DegeneracyError(ValueError):
    """Spectral CD construction hit a (near-)degenerate eigenpair."""


@dataclass(frozen=True)
class SqueezeCD:
    """CD term coefficient * (x p + p x) acting on one coordinate."""

    coefficient: float
    coordinate: str


@dataclass(frozen=True)
class EffectiveSprings:
    """Springs of the coupled system after absorbing both CD terms.

    gamma_s and gamma_f replace kappa_s and kappa_f (the coupling k_i is
    untouched); omega_t_s_sq and omega_t_f_sq are the transformed
    frequencies of the two Born-Oppenheimer oscillators from which the
    gammas are assembled.
    """

    gamma_s: float
    gamma_f: float
    omega_t_s_sq: float
    omega_t_f_sq: float


# ---------------------------------------------------------------------------
# Derivative chains (all vectorized over time arrays)


def _coeff_series(coeff, ts):
    return (
        np.asarray(coeff.value(ts), dtype=float),
        np.asarray(coeff.d1(ts), dtype=float),
        np.asarray(coeff.d2(ts), dtype=float),
    )


def _omega_chain(kappa, dk, d2k, mass):
    """(omega, omega', omega'') from a spring and its derivatives."""
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa <= 0.0):
        raise ImaginaryFrequencyError("spring went non-positive")
    w = np.sqrt(kappa / mass)
    dw = dk / (2.0 * mass * w)
    d2w = (d2k / mass - 2.0 * dw**2) / (2.0 * w)
    return w, dw, d2w


def boa_frequency_tables(params, ts):
    """omega_s and omega_f with two derivatives each, on times ts.

    Returns ((ws, dws, d2ws), (wf, dwf, d2wf)).
    """
    ts = np.asarray(ts, dtype=float)
    ks, dks, d2ks = _coeff_series(params.kappa_s, ts)
    kf, dkf, d2kf = _coeff_series(params.kappa_f, ts)
    ki, dki, d2ki = _coeff_series(params.k_i, ts)
    if np.any(kf <= 0.0):
        raise ImaginaryFrequencyError("kappa_f went non-positive")
    u = ki**2 / kf
    du = 2.0 * ki * dki / kf - ki**2 * dkf / kf**2
    d2u = (
        (2.0 * dki**2 + 2.0 * ki * d2ki) / kf
        - 4.0 * ki * dki * dkf / kf**2
        - ki**2 * d2kf / kf**2
        + 2.0 * ki**2 * dkf**2 / kf**3
    )
    slow = _omega_chain(ks - u, dks - du, d2ks - d2u, params.m_s)
    fast = _omega_chain(kf, dkf, d2kf, params.m_f)
    return slow, fast


def mode_frequency_tables(params, ts):
    """Normal-mode omega_1 and omega_2 with two derivatives, on times ts.

    Modes are labeled stiff-first at each instant (matching
    normal_mode_frame); with k_i identically zero the labels follow the
    scaled lab axes instead.
    """
    ts = np.asarray(ts, dtype=float)
    ks, dks, d2ks = _coeff_series(params.kappa_s, ts)
    kf, dkf, d2kf = _coeff_series(params.kappa_f, ts)
    ki, dki, d2ki = _coeff_series(params.k_i, ts)
    cs = np.sqrt(params.m_f / params.m_s)
    mu = np.sqrt(params.m_s * params.m_f)
    a, da, d2a = ks * cs, dks * cs, d2ks * cs
    b, db, d2b = kf / cs, dkf / cs, d2kf / cs
    if np.all(ki == 0.0):
        one = _omega_chain(a, da, d2a, mu)
        two = _omega_chain(b, db, d2b, mu)
        return one, two
    d, dd, d2d = a - b, da - db, d2a - d2b
    r = np.hypot(d, 2.0 * ki)
    if np.any(r == 0.0):
        raise DegeneracyError("mode springs are degenerate (r = 0)")
    dr = (d * dd + 4.0 * ki * dki) / r
    d2r = (dd**2 + d * d2d + 4.0 * dki**2 + 4.0 * ki * d2ki - dr**2) / r
    mean, dmean, d2mean = (
        0.5 * (a + b),
        0.5 * (da + db),
        0.5 * (d2a + d2b),
    )
    one = _omega_chain(mean + 0.5 * r, dmean + 0.5 * dr, d2mean + 0.5 * d2r, mu)
    two = _omega_chain(mean - 0.5 * r, dmean - 0.5 * dr, d2mean - 0.5 * d2r, mu)
    return one, two


def fd_derivative(freq_of_t, t, h, order=1, richardson=True):
    """Centered finite-difference derivative of a scalar function.

    The oracle against which the analytic chains are tested; one level
    of Richardson extrapolation by default.
    """

    def first(step):
        return (freq_of_t(t + step) - freq_of_t(t - step)) / (2.0 * step)

    def second(step):
        return (
            freq_of_t(t + step)
            - 2.0 * freq_of_t(t)
            + freq_of_t(t - step)
        ) / step**2

    est = first if order == 1 else second
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if not richardson:
        return est(h)
    return (4.0 * est(0.5 * h) - est(h)) / 3.0


# ---------------------------------------------------------------------------
# CD terms and effective springs


def _squeeze_coeff(w, dw):
    return -dw / (4.0 * w)


def exact_cd(params, t):
    """CD coefficients for the two exact normal modes at time t."""
    (w1, dw1, _), (w2, dw2, _) = mode_frequency_tables(params, t)
    return (
        SqueezeCD(float(_squeeze_coeff(w1, dw1)), "mode1"),
        SqueezeCD(float(_squeeze_coeff(w2, dw2)), "mode2"),
    )


def _transformed_sq(w, dw, d2w):
    return w**2 - 3.0 * dw**2 / (4.0 * w**2) + d2w / (2.0 * w)


def transformed_frequencies(params, t):
    """(omega_T1^2, omega_T2^2) for the exact normal modes at time t."""
    one, two = mode_frequency_tables(params, t)
    return float(_transformed_sq(*one)), float(_transformed_sq(*two))


def cbod_cd(params, t):
    """Per-subsystem CD coefficients of the Born-Oppenheimer pair."""
    (ws, dws, _), (wf, dwf, _) = boa_frequency_tables(params, t)
    return (
        SqueezeCD(float(_squeeze_coeff(ws, dws)), "slow"),
        SqueezeCD(float(_squeeze_coeff(wf, dwf)), "fast"),
    )


def gamma_spring_tables(params, ts):
    """Effective springs (gamma_s, gamma_f) on an array of times.

    gamma_f is m_f times the transformed fast frequency squared.
    gamma_s additionally carries the correction from absorbing the fast
    CD momentum shift, which rescales with the equilibrium slope
    k_i/kappa_f:

        gamma_s = kappa_s - 3 m_s ws'^2/(4 ws^2) + m_s ws''/(2 ws)
                  - m_f wf'^2 k_i^2/(4 wf^2 kappa_f^2).
    """
    ts = np.asarray(ts, dtype=float)
    ks = np.asarray(params.kappa_s.value(ts), dtype=float)
    kf = np.asarray(params.kappa_f.value(ts), dtype=float)
    ki = np.asarray(params.k_i.value(ts), dtype=float)
    (ws, dws, d2ws), (wf, dwf, d2wf) = boa_frequency_tables(params, ts)
    gamma_s = (
        ks
        - 3.0 * params.m_s * dws**2 / (4.0 * ws**2)
        + params.m_s * d2ws / (2.0 * ws)
        - params.m_f * dwf**2 * ki**2 / (4.0 * wf**2 * kf**2)
    )
    gamma_f = params.m_f * _transformed_sq(wf, dwf, d2wf)
    return gamma_s, gamma_f


def cbod_effective_springs(params, t):
    """Effective springs and transformed frequencies at a single time."""
    t_arr = np.asarray([float(t)])
    gs, gf = gamma_spring_tables(params, t_arr)
    (ws, dws, d2ws), (wf, dwf, d2wf) = boa_frequency_tables(params, t_arr)
    return EffectiveSprings(
        gamma_s=float(gs[0]),
        gamma_f=float(gf[0]),
        omega_t_s_sq=float(_transformed_sq(ws, dws, d2ws)[0]),
        omega_t_f_sq=float(_transformed_sq(wf, dwf, d2wf)[0]),
    )


def gamma_mode_tables(params, ts):
    """Instantaneous normal modes of the gamma-driven Hamiltonian.

    Returns (alpha, omega1_sq, omega2_sq, valid) on the sampled times,
    with continuity labeling of the modes.  valid flags times where the
    effective quadratic form stays positive (gamma_s*gamma_f > k_i^2);
    transient violations make one squared mode frequency negative, which
    the time evolution tolerates.
    """
    ts = np.asarray(ts, dtype=float)
    gs, gf = gamma_spring_tables(params, ts)
    ki = np.asarray(params.k_i.value(ts), dtype=float)
    cs = np.sqrt(params.m_f / params.m_s)
    mu = np.sqrt(params.m_s * params.m_f)
    alpha, k1, k2 = mode_spring_trajectory(gs * cs, gf / cs, ki)
    valid = (gs * gf - ki**2 > 0.0) & (gf > 0.0)
    return alpha, k1 / mu, k2 / mu, valid


# ---------------------------------------------------------------------------
# Spectral construction


def spectral_cd_matrix(h0, dh0_dt, hbar=1.0, degeneracy_tol=1e-9):
    """CD Hamiltonian of a Hermitian matrix pencil.

    Builds

        H_1 = i hbar sum_{m != n} P_m (dH_0/dt) P_n / (eps_n - eps_m)

    from a dense eigendecomposition.  The result is Hermitian with zero
    diagonal in the instantaneous eigenbasis.  Raises DegeneracyError if
    any adjacent eigenvalue gap is below degeneracy_tol times the
    spectral range.
    """
    h0 = np.asarray(h0)
    dh0 = np.asarray(dh0_dt)
    w, v = np.linalg.eigh(h0)
    spread = float(w[-1] - w[0])
    if spread == 0.0:
        raise DegeneracyError("spectrum is a single point")
    gaps = np.diff(w)
    i = int(np.argmin(gaps))
    if gaps[i] < degeneracy_tol * spread:
        raise DegeneracyError(
            f"eigenvalues {i} and {i + 1} nearly degenerate: "
            f"{w[i]:.12g} vs {w[i + 1]:.12g}"
        )
    g = v.conj().T @ dh0 @ v
    denom = w[None, :] - w[:, None]
    np.fill_diagonal(denom, np.inf)
    h1_eig = 1j * hbar * g / denom
    h1 = v @ h1_eig @ v.conj().T
    return 0.5 * (h1 + h1.conj().T)
