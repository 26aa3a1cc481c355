"""Frames and Gaussian states for the coupled oscillator pair.

The exact route rescales the lab coordinates by quarter powers of the
mass ratio and rotates by the mixing angle alpha, giving two normal
modes of common mass mu = sqrt(m_s m_f).  The Born-Oppenheimer route
keeps the slow coordinate, shifts the fast one to x_t = x_f - slope*x_s,
and softens the slow spring.  Ground states of both routes are centered
Gaussians exp(-x^T A x / 2), so overlaps reduce to 2x2 determinants.
"""

from dataclasses import dataclass, replace

import numpy as np

from .params import UnitSystem


class ImaginaryFrequencyError(ValueError):
    """A requested frame has a non-positive squared frequency."""


# ---------------------------------------------------------------------------
# Gaussian states


@dataclass
class GaussianState1D:
    """psi(x) = exp(log_norm) * exp(i phase) * exp(-a x^2 / 2)."""

    a: complex
    log_norm: float = 0.0
    phase: float = 0.0

    def normalized(self):
        ra = self.a.real
        if ra <= 0.0:
            raise ValueError("state is not normalizable: Re(a) <= 0")
        return replace(self, log_norm=0.25 * np.log(ra / np.pi))

    def amplitude(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(
            self.log_norm + 1j * self.phase - 0.5 * self.a * x**2
        )

    def overlap(self, other):
        denom = np.conj(self.a) + other.a
        pref = np.exp(
            self.log_norm + other.log_norm + 1j * (other.phase - self.phase)
        )
        return pref * np.sqrt(2.0 * np.pi / denom)

    def fidelity(self, other):
        return float(abs(self.overlap(other)) ** 2)


@dataclass
class GaussianState2D:
    """Psi(x) = exp(log_norm) * exp(i phase) * exp(-x^T quad x / 2).

    quad is a symmetric complex 2x2 matrix with positive-definite real
    part; x = (x_s, x_f) in lab coordinates.
    """

    quad: np.ndarray
    log_norm: float = 0.0
    phase: float = 0.0

    def normalized(self):
        re = np.real(self.quad)
        det2 = np.linalg.det(2.0 * re)
        if det2 <= 0.0 or np.trace(re) <= 0.0:
            raise ValueError("state is not normalizable")
        return replace(
            self, log_norm=0.25 * np.log(det2) - 0.5 * np.log(2.0 * np.pi)
        )

    def amplitude(self, x_s, x_f):
        x_s = np.asarray(x_s, dtype=float)
        x_f = np.asarray(x_f, dtype=float)
        q = self.quad
        form = (
            q[0, 0] * x_s**2
            + (q[0, 1] + q[1, 0]) * x_s * x_f
            + q[1, 1] * x_f**2
        )
        return np.exp(self.log_norm + 1j * self.phase - 0.5 * form)

    def covariance(self):
        """Position covariance of |Psi|^2 (needs normalizable state)."""
        return np.linalg.inv(2.0 * np.real(self.quad))

    def overlap(self, other):
        m = np.conj(self.quad) + other.quad
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        pref = np.exp(
            self.log_norm + other.log_norm + 1j * (other.phase - self.phase)
        )
        return pref * 2.0 * np.pi / np.sqrt(det)

    def fidelity(self, other):
        return float(abs(self.overlap(other)) ** 2)


# ---------------------------------------------------------------------------
# Exact normal-mode frame


@dataclass(frozen=True)
class NormalModeFrame:
    """Instantaneous normal modes of the coupled pair.

    lab_to_mode maps lab positions to mode positions; its determinant is
    one, so Gaussian normalizations carry over unchanged.  Mode 1 is the
    stiffer mode (kappa1 >= kappa2) except in the decoupled k_i = 0 case,
    where mode 1 is the scaled slow coordinate by convention.
    """

    alpha: float
    mu: float
    kappa1: float
    kappa2: float
    omega1: float
    omega2: float
    lab_to_mode: np.ndarray


def _scaled_springs(kappa_s, kappa_f, k_i, m_s, m_f):
    cs = np.sqrt(m_f / m_s)
    return kappa_s * cs, kappa_f / cs


def normal_mode_frame(params, t=0.0, units=UnitSystem()):
    """Diagonalize the instantaneous quadratic form at time t."""
    ks, kf, ki = (float(v) for v in params.springs_at(t))
    a, b = _scaled_springs(ks, kf, ki, params.m_s, params.m_f)
    mu = np.sqrt(params.m_s * params.m_f)
    if ki == 0.0:
        alpha = 0.0
        kappa1, kappa2 = a, b
    else:
        alpha = 0.5 * np.arctan2(2.0 * ki, a - b)
        half_gap = 0.5 * np.hypot(a - b, 2.0 * ki)
        kappa1 = 0.5 * (a + b) + half_gap
        kappa2 = 0.5 * (a + b) - half_gap
    if kappa2 <= 0.0 or kappa1 <= 0.0:
        raise ImaginaryFrequencyError(
            f"normal-mode spring not positive at t={t}: "
            f"kappa1={kappa1:.6g}, kappa2={kappa2:.6g}"
        )
    c = (params.m_s / params.m_f) ** 0.25
    scale = np.diag([c, 1.0 / c])
    ca, sa = np.cos(alpha), np.sin(alpha)
    rot = np.array([[ca, sa], [-sa, ca]])
    return NormalModeFrame(
        alpha=float(alpha),
        mu=float(mu),
        kappa1=float(kappa1),
        kappa2=float(kappa2),
        omega1=float(np.sqrt(kappa1 / mu)),
        omega2=float(np.sqrt(kappa2 / mu)),
        lab_to_mode=rot @ scale,
    )


def mode_spring_trajectory(a, b, ki, fallback_alpha=0.0):
    """Continuity-labeled mode springs along sampled scaled springs.

    a, b, ki are arrays of the scaled diagonal springs and the coupling.
    The mixing angle is unwrapped in time so each mode keeps its t=0
    identity even if the instantaneous ordering changes.  Returns
    (alpha, kappa1, kappa2).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ki = np.asarray(ki, dtype=float)
    d = a - b
    if np.all(ki == 0.0):
        alpha = np.full_like(a, fallback_alpha)
    else:
        alpha = 0.5 * np.unwrap(np.arctan2(2.0 * ki, d))
    c2, s2 = np.cos(2.0 * alpha), np.sin(2.0 * alpha)
    mean = 0.5 * (a + b)
    kappa1 = mean + 0.5 * d * c2 + ki * s2
    kappa2 = mean - 0.5 * d * c2 - ki * s2
    return alpha, kappa1, kappa2


def exact_ground_state(params, t=0.0, units=UnitSystem()):
    frame = normal_mode_frame(params, t, units)
    mode_quad = np.diag(
        [
            frame.mu * frame.omega1 / units.hbar,
            frame.mu * frame.omega2 / units.hbar,
        ]
    )
    lab_quad = frame.lab_to_mode.T @ mode_quad @ frame.lab_to_mode
    return GaussianState2D(quad=lab_quad.astype(complex)).normalized()


def exact_energy(params, t=0.0, i=0, j=0, units=UnitSystem()):
    """Exact level energy hbar*omega1*(i+1/2) + hbar*omega2*(j+1/2)."""
    frame = normal_mode_frame(params, t, units)
    return units.hbar * (
        frame.omega1 * (i + 0.5) + frame.omega2 * (j + 0.5)
    )


# ---------------------------------------------------------------------------
# Born-Oppenheimer frame


@dataclass(frozen=True)
class BOAFrame:
    """Fast coordinate shift and effective springs of the adiabatic route.

    slope is the equilibrium displacement ratio k_i/kappa_f; the fast
    oscillator lives in x_t = x_f - slope*x_s and the slow one keeps x_s
    with the softened spring kappa_s_eff = kappa_s - k_i^2/kappa_f.
    """

    slope: float
    kappa_s_eff: float
    omega_s: float
    omega_f: float


def boa_frame(params, t=0.0):
    ks, kf, ki = (float(v) for v in params.springs_at(t))
    if kf <= 0.0:
        raise ImaginaryFrequencyError(f"kappa_f={kf:.6g} <= 0 at t={t}")
    slope = ki / kf
    ks_eff = ks - ki**2 / kf
    if ks_eff <= 0.0:
        raise ImaginaryFrequencyError(
            f"effective slow spring {ks_eff:.6g} <= 0 at t={t}"
        )
    return BOAFrame(
        slope=slope,
        kappa_s_eff=ks_eff,
        omega_s=float(np.sqrt(ks_eff / params.m_s)),
        omega_f=float(np.sqrt(kf / params.m_f)),
    )


def boa_ground_state(params, t=0.0, units=UnitSystem()):
    frame = boa_frame(params, t)
    shear = np.array([[1.0, 0.0], [-frame.slope, 1.0]])
    diag = np.diag(
        [
            params.m_s * frame.omega_s / units.hbar,
            params.m_f * frame.omega_f / units.hbar,
        ]
    )
    lab_quad = shear.T @ diag @ shear
    return GaussianState2D(quad=lab_quad.astype(complex)).normalized()


def boa_energy(params, t=0.0, n=0, v=0, units=UnitSystem()):
    """Product-state energy hbar*omega_f*(n+1/2) + hbar*omega_s*(v+1/2)."""
    frame = boa_frame(params, t)
    return units.hbar * (
        frame.omega_f * (n + 0.5) + frame.omega_s * (v + 0.5)
    )


def static_fidelity(params, t=0.0, units=UnitSystem()):
    """|<exact ground | BOA ground>|^2 at fixed time t."""
    return exact_ground_state(params, t, units).fidelity(
        boa_ground_state(params, t, units)
    )


def geometric_quantities(params, t=0.0, units=UnitSystem()):
    """Berry connection and metric of the fast ground state.

    The fast ground state depends on x_s only through the real shift
    x_t = x_f - slope*x_s, so the connection <phi|i d/dx_s|phi> vanishes
    identically and the metric <d phi|d phi> is slope^2 * m_f omega_f /
    (2 hbar).  Returns (connection, metric).
    """
    frame = boa_frame(params, t)
    metric = (
        frame.slope**2 * params.m_f * frame.omega_f / (2.0 * units.hbar)
    )
    return 0.0, float(metric)


# ---------------------------------------------------------------------------
# Quadrature oracle


def overlap_by_quadrature(state_a, state_b, n_nodes=200, half_widths=8.0):
    """<a|b> by tensor-product Gauss-Legendre quadrature.

    Integrates conj(a)*b over a box of half_widths marginal standard
    deviations per axis (the wider of the two states on each axis).
    Independent of the determinant overlap formula; used to check it.
    """
    sig_a = np.sqrt(np.diag(state_a.covariance()))
    sig_b = np.sqrt(np.diag(state_b.covariance()))
    half = half_widths * np.maximum(sig_a, sig_b)
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    xs = half[0] * nodes
    ys = half[1] * nodes
    wx = half[0] * weights
    wy = half[1] * weights
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    vals = np.conj(state_a.amplitude(gx, gy)) * state_b.amplitude(gx, gy)
    return complex(wx @ vals @ wy)
