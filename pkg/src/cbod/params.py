"""Parameter records, ramp schedules, and validity checks.

Every time-dependent spring constant is represented by a coefficient
object exposing ``value``, ``d1``, ``d2`` (the value and its first two
time derivatives).  Two concrete coefficients exist: :class:`Constant`
and :class:`RampSchedule`.  All three methods accept scalars or numpy
arrays of times.
"""

from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """Raised when a schedule is evaluated outside its time window."""


class PhysicsValidityError(ValueError):
    """Raised when parameters violate the real-frequency conditions."""


@dataclass(frozen=True)
class UnitSystem:
    """Unit conventions; only hbar is adjustable."""

    hbar: float = 1.0


@dataclass(frozen=True)
class Constant:
    """Time-independent coefficient."""

    k: float

    def value(self, t):
        return self.k + np.zeros_like(np.asarray(t, dtype=float))

    def d1(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def d2(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class RampSchedule:
    """Smooth monotone ramp from k0 at t=0 to k0+k1 at t=Tf.

    K(t) = k0 + (k1/Tf) * (t - (Tf/2pi) sin(2pi t/Tf))

    The first and second derivatives vanish at both endpoints, so a
    Hamiltonian driven by this schedule starts and ends quiescent.
    Outside [0, Tf] the coefficient methods extend the ramp by constants
    (derivatives zero); :func:`ramp_eval` is the strict-domain accessor.
    """

    k0: float
    k1: float
    Tf: float

    def __post_init__(self):
        if self.Tf <= 0.0:
            raise ValueError("ramp duration must be positive")

    def _clamped(self, t):
        return np.clip(np.asarray(t, dtype=float), 0.0, self.Tf)

    def _phase(self, t):
        # reduce the argument by whole periods before the trig call so the
        # endpoint t = Tf lands on exactly zero phase (sin(2*pi) as a float
        # is ~ -2.4e-16, which the 1/Tf**2 derivative scale would amplify)
        u = self._clamped(t) / self.Tf
        return u, 2.0 * np.pi * (u - np.round(u))

    def value(self, t):
        u, ph = self._phase(t)
        return self.k0 + self.k1 * (u - np.sin(ph) / (2.0 * np.pi))

    def d1(self, t):
        _, ph = self._phase(t)
        return (self.k1 / self.Tf) * (1.0 - np.cos(ph))

    def d2(self, t):
        _, ph = self._phase(t)
        return (self.k1 * 2.0 * np.pi / self.Tf**2) * np.sin(ph)


def as_coefficient(k):
    """Coerce a float or coefficient object to a coefficient."""
    if isinstance(k, (Constant, RampSchedule)):
        return k
    if np.isscalar(k):
        return Constant(float(k))
    raise TypeError(f"cannot interpret {k!r} as a time coefficient")


def ramp_eval(schedule, t):
    """Evaluate a ramp and its two derivatives at time t.

    Raises DomainError for t outside [0, Tf]; the tuple is
    (K, dK/dt, d2K/dt2).
    """
    t = float(t)
    if t < 0.0 or t > schedule.Tf:
        raise DomainError(
            f"t={t} outside the ramp window [0, {schedule.Tf}]"
        )
    return (
        float(schedule.value(t)),
        float(schedule.d1(t)),
        float(schedule.d2(t)),
    )


@dataclass(frozen=True)
class OscillatorParams:
    """Two coupled oscillators: slow (m_s) and fast (m_f).

    kappa_s and kappa_f are the full diagonal spring constants (bare
    spring plus interaction spring) and k_i the bilinear coupling, so
    the potential is

        V = kappa_s x_s^2 / 2 + kappa_f x_f^2 / 2 - k_i x_s x_f.

    Springs may be floats or coefficient objects.
    """

    m_s: float
    m_f: float
    kappa_s: object
    kappa_f: object
    k_i: object

    def __post_init__(self):
        if self.m_s <= 0.0 or self.m_f <= 0.0:
            raise ValueError("masses must be positive")
        object.__setattr__(self, "kappa_s", as_coefficient(self.kappa_s))
        object.__setattr__(self, "kappa_f", as_coefficient(self.kappa_f))
        object.__setattr__(self, "k_i", as_coefficient(self.k_i))

    @property
    def mass_ratio(self):
        return self.m_f / self.m_s

    def springs_at(self, t):
        """(kappa_s, kappa_f, k_i) values at time(s) t."""
        return (
            self.kappa_s.value(t),
            self.kappa_f.value(t),
            self.k_i.value(t),
        )


@dataclass(frozen=True)
class ValidityReport:
    """Outcome of a parameter validity scan over a time window."""

    ok: bool
    first_violation_time: float | None = None
    reason: str | None = None


def validate(params, Tf, samples=201):
    """Scan [0, Tf] for violations of the real-frequency conditions.

    Checks kappa_f > 0 and kappa_s*kappa_f > k_i**2 on a uniform grid
    (the second implies the slow effective spring kappa_s - k_i^2/kappa_f
    stays positive).  Violations are reported, not raised: boundary-case
    parameter sets are data for sweep experiments.
    """
    ts = np.linspace(0.0, Tf, samples)
    ks, kf, ki = params.springs_at(ts)
    bad_f = kf <= 0.0
    if np.any(bad_f):
        i = int(np.argmax(bad_f))
        return ValidityReport(False, float(ts[i]), "kappa_f <= 0")
    bad_s = ks <= 0.0
    if np.any(bad_s):
        i = int(np.argmax(bad_s))
        return ValidityReport(False, float(ts[i]), "kappa_s <= 0")
    gap = ks * kf - ki**2
    bad = gap <= 0.0
    if np.any(bad):
        i = int(np.argmax(bad))
        return ValidityReport(
            False, float(ts[i]), "kappa_s*kappa_f <= k_i**2"
        )
    return ValidityReport(True)
