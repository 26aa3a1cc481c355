"""Hot loops, compiled with numba when available.

Set ``CBOD_NUMBA=0`` in the environment to force the pure numpy/scipy
fallback implementations (same semantics, slower).  The flag is read once
at import time; ``USING_NUMBA`` records which path is active.
"""

import os

import numpy as np

_FLAG = os.environ.get("CBOD_NUMBA", "1").strip().lower()
_WANT_NUMBA = _FLAG not in ("0", "false", "off", "no")

USING_NUMBA = False
if _WANT_NUMBA:
    try:
        from numba import njit

        USING_NUMBA = True
    except ImportError:
        USING_NUMBA = False


def _ermakov_rk4_impl(omega_sq, omega0_sq, h, n_steps):
    """RK4 for b'' = -omega_sq(t) b + omega0_sq / b^3 plus the phase
    integral phi' = 1/b^2, from b(0)=1, b'(0)=0.

    omega_sq holds samples on the half-step grid t_j = j*h/2,
    j = 0..2*n_steps.  Returns (b, bdot, phase, status); status is -1 on
    success, otherwise the step index where b stopped being positive.
    """
    b = np.empty(n_steps + 1)
    bdot = np.empty(n_steps + 1)
    phase = np.empty(n_steps + 1)
    bk = 1.0
    vk = 0.0
    pk = 0.0
    b[0] = bk
    bdot[0] = vk
    phase[0] = pk
    for k in range(n_steps):
        w0 = omega_sq[2 * k]
        wm = omega_sq[2 * k + 1]
        w1 = omega_sq[2 * k + 2]

        if bk <= 0.0:
            return b, bdot, phase, k
        a1 = -w0 * bk + omega0_sq / bk**3
        p1 = 1.0 / bk**2

        b2 = bk + 0.5 * h * vk
        if b2 <= 0.0:
            return b, bdot, phase, k
        v2 = vk + 0.5 * h * a1
        a2 = -wm * b2 + omega0_sq / b2**3
        p2 = 1.0 / b2**2

        b3 = bk + 0.5 * h * v2
        if b3 <= 0.0:
            return b, bdot, phase, k
        v3 = vk + 0.5 * h * a2
        a3 = -wm * b3 + omega0_sq / b3**3
        p3 = 1.0 / b3**2

        b4 = bk + h * v3
        if b4 <= 0.0:
            return b, bdot, phase, k
        v4 = vk + h * a3
        a4 = -w1 * b4 + omega0_sq / b4**3
        p4 = 1.0 / b4**2

        bk = bk + h * (vk + 2.0 * v2 + 2.0 * v3 + v4) / 6.0
        vk = vk + h * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
        pk = pk + h * (p1 + 2.0 * p2 + 2.0 * p3 + p4) / 6.0
        if bk <= 0.0:
            return b, bdot, phase, k
        b[k + 1] = bk
        bdot[k + 1] = vk
        phase[k + 1] = pk
    return b, bdot, phase, -1


def _riccati_rk4_impl(
    k11, k12, k22, a11, a12, a22, im1, im2, hbar, h, n_steps, check_stride
):
    """RK4 for the Gaussian width matrix of a quadratic Hamiltonian.

    Integrates A' = i(K(t)/hbar - hbar A M^-1 A) for the symmetric
    complex 2x2 matrix A of exp(-x^T A x / 2), plus the global phase
    theta' = -(hbar/2) Re tr(M^-1 A).  K components are sampled on the
    half-step grid.  Every check_stride-th step the defect of the stored
    solution (central difference minus right-hand side) is measured;
    its maximum is returned.  status is -1 on success, else the index
    of the step where the solution stopped being finite.
    """
    theta = 0.0
    defect = 0.0
    p11 = a11
    p12 = a12
    p22 = a22
    for k in range(n_steps):
        c11 = a11
        c12 = a12
        c22 = a22

        q11 = k11[2 * k]
        q12 = k12[2 * k]
        q22 = k22[2 * k]
        f11a = 1j * (q11 / hbar - hbar * (a11 * a11 * im1 + a12 * a12 * im2))
        f12a = 1j * (q12 / hbar - hbar * (a11 * a12 * im1 + a12 * a22 * im2))
        f22a = 1j * (q22 / hbar - hbar * (a12 * a12 * im1 + a22 * a22 * im2))
        ta = -(hbar / 2.0) * (a11 * im1 + a22 * im2).real

        q11 = k11[2 * k + 1]
        q12 = k12[2 * k + 1]
        q22 = k22[2 * k + 1]
        b11 = a11 + 0.5 * h * f11a
        b12 = a12 + 0.5 * h * f12a
        b22 = a22 + 0.5 * h * f22a
        f11b = 1j * (q11 / hbar - hbar * (b11 * b11 * im1 + b12 * b12 * im2))
        f12b = 1j * (q12 / hbar - hbar * (b11 * b12 * im1 + b12 * b22 * im2))
        f22b = 1j * (q22 / hbar - hbar * (b12 * b12 * im1 + b22 * b22 * im2))
        tb = -(hbar / 2.0) * (b11 * im1 + b22 * im2).real

        b11 = a11 + 0.5 * h * f11b
        b12 = a12 + 0.5 * h * f12b
        b22 = a22 + 0.5 * h * f22b
        f11c = 1j * (q11 / hbar - hbar * (b11 * b11 * im1 + b12 * b12 * im2))
        f12c = 1j * (q12 / hbar - hbar * (b11 * b12 * im1 + b12 * b22 * im2))
        f22c = 1j * (q22 / hbar - hbar * (b12 * b12 * im1 + b22 * b22 * im2))
        tc = -(hbar / 2.0) * (b11 * im1 + b22 * im2).real

        q11 = k11[2 * k + 2]
        q12 = k12[2 * k + 2]
        q22 = k22[2 * k + 2]
        b11 = a11 + h * f11c
        b12 = a12 + h * f12c
        b22 = a22 + h * f22c
        f11d = 1j * (q11 / hbar - hbar * (b11 * b11 * im1 + b12 * b12 * im2))
        f12d = 1j * (q12 / hbar - hbar * (b11 * b12 * im1 + b12 * b22 * im2))
        f22d = 1j * (q22 / hbar - hbar * (b12 * b12 * im1 + b22 * b22 * im2))
        td = -(hbar / 2.0) * (b11 * im1 + b22 * im2).real

        a11 = a11 + h * (f11a + 2.0 * f11b + 2.0 * f11c + f11d) / 6.0
        a12 = a12 + h * (f12a + 2.0 * f12b + 2.0 * f12c + f12d) / 6.0
        a22 = a22 + h * (f22a + 2.0 * f22b + 2.0 * f22c + f22d) / 6.0
        theta = theta + h * (ta + 2.0 * tb + 2.0 * tc + td) / 6.0
        if not (
            np.isfinite(a11.real)
            and np.isfinite(a11.imag)
            and np.isfinite(a12.real)
            and np.isfinite(a12.imag)
            and np.isfinite(a22.real)
            and np.isfinite(a22.imag)
        ):
            return a11, a12, a22, theta, defect, k

        if k >= 1 and k % check_stride == 0:
            q11 = k11[2 * k]
            q12 = k12[2 * k]
            q22 = k22[2 * k]
            g11 = 1j * (
                q11 / hbar - hbar * (c11 * c11 * im1 + c12 * c12 * im2)
            )
            g12 = 1j * (
                q12 / hbar - hbar * (c11 * c12 * im1 + c12 * c22 * im2)
            )
            g22 = 1j * (
                q22 / hbar - hbar * (c12 * c12 * im1 + c22 * c22 * im2)
            )
            d11 = (a11 - p11) / (2.0 * h) - g11
            d12 = (a12 - p12) / (2.0 * h) - g12
            d22 = (a22 - p22) / (2.0 * h) - g22
            m = max(abs(d11), abs(d12), abs(d22))
            if m > defect:
                defect = m
        p11 = c11
        p12 = c12
        p22 = c22
    return a11, a12, a22, theta, defect, -1


def _tridiag_solve_numpy(dl, d, du, rhs):
    """Solve a tridiagonal system; fallback uses LAPACK via scipy."""
    from scipy.linalg import solve_banded

    n = d.shape[0]
    ab = np.zeros((3, n), dtype=np.complex128)
    ab[0, 1:] = du[: n - 1]
    ab[1, :] = d
    ab[2, : n - 1] = dl[: n - 1]
    return solve_banded((1, 1), ab, rhs)


def _tridiag_solve_impl(dl, d, du, rhs):
    """Thomas algorithm.  dl[i] couples row i+1 to i, du[i] row i to i+1."""
    n = d.shape[0]
    cp = np.empty(n - 1, dtype=np.complex128)
    dp = np.empty(n, dtype=np.complex128)
    x = np.empty(n, dtype=np.complex128)
    denom = d[0]
    cp[0] = du[0] / denom
    dp[0] = rhs[0] / denom
    for i in range(1, n - 1):
        denom = d[i] - dl[i - 1] * cp[i - 1]
        cp[i] = du[i] / denom
        dp[i] = (rhs[i] - dl[i - 1] * dp[i - 1]) / denom
    denom = d[n - 1] - dl[n - 2] * cp[n - 2]
    dp[n - 1] = (rhs[n - 1] - dl[n - 2] * dp[n - 2]) / denom
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def _tridiag_matvec_impl(dl, d, du, v):
    n = d.shape[0]
    out = np.empty(n, dtype=np.complex128)
    out[0] = d[0] * v[0] + du[0] * v[1]
    for i in range(1, n - 1):
        out[i] = dl[i - 1] * v[i - 1] + d[i] * v[i] + du[i] * v[i + 1]
    out[n - 1] = dl[n - 2] * v[n - 2] + d[n - 1] * v[n - 1]
    return out


def _tridiag_matvec_numpy(dl, d, du, v):
    out = d * v
    out[:-1] = out[:-1] + du * v[1:]
    out[1:] = out[1:] + dl * v[:-1]
    return out


if USING_NUMBA:
    ermakov_rk4 = njit(cache=True)(_ermakov_rk4_impl)
    riccati_rk4 = njit(cache=True)(_riccati_rk4_impl)
    tridiag_solve = njit(cache=True)(_tridiag_solve_impl)
    tridiag_matvec = njit(cache=True)(_tridiag_matvec_impl)
else:
    ermakov_rk4 = _ermakov_rk4_impl
    riccati_rk4 = _riccati_rk4_impl
    tridiag_solve = _tridiag_solve_numpy
    tridiag_matvec = _tridiag_matvec_numpy
