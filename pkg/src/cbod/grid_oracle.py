"""Independent real-space checks: finite differences plus Crank-Nicolson.

Everything here deliberately avoids the closed-form machinery of the
other modules: Hamiltonians are assembled as sparse central-difference
matrices on hard-wall grids, eigenpairs come from dense or Lanczos
solvers, and time evolution uses the unconditionally stable midpoint
Crank-Nicolson update

    (1 + i dt H/2 hbar) psi_{n+1} = (1 - i dt H/2 hbar) psi_n.

Analytic results elsewhere in the package are tested against these
routines, never the other way around.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.sparse.linalg import eigsh, splu

from . import _kernels


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid with hard walls just outside the end points.

    Axis i spans centers[i] +- half_widths[i] with shape[i] points and
    spacing 2*half_widths[i]/(shape[i]-1).  The wavefunction is assumed
    to vanish one spacing outside each end (Dirichlet walls).
    """

    shape: tuple
    half_widths: tuple
    centers: tuple = None

    def __post_init__(self):
        if np.isscalar(self.shape):
            object.__setattr__(self, "shape", (int(self.shape),))
        else:
            object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        if np.isscalar(self.half_widths):
            object.__setattr__(self, "half_widths", (float(self.half_widths),))
        else:
            object.__setattr__(
                self, "half_widths", tuple(float(w) for w in self.half_widths)
            )
        if self.centers is None:
            object.__setattr__(self, "centers", (0.0,) * len(self.shape))
        elif np.isscalar(self.centers):
            object.__setattr__(self, "centers", (float(self.centers),))
        else:
            object.__setattr__(
                self, "centers", tuple(float(c) for c in self.centers)
            )
        if len(self.half_widths) != len(self.shape) or len(self.centers) != len(
            self.shape
        ):
            raise ValueError("axis specs must all have the same length")
        if any(n < 16 for n in self.shape):
            raise ValueError("need at least 16 points per axis")
        if any(w <= 0.0 for w in self.half_widths):
            raise ValueError("half-widths must be positive")

    @property
    def ndim(self):
        return len(self.shape)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def spacing(self):
        return tuple(
            2.0 * w / (n - 1) for w, n in zip(self.half_widths, self.shape)
        )

    def axes(self):
        return [
            c + np.linspace(-w, w, n)
            for c, w, n in zip(self.centers, self.half_widths, self.shape)
        ]

    def meshgrid(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def weights(self):
        """Flattened tensor-product trapezoid weights."""
        ws = []
        for dx, n in zip(self.spacing, self.shape):
            w = np.full(n, dx)
            w[0] = w[-1] = 0.5 * dx
            ws.append(w)
        out = ws[0]
        for w in ws[1:]:
            out = np.outer(out, w).ravel()
        return out


@dataclass
class GridState:
    """Complex amplitudes on a grid, stored flat in C order."""

    grid: Grid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def norm(self):
        w = self.grid.weights()
        return float(np.sqrt(np.real(np.sum(w * np.abs(self.values) ** 2))))

    def normalized(self):
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero state")
        return GridState(self.grid, self.values / n, dict(self.meta))

    def boundary_fraction(self, cells=2):
        """Probability within `cells` points of any wall, over total."""
        prob = (np.abs(self.values) ** 2 * self.grid.weights()).reshape(
            self.grid.shape
        )
        total = float(prob.sum())
        if total == 0.0:
            return 0.0
        inner = prob
        for ax, n in enumerate(self.grid.shape):
            sl = [slice(None)] * self.grid.ndim
            sl[ax] = slice(cells, n - cells)
            inner = inner[tuple(sl)]
        return float((total - inner.sum()) / total)


def overlap(state_a, state_b):
    """Trapezoid-rule inner product <a|b> on a shared grid."""
    if state_a.grid != state_b.grid:
        raise ValueError("states live on different grids")
    w = state_a.grid.weights()
    return complex(np.sum(w * np.conj(state_a.values) * state_b.values))


def sample_state(grid, fn):
    """GridState from a callable of the meshgrid coordinate arrays."""
    vals = np.asarray(fn(*grid.meshgrid()), dtype=complex)
    return GridState(grid, vals.ravel())


def _axis_operator(grid, mat, axis):
    """Embed a single-axis sparse operator into the full tensor space."""
    ops = []
    for i, n in enumerate(grid.shape):
        ops.append(mat if i == axis else sp.identity(n, format="csr"))
    out = ops[0]
    for m in ops[1:]:
        out = sp.kron(out, m, format="csr")
    return out


def _second_derivative(n, dx):
    main = np.full(n, -2.0) / dx**2
    off = np.ones(n - 1) / dx**2
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


def build_hamiltonian(grid, masses, potential=None, hbar=1.0):
    """Central-difference Hamiltonian with hard walls, as sparse CSR.

    masses is one mass per axis (or a scalar); potential is either a
    callable of the meshgrid arrays or a precomputed array over the
    grid.  Kinetic terms are second-order three-point stencils.
    """
    if np.isscalar(masses):
        masses = (float(masses),) * grid.ndim
    if len(masses) != grid.ndim:
        raise ValueError("one mass per axis required")
    h = sp.csr_matrix((grid.size, grid.size), dtype=float)
    for ax, (m, dx, n) in enumerate(zip(masses, grid.spacing, grid.shape)):
        t = (-(hbar**2) / (2.0 * m)) * _second_derivative(n, dx)
        h = h + _axis_operator(grid, t, ax)
    if potential is not None:
        if callable(potential):
            v = np.asarray(potential(*grid.meshgrid()), dtype=float).ravel()
        else:
            v = np.asarray(potential, dtype=float).ravel()
        if v.size != grid.size:
            raise ValueError("potential has the wrong size")
        bad = ~np.isfinite(v)
        if np.any(bad):
            flat = int(np.flatnonzero(bad)[0])
            idx = np.unravel_index(flat, grid.shape)
            point = tuple(float(ax[i]) for ax, i in zip(grid.axes(), idx))
            raise ValueError(
                f"potential is not finite ({v[flat]!r}) at grid point {point}"
            )
        h = h + sp.diags(v)
    return h.tocsr()


def squeeze_operator(grid, axis=0, hbar=1.0):
    """Hermitian anticommutator {x, p} = -i hbar (X D + D X) on one axis.

    D is the antisymmetric central difference, so the matrix is exactly
    Hermitian on the grid.
    """
    x = grid.axes()[axis]
    n = grid.shape[axis]
    dx = grid.spacing[axis]
    sup = (x[:-1] + x[1:]) / (2.0 * dx)
    mat = sp.diags([-sup, sup], [-1, 1], format="csr") * (-1j * hbar)
    return _axis_operator(grid, mat, axis)


def _as_tridiagonal(h):
    """(diag, offdiag) if h is real tridiagonal and symmetric, else None."""
    d = h.todia()
    if not set(d.offsets).issubset({-1, 0, 1}):
        return None
    if np.iscomplexobj(d.data) and np.abs(d.data.imag).max() > 0.0:
        return None
    main = h.diagonal(0).real
    lo = h.diagonal(-1).real
    up = h.diagonal(1).real
    if not np.allclose(lo, up, rtol=0.0, atol=1e-14 * max(1.0, np.abs(up).max())):
        return None
    return main, up


def lowest_eigenpairs(h, k, sigma=None, dense_cutoff=4096):
    """k lowest eigenpairs of a sparse Hermitian grid Hamiltonian.

    Real tridiagonal operators use the direct banded solver; small
    problems are solved densely; large ones by shift-invert Lanczos
    with sigma defaulting to the Gershgorin lower bound.  Eigenvectors
    are l2-normalized columns.
    """
    h = sp.csr_matrix(h)
    n = h.shape[0]
    if k < 1 or k >= n:
        raise ValueError("need 1 <= k < dimension")
    tri = _as_tridiagonal(h)
    if tri is not None:
        w, v = eigh_tridiagonal(
            tri[0], tri[1], select="i", select_range=(0, k - 1)
        )
        return w, v
    if n <= dense_cutoff:
        w, v = eigh(h.toarray())
        return w[:k], v[:, :k]
    if sigma is None:
        diag = h.diagonal()
        row_sums = np.asarray(np.abs(h).sum(axis=1)).ravel()
        sigma = float(np.min(np.real(diag) - (row_sums - np.abs(diag))))
    w, v = eigsh(h, k=k, sigma=sigma, which="LM")
    order = np.argsort(w)
    return w[order], v[:, order]


def eigenpairs_near(h, sigma, k=1):
    """k eigenpairs closest to sigma by shift-invert Lanczos."""
    w, v = eigsh(sp.csr_matrix(h), k=k, sigma=float(sigma), which="LM")
    order = np.argsort(w)
    return w[order], v[:, order]


def propagate(h_of_t, psi0, Tf, dt, hbar=1.0):
    """Crank-Nicolson propagation of a (possibly time-dependent) H.

    h_of_t maps the midpoint time of each step to a sparse Hamiltonian
    on psi0's grid.  One-dimensional tridiagonal problems run through
    the compiled Thomas kernel; anything else is solved by sparse LU
    (the factorization is reused while h_of_t returns the same object).

    The Cayley step is unitary in the grid l2 norm (where the
    symmetric H is Hermitian), so the solver's per-step roundoff is
    divided back out to keep it from random-walking over long runs;
    meta records the largest raw per-step l2 drift and the largest
    boundary leak seen.  The trapezoid norm of the result can differ
    from the initial one at boundary-leak order, which the leak
    diagnostic reports separately.
    """
    if dt <= 0.0 or Tf <= 0.0:
        raise ValueError("Tf and dt must be positive")
    n_steps = max(1, int(round(Tf / dt)))
    dt = Tf / n_steps
    grid = psi0.grid
    psi = psi0.values.astype(complex)
    norm_prev = np.linalg.norm(psi)
    leak_max = 0.0
    step_drift_max = 0.0
    c = 1j * dt / (2.0 * hbar)

    last_h = None
    last_lu = None
    use_tridiag = grid.ndim == 1
    for step in range(n_steps):
        t_mid = (step + 0.5) * dt
        h = h_of_t(t_mid)
        if use_tridiag:
            main = h.diagonal(0).astype(complex)
            lo = h.diagonal(-1).astype(complex)
            up = h.diagonal(1).astype(complex)
            if h.nnz > len(main) + len(lo) + len(up):
                use_tridiag = False
        if use_tridiag:
            rhs = _kernels.tridiag_matvec(-c * lo, 1.0 - c * main, -c * up, psi)
            psi = _kernels.tridiag_solve(c * lo, 1.0 + c * main, c * up, rhs)
        else:
            if h is not last_h:
                a = (sp.identity(grid.size, format="csc") + c * h).tocsc()
                last_lu = splu(a)
                last_h = h
            rhs = psi - c * (h @ psi)
            psi = last_lu.solve(rhs)
        ratio = np.linalg.norm(psi) / norm_prev
        step_drift_max = max(step_drift_max, abs(ratio - 1.0))
        psi = psi / ratio
        leak_max = max(leak_max, GridState(grid, psi).boundary_fraction())

    return GridState(
        grid,
        psi,
        meta={
            "norm_drift": step_drift_max,
            "boundary_leak": leak_max,
            "boundary_leak_ok": leak_max < 1e-10,
            "steps": n_steps,
            "dt": dt,
        },
    )
