"""Dense numerical kernels: LU, resolvents, inverse iteration, DFT multipliers, expm."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg
from scipy.optimize import minimize_scalar

from .errors import (
    DegenerateEigenvalue,
    MuInSpectrum,
    NoConvergence,
    NormTooLarge,
    SingularMatrix,
    SymbolNotConjugateSymmetric,
)
from .lattice import as_square

PIVOT_RTOL = 1e-13
MAX_INVERSE_ITERATIONS = 500
EXPM_NORM_LIMIT = 1e4
STAGNATION_LEVEL = 1e-8


@dataclass(frozen=True)
class LUFactors:
    """Partial-pivoting factors with ``A[perm] = L @ U``."""

    lu: np.ndarray
    perm: np.ndarray
    parity: int
    piv: np.ndarray  # LAPACK interchange form, used by the triangular solves

    @property
    def n(self) -> int:
        return self.lu.shape[0]

    @property
    def L(self) -> np.ndarray:
        return np.tril(self.lu, -1) + np.eye(self.n)

    @property
    def U(self) -> np.ndarray:
        return np.triu(self.lu)

    def solve(self, b, trans: bool = False) -> np.ndarray:
        return scipy.linalg.lu_solve((self.lu, self.piv), b, trans=1 if trans else 0, check_finite=False)


def lu_factor(A) -> LUFactors:
    """Factor ``A`` with partial pivoting.

    Raises :class:`SingularMatrix` when a pivot falls below ``1e-13`` times
    the largest magnitude of the corresponding column of ``A``.
    """
    A = as_square(A, "A")
    n = A.shape[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    colmax = np.max(np.abs(A), axis=0)
    pivots = np.abs(np.diag(lu))
    bad = np.nonzero(pivots < PIVOT_RTOL * np.where(colmax > 0, colmax, 1.0))[0]
    if bad.size:
        k = int(bad[0])
        raise SingularMatrix(f"pivot {k} is {pivots[k]:.3e}, below threshold", pivot_index=k)
    perm = np.arange(n)
    swaps = 0
    for i, p in enumerate(piv):
        if p != i:
            perm[[i, p]] = perm[[p, i]]
            swaps += 1
    lu.setflags(write=False)
    return LUFactors(lu=lu, perm=perm, parity=-1 if swaps % 2 else 1, piv=piv)


def shifted(A, mu: float) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    return mu * np.eye(A.shape[0]) - A


def resolvent(A, mu: float) -> np.ndarray:
    """``(mu I - A)^{-1}``; raises :class:`MuInSpectrum` when the shift is singular."""
    try:
        lu = lu_factor(shifted(A, mu))
    except SingularMatrix as exc:
        raise MuInSpectrum(mu) from exc
    return lu.solve(np.eye(lu.n))


def sup_norm(A) -> float:
    """Operator norm on (R^n, max-norm): maximal absolute row sum."""
    return float(np.max(np.sum(np.abs(A), axis=1)))


# ---------------------------------------------------------------------------
# eigenpairs


@dataclass(frozen=True)
class EigenPair:
    value: float
    right_vector: np.ndarray
    left_vector: np.ndarray
    residual: float
    iterations: int = 0


def _normalize_max(x):
    k = int(np.argmax(np.abs(x)))
    return x / x[k]


def _inverse_iterate(lu: LUFactors, x, trans: bool, tol: float, strict: bool = True):
    """Inverse iteration with max-entry normalization.

    Returns ``(vector, iterations, converged)``; with ``strict`` a missed
    tolerance raises :class:`NoConvergence` instead.
    """
    x = _normalize_max(x)
    previous = np.inf
    for it in range(1, MAX_INVERSE_ITERATIONS + 1):
        y = _normalize_max(lu.solve(x, trans=trans))
        change = float(np.max(np.abs(y - x)))
        # stop at the tolerance, or once the change stagnates at the rounding floor
        # of a badly scaled matrix (the caller's residual test guards the result)
        if change <= tol or (change <= STAGNATION_LEVEL and change >= previous):
            return y, it, True
        previous = change
        x = y
    if strict:
        raise NoConvergence(f"inverse iteration did not converge in {MAX_INVERSE_ITERATIONS} steps")
    return x, MAX_INVERSE_ITERATIONS, False


def _cosine(a, b):
    return abs(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b))


def _eigen_residual(A, x):
    rq = (x @ A @ x) / (x @ x)
    return float(np.max(np.abs(A @ x - rq * x)) / (sup_norm(A) or 1.0))


def _factor_near(A, shift: float):
    """LU of ``A - shift I``, nudging the shift off an exact eigenvalue."""
    scale = max(1.0, sup_norm(A))
    for nudge in (0.0, 1e-10, 1e-8, 1e-6):
        try:
            return lu_factor(A - (shift + nudge * scale) * np.eye(A.shape[0]))
        except SingularMatrix:
            continue
    raise NoConvergence(f"shift {shift!r} stays singular after nudging")


def eigenpair_near(A, shift: float, seed: int = 0, tol: float = 1e-13) -> EigenPair:
    """Right/left eigenpair for the eigenvalue of ``A`` closest to ``shift``.

    Two inverse iterations are started from orthogonal random vectors; if
    they settle on different directions the eigenvalue is reported as
    :class:`DegenerateEigenvalue`.
    """
    A = as_square(A, "A")
    n = A.shape[0]
    lu = _factor_near(A, shift)
    rng = np.random.default_rng(seed)
    x1 = rng.standard_normal(n)
    x2 = rng.standard_normal(n)
    x2 -= (x2 @ x1) / (x1 @ x1) * x1
    right, iters, ok1 = _inverse_iterate(lu, x1, False, tol, strict=False)
    if n > 1:
        other, _, ok2 = _inverse_iterate(lu, x2, False, tol, strict=False)
        cos = _cosine(right, other)
        if cos < 0.999 and (ok1 and ok2 or max(_eigen_residual(A, right), _eigen_residual(A, other)) < 1e-6):
            # both starts reach (near-)eigenvectors that span a plane
            raise DegenerateEigenvalue(f"eigenvalue near {shift!r} is not simple (|cos|={cos:.4f})")
        if not ok2:
            raise NoConvergence(f"inverse iteration did not converge in {MAX_INVERSE_ITERATIONS} steps")
    if not ok1:
        raise NoConvergence(f"inverse iteration did not converge in {MAX_INVERSE_ITERATIONS} steps")
    left, _, _ = _inverse_iterate(lu, rng.standard_normal(n), True, tol)
    denom = left @ right
    if denom == 0:
        raise DegenerateEigenvalue("left and right eigenvectors are orthogonal")
    left = left / denom
    value = float(left @ A @ right)
    anorm = sup_norm(A) or 1.0
    residual = float(np.max(np.abs(A @ right - value * right)) / anorm)
    if residual > 1e-8:
        raise NoConvergence(f"eigen-residual {residual:.2e} exceeds 1e-8")
    right.setflags(write=False)
    left.setflags(write=False)
    return EigenPair(value=value, right_vector=right, left_vector=left, residual=residual, iterations=iters)


# ---------------------------------------------------------------------------
# sigma_min probing


def smallest_singular_value(lu: LUFactors, iterations: int = 8) -> float:
    """Estimate ``sigma_min`` of the factored matrix by power iteration on ``(M^T M)^{-1}``."""
    n = lu.n
    x = np.ones(n) + np.linspace(0.0, 0.5, n)
    x /= np.linalg.norm(x)
    growth = 0.0
    for _ in range(iterations):
        y = lu.solve(lu.solve(x, trans=True))
        growth = np.linalg.norm(y)
        if growth == 0 or not np.isfinite(growth):
            return 0.0
        x = y / growth
    return float(1.0 / np.sqrt(growth))


def sigma_min(A, mu: float) -> float:
    try:
        return smallest_singular_value(lu_factor(shifted(A, mu)))
    except SingularMatrix:
        return 0.0


def _refine_dip(A, lo, hi):
    lo, hi = min(lo, hi), max(lo, hi)
    res = minimize_scalar(lambda m: sigma_min(A, m), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-6 * max(1.0, abs(lo), abs(hi))})
    return float(res.x)


def local_dips(A, grid, values=None, refine=True):
    """Locations of interior local minima of ``sigma_min(mu I - A)`` over ``grid``."""
    grid = np.asarray(grid, dtype=float)
    if values is None:
        values = np.array([sigma_min(A, m) for m in grid])
    dips = []
    for i in range(1, len(grid) - 1):
        if values[i] <= values[i - 1] and values[i] < values[i + 1]:
            dips.append(_refine_dip(A, grid[i - 1], grid[i + 1]) if refine else float(grid[i]))
    return dips


def real_spectrum_dips(A, lo: float, hi: float, steps: int = 161):
    return local_dips(A, np.linspace(lo, hi, steps))


def spectral_gap(A, lambda0: float, max_radius: float | None = None, points_per_side: int = 15) -> float:
    """Distance from ``lambda0`` to the nearest other real spectral value.

    Annuli ``0.4 R <= |mu - lambda0| <= R`` are probed for ``R = 1/16, 1/8, ...``
    until a dip of ``sigma_min`` appears.  If none is found up to
    ``max_radius`` the radius itself is returned, a lower bound for the
    distance to other real spectrum.
    """
    A = as_square(A, "A")
    if max_radius is None:
        max_radius = min(sup_norm(A) + abs(lambda0), 1e4)
    radius = min(1.0 / 16, max_radius)
    while True:
        found = []
        for side in (-1.0, 1.0):
            # the inner end reaches back into the previous annulus so dips on the seam are seen
            offsets = np.linspace(radius / 2.5, radius, points_per_side)
            grid = lambda0 + side * offsets
            found += local_dips(A, grid)
        far = [abs(d - lambda0) for d in found if abs(d - lambda0) > radius / 4]
        if far:
            return float(min(far))
        if radius >= max_radius:
            return float(radius)
        radius = min(2 * radius, max_radius)


DENSE_EIGVALS_LIMIT = 64


def nearest_eigenvalues(A, shift: float, count: int = 6) -> np.ndarray:
    """The ``count`` eigenvalues (complex) closest to ``shift``, nearest first.

    Uses shift-invert Arnoldi, so complex eigenvalues that real-axis probing
    cannot see are found too; small matrices fall back to a dense solve.
    ``shift`` must not be an eigenvalue to working precision.
    """
    A = as_square(A, "A")
    n = A.shape[0]
    if n <= max(DENSE_EIGVALS_LIMIT, 2 * count + 2):
        vals = np.linalg.eigvals(A)
    else:
        v0 = 1.0 + np.linspace(0.0, 1.0, n)  # fixed start vector keeps results reproducible
        vals = scipy.sparse.linalg.eigs(A, k=count, sigma=shift, v0=v0, return_eigenvectors=False, tol=1e-10)
    return vals[np.argsort(np.abs(vals - shift), kind="stable")][:count]


def complex_gap(A, lambda0: float, offset: float, count: int = 6) -> float:
    """Distance from ``lambda0`` to the nearest other eigenvalue, real or complex.

    ``offset`` moves the Arnoldi shift off ``lambda0`` itself; eigenvalues
    within ``1e-8`` (relative) of ``lambda0`` count as ``lambda0``.
    """
    vals = nearest_eigenvalues(A, lambda0 + offset, count)
    scale = max(1.0, abs(lambda0))
    d = np.abs(vals - lambda0)
    d = d[d > 1e-8 * scale]
    return float(np.min(d)) if d.size else float("inf")


# ---------------------------------------------------------------------------
# Fourier multipliers


def fourier_frequencies(n: int) -> np.ndarray:
    if n % 2 != 1:
        raise ValueError(f"n must be odd, got {n}")
    half = (n - 1) // 2
    return np.arange(-half, half + 1)


def _symbol_values(symbol, k):
    if callable(symbol):
        return np.asarray(symbol(k), dtype=complex) * np.ones(k.shape)
    return np.array([symbol[int(kk)] for kk in k], dtype=complex)


def real_dft_multiplier_matrix(n: int, symbol) -> np.ndarray:
    """Real matrix of the Fourier multiplier ``symbol`` on the uniform grid ``j/n`` of ``[0, 1)``.

    ``symbol`` is a callable on integer frequency arrays or a mapping.  It
    must satisfy ``symbol(-k) = conj(symbol(k))``.
    """
    k = fourier_frequencies(n)
    s = _symbol_values(symbol, k)
    scale = max(1.0, float(np.max(np.abs(s))))
    if np.max(np.abs(s[::-1] - np.conj(s))) > 1e-12 * scale:
        raise SymbolNotConjugateSymmetric("symbol(-k) != conj(symbol(k))")
    half = (n - 1) // 2
    pos = s[half + 1:]
    kp = k[half + 1:]
    m = np.arange(n)
    # reduce k*m mod n before forming phases to keep the arguments small
    phase = 2 * np.pi * ((np.outer(kp, m)) % n) / n
    even = (s[half].real + 2 * (pos.real @ np.cos(phase))) / n
    odd = -2 * (pos.imag @ np.sin(phase)) / n
    # impose the exact parity of both parts, so that e.g. an odd symbol gives an
    # exactly antisymmetric matrix (whose spectrum contains 0 exactly for odd n)
    mirror = (-m) % n
    col = (even + even[mirror]) / 2 + (odd - odd[mirror]) / 2
    idx = (m[:, None] - m[None, :]) % n
    return col[idx]


def dft_matrix(n: int):
    """Frequencies and the forward DFT matrix ``F[k, j] = exp(-2 pi i k j / n)``."""
    k = fourier_frequencies(n)
    j = np.arange(n)
    return k, np.exp(-2j * np.pi * ((np.outer(k, j)) % n) / n)


def apply_multiplier(n: int, values, f, dft=None):
    """Apply the multiplier with per-frequency ``values`` to grid data ``f`` (direct DFT)."""
    k, F = dft if dft is not None else dft_matrix(n)
    fhat = F @ np.asarray(f, dtype=float) / n
    return (np.conj(F).T @ (np.asarray(values) * fhat)).real


# ---------------------------------------------------------------------------
# matrix exponential

_PADE13 = np.array([
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
])
_THETA13 = 5.371920351148152


def matrix_exponential(A, t: float = 1.0) -> np.ndarray:
    """``exp(t A)`` by scaling and squaring around a degree-13 Pade approximant."""
    A = as_square(A, "A")
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    X = t * A
    if sup_norm(X) > EXPM_NORM_LIMIT:
        raise NormTooLarge(f"||tA|| = {sup_norm(X):.3e} exceeds {EXPM_NORM_LIMIT:g}")
    n = X.shape[0]
    norm1 = float(np.max(np.sum(np.abs(X), axis=0)))
    s = max(0, int(np.ceil(np.log2(norm1 / _THETA13)))) if norm1 > 0 else 0
    X = X / 2.0**s
    b = _PADE13
    ident = np.eye(n)
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2) + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * ident)
    V = X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2) + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * ident
    E = lu_factor(V - U).solve(V + U)
    for _ in range(s):
        E = E @ E
    return E
