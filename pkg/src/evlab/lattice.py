"""Finite-dimensional lattice primitives.

Vectors are real numpy arrays ordered entrywise.  A :class:`RankOneFrame`
fixes the comparison operator ``u (x) phi`` whose action is
``f -> <phi, f> u`` with the discrete pairing
``<phi, f> = sum_j weights_j * phi_j * f_j``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch


def as_vector(x, name="vector"):
    """Return ``x`` as a finite 1-D float array (read-only copy)."""
    arr = np.array(x, dtype=float).reshape(-1)
    if arr.size < 1:
        raise ValueError(f"{name} must have length >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def as_square(T, name="matrix"):
    arr = np.asarray(T, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class RankOneFrame:
    u: np.ndarray
    phi: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        u = as_vector(self.u, "u")
        phi = as_vector(self.phi, "phi")
        w = as_vector(self.weights, "weights")
        if not (u.size == phi.size == w.size):
            raise DimensionMismatch(
                f"frame lengths differ: u={u.size}, phi={phi.size}, weights={w.size}"
            )
        for name, arr in (("u", u), ("phi", phi), ("weights", w)):
            if np.any(arr <= 0):
                raise ValueError(f"frame component {name} must be strictly positive")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.u.size

    @property
    def density(self) -> np.ndarray:
        """Row vector of the functional: ``phi_j * weights_j``."""
        return self.phi * self.weights

    def pair(self, f) -> float:
        """Discrete duality ``<phi, f>``."""
        return float(self.density @ np.asarray(f, dtype=float))

    def scaled(self, alpha: float, beta: float) -> "RankOneFrame":
        return RankOneFrame(alpha * self.u, beta * self.phi, self.weights)

    @classmethod
    def constant(cls, weights) -> "RankOneFrame":
        w = as_vector(weights, "weights")
        return cls(np.ones_like(w), np.ones_like(w), w)


@dataclass(frozen=True)
class MarginReport:
    lower_margin: float
    upper_margin: float
    two_sided_constant: float
    argmin_index: tuple
    argmax_index: tuple

    def as_dict(self):
        return {
            "lower_margin": self.lower_margin,
            "upper_margin": self.upper_margin,
            "c_hat": self.two_sided_constant,
        }


def _check_dims(T, frame):
    T = as_square(T, "T")
    if T.shape[0] != frame.n:
        raise DimensionMismatch(f"operator is {T.shape[0]}x{T.shape[0]}, frame has length {frame.n}")
    return T


def rank_one_matrix(frame: RankOneFrame) -> np.ndarray:
    """Matrix of ``u (x) phi``: entries ``u_i * phi_j * weights_j``."""
    return np.outer(frame.u, frame.density)


def ratio_matrix(T, frame: RankOneFrame) -> np.ndarray:
    """Entrywise ratios ``T_ij / (u_i phi_j w_j)``."""
    T = _check_dims(T, frame)
    return T / rank_one_matrix(frame)


def margins(T, frame: RankOneFrame) -> MarginReport:
    """Compare ``T`` against the rank-one operator of ``frame``.

    ``lower_margin > 0`` certifies ``T >= c u(x)phi`` for some ``c > 0``;
    ``upper_margin < 0`` certifies ``T <= -c u(x)phi``.  The two-sided
    constant is the least ``c`` with ``-c u(x)phi <= T <= c u(x)phi``.
    """
    r = ratio_matrix(T, frame)
    imin = np.unravel_index(np.argmin(r), r.shape)
    imax = np.unravel_index(np.argmax(r), r.shape)
    lo = float(r[imin])
    hi = float(r[imax])
    return MarginReport(
        lower_margin=lo,
        upper_margin=hi,
        two_sided_constant=max(abs(lo), abs(hi)),
        argmin_index=(int(imin[0]), int(imin[1])),
        argmax_index=(int(imax[0]), int(imax[1])),
    )


def phi_to_u_norm(T, frame: RankOneFrame) -> float:
    """Norm of ``T`` from the weighted L1 space of ``phi`` into the gauge space of ``u``.

    The unit ball of the source is the absolutely convex hull of the scaled
    basis vectors ``e_j / (w_j phi_j)``; the gauge norm of their images gives
    the closed form ``max_ij |T_ij| / (u_i phi_j w_j)``.
    """
    T = _check_dims(T, frame)
    cols = np.abs(T) / frame.density[None, :]
    return float(np.max(cols / frame.u[:, None]))


def gauge_norm(x, u) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    if x.shape != u.shape:
        raise DimensionMismatch(f"length mismatch: {x.size} vs {u.size}")
    if np.any(u <= 0):
        raise ValueError("u must be strictly positive")
    return float(np.max(np.abs(x) / u))


def al_norm(x, frame: RankOneFrame) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != frame.n:
        raise DimensionMismatch(f"length mismatch: {x.size} vs {frame.n}")
    return float(frame.density @ np.abs(x))


def u_to_phi_norm_bound(S, frame: RankOneFrame) -> float:
    """Upper bound for ``||S||`` as a map from the gauge space of ``u`` to the L1 space of ``phi``.

    ``sum_ij w_i phi_i |S_ij| u_j``; exact when ``S`` is entrywise of one sign.
    """
    S = _check_dims(S, frame)
    return float(frame.density @ np.abs(S) @ frame.u)


def composition_bound(c1: float, S, c2: float, frame: RankOneFrame) -> float:
    """Two-sided constant bound for ``T2 @ S @ T1`` given the constants of ``T1`` and ``T2``."""
    return c1 * c2 * u_to_phi_norm_bound(S, frame)
