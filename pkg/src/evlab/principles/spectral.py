"""Eigentriple, spectral projection and gap for a gallery operator."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateEigenvalue, MuInSpectrum, SingularMatrix
from ..numerics import (EigenPair, complex_gap, eigenpair_near, fourier_frequencies, lu_factor, real_dft_multiplier_matrix,
                        resolvent, shifted, smallest_singular_value, spectral_gap)


@dataclass(frozen=True)
class Thresholds:
    """Empirical decision thresholds (not derived from theory; all overridable)."""

    eps_cls: float = 1e-9  # relative to c_hat of the matrix being classified
    uniform_low: float = 0.8
    uniform_high: float = 1.25
    divergent_growth: float = 1.4
    min_doublings: int = 3
    proximity_fraction: float = 1.0 / 50  # skip mu within gap * fraction of another spectral dip
    collapse_ratio: float = 0.5  # window width finest/coarsest below this counts as collapsing

    def as_dict(self):
        return dict(self.__dict__)


DEFAULT_THRESHOLDS = Thresholds()


@dataclass(frozen=True)
class SpectralData:
    pair: EigenPair
    projection: np.ndarray
    gap: float
    simple: bool

    @property
    def lambda0(self) -> float:
        return self.pair.value


_CACHE: dict = {}


def _key(A, shift):
    A = np.ascontiguousarray(A)
    return hashlib.sha1(A.tobytes()).hexdigest(), A.shape, float(shift)


def build_spectral_data(op) -> SpectralData:
    """Eigentriple at ``op.lambda0`` and the rank-one projection ``v psi^T / <psi, v>``.

    Results are memoized per matrix, the gap estimate being the costly part.
    """
    key = _key(op.matrix, op.lambda0)
    if key in _CACHE:
        return _CACHE[key]
    pair = _symbol_eigenpair(op) if op.symbol is not None else eigenpair_near(op.matrix, op.lambda0)
    right, left = pair.right_vector, pair.left_vector
    # <left, right> = 1 by construction; a tiny cosine flags a nearly defective eigenvalue
    cosine = 1.0 / (np.linalg.norm(left) * np.linalg.norm(right))
    P = np.outer(right, left)
    P.setflags(write=False)
    if op.symbol is not None:
        gap = _symbol_gap(op, pair.value)
    else:
        # the real-axis probe cannot see complex eigenvalues hidden behind lambda0 itself
        gap = spectral_gap(op.matrix, pair.value)
        gap = min(gap, complex_gap(op.matrix, pair.value, 1e-3 * gap))
    data = SpectralData(pair=pair, projection=P, gap=gap, simple=bool(cosine > 1e-6))
    _CACHE[key] = data
    return data


def _symbol_eigenpair(op) -> EigenPair:
    """Zero-frequency eigenpair of a Fourier multiplier: constants on both sides."""
    k = fourier_frequencies(op.n)
    values = np.asarray(op.symbol(k), dtype=complex)
    j = int(np.argmin(np.abs(values - op.lambda0)))
    if k[j] != 0:
        raise DegenerateEigenvalue("eigenvalues of nonzero frequencies come in conjugate pairs")
    n = op.n
    right = np.ones(n)
    left = np.ones(n) / n
    value = float(values[j].real)
    residual = float(np.max(np.abs(op.matrix @ right - value * right)) / max(np.max(np.sum(np.abs(op.matrix), axis=1)), 1.0))
    right.setflags(write=False)
    left.setflags(write=False)
    return EigenPair(value=value, right_vector=right, left_vector=left, residual=residual, iterations=0)


def _symbol_gap(op, lambda0):
    """Distance to the nearest other symbol value (real or complex), capped like :func:`spectral_gap`."""
    values = np.asarray(op.symbol(fourier_frequencies(op.n)), dtype=complex)
    scale = max(1.0, float(np.max(np.abs(values))))
    other = np.abs(values - lambda0)
    other = other[other > 1e-9 * scale]
    cap = min(scale + abs(lambda0), 1e4)
    return float(min(np.min(other), cap)) if other.size else float(cap)


def clear_cache():
    _CACHE.clear()


def _symbol_distance(op, mu):
    k = fourier_frequencies(op.n)
    return float(np.min(np.abs(mu - np.asarray(op.symbol(k), dtype=complex))))


def operator_resolvent(op, mu: float) -> np.ndarray:
    """``R(mu)`` of a gallery operator.

    Fourier multipliers are inverted symbol-wise, which avoids the
    ``eps * ||A||`` rounding of an LU solve for high-order symbols; all
    other operators go through the LU factors.
    """
    if op.symbol is None:
        return resolvent(op.matrix, mu)
    if _symbol_distance(op, mu) < 1e-13 * max(1.0, abs(mu)):
        raise MuInSpectrum(mu)
    return real_dft_multiplier_matrix(op.n, lambda k: 1.0 / (mu - np.asarray(op.symbol(k), dtype=complex)))


def resolvent_and_sigma(op, mu: float):
    """``(R(mu), sigma_min(mu - A))``, or ``(None, 0.0)`` when ``mu`` is numerically in the spectrum."""
    if op.symbol is not None:
        try:
            return operator_resolvent(op, mu), _symbol_distance(op, mu)
        except MuInSpectrum:
            return None, 0.0
    try:
        lu = lu_factor(shifted(op.matrix, mu))
    except SingularMatrix:
        return None, 0.0
    return lu.solve(np.eye(lu.n)), smallest_singular_value(lu)
