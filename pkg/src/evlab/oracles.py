"""Closed-form resolvents used as references for the discretizations.

Integrals are evaluated with fixed composite Simpson rules (``PANELS``
panels on each side of the kernel kink at ``y = x``), which keeps the
quadrature error far below the discretization errors being measured.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import MuZero, OutOfDomain
from .gallery import build_interval_laplacian, build_odd_order, build_thermostat
from .principles.spectral import operator_resolvent

PANELS = 10_000


@dataclass(frozen=True)
class KernelOracle:
    name: str
    kernel: object  # (x, y, **params) -> value
    domain: tuple
    symmetric: bool
    valid_mu: str


def _check_point(x, lo, hi, closed=False):
    ok = lo <= x <= hi if closed else lo < x < hi
    if not (np.isfinite(x) and ok):
        raise OutOfDomain(f"{x!r} is outside {'[' if closed else '('}{lo}, {hi}{']' if closed else ')'}")


def dirichlet_green(x: float, y: float) -> float:
    """Kernel of ``R(0)`` for ``-d^2/dx^2`` with Dirichlet conditions on (0, 1)."""
    _check_point(x, 0.0, 1.0)
    _check_point(y, 0.0, 1.0)
    return y * (1 - x) if y <= x else x * (1 - y)


def _simpson(g, a, b, panels=PANELS):
    if b <= a:
        return 0.0
    y = np.linspace(a, b, panels + 1)
    return float(simpson(g(y), x=y))


def kernel_apply(kernel, f, x: float, a: float, b: float, panels: int = PANELS) -> float:
    """``int_a^b kernel(x, y) f(y) dy`` with the integration split at ``y = x``."""
    return (_simpson(lambda y: kernel(x, y) * f(y), a, x, panels)
            + _simpson(lambda y: kernel(x, y) * f(y), x, b, panels))


def dirichlet_resolvent_at_zero(f, x: float) -> float:
    _check_point(x, 0.0, 1.0, closed=True)
    return kernel_apply(lambda x, y: np.where(y <= x, y * (1 - x), x * (1 - y)), f, x, 0.0, 1.0)


def thermostat_resolvent_at_zero(f, x: float, beta: float) -> float:
    """``int_x^pi (1/beta + x - y) f(y) dy + (1/beta) int_0^x f(y) dy``.

    The kernel is continuous up to the boundary, so ``x`` may be any point
    of ``[0, pi]``.
    """
    if not (0 < beta < 1 / np.pi):
        raise OutOfDomain(f"beta must lie in (0, 1/pi), got {beta!r}")
    _check_point(x, 0.0, np.pi, closed=True)
    return (_simpson(lambda y: (1 / beta + x - y) * f(y), x, np.pi)
            + _simpson(lambda y: f(y) / beta, 0.0, x))


def periodic_first_order_resolvent(f, x: float, mu: float) -> float:
    """``R(mu)`` of ``d/dx`` with periodic conditions on [0, 1]:

    ``e^{mu x} (e^mu / (e^mu - 1) int_0^1 e^{-mu y} f - int_0^x e^{-mu y} f)``,
    evaluated with the exponentials combined to avoid overflow.
    """
    if mu == 0:
        raise MuZero("mu must be nonzero")
    _check_point(x, 0.0, 1.0, closed=True)
    factor = 1.0 / (1.0 - np.exp(-mu))  # = e^mu / (e^mu - 1)
    head = _simpson(lambda y: np.exp(mu * (x - y)) * f(y), 0.0, x)
    tail = _simpson(lambda y: np.exp(mu * (x - y)) * f(y), x, 1.0)
    return factor * (head + tail) - head


def neumann_constant_identity(mu: float) -> float:
    """``R(mu) 1 = (1/mu) 1`` whenever ``A 1 = 0``."""
    if mu == 0:
        raise MuZero("mu must be nonzero")
    return 1.0 / mu


ORACLE_KERNELS = {
    "dirichlet_green": KernelOracle("dirichlet_green", lambda x, y: dirichlet_green(x, y), (0.0, 1.0), True, "0"),
    "thermostat": KernelOracle(
        "thermostat", lambda x, y, beta: (1 / beta + x - y) if y >= x else 1 / beta, (0.0, np.pi), False, "0"),
    "periodic_first_order": KernelOracle(
        "periodic_first_order",
        lambda x, y, mu: np.exp(mu * (x - y)) * (1 / (1 - np.exp(-mu)) - (y <= x)), (0.0, 1.0), False, "mu != 0"),
}


# ---------------------------------------------------------------------------
# comparisons with the discretizations


def interval_test_function(x):
    return np.exp(np.sin(x)) * np.cos(3 * x)


def periodic_test_function(x):
    return np.exp(np.sin(2 * np.pi * x)) + np.cos(6 * np.pi * x)


def observed_order(hs, errors) -> float:
    """Least-squares slope of ``log(error)`` against ``log(h)``."""
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


def dirichlet_error(n: int, f=interval_test_function) -> float:
    op = build_interval_laplacian("dirichlet", n)
    x = op.grid.nodes
    # R(0) = (-A)^{-1} is the Green operator of -d^2/dx^2
    discrete = operator_resolvent(op, 0.0) @ f(x)
    exact = np.array([dirichlet_resolvent_at_zero(f, xi) for xi in x])
    return float(np.max(np.abs(discrete - exact)))


def thermostat_error(n: int, beta: float = 0.2, f=interval_test_function) -> float:
    op = build_thermostat(beta, n)
    x = op.grid.nodes
    discrete = operator_resolvent(op, 0.0) @ f(x)
    exact = np.array([thermostat_resolvent_at_zero(f, xi, beta) for xi in x])
    return float(np.max(np.abs(discrete - exact)))


def periodic_first_order_error(n: int = 127, mu: float = 1.0, f=periodic_test_function) -> float:
    op = build_odd_order(0, n)
    x = op.grid.nodes
    discrete = operator_resolvent(op, mu) @ f(x)
    exact = np.array([periodic_first_order_resolvent(f, xi, mu) for xi in x])
    return float(np.max(np.abs(discrete - exact)))


def constant_identity_error(op, mu: float) -> float:
    """``max |R(mu) 1 - 1/mu|`` for operators annihilating constants."""
    target = neumann_constant_identity(mu)
    return float(np.max(np.abs(operator_resolvent(op, mu) @ np.ones(op.n) - target)))


def convergence_study(error_fn, n_list, **kwargs):
    """Errors per mesh and the observed order (``h`` taken as ``1/n``)."""
    n_list = sorted(int(n) for n in n_list)
    errors = [error_fn(n, **kwargs) for n in n_list]
    hs = [1.0 / n for n in n_list]
    return {"n_list": n_list, "errors": errors, "order": observed_order(hs, errors)}
