"""Named, seeded collections of checks run by ``evlab check``.

Each suite returns a list of :class:`~evlab.principles.theorems.CheckReport`;
a suite passes when every report is ``ok``.  All randomness flows from the
``seed`` argument.
"""

from __future__ import annotations

import numpy as np

from .gallery import OPERATOR_NAMES, Verdict, build
from .lattice import RankOneFrame
from .lattice import composition_bound, margins, phi_to_u_norm
from .principles import (CheckReport, build_spectral_data, check_antimax_characterization,
                         check_form_domain_estimate, check_group_not_eventually_positive,
                         check_one_sided_extension, check_powers_theorem, check_projection_convergence,
                         check_resolvent_expansion, check_two_sided_extension)

CORE_SAMPLES = 100
CORE_MAX_N = 20
CORE_RTOL = 1e-12


def random_frame(rng, n):
    return RankOneFrame(rng.uniform(0.1, 2.0, n), rng.uniform(0.1, 2.0, n), rng.uniform(0.01, 1.0, n))


def core_suite(seed: int = 0):
    """Norm identity and composition bound on seeded random matrices and frames."""
    rng = np.random.default_rng(seed)
    worst_identity = worst_composition = 0.0
    for _ in range(CORE_SAMPLES):
        n = int(rng.integers(1, CORE_MAX_N + 1))
        frame = random_frame(rng, n)
        T = rng.standard_normal((n, n))
        a, b = phi_to_u_norm(T, frame), margins(T, frame).two_sided_constant
        worst_identity = max(worst_identity, abs(a - b) / max(abs(b), 1e-300))
        # composition: T2 S T1 with T1, T2 bounded by c u(x)phi
        T1 = rng.uniform(-1, 1, (n, n)) * np.outer(frame.u, frame.density)
        T2 = rng.uniform(-1, 1, (n, n)) * np.outer(frame.u, frame.density)
        S = rng.standard_normal((n, n))
        c1, c2 = phi_to_u_norm(T1, frame), phi_to_u_norm(T2, frame)
        observed = phi_to_u_norm(T2 @ S @ T1, frame)
        worst_composition = max(worst_composition, observed / composition_bound(c1, S, c2, frame))
    return [
        CheckReport("norm_identity", worst_identity <= CORE_RTOL, "exact identity",
                    {"samples": CORE_SAMPLES, "max_relative_error": worst_identity, "rtol": CORE_RTOL}),
        CheckReport("composition_bound", worst_composition <= 1 + 1e-12, "exact inequality",
                    {"samples": CORE_SAMPLES, "max_ratio": worst_composition}),
    ]


def _tag(report: CheckReport, operator: str) -> CheckReport:
    return CheckReport(report.name, report.ok, report.label, {"operator": operator, **report.details})


def resolvent_identity_suite(seed: int = 0):
    return [_tag(check_resolvent_expansion(build(name), seed=seed), name) for name in OPERATOR_NAMES]


EXTENSION_OPERATORS = ("neumann", "thermostat", "graph", "nonlocal_symmetric", "odd_order", "delay")


def extension_suite(seed: int = 0):
    """Two-sided and one-sided extensions at seeded offsets, plus the form-domain estimate."""
    rng = np.random.default_rng(seed)
    out = []
    for name in EXTENSION_OPERATORS:
        op = build(name)
        sd = build_spectral_data(op)
        lam, gap = sd.lambda0, sd.gap
        near, far = np.sort(rng.uniform(0.05, 0.45, 2))
        # left side: mu <= mu0 < lambda0
        mu0 = lam - near * gap
        left = [lam - t * gap for t in np.linspace(near, far, 3)]
        out.append(_tag(check_two_sided_extension(op, mu0, left + [lam + near * gap]), name))
        out.append(_tag(check_one_sided_extension(op, mu0, "left_lower", left), name))
        # right side: mu >= mu0 > lambda0
        mu0r = lam + near * gap
        right = [lam + t * gap for t in np.linspace(near, far, 3)]
        out.append(_tag(check_one_sided_extension(op, mu0r, "right_upper", right), name))
        # side condition dropped: asserted for m1 = m2 = 1, reported otherwise
        both = sorted(left + right)
        out.append(_tag(check_one_sided_extension(op, mu0, "any_lower", both), name))
        # side-violating points through the sided mode are exploratory only
        if op.continuum_m1 + op.continuum_m2 != 2:
            out.append(_tag(check_one_sided_extension(op, mu0, "left_lower", both, exploratory=True), name))
    for name in ("neumann", "periodic"):
        out.append(_tag(check_form_domain_estimate(build(name), mu=1.0, n_list=(50, 100, 200)), name))
    return out


PROJECTION_OPERATORS = ("neumann", "odd_order", "delay")


def projection_suite(seed: int = 0):
    out = []
    for name in PROJECTION_OPERATORS:
        op = build(name)
        for side in (1, -1):
            rep = check_projection_convergence(op, side=side)
            out.append(CheckReport(rep.name, rep.ok, rep.label, {"operator": name, "side": side, **rep.details}))
    return out


def powers_suite(seed: int = 0):
    return [_tag(check_powers_theorem(build(name)), name) for name in OPERATOR_NAMES]


CHARACTERIZATION_CASES = (("neumann", 1.0), ("thermostat", 0.0), ("dirichlet", 0.0))


def characterization_suite(seed: int = 0):
    """Three-way agreement, and agreement with the predicted anti-maximum verdict."""
    out = []
    for name, mu1 in CHARACTERIZATION_CASES:
        op = build(name)
        rep = check_antimax_characterization(op, mu1)
        expected = op.predicted.uniform_antimax == Verdict.HOLDS
        verdicts = rep.details["verdicts"]
        matches = all(v is expected for v in verdicts.values())
        out.append(CheckReport(rep.name, bool(rep.ok and matches), rep.label,
                               {"operator": name, "expected": expected, "matches_prediction": matches,
                                **rep.details}))
    return out


def group_positivity_suite(seed: int = 0):
    return [check_group_not_eventually_positive(ell, seed=seed) for ell in (0, 1)]


SUITES = {
    "core": core_suite,
    "resolvent-identity": resolvent_identity_suite,
    "extension": extension_suite,
    "projection": projection_suite,
    "powers": powers_suite,
    "characterization": characterization_suite,
    "group-positivity": group_positivity_suite,
}
SUITE_NAMES = tuple(SUITES) + ("all",)


def run_suite(name: str, seed: int = 0):
    """Run one suite (or ``all``); returns ``[(suite, CheckReport), ...]``."""
    if name not in SUITE_NAMES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    names = tuple(SUITES) if name == "all" else (name,)
    return [(s, rep) for s in names for rep in SUITES[s](seed)]

