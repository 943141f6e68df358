"""Verdict engine: spectral data, mu-scans, refinement studies and theorem checks."""

from .scan import (DIVERGENT, INCONCLUSIVE, MIXED, SKIPPED, STRONG_NEGATIVE, STRONG_POSITIVE, UNIFORM,
                   MeshRecord, MuRecord, RefinementStudy, ScanReport, classify, probe_window, refinement_study,
                   scan, windows)
from .spectral import DEFAULT_THRESHOLDS, SpectralData, Thresholds, build_spectral_data, clear_cache
from .theorems import (CheckReport, check_antimax_characterization, check_form_domain_estimate,
                       check_group_not_eventually_positive, check_one_sided_extension, check_powers_theorem,
                       check_projection_convergence, check_resolvent_expansion, check_two_sided_extension,
                       cyclicity_check, expansion_residual, refine_one_sided_extension,
                       resolvent_identity_residual)

__all__ = [name for name in dir() if not name.startswith("_")]
