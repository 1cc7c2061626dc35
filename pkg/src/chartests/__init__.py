"""Characterization-based goodness-of-fit tests for the Pareto, logistic and
exponential distributions, with local Bahadur efficiency and Monte Carlo
tooling."""

from ._common import DomainError, ExactModeRefused, Mode, NumericalError, TestKind
from .bahadur import Convention, EfficiencyReport, a_prime, b_slope, efficiency, kl2_coefficient, ld_coefficient
from .distributions import Alternative, AlternativeFamily, NullFamily
from .empirical import GridSpec, SupremumResult, brute_force_diff, diff, diff_ex, diff_lo, diff_pa, k_statistic
from .montecarlo import SimPlan, critical_value, ld_empirical, p_value, power, simulate_null
from .projection import Form, sigma2, sigma2_sup, surface_dump, xi
from .sample import Sample, parse_sample, read_sample

__all__ = [
    "Alternative", "AlternativeFamily", "Convention", "DomainError", "EfficiencyReport", "ExactModeRefused",
    "Form", "GridSpec", "Mode", "NullFamily", "NumericalError", "Sample", "SimPlan", "SupremumResult",
    "TestKind", "a_prime", "b_slope", "brute_force_diff", "critical_value", "diff", "diff_ex", "diff_lo",
    "diff_pa", "efficiency", "k_statistic", "kl2_coefficient", "ld_coefficient", "ld_empirical", "p_value",
    "parse_sample", "power", "read_sample", "sigma2", "sigma2_sup", "simulate_null", "surface_dump", "xi",
]
