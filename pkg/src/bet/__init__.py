"""Binary expansion testing (BET) of independence between two continuous variables."""

__version__ = "0.1.0"

from .errors import BetError
from .expansion import (EMPIRICAL, KNOWN_CDF, BitMatrix, CopulaSet, SampleSet,
                        binary_expand, empirical_copula, known_cdf_copula, read_sample_csv,
                        uniform_cdf)
from .inference import (BetResult, SymmetryTestResult, binomial_pvalue, chisq_test,
                        fisher_2x2_pvalue, hypergeom_pvalue, max_bet, normal_approx_pvalue,
                        two_stage_bet)
from .interactions import (ContingencyTable, InteractionIndex, SymmetryStats, contingency,
                           enumerate_cross, fwht, iors, symmetry_direct, symmetry_from_table)

__all__ = [
    "BetError", "EMPIRICAL", "KNOWN_CDF", "BitMatrix", "CopulaSet", "SampleSet",
    "binary_expand", "empirical_copula", "known_cdf_copula", "read_sample_csv", "uniform_cdf",
    "BetResult", "SymmetryTestResult", "binomial_pvalue", "chisq_test", "fisher_2x2_pvalue",
    "hypergeom_pvalue", "max_bet", "normal_approx_pvalue", "two_stage_bet",
    "ContingencyTable", "InteractionIndex", "SymmetryStats", "contingency", "enumerate_cross",
    "fwht", "iors", "symmetry_direct", "symmetry_from_table",
]
