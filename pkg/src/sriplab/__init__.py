"""Incoherent union-of-ONB dictionaries over F_p and their Gram statistics."""

__version__ = "0.1.0"

from .dictionary import (AtomId, DenseDictionary, Dictionary, HeisenbergDictionary,
                         build_heisenberg, build_random_onb_union, coherence,
                         gauss_sum_magnitude, load_dictionary, resolution_apply,
                         save_dictionary)
from .sparse import RecoveryResult, omp
from .spectral import (EigenResult, RipReport, gram, hermitian_eigenvalues,
                       rip_deviation, rip_exact_check)
from .stats import (DecayFit, ScanConfig, ScanReport, SpectrumResult, error_spectrum,
                    estimate_decay, ks_distance, sample_support, semicircle_cdf,
                    spectral_moment, srip_scan, srip_trial)

__all__ = [
    "AtomId", "DenseDictionary", "Dictionary", "HeisenbergDictionary", "build_heisenberg",
    "build_random_onb_union", "coherence", "gauss_sum_magnitude", "load_dictionary",
    "resolution_apply", "save_dictionary", "RecoveryResult", "omp", "EigenResult",
    "RipReport", "gram", "hermitian_eigenvalues", "rip_deviation", "rip_exact_check",
    "DecayFit", "ScanConfig", "ScanReport", "SpectrumResult", "error_spectrum",
    "estimate_decay", "ks_distance", "sample_support", "semicircle_cdf", "spectral_moment",
    "srip_scan", "srip_trial",
]
