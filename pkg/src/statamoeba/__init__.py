"""Sign strata of sums of exponentials: region maps, zero loci and max-plus limits."""

from .core_model import (
    FunctionFamily,
    LinearSpec,
    PolynomialSpec,
    RadialBumpSpec,
    SubsetMask,
    dedup_for_loci,
    enumerate_subsets,
    linear_family,
    load_model,
)
from .evaluator import SignVector, sign_of, sign_vector, z0, zk_log_gap, zk_value
from .grid import GridSpec
from .loci import detect_pairwise_intersections, extract_zero_locus, stratum_loci
from .polygon import build_closed_polygon, k_constructibility_check, lopsided_index
from .presets import get_preset, preset_names
from .regions import CellClass, RegionMap, classify_grid, label_subdomains, spin_thermodynamics
from .tropical import skeleton_2d, tropical_stratum_membership
from .verify import VerifyReport, run_verify

__version__ = "0.1.0"

__all__ = [
    "CellClass",
    "FunctionFamily",
    "GridSpec",
    "LinearSpec",
    "PolynomialSpec",
    "RadialBumpSpec",
    "RegionMap",
    "SignVector",
    "SubsetMask",
    "VerifyReport",
    "build_closed_polygon",
    "classify_grid",
    "dedup_for_loci",
    "detect_pairwise_intersections",
    "enumerate_subsets",
    "extract_zero_locus",
    "get_preset",
    "k_constructibility_check",
    "label_subdomains",
    "linear_family",
    "load_model",
    "lopsided_index",
    "preset_names",
    "run_verify",
    "sign_of",
    "sign_vector",
    "skeleton_2d",
    "spin_thermodynamics",
    "stratum_loci",
    "tropical_stratum_membership",
    "z0",
    "zk_log_gap",
    "zk_value",
]
