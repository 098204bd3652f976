"""Meter copies and their weights for a relative-frequency measurement on N systems."""
from everett.freqmap import PhiGrid, bin_of_count, bin_range, quantize, quantize_tilde, rel_freq
from everett.heisenberg import LabeledDecomposition, decompose, evolve
from everett.oracle import OracleReport, verify_scenario
from everett.scenario import Scenario, Structure, build_initial_state, build_total_U
from everett.weights import (
    TieDecomposition,
    WeightTable,
    closed_form_weights,
    lln_tail,
    tie_decomposition,
)

__all__ = [
    "LabeledDecomposition",
    "OracleReport",
    "PhiGrid",
    "Scenario",
    "Structure",
    "TieDecomposition",
    "WeightTable",
    "bin_of_count",
    "bin_range",
    "build_initial_state",
    "build_total_U",
    "closed_form_weights",
    "decompose",
    "evolve",
    "lln_tail",
    "quantize",
    "quantize_tilde",
    "rel_freq",
    "tie_decomposition",
    "verify_scenario",
]
