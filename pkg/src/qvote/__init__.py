"""Simulation of quantum-counting-based voting against classical sampling."""

from .algorithms import (CostReport, VoteOutcome, classical_trials, classical_vote,
                         quantum_trials, quantum_vote)
from .counting import (CountingDistribution, CountingParams, counting_round, estimate_count,
                       pe_distribution, phase_of, sample_outcome)
from .profiles import Family, ProfileFamilySpec
from .voting import Rule, rankings_of, winner, winner_set

__all__ = [
    "CostReport", "CountingDistribution", "CountingParams", "Family", "ProfileFamilySpec",
    "Rule", "VoteOutcome", "classical_trials", "classical_vote", "counting_round",
    "estimate_count", "pe_distribution", "phase_of", "quantum_trials", "quantum_vote",
    "rankings_of", "sample_outcome", "winner", "winner_set",
]
