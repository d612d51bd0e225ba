"""Surveillance-aware callsign boosting for air-traffic-control speech recognition.

Two places to inject the callsigns active on radar: weighted-FST biasing of
recognition lattices (and of the grammar), and weighted Levenshtein re-ranking
of the callsign spotted in the 1-best hypothesis.
"""

from .bias import BoostConfig, SurveillanceSnapshot, build_biasing_fst, extend_grammar, snapshot_expansions
from .errors import CallsignParseError, ConfigurationError, ContractViolation
from .flags import NO_CALLSIGN, NO_HYPOTHESIS, NO_MATCH
from .grammar import AirlineLexicon, Expansion, ParsedCallsign, expand, extract_icao, parse_icao, shortened_variants
from .rerank import LevCosts, RerankResult, rerank, spot_callsign, weighted_levenshtein
from .rescore import Utterance, best_hypothesis, rescore_lattice
from .wfst import SymbolTable, Wfst, WfstBuilder, compose, linear_acceptor, shortest_path, trim, union

__version__ = "0.1.0"
