"""Explicit "nothing found" markers passed between pipeline stages."""

import enum


class NoResult(enum.Enum):
    NO_HYPOTHESIS = "NO_HYPOTHESIS"  # empty lattice
    NO_CALLSIGN = "NO_CALLSIGN"  # spotter found no callsign entity
    NO_MATCH = "NO_MATCH"  # re-ranking skipped or nothing to match against

    def __repr__(self):
        return self.value

    def __str__(self):
        return self.value


NO_HYPOTHESIS = NoResult.NO_HYPOTHESIS
NO_CALLSIGN = NoResult.NO_CALLSIGN
NO_MATCH = NoResult.NO_MATCH
