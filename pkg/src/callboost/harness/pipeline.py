"""The boosting pipeline and its evaluation report.

Per utterance: optional G-extension and lattice rescoring on the lattice,
1-best extraction, callsign spotting (or injected NER candidates), optional
re-ranking against the surveillance snapshot, and mapping to an ICAO code.
"""

from __future__ import annotations

import dataclasses
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..bias import (BoostConfig, SurveillanceSnapshot, build_biasing_fst, callsign_expansions, extend_grammar,
                    read_surveillance)
from ..errors import ConfigurationError
from ..flags import NO_CALLSIGN, NoResult
from ..grammar import AirlineLexicon, extract_icao
from ..rerank import LevCosts, rerank, spot_callsign
from ..rescore import best_hypothesis, read_lattice_archive, rescore_lattice
from ..wfst import SymbolTable, Wfst, compose, sigma_acceptor
from .data import Reference, read_candidates, read_hypotheses, read_references
from .metrics import evaluate_callsigns, word_error_rate

log = logging.getLogger(__name__)

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


@dataclass
class RunConfig:
    lattice_rescoring: bool = False
    g_extension: bool = False
    nlp_boosting: bool = False
    boost: BoostConfig = field(default_factory=BoostConfig)
    costs: LevCosts = field(default_factory=LevCosts)
    max_distance: Optional[float] = None
    rerank_shortened: bool = False
    lattices: Optional[str] = None
    hypotheses: Optional[str] = None
    oracle: bool = False  # use reference transcripts as hypotheses
    surveillance: Optional[str] = None
    references: Optional[str] = None
    candidates: Optional[str] = None
    lexicon: Optional[str] = None
    report: Optional[str] = None
    log: Optional[str] = None
    test_set: str = "test"
    seed: int = 0
    workers: int = 1

    def validate(self) -> None:
        if not (self.lattices or self.hypotheses or self.oracle):
            raise ConfigurationError("need a lattice archive, a hypothesis file or oracle mode")
        if (self.lattice_rescoring or self.g_extension) and not self.lattices:
            raise ConfigurationError("lattice rescoring and G-extension need a lattice archive")
        if (self.lattice_rescoring or self.g_extension or self.nlp_boosting) and not self.surveillance:
            raise ConfigurationError("boosting needs a surveillance file")
        if self.oracle and not self.references:
            raise ConfigurationError("oracle mode needs a references file")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")

    def settings(self) -> dict:
        """Every setting, defaults included, flattened for the report header."""
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if dataclasses.is_dataclass(value):
                for g in dataclasses.fields(value):
                    out[f"{f.name}.{g.name}"] = getattr(value, g.name)
            else:
                out[f.name] = value
        return out

    def switches(self) -> str:
        return "".join("x" if s else "-" for s in (self.lattice_rescoring, self.g_extension, self.nlp_boosting))


_BOOST_KEYS = {"discount": "discount", "include_shortened": "include_shortened", "g_discount": "g_discount"}
_COST_KEYS = {"sub_cost": "substitution", "ins_cost": "insertion", "del_cost": "deletion",
              "airline_del_cost": "airline_deletion"}


def _parse_value(key: str, raw: str, current):
    raw = raw.strip()
    if isinstance(current, bool):
        if raw.lower() in _BOOL_TRUE:
            return True
        if raw.lower() in _BOOL_FALSE:
            return False
        raise ConfigurationError(f"{key}: expected a boolean, got {raw!r}")
    try:
        if isinstance(current, int):
            return int(raw)
        if isinstance(current, float) or key == "max_distance":
            return None if raw.lower() in ("", "none") else float(raw)
    except ValueError:
        raise ConfigurationError(f"{key}: expected a number, got {raw!r}") from None
    return raw or None


def apply_settings(cfg: RunConfig, items: dict, base_dir: Optional[Path] = None) -> RunConfig:
    """Return ``cfg`` updated from ``key -> raw string`` pairs (config file or CLI)."""
    boost = dataclasses.asdict(cfg.boost)
    costs = dataclasses.asdict(cfg.costs)
    plain = {}
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    for key, raw in items.items():
        key = key.strip().replace("-", "_")
        if key in _BOOST_KEYS:
            boost[_BOOST_KEYS[key]] = _parse_value(key, raw, boost[_BOOST_KEYS[key]])
        elif key in _COST_KEYS:
            costs[_COST_KEYS[key]] = _parse_value(key, raw, costs[_COST_KEYS[key]])
        elif key in fields and key not in ("boost", "costs"):
            value = _parse_value(key, raw, getattr(cfg, key))
            if key in ("lattices", "hypotheses", "surveillance", "references", "candidates", "lexicon",
                       "report", "log") and value and base_dir is not None:
                value = str((base_dir / value) if not Path(value).is_absolute() else Path(value))
            plain[key] = value
        else:
            raise ConfigurationError(f"unknown config key {key!r}")
    try:
        return dataclasses.replace(cfg, boost=BoostConfig(**boost), costs=LevCosts(**costs), **plain)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None


def read_config(path, cfg: Optional[RunConfig] = None) -> RunConfig:
    """Read a ``key = value`` file; relative paths resolve against its directory."""
    items = {}
    path = Path(path)
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        items[key.strip()] = value.strip()
    return apply_settings(cfg or RunConfig(), items, path.parent)


@dataclass
class Decision:
    id: str
    predicted: Optional[str]
    reference: Optional[str]
    correct: bool
    hypothesis: tuple[str, ...] = ()
    candidate: Optional[tuple[str, ...]] = None
    distance: Optional[float] = None
    error: Optional[str] = None


@dataclass
class EvalReport:
    test_set: str
    switches: str
    settings: dict
    with_callsign: int
    without_callsign: int
    accuracy: float
    wer: Optional[float]
    decisions: list[Decision]

    @property
    def errors(self) -> int:
        return sum(1 for d in self.decisions if d.error)

    def summary(self) -> dict:
        return {
            "test_set": self.test_set,
            "lattice_rescoring": self.switches[0] == "x",
            "g_extension": self.switches[1] == "x",
            "nlp_boosting": self.switches[2] == "x",
            "utterances_with_callsign": self.with_callsign,
            "utterances_without_callsign": self.without_callsign,
            "callsign_accuracy": round(self.accuracy, 4),
            "wer": None if self.wer is None else round(self.wer, 4),
            "errors": self.errors,
        }

    def to_text(self) -> str:
        out = io.StringIO()
        out.write("# settings\n")
        for key, value in self.settings.items():
            out.write(f"#   {key} = {value}\n")
        out.write("# utterances without a reference callsign count as correct only if nothing is predicted\n")
        out.write(f"{'test set':<12} {'with':>6} {'w/o':>6}  LR GE NLP  {'accuracy':>9} {'WER':>7}\n")
        wer = "n/a" if self.wer is None else f"{self.wer:.1f}"
        sw = "  ".join(self.switches)
        out.write(f"{self.test_set:<12} {self.with_callsign:>6} {self.without_callsign:>6}  {sw}   "
                  f"{self.accuracy:>9.1f} {wer:>7}\n")
        if self.errors:
            out.write(f"# {self.errors} utterance(s) had errors and were scored incorrect\n")
        return out.getvalue()

    def to_tsv(self) -> str:
        lines = ["id\tpredicted\treference\tcorrect\tcandidate\tdistance\terror"]
        for d in self.decisions:
            cand = "NO_CALLSIGN" if d.candidate is None else " ".join(d.candidate)
            dist = "" if d.distance is None else f"{d.distance:.6g}"
            lines.append(f"{d.id}\t{d.predicted or 'NONE'}\t{d.reference or 'NONE'}\t{int(d.correct)}\t"
                         f"{cand}\t{dist}\t{d.error or ''}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({"summary": self.summary(), "settings": {k: str(v) for k, v in self.settings.items()}},
                          indent=2, sort_keys=True)


@dataclass
class Inputs:
    lexicon: AirlineLexicon
    references: dict[str, Reference]
    snapshots: dict[str, SurveillanceSnapshot] = field(default_factory=dict)
    table: Optional[SymbolTable] = None
    lattices: dict[str, Wfst] = field(default_factory=dict)
    hypotheses: dict[str, list[str]] = field(default_factory=dict)
    candidates: dict = field(default_factory=dict)


def load_inputs(cfg: RunConfig) -> Inputs:
    cfg.validate()
    lex = AirlineLexicon.from_file(cfg.lexicon) if cfg.lexicon else AirlineLexicon.default()
    if not cfg.references:
        raise ConfigurationError("evaluation needs a references file")
    inputs = Inputs(lex, read_references(cfg.references))
    if cfg.surveillance:
        inputs.snapshots = read_surveillance(cfg.surveillance)
    if cfg.lattices:
        inputs.table, inputs.lattices = read_lattice_archive(cfg.lattices)
    if cfg.hypotheses:
        inputs.hypotheses = read_hypotheses(cfg.hypotheses)
    if cfg.candidates:
        inputs.candidates = read_candidates(cfg.candidates)
    return inputs


class _Context:
    """Read-only state shared by every utterance of one run."""

    def __init__(self, cfg: RunConfig, inputs: Inputs):
        self.cfg = cfg
        self.inputs = inputs
        self.grammar = None
        if cfg.g_extension:
            everything = list(dict.fromkeys(c for s in inputs.snapshots.values() for c in s.callsigns))
            g = sigma_acceptor(inputs.table)
            self.grammar = extend_grammar(g, everything, inputs.lexicon, cfg.boost, inputs.table)
            log.info("G-extension over %d callsigns: %s", len(everything), self.grammar)

    def hypothesis(self, uid: str) -> tuple[list[str], Optional[str]]:
        cfg, inputs = self.cfg, self.inputs
        if cfg.oracle:
            return list(inputs.references[uid].words), None
        if uid not in inputs.lattices:
            if uid in inputs.hypotheses:
                return inputs.hypotheses[uid], None
            return [], "no lattice or hypothesis"
        lattice = inputs.lattices[uid]
        error = None
        if self.grammar is not None:
            lattice = compose(lattice, self.grammar)
        if cfg.lattice_rescoring:
            snapshot = inputs.snapshots.get(uid)
            if snapshot is None:
                error = "missing surveillance snapshot"
            else:
                lattice = rescore_lattice(lattice, build_biasing_fst(snapshot, inputs.lexicon, cfg.boost,
                                                                     inputs.table))
        hyp = best_hypothesis(lattice, inputs.table)
        if isinstance(hyp, NoResult):
            return [], error or "empty lattice"
        return hyp, error

    def decide(self, uid: str) -> Decision:
        cfg, inputs = self.cfg, self.inputs
        ref = inputs.references[uid]
        hyp, error = self.hypothesis(uid)
        if uid in inputs.candidates:
            candidate = inputs.candidates[uid]
        else:
            candidate = spot_callsign(hyp, inputs.lexicon)
        predicted, distance = None, None
        if candidate is not NO_CALLSIGN:
            predicted = extract_icao(candidate, inputs.lexicon)
            if cfg.nlp_boosting:
                snapshot = inputs.snapshots.get(uid)
                if snapshot is None:
                    error = error or "missing surveillance snapshot"
                else:
                    expansions = callsign_expansions(snapshot.callsigns, inputs.lexicon, cfg.rerank_shortened)
                    result = rerank(candidate, expansions, cfg.costs, cfg.max_distance)
                    if not isinstance(result.icao, NoResult):
                        predicted, distance = result.icao, result.distance
        correct = error is None and predicted == ref.icao
        cand = None if candidate is NO_CALLSIGN else tuple(candidate)
        return Decision(uid, predicted, ref.icao, correct, tuple(hyp), cand, distance, error)


_WRONG = "<error>"
_worker_ctx: Optional[_Context] = None


def _init_worker(cfg, inputs):
    global _worker_ctx
    _worker_ctx = _Context(cfg, inputs)


def _decide_chunk(ids):
    return [_worker_ctx.decide(uid) for uid in ids]


def evaluate(cfg: RunConfig, inputs: Inputs) -> EvalReport:
    """Run the configured pipeline over every reference utterance."""
    ids = list(inputs.references)
    if cfg.workers > 1 and len(ids) > 1:
        size = max(1, len(ids) // (cfg.workers * 4))
        chunks = [ids[i:i + size] for i in range(0, len(ids), size)]
        with ProcessPoolExecutor(cfg.workers, initializer=_init_worker, initargs=(cfg, inputs)) as pool:
            decisions = [d for chunk in pool.map(_decide_chunk, chunks) for d in chunk]
    else:
        ctx = _Context(cfg, inputs)
        decisions = [ctx.decide(uid) for uid in ids]

    # an utterance that hit an error counts as wrong whatever it predicted
    accuracy = evaluate_callsigns({d.id: d.predicted if d.correct else _WRONG for d in decisions},
                                  {uid: r.icao for uid, r in inputs.references.items()})
    wer = None
    if all(r.words for r in inputs.references.values()):
        wer = word_error_rate({d.id: d.hypothesis for d in decisions},
                              {uid: r.words for uid, r in inputs.references.items()})
    with_cs = sum(1 for r in inputs.references.values() if r.icao)
    return EvalReport(cfg.test_set, cfg.switches(), cfg.settings(), with_cs, len(ids) - with_cs,
                      accuracy, wer, decisions)


def run_pipeline(cfg: RunConfig, inputs: Optional[Inputs] = None) -> EvalReport:
    """Load inputs (unless given), evaluate, and write the report files if configured."""
    if inputs is None:
        inputs = load_inputs(cfg)
    else:
        cfg.validate()
    report = evaluate(cfg, inputs)
    if cfg.report:
        Path(cfg.report).write_text(report.to_text(), encoding="utf-8")
        Path(cfg.report).with_suffix(".json").write_text(report.to_json(), encoding="utf-8")
    if cfg.log:
        Path(cfg.log).write_text(report.to_tsv(), encoding="utf-8")
    return report


ABLATION = [(lr, ge, nlp) for nlp in (False, True) for lr, ge in
            ((False, False), (True, False), (False, True), (True, True))]


def run_ablation(cfg: RunConfig, inputs: Optional[Inputs] = None) -> list[EvalReport]:
    """Every on/off combination of the three boosting switches, baseline first."""
    if inputs is None:
        inputs = load_inputs(dataclasses.replace(cfg, lattice_rescoring=False, g_extension=False,
                                                 nlp_boosting=False))
    reports = []
    for lr, ge, nlp in ABLATION:
        run = dataclasses.replace(cfg, lattice_rescoring=lr, g_extension=ge, nlp_boosting=nlp, report=None, log=None)
        if (lr or ge) and not inputs.lattices:
            continue
        reports.append(evaluate(run, inputs))
    return reports


def ablation_table(reports: list[EvalReport]) -> str:
    lines = [f"{'LR':>3} {'GE':>3} {'NLP':>4}  {'accuracy':>9} {'WER':>7}"]
    for r in reports:
        wer = "n/a" if r.wer is None else f"{r.wer:.1f}"
        lr, ge, nlp = (("x" if c == "x" else "-") for c in r.switches)
        lines.append(f"{lr:>3} {ge:>3} {nlp:>4}  {r.accuracy:>9.1f} {wer:>7}")
    return "\n".join(lines) + "\n"
