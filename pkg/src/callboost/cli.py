"""Command-line entry point: ``callboost <command> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import augment as aug
from .bias import BoostConfig, build_biasing_fst, callsign_expansions, read_surveillance
from .errors import CallsignParseError, ConfigurationError
from .grammar import AirlineLexicon, expand, parse_icao, shortened_variants
from .harness.data import read_candidates, read_hypotheses, read_predictions, read_references, write_hypotheses
from .harness.metrics import evaluate_callsigns, word_error_rate
from .harness.pipeline import RunConfig, ablation_table, apply_settings, read_config, run_ablation, run_pipeline
from .harness.synth import SynthConfig, synth_testset
from .rerank import LevCosts, rerank
from .rescore import best_hypothesis, read_lattice_archive, rescore_lattice
from .wfst import SymbolTable

log = logging.getLogger("callboost")


def _lexicon(args) -> AirlineLexicon:
    return AirlineLexicon.from_file(args.lexicon) if args.lexicon else AirlineLexicon.default()


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_expand(args) -> int:
    lex = _lexicon(args)
    status = 0
    for code in args.codes:
        try:
            forms = expand(parse_icao(code), lex)
        except CallsignParseError as exc:
            print(f"error: {exc}", file=sys.stderr)
            status = 1
            continue
        if args.shortened:
            forms = forms + [v for e in forms for v in shortened_variants(e)]
        for e in dict.fromkeys(forms):
            print(f"{code}\t{e.kind}\t{e.text}")
    return status


def cmd_bias(args) -> int:
    lex = _lexicon(args)
    snapshots = read_surveillance(args.surveillance)
    if args.utterance not in snapshots:
        raise ConfigurationError(f"utterance {args.utterance!r} not in {args.surveillance}")
    table = SymbolTable.from_text(Path(args.symbols).read_text()) if Path(args.symbols).exists() else SymbolTable()
    cfg = BoostConfig(discount=args.discount, include_shortened=args.shortened)
    fst = build_biasing_fst(snapshots[args.utterance], lex, cfg, table)
    Path(args.symbols).write_text(table.to_text(), encoding="utf-8")
    _write(args.output, fst.to_text(table))
    return 0


def cmd_rescore(args) -> int:
    lex = _lexicon(args)
    table, lattices = read_lattice_archive(args.lattices)
    snapshots = read_surveillance(args.surveillance)
    cfg = BoostConfig(discount=args.discount, include_shortened=args.shortened)
    out = {}
    for uid, lattice in lattices.items():
        if uid in snapshots:
            lattice = rescore_lattice(lattice, build_biasing_fst(snapshots[uid], lex, cfg, table))
        else:
            log.warning("%s: no surveillance snapshot, lattice left unchanged", uid)
        out[uid] = best_hypothesis(lattice, table)
    if args.output:
        write_hypotheses(args.output, out)
    else:
        for uid, words in out.items():
            print(f"{uid}\t{' '.join(words) if isinstance(words, list) else words}")
    return 0


def cmd_rerank(args) -> int:
    lex = _lexicon(args)
    candidates = read_candidates(args.candidates)
    snapshots = read_surveillance(args.surveillance)
    costs = LevCosts(args.sub_cost, args.ins_cost, args.del_cost, args.airline_del_cost)
    lines = []
    for uid, cand in candidates.items():
        snap = snapshots.get(uid)
        expansions = callsign_expansions(snap.callsigns, lex, args.shortened) if snap else {}
        res = rerank(cand, expansions, costs, args.max_distance)
        dist = "" if res.skipped else f"{res.distance:.6g}"
        lines.append(f"{uid}\t{res.icao}\t{dist}\n")
    _write(args.output, "".join(lines))
    return 0


def cmd_augment(args) -> int:
    corpus = aug.read_corpus(args.corpus)
    lex = _lexicon(args)
    codes = []
    if args.callsigns:
        codes = [c.strip() for c in args.callsigns.split(",") if c.strip()]
    elif args.surveillance:
        codes = list(dict.fromkeys(c for s in read_surveillance(args.surveillance).values() for c in s.callsigns))
    if codes:
        pool = [e for es in callsign_expansions(codes, lex).values() for e in es]
    else:
        pool = list(dict.fromkeys(u.tokens[s:e] for u in corpus for s, e in [u.callsign_span() or (0, 0)] if e > s))
    out = aug.generate_corpus(corpus, args.target, pool, args.seed)
    _write(args.output, aug.format_corpus(out))
    return 0


def cmd_synth(args) -> int:
    cfg = SynthConfig(n_utterances=args.n, noise_rate=args.noise, distractors=args.distractors, seed=args.seed,
                      shortened_rate=args.shortened_rate, no_callsign_rate=args.no_callsign_rate)
    data = synth_testset(cfg, _lexicon(args))
    paths = data.write(args.out)
    print(f"wrote {len(data.references)} utterances to {args.out}; run with: callboost pipeline --config {paths['config']}")
    return 0


def cmd_eval(args) -> int:
    refs = read_references(args.references)
    preds = read_predictions(args.predictions)
    acc = evaluate_callsigns(preds, {k: r.icao for k, r in refs.items()})
    print(f"callsign accuracy\t{acc:.2f}")
    if args.hypotheses:
        hyps = read_hypotheses(args.hypotheses)
        print(f"WER\t{word_error_rate(hyps, {k: r.words for k, r in refs.items()}):.2f}")
    return 0


def cmd_pipeline(args) -> int:
    cfg = read_config(args.config) if args.config else RunConfig()
    overrides = dict(kv.split("=", 1) for kv in args.set or [])
    for name in ("lattice_rescoring", "g_extension", "nlp_boosting", "oracle"):
        if getattr(args, name):
            overrides[name] = "true"
    for name in ("report", "log", "workers"):
        if getattr(args, name) is not None:
            overrides[name] = str(getattr(args, name))
    cfg = apply_settings(cfg, overrides, Path.cwd())
    if args.ablation:
        print(ablation_table(run_ablation(cfg)), end="")
        return 0
    report = run_pipeline(cfg)
    print(report.to_text(), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="callboost", description="Surveillance-aware callsign boosting for ATC ASR.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def lexicon_arg(sp):
        sp.add_argument("--lexicon", help="airline lexicon file (default: bundled)")

    sp = sub.add_parser("expand", help="spoken forms of ICAO callsigns")
    sp.add_argument("codes", nargs="+")
    sp.add_argument("--shortened", action="store_true", help="also list shortened variants")
    lexicon_arg(sp)
    sp.set_defaults(func=cmd_expand)

    sp = sub.add_parser("bias", help="biasing FST for one utterance's snapshot")
    sp.add_argument("--surveillance", required=True)
    sp.add_argument("--utterance", required=True)
    sp.add_argument("--symbols", required=True, help="symbol table file, extended in place")
    sp.add_argument("--discount", type=float, default=BoostConfig.discount)
    sp.add_argument("--shortened", action="store_true")
    sp.add_argument("-o", "--output")
    lexicon_arg(sp)
    sp.set_defaults(func=cmd_bias)

    sp = sub.add_parser("rescore", help="boosted 1-best for every lattice of an archive")
    sp.add_argument("--lattices", required=True)
    sp.add_argument("--surveillance", required=True)
    sp.add_argument("--discount", type=float, default=BoostConfig.discount)
    sp.add_argument("--shortened", action="store_true")
    sp.add_argument("-o", "--output")
    lexicon_arg(sp)
    sp.set_defaults(func=cmd_rescore)

    sp = sub.add_parser("rerank", help="map candidate callsigns onto the surveillance list")
    sp.add_argument("--candidates", required=True)
    sp.add_argument("--surveillance", required=True)
    sp.add_argument("--sub-cost", type=float, default=LevCosts.substitution)
    sp.add_argument("--ins-cost", type=float, default=LevCosts.insertion)
    sp.add_argument("--del-cost", type=float, default=LevCosts.deletion)
    sp.add_argument("--airline-del-cost", type=float, default=LevCosts.airline_deletion)
    sp.add_argument("--max-distance", type=float)
    sp.add_argument("--shortened", action="store_true", help="compare against shortened variants too")
    sp.add_argument("-o", "--output")
    lexicon_arg(sp)
    sp.set_defaults(func=cmd_rerank)

    sp = sub.add_parser("augment", help="grow a tagged corpus with callsign add/delete/swap/move")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--target", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--callsigns", help="comma-separated ICAO codes for the pool")
    sp.add_argument("--surveillance", help="take the pool from every callsign in this file")
    sp.add_argument("-o", "--output")
    lexicon_arg(sp)
    sp.set_defaults(func=cmd_augment)

    sp = sub.add_parser("synth", help="generate a synthetic test set")
    sp.add_argument("--out", required=True)
    sp.add_argument("-n", type=int, default=1000)
    sp.add_argument("--noise", type=float, default=0.4)
    sp.add_argument("--distractors", type=int)
    sp.add_argument("--shortened-rate", type=float, default=SynthConfig.shortened_rate)
    sp.add_argument("--no-callsign-rate", type=float, default=SynthConfig.no_callsign_rate)
    sp.add_argument("--seed", type=int, default=0)
    lexicon_arg(sp)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("eval", help="score ICAO predictions (and optionally hypotheses)")
    sp.add_argument("--predictions", required=True)
    sp.add_argument("--references", required=True)
    sp.add_argument("--hypotheses")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("pipeline", help="full boosting run with evaluation report")
    sp.add_argument("--config")
    sp.add_argument("--lattice-rescoring", action="store_true")
    sp.add_argument("--g-extension", action="store_true")
    sp.add_argument("--nlp-boosting", action="store_true")
    sp.add_argument("--oracle", action="store_true", help="use reference transcripts as hypotheses")
    sp.add_argument("--ablation", action="store_true", help="run all switch combinations")
    sp.add_argument("--report")
    sp.add_argument("--log")
    sp.add_argument("--workers", type=int)
    sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
    sp.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, aug.AugmentError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
