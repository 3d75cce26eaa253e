from __future__ import annotations
"""Command-line front end of the workbench.

Exit codes: 0 success (accept/reject is data), 1 usage/config/parse/size
error, 2 internal invariant violation.
"""
import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .core import metrics as _metrics
from .core.hypergraph import (
    color_stats,
    exact_coloring,
    greedy_coloring,
    random_hypergraph,
    union_jack,
    validate_cover,
)
from .core.logging_utils import JsonLogger
from .core.models import (
    CaseStudyTranscript,
    ConfigError,
    InvariantViolation,
    NotDeskExecutable,
    VerifierTranscript,
    WorkbenchError,
)
from .core.protocol import (
    ProverModel,
    acceptance_summary,
    completeness_experiment,
    derive_paper_params,
    detectability_check,
    expected_acceptance,
    full_scale_completeness_bound,
    full_scale_counts,
    group_slots,
    honest_pass_probability,
    run_case_study,
    run_trials,
    run_verification,
    soundness_bound,
    soundness_experiment,
    stabilizer_pass_probabilities,
)
from .core.stabilizer import (
    TestSlot,
    analytic_pass_probability,
    parity_check_batch,
    slot_vertices,
)
from .core.stats import FrequencyEstimate, completeness_bound, hoeffding_tail, make_rng
from .io.config import AppConfig, load_config
from .io.reports import key_value_rows, outcome_rows, rows_to_csv, summary_rows, write_csv, write_transcripts
from .io.specs import (
    CoverSpec,
    ResolvedRun,
    load_cover_file,
    load_hypergraph_source,
    load_run_config,
    parse_correctable,
    resolve_cover,
    resolve_run,
    resolve_state,
    run_config_schema,
)
from .sim.state_sim import as_dict_dump, basis_for_class, build_state, sample_outcomes, stabilizer_g


class UsageError(ConfigError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(args: argparse.Namespace, payload: Dict[str, Any], rows: Optional[List[List[str]]] = None) -> None:
    if args.format == "csv" and rows is not None:
        text = rows_to_csv(rows)
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        _info(f"[OK] geschrieben: {out}")
    else:
        sys.stdout.write(text)


def _logger(cfg: AppConfig) -> JsonLogger:
    return JsonLogger(cfg.log_dir, "workbench", subdir="")


def _hypergraph_and_cover(source: str, cfg: AppConfig, exact: bool = False,
                          cover_file: Optional[str] = None) -> tuple:
    h, built_in = load_hypergraph_source(source)
    if h.n > cfg.limits.sim_max_qubits:
        raise ConfigError(f"{h.n} qubits exceed the simulator limit {cfg.limits.sim_max_qubits}")
    if cover_file:
        cover = load_cover_file(Path(cover_file))
        spec = CoverSpec(classes=[list(c) for c in cover.classes],
                         weights=list(cover.weights) if cover.weights is not None else None)
    else:
        spec = CoverSpec(method="exact" if exact else "auto")
    return h, resolve_cover(h, spec, built_in, cfg.limits)


# ---- color ---- #

def cmd_color(args: argparse.Namespace, cfg: AppConfig) -> int:
    h, built_in = load_hypergraph_source(args.source)
    if args.exact:
        cover = exact_coloring(h, cfg.limits.color_vertex_limit)
        stats = color_stats(cover, optimal=True)
    else:
        cover = built_in if (built_in is not None and not args.greedy) else greedy_coloring(h)
        stats = color_stats(cover)
    check = validate_cover(h, cover)
    if not check.ok:
        raise InvariantViolation(f"generated cover is improper: {check.reason}")
    payload = {
        "n": h.n,
        **cover.to_dict(),
        "m": stats.m,
        "gamma": stats.gamma,
        "class_sizes": list(stats.class_sizes),
    }
    rows = [["class", "size", "vertices"]]
    rows += [[str(i), str(len(c)), " ".join(map(str, c))] for i, c in enumerate(cover.classes)]
    _emit(args, payload, rows)
    return 0


# ---- state ---- #

def cmd_state(args: argparse.Namespace, cfg: AppConfig) -> int:
    h, _ = load_hypergraph_source(args.source)
    state = resolve_state(args.state, h, cfg.limits.sim_max_qubits)
    ideal = build_state(h, cfg.limits.sim_max_qubits)
    residuals = []
    for i in range(h.n):
        g = stabilizer_g(h, i)
        residuals.append(float(np.linalg.norm(g.apply_array(ideal.amplitudes) - ideal.amplitudes)))
    max_residual = max(residuals) if residuals else 0.0
    payload: Dict[str, Any] = {
        "n": h.n,
        "edges": len(h.edges),
        "state": args.state,
        "norm": state.pure.norm if state.pure is not None else 1.0,
        "max_stabilizer_residual": max_residual,
        "fixed_point": max_residual < 1e-10,
    }
    if args.dump and state.pure is not None:
        payload["dump"] = as_dict_dump(state.pure)["amplitudes"]
    if max_residual >= 1e-10:
        raise InvariantViolation(f"|H> is not fixed by every g_i (residual {max_residual:.3e})")
    _emit(args, payload, key_value_rows({k: v for k, v in payload.items() if k != "dump"}))
    return 0


# ---- test ---- #

def cmd_test(args: argparse.Namespace, cfg: AppConfig) -> int:
    h, cover = _hypergraph_and_cover(args.source, cfg, args.exact, args.cover)
    if args.class_index < 0 or args.class_index >= cover.m:
        raise ConfigError(f"--class {args.class_index} out of range 0..{cover.m - 1}")
    S = parse_correctable(args.S)
    state = resolve_state(args.state, h, cfg.limits.sim_max_qubits)
    slot = TestSlot(args.class_index, args.config)
    vertices = slot_vertices(cover, slot)
    basis = basis_for_class(h.n, vertices)
    rng = make_rng(args.seed)
    outcomes = state.sample(basis, rng, args.trials)
    syndromes = parity_check_batch(h, vertices, outcomes)
    passed = S.contains_batch(syndromes)
    _metrics.inc_color_tests(args.trials, int(passed.sum()))
    est = FrequencyEstimate.from_counts(int(passed.sum()), args.trials)
    analytic = None
    if h.n <= cfg.limits.oracle_max_qubits and (state.pure is not None or h.n <= cfg.limits.density_max_qubits):
        analytic = analytic_pass_probability(state.analytic(cfg.limits.density_max_qubits), h, cover,
                                             args.class_index, S, args.config, cfg.limits.oracle_max_qubits)
    payload = {
        "class": args.class_index,
        "config": args.config,
        "x_vertices": list(vertices),
        "state": args.state,
        "S": S.to_dict(),
        "trials": args.trials,
        "seed": args.seed,
        "frequency": est.estimate,
        "wilson": [est.low, est.high],
        "analytic": analytic,
    }
    if args.outcomes:
        write_csv(Path(args.outcomes), outcome_rows(
            passed.tolist(),
            ["".join(map(str, row)) for row in syndromes],
            ["".join(map(str, row)) for row in outcomes],
        ))
    flat = {k: v for k, v in payload.items() if k not in ("S", "x_vertices", "wilson")}
    flat.update({"wilson_low": est.low, "wilson_high": est.high})
    _emit(args, payload, key_value_rows(flat))
    return 0


# ---- params ---- #

def cmd_params(args: argparse.Namespace, cfg: AppConfig) -> int:
    params = derive_paper_params(args.N, args.gamma, args.r, args.k)
    assert params.exact is not None
    exact = params.exact
    payload = {
        "N": args.N,
        "gamma": args.gamma,
        "r": str(args.r),
        "k": args.k,
        **exact.to_dict(),
        "threshold": f"1/2 + (1 - {exact.epsilon})/{args.r}",
        "completeness_bound": full_scale_completeness_bound(args.N, args.gamma, args.r, args.k),
        "soundness_bound": str(soundness_bound(args.N, exact.upsilon)),
    }
    rows = [["name", "value"]] + [[k, str(v)] for k, v in payload.items()]
    _emit(args, payload, rows)
    return 0


# ---- protocol ---- #

def _case_study_summary(run: ResolvedRun, transcripts: Sequence[CaseStudyTranscript]) -> Dict[str, Any]:
    est = acceptance_summary([t.decision for t in transcripts])
    out: Dict[str, Any] = {"acceptance": est.to_dict(), "k": run.config.params.k}
    if run.prover.variant == "single-bad-copy":
        out["expected_fooling"] = 1.0 / (6 * run.config.params.k + 1)
        out["accepts_only_when_bad_escaped"] = all(t.bad_escaped for t in transcripts if t.decision)
    return out


def _verification_summary(run: ResolvedRun, transcripts: Sequence[VerifierTranscript]) -> Dict[str, Any]:
    params = run.params
    est = acceptance_summary([t.decision for t in transcripts])
    out: Dict[str, Any] = {
        "acceptance": est.to_dict(),
        "threshold": params.threshold,
        "register_count": params.register_count,
        "honest_pass_probability": honest_pass_probability(run.hypergraph, run.cover, run.S,
                                                           group_slots(run.cover, params.upsilon)),
    }
    if params.epsilon > 0:
        k_min = min(params.k_per_group)
        out["hoeffding_tail"] = hoeffding_tail(params.epsilon, params.r, k_min)
        out["completeness_bound"] = completeness_bound(params.upsilon, params.n_qubits, params.epsilon, params.r, k_min)
    if run.prover.variant in ("honest", "fixed-state") and run.S.mode == "zero":
        state = run.prover.state if run.prover.state is not None else build_state(run.hypergraph)
        probs = stabilizer_pass_probabilities(state, run.hypergraph, run.cover, params)
        out["expected_acceptance"] = expected_acceptance(probs, params.k_per_group, params.threshold)
    return out


def cmd_protocol(args: argparse.Namespace, cfg: AppConfig) -> int:
    if args.config_schema:
        _emit(args, run_config_schema())
        return 0
    if not args.config:
        raise UsageError("protocol: config file required")
    config_path = Path(args.config)
    run_cfg = load_run_config(config_path)
    run = resolve_run(run_cfg, config_path.parent, cfg.limits)
    trials = args.trials if args.trials is not None else run_cfg.trials
    seed = args.seed if args.seed is not None else run_cfg.seed
    threads = args.threads if args.threads is not None else (run_cfg.threads if run_cfg.threads > 1 else cfg.threads)
    log = _logger(cfg)
    started = time.perf_counter()
    log.write({"event": "experiment_start", "experiment": run_cfg.experiment, "trials": trials, "seed": seed})
    out_dir = Path(args.out) if args.out else None
    h, cover, S = run.hypergraph, run.cover, run.S

    try:
        if run.params.mode == "paper":
            raise NotDeskExecutable("full-scale parameters are not desk-executable", full_scale_counts(run.params))
        if run_cfg.experiment == "case-study":
            k = run_cfg.params.k
            transcripts: List[Any] = run_trials(
                lambda i, rng, s: run_case_study(h, cover, k, run.prover, S, rng, s), trials, seed, threads)
            summary = _case_study_summary(run, transcripts)
        elif run_cfg.experiment == "verification":
            transcripts = run_trials(
                lambda i, rng, s: run_verification(h, cover, run.params, run.prover, S, rng, s,
                                                   cfg.limits.max_registers),
                trials, seed, threads)
            summary = _verification_summary(run, transcripts)
            log.write({"event": "honest_pass_probability", "value": summary["honest_pass_probability"],
                       "threshold": run.params.threshold})
        elif run_cfg.experiment == "completeness":
            report = completeness_experiment(h, cover, run.params, trials, seed, S, threads, keep_transcripts=True)
            transcripts = report.transcripts
            summary = report.to_dict()
        elif run_cfg.experiment == "soundness":
            sreport = soundness_experiment(h, cover, run.params, run_cfg.params.delta, trials, seed, run.prover,
                                           run_cfg.params.k_values, S, threads, keep_transcripts=True)
            transcripts = sreport.transcripts
            summary = sreport.to_dict()
        else:
            k = run_cfg.params.k
            alpha = run_cfg.params.alpha if run_cfg.params.alpha is not None else 2.0 / (6 * k + 1)
            dreport = detectability_check(run.prover, h, cover, k, alpha, trials, seed, S, threads,
                                          keep_transcripts=True)
            transcripts = dreport.transcripts
            summary = dreport.to_dict()
    except NotDeskExecutable as exc:
        log.write({"event": "full_scale_refused", "counts": exc.counts})
        _info(f"[FEHLER] {exc}")
        for key, value in exc.counts.items():
            _info(f"  {key} = {value}")
        return 1

    summary = {"experiment": run_cfg.experiment, "trials": trials, "seed": seed, **summary}
    transcripts_path = run_cfg.outputs.transcripts or (str(out_dir / "transcripts.jsonl") if out_dir else None)
    summary_path = run_cfg.outputs.summary or (str(out_dir / "summary.csv") if out_dir else None)
    if transcripts_path and transcripts:
        write_transcripts(Path(transcripts_path), transcripts)
        _info(f"[OK] Transkripte: {transcripts_path}")
    if summary_path and transcripts:
        write_csv(Path(summary_path), summary_rows(transcripts))
        _info(f"[OK] Zusammenfassung: {summary_path}")
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(json.dumps(summary, indent=2, sort_keys=True, default=str) + "\n",
                                             encoding="utf-8")
    else:
        sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True, default=str) + "\n")
    duration_ms = (time.perf_counter() - started) * 1000.0
    _metrics.record_experiment(run_cfg.experiment, duration_ms)
    log.write({"event": "experiment_finish", "experiment": run_cfg.experiment, "duration_ms": duration_ms})
    log.write({"event": "metrics", **_metrics.export_metrics()})
    return 0


# ---- selftest ---- #

def _selftest_checks(seed: int) -> List[tuple]:
    results = []
    uj, uj_cover = union_jack(1)
    instances = [uj] + [random_hypergraph(6, 5, 3, np.random.default_rng(s)) for s in range(5)]
    worst = 0.0
    for h in instances:
        ideal = build_state(h)
        for i in range(h.n):
            worst = max(worst, float(np.linalg.norm(stabilizer_g(h, i).apply_array(ideal.amplitudes) - ideal.amplitudes)))
    results.append(("fixed-point", worst < 1e-10, f"max residual {worst:.2e}"))

    rng = make_rng(seed)
    ideal = build_state(uj)
    bad_rows = 0
    for l in range(uj_cover.m):
        vertices = uj_cover.classes[l]
        outcomes = sample_outcomes(ideal, basis_for_class(uj.n, vertices), rng, 2000)
        bad_rows += int(parity_check_batch(uj, vertices, outcomes).any(axis=1).sum())
    results.append(("honest-parity", bad_rows == 0, f"{bad_rows} nonzero syndromes"))

    honest = [run_case_study(uj, uj_cover, 1, ProverModel.honest(), None, make_rng(seed + s), s) for s in range(20)]
    results.append(("honest-case-study", all(t.decision for t in honest), "20 runs"))

    def transcript_text(s: int) -> str:
        t = run_case_study(uj, uj_cover, 2, ProverModel.single_bad_copy(), None, make_rng(s), s)
        return json.dumps(t.to_dict(), sort_keys=True)

    results.append(("reproducibility", transcript_text(seed) == transcript_text(seed), "same seed, same transcript"))
    return results


def cmd_selftest(args: argparse.Namespace, cfg: AppConfig) -> int:
    results = _selftest_checks(args.seed)
    for name, ok, detail in results:
        _info(f"[{'OK' if ok else 'FEHLER'}] {name}: {detail}")
    payload = {name: ok for name, ok, _ in results}
    _emit(args, payload, [["check", "ok"]] + [[n, str(ok).lower()] for n, ok, _ in results])
    if not all(ok for _, ok, _ in results):
        raise InvariantViolation("selftest failed")
    return 0


# ---- parser ---- #

def build_parser(cfg: AppConfig) -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Master-Seed (Default: HGV_SEED)")
    common.add_argument("--trials", type=int, default=None, help="Anzahl Wiederholungen")
    common.add_argument("--out", type=str, default=None, help="Ausgabedatei (bzw. Verzeichnis bei protocol)")
    common.add_argument("--format", choices=("csv", "json"), default="json", help="Ausgabeformat")
    common.add_argument("--threads", type=int, default=None, help="Worker-Threads für Trials")

    parser = _Parser(prog="hgv", description="Hypergraph state verification workbench")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("color", parents=[common], help="Färbung / Independence Cover berechnen")
    p.add_argument("source", help="Kantenliste, JSON-Dokument oder Generator (z.B. union-jack:2)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="Exakte chromatische Zahl (Vertex-Limit)")
    mode.add_argument("--greedy", action="store_true", help="Greedy-Färbung statt eingebauter Färbung")
    p.set_defaults(func=cmd_color)

    p = sub.add_parser("state", parents=[common], help="Zustand bauen und Stabilisatoren prüfen")
    p.add_argument("source")
    p.add_argument("--state", default="hypergraph", help="hypergraph | zero | plus | z:0,2 | x:1 | random:7 | zsup:0;1")
    p.add_argument("--dump", action="store_true", help="Amplituden als (bitstring, re, im) ausgeben")
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("test", parents=[common], help="Farbklassen-Test Monte-Carlo + analytisch")
    p.add_argument("source")
    p.add_argument("--class", dest="class_index", type=int, required=True)
    p.add_argument("--config", choices=("primary", "dual"), default="primary")
    p.add_argument("--state", default="hypergraph")
    p.add_argument("--S", default="zero", help="zero | weight:T | list:BITS,...")
    p.add_argument("--cover", default=None, help="Cover als JSON-Datei")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--outcomes", default=None, help="CSV der Einzelergebnisse")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("protocol", parents=[common], help="Protokoll-Experiment aus JSON-Konfiguration")
    p.add_argument("config", nargs="?", help="Run-Konfiguration (JSON)")
    p.add_argument("--config-schema", action="store_true", help="JSON-Schema der Run-Konfiguration ausgeben")
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("params", parents=[common], help="Vollskalen-Parameter exakt ableiten")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--gamma", type=int, required=True)
    p.add_argument("--r", type=Fraction, default=Fraction(2), help="rational, z. B. 2, 2.5 oder 5/2")
    p.add_argument("--k", type=int, default=1)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("selftest", parents=[common], help="Schnelle Integritätsprüfung")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = load_config()
        args = build_parser(cfg).parse_args(argv)
        if args.command != "protocol":
            args.seed = cfg.seed if args.seed is None else args.seed
            args.trials = 1000 if args.trials is None else args.trials
        if args.trials is not None and args.trials < 1:
            raise UsageError("--trials must be >= 1")
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return int(args.func(args, cfg))
    except InvariantViolation as exc:
        _info(f"[FEHLER] Invariante verletzt: {exc}")
        return 2
    except WorkbenchError as exc:
        _info(f"[FEHLER] {exc}")
        return 1
    except Exception as exc:  # pragma: no cover
        _info(f"[FEHLER] interner Fehler: {exc!r}")
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
