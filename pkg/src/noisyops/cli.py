"""Command-line experiment runner.

Every subcommand emits deterministic output (sorted JSON keys, no timestamps)
stamped with the package version and a SHA-256 hash of the resolved
configuration. Random trials draw from ``SeedSequence(seed).spawn(trials)``,
one child generator per trial index, so results do not depend on scheduling.

Exit codes: 0 success, 2 bad input, 3 dimension mismatch, 4 not majorized,
5 typical set too light for the requested epsilon.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotic import (
    RateReport,
    distill,
    fannes_bound,
    form,
    mixed_to_mixed,
    optimality_audit,
    rigidity_experiment,
)
from .densmat import DensityMatrix, eigen_spectrum
from .errors import (
    DimensionMismatch,
    InsufficientN,
    NoisyOpsError,
    NotMajorized,
    OutOfRange,
    TargetHasNoInformation,
)
from .noiseless import (
    binomial_protocol,
    mixed_to_mixed_cost,
    outcomes_csv,
    preparation_cost,
)
from .protocol import NoisyProtocol, random_channel, simulate, synthesize, measured_error, verify_no
from .spectra import Spectrum, entropy, first_violation, ky_fan_norms, monotone_summary

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DIM = 3
EXIT_NOT_MAJORIZED = 4
EXIT_INSUFFICIENT_N = 5

DEFAULTS = {
    "ancilla": 1000,
    "n": "200,500,1000,2000",
    "delta": 0.05,
    "epsilon": 0.01,
    "trials": 1000,
    "seed": 0,
}


class InputError(Exception):
    pass


# -- config ---------------------------------------------------------------------


def read_config(path: str) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise InputError(f"cannot read config {path}: {err}") from err
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config(args.config))
    for key, value in vars(args).items():
        if key in ("func", "config") or value is None:
            continue
        cfg[key] = value
    return cfg


def config_hash(cfg: dict) -> str:
    """Hash of everything that determines the result (the output path does not)."""
    blob = json.dumps({k: str(v) for k, v in cfg.items() if k != "out"}, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def _int(cfg, key) -> int:
    try:
        return int(cfg[key])
    except (TypeError, ValueError) as err:
        raise InputError(f"{key} must be an integer, got {cfg[key]!r}") from err


def _float(cfg, key) -> float:
    try:
        return float(cfg[key])
    except (TypeError, ValueError) as err:
        raise InputError(f"{key} must be a number, got {cfg[key]!r}") from err


def _int_list(cfg, key) -> list[int]:
    raw = cfg[key]
    try:
        values = [int(x) for x in str(raw).replace(" ", "").split(",") if x]
    except ValueError as err:
        raise InputError(f"{key} must be a comma-separated list of integers") from err
    if not values or min(values) < 1:
        raise InputError(f"{key} must list positive integers")
    return sorted(set(values))


def load_spectrum(path: str) -> Spectrum:
    """Spectrum JSON (``entries`` or ``probabilities``) or density-matrix JSON (``dim``/``re``/``im``)."""
    if path is None:
        raise InputError("a spectrum file is required")
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise InputError(f"cannot parse {path}: {err}") from err
    if not isinstance(obj, dict):
        raise InputError(f"{path}: expected a JSON object")
    try:
        if "re" in obj:
            return eigen_spectrum(DensityMatrix.from_json(obj))
        return Spectrum.from_json(obj)
    except DimensionMismatch:
        raise
    except (NoisyOpsError, ValueError, KeyError, TypeError) as err:
        raise InputError(f"{path}: {err}") from err


# -- output ------------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return None
        return x
    return x


def dump_json(obj: dict) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def stamp(cfg: dict, body: dict) -> dict:
    return {"command": cfg["command"], "config": config_hash(cfg), "version": __version__, **body}


def emit(cfg: dict, text: str) -> None:
    out = cfg.get("out")
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _rngs(cfg) -> list[np.random.Generator]:
    trials = _int(cfg, "trials")
    children = np.random.SeedSequence(_int(cfg, "seed")).spawn(trials)
    return [np.random.default_rng(c) for c in children]


# -- commands ---------------------------------------------------------------------------


def cmd_majorize(cfg) -> int:
    p = load_spectrum(cfg.get("spectrum"))
    q = load_spectrum(cfg.get("target"))
    k = first_violation(q, p)
    verdict = "true" if k is None else f"false, violated at k={k}"
    body = {
        "moreMixed": k is None,
        "violatedAt": k,
        "kyFanSource": ky_fan_norms(p).ky_fan,
        "kyFanTarget": ky_fan_norms(q).ky_fan,
    }
    if cfg.get("out"):
        emit(cfg, dump_json(stamp(cfg, body)))
    print(verdict)
    return EXIT_OK


def cmd_synthesize(cfg) -> int:
    p = load_spectrum(cfg.get("spectrum"))
    q = load_spectrum(cfg.get("target"))
    proto = synthesize(p, q, _int(cfg, "ancilla"))
    body = {
        "protocol": proto.to_json(),
        "verification": {"targetError": proto.error_bound, "measuredError": measured_error(proto, p, q)},
    }
    emit(cfg, dump_json(stamp(cfg, body)))
    return EXIT_OK


def cmd_simulate(cfg) -> int:
    if cfg.get("protocol"):
        p = load_spectrum(cfg.get("spectrum"))
        try:
            obj = json.loads(Path(cfg["protocol"]).read_text())
            proto = NoisyProtocol.from_json(obj.get("protocol", obj))
        except (OSError, ValueError, KeyError, TypeError) as err:
            raise InputError(f"cannot load protocol: {err}") from err
        out = simulate(proto, p)
        body = {
            "output": out.to_json(),
            "monotonesBefore": monotone_summary(p),
            "monotonesAfter": monotone_summary(out),
        }
        emit(cfg, dump_json(stamp(cfg, body)))
        return EXIT_OK
    # random NO channels on random inputs: information must never increase
    rows = []
    for idx, rng in enumerate(_rngs(cfg)):
        d = int(rng.integers(2, 9))
        chan = random_channel(rng, d, max_dim=64)
        audit = verify_no(chan, n_samples=1, rng=rng)
        rows.append({"trial": idx, "inputDim": d, "steps": len(chan.steps), "maxIncrease": audit.max_increase, "ok": audit.ok})
    body = {"trials": len(rows), "violations": sum(not r["ok"] for r in rows), "rows": rows}
    emit(cfg, dump_json(stamp(cfg, body)))
    return EXIT_OK


def _rates_csv(cfg, reports: list[RateReport]) -> str:
    buf = io.StringIO()
    buf.write(f"# config={config_hash(cfg)} version={__version__}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RateReport.CSV_COLUMNS)
    for r in reports:
        w.writerow(tuple(repr(float(x)) if isinstance(x, float) else x for x in r.csv_row()))
    return buf.getvalue()


def cmd_rates(cfg) -> int:
    s = load_spectrum(cfg.get("spectrum"))
    delta, eps = _float(cfg, "delta"), _float(cfg, "epsilon")
    strict = str(cfg.get("strict", "true")).lower() not in ("0", "false", "no")
    reports = []
    for n in _int_list(cfg, "n"):
        if cfg.get("target"):
            reports.append(mixed_to_mixed(s, load_spectrum(cfg["target"]), n, delta, eps))
            continue
        for fn in (distill, form):
            reports.append(fn(s, n, delta, eps, check_epsilon=strict)[0])
    if str(cfg.get("format", "jsonl")) == "csv":
        emit(cfg, _rates_csv(cfg, reports))
    else:
        head = stamp(cfg, {})
        lines = [json.dumps(_jsonable({**head, **r.to_json()}), sort_keys=True) for r in reports]
        emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_noiseless(cfg) -> int:
    if cfg.get("spectrum"):
        s = load_spectrum(cfg["spectrum"])
        body = {"preparationCost": preparation_cost(s), "entropy": entropy(s)}
        if cfg.get("target"):
            body["mixedToMixedCost"] = mixed_to_mixed_cost(s, load_spectrum(cfg["target"])).to_json()
        emit(cfg, dump_json(stamp(cfg, body)))
        return EXIT_OK
    if cfg.get("a2") is None:
        raise InputError("noiseless needs --a2 or --spectrum")
    parts = [f"# config={config_hash(cfg)} version={__version__}\n"]
    summary = io.StringIO()
    w = csv.writer(summary, lineterminator="\n")
    w.writerow(("n", "pureQubitsOut", "erasureBits", "netOut", "netPerCopy"))
    for n in _int_list(cfg, "n"):
        outcomes, ledger = binomial_protocol(str(cfg["a2"]), n)
        parts.append(f"# outcomes n={n}\n")
        parts.append(outcomes_csv(outcomes))
        w.writerow((n, repr(ledger.pure_qubits_out), repr(ledger.erasure_bits), repr(ledger.net_out), repr(ledger.net_out / n)))
    parts.append("# ledger\n")
    parts.append(summary.getvalue())
    emit(cfg, "".join(parts))
    return EXIT_OK


def cmd_audit(cfg) -> int:
    s = load_spectrum(cfg.get("spectrum"))
    delta, eps = _float(cfg, "delta"), _float(cfg, "epsilon")
    audit = optimality_audit(s, _int_list(cfg, "n"), delta, eps)
    violations, worst = 0, -math.inf
    for rng in _rngs(cfg):
        qubits = int(rng.integers(1, 5))
        d = 1 << qubits
        a, b = rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(d))
        t = math.fsum(np.abs(a - b))
        gap = abs(entropy(Spectrum.from_probabilities(a)) - entropy(Spectrum.from_probabilities(b)))
        slack = gap - fannes_bound(qubits, min(t, 2.0)).bound
        worst = max(worst, slack)
        violations += slack > 1e-12
    body = {
        "optimality": audit.to_json(),
        "continuity": {"pairs": _int(cfg, "trials"), "violations": violations, "worstSlack": worst},
    }
    emit(cfg, dump_json(stamp(cfg, body)))
    return EXIT_OK


def cmd_rigidity(cfg) -> int:
    if cfg.get("spectrum"):
        body = {"result": rigidity_experiment(load_spectrum(cfg["spectrum"]))}
    else:
        grid = np.linspace(0.5, 1.0, 20)
        body = {"grid": [{"purity": float(x), **rigidity_experiment(_purity_spectrum(x))} for x in grid]}
    emit(cfg, dump_json(stamp(cfg, body)))
    return EXIT_OK


def _purity_spectrum(x: float) -> Spectrum:
    if x >= 1.0:
        return Spectrum.pure(2)
    return Spectrum.from_probabilities([x, 1.0 - x])


# -- entry point ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-s", "--spectrum", help="spectrum or density-matrix JSON file")
    common.add_argument("-t", "--target", help="target spectrum JSON file")
    common.add_argument("--ancilla", type=int, help="ancilla dimension N")
    common.add_argument("--n", help="comma-separated copy numbers")
    common.add_argument("--delta", type=float)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--config", help="key=value file; flags override it")

    parser = argparse.ArgumentParser(prog="noisyops", description="Noisy Operations experiments")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("majorize", parents=[common], help="is the target more mixed than the source?").set_defaults(func=cmd_majorize)
    sub.add_parser("synthesize", parents=[common], help="build a protocol source -> target").set_defaults(func=cmd_synthesize)
    p = sub.add_parser("simulate", parents=[common], help="apply a protocol, or audit random NO channels")
    p.add_argument("--protocol", help="protocol JSON from 'synthesize'")
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("rates", parents=[common], help="distillation and formation over an n grid")
    p.add_argument("--format", choices=("jsonl", "csv"))
    p.add_argument("--no-strict", dest="strict", action="store_const", const="false", help="report instead of failing when c < 1 - epsilon")
    p.set_defaults(func=cmd_rates)
    p = sub.add_parser("noiseless", parents=[common], help="binomial protocol table or noiseless costs")
    p.add_argument("--a2", help="squared amplitude, float or fraction like 3/4")
    p.set_defaults(func=cmd_noiseless)
    sub.add_parser("audit", parents=[common], help="round-trip optimality and continuity audit").set_defaults(func=cmd_audit)
    sub.add_parser("rigidity", parents=[common], help="free-ancilla rigidity experiment").set_defaults(func=cmd_rigidity)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        return args.func(cfg)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except DimensionMismatch as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DIM
    except NotMajorized as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NOT_MAJORIZED
    except InsufficientN as err:
        print(f"error: {err}", file=sys.stderr)
        if err.required_n is not None:
            print(f"advisory: n >= {err.required_n}", file=sys.stderr)
        return EXIT_INSUFFICIENT_N
    except TargetHasNoInformation as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except OutOfRange as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
