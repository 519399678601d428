"""Unified command-line entry point.

Exit codes: 0 success, 2 config/input error, 3 capacity guard exceeded,
4 numerical failure, 5 not certifiable (including insufficient samples).

``CERTIKIT_THREADS`` caps worker parallelism; execution is currently serial
(a valid setting of every module's determinism contract), so the variable is
recorded in manifests but changes no numbers.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import platform
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .adversary import corrupt_random, corrupt_worst_case
from .certify import (
    caratheodory_certificate,
    chunked_certificate,
    minimal_certificate,
    minimum_certificate,
)
from .config import ExperimentConfig, load_config
from .conic import ConicInstance, caratheodory_reduce, conic_membership
from .domain import (
    Dataset,
    LabeledExample,
    Point,
    dpoint,
    load_dataset,
    save_dataset,
    vpoint,
)
from .errors import CertikitError, InputError
from .hypoclasses import (
    FiniteFamily,
    HalfspaceFamily,
    HypothesisFamily,
    TargetHypothesis,
    finite_family_from_csv,
    singletons,
)
from .oracles import in_robust_agreement
from .sampling import (
    BallIndicator,
    FiniteSupport,
    UniformBall,
    agreement_probability_curve,
    certificate_coefficient,
    certificate_coefficient_mc,
    draw_labeled,
    reweighted_certificate,
    sample_size_bound,
    tightness_experiments,
    trial_rng,
    uniform_support,
)
from .stars import robust_star_number


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def parse_class(spec: str) -> HypothesisFamily:
    """``singletons:n=5 | finite:path | halfspace:d=3 | affine-halfspace:d=3``"""
    kind, _, rest = spec.partition(":")
    if kind == "singletons":
        if not rest.startswith("n="):
            raise InputError("singletons spec: singletons:n=<int>")
        return singletons(int(rest[2:]))
    if kind == "finite":
        return finite_family_from_csv(rest)
    if kind in ("halfspace", "affine-halfspace"):
        if not rest.startswith("d="):
            raise InputError(f"{kind} spec: {kind}:d=<int>")
        return HalfspaceFamily(int(rest[2:]), affine=(kind == "affine-halfspace"))
    raise InputError(f"unknown class spec {spec!r}")


def parse_point(text: str) -> Point:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) == 1 and "." not in parts[0] and "e" not in parts[0].lower():
        return dpoint(int(parts[0]))
    return vpoint(*(float(p) for p in parts))


def parse_target(family: HypothesisFamily, text: str) -> TargetHypothesis:
    if isinstance(family, FiniteFamily):
        return TargetHypothesis(family, int(text))
    return TargetHypothesis(family, tuple(float(v) for v in text.split(",")))


def parse_dist(text: str):
    """``uniform:ids=1,2`` or ``ball:center=0,0;radius=1``"""
    kind, _, rest = text.partition(":")
    if kind == "uniform":
        if not rest.startswith("ids="):
            raise InputError("uniform dist spec: uniform:ids=<id,id,...>")
        ids = [int(v) for v in rest[4:].split(",")]
        return uniform_support([dpoint(i) for i in ids])
    if kind == "ball":
        fields = dict(part.split("=", 1) for part in rest.split(";") if part)
        center = tuple(float(v) for v in fields.get("center", "0").split(","))
        radius = float(fields.get("radius", "1"))
        return UniformBall(center, radius)
    raise InputError(f"unknown dist spec {text!r}")


def _to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _to_jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    return obj


def _emit(payload, out: Optional[Path], name: str) -> List[str]:
    text = json.dumps(_to_jsonable(payload), indent=2)
    print(text)
    if out is not None:
        path = out / name
        path.write_text(text + "\n", encoding="utf-8")
        return [str(path)]
    return []


# ---------------------------------------------------------------------------
# subcommand handlers; each returns a list of artifact paths


def cmd_star(args, out: Optional[Path]) -> List[str]:
    family = parse_class(args.klass)
    number, witness = robust_star_number(
        family, args.b, multiplicity_cap=args.multiplicity_cap, size_cap=args.size_cap
    )
    payload = {
        "s_b": number,
        "b": args.b,
        "witness": None
        if witness is None
        else {
            "elements": [
                [ex.point.discrete, ex.label] for ex in witness.elements
            ],
            "heavy_index": witness.heavy_index,
        },
    }
    return _emit(payload, out, "star.json")


def cmd_agree(args, out: Optional[Path]) -> List[str]:
    family = parse_class(args.klass)
    data = load_dataset(args.data)
    test = parse_point(args.test)
    agrees = in_robust_agreement(family, data, args.b, test, args.label)
    payload = {"in_robust_agreement": agrees, "b": args.b, "label": args.label}
    return _emit(payload, out, "agree.json")


def cmd_certify(args, out: Optional[Path]) -> List[str]:
    family = parse_class(args.klass)
    data = load_dataset(args.data)
    test = parse_point(args.test)
    if args.method == "greedy":
        cert = minimal_certificate(family, data, args.b, test, args.label)
    elif args.method == "exact":
        cert = minimum_certificate(family, data, args.b, test, args.label)
    elif args.method == "caratheodory":
        if args.b != 0:
            raise InputError("conic certificates require b = 0")
        cert = caratheodory_certificate(family, data, test, args.label)
    elif args.method == "chunked":
        seed = args.seed or 0
        rng = trial_rng(seed, 41)

        def stream():
            n = len(data)
            while True:
                yield data[int(rng.integers(n))]

        cert = chunked_certificate(
            family, stream(), args.b, test, args.label, chunk_size=args.chunk_size
        )
    else:
        raise InputError(f"unknown method {args.method!r}")
    print(cert.to_json())
    summary = (
        f"# {args.method} certificate: size {cert.size} of {len(cert.source)} "
        f"examples, b={cert.budget}, minimal={cert.minimal_flag}"
    )
    print(summary, file=sys.stderr)
    if out is not None:
        path = out / "certificate.json"
        path.write_text(cert.to_json() + "\n", encoding="utf-8")
        return [str(path)]
    return []


def cmd_coeff(args, out: Optional[Path]) -> List[str]:
    family = parse_class(args.klass)
    dist = parse_dist(args.dist)
    target = parse_target(family, args.target)
    test = parse_point(args.test)
    if isinstance(family, FiniteFamily):
        eps = certificate_coefficient(family, dist, target, test)
        payload = {"eps": eps if eps != float("inf") else "inf", "exact": True}
    else:
        est, half = certificate_coefficient_mc(
            family, dist, target, test, samples=args.mc_samples, seed=args.seed or 0
        )
        payload = {"eps": est, "halfwidth": half, "exact": False}
    return _emit(payload, out, "coeff.json")


def cmd_curve(args, out: Optional[Path]) -> List[str]:
    from .errors import UnboundableError

    family = parse_class(args.klass)
    dist = parse_dist(args.dist)
    target = parse_target(family, args.target)
    test = parse_point(args.test)
    if isinstance(family, FiniteFamily) and isinstance(dist, FiniteSupport):
        eps = certificate_coefficient(family, dist, target, test)
        if eps == 0:
            raise UnboundableError(
                "certificate coefficient is zero for this distribution and test "
                "point: agreement probability stays 0 at every sample size"
            )
    m_grid = [int(v) for v in args.m_grid.split(",")]
    points = agreement_probability_curve(
        family, dist, target, test, args.b, m_grid, args.trials, args.seed or 0
    )
    lines = ["m,prob,ci_low,ci_high"]
    for pt in points:
        lines.append(
            ",".join(_fmt(v) for v in (pt.m, pt.probability, pt.ci_low, pt.ci_high))
        )
    text = "\n".join(lines)
    print(text)
    if out is not None:
        path = out / "curve.csv"
        path.write_text(text + "\n", encoding="utf-8")
        return [str(path)]
    return []


def cmd_tightness(args, out: Optional[Path]) -> List[str]:
    params = {}
    for key in ("b", "d", "k", "m", "n"):
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    if args.delta is not None:
        params["delta"] = args.delta
    if args.m_values:
        params["m_values"] = [int(v) for v in args.m_values.split(",")]
    report = tightness_experiments(args.term, params, args.trials, args.seed or 0)
    return _emit(report, out, f"tightness_{args.term}.json")


def cmd_reweight_demo(args, out: Optional[Path]) -> List[str]:
    """Ball-indicator rejection sampling versus direct sampling at the same
    retained-sample budget."""
    d, b = args.d, args.b
    family = HalfspaceFamily(d, affine=True)
    target = TargetHypothesis(family, (0.0,) * d + (1.0,))  # all-positive
    dist = UniformBall((0.0,) * d, 1.0)
    test = vpoint(*((0.5,) + (0.0,) * (d - 1)))
    scheme = BallIndicator(test.vector, args.radius)
    result = reweighted_certificate(
        family,
        dist,
        scheme,
        target,
        b,
        test,
        delta=args.delta,
        seed=args.seed or 0,
        mc_samples=args.mc_samples,
    )
    direct = agreement_probability_curve(
        family,
        dist,
        target,
        test,
        b,
        m_grid=[result.accepted],
        trials=args.direct_trials,
        seed=(args.seed or 0) + 1,
    )[0]
    payload = {
        "d": d,
        "b": b,
        "eps_estimate": result.eps_estimate,
        "eps_used": result.eps_used,
        "accepted": result.accepted,
        "raw_draws": result.raw_draws,
        "normalizer": result.normalizer,
        "certificate_size": result.certificate.size,
        "size_bound": sample_size_bound(b, d, result.eps_used, args.delta),
        "direct_probability_at_same_budget": direct.probability,
    }
    return _emit(payload, out, "reweight_demo.json")


def cmd_attack(args, out: Optional[Path]) -> List[str]:
    family = parse_class(args.klass)
    data = load_dataset(args.data)
    if args.mode == "random":
        corrupted = corrupt_random(data, args.b, args.seed or 0)
    elif args.mode == "worst":
        test = parse_point(args.test)
        corrupted = corrupt_worst_case(family, data, args.b, test, args.label)
    else:
        raise InputError(f"unknown attack mode {args.mode!r}")
    payload = {"mode": args.mode, "b": args.b, "flipped": list(corrupted.flipped_indices)}
    artifacts = []
    if out is not None:
        path = out / "corrupted.csv"
        save_dataset(corrupted, path)
        artifacts.append(str(path))
    artifacts += _emit(payload, out, "attack.json")
    return artifacts


def cmd_conic(args, out: Optional[Path]) -> List[str]:
    data = load_dataset(args.data)
    test = parse_point(args.test)
    points = data.as_matrix()
    labels = data.labels_array()
    generators = points * labels[:, None]
    target = float(args.label) * test.as_array()
    instance = ConicInstance(tuple(map(tuple, generators)), tuple(target))
    sol = conic_membership(instance)
    if sol.feasible:
        reduced = caratheodory_reduce(instance, sol.coefficients)
        payload = {
            "feasible": True,
            "coefficients": list(reduced.coefficients),
            "support": list(reduced.support),
            "residual": reduced.residual,
        }
    else:
        payload = {"feasible": False, "separator": list(sol.separator)}
    return _emit(payload, out, "conic.json")


# ---------------------------------------------------------------------------
# config-driven runs


def _namespace_from_config(cfg: ExperimentConfig) -> argparse.Namespace:
    ns = argparse.Namespace()
    ns.seed = cfg.seed
    ns.klass = cfg.get("class")
    ns.b = cfg.get_int("b", 0)
    ns.data = cfg.get("data")
    ns.test = cfg.get("test")
    ns.label = cfg.get_int("label", 1)
    ns.method = cfg.get("method", "greedy")
    ns.chunk_size = cfg.get_int("chunk_size")
    ns.multiplicity_cap = cfg.get_int("multiplicity_cap")
    ns.size_cap = cfg.get_int("size_cap")
    ns.dist = cfg.get("dist")
    ns.target = cfg.get("target")
    ns.mc_samples = cfg.get_int("mc_samples", 100_000)
    ns.m_grid = cfg.get("m_grid")
    ns.trials = cfg.get_int("trials", 200)
    ns.term = cfg.get("term")
    ns.d = cfg.get_int("d")
    ns.k = cfg.get_int("k")
    ns.m = cfg.get_int("m")
    ns.n = cfg.get_int("n")
    ns.m_values = cfg.get("m_values")
    ns.delta = cfg.get_float("delta", 0.1)
    ns.radius = cfg.get_float("radius", 0.5)
    ns.direct_trials = cfg.get_int("direct_trials", 100)
    ns.mode = cfg.get("mode", "random")
    return ns


_HANDLERS = {
    "star": cmd_star,
    "agree": cmd_agree,
    "certify": cmd_certify,
    "coeff": cmd_coeff,
    "curve": cmd_curve,
    "tightness": cmd_tightness,
    "reweight-demo": cmd_reweight_demo,
    "attack": cmd_attack,
    "conic": cmd_conic,
}


def cmd_run(args, _out: Optional[Path]) -> List[str]:
    cfg = load_config(args.config)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    ns = _namespace_from_config(cfg)
    started = time.time()
    artifacts = _HANDLERS[cfg.command](ns, out)
    manifest = {
        "command": cfg.command,
        "config_sha256": hashlib.sha256(cfg.raw_text.encode()).hexdigest(),
        "seed": cfg.seed,
        "versions": {
            "certikit": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "threads": os.environ.get("CERTIKIT_THREADS", "1"),
        "wall_time_s": time.time() - started,
        "artifacts": artifacts,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return artifacts + [str(path)]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="certikit",
        description="Extract and validate robust certificates for predictions.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, klass=True):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", type=str, default=None, help="artifact directory")
        if klass:
            p.add_argument("--class", dest="klass", required=True)

    p = sub.add_parser("star", help="b-robust hollow star number")
    common(p)
    p.add_argument("--b", type=int, default=0)
    p.add_argument("--multiplicity-cap", dest="multiplicity_cap", type=int, default=None)
    p.add_argument("--size-cap", dest="size_cap", type=int, default=None)
    p.set_defaults(func=cmd_star)

    p = sub.add_parser("agree", help="one-shot agreement query")
    common(p)
    p.add_argument("--b", type=int, default=0)
    p.add_argument("--data", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--label", type=int, required=True)
    p.set_defaults(func=cmd_agree)

    p = sub.add_parser("certify", help="extract a certificate")
    common(p)
    p.add_argument("--method", default="greedy",
                   choices=["greedy", "exact", "caratheodory", "chunked"])
    p.add_argument("--b", type=int, default=0)
    p.add_argument("--data", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--label", type=int, required=True)
    p.add_argument("--chunk-size", dest="chunk_size", type=int, default=None)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("coeff", help="certificate coefficient")
    common(p)
    p.add_argument("--dist", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--mc-samples", dest="mc_samples", type=int, default=100_000)
    p.set_defaults(func=cmd_coeff)

    p = sub.add_parser("curve", help="agreement probability vs sample size")
    common(p)
    p.add_argument("--dist", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--b", type=int, default=0)
    p.add_argument("--m-grid", dest="m_grid", required=True)
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("tightness", help="lower-bound term experiments")
    common(p, klass=False)
    p.add_argument("--term", required=True, choices=["b", "dlog", "delta"])
    p.add_argument("--b", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--m-values", dest="m_values", default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--trials", type=int, default=2000)
    p.set_defaults(func=cmd_tightness)

    p = sub.add_parser("reweight-demo", help="rejection-sampling certificate demo")
    common(p, klass=False)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--radius", type=float, default=0.5)
    p.add_argument("--mc-samples", dest="mc_samples", type=int, default=100_000)
    p.add_argument("--direct-trials", dest="direct_trials", type=int, default=100)
    p.set_defaults(func=cmd_reweight_demo)

    p = sub.add_parser("attack", help="label corruption")
    common(p)
    p.add_argument("--mode", default="random", choices=["random", "worst"])
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--test", default=None)
    p.add_argument("--label", type=int, default=1)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("conic", help="conic membership debug dump")
    common(p, klass=False)
    p.add_argument("--data", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--label", type=int, default=1)
    p.add_argument("--dump", action="store_true")
    p.set_defaults(func=cmd_conic)

    p = sub.add_parser("run", help="run a config-file experiment")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_run)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Path(args.out) if getattr(args, "out", None) else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    try:
        args.func(args, out)
    except CertikitError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
