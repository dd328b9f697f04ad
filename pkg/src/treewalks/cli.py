"""Command-line front end: kernel tables, convergence sweeps, fit reports.

Every subcommand renders to CSV or JSON with schema version 1, writes
to stdout or --out, and is deterministic for a fixed argument vector.
Exit codes: 0 success, 2 invalid input, 3 convergence failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .errors import ConvergenceError, ValidationError
from .geometry import EndPrefix, identity, tree_alphabet, word
from .kernels import (
    KernelTable,
    KernelValue,
    ancona_harnack_check,
    martin_kernel_nn,
    ratio_kernel_isotropic,
    ratio_kernel_nn,
)
from .matrix_boundary import martin_kernel_matrix
from .presets import preset
from .products import (
    ProductWalk,
    factor_returns,
    product_report,
    product_return_sequence,
)
from .reduced_boundary import detect_R_mu
from .series import green_second_order, shared_system
from .walks import (
    WalkSpec,
    fit_local_limit,
    isotropic_walk,
    load_walk_spec,
    ratio_sequence,
)

__all__ = ["main"]


def _parse_letters(text: str, alphabet):
    if text in ("", "e"):
        return identity(alphabet)
    try:
        letters = [int(tok) for tok in text.split(",")]
    except ValueError:
        raise ValidationError(f"cannot parse word {text!r}; want e.g. '1,-2'")
    return word(alphabet, letters)


def _parse_window(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise ValidationError("window must look like lo:hi")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise ValidationError("window bounds must be integers")


def _load_walk(args) -> WalkSpec | ProductWalk:
    if getattr(args, "spec_file", None):
        with open(args.spec_file) as fh:
            return load_walk_spec(fh.read())
    return preset(args.preset)


def _require_word_walk(walk) -> WalkSpec:
    if isinstance(walk, ProductWalk):
        raise ValidationError("this subcommand needs a single-factor walk")
    if walk.mode != "finitely-supported":
        raise ValidationError("this subcommand needs a word walk preset")
    return walk


def _check_precision(bits: int) -> int:
    if bits < 64:
        raise ValidationError("precision must be at least 64 bits")
    return bits


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _kv_report(args, payload: dict) -> str:
    if args.format == "json":
        return json.dumps(
            {"schema": 1, **payload}, sort_keys=True, separators=(",", ": ")
        ) + "\n"
    lines = ["key,value"]
    for key in sorted(payload):
        val = payload[key]
        if isinstance(val, float):
            val = repr(val)
        lines.append(f"{key},{val}")
    return "\n".join(lines) + "\n"


def _table_text(args, table: KernelTable) -> str:
    return table.to_json() if args.format == "json" else table.to_csv()


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_tree_kernel(args) -> None:
    if args.q < 2:
        raise ValidationError("need q >= 2")
    ab = tree_alphabet(args.q)
    spec = isotropic_walk(args.q, {0: Fraction(1, 2), 1: Fraction(1, 2)})
    x = _parse_letters(args.x, ab)
    xi = EndPrefix.from_pattern(ab, [1, 2], args.depth)
    row = ratio_kernel_isotropic(spec, x, xi)
    table = KernelTable(
        kind="tree-kernel",
        rows=[row],
        meta={"q": args.q, "depth": args.depth},
    )
    _emit(args, _table_text(args, table))


def _cmd_free_kernel(args) -> None:
    spec = _require_word_walk(_load_walk(args))
    system = shared_system(spec, _check_precision(args.precision))
    x = _parse_letters(args.x, spec.alphabet)
    rows: list[KernelValue] = []
    if args.y is not None:
        target = _parse_letters(args.y, spec.alphabet)
        rows.append(ratio_kernel_nn(system, x, target))
    else:
        pattern = [int(t) for t in args.pattern.split(",")]
        xi = EndPrefix.from_pattern(spec.alphabet, pattern, args.depth)
        if args.t is not None:
            rows.append(martin_kernel_nn(system, x, xi, args.t))
        else:
            rows.append(ratio_kernel_nn(system, x, xi))
    table = KernelTable(
        kind="free-kernel",
        rows=rows,
        meta={"preset": args.preset, "depth": args.depth},
    )
    _emit(args, _table_text(args, table))


def _cmd_ratio_converge(args) -> None:
    spec = _require_word_walk(_load_walk(args))
    x = _parse_letters(args.x, spec.alphabet)
    y = _parse_letters(args.y, spec.alphabet)
    seq = ratio_sequence(spec, x, y, args.n_max)
    picks = []
    n = 1
    while n < args.n_max:
        picks.append(n)
        n *= 2
    picks.append(args.n_max)
    by_n = dict(zip(seq.ns, seq.values))
    rows = []
    for n in picks:
        if n not in by_n:
            continue
        value = by_n[n]
        gap = abs(value - seq.last)
        rows.append(
            KernelValue(
                x=args.x or "e",
                y_or_prefix=args.y or "e",
                depth=n,
                value=value,
                error=gap,
                stabilized=gap <= args.tol,
            )
        )
    table = KernelTable(
        kind="ratio-converge",
        rows=rows,
        meta={"preset": args.preset, "n_max": args.n_max, "tail_spread": seq.tail_spread},
    )
    _emit(args, _table_text(args, table))


def _cmd_llt_fit(args) -> None:
    walk = _load_walk(args)
    lo, hi = _parse_window(args.window)
    n_max = max(args.n_max or 0, hi)
    if isinstance(walk, ProductWalk):
        values = product_return_sequence(walk, n_max)
    else:
        values = factor_returns(walk, n_max)
    fit = fit_local_limit(values, (lo, hi))
    payload = {
        "preset": args.preset,
        "window_lo": lo,
        "window_hi": hi,
        "rho_hat": fit.rho,
        "alpha_hat": fit.alpha,
        "log_c": fit.log_c,
        "residual_rms": fit.residual_rms,
        "rho_shift": fit.rho_shift,
        "alpha_shift": fit.alpha_shift,
    }
    _emit(args, _kv_report(args, payload))


def _cmd_martin_matrix(args) -> None:
    spec = _require_word_walk(_load_walk(args))
    x = _parse_letters(args.x, spec.alphabet)
    pattern = [int(t) for t in args.pattern.split(",")]
    xi = EndPrefix.from_pattern(spec.alphabet, pattern, args.depth)
    row = martin_kernel_matrix(spec, x, xi)
    table = KernelTable(
        kind="martin-matrix",
        rows=[row],
        meta={"preset": args.preset, "depth": args.depth},
    )
    _emit(args, _table_text(args, table))


def _cmd_product(args) -> None:
    walk = _load_walk(args)
    if not isinstance(walk, ProductWalk):
        raise ValidationError("this subcommand needs a product preset")
    payload = product_report(walk)
    if args.n_max:
        seq = product_return_sequence(walk, args.n_max)
        lo = max(8, args.n_max // 3)
        fit = fit_local_limit(seq, (lo, args.n_max))
        payload["measured"] = {
            "rho_hat": fit.rho,
            "alpha_hat": fit.alpha,
            "window": [lo, args.n_max],
        }
    if args.format == "json":
        _emit(
            args,
            json.dumps(payload, sort_keys=True, separators=(",", ": ")) + "\n",
        )
    else:
        flat: dict = {}

        def _flatten(prefix, obj):
            if isinstance(obj, dict):
                for k, v in obj.items():
                    _flatten(f"{prefix}{k}.", v)
                return
            if isinstance(obj, list):
                for i, v in enumerate(obj):
                    _flatten(f"{prefix}{i}.", v)
                return
            key = prefix.rstrip(".")
            flat[key] = obj

        _flatten("", payload)
        _emit(args, _kv_report(args, flat))


def _cmd_reduced(args) -> None:
    walk = _load_walk(args)
    report = detect_R_mu(
        walk,
        candidate_radius=args.candidate_radius,
        probe_radius=args.probe_radius,
        tol=args.tol,
    )
    if args.format == "json":
        _emit(args, report.to_json())
        return
    members = set(report.member_indices)
    lines = ["label,deviation,member"]
    for i, label in enumerate(report.labels):
        lines.append(
            f"{label},{report.deviations[i]!r},{'true' if i in members else 'false'}"
        )
    lines.append(f"# {report.certificate}")
    _emit(args, "\n".join(lines) + "\n")


def _cmd_ancona_check(args) -> None:
    spec = _require_word_walk(_load_walk(args))
    system = shared_system(spec, _check_precision(args.precision))
    report = ancona_harnack_check(
        system, n_pairs=args.pairs, seed=args.seed
    )
    payload = {
        "preset": args.preset,
        "samples": report.samples,
        "triple_min": report.triple_min,
        "triple_max": report.triple_max,
        "triple_green_gap": report.triple_green_gap,
        "harnack_max": report.harnack_max,
        "quadruple_max": report.quadruple_max,
    }
    for d, spread in report.per_distance_spread:
        payload[f"spread_at_{d}"] = spread
    _emit(args, _kv_report(args, payload))


def _cmd_phi_claim(args) -> None:
    spec = _require_word_walk(_load_walk(args))
    system = shared_system(spec, _check_precision(args.precision))
    r = float(system.radius().r)
    z = r * (1.0 - args.z_offset)
    x = _parse_letters(args.x, spec.alphabet)
    pattern = [int(t) for t in args.pattern.split(",")]
    e = identity(spec.alphabet)
    rows = []
    for depth in range(2, args.depth + 1, 2):
        y = EndPrefix.from_pattern(spec.alphabet, pattern, depth).word
        top = green_second_order(system, x, y, z, tol=args.tol)
        bot = green_second_order(system, e, y, z, tol=args.tol)
        ratio = top.phi / bot.phi
        err = abs(top.tail / top.value) + abs(bot.tail / bot.value)
        rows.append(
            KernelValue(
                x=args.x or "e",
                y_or_prefix=f"{args.pattern}...",
                depth=depth,
                value=ratio,
                error=err,
                stabilized=top.stabilized and bot.stabilized,
            )
        )
    table = KernelTable(
        kind="phi-claim",
        rows=rows,
        meta={"preset": args.preset, "z": z, "z_offset": args.z_offset},
    )
    _emit(args, _table_text(args, table))


# ---------------------------------------------------------------------------
# Parser assembly


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treewalks",
        description="ratio-limit boundary experiments on trees and free groups",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, preset_default=None, with_precision=False, with_tol=None):
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None)
        if preset_default is not None:
            p.add_argument("--preset", default=preset_default)
            p.add_argument("--spec-file", default=None)
        if with_precision:
            p.add_argument("--precision", type=int, default=96)
        if with_tol is not None:
            p.add_argument("--tol", type=float, default=with_tol)

    p = sub.add_parser("tree-kernel", help="boundary kernel on a regular tree")
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--depth", type=int, default=30)
    p.add_argument("--x", default="1")
    common(p)
    p.set_defaults(func=_cmd_tree_kernel)

    p = sub.add_parser("free-kernel", help="boundary kernel of a word walk")
    p.add_argument("--x", default="1")
    p.add_argument("--y", default=None)
    p.add_argument("--pattern", default="1,2")
    p.add_argument("--depth", type=int, default=24)
    p.add_argument("--t", type=float, default=None)
    common(p, preset_default="f2-lazy-uniform", with_precision=True)
    p.set_defaults(func=_cmd_free_kernel)

    p = sub.add_parser("ratio-converge", help="n-step ratio sweep")
    p.add_argument("--x", default="1")
    p.add_argument("--y", default="e")
    p.add_argument("--n-max", type=int, default=10000)
    common(p, preset_default="z-lazy", with_tol=1e-2)
    p.set_defaults(func=_cmd_ratio_converge)

    p = sub.add_parser("llt-fit", help="local limit fit of return probabilities")
    p.add_argument("--window", default="500:2000")
    p.add_argument("--n-max", type=int, default=None)
    common(p, preset_default="f2-lazy-uniform")
    p.set_defaults(func=_cmd_llt_fit)

    p = sub.add_parser("martin-matrix", help="Martin kernel via ball matrices")
    p.add_argument("--x", default="1")
    p.add_argument("--pattern", default="2,-1")
    p.add_argument("--depth", type=int, default=44)
    common(p, preset_default="f2-lazy-uniform")
    p.set_defaults(func=_cmd_martin_matrix)

    p = sub.add_parser("product", help="product-walk asymptotics report")
    p.add_argument("--n-max", type=int, default=0)
    common(p, preset_default="t3xZ")
    p.set_defaults(func=_cmd_product)

    p = sub.add_parser("reduced", help="kernel-equivalence scan of a ball")
    p.add_argument("--candidate-radius", type=int, default=4)
    p.add_argument("--probe-radius", type=int, default=4)
    common(p, preset_default="f2-lazy-uniform", with_tol=1e-6)
    p.set_defaults(func=_cmd_reduced)

    p = sub.add_parser("ancona-check", help="Green comparison constants")
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    common(p, preset_default="f2-lazy-uniform", with_precision=True)
    p.set_defaults(func=_cmd_ancona_check)

    p = sub.add_parser("phi-claim", help="second-order Green ratio along a ray")
    p.add_argument("--x", default="1,1")
    p.add_argument("--pattern", default="2,-1")
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--z-offset", type=float, default=1e-6)
    common(p, preset_default="f2-lazy-uniform", with_precision=True, with_tol=1e-10)
    p.set_defaults(func=_cmd_phi_claim)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
