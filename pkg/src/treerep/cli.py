"""Command-line front end tying the analysis modules together.

Subcommands
-----------
``analyze``
    Exact representability verdict at one parameter point (JSON).
``scan``
    Verdicts over a rational (r, p) grid (CSV).
``thresholds``
    Branching-number threshold table (CSV).
``deriv-check``
    Jet derivative against its closed form at a distinguished base
    point (JSON).
``verify``
    Sampler cross-checks and Poisson-field closure (JSON).
``scaling-check``
    Edge-subdivision consistency of the measure (JSON).

Every rational on the command line is parsed exactly: ``2/5``, ``0.45``
and ``1`` all become Fractions, never floats.  Grids are either comma
lists or ``start:stop:step`` with exact rational stepping, inclusive of
the stop value when the stepping lands on it.  Artifacts embed the
package version and a digest of the generating configuration (output
path and thread count excluded), so identical configurations and seeds
produce byte-identical files.

Exit status: 0 on success, 1 when an asserted outcome does not hold
(``--expect`` mismatch, or a failed ``verify``/``scaling-check``/
``deriv-check`` comparison), 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .chain_model import (
    make_params,
    params_from_json,
    sample_percolation_many,
    sample_recursive_many,
)
from .mc_verify import (
    compare_laws,
    field_from_chain,
    poisson_closure_report,
    sample_poisson_field_many,
)
from .param_calculus import (
    EdgeMultiset,
    boundary_edge_multiset,
    closed_form_p0,
    closed_form_p1,
    d_nu_dp,
    d_nu_dr,
    d_nu_dr_octopus,
    subtree_edge_multiset,
)
from .representability import is_representable, phase_scan, scaling_check
from .thresholds import threshold_table
from .tree_core import (
    VertexSet,
    is_connected,
    octopus,
    path,
    spider,
    star,
    tree_from_json,
)

VERSION = "0.1.0"


class UsageError(Exception):
    """Bad flags, malformed inputs, or out-of-range parameters (exit 2)."""


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    """One fully-parsed invocation.

    String fields keep the exact command-line spelling; they are parsed
    into Fractions/trees only when the command runs, so the config is
    cheap to hash and echo.  ``threads`` and ``out`` never influence
    artifact bytes and are excluded from the digest.
    """

    command: str
    tree: Optional[str] = None
    r: Optional[str] = None
    p: Optional[str] = None
    params: Optional[str] = None
    r_grid: Optional[str] = None
    p_grid: Optional[str] = None
    ns: Optional[str] = None
    subset: Optional[str] = None
    at: Optional[str] = None
    multiset: Optional[str] = None
    k: Optional[int] = None
    draws: int = 100_000
    alpha: str = "1/100"
    tolerance: str = "4"
    seed: int = 0
    expect: Optional[str] = None
    threads: int = 1
    out: Optional[str] = None


_DIGEST_EXCLUDES = ("threads", "out")


def config_digest(config: RunConfig) -> str:
    """Short stable digest of everything that shapes the artifact."""
    payload = {
        key: value
        for key, value in dataclasses.asdict(config).items()
        if key not in _DIGEST_EXCLUDES and value is not None
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


# ---------------------------------------------------------------------------
# exact parsing helpers


def parse_rational(text) -> Fraction:
    """``a/b`` or decimal literal, exactly; floats never appear."""
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError("not an exact rational: %r" % text) from None


def parse_grid(text) -> list:
    """Comma list, or ``start:stop:step`` stepped exactly.

    The stop value is included precisely when some ``start + i*step``
    hits it; there is no float fuzz to absorb a near miss.
    """
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError("grid syntax is start:stop:step, got %r" % text)
        start, stop, step = (parse_rational(part) for part in parts)
        if step <= 0:
            raise UsageError("grid step must be positive")
        if stop < start:
            raise UsageError("grid stop lies before start")
        values = []
        value = start
        while value <= stop:
            values.append(value)
            value += step
        return values
    return [parse_rational(part) for part in text.split(",")]


def parse_index_range(text) -> list:
    """``3..8`` (inclusive) or a comma list of integers."""
    try:
        if ".." in text:
            lo_text, hi_text = text.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
            if hi < lo:
                raise UsageError("empty range %r" % text)
            return list(range(lo, hi + 1))
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise UsageError("not an integer range: %r" % text) from None


_GENERATORS = {"path": (path, 1), "star": (star, 1), "spider": (spider, 2), "octopus": (octopus, 2)}


def parse_tree(spec):
    """``path:5``, ``star:4``, ``spider:3x2``, ``octopus:3x2``, or a JSON file."""
    kind, sep, rest = spec.partition(":")
    if sep and kind in _GENERATORS:
        builder, arity = _GENERATORS[kind]
        try:
            args = tuple(int(part) for part in rest.split("x"))
        except ValueError:
            args = ()
        if len(args) != arity:
            raise UsageError(
                "tree %r needs %d integer size(s), e.g. %s" % (spec, arity, _EXAMPLE[kind])
            )
        try:
            return builder(*args)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    try:
        with open(spec, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise UsageError("cannot read tree file %r: %s" % (spec, exc)) from None
    try:
        return tree_from_json(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError("malformed tree file %r: %s" % (spec, exc)) from None


_EXAMPLE = {"path": "path:5", "star": "star:4", "spider": "spider:3x2", "octopus": "octopus:3x2"}


def _param_spec(text, count, flag):
    """A scalar Fraction, or exactly ``count`` comma-separated ones."""
    parts = [part.strip() for part in text.split(",")]
    if len(parts) == 1:
        return parse_rational(parts[0])
    if len(parts) != count:
        raise UsageError(
            "%s takes one value or %d comma-separated values, got %d"
            % (flag, count, len(parts))
        )
    return [parse_rational(part) for part in parts]


def resolve_params(tree, config):
    """ChainParams from ``--params FILE`` or ``--r``/``--p`` specs."""
    if config.params is not None:
        try:
            with open(config.params, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise UsageError("cannot read params file %r: %s" % (config.params, exc)) from None
        try:
            return params_from_json(tree, text)
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError("malformed params file %r: %s" % (config.params, exc)) from None
    if config.r is None or config.p is None:
        raise UsageError("give --params FILE, or both --r and --p")
    r_spec = _param_spec(config.r, tree.n, "--r")
    if isinstance(r_spec, list):
        r_spec = dict(enumerate(r_spec))
    p_spec = _param_spec(config.p, len(tree.edges), "--p")
    if isinstance(p_spec, list):
        p_spec = {"%d-%d" % edge: value for edge, value in zip(tree.edges, p_spec)}
    try:
        return make_params(tree, r_spec, p_spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def parse_vertex_set(text) -> VertexSet:
    try:
        vertices = [int(part) for part in text.split(",")]
    except ValueError:
        raise UsageError("not a vertex list: %r" % text) from None
    return VertexSet.of(*vertices)


# ---------------------------------------------------------------------------
# artifact rendering


def _fractions(values):
    return [str(value) for value in values]


def _json_artifact(payload, config):
    payload["version"] = VERSION
    payload["config"] = config_digest(config)
    return json.dumps(payload, indent=2) + "\n"


def _csv_artifact(header, rows, config, notes=()):
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    lines.extend("# %s" % note for note in notes)
    lines.append("# treerep %s config %s" % (VERSION, config_digest(config)))
    return "\n".join(lines) + "\n"


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_analyze(config):
    tree = parse_tree(config.tree)
    params = resolve_params(tree, config)
    verdict = is_representable(tree, params)
    payload = {
        "command": "analyze",
        "tree": config.tree,
        "vertices": tree.n,
        "r": _fractions(params.r),
        "p": _fractions(params.p),
        "representable": verdict.representable,
        "witness": None if verdict.witness is None else list(verdict.witness),
        "checked_sets": verdict.checked_sets,
    }
    _emit(_json_artifact(payload, config), config.out)
    if config.expect is not None:
        expected = config.expect == "representable"
        if verdict.representable != expected:
            return 1
    return 0


def _cmd_scan(config):
    tree = parse_tree(config.tree)
    if config.r_grid is None or config.p_grid is None:
        raise UsageError("scan needs --r-grid and --p-grid")
    points = phase_scan(
        tree,
        parse_grid(config.r_grid),
        parse_grid(config.p_grid),
        threads=config.threads,
    )
    rows = []
    for point in points:
        witness = point.verdict.witness
        rows.append(
            (
                str(point.r),
                str(point.p),
                "true" if point.verdict.representable else "false",
                "" if witness is None else ";".join(str(v) for v in witness),
            )
        )
    _emit(_csv_artifact(("r", "p", "representable", "witness"), rows, config), config.out)
    return 0


_R0_NOTE = (
    "r0 undefined at n=%d: no index j <= n has positive signed "
    "complementary Bell number, so the companion level does not exist; "
    "published tables print an anomalous value at this entry"
)


def _cmd_thresholds(config):
    if config.ns is None:
        raise UsageError("thresholds needs --n, e.g. --n 3..8")
    try:
        rows = threshold_table(parse_index_range(config.ns))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    table = []
    notes = []
    for row in rows:
        if row.r0 is None:
            r0_text = "undefined"
            notes.append(_R0_NOTE % row.n)
        else:
            r0_text = "%.6f" % row.r0
        table.append(
            (str(row.n), str(row.bell_c), "%.6f" % row.r_star, r0_text, "%.6f" % row.r1)
        )
    _emit(
        _csv_artifact(("n", "bell_c", "r_star", "r0", "r1"), table, config, notes=notes),
        config.out,
    )
    return 0


def _octopus_closed_form(config, tree, params, subset, counts):
    """Closed form for the center-law derivative, when it applies.

    Available exactly when the tree is an ``octopus:mx2`` generator,
    the set is the center plus the inner ring, and the multiset is the
    center once.  Anything else reports no closed form rather than
    guessing one.
    """
    kind, _, rest = (config.tree or "").partition(":")
    if kind != "octopus":
        return None
    arms = rest.split("x")
    if len(arms) != 2 or arms[1] != "2":
        return None
    m = int(arms[0])
    inner = [1 + 2 * j for j in range(m)]
    if subset != VertexSet.of(0, *inner) or counts != {0: 1}:
        return None
    p_first = [params.p[tree.edge_index(0, v)] for v in inner]
    p_second = [params.p[tree.edge_index(v, v + 1)] for v in inner]
    return d_nu_dr_octopus(m, p_first, p_second)


def _cmd_deriv_check(config):
    tree = parse_tree(config.tree)
    if config.subset is None or config.multiset is None:
        raise UsageError("deriv-check needs --set and --multiset")
    subset = parse_vertex_set(config.subset)
    closed = None
    if config.at in ("p0", "p1"):
        if config.r is None:
            raise UsageError("--at %s needs --r (vertex laws)" % config.at)
        base_p = "0" if config.at == "p0" else "1"
        params = resolve_params(
            tree, dataclasses.replace(config, p=config.p if config.p is not None else base_p)
        )
        try:
            edges = EdgeMultiset.from_string(config.multiset)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        value = d_nu_dp(tree, params, subset, edges, at=config.at)
        uniform_r = len(set(params.r)) == 1
        if uniform_r and is_connected(tree, subset):
            if config.at == "p0" and edges == boundary_edge_multiset(tree, subset):
                if edges.total >= 2:
                    closed = closed_form_p0(edges.total, params.r[0])
            elif config.at == "p1" and edges == subtree_edge_multiset(tree, subset):
                if len(subset) >= 2:
                    closed = closed_form_p1(tree, subset, params.r[0])
        multiset_text = str(edges)
    elif config.at == "r1":
        if config.p is None:
            raise UsageError("--at r1 needs --p (edge parameters)")
        params = resolve_params(
            tree, dataclasses.replace(config, r=config.r if config.r is not None else "1")
        )
        try:
            vertices = [int(part) for part in config.multiset.split(",")]
        except ValueError:
            raise UsageError("--at r1 takes a vertex multiset, e.g. 0 or 0,0,3") from None
        counts = {}
        for v in vertices:
            counts[v] = counts.get(v, 0) + 1
        value = d_nu_dr(tree, params, subset, counts, at="r1")
        closed = _octopus_closed_form(config, tree, params, subset, counts)
        multiset_text = ",".join(str(v) for v in sorted(vertices))
    else:
        raise UsageError("deriv-check needs --at p0, p1 or r1")
    payload = {
        "command": "deriv-check",
        "tree": config.tree,
        "set": list(subset),
        "at": config.at,
        "multiset": multiset_text,
        "derivative": str(value),
        "closed_form": None if closed is None else str(closed),
        "matches": None if closed is None else value == closed,
    }
    _emit(_json_artifact(payload, config), config.out)
    return 1 if payload["matches"] is False else 0


def _comparison_payload(report):
    return {
        "statistic": report.statistic,
        "dof": report.dof,
        "p_value": report.p_value,
        "cells": report.cells,
        "passed": report.passed,
    }


def _cmd_verify(config):
    tree = parse_tree(config.tree)
    params = resolve_params(tree, config)
    if config.draws < 1:
        raise UsageError("--draws must be positive")
    alpha = parse_rational(config.alpha)
    tolerance = parse_rational(config.tolerance)
    try:
        field = field_from_chain(tree, params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    def percolation(n_draws, seed):
        return sample_percolation_many(tree, params, n_draws, seed)

    def recursive(n_draws, seed):
        return sample_recursive_many(tree, params, n_draws, seed)

    def poisson(n_draws, seed):
        return sample_poisson_field_many(field, n_draws, seed)

    # Split seed ranges per check; compare_laws itself uses seed and seed+1.
    perc_vs_rec = compare_laws(
        percolation, recursive, tree.n, n_draws=config.draws, alpha=float(alpha), seed=config.seed
    )
    pois_vs_rec = compare_laws(
        poisson, recursive, tree.n, n_draws=config.draws, alpha=float(alpha), seed=config.seed + 2
    )
    closure = poisson_closure_report(
        tree, params, config.draws, config.seed + 4, tolerance=float(tolerance)
    )
    passed = perc_vs_rec.passed and pois_vs_rec.passed and closure.passed
    payload = {
        "command": "verify",
        "tree": config.tree,
        "r": _fractions(params.r),
        "p": _fractions(params.p),
        "draws": config.draws,
        "seed": config.seed,
        "alpha": str(alpha),
        "percolation_vs_recursive": _comparison_payload(perc_vs_rec),
        "poisson_vs_recursive": _comparison_payload(pois_vs_rec),
        "poisson_closure": {
            "checked": closure.checked,
            "max_sigmas": closure.max_sigmas,
            "worst_set": None if closure.worst_set is None else list(closure.worst_set),
            "tolerance": closure.tolerance,
            "passed": closure.passed,
        },
        "passed": passed,
    }
    _emit(_json_artifact(payload, config), config.out)
    return 0 if passed else 1


def _cmd_scaling_check(config):
    tree = parse_tree(config.tree)
    if config.r is None or config.p is None:
        raise UsageError("scaling-check needs uniform --r and --p")
    if config.k is None:
        raise UsageError("scaling-check needs --k")
    r = parse_rational(config.r)
    p = parse_rational(config.p)
    passed = scaling_check(tree, r, p, config.k)
    payload = {
        "command": "scaling-check",
        "tree": config.tree,
        "r": str(r),
        "p": str(p),
        "k": config.k,
        "aggregated_p": str(1 - (1 - p) ** config.k),
        "passed": passed,
    }
    _emit(_json_artifact(payload, config), config.out)
    return 0 if passed else 1


_DISPATCH = {
    "analyze": _cmd_analyze,
    "scan": _cmd_scan,
    "thresholds": _cmd_thresholds,
    "deriv-check": _cmd_deriv_check,
    "verify": _cmd_verify,
    "scaling-check": _cmd_scaling_check,
}


def run(config: RunConfig) -> int:
    """Execute one configured command; returns the exit status.

    0: success (and any asserted outcome holds); 1: the artifact was
    written but an asserted outcome failed (``--expect`` mismatch, a
    rejected sampler comparison, a failed closure or scaling identity,
    or a closed-form mismatch); 2: usage or input error, including
    malformed files, out-of-range parameters and exceeded size caps.
    """
    handler = _DISPATCH.get(config.command)
    if handler is None:
        print("treerep: unknown command %r" % config.command, file=sys.stderr)
        return 2
    try:
        return handler(config)
    except UsageError as exc:
        print("treerep: %s" % exc, file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        # Domain errors raised by the library: caps, ranges, bad edges.
        print("treerep: %s" % exc, file=sys.stderr)
        return 2


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(parser, tree=True, params=False):
    if tree:
        parser.add_argument(
            "--tree",
            required=True,
            metavar="SPEC",
            help="path:N, star:K, spider:KxL, octopus:MxD, or a tree JSON file",
        )
    if params:
        parser.add_argument(
            "--r", metavar="RAT[,RAT...]", help="vertex law(s), exact rationals"
        )
        parser.add_argument(
            "--p", metavar="RAT[,RAT...]", help="edge parameter(s), exact rationals"
        )
        parser.add_argument(
            "--params", metavar="FILE", help='JSON file {"r": ..., "p": ...}'
        )
    parser.add_argument("--out", metavar="FILE", help="write the artifact here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treerep",
        description="Exact Poisson-representability analysis of tree-indexed Markov chains.",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")

    analyze = commands.add_parser(
        "analyze", help="exact verdict at one parameter point (JSON)"
    )
    _add_common(analyze, params=True)
    analyze.add_argument(
        "--expect",
        choices=("representable", "not-representable"),
        help="exit 1 unless the verdict matches",
    )

    scan = commands.add_parser("scan", help="verdicts over a rational (r, p) grid (CSV)")
    _add_common(scan)
    scan.add_argument("--r-grid", required=True, metavar="GRID", help="a:b:step or comma list")
    scan.add_argument("--p-grid", required=True, metavar="GRID", help="a:b:step or comma list")
    scan.add_argument("--threads", type=int, default=1, help="worker cap for grid points")

    thresholds = commands.add_parser(
        "thresholds", help="branching-number threshold table (CSV)"
    )
    thresholds.add_argument(
        "--n", dest="ns", required=True, metavar="RANGE", help="3..8 or comma list"
    )
    _add_common(thresholds, tree=False)

    deriv = commands.add_parser(
        "deriv-check", help="jet derivative vs closed form at a base point (JSON)"
    )
    _add_common(deriv, params=True)
    deriv.add_argument("--set", dest="subset", required=True, metavar="V,V,...", help="vertex set")
    deriv.add_argument(
        "--at", required=True, choices=("p0", "p1", "r1"), help="expansion base point"
    )
    deriv.add_argument(
        "--multiset",
        required=True,
        metavar="SPEC",
        help='edges "0-1,0-1,1-2" at p0/p1; vertices "0,0,3" at r1',
    )

    verify = commands.add_parser(
        "verify", help="sampler cross-checks and Poisson-field closure (JSON)"
    )
    _add_common(verify, params=True)
    verify.add_argument("--draws", type=int, default=100_000, help="draws per sampler")
    verify.add_argument("--seed", type=int, default=0, help="base seed; checks use split streams")
    verify.add_argument("--alpha", default="1/100", metavar="RAT", help="chi-square level")
    verify.add_argument(
        "--tolerance", default="4", metavar="RAT", help="closure tolerance in sigma units"
    )

    scaling = commands.add_parser(
        "scaling-check", help="edge-subdivision consistency of the measure (JSON)"
    )
    _add_common(scaling)
    scaling.add_argument("--r", required=True, metavar="RAT", help="uniform vertex law")
    scaling.add_argument("--p", required=True, metavar="RAT", help="uniform edge parameter")
    scaling.add_argument("--k", type=int, required=True, help="segments per original edge")

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    names = {field.name for field in dataclasses.fields(RunConfig)}
    data = {key: value for key, value in vars(args).items() if key in names and value is not None}
    return RunConfig(**data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(_config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
