"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 method inapplicable,
4 verification failure.
"""

from __future__ import annotations

import json
import sys

import click

from .stability import StabilityError, Wall, parse_rational, walls_in_window
from .wallcross import (
    WallCrossError,
    disjoint_wallcross,
    main_wallcross_resolved,
    push_resolved,
    wallcross_on_jbar,
)

EXIT_OK, EXIT_CONFIG, EXIT_INAPPLICABLE, EXIT_VERIFY = 0, 2, 3, 4


def _fail(msg, code):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _check_config(g, n, d, max_edges):
    if g < 0 or n < 1:
        _fail("need g >= 0 and n >= 1", EXIT_CONFIG)
    if 2 * g - 2 + n <= 0:
        _fail("2g - 2 + n must be positive", EXIT_CONFIG)
    if g < 2:
        _fail("genus at least 2 is required", EXIT_CONFIG)
    if d >= g:
        _fail("the degree must satisfy d < g", EXIT_CONFIG)
    if max_edges is not None and max_edges < 0:
        _fail("max-edges must be nonnegative", EXIT_CONFIG)


def _parse_window(text):
    try:
        lo, hi = (parse_rational(x) for x in text.split(","))
    except (ValueError, StabilityError):
        _fail(f"bad window {text!r}; expected lo,hi", EXIT_CONFIG)
    return lo, hi


def _parse_wall(text, g, n):
    try:
        W = Wall.parse(text)
        W.triple.check(g, n)
    except (ValueError, StabilityError) as exc:
        _fail(f"bad wall {text!r}: {exc}", EXIT_CONFIG)
    return W


def _emit(data, out):
    text = json.dumps(data, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


def _common(f):
    f = click.option("--g", "g", type=int, required=True, help="Genus.")(f)
    f = click.option("--n", "n", type=int, required=True, help="Number of markings.")(f)
    f = click.option("--d", "d", type=int, required=True, help="Degree.")(f)
    f = click.option("--max-edges", type=int, default=None, help="Edge bound (default g - d).")(f)
    f = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write JSON here.")(f)
    f = click.option("--format", "fmt", type=click.Choice(["json"]), default="json")(f)
    return f


@click.group()
def main():
    """Wall-crossing terms of universal Brill-Noether classes."""


@main.command("walls")
@_common
@click.option("--window", default="-1,1", show_default=True, help="Interval lo,hi for every coordinate.")
def cmd_walls(g, n, d, max_edges, out, fmt, window):
    """List the walls meeting a coordinate window."""
    _check_config(g, n, d, max_edges)
    lo, hi = _parse_window(window)
    data = []
    for rep, group in walls_in_window(g, n, d, default=(lo, hi)):
        item = rep.to_json()
        item["level"] = str(rep.level)
        item["multiplicity"] = len(group)
        item["coinciding"] = [W.to_json() for W in group]
        data.append(item)
    _emit({"g": g, "n": n, "d": d, "window": [str(lo), str(hi)], "walls": data}, out)


@main.command("cross")
@_common
@click.option("--wall", "wall_text", required=True, help="Wall as i,t,S,k with S like 1+2.")
@click.option("--base", "mode", flag_value="base", default=True, help="Formula on the compactified Jacobian.")
@click.option("--resolved", "mode", flag_value="resolved", help="Formula on the resolution.")
@click.option("--disjoint", "mode", flag_value="disjoint", help="Simplified formula for disjoint centres.")
@click.option("--check", is_flag=True, help="Also compare with the pushforward of the resolved formula.")
def cmd_cross(g, n, d, max_edges, out, fmt, wall_text, mode, check):
    """Compute the crossing term across one wall."""
    _check_config(g, n, d, max_edges)
    W = _parse_wall(wall_text, g, n)
    try:
        if mode == "resolved":
            expr = main_wallcross_resolved(g, n, d, W, max_edges)
        elif mode == "disjoint":
            try:
                expr = disjoint_wallcross(g, n, d, W, max_edges)
            except WallCrossError as exc:
                _fail(str(exc), EXIT_INAPPLICABLE)
        else:
            expr = wallcross_on_jbar(g, n, d, W, max_edges)
    except StabilityError as exc:
        _fail(str(exc), EXIT_CONFIG)
    data = expr.to_json()
    if check:
        base = wallcross_on_jbar(g, n, d, W, max_edges)
        pushed = push_resolved(main_wallcross_resolved(g, n, d, W, max_edges), max_edges)
        same = pushed == base
        if mode == "disjoint":
            same = same and expr == base
        data["oracle"] = "equal" if same else "different"
        click.echo(f"oracle: {data['oracle']}", err=True)
        _emit(data, out)
        if not same:
            sys.exit(EXIT_VERIFY)
        return
    _emit(data, out)


@main.command("verify")
@click.option("--suite", "suite", default="all", show_default=True,
              help="posets, forests, categories, coefficients, oracles or all.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(["json"]), default="json")
def cmd_verify(suite, out, fmt):
    """Run a property suite and report pass counts."""
    from .suite import SUITES, run_suite

    if suite != "all" and suite not in SUITES:
        _fail(f"unknown suite {suite!r}", EXIT_CONFIG)
    report = run_suite(suite)
    _emit(report.to_json(), out)
    if not report.ok:
        sys.exit(EXIT_VERIFY)


if __name__ == "__main__":
    main()
