"""Command-line entry point ``voter-circle``.

Conventions
-----------
* Numbers are written with 12 significant digits.
* Exit status 0 on success, 2 on invalid flags or malformed input files,
  1 on internal failures (including failed verification checks).
* Every run that writes a file also writes ``<file>.manifest.json``; pass
  ``--manifest-out`` to choose the location (needed when output goes to
  stdout). Replaying with ``--manifest FILE`` reruns the recorded command and
  checks that every output is byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .compactness import (
    HALF_DISK_INERTIA_SUM, HALF_DISK_PERIMETER, centroid_gap_slopes, chord_objective,
    compactness_report, disk_line_split, verify_inertia_lemma,
)
from .exact_analysis import prob_d2_exact
from .limit_constants import (
    CLOSED_FORM, PREFACTORS, limit_d0, limit_quadrature, series_I, series_J,
)
from .monte_carlo import brownian_event_estimate, convergence_table, estimate_distribution
from .splitline import (
    InfeasibleSplit, InputError, PointSet, line_segments, partisan_splitline,
    read_points_csv, read_polygon_json, write_assignments_csv,
)
from .svg import district_map, line_chart
from .voter_model import MAX_ENUMERATION, enumerate_d_distribution

DIGITS = 12
SERIES_PREFACTOR = "1/pi"


def fmt(x) -> str:
    return f"{float(x):.{DIGITS}g}"


def rounded(obj):
    """Round every float in a JSON-like structure to 12 significant digits."""
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else obj
    if isinstance(obj, (np.floating,)):
        return rounded(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(rounded(obj), indent=2) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ----------------------------------------------------------------- run state

class Run:
    """Outputs of one invocation, collected for the manifest."""

    def __init__(self, threads: int, manifest_out: str | None):
        self.threads = threads
        self.manifest_out = manifest_out
        self.files: list[str] = []
        self.stdout = io.StringIO()

    def emit(self, text: str):
        self.stdout.write(text)
        click.echo(text, nl=False)

    def write(self, path, text: str):
        with open(path, "w", newline="") as fh:
            fh.write(text)
        self.files.append(str(path))

    def record(self, path):
        self.files.append(str(path))

    def output(self, path, text: str):
        """Write ``text`` to ``path``, or to stdout when ``path`` is None."""
        if path is None:
            self.emit(text)
        else:
            self.write(path, text)


def _argv_for(command: click.Command, params: dict) -> list[str]:
    argv = [command.name]
    for p in command.params:
        if not isinstance(p, click.Option) or p.name not in params:
            continue
        v = params[p.name]
        if v is None:
            continue
        if p.is_flag:
            if v:
                argv.append(p.opts[0])
            elif p.secondary_opts:
                argv.append(p.secondary_opts[0])
            continue
        argv += [p.opts[0], repr(v) if isinstance(v, float) else str(v)]
    return argv


def _write_manifest(ctx: click.Context, run: Run):
    target = run.manifest_out or (run.files[0] + ".manifest.json" if run.files else None)
    if target is None:
        return
    manifest = {
        "subcommand": ctx.command.name,
        "params": rounded(dict(ctx.params)),
        "argv": _argv_for(ctx.command, ctx.params),
        "seed": ctx.params.get("seed"),
        "version": __version__,
        "outputs": {f: sha256(f) for f in run.files},
        "stdout_sha256": hashlib.sha256(run.stdout.getvalue().encode()).hexdigest(),
    }
    with open(target, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def finish(ctx: click.Context):
    _write_manifest(ctx, ctx.obj)


# ----------------------------------------------------------------- the group

@click.group(invoke_without_command=True, context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True,
              help="Worker processes for Monte Carlo subcommands.")
@click.option("--manifest", "manifest_in", type=click.Path(exists=True, dir_okay=False),
              help="Replay the run recorded in this manifest and check its outputs.")
@click.option("--manifest-out", type=click.Path(dir_okay=False),
              help="Where to write this run's manifest.")
@click.version_option(__version__, prog_name="voter-circle")
@click.pass_context
def cli(ctx, threads, manifest_in, manifest_out):
    """Voter circle gerrymandering model: exact results, limits, simulation and geometry."""
    ctx.obj = Run(threads, manifest_out)
    if ctx.invoked_subcommand is not None:
        if manifest_in:
            raise click.UsageError("--manifest replays a recorded run and takes no subcommand")
        return
    if not manifest_in:
        click.echo(ctx.get_help())
        ctx.exit(2)
    replay(manifest_in, threads)


def replay(path: str, threads: int):
    try:
        manifest = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: {exc.msg}") from None
    if not isinstance(manifest, dict) or not isinstance(manifest.get("argv"), list):
        raise InputError(f"{path}: manifest has no argv list")
    if manifest.get("version") != __version__:
        click.echo(f"warning: manifest written by version {manifest.get('version')}, "
                   f"running {__version__}", err=True)
    args = ["--threads", str(threads)] + [str(a) for a in manifest["argv"]]
    # replay writes its manifest to a scratch name so the original stays intact
    args = ["--manifest-out", path + ".replay"] + args
    cli.main(args=args, prog_name="voter-circle", standalone_mode=False)
    replayed = json.loads(Path(path + ".replay").read_text())
    Path(path + ".replay").unlink()
    expected = manifest.get("outputs", {})
    bad = [f for f, digest in expected.items() if replayed["outputs"].get(f) != digest]
    if manifest.get("stdout_sha256") not in (None, replayed["stdout_sha256"]):
        bad.append("<stdout>")
    if bad:
        raise RuntimeError(f"replay produced different outputs: {', '.join(bad)}")
    click.echo(f"replay ok: {len(expected)} file(s) identical", err=True)


def _seed_option(f):
    return click.option("--seed", type=click.IntRange(min=0), required=True,
                        help="Master seed (required for randomized commands).")(f)


def _out_option(help_text: str):
    return click.option("--out", type=click.Path(dir_okay=False), default=None,
                        help=f"{help_text} (stdout when omitted).")


# ------------------------------------------------------------ voter circle

@cli.command()
@click.option("--k", type=click.IntRange(min=1), required=True, help="Number of districts.")
@click.option("--n", type=click.IntRange(min=1), required=True, help="Voters per district.")
@click.option("--trials", type=click.IntRange(min=1), required=True)
@_seed_option
@_out_option("CSV with columns d,count,frequency")
@click.pass_context
def simulate(ctx, k, n, trials, seed, out):
    """Monte Carlo distribution of the optimal gerrymander's district count D."""
    est = estimate_distribution(k, n, trials, seed, workers=ctx.obj.threads)
    rows = [(d, int(c), c / trials) for d, c in enumerate(est.counts)]
    ctx.obj.output(out, csv_text(["d", "count", "frequency"], rows))
    finish(ctx)


@cli.command(name="enumerate")
@click.option("--k", type=click.IntRange(min=1), required=True)
@click.option("--n", type=click.IntRange(min=1), required=True)
@_out_option("JSON with exact probabilities as \"p/q\" strings")
@click.pass_context
def enumerate_cmd(ctx, k, n, out):
    """Exact distribution of D over all 2^(kn) vote patterns."""
    if k * n > MAX_ENUMERATION:
        raise click.BadParameter(f"k*n = {k * n} exceeds {MAX_ENUMERATION}", param_hint="'--k'/'--n'")
    dist = enumerate_d_distribution(k, n)
    ctx.obj.output(out, dumps({"k": k, "n": n, "distribution": [str(p) for p in dist]}))
    finish(ctx)


def _parse_range(text: str) -> range:
    try:
        parts = [int(p) for p in text.split(":")]
    except ValueError:
        raise click.BadParameter(f"expected LO:HI or LO:HI:STEP, got {text!r}",
                                 param_hint="'--n-range'") from None
    if len(parts) not in (2, 3) or parts[0] < 1 or parts[1] < parts[0] or (len(parts) == 3 and parts[2] < 1):
        raise click.BadParameter(f"expected 1 <= LO <= HI and STEP >= 1, got {text!r}",
                                 param_hint="'--n-range'")
    step = parts[2] if len(parts) == 3 else 1
    return range(parts[0], parts[1] + 1, step)


@cli.command()
@click.option("--n", type=click.IntRange(min=1), default=None, help="A single district size.")
@click.option("--n-range", default=None, help="Inclusive LO:HI or LO:HI:STEP.")
@click.option("--format", "fmt_", type=click.Choice(["auto", "json", "csv"]), default="auto",
              show_default=True, help="auto: JSON for --n, CSV for --n-range.")
@_out_option("Output file")
@click.pass_context
def exact(ctx, n, n_range, fmt_, out):
    """Exact Pr(D_n = 2) for two districts."""
    if (n is None) == (n_range is None):
        raise click.UsageError("give exactly one of --n and --n-range")
    ns = [n] if n is not None else list(_parse_range(n_range))
    style = fmt_ if fmt_ != "auto" else ("json" if n is not None else "csv")
    ps = [(m, prob_d2_exact(m)) for m in ns]
    if style == "csv":
        text = csv_text(["n", "p_decimal", "p_fraction"], [(m, float(p), str(p)) for m, p in ps])
    else:
        records = [{"n": m, "p": str(p), "decimal": float(p)} for m, p in ps]
        text = dumps(records[0] if n is not None else records)
    ctx.obj.output(out, text)
    finish(ctx)


# --------------------------------------------------------------- constants

@cli.command()
@click.option("--route", type=click.Choice(["closed", "series", "quadrature", "all"]),
              default="all", show_default=True)
@click.option("--K", "K", type=click.IntRange(min=1), default=None,
              help="Series truncation (default 10^6) or density truncation for quadrature.")
@click.option("--tol", type=click.FloatRange(min=0, min_open=True), default=1e-4, show_default=True,
              help="Pairwise agreement tolerance for --route all.")
@_out_option("JSON")
@click.pass_context
def constants(ctx, route, K, tol, out):
    """The limit Pr(D = 0) = 1/(1 + e^pi) by closed form, series and direct quadrature."""
    def closed():
        return {"route": "closed", "value": CLOSED_FORM, "tail_bound": 0.0, "nodes": 0}

    def series():
        sI, sJ = series_I(K or 1_000_000), series_J(K or 1_000_000)
        c = PREFACTORS[SERIES_PREFACTOR]
        return {"route": "series", "value": c * (sI.value - sJ.value),
                "tail_bound": c * (sI.tail_bound + sJ.tail_bound),
                "nodes": 2 * sJ.truncation_K + 1, "prefactor": SERIES_PREFACTOR,
                "sum_I": sI.value, "sum_J": sJ.value}

    def quadrature():
        q = limit_quadrature(K)
        return {"route": "quadrature", "value": q.value, "tail_bound": q.error_estimate,
                "nodes": q.nodes, "K": q.K}

    if route == "all":
        routes = limit_d0(K_series=K or 1_000_000, tol=tol, strict=False)
        result = {
            "route": "all",
            "routes": [
                closed(),
                {"route": "series", "value": routes.series,
                 "tail_bound": PREFACTORS[routes.prefactor_name]
                 * (routes.series_I.tail_bound + routes.series_J.tail_bound),
                 "nodes": 2 * routes.series_J.truncation_K + 1},
                {"route": "quadrature", "value": routes.quadrature,
                 "tail_bound": routes.quad.error_estimate, "nodes": routes.quad.nodes},
            ],
            "prefactor": routes.prefactor_name,
            "prefactor_ratio": routes.prefactor_ratio,
            "disagreements": routes.disagreements(),
            "tol": tol,
            "agree": routes.agree,
        }
    else:
        result = {"closed": closed, "series": series, "quadrature": quadrature}[route]()
    ctx.obj.output(out, dumps(result))
    finish(ctx)
    if route == "all" and not result["agree"]:
        raise RuntimeError("routes disagree beyond --tol")


# -------------------------------------------------------------- simulation

@cli.command()
@click.option("--steps", type=click.IntRange(min=1), required=True, help="Walk steps per half.")
@click.option("--trials", type=click.IntRange(min=1), required=True)
@_seed_option
@_out_option("JSON")
@click.pass_context
def walk(ctx, steps, trials, seed, out):
    """Monte Carlo probability of the two-walk event equivalent to D = 0."""
    p = brownian_event_estimate(steps, trials, seed, workers=ctx.obj.threads)
    result = {"steps": steps, "trials": trials, "seed": seed, "estimate": p,
              "std_error": math.sqrt(p * (1 - p) / trials), "limit": CLOSED_FORM}
    ctx.obj.output(out, dumps(result))
    finish(ctx)


def _parse_n_list(text: str) -> list[int]:
    try:
        ns = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}",
                                 param_hint="'--n-list'") from None
    if not ns or min(ns) < 1:
        raise click.BadParameter("need at least one positive n", param_hint="'--n-list'")
    return ns


@cli.command()
@click.option("--n-list", required=True, help="Comma-separated district sizes, e.g. 10,100,1000.")
@click.option("--trials", type=click.IntRange(min=1), required=True)
@_seed_option
@_out_option("CSV convergence table")
@click.option("--svg", "svg_out", type=click.Path(dir_okay=False), default=None,
              help="Write a convergence chart.")
@click.pass_context
def converge(ctx, n_list, trials, seed, out, svg_out):
    """Frequencies of D = 0, 1, 2 for k = 2 against the exact and limiting values."""
    rows = convergence_table(_parse_n_list(n_list), trials, seed, workers=ctx.obj.threads)
    header = ["n", "freq_D0", "freq_D1", "freq_D2", "exact_D2", "limit_D0", "se_D0", "se_D2"]
    ctx.obj.output(out, csv_text(header, [tuple(getattr(r, h) for h in header) for r in rows]))
    if svg_out:
        ns = [r.n for r in rows]
        chart = line_chart({
            "Pr(D=0) simulated": (ns, [r.freq_D0 for r in rows]),
            "Pr(D=2) simulated": (ns, [r.freq_D2 for r in rows]),
            "ref:Pr(D=2) exact": (ns, [r.exact_D2 for r in rows]),
            "ref:1/(1+e^pi)": (ns, [r.limit_D0 for r in rows]),
        }, title=f"k = 2, {trials} trials per n", xlabel="n", ylabel="frequency",
            log_x=len(ns) > 1 and min(ns) > 0)
        ctx.obj.write(svg_out, chart)
    finish(ctx)


# ---------------------------------------------------------------- geometry

@cli.command()
@click.option("--polygon", type=click.Path(exists=True, dir_okay=False), required=True,
              help="JSON ring of [x, y] pairs.")
@_out_option("JSON")
@click.pass_context
def compactness(ctx, polygon, out):
    """Polsby-Popper, hull ratio, Reock, centroid and inertia of a polygon."""
    report = compactness_report(read_polygon_json(polygon))
    ctx.obj.output(out, dumps(report.as_dict()))
    finish(ctx)


def geometry_checks() -> list[tuple[str, float, float, float, bool]]:
    """``(name, value, target, tolerance, ok)`` for every geometry verification."""
    checks = []
    half = disk_line_split(0.0)
    checks.append(("half-disk max perimeter", half.max_perimeter, HALF_DISK_PERIMETER, 1e-3,
                   abs(half.max_perimeter - HALF_DISK_PERIMETER) <= 1e-3))
    checks.append(("half-disk inertia sum", half.inertia_sum, HALF_DISK_INERTIA_SUM, 1e-3,
                   abs(half.inertia_sum - HALF_DISK_INERTIA_SUM) <= 1e-3))
    grid = np.linspace(0, math.pi, 2001)[1:-1]
    values = [chord_objective(t) for t in grid]
    argmin = float(grid[int(np.argmin(values))])
    spacing = float(grid[1] - grid[0])
    checks.append(("chord objective argmin", argmin, math.pi / 2, spacing,
                   abs(argmin - math.pi / 2) <= spacing))
    zs = np.linspace(-0.98, 0.98, 99)
    lemma = verify_inertia_lemma(zs)
    worst_gap = min(c.pair_quadrature - lemma.base for c in lemma.checks)
    checks.append(("I(z)+I(-z) - 2I(0) minimum", worst_gap, 0.0, 1e-10,
                   all(c.bound_ok for c in lemma.checks)))
    worst_rel = max(abs(c.derivative - c.finite_difference) / max(abs(c.derivative), 1e-12)
                    for c in lemma.checks if c.derivative != 0)
    checks.append(("derivative vs finite difference", worst_rel, 0.0, 1e-4,
                   all(c.derivative_ok for c in lemma.checks)))
    worst_quad = max(abs(c.pair_quadrature - c.pair) for c in lemma.checks)
    checks.append(("closed form vs quadrature", worst_quad, 0.0, 2e-9,
                   all(c.quadrature_ok for c in lemma.checks)))
    checks.append(("centroid bracket", float(sum(not c.bracket_ok for c in lemma.checks)), 0.0, 0.0,
                   all(c.bracket_ok for c in lemma.checks)))
    slope = float(np.max(centroid_gap_slopes(zs)))
    checks.append(("max slope of centroid gap", slope, 0.0, 0.0, slope < 0))
    return checks


@cli.command(name="verify-geometry")
@_out_option("CSV table")
@click.pass_context
def verify_geometry(ctx, out):
    """Check the half-disk constants and the inertia lemma; exit 1 on any failure."""
    checks = geometry_checks()
    ctx.obj.output(out, csv_text(["check", "value", "target", "tolerance", "status"],
                                 [(n, v, t, tol, "pass" if ok else "FAIL") for n, v, t, tol, ok in checks]))
    finish(ctx)
    failed = [c[0] for c in checks if not c[4]]
    if failed:
        raise RuntimeError(f"geometry checks failed: {', '.join(failed)}")


# --------------------------------------------------------------- splitline

@cli.command()
@click.option("--points", type=click.Path(exists=True, dir_okay=False), default=None,
              help="CSV with header x,y,pos,neg (default: shipped competitive fixture).")
@click.option("--polygon", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON ring bounding the state (default: fixture's unit square).")
@click.option("--k", type=click.IntRange(min=1), required=True, help="Number of districts.")
@click.option("--objective", type=click.Choice(["maximize", "minimize"]), default="maximize",
              show_default=True)
@click.option("--party", type=click.Choice(["pos", "neg"]), default="pos", show_default=True)
@click.option("--angles", type=click.IntRange(min=1), default=180, show_default=True)
@click.option("--beam", type=click.IntRange(min=1), default=8, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--tolerance", type=click.FloatRange(min=0, min_open=True, max=1), default=0.005,
              show_default=True, help="Maximum relative deviation from the ideal population.")
@_out_option("JSON plan")
@click.option("--assignments", type=click.Path(dir_okay=False), default=None,
              help="CSV point,district.")
@click.option("--svg", "svg_out", type=click.Path(dir_okay=False), default=None,
              help="District map.")
@click.pass_context
def splitline(ctx, points, polygon, k, objective, party, angles, beam, seed, tolerance, out,
              assignments, svg_out):
    """Split-line districting that maximizes or minimizes a party's seats."""
    if (points is None) != (polygon is None):
        raise click.UsageError("give both --points and --polygon, or neither for the fixture")
    if points is None:
        from .fixtures import competitive_stripes
        pts, state = competitive_stripes()
    else:
        pts, state = read_points_csv(points), read_polygon_json(polygon)
    ps = PointSet(pts)
    try:
        plan = partisan_splitline(ps, state, k, objective, party, angles, beam, seed, tolerance)
    except InfeasibleSplit as exc:
        raise click.BadParameter(str(exc), param_hint="'--tolerance'/'--angles'") from None
    ctx.obj.output(out, dumps(plan.to_json()))
    if assignments:
        write_assignments_csv(assignments, plan)
        ctx.obj.record(assignments)
    if svg_out:
        title = (f"{objective} {party}: {plan.majority_count} of {k} districts")
        ctx.obj.write(svg_out, district_map(
            [d.region for d in plan.districts], [d.winner for d in plan.districts],
            state.vertices, line_segments(plan, state), points=ps.xy, title=title))
    finish(ctx)


# --------------------------------------------------------------- entry point

def main(argv=None) -> int:
    try:
        rc = cli.main(args=argv, prog_name="voter-circle", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except (InputError, ValueError) as exc:
        click.echo(f"Error: {exc}", err=True)
        return 2
    except Exception as exc:  # noqa: BLE001
        click.echo(f"internal error: {exc}", err=True)
        return 1
    # without standalone mode click returns the code passed to ctx.exit
    return rc if isinstance(rc, int) else 0


if __name__ == "__main__":
    sys.exit(main())
