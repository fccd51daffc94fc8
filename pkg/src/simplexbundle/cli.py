"""Command-line front end.

Exit codes
----------
0 success; 1 failed ``verify`` check; 2 malformed options or configuration;
3 model could not be resolved; 4 output not writable; 5 numerical failure
(for example a flow that cannot take an improving step).

Every table is CSV with numbers written to 17 significant digits, or JSON
records with ``--format json``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import __version__
from .curves import curve_from_table, fisher_information, score, velocity
from .errors import (
    AbsoluteContinuityViolation,
    ModelNotFound,
    OutOfDomain,
    SimplexError,
)
from .natgrad import (
    entropy,
    entropy_functional,
    entropy_production,
    expectation_functional,
    natural_gradient_flow,
)
from .poly import binomial_score_relation, detect_binomial, model_tangent_system, parse_polynomial
from .simplex import NORM_TOL, SampleSpace, center, distribution_from_json, make_distribution
from .transport import ExpGeodesic, kl
from .verify import CHECKS, run_checks
from .zoo import DEFAULT_GIBBS, ZOO, _gibbs_from_params, entropy_curve, get_curve, gibbs_curve

EXIT_VERIFY, EXIT_CONFIG, EXIT_MODEL, EXIT_OUTPUT, EXIT_NUMERIC = 1, 2, 3, 4, 5
TOL_ENV = "SIMPLEX_BUNDLE_TOL"


class CliFailure(click.ClickException):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.exit_code = code


def config_error(message: str) -> CliFailure:
    return CliFailure(message, EXIT_CONFIG)


# -- parsing -------------------------------------------------------------------

def parse_grid(text: str) -> list[float]:
    """``min:max:n`` (inclusive, exact rational spacing) or a comma list."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError("expected min:max:n")
            lo, hi, n = Fraction(parts[0]), Fraction(parts[1]), int(parts[2])
            if n < 1:
                raise ValueError("n must be positive")
            if n == 1:
                if lo != hi:
                    raise ValueError("a one-point grid needs min == max")
                return [float(lo)]
            return [float(lo + (hi - lo) * i / (n - 1)) for i in range(n)]
        values = [float(tok) for tok in text.split(",") if tok.strip()]
        if not values:
            raise ValueError("empty grid")
        return values
    except (ValueError, ZeroDivisionError) as exc:
        raise config_error(f"bad grid {text!r}: {exc}") from None


def parse_vector(text: str, what: str) -> np.ndarray:
    try:
        v = json.loads(text) if text.strip().startswith("[") else [float(x) for x in text.split(",")]
        return np.asarray(v, dtype=float)
    except (ValueError, TypeError) as exc:
        raise config_error(f"bad {what} {text!r}: {exc}") from None


def tolerance() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return NORM_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise config_error(f"{TOL_ENV}={raw!r} is not a number") from None
    if not tol > 0 or not math.isfinite(tol):
        raise config_error(f"{TOL_ENV} must be positive and finite")
    return tol


def load_params(text: str | None) -> dict | None:
    if text is None:
        return None
    source = Path(text)
    try:
        raw = source.read_text() if source.is_file() else text
        params = json.loads(raw)
    except (OSError, ValueError) as exc:
        raise config_error(f"cannot read parameters: {exc}") from None
    if not isinstance(params, dict):
        raise config_error("parameters must be a JSON object")
    return params


def load_distribution(text: str, labels: str | None = None):
    """A distribution from JSON (inline or file) or a comma list of weights."""
    tol = tolerance()
    source = Path(text)
    try:
        raw = source.read_text() if source.is_file() else text
        if raw.strip().startswith("{"):
            return distribution_from_json(raw, tol=tol)
        w = parse_vector(raw, "distribution")
        space = SampleSpace(tuple(labels.split(","))) if labels else SampleSpace.of_size(w.size)
        return make_distribution(space, w, tol=tol)
    except OSError as exc:
        raise config_error(f"cannot read distribution: {exc}") from None
    except (SimplexError, ValueError, KeyError) as exc:
        raise config_error(f"invalid distribution: {exc}") from None


def _load_table_curve(path: Path):
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], [r for r in rows[1:] if r]
    if not header or header[0] != "t" or not all(h.startswith("w_") for h in header[1:]):
        raise ValueError("table header must be t,w_<label>,...")
    data = np.array(body, dtype=float)
    space = SampleSpace(tuple(h[2:] for h in header[1:]))
    return curve_from_table(data[:, 0], data[:, 1:], space, name=path.stem)


def resolve_model(model: str, params: str | None):
    """Zoo name, a JSON file ``{"model": name, "params": {...}}`` or a CSV table."""
    path = Path(model)
    try:
        if path.is_file():
            if path.suffix.lower() == ".csv":
                return _load_table_curve(path)
            spec = json.loads(path.read_text())
            return get_curve(spec["model"], spec.get("params"))
        return get_curve(model, load_params(params))
    except CliFailure:
        raise
    except (ModelNotFound, OSError, ValueError, KeyError, TypeError, IndexError) as exc:
        raise CliFailure(f"cannot resolve model {model!r}: {exc}", EXIT_MODEL) from None


# -- output --------------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % (float(x) + 0.0)  # drops the sign of -0.0


def _json_value(x):
    if isinstance(x, (str, bool, np.bool_)):
        return x if isinstance(x, str) else bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else None


def render(header: list[str], rows: list[list], form: str = "csv") -> str:
    if form == "json":
        return json.dumps([{h: _json_value(v) for h, v in zip(header, r)} for r in rows],
                          indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([fmt(v) for v in r])
    return buf.getvalue()


def emit(text: str, output: str | None) -> None:
    if output is None or output == "-":
        click.echo(text, nl=False)
        return
    try:
        Path(output).write_text(text)
    except OSError as exc:
        raise CliFailure(f"cannot write {output}: {exc}", EXIT_OUTPUT) from None


output_option = click.option("--output", "-o", default=None,
                             help="Output file (default: stdout).")
format_option = click.option("--format", "form", type=click.Choice(["csv", "json"]),
                             default="csv", show_default=True)


# -- commands ------------------------------------------------------------------

@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__)
def main():
    """Information geometry on the closed probability simplex."""


def _eval_rows(curve, grid, with_velocity: bool, with_score: bool):
    labels = curve.space.labels
    d = len(labels)
    header = ["t"] + [f"w_{x}" for x in labels]
    if with_velocity:
        header += [f"vdot_{x}" for x in labels]
    if with_score:
        header += [f"s_{x}" for x in labels] + ["fisher_info", "determined_mask"]
    header.append("status")
    nan = [math.nan] * d
    rows = []
    for t in grid:
        status = "ok"
        try:
            w = curve.point(t).weights
        except OutOfDomain:
            w, status = nan, "out_of_domain"
        row = [t, *w]
        if with_velocity:
            try:
                v = velocity(curve, t).values if status == "ok" else nan
            except OutOfDomain:
                v, status = nan, "out_of_domain"
            row += list(v)
        if with_score:
            s, info, mask = nan, math.nan, ""
            if status == "ok":
                try:
                    res = score(curve, t)
                    s, info, mask = res.values, fisher_information(curve, t), str(res.determined_mask)
                    if res.ill_conditioned:
                        status = "ill_conditioned"
                except AbsoluteContinuityViolation:
                    status = "abs_continuity_violation"
                except OutOfDomain:
                    status = "out_of_domain"
            row += [*s, info, mask]
        row.append(status)
        rows.append(row)
    return header, rows


@main.command("eval")
@click.option("--model", "-m", required=True,
              help=f"Zoo name ({', '.join(ZOO)}), JSON model file or sampled CSV table.")
@click.option("--params", default=None, help="JSON parameter block or file (gibbs, mixture).")
@click.option("--grid", "-g", required=True, help="min:max:n (inclusive) or a comma list.")
@click.option("--with-velocity", is_flag=True, help="Add vdot_* columns.")
@click.option("--with-score", is_flag=True,
              help="Add s_*, fisher_info and determined_mask columns.")
@output_option
@format_option
def eval_cmd(model, params, grid, with_velocity, with_score, output, form):
    """Evaluate a curve on a grid.

    Columns: t, w_*, [vdot_*], [s_*, fisher_info, determined_mask], status.
    status is ok, ill_conditioned, abs_continuity_violation or out_of_domain;
    failing rows carry nan values instead of aborting the sweep.
    """
    ts = parse_grid(grid)
    curve = resolve_model(model, params)
    emit(render(*_eval_rows(curve, ts, with_velocity, with_score), form), output)


@main.command("score")
@click.option("--model", "-m", required=True, help="Zoo name, JSON model file or CSV table.")
@click.option("--params", default=None, help="JSON parameter block or file.")
@click.option("--grid", "-g", required=True, help="min:max:n (inclusive) or a comma list.")
@output_option
@format_option
def score_cmd(model, params, grid, output, form):
    """Fisher scores along a curve.

    Columns: t, w_*, vdot_*, s_*, fisher_info, determined_mask, status.
    """
    ts = parse_grid(grid)
    curve = resolve_model(model, params)
    emit(render(*_eval_rows(curve, ts, True, True), form), output)


def _heatmap(resolution: int):
    rows = []
    for i in range(resolution):
        u = i / (resolution - 1)
        for j in range(resolution):
            v = j / (resolution - 1)
            w = np.array([u, (1 - u) * v, (1 - u) * (1 - v)])
            rows.append([*w, entropy(make_distribution(3, w))])
    return ["w1", "w2", "w3", "H"], rows


def _production(ts):
    curve = entropy_curve()
    rows = []
    for t in ts:
        try:
            rows.append([t, entropy_production(curve, t)])
        except OutOfDomain as exc:
            raise config_error(str(exc)) from None
    return ["t", "dHdt"], rows


@main.command("entropy")
@click.option("--heatmap", is_flag=True, help="Entropy on a barycentric grid: w1,w2,w3,H.")
@click.option("--resolution", default=100, show_default=True, type=click.IntRange(min=2),
              help="Heat map points per side; the table has resolution^2 rows.")
@click.option("--production", is_flag=True, help="Entropy production along entropy3: t,dHdt.")
@click.option("--grid", "-g", default="0.11:0.79:69", show_default=True,
              help="Grid for --production.")
@click.option("--output", "-o", default=None, help="Output file when one table is requested.")
@click.option("--outdir", default=None, type=click.Path(file_okay=False),
              help="Directory for both tables (entropy_heatmap.csv, entropy_production.csv).")
@format_option
def entropy_cmd(heatmap, resolution, production, grid, output, outdir, form):
    """Entropy plot data: heat map on the simplex and production along entropy3.

    x = (u, (1-u) v, (1-u)(1-v)) with u, v on a uniform grid in [0, 1].
    """
    if not heatmap and not production:
        heatmap = production = True
    tables = []
    if heatmap:
        tables.append(("entropy_heatmap", _heatmap(resolution)))
    if production:
        tables.append(("entropy_production", _production(parse_grid(grid))))
    if len(tables) == 1 and outdir is None:
        emit(render(*tables[0][1], form), output)
        return
    if outdir is None or output is not None:
        raise config_error("two tables need --outdir instead of --output")
    try:
        Path(outdir).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliFailure(f"cannot create {outdir}: {exc}", EXIT_OUTPUT) from None
    ext = "json" if form == "json" else "csv"
    for stem, table in tables:
        emit(render(*table, form), str(Path(outdir) / f"{stem}.{ext}"))


@main.command("gibbs")
@click.option("--beta", "-b", default="-3:3:601", show_default=True,
              help="Inverse-temperature grid.")
@click.option("--params", default=None,
              help='JSON {"U": [...], "V": [...]}; default U=(0,0,1), V=(0,1,1.8).')
@output_option
@format_option
def gibbs_cmd(beta, params, output, form):
    """Gibbs trajectory. Columns: beta, w_*."""
    betas = parse_grid(beta)
    try:
        spec = _gibbs_from_params(load_params(params) or DEFAULT_GIBBS)
    except (ValueError, KeyError, TypeError) as exc:
        raise CliFailure(f"cannot build the Gibbs model: {exc}", EXIT_MODEL) from None
    curve = gibbs_curve(spec)
    rows = []
    for b in betas:
        try:
            rows.append([b, *curve.point(b).weights])
        except OutOfDomain as exc:
            raise config_error(str(exc)) from None
    emit(render(["beta"] + [f"w_{x}" for x in spec.space.labels], rows, form), output)


@main.command("geodesic")
@click.option("--base", required=True,
              help="Base distribution: comma weights, JSON {labels, weights} or a file.")
@click.option("--direction", required=True,
              help="Direction vector (comma list); it is centered at the base.")
@click.option("--labels", default=None, help="Comma-separated cell labels.")
@click.option("--grid", "-g", default="-2:2:41", show_default=True)
@output_option
@format_option
def geodesic_cmd(base, direction, labels, grid, output, form):
    """Exponential geodesic exp(t u - psi(t)) p.

    Columns: t, w_*, psi, kl_check with kl_check = KL(p || q(t)).
    """
    p = load_distribution(base, labels)
    u = parse_vector(direction, "direction")
    if u.size != p.space.d or not np.all(np.isfinite(u)):
        raise config_error("direction must be finite with one entry per cell")
    ts = parse_grid(grid)
    g = ExpGeodesic(p, center(u, p))
    rows = []
    for t in ts:
        q = g.point(t)
        rows.append([t, *q.weights, g.psi(t), kl(p, q)])
    emit(render(["t"] + [f"w_{x}" for x in p.space.labels] + ["psi", "kl_check"], rows, form),
         output)


@main.command("flow")
@click.option("--start", required=True,
              help="Initial distribution: comma weights, JSON {labels, weights} or a file.")
@click.option("--labels", default=None, help="Comma-separated cell labels.")
@click.option("--functional", "functional", type=click.Choice(["entropy", "expectation"]),
              default="entropy", show_default=True)
@click.option("--g", "g_text", default=None, help="Statistic for --functional expectation.")
@click.option("--direction", type=click.Choice(["ascent", "descent"]), default="ascent",
              show_default=True)
@click.option("--step", default=0.5, show_default=True, type=click.FloatRange(min=0, min_open=True))
@click.option("--steps", default=200, show_default=True, type=click.IntRange(min=0))
@output_option
@format_option
def flow_cmd(start, labels, functional, g_text, direction, step, steps, output, form):
    """Natural-gradient flow. Columns: k, t, w_*, G_value, grad_norm."""
    p0 = load_distribution(start, labels)
    if functional == "expectation":
        if g_text is None:
            raise config_error("--functional expectation needs --g")
        g = parse_vector(g_text, "statistic")
        if g.size != p0.space.d:
            raise config_error("--g must have one entry per cell")
        G = expectation_functional(g)
    else:
        G = entropy_functional()
    try:
        traj = natural_gradient_flow(G, p0, step=step, n_steps=steps, direction=direction)
    except SimplexError as exc:
        raise CliFailure(f"flow failed: {exc}", EXIT_NUMERIC) from None
    rows = [[k, t, *p.weights, val, norm]
            for k, ((t, p, norm), val) in enumerate(zip(traj.points, traj.values))]
    header = ["k", "t"] + [f"w_{x}" for x in p0.space.labels] + ["G_value", "grad_norm"]
    emit(render(header, rows, form), output)


@main.command("algebra")
@click.argument("model_file", type=click.Path(dir_okay=False))
@click.option("--labels", default=None,
              help="Comma-separated cell labels (default: inferred from the p variables).")
@output_option
def algebra_cmd(model_file, labels, output):
    """Tangent system and binomial score relations of an implicit model.

    MODEL_FILE holds one polynomial per line in the p variables; blank lines
    and lines starting with # are skipped.
    """
    try:
        lines = Path(model_file).read_text().splitlines()
    except OSError as exc:
        raise CliFailure(f"cannot read {model_file}: {exc}", EXIT_MODEL) from None
    texts = [ln.split("#", 1)[0].strip() for ln in lines]
    texts = [t for t in texts if t]
    if not texts:
        raise CliFailure(f"{model_file} contains no polynomials", EXIT_MODEL)
    try:
        if labels:
            space = SampleSpace(tuple(x.strip() for x in labels.split(",")))
        else:
            cells = set()
            for t in texts:
                cells |= {v.cell for v in parse_polynomial(t).variables() if v.kind == "p"}
            space = SampleSpace(tuple(sorted(cells, key=_label_key)))
        polys = [parse_polynomial(t, space) for t in texts]
        system = model_tangent_system(polys, space)
        relations = []
        for f in polys:
            pair = detect_binomial(f, space)
            if pair is not None:
                relations.append((f, binomial_score_relation(*pair, space)))
    except (SimplexError, ValueError) as exc:
        raise CliFailure(f"cannot process {model_file}: {exc}", EXIT_MODEL) from None
    out = [f"# cells: {', '.join(space.labels)}", "# tangent system"]
    out += [str(f) for f in system]
    out.append("# binomial score relations")
    out += [f"{r} = 0    <- {f}" for f, r in relations] or ["(none)"]
    emit("\n".join(out) + "\n", output)


def _label_key(label: str):
    return (0, int(label), label) if label.isdigit() else (1, 0, label)


@main.command("verify")
@click.option("--only", multiple=True, help=f"Run selected checks: {', '.join(CHECKS)}.")
@click.option("--seed", default=42, show_default=True, type=int)
def verify_cmd(only, seed):
    """Run the acceptance checks; exit 1 if any fails."""
    names = [n.strip() for item in only for n in item.split(",") if n.strip()]
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise config_error(f"unknown checks {unknown}; available: {', '.join(CHECKS)}")
    results = run_checks(names or None, seed=seed)
    for r in results:
        click.echo(r.line())
    failed = [r.name for r in results if not r.passed]
    click.echo(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if failed:
        sys.exit(EXIT_VERIFY)


if __name__ == "__main__":
    main()
