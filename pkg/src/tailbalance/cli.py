"""Command-line front end.

Every subcommand prints a reproducibility header (artifact version plus
the fully resolved command spec), then plot-ready rows in CSV or JSON.
Exit codes: 0 success, 1 for usage and validation problems (the message
names the offending field), 2 when a solver reports a mathematical
degeneracy or a verification fails.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass

import click
import numpy as np

from . import __version__
from .alpha import Affine, AlphaSpec, LinearAbility, SolvedCdf, Tabulated
from .errors import DomainError, SolverError
from .jury import (
    JuryConfig,
    condorcet_curve,
    exact_verdict_probability,
    monte_carlo_verdict,
    order_scan,
)
from .signals import Prior, StateOfNature, posterior_from_signal, sample_signal
from .solvers import (
    alt_decomposition_solver,
    closed_form_linear,
    closed_form_linear_odds,
    residual_check,
    solve_balanced,
    solve_odds,
)

_H_KEYWORDS = ("odds", "balanced", "closed-form", "decomposition")


@dataclass(frozen=True)
class CommandSpec:
    """The fully resolved parameters of one CLI run.

    Serialized (sorted keys, no timestamps) into the output header so
    any emitted file states exactly how to regenerate itself.
    """

    subcommand: str
    output_format: str
    params: dict

    def echo(self) -> str:
        doc = {
            "format": self.output_format,
            "params": self.params,
            "subcommand": self.subcommand,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _fmt17(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _emit(spec: CommandSpec, columns, rows, comments=(), extra_metadata=None) -> None:
    if spec.output_format == "csv":
        click.echo(f"# tailbalance {__version__} {spec.echo()}")
        click.echo(",".join(columns))
        for row in rows:
            click.echo(",".join(_fmt17(v) for v in row))
        for comment in comments:
            click.echo(f"# {comment}")
    else:
        metadata = {"version": __version__, "spec": json.loads(spec.echo())}
        if extra_metadata:
            metadata.update(extra_metadata)
        doc = {"metadata": metadata, "columns": list(columns), "rows": list(rows)}
        click.echo(json.dumps(doc, sort_keys=True, indent=2))


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise click.UsageError(f"cannot read --config {path!r}: {exc}")
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"--config {path!r} is not valid JSON: {exc}")
    if not isinstance(obj, dict):
        raise click.UsageError(f"--config {path!r} must hold a JSON object")
    return obj


def _pick(flag_value, cfg: dict, key: str, default=None):
    if flag_value is not None:
        return flag_value
    if key in cfg:
        return cfg[key]
    return default


def _resolve_alpha(cfg, kind, theta, ability, intercept, slope):
    """Build (AlphaSpec, Prior, linear ability or None) from flags + config."""
    kind = _pick(kind, cfg, "kind", "linear")
    theta_val = _pick(theta, cfg, "theta")
    if kind == "linear":
        a = _pick(ability, cfg, "a")
        if a is None:
            raise click.UsageError("linear alpha needs --a (or 'a' in --config)")
        theta_val = 0.5 if theta_val is None else float(theta_val)
        return LinearAbility(theta_val, float(a)), Prior(theta_val), float(a)
    if kind == "affine":
        b = _pick(intercept, cfg, "intercept")
        s = _pick(slope, cfg, "slope")
        if b is None or s is None:
            raise click.UsageError(
                "affine alpha needs --intercept and --slope (or config keys)"
            )
        spec = Affine(float(b), float(s))
        theta_val = spec.intercept - spec.slope if theta_val is None else float(theta_val)
        return spec, Prior(theta_val), None
    if kind == "table":
        points = cfg.get("points")
        if points is None:
            raise click.UsageError("table alpha needs 'points' in --config")
        spec = Tabulated(tuple(tuple(p) for p in points))
        theta_val = float(spec(-1.0)) if theta_val is None else float(theta_val)
        return spec, Prior(theta_val), None
    raise click.UsageError(f"unknown alpha kind: {kind!r}")


def _read_h_table(path: str) -> SolvedCdf:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise click.UsageError(f"cannot read --h table {path!r}: {exc}")
    points = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        try:
            points.append((float(parts[0]), float(parts[1])))
        except (ValueError, IndexError):
            if points:
                raise click.UsageError(f"malformed row in --h table {path!r}: {line!r}")
            continue
    if len(points) < 2:
        raise click.UsageError(f"--h table {path!r} contains no data rows")
    return SolvedCdf.from_table(points)


def _resolve_h(h_source, alpha: AlphaSpec, prior: Prior, linear_a,
               allow_uniform: bool):
    if h_source == "odds":
        return solve_odds(alpha, prior, allow_uniform_limit=allow_uniform)
    if h_source == "balanced":
        return solve_balanced(alpha, allow_uniform_limit=allow_uniform)
    if h_source == "closed-form":
        if linear_a is None:
            raise click.UsageError("--h closed-form needs a linear alpha (--a)")
        if prior.theta == 0.5:
            return closed_form_linear(linear_a)
        return closed_form_linear_odds(linear_a, prior,
                                       allow_uniform_limit=allow_uniform)
    if h_source == "decomposition":
        if linear_a is None:
            raise click.UsageError("--h decomposition needs a linear alpha (--a)")
        if prior.theta != 0.5:
            raise click.UsageError("--h decomposition is defined for --theta 0.5 only")
        return alt_decomposition_solver(linear_a)
    return _read_h_table(h_source)


def _ordering_str(abilities) -> str:
    return ";".join(format(float(a), ".17g") for a in abilities)


def _resolve_jury(cfg, abilities, theta, tie_break, trials, seed) -> JuryConfig:
    merged = {k: v for k, v in cfg.items()
              if k in ("abilities", "theta", "tie_break", "trials", "seed")}
    if abilities is not None:
        try:
            merged["abilities"] = [float(x) for x in abilities.split(",") if x.strip()]
        except ValueError:
            raise click.UsageError(
                f"--abilities must be comma-separated numbers, got {abilities!r}"
            )
    if theta is not None:
        merged["theta"] = theta
    if tie_break is not None:
        merged["tie_break"] = tie_break
    if trials is not None:
        merged["trials"] = trials
    if seed is not None:
        merged["seed"] = seed
    if "abilities" not in merged:
        raise click.UsageError(
            "missing required parameter: --abilities (or 'abilities' in --config)"
        )
    return JuryConfig.from_json(merged)


_alpha_options = [
    click.option("--config", "config_path", type=str, default=None,
                 help="JSON file carrying alpha/jury parameters; flags override it."),
    click.option("--alpha", "alpha_kind",
                 type=click.Choice(["linear", "affine", "table"]), default=None,
                 help="Shape of the target function (default linear)."),
    click.option("--theta", type=float, default=None,
                 help="Prior probability of state A."),
    click.option("--a", "ability", type=float, default=None,
                 help="Ability for the linear alpha family."),
    click.option("--intercept", type=float, default=None,
                 help="Intercept of an affine alpha."),
    click.option("--slope", type=float, default=None,
                 help="Slope of an affine alpha."),
]

_jury_options = [
    click.option("--config", "config_path", type=str, default=None,
                 help="JSON file carrying jury parameters; flags override it."),
    click.option("--abilities", type=str, default=None,
                 help="Comma-separated abilities in voting order."),
    click.option("--theta", type=float, default=None,
                 help="Prior probability of state A."),
    click.option("--tie-break", "tie_break",
                 type=click.Choice(["follow_signal", "vote_a", "vote_b"]),
                 default=None, help="Rule at posterior exactly 1/2."),
]

_format_option = click.option("--format", "output_format",
                              type=click.Choice(["csv", "json"]), default="csv",
                              show_default=True, help="Output format.")


def _apply(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


@click.group()
@click.version_option(version=__version__, prog_name="tailbalance")
def cli():
    """Tail-balance solvers, signal sampling, and jury simulation."""


@cli.command()
@_apply(_alpha_options)
@click.option("--h", "h_source", type=click.Choice(_H_KEYWORDS), default="odds",
              show_default=True, help="Which solver produces H.")
@click.option("--grid", type=int, default=201, show_default=True,
              help="Number of output points on [-1, +1].")
@click.option("--allow-uniform-limit", is_flag=True, default=False,
              help="Accept the uniform-CDF limit for degenerate (constant) alpha.")
@_format_option
def solve(config_path, alpha_kind, theta, ability, intercept, slope, h_source,
          grid, allow_uniform_limit, output_format):
    """Solve for the CDF induced by an alpha spec; emit (t, H) rows."""
    cfg = _load_config(config_path)
    alpha, prior, linear_a = _resolve_alpha(cfg, alpha_kind, theta, ability,
                                            intercept, slope)
    if grid < 2:
        raise click.UsageError(f"--grid must be at least 2, got {grid}")
    h = _resolve_h(h_source, alpha, prior, linear_a, allow_uniform_limit)
    spec = CommandSpec("solve", output_format, {
        "alpha": alpha.to_json(),
        "theta": prior.theta,
        "h": h_source,
        "grid": grid,
        "allow_uniform_limit": bool(allow_uniform_limit),
    })
    ts = np.linspace(-1.0, 1.0, grid)
    hs = np.asarray(h(ts), dtype=float)
    rows = [[float(t), float(v)] for t, v in zip(ts, hs)]
    _emit(spec, ["t", "H"], rows)


@cli.command()
@_apply(_alpha_options)
@click.option("--h", "h_source", type=str, default="odds", show_default=True,
              help="Solver keyword (odds, balanced, closed-form, decomposition) "
                   "or a path to a CSV of t,H rows.")
@click.option("--grid", type=int, default=1001, show_default=True,
              help="Check-grid size (odd, >= 3).")
@click.option("--tol", type=float, default=1e-10, show_default=True,
              help="Verification fails (exit 2) if the max residual exceeds this.")
@click.option("--allow-uniform-limit", is_flag=True, default=False,
              help="Accept the uniform-CDF limit for degenerate (constant) alpha.")
@_format_option
def verify(config_path, alpha_kind, theta, ability, intercept, slope, h_source,
           grid, tol, allow_uniform_limit, output_format):
    """Check a candidate H against the tail-balance equation for alpha."""
    cfg = _load_config(config_path)
    alpha, prior, linear_a = _resolve_alpha(cfg, alpha_kind, theta, ability,
                                            intercept, slope)
    h = _resolve_h(h_source, alpha, prior, linear_a, allow_uniform_limit)
    report = residual_check(h, alpha, prior, grid)
    spec = CommandSpec("verify", output_format, {
        "alpha": alpha.to_json(),
        "theta": prior.theta,
        "h": h_source,
        "grid": grid,
        "tol": tol,
    })
    rows = [[float(t), float(hv), float(av), float(rv)]
            for t, hv, av, rv in zip(report.t, report.h, report.alpha,
                                     report.residual)]
    summary = (f"max_residual {_fmt17(report.max_residual)} "
               f"at t={_fmt17(report.argmax_t)}")
    _emit(spec, ["t", "H", "alpha", "residual"], rows, comments=[summary],
          extra_metadata={"max_residual": report.max_residual,
                          "argmax_t": report.argmax_t})
    if not report.max_residual <= tol:
        click.echo(
            f"verification failed: max residual {_fmt17(report.max_residual)} "
            f"exceeds --tol {_fmt17(tol)}",
            err=True,
        )
        sys.exit(2)


@cli.command()
@click.option("--config", "config_path", type=str, default=None,
              help="JSON file; flags override it.")
@click.option("--a", "ability", type=float, default=None,
              help="Ability of the signal distribution.")
@click.option("--state", type=click.Choice(["A", "B"]), default="A",
              show_default=True, help="Conditioning state of nature.")
@click.option("--n", "count", type=int, default=100, show_default=True,
              help="Number of draws.")
@click.option("--seed", type=int, default=None, help="RNG seed (default 0).")
@_format_option
def sample(config_path, ability, state, count, seed, output_format):
    """Draw signals by inverse transform; emit (i, signal) rows."""
    cfg = _load_config(config_path)
    a = _pick(ability, cfg, "a")
    if a is None:
        raise click.UsageError("missing required parameter: --a (or 'a' in --config)")
    seed_val = int(_pick(seed, cfg, "seed", 0))
    draws = sample_signal(float(a), StateOfNature[state], count, seed_val)
    spec = CommandSpec("sample", output_format, {
        "a": float(a), "state": state, "n": int(count), "seed": seed_val,
    })
    rows = [[i, float(s)] for i, s in enumerate(draws)]
    _emit(spec, ["i", "signal"], rows)


@cli.command()
@click.option("--config", "config_path", type=str, default=None,
              help="JSON file; flags override it.")
@click.option("--a", "ability", type=float, default=None,
              help="Ability of the signal distribution.")
@click.option("--theta", type=float, default=None,
              help="Prior probability of state A (default 0.5).")
@click.option("--s", "signal", type=float, default=None,
              help="Evaluate at one signal instead of a grid.")
@click.option("--grid", type=int, default=201, show_default=True,
              help="Grid size over [-1, +1] when --s is omitted.")
@_format_option
def posterior(config_path, ability, theta, signal, grid, output_format):
    """Posterior probability of state A after observing a signal."""
    cfg = _load_config(config_path)
    a = _pick(ability, cfg, "a")
    if a is None:
        raise click.UsageError("missing required parameter: --a (or 'a' in --config)")
    theta_val = float(_pick(theta, cfg, "theta", 0.5))
    prior = Prior(theta_val)
    if signal is not None:
        ts = np.asarray([float(signal)])
    else:
        if grid < 2:
            raise click.UsageError(f"--grid must be at least 2, got {grid}")
        ts = np.linspace(-1.0, 1.0, grid)
    ps = np.asarray(posterior_from_signal(float(a), ts, prior), dtype=float)
    spec = CommandSpec("posterior", output_format, {
        "a": float(a), "theta": theta_val,
        "s": None if signal is None else float(signal),
        "grid": int(grid),
    })
    rows = [[float(t), float(p)] for t, p in zip(ts, ps)]
    _emit(spec, ["t", "posterior"], rows)


@cli.command()
@_apply(_jury_options)
@click.option("--trials", type=int, default=None, help="Monte Carlo trials.")
@click.option("--seed", type=int, default=None, help="RNG seed.")
@click.option("--conditional", is_flag=True, default=False,
              help="Stratify trials by state for lower variance.")
@_format_option
def simulate(config_path, abilities, theta, tie_break, trials, seed,
             conditional, output_format):
    """Monte Carlo estimate of the majority verdict's accuracy."""
    cfg = _load_config(config_path)
    config = _resolve_jury(cfg, abilities, theta, tie_break, trials, seed)
    stats = monte_carlo_verdict(config, conditional=conditional)
    spec = CommandSpec("simulate", output_format, {
        **config.to_json(), "conditional": bool(conditional),
    })
    rows = [[_ordering_str(config.abilities), float(stats.p_correct),
             stats.method.value, float(stats.stderr)]]
    _emit(spec, ["ordering", "p_correct", "method", "stderr"], rows)


@cli.command()
@_apply(_jury_options)
@_format_option
def exact(config_path, abilities, theta, tie_break, output_format):
    """Exact majority-verdict accuracy by history enumeration."""
    cfg = _load_config(config_path)
    config = _resolve_jury(cfg, abilities, theta, tie_break, None, None)
    stats = exact_verdict_probability(config)
    spec = CommandSpec("exact", output_format, {
        "abilities": list(config.abilities),
        "theta": config.prior.theta,
        "tie_break": config.tie_break.value,
    })
    rows = [[_ordering_str(config.abilities), float(stats.p_correct),
             stats.method.value, float(stats.stderr)]]
    _emit(spec, ["ordering", "p_correct", "method", "stderr"], rows)


@cli.command("order-scan")
@_apply(_jury_options)
@_format_option
def order_scan_command(config_path, abilities, theta, tie_break, output_format):
    """Exact accuracy of every voting order, best first."""
    cfg = _load_config(config_path)
    config = _resolve_jury(cfg, abilities, theta, tie_break, None, None)
    rows_out = order_scan(config.abilities, config.prior, config.tie_break)
    spec = CommandSpec("order-scan", output_format, {
        "abilities": list(config.abilities),
        "theta": config.prior.theta,
        "tie_break": config.tie_break.value,
    })
    rows = [[_ordering_str(row.ordering), float(row.p_correct), "exact", 0.0]
            for row in rows_out]
    _emit(spec, ["ordering", "p_correct", "method", "stderr"], rows)


@cli.command()
@click.option("--config", "config_path", type=str, default=None,
              help="JSON file; flags override it.")
@click.option("--p", "p_value", type=float, default=None,
              help="Per-juror correctness probability, in (1/2, 1].")
@click.option("--n-max", "n_max", type=int, default=None,
              help="Largest (odd) jury size (default 101).")
@_format_option
def condorcet(config_path, p_value, n_max, output_format):
    """Majority accuracy of the binary baseline for odd jury sizes."""
    cfg = _load_config(config_path)
    p = _pick(p_value, cfg, "p")
    if p is None:
        raise click.UsageError("missing required parameter: --p (or 'p' in --config)")
    n_top = int(_pick(n_max, cfg, "n_max", 101))
    curve = condorcet_curve(float(p), n_top)
    spec = CommandSpec("condorcet", output_format, {
        "p": float(p), "n_max": n_top,
    })
    rows = [[int(n), float(v)] for n, v in curve]
    _emit(spec, ["n", "p_correct"], rows)


def main(argv=None):
    """Console entry point mapping errors to the documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except DomainError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except SolverError as exc:
        click.echo(str(exc), err=True)
        sys.exit(2)
