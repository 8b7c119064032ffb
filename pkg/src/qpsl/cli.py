"""Command-line front end.

Usage:
    qpsl spectrum --potential mathieu:1 --t-pi-frac 1/2 --k 5 --method both
    qpsl discriminant --potential zero --lambda 9.8696
    qpsl rayleigh --potential two-mode:0.5,0.25 --t 0.3
    qpsl verify-asymptotics --potential shifted:3,mathieu:1 --t 0.3
    qpsl check-ambarzumyan --potential zero --t 2.0 --variant minus --n-max 8
    qpsl bands --potential mathieu:1 --t-count 33 --k 5

Exit status: 0 success, 2 invalid input, 3 numerical failure.  A failed
Ambarzumyan check is a result, not an error, and exits 0.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from pathlib import Path

import click

from . import analysis, floquet, galerkin
from .errors import SpectralError
from .galerkin import DiscretizationConfig, PhaseParameter, Spectrum
from .potential import Potential, load_potential, parse_builtin

EXIT_USAGE = 2
EXIT_NUMERIC = 3


# -- serialisation ---------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


def dumps(obj) -> str:
    """JSON text with floats at 17 significant digits and insertion-ordered keys."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else _fmt_float(v) if isinstance(v, float) else v
                    for v in row])
    return buf.getvalue()


def spectrum_json(s: Spectrum) -> dict:
    return {"values": list(s.values), "method": s.method.value, "t": s.t.t,
            "labels": None if s.labels is None else list(s.labels)}


def report_json(r: analysis.AmbarzumyanReport) -> dict:
    return {
        "t": r.t.t,
        "variant": r.variant.value,
        "first_eigenvalue_ok": r.first_eigenvalue_ok,
        "margin": r.margin,
        "containment_ok": r.containment_ok,
        "containment_evidence": [e._asdict() for e in r.containment_evidence],
        "q0_estimate": r.q0_estimate,
        "verdict": r.verdict.value,
        "tol": r.tol,
        "note": r.note,
    }


# -- option handling ---------------------------------------------------------------------

def resolve_potential(spec: str) -> Potential:
    path = Path(spec)
    try:
        if spec.endswith(".json") or path.is_file():
            return load_potential(path)
        return parse_builtin(spec)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise click.BadParameter(str(exc), param_hint="--potential") from None


def resolve_phase(t: float | None, t_pi_frac: str | None) -> PhaseParameter:
    if t is not None and t_pi_frac is not None:
        raise click.UsageError("give either --t or --t-pi-frac, not both")
    if t_pi_frac is not None:
        try:
            frac = Fraction(t_pi_frac)
        except (ValueError, ZeroDivisionError):
            raise click.BadParameter(f"not a fraction: {t_pi_frac!r}",
                                     param_hint="--t-pi-frac") from None
        return PhaseParameter.from_pi_fraction(frac.numerator, frac.denominator)
    if t is None:
        raise click.UsageError("one of --t or --t-pi-frac is required")
    if not math.isfinite(t):
        raise click.BadParameter("t must be finite", param_hint="--t")
    return PhaseParameter(t)


def _positive(ctx, param, value):
    if value is not None and value <= 0:
        raise click.BadParameter("must be positive")
    return value


potential_option = click.option("--potential", "potential", required=True,
                                help="Builtin spec (zero, mathieu:a, two-mode:a,b, "
                                     "shifted:c,<spec>) or a JSON file.")
t_options = [
    click.option("--t", "t", type=float, default=None, help="Phase t in radians."),
    click.option("--t-pi-frac", "t_pi_frac", default=None, help="Phase as a fraction a/b of pi."),
]
output_options = [
    click.option("--output", type=click.Choice(["json", "csv"]), default="json", show_default=True),
    click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
                 help="Write here instead of standard output."),
]
solver_options = [
    click.option("--N", "N", type=int, default=64, show_default=True, callback=_positive),
    click.option("--ode-tol", type=float, default=floquet.DEFAULT_ODE_TOL, show_default=True,
                 callback=_positive),
]


def apply(options):
    def deco(f):
        for opt in reversed(options):
            f = opt(f)
        return f
    return deco


def emit(ctx: click.Context, text: str) -> None:
    out_path = ctx.obj.get("out_path") if ctx.obj else None
    if not text.endswith("\n"):
        text += "\n"
    if out_path:
        Path(out_path).write_text(text)
    else:
        click.echo(text, nl=False)


def _spectrum(p, t, method, N, k, ode_tol) -> Spectrum:
    if method == "galerkin":
        return galerkin.spectrum_galerkin(p, t, DiscretizationConfig(N), k=k)
    return floquet.spectrum_shooting(p, t, k, ode_tol)


def _methods(method: str) -> list[str]:
    return ["galerkin", "shooting"] if method == "both" else [method]


def _claimed_tol(value: float, ode_tol: float, cfg: DiscretizationConfig) -> float:
    """Accuracy the two solvers claim at ``value``; agreement is never reported below it."""
    return max(floquet.ROOT_TOL, ode_tol, cfg.eig_tol) * (1.0 + abs(value))


# -- commands ----------------------------------------------------------------------------

class Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except SpectralError as exc:
            err = {"error": type(exc).__name__, "message": str(exc)}
            as_json = ctx.obj is None or ctx.obj.get("output", "json") == "json"
            click.echo(dumps(err) if as_json else f"{err['error']}: {err['message']}", err=True)
            ctx.exit(EXIT_NUMERIC)


@click.group(cls=Group)
@click.pass_context
def cli(ctx):
    """Spectra of -y'' + q y with quasi-periodic boundary conditions."""
    ctx.ensure_object(dict)


def _remember(ctx, output, out_path):
    ctx.obj["output"] = output
    ctx.obj["out_path"] = out_path


@cli.command()
@potential_option
@apply(t_options)
@click.option("--method", type=click.Choice(["galerkin", "shooting", "both"]), default="galerkin",
              show_default=True)
@click.option("--k", "k", type=int, default=20, show_default=True, callback=_positive)
@apply(solver_options)
@apply(output_options)
@click.pass_context
def spectrum(ctx, potential, t, t_pi_frac, method, k, N, ode_tol, output, out_path):
    """Lowest k eigenvalues of L_t(q)."""
    _remember(ctx, output, out_path)
    p = resolve_potential(potential)
    phase = resolve_phase(t, t_pi_frac)
    if method != "shooting" and k > 2 * N + 1:
        raise click.BadParameter(f"k={k} exceeds 2N+1={2 * N + 1}", param_hint="--k")
    spectra = {m: _spectrum(p, phase, m, N, k, ode_tol) for m in _methods(method)}
    cfg = DiscretizationConfig(N)
    agreement = None
    if method == "both":
        g, s = spectra["galerkin"].values, spectra["shooting"].values
        agreement = [max(abs(a - b), _claimed_tol(a, ode_tol, cfg)) for a, b in zip(g, s)]
    if output == "json":
        payload = {"command": "spectrum", "potential": p.name}
        if method == "both":
            payload["spectra"] = {m: spectrum_json(s) for m, s in spectra.items()}
            payload["agreement"] = agreement
        else:
            payload["spectrum"] = spectrum_json(spectra[method])
        emit(ctx, dumps(payload))
        return
    header = ["index", "label", "value", "method", "residual"]
    if agreement is not None:
        header.append("agreement")
    rows = []
    for i in range(k):
        for m, s in spectra.items():
            row = [i, s.labels[i], s.values[i], m, None]
            if agreement is not None:
                row.append(agreement[i])
            rows.append(row)
    emit(ctx, _csv_text(header, rows))


@cli.command()
@potential_option
@click.option("--lambda", "lambdas", type=float, multiple=True, required=True,
              help="Spectral parameter; repeat for several values.")
@click.option("--ode-tol", type=float, default=floquet.DEFAULT_ODE_TOL, show_default=True,
              callback=_positive)
@apply(output_options)
@click.pass_context
def discriminant(ctx, potential, lambdas, ode_tol, output, out_path):
    """Transfer matrix and Floquet discriminant D(lambda)."""
    _remember(ctx, output, out_path)
    p = resolve_potential(potential)
    rows = []
    for lam in lambdas:
        tm = floquet.integrate_fundamental(p, lam, ode_tol)
        rows.append({"lambda": lam, "c1": tm.c1, "s1": tm.s1, "dc1": tm.dc1, "ds1": tm.ds1,
                     "wronskian": tm.wronskian, "discriminant": tm.trace})
    if output == "json":
        emit(ctx, dumps({"command": "discriminant", "potential": p.name, "rows": rows}))
    else:
        emit(ctx, _csv_text(list(rows[0]), [list(r.values()) for r in rows]))


@cli.command()
@potential_option
@apply(t_options)
@click.option("--which", type=click.Choice(["plus", "minus", "both"]), default="both",
              show_default=True)
@apply(output_options)
@click.pass_context
def rayleigh(ctx, potential, t, t_pi_frac, which, output, out_path):
    """Rayleigh quotient of the plane waves e^{itx} and e^{i(t-2pi)x}."""
    _remember(ctx, output, out_path)
    p = resolve_potential(potential)
    phase = resolve_phase(t, t_pi_frac)
    waves = list(analysis.Wave) if which == "both" else [analysis.Wave(which)]
    rows = []
    for w in waves:
        kappa = phase.t if w is analysis.Wave.PLUS else phase.t - 2 * math.pi
        rows.append({"which": w.value, "value": analysis.rayleigh_quotient(p, phase, w),
                     "closed_form": kappa ** 2 + p.mean()})
    if output == "json":
        emit(ctx, dumps({"command": "rayleigh", "potential": p.name, "t": phase.t, "rows": rows}))
    else:
        emit(ctx, _csv_text(list(rows[0]), [list(r.values()) for r in rows]))


@cli.command("verify-asymptotics")
@potential_option
@apply(t_options)
@click.option("--method", type=click.Choice(["galerkin", "shooting", "both"]), default="galerkin",
              show_default=True)
@click.option("--k", "k", type=int, default=25, show_default=True, callback=_positive)
@apply(solver_options)
@apply(output_options)
@click.pass_context
def verify_asymptotics(ctx, potential, t, t_pi_frac, method, k, N, ode_tol, output, out_path):
    """Estimate q_0 from large-|n| eigenvalues and report the residual decay."""
    _remember(ctx, output, out_path)
    p = resolve_potential(potential)
    phase = resolve_phase(t, t_pi_frac)
    results = []
    for m in _methods(method):
        s = _spectrum(p, phase, m, N, k, ode_tol)
        est = analysis.estimate_q0(s)
        decay = analysis.asymptotic_residuals_decay(s)
        results.append((m, s, est, decay))
    if output == "json":
        payload = {"command": "verify-asymptotics", "potential": p.name, "mean": p.mean(),
                   "analyses": []}
        for m, s, est, decay in results:
            payload["analyses"].append({
                "spectrum": spectrum_json(s),
                "q0_estimate": est.q0,
                "window": list(est.window),
                "residuals": [{"n": n, "r": r} for n, r in est.residuals.items()],
                "decay": {"n_max": decay.n_max, "c_hat": decay.c_hat, "floor": decay.floor,
                          "decay_ok": decay.decay_ok,
                          "envelope": [{"n": n, "r": r} for n, r in decay.envelope.items()]},
            })
        emit(ctx, dumps(payload))
        return
    rows = []
    for m, s, est, _ in results:
        for i, (n, v) in enumerate(zip(s.labels, s.values)):
            rows.append([i, n, v, m, est.residuals[n]])
    emit(ctx, _csv_text(["index", "label", "value", "method", "residual"], rows))


@cli.command("check-ambarzumyan")
@potential_option
@apply(t_options)
@click.option("--variant", type=click.Choice([v.value for v in analysis.Variant]),
              default="minus", show_default=True)
@click.option("--n-max", "n_max", type=int, default=analysis.DEFAULT_N_MAX, show_default=True,
              callback=_positive)
@click.option("--tol", type=float, default=analysis.DEFAULT_TOL, show_default=True,
              callback=_positive)
@click.option("--method", type=click.Choice(["galerkin", "shooting"]), default="galerkin",
              show_default=True)
@click.option("--k", "k", type=int, default=None, callback=_positive,
              help="Eigenvalues to compute [default: max(20, 2*n_max + 4)].")
@apply(solver_options)
@apply(output_options)
@click.pass_context
def check_ambarzumyan(ctx, potential, t, t_pi_frac, variant, n_max, tol, method, k, N, ode_tol,
                      output, out_path):
    """Test the first-eigenvalue and containment hypotheses on one spectrum."""
    _remember(ctx, output, out_path)
    p = resolve_potential(potential)
    phase = resolve_phase(t, t_pi_frac)
    k = k or max(20, 2 * n_max + 4)
    if method == "galerkin" and k > 2 * N + 1:
        raise click.BadParameter(f"k={k} exceeds 2N+1={2 * N + 1}", param_hint="--k")
    s = _spectrum(p, phase, method, N, k, ode_tol)
    r = analysis.check_ambarzumyan(s, analysis.Variant(variant), n_max, tol)
    if output == "json":
        emit(ctx, dumps({"command": "check-ambarzumyan", "potential": p.name,
                         "report": report_json(r), "failing_n": r.failing_n,
                         "cos_moment": analysis.cos_moment(p)}))
        return
    rows = [[e.n, e.target, e.nearest_computed, e.gap, e.n not in r.failing_n, r.verdict.value]
            for e in r.containment_evidence]
    emit(ctx, _csv_text(["n", "target", "nearest_computed", "gap", "contained", "verdict"], rows))


@cli.command()
@potential_option
@click.option("--t-count", "t_count", type=int, default=33, show_default=True)
@click.option("--k", "k", type=int, default=5, show_default=True, callback=_positive)
@click.option("--N", "N", type=int, default=64, show_default=True, callback=_positive)
@click.option("--workers", type=int, default=1, show_default=True, callback=_positive)
@apply(output_options)
@click.pass_context
def bands(ctx, potential, t_count, k, N, workers, output, out_path):
    """Band traces over t_j = 2 pi j / t_count and the gaps between them."""
    _remember(ctx, output, out_path)
    if t_count < 3:
        raise click.BadParameter("must be >= 3", param_hint="--t-count")
    if k > 2 * N + 1:
        raise click.BadParameter(f"k={k} exceeds 2N+1={2 * N + 1}", param_hint="--k")
    p = resolve_potential(potential)
    b = analysis.band_structure(p, t_count, k, DiscretizationConfig(N), workers=workers)
    if output == "json":
        emit(ctx, dumps({"t_grid": list(b.t_grid),
                         "bands": [{"m": m, "values": list(v)} for m, v in enumerate(b.bands)],
                         "gaps": [{"lo": lo, "hi": hi} for lo, hi in b.gaps]}))
        return
    rows = [[t, m, b.bands[m][j]] for j, t in enumerate(b.t_grid) for m in range(k)]
    emit(ctx, _csv_text(["t", "m", "value"], rows))


def main(argv=None):
    cli.main(args=argv, prog_name="qpsl")


if __name__ == "__main__":
    main()
