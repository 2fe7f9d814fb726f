"""Command-line front end.

Subcommands: find-degenerate, prepare, lifetime, rate, beats, counts,
discriminate.  Global flags (before the subcommand): --format {csv,json},
--output PATH, --seed UINT64.

Output policy: the human-readable summary always goes to stdout; when
--output PATH is given the machine-readable rendering (CSV or JSON) is
written there as well; --output - replaces the summary with the machine
rendering on stdout.  CSV uses ',' delimiters, '.' decimals and scientific
notation with 17 significant digits; metadata travels in leading '#' lines.

Exit codes: 0 success, 2 user/input error, 3 internal invariant violation.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import bundled_levels_path
from .constants import HBAR_EV_S
from .counting import (
    CountSample,
    Hypothesis,
    MixtureVariant,
    decompose_superposition_pmf,
    default_support,
    discriminate,
    mixture_pmf,
    sample_counts,
)
from .dynamics import (
    BeatModel,
    Branch,
    DecayChannel,
    averaged_rate,
    beat_signal,
    instantaneous_rate,
    lifetime,
)
from .exceptions import LevelTableError, OrthoparaError
from .spectra import ParserConfig, broadening_from_lifetime, find_degenerate_pairs, parse_level_table
from .states import SpinState, SuperpositionState, amplitudes_from_weights, prepare_superposition

# Metastable 1s2s decay rates (s^-1) from the 19.7 ms para and ~1e8 s ortho
# lifetimes; defaults for lifetime/rate/beats.
GAMMA_OR_METASTABLE = 1e-8
TAU_OR_METASTABLE = 1e8
TAU_PA_METASTABLE = 0.0197
GAMMA_PA_METASTABLE = 1.0 / TAU_PA_METASTABLE
# The physical beat frequency (~1.2e15 rad/s) is unresolvable on any grid a
# millisecond-scale decay needs, so demos default to a scaled-down omega.
OMEGA_DEMO = 500.0
# Desk-scale counting defaults: rates distinct enough to discriminate, tame
# enough to histogram.
DESK_GAMMA_OR = 2.0
DESK_GAMMA_PA = 10.0
DESK_WINDOW = 1.0
DEFAULT_SEED = 42


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.16e}"
    return str(x)


def _render_csv(rows: list[dict], meta: dict) -> str:
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}={_fmt(value)}\n")
    if rows:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(rows[0].keys())
        for row in rows:
            writer.writerow(_fmt(v) for v in row.values())
    return buf.getvalue()


def _render_json(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _emit(ctx, human_lines: list[str], rows: list[dict], meta: dict, doc: dict) -> None:
    fmt = ctx.obj["format"]
    output = ctx.obj["output"]
    machine = _render_json(doc) if fmt == "json" else _render_csv(rows, meta)
    if output == "-":
        click.echo(machine, nl=False)
        return
    click.echo("\n".join(human_lines))
    if output is not None:
        Path(output).write_text(machine)


def _library_errors_as_usage(f):
    """Bad user parameters surface as usage errors (exit 2), not tracebacks."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except OrthoparaError as exc:
            raise click.UsageError(str(exc)) from exc

    return wrapper


class ComplexParam(click.ParamType):
    name = "complex"

    def convert(self, value, param, ctx):
        if isinstance(value, complex):
            return value
        try:
            return complex(str(value).replace(" ", ""))
        except ValueError:
            self.fail(f"{value!r} is not a complex number (try '0.5-0.5j')", param, ctx)


COMPLEX = ComplexParam()


@click.group()
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True, help="Machine output format.")
@click.option("--output", type=str, default=None,
              help="Write machine output to PATH ('-' for stdout).")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None,
              help="RNG seed for sampling subcommands.")
@click.pass_context
def cli(ctx, fmt, output, seed):
    """Ortho/para-helium superposition toolkit."""
    ctx.obj = {"format": fmt, "output": output, "seed": seed}


def _state_from_weights(w_or: float, phase: float) -> SuperpositionState:
    return amplitudes_from_weights(w_or, phase)


def _beat_model(w_or, phase, gamma_or, gamma_pa, e_or, e_pa, omega) -> BeatModel:
    if omega is not None and (e_or is not None or e_pa is not None):
        raise click.UsageError("give either --omega or --e-or/--e-pa, not both")
    if e_or is None and e_pa is None:
        omega = OMEGA_DEMO if omega is None else omega
        e_or, e_pa = 0.0, omega * HBAR_EV_S
    elif e_or is None or e_pa is None:
        raise click.UsageError("--e-or and --e-pa must be given together")
    state = _state_from_weights(w_or, phase)
    ortho = DecayChannel(label=Branch.ORTHO, energy=e_or, gamma=gamma_or)
    para = DecayChannel(label=Branch.PARA, energy=e_pa, gamma=gamma_pa)
    return BeatModel.from_channels(state, ortho, para)


def _model_options(command):
    for option in reversed([
        click.option("--w-or", type=float, default=0.5, show_default=True,
                     help="Ortho weight |alpha|^2."),
        click.option("--phase", type=float, default=0.0, show_default=True,
                     help="Relative phase of beta, radians."),
        click.option("--gamma-or", type=float, default=GAMMA_OR_METASTABLE,
                     show_default=True, help="Ortho decay rate, 1/s."),
        click.option("--gamma-pa", type=float, default=GAMMA_PA_METASTABLE,
                     show_default=True, help="Para decay rate, 1/s."),
        click.option("--e-or", type=float, default=None, help="Ortho level energy, eV."),
        click.option("--e-pa", type=float, default=None, help="Para level energy, eV."),
        click.option("--omega", type=float, default=None,
                     help=f"Beat angular frequency, rad/s  [default: {OMEGA_DEMO}]."),
    ]):
        command = option(command)
    return command


@cli.command("find-degenerate")
@click.argument("level_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--broadening", type=float, default=None, help="Energy broadening delta_E, eV.")
@click.option("--lifetime", "tau", type=float, default=None,
              help="Mean lifetime, s; broadening becomes hbar/tau.")
@click.option("--same-configuration", is_flag=True, default=False,
              help="Only pair levels sharing a configuration label.")
@click.pass_context
@_library_errors_as_usage
def cmd_find_degenerate(ctx, level_file, broadening, tau, same_configuration):
    """Find almost-degenerate ortho/para pairs in a level table."""
    if (broadening is None) == (tau is None):
        raise click.UsageError("give exactly one of --broadening or --lifetime")
    try:
        if tau is not None:
            broadening = broadening_from_lifetime(tau)
        levels = parse_level_table(Path(level_file).read_bytes(), ParserConfig())
        pairs = find_degenerate_pairs(
            levels, broadening, same_configuration_only=same_configuration
        )
    except LevelTableError as exc:
        raise click.UsageError(f"cannot parse {level_file}: {exc}")
    except OrthoparaError as exc:
        raise click.UsageError(str(exc))

    source = f"hbar / {tau:.9e} s" if tau is not None else "explicit"
    human = [
        f"# level file: {level_file} ({len(levels)} levels)",
        f"# broadening: {broadening:.9e} eV ({source})",
        f"# pairs found: {len(pairs)}",
    ]
    if pairs:
        human.append(
            f"{'ortho':<16} {'para':<16} {'delta_E (eV)':>14}"
        )
        for pr in pairs:
            o = f"{pr.ortho.configuration} {pr.ortho.term} J={pr.ortho.j}"
            p = f"{pr.para.configuration} {pr.para.term} J={pr.para.j}"
            human.append(f"{o:<16} {p:<16} {pr.delta_e:>14.6e}")
    rows = [
        {
            "ortho_configuration": pr.ortho.configuration,
            "ortho_term": pr.ortho.term,
            "ortho_j": pr.ortho.j,
            "ortho_energy_ev": pr.ortho.energy,
            "para_configuration": pr.para.configuration,
            "para_term": pr.para.term,
            "para_j": pr.para.j,
            "para_energy_ev": pr.para.energy,
            "delta_e_ev": pr.delta_e,
            "broadening_ev": pr.broadening,
        }
        for pr in pairs
    ]
    meta = {"level_file": level_file, "broadening_ev": broadening}
    doc = {"broadening_ev": broadening, "pairs": [pr.to_dict() for pr in pairs]}
    _emit(ctx, human, rows, meta, doc)


@cli.command("prepare")
@click.option("--up", type=COMPLEX, default=None, help="Incident spin-up amplitude.")
@click.option("--down", type=COMPLEX, default=None, help="Incident spin-down amplitude.")
@click.option("--w-or", type=float, default=None, help="Ortho weight |alpha|^2 in [0, 1].")
@click.option("--phase", type=float, default=0.0, show_default=True,
              help="Relative phase, radians (with --w-or).")
@click.pass_context
@_library_errors_as_usage
def cmd_prepare(ctx, up, down, w_or, phase):
    """Build superposition amplitudes from a captured electron spin state."""
    amplitude_mode = up is not None or down is not None
    if amplitude_mode and w_or is not None:
        raise click.UsageError("give either --up/--down or --w-or, not both")
    if amplitude_mode:
        if up is None or down is None:
            raise click.UsageError("--up and --down must be given together")
        state = prepare_superposition(SpinState(up, down))
    elif w_or is not None:
        state = amplitudes_from_weights(w_or, phase)
    else:
        raise click.UsageError("give --up/--down amplitudes or an --w-or weight")

    human = [
        f"alpha (ortho): {state.alpha}",
        f"beta  (para):  {state.beta}",
        f"weights: |alpha|^2 = {state.weight_ortho:.12f}, |beta|^2 = {state.weight_para:.12f}",
    ]
    row = {
        "alpha_re": state.alpha.real,
        "alpha_im": state.alpha.imag,
        "beta_re": state.beta.real,
        "beta_im": state.beta.imag,
        "weight_ortho": state.weight_ortho,
        "weight_para": state.weight_para,
    }
    doc = {
        "state": state.to_dict(),
        "weight_ortho": state.weight_ortho,
        "weight_para": state.weight_para,
    }
    _emit(ctx, human, [row], {}, doc)


@cli.command("lifetime")
@click.option("--w-or", type=float, default=0.5, show_default=True, help="Ortho weight |alpha|^2.")
@click.option("--phase", type=float, default=0.0, show_default=True, help="Relative phase, radians.")
@click.option("--tau-or", type=float, default=TAU_OR_METASTABLE, show_default=True,
              help="Ortho lifetime, s.")
@click.option("--tau-pa", type=float, default=TAU_PA_METASTABLE, show_default=True,
              help="Para lifetime, s.")
@click.pass_context
@_library_errors_as_usage
def cmd_lifetime(ctx, w_or, phase, tau_or, tau_pa):
    """Mean lifetime of the superposition between the two branch lifetimes."""
    state = _state_from_weights(w_or, phase)
    tau = lifetime(state, 1.0 / tau_or, 1.0 / tau_pa)
    gamma_bar = 1.0 / tau
    human = [
        f"lifetime tau = {tau:.9e} s",
        f"weighted rate gamma_bar = {gamma_bar:.9e} 1/s",
    ]
    row = {"w_or": w_or, "tau_s": tau, "gamma_bar_per_s": gamma_bar}
    doc = {"w_or": w_or, "tau_s": tau, "gamma_bar_per_s": gamma_bar}
    _emit(ctx, human, [row], {}, doc)


@cli.command("rate")
@_model_options
@click.option("--t", "times", type=float, multiple=True,
              help="Evaluate the instantaneous rate at time t, s (repeatable).")
@click.option("--window", "windows", type=float, multiple=True,
              help="Average the rate over [0, T], s (repeatable).")
@click.pass_context
@_library_errors_as_usage
def cmd_rate(ctx, w_or, phase, gamma_or, gamma_pa, e_or, e_pa, omega, times, windows):
    """Instantaneous and window-averaged decay rates."""
    model = _beat_model(w_or, phase, gamma_or, gamma_pa, e_or, e_pa, omega)
    if not times and not windows:
        times = (0.0,)
    rows = []
    for t in times:
        rows.append({"kind": "instantaneous", "t_or_window_s": t,
                     "rate_per_s": instantaneous_rate(model, t)})
    for T in windows:
        rows.append({"kind": "averaged", "t_or_window_s": T,
                     "rate_per_s": averaged_rate(model, T)})
    human = [f"omega = {model.omega:.9e} rad/s"]
    human += [f"{r['kind']:<14} @ {r['t_or_window_s']:.6e} s: {r['rate_per_s']:.9e} 1/s"
              for r in rows]
    meta = {"omega_rad_per_s": model.omega}
    doc = {"omega_rad_per_s": model.omega, "rows": rows}
    _emit(ctx, human, rows, meta, doc)


def _parse_grid(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 4:
        raise click.UsageError(f"grid spec {spec!r} is not "
                               "'lin:start:stop:count' or 'log:start:stop:count'")
    kind, start_s, stop_s, count_s = parts
    try:
        start, stop, count = float(start_s), float(stop_s), int(count_s)
    except ValueError:
        raise click.UsageError(f"grid spec {spec!r} has non-numeric fields")
    if count < 1:
        raise click.UsageError("grid count must be >= 1")
    if kind == "lin":
        return np.linspace(start, stop, count)
    if kind == "log":
        if start <= 0 or stop <= 0:
            raise click.UsageError("log grid endpoints must be > 0")
        return np.logspace(np.log10(start), np.log10(stop), count)
    raise click.UsageError(f"unknown grid kind {kind!r} (lin or log)")


@cli.command("beats")
@_model_options
@click.option("--grid", default="lin:0:0.1:1001", show_default=True,
              help="Time grid: lin:start:stop:count or log:start:stop:count (s).")
@click.pass_context
@_library_errors_as_usage
def cmd_beats(ctx, w_or, phase, gamma_or, gamma_pa, e_or, e_pa, omega, grid):
    """Quantum-beat emission signal on a time grid."""
    model = _beat_model(w_or, phase, gamma_or, gamma_pa, e_or, e_pa, omega)
    t_grid = _parse_grid(grid)
    samples = beat_signal(model, t_grid)
    a_or = model.state.alpha.real * model.ortho.matrix_element
    a_pa = model.state.beta.real * model.para.matrix_element
    human = [
        f"omega = {model.omega:.9e} rad/s, beat period = {2*np.pi/model.omega:.6e} s"
        if model.omega != 0 else "omega = 0 (degenerate, no beats)",
        f"amplitudes A_or = {a_or:.6e}, A_pa = {a_pa:.6e}",
        f"{samples.shape[0]} samples on [{t_grid[0]:.6e}, {t_grid[-1]:.6e}] s; "
        f"signal(0) = {samples[0, 1]:.9e}",
    ]
    rows = [{"t_s": float(t), "signal": float(v)} for t, v in samples]
    meta = {"omega_rad_per_s": model.omega, "a_or": a_or, "a_pa": a_pa}
    doc = {"omega_rad_per_s": model.omega, "a_or": a_or, "a_pa": a_pa, "rows": rows}
    _emit(ctx, human, rows, meta, doc)


def _counting_options(command):
    for option in reversed([
        click.option("--w-or", type=float, default=0.5, show_default=True,
                     help="Ortho weight |alpha|^2."),
        click.option("--phase", type=float, default=0.0, show_default=True,
                     help="Relative phase of beta, radians."),
        click.option("--gamma-or", type=float, default=DESK_GAMMA_OR, show_default=True,
                     help="Ortho decay rate, 1/s."),
        click.option("--gamma-pa", type=float, default=DESK_GAMMA_PA, show_default=True,
                     help="Para decay rate, 1/s."),
        click.option("--window", type=float, default=DESK_WINDOW, show_default=True,
                     help="Observation window T, s."),
        click.option("--n-max", type=int, default=None,
                     help="Truncate pmfs at this count (default: auto)."),
    ]):
        command = option(command)
    return command


@cli.command("counts")
@_counting_options
@click.option("--hypothesis", type=click.Choice([h.value for h in Hypothesis]),
              default=Hypothesis.SUPERPOSITION.value, show_default=True,
              help="Sampling hypothesis.")
@click.option("--windows", type=int, default=10000, show_default=True,
              help="Number of observation windows.")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Worker threads for sharded sampling.")
@click.pass_context
@_library_errors_as_usage
def cmd_counts(ctx, w_or, phase, gamma_or, gamma_pa, window, n_max, hypothesis,
               windows, workers):
    """Sample photocounts, histogram them, and run the discriminator."""
    seed = ctx.obj["seed"] if ctx.obj["seed"] is not None else DEFAULT_SEED
    state = _state_from_weights(w_or, phase)
    sample = sample_counts(state, gamma_or, gamma_pa, window, windows,
                           hypothesis, seed, n_workers=workers)
    if n_max is None:
        n_max = default_support(state, gamma_or, gamma_pa, window)
    report = discriminate(sample, state, gamma_or, gamma_pa, window, n_max)
    p_sup = decompose_superposition_pmf(state, gamma_or, gamma_pa, window, n_max)
    p_mix = mixture_pmf(state, gamma_or, gamma_pa, window,
                        n_max=n_max, variant=MixtureVariant.NORMALIZED)
    hist = np.bincount(sample.counts, minlength=p_sup.n_max + 1)

    human = [
        f"sampled {windows} windows under '{hypothesis}' (seed {seed})",
        f"mean count = {sample.counts.mean():.6f}, variance = {sample.counts.var():.6f}",
        f"log-likelihood ratio = {report.log_likelihood_ratio:.6e}",
        f"chi2 p-values: superposition {report.p_chi2_superposition:.3e}, "
        f"mixture {report.p_chi2_mixture:.3e}",
        f"verdict: {report.verdict.value}",
    ]
    rows = [
        {
            "n": n,
            "observed": int(hist[n]) if n < hist.size else 0,
            "pmf_superposition": float(p_sup.pmf[n]),
            "pmf_mixture": float(p_mix.pmf[n]),
        }
        for n in range(p_sup.n_max + 1)
    ]
    meta = {
        "hypothesis": hypothesis,
        "windows": windows,
        "seed": seed,
        "log_likelihood_ratio": report.log_likelihood_ratio,
        "p_chi2_superposition": report.p_chi2_superposition,
        "p_chi2_mixture": report.p_chi2_mixture,
        "verdict": report.verdict.value,
    }
    doc = {
        "hypothesis": hypothesis,
        "windows": windows,
        "seed": seed,
        "histogram": rows,
        "report": report.to_dict(),
    }
    _emit(ctx, human, rows, meta, doc)


@cli.command("discriminate")
@_counting_options
@click.option("--counts-file", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Observed counts, one non-negative integer per line ('#' comments).")
@click.pass_context
@_library_errors_as_usage
def cmd_discriminate(ctx, w_or, phase, gamma_or, gamma_pa, window, n_max, counts_file):
    """Run the superposition-vs-mixture test on counts from a file."""
    values = []
    for line_number, line in enumerate(Path(counts_file).read_text().splitlines(), 1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        try:
            value = int(text)
        except ValueError:
            raise click.UsageError(f"{counts_file}:{line_number}: not an integer: {text!r}")
        if value < 0:
            raise click.UsageError(f"{counts_file}:{line_number}: negative count {value}")
        values.append(value)
    sample = CountSample(seed=0, counts=np.asarray(values, dtype=np.int64))
    state = _state_from_weights(w_or, phase)
    report = discriminate(sample, state, gamma_or, gamma_pa, window, n_max)
    human = [
        f"{len(values)} windows read from {counts_file}",
        f"log-likelihood ratio = {report.log_likelihood_ratio:.6e}",
        f"p-value (chi2, disfavored hypothesis) = {report.p_value_chi2:.3e}",
        f"verdict: {report.verdict.value}",
    ]
    row = report.to_dict()
    _emit(ctx, human, [row], {"counts_file": counts_file}, {"report": row})


@cli.command("bundled-data")
@click.pass_context
def cmd_bundled_data(ctx):
    """Print the path of the bundled He I level table."""
    click.echo(str(bundled_levels_path()))


def main(argv=None):
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except click.exceptions.Abort:
        sys.exit(2)
    except OrthoparaError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except Exception as exc:  # noqa: BLE001 - anything else is an internal bug
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(3)
    sys.exit(0)


if __name__ == "__main__":
    main()
