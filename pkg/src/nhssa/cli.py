"""Command-line front door: decompose a series, run benchmark experiments,
scan the embedding grid, and serve a session for interactive inspection.

Exit codes: 0 success, 2 bad input or infeasible configuration, 3 singular
pencil, 4 port unavailable.
"""

from __future__ import annotations

import errno
import json
import sys
from pathlib import Path

import click

from . import bench as bench_mod
from . import core
from .components import ClassifierThresholds
from .embedding import condition_grid_search
from .pipeline import (
    PipelineConfig,
    Session,
    decompose,
    dump_session_json,
    parse_rank_policy,
)
from .seriesio import read_series, write_series

EXIT_BAD_INPUT = 2
EXIT_SINGULAR = 3
EXIT_PORT = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_series(path: str):
    try:
        return read_series(path)
    except (OSError, ValueError) as exc:
        _fail(EXIT_BAD_INPUT, str(exc))


def _parse_range(text: str) -> list[int]:
    try:
        lo, hi = (int(part) for part in text.split(":"))
    except ValueError:
        raise click.BadParameter(f"expected A:B, got {text!r}")
    if hi < lo:
        raise click.BadParameter(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def write_session_files(session: Session, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    session_path = out_dir / "session.json"
    session_path.write_text(dump_session_json(session) + "\n")
    write_series(session.signal_estimate, out_dir / "shat.csv")
    write_series(session.noise_estimate, out_dir / "what.csv")
    for j, comp in enumerate(session.component_series):
        write_series(comp, out_dir / f"component_{j:03d}.csv")
    return session_path


@click.group()
def main():
    """Exponential retrieval via non-Hermitian singular spectrum analysis."""


@main.command("decompose")
@click.argument("input_path", type=click.Path())
@click.option("--d", type=int, default=None, help="Embedding dimension.")
@click.option("--mbar", type=int, default=None, help="Translation multiplicity.")
@click.option("--auto-grid", is_flag=True, help="Pick (d, mbar) by grid search.")
@click.option("--lambda-c", type=float, default=0.8, show_default=True,
              help="Eigenvalue-modulus threshold.")
@click.option("--rank", "rank_text", default="gap", show_default=True,
              help="Rank policy: 'gap' or 'fixed:N'.")
@click.option("--max-cv", type=float, default=None, help="Classifier modulus-spread cut.")
@click.option("--min-r2", type=float, default=None, help="Classifier phase-linearity cut.")
@click.option("--max-logmod-slope", type=float, default=None, help="Spiral slope cut.")
@click.option("--max-wraps", type=int, default=None, help="Tolerated wrap events.")
@click.option("--out", "out_dir", type=click.Path(), default="nhssa_out", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def cmd_decompose(input_path, d, mbar, auto_grid, lambda_c, rank_text,
                  max_cv, min_r2, max_logmod_slope, max_wraps, out_dir, seed):
    """Decompose a time-series file and write the session artifacts."""
    series = _load_series(input_path)
    defaults = ClassifierThresholds()
    thresholds = ClassifierThresholds(
        max_cv=defaults.max_cv if max_cv is None else max_cv,
        min_phase_r2=defaults.min_phase_r2 if min_r2 is None else min_r2,
        max_logmod_slope=(
            defaults.max_logmod_slope if max_logmod_slope is None else max_logmod_slope
        ),
        max_wraps=defaults.max_wraps if max_wraps is None else max_wraps,
    )
    try:
        config = PipelineConfig(
            d=d,
            mbar=mbar,
            auto_grid=auto_grid,
            lambda_c=lambda_c,
            rank_policy=parse_rank_policy(rank_text),
            thresholds=thresholds,
            seed=seed,
        )
    except ValueError as exc:
        _fail(EXIT_BAD_INPUT, str(exc))
    try:
        session = decompose(series, config)
    except (core.SingularPencil, core.SingularCovariance) as exc:
        _fail(EXIT_SINGULAR, str(exc))
    except ValueError as exc:
        _fail(EXIT_BAD_INPUT, str(exc))
    session_path = write_session_files(session, Path(out_dir))
    click.echo(f"session: {session_path}")
    for entry in session.frequencies:
        click.echo(f"  {entry.cycles:.6f} cycles  rows={list(entry.rows)}")


@main.command("bench")
@click.option("--preset", "preset_name", default=None,
              help=f"One of: {', '.join(bench_mod.PRESET_NAMES)}.")
@click.option("--spec", "spec_path", type=click.Path(), default=None,
              help="JSON experiment spec (see docs).")
@click.option("--realizations", type=int, default=None, help="Override realization count.")
@click.option("--seed", type=int, default=1000, show_default=True, help="Base noise seed.")
@click.option("--out", "out_dir", type=click.Path(), default="bench_out", show_default=True)
def cmd_bench(preset_name, spec_path, realizations, seed, out_dir):
    """Run a Monte Carlo estimator comparison and write report files."""
    if (preset_name is None) == (spec_path is None):
        _fail(EXIT_BAD_INPUT, "provide exactly one of --preset or --spec")
    if preset_name is not None:
        try:
            spec = bench_mod.preset(preset_name, base_seed=seed)
        except ValueError as exc:
            _fail(EXIT_BAD_INPUT, str(exc))
    else:
        try:
            spec = experiment_spec_from_file(spec_path)
        except (OSError, ValueError, KeyError) as exc:
            _fail(EXIT_BAD_INPUT, f"bad experiment spec: {exc}")
    if realizations is not None:
        from dataclasses import replace

        spec = replace(spec, realizations=realizations)
    stats = bench_mod.run_experiment(spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(
        json.dumps(stats.to_dict(), sort_keys=True, indent=2) + "\n"
    )
    (out / "report.md").write_text(bench_mod.render_markdown(stats))
    for name, est in stats.estimators.items():
        lines = ["bin_low,count"]
        lines += [
            f"{lo:.3f},{cnt}" for lo, cnt in zip(est.bin_edges[:-1], est.histogram)
        ]
        (out / f"hist_{name}.csv").write_text("\n".join(lines) + "\n")
    click.echo(f"report: {out / 'report.md'}")


def experiment_spec_from_file(path) -> bench_mod.ExperimentSpec:
    """Load a declarative experiment spec from JSON."""
    from .signal_model import NoiseSpec, SignalSpec

    doc = json.loads(Path(path).read_text())
    signal = SignalSpec(
        tuple((t["cycles"], complex(t["re"], t.get("im", 0.0))) for t in doc["signal"]["terms"]),
        real_valued=doc["signal"].get("real_valued", False),
    )
    noise_doc = doc["noise"]
    noise = NoiseSpec(
        kind=noise_doc["kind"],
        phi=tuple(noise_doc.get("phi", ())),
        innovation_variance=noise_doc.get("innovation_variance", 1.0),
        epsilon=noise_doc.get("epsilon", 1.0),
        seed=noise_doc.get("seed", 0),
    )
    estimators = []
    for est in doc["estimators"]:
        if est["kind"] == "esprit":
            from .esprit import EspritConfig

            estimators.append(
                bench_mod.EspritEstimator(
                    est["name"], EspritConfig(est["cosines"], est["cov_size"])
                )
            )
        elif est["kind"] == "nhssa":
            estimators.append(
                bench_mod.NhssaEstimator(
                    est["name"],
                    PipelineConfig(
                        d=est.get("d"),
                        mbar=est.get("mbar"),
                        lambda_c=est.get("lambda_c", 0.8),
                        rank_policy=parse_rank_policy(est.get("rank", "gap")),
                        thresholds=ClassifierThresholds(**est.get("thresholds", {})),
                    ),
                )
            )
        else:
            raise ValueError(f"unknown estimator kind {est['kind']!r}")
    return bench_mod.ExperimentSpec(
        signal=signal,
        noise=noise,
        m=doc["m"],
        realizations=doc["realizations"],
        estimators=tuple(estimators),
        truth=tuple(doc["truth"]),
        histogram_bin=doc.get("histogram_bin", 0.005),
        name=doc.get("name", Path(path).stem),
    )


@main.command("grid")
@click.argument("input_path", type=click.Path())
@click.option("--d-range", default="6:24", show_default=True, help="Inclusive d range A:B.")
@click.option("--mbar-range", default="1:12", show_default=True, help="Inclusive mbar range A:B.")
@click.option("--out", "out_dir", type=click.Path(), default="grid_out", show_default=True)
def cmd_grid(input_path, d_range, mbar_range, out_dir):
    """Scan the embedding condition number over a (d, mbar) grid."""
    series = _load_series(input_path)
    try:
        grid = condition_grid_search(series, _parse_range(d_range), _parse_range(mbar_range))
    except ValueError as exc:
        _fail(EXIT_BAD_INPUT, str(exc))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "grid.json").write_text(json.dumps(grid.to_dict(), sort_keys=True, indent=2) + "\n")
    lines = ["d\\mbar," + ",".join(str(mb) for mb in grid.mbar_values)]
    for i, d in enumerate(grid.d_values):
        lines.append(f"{d}," + ",".join(f"{c:.6e}" for c in grid.cond[i]))
    (out / "grid.csv").write_text("\n".join(lines) + "\n")
    click.echo(f"argmin: d={grid.best_d} mbar={grid.best_mbar}")


@main.command("serve")
@click.argument("session_path", type=click.Path())
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--static", "static_dir", type=click.Path(), default=None,
              help="Directory with the built UI (served at /).")
def cmd_serve(session_path, port, host, static_dir):
    """Serve a session for the browser inspector."""
    import uvicorn

    from .service import SessionStore, create_app

    path = Path(session_path)
    if not path.exists():
        _fail(EXIT_BAD_INPUT, f"session file not found: {path}")
    try:
        store = SessionStore.load(path)
    except (ValueError, KeyError) as exc:
        _fail(EXIT_BAD_INPUT, f"bad session file: {exc}")
    app = create_app(store, static_dir=static_dir)
    import socket

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        if exc.errno == errno.EADDRINUSE:
            _fail(EXIT_PORT, f"port {port} is busy")
        raise
    finally:
        probe.close()
    click.echo(f"serving session {store.session.session_id} at http://{host}:{port}/")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
