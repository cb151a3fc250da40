"""Command-line front end: ``python -m aqi <subcommand> [options]``.

Every subcommand writes long-format CSV tables and a ``manifest.json`` into
``--out-dir``. Data files depend only on the resolved configuration and seed;
the manifest additionally records wall-clock timings.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 cache failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .analysis import (
    GABOR_DELTA,
    InversionDomainError,
    ensemble_gabor,
    sigma_inversion,
)
from .dipole import (
    CACHE_SCHEMA,
    CacheError,
    NumericalError,
    cutoff_estimate,
    harmonic_spectrum,
    measured_cutoff,
)
from .field import ConfigError, DriverConfig, SqueezingSpec, field_on_grid
from .observables import csi_matrix
from .pipeline import SWEEP_COLUMNS, Pipeline, sweep_phi
from .tomography import collect_aqt_trace, inverse_radon
from .wigner import default_axes, wigner_grid

log = logging.getLogger("aqi")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_CACHE = 0, 2, 3, 4


def load_config(path: str | None) -> DriverConfig:
    """Read a YAML (or JSON) mapping of DriverConfig fields; missing keys take defaults."""
    if path is None:
        return DriverConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"not valid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a mapping")
    return DriverConfig.from_dict(data)


def _q_list(text: str) -> list[float]:
    """'8-24' or '12,16' or '8-24,30'."""
    out: list[float] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(float(q) for q in range(int(lo), int(hi) + 1))
        elif part:
            out.append(float(part))
    if not out:
        raise argparse.ArgumentTypeError("empty harmonic list")
    return out


def _csv_bytes(header: list[str], rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue().encode()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n").encode()


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    return repr(o)


class Run:
    """Collects output files in memory and commits them together once the command succeeds."""

    def __init__(self, args, config: DriverConfig):
        self.args = args
        self.config = config
        self.out_dir = Path(args.out_dir)
        self.files: dict[str, bytes] = {}
        self.timings: dict[str, float] = {}
        self._t0 = time.perf_counter()

    def pipeline(self, config: DriverConfig | None = None, **kw) -> Pipeline:
        return Pipeline(config or self.config, cache_dir=self.args.cache_dir, jobs=self.args.jobs, **kw)

    def csv(self, name: str, header, rows):
        self.files[name] = _csv_bytes(list(header), rows)

    def json(self, name: str, obj):
        self.files[name] = _json_bytes(obj)

    def commit(self, pipelines=()):
        for p in pipelines:
            for k, v in p.timings.items():
                self.timings[k] = self.timings.get(k, 0.0) + v
        self.timings["total"] = time.perf_counter() - self._t0
        for name, data in sorted(self.files.items()):
            _atomic_write(self.out_dir / name, data)
        manifest = {
            "command": self.args.command,
            "config_hash": self.config.content_hash(),
            "config": self.config.to_dict(),
            "seeds": {"seed": self.args.seed},
            "versions": {"aqi": __version__, "cache_schema": CACHE_SCHEMA, "numpy": np.__version__},
            "outputs": sorted(self.files),
            "timings": self.timings,
        }
        _atomic_write(self.out_dir / "manifest.json", _json_bytes(manifest))


# --- subcommands -------------------------------------------------------------


def cmd_spectrum(run: Run) -> None:
    cfg = run.config
    pipe = run.pipeline(n_samples=run.args.samples)
    samples, records = pipe.ensemble()
    q = np.arange(1, int(round(2 * run.args.q_max)) + 1) / 2.0
    spectra = np.array([harmonic_spectrum(r, q_values=q) for r in records])
    w = np.array([s.weight for s in samples])
    w = w / w.sum()
    rows = []
    for s, spec in zip(samples, spectra):
        rows += [(s.sample_id, qq, abs(d) ** 2, np.angle(d)) for qq, d in zip(q, spec)]
    mean_d = w @ spectra
    incoherent = w @ np.abs(spectra) ** 2
    ens = [("ensemble", qq, I, np.angle(d)) for qq, I, d in zip(q, incoherent, mean_d)]
    run.csv("spectrum.csv", ["sample", "q", "intensity", "phase"], rows + ens)
    run.json(
        "spectrum.json",
        {
            "cutoff_estimate": cutoff_estimate(cfg),
            "cutoff_measured": measured_cutoff(q, incoherent, cfg.Ip, cfg.omega),
            "ensemble_intensity": "sum_k w_k |d_k(q)|^2; phase is arg of sum_k w_k d_k(q)",
            "units": "atomic units",
        },
    )
    if run.args.dump_field:
        frows = []
        for s in samples:
            t, E = field_on_grid(s, cfg)
            frows += [(s.sample_id, ti, ei) for ti, ei in zip(t, E)]
        run.csv("field.csv", ["sample", "t", "E"], frows)
    run.commit([pipe])


def cmd_states(run: Run) -> None:
    pipe = run.pipeline()
    rows, meta = [], {"rho_coupling": pipe.rho, "phi": run.config.phi, "q": []}
    for q in run.args.q:
        m = pipe.mixture(q, refine=False)
        rows += [(q, k, w, b.real, b.imag) for k, (w, b) in enumerate(zip(m.weights, m.betas))]
        meta["q"].append(q)
    run.csv("states.csv", ["q", "component", "weight", "re_beta", "im_beta"], rows)
    run.json("states.json", meta)
    run.commit([pipe])


def cmd_wigner(run: Run) -> None:
    pipe = run.pipeline()
    rows, header = [], {"phi": run.config.phi, "grid_points": run.args.points, "q": []}
    for q in run.args.q:
        m = pipe.mixture(q)
        x, p = default_axes(m, run.args.points)
        grid = wigner_grid(m, x, p)
        X, P = np.meshgrid(x, p, indexing="ij")
        rows += zip([q] * X.size, X.ravel(), P.ravel(), grid.values.ravel())
        header["q"].append({"q": q, "x_range": [x[0], x[-1]], "p_range": [p[0], p[-1]]})
    run.csv("wigner.csv", ["q", "x", "p", "W"], rows)
    run.json("wigner.json", header)
    run.commit([pipe])


def cmd_correlations(run: Run) -> None:
    pipe = run.pipeline()
    mixtures = [pipe.mixture(q, refine=False) for q in run.args.q]
    corr = csi_matrix(mixtures)
    rows = [
        (qi, qj, corr.g2[i, j], corr.delta_csi[i, j], bool(corr.undefined[i, j]))
        for i, qi in enumerate(corr.q_list)
        for j, qj in enumerate(corr.q_list)
    ]
    run.csv("correlations.csv", ["q1", "q2", "g2", "delta_csi", "undefined"], rows)
    run.commit([pipe])


def cmd_entropy(run: Run) -> None:
    pipe = run.pipeline()
    table = sweep_phi(pipe, run.args.q, run.args.n_phi)
    run.csv("entropy.csv", ["phi", "q", "S_lin"], [(r["phi"], r["q"], r["S_lin"]) for r in table])
    run.commit([pipe])


def cmd_sweep_phi(run: Run) -> None:
    pipe = run.pipeline()
    table = sweep_phi(pipe, run.args.q, run.args.n_phi)
    run.csv("sweep_phi.csv", SWEEP_COLUMNS, [[r[c] for c in SWEEP_COLUMNS] for r in table])
    run.json("sweep_phi.json", {"rho_coupling": pipe.rho, "n_phi": run.args.n_phi, "q": run.args.q})
    run.commit([pipe])


def cmd_tomography(run: Run) -> None:
    a = run.args
    pipe = run.pipeline()
    trace = collect_aqt_trace(a.q, a.theta, run.config, a.n_phases, a.n_shots, a.seed, pipeline=pipe)
    half = float(np.max(np.abs(trace.outcomes))) + 1.0
    axis = np.linspace(-half, half, a.points)
    grid = inverse_radon(trace, axis, axis, k_c=a.k_c, subtract_mean=a.subtract_mean)
    run.csv(
        "trace.csv",
        ["phi", "shot", "outcome"],
        [(phi, i, v) for phi, shots in zip(trace.phi_values, trace.outcomes) for i, v in enumerate(shots)],
    )
    X, P = np.meshgrid(grid.x_axis, grid.p_axis, indexing="ij")
    run.csv("aqt_grid.csv", ["x", "p", "W"], zip(X.ravel(), P.ravel(), grid.values.ravel()))
    run.json("tomography.json", {**grid.provenance, "rho_coupling": pipe.rho, "integral": grid.integral()})
    run.commit([pipe])


def cmd_gabor(run: Run) -> None:
    a = run.args
    cfg = run.config
    if a.coherent:
        cfg = cfg.replace(squeezing=SqueezingSpec(kind="coherent"))
    pipe = run.pipeline(cfg)
    samples, records = pipe.ensemble()
    gmap = ensemble_gabor(cfg, samples, records, delta=a.delta)
    T, W = np.meshgrid(gmap.tau_axis, gmap.omega_axis / cfg.omega)
    run.csv("gabor.csv", ["tau", "harmonic", "G"], zip(T.ravel(), W.ravel(), gmap.magnitude.ravel()))
    run.json("gabor.json", {"delta": a.delta, "phi": cfg.phi, "squeezing": cfg.squeezing.kind})
    run.commit([pipe])


def cmd_sigma(run: Run) -> None:
    """σ per consecutive (odd, odd + 1) pair; I_0 is the odd intensity of the ε = 0 drive."""
    cfg = run.config
    ref = run.pipeline(cfg.replace(epsilon_ratio=0.0, squeezing=SqueezingSpec(kind="coherent")))
    pipe = run.pipeline()
    _, ref_rec = ref.ensemble()
    samples, records = pipe.ensemble()
    w = np.array([s.weight for s in samples])
    w = w / w.sum()
    rows = []
    first_odd = run.args.q_min + (run.args.q_min % 2 == 0)
    for q in range(first_odd, run.args.q_max, 2):
        I0 = abs(ref_rec[0].at(q)) ** 2
        I_odd = float(w @ (np.abs([r.at(q) for r in records]) ** 2))
        I_even = float(w @ (np.abs([r.at(q + 1) for r in records]) ** 2))
        try:
            est = sigma_inversion(I_odd, I_even, I0)
            rows.append((q, q + 1, I_odd, I_even, I0, est.sigma_x, est.sigma_y, ""))
        except InversionDomainError as exc:
            rows.append((q, q + 1, I_odd, I_even, I0, float("nan"), float("nan"), str(exc)))
    run.csv("sigma.csv", ["q_odd", "q_even", "I_odd", "I_even", "I_0", "sigma_x", "sigma_y", "note"], rows)
    run.commit([ref, pipe])


COMMANDS = {
    "spectrum": cmd_spectrum,
    "states": cmd_states,
    "wigner": cmd_wigner,
    "correlations": cmd_correlations,
    "entropy": cmd_entropy,
    "tomography": cmd_tomography,
    "gabor": cmd_gabor,
    "sigma": cmd_sigma,
    "sweep-phi": cmd_sweep_phi,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML/JSON file with DriverConfig fields")
    common.add_argument("--cache-dir", help="directory for cached dipole time series")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for dipole evaluation")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out-dir", default=".", help="where CSV/JSON outputs go")
    common.add_argument("--phi", type=float, help="override the two-color phase (rad)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="aqi", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="harmonic spectra per sample and ensemble")
    p.add_argument("--q-max", type=float, default=40.0)
    p.add_argument("--samples", type=int, help="phase-space nodes")
    p.add_argument("--dump-field", action="store_true", help="also write E(t) per sample")

    for name, default, help_ in [
        ("states", "12,16", "coherent-state components per harmonic"),
        ("wigner", "12", "Wigner functions on a grid"),
        ("correlations", "8-24", "g2 and Cauchy-Schwarz matrices"),
        ("entropy", "8-30", "linear entropy vs phase"),
        ("sweep-phi", "8-30", "observable table vs phase"),
    ]:
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--q", type=_q_list, default=_q_list(default), help="e.g. 8-24 or 12,16")
        if name == "wigner":
            p.add_argument("--points", type=int, default=201)
        if name in ("entropy", "sweep-phi"):
            p.add_argument("--n-phi", type=int, default=20)

    p = sub.add_parser("tomography", parents=[common], help="AQT trace and inverse Radon grid")
    p.add_argument("--q", type=float, default=12.0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--n-phases", type=int, default=20)
    p.add_argument("--n-shots", type=int, default=500)
    p.add_argument("--k-c", type=float, default=3.0)
    p.add_argument("--points", type=int, default=81)
    p.add_argument("--subtract-mean", action="store_true")

    p = sub.add_parser("gabor", parents=[common], help="Gabor map of the ensemble dipole")
    p.add_argument("--delta", type=float, default=GABOR_DELTA)
    p.add_argument("--coherent", action="store_true", help="replace the squeezed 2w field by a coherent one")

    p = sub.add_parser("sigma", parents=[common], help="sigma from odd/even intensity pairs")
    p.add_argument("--q-min", type=int, default=9)
    p.add_argument("--q-max", type=int, default=25)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = load_config(args.config)
        if args.phi is not None:
            config = config.replace(phi=args.phi)
        if args.jobs < 1:
            raise ConfigError("jobs", "must be >= 1")
        COMMANDS[args.command](Run(args, config))
    except ConfigError as exc:
        _report("validation", exc, field=exc.field_name)
        return EXIT_VALIDATION
    except CacheError as exc:
        _report("cache", exc)
        return EXIT_CACHE
    except (NumericalError, FloatingPointError) as exc:
        _report("numerical", exc)
        return EXIT_NUMERICAL
    except ValueError as exc:
        _report("validation", exc)
        return EXIT_VALIDATION
    return EXIT_OK


def _report(kind: str, exc: Exception, **extra) -> None:
    print(json.dumps({"error": kind, "message": str(exc), **extra}), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
