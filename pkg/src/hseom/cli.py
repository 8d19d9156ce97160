"""Config-driven experiment runner.

Subcommands: bath-fit, respond, anneal, rdm, validate, preflight.
Exit codes: 0 success, 2 config error, 3 numerical failure, 4 resource
refusal.  SVG plots are rendered from the CSV files after writing them,
so the plots can never show anything the tables do not contain.
"""

from __future__ import annotations

import argparse
import sys
import time
import warnings
from pathlib import Path
from typing import Dict, Optional

import numpy as np
import scipy

from .bath import (BathExpansion, alpha_quadrature, alpha_reconstruct,
                   build_eta, compute_coefficients, jacobi_anger_residual,
                   reconstruction_error, tail_mass, write_expansion)
from .config import (RunConfig, horizon_of, parse_config_file,
                     serialize_config, validate_config)
from .dynamics import Branch, ContourEngine, ContourPlan, WaveStack
from .errors import (ConfigError, ExpansionWarning, HorizonWarning,
                     HseomError, NumericalError, ResourceLimitError)
from .hierarchy import DEFAULT_MAX_INDICES, awf_count, build_space
from .models import PureState, SystemModel, DenseOperator, spin_boson
from .observables import (annealing_populations, half_fourier,
                          rdm_trajectory, response_function)
from .oracles import assemble_generator, dephasing_exact
from .presets import (build_bath_spec, build_components, effective_dt,
                      preset)
from .reporting import line_plot, read_csv, write_csv, write_manifest

__all__ = ["main", "preflight"]

try:
    from importlib.metadata import version as _dist_version
    _VERSION = _dist_version("hseom")
except Exception:  # not installed, e.g. run from a checkout
    _VERSION = "0+unknown"

_WORKSPACE_FACTOR = 5  # integrator scratch alongside the state itself
_BYTE_BUDGET = 2 * 1024 ** 3
_HORIZON_RESIDUAL_TOL = 1e-6


def _model_dim(cfg: RunConfig) -> int:
    if cfg.get("model", "kind") == "pspin":
        return 2 ** int(cfg.require("model", "Ncal"))
    return 2


def preflight(cfg: RunConfig) -> Dict[str, object]:
    """Resource report: AWF count, bytes with workspace, step estimate.

    Raises ResourceLimitError when the estimate exceeds the byte budget
    or the configured index cap.
    """
    validate_config(cfg)
    kind = cfg.experiment
    horizon = horizon_of(cfg) or 0.0
    if kind in ("bath-fit", "validate"):
        k = cfg.get("bath", "K", 0)
        return {"awf_count": 0, "dim": 0,
                "estimated_bytes": int(k) * 16, "estimated_steps": 0}
    num = awf_count(cfg.require("bath", "K"),
                    cfg.require("hierarchy", "n_max"))
    cap = cfg.get("hierarchy", "max_indices", DEFAULT_MAX_INDICES)
    if num > cap:
        raise ResourceLimitError(
            f"{num} hierarchy indices exceed the cap {cap}")
    dim = _model_dim(cfg)
    total = num * dim * 16 * (1 + _WORKSPACE_FACTOR)
    if total > _BYTE_BUDGET:
        raise ResourceLimitError(
            f"estimated {total} bytes exceed the {_BYTE_BUDGET} byte budget")
    dt = effective_dt(cfg)
    steps = 0 if horizon == 0.0 else int(round(2.0 * horizon / dt))
    return {"awf_count": num, "dim": dim, "estimated_bytes": total,
            "estimated_steps": steps}


def _check_horizon(cfg: RunConfig) -> None:
    horizon = horizon_of(cfg)
    k = cfg.get("bath", "K")
    omega = cfg.get("bath", "Omega")
    if not horizon or k is None or omega is None:
        return
    resid = jacobi_anger_residual(1.0, horizon, k, omega)
    if resid > _HORIZON_RESIDUAL_TOL:
        # conservative: assumes the bath stays correlated over the whole
        # run; short-memory baths tolerate a smaller K than this implies
        warnings.warn(
            f"K = {k} leaves a plane-wave residual {resid:.2e} at the "
            f"horizon {horizon:g}; long-time output may be inaccurate",
            HorizonWarning, stacklevel=2)


def _load_config(args) -> RunConfig:
    if args.config is None:
        raise ConfigError("--config is required for this subcommand")
    return parse_config_file(args.config)


def _out_dir(args, cfg: RunConfig) -> Path:
    name = args.out or cfg.get("output", "directory", ".")
    path = Path(name)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _finish(out: Path, cfg: RunConfig, args, started: float,
            extra: Optional[Dict[str, str]] = None) -> None:
    entries = {
        "version": _VERSION,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "workers": str(args.workers if args.workers is not None
                       else cfg.get("run", "workers", 1)),
        "deterministic": "true" if args.deterministic else "false",
    }
    entries.update(extra or {})
    entries["wall_time_s"] = f"{time.perf_counter() - started:.3f}"
    write_manifest(out / "manifest", entries,
                   config_text=serialize_config(cfg))


def _plot_from_csv(csv_path: Path, svg_path: Path, columns, *,
                   negate=(), xlabel="", ylabel="", title="") -> None:
    header, data = read_csv(csv_path)
    x = data[:, 0]
    series = []
    for name in columns:
        idx = header.index(name)
        y = -data[:, idx] if name in negate else data[:, idx]
        label = f"-{name}" if name in negate else name
        series.append((label, y))
    line_plot(svg_path, x, series, xlabel=xlabel or header[0],
              ylabel=ylabel, title=title)


def _cmd_bath_fit(args) -> int:
    cfg = _load_config(args)
    validate_config(cfg)
    if cfg.experiment != "bath-fit":
        raise ConfigError(f"config is for {cfg.experiment!r}, expected "
                          "'bath-fit'", section="experiment", key="kind")
    started = time.perf_counter()
    out = _out_dir(args, cfg)
    _check_horizon(cfg)
    spec = build_bath_spec(cfg)
    expansion = compute_coefficients(spec)
    write_expansion(out / "expansion.txt", spec, expansion)
    t_max = cfg.require("run", "t_max")
    ts = np.linspace(0.0, t_max, 401) if t_max > 0 else np.array([0.0])
    exact = np.array([alpha_quadrature(spec, tv) for tv in ts])
    fit = alpha_reconstruct(expansion, ts)
    write_csv(out / "alpha_fit.csv",
              ["t", "re_alpha", "im_alpha", "re_fit", "im_fit"],
              [ts, exact.real, exact.imag, fit.real, fit.imag])
    _plot_from_csv(out / "alpha_fit.csv", out / "bath.svg",
                   ["re_alpha", "im_alpha", "re_fit", "im_fit"],
                   ylabel="alpha(t)", title="bath correlation, K-term fit")
    err = float(np.abs(exact - fit).max() / np.abs(exact).max())
    _finish(out, cfg, args, started, {
        "max_rel_error": repr(err),
        "tail_mass": repr(float(tail_mass(spec))),
    })
    print(f"expansion written: K = {spec.K}, max relative error {err:.3e}")
    return 0


def _cmd_respond(args) -> int:
    cfg = _load_config(args)
    validate_config(cfg)
    if cfg.experiment != "respond":
        raise ConfigError(f"config is for {cfg.experiment!r}, expected "
                          "'respond'", section="experiment", key="kind")
    started = time.perf_counter()
    out = _out_dir(args, cfg)
    _check_horizon(cfg)
    comps = build_components(cfg)
    taus = cfg.require("run", "tau").values()
    result = response_function(
        comps.engine, taus, cfg.require("run", "t0"), comps.dt,
        drift_tolerance=cfg.get("run", "drift_tolerance", 0.05))
    write_csv(out / "response_t.csv", ["tau", "R"],
              [result.times, result.values.imag])
    omegas = cfg.require("run", "omega").values()
    # the response function is the imaginary part of the correlator
    transform = half_fourier(result, omegas, part="imag",
                             window_time=cfg.get("run", "window_time"))
    write_csv(out / "response_w.csv", ["omega", "re", "im"],
              [omegas, transform.values.real, transform.values.imag])
    _plot_from_csv(out / "response_w.csv", out / "response.svg",
                   ["im"], negate=("im",), xlabel="omega",
                   ylabel="-Im of transform", title="response spectrum")
    _finish(out, cfg, args, started, {
        "drift": repr(float(result.metadata["drift"])),
        "p1_at_t0": repr(float(result.metadata["p1_at_t0"])),
    })
    peak = omegas[int(np.argmax(-transform.values.imag))]
    print(f"response computed over {len(taus)} delays; "
          f"spectral peak near omega = {peak:.4f}")
    return 0


def _cmd_anneal(args) -> int:
    cfg = _load_config(args)
    validate_config(cfg)
    if cfg.experiment != "anneal":
        raise ConfigError(f"config is for {cfg.experiment!r}, expected "
                          "'anneal'", section="experiment", key="kind")
    started = time.perf_counter()
    out = _out_dir(args, cfg)
    _check_horizon(cfg)
    comps = build_components(cfg)
    record = cfg.require("run", "record").values()
    trace = annealing_populations(comps.engine, comps.init, comps.dt, record)
    write_csv(out / "populations.csv",
              ["t", "P_ground", "P_e_rep", "P_e_sum"],
              [trace.times, trace.p_ground, trace.p_excited_rep,
               trace.p_excited_sum])
    _plot_from_csv(out / "populations.csv", out / "populations.svg",
                   ["P_ground", "P_e_rep", "P_e_sum"], xlabel="t",
                   ylabel="population", title="target-basis populations")
    _finish(out, cfg, args, started, {
        "max_trace_error": repr(float(np.abs(trace.trace - 1.0).max())),
    })
    print(f"annealing populations recorded at {len(record)} times; "
          f"final P_ground = {trace.p_ground[-1]:.4f}")
    return 0


def _cmd_rdm(args) -> int:
    cfg = _load_config(args)
    validate_config(cfg)
    if cfg.experiment != "rdm":
        raise ConfigError(f"config is for {cfg.experiment!r}, expected "
                          "'rdm'", section="experiment", key="kind")
    started = time.perf_counter()
    out = _out_dir(args, cfg)
    _check_horizon(cfg)
    comps = build_components(cfg)
    record = cfg.require("run", "record").values()
    times, rho = rdm_trajectory(comps.engine, comps.init, comps.dt, record)
    d = rho.shape[1]
    header = ["t"]
    cols = [times]
    for i in range(d):
        for j in range(d):
            header += [f"re_rho_{i}{j}", f"im_rho_{i}{j}"]
            cols += [rho[:, i, j].real, rho[:, i, j].imag]
    write_csv(out / "rho_t.csv", header, cols)
    diag = [f"re_rho_{i}{i}" for i in range(d)]
    _plot_from_csv(out / "rho_t.csv", out / "rho.svg", diag, xlabel="t",
                   ylabel="population", title="reduced density matrix diagonal")
    herm = float(max(np.abs(r - r.conj().T).max() for r in rho))
    tr = float(max(abs(np.trace(r) - 1.0) for r in rho))
    _finish(out, cfg, args, started, {
        "max_hermiticity_error": repr(herm),
        "max_trace_error": repr(tr),
    })
    print(f"density matrix recorded at {len(times)} times; "
          f"hermiticity residual {herm:.2e}, trace residual {tr:.2e}")
    return 0


def _validate_rows():
    """Oracle-versus-engine residual table.  Small instances, seconds."""
    rows = []
    rng = np.random.default_rng(7)

    def random_model(dim: int) -> SystemModel:
        a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal(
            (dim, dim))
        h = 0.5 * (a + a.conj().T)
        b = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal(
            (dim, dim))
        v = 0.5 * (b + b.conj().T)
        return SystemModel(dim=dim, V=DenseOperator(v), time_dependent=False,
                           _ham_at=lambda tau, m=DenseOperator(h): m)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExpansionWarning)
        for dim, K, n_max in ((2, 3, 2), (2, 5, 1), (4, 2, 2)):
            from .bath import BathSpec, OhmicCircular
            spec = BathSpec(OhmicCircular(zeta=0.3, nu=2.0), 3.0, 2.0, K)
            expansion = compute_coefficients(spec)
            space = build_space(K, n_max)
            model = random_model(dim)
            engine = ContourEngine(space, expansion, model)
            worst = 0.0
            for branch in (Branch.C1, Branch.C2):
                gen = assemble_generator(space, expansion, model, 0.37,
                                         branch)
                stack = rng.standard_normal(
                    (space.num_indices, dim)) + 1j * rng.standard_normal(
                        (space.num_indices, dim))
                lhs = engine.rhs_stack(stack, 0.37, branch.sign).ravel()
                rhs = gen.apply(stack.ravel())
                scale = max(1.0, float(np.abs(rhs).max()))
                worst = max(worst, float(np.abs(lhs - rhs).max()) / scale)
            rows.append((f"rhs_vs_generator_d{dim}_K{K}_N{n_max}",
                         worst, 1e-13))

    # zero-coupling contour: the full round trip is the identity map
    K = 2
    expansion = BathExpansion(Omega=3.0, K=K, c=np.zeros(K, complex),
                              eta=build_eta(K, 3.0),
                              phi_at_zero=np.array([1.0, 0.0]))
    space = build_space(K, 2)
    model = spin_boson(1.0)
    engine = ContourEngine(space, expansion, model)
    psi0 = np.array([1.0, 1.0]) / np.sqrt(2.0)
    plan = ContourPlan(t=1.0, dt=1e-3)
    traj = engine.run(plan, PureState(psi0))
    rows.append(("closed_contour_identity",
                 float(np.abs(traj.final.data[0] - psi0).max()), 1e-9))

    # commuting coupling against the exact decay factor
    from .bath import BathSpec, OhmicCircular
    from .models import pure_dephasing
    spec = BathSpec(OhmicCircular(zeta=0.1, nu=3.0), 3.0, 3.0, 8)
    expansion = compute_coefficients(spec)
    space = build_space(8, 4)
    model = pure_dephasing(1.0)
    engine = ContourEngine(space, expansion, model)
    t = 1.0
    times, rho = rdm_trajectory(
        engine, PureState(np.array([1.0, 1.0]) / np.sqrt(2.0)), 0.0125,
        np.array([0.0, t]))
    decay = dephasing_exact(spec, 0.5, t)
    # coherence rho_01 evolves as rho_01(0) * D(t) * e^{-i(E0-E1)t}
    h = model.hamiltonian_at(0.0).matrix
    expected = 0.5 * decay * np.exp(-1j * (h[0, 0] - h[1, 1]).real * t)
    rows.append(("dephasing_vs_exact",
                 float(abs(rho[1][0, 1] - expected)), 1e-4))

    # expansion fidelity on the shipped response bath
    cfg = preset("bath-fit-circular")
    spec = build_bath_spec(cfg)
    expansion = compute_coefficients(spec)
    err = reconstruction_error(spec, expansion, np.linspace(0.0, 2.0, 41))
    rows.append(("expansion_fidelity", err, 1e-4))
    return rows


def _cmd_validate(args) -> int:
    if args.config is not None:
        validate_config(parse_config_file(args.config))
    rows = _validate_rows()
    width = max(len(name) for name, _, _ in rows)
    ok = True
    print(f"{'check'.ljust(width)}  {'residual':>12}  {'threshold':>10}  "
          "status")
    for name, residual, threshold in rows:
        good = residual <= threshold
        ok = ok and good
        print(f"{name.ljust(width)}  {residual:12.3e}  {threshold:10.0e}  "
              f"{'pass' if good else 'FAIL'}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "validate.csv",
                  ["check", "residual", "threshold"],
                  [np.array([r[0] for r in rows], dtype=object),
                   np.array([r[1] for r in rows]),
                   np.array([r[2] for r in rows])])
    if not ok:
        raise NumericalError("one or more oracle checks exceeded threshold")
    return 0


def _cmd_preflight(args) -> int:
    cfg = _load_config(args)
    report = preflight(cfg)
    _check_horizon(cfg)
    for key, value in report.items():
        print(f"{key} = {value}")
    return 0


_HANDLERS = {
    "bath-fit": _cmd_bath_fit,
    "respond": _cmd_respond,
    "anneal": _cmd_anneal,
    "rdm": _cmd_rdm,
    "validate": _cmd_validate,
    "preflight": _cmd_preflight,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hseom",
        description="Hierarchical wave-function dynamics for a qubit or "
                    "spin system in a bosonic environment.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _HANDLERS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="path to the run configuration")
        p.add_argument("--out", help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="worker count recorded in the manifest; "
                            "execution is serial")
        p.add_argument("--deterministic", action="store_true",
                       help="fixed partitioning for bitwise-reproducible "
                            "tables")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"resource refusal: {exc}", file=sys.stderr)
        return 4
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except HseomError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
