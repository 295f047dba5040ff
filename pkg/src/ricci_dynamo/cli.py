"""Command-line scenario runner: ``ricci-dynamo <command> --config FILE [--out DIR]``.

Exit codes: 0 success, 1 failed invariant check, 2 configuration error,
3 numerical singularity (flow singularity, degenerate metric, blow-up).

JSON records print floats with 17 significant digits and carry a SHA-256 hash
of their own content. Wall time is reported on stderr and in ``timing.json``
so that the record itself is byte-identical across runs. ``RDL_SEED`` is
accepted and ignored: nothing here is random.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .energy import (
    DEFAULT_TOL,
    EnergyReport,
    classify,
    energy_rate,
    energy_rate_numeric,
    magnetic_energy,
    marginal_shear,
    variants_diverge,
)
from .errors import (
    FlowSingularity,
    InconsistentFrame,
    InvalidInput,
    NotEinstein,
    NumericalBlowup,
    SingularMetric,
)
from .geometry import EuclideanFlat, christoffel, einstein_fit, paper_symmetry_check, ricci
from .induction import evolve_B, fast_dynamo_operator
from .kinematics import (
    FlowDecomposition,
    PaperSteady,
    covariant_gradient,
    decompose,
    shear_eigensystem,
    tensor_projection,
    vorticity_magnitude,
)
from .numerics import QuadratureSpec
from .ricci_flow import default_probe, evolve, grid_ricci, lyapunov_spectrum, ricci_eigenvalues
from .scenario import ConfigError, Scenario, load_scenario
from .verification import run_suite

COMMANDS = ("geometry", "flow", "decompose", "growth", "energy", "classify", "verify")
VARIANT_FLAGS = {"eq27": "eq27", "eq29": "eq29chain"}


def _to_plain(obj):
    if isinstance(obj, dict):
        return {str(k): _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON: sorted keys, floats as 17 significant digits, non-finite as null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json_str(k)}: {dumps(obj[k], indent, _level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    return _json_str(str(obj))


def _json_str(s: str) -> str:
    return json.dumps(s)


def run_record(command: str, sc: Scenario, outputs: dict) -> dict:
    """Scenario echo + outputs + version, hashed over its canonical JSON."""
    body = _to_plain({"command": command, "version": __version__, "scenario": sc.raw,
                      "outputs": outputs})
    digest = hashlib.sha256(dumps(body).encode()).hexdigest()
    return {**body, "content_hash": digest}


def _g6(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, (bool, np.bool_, str)):
        return str(x)
    return format(float(x), ".6g")


def _table(rows) -> str:
    rows = [(str(k), v if isinstance(v, str) else _g6(v)) for k, v in rows]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def _matrix_rows(name, a):
    a = np.asarray(a, dtype=float)
    return [(f"{name}[{i + 1}]", "  ".join(f"{x: .6g}" for x in a[i])) for i in range(a.shape[0])]


def _probe(args, sc: Scenario, m):
    if args.probe is not None:
        try:
            p = np.array([float(s) for s in args.probe.split(",")])
        except ValueError:
            raise ConfigError("--probe", f"expected x,y,z, got {args.probe!r}") from None
        if p.shape != (3,):
            raise ConfigError("--probe", f"expected three coordinates, got {args.probe!r}")
        return p
    if sc.probe is not None:
        return sc.probe
    return default_probe(m)


def _need(sc: Scenario, attr: str, section: str):
    value = getattr(sc, attr)
    if value is None:
        raise ConfigError(section, f"this command needs a [{section}] section")
    return value


def _metric(sc: Scenario):
    return sc.metric if sc.metric is not None else EuclideanFlat()


def _local_region(p) -> QuadratureSpec:
    return QuadratureSpec(tuple(p - 0.05), tuple(p + 0.05), (3, 3, 3), "midpoint")


# commands: each returns (outputs dict, human rows, csv (header, rows) or None, exit code)

def cmd_geometry(sc: Scenario, args):
    m = _need(sc, "metric", "metric")
    p = _probe(args, sc, m)
    rep = ricci(m, p)
    region = sc.region or _local_region(p)
    fit = einstein_fit(m, region)
    lam = fit.lambda_hat if fit.residual < sc.einstein_tol else None
    v = sc.velocity if sc.velocity is not None else PaperSteady()
    sym = paper_symmetry_check(m, v, region, sc.symmetry_tol)
    out = {
        "metric": m.describe(), "probe": p, "metric_at_probe": m.g(p),
        "christoffel": christoffel(m, p), "ricci": rep.ricci, "scalar_curvature": rep.scalar,
        "lambda_hat_probe": rep.lambda_hat, "einstein_residual_probe": rep.residual,
        "einstein_fit": {"lambda_hat": fit.lambda_hat, "residual": fit.residual,
                         "worst_point": fit.point, **fit.extra},
        "einstein_constant": lam, "symmetry": sym.as_dict(),
    }
    rows = [("metric", m.family), ("probe", ", ".join(_g6(x) for x in p))]
    rows += _matrix_rows("R", rep.ricci)
    rows += [("scalar curvature", rep.scalar), ("lambda_hat", fit.lambda_hat),
             ("einstein residual", fit.residual),
             ("einstein", _g6(lam) if lam is not None else "not Einstein"),
             ("killing d_l g^l3 = 0", sym.killing_ok), ("v = e3", sym.flow_ok)]
    return out, rows, None, 0


def _grid_probe_lambdas(traj):
    q = traj.grid
    axes = tuple(q.axis_nodes(a)[0] for a in range(3))
    r = grid_ricci(traj.final_grid, axes)
    idx = tuple(int(np.argmin(np.abs(axes[a] - traj.probe[a]))) for a in range(3))
    g = traj.final_grid[idx]
    return np.sort(np.linalg.eigvals(np.linalg.solve(g, r[idx])).real)[::-1]


def cmd_flow(sc: Scenario, args):
    m = _need(sc, "metric", "metric")
    p = _probe(args, sc, m)
    traj = evolve(m, (sc.t0, sc.t1), sc.dt, probe=p, grid=sc.grid)
    header = ["t", "g11", "g12", "g13", "g22", "g23", "g33", "scale", "lambda1", "lambda2", "lambda3"]
    rows = []
    last_lams = None
    for k, t in enumerate(traj.times):
        g = traj.probe_metrics[k]
        comps = [g[0, 0], g[0, 1], g[0, 2], g[1, 1], g[1, 2], g[2, 2]]
        if traj.scales is not None:
            lams = ricci_eigenvalues(traj.metric_at(k), p).eigenvalues
            scale = traj.scales[k]
        else:
            lams = _grid_probe_lambdas(traj) if k == len(traj.times) - 1 else [None] * 3
            scale = None
        last_lams = lams
        rows.append([t, *comps, scale, *lams])
    spec = lyapunov_spectrum(ricci_eigenvalues(m, p))
    out = {
        "metric": m.describe(), "probe": p, "dt": traj.dt, "steps": len(traj.times) - 1,
        "final_time": traj.times[-1], "final_metric_at_probe": traj.probe_metrics[-1],
        "final_scale": None if traj.scales is None else traj.scales[-1],
        "closed_form_final_scale": None if traj.scales is None else traj.closed_form_scale()[-1],
        "einstein_constant": traj.einstein_constant,
        "initial_lyapunov": {"eigenvalues": spec.eigenvalues, "exponents": spec.exponents,
                             "sign_condition": list(spec.sign_condition)},
        "final_ricci_eigenvalues": last_lams,
    }
    human = [("metric", m.family), ("steps", len(traj.times) - 1), ("final t", traj.times[-1]),
             ("final scale", out["final_scale"]), ("closed form", out["closed_form_final_scale"])]
    human += [(f"lambda{i + 1}(t0)", v) for i, v in enumerate(spec.eigenvalues)]
    return out, human, (header, rows), 0


def _decomposition(sc: Scenario, args):
    m = _metric(sc)
    v = _need(sc, "velocity", "velocity")
    p = _probe(args, sc, m)
    grad = covariant_gradient(v, m, p)
    return m, v, p, decompose(grad, m, p)


def cmd_decompose(sc: Scenario, args):
    m, v, p, d = _decomposition(sc, args)
    vals, vecs = shear_eigensystem(d.shear, d.metric)
    recon = float(np.max(np.abs(d.reconstruct() - d.gradient)))
    out = {
        "metric": m.describe(), "velocity": v.describe(), "probe": p,
        "gradient": d.gradient, "vorticity": d.vorticity, "shear": d.shear, "expansion": d.expansion,
        "shear_eigenvalues": vals, "shear_eigenvectors": vecs,
        "vorticity_magnitude": vorticity_magnitude(d.vorticity, d.metric),
        "reconstruction_residual": recon,
    }
    rows = [("metric", m.family), ("velocity", v.family)]
    rows += _matrix_rows("grad", d.gradient) + _matrix_rows("Omega", d.vorticity)
    rows += _matrix_rows("sigma", d.shear)
    rows += [("theta", d.expansion), ("|Omega|", out["vorticity_magnitude"]),
             ("reconstruction", recon)]
    return out, rows, None, 0


def cmd_growth(sc: Scenario, args):
    m = _metric(sc)
    v = _need(sc, "velocity", "velocity")
    b0 = _need(sc, "field", "field")
    p = _probe(args, sc, m) if (args.probe or sc.probe is not None or sc.metric is not None) else np.zeros(3)
    tr = evolve_B(b0, v, m, sc.frame, (sc.t0, sc.t1), sc.dt, p=p)
    d = decompose(covariant_gradient(v, m, p, sc.t0), m, p, sc.t0)
    residual = None
    if np.all(tr.norms > 0):
        residual = fast_dynamo_operator(tr.times, tr.B, d, B=b0).max_relative
    with_vort = args.with_vorticity or sc.include_vorticity
    pred = tr.predicted.get("with_vorticity" if with_vort else "without_vorticity")
    out = {
        "metric": m.describe(), "velocity": v.describe(), "probe": p, "B0": b0,
        "wavevector": sc.wavevector, "include_vorticity": with_vort,
        "predicted": pred, "predicted_with_vorticity": tr.predicted.get("with_vorticity"),
        "predicted_without_vorticity": tr.predicted.get("without_vorticity"),
        "empirical": tr.growth_rate, "operator_residual": residual, "final_B": tr.B[-1],
    }
    running = tr.running_rate()
    rows = [[t, *b, n, r] for t, b, n, r in zip(tr.times, tr.B, tr.norms, running)]
    human = [("velocity", v.family), ("predicted (with vorticity)", out["predicted_with_vorticity"]),
             ("predicted (without vorticity)", out["predicted_without_vorticity"]),
             ("empirical", tr.growth_rate), ("operator residual", residual)]
    return out, human, (["t", "B1", "B2", "B3", "normB", "gamma_running"], rows), 0


def _scalars(sc: Scenario):
    e = sc.energy
    try:
        vals = {k: float(e.get(k, 0.0)) for k in ("sigma", "omega", "theta", "lambda")}
        tol = float(e.get("tol", DEFAULT_TOL))
    except (TypeError, ValueError) as exc:
        raise ConfigError("energy", f"scalar inputs must be numbers: {exc}") from None
    return vals, tol


def _marginal_outputs(sc: Scenario):
    vals, tol = _scalars(sc)
    om, th, lam = vals["omega"], vals["theta"], vals["lambda"]
    sig_tensor = marginal_shear(om, th, lam)
    b = sc.field if sc.field is not None else np.array([1.0, 0.0, 0.0])
    sigma = tensor_projection(sig_tensor, b)
    region = sc.region or QuadratureSpec.cube(0.0, 1.0, 4)
    flat = EuclideanFlat()
    d = FlowDecomposition.from_parts(sig_tensor, th)
    eps = magnetic_energy(b, flat, region)
    r29 = energy_rate(d, b, flat, region, variant="eq29chain", einstein_constant=lam,
                      vorticity_scalar=om)
    r27 = energy_rate(d, b, flat, region, variant="eq27", ricci=lam * np.eye(3))
    verdict = classify(sigma, om, th, lam, tol)
    return eps, r27, r29, None, verdict, region, lam, {"marginal_shear": sig_tensor}


def cmd_energy(sc: Scenario, args):
    variant = VARIANT_FLAGS[args.variant]
    e = sc.energy
    flags = {}
    if bool(e.get("marginal", False)):
        eps, r27, r29, rnum, verdict, region, lam, extra = _marginal_outputs(sc)
        flags["marginal_scenario"] = True
    elif sc.velocity is None and sc.field is None:
        vals, tol = _scalars(sc)
        verdict = classify(vals["sigma"], vals["omega"], vals["theta"], vals["lambda"], tol)
        out = {"epsilon": None, "rate_eq27": None, "rate_eq29": None, "rate_numeric": None,
               "variant": variant, "rate": None, "variant_divergence": False, **verdict.as_dict()}
        rows = [("verdict", verdict.classification), ("margin", verdict.margin), ("tol", verdict.tol)]
        return out, rows, None, 0
    else:
        m = sc.metric = _metric(sc)
        v = _need(sc, "velocity", "velocity")
        b = _need(sc, "field", "field")
        region = _need(sc, "region", "region")
        _, tol = _scalars(sc)
        fit = einstein_fit(m, region, sc.t0)
        lam = fit.lambda_hat if fit.residual < sc.einstein_tol else None
        if lam is None and "lambda" in e:
            lam = float(e["lambda"])
            flags["lambda_from_config"] = True
        eps = magnetic_energy(b, m, region, sc.t0)
        r27 = energy_rate(v, b, m, region, sc.t0, variant="eq27")
        r29 = None
        if lam is not None:
            r29 = energy_rate(v, b, m, region, sc.t0, variant="eq29chain", einstein_constant=lam,
                              vorticity_scalar=e.get("omega"))
        else:
            flags["not_einstein"] = True
        rnum = None
        if bool(e.get("numeric", True)):
            h = float(e.get("h", 1e-3))
            rnum = energy_rate_numeric(sc, h=h)
        p = _probe(args, sc, m)
        d = decompose(covariant_gradient(v, m, p, sc.t0), m, p, sc.t0)
        sigma = tensor_projection(d.shear, b, d.metric)
        omega = float(e.get("omega", tensor_projection(d.vorticity, b, d.metric)))
        verdict = classify(sigma, omega, d.expansion, 0.0 if lam is None else lam, tol)
        extra = {"probe": p, "einstein_fit_residual": fit.residual}
    diverge = variants_diverge(r27, r29, eps)
    rep = EnergyReport(eps, r27, r29, rnum, region, lam, diverge, flags)
    chosen = r27 if variant == "eq27" else r29
    out = {**rep.as_dict(), **verdict.as_dict(), "variant": variant, "rate": chosen, **extra}
    rows = [("epsilon", eps), ("rate_eq27", r27), ("rate_eq29", r29), ("rate_numeric", rnum),
            ("variant divergence", diverge), ("margin", verdict.margin),
            ("verdict", verdict.classification)]
    return out, rows, None, 0


def cmd_classify(sc: Scenario, args):
    e = sc.energy
    vals, tol = _scalars(sc)
    sigma = vals["sigma"]
    if bool(e.get("marginal", False)):
        b = sc.field if sc.field is not None else np.array([1.0, 0.0, 0.0])
        sigma = tensor_projection(marginal_shear(vals["omega"], vals["theta"], vals["lambda"]), b)
    verdict = classify(sigma, vals["omega"], vals["theta"], vals["lambda"], tol)
    rows = [("sigma", sigma), ("omega", vals["omega"]), ("theta", vals["theta"]),
            ("lambda", vals["lambda"]), ("margin", verdict.margin), ("verdict", verdict.classification)]
    return verdict.as_dict(), rows, None, 0


def cmd_verify(sc: Scenario, args):
    cfg = sc.verify
    fault = cfg.get("inject_fault")
    if fault in ("", "none", False):
        fault = None
    suite = cfg.get("suite", "all")
    modules = None if suite == "all" else ([suite] if isinstance(suite, str) else list(suite))
    try:
        results = run_suite(fault, modules)
    except ValueError as exc:
        raise ConfigError("verify.inject_fault", str(exc)) from None
    passed = all(r.passed for r in results)
    out = {"checks": [r.as_dict() for r in results], "passed": passed, "inject_fault": fault}
    rows = [(r.name, f"{'PASS' if r.passed else 'FAIL'}  {_g6(r.residual)} (tol {_g6(r.tolerance)})")
            for r in results]
    return out, rows, None, 0 if passed else 1


HANDLERS = {
    "geometry": cmd_geometry, "flow": cmd_flow, "decompose": cmd_decompose, "growth": cmd_growth,
    "energy": cmd_energy, "classify": cmd_classify, "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ricci-dynamo", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="scenario TOML file")
        sp.add_argument("--out", help="directory for record.json, CSV trajectories and timing.json")
        sp.add_argument("--variant", choices=sorted(VARIANT_FLAGS), default="eq27",
                        help="energy-rate variant reported as 'rate'")
        sp.add_argument("--with-vorticity", action="store_true",
                        help="include the vorticity projection in the predicted growth rate")
        sp.add_argument("--probe", help="evaluation point x,y,z")
        sp.add_argument("--json", action="store_true", help="print the JSON record instead of a table")
    return ap


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if x is None else format(float(x), ".17g") for x in row])


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        sc = load_scenario(args.config)
        outputs, rows, table, code = HANDLERS[args.command](sc, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (InvalidInput, NotEinstein, InconsistentFrame) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (FlowSingularity, SingularMetric, NumericalBlowup) as exc:
        print(str(exc), file=sys.stderr)
        return 3
    wall = time.perf_counter() - start
    record = run_record(args.command, sc, outputs)
    text = dumps(record)
    print(text if args.json else _table(rows))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "record.json").write_text(text + "\n")
        (out / "timing.json").write_text(dumps({"command": args.command, "wall_time_s": wall}) + "\n")
        if table is not None:
            _write_csv(out / f"{args.command}.csv", *table)
    print(f"wall time {wall:.3f} s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
