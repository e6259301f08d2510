"""Command line runner for the experiments.

Every subcommand reads one JSON config (``--config``)::

    {
      "schema_version": 1,
      "seed": 0,
      "map": {"family": "rational", "numerator": [[-2, 0], [0, 0], [1, 0]]},
      "pullback": {"seed_point": "random", "k": 14, "max_atoms": 16384}
    }

and writes one JSON document (or CSV table) to ``--out`` or stdout.  The
section named after the subcommand holds its parameters; see README.md for
the full schema.  Exit status is 0 unless a stage raised; failed checks are
reported in the output, not through the exit status.
"""

import argparse
import datetime
import sys

import numpy as np

from . import __version__, harmonics, sphere, stats
from .io import (ConfigError, build_map, get_float, get_int, get_list, load_config, load_measure,
                 measure_to_csv, measure_to_json, parse_point, report_to_json, rows_to_csv)
from .measures import DiscreteMeasure, PullbackConfig, pullback_sequence

SUBCOMMANDS = ("pullback", "verify", "capacity", "deviation", "exceptional", "mixing")


def _section(cfg, name):
    sec = cfg.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(name, "expected an object")
    return sec


def _pullback_config(sec, path, seed, threads):
    strategy = sec.get("prune_strategy", "weight_resample")
    if strategy not in ("none", "weight_resample"):
        raise ConfigError(f"{path}.prune_strategy", f"expected 'none' or 'weight_resample', got {strategy!r}")
    return PullbackConfig(max_atoms=get_int(sec, "max_atoms", path, 1 << 14, minimum=1),
                          prune_strategy=strategy, seed=seed, threads=threads)


def _dictionary(f, sec, path):
    L = get_int(sec, "dictionary_degree", path, 8 if f.dimension == 2 else 4, minimum=1)
    return harmonics.harmonic_dictionary(f.dimension, L)


def _metadata(args, cfg):
    return {
        "version": __version__,
        "subcommand": args.command,
        "seed": cfg["seed"],
        # excluded from the determinism contract
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


def run_pullback(cfg, seed, threads):
    f = build_map(_require_map(cfg))
    sec = _section(cfg, "pullback")
    k = get_int(sec, "k", "pullback", minimum=0)
    a = parse_point(sec.get("seed_point", "random"), f.dimension, seed, "pullback.seed_point")
    config = _pullback_config(sec, "pullback", seed, threads)
    snaps = set(get_list(sec, "snapshots", "pullback", [k], kind=int))
    D = _dictionary(f, sec, "pullback")
    integrals = []
    snapshots = {}
    mu = None
    for level, mu in enumerate(pullback_sequence(f, DiscreteMeasure.dirac(a), k, config)):
        integrals.append(D.integrals(mu))
        if level in snaps and level != k:
            snapshots[str(level)] = mu
    integrals = np.array(integrals)
    dev = np.max(np.abs(integrals - integrals[-1]) / (1 + D.grad_sup), axis=1)
    hi = max(1, k - 3)
    exponent = stats.fit_decay(np.arange(1, hi + 1), dev[1 : hi + 1]) if k >= 2 else float("nan")
    result = {
        "measure": mu,
        "snapshots": snapshots,
        "convergence": {
            "deviations": [[i, float(v)] for i, v in enumerate(dev)],
            "fitted_exponent": exponent,
            "bound_exponent": float(np.log(f.degree) / f.dimension),
        },
        "total_mass": float(mu.weights.sum()),
        "atoms": len(mu),
    }
    m = sec.get("moments")
    if m is not None:
        if f.dimension != 2:
            raise ConfigError("pullback.moments", "moments of the real part need S^2")
        m = get_int(sec, "moments", "pullback", minimum=1)
        z, inf = mu.chart()
        x = np.where(inf, 0.0, np.nan_to_num(z.real))
        result["moments"] = [[j, float(x**j @ mu.weights)] for j in range(1, m + 1)]
    return result


def _require_map(cfg):
    if "map" not in cfg:
        raise ConfigError("map", "missing required field")
    return cfg["map"]


def _measure_from_section(f, sec, path, seed, threads):
    if "measure_path" in sec:
        return load_measure(sec["measure_path"]), None
    kind = sec.get("measure", "pullback")
    if kind == "circle":
        return stats.uniform_circle_measure(get_int(sec, "circle_points", path, 4096, minimum=1)), None
    if kind != "pullback":
        raise ConfigError(f"{path}.measure", f"expected 'pullback' or 'circle', got {kind!r}")
    k = get_int(sec, "k", path, minimum=0)
    a = parse_point(sec.get("seed_point", "random"), f.dimension, seed, f"{path}.seed_point")
    config = _pullback_config(sec, path, seed, threads)
    mu = None
    for mu in pullback_sequence(f, DiscreteMeasure.dirac(a), k, config):
        pass
    return mu, a


def run_verify(cfg, seed, threads):
    f = build_map(_require_map(cfg))
    sec = _section(cfg, "verify")
    stage = "measure"
    out = {"stages": {}}
    try:
        mu, a = _measure_from_section(f, sec, "verify", seed, threads)
        D = _dictionary(f, sec, "verify")
        radii = get_list(sec, "radii", "verify", [0.1, 0.03, 0.01])
        thresholds = {"balance": 1e-2, "invariance": 1e-2, "atom_mass": 1e-2, "hausdorff": 5e-2}
        thresholds.update({k: get_float(sec.get("thresholds", {}), k, "verify.thresholds", v)
                           for k, v in thresholds.items()})
        stage = "balance"
        bal = stats.balance_residual(f, mu, D)
        stage = "invariance"
        inv = stats.invariance_residual(f, mu, D)
        stage = "atom_scan"
        scan = stats.atom_scan(mu, radii)
        out["stages"]["balance"] = {"residual": bal, "pass": bal <= thresholds["balance"]}
        out["stages"]["invariance"] = {"residual": inv, "pass": inv <= thresholds["invariance"]}
        out["stages"]["atom_scan"] = {"scan": scan, "pass": scan[-1][1] < thresholds["atom_mass"]}
        if f.dimension == 2 and sec.get("julia", True):
            stage = "support"
            from .julia import julia_reference

            ref = julia_reference(f)
            h = stats.support_vs_julia(mu, ref)
            out["stages"]["support"] = {"hausdorff": h, "reference_points": len(ref),
                                        "pass": h < thresholds["hausdorff"]}
        mix = sec.get("mixing")
        if mix is not None:
            stage = "mixing"
            out["stages"]["mixing"] = _mixing(f, mu, D, mix, "verify.mixing")
        stuck = float(stats.ball_masses(mu, 1e-6).max())
        from .measures import looks_exceptional

        exceptional = bool(a is not None and looks_exceptional(f, a))
        out["stuck_atom_mass"] = stuck
        out["seed_exceptional"] = exceptional
        out["thresholds"] = thresholds
        out["status"] = "FAILED-CONVERGENCE" if (stuck >= stats.STUCK_MASS or exceptional) else "OK"
    except ConfigError:
        raise
    except Exception as err:
        err.stage = stage
        raise
    return out


def _mixing(f, mu, D, sec, path):
    kind = sec.get("dictionary", "harmonic")
    if kind == "chebyshev":
        D = harmonics.chebyshev_dictionary(8)
    elif kind != "harmonic":
        raise ConfigError(f"{path}.dictionary", f"expected 'harmonic' or 'chebyshev', got {kind!r}")
    phi = sec.get("phi", D.ids[0])
    psi = sec.get("psi", phi)
    for name, v in (("phi", phi), ("psi", psi)):
        if v not in D.ids:
            raise ConfigError(f"{path}.{name}", f"unknown test function {v!r}")
    rep = stats.mixing_correlation(f, mu, phi, psi, get_int(sec, "k_max", path, 10, minimum=0),
                                   dictionary=D,
                                   invariance_threshold=get_float(sec, "invariance_threshold", path, 1e-3))
    return rep.to_dict()


def run_mixing(cfg, seed, threads):
    f = build_map(_require_map(cfg))
    sec = _section(cfg, "mixing")
    mu, _ = _measure_from_section(f, sec, "mixing", seed, threads)
    return _mixing(f, mu, _dictionary(f, sec, "mixing"), sec, "mixing")


def _points_from_config(desc, field):
    from .potential import grid_cell_radius

    if not isinstance(desc, dict):
        raise ConfigError(field, "expected an object")
    kind = desc.get("kind")
    if kind == "circle":
        n = get_int(desc, "count", field, minimum=2)
        return sphere.circle_points(n), None
    if kind == "fibonacci":
        n = get_int(desc, "count", field, minimum=2)
        return sphere.fibonacci_sphere(n), grid_cell_radius(n)
    if kind == "chart":
        from .io import _complex_list

        z = np.array(_complex_list(desc.get("values"), f"{field}.values"))
        return sphere.stereo_lift(z), None
    if kind == "coords":
        try:
            return sphere.as_points(desc.get("values")), None
        except (TypeError, ValueError) as err:
            raise ConfigError(f"{field}.values", str(err)) from None
    raise ConfigError(f"{field}.kind", f"expected circle, fibonacci, chart or coords, got {kind!r}")


def run_capacity(cfg, seed, threads):
    from .potential import equilibrium_weights

    sec = _section(cfg, "capacity")
    if "points" not in sec:
        raise ConfigError("capacity.points", "missing required field")
    pts, rho = _points_from_config(sec["points"], "capacity.points")
    if "cell_radius" in sec:
        rho = get_float(sec, "cell_radius", "capacity", positive=True)
    rep = equilibrium_weights(pts, tolerance=get_float(sec, "tolerance", "capacity", 1e-10, positive=True),
                              cell_radius=rho)
    out = rep.to_dict()
    w = rep.weights
    out["weight_ratio"] = float(w.max() / w.min()) if w.min() > 0 else float("inf")
    return out


def run_deviation(cfg, seed, threads):
    from .potential import deviation_sweep

    f = build_map(_require_map(cfg))
    sec = _section(cfg, "deviation")
    eps = get_list(sec, "epsilons", "deviation", [0.05, 0.1])
    if any(e <= 0 for e in eps):
        raise ConfigError("deviation.epsilons", "must be positive")
    levels = get_list(sec, "levels", "deviation", list(range(11)), kind=int)
    if any(k < 0 for k in levels):
        raise ConfigError("deviation.levels", "must be >= 0")
    n = get_int(sec, "grid_size", "deviation", 512, minimum=2)
    if f.dimension == 2:
        grid = sphere.fibonacci_sphere(n)
    else:
        grid = sphere.sample_uniform(n, np.random.SeedSequence(seed, spawn_key=(6,)), f.dimension)
    D = harmonics.harmonic_dictionary(f.dimension, get_int(sec, "max_degree", "deviation", 4, minimum=1))
    ids = sec.get("test_functions")
    if ids is not None:
        unknown = [i for i in ids if i not in D.ids]
        if unknown:
            raise ConfigError("deviation.test_functions", f"unknown ids {unknown}")
        D = D.subset(ids=set(ids))
    reports = deviation_sweep(f, D, eps, levels, grid)
    rows = [r.to_dict() for r in reports]
    for r in rows:
        r.pop("flagged")
    return {"reports": rows, "all_within_bound": all(r.within_bound for r in reports),
            "distortion": f.distortion, "degree": f.degree, "dimension": f.dimension}


def run_exceptional(cfg, seed, threads):
    f = build_map(_require_map(cfg))
    sec = _section(cfg, "exceptional")
    found = stats.exceptional_scan(f, depth=get_int(sec, "depth", "exceptional", 8, minimum=1),
                                   bound=get_int(sec, "bound", "exceptional", 10, minimum=1),
                                   max_period=get_int(sec, "max_period", "exceptional", 3, minimum=1))
    out = {"points": found.tolist(),
           "note": "direct search over low-period points and the poles; other exceptional points are not excluded"}
    if f.dimension == 2:
        out["chart"] = [("inf" if sphere.to_chart(p) is sphere.INF else [sphere.to_chart(p).real, sphere.to_chart(p).imag])
                        for p in found]
    return out


RUNNERS = {
    "pullback": run_pullback,
    "verify": run_verify,
    "capacity": run_capacity,
    "deviation": run_deviation,
    "exceptional": run_exceptional,
    "mixing": run_mixing,
}


def _to_csv(command, result):
    if command == "pullback":
        return measure_to_csv(result["measure"])
    if command == "deviation":
        keys = ["test_function", "epsilon", "level", "flagged_count", "capacity", "bound", "within_bound"]
        return rows_to_csv([keys] + [[r[k] for k in keys] for r in result["reports"]])
    if command == "mixing":
        return rows_to_csv([("k", "correlation")] + result["correlations"])
    if command == "capacity":
        n = len(result["points"][0])
        return rows_to_csv([[f"x{j}" for j in range(n)] + ["weight"]]
                           + [list(p) + [w] for p, w in zip(result["points"], result["weights"])])
    raise ConfigError("--format", f"csv output is not available for {command!r}")


def _serialize(command, result, fmt, meta):
    if fmt == "csv":
        return _to_csv(command, result)
    if command == "pullback":
        body = dict(result)
        body["measure"] = "@measure"
        body["snapshots"] = {k: "@snap" + k for k in result["snapshots"]}
        text = report_to_json({"metadata": meta, **body})
        # splice the measure tables in verbatim so they keep the record layout
        text = text.replace('"@measure"', measure_to_json(result["measure"]).strip())
        for k, mu in result["snapshots"].items():
            text = text.replace(f'"@snap{k}"', measure_to_json(mu).strip())
        return text
    return report_to_json({"metadata": meta, **result})


def convergence_path(out):
    """Where ``pullback --format csv`` puts the ``(k, deviation)`` table."""
    stem, dot, ext = out.rpartition(".")
    return f"{stem}_convergence.{ext}" if dot else f"{out}_convergence.csv"


def build_parser():
    parser = argparse.ArgumentParser(prog="equimeasure", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, help="root seed, overrides the config")
        p.add_argument("--threads", type=int, default=1, help="worker threads for preimage solving")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0 or seed >= 2**64:
            raise ConfigError("seed", f"expected an integer in [0, 2^64), got {seed!r}")
        if args.threads < 1:
            raise ConfigError("--threads", "must be >= 1")
        cfg["seed"] = seed
        result = RUNNERS[args.command](cfg, seed, args.threads)
        meta = _metadata(args, cfg)
        text = _serialize(args.command, result, args.format, meta)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except Exception as err:
        stage = getattr(err, "stage", None)
        where = f" in stage '{stage}'" if stage else ""
        print(f"error{where}: {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        if args.command == "pullback" and args.format == "csv":
            rows = [("k", "deviation")] + result["convergence"]["deviations"]
            with open(convergence_path(args.out), "w") as fh:
                fh.write(rows_to_csv(rows))
    else:
        sys.stdout.write(text)
    return 0
