"""Command-line experiment harness.

Subcommands: ``simulate`` (single runs, one per configured seed),
``ensemble`` (high-probability globality experiment), ``goodset``
(survival-probability estimate), and ``verify`` (named probe batteries).

Config files use a flat ``key = value`` grammar with ``[section]`` headers
and ``#`` comments.  Outputs are a fixed-column CSV time series per run and
JSON-lines summaries; identical config and seed reproduce byte-identical
files.  ``HYDROSTAT_THREADS`` caps ensemble parallelism.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, dynamics, gevrey, initial_data, picard, stochastic
from .dynamics import RadiusSchedule, RunRecord, SimConfig
from .gevrey import GevreyParams
from .stochastic import GoodSetParams

SCHEMA_VERSION = 1
CSV_HEADER = "t,W_t,phi,gevrey_norm_U,l2_norm_U,gevrey_norm_V"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 10
EXIT_RADIUS = 11
EXIT_GOODSET = 12

STATUS_EXIT_CODES = {
    dynamics.STATUS_COMPLETED: EXIT_OK,
    dynamics.STATUS_BLOWUP: EXIT_BLOWUP,
    dynamics.STATUS_RADIUS_EXHAUSTED: EXIT_RADIUS,
    dynamics.STATUS_GOODSET_EXIT: EXIT_GOODSET,
}

VERIFY_SUITES = ("cancellation", "exponents", "lemma-a1", "nonlinear-estimate",
                 "picard-consistency", "kernel-bound")


class ConfigError(ValueError):
    """Invalid configuration; message carries the offending section.key."""


# ---------------------------------------------------------------- config ---

class _Section:
    """Typed accessor for one config section with section.key error messages."""

    def __init__(self, parser: configparser.ConfigParser, name: str):
        self.name = name
        self.raw = dict(parser[name]) if parser.has_section(name) else {}

    def _get(self, key, default, conv, required):
        if key not in self.raw:
            if required:
                raise ConfigError(f"{self.name}.{key}: required key is missing")
            return default
        text = self.raw[key]
        try:
            return conv(text)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{self.name}.{key}: {exc}") from exc

    def get_float(self, key, default=None, required=False) -> float:
        return self._get(key, default, float, required)

    def get_int(self, key, default=None, required=False) -> int:
        return self._get(key, default, lambda t: int(t, 0), required)

    def get_str(self, key, default=None, required=False) -> str:
        return self._get(key, default, str, required)

    def get_ints(self, key, default=None, required=False):
        return self._get(key, default, lambda t: tuple(int(x) for x in t.split()),
                         required)


def load_config(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",),
                                       comment_prefixes=("#",))
    parser.optionxform = str  # keys are case-sensitive (N, T, ...)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parser


def _build_radius(sec: _Section, nu: float, v0_norm: float,
                  c_sigma: float | None) -> RadiusSchedule:
    kind = sec.get_str("radius_kind", "constant")
    eta = sec.get_float("eta", 0.0)
    if kind == "linear":
        return RadiusSchedule.linear(sec.get_float("alpha", required=True),
                                     sec.get_float("beta", required=True), eta=eta)
    if kind == "constant":
        return RadiusSchedule.constant(sec.get_float("alpha", required=True), eta=eta)
    if kind == "damping":
        if c_sigma is None:
            raise ConfigError("sim.c_sigma: required for the damping radius schedule")
        return RadiusSchedule.damping(
            phi0=sec.get_float("phi0", required=True),
            alpha=sec.get_float("alpha", required=True),
            beta=sec.get_float("beta", required=True),
            nu=nu, c_sigma=c_sigma, v0_norm=v0_norm, eta=eta)
    raise ConfigError(f"sim.radius_kind: unknown kind {kind!r}")


def _resolve_c_sigma(sec: _Section, sigma: float) -> float | None:
    text = sec.get_str("c_sigma", None)
    if text is None:
        return None
    if text.strip() == "estimate":
        est = analysis.estimate_c_sigma(sigma, N=8, n_samples=64, seed=2026)
        return est.value
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"sim.c_sigma: {exc}") from exc


def _build_initial_data(parser: configparser.ConfigParser, N: int):
    sec = _Section(parser, "initial_data")
    family = sec.get_str("family", "zero")
    if family not in initial_data.FAMILIES:
        raise ConfigError(f"initial_data.family: unknown family {family!r}")
    try:
        return _make_initial_data(sec, family, N)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"initial_data: {exc}") from exc


def _make_initial_data(sec: _Section, family: str, N: int):
    u0 = initial_data.make_initial_data(
        family, N,
        amplitude=sec.get_float("amplitude", 1.0),
        seed=sec.get_int("seed", 0),
        sigma=sec.get_float("sigma", 2.0),
        s=sec.get_float("s", 1.0),
        radius=sec.get_float("radius", 0.3),
        poly=sec.get_float("poly", 1.0),
        mode=sec.get_ints("mode", (1, 0, 1)),
        mode_b=sec.get_ints("mode_b", (0, 1, 1)),
        ratio=sec.get_float("ratio", 1.0),
        component=sec.get_int("component", 0),
        component_b=sec.get_int("component_b", 1),
    )
    target = sec.get_float("normalize_target", None)
    if target is not None:
        params = GevreyParams(sec.get_float("normalize_sigma", required=True),
                              sec.get_float("normalize_s", 1.0),
                              sec.get_float("normalize_phi", 0.0))
        u0 = initial_data.normalize_to(u0, target, params,
                                       sec.get_str("normalize_kind", "Gevrey"))
    return u0


def build_sim(parser: configparser.ConfigParser, seed_override=None):
    """SimConfig plus initial data from a parsed config."""
    sec = _Section(parser, "sim")
    noise = sec.get_str("noise", required=True)
    nu = sec.get_float("nu", required=True)
    sigma = sec.get_float("sigma", required=True)
    N = sec.get_int("N", required=True)
    u0 = _build_initial_data(parser, N)
    c_sigma = _resolve_c_sigma(sec, sigma)
    try:
        v0_norm = gevrey.norm(u0, "Gevrey",
                              GevreyParams(sigma, 1.0, sec.get_float("phi0", 0.0)))
        radius = _build_radius(sec, nu, v0_norm, c_sigma)
        goodset = None
        if noise == "diffusion" and radius.kind == "linear":
            goodset = GoodSetParams(alpha=radius.alpha, beta=radius.beta, nu=nu)
        cfg = SimConfig(
            noise=noise,
            nu=nu,
            s=sec.get_float("s", required=True),
            sigma=sigma,
            radius=radius,
            n_modes=N,
            dt=sec.get_float("dt", required=True),
            horizon=sec.get_float("T", required=True),
            goodset=goodset,
            blowup_factor=sec.get_float("blowup_factor", 1e8),
            seed=seed_override if seed_override is not None else sec.get_int("seed", 0),
            linear_only=sec.get_str("linear_only", "false").lower() == "true",
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"sim: {exc}") from exc
    return cfg, u0


# --------------------------------------------------------------- writers ---

def _ensure_outdir(path_text) -> Path:
    out = Path(path_text)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output.dir: cannot create {out}: {exc}") from exc
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(record: RunRecord, path: Path) -> None:
    lines = [CSV_HEADER]
    for i in range(len(record.times)):
        gv_val = record.gevrey_norm_v[i]
        lines.append(",".join([
            _fmt(record.times[i]),
            _fmt(record.w_values[i]),
            _fmt(record.phi[i]),
            _fmt(record.gevrey_norm_u[i]),
            _fmt(record.l2_norm_u[i]),
            "" if math.isnan(gv_val) else _fmt(gv_val),
        ]))
    path.write_text("\n".join(lines) + "\n")


def summary_line(record: RunRecord) -> str:
    return json.dumps(record.summary(), sort_keys=True)


# ----------------------------------------------------------- subcommands ---

def cmd_simulate(args) -> int:
    parser = load_config(args.config)
    sec = _Section(parser, "sim")
    name = _Section(parser, "experiment").get_str("name", "run")
    seeds = [args.seed] if args.seed is not None else \
        list(sec.get_ints("seeds", None) or [sec.get_int("seed", 0)])
    out = _ensure_outdir(args.out or _Section(parser, "output").get_str("dir", "out"))

    worst = EXIT_OK
    summaries = []
    for seed in seeds:
        cfg, u0 = build_sim(parser, seed_override=seed)
        record = dynamics.run(u0, cfg, name=f"{name}_seed{seed}")
        write_csv(record, out / f"{name}_seed{seed}.csv")
        summaries.append(summary_line(record))
        worst = max(worst, STATUS_EXIT_CODES[record.status])
        if not args.quiet:
            print(f"{name} seed={seed}: {record.status} at t={record.t_final:.6g} "
                  f"(max norm {record.max_gevrey_norm:.6g})")
    (out / f"{name}_summary.jsonl").write_text("\n".join(summaries) + "\n")
    return worst


def cmd_ensemble(args) -> int:
    parser = load_config(args.config)
    ens = _Section(parser, "ensemble")
    name = _Section(parser, "experiment").get_str("name", "ensemble")
    epsilon = ens.get_float("epsilon", required=True)
    n_paths = args.paths or ens.get_int("paths", required=True)
    if n_paths < 1:
        raise ConfigError("ensemble.paths: must be at least 1")
    out = _ensure_outdir(args.out or _Section(parser, "output").get_str("dir", "out"))

    cfg, u0 = build_sim(parser, seed_override=args.seed)
    c_star_text = ens.get_str("c_star", None)
    if c_star_text is None:
        c_star = None
    elif c_star_text.strip() == "estimate":
        c_star = analysis.estimate_c_star(cfg.sigma, cfg.s, N=8, n_samples=64,
                                          seed=2026).value
    else:
        try:
            c_star = float(c_star_text)
        except ValueError as exc:
            raise ConfigError(f"ensemble.c_star: {exc}") from exc
    c_sigma = _resolve_c_sigma(_Section(parser, "sim"), cfg.sigma)
    try:
        result = dynamics.run_global_experiment(
            u0, epsilon, cfg, n_paths, seed=cfg.seed,
            c_star=c_star, c_sigma=c_sigma)
    except dynamics.ThresholdError as exc:
        raise ConfigError(f"ensemble: {exc}") from exc

    (out / f"{name}_runs.jsonl").write_text(
        "\n".join(summary_line(r) for r in result.records) + "\n")
    p_hat, half = stochastic.binomial_ci(
        round(result.completed_fraction * n_paths), n_paths)
    report = {
        "schema": SCHEMA_VERSION,
        "name": name,
        "completed_fraction": result.completed_fraction,
        "ci_half_width": half,
        "target": result.target,
        "epsilon": epsilon,
        "n_paths": n_paths,
        "alpha": result.alpha,
        "beta": result.beta,
        "nu": result.nu,
    }
    (out / f"{name}_ensemble.json").write_text(json.dumps(report, sort_keys=True) + "\n")
    if not args.quiet:
        print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def cmd_goodset(args) -> int:
    if args.config:
        sec = _Section(load_config(args.config), "goodset")
        alpha = sec.get_float("alpha", required=True)
        beta = sec.get_float("beta", required=True)
        nu = sec.get_float("nu", required=True)
        T = sec.get_float("T", 50.0)
        dt = sec.get_float("dt", 1e-3)
        n_paths = args.paths or sec.get_int("paths", 1000)
        seed = args.seed if args.seed is not None else sec.get_int("seed", 0)
    else:
        if args.alpha is None or args.beta is None or args.nu is None:
            raise ConfigError("goodset: provide --config or --alpha/--beta/--nu")
        alpha, beta, nu = args.alpha, args.beta, args.nu
        T, dt = args.T, args.dt
        n_paths = args.paths or 1000
        seed = args.seed if args.seed is not None else 0
    try:
        params = GoodSetParams(alpha=alpha, beta=beta, nu=nu)
        est = stochastic.good_set_probability(params, T, dt, n_paths, seed=seed)
    except ValueError as exc:
        raise ConfigError(f"goodset: {exc}") from exc
    record = {"schema": SCHEMA_VERSION, **est.as_dict()}
    print(json.dumps(record, sort_keys=True))
    if args.out:
        out = _ensure_outdir(args.out)
        (out / "goodset.json").write_text(json.dumps(record, sort_keys=True) + "\n")
    return EXIT_OK


# ----------------------------------------------------------- verify suites ---

def _verify_cancellation(seed=0) -> dict:
    worst = 0.0
    for i in range(100):
        u = analysis.decayed_random_velocity(8, 4.0, np.random.SeedSequence(
            entropy=seed, spawn_key=(i,)))
        worst = max(worst, analysis.twisted_cancellation_residual(u, 1.0, 0.0, 1.0))
    return {"max_residual": worst, "tolerance": 1e-10, "ok": worst <= 1e-10}


def _verify_exponents(seed=0) -> dict:
    table = []
    ok = True
    for ss in [round(1.55 + 0.05 * i, 2) for i in range(9)]:
        constructive = analysis.feasible_exponents(ss, 1.0) is not None
        oracle = analysis.exponent_grid_search(ss, 1.0) is not None
        table.append({"sigma_s": ss, "feasible": constructive, "oracle": oracle})
        ok = ok and constructive == oracle
    boundary = (not table[1]["feasible"]) and table[2]["feasible"]  # 1.60 vs 1.65
    return {"table": table, "boundary_between_1.60_and_1.65": boundary,
            "ok": ok and boundary}


def _verify_lemma_a1(seed=0) -> dict:
    worst = {}
    for r in (0.0, 1.0, 2.0):
        vals = []
        for i in range(40):
            f = analysis.decayed_random_scalar(8, 3.5, np.random.SeedSequence(
                entropy=seed, spawn_key=(int(2 * r), i)))
            g = analysis.decayed_random_scalar(8, 3.5, np.random.SeedSequence(
                entropy=seed, spawn_key=(int(2 * r), i, 1)))
            vals.append(analysis.product_inequality_ratio(f, g, r, 0.05, 0.1))
        worst[f"r={r}"] = max(vals)
    finite = all(math.isfinite(v) for v in worst.values())
    f0 = analysis.decayed_random_scalar(8, 3.5, seed)
    g0 = analysis.decayed_random_scalar(8, 3.5, seed + 1)
    base = analysis.product_inequality_ratio(f0, g0, 1.0, 0.05, 0.1)
    scaled = analysis.product_inequality_ratio(
        replace(f0, coeffs=3.0 * f0.coeffs), g0, 1.0, 0.05, 0.1)
    invariant = abs(scaled - base) <= 1e-9 * base
    return {"max_ratio": worst, "scale_invariant": invariant,
            "ok": finite and invariant}


def _verify_nonlinear_estimate(seed=0) -> dict:
    est1 = analysis.estimate_c_sigma(2.6, N=8, n_samples=60, seed=seed)
    est2 = analysis.estimate_c_sigma(2.6, N=8, n_samples=60, seed=seed)
    u = analysis.decayed_random_velocity(8, 4.6, seed)
    base = analysis.nonlinear_estimate_ratio(u, 2.6, 0.05)
    scaled = analysis.nonlinear_estimate_ratio(5.0 * u, 2.6, 0.05)
    invariant = abs(scaled - base) <= 1e-9 * max(base, 1e-300)
    return {"estimate_c_sigma": est1.value, "p95": est1.p95,
            "deterministic": est1.value == est2.value,
            "scale_invariant": invariant,
            "ok": math.isfinite(est1.value) and est1.value == est2.value and invariant}


def _verify_picard(seed=0) -> dict:
    N = 8
    u0 = initial_data.random_analytic(N, radius=0.3, seed=11)
    p = GevreyParams(1.9, 1.0, 0.2)
    u0 = initial_data.normalize_to(u0, 1e-2, p)
    cfg = SimConfig(noise="diffusion", nu=2.0, s=1.0, sigma=1.9,
                    radius=RadiusSchedule.linear(0.2, 0.5), n_modes=N,
                    dt=1e-3, horizon=0.05, seed=0)
    prob = picard.MildProblem(u0=u0, cfg=cfg, horizon=0.05, n_nodes=33, tol=1e-12)
    path = dynamics._zero_path(0.05, 1e-3)
    res = picard.fixed_point_solve(prob, path)
    again = picard.duhamel_map(res.trajectory, prob, path)
    consistency = picard._sup_diff(res.trajectory, again, prob)
    ok = (res.contraction_estimate < 1.0 and consistency <= 2.0 * prob.tol)
    return {"iterations": res.iterations,
            "contraction_estimate": res.contraction_estimate,
            "fixed_point_consistency": consistency, "ok": ok}


def _verify_kernel_bound(seed=0) -> dict:
    k_max = gevrey.max_abs_k(16)
    coarse = picard.kernel_bound_probe(1.9, 1.0, 2.0, 0.5, k_max, 200, 200)
    fine = picard.kernel_bound_probe(1.9, 1.0, 2.0, 0.5, k_max, 400, 400)
    stable = abs(fine - coarse) <= 0.25 * coarse
    return {"constant_coarse": coarse, "constant_fine": fine,
            "stable_under_refinement": stable,
            "ok": math.isfinite(fine) and stable}


VERIFY_IMPL = {
    "cancellation": _verify_cancellation,
    "exponents": _verify_exponents,
    "lemma-a1": _verify_lemma_a1,
    "nonlinear-estimate": _verify_nonlinear_estimate,
    "picard-consistency": _verify_picard,
    "kernel-bound": _verify_kernel_bound,
}


def cmd_verify(args) -> int:
    if args.suite not in VERIFY_IMPL:
        raise ConfigError(f"verify: unknown suite {args.suite!r}; "
                          f"known: {', '.join(VERIFY_SUITES)}")
    result = VERIFY_IMPL[args.suite](seed=args.seed if args.seed is not None else 0)
    payload = {"schema": SCHEMA_VERSION, "suite": args.suite, **result}
    print(json.dumps(payload, sort_keys=True, default=float))
    return EXIT_OK if result["ok"] else 1


# ------------------------------------------------------------------ main ---

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hydrostat",
                                 description="Stochastic primitive-equations lab")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="config file path")
    common.add_argument("--seed", type=int, default=None, help="seed override")
    common.add_argument("--out", type=str, default=None, help="output directory")
    common.add_argument("--paths", type=int, default=None, help="ensemble size")
    common.add_argument("--quiet", action="store_true", help="suppress progress")

    p = sub.add_parser("simulate", parents=[common], help="run one simulation per seed")
    p.set_defaults(func=cmd_simulate, needs_config=True)

    p = sub.add_parser("ensemble", parents=[common],
                       help="globality ensemble with completed-fraction report")
    p.set_defaults(func=cmd_ensemble, needs_config=True)

    p = sub.add_parser("goodset", parents=[common], help="survival probability")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--nu", type=float, default=None)
    p.add_argument("--T", type=float, default=50.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.set_defaults(func=cmd_goodset, needs_config=False)

    p = sub.add_parser("verify", parents=[common], help="named probe battery")
    p.add_argument("suite", type=str, help=f"one of: {', '.join(VERIFY_SUITES)}")
    p.set_defaults(func=cmd_verify, needs_config=False)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "needs_config", False) and not args.config:
            raise ConfigError(f"{args.command}: --config is required")
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
