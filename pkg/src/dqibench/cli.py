"""Command-line front end.

Every subcommand that produces numbers writes a CSV report (stdout by
default) plus a JSON sidecar echoing the configuration, so ``replay`` can
regenerate the report and compare it byte for byte.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, baselines, decoders, instances, oracle, spectrum, weights
from .errors import CapacityError, GateError, NumericError, ParameterError
from .report import ExperimentReport, atomic_write_text, csv_text, read_csv
from .rng import substream

EXIT_CODES = ((GateError, 5), (NumericError, 4), (CapacityError, 3), (ParameterError, 2), (ValueError, 2))
BATCH_COLUMNS = ("algorithm", "instance_id", "seed", "sweeps", "phi", "wallclock_ms")
GATE_TOL = 1e-9


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load(path) -> instances.MaxLinsatInstance:
    if not Path(path).exists():
        raise ParameterError(f"instance file {path} does not exist")
    return instances.load_instance(path)


def instance_id(inst: instances.MaxLinsatInstance) -> str:
    return hashlib.sha256(instances.dumps(inst).encode()).hexdigest()[:12]


def parse_grid(text: str) -> list[int]:
    """``a:b:c`` (inclusive of b when reached), or a comma list."""
    try:
        if ":" in text:
            parts = [int(t) for t in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            a, b, c = parts
            return list(range(a, b + 1, c))
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise ParameterError(f"bad grid {text!r}; use a:b:step or a,b,c") from None


def _config(args) -> dict:
    skip = {"func", "out", "resume"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _report(args, name: str) -> ExperimentReport:
    cfg = _config(args)
    digest = hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:10]
    return ExperimentReport(f"{name}-{digest}", cfg)


# ---------------------------------------------------------------- gen

def cmd_gen(args) -> int:
    if args.family == "gallager":
        inst = instances.gen_gallager(args.k, args.d, args.b, args.seed, plant=args.plant)
    elif args.family == "opi":
        inst = instances.gen_opi(args.p, args.n, args.seed, plant=args.plant)
    else:
        if args.dist == "demo":
            dist, m0, n0 = instances.demo_distribution()
        else:
            dist, m0, n0 = instances.load_distribution(args.dist), None, None
        m = args.m or m0
        n = args.n or n0
        if not m or not n:
            raise ParameterError("irregular generation needs --m and --n")
        inst = instances.gen_irregular(m, n, dist, args.seed, plant=args.plant)
    atomic_write_text(args.out, instances.dumps(inst) + "\n")
    cd, vd = inst.constraint_degrees(), inst.variable_degrees()
    summary = (
        f"m={inst.m} n={inst.n} p={inst.p} constraint degree {cd.min()}..{cd.max()} (mean {cd.mean():.3f})"
        f" variable degree {vd.min()}..{vd.max()} (mean {vd.mean():.3f})"
    )
    if args.dual_distance and args.family == "opi":
        summary += f" d_perp={inst.n + 1} (Reed-Solomon dual, MDS)"
    elif args.dual_distance:
        summary += f" d_perp={weights.dual_distribution(inst).d_min}"
    _info(summary)
    return 0


# ---------------------------------------------------------------- predict

def cmd_predict(args) -> int:
    rep = _report(args, "predict")
    if args.mode == "tridiag":
        frac, w = spectrum.optimal_fraction(args.m, args.l, args.p, args.r)
        lam = spectrum.principal_eig(spectrum.build_tridiagonal(args.m, args.l, spectrum.slope(args.p, args.r))).value
        rep.add("tridiag", "-", "phi", frac, "")
        rep.add("tridiag", "-", "lambda_max", lam, "")
    elif args.mode == "semicircle":
        rep.add("semicircle", "-", "phi", spectrum.semicircle(args.mu, args.rho), "")
        w = None
    elif args.mode == "beyond":
        bb = spectrum.beyond_distance_bounds(args.mu, args.zeta)
        rep.add("beyond", "-", "phi_avg", bb.avg_s, "")
        rep.add("beyond", "-", "phi_worst", bb.worst_s, "")
        rep.add("beyond", "-", "worst_vacuous", int(bb.worst_vacuous), "")
        w = None
    else:
        inst = _load(args.instance)
        if inst.p != 2:
            raise ParameterError("exact prediction is implemented for p = 2")
        s, w = weights.optimal_fraction_exact(inst.m, args.l, weights.dual_distribution(inst))
        rep.add("exact", instance_id(inst), "phi", s / inst.m, "")
    rep.write(args.out)
    if args.weights_out and w is not None:
        atomic_write_text(args.weights_out, json.dumps([float(a) for a in w]) + "\n")
    return 0


# ---------------------------------------------------------------- decode-bench

def cmd_decode_bench(args) -> int:
    inst = _load(args.instance)
    iid = instance_id(inst)
    grid = parse_grid(args.l_grid)
    rep = _report(args, "decode")
    done: dict[int, tuple] = {}
    if args.resume and args.out != "-" and Path(args.out).exists():
        for row in read_csv(args.out):
            if row["algorithm"] == args.decoder and row["instance_id"] == iid and row["metric"].startswith("failure_rate@"):
                done[int(row["metric"].split("@")[1])] = (row["value"], row["uncertainty"])
    cfg = None
    if args.decoder == "bp":
        cfg_kwargs = dict(max_iter=args.bp_iters, damping=args.damping, min_sum=args.min_sum)
    for l in grid:
        if l in done:
            rep.add(args.decoder, iid, f"failure_rate@{l}", *done[l])
            continue
        if args.decoder == "bp":
            cfg = decoders.BpConfig(q=min(max(l / inst.m, 1e-6), 0.49), **cfg_kwargs)
        est = decoders.failure_rate(args.decoder, inst, l, args.trials, args.seed, cfg)
        sigma = math.sqrt(max(est.rate * (1 - est.rate), 0.0) / est.trials)
        rep.add(args.decoder, iid, f"failure_rate@{l}", est.rate, sigma)
        if args.out != "-":
            rep.write(args.out)  # checkpoint so an interrupted run can resume
    rep.write(args.out)
    return 0


# ---------------------------------------------------------------- opt

def _run_algorithm(name: str, inst, args, seed: int) -> baselines.RunResult:
    if name == "sa":
        end = 3.0 if args.beta_end is None else args.beta_end
        return baselines.simulated_annealing(inst, baselines.AnnealSchedule(args.sweeps, args.beta_start, end), seed)
    if name == "irregular":
        end = 5.0 if args.beta_end is None else args.beta_end
        return baselines.irregular_annealing(inst, baselines.AnnealSchedule(args.sweeps, args.beta_start, end), seed)
    if name == "greedy":
        return baselines.greedy(inst, seed)
    if name == "truncation":
        return baselines.truncation(inst, args.trials, seed)
    if name == "advrand":
        grid = "all" if args.r_grid == "all" else [float(t) for t in args.r_grid.split(",")]
        return baselines.advrand(inst, args.flip, grid, seed)
    raise ParameterError(f"unknown algorithm {name!r}")


def run_seeds(seed: int, runs: int) -> list[int]:
    if runs == 1:
        return [seed]
    return [int(substream(seed, "run-seed", i).integers(0, 2**31)) for i in range(runs)]


def cmd_opt(args) -> int:
    inst = _load(args.instance)
    iid = instance_id(inst)
    rows = []
    for s in run_seeds(args.seed, args.runs):
        res = _run_algorithm(args.algorithm, inst, args, s)
        sweeps = res.extra.get("sweeps", "")
        wall = res.wallclock_ms if args.timing else ""
        rows.append((args.algorithm, iid, s, sweeps, res.phi, wall))
        if args.json:
            atomic_write_text(args.json, json.dumps(res.to_json(), sort_keys=True) + "\n")
    if args.out != "-" and args.append and Path(args.out).exists():
        old = read_csv(args.out)
        if old and tuple(old[0]) != BATCH_COLUMNS:
            raise ParameterError(f"{args.out} is not a batch CSV")
        rows = [tuple(r[c] for c in BATCH_COLUMNS) for r in old] + rows
    elif args.out != "-":
        side = _report(args, "opt").sidecar()
        side["columns"] = list(BATCH_COLUMNS)
        side["row_count"] = len(rows)
        atomic_write_text(str(args.out) + ".json", json.dumps(side, indent=2, sort_keys=True) + "\n")
    atomic_write_text(args.out, csv_text(BATCH_COLUMNS, rows))
    return 0


# ---------------------------------------------------------------- simulate

def cmd_simulate(args) -> int:
    inst = _load(args.instance)
    iid = instance_id(inst)
    l = args.l
    if args.weights:
        w = np.asarray(json.loads(Path(args.weights).read_text()), dtype=float)
    else:
        _, w = spectrum.optimal_fraction(inst.m, l, inst.p, int(inst.allowed[0].sum()))
    state = oracle.amplitudes(inst, l, w)
    ex = oracle.exact_expectation(state)
    rep = _report(args, "simulate")
    rep.add("oracle", iid, "s_mean", ex.s, "")
    rep.add("oracle", iid, "norm2", ex.norm2, "")
    if not state.uniform_r:
        # satisfying sets differ in size, so no closed-form predictor applies
        rep.add("oracle", iid, "no_formula_cross_check", 1, "")
    if args.shots:
        idx = oracle.sample(state, args.shots, args.seed)
        sat = state.satisfied[idx]
        rep.add("oracle-sample", iid, "s_mean", float(sat.mean()), float(sat.std(ddof=1) / math.sqrt(sat.size)) if sat.size > 1 else "")
    if args.export:
        state.export(args.export)
    gate_error = None
    if args.check == "tridiag":
        if not state.uniform_r:
            raise ParameterError("tridiagonal check needs every constraint to allow the same number of values")
        d = weights.dual_distribution(inst).d_min if inst.p == 2 else None
        if inst.p == 2 and d is not None and 2 * l + 1 >= d:
            raise ParameterError(f"tridiagonal prediction needs 2l+1 < d_perp = {d}")
        wn = np.asarray(w, dtype=float)
        pred = spectrum.expected_satisfied(inst.m, l, inst.p, int(inst.allowed[0].sum()), wn / np.linalg.norm(wn))
        rep.add("tridiag", iid, "s_mean", pred, "")
        if abs(pred - ex.s) > GATE_TOL:
            gate_error = f"oracle <s> = {ex.s!r} but tridiagonal prediction = {pred!r}"
    elif args.check == "exact":
        A = weights.dual_distribution(inst)
        R = weights.gram_matrix(inst.m, l, A)
        E = weights.expectation_matrix(inst.m, l, A)
        pred = inst.m / 2 + float(w @ E @ w) / float(w @ R @ w)
        rep.add("exact", iid, "s_mean", pred, "")
        if abs(pred - ex.s) > GATE_TOL:
            gate_error = f"oracle <s> = {ex.s!r} but weight-distribution prediction = {pred!r}"
    rep.write(args.out)
    if gate_error:
        raise GateError(gate_error)
    return 0


# ---------------------------------------------------------------- zeta

def cmd_zeta(args) -> int:
    rep = _report(args, "zeta")
    if args.mode == "exact":
        inst = _load(args.instance)
        est = weights.zeta_exact(inst, args.l)
        for k, z in enumerate(est.values):
            rep.add("zeta-exact", instance_id(inst), f"zeta@{k}", z, "")
        rep.add("zeta-exact", instance_id(inst), "zeta", est.zeta, "")
    else:
        est = weights.zeta_heuristic_profile(args.m, args.n, args.l, args.c)
        rep.add("zeta-heuristic", "-", "log2_zeta_max", est.zeta, "")
        k_worst = int(np.argmax(est.values))
        rep.add("zeta-heuristic", "-", "argmax_k", k_worst, "")
    rep.write(args.out)
    return 0


# ---------------------------------------------------------------- leaderboard

def _leaderboard_rows(paths) -> list[tuple[str, str, float]]:
    rows = []
    for path in paths:
        if not Path(path).exists():
            raise ParameterError(f"report {path} does not exist")
        for r in read_csv(path):
            if "phi" in r:
                rows.append((r["algorithm"], r["instance_id"], float(r["phi"])))
            elif r.get("metric") == "phi":
                rows.append((r["algorithm"], r["instance_id"], float(r["value"])))
    return rows


def cmd_leaderboard(args) -> int:
    groups: dict[tuple[str, str], list[float]] = {}
    for alg, iid, phi in _leaderboard_rows(args.reports):
        groups.setdefault((alg, iid), []).append(phi)
    table = sorted(((alg, iid, float(np.mean(v)), len(v)) for (alg, iid), v in groups.items()), key=lambda t: (-t[2], t[0], t[1]))
    atomic_write_text(args.out, csv_text(("algorithm", "instance_id", "sat_fraction", "runs"), table))
    return 0


# ---------------------------------------------------------------- alist / replay

def cmd_alist(args) -> int:
    inst = _load(args.instance)
    atomic_write_text(args.out, decoders.to_alist(inst.BT))
    return 0


def cmd_replay(args) -> int:
    """Rerun the command recorded in a sidecar and compare the regenerated CSV."""
    side = Path(args.sidecar)
    if not side.exists():
        raise ParameterError(f"sidecar {side} does not exist")
    meta = json.loads(side.read_text())
    cfg = dict(meta["config"])
    csv_path = Path(str(side)[: -len(".json")])
    fresh = args.out or str(csv_path) + ".replay"
    ns = argparse.Namespace(**cfg, out=fresh, resume=False)
    ns.func = COMMANDS[cfg["command"]]
    ns.func(ns)
    if csv_path.exists() and Path(fresh).read_bytes() != csv_path.read_bytes():
        raise GateError(f"replayed report {fresh} differs from {csv_path}")
    _info(f"replay of {csv_path} matches")
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "predict": cmd_predict,
    "decode-bench": cmd_decode_bench,
    "opt": cmd_opt,
    "simulate": cmd_simulate,
    "zeta": cmd_zeta,
    "leaderboard": cmd_leaderboard,
    "alist": cmd_alist,
    "replay": cmd_replay,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dqibench", description="Max-LINSAT workbench: instances, predictions, decoders and baselines.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        p = sub.add_parser(name, **kw)
        p.set_defaults(command=name)
        return p

    g = add("gen", help="generate an instance file")
    gsub = g.add_subparsers(dest="family", required=True)
    for fam in ("gallager", "irregular", "opi"):
        q = gsub.add_parser(fam)
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--plant", action="store_true")
        q.add_argument("--out", default="-")
        q.add_argument("--dual-distance", action="store_true", help="enumerate the dual code and report its minimum distance")
        if fam == "gallager":
            q.add_argument("--k", type=int, required=True, help="variables per constraint")
            q.add_argument("--d", type=int, required=True, help="constraints per variable")
            q.add_argument("--b", type=int, required=True, help="block size")
        elif fam == "opi":
            q.add_argument("--p", type=int, required=True)
            q.add_argument("--n", type=int, required=True)
        else:
            q.add_argument("--dist", default="demo", help="distribution JSON, or 'demo' for the bundled family")
            q.add_argument("--m", type=int)
            q.add_argument("--n", type=int)

    pr = add("predict", help="predicted satisfied fraction")
    psub = pr.add_subparsers(dest="mode", required=True)
    for mode in ("tridiag", "semicircle", "exact", "beyond"):
        q = psub.add_parser(mode)
        q.add_argument("--out", default="-")
        q.add_argument("--weights-out")
        if mode == "tridiag":
            q.add_argument("--m", type=int, required=True)
            q.add_argument("--l", type=int, required=True)
            q.add_argument("--p", type=int, default=2)
            q.add_argument("--r", type=int, default=1)
        elif mode == "semicircle":
            q.add_argument("--mu", type=float, required=True)
            q.add_argument("--rho", type=float, default=0.5)
        elif mode == "beyond":
            q.add_argument("--mu", type=float, required=True)
            q.add_argument("--zeta", type=float, required=True)
        else:
            q.add_argument("--instance", required=True)
            q.add_argument("--l", type=int, required=True)

    d = add("decode-bench", help="decoder failure rate over a grid of error weights")
    d.add_argument("--instance", required=True)
    d.add_argument("--decoder", choices=("bw", "bp"), required=True)
    d.add_argument("--l-grid", required=True)
    d.add_argument("--trials", type=int, default=200)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--bp-iters", type=int, default=100)
    d.add_argument("--damping", type=float, default=0.0)
    d.add_argument("--min-sum", action="store_true")
    d.add_argument("--resume", action="store_true", help="reuse rows already present in --out")
    d.add_argument("--out", default="-")

    o = add("opt", help="run a classical baseline")
    o.add_argument("--instance", required=True)
    o.add_argument("--algorithm", choices=("sa", "greedy", "truncation", "advrand", "irregular"), required=True)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--runs", type=int, default=1)
    o.add_argument("--sweeps", type=int, default=5000)
    o.add_argument("--beta-start", type=float, default=0.0)
    o.add_argument("--beta-end", type=float, default=None, help="default 3 for sa, 5 for irregular")
    o.add_argument("--trials", type=int, default=1)
    o.add_argument("--flip", type=float, default=0.0)
    o.add_argument("--r-grid", default="all")
    o.add_argument("--timing", action="store_true", help="record wall-clock time (makes output nondeterministic)")
    o.add_argument("--append", action="store_true")
    o.add_argument("--json", help="write the last run's full result here")
    o.add_argument("--out", default="-")

    s = add("simulate", help="exact state simulation on a tiny instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--weights", help="JSON list of l+1 weights (default: tridiagonal optimum)")
    s.add_argument("--check", choices=("none", "tridiag", "exact"), default="none")
    s.add_argument("--shots", type=int, default=0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--export")
    s.add_argument("--out", default="-")

    z = add("zeta", help="dual codewords near low-weight strings")
    zsub = z.add_subparsers(dest="mode", required=True)
    q = zsub.add_parser("exact")
    q.add_argument("--instance", required=True)
    q.add_argument("--l", type=int, required=True)
    q.add_argument("--out", default="-")
    q = zsub.add_parser("heuristic")
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--l", type=int, required=True)
    q.add_argument("--c", type=float, default=0.9)
    q.add_argument("--out", default="-")

    lb = add("leaderboard", help="merge reports into a table sorted by satisfied fraction")
    lb.add_argument("reports", nargs="+")
    lb.add_argument("--out", default="-")

    al = add("alist", help="export the decoding matrix B^T in alist format")
    al.add_argument("--instance", required=True)
    al.add_argument("--out", default="-")

    rp = add("replay", help="regenerate a report from its sidecar and compare")
    rp.add_argument("sidecar")
    rp.add_argument("--out")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:
        for cls, code in EXIT_CODES:
            if isinstance(exc, cls):
                _info(f"error: {exc}")
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())
