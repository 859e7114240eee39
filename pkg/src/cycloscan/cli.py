"""Command-line surface: scan, constants, compare, bounds, verify, export.

Exit codes: 0 success, 1 verification/compute failure, 2 configuration error.
CYCLOSCAN_THREADS overrides --shards when set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from math import gcd, sqrt

from cycloscan.arith import euler_phi, inner_mu_sum, log_integral
from cycloscan.bounds import (
    BoundsInput,
    G_D_bound,
    R_E_q1,
    envelope_ag_cm,
    envelope_cm_grh,
    envelope_exp,
    envelope_noncm_grh,
    envelope_siegel,
    q_split,
    residual_report,
    s_constant,
)
from cycloscan.config import ConfigError, JobConfig, parse_config
from cycloscan.constants import (
    BackendInfeasible,
    DensityEstimate,
    DensityTerm,
    c_constant,
    e_constant,
    empirical_delta,
    generic_degree,
)
from cycloscan.curve import reduce_curve
from cycloscan.scan import (
    exponent_identity_check,
    inclusion_exclusion_check,
    read_checkpoints,
    read_records,
    records_path,
    run_scan,
    write_checkpoint,
    write_records,
)
from cycloscan.structure import brute_force_structure


class VerificationFailure(Exception):
    pass


LI_CONVENTION = "Li(x) = integral from 2 to x of dt/log t (offset at 2)"
ENVELOPE_CONVENTION = "envelope shapes evaluated with all implied constants set to 1"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cycloscan",
        description="cyclicity and exponent statistics of elliptic curves mod p "
                    f"({LI_CONVENTION}; {ENVELOPE_CONVENTION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, helptext in (
        ("scan", cmd_scan, "scan primes and write records + checkpoints"),
        ("constants", cmd_constants, "evaluate density constants from a dataset"),
        ("compare", cmd_compare, "compare observed counts against constants and envelopes"),
        ("bounds", cmd_bounds, "evaluate envelope expressions on an x grid (no dataset)"),
        ("verify", cmd_verify, "run the identity/oracle verification suite"),
        ("export", cmd_export, "emit plot-ready TSV of counts, main term, residual"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="path to job config")
        p.add_argument("--out", help="output directory")
        p.add_argument("--shards", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--checkpoints", help="comma-separated checkpoint list")
        p.add_argument("--m-max", type=int, dest="m_max")
        p.add_argument("--truncation", type=int)
        p.add_argument("--backend", choices=["exact", "empirical", "hybrid"])
        p.set_defaults(func=fn)
    return parser


def _load_job(args) -> JobConfig:
    cfg = parse_config(args.config)
    if args.out:
        cfg.out_dir = args.out
    if args.shards:
        cfg.shards = args.shards
    env = os.environ.get("CYCLOSCAN_THREADS")
    if env:
        try:
            cfg.shards = int(env)
        except ValueError:
            raise ConfigError(f"CYCLOSCAN_THREADS must be an integer, got {env!r}")
    if args.seed is not None:
        cfg.seed = args.seed
    if args.checkpoints:
        try:
            cfg.checkpoints = tuple(int(v) for v in args.checkpoints.split(",") if v)
        except ValueError:
            raise ConfigError("--checkpoints must be comma-separated integers")
    if args.m_max:
        cfg.m_max = args.m_max
    if args.truncation:
        cfg.truncation = args.truncation
    if args.backend:
        cfg.backend = {"exact": "exact_generic"}.get(args.backend, args.backend)
    return cfg


def _require_out(cfg: JobConfig) -> str:
    if not cfg.out_dir:
        raise ConfigError("an output directory is required (--out or [output] out_dir)")
    os.makedirs(cfg.out_dir, exist_ok=True)
    return cfg.out_dir


# scan -------------------------------------------------------------------------


def cmd_scan(args) -> int:
    cfg = _load_job(args)
    out = _require_out(cfg)
    sc = cfg.scan_config()
    resume_from, prior = _resume_state(out, sc.x_max)
    path = records_path(out)
    if resume_from is not None:
        write_records(path, prior)  # trim any tail past the durable checkpoint
        print(f"resuming from checkpoint x={resume_from} ({len(prior)} records)")
    elif os.path.exists(path):
        os.remove(path)
    state = {"written": 0}

    def on_checkpoint(snap, records, folded):
        # records first, checkpoint second: a checkpoint on disk guarantees
        # its records are durable, which is what resume relies on
        with open(path, "a") as fh:
            for rec in records[state["written"]:folded]:
                fh.write(f"{rec.p},{rec.ap},{rec.n},{rec.dp},{rec.ep}\n")
        state["written"] = folded
        write_checkpoint(out, snap)

    if not os.path.exists(path):
        with open(path, "w") as fh:
            fh.write("# format_version=1\n")
            fh.write("p,ap,n,dp,ep\n")
    else:
        state["written"] = len(prior)
    result = run_scan(sc, prior_records=tuple(prior), resume_from=resume_from,
                      on_checkpoint=on_checkpoint)
    write_records(path, result.records)
    print(f"scan complete: {len(result.records)} records, "
          f"{len(result.snapshots)} checkpoints in {out}")
    return 0


def _resume_state(out_dir: str, x_max: int):
    snaps = [s for s in read_checkpoints(out_dir) if s["x"] <= x_max]
    if not snaps or not os.path.exists(records_path(out_dir)):
        return None, []
    x0 = snaps[-1]["x"]
    prior = read_records(records_path(out_dir), upto=x0, tolerant=True)
    return x0, prior


# constants --------------------------------------------------------------------


def _estimate(cfg: JobConfig, records) -> DensityEstimate:
    holdout = (cfg.x_max // 2, cfg.x_max)
    kwargs = dict(curve=cfg.curve, dataset=records, holdout=holdout)
    if cfg.kind == "cyclicity":
        return c_constant(cfg.backend, cfg.truncation, cfg.q, cfg.a, **kwargs)
    return e_constant(cfg.backend, cfg.truncation, cfg.q, cfg.a,
                      include_mobius_factor=cfg.include_mobius_factor, **kwargs)


def cmd_constants(args) -> int:
    cfg = _load_job(args)
    out = _require_out(cfg)
    records = read_records(records_path(out))
    try:
        est = _estimate(cfg, records)
    except BackendInfeasible as exc:
        print(f"constants: {exc}", file=sys.stderr)
        return 1
    dest = os.path.join(out, f"constants_{cfg.kind}.json")
    with open(dest, "w") as fh:
        json.dump(est.to_json(), fh, indent=1)
        fh.write("\n")
    print(f"{cfg.kind} constant ({est.backend}, M={est.truncation}): {est.value:.10f} "
          f"(truncation bound {est.truncation_bound:.3g})")
    return 0


# compare ----------------------------------------------------------------------


def _cyclicity_envelope(cfg: JobConfig):
    name = cfg.envelopes[0] if cfg.envelopes else (
        "cm-grh" if cfg.curve.cm_disc is not None else "noncm-grh")
    if name == "siegel" and cfg.siegel_s is None:
        raise ConfigError("siegel envelope requires [bounds] siegel_s")

    def fn(x: float) -> float:
        inp = BoundsInput.from_curve(cfg.curve, x=float(x), q=cfg.q, a=cfg.a,
                                     siegel_s=cfg.siegel_s)
        if name == "cm-grh":
            return envelope_cm_grh(inp)
        if name == "ag-cm":
            return envelope_ag_cm(inp)
        if name == "siegel":
            return envelope_siegel(inp).value
        return envelope_noncm_grh(inp)

    return fn


def _exponent_envelope(cfg: JobConfig):
    def fn(x: float) -> float:
        inp = BoundsInput.from_curve(cfg.curve, x=float(x), q=cfg.q, a=cfg.a,
                                     siegel_s=cfg.siegel_s)
        return envelope_exp(inp, cfg.exp_variant, cfg.d_cap)

    return fn


def cmd_compare(args) -> int:
    cfg = _load_job(args)
    out = _require_out(cfg)
    records = read_records(records_path(out))
    snaps = [s for s in read_checkpoints(out) if s["x"] >= 16]
    const_path = os.path.join(out, f"constants_{cfg.kind}.json")
    if os.path.exists(const_path):
        with open(const_path) as fh:
            data = json.load(fh)
        est = DensityEstimate(
            kind=data["kind"], value=data["value"], truncation=data["M"],
            backend=data["backend"],
            terms=[DensityTerm(**t) for t in data["terms"]],
            truncation_bound=data["truncation_bound"], grouping=data["grouping"],
        )
    else:
        est = _estimate(cfg, records)
    env_fn = _cyclicity_envelope(cfg) if cfg.kind == "cyclicity" else _exponent_envelope(cfg)
    report = residual_report(snaps, est, env_fn)
    csv_path = os.path.join(out, f"envelope_{cfg.kind}.csv")
    with open(csv_path, "w") as fh:
        for line in report.to_csv_lines():
            fh.write(line + "\n")
    with open(os.path.join(out, f"envelope_{cfg.kind}.json"), "w") as fh:
        json.dump(report.to_json(), fh, indent=1)
        fh.write("\n")
    slope = "undefined (residual identically 0)" if report.slope_fit is None \
        else f"{report.slope_fit:.4f}"
    print(f"residual slope fit: {slope}; table in {csv_path}")
    return 0


# bounds -----------------------------------------------------------------------


def cmd_bounds(args) -> int:
    cfg = _load_job(args)
    envs = list(cfg.envelopes)
    if not envs:
        envs = ["cm-grh", "ag-cm"] if cfg.curve.cm_disc is not None else ["noncm-grh"]
        if cfg.siegel_s is not None:
            envs.append("siegel")
    if "siegel" in envs and cfg.siegel_s is None:
        raise ConfigError("siegel envelope requested but [bounds] siegel_s missing")
    if ("cm-grh" in envs or "ag-cm" in envs) and cfg.curve.cm_disc is None:
        raise ConfigError("CM envelopes requested but the curve has no cm_disc")
    grid = cfg.x_grid or tuple(float(10**k) for k in range(4, 9))
    header = ["x"] + envs + [f"exp-{cfg.exp_variant}"]
    rows = []
    for x in grid:
        inp = BoundsInput.from_curve(cfg.curve, x=x, q=cfg.q, a=cfg.a,
                                     siegel_s=cfg.siegel_s)
        row = [f"{x:g}"]
        for name in envs:
            if name == "cm-grh":
                row.append(repr(envelope_cm_grh(inp)))
            elif name == "ag-cm":
                row.append(repr(envelope_ag_cm(inp)))
            elif name == "siegel":
                row.append(repr(envelope_siegel(inp).value))
            else:
                row.append(repr(envelope_noncm_grh(inp)))
        try:
            row.append(repr(envelope_exp(inp, cfg.exp_variant, cfg.d_cap)))
        except ValueError:
            row.append("")
        rows.append(row)
    q1, q2 = q_split(cfg.q, cfg.curve.m_serre)
    summary = {
        "q1": q1,
        "q2": q2,
        "R_E_q1": R_E_q1(cfg.curve.m_serre, q1),
        "conventions": [LI_CONVENTION, ENVELOPE_CONVENTION],
    }
    if cfg.curve.cm_disc is not None:
        summary["G_D_bound"] = G_D_bound(cfg.curve.cm_disc, cfg.q)
    if cfg.curve.b_constant is not None:
        value, tail = s_constant(cfg.curve.m_serre, cfg.curve.b_constant, cfg.d_cap)
        summary["S_E"] = value
        summary["S_E_tail_bound"] = tail
    lines = [",".join(header)] + [",".join(r) for r in rows]
    if cfg.out_dir:
        os.makedirs(cfg.out_dir, exist_ok=True)
        with open(os.path.join(cfg.out_dir, "bounds_table.csv"), "w") as fh:
            fh.write("\n".join(lines) + "\n")
        with open(os.path.join(cfg.out_dir, "bounds_summary.json"), "w") as fh:
            json.dump(summary, fh, indent=1)
            fh.write("\n")
        print(f"bounds table written to {cfg.out_dir}")
    else:
        print("\n".join(lines))
        print(json.dumps(summary))
    return 0


# verify -----------------------------------------------------------------------


def verify_suite(cfg: JobConfig):
    """Run every identity/oracle check; yields (name, ok, detail)."""
    from fractions import Fraction

    results = []

    ok = all(inner_mu_sum(m) == Fraction(1, m) for m in range(1, 10_001))
    results.append(("inner-mobius-identity", ok, "sum_{de|m} mu(d)/e = 1/m for m <= 10^4"))

    sc = cfg.scan_config()
    result = run_scan(sc)
    records = result.records
    results.append(("scan", True, f"{len(records)} records to x={sc.x_max}"))

    rep = inclusion_exclusion_check(records, sc.checkpoints)
    results.append(("inclusion-exclusion", rep.ok,
                    f"residuals {[r for _, r in rep.residuals]}"
                    + ("" if rep.ok else f", first bad prime {rep.first_bad_prime}")))

    rep = exponent_identity_check(records)
    results.append(("exponent-identity", rep.ok,
                    "e*d = p+1-a_p and rational expansion exact" if rep.ok
                    else f"first bad prime {rep.first_bad_prime}"))

    mismatches = []
    for rec in records:
        if rec.p > 2000:
            break
        curve = reduce_curve(cfg.curve, rec.p)
        if brute_force_structure(curve) != (rec.dp, rec.ep):
            mismatches.append(rec.p)
    results.append(("structure-oracle", not mismatches,
                    f"enumeration oracle over good p <= 2000 in progression"
                    + ("" if not mismatches else f"; mismatches at {mismatches}")))

    agree_ok, detail = _backend_agreement(cfg, records)
    results.append(("backend-agreement", agree_ok, detail))
    return results


def _backend_agreement(cfg: JobConfig, records):
    window = cfg.curve.a_serre
    if cfg.curve.cm_disc is not None:
        return True, "skipped: CM curve has no generic levels above m=1"
    ms = [m for m in (7, 11, 13, 17, 19, 23) if gcd(m, window * cfg.q) == 1][:4]
    holdout = (cfg.x_max // 2, cfg.x_max)
    phi_q = euler_phi(cfg.q)
    worst = 0.0
    for m in ms:
        try:
            delta, err = empirical_delta(records, m, holdout)
        except ValueError as exc:
            return True, f"skipped: {exc}"
        degree, gamma = generic_degree(m, cfg.q, cfg.a, window)
        expected = gamma * phi_q / degree
        n = sum(1 for r in records if holdout[0] < r.p <= holdout[1])
        sigma = max(err, sqrt(max(expected * (1 - expected), 1e-12) / n))
        dev = abs(delta - expected) / sigma if sigma else 0.0
        worst = max(worst, dev)
        if dev > 4.0:
            return False, f"m={m}: measured {delta:.6f} vs generic {expected:.6f} ({dev:.1f} sigma)"
    return True, f"generic m {ms}: all within 4 sigma (worst {worst:.2f})"


def cmd_verify(args) -> int:
    cfg = _load_job(args)
    results = verify_suite(cfg)
    failed = False
    for name, ok, detail in results:
        print(f"VERIFY {name}: {'PASS' if ok else 'FAIL'} ({detail})")
        if not ok:
            failed = True
    return 1 if failed else 0


# export -----------------------------------------------------------------------


def cmd_export(args) -> int:
    cfg = _load_job(args)
    out = _require_out(cfg)
    records = read_records(records_path(out))
    snaps = [s for s in read_checkpoints(out) if s["x"] >= 16]
    est = _estimate(cfg, records)
    env_fn = _cyclicity_envelope(cfg) if cfg.kind == "cyclicity" else _exponent_envelope(cfg)
    dest = os.path.join(out, f"export_{cfg.kind}.tsv")
    with open(dest, "w") as fh:
        fh.write(f"# {LI_CONVENTION}; {ENVELOPE_CONVENTION}\n")
        if cfg.kind == "cyclicity":
            fh.write("x\tpi_c\tmain_term\tresidual\tenvelope\n")
        else:
            fh.write("x\tpi_e\tmain_term\tresidual\tenvelope\n")
        for snap in snaps:
            x = snap["x"]
            if cfg.kind == "cyclicity":
                count = snap["cyclic_count"]
                main = est.value * log_integral(x)
            else:
                count = int(snap["exponent_sum"])
                main = est.value * log_integral(float(x) ** 2)
            fh.write(f"{x}\t{count}\t{main!r}\t{count - main!r}\t{env_fn(x)!r}\n")
    print(f"export written to {dest}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: missing file: {exc}", file=sys.stderr)
        return 2
    except VerificationFailure as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
