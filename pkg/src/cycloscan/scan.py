"""Prime-scan orchestration: records, accumulators, checkpoints, identities.

A job is (curve, q, a, x_max).  Every good prime p <= x_max with p = a (mod q)
contributes exactly one PrimeRecord; accumulators fold records in ascending
order, so snapshots are independent of the shard layout by construction.
All per-prime randomness is seeded from (job seed, p), never from the shard.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from cycloscan.arith import divisors, inner_mu_sum, mobius, segmented_primes, squarefree_divisors
from cycloscan.curve import DEFAULT_CROSSOVER, CurveSpec, ReducedCurve, point_count
from cycloscan.structure import PrimeRecord, check_record, group_structure

import random

FORMAT_VERSION = 1
RECORD_HEADER = "p,ap,n,dp,ep"


def default_checkpoints(x_max: int) -> tuple[int, ...]:
    """Powers of 10 and 2*10^k up to x_max, plus x_max itself."""
    cps = set()
    k = 10
    while k <= x_max:
        cps.add(k)
        if 2 * k <= x_max:
            cps.add(2 * k)
        k *= 10
    cps.add(x_max)
    return tuple(sorted(cps))


@dataclass(frozen=True)
class ScanConfig:
    curve: CurveSpec
    x_max: int
    q: int = 1
    a: int = 1
    checkpoints: tuple[int, ...] = ()
    m_max: int = 100
    shards: int = 1
    seed: int = 0
    crossover: int = DEFAULT_CROSSOVER

    def __post_init__(self):
        if self.x_max < 2:
            raise ValueError("x_max must be >= 2")
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if self.q > 1 and gcd(self.a, self.q) != 1:
            raise ValueError(f"invalid progression: gcd({self.a}, {self.q}) != 1")
        if self.m_max < 1:
            raise ValueError("m_max must be >= 1")
        if self.shards < 1:
            raise ValueError("shards must be >= 1")
        if not self.checkpoints:
            object.__setattr__(self, "checkpoints", default_checkpoints(self.x_max))
        cps = self.checkpoints
        if list(cps) != sorted(set(cps)) or cps[-1] > self.x_max:
            raise ValueError("checkpoints must be strictly ascending and <= x_max")


class Accumulator:
    """Running counts over a record stream, foldable in ascending p order."""

    def __init__(self, m_max: int):
        self.m_max = m_max
        self.prime_count = 0
        self.cyclic_count = 0
        self.exponent_sum = 0
        self.split_counts: dict[int, int] = {}
        self.max_dp_seen = 0
        self._div_cache: dict[int, list[int]] = {}

    def update(self, rec: PrimeRecord) -> None:
        self.prime_count += 1
        if rec.dp == 1:
            self.cyclic_count += 1
        self.exponent_sum += rec.ep
        if rec.dp > self.max_dp_seen:
            self.max_dp_seen = rec.dp
        divs = self._div_cache.get(rec.dp)
        if divs is None:
            divs = [m for m in divisors(rec.dp) if m <= self.m_max]
            self._div_cache[rec.dp] = divs
        for m in divs:
            self.split_counts[m] = self.split_counts.get(m, 0) + 1

    def snapshot(self, x: int) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "x": x,
            "prime_count": self.prime_count,
            "cyclic_count": self.cyclic_count,
            "exponent_sum": str(self.exponent_sum),
            "split_counts": {str(m): self.split_counts[m] for m in sorted(self.split_counts)},
        }


def pi_E_m(acc: Accumulator, m: int) -> int:
    """Count of records with m | d_p.  m above the tracking bound is an error."""
    if m < 1 or m > acc.m_max:
        raise ValueError(f"m={m} outside tracked range 1..{acc.m_max}")
    return acc.split_counts.get(m, 0)


@dataclass
class ScanResult:
    config: ScanConfig
    records: list[PrimeRecord]
    snapshots: list[dict]

    def accumulator(self) -> Accumulator:
        acc = Accumulator(self.config.m_max)
        for rec in self.records:
            acc.update(rec)
        return acc


def _process_prime(spec: CurveSpec, p: int, seed: int, crossover: int) -> PrimeRecord:
    curve = ReducedCurve(p, spec.a4 % p, spec.a6 % p)
    rng = random.Random((seed << 64) | p)
    n = point_count(curve, rng, crossover)
    d, e = group_structure(curve, n, rng)
    rec = PrimeRecord(p, p + 1 - n, n, d, e)
    check_record(rec)
    return rec


def _scan_shard(args) -> list[PrimeRecord]:
    spec, lo, hi, q, a, seed, crossover = args
    bad = spec.bad_primes
    out = []
    for p in segmented_primes(lo, hi, q, a):
        if p in bad:
            continue
        out.append(_process_prime(spec, p, seed, crossover))
    return out


def _scan_range(config: ScanConfig, lo: int, hi: int) -> list[PrimeRecord]:
    if hi < lo:
        return []
    shards = config.shards
    if shards == 1:
        return _scan_shard((config.curve, lo, hi, config.q, config.a,
                            config.seed, config.crossover))
    step = (hi - lo) // shards + 1
    tasks = []
    cut = lo
    while cut <= hi:
        tasks.append((config.curve, cut, min(cut + step - 1, hi), config.q,
                      config.a, config.seed, config.crossover))
        cut += step
    with ProcessPoolExecutor(max_workers=shards) as pool:
        parts = list(pool.map(_scan_shard, tasks))
    out = []
    for part in parts:  # ascending range order, not completion order
        out.extend(part)
    return out


def fold_snapshots(config: ScanConfig, records, on_checkpoint=None) -> list[dict]:
    """Fold records (ascending p) into per-checkpoint snapshots."""
    acc = Accumulator(config.m_max)
    snapshots = []
    cps = config.checkpoints
    ci = 0
    folded = 0
    for rec in records:
        while ci < len(cps) and rec.p > cps[ci]:
            snap = acc.snapshot(cps[ci])
            snapshots.append(snap)
            if on_checkpoint:
                on_checkpoint(snap, records, folded)
            ci += 1
        acc.update(rec)
        folded += 1
    while ci < len(cps):
        snap = acc.snapshot(cps[ci])
        snapshots.append(snap)
        if on_checkpoint:
            on_checkpoint(snap, records, folded)
        ci += 1
    return snapshots


def run_scan(config: ScanConfig, prior_records=(), resume_from: int | None = None,
             on_checkpoint=None) -> ScanResult:
    """Scan the job, optionally resuming after a durable checkpoint.

    prior_records must be exactly the records with p <= resume_from; the
    remaining range is rescanned and the fold is recomputed from scratch, so
    a resumed run is bit-identical to an uninterrupted one.
    """
    lo = 2 if resume_from is None else resume_from + 1
    if prior_records and resume_from is None:
        raise ValueError("prior_records given without resume_from")
    if prior_records and prior_records[-1].p > resume_from:
        raise ValueError("prior_records extend past resume_from")
    new = _scan_range(config, lo, config.x_max)
    records = list(prior_records) + new
    snapshots = fold_snapshots(config, records, on_checkpoint)
    return ScanResult(config, records, snapshots)


# identity checks --------------------------------------------------------------


@dataclass
class IdentityReport:
    ok: bool
    residuals: list[tuple[int, int]] = field(default_factory=list)
    first_bad_prime: int | None = None


def inclusion_exclusion_check(records, checkpoints) -> IdentityReport:
    """pi_c(x) minus the Mobius sum over squarefree m of pi_{E,m}(x), per
    checkpoint; exact integers, residual must be 0 everywhere.

    The sum is evaluated through the divisor structure of each d_p (the full
    untruncated identity; no prime contributes terms with m > sqrt(x)+1).
    """
    mu_cache: dict[int, int] = {}

    def mobius_sum(dp: int) -> int:
        s = mu_cache.get(dp)
        if s is None:
            s = sum(mobius(m) for m in squarefree_divisors(dp))
            mu_cache[dp] = s
        return s

    first_bad = None
    residuals = []
    ci = 0
    cps = list(checkpoints)
    cyclic = 0
    mob = 0
    for rec in records:
        while ci < len(cps) and rec.p > cps[ci]:
            residuals.append((cps[ci], cyclic - mob))
            ci += 1
        cyc = 1 if rec.dp == 1 else 0
        contrib = mobius_sum(rec.dp)
        if contrib != cyc and first_bad is None:
            first_bad = rec.p
        cyclic += cyc
        mob += contrib
    while ci < len(cps):
        residuals.append((cps[ci], cyclic - mob))
        ci += 1
    ok = first_bad is None and all(r == 0 for _, r in residuals)
    return IdentityReport(ok, residuals, first_bad)


def exponent_identity_check(records) -> IdentityReport:
    """Per record e*d = p+1-a_p, and the aggregate rational identity
    sum e_p = sum (p+1-a_p) * (sum over de | d_p of mu(d)/e), exactly."""
    coeff_cache: dict[int, Fraction] = {}
    total_e = 0
    total_expanded = Fraction(0)
    first_bad = None
    for rec in records:
        if rec.ep * rec.dp != rec.p + 1 - rec.ap and first_bad is None:
            first_bad = rec.p
        c = coeff_cache.get(rec.dp)
        if c is None:
            c = inner_mu_sum(rec.dp)
            coeff_cache[rec.dp] = c
        total_e += rec.ep
        total_expanded += (rec.p + 1 - rec.ap) * c
    ok = first_bad is None and total_expanded == total_e
    if not ok and first_bad is None:
        first_bad = records[0].p if records else None
    return IdentityReport(ok, [(0, total_e - total_expanded)] if records else [], first_bad)


def tail_constant(acc: Accumulator, x: int) -> tuple[float, bool]:
    """Measured C with pi_{E,m} <= C * x / m^2 over tracked m >= 2; flags C > 10."""
    c = 0.0
    for m, count in acc.split_counts.items():
        if m >= 2:
            c = max(c, count * m * m / x)
    return c, c > 10


# persistence ------------------------------------------------------------------


def records_path(out_dir: str) -> str:
    return os.path.join(out_dir, "records.csv")


def checkpoint_path(out_dir: str, x: int) -> str:
    return os.path.join(out_dir, f"checkpoint_{x:012d}.json")


def write_records(path: str, records) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(f"# format_version={FORMAT_VERSION}\n")
        fh.write(RECORD_HEADER + "\n")
        for r in records:
            fh.write(f"{r.p},{r.ap},{r.n},{r.dp},{r.ep}\n")
    os.replace(tmp, path)


def read_records(path: str, upto: int | None = None, tolerant: bool = False):
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line == RECORD_HEADER:
                continue
            parts = line.split(",")
            if len(parts) != 5:
                if tolerant:
                    break
                raise ValueError(f"malformed record line: {line!r}")
            try:
                rec = PrimeRecord(*(int(v) for v in parts))
            except ValueError:
                if tolerant:
                    break
                raise
            if upto is not None and rec.p > upto:
                break
            out.append(rec)
    return out


def write_checkpoint(out_dir: str, snap: dict) -> str:
    path = checkpoint_path(out_dir, snap["x"])
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(snap, fh, indent=1)
        fh.write("\n")
    os.replace(tmp, path)
    return path


def read_checkpoints(out_dir: str) -> list[dict]:
    snaps = []
    for name in sorted(os.listdir(out_dir)):
        if name.startswith("checkpoint_") and name.endswith(".json"):
            with open(os.path.join(out_dir, name)) as fh:
                snaps.append(json.load(fh))
    return sorted(snaps, key=lambda s: s["x"])
