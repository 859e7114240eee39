"""Flat key=value job configuration with sections, validated totally.

Unknown sections or keys are rejected with line-anchored messages; nothing
reaches the compute layers with invalid state.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from cycloscan.bundled import BUNDLED
from cycloscan.curve import CurveSpec
from cycloscan.scan import ScanConfig


class ConfigError(Exception):
    pass


_SECTIONS = {
    "curve": {
        "bundled", "a4", "a6", "label", "conductor", "bad_primes",
        "cm_disc", "serre_primes", "b_constant",
    },
    "scan": {"x_max", "q", "a", "checkpoints", "m_max", "shards", "seed", "crossover"},
    "constants": {"backend", "truncation", "kind", "include_mobius_factor"},
    "bounds": {"envelopes", "exp_variant", "siegel_s", "d_cap", "x_grid"},
    "output": {"out_dir"},
}

_BACKENDS = {"exact": "exact_generic", "exact_generic": "exact_generic",
             "empirical": "empirical", "hybrid": "hybrid"}
_ENVELOPES = {"cm-grh", "noncm-grh", "ag-cm", "siegel"}
_EXP_VARIANTS = {"cm-grh", "noncm-grh-1", "noncm-grh-2"}


@dataclass
class JobConfig:
    curve: CurveSpec
    x_max: int = 0
    q: int = 1
    a: int = 1
    checkpoints: tuple[int, ...] = ()
    m_max: int = 100
    shards: int = 1
    seed: int = 0
    crossover: int = 1000
    backend: str = "hybrid"
    truncation: int = 50
    kind: str = "cyclicity"
    include_mobius_factor: bool = False
    envelopes: tuple[str, ...] = ()
    exp_variant: str = "noncm-grh-1"
    siegel_s: float | None = None
    d_cap: int = 10**6
    x_grid: tuple[float, ...] = ()
    out_dir: str | None = None

    def scan_config(self) -> ScanConfig:
        if self.x_max < 2:
            raise ConfigError("scan.x_max must be set (>= 2) for this command")
        try:
            return ScanConfig(
                curve=self.curve, x_max=self.x_max, q=self.q, a=self.a,
                checkpoints=self.checkpoints, m_max=self.m_max,
                shards=self.shards, seed=self.seed, crossover=self.crossover,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _parse_lines(path: str):
    """Yield (lineno, section, key, value) after syntax validation."""
    section = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                if section not in _SECTIONS:
                    raise ConfigError(f"{path}:{lineno}: unknown section [{section}]")
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
            if section is None:
                raise ConfigError(f"{path}:{lineno}: assignment before any [section]")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _SECTIONS[section]:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r} in [{section}]")
            yield lineno, section, key, value


def _to_int(path, lineno, key, value):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{path}:{lineno}: {key} must be an integer, got {value!r}")


def _to_float(path, lineno, key, value):
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{path}:{lineno}: {key} must be a number, got {value!r}")


def _to_bool(path, lineno, key, value):
    v = value.lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise ConfigError(f"{path}:{lineno}: {key} must be true/false, got {value!r}")


def _to_int_list(path, lineno, key, value):
    try:
        return tuple(int(v.strip()) for v in value.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{path}:{lineno}: {key} must be comma-separated integers")


def parse_config(path: str) -> JobConfig:
    raw: dict[tuple[str, str], tuple[str, int]] = {}
    for lineno, section, key, value in _parse_lines(path):
        if (section, key) in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r} in [{section}]")
        raw[(section, key)] = (value, lineno)

    def get(section, key, conv=None, default=None):
        if (section, key) not in raw:
            return default
        value, lineno = raw[(section, key)]
        if conv is None:
            return value
        return conv(path, lineno, key, value)

    curve = _build_curve(path, raw)
    cfg = JobConfig(
        curve=curve,
        x_max=get("scan", "x_max", _to_int, 0),
        q=get("scan", "q", _to_int, 1),
        a=get("scan", "a", _to_int, 1),
        checkpoints=get("scan", "checkpoints", _to_int_list, ()),
        m_max=get("scan", "m_max", _to_int, 100),
        shards=get("scan", "shards", _to_int, 1),
        seed=get("scan", "seed", _to_int, 0),
        crossover=get("scan", "crossover", _to_int, 1000),
        truncation=get("constants", "truncation", _to_int, 50),
        kind=get("constants", "kind", default="cyclicity"),
        include_mobius_factor=get("constants", "include_mobius_factor", _to_bool, False),
        exp_variant=get("bounds", "exp_variant", default="noncm-grh-1"),
        siegel_s=get("bounds", "siegel_s", _to_float, None),
        d_cap=get("bounds", "d_cap", _to_int, 10**6),
        out_dir=get("output", "out_dir"),
    )

    backend_raw, backend_line = raw.get(("constants", "backend"), ("hybrid", 0))
    if backend_raw not in _BACKENDS:
        raise ConfigError(f"{path}:{backend_line}: backend must be one of {sorted(_BACKENDS)}")
    cfg.backend = _BACKENDS[backend_raw]

    if cfg.kind not in ("cyclicity", "exponent"):
        _, lineno = raw[("constants", "kind")]
        raise ConfigError(f"{path}:{lineno}: kind must be cyclicity or exponent")

    if ("bounds", "envelopes") in raw:
        value, lineno = raw[("bounds", "envelopes")]
        envs = tuple(v.strip() for v in value.split(",") if v.strip())
        bad = [e for e in envs if e not in _ENVELOPES]
        if bad:
            raise ConfigError(f"{path}:{lineno}: unknown envelope(s) {bad}; choose from {sorted(_ENVELOPES)}")
        cfg.envelopes = envs
    if cfg.exp_variant not in _EXP_VARIANTS:
        _, lineno = raw[("bounds", "exp_variant")]
        raise ConfigError(f"{path}:{lineno}: exp_variant must be one of {sorted(_EXP_VARIANTS)}")

    if ("bounds", "x_grid") in raw:
        value, lineno = raw[("bounds", "x_grid")]
        try:
            cfg.x_grid = tuple(float(v.strip()) for v in value.split(",") if v.strip())
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: x_grid must be comma-separated numbers")

    if ("scan", "q") in raw or ("scan", "a") in raw:
        if cfg.q > 1 and gcd(cfg.a, cfg.q) != 1:
            _, lineno = raw.get(("scan", "a"), raw.get(("scan", "q")))
            raise ConfigError(f"{path}:{lineno}: invalid progression, gcd({cfg.a}, {cfg.q}) != 1")
    return cfg


def _build_curve(path: str, raw) -> CurveSpec:
    if ("curve", "bundled") in raw:
        name, lineno = raw[("curve", "bundled")]
        explicit = [k for (s, k) in raw if s == "curve" and k != "bundled"]
        if explicit:
            raise ConfigError(f"{path}:{lineno}: bundled curve cannot be combined with {explicit}")
        if name not in BUNDLED:
            raise ConfigError(f"{path}:{lineno}: unknown bundled curve {name!r}; "
                              f"choose from {sorted(BUNDLED)}")
        return BUNDLED[name]
    needed = [k for k in ("a4", "a6", "conductor") if ("curve", k) not in raw]
    if needed:
        raise ConfigError(f"{path}: [curve] requires keys {needed} (or a bundled curve)")

    def cget(key, conv=None, default=None):
        if ("curve", key) not in raw:
            return default
        value, lineno = raw[("curve", key)]
        return conv(path, lineno, key, value) if conv else value

    kwargs = dict(
        a4=cget("a4", _to_int),
        a6=cget("a6", _to_int),
        label=cget("label", default=""),
        conductor=cget("conductor", _to_int),
    )
    if ("curve", "bad_primes") in raw:
        kwargs["bad_primes"] = frozenset(cget("bad_primes", _to_int_list))
    if ("curve", "cm_disc") in raw:
        kwargs["cm_disc"] = cget("cm_disc", _to_int)
    if ("curve", "serre_primes") in raw:
        kwargs["serre_primes"] = frozenset(cget("serre_primes", _to_int_list))
    if ("curve", "b_constant") in raw:
        kwargs["b_constant"] = cget("b_constant", _to_int)
    try:
        return CurveSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: [curve]: {exc}") from exc
