"""Flat key-value experiment configuration.

The on-disk format is one `key = value` pair per line with dotted section
prefixes (`family.kind`, `sweep.steps`), `#` comments, and blank lines.
Every key maps to one typed field of ExperimentConfig; unknown or
duplicated keys are errors, not warnings, so a typo cannot silently fall
back to a default. Floats serialize through repr, which round-trips
bit-identically, and that property carries the whole config: parsing a
serialized config reproduces the dataclass exactly.

The resolved-config file written next to run outputs goes through
`resolved_text`, which drops the two keys with no bearing on the numbers
(worker count and output directory) so reruns of the same experiment
compare byte-identical no matter how they were scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .circle import Frequency
from .families import CircleMapFamily, FamilyKind, ForcingKind

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "serialize_config",
    "resolved_text",
    "load_config",
]


class ConfigError(Exception):
    """Bad configuration text or values; maps to CLI exit code 2."""


_KINDS = {
    "arctan": FamilyKind.ARCTAN,
    "rigid": FamilyKind.RIGID,
    "driven_arnold": FamilyKind.DRIVEN_ARNOLD,
    "projective": FamilyKind.PROJECTIVE,
}

_FORCINGS = {
    "none": ForcingKind.NONE,
    "cosine": ForcingKind.COSINE,
    "arctan_sine": ForcingKind.ARCTAN_SINE,
}


@dataclass
class ExperimentConfig:
    family_kind: str = "arctan"
    family_alpha: float = 500.0
    family_tau: float = 0.505
    family_q: int = 2
    family_forcing: str = "arctan_sine"
    family_amplitude: float = 3000.0
    omega: str = "golden"
    grid_size: int = 4096
    pullback_depth: int = 2000
    seed_x: float = 0.3
    orbit_n: int = 1_000_000
    constants_theta_grid: int = 4096
    constants_x_grid: int = 4096
    constants_level: float = 42.0
    hier_k0: int = 100
    hier_kappa: int = 2
    hier_m: tuple[int, ...] = (2, 3, 4)
    hier_eps: tuple[float, ...] = (5e-4, 1e-5, 1e-6)
    hier_s: float | None = None          # None: take S from the constants
    hier_levels: int = 2                 # critical-step applications
    hier_samples: int = 1 << 21
    hier_refine_tol: tuple[float, ...] = (1e-12, 1e-14)
    sweep_parameter: str = "tau"
    sweep_start: float = 0.0
    sweep_stop: float = 1.0
    sweep_steps: int = 512
    lipschitz_pair_budget: int = 100_000
    lipschitz_j_max: int = 3
    dimension_grid: int = 1 << 16
    dimension_box_grid: int = 1 << 17
    dimension_centers: int = 16
    dimension_eps_min: float = 1e-3
    dimension_eps_max: float = 0.45
    dimension_eps_count: int = 12
    out_dir: str = "out"
    workers: int = 1
    seed: int = 0

    def build_omega(self) -> Frequency:
        try:
            return Frequency.parse(self.omega)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"omega: {exc}") from exc

    def build_family(self) -> CircleMapFamily:
        if self.family_kind not in _KINDS:
            raise ConfigError(f"family.kind: unknown kind "
                              f"{self.family_kind!r}")
        if self.family_forcing not in _FORCINGS:
            raise ConfigError(f"family.forcing: unknown forcing "
                              f"{self.family_forcing!r}")
        try:
            return CircleMapFamily(
                kind=_KINDS[self.family_kind],
                omega=self.build_omega(),
                tau=self.family_tau,
                alpha=self.family_alpha,
                q=self.family_q,
                forcing=_FORCINGS[self.family_forcing],
                amplitude=self.family_amplitude,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs)


def _parse_int(text: str) -> int:
    return int(text, 10)


def _parse_float(text: str) -> float:
    return float(text)


def _parse_str(text: str) -> str:
    return text


def _parse_int_list(text: str):
    return tuple(int(t.strip(), 10) for t in text.split(",") if t.strip())


def _parse_float_list(text: str):
    return tuple(float(t.strip()) for t in text.split(",") if t.strip())


def _parse_opt_float(text: str):
    return None if text == "auto" else float(text)


def _fmt_plain(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _fmt_list(value) -> str:
    return ",".join(_fmt_plain(v) for v in value)


def _fmt_opt(value) -> str:
    return "auto" if value is None else repr(value)


# (dotted key, attribute, parser, formatter) in serialization order
_FIELDS = (
    ("family.kind", "family_kind", _parse_str, _fmt_plain),
    ("family.alpha", "family_alpha", _parse_float, _fmt_plain),
    ("family.tau", "family_tau", _parse_float, _fmt_plain),
    ("family.q", "family_q", _parse_int, _fmt_plain),
    ("family.forcing", "family_forcing", _parse_str, _fmt_plain),
    ("family.amplitude", "family_amplitude", _parse_float, _fmt_plain),
    ("omega", "omega", _parse_str, _fmt_plain),
    ("grid.size", "grid_size", _parse_int, _fmt_plain),
    ("grid.pullback_depth", "pullback_depth", _parse_int, _fmt_plain),
    ("grid.seed_x", "seed_x", _parse_float, _fmt_plain),
    ("orbit.n", "orbit_n", _parse_int, _fmt_plain),
    ("constants.theta_grid", "constants_theta_grid", _parse_int, _fmt_plain),
    ("constants.x_grid", "constants_x_grid", _parse_int, _fmt_plain),
    ("constants.level", "constants_level", _parse_float, _fmt_plain),
    ("hierarchy.k0", "hier_k0", _parse_int, _fmt_plain),
    ("hierarchy.kappa", "hier_kappa", _parse_int, _fmt_plain),
    ("hierarchy.m", "hier_m", _parse_int_list, _fmt_list),
    ("hierarchy.eps", "hier_eps", _parse_float_list, _fmt_list),
    ("hierarchy.s", "hier_s", _parse_opt_float, _fmt_opt),
    ("hierarchy.levels", "hier_levels", _parse_int, _fmt_plain),
    ("hierarchy.samples", "hier_samples", _parse_int, _fmt_plain),
    ("hierarchy.refine_tol", "hier_refine_tol", _parse_float_list, _fmt_list),
    ("sweep.parameter", "sweep_parameter", _parse_str, _fmt_plain),
    ("sweep.start", "sweep_start", _parse_float, _fmt_plain),
    ("sweep.stop", "sweep_stop", _parse_float, _fmt_plain),
    ("sweep.steps", "sweep_steps", _parse_int, _fmt_plain),
    ("lipschitz.pair_budget", "lipschitz_pair_budget", _parse_int, _fmt_plain),
    ("lipschitz.j_max", "lipschitz_j_max", _parse_int, _fmt_plain),
    ("dimension.grid", "dimension_grid", _parse_int, _fmt_plain),
    ("dimension.box_grid", "dimension_box_grid", _parse_int, _fmt_plain),
    ("dimension.centers", "dimension_centers", _parse_int, _fmt_plain),
    ("dimension.eps_min", "dimension_eps_min", _parse_float, _fmt_plain),
    ("dimension.eps_max", "dimension_eps_max", _parse_float, _fmt_plain),
    ("dimension.eps_count", "dimension_eps_count", _parse_int, _fmt_plain),
    ("output.dir", "out_dir", _parse_str, _fmt_plain),
    ("run.workers", "workers", _parse_int, _fmt_plain),
    ("run.seed", "seed", _parse_int, _fmt_plain),
)

_BY_KEY = {key: (attr, parse) for key, attr, parse, _ in _FIELDS}

# scheduling/placement keys, omitted from the resolved-config file
_VOLATILE = {"run.workers", "output.dir"}


def parse_config(text: str) -> ExperimentConfig:
    values = {}
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', "
                              f"got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _BY_KEY:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        attr, parse = _BY_KEY[key]
        try:
            values[attr] = parse(val)
        except (ValueError, OverflowError) as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from exc
    return ExperimentConfig(**values)


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = [f"{key} = {fmt(getattr(cfg, attr))}"
             for key, attr, _, fmt in _FIELDS]
    return "\n".join(lines) + "\n"


def resolved_text(cfg: ExperimentConfig) -> str:
    """Config serialization without scheduling keys, for run outputs."""
    lines = [f"{key} = {fmt(getattr(cfg, attr))}"
             for key, attr, _, fmt in _FIELDS if key not in _VOLATILE]
    return "\n".join(lines) + "\n"


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
