"""
Configuration parser for gauge_sim run documents.
Reads and writes the line-oriented `section.key = value` format.
"""

import hashlib
import logging
import math
import os
from typing import Any, Callable, Dict, List, Optional, Tuple

from core.errors import ConfigError
from core.models import (
    ActionMode, DensityParams, EprSpec, Estimator, ExperimentConfig, IntrusionMode, IntrusionSpec,
    IntrusionStage, OracleMode, ParticleParams, PotentialKind, PotentialSpec, Projection, SamplerConfig,
    ScreenSpec, SeedSpec
)

logger = logging.getLogger(__name__)

EXPERIMENT_NAMES = ("double_slit", "sweep", "aharonov_bohm", "epr", "barrier", "oracle_compare")

REQUIRED_KEYS = ("particle.p", "geometry.d", "geometry.L", "screen.bins")

# Every optional key with its default. density.xi_bar defaults to λ/10.
DEFAULTS: Dict[str, Any] = {
    "experiment": "double_slit",
    "particle.m": 1.0,
    "geometry.slit_width": 0.5,
    "geometry.divergence": 0.5,
    "geometry.pair_weight": 1.0,
    "screen.x_min": -50.0,
    "screen.x_max": 50.0,
    "screen.axis": "x",
    "intrusion.mode": "none",
    "intrusion.q": 0.0,
    "intrusion.delta_kappa": 0.0,
    "intrusion.stage": "pre_slit",
    "flux.F": 0.0,
    "barrier.kind": "free",
    "barrier.V": 0.0,
    "barrier.x_lo": 0.0,
    "barrier.x_hi": 1.0,
    "barrier.start": -5.0,
    "sampler.n_paths": 10000,
    "sampler.n_joints": 2,
    "sampler.perturb_scale": 0.05,
    "sampler.accept_tol": math.pi,
    "sampler.projection": "band_filter",
    "sampler.max_bisection_iters": 200,
    "sampler.mode": "relativistic",
    "sampler.workers": 1,
    "seed.master": 0,
    "seed.streams": 4,
    "density.a": 1.0,
    "density.b": 1.0,
    "density.xi_bar": None,
    "run.estimator": "analytic",
    "sweep.distances": (),
    "oracle.mode": "idealized",
    "epr.S_rho": 0.0,
    "epr.S_rho_prime": 0.0,
    "epr.delta_S": 0.0,
}


def _choices(*values: str) -> Tuple[Callable[[str], str], Callable[[Any], bool], str]:
    return str, lambda v: v in values, f"one of {', '.join(values)}"


def _integer(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        value = float(text)
        if not value.is_integer():
            raise
        return int(value)


def _distances(text: str) -> Tuple[float, ...]:
    items = [item.strip() for item in text.split(",") if item.strip()]
    return tuple(float(item) for item in items)


_positive = (float, lambda v: v > 0, "> 0")
_non_negative = (float, lambda v: v >= 0, ">= 0")
_finite = (float, math.isfinite, "finite")

# key -> (converter, check, rule shown in range errors)
_KEY_RULES: Dict[str, Tuple[Callable[[str], Any], Callable[[Any], bool], str]] = {
    "experiment": _choices(*EXPERIMENT_NAMES),
    "particle.m": _positive,
    "particle.p": _positive,
    "geometry.d": _positive,
    "geometry.L": _positive,
    "geometry.slit_width": _positive,
    "geometry.divergence": _positive,
    "geometry.pair_weight": _positive,
    "screen.bins": (_integer, lambda v: v >= 2, ">= 2"),
    "screen.x_min": _finite,
    "screen.x_max": _finite,
    "screen.axis": _choices("x", "y"),
    "intrusion.mode": _choices(*(m.value for m in IntrusionMode)),
    "intrusion.q": _non_negative,
    "intrusion.delta_kappa": _finite,
    "intrusion.stage": _choices(*(s.value for s in IntrusionStage)),
    "flux.F": _finite,
    "barrier.kind": _choices(*(k.value for k in PotentialKind)),
    "barrier.V": _non_negative,
    "barrier.x_lo": _finite,
    "barrier.x_hi": _finite,
    "barrier.start": _finite,
    "sampler.n_paths": (_integer, lambda v: v >= 1, ">= 1"),
    "sampler.n_joints": (_integer, lambda v: 0 <= v <= 64, "in [0, 64]"),
    "sampler.perturb_scale": _positive,
    "sampler.accept_tol": (float, lambda v: 0 < v <= math.pi, "in (0, π]"),
    "sampler.projection": _choices(*(p.value for p in Projection)),
    "sampler.max_bisection_iters": (_integer, lambda v: v >= 1, ">= 1"),
    "sampler.mode": _choices(*(m.value for m in ActionMode)),
    "sampler.workers": (_integer, lambda v: v >= 1, ">= 1"),
    "seed.master": (_integer, lambda v: 0 <= v < 2 ** 64, "a 64-bit unsigned integer"),
    "seed.streams": (_integer, lambda v: v >= 1, ">= 1"),
    "density.a": _positive,
    "density.b": _positive,
    "density.xi_bar": _positive,
    "run.estimator": _choices(*(e.value for e in Estimator)),
    "sweep.distances": (_distances, lambda v: all(d > 0 for d in v), "a comma list of positive distances"),
    "oracle.mode": _choices(*(m.value for m in OracleMode)),
    "epr.S_rho": _finite,
    "epr.S_rho_prime": _finite,
    "epr.delta_S": _finite,
}

# Rules spanning several keys: (keys involved, check on the full table, message)
_CROSS_RULES: List[Tuple[Tuple[str, ...], Callable[[Dict[str, Any]], bool], str]] = [
    (
        ("screen.x_min", "screen.x_max"),
        lambda s: s["screen.x_min"] < s["screen.x_max"],
        "screen.x_min must be below screen.x_max",
    ),
    (
        ("geometry.d", "screen.x_min", "screen.x_max"),
        lambda s: s["geometry.d"] < s["screen.x_max"] - s["screen.x_min"],
        "slit separation geometry.d must be smaller than the screen range",
    ),
    (
        ("barrier.kind", "barrier.x_lo", "barrier.x_hi"),
        lambda s: s["barrier.kind"] != PotentialKind.BARRIER.value or s["barrier.x_lo"] < s["barrier.x_hi"],
        "barrier.x_lo must be below barrier.x_hi",
    ),
]


class ConfigParser:
    """
    Parses run documents into validated ExperimentConfig values.

    Lines hold `section.key = value`; `#` starts a comment. Every failure
    is raised as a ConfigError carrying the line number where one exists.
    """

    def __init__(self, overrides: Optional[Dict[str, str]] = None):
        """
        Initialize the parser.

        Args:
            overrides: Raw values used in place of DEFAULTS for keys the document omits
        """
        self.overrides = dict(overrides or {})
        for key in self.overrides:
            if key not in _KEY_RULES:
                raise ConfigError("unknown_key", f"unknown override key '{key}'", key=key)

    def parse_file(self, file_path: str) -> ExperimentConfig:
        if not os.path.exists(file_path):
            raise ConfigError("missing", f"configuration file not found: {file_path}")
        with open(file_path, "r", encoding="utf-8") as file:
            return self.parse_text(file.read())

    def parse_text(self, text: str) -> ExperimentConfig:
        values, lines = self._read_entries(text)
        for key in REQUIRED_KEYS:
            if key not in values:
                raise ConfigError("missing", f"required key '{key}' is missing", key=key)

        for key, raw in self.overrides.items():
            if key not in values:
                values[key] = self._convert(key, raw, None)

        settings = dict(DEFAULTS)
        settings.update(values)
        self._check_cross_rules(settings, values, lines)
        try:
            return build_config(settings)
        except ValueError as e:
            raise ConfigError("range", str(e)) from e

    @staticmethod
    def _check_cross_rules(settings: Dict[str, Any], values: Dict[str, Any], lines: Dict[str, int]) -> None:
        """
        Raise on the first violated rule between keys.

        The error names the key that completed the violation: the involved
        key on the latest document line, else an involved override, else
        the last involved key.
        """
        for keys, check, message in _CROSS_RULES:
            if check(settings):
                continue
            in_document = [key for key in keys if key in lines]
            if in_document:
                key = max(in_document, key=lines.get)
            else:
                key = next((k for k in reversed(keys) if k in values), keys[-1])
            raise ConfigError("range", message, key=key, line=lines.get(key))

    def _read_entries(self, text: str) -> Tuple[Dict[str, Any], Dict[str, int]]:
        values: Dict[str, Any] = {}
        lines: Dict[str, int] = {}
        for number, raw_line in enumerate(text.splitlines(), start=1):
            line = raw_line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("syntax", f"expected 'key = value', got {raw_line.strip()!r}", line=number)
            key, raw = (part.strip() for part in line.split("=", 1))
            if not key:
                raise ConfigError("syntax", "empty key", line=number)
            if key not in _KEY_RULES:
                raise ConfigError("unknown_key", f"unknown key '{key}'", key=key, line=number)
            if key in values:
                raise ConfigError("syntax", f"key '{key}' given twice (first on line {lines[key]})", key=key, line=number)
            values[key] = self._convert(key, raw, number)
            lines[key] = number
        return values, lines

    @staticmethod
    def _convert(key: str, raw: str, line: Optional[int]) -> Any:
        converter, check, rule = _KEY_RULES[key]
        try:
            value = converter(raw)
        except ValueError:
            raise ConfigError("syntax", f"cannot read {raw!r} as a value for '{key}'", key=key, line=line)
        if not check(value):
            raise ConfigError("range", f"'{key}' must be {rule}, got {raw!r}", key=key, line=line)
        return value


def build_config(settings: Dict[str, Any]) -> ExperimentConfig:
    """Assemble an ExperimentConfig from a complete key table."""
    particle = ParticleParams(mass=settings["particle.m"], momentum=settings["particle.p"])
    if settings["density.xi_bar"] is None:
        density = DensityParams.for_particle(particle, a=settings["density.a"], b=settings["density.b"])
    else:
        density = DensityParams(settings["density.a"], settings["density.b"], settings["density.xi_bar"])

    return ExperimentConfig(
        particle=particle,
        slit_separation=settings["geometry.d"],
        screen=ScreenSpec(
            n_bins=settings["screen.bins"],
            distance=settings["geometry.L"],
            x_min=settings["screen.x_min"],
            x_max=settings["screen.x_max"],
            axis=settings["screen.axis"],
        ),
        experiment=settings["experiment"],
        intrusion=IntrusionSpec(
            mode=IntrusionMode(settings["intrusion.mode"]),
            photon_momentum=settings["intrusion.q"],
            fixed_delta_kappa=settings["intrusion.delta_kappa"],
            stage=IntrusionStage(settings["intrusion.stage"]),
        ),
        flux=settings["flux.F"],
        pot=PotentialSpec(
            kind=PotentialKind(settings["barrier.kind"]),
            V=settings["barrier.V"],
            x_lo=settings["barrier.x_lo"],
            x_hi=settings["barrier.x_hi"],
        ),
        sampler=SamplerConfig(
            n_paths=settings["sampler.n_paths"],
            n_joints=settings["sampler.n_joints"],
            perturb_scale=settings["sampler.perturb_scale"],
            accept_tol=settings["sampler.accept_tol"],
            projection=Projection(settings["sampler.projection"]),
            max_bisection_iters=settings["sampler.max_bisection_iters"],
            action_mode=ActionMode(settings["sampler.mode"]),
            workers=settings["sampler.workers"],
        ),
        seeds=SeedSpec(master_seed=settings["seed.master"], stream_count=settings["seed.streams"]),
        estimator=Estimator(settings["run.estimator"]),
        density=density,
        slit_width=settings["geometry.slit_width"],
        divergence=settings["geometry.divergence"],
        pair_weight=settings["geometry.pair_weight"],
        barrier_start=settings["barrier.start"],
        sweep_distances=settings["sweep.distances"],
        oracle_mode=OracleMode(settings["oracle.mode"]),
        epr=EprSpec(
            S_rho=settings["epr.S_rho"],
            S_rho_prime=settings["epr.S_rho_prime"],
            delta_S=settings["epr.delta_S"],
        ),
    )


def parse_config(text: str, overrides: Optional[Dict[str, str]] = None) -> ExperimentConfig:
    """
    Parse a run document.

    Args:
        text: Document text
        overrides: Raw values replacing defaults for keys the document omits

    Returns:
        Validated ExperimentConfig with defaults applied

    Raises:
        ConfigError: On syntax errors, unknown keys, range violations or missing keys
    """
    return ConfigParser(overrides).parse_text(text)


def _config_entries(cfg: ExperimentConfig) -> List[Tuple[str, Any]]:
    return [
        ("experiment", cfg.experiment),
        ("particle.m", cfg.particle.mass),
        ("particle.p", cfg.particle.momentum),
        ("geometry.d", cfg.slit_separation),
        ("geometry.L", cfg.screen.distance),
        ("geometry.slit_width", cfg.slit_width),
        ("geometry.divergence", cfg.divergence),
        ("geometry.pair_weight", cfg.pair_weight),
        ("screen.bins", cfg.screen.n_bins),
        ("screen.x_min", cfg.screen.x_min),
        ("screen.x_max", cfg.screen.x_max),
        ("screen.axis", cfg.screen.axis),
        ("intrusion.mode", cfg.intrusion.mode.value),
        ("intrusion.q", cfg.intrusion.photon_momentum),
        ("intrusion.delta_kappa", cfg.intrusion.fixed_delta_kappa),
        ("intrusion.stage", cfg.intrusion.stage.value),
        ("flux.F", cfg.flux),
        ("barrier.kind", cfg.pot.kind.value),
        ("barrier.V", cfg.pot.V),
        ("barrier.x_lo", cfg.pot.x_lo),
        ("barrier.x_hi", cfg.pot.x_hi),
        ("barrier.start", cfg.barrier_start),
        ("sampler.n_paths", cfg.sampler.n_paths),
        ("sampler.n_joints", cfg.sampler.n_joints),
        ("sampler.perturb_scale", cfg.sampler.perturb_scale),
        ("sampler.accept_tol", cfg.sampler.accept_tol),
        ("sampler.projection", cfg.sampler.projection.value),
        ("sampler.max_bisection_iters", cfg.sampler.max_bisection_iters),
        ("sampler.mode", cfg.sampler.action_mode.value),
        ("sampler.workers", cfg.sampler.workers),
        ("seed.master", cfg.seeds.master_seed),
        ("seed.streams", cfg.seeds.stream_count),
        ("density.a", cfg.density.a),
        ("density.b", cfg.density.b),
        ("density.xi_bar", cfg.density.xi_bar),
        ("run.estimator", cfg.estimator.value),
        ("sweep.distances", cfg.sweep_distances),
        ("oracle.mode", cfg.oracle_mode.value),
        ("epr.S_rho", cfg.epr.S_rho),
        ("epr.S_rho_prime", cfg.epr.S_rho_prime),
        ("epr.delta_S", cfg.epr.delta_S),
    ]


def _format_value(value: Any) -> str:
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Full document for a config; floats use repr so parsing it back is exact."""
    lines = [f"{key} = {_format_value(value)}" for key, value in _config_entries(cfg)]
    return "\n".join(lines) + "\n"


def config_hash(cfg: ExperimentConfig) -> str:
    """SHA-256 of the serialized config."""
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()
