"""Experiment configuration: dataclasses, key=value file parsing, canonical dumps.

Configs are flat INI-style text with [experiment], [channel], [estimator]
and [drift] sections.  Every key has a documented default (see README), so
an empty file is a valid config.  Parsing is strict: unknown sections or
keys are errors, reported with the offending line number.  dump_config
renders the fully resolved canonical form; parse(dump(cfg)) always
reproduces cfg, which is what makes run manifests replayable.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import re
from dataclasses import dataclass

from .estimator import EstimatorConfig
from .protocol import SCHEMES


class ConfigError(ValueError):
    """Invalid experiment config; str() renders path:line: message."""

    def __init__(self, message: str, path: str = "<config>", line: int | None = None):
        self.message = message
        self.path = path
        self.line = line
        super().__init__(str(self))

    def __str__(self) -> str:
        if self.line is not None:
            return f"{self.path}:{self.line}: {self.message}"
        return f"{self.path}: {self.message}"


@dataclass(frozen=True)
class OffsetModel:
    """Per-trial draw of the true offset: uniform over +-halfwidth, or a fixed value."""

    kind: str = "uniform"
    halfwidth: float = 0.1
    value: float = 0.05

    def __post_init__(self):
        if self.kind not in ("uniform", "fixed"):
            raise ValueError(f"offset_model must be 'uniform' or 'fixed', got {self.kind!r}")
        if self.kind == "uniform" and not 0.0 < self.halfwidth <= 0.5:
            raise ValueError("offset_halfwidth must be in (0, 0.5]")

    def draw(self, rng) -> float:
        if self.kind == "fixed":
            return self.value
        return float(rng.uniform(-self.halfwidth, self.halfwidth))


@dataclass(frozen=True)
class ChannelSpec:
    """Channel model selector plus the line-of-sight scene parameters."""

    model: str = "rayleigh"
    carrier_ghz: float = 3.5
    room: tuple[float, float, float] = (100.0, 100.0, 10.0)
    spacing_wavelengths: float = 0.5
    mount_height: float = 5.0
    patch_exponent: float = 2.0
    patch_max_gain_dbi: float = 6.0
    patch_front_to_back_db: float = 20.0
    normalize: bool = True

    def __post_init__(self):
        if self.model not in ("rayleigh", "los"):
            raise ValueError(f"channel model must be 'rayleigh' or 'los', got {self.model!r}")
        if self.carrier_ghz <= 0:
            raise ValueError("carrier_ghz must be positive")
        if len(self.room) != 3 or any(d <= 0 for d in self.room):
            raise ValueError("room must be three positive dimensions in meters")
        if self.spacing_wavelengths <= 0:
            raise ValueError("spacing_wavelengths must be positive")

    @property
    def wavelength(self) -> float:
        from .channels import SPEED_OF_LIGHT
        return SPEED_OF_LIGHT / (self.carrier_ghz * 1e9)


@dataclass(frozen=True)
class DriftSpec:
    """Oscillator drift timeline parameters."""

    drift_rate: float = 0.0
    resync_threshold: float = 1e-3
    slots: int = 200
    snr_db: float = 10.0

    def __post_init__(self):
        if self.slots < 1:
            raise ValueError("slots must be >= 1")
        if self.resync_threshold <= 0:
            raise ValueError("resync_threshold must be positive")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of a Monte Carlo experiment."""

    mp: int = 16
    ms: int = 16
    tau_p: int | None = None
    n: int = 100
    cycles: int = 4
    leading_one: bool = True
    snr_grid_db: tuple[float, ...] = (-10.0, -5.0, 0.0, 5.0, 10.0)
    trials: int = 1000
    schemes: tuple[str, ...] = SCHEMES
    master_seed: int = 1
    offset: OffsetModel = OffsetModel()
    noise_scale: float = 1.0
    channel: ChannelSpec = ChannelSpec()
    estimator: EstimatorConfig = EstimatorConfig()
    drift: DriftSpec = DriftSpec()

    def __post_init__(self):
        if self.mp < 1 or self.ms < 1:
            raise ValueError("antenna counts mp and ms must be >= 1")
        if self.tau_p is None:
            object.__setattr__(self, "tau_p", self.ms)
        if self.tau_p < self.ms:
            raise ValueError(f"tau_p = {self.tau_p} must be >= ms = {self.ms}")
        if self.n < 2:
            raise ValueError("sync burst length n must be >= 2; "
                             "the offset is unidentifiable from a single sample")
        if self.cycles < 1 or self.cycles / self.n >= 0.5:
            raise ValueError("cycles must be >= 1 with cycles/n < 1/2")
        if not self.snr_grid_db:
            raise ValueError("snr_db grid must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.schemes:
            raise ValueError("schemes must be non-empty")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad:
            raise ValueError(f"unknown schemes {bad}; expected a subset of {list(SCHEMES)}")
        if len(set(self.schemes)) != len(self.schemes):
            raise ValueError("schemes must not repeat")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be >= 0")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must fit in 64 bits")


# ---------------------------------------------------------------------------
# key tables: (section, key) -> (target field path, parser, renderer)

def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _parse_float_list(raw: str) -> tuple[float, ...]:
    parts = [p for p in re.split(r"[,\s]+", raw.strip()) if p]
    if not parts:
        raise ValueError("expected a comma-separated list of numbers")
    return tuple(float(p) for p in parts)


def _parse_str_list(raw: str) -> tuple[str, ...]:
    parts = [p for p in re.split(r"[,\s]+", raw.strip()) if p]
    return tuple(parts)


def _render_list(values) -> str:
    return ",".join(_render_value(v) for v in values)


def _render_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


_SCHEMA = {
    "experiment": {
        "mp": int,
        "ms": int,
        "tau_p": int,
        "n": int,
        "cycles": int,
        "leading_one": _parse_bool,
        "snr_db": _parse_float_list,
        "trials": int,
        "schemes": _parse_str_list,
        "master_seed": int,
        "offset_model": str,
        "offset_halfwidth": float,
        "offset_value": float,
        "noise_scale": float,
    },
    "channel": {
        "model": str,
        "carrier_ghz": float,
        "room": _parse_float_list,
        "spacing_wavelengths": float,
        "mount_height": float,
        "patch_exponent": float,
        "patch_max_gain_dbi": float,
        "patch_front_to_back_db": float,
        "normalize": _parse_bool,
    },
    "estimator": {
        "search_halfwidth": float,
        "coarse_grid_points": int,
        "refine_tolerance": float,
        "refine_max_iters": int,
    },
    "drift": {
        "drift_rate": float,
        "resync_threshold": float,
        "slots": int,
        "snr_db": float,
    },
}


def _line_for_message(text: str, section: str, present_keys, message: str) -> int | None:
    """Best-effort line number for a validation error.

    Prefers a present key whose name appears in the message, then any
    present key, then the section header.
    """
    named = [k for k in present_keys
             if re.search(rf"\b{re.escape(k)}\b", message)]
    for key in named + list(present_keys):
        line = _find_line(text, section, key)
        if line is not None:
            return line
    return _find_line(text, section, None)


def _find_line(text: str, section: str, key: str | None) -> int | None:
    """Best-effort line number of a key (or section header) in the raw text."""
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        header = re.match(r"\[([^\]]+)\]", stripped)
        if header:
            current = header.group(1).strip().lower()
            if key is None and current == section:
                return lineno
            continue
        if key is None or current != section:
            continue
        if re.match(rf"{re.escape(key)}\s*[=:]", stripped):
            return lineno
    return None


def parse_config_text(text: str, path: str = "<config>") -> ExperimentConfig:
    """Parse a config (or manifest) body into an ExperimentConfig."""
    parser = configparser.ConfigParser(interpolation=None,
                                       inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(str(exc).replace("\n", " "), path=path, line=line) from exc

    values: dict[str, dict[str, object]] = {name: {} for name in _SCHEMA}
    for section in parser.sections():
        low = section.lower()
        if low == "run":                   # manifest metadata: ignored on replay
            continue
        if low not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]", path=path,
                              line=_find_line(text, low, None))
        for key, raw in parser.items(section):
            if key not in _SCHEMA[low]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]",
                                  path=path, line=_find_line(text, low, key))
            try:
                values[low][key] = _SCHEMA[low][key](raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}", path=path,
                                  line=_find_line(text, low, key)) from exc

    def build(section, ctor, mapping):
        kwargs = {}
        present = []
        for key, field_name in mapping.items():
            if key in values[section]:
                kwargs[field_name] = values[section][key]
                present.append(key)
        try:
            return ctor(**kwargs)
        except ValueError as exc:
            line = _line_for_message(text, section, present, str(exc))
            raise ConfigError(f"invalid [{section}] settings: {exc}", path=path,
                              line=line) from exc

    offset = build("experiment", OffsetModel, {
        "offset_model": "kind", "offset_halfwidth": "halfwidth", "offset_value": "value",
    })
    channel = build("channel", ChannelSpec, {
        "model": "model", "carrier_ghz": "carrier_ghz", "room": "room",
        "spacing_wavelengths": "spacing_wavelengths", "mount_height": "mount_height",
        "patch_exponent": "patch_exponent", "patch_max_gain_dbi": "patch_max_gain_dbi",
        "patch_front_to_back_db": "patch_front_to_back_db", "normalize": "normalize",
    })
    est_kwargs = dict(values["estimator"])
    if est_kwargs.get("coarse_grid_points") == 0:
        est_kwargs["coarse_grid_points"] = None
    try:
        est = EstimatorConfig(**est_kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid [estimator] settings: {exc}", path=path,
                          line=_find_line(text, "estimator", None)) from exc
    drift = build("drift", DriftSpec, {
        "drift_rate": "drift_rate", "resync_threshold": "resync_threshold",
        "slots": "slots", "snr_db": "snr_db",
    })

    exp = values["experiment"]
    kwargs = {}
    present = []
    for key, field_name in (("mp", "mp"), ("ms", "ms"), ("tau_p", "tau_p"), ("n", "n"),
                            ("cycles", "cycles"), ("leading_one", "leading_one"),
                            ("snr_db", "snr_grid_db"), ("trials", "trials"),
                            ("schemes", "schemes"), ("master_seed", "master_seed"),
                            ("noise_scale", "noise_scale")):
        if key in exp:
            kwargs[field_name] = exp[key]
            present.append(key)
    try:
        return ExperimentConfig(offset=offset, channel=channel, estimator=est,
                                drift=drift, **kwargs)
    except ValueError as exc:
        line = _line_for_message(text, "experiment", present, str(exc))
        raise ConfigError(f"invalid [experiment] settings: {exc}", path=path,
                          line=line) from exc


def parse_config(path) -> ExperimentConfig:
    """Load and validate a config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", path=str(path)) from exc
    return parse_config_text(text, path=str(path))


def dump_config(cfg: ExperimentConfig) -> str:
    """Canonical, fully resolved config text; parse(dump(cfg)) == cfg."""
    est_points = cfg.estimator.coarse_grid_points
    sections = {
        "experiment": {
            "mp": cfg.mp,
            "ms": cfg.ms,
            "tau_p": cfg.tau_p,
            "n": cfg.n,
            "cycles": cfg.cycles,
            "leading_one": cfg.leading_one,
            "snr_db": _render_list(cfg.snr_grid_db),
            "trials": cfg.trials,
            "schemes": ",".join(cfg.schemes),
            "master_seed": cfg.master_seed,
            "offset_model": cfg.offset.kind,
            "offset_halfwidth": cfg.offset.halfwidth,
            "offset_value": cfg.offset.value,
            "noise_scale": cfg.noise_scale,
        },
        "channel": {
            "model": cfg.channel.model,
            "carrier_ghz": cfg.channel.carrier_ghz,
            "room": _render_list(cfg.channel.room),
            "spacing_wavelengths": cfg.channel.spacing_wavelengths,
            "mount_height": cfg.channel.mount_height,
            "patch_exponent": cfg.channel.patch_exponent,
            "patch_max_gain_dbi": cfg.channel.patch_max_gain_dbi,
            "patch_front_to_back_db": cfg.channel.patch_front_to_back_db,
            "normalize": cfg.channel.normalize,
        },
        "estimator": {
            "search_halfwidth": cfg.estimator.search_halfwidth,
            "coarse_grid_points": 0 if est_points is None else est_points,
            "refine_tolerance": cfg.estimator.refine_tolerance,
            "refine_max_iters": cfg.estimator.refine_max_iters,
        },
        "drift": {
            "drift_rate": cfg.drift.drift_rate,
            "resync_threshold": cfg.drift.resync_threshold,
            "slots": cfg.drift.slots,
            "snr_db": cfg.drift.snr_db,
        },
    }
    out = io.StringIO()
    for name, body in sections.items():
        out.write(f"[{name}]\n")
        for key, value in body.items():
            rendered = value if isinstance(value, str) else _render_value(value)
            out.write(f"{key} = {rendered}\n")
        out.write("\n")
    return out.getvalue()


def config_fingerprint(cfg: ExperimentConfig) -> str:
    """Stable identity of a fully resolved config (SHA-256 of the canonical dump)."""
    return hashlib.sha256(dump_config(cfg).encode("utf-8")).hexdigest()
