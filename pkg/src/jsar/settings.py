"""Tracker parameters: defaults, the flat key-value file format, and hashing.

Config files are plain text, one `key = value` per line, `#` starts a
comment. Keys are the usual ASCII symbol names
(`S`, `A`, `gamma`, `phi`, `theta_size`, `W_model`, `H_model`, `C`,
`zeta_e`, `zeta_s`, `eta_d`, `omega`, `N_e`) plus the implementation parameters
(`lambda`, `theta_trans`, `roi_area_factor`, ...). Unknown keys are rejected
so a typo never silently falls back to a default.

    cfg = parse_config("gamma = 1.05\\nmode = jsar-re")
    cfg.gamma          # 1.05
    config_hash(cfg)   # '3f0c...' (16 hex chars, stable across platforms)
"""

import hashlib
import math
from dataclasses import dataclass, fields, replace

from tracker_utils.io import read_text
from .errors import ConfigError

MODES = ("jsar", "jsar-re", "translation-only", "multi-scale-baseline")


@dataclass(frozen=True)
class TrackerConfig:
    # Published defaults; fixed for every evaluation.
    scale_count: int = 13
    aspect_count: int = 13
    gamma: float = 1.03
    phi: float = 1.02
    theta_size: float = 0.014
    model_width: int = 16
    model_height: int = 32
    cell_size: int = 4
    zeta_e: float = 0.0105
    zeta_s: float = 0.013
    eta_d: float = 0.02
    omega: float = 5.0
    proposal_count: int = 30

    # Values the published table does not give.
    lam: float = 1e-2
    theta_trans: float = 0.02
    roi_area_factor: float = 4.0
    template_size: int = 96
    output_sigma_factor: float = 1.0 / 16.0
    size_sigma_factor: float = 1.0 / 16.0
    output_peak: float = 0.05
    gray_offset: float = 0.5
    cn_offset: float = 0.1
    omega_rate: float = 1.1
    eta_rate: float = 0.9
    eta_floor: float = 1e-4
    eta_floor_ratio: float = 0.4
    baseline_scales: int = 5
    baseline_step: float = 1.03
    mode: str = "jsar"
    cn_table: str = ""

    def __post_init__(self):
        validate_config(self)

    @property
    def size_channel_count(self) -> int:
        """Length of one vectorized size-domain HOG sample: W_model*H_model*31/C^2."""
        return (self.model_width // self.cell_size) * (self.model_height // self.cell_size) * 31

    @property
    def redetection_enabled(self) -> bool:
        return self.mode == "jsar-re"

    @property
    def size_filter_enabled(self) -> bool:
        return self.mode in ("jsar", "jsar-re")


# File key -> dataclass field. Keys not listed map to the field of the same name.
KEY_TO_FIELD = {
    "S": "scale_count",
    "A": "aspect_count",
    "W_model": "model_width",
    "H_model": "model_height",
    "C": "cell_size",
    "N_e": "proposal_count",
    "lambda": "lam",
}
FIELD_TO_KEY = {v: k for k, v in KEY_TO_FIELD.items()}

_FIELD_TYPES = {f.name: f.type for f in fields(TrackerConfig)}


def config_keys() -> list[str]:
    """All addressable config file keys, in declaration order."""
    return [FIELD_TO_KEY.get(f.name, f.name) for f in fields(TrackerConfig)]


# =============================================================================
# Validation
# =============================================================================

def _require(cond: bool, field_name: str, message: str) -> None:
    if not cond:
        raise ConfigError(FIELD_TO_KEY.get(field_name, field_name), message)


def validate_config(cfg: TrackerConfig) -> None:
    """Check every TrackerConfig invariant; raise ConfigError naming the key."""
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.type in (float, "float"):
            _require(isinstance(value, (int, float)) and math.isfinite(value), f.name, f"must be a finite number, got {value!r}")
        elif f.type in (int, "int"):
            _require(isinstance(value, int) and not isinstance(value, bool), f.name, f"must be an integer, got {value!r}")

    for name in ("scale_count", "aspect_count"):
        n = getattr(cfg, name)
        _require(n >= 3 and n % 2 == 1, name, f"must be odd and >= 3, got {n}")
    _require(cfg.gamma > 1, "gamma", f"must be > 1, got {cfg.gamma}")
    _require(cfg.phi > 1, "phi", f"must be > 1, got {cfg.phi}")

    for name in ("theta_size", "theta_trans"):
        v = getattr(cfg, name)
        _require(0 <= v <= 1, name, f"must lie in [0, 1], got {v}")

    _require(cfg.cell_size >= 1, "cell_size", f"must be >= 1, got {cfg.cell_size}")
    for name in ("model_width", "model_height"):
        v = getattr(cfg, name)
        _require(v >= 3 * cfg.cell_size and v % cfg.cell_size == 0, name,
                 f"must be a multiple of C={cfg.cell_size} and at least 3 cells, got {v}")

    for name in ("zeta_e", "zeta_s", "eta_d", "omega", "output_peak",
                 "output_sigma_factor", "size_sigma_factor", "eta_floor"):
        v = getattr(cfg, name)
        _require(v > 0, name, f"must be positive, got {v}")

    _require(cfg.proposal_count >= 1, "proposal_count", f"must be >= 1, got {cfg.proposal_count}")
    _require(cfg.lam >= 0, "lam", f"must be non-negative, got {cfg.lam}")
    _require(cfg.roi_area_factor >= 1, "roi_area_factor", f"must be >= 1, got {cfg.roi_area_factor}")
    _require(cfg.template_size >= 3 * cfg.cell_size, "template_size",
             f"must be at least 3 cells ({3 * cfg.cell_size}px), got {cfg.template_size}")
    _require(cfg.gray_offset >= 0, "gray_offset", f"must be non-negative, got {cfg.gray_offset}")
    _require(cfg.cn_offset >= 0, "cn_offset", f"must be non-negative, got {cfg.cn_offset}")
    _require(cfg.omega_rate > 1, "omega_rate", f"must be > 1, got {cfg.omega_rate}")
    _require(0 < cfg.eta_rate < 1, "eta_rate", f"must lie in (0, 1), got {cfg.eta_rate}")
    _require(cfg.eta_floor <= cfg.eta_d, "eta_floor", f"must not exceed eta_d={cfg.eta_d}")
    _require(0 <= cfg.eta_floor_ratio <= 1, "eta_floor_ratio", f"must lie in [0, 1], got {cfg.eta_floor_ratio}")
    _require(cfg.baseline_scales >= 1 and cfg.baseline_scales % 2 == 1, "baseline_scales",
             f"must be odd and >= 1, got {cfg.baseline_scales}")
    _require(cfg.baseline_step > 1, "baseline_step", f"must be > 1, got {cfg.baseline_step}")
    _require(cfg.mode in MODES, "mode", f"must be one of {', '.join(MODES)}, got {cfg.mode!r}")


# =============================================================================
# Text format
# =============================================================================

def _coerce(key: str, field_name: str, raw: str):
    ftype = _FIELD_TYPES[field_name]
    try:
        if ftype in (int, "int"):
            return int(raw)
        if ftype in (float, "float"):
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError(raw)
            return value
    except ValueError:
        kind = "an integer" if ftype in (int, "int") else "a finite number"
        raise ConfigError(key, f"expected {kind}, got {raw!r}") from None
    return raw


def parse_overrides(text: str) -> dict:
    """Parse `key = value` text into {field_name: typed value} without defaults."""
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        field_name = KEY_TO_FIELD.get(key, key)
        if field_name not in _FIELD_TYPES or key in FIELD_TO_KEY:
            raise ConfigError(key, "unknown key")
        if field_name in overrides:
            raise ConfigError(key, f"duplicate key on line {lineno}")
        overrides[field_name] = _coerce(key, field_name, raw)
    return overrides


def parse_config(text: str) -> TrackerConfig:
    """Defaults, then overrides from `text`, then validation."""
    return TrackerConfig(**parse_overrides(text))


def override(cfg: TrackerConfig, key: str, raw: str) -> TrackerConfig:
    """Return `cfg` with one file key set from its text value."""
    return replace(cfg, **parse_overrides(f"{key} = {raw}"))


def format_config(cfg: TrackerConfig) -> str:
    """Serialize every field; parse_config(format_config(cfg)) == cfg."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        text = repr(float(value)) if f.type in (float, "float") else str(value)
        lines.append(f"{FIELD_TO_KEY.get(f.name, f.name)} = {text}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: TrackerConfig) -> str:
    """64-bit provenance hash over sorted keys at 9-decimal precision."""
    canonical = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        text = f"{float(value):.9f}" if f.type in (float, "float") else str(value)
        canonical.append(f"{FIELD_TO_KEY.get(f.name, f.name)}={text}")
    payload = "\n".join(sorted(canonical)).encode("utf-8")
    return hashlib.md5(payload).hexdigest()[:16]


def load_config(path: str | None) -> TrackerConfig:
    """TrackerConfig from a config file; defaults when no path is given."""
    if not path:
        return TrackerConfig()
    text = read_text(path)
    if text is None:
        raise ConfigError("config", f"file not found: {path}")
    return parse_config(text)
