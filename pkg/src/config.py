"""Configuration loader for the MIMO-MC-CDMA link simulator.

Two layers:

* Application settings (worker pool, output paths) come from config.toml
  plus environment overrides read after .env is loaded.
* Experiment descriptions are flat ``key = value`` files parsed into a
  frozen :class:`SimConfig`; command-line flags override file values.

Example:
    >>> from src.config import AppConfig, parse_config, render_config
    >>> app = AppConfig.load()
    >>> app.runtime.batch_frames
    10
    >>> cfg = parse_config("modulation = qpsk,64qam\\nsnr = 0:2:10\\n")
    >>> cfg.snr_points()
    [0.0, 2.0, 4.0, 6.0, 8.0, 10.0]
    >>> parse_config(render_config(cfg)) == cfg
    True
"""

from __future__ import annotations

import logging
import math
import os
import sys
from collections.abc import Callable, Mapping
from pathlib import Path
from typing import Any, Literal

from dotenv import load_dotenv
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.phy.fec import ConvCode
from src.phy.modem import get_scheme
from src.phy.ofdm import OfdmGrid
from src.phy.spread import CodeKind, level_width

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

# LFSR seeds user_id + 1 must stay non-zero inside the 7-stage register.
MAX_PN_USERS = 127


class ConfigError(Exception):
    """Raised when configuration loading fails.

    Covers unreadable or invalid config.toml, malformed experiment lines
    (message carries the line number) and out-of-range values (message
    names the key).
    """

    pass


# =============================================================================
# Application settings (config.toml + environment)
# =============================================================================


class RuntimeConfig(BaseModel):
    """Worker pool settings.

    Example:
        >>> RuntimeConfig(workers=4).batch_frames
        10
    """

    workers: int = Field(ge=0, default=0)  # 0 = os.cpu_count()
    batch_frames: int = Field(ge=1, default=10)


class OutputConfig(BaseModel):
    """Result file settings.

    Example:
        >>> OutputConfig().csv_path
        'results/ber.csv'
    """

    csv_path: str = "results/ber.csv"
    plot_path: str = ""
    show_table: bool = True


class EnvSettings(BaseSettings):
    """Environment overrides (MCSIM_*), read after load_dotenv() populates os.environ."""

    model_config = SettingsConfigDict(env_prefix="MCSIM_")

    workers: int | None = None
    csv_path: str | None = None


def _load_env_settings(env_file_path: Path | None) -> EnvSettings:
    if env_file_path is not None and env_file_path.exists():
        load_dotenv(env_file_path, override=False)
    return EnvSettings()


def _section(toml_data: dict[str, Any], name: str, model: type[BaseModel]) -> Any:
    data = toml_data.get(name, {})
    if not isinstance(data, dict):
        raise ConfigError(f"Config error: [{name}] must be a table")
    try:
        return model(**data)
    except ValidationError as e:
        errors = e.errors()
        if errors:
            err = errors[0]
            field = ".".join(str(loc) for loc in err["loc"])
            value = data.get(err["loc"][0]) if err["loc"] else None
            raise ConfigError(f"Config error: {name}.{field} {err['msg']}, got {value}") from e
        raise ConfigError(f"Validation error in {name} config: {e}") from e


class AppConfig:
    """Application settings loaded from config.toml and the environment.

    Example:
        >>> config = AppConfig.load()
        >>> config.resolve_workers() >= 1
        True
    """

    def __init__(self, runtime: RuntimeConfig, output: OutputConfig, project_root: Path) -> None:
        self.runtime = runtime
        self.output = output
        self.project_root = project_root

    @classmethod
    def load(cls, config_path: Path | None = None, project_root: Path | None = None) -> AppConfig:
        """Load settings from files.

        Args:
            config_path: Explicit config.toml. If None, <project_root>/config.toml
                is used when present, built-in defaults otherwise.
            project_root: Project root directory. If None, auto-detects by
                walking up from this file looking for pyproject.toml.

        Raises:
            ConfigError: Explicit file missing, invalid TOML or invalid values.
        """
        if project_root is None:
            project_root = cls._find_project_root()

        if config_path is None:
            default_path = project_root / "config.toml"
            toml_data = cls._read_toml(default_path) if default_path.exists() else {}
        else:
            if not config_path.exists():
                raise ConfigError(f"Configuration file not found: {config_path}")
            toml_data = cls._read_toml(config_path)

        runtime: RuntimeConfig = _section(toml_data, "runtime", RuntimeConfig)
        output: OutputConfig = _section(toml_data, "output", OutputConfig)

        env_file = project_root / ".env"
        env = _load_env_settings(env_file if env_file.exists() else None)
        if env.workers is not None:
            if env.workers < 0:
                raise ConfigError(f"Config error: MCSIM_WORKERS must be >= 0, got {env.workers}")
            runtime = runtime.model_copy(update={"workers": env.workers})
        if env.csv_path:
            output = output.model_copy(update={"csv_path": env.csv_path})

        logger.debug(
            "Config loaded: workers=%d, batch_frames=%d, csv=%s",
            runtime.workers,
            runtime.batch_frames,
            output.csv_path,
        )
        return cls(runtime=runtime, output=output, project_root=project_root)

    @staticmethod
    def _read_toml(path: Path) -> dict[str, Any]:
        try:
            with open(path, "rb") as f:
                return tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"Invalid TOML syntax in {path}: {e}") from e
        except OSError as e:
            raise ConfigError(f"Cannot read {path}: {e}") from e

    @staticmethod
    def _find_project_root() -> Path:
        """Find project root by walking up to the directory holding pyproject.toml.

        Raises:
            ConfigError: If pyproject.toml not found in any parent.
        """
        current = Path(__file__).resolve().parent
        while current != current.parent:
            if (current / "pyproject.toml").exists():
                return current
            current = current.parent

        raise ConfigError("Could not find project root (no pyproject.toml found)")

    def resolve_workers(self) -> int:
        """Configured worker count, 0 meaning one per CPU."""
        return self.runtime.workers or os.cpu_count() or 1

    def resolve_path(self, value: str) -> Path:
        """Relative output paths are anchored at the project root."""
        path = Path(value)
        return path if path.is_absolute() else self.project_root / path


# =============================================================================
# Experiment description (flat key = value)
# =============================================================================

DetectorName = Literal["zf", "real_ls", "ml"]
CodingName = Literal["conv", "none"]
SpreadingChoice = Literal["auto", "pn_lfsr", "walsh"]


class SimConfig(BaseModel):
    """One Monte-Carlo experiment: modulations x SNR grid on a fixed link.

    Defaults reproduce the reference system: 6400 subcarriers, 1280-sample
    prefix, 2x4 Alamouti, spreading factor 8, SNR -10..20 dB in 1 dB steps.

    Example:
        >>> cfg = SimConfig(
        ...     modulations=("qpsk",), snr_grid=(0.0, 5.0, 10.0), reference_modulation=None
        ... )
        >>> cfg.snr_points()
        [0.0, 5.0, 10.0]
        >>> cfg.code_kind
        'pn_lfsr'
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    modulations: tuple[str, ...] = ("qpsk", "8psk", "8qam", "16qam", "32qam", "64qam")
    snr_grid: tuple[float, float, float] = (-10.0, 1.0, 20.0)
    msg_bits_per_frame: int = Field(ge=1, default=1040)
    spreading_factor: int = Field(ge=1, default=8)
    spreading_code: SpreadingChoice = "auto"
    n_subcarriers: int = Field(ge=1, default=6400)
    cp_len: int = Field(ge=0, default=1280)
    nr: int = Field(ge=1, default=4)
    nt: int = 2
    users: int = Field(ge=1, default=1)
    detector: DetectorName = "zf"
    coding: CodingName = "conv"
    terminated: bool = False
    frames: int = Field(ge=1, default=10)
    min_bit_errors: int = Field(ge=0, default=100)
    master_seed: int = Field(ge=0, default=2014)
    reference_modulation: str | None = "64qam"
    gain_at_ber: float = Field(gt=0.0, lt=1.0, default=1e-2)
    ber_snr_db: float = -1.0

    @field_validator("modulations")
    @classmethod
    def _canonical_modulations(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        if not value:
            raise ValueError("at least one modulation is required")
        names = tuple(get_scheme(v).name for v in value)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate modulation in {', '.join(names)}")
        return names

    @field_validator("reference_modulation")
    @classmethod
    def _canonical_reference(cls, value: str | None) -> str | None:
        return None if value is None else get_scheme(value).name

    @model_validator(mode="after")
    def _check_consistency(self) -> SimConfig:
        start, step, stop = self.snr_grid
        if not all(math.isfinite(v) for v in self.snr_grid):
            raise ValueError("snr: grid values must be finite")
        if step <= 0:
            raise ValueError(f"snr: step must be > 0, got {step:g}")
        if start > stop:
            raise ValueError(f"snr: start {start:g} exceeds stop {stop:g}")
        if self.nt != 2:
            raise ValueError(f"nt: Alamouti coding needs 2 transmit antennas, got {self.nt}")
        if self.cp_len > self.n_subcarriers:
            raise ValueError(
                f"cp_len: {self.cp_len} exceeds the {self.n_subcarriers} subcarriers"
            )
        if self.code_kind == "walsh":
            sf = self.spreading_factor
            if sf & (sf - 1):
                raise ValueError(f"spread_factor: Walsh codes need a power of two, got {sf}")
            if self.users > sf:
                raise ValueError(
                    f"users: {self.users} Walsh users exceed spreading factor {sf}"
                )
        elif self.users > MAX_PN_USERS:
            raise ValueError(f"users: at most {MAX_PN_USERS} PN users, got {self.users}")
        if (
            self.reference_modulation is not None
            and self.reference_modulation not in self.modulations
        ):
            raise ValueError(
                f"reference: '{self.reference_modulation}' is not among the configured modulations"
            )
        return self

    @property
    def code_kind(self) -> CodeKind:
        """Resolved spreading family: PN for a single user, Walsh otherwise."""
        if self.spreading_code == "walsh" or (self.spreading_code == "auto" and self.users > 1):
            return "walsh"
        return "pn_lfsr"

    @property
    def conv_code(self) -> ConvCode:
        return ConvCode(terminated=self.terminated)

    @property
    def grid(self) -> OfdmGrid:
        return OfdmGrid(n_subcarriers=self.n_subcarriers, cp_len=self.cp_len)

    @property
    def code_rate(self) -> float:
        return 0.5 if self.coding == "conv" else 1.0

    @property
    def chip_width(self) -> int:
        """Bits per superposed chip after level quantisation."""
        return level_width(self.users)

    def snr_points(self) -> list[float]:
        """Grid start, start + step, ... up to and including stop."""
        start, step, stop = self.snr_grid
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 9) for i in range(count)]

    def snr_index(self, snr_db: float) -> int | None:
        """Position of snr_db on the grid, or None when it is off-grid."""
        for i, point in enumerate(self.snr_points()):
            if math.isclose(point, snr_db, abs_tol=1e-9):
                return i
        return None

    def bits_per_frame(self) -> int:
        """Message bits scored per frame, summed over users."""
        return self.msg_bits_per_frame * self.users


# key -> (field, parser)
def _parse_list(value: str) -> tuple[str, ...]:
    return tuple(item.strip() for item in value.split(",") if item.strip())


def _parse_snr(value: str) -> tuple[float, float, float]:
    parts = [p.strip() for p in value.split(":")]
    if len(parts) == 1:
        point = float(parts[0])
        return (point, 1.0, point)
    if len(parts) != 3:
        raise ValueError("expected START:STEP:STOP")
    start, step, stop = (float(p) for p in parts)
    return (start, step, stop)


def _parse_bool(value: str) -> bool:
    lowered = value.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError("expected true or false")


def _parse_detector(value: str) -> str:
    return value.lower().replace("-", "_")


def _parse_spreading(value: str) -> str:
    lowered = value.lower().replace("-", "_")
    return {"pn": "pn_lfsr", "lfsr": "pn_lfsr"}.get(lowered, lowered)


def _parse_reference(value: str) -> str | None:
    return value or None


def _parse_int(value: str) -> int:
    return int(value)


KEYS: dict[str, tuple[str, Callable[[str], Any]]] = {
    "modulation": ("modulations", _parse_list),
    "snr": ("snr_grid", _parse_snr),
    "msg_bits": ("msg_bits_per_frame", _parse_int),
    "spread_factor": ("spreading_factor", _parse_int),
    "spreading_code": ("spreading_code", _parse_spreading),
    "subcarriers": ("n_subcarriers", _parse_int),
    "cp_len": ("cp_len", _parse_int),
    "nr": ("nr", _parse_int),
    "nt": ("nt", _parse_int),
    "users": ("users", _parse_int),
    "detector": ("detector", _parse_detector),
    "coding": ("coding", str.lower),
    "terminate": ("terminated", _parse_bool),
    "frames": ("frames", _parse_int),
    "min_errors": ("min_bit_errors", _parse_int),
    "seed": ("master_seed", _parse_int),
    "reference": ("reference_modulation", _parse_reference),
    "gain_ber": ("gain_at_ber", float),
    "ber_snr": ("ber_snr_db", float),
}

_FIELD_TO_KEY = {field: key for key, (field, _) in KEYS.items()}


def _convert(key: str, raw: str, where: str) -> Any:
    _, parser = KEYS[key]
    try:
        return parser(raw)
    except ValueError as e:
        raise ConfigError(f"{where}invalid value for '{key}': {raw!r} ({e})") from e


def _drop_implicit_reference(values: dict[str, Any]) -> None:
    """Default reference only applies when it is one of the chosen modulations."""
    if "reference_modulation" in values or "modulations" not in values:
        return
    default = SimConfig.model_fields["reference_modulation"].default
    chosen = {str(m).strip().lower().replace("-", "") for m in values["modulations"]}
    if default not in chosen:
        values["reference_modulation"] = None


def parse_config(text: str, overrides: Mapping[str, str] | None = None) -> SimConfig:
    """Parse a flat experiment description.

    Lines are ``key = value``; ``#`` starts a comment; blank lines are
    ignored. Absent keys take the defaults of :class:`SimConfig`, except
    that the default reference is dropped when the chosen modulations do
    not include it.

    Args:
        text: File contents.
        overrides: Raw ``key -> value`` strings applied after the file,
            e.g. from command-line flags.

    Returns:
        Validated configuration.

    Raises:
        ConfigError: Malformed line (with line number), unknown or
            duplicate key, or a value out of range (naming the key).

    Example:
        >>> parse_config("").spreading_factor
        8
        >>> parse_config("users = 9\\nspreading_code = walsh")
        Traceback (most recent call last):
        ...
        src.config.ConfigError: users: 9 Walsh users exceed spreading factor 8
    """
    values: dict[str, Any] = {}
    seen: set[str] = set()
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"line {number}: expected 'key = value', got {content!r}")
        key, raw = (part.strip() for part in content.split("=", 1))
        key = key.lower().replace("-", "_")
        if not key:
            raise ConfigError(f"line {number}: missing key")
        if key not in KEYS:
            raise ConfigError(f"line {number}: unknown key '{key}'")
        if key in seen:
            raise ConfigError(f"line {number}: duplicate key '{key}'")
        seen.add(key)
        values[KEYS[key][0]] = _convert(key, raw, f"line {number}: ")

    for key, raw in (overrides or {}).items():
        norm = key.lower().replace("-", "_")
        if norm not in KEYS:
            raise ConfigError(f"unknown key '{key}'")
        values[KEYS[norm][0]] = _convert(norm, raw.strip(), "")

    _drop_implicit_reference(values)

    try:
        cfg = SimConfig(**values)
    except ValidationError as e:
        err = e.errors()[0]
        msg = str(err["msg"]).removeprefix("Value error, ")
        if err["loc"]:
            key = _FIELD_TO_KEY.get(str(err["loc"][0]), str(err["loc"][0]))
            raise ConfigError(f"{key}: {msg}") from e
        raise ConfigError(msg) from e

    logger.debug(
        "Experiment parsed: %d modulation(s), %d SNR point(s), detector=%s, users=%d",
        len(cfg.modulations),
        len(cfg.snr_points()),
        cfg.detector,
        cfg.users,
    )
    return cfg


def load_experiment(path: Path | None, overrides: Mapping[str, str] | None = None) -> SimConfig:
    """Read and parse an experiment file; None means defaults plus overrides.

    Raises:
        ConfigError: File unreadable or its contents invalid.
    """
    if path is None:
        return parse_config("", overrides)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read experiment file {path}: {e}") from e
    try:
        return parse_config(text, overrides)
    except ConfigError as e:
        raise ConfigError(f"{path.name}: {e}") from e


def _format_float(value: float) -> str:
    return str(int(value)) if value.is_integer() else repr(value)


def render_config(cfg: SimConfig) -> str:
    """Canonical text form; ``parse_config(render_config(cfg)) == cfg``."""
    start, step, stop = cfg.snr_grid
    rendered = {
        "modulation": ",".join(cfg.modulations),
        "snr": ":".join(_format_float(v) for v in (start, step, stop)),
        "msg_bits": str(cfg.msg_bits_per_frame),
        "spread_factor": str(cfg.spreading_factor),
        "spreading_code": cfg.spreading_code,
        "subcarriers": str(cfg.n_subcarriers),
        "cp_len": str(cfg.cp_len),
        "nr": str(cfg.nr),
        "nt": str(cfg.nt),
        "users": str(cfg.users),
        "detector": cfg.detector,
        "coding": cfg.coding,
        "terminate": "true" if cfg.terminated else "false",
        "frames": str(cfg.frames),
        "min_errors": str(cfg.min_bit_errors),
        "seed": str(cfg.master_seed),
        "reference": cfg.reference_modulation or "",
        "gain_ber": _format_float(cfg.gain_at_ber),
        "ber_snr": _format_float(cfg.ber_snr_db),
    }
    return "".join(f"{key} = {value}\n" for key, value in rendered.items())
