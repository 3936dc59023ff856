"""Configuration management for tabhash."""
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import tomli_w

from .exceptions import ConfigurationError, UnknownFamilyError
from .families import parse_family
from .independence import DEFAULT_SEARCH_BUDGET
from .tabulation import MAX_ELL

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

DEFAULT_BENCH_FAMILIES = ["id", "tz5", "curve2_3", "curve2_4", "tz2_6", "tz4_16"]


@dataclass
class SearchConfig:
    """Exhaustive search configuration."""
    budget: int = DEFAULT_SEARCH_BUDGET
    workers: int = 1
    slope_pruning: bool = True
    ledger_path: Optional[str] = None


@dataclass
class TabulationConfig:
    """Table filling configuration."""
    ell: int = 32
    seed: int = 0


@dataclass
class BenchConfig:
    """Benchmark protocol configuration."""
    trials: int = 30
    keys_per_trial: int = 1_000_000
    passes: int = 10
    families: List[str] = None
    rng_seed: int = 0
    parallel: bool = False
    instrument: bool = False
    machine_label: str = ""

    def __post_init__(self):
        """Use the default family list if None."""
        if self.families is None:
            self.families = list(DEFAULT_BENCH_FAMILIES)

    # bench config files use the short protocol names
    _FILE_KEYS = {"keys": "keys_per_trial", "seed": "rng_seed"}

    @classmethod
    def from_dict(cls, data: Dict) -> 'BenchConfig':
        values = {}
        for key, value in data.items():
            name = cls._FILE_KEYS.get(key, key)
            if name not in cls.__dataclass_fields__:
                raise ConfigurationError(f"unknown bench setting '{key}'")
            values[name] = value
        if isinstance(values.get("families"), str):
            values["families"] = [f.strip() for f in values["families"].split(",") if f.strip()]
        return cls(**values)

    @classmethod
    def from_file(cls, config_path: Path) -> 'BenchConfig':
        """Load a bench config: TOML (top-level keys or a [bench] table) or bare key=value lines."""
        text = _read_text(config_path)
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as e:
            logger.debug(f"{config_path} is not TOML ({e}), reading key=value lines")
            data = _parse_key_value_lines(text, config_path)
        return cls.from_dict(data.get("bench", data))

    def get_validation_results(self) -> Dict[str, bool]:
        results = {
            "Trials is positive": self.trials >= 1,
            "Keys per trial is positive": self.keys_per_trial >= 1,
            "Passes is positive": self.passes >= 1,
            "At least one family": len(self.families) >= 1,
        }
        results["Bench families are known"] = all(_is_known_family(f) for f in self.families)
        return results


@dataclass
class LoggingConfig:
    """Logging configuration."""
    level: str = "WARNING"


def _is_known_family(family_id: str) -> bool:
    try:
        parse_family(family_id)
    except UnknownFamilyError:
        return False
    return True


def _read_text(config_path: Path) -> str:
    try:
        return Path(config_path).read_text()
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigurationError(f"cannot read config file {config_path}: {e}") from e


def _plain_value(raw: str):
    value = raw.strip().strip("\"'")
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    try:
        return int(value.replace("_", ""))
    except ValueError:
        return value


def _parse_key_value_lines(text: str, config_path: Path) -> Dict:
    """Parse unquoted key=value lines; # starts a comment."""
    data = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"{config_path} line {lineno}: expected key=value, got '{line}'")
        data[key.strip()] = _plain_value(raw)
    return data


def _load_toml(config_path: Path) -> Dict:
    try:
        with open(config_path, "rb") as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"invalid TOML in {config_path}: {e}") from e
    except OSError as e:
        raise ConfigurationError(f"cannot read config file {config_path}: {e}") from e


@dataclass
class Config:
    """Main configuration class."""
    search: SearchConfig = field(default_factory=SearchConfig)
    tabulation: TabulationConfig = field(default_factory=TabulationConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)

    @classmethod
    def from_file(cls, config_path: Path) -> 'Config':
        """Load configuration from TOML file."""
        data = _load_toml(config_path)
        try:
            return cls(
                search=SearchConfig(**data.get("search", {})),
                tabulation=TabulationConfig(**data.get("tabulation", {})),
                bench=BenchConfig.from_dict(data.get("bench", {})),
                logging=LoggingConfig(**data.get("logging", {})),
            )
        except TypeError as e:
            raise ConfigurationError(f"invalid setting in {config_path}: {e}") from e

    @classmethod
    def default(cls) -> 'Config':
        """Create default configuration."""
        return cls()

    def validate(self) -> bool:
        """Validate configuration settings."""
        validation_results = self.get_validation_results()
        return all(validation_results.values())

    def get_validation_results(self) -> Dict[str, bool]:
        """Get detailed validation results for each check."""
        results = {}

        results["Search budget is positive"] = self.search.budget > 0
        results["Search workers is positive"] = self.search.workers >= 1

        results["Output width is supported"] = 1 <= self.tabulation.ell <= MAX_ELL
        results["Seed is non-negative"] = self.tabulation.seed >= 0

        results.update(self.bench.get_validation_results())

        results["Logging level is valid"] = self.logging.level.upper() in LOG_LEVELS

        return results

    def to_dict(self) -> Dict:
        """Plain dict for TOML output; unset optional values are left out."""
        return {
            name: {k: v for k, v in asdict(section).items() if v is not None}
            for name, section in (
                ("search", self.search),
                ("tabulation", self.tabulation),
                ("bench", self.bench),
                ("logging", self.logging),
            )
        }

    def save(self, config_path: Path) -> None:
        """Save configuration to TOML file."""
        config_path = Path(config_path)
        config_path.parent.mkdir(parents=True, exist_ok=True)
        with open(config_path, "wb") as f:
            tomli_w.dump(self.to_dict(), f)

    def log_level(self) -> int:
        return getattr(logging, self.logging.level.upper(), logging.WARNING)


class ConfigManager:
    """Manages configuration loading and validation."""

    def __init__(self, config_path: Optional[Path] = None):
        self.config_path = config_path or Path.home() / ".tabhash" / "config.toml"
        self.config: Optional[Config] = None

    def load_config(self) -> Config:
        """Load configuration (validation is separate)."""
        if self.config_path.exists():
            self.config = Config.from_file(self.config_path)
        else:
            self.config = Config.default()

        return self.config

    def load_and_validate_config(self) -> Config:
        """Load and validate configuration, raising exception on failure."""
        config = self.load_config()
        results = config.get_validation_results()
        failed = [check for check, ok in results.items() if not ok]
        if failed:
            raise ConfigurationError(f"Invalid configuration: {', '.join(failed)}")
        return config

    def create_default_config(self) -> Config:
        """Create and save default configuration."""
        self.config = Config.default()
        self.config.save(self.config_path)
        return self.config

    def get_ledger_path(self) -> Optional[Path]:
        """Search ledger path from the loaded config, if one is set."""
        if not self.config:
            raise ConfigurationError("Config not loaded")
        if self.config.search.ledger_path is None:
            return None
        return Path(self.config.search.ledger_path).expanduser()


# Global config instance for easy access across modules
_config_manager: Optional[ConfigManager] = None
_current_config: Optional[Config] = None


def init_config(config_path: Optional[Path] = None) -> Config:
    """Initialize global configuration."""
    global _config_manager, _current_config
    _config_manager = ConfigManager(config_path)
    _current_config = _config_manager.load_config()
    return _current_config


def get_config() -> Config:
    """Get current configuration."""
    if _current_config is None:
        raise ConfigurationError("Config not initialized. Call init_config() first.")
    return _current_config


def load_config_from_file(config_path: Path) -> Config:
    """Load configuration from specific file."""
    return Config.from_file(config_path)


def create_default_config(save_path: Optional[Path] = None) -> Config:
    """Create default configuration."""
    config = Config.default()
    if save_path:
        config.save(save_path)
    return config
