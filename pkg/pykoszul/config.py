import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import yaml

from pykoszul.const import ReportFormat, Suite
from pykoszul.exc import UsageError
from pykoszul.field import FieldSpec, parse_field

logger = logging.getLogger(__name__)

_DEFAULTS: Dict[str, Any] = {
    "suite": None,
    "field": "gf:5",
    "d": 3,
    "dim_max": 3,
    "seed": 0,
    "count": 10,
    "format": "json",
    "out": None,
    "n_max": 20,
    "include_counterexample": False,
    "instances": None,
    "jobs": 1,
}

_LIMITS = {
    "d": (1, 6),
    "dim_max": (1, 6),
    "count": (0, 100000),
    "n_max": (0, 24),
    "jobs": (1, 64),
}


class SuiteConfig:
    def __init__(self, **kwargs: Any) -> None:
        """Validated settings of one suite run.

        Raises:
            UsageError: On unknown keys or out-of-range values.
        """
        unknown = set(kwargs) - set(_DEFAULTS)
        if unknown:
            raise UsageError(f"Unknown config keys: {', '.join(sorted(unknown))}")
        values = dict(_DEFAULTS)
        values.update({k: v for k, v in kwargs.items() if v is not None})

        if values["suite"] is None:
            raise UsageError("A suite is required")
        try:
            suite = values["suite"]
            self._suite = suite if isinstance(suite, Suite) else Suite.getByName(suite)
        except (TypeError, ValueError) as err:
            raise UsageError(str(err))

        self._field_spec = str(values["field"])
        self._field = parse_field(self._field_spec)

        for key, (lo, hi) in _LIMITS.items():
            v = values[key]
            if not isinstance(v, int) or isinstance(v, bool) or not lo <= v <= hi:
                raise UsageError(f"{key} should be an integer in {lo}..{hi}, got {v!r}")
        if not isinstance(values["seed"], int) or isinstance(values["seed"], bool):
            raise UsageError(f"seed should be an integer, got {values['seed']!r}")

        try:
            self._format = ReportFormat(values["format"])
        except ValueError:
            raise UsageError(f"Unknown format: {values['format']!r}")

        self._d: int = values["d"]
        self._dim_max: int = values["dim_max"]
        self._seed: int = values["seed"]
        self._count: int = values["count"]
        self._n_max: int = values["n_max"]
        self._jobs: int = values["jobs"]
        self._include_counterexample = bool(values["include_counterexample"])
        out, instances = values["out"], values["instances"]
        self._out: Optional[Path] = None if out is None else Path(out)
        self._instances: Optional[Path] = None if instances is None else Path(instances)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "SuiteConfig":
        return cls(**{k.replace("-", "_"): v for k, v in data.items()})

    @property
    def suite(self) -> Suite:
        return self._suite

    @property
    def field(self) -> FieldSpec:
        return self._field

    @property
    def field_spec(self) -> str:
        return self._field_spec

    @property
    def d(self) -> int:
        return self._d

    @property
    def dim_max(self) -> int:
        return self._dim_max

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def count(self) -> int:
        return self._count

    @property
    def format(self) -> ReportFormat:
        return self._format

    @property
    def out(self) -> Optional[Path]:
        return self._out

    @property
    def n_max(self) -> int:
        return self._n_max

    @property
    def include_counterexample(self) -> bool:
        return self._include_counterexample

    @property
    def instances(self) -> Optional[Path]:
        return self._instances

    @property
    def jobs(self) -> int:
        return self._jobs

    def to_json(self) -> Dict[str, Any]:
        """The settings that determine a report; paths and jobs are left out."""
        return {
            "suite": self._suite.cliName(),
            "field": self._field_spec,
            "d": self._d,
            "dim_max": self._dim_max,
            "seed": self._seed,
            "count": self._count,
            "n_max": self._n_max,
            "include_counterexample": self._include_counterexample,
        }

    def __str__(self) -> str:
        return f"SuiteConfig({self.to_json()})"


def load_config(
    path: Union[str, Path], overrides: Optional[Mapping[str, Any]] = None
) -> SuiteConfig:
    """Read a YAML suite file; non-None `overrides` win over its values.

    Raises:
        UsageError: If the file cannot be read or is not a mapping.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except (OSError, yaml.YAMLError) as err:
        raise UsageError(f"Cannot read config {path}: {err}")
    if not isinstance(data, dict):
        raise UsageError(f"Config {path} should be a mapping")
    merged = {k.replace("-", "_"): v for k, v in data.items()}
    for k, v in (overrides or {}).items():
        if v is not None:
            merged[k] = v
    logger.debug(f"load_config: {path} -> {merged}")
    return SuiteConfig(**merged)
