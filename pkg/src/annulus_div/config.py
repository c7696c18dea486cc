"""Run configuration: JSON in, validated dataclass out, and back again."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .assembly import AnnulusDomain, Resolution
from .exceptions import AnnulusDivError, ConfigurationError
from .sources import make_source
from .verify import VerifyConfig

__all__ = ["OutputConfig", "RunConfig", "load_config"]

_TOP_KEYS = {"n", "r1", "r2", "source", "resolution", "verify", "output"}


def _reject_unknown(d, allowed, where):
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigurationError(f"unknown keys in {where}: {sorted(extra)}")


@dataclass
class OutputConfig:
    field_csv: str = "field.csv"
    report_json: str = "report.json"
    radial_samples: int = 6
    direction_samples: int = 32

    def __post_init__(self):
        if self.radial_samples < 1 or self.direction_samples < 1:
            raise ConfigurationError("output sample counts must be positive")


@dataclass
class RunConfig:
    n: int
    r1: float
    r2: float
    source: dict = field(default_factory=lambda: {"kind": "zero", "params": {}})
    resolution: Resolution = field(default_factory=Resolution)
    verify: VerifyConfig = field(default_factory=VerifyConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def __post_init__(self):
        try:
            self.domain = AnnulusDomain(int(self.n), float(self.r1), float(self.r2))
            self.resolved = self.resolution.resolved(self.domain)
            self.source_spec = make_source(
                self.source.get("kind"), self.domain.n, self.domain.r1, self.domain.r2, self.source.get("params")
            )
        except AnnulusDivError as exc:
            raise ConfigurationError(str(exc)) from exc

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigurationError("config must be a JSON object")
        _reject_unknown(d, _TOP_KEYS, "config")
        for key in ("n", "r1", "r2"):
            if key not in d:
                raise ConfigurationError(f"config is missing {key!r}")
        src = dict(d.get("source") or {"kind": "zero"})
        _reject_unknown(src, {"kind", "params"}, "source")
        src.setdefault("params", {})
        try:
            res = Resolution(**(d.get("resolution") or {}))
            ver = VerifyConfig(**(d.get("verify") or {}))
            out = OutputConfig(**(d.get("output") or {}))
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(str(exc)) from None
        try:
            n, r1, r2 = int(d["n"]), float(d["r1"]), float(d["r2"])
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"n, r1, r2 must be numbers: {exc}") from None
        return cls(n, r1, r2, src, res, ver, out)

    def to_dict(self):
        return {
            "n": self.domain.n,
            "r1": self.domain.r1,
            "r2": self.domain.r2,
            "source": {"kind": self.source["kind"], "params": dict(self.source.get("params", {}))},
            "resolution": {
                "band": self.resolution.band,
                "radial_nodes": self.resolution.radial_nodes,
                "fd_step": self.resolution.fd_step,
            },
            "verify": self.verify.to_dict(),
            "output": dict(vars(self.output)),
        }


def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from None
    return RunConfig.from_dict(data)
