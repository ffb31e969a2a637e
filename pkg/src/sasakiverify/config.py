"""Run configuration: a single JSON document, validated up front."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

__all__ = ["ConfigError", "RunConfig", "SUITES", "load_config"]

SUITES = ("verify-ambient", "verify-hypersurface", "verify-algebraic", "fit-h")
FORMATS = ("json", "csv")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration (exit status 2)."""


@dataclass(frozen=True)
class Tolerances:
    exact: float = 1e-12
    ad_chain: float = 1e-8
    fd_oracle: float = 1e-6
    root: float = 1e-10
    class_: float = 1e-8

    def validate(self) -> None:
        for name, val in asdict(self).items():
            if not isinstance(val, (int, float)) or isinstance(val, bool) or not val > 0:
                raise ConfigError(f"tolerance {name.rstrip('_')} must be a positive number")
        if not self.exact <= self.ad_chain <= self.fd_oracle:
            raise ConfigError("tolerances must be ordered exact <= ad_chain <= fd_oracle")


@dataclass(frozen=True)
class RunConfig:
    suites: tuple[str, ...] = ()
    ambient_model: str = "standard-sasakian"
    n: int = 1
    perturb_phi: tuple[int, int, float] | None = None
    embedding: str | None = None
    embedding_params: dict = field(default_factory=dict)
    points: int = 50
    box: tuple[float, float] = (-1.0, 1.0)
    seed: int = 0
    profiles: tuple[str, ...] = ("quasi-umbilical", "cylindrical", "totally-umbilical")
    algebraic_seeds: int = 100
    algebraic_n: tuple[int, ...] = (2,)
    tolerances: Tolerances = field(default_factory=Tolerances)
    output_path: str | None = None
    output_format: str = "json"
    fit_h_path: str | None = None

    def validate(self) -> "RunConfig":
        from .algebraic_models import PROFILES
        from .hypersurface import get_embedding
        from .sasakian_ambient import get_ambient

        if not self.suites:
            raise ConfigError("no suites requested")
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suites {bad}; choose from {list(SUITES)}")
        if not _is_int(self.n) or self.n < 1:
            raise ConfigError("ambient n must be an integer >= 1")
        if not _is_int(self.seed) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if not _is_int(self.points) or self.points < 1:
            raise ConfigError("sample point count must be >= 1")
        if len(self.box) != 2 or not self.box[0] < self.box[1]:
            raise ConfigError("sample box must be [low, high] with low < high")
        if self.output_format not in FORMATS:
            raise ConfigError(f"output format must be one of {list(FORMATS)}")
        self.tolerances.validate()
        try:
            get_ambient(self.ambient_model, self.n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.perturb_phi is not None:
            row, col, _ = self.perturb_phi
            D = 2 * self.n + 1
            if not (_is_int(row) and _is_int(col) and 0 <= row < D and 0 <= col < D):
                raise ConfigError("perturb_phi row/col out of range")
        if "verify-hypersurface" in self.suites:
            if self.embedding is None:
                raise ConfigError("verify-hypersurface needs an embedding")
            try:
                get_embedding(self.embedding, self.n, **self.embedding_params)
            except (ValueError, TypeError, KeyError) as exc:
                raise ConfigError(f"embedding: {exc}") from None
        if "verify-algebraic" in self.suites:
            if not self.profiles or any(p not in PROFILES for p in self.profiles):
                raise ConfigError(f"algebraic profiles must be drawn from {list(PROFILES)}")
            if not _is_int(self.algebraic_seeds) or self.algebraic_seeds < 1:
                raise ConfigError("algebraic seed count must be >= 1")
            if not self.algebraic_n or any(not _is_int(k) or k < 1 for k in self.algebraic_n):
                raise ConfigError("algebraic n values must be integers >= 1")
        if "fit-h" in self.suites and not self.fit_h_path:
            raise ConfigError("fit-h needs fit_h.path")
        return self

    def to_dict(self) -> dict:
        return {
            "suites": list(self.suites),
            "ambient": {"model": self.ambient_model, "n": self.n,
                        "perturb_phi": list(self.perturb_phi) if self.perturb_phi else None},
            "embedding": None if self.embedding is None else {"name": self.embedding, "params": self.embedding_params},
            "sample": {"points": self.points, "box": list(self.box), "seed": self.seed},
            "algebraic": {"profiles": list(self.profiles), "seeds": self.algebraic_seeds,
                          "n": list(self.algebraic_n)},
            "tolerances": {"exact": self.tolerances.exact, "ad_chain": self.tolerances.ad_chain,
                           "fd_oracle": self.tolerances.fd_oracle, "root": self.tolerances.root,
                           "class": self.tolerances.class_},
            "output": {"format": self.output_format},  # the destination is not part of the result
            "fit_h": {"path": self.fit_h_path},
        }

    @classmethod
    def from_dict(cls, d: Any) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {"suites", "ambient", "embedding", "sample", "algebraic", "tolerances", "output", "fit_h"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        try:
            amb = _section(d, "ambient")
            samp = _section(d, "sample")
            alg = _section(d, "algebraic")
            tol = _section(d, "tolerances")
            out = _section(d, "output")
            fh = _section(d, "fit_h")
            emb = d.get("embedding")
            if emb is not None and not isinstance(emb, dict):
                raise ConfigError("embedding must be an object or null")
            pp = amb.get("perturb_phi")
            if pp is not None:
                pp = (pp["row"], pp["col"], float(pp["delta"])) if isinstance(pp, dict) else tuple(pp)
                if len(pp) != 3:
                    raise ConfigError("perturb_phi needs row, col, delta")
            algebraic_n = alg.get("n", [2])
            if _is_int(algebraic_n):
                algebraic_n = [algebraic_n]
            suites = d.get("suites", [])
            if isinstance(suites, str):
                suites = [suites]
            cfg = cls(
                suites=tuple(suites),
                ambient_model=amb.get("model", "standard-sasakian"),
                n=amb.get("n", 1),
                perturb_phi=pp,
                embedding=None if emb is None else emb.get("name"),
                embedding_params=dict(emb.get("params") or {}) if emb else {},
                points=samp.get("points", 50),
                box=tuple(samp.get("box", (-1.0, 1.0))),
                seed=samp.get("seed", 0),
                profiles=tuple(alg.get("profiles", cls.profiles)),
                algebraic_seeds=alg.get("seeds", 100),
                algebraic_n=tuple(algebraic_n),
                tolerances=Tolerances(
                    exact=tol.get("exact", 1e-12), ad_chain=tol.get("ad_chain", 1e-8),
                    fd_oracle=tol.get("fd_oracle", 1e-6), root=tol.get("root", 1e-10),
                    class_=tol.get("class", 1e-8),
                ),
                output_path=out.get("path"),
                output_format=out.get("format", "json"),
                fit_h_path=fh.get("path"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed config: {exc}") from None
        return cfg

    def override(self, **changes) -> "RunConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _section(d: dict, key: str) -> dict:
    val = d.get(key) or {}
    if not isinstance(val, dict):
        raise ConfigError(f"{key} must be an object")
    return val


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return RunConfig.from_dict(data)
