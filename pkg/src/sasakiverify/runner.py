"""Suite orchestration and report emission."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .algebraic_models import verify_algebraic
from .config import ConfigError, RunConfig
from .hypersurface import EmbeddingDegenerate, check_ad_vs_fd, check_section2, get_embedding, induce
from .quasi_umbilical import QuasiUmbilicalFitter, check_section3_geometric
from .report import ResidualReport, Status
from .riemannian import MetricError, check_metric
from .sasakian_ambient import check_axioms, get_ambient, perturb_phi

__all__ = ["RunReport", "emit", "read_matrix_pairs", "run"]

CSV_COLUMNS = ("suite", "equation", "status", "max_residual", "probes", "seed")


@dataclass
class RunReport:
    config: dict
    suites: list[ResidualReport] = field(default_factory=list)
    fits: list[dict] = field(default_factory=list)
    engine_version: str = __version__
    wall_time: float = 0.0  # kept out of the emitted document so reruns are byte-identical

    def summary(self) -> dict[str, int]:
        out = {"pass": 0, "fail": 0, "skipped": 0, "paper_deviation": 0}
        key = {Status.PASS: "pass", Status.FAIL: "fail", Status.SKIPPED: "skipped",
               Status.PAPER_DEVIATION: "paper_deviation"}
        for rep in self.suites:
            for e in rep.entries:
                out[key[e.status]] += 1
        return out

    @property
    def failed(self) -> bool:
        return any(rep.failed for rep in self.suites)

    @property
    def exit_code(self) -> int:
        return 1 if self.failed else 0

    def to_dict(self) -> dict:
        d = {
            "engine_version": self.engine_version,
            "config": self.config,
            "summary": self.summary(),
            "suites": [r.to_dict() for r in self.suites],
        }
        if self.fits:
            d["fits"] = self.fits
        return d


def _ambient(cfg: RunConfig):
    S = get_ambient(cfg.ambient_model, cfg.n)
    if cfg.perturb_phi is not None:
        row, col, delta = cfg.perturb_phi
        S = perturb_phi(S, row, col, delta)
    return S


def _merge_all(name: str, seed: int, reports) -> ResidualReport:
    out = ResidualReport(name, seed)
    for r in reports:
        out = out.merge(r)
    out.suite, out.seed = name, seed
    return out


def _run_ambient(cfg: RunConfig) -> ResidualReport:
    S = _ambient(cfg)
    rng = np.random.default_rng(cfg.seed)
    pts = rng.uniform(cfg.box[0], cfg.box[1], size=(cfg.points, S.dim))
    tol = cfg.tolerances.ad_chain
    return _merge_all("ambient", cfg.seed,
                      (check_axioms(S, p, seed=cfg.seed + i, tol=tol) for i, p in enumerate(pts)))


def _run_hypersurface(cfg: RunConfig) -> list[ResidualReport]:
    S = _ambient(cfg)
    e = get_embedding(cfg.embedding, cfg.n, **cfg.embedding_params)
    rng = np.random.default_rng(cfg.seed)
    pts = e.sample(rng, cfg.points, cfg.box)
    t = cfg.tolerances
    sec2, sec3, fd = [], [], []
    classes: dict[str, int] = {}
    degenerate = 0
    for i, p in enumerate(pts):
        try:
            ind = induce(e, S, p)
        except EmbeddingDegenerate:
            degenerate += 1
            continue
        sec2.append(check_section2(e, S, p, seed=cfg.seed + i, tol=t.ad_chain, tol_diff=10 * t.ad_chain, ind=ind))
        fit, rep3 = check_section3_geometric(ind, seed=cfg.seed + i, tol=t.ad_chain, tau_class=t.class_)
        classes[fit.classification.value] = classes.get(fit.classification.value, 0) + 1
        sec3.append(rep3)
        fd.append(check_ad_vs_fd(e, S, p, tol=t.fd_oracle, ind=ind))
    out = [
        _merge_all(f"hypersurface[{e.name}]", cfg.seed, sec2),
        _merge_all(f"quasi-umbilical[{e.name}]", cfg.seed, sec3),
        _merge_all(f"ad-vs-fd[{e.name}]", cfg.seed, fd),
    ]
    if classes:
        out[1].observations.append(
            "pointwise classification: " + ", ".join(f"{k}={v}" for k, v in sorted(classes.items())))
    if degenerate:
        for r in out:
            r.skip("rank", f"embedding degenerate at {degenerate} sampled points")
    return out


def _run_algebraic(cfg: RunConfig) -> list[ResidualReport]:
    t = cfg.tolerances
    seeds = range(cfg.seed, cfg.seed + cfg.algebraic_seeds)
    return [verify_algebraic(p, n, seeds, tol=t.exact, root_tol=t.root)
            for p in cfg.profiles for n in cfg.algebraic_n]


def read_matrix_pairs(path) -> list[tuple[np.ndarray, np.ndarray]]:
    """Read ``{"g": ..., "h": ...}`` or ``{"pairs": [{"g": ..., "h": ...}, ...]}`` from JSON."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read matrix file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"matrix file is not valid JSON: {exc}") from None
    items = data.get("pairs") if isinstance(data, dict) and "pairs" in data else [data]
    out = []
    for k, item in enumerate(items):
        try:
            g = np.asarray(item["g"], dtype=float)
            h = np.asarray(item["h"], dtype=float)
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"matrix pair {k}: need numeric 'g' and 'h'") from None
        if g.ndim != 2 or g.shape[0] != g.shape[1] or h.shape != g.shape or g.shape[0] < 2:
            raise ConfigError(f"matrix pair {k}: g and h must be square, same size, dim >= 2")
        if not np.allclose(h, h.T):
            raise ConfigError(f"matrix pair {k}: h must be symmetric")
        try:
            check_metric(g)
        except MetricError as exc:
            raise ConfigError(f"matrix pair {k}: {exc}") from None
        out.append((g, h))
    return out


def _run_fit(cfg: RunConfig) -> tuple[ResidualReport, list[dict]]:
    rep = ResidualReport("fit-h", cfg.seed)
    fits = []
    for k, (g, h) in enumerate(read_matrix_pairs(cfg.fit_h_path)):
        est = QuasiUmbilicalFitter(tau_class=cfg.tolerances.class_).fit(h, g)
        scale = max(1.0, float(np.abs(h).max()))
        e = rep.check(f"3.1[{k}]", [est.residual_], 1e-10 * scale, note=est.classification_.value)
        fits.append({
            "pair": k, "alpha": est.alpha_, "beta": est.beta_,
            "q": [float(x) for x in est.q_], "Q": [float(x) for x in est.Q_],
            "classification": est.classification_.value, "residual": est.residual_, "status": e.status.value,
        })
    return rep, fits


def run(cfg: RunConfig) -> RunReport:
    """Execute the configured suites in a fixed order."""
    cfg.validate()
    t0 = time.perf_counter()
    report = RunReport(config=cfg.to_dict())
    if "verify-ambient" in cfg.suites:
        report.suites.append(_run_ambient(cfg))
    if "verify-hypersurface" in cfg.suites:
        report.suites.extend(_run_hypersurface(cfg))
    if "verify-algebraic" in cfg.suites:
        report.suites.extend(_run_algebraic(cfg))
    if "fit-h" in cfg.suites:
        rep, fits = _run_fit(cfg)
        report.suites.append(rep)
        report.fits.extend(fits)
    report.wall_time = time.perf_counter() - t0
    return report


def _finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    return x


def render(report: RunReport, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(_finite(report.to_dict()), sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rep in report.suites:
            for e in rep.entries:
                res = "" if e.max_residual is None else repr(e.max_residual)
                w.writerow([rep.suite, e.equation, e.status.value, res, e.probes,
                            "" if rep.seed is None else rep.seed])
        return buf.getvalue()
    raise ConfigError(f"unknown format {fmt!r}")


def emit(report: RunReport, fmt: str = "json", path=None) -> str:
    """Render ``report`` and write it to ``path`` (when given); returns the text."""
    text = render(report, fmt)
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise ConfigError(f"cannot write output {path}: {exc.strerror}") from None
    return text
