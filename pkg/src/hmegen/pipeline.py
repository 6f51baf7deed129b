"""Corpus-level dataset generation: distortion, decomposition, and hybrid.

Each source expression is processed independently with an RNG stream keyed
by (master seed, stable corpus index), so results do not depend on worker
count or scheduling. Failed files are logged and skipped; the report keeps
score. With no output root the pipeline runs in memory and only counts,
which is how the dataset arithmetic is checked against stub corpora.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .decompose import decompose
from .distort import ALPHA_RANGE, BETA_RANGE, GAMMA_RANGE, K_RANGE, DistortionParams, distort_hme, sample_params
from .ink import OnlineHME
from .inkml import read_inkml, write_inkml, write_manifest
from .raster import RasterConfig, rasterize, write_pgm

logger = logging.getLogger("hmegen")

HIST_BINS = 8


class Strategy(Enum):
    DISTORTION = "distortion"
    DECOMPOSITION = "decomposition"
    HYBRID = "hybrid"
    NONE = "none"


@dataclass
class StrategyConfig:
    strategy: Strategy
    copies_per_hme: int = 5
    master_seed: int = 0
    include_originals: bool = True
    output_root: Path | None = None
    rasterize: bool = False
    raster: RasterConfig = field(default_factory=RasterConfig)
    workers: int = 1

    def __post_init__(self):
        if self.copies_per_hme < 1:
            raise ValueError("copies_per_hme must be >= 1")
        if self.output_root is not None:
            self.output_root = Path(self.output_root)


@dataclass
class DatasetReport:
    strategy: str
    copies_per_hme: int
    include_originals: bool
    input_count: int = 0
    generated_count: int = 0
    total_count: int = 0
    decomposition_total: int = 0  # |D| when the hybrid strategy ran
    failed_count: int = 0
    failures: list[str] = field(default_factory=list)
    rule_counts: dict[int, int] = field(default_factory=lambda: {1: 0, 2: 0, 3: 0})
    id_counts: dict[int, int] = field(default_factory=dict)
    axis_counts: dict[str, int] = field(default_factory=dict)
    param_histograms: dict[str, list[int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "copies_per_hme": self.copies_per_hme,
            "include_originals": self.include_originals,
            "input_count": self.input_count,
            "generated_count": self.generated_count,
            "total_count": self.total_count,
            "decomposition_total": self.decomposition_total,
            "failed_count": self.failed_count,
            "failures": self.failures,
            "rule_counts": {str(k): v for k, v in sorted(self.rule_counts.items())},
            "id_counts": {str(k): v for k, v in sorted(self.id_counts.items())},
            "axis_counts": dict(sorted(self.axis_counts.items())),
            "param_histograms": self.param_histograms,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetReport":
        return cls(
            strategy=data["strategy"],
            copies_per_hme=data["copies_per_hme"],
            include_originals=data["include_originals"],
            input_count=data["input_count"],
            generated_count=data["generated_count"],
            total_count=data["total_count"],
            decomposition_total=data.get("decomposition_total", 0),
            failed_count=data.get("failed_count", 0),
            failures=list(data.get("failures", [])),
            rule_counts={int(k): v for k, v in data.get("rule_counts", {}).items()},
            id_counts={int(k): v for k, v in data.get("id_counts", {}).items()},
            axis_counts=dict(data.get("axis_counts", {})),
            param_histograms=dict(data.get("param_histograms", {})),
        )

    def to_text(self) -> str:
        lines = []
        for key, value in self.to_dict().items():
            if isinstance(value, dict):
                for sub, val in value.items():
                    lines.append(f"{key}.{sub}: {val}")
            elif isinstance(value, list):
                lines.append(f"{key}: {len(value)}")
                for item in value:
                    lines.append(f"  {item}")
            else:
                lines.append(f"{key}: {value}")
        return "\n".join(lines) + "\n"


def load_corpus(input_dir: str | Path) -> list[tuple[str, Path]]:
    """All .inkml files under a directory, sorted by name for stable indexing."""
    root = Path(input_dir)
    files = sorted(root.rglob("*.inkml"))
    if not files:
        raise FileNotFoundError(f"no .inkml files under {root}")
    return [(p.stem, p) for p in files]


@dataclass
class _SourceResult:
    index: int
    rows: list[tuple[str, str]] = field(default_factory=list)
    generated: int = 0
    originals: int = 0
    decomposition_total: int = 0
    rule_counts: dict[int, int] = field(default_factory=lambda: {1: 0, 2: 0, 3: 0})
    params: list[tuple[int, str, float, float, float, float]] = field(default_factory=list)
    error: str | None = None


def _generate_items(
    index: int, stem: str, hme: OnlineHME, config: StrategyConfig
) -> tuple[list[tuple[str, OnlineHME]], _SourceResult]:
    """All output items for one source expression, named and counted."""
    result = _SourceResult(index=index)
    items: list[tuple[str, OnlineHME]] = []

    def add_original(name: str, original: OnlineHME) -> None:
        items.append((name, original))
        result.originals += 1

    def add_distorted(pool: list[tuple[str, OnlineHME]]) -> None:
        for d_idx, (d_stem, d_hme) in enumerate(pool):
            rng = np.random.default_rng((config.master_seed, index, d_idx))
            for c in range(config.copies_per_hme):
                params = sample_params(rng)
                result.params.append(
                    (params.id, params.axis.value, params.alpha, params.beta, params.k, params.gamma)
                )
                items.append((f"{d_stem}__dist{c}", distort_hme(d_hme, params)))
                result.generated += 1

    def decompose_into(pool: list[tuple[str, OnlineHME]]) -> None:
        outcome = decompose(hme)
        for j, (sub, (rule, _)) in enumerate(zip(outcome.sub_hmes, outcome.rule_trace)):
            pool.append((f"{stem}__decomp{j}", sub))
            result.rule_counts[rule] += 1
            result.generated += 1

    if config.strategy is Strategy.NONE:
        if config.include_originals:
            add_original(f"{stem}__orig0", hme)
    elif config.strategy is Strategy.DISTORTION:
        if config.include_originals:
            add_original(f"{stem}__orig0", hme)
        add_distorted([(stem, hme)])
    elif config.strategy is Strategy.DECOMPOSITION:
        if config.include_originals:
            add_original(f"{stem}__orig0", hme)
        decompose_into(items)
    else:  # HYBRID: build this source's slice of D, then distort all of it
        d_pool: list[tuple[str, OnlineHME]] = []
        if config.include_originals:
            d_pool.append((f"{stem}__orig0", hme))
        decompose_into(d_pool)
        result.originals += 1 if config.include_originals else 0
        result.decomposition_total = len(d_pool)
        items.extend(d_pool)
        add_distorted(d_pool)

    for name, item in items:
        item.provenance.setdefault("source", stem)
    return items, result


def _process_source(args: tuple) -> _SourceResult:
    index, stem, payload, config = args
    try:
        hme = payload if isinstance(payload, OnlineHME) else read_inkml(payload)
        items, result = _generate_items(index, stem, hme, config)
        for name, item in items:
            rel = f"inkml/{name}.inkml"
            if config.output_root is not None:
                path = config.output_root / rel
                path.write_bytes(write_inkml(item))
                if config.rasterize:
                    img_rel = f"img/{name}.pgm"
                    write_pgm(rasterize(item, config.raster), config.output_root / img_rel)
            result.rows.append((rel, item.latex))
        return result
    except Exception as exc:  # noqa: BLE001 - per-file isolation is the contract
        return _SourceResult(index=index, error=f"{stem}: {type(exc).__name__}: {exc}")


def generate_set(
    corpus: list[tuple[str, OnlineHME | str | Path]], config: StrategyConfig
) -> DatasetReport:
    """Run one strategy over a corpus; write files and manifest when an
    output root is configured, otherwise just count."""
    if config.output_root is not None:
        (config.output_root / "inkml").mkdir(parents=True, exist_ok=True)
        if config.rasterize:
            (config.output_root / "img").mkdir(parents=True, exist_ok=True)

    tasks = [
        (index, stem, payload, config)
        for index, (stem, payload) in enumerate(corpus)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_process_source, tasks, chunksize=16))
    else:
        results = [_process_source(task) for task in tasks]
    results.sort(key=lambda r: r.index)

    report = DatasetReport(
        strategy=config.strategy.value,
        copies_per_hme=config.copies_per_hme,
        include_originals=config.include_originals,
    )
    rows: list[tuple[str, str]] = []
    all_params: list[tuple] = []
    for result in results:
        if result.error is not None:
            report.failed_count += 1
            report.failures.append(result.error)
            logger.error("skipped %s", result.error)
            continue
        report.input_count += 1
        report.generated_count += result.generated
        report.total_count += len(result.rows)
        report.decomposition_total += result.decomposition_total
        for rule, count in result.rule_counts.items():
            report.rule_counts[rule] += count
        rows.extend(result.rows)
        all_params.extend(result.params)

    _fill_param_stats(report, all_params)

    if config.output_root is not None:
        write_manifest(rows, config.output_root / "manifest.tsv")
        if config.rasterize:
            img_rows = [(rel.replace("inkml/", "img/", 1)[:-6] + ".pgm", latex) for rel, latex in rows]
            write_manifest(img_rows, config.output_root / "img_manifest.tsv")
        report_path = config.output_root / "report.json"
        report_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return report


def _fill_param_stats(report: DatasetReport, params: list[tuple]) -> None:
    if not params:
        return
    ids = [p[0] for p in params]
    axes = [p[1] for p in params]
    report.id_counts = {i: ids.count(i) for i in range(1, 6)}
    report.axis_counts = {a: axes.count(a) for a in sorted(set(axes))}
    ranges = {
        "alpha": (2, ALPHA_RANGE),
        "beta": (3, BETA_RANGE),
        "k": (4, K_RANGE),
        "gamma": (5, GAMMA_RANGE),
    }
    for name, (pos, (lo, hi)) in ranges.items():
        values = np.array([p[pos] for p in params])
        hist, _ = np.histogram(values, bins=HIST_BINS, range=(lo, hi))
        report.param_histograms[name] = [int(c) for c in hist]


def generate_distortion_set(corpus, config: StrategyConfig) -> DatasetReport:
    return generate_set(corpus, _with_strategy(config, Strategy.DISTORTION))


def generate_decomposition_set(corpus, config: StrategyConfig) -> DatasetReport:
    return generate_set(corpus, _with_strategy(config, Strategy.DECOMPOSITION))


def generate_hybrid_set(corpus, config: StrategyConfig) -> DatasetReport:
    return generate_set(corpus, _with_strategy(config, Strategy.HYBRID))


def _with_strategy(config: StrategyConfig, strategy: Strategy) -> StrategyConfig:
    if config.strategy is strategy:
        return config
    return StrategyConfig(
        strategy=strategy,
        copies_per_hme=config.copies_per_hme,
        master_seed=config.master_seed,
        include_originals=config.include_originals,
        output_root=config.output_root,
        rasterize=config.rasterize,
        raster=config.raster,
        workers=config.workers,
    )


@dataclass
class VerifyResult:
    ok: bool
    lines: list[str]


def verify_counts(
    report: DatasetReport,
    expected: dict[str, int] | None = None,
    tolerance: float = 0.0,
) -> VerifyResult:
    """Check the dataset arithmetic identities and any expected values.

    distortion: total = N * (copies + 1); hybrid: total = |D| * (copies + 1).
    ``tolerance`` is a fraction applied to expected values (0 means exact).
    """
    lines: list[str] = []
    ok = True

    def check(name: str, actual: int, want: int, tol: float = 0.0) -> None:
        nonlocal ok
        bound = tol * want
        good = abs(actual - want) <= bound
        ok = ok and good
        verdict = "ok" if good else "MISMATCH"
        detail = f" (tolerance {tol:.0%})" if tol else ""
        lines.append(f"{verdict}: {name}: actual {actual}, expected {want}{detail}")

    originals = report.input_count if report.include_originals else 0
    check("total = generated + originals", report.total_count, report.generated_count + originals)
    if report.strategy == Strategy.DISTORTION.value and report.include_originals:
        check(
            "distortion total = N*(copies+1)",
            report.total_count,
            report.input_count * (report.copies_per_hme + 1),
        )
    if report.strategy == Strategy.HYBRID.value:
        check(
            "hybrid total = |D|*(copies+1)",
            report.total_count,
            report.decomposition_total * (report.copies_per_hme + 1),
        )
    for key, want in (expected or {}).items():
        actual = getattr(report, key)
        check(key, actual, want, tolerance)
    return VerifyResult(ok, lines)
