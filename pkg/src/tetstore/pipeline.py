"""Dependency-ordered mesh load pipeline.

Stages declare the stages they depend on.  A stage starts only after all
of its dependencies succeeded; stages with no pending dependencies run
concurrently on a thread pool.  When a stage fails, everything downstream
of it is skipped and no store is returned.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from typing import Callable

from .adjacency import build_incidence
from .errors import MeshError, PipelineError
from .hilbert import Quantizer, assign_hcodes
from .mesh import MeshStore, validate_mesh
from .meshio import load_tets_csv, load_vertices_csv

log = logging.getLogger(__name__)

OK = "ok"
FAILED = "failed"
SKIPPED = "skipped"


@dataclass
class Stage:
    name: str
    fn: Callable[[dict], object]
    deps: tuple[str, ...] = ()


@dataclass
class StageOutcome:
    name: str
    status: str
    seconds: float = 0.0
    error: BaseException | None = None
    started: float | None = None
    finished: float | None = None

    def describe(self) -> str:
        line = f"{self.name:<20} {self.status:<8} {self.seconds * 1e3:9.2f} ms"
        if self.error is not None:
            line += f"  {type(self.error).__name__}: {self.error}"
        return line


@dataclass
class PipelineReport:
    outcomes: list[StageOutcome] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(o.status == OK for o in self.outcomes)

    @property
    def failed_stage(self) -> StageOutcome | None:
        return next((o for o in self.outcomes if o.status == FAILED), None)

    def __getitem__(self, name) -> StageOutcome:
        for o in self.outcomes:
            if o.name == name:
                return o
        raise KeyError(name)

    def describe(self) -> str:
        return "\n".join(o.describe() for o in self.outcomes)


class Pipeline:
    def __init__(self, stages: list[Stage], max_workers: int = 4):
        names = [s.name for s in stages]
        if len(set(names)) != len(names):
            raise ValueError("duplicate stage names")
        for s in stages:
            unknown = set(s.deps) - set(names)
            if unknown:
                raise ValueError(f"stage {s.name!r} depends on unknown stage(s) {sorted(unknown)}")
        self.stages = stages
        self.max_workers = max_workers
        self._check_acyclic()

    def _check_acyclic(self):
        deps = {s.name: set(s.deps) for s in self.stages}
        done: set[str] = set()
        while len(done) < len(deps):
            ready = [n for n, d in deps.items() if n not in done and d <= done]
            if not ready:
                raise ValueError("stage dependencies contain a cycle")
            done.update(ready)

    def run(self, ctx: dict | None = None) -> tuple[dict, PipelineReport]:
        ctx = {} if ctx is None else ctx
        outcomes = {s.name: StageOutcome(s.name, "pending") for s in self.stages}
        by_name = {s.name: s for s in self.stages}
        pending = {s.name for s in self.stages}
        running = {}

        def execute(stage):
            t0 = time.perf_counter()
            try:
                stage.fn(ctx)
            except Exception as exc:  # reported, not raised
                return stage.name, exc, t0, time.perf_counter()
            return stage.name, None, t0, time.perf_counter()

        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            while pending or running:
                for name in sorted(pending, key=list(by_name).index):
                    deps = by_name[name].deps
                    if any(outcomes[d].status in (FAILED, SKIPPED) for d in deps):
                        outcomes[name].status = SKIPPED
                        pending.discard(name)
                    elif all(outcomes[d].status == OK for d in deps):
                        pending.discard(name)
                        running[pool.submit(execute, by_name[name])] = name
                if not running:
                    continue
                finished, _ = wait(running, return_when=FIRST_COMPLETED)
                for fut in finished:
                    running.pop(fut)
                    name, exc, t0, t1 = fut.result()
                    o = outcomes[name]
                    o.started, o.finished, o.seconds = t0, t1, t1 - t0
                    o.status = FAILED if exc is not None else OK
                    o.error = exc
                    if exc is not None:
                        log.warning("stage %s failed: %s", name, exc)
        return ctx, PipelineReport([outcomes[s.name] for s in self.stages])


@dataclass
class LoadConfig:
    vertices_path: str
    tets_path: str
    delimiter: str = ","
    quantizer: Quantizer | None = None
    max_workers: int = 4


def _derive(ctx):
    ctx["store"] = MeshStore.from_quads(ctx["vertices"], ctx["quads"])


def _validate(ctx):
    report = validate_mesh(ctx["store"])
    ctx["validation"] = report
    if not report.ok:
        kinds = ", ".join(f"{k} x{n}" for k, n in sorted(report.kinds().items()))
        raise MeshError(f"{len(report)} validation finding(s): {kinds}; "
                        f"first: {report.findings[0].detail}")


def load_stages(cfg: LoadConfig) -> list[Stage]:
    return [
        Stage("load-vertices",
              lambda ctx: ctx.__setitem__("vertices", load_vertices_csv(cfg.vertices_path, cfg.delimiter))),
        Stage("load-tets",
              lambda ctx: ctx.__setitem__("quads", load_tets_csv(cfg.tets_path, cfg.delimiter))),
        Stage("derive-normalized", _derive, ("load-vertices", "load-tets")),
        Stage("validate", _validate, ("derive-normalized",)),
        Stage("compute-centroids", lambda ctx: ctx["store"].freeze(), ("validate",)),
        Stage("assign-hcodes", lambda ctx: assign_hcodes(ctx["store"], cfg.quantizer),
              ("compute-centroids",)),
        Stage("build-indices", lambda ctx: build_incidence(ctx["store"]), ("compute-centroids",)),
    ]


def run_pipeline(cfg: LoadConfig) -> tuple[MeshStore, PipelineReport]:
    """Load vertex and tet CSV files into a frozen, query-ready store.

    Raises
    ------
    PipelineError
        If any stage fails; ``exc.report`` lists every stage outcome and the
        original exception is chained.
    """
    ctx, report = Pipeline(load_stages(cfg), cfg.max_workers).run()
    bad = report.failed_stage
    if bad is not None:
        raise PipelineError(f"stage {bad.name!r} failed: {bad.error}", report) from bad.error
    return ctx["store"], report
