"""HTTP front end over the experiment layer.

Endpoints mirror the CLI subcommands: POST /run executes an experiment and
returns the summary record (transcripts stay a CLI concern), GET /bounds and
GET /phaserand serve the parameter tables, POST /selftest runs the built-in
oracle-equivalence suites.  Request bodies reuse the experiment-file schema,
so a config accepted here behaves identically under `veriphoton run`.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query

from .. import __version__
from ..experiment import bounds_table, build_plan, execute, phaserand_table
from ..models import (
    BoundsResult,
    ExperimentModel,
    PhaseRandRow,
    RunResult,
    SelftestResult,
)
from ..selftest import run_selftest


def create_app() -> FastAPI:
    app = FastAPI(
        title="veriphoton",
        version=__version__,
        description="Coherent-light verification protocol simulator",
    )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/run", response_model=RunResult)
    def run(config: ExperimentModel) -> RunResult:
        try:
            plan = build_plan(config)
            result, _ = execute(plan)
        except (ValueError, FileNotFoundError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return result

    @app.get("/bounds", response_model=BoundsResult)
    def bounds(
        n: int = Query(ge=2),
        f: float = Query(ge=1),
        m: int | None = Query(default=None, ge=8),
        alpha: float | None = Query(default=None, gt=0, le=1),
    ) -> BoundsResult:
        try:
            return bounds_table(n, f, m, alpha)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/phaserand", response_model=PhaseRandRow)
    def phaserand(
        m: int = Query(ge=8),
        n: int = Query(ge=2),
        f: float = Query(ge=1),
    ) -> PhaseRandRow:
        try:
            return phaserand_table(m, n, f)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/selftest", response_model=SelftestResult)
    def selftest(names: list[str] | None = None) -> SelftestResult:
        try:
            return run_selftest(names)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    return app


app = create_app()
