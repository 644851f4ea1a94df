"""HTTP front end: every CLI command is a POST endpoint taking a :class:`RunRequest`."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .commands import COMMANDS, dispatch
from .errors import GmtlabError
from .schemas import ErrorReport, Report, RunRequest

STATUS = {2: 400, 3: 409}

app = FastAPI(title="gmtlab", version="0.1.0")


@app.exception_handler(GmtlabError)
async def _library_error(request: Request, exc: GmtlabError):
    body = ErrorReport(error=str(exc), exit_code=exc.exit_code,
                       witness=getattr(exc, "witness", None))
    return JSONResponse(status_code=STATUS.get(exc.exit_code, 500), content=body.model_dump())


@app.exception_handler(RequestValidationError)
async def _bad_request(request: Request, exc: RequestValidationError):
    body = ErrorReport(error="invalid request", exit_code=2,
                       witness=[{"loc": list(e["loc"]), "msg": e["msg"]} for e in exc.errors()])
    return JSONResponse(status_code=400, content=body.model_dump())


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "commands": list(COMMANDS)}


@app.post("/{command}", response_model=Report)
def run(command: str, req: RunRequest) -> dict:
    return dispatch(command, req.spec, None, req.seed, req.threads)


@app.post("/{command}/{kind}", response_model=Report)
def run_kind(command: str, kind: str, req: RunRequest) -> dict:
    return dispatch(command, req.spec, kind, req.seed, req.threads)
