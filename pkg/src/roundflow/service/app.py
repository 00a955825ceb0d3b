"""HTTP front end over the round-handle verification engine.

One endpoint per check; responses carry both structured fields and the
deterministic text report the CLI prints.  Run with:

    uvicorn roundflow.service.app:app
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..filtration import verify_main_theorem
from ..flows import (
    BettiVector,
    CycleError,
    FlowParseError,
    dynamic_order,
    franks_check,
    parse_flow,
    validate_flow,
)
from ..manifolds import (
    E,
    ConnectedSum,
    ExprParseError,
    connected_sum,
    h1,
    normalize,
    parse_expression,
)
from ..surgery import (
    DIVIDING,
    NONDIVIDING,
    IllFormedMove,
    SurgeryMove,
    surger_backward,
    verify_compr,
)
from ..sweep import run_sweep
from . import schemas

app = FastAPI(title="roundflow", version=__version__)


@app.exception_handler(ExprParseError)
async def _expr_parse_error(request: Request, exc: ExprParseError):
    return JSONResponse(
        status_code=422,
        content={"error": "parse", "message": exc.message, "line": 1, "column": exc.column},
    )


@app.exception_handler(FlowParseError)
async def _flow_parse_error(request: Request, exc: FlowParseError):
    return JSONResponse(
        status_code=422,
        content={"error": "parse", "message": exc.message, "line": exc.line, "column": exc.column},
    )


@app.exception_handler(ValueError)
async def _value_error(request: Request, exc: ValueError):
    return JSONResponse(status_code=422, content={"error": "invalid", "message": str(exc)})


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok")


@app.post("/check-franks", response_model=schemas.FranksResponse)
def check_franks(req: schemas.FranksRequest) -> schemas.FranksResponse:
    betti = BettiVector(*req.betti, source_note=req.source_note or "caller-supplied")
    violations = franks_check(req.handles, betti)
    k_text = ",".join("*" if v is None else str(v) for v in req.handles)
    lines = [f"franks check: b=({','.join(map(str, req.betti))}) k=({k_text})"]
    lines.extend(str(v) for v in violations)
    lines.append("pass" if not violations else f"{len(violations)} violated inequality(ies)")
    return schemas.FranksResponse(
        passed=not violations,
        violations=[schemas.ViolationOut(rule=v.rule, text=v.text) for v in violations],
        report="\n".join(lines),
    )


@app.post("/order", response_model=schemas.OrderResponse)
def order(req: schemas.OrderRequest) -> schemas.OrderResponse:
    spec = parse_flow(req.flow_text)
    violations = validate_flow(spec)
    if violations:
        return schemas.OrderResponse(
            violations=violations,
            report="\n".join(["invalid flow spec:"] + [f"  {v}" for v in violations]),
        )
    try:
        result = dynamic_order(spec)
    except CycleError as exc:
        return schemas.OrderResponse(cycle=exc.cycle, report=f"no dynamic order: {exc}")
    return schemas.OrderResponse(order=result, report="dynamic order: " + " < ".join(result))


@app.post("/h1", response_model=schemas.H1Response)
def homology(req: schemas.H1Request) -> schemas.H1Response:
    expr = normalize(parse_expression(req.expr))
    groups = h1(expr)
    components = []
    lines = [f"expression: {expr}"]
    for i, g in enumerate(groups):
        components.append(
            schemas.GroupOut(
                known=g.known,
                free_rank=g.free_rank if g.known else None,
                torsion=list(g.torsion) if g.known else None,
                text=str(g),
            )
        )
        lines.append(f"component {i}: {g}")
    return schemas.H1Response(normalized=str(expr), components=components, report="\n".join(lines))


def _dividing_split(component: ConnectedSum, a1_text: str | None) -> tuple[ConnectedSum, ConnectedSum]:
    if a1_text is None:
        return component, connected_sum()
    a1 = normalize(parse_expression(a1_text)).components[0]
    rest = list(component.summands)
    for s in a1.summands:
        if s in rest:
            rest.remove(s)
        elif s.kind != "S3":
            raise IllFormedMove(f"{a1} is not a sub-sum of {component}")
    return a1, ConnectedSum.of(rest)


@app.post("/surger", response_model=schemas.SurgerResponse)
def surger(req: schemas.SurgerRequest) -> schemas.SurgerResponse:
    expr = normalize(parse_expression(req.expr))
    if not 0 <= req.component < len(expr.components):
        raise IllFormedMove(f"component index {req.component} out of range")
    component = expr.components[req.component]
    if req.case == "dividing":
        a1, a2 = _dividing_split(component, req.a1)
        move = SurgeryMove(req.component, DIVIDING, req.p, req.q, a1, a2)
    else:
        rest = list(component.summands)
        if E not in rest:
            raise IllFormedMove(f"component {component} has no E summand")
        rest.remove(E)
        move = SurgeryMove(req.component, NONDIVIDING, req.p, req.q, a2=ConnectedSum.of(rest))
    result = surger_backward(expr, move)
    report = "\n".join(
        [f"move: {move.describe()}", f"result: {result.result}", f"note: {result.solid_torus_note}"]
    )
    return schemas.SurgerResponse(
        result=str(result.result), solid_torus_note=result.solid_torus_note, report=report
    )


@app.post("/compr", response_model=schemas.ComprResponse)
def compr(req: schemas.ComprRequest) -> schemas.ComprResponse:
    cert = verify_compr(req.k0, req.k1, req.pq_bound)
    trace = cert.render()
    summary = (
        f"boundary-chain certification k0={req.k0} k1={req.k1} pq_bound={req.pq_bound}: "
        + ("certified" if cert.success else "FAILED")
    )
    return schemas.ComprResponse(
        success=cert.success,
        counterexamples=[str(c) for c in cert.counterexamples],
        report="\n".join([summary, trace]),
        trace=trace,
    )


@app.post("/verify", response_model=schemas.VerifyResponse)
def verify(req: schemas.VerifyRequest) -> schemas.VerifyResponse:
    spec = parse_flow(req.flow_text)
    verdict, bundle = verify_main_theorem(spec, req.pq_bound)
    lines = [f"verdict: {verdict}"]
    lines.extend(f"gate {s.name}: {s.status}" for s in bundle.sections)
    return schemas.VerifyResponse(
        verdict=verdict.verdict if verdict.ok else str(verdict),
        obstruction=verdict.obstruction,
        ok=verdict.ok,
        report="\n".join(lines),
        trace=bundle.render(),
    )


@app.post("/sweep", response_model=schemas.SweepResponse)
def sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
    report = run_sweep(req.k0_max, req.k1_extra, req.pq_bound)
    text = report.render()
    return schemas.SweepResponse(
        ok=report.ok,
        rows=[
            schemas.SweepRowOut(
                k0=r.k0,
                k1=r.k1,
                placements=r.placements,
                classified=r.classified,
                obstructed=r.obstructed,
                status=r.status,
            )
            for r in report.rows
        ],
        report=text,
        trace=text,
    )
