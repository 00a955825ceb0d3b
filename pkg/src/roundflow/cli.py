"""Thin command-line client for the verification service.

Every subcommand marshals its arguments into a service request, posts it
(against an in-process application by default, or a remote server given
``--server``), prints the service's deterministic text report, and maps the
outcome to the exit status: 0 for pass/S3xS1/S3twistS1, 1 for violations or
obstructions, 2 for malformed input.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from typing import Optional


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roundflow",
        description="Round-handle calculus checks for non-singular 4-flows.",
    )
    parser.add_argument(
        "--server",
        default=None,
        help="base URL of a running service (default: run the service in-process)",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("check-franks", help="evaluate the round-handle inequalities")
    p.add_argument("--betti", required=True, help="b0,b1,b2,b3,b4")
    p.add_argument("--k", required=True, help="k0,k1,k2,k3 (entries may be *)")

    p = sub.add_parser("order", help="dynamic order of a flow spec")
    p.add_argument("--flow", required=True, help="flow spec file")

    p = sub.add_parser("h1", help="first homology of a 3-manifold expression")
    p.add_argument("--expr", required=True)

    p = sub.add_parser("surger", help="apply one backward torus-surgery move")
    p.add_argument("--expr", required=True)
    p.add_argument("--case", required=True, choices=["dividing", "nondividing"])
    p.add_argument("--p", required=True, type=int)
    p.add_argument("--q", required=True, type=int)
    p.add_argument("--component", type=int, default=0)
    p.add_argument("--a1", default=None, help="dividing: summand kept with the lens side")

    p = sub.add_parser("compr", help="certify the backward boundary chain")
    p.add_argument("--k0", required=True, type=int)
    p.add_argument("--k1", required=True, type=int)
    p.add_argument("--pq-bound", required=True, type=int, dest="pq_bound")
    p.add_argument("--trace", default=None, help="write the full trace to this file")

    p = sub.add_parser("verify", help="classify the carrying manifold of a flow")
    p.add_argument("--flow", required=True, help="flow spec file")
    p.add_argument("--pq-bound", required=True, type=int, dest="pq_bound")
    p.add_argument("--trace", default=None, help="write the evidence bundle to this file")

    p = sub.add_parser("sweep", help="verify the whole admissible family")
    p.add_argument("--k0-max", required=True, type=int, dest="k0_max")
    p.add_argument("--k1-extra", required=True, type=int, dest="k1_extra")
    p.add_argument("--pq-bound", required=True, type=int, dest="pq_bound")
    p.add_argument("--trace", default=None, help="write the sweep table to this file")

    return parser


def _open_client(server: Optional[str]):
    if server:
        import httpx

        return httpx.Client(base_url=server)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

        from .service.app import app

        return TestClient(app)


def _parse_k_entries(text: str) -> list[Optional[int]]:
    out: list[Optional[int]] = []
    for part in text.split(","):
        part = part.strip()
        out.append(None if part == "*" else int(part))
    return out


def main(argv: Optional[list[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = _build_parser()
    args = parser.parse_args(argv)

    try:
        payload, path = _request_for(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return 2

    client = _open_client(args.server)
    try:
        response = client.post(path, json=payload)
    finally:
        client.close()

    if response.status_code == 422:
        detail = response.json()
        if detail.get("error") == "parse":
            print(
                f"parse error at line {detail.get('line', 1)}, column {detail.get('column', 1)}: "
                f"{detail.get('message')}",
                file=err,
            )
        else:
            print(f"error: {detail.get('message', detail)}", file=err)
        return 2
    if response.status_code != 200:
        print(f"service error {response.status_code}: {response.text}", file=err)
        return 2

    body = response.json()
    print(body.get("report", ""), file=out)
    trace_path = getattr(args, "trace", None)
    if trace_path and "trace" in body:
        with open(trace_path, "w") as fh:
            fh.write(body["trace"] + "\n")
    return 0 if _succeeded(args.verb, body) else 1


def _request_for(args) -> tuple[dict, str]:
    if args.verb == "check-franks":
        betti = [int(x) for x in args.betti.split(",")]
        if len(betti) != 5:
            raise ValueError("--betti expects five integers b0,b1,b2,b3,b4")
        handles = _parse_k_entries(args.k)
        if len(handles) != 4:
            raise ValueError("--k expects four entries k0,k1,k2,k3")
        return {"betti": betti, "handles": handles, "source_note": "cli"}, "/check-franks"
    if args.verb == "order":
        with open(args.flow) as fh:
            return {"flow_text": fh.read()}, "/order"
    if args.verb == "h1":
        return {"expr": args.expr}, "/h1"
    if args.verb == "surger":
        return (
            {
                "expr": args.expr,
                "component": args.component,
                "case": args.case,
                "p": args.p,
                "q": args.q,
                "a1": args.a1,
            },
            "/surger",
        )
    if args.verb == "compr":
        return {"k0": args.k0, "k1": args.k1, "pq_bound": args.pq_bound}, "/compr"
    if args.verb == "verify":
        with open(args.flow) as fh:
            return {"flow_text": fh.read(), "pq_bound": args.pq_bound}, "/verify"
    if args.verb == "sweep":
        return (
            {"k0_max": args.k0_max, "k1_extra": args.k1_extra, "pq_bound": args.pq_bound},
            "/sweep",
        )
    raise ValueError(f"unknown verb {args.verb!r}")


def _succeeded(verb: str, body: dict) -> bool:
    if verb == "check-franks":
        return bool(body.get("passed"))
    if verb == "order":
        return body.get("order") is not None
    if verb == "h1":
        return True
    if verb == "surger":
        return True
    if verb == "compr":
        return bool(body.get("success"))
    if verb in ("verify", "sweep"):
        return bool(body.get("ok"))
    return False


if __name__ == "__main__":
    sys.exit(main())
