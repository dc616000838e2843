"""Thin wrapper over the C++ driver. Specs and reports are plain dicts."""

import json
import os

from ._rdro import SCHEMA_VERSION, run as _run

__all__ = ["SCHEMA_VERSION", "RdroError", "reformulate", "solve", "verify", "oracle", "run"]


class RdroError(RuntimeError):
    def __init__(self, code, report):
        err = report.get("error", {})
        super().__init__(f"{err.get('kind', 'error')}: {err.get('message', '')} (exit {code})")
        self.code = code
        self.report = report


def run(command, spec, *, check=True, **opts):
    """spec is a dict, JSON text or a file path. Returns (exit_code, report);
    with check, nonzero codes raise RdroError."""
    if isinstance(spec, os.PathLike) or (isinstance(spec, str) and not spec.lstrip().startswith("{") and os.path.isfile(spec)):
        with open(spec) as f:
            spec = f.read()
    text = spec if isinstance(spec, str) else json.dumps(spec)
    code, out = _run(command, text, **opts)
    report = json.loads(out)
    if check and code != 0:
        raise RdroError(code, report)
    return code, report


def reformulate(spec, **opts):
    return run("reformulate", spec, **opts)[1]


def solve(spec, **opts):
    return run("solve", spec, **opts)[1]


def verify(spec, suite, **opts):
    return run("verify", spec, suite=suite, **opts)[1]


def oracle(spec, **opts):
    return run("oracle", spec, **opts)[1]
