"""CSV emission with the frozen column schema.

Every experiment artifact shares one schema so the report generator and the
acceptance greps can key off fixed columns.  Floats print via repr-faithful
%.17g, so identical runs produce identical bodies; the only run-dependent
line is the leading '#' timestamp comment, which diff tools skip.
"""

from __future__ import annotations

import datetime
import io
import os

import numpy as np

SCHEMA = [
    "experiment_id",
    "case",
    "k_index",
    "k_mag",
    "lambda",
    "alpha",
    "beta",
    "estimator",
    "value",
    "stderr",
    "bound",
    "pass",
    "n_paths",
    "seed",
]

FIT_SCHEMA = ["sweep_id", "exponent", "half_width", "r2", "expected_exponent", "pass"]


def fmt(v) -> str:
    if v is None or v == "":
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def row(**kw) -> dict:
    unknown = set(kw) - set(SCHEMA)
    if unknown:
        raise ValueError(f"columns outside the frozen schema: {sorted(unknown)}")
    return kw


def write_csv(path: str, rows, schema=SCHEMA, stamp: bool = True) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    buf = io.StringIO()
    if stamp:
        buf.write(f"# generated {datetime.datetime.now().isoformat()}\n")
    buf.write(",".join(schema) + "\n")
    for r in rows:
        buf.write(",".join(fmt(r.get(c)) for c in schema) + "\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_csv(path: str) -> tuple[list[str], list[dict]]:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    header = lines[0].split(",")
    out = []
    for ln in lines[1:]:
        if not ln:
            continue
        out.append(dict(zip(header, ln.split(","))))
    return header, out


def body(path: str) -> str:
    """File contents minus '#' comment lines, for reproducibility diffs."""
    with open(path) as fh:
        return "".join(ln for ln in fh if not ln.startswith("#"))
