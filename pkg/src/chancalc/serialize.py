"""Channel files: a small JSON schema for maps on disk.

A channel file is a JSON object with integer fields "d_in" and "d_out" and
exactly one of

    "kraus": list of d_out x d_in matrices (row-major)
    "choi":  one (d_in*d_out) x (d_in*d_out) matrix

Complex entries are stored as two-element [re, im] lists so the files stay
plain JSON. Loading parses, validates, and returns a certified Channel;
a map that fails complete positivity or trace preservation raises NotCPTP
with the validator's diagnostic attached.
"""
from __future__ import annotations

import json

import numpy as np

from .channels import Channel, LinearMap, as_channel, from_kraus
from .errors import BadParameters


def _pair(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def matrix_to_lists(M) -> list:
    """Row-major nested lists with [re, im] entries."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise BadParameters("expected a matrix")
    return [[_pair(z) for z in row] for row in M]


def matrix_from_lists(rows, what: str = "matrix") -> np.ndarray:
    """Inverse of matrix_to_lists, with shape and entry checks."""
    if not isinstance(rows, list) or not rows:
        raise BadParameters(f"{what}: expected a non-empty list of rows")
    width = None
    out = []
    for row in rows:
        if not isinstance(row, list) or not row:
            raise BadParameters(f"{what}: rows must be non-empty lists")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise BadParameters(f"{what}: ragged rows")
        line = []
        for entry in row:
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(isinstance(x, (int, float)) for x in entry)
            ):
                raise BadParameters(f"{what}: entries must be [re, im] pairs")
            line.append(complex(entry[0], entry[1]))
        out.append(line)
    return np.array(out, dtype=complex)


def channel_to_dict(T: Channel, form: str = "kraus") -> dict:
    """ChannelFile object for a certified channel.

    form="kraus" stores the Kraus operators (compact for low rank),
    form="choi" stores the Choi matrix directly.
    """
    if form == "kraus":
        return {
            "d_in": int(T.d_in),
            "d_out": int(T.d_out),
            "kraus": [matrix_to_lists(K) for K in T.kraus],
        }
    if form == "choi":
        return {
            "d_in": int(T.d_in),
            "d_out": int(T.d_out),
            "choi": matrix_to_lists(T.choi),
        }
    raise BadParameters(f"unknown channel file form {form!r}")


def channel_from_dict(obj, tol: float | None = None) -> Channel:
    """Parse and validate a ChannelFile object.

    Raises BadParameters on schema problems and NotCPTP when the parsed map
    is not a channel.
    """
    if not isinstance(obj, dict):
        raise BadParameters("channel file must be a JSON object")
    for key in ("d_in", "d_out"):
        if key not in obj:
            raise BadParameters(f"channel file is missing {key!r}")
        if not isinstance(obj[key], int) or obj[key] < 1:
            raise BadParameters(f"{key!r} must be a positive integer")
    d_in, d_out = obj["d_in"], obj["d_out"]
    has_kraus = "kraus" in obj
    has_choi = "choi" in obj
    if has_kraus == has_choi:
        raise BadParameters("channel file needs exactly one of kraus/choi")
    known = {"d_in", "d_out", "kraus", "choi"}
    extra = sorted(set(obj) - known)
    if extra:
        raise BadParameters(f"unknown channel file fields {extra}")
    kwargs = {} if tol is None else {"tol": tol}
    if has_kraus:
        if not isinstance(obj["kraus"], list) or not obj["kraus"]:
            raise BadParameters("kraus must be a non-empty list of matrices")
        ops = [
            matrix_from_lists(rows, what=f"kraus[{i}]")
            for i, rows in enumerate(obj["kraus"])
        ]
        for i, K in enumerate(ops):
            if K.shape != (d_out, d_in):
                raise BadParameters(
                    f"kraus[{i}] has shape {K.shape}, expected ({d_out}, {d_in})"
                )
        return from_kraus(ops, **kwargs)
    J = matrix_from_lists(obj["choi"], what="choi")
    m = d_in * d_out
    if J.shape != (m, m):
        raise BadParameters(f"choi has shape {J.shape}, expected ({m}, {m})")
    return as_channel(LinearMap(d_in, d_out, J), **kwargs)


def save_channel(T: Channel, path, form: str = "kraus") -> None:
    with open(path, "w") as fh:
        json.dump(channel_to_dict(T, form=form), fh)
        fh.write("\n")


def load_channel(path, tol: float | None = None) -> Channel:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise BadParameters(f"{path}: not valid JSON ({exc})") from exc
    return channel_from_dict(obj, tol=tol)
