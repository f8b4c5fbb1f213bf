"""JSON documents holding named block matrices.

Schema "parfid-1": block dimensions, optional trace weights, and a map of
named matrices whose complex entries are [re, im] pairs. Serialization uses
repr-exact floats, so save -> load round-trips bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .forms import BlockAlgebra, PositiveForm, Trace
from .pairs import BlockProjection, block_support

SCHEMA = "parfid-1"
KINDS = ("form", "projection", "operator")


def _encode_matrix(m: np.ndarray):
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _decode_matrix(rows) -> np.ndarray:
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix entries: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"matrix entries must be square [re, im] grids, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass(frozen=True)
class MatrixDocument:
    """Named block matrices over one block algebra."""

    algebra: BlockAlgebra
    entries: dict = field(default_factory=dict)  # name -> (kind, [blocks])
    trace_weights: tuple | None = None

    def __post_init__(self):
        checked = {}
        for name, (kind, blocks) in self.entries.items():
            if kind not in KINDS:
                raise ValidationError(f"unknown matrix kind {kind!r} for {name!r}")
            checked[name] = (kind, self.algebra.check_blocks(blocks))
        object.__setattr__(self, "entries", checked)
        if self.trace_weights is not None:
            Trace(self.algebra, self.trace_weights)  # validates

    # -- access ---------------------------------------------------------------

    def names(self):
        return sorted(self.entries)

    def blocks(self, name: str):
        if name not in self.entries:
            raise ValidationError(f"no matrix named {name!r} in document")
        return self.entries[name][1]

    def form(self, name: str) -> PositiveForm:
        return PositiveForm(self.algebra, self.blocks(name))

    def projection(self, name: str) -> BlockProjection:
        return block_support(self.algebra, self.blocks(name))

    def trace(self) -> Trace:
        if self.trace_weights is None:
            return Trace.standard(self.algebra)
        return Trace(self.algebra, self.trace_weights)

    def with_entry(self, name: str, kind: str, blocks) -> "MatrixDocument":
        entries = dict(self.entries)
        entries[name] = (kind, blocks)
        return MatrixDocument(self.algebra, entries, self.trace_weights)

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA,
            "block_dims": list(self.algebra.block_dims),
            "matrices": {
                name: {"kind": kind, "blocks": [_encode_matrix(b) for b in blocks]}
                for name, (kind, blocks) in sorted(self.entries.items())
            },
        }
        if self.trace_weights is not None:
            out["trace_weights"] = [float(c) for c in self.trace_weights]
        return out

    def save(self, path: str):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def from_dict(cls, doc: dict) -> "MatrixDocument":
        if not isinstance(doc, dict):
            raise ValidationError("document root must be a JSON object")
        if doc.get("schema") != SCHEMA:
            raise ValidationError(
                f"schema {doc.get('schema')!r} is not {SCHEMA!r}"
            )
        if "block_dims" not in doc or "matrices" not in doc:
            raise ValidationError("document needs block_dims and matrices")
        algebra = BlockAlgebra(tuple(int(n) for n in doc["block_dims"]))
        entries = {}
        for name, spec in doc["matrices"].items():
            kind = spec.get("kind", "operator")
            blocks = [_decode_matrix(b) for b in spec.get("blocks", [])]
            entries[name] = (kind, blocks)
        weights = doc.get("trace_weights")
        out = cls(
            algebra,
            entries,
            tuple(float(c) for c in weights) if weights is not None else None,
        )
        # densities must be PSD on load
        for name, (kind, blocks) in out.entries.items():
            if kind == "form":
                PositiveForm(algebra, blocks)
        return out

    @classmethod
    def load(cls, path: str) -> "MatrixDocument":
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"invalid JSON: {exc}") from None
        return cls.from_dict(doc)


def single_factor_document(matrices: dict, kind_map: dict | None = None) -> MatrixDocument:
    """Convenience: one full matrix factor, entries given as plain arrays."""
    mats = {k: np.asarray(v, dtype=complex) for k, v in matrices.items()}
    dims = {m.shape[0] for m in mats.values()}
    if len(dims) != 1:
        raise ValidationError("all matrices must share one dimension")
    n = dims.pop()
    algebra = BlockAlgebra((n,))
    kinds = kind_map or {}
    entries = {k: (kinds.get(k, "form"), [m]) for k, m in mats.items()}
    return MatrixDocument(algebra, entries)
