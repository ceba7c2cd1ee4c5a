"""Linear sensing operators: entry masks and dense measurement matrices."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .tensor_core import as_tensor, check_shape, from_vec, vec

MAX_DENSE_COLUMNS = 2**16


@dataclass(frozen=True, eq=False)
class SensingOperator:
    """A linear map from tensors of ``shape`` to R^m.

    For ``kind == "mask"`` the operator reads the entries at ``linear_index``
    (canonical first-index-fastest positions, kept sorted). For
    ``kind == "dense"`` it is ``matrix @ vec(t)``.
    """

    kind: Literal["mask", "dense"]
    shape: tuple[int, ...]
    linear_index: np.ndarray | None = None
    matrix: np.ndarray | None = None
    _pinv: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def m(self) -> int:
        return len(self.linear_index) if self.kind == "mask" else self.matrix.shape[0]

    @property
    def omega(self) -> np.ndarray:
        """Sampled multi-indices (0-based), one per row, in measurement order."""
        if self.kind != "mask":
            raise ValueError("only mask operators have an index set")
        idx = np.unravel_index(self.linear_index, self.shape, order="F")
        return np.stack(idx, axis=1) if len(self.linear_index) else np.zeros((0, len(self.shape)), dtype=int)

    def mask_array(self) -> np.ndarray:
        """Boolean tensor that is True on the sampled entries."""
        out = np.zeros(self.size, dtype=bool)
        if self.kind == "mask":
            out[self.linear_index] = True
        return from_vec(out, self.shape).astype(bool)

    def apply(self, t) -> np.ndarray:
        t = as_tensor(t)
        if t.shape != self.shape:
            raise ValueError(f"operator acts on shape {self.shape}, got {t.shape}")
        x = vec(t)
        if self.kind == "mask":
            return x[self.linear_index]
        return self.matrix @ x

    def adjoint(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64).ravel()
        if y.size != self.m:
            raise ValueError(f"expected {self.m} measurements, got {y.size}")
        if self.kind == "mask":
            x = np.zeros(self.size)
            x[self.linear_index] = y
        else:
            x = self.matrix.T @ y
        return from_vec(x, self.shape)

    def to_matrix(self) -> np.ndarray:
        if self.size > MAX_DENSE_COLUMNS:
            raise ValueError(f"domain of {self.size} entries is too large to materialize")
        if self.kind == "dense":
            return self.matrix.copy()
        a = np.zeros((self.m, self.size))
        a[np.arange(self.m), self.linear_index] = 1.0
        return a

    def pinv(self) -> np.ndarray:
        """Cached pseudo-inverse of the dense measurement matrix."""
        if "pinv" not in self._pinv:
            self._pinv["pinv"] = np.linalg.pinv(self.to_matrix())
        return self._pinv["pinv"]


def mask_operator(shape: Sequence[int], indices) -> SensingOperator:
    """Mask from 0-based multi-indices (rows of ``indices``)."""
    shape = check_shape(shape)
    idx = np.asarray(indices, dtype=np.int64).reshape(-1, len(shape))
    if np.any(idx < 0) or np.any(idx >= np.array(shape)):
        raise ValueError("mask index outside the tensor shape")
    lin = np.ravel_multi_index(tuple(idx.T), shape, order="F") if len(idx) else np.zeros(0, dtype=np.int64)
    if len(np.unique(lin)) != len(lin):
        raise ValueError("mask indices must be unique")
    return SensingOperator("mask", shape, linear_index=np.sort(lin))


def mask_from_linear(shape: Sequence[int], linear_index) -> SensingOperator:
    shape = check_shape(shape)
    lin = np.asarray(linear_index, dtype=np.int64).ravel()
    if np.any(lin < 0) or np.any(lin >= int(np.prod(shape))) or len(np.unique(lin)) != len(lin):
        raise ValueError("invalid linear mask indices")
    return SensingOperator("mask", shape, linear_index=np.sort(lin))


def mask_from_boolean(observed) -> SensingOperator:
    observed = np.asarray(observed, dtype=bool)
    return mask_from_linear(observed.shape, np.flatnonzero(vec(observed)))


def dense_operator(shape: Sequence[int], matrix) -> SensingOperator:
    shape = check_shape(shape)
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] != int(np.prod(shape)):
        raise ValueError(f"matrix of shape {a.shape} does not act on tensors of shape {shape}")
    return SensingOperator("dense", shape, matrix=a)


def gaussian_operator(shape: Sequence[int], m: int, rng: np.random.Generator) -> SensingOperator:
    """Dense operator with i.i.d. N(0, 1/m) entries, so E||F t||^2 = ||t||_F^2."""
    if m < 1:
        raise ValueError("need at least one measurement")
    shape = check_shape(shape)
    a = rng.standard_normal((m, int(np.prod(shape)))) / np.sqrt(m)
    return dense_operator(shape, a)


def random_mask(shape: Sequence[int], p: float, rng: np.random.Generator) -> SensingOperator:
    """Sample ``round(p * prod(shape))`` entries uniformly without replacement."""
    if not 0 < p <= 1:
        raise ValueError(f"sampling fraction must lie in (0, 1], got {p}")
    shape = check_shape(shape)
    total = int(np.prod(shape))
    count = int(round(p * total))
    return mask_from_linear(shape, rng.choice(total, size=count, replace=False))


# -- mask file: line 1 = |Omega|, then one 1-based multi-index per line --------

def format_mask(op: SensingOperator) -> str:
    lines = [str(op.m)]
    lines.extend(" ".join(str(i + 1) for i in row) for row in op.omega)
    return "\n".join(lines) + "\n"


def parse_mask(text: str, shape: Sequence[int]) -> SensingOperator:
    shape = check_shape(shape)
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if not rows:
        raise ValueError("empty mask file")
    try:
        count = int(rows[0][0])
        idx = [[int(v) - 1 for v in row] for row in rows[1:]]
    except ValueError as exc:
        raise ValueError(f"malformed mask file: {exc}") from None
    if count != len(idx):
        raise ValueError(f"mask header says {count} indices, found {len(idx)}")
    if any(len(row) != len(shape) for row in idx):
        raise ValueError(f"every mask line needs {len(shape)} indices")
    return mask_operator(shape, np.array(idx, dtype=np.int64).reshape(-1, len(shape)))


def read_mask(path, shape: Sequence[int]) -> SensingOperator:
    with open(path) as fh:
        return parse_mask(fh.read(), shape)


def write_mask(path, op: SensingOperator) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(format_mask(op))
