"""Dense N-way tensors stored as float64 numpy arrays.

Element order is "first index fastest": ``vec(t)`` is ``t.ravel(order="F")``.
The mode-n unfolding sends element (i_1, ..., i_N) to column
``j = sum_{k != n} i_k * J_k`` with ``J_k = prod_{m < k, m != n} I_m`` (0-based),
which is a Fortran-order reshape after moving axis n to the front.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def as_tensor(t) -> np.ndarray:
    """Return ``t`` as a float64 array with at least one axis."""
    a = np.asarray(t, dtype=np.float64)
    if a.ndim == 0:
        raise ValueError("a tensor needs at least one mode")
    if any(d < 1 for d in a.shape):
        raise ValueError(f"all dimensions must be positive, got {a.shape}")
    return a


def check_shape(shape: Sequence[int]) -> tuple[int, ...]:
    shape = tuple(int(d) for d in shape)
    if len(shape) == 0 or any(d < 1 for d in shape):
        raise ValueError(f"invalid shape {shape}")
    return shape


def _check_mode(n: int, ndim: int) -> None:
    if not 0 <= n < ndim:
        raise ValueError(f"mode {n} out of range for an order-{ndim} tensor")


def vec(t) -> np.ndarray:
    return np.asarray(t, dtype=np.float64).ravel(order="F")


def from_vec(x, shape: Sequence[int]) -> np.ndarray:
    shape = check_shape(shape)
    x = np.asarray(x, dtype=np.float64)
    if x.size != int(np.prod(shape)):
        raise ValueError(f"{x.size} values cannot fill shape {shape}")
    return x.reshape(shape, order="F")


def unfold(t, n: int) -> np.ndarray:
    """Mode-n unfolding (0-based ``n``): an ``I_n x prod_{k != n} I_k`` matrix."""
    t = as_tensor(t)
    _check_mode(n, t.ndim)
    return np.moveaxis(t, n, 0).reshape(t.shape[n], -1, order="F")


def refold(m, n: int, shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`unfold` for a tensor of the given shape."""
    shape = check_shape(shape)
    _check_mode(n, len(shape))
    m = np.asarray(m, dtype=np.float64)
    rest = int(np.prod(shape)) // shape[n]
    if m.ndim != 2 or m.shape != (shape[n], rest):
        raise ValueError(f"matrix of shape {m.shape} does not unfold shape {shape} along mode {n}")
    moved = (shape[n],) + tuple(d for k, d in enumerate(shape) if k != n)
    return np.moveaxis(m.reshape(moved, order="F"), 0, n)


def mode_n_product(t, u, n: int) -> np.ndarray:
    """``t x_n u``: multiply every mode-n fiber of ``t`` by ``u``."""
    t = as_tensor(t)
    u = np.asarray(u, dtype=np.float64)
    _check_mode(n, t.ndim)
    if u.ndim != 2 or u.shape[1] != t.shape[n]:
        raise ValueError(f"factor of shape {u.shape} cannot act on mode {n} of size {t.shape[n]}")
    new_shape = t.shape[:n] + (u.shape[0],) + t.shape[n + 1:]
    return refold(u @ unfold(t, n), n, new_shape)


def multi_mode_product(t, factors, transpose: bool = False) -> np.ndarray:
    """Apply ``factors[k]`` (or its transpose) along every mode k in turn."""
    out = as_tensor(t)
    for k, u in enumerate(factors):
        out = mode_n_product(out, u.T if transpose else u, k)
    return out


def inner(a, b) -> float:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(vec(a) @ vec(b))


def frobenius_norm(t) -> float:
    return float(np.linalg.norm(vec(t)))


def relative_error(x, x0) -> float:
    """``||x - x0||_F / ||x0||_F``."""
    x, x0 = as_tensor(x), as_tensor(x0)
    if x.shape != x0.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {x0.shape}")
    denom = frobenius_norm(x0)
    if denom == 0.0:
        raise ValueError("reference tensor is zero")
    return frobenius_norm(x - x0) / denom


# -- text format -------------------------------------------------------------
# line 1: N; line 2: I_1 ... I_N; then all values in canonical order.

def format_tensor(t) -> str:
    t = as_tensor(t)
    lines = [str(t.ndim), " ".join(str(d) for d in t.shape)]
    lines.extend(f"{x:.17g}" for x in vec(t))
    return "\n".join(lines) + "\n"


def parse_tensor(text: str) -> np.ndarray:
    tokens = text.split()
    if len(tokens) < 1:
        raise ValueError("empty tensor file")
    try:
        order = int(tokens[0])
        if order < 1 or len(tokens) < 1 + order:
            raise ValueError
        shape = check_shape(int(v) for v in tokens[1:1 + order])
        values = [float(v) for v in tokens[1 + order:]]
    except ValueError as exc:
        raise ValueError(f"malformed tensor file: {exc}") from None
    if len(values) != int(np.prod(shape)):
        raise ValueError(f"expected {int(np.prod(shape))} values for shape {shape}, found {len(values)}")
    return from_vec(values, shape)


def read_tensor(path) -> np.ndarray:
    with open(path) as fh:
        return parse_tensor(fh.read())


def write_tensor(path, t) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(format_tensor(t))
