"""Exact matrix permanents.

Three kernels are provided:

* ``permanent_naive`` sums over all n! permutations; it exists as an independent
  oracle and refuses matrices above 10x10.
* ``permanent_ryser`` uses inclusion-exclusion over column subsets visited in
  Gray-code order, so each step updates the row sums by a single column.
* ``permanent_glynn`` uses Glynn's +-1 sign-vector formula, also in Gray-code order.

The fast kernels split the 2^n (or 2^(n-1)) terms into fixed, aligned chunks.
Each chunk recomputes its starting row sums from scratch and then walks the Gray
code with a cumulative sum. Chunk partials are combined by a fixed pairwise tree,
so results are bit-identical whether chunks run serially or on a thread pool.
Above ``COMPENSATED_THRESHOLD`` every reduction uses ``math.fsum`` instead.
"""

from __future__ import annotations

import itertools
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NumericalDomainError, SchemaError

NAIVE_MAX = 10
RYSER_MAX = 30
COMPENSATED_THRESHOLD = 20
CHUNK_BITS = 12

THREADS_ENV = "BOSONSAMPLING_THREADS"

ALGORITHMS = ("naive", "ryser", "glynn")


@dataclass(frozen=True)
class PermanentResult:
    value: complex
    algorithm: str
    n: int
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {
            "re": self.value.real,
            "im": self.value.imag,
            "algorithm": self.algorithm,
            "n": self.n,
        }


def _square(matrix) -> np.ndarray:
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SchemaError(f"permanent needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise SchemaError("matrix has non-finite entries")
    return a


def thread_count() -> int:
    """Worker threads for chunked evaluation, capped by the BOSONSAMPLING_THREADS variable."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@lru_cache(maxsize=None)
def _permutation_table(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.intp).reshape(-1, n)


def permanent_naive(matrix) -> complex:
    """Sum of prod_k M[k, sigma(k)] over every permutation sigma."""
    a = _square(matrix).astype(complex)
    n = a.shape[0]
    if n > NAIVE_MAX:
        raise NumericalDomainError(f"naive permanent limited to n <= {NAIVE_MAX}, got {n}")
    if n == 0:
        return 1 + 0j
    perms = _permutation_table(n)
    terms = np.prod(a[np.arange(n), perms], axis=1)
    return complex(math.fsum(terms.real) + 1j * math.fsum(terms.imag))


def _pairwise(values: list):
    """Fixed-shape pairwise reduction; the tree depends only on len(values)."""
    while len(values) > 1:
        nxt = [values[i] + values[i + 1] for i in range(0, len(values) - 1, 2)]
        if len(values) % 2:
            nxt.append(values[-1])
        values = nxt
    return values[0]


def _chunk_sum(terms: np.ndarray, compensated: bool):
    if compensated:
        if np.iscomplexobj(terms):
            return complex(math.fsum(terms.real), math.fsum(terms.imag))
        return math.fsum(terms)
    return terms.sum()


def _gray_steps(k0: int, count: int):
    """Flipped bit index and direction for Gray-code steps k0+1 .. k0+count-1."""
    k = np.arange(k0 + 1, k0 + count, dtype=np.int64)
    low = k & -k
    bit = np.log2(low.astype(float)).astype(np.intp)
    gray = k ^ (k >> 1)
    direction = np.where((gray >> bit) & 1, 1.0, -1.0)
    return bit, direction


def _ryser_chunk(a: np.ndarray, k0: int, count: int, compensated: bool):
    n = a.shape[0]
    g0 = k0 ^ (k0 >> 1)
    cols = [j for j in range(n) if (g0 >> j) & 1]
    start = a[:, cols].sum(axis=1) if cols else np.zeros(n, dtype=a.dtype)
    if count > 1:
        bit, direction = _gray_steps(k0, count)
        deltas = a[:, bit].T * direction[:, None]
        sums = np.vstack([start[None, :], start[None, :] + np.cumsum(deltas, axis=0)])
    else:
        sums = start[None, :]
    prods = np.prod(sums, axis=1)
    # Gray-code popcount parity alternates with k.
    parity = (np.arange(k0, k0 + count) & 1).astype(float)
    signs = 1.0 - 2.0 * parity
    return _chunk_sum(prods * signs, compensated)


def _glynn_chunk(a: np.ndarray, k0: int, count: int, compensated: bool):
    # Walk sign vectors delta with delta_0 = +1; bit b of the Gray code flips delta_{b+1}.
    n = a.shape[0]
    rest = a[1:]
    g0 = k0 ^ (k0 >> 1)
    flipped = [b for b in range(n - 1) if (g0 >> b) & 1]
    start = a.sum(axis=0)
    if flipped:
        start = start - 2.0 * rest[flipped].sum(axis=0)
    if count > 1:
        bit, direction = _gray_steps(k0, count)
        # Setting a bit turns delta from +1 to -1.
        deltas = -2.0 * rest[bit] * direction[:, None]
        sums = np.vstack([start[None, :], start[None, :] + np.cumsum(deltas, axis=0)])
    else:
        sums = start[None, :]
    prods = np.prod(sums, axis=1)
    parity = (np.arange(k0, k0 + count) & 1).astype(float)
    signs = 1.0 - 2.0 * parity
    return _chunk_sum(prods * signs, compensated)


def _run_chunks(chunk_fn, a: np.ndarray, total: int, compensated: bool, threads: int | None):
    size = min(total, 1 << CHUNK_BITS)
    starts = list(range(0, total, size))
    threads = thread_count() if threads is None else max(1, threads)
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(lambda k0: chunk_fn(a, k0, size, compensated), starts))
    else:
        partials = [chunk_fn(a, k0, size, compensated) for k0 in starts]
    if compensated:
        if np.iscomplexobj(a):
            return complex(math.fsum(p.real for p in partials), math.fsum(p.imag for p in partials))
        return math.fsum(partials)
    return _pairwise(partials)


def permanent_ryser(matrix, threads: int | None = None) -> complex:
    """Ryser's formula: Per(A) = (-1)^n sum_S (-1)^|S| prod_i sum_{j in S} a_ij."""
    a = _square(matrix).astype(complex)
    n = a.shape[0]
    if n > RYSER_MAX:
        raise NumericalDomainError(f"permanent limited to n <= {RYSER_MAX}, got {n}")
    if n == 0:
        return 1 + 0j
    total = _run_chunks(_ryser_chunk, a, 1 << n, n > COMPENSATED_THRESHOLD, threads)
    return complex(total) * (-1) ** n


def permanent_glynn(matrix, threads: int | None = None) -> complex:
    a = _square(matrix).astype(complex)
    n = a.shape[0]
    if n > RYSER_MAX:
        raise NumericalDomainError(f"permanent limited to n <= {RYSER_MAX}, got {n}")
    if n == 0:
        return 1 + 0j
    total = _run_chunks(_glynn_chunk, a, 1 << (n - 1), n > COMPENSATED_THRESHOLD, threads)
    return complex(total) / 2 ** (n - 1)


def _permanent_ryser_real(a: np.ndarray, threads: int | None) -> float:
    n = a.shape[0]
    total = _run_chunks(_ryser_chunk, a, 1 << n, n > COMPENSATED_THRESHOLD, threads)
    return float(total) * (-1) ** n


def _permanent_glynn_real(a: np.ndarray, threads: int | None) -> float:
    n = a.shape[0]
    total = _run_chunks(_glynn_chunk, a, 1 << (n - 1), n > COMPENSATED_THRESHOLD, threads)
    return float(total) / 2 ** (n - 1)


def permanent_nonneg(matrix, algorithm: str = "ryser", threads: int | None = None) -> float:
    """Permanent of an entrywise non-negative real matrix, in real arithmetic.

    Cancellation in inclusion-exclusion can leave a tiny negative value; anything
    above ``-1e-12`` times the row-sum bound is clamped to zero.
    """
    a = _square(matrix)
    if np.iscomplexobj(a):
        if np.any(np.abs(a.imag) > 0):
            raise SchemaError("non-negative permanent needs a real matrix")
        a = a.real
    a = a.astype(float)
    if np.any(a < 0):
        raise SchemaError("matrix has negative entries")
    n = a.shape[0]
    if n == 0:
        return 1.0
    if n > RYSER_MAX:
        raise NumericalDomainError(f"permanent limited to n <= {RYSER_MAX}, got {n}")
    if algorithm == "naive":
        value = permanent_naive(a).real
    elif algorithm == "glynn":
        value = _permanent_glynn_real(a, threads)
    elif algorithm == "ryser":
        value = _permanent_ryser_real(a, threads)
    else:
        raise SchemaError(f"unknown algorithm {algorithm!r}")
    if value < 0:
        bound = float(np.prod(a.sum(axis=1)))
        if value < -1e-12 * max(bound, 1.0):
            raise NumericalDomainError(f"non-negative permanent evaluated to {value}")
        value = 0.0
    return value


_KERNELS = {"naive": permanent_naive, "ryser": permanent_ryser, "glynn": permanent_glynn}


def permanent(matrix, algorithm: str = "ryser") -> complex:
    try:
        kernel = _KERNELS[algorithm]
    except KeyError:
        raise SchemaError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}") from None
    return kernel(matrix)


def evaluate(matrix, algorithm: str = "ryser") -> PermanentResult:
    """Permanent with provenance and wall-clock timing (used by the ``perm`` CLI command)."""
    a = _square(matrix)
    t0 = time.perf_counter()
    value = permanent(a, algorithm)
    return PermanentResult(value=value, algorithm=algorithm, n=a.shape[0], seconds=time.perf_counter() - t0)
