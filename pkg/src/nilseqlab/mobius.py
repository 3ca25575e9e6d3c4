"""Mobius function tables and averaged correlation sums.

The sieve is segmented so memory stays bounded by the segment size; a
second, independent routine derives mu(n) by dividing out primes from
the values themselves (different bookkeeping, used as a cross-check and
for golden files).  Correlation sums S(N) = (1/N) sum mu(n) xi(n) are
accumulated through a fixed binary reduction tree, so a segment-parallel
run reproduces the serial result bit for bit.
"""

from __future__ import annotations

import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .nilseq import SequenceStream

__all__ = [
    "LimitTooLarge",
    "UnboundedSequence",
    "MobiusTable",
    "sieve_mobius",
    "mobius_by_factorization",
    "mertens",
    "CorrelationReport",
    "correlate",
    "CesaroReport",
    "cesaro_stats",
    "tree_fold",
    "write_cache",
    "read_cache",
    "mobius_stream",
]

DEFAULT_SEGMENT = 1 << 20
HARD_LIMIT = 10 ** 9

CACHE_MAGIC = b"MOB1"


class LimitTooLarge(ValueError):
    """Requested sieve limit exceeds the configured bound."""


class UnboundedSequence(ValueError):
    """Correlation against a stream with no finite sup bound."""


@dataclass(frozen=True)
class MobiusTable:
    """mu(1..limit) as an int8 array; index 0 is unused."""

    limit: int
    values: np.ndarray

    def mu(self, n: int) -> int:
        if not 1 <= n <= self.limit:
            raise IndexError(f"n={n} outside 1..{self.limit}")
        return int(self.values[n])

    __getitem__ = mu


def _primes_up_to(n: int) -> np.ndarray:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p:: p] = False
    return np.nonzero(sieve)[0]


def sieve_mobius(limit: int, segment_size: int = DEFAULT_SEGMENT,
                 hard_limit: int = HARD_LIMIT) -> MobiusTable:
    """Segmented sieve for mu(1..limit).

    Per segment: multiply in -1 for each prime p <= sqrt(limit) dividing
    n, zero out multiples of p^2, and track the product of the sieved
    primes; a leftover cofactor > 1 is one more distinct prime factor.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    if limit > hard_limit:
        raise LimitTooLarge(f"limit {limit} exceeds configured bound {hard_limit}")
    primes = _primes_up_to(max(int(limit ** 0.5), 1))
    out = np.zeros(limit + 1, dtype=np.int8)
    for lo in range(1, limit + 1, segment_size):
        hi = min(lo + segment_size, limit + 1)
        n_vals = np.arange(lo, hi, dtype=np.int64)
        mu = np.ones(hi - lo, dtype=np.int8)
        prod = np.ones(hi - lo, dtype=np.int64)
        for p in primes:
            start = (-lo) % p
            mu[start:: p] *= -1
            prod[start:: p] *= p
            p2 = p * p
            start2 = (-lo) % p2
            mu[start2:: p2] = 0
        big_cofactor = prod != n_vals
        mu[big_cofactor] = -mu[big_cofactor]
        out[lo:hi] = mu
    out[0] = 0
    if limit >= 1:
        out[1] = 1
    return MobiusTable(limit=limit, values=out)


def mobius_by_factorization(limit: int) -> np.ndarray:
    """Independent mu table: divide primes out of each value (vectorized
    trial division), counting distinct factors and squarefreeness.

    Slower than the sieve and organized differently on purpose; used as
    the oracle in tests and to produce golden files.
    """
    n_vals = np.arange(limit + 1, dtype=np.int64)
    remaining = n_vals.copy()
    remaining[0] = 1
    distinct = np.zeros(limit + 1, dtype=np.int16)
    squarefree = np.ones(limit + 1, dtype=bool)
    for p in _trial_primes(int(limit ** 0.5)):
        divisible = remaining % p == 0
        if not divisible.any():
            continue
        remaining[divisible] //= p
        distinct[divisible] += 1
        again = divisible & (remaining % p == 0)
        squarefree[again] = False
        while again.any():
            remaining[again] //= p
            again = again & (remaining % p == 0)
    leftover = remaining > 1
    distinct[leftover] += 1
    mu = np.where(squarefree, np.where(distinct % 2 == 0, 1, -1), 0).astype(np.int8)
    mu[0] = 0
    return mu


def _trial_primes(n: int) -> list[int]:
    # deliberately naive: per-candidate trial division
    primes = []
    for c in range(2, n + 1):
        is_p = True
        for p in primes:
            if p * p > c:
                break
            if c % p == 0:
                is_p = False
                break
        if is_p:
            primes.append(c)
    return primes


def mertens(table: MobiusTable, checkpoints: Sequence[int]) -> list[int]:
    """M(K) = sum_{n<=K} mu(n) at each checkpoint."""
    cks = list(checkpoints)
    if any(k < 1 or k > table.limit for k in cks):
        raise IndexError("checkpoint outside table range")
    csum = np.cumsum(table.values, dtype=np.int64)
    return [int(csum[k]) for k in cks]


# ---------------------------------------------------------------------------
# fixed-tree summation


def tree_fold(values: np.ndarray) -> complex:
    """Sum through a fixed binary tree: repeatedly add element pairs.

    The tree shape depends only on the length, never on how the values
    were produced, so any segment-parallel evaluation that fills the
    same array reduces to bitwise the same total.
    """
    a = np.asarray(values, dtype=np.complex128).copy()
    while a.size > 1:
        if a.size % 2:
            tail = a[-1]
            a = a[:-1]
        else:
            tail = None
        a = a[0::2] + a[1::2]
        if tail is not None:
            a = np.concatenate([a, [tail]])
    return complex(a[0]) if a.size else 0j


@dataclass(frozen=True)
class CorrelationReport:
    """Partial averages S(N) = (1/N) sum_{n=1..N} mu(n) xi(n)."""

    checkpoints: tuple[int, ...]
    sums: tuple[complex, ...]
    sequence_bound: float
    method: str = "pairwise-tree"

    def abs_sums(self) -> tuple[float, ...]:
        return tuple(abs(s) for s in self.sums)


def correlate(
    xi: SequenceStream,
    checkpoints: Sequence[int],
    table: MobiusTable | None = None,
    segment_size: int = 1 << 15,
    threads: int = 1,
) -> CorrelationReport:
    """Averaged correlation of mu against a bounded stream.

    Checkpoints must be increasing; the largest determines the sieve
    range.  Summation: per-segment products are reduced with tree_fold,
    segment totals again with tree_fold, making the result independent
    of evaluation order (and hence of `threads`).
    """
    cks = sorted(int(k) for k in checkpoints)
    if not cks or cks[0] < 1:
        raise ValueError("need positive checkpoints")
    if list(cks) != list(checkpoints):
        raise ValueError("checkpoints must be sorted ascending")
    if xi.bound is None:
        raise UnboundedSequence(f"stream {xi.provenance!r} carries no bound")
    n_max = cks[-1]
    if table is None:
        table = sieve_mobius(n_max)
    if table.limit < n_max:
        raise ValueError("mobius table shorter than the last checkpoint")
    mu = table.values

    seg_bounds = [(lo, min(lo + segment_size, n_max + 1))
                  for lo in range(1, n_max + 1, segment_size)]

    def segment_values(bounds: tuple[int, int]) -> np.ndarray:
        lo, hi = bounds
        vals = xi.evaluate_block(lo, hi)
        return vals * mu[lo:hi]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            seg_arrays = list(pool.map(segment_values, seg_bounds))
    else:
        seg_arrays = [segment_values(b) for b in seg_bounds]

    sums: list[complex] = []
    seg_totals = [tree_fold(a) for a in seg_arrays]
    for k in cks:
        # whole segments below k, then a partial slice of the segment k is in
        full = (k - 1) // segment_size  # count of complete segments before k
        partial_lo = 1 + full * segment_size
        total = tree_fold(np.array(seg_totals[:full], dtype=np.complex128))
        if partial_lo <= k:
            total += tree_fold(seg_arrays[full][: k - partial_lo + 1])
        sums.append(total / k)
    return CorrelationReport(
        checkpoints=tuple(cks), sums=tuple(sums), sequence_bound=float(xi.bound),
    )


@dataclass(frozen=True)
class CesaroReport:
    """Two-sided averages over windows [-N, N]."""

    checkpoints: tuple[int, ...]
    abs_means: tuple[float, ...]
    sq_means: tuple[float, ...]

    @property
    def quadratic_norm_estimate(self) -> float:
        return float(np.sqrt(self.sq_means[-1]))


def cesaro_stats(a: SequenceStream, checkpoints: Sequence[int]) -> CesaroReport:
    """Cesaro averages of |a_n| and |a_n|^2 over [-N, N] per checkpoint."""
    cks = sorted(int(k) for k in checkpoints)
    if not cks or cks[0] < 0:
        raise ValueError("need nonnegative checkpoints")
    n_max = cks[-1]
    vals = a.evaluate_block(-n_max, n_max + 1)
    mags = np.abs(vals)
    abs_means = []
    sq_means = []
    for k in cks:
        window = mags[n_max - k: n_max + k + 1]
        abs_means.append(float(tree_fold(window.astype(np.complex128)).real) / (2 * k + 1))
        sq_means.append(float(tree_fold((window ** 2).astype(np.complex128)).real) / (2 * k + 1))
    return CesaroReport(
        checkpoints=tuple(cks), abs_means=tuple(abs_means), sq_means=tuple(sq_means),
    )


# ---------------------------------------------------------------------------
# cache file: magic, u64 little-endian limit, 2-bit packed values


def write_cache(table: MobiusTable, path: str) -> None:
    """Pack mu values two bits each (mu+1 in {0,1,2}), low bits first."""
    enc = (table.values[1:].astype(np.int16) + 1).astype(np.uint8)
    pad = (-len(enc)) % 4
    if pad:
        enc = np.concatenate([enc, np.full(pad, 3, dtype=np.uint8)])
    quads = enc.reshape(-1, 4)
    packed = quads[:, 0] | (quads[:, 1] << 2) | (quads[:, 2] << 4) | (quads[:, 3] << 6)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<Q", table.limit))
        fh.write(packed.tobytes())
    os.replace(tmp, path)


def read_cache(path: str) -> MobiusTable:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CACHE_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        (limit,) = struct.unpack("<Q", fh.read(8))
        packed = np.frombuffer(fh.read(), dtype=np.uint8)
    need = (limit + 3) // 4
    if len(packed) != need:
        raise ValueError(f"{path}: expected {need} payload bytes, found {len(packed)}")
    quads = np.stack([packed & 3, (packed >> 2) & 3, (packed >> 4) & 3, (packed >> 6) & 3], axis=1)
    flat = quads.reshape(-1)[:limit].astype(np.int8) - 1
    values = np.zeros(limit + 1, dtype=np.int8)
    values[1:] = flat
    return MobiusTable(limit=int(limit), values=values)


def mobius_stream(table: MobiusTable) -> SequenceStream:
    """mu itself as a stream (defined as 0 outside 1..limit)."""
    values = table.values

    def ev(n: int) -> complex:
        if 1 <= n <= table.limit:
            return complex(int(values[n]))
        return 0j

    def block(start: int, stop: int) -> np.ndarray:
        out = np.zeros(stop - start, dtype=np.complex128)
        lo = max(start, 1)
        hi = min(stop, table.limit + 1)
        if lo < hi:
            out[lo - start: hi - start] = values[lo:hi]
        return out

    from .nilseq import Tag
    return SequenceStream(evaluate=ev, bound=1.0, tag=Tag.unknown(),
                          provenance=f"mobius(limit={table.limit})", block=block)
