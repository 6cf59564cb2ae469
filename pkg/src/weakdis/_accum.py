"""Deterministic accumulation helpers.

Every reduction that crosses a chunk or thread boundary goes through
``math.fsum`` (exact for float64 inputs), so results are bit-identical for
any chunking and any worker count.  Inner vectorized reductions use numpy's
pairwise summation on fixed-shape arrays, which is deterministic for a fixed
shape and axis order.
"""

import math

import numpy as np


def fsum_r(values) -> float:
    arr = np.asarray(values, dtype=float)
    return math.fsum(arr.ravel().tolist())


def fsum_c(values) -> complex:
    arr = np.asarray(values, dtype=complex)
    flat = arr.ravel()
    return complex(math.fsum(flat.real.tolist()), math.fsum(flat.imag.tolist()))


def chunk_ranges(n, size):
    """Split range(n) into consecutive (start, stop) chunks of fixed size."""
    size = max(1, int(size))
    return [(i, min(i + size, n)) for i in range(0, n, size)]


def run_ordered(tasks, threads):
    """Run a list of no-arg callables, returning results in task order.

    With threads <= 1 this is a plain loop; otherwise a thread pool is used.
    Tasks must write only to disjoint state (or be pure), so the schedule
    cannot affect results.
    """
    if threads <= 1 or len(tasks) <= 1:
        return [t() for t in tasks]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as ex:
        futures = [ex.submit(t) for t in tasks]
        return [f.result() for f in futures]
