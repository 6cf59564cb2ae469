"""Expansion coefficients of the disorder-averaged resolvent.

The order-n coefficient is a sum over set partitions of {1..n}; each
partition contributes a momentum-lattice sum in which the per-block
momentum-conservation constraints have been solved out, leaving one free
momentum per non-maximal index plus the outer momentum carried by the test
functions.  A brute-force route that keeps the constraints as explicit
Kronecker factors is provided as an oracle.

Truncation consistency: every chain momentum is restricted to the lattice
window, which makes the resolved sum, the brute-force oracle, and the
expectation of the truncated-matrix Monte Carlo operator string identical
term sets (the equality tests in the suite rely on this).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import partitions as pt
from ._accum import chunk_ranges, fsum_c, run_ordered
from .errors import BudgetError, ConfigError
from .lattice import (
    MomentumLattice,
    ProfileSpec,
    Wavepacket,
    dist_to_spectrum,
    nu,
    profile_axis_envelope,
    profile_fourier_periodized,
    wavepacket_axis_envelope,
    wavepacket_fourier_periodized,
)
from .report import BoundReport

DEFAULT_TERM_BUDGET = 50_000_000
_CHUNK_ELEMS = 1 << 21

_EMPTY = pt.SetPartition(n=0, blocks=())


@dataclass
class CoefficientResult:
    """A computed expansion coefficient with truncation diagnostics."""

    value: complex
    n: int
    partition_count: int
    term_count: int
    truncation_tail_bound: float
    per_partition: dict = None


# ---------------------------------------------------------------------------
# cached tables


_TABLE_CACHE = {}


def bhat_difference_table(profile: ProfileSpec, lattice: MomentumLattice):
    """Profile transform on the difference window (integer range 2K),
    flattened in lexicographic order."""
    key = ("bhat", profile, lattice)
    tab = _TABLE_CACHE.get(key)
    if tab is None:
        K, d = lattice.K, lattice.d
        axes = [np.arange(-2 * K, 2 * K + 1)] * d
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=-1) / lattice.L
        tab = profile_fourier_periodized(profile, pts, lattice.L)
        tab.setflags(write=False)
        _TABLE_CACHE[key] = tab
    return tab


def psi_hat_vector(psi: Wavepacket, lattice: MomentumLattice):
    """Wavepacket transform on the lattice, cached."""
    key = ("psi", psi, lattice)
    vec = _TABLE_CACHE.get(key)
    if vec is None:
        vec = wavepacket_fourier_periodized(psi, lattice.points, lattice.L)
        vec.setflags(write=False)
        _TABLE_CACHE[key] = vec
    return vec


def _diff_index(s, K, d):
    """Flat index into the difference table for integer steps s (…, d)."""
    side = 4 * K + 1
    c = np.clip(s + 2 * K, 0, side - 1)
    idx = c[..., 0].astype(np.int64)
    for j in range(1, d):
        idx = idx * side + c[..., j]
    return idx


# ---------------------------------------------------------------------------
# the resolved per-partition lattice sum


def _chain_sum(A, lattice, btab, zs, *, sum_u0, psi_w=None, threads=1,
               budget=DEFAULT_TERM_BUDGET):
    """Sum the resolved integrand of one partition over the truncated window.

    zs is one entry per chain slot (length A.n + 1): a spectral parameter to
    put a resolvent factor there, or None for an identity slot.

    Returns (value, term_count) when sum_u0 is true, else (per-u0 array,
    term_count); the outer test-function weights psi_w are applied only in
    the summed form.
    """
    d, K, L = lattice.d, lattice.K, lattice.L
    n = A.n
    if len(zs) != n + 1:
        raise ConfigError("need one resolvent slot per chain position")
    maps = pt.partition_maps(A)
    free = list(maps.I)
    m = len(free)
    side = 4 * K + 1
    Nv = side ** (m * d)
    N = lattice.size
    if N * Nv > budget:
        raise BudgetError(
            f"partition term needs {N * Nv:.3g} lattice terms, budget {budget:.3g}"
        )

    if m:
        axes = [np.arange(-2 * K, 2 * K + 1)] * (m * d)
        mesh = np.meshgrid(*axes, indexing="ij")
        vflat = np.stack([g.ravel() for g in mesh], axis=-1).reshape(Nv, m, d)
    else:
        vflat = np.zeros((1, 0, d), dtype=np.int64)
    pos = {l: i for i, l in enumerate(free)}

    steps = np.zeros((n, Nv, d), dtype=np.int64)
    for j in range(1, n + 1):
        if j in pos:
            steps[j - 1] = vflat[:, pos[j], :]
        else:
            others = [pos[l] for l in maps.block_of[j] if l != j]
            if others:
                steps[j - 1] = -np.sum(vflat[:, others, :], axis=1)

    prefix = np.zeros((n + 1, Nv, d), dtype=np.int64)
    if n:
        np.cumsum(steps, axis=0, out=prefix[1:])

    # step factors of the profile transform (independent of the outer momentum)
    bprod = np.ones(Nv)
    for j in range(n):
        bprod *= btab[_diff_index(-steps[j], K, d)]
        # steps beyond the difference window are killed by the chain mask below
        out_of_window = np.any(np.abs(steps[j]) > 2 * K, axis=-1)
        if out_of_window.any():
            bprod[out_of_window] = 0.0

    u_ints = lattice.ints
    res = np.zeros(N, dtype=complex)
    rows = max(1, _CHUNK_ELEMS // max(Nv, 1))
    ranges = chunk_ranges(N, rows)

    inv_L = 1.0 / L

    def work(lo, hi):
        u = u_ints[lo:hi]
        acc = np.ones((hi - lo, Nv), dtype=complex)
        ok = np.ones((hi - lo, Nv), dtype=bool)
        for slot in range(n + 1):
            kj = u[:, None, :] + prefix[slot][None, :, :]
            if slot not in (0, n):
                ok &= np.all(np.abs(kj) <= K, axis=-1)
            zj = zs[slot]
            if zj is not None:
                nuv = 0.5 * np.sum((kj * inv_L) ** 2, axis=-1)
                acc *= 1.0 / (nuv - zj)
        acc *= bprod[None, :]
        acc[~ok] = 0.0
        res[lo:hi] = np.sum(acc, axis=1)

    run_ordered([lambda lo=lo, hi=hi: work(lo, hi) for lo, hi in ranges], threads)

    if sum_u0:
        return fsum_c(psi_w * res), N * Nv
    return res, N * Nv


def partition_term_C(n, A: pt.SetPartition, lattice, profile, dist, z,
                     psi1, psi2, *, threads=1, budget=DEFAULT_TERM_BUDGET) -> complex:
    """One partition's contribution to the order-n coefficient.

    Zero-weight partitions short-circuit before any lattice work.
    """
    if A.n != n:
        raise ConfigError("partition ground set must match the order")
    dist_to_spectrum(z)
    mw = pt.moment_weight(A, dist)
    if mw == 0.0:
        return 0.0 + 0.0j
    btab = bhat_difference_table(profile, lattice)
    psi_w = np.conj(psi_hat_vector(psi1, lattice)) * psi_hat_vector(psi2, lattice)
    value, _ = _chain_sum(A, lattice, btab, (z,) * (n + 1), sum_u0=True,
                          psi_w=psi_w, threads=threads, budget=budget)
    m = len(pt.partition_maps(A).I)
    return mw * lattice.volume ** (-(m + 1)) * value


def coefficient_T(n, lattice, profile, dist, z, psi1, psi2, *,
                  per_partition=False, threads=1,
                  budget=DEFAULT_TERM_BUDGET) -> CoefficientResult:
    """Order-n expansion coefficient: sum of all partition terms.

    Partitions are visited in the fixed enumeration order and accumulated
    exactly, so the result is reproducible for any thread count.
    """
    dist_to_spectrum(z)
    parts = [_EMPTY] if n == 0 else list(pt.enumerate_partitions(n))
    btab = bhat_difference_table(profile, lattice)
    psi_w = np.conj(psi_hat_vector(psi1, lattice)) * psi_hat_vector(psi2, lattice)

    values = []
    per = {} if per_partition else None
    terms = 0
    for A in parts:
        mw = pt.moment_weight(A, dist)
        if mw == 0.0:
            val = 0.0 + 0.0j
        else:
            raw, cnt = _chain_sum(A, lattice, btab, (z,) * (n + 1), sum_u0=True,
                                  psi_w=psi_w, threads=threads, budget=budget)
            m = len(pt.partition_maps(A).I)
            val = mw * lattice.volume ** (-(m + 1)) * raw
            terms += cnt
        values.append(val)
        if per is not None:
            per[A.blocks] = val

    tail = truncation_tail_bound(n, lattice, profile, dist, z, psi1, psi2)
    return CoefficientResult(
        value=fsum_c(values),
        n=n,
        partition_count=len(parts),
        term_count=terms,
        truncation_tail_bound=tail,
        per_partition=per,
    )


def coefficient_T_vectors(n, lattice, profile, dist, z, psi1_hat, psi2_hat, *,
                          threads=1, budget=DEFAULT_TERM_BUDGET) -> complex:
    """coefficient_T for raw transform vectors instead of wavepackets.

    Used where the test functions are lattice basis vectors (trace sums).
    """
    dist_to_spectrum(z)
    parts = [_EMPTY] if n == 0 else list(pt.enumerate_partitions(n))
    btab = bhat_difference_table(profile, lattice)
    psi_w = np.conj(np.asarray(psi1_hat)) * np.asarray(psi2_hat)
    values = []
    for A in parts:
        mw = pt.moment_weight(A, dist)
        if mw == 0.0:
            continue
        raw, _ = _chain_sum(A, lattice, btab, (z,) * (n + 1), sum_u0=True,
                            psi_w=psi_w, threads=threads, budget=budget)
        m = len(pt.partition_maps(A).I)
        values.append(mw * lattice.volume ** (-(m + 1)) * raw)
    return fsum_c(values)


# ---------------------------------------------------------------------------
# brute-force oracle


def coefficient_T_oracle(n, lattice, profile, dist, z, psi1, psi2,
                         budget=100_000_000) -> complex:
    """Direct (n+1)-fold lattice sum with explicit conservation deltas.

    Ground truth for the resolved route on small instances; the two sums
    contain literally the same terms.
    """
    dist_to_spectrum(z)
    N = lattice.size
    total = N ** (n + 1)
    if total > budget:
        raise BudgetError(f"oracle needs {total:.3g} chain tuples, budget {budget:.3g}")

    ints = lattice.ints
    idx = np.meshgrid(*([np.arange(N)] * (n + 1)), indexing="ij")
    k = [ints[ix.ravel()] for ix in idx]  # chain momenta, integer coords
    p = [k[j] - k[j + 1] for j in range(n)]  # transfer momenta

    btab = bhat_difference_table(profile, lattice)
    K, d = lattice.K, lattice.d
    bvals = [btab[_diff_index(p[j], K, d)] for j in range(n)]

    EP = np.zeros(total)
    parts = [_EMPTY] if n == 0 else list(pt.enumerate_partitions(n))
    for A in parts:
        mw = pt.moment_weight(A, dist)
        if mw == 0.0:
            continue
        ok = np.ones(total, dtype=bool)
        for block in A.blocks:
            ssum = np.zeros((total, d), dtype=np.int64)
            for l in block:
                ssum += p[l - 1]
            ok &= np.all(ssum == 0, axis=-1)
        factor = np.full(total, mw * lattice.volume ** len(A.blocks))
        for j in range(n):
            factor *= bvals[j]
        EP[ok] += factor[ok]

    psi1_hat = psi_hat_vector(psi1, lattice)
    psi2_hat = psi_hat_vector(psi2, lattice)
    integrand = np.conj(psi1_hat[idx[0].ravel()]) * psi2_hat[idx[n].ravel()]
    integrand = integrand * EP
    inv_L = 1.0 / lattice.L
    for j in range(n + 1):
        nuv = 0.5 * np.sum((k[j] * inv_L) ** 2, axis=-1)
        integrand = integrand * (1.0 / (nuv - z))
    return fsum_c(integrand) * lattice.volume ** (-(n + 1))


# ---------------------------------------------------------------------------
# error-side functional


def error_functional_E(n, lattice, profile, dist, z, psi1, *, threads=1,
                       budget=DEFAULT_TERM_BUDGET, with_diagnostics=False):
    """Expected squared norm of the n-fold adjoint operator string.

    A sum over partitions of {1..2n} whose chains carry resolvents at z on
    the first n slots, an identity at slot n+1, and resolvents at conj(z)
    on the rest.  Real and nonnegative up to rounding.
    """
    dist_to_spectrum(z)
    parts = [_EMPTY] if n == 0 else list(pt.enumerate_partitions(2 * n))
    zs = (z,) * n + (None,) + (np.conj(z),) * n
    btab = bhat_difference_table(profile, lattice)
    p1 = psi_hat_vector(psi1, lattice)
    psi_w = np.conj(p1) * p1

    values = []
    for A in parts:
        mw = pt.moment_weight(A, dist)
        if mw == 0.0:
            continue
        raw, _ = _chain_sum(A, lattice, btab, zs, sum_u0=True, psi_w=psi_w,
                            threads=threads, budget=budget)
        m = len(pt.partition_maps(A).I)
        values.append(mw * lattice.volume ** (-(m + 1)) * raw)
    total = fsum_c(values)
    if with_diagnostics:
        return float(total.real), abs(total.imag)
    return float(total.real)


# ---------------------------------------------------------------------------
# norms, per-term bounds, truncation tails


def bhat_star_norms(profile: ProfileSpec, L, K=None, d=1):
    """(||B_hat||_{*,1} including an envelope tail, ||B_hat||_{*,inf}).

    The truncated sums run over the difference window; the omitted mass is
    bounded by the per-axis decay envelope.
    """
    K = K or 64
    side = np.arange(-2 * K, 2 * K + 1)
    if profile.kind == "gaussian":
        axis_vals = np.abs(
            profile_fourier_periodized(ProfileSpec("gaussian", 1.0, profile.sigma),
                                       side[:, None] / L, L)
        )
    else:
        axis_vals = np.abs(
            profile_fourier_periodized(ProfileSpec("cosine-bump", 1.0, r=profile.r),
                                       side[:, None] / L, L)
        )
    env = profile_axis_envelope(profile, L)
    axis_tail = _axis_envelope_tail(env, L, 2 * K)
    s1 = abs(profile.b0) * ((axis_vals.sum() + axis_tail) ** d) / L**d
    sinf = abs(profile.b0) * float(axis_vals.max()) ** d
    return float(s1), float(sinf)


def _axis_envelope_tail(env, L, K_in, X=200_000):
    """Upper bound on sum of env(m/L) over |m| > K_in (one axis).

    Numeric out to X plus an integral-comparison remainder for the k^-2
    envelope tail beyond it.
    """
    if X <= K_in:
        X = 2 * K_in
    ms = np.arange(K_in + 1, X + 1)
    partial = 2.0 * float(np.sum(env(ms / L)))
    # beyond X the envelopes decay at least like 1/k^2, so the remainder is
    # dominated by env(X/L) * sum_{m>X} (X/m)^2 <= env(X/L) * X
    rem = 2.0 * float(env(X / L)) * X
    return partial + rem


def _axis_pair_window_sum(env1, env2, L, K_in, X=100_000):
    """(windowed, full) sums of env1*env2 over one integer axis."""
    ms_in = np.arange(-K_in, K_in + 1)
    win = float(np.sum(env1(ms_in / L) * env2(ms_in / L)))
    ms = np.arange(K_in + 1, X + 1)
    out = 2.0 * float(np.sum(env1(ms / L) * env2(ms / L)))
    rem = 2.0 * float(env1(X / L) * env2(X / L)) * X
    return win, win + out + rem


def truncation_tail_bound(n, lattice, profile, dist, z, psi1, psi2) -> float:
    """Conservative bound on the mass the window truncation discards.

    Union bound over the first variable to leave the window: either the
    outer momentum exceeds K/2, or some free momentum exceeds K/(2m); each
    case is bounded by decay-envelope sums, with resolvents bounded by the
    distance to the spectrum and non-free step factors by ||B||_1.
    """
    d, K, L = lattice.d, lattice.K, lattice.L
    dist_z = dist_to_spectrum(z)
    envB = profile_axis_envelope(profile, L)
    b0 = abs(profile.b0)

    # per-axis envelope sums for the paired test functions
    psi_in = 1.0
    psi_all = 1.0
    psi_half = 1.0
    for j in range(d):
        e1 = wavepacket_axis_envelope(psi1, j, L)
        e2 = wavepacket_axis_envelope(psi2, j, L)
        w_in, w_all = _axis_pair_window_sum(e1, e2, L, K)
        w_half, _ = _axis_pair_window_sum(e1, e2, L, K // 2)
        psi_in *= w_in
        psi_all *= w_all
        psi_half *= w_half
    s_psi_all = psi_all / L**d
    s_psi_escape = max(0.0, (psi_all - psi_half)) / L**d

    total = 0.0
    parts = [_EMPTY] if n == 0 else list(pt.enumerate_partitions(n))
    normB1 = profile.norm_l1(d)
    for A in parts:
        mw = abs(pt.moment_weight(A, dist))
        if mw == 0.0:
            continue
        m = len(pt.partition_maps(A).I)
        thr = max(1, K // (2 * m)) if m else K
        bwin, ball = _axis_pair_window_sum(envB, lambda k: np.ones_like(np.asarray(k, float)), L, 2 * K)
        bthr, _ = _axis_pair_window_sum(envB, lambda k: np.ones_like(np.asarray(k, float)), L, thr)
        SB_all = b0 * (ball**d) / L**d
        SB_thr = b0 * (bthr**d) / L**d
        blocks = len(A.blocks)
        esc = s_psi_escape * SB_all**m + s_psi_all * m * max(0.0, SB_all - SB_thr) * SB_all ** max(0, m - 1)
        total += mw * normB1**blocks * esc
    return total * dist_z ** (-(n + 1))


def partition_term_bound(n, A, lattice, profile, dist, z, psi1, psi2,
                         value=None, **kw) -> BoundReport:
    """Per-partition magnitude bound: moment weight times ||B||_1 per block,
    the summed transform norm per free index, and the resolvent distance."""
    if value is None:
        value = partition_term_C(n, A, lattice, profile, dist, z, psi1, psi2, **kw)
    m = len(pt.partition_maps(A).I)
    s1, _ = bhat_star_norms(profile, lattice.L, lattice.K, lattice.d)
    rhs = (
        abs(pt.moment_weight(A, dist))
        * profile.norm_l1(lattice.d) ** (n - m)
        * s1**m
        * dist_to_spectrum(z) ** (-(n + 1))
    )
    return BoundReport(
        name="partition_term_magnitude",
        lhs=abs(value),
        rhs=rhs,
        context={"n": n, "blocks": A.blocks, "z": (z.real, z.imag)},
    )


def conj_symmetry_check(n, lattice, profile, dist, z, psi, *, threads=1) -> BoundReport:
    """T_n at conj(z) must equal the conjugate of T_n at z (same psi twice)."""
    t1 = coefficient_T(n, lattice, profile, dist, z, psi, psi, threads=threads).value
    t2 = coefficient_T(n, lattice, profile, dist, np.conj(z), psi, psi,
                       threads=threads).value
    lhs = abs(t2 - np.conj(t1))
    rhs = 1e-12 * max(abs(t1), 1e-300)
    return BoundReport(
        name="conjugation_symmetry",
        lhs=lhs,
        rhs=rhs,
        context={"n": n, "z": (z.real, z.imag), "T": (t1.real, t1.imag)},
    )


# ---------------------------------------------------------------------------
# limit probes


def eta_limit_probe(n, E, eta_sequence, lattice, profile, dist, psi1, psi2,
                    *, threads=1):
    """Boundary-value probe: coefficient values along a decreasing eta path.

    Emits the value and successive differences; flags Cauchy behavior
    (strictly shrinking differences) as a diagnostic, not a proof.
    """
    etas = [float(e) for e in eta_sequence]
    if any(e <= 0 for e in etas):
        raise ConfigError("eta values must be positive")
    if sorted(etas, reverse=True) != etas:
        raise ConfigError("eta sequence must be decreasing")
    rows = []
    prev = None
    prev_delta = None
    for eta in etas:
        val = coefficient_T(n, lattice, profile, dist, complex(E, eta), psi1,
                            psi2, threads=threads).value
        delta = abs(val - prev) if prev is not None else None
        shrinking = (delta is not None and prev_delta is not None
                     and delta < prev_delta)
        rows.append({"eta": eta, "value": val, "delta": delta,
                     "shrinking": shrinking})
        prev = val
        if delta is not None:
            prev_delta = delta
    return rows


def volume_limit_probe(n, z, L_sequence, d, K_over_L, profile, dist, psi1,
                       psi2, *, threads=1, max_points=500_000):
    """Infinite-volume probe: values along increasing L at fixed physical
    cutoff K/L, with the per-order magnitude surrogate checked on each row."""
    from .lattice import build_lattice

    rows = []
    prev = None
    for L in L_sequence:
        K = max(1, int(round(K_over_L * L)))
        lattice = build_lattice(d, L, K, max_points=max_points)
        val = coefficient_T(n, lattice, profile, dist, z, psi1, psi2,
                            threads=threads).value
        s1, _ = bhat_star_norms(profile, L, K, d)
        surrogate = 0.0
        parts = [_EMPTY] if n == 0 else list(pt.enumerate_partitions(n))
        for A in parts:
            mw = abs(pt.moment_weight(A, dist))
            if mw == 0.0:
                continue
            m = len(pt.partition_maps(A).I)
            surrogate += mw * profile.norm_l1(d) ** (n - m) * s1**m
        surrogate *= dist_to_spectrum(z) ** (-(n + 1))
        rows.append({
            "L": L, "K": K, "value": val,
            "delta": abs(val - prev) if prev is not None else None,
            "surrogate_bound": surrogate,
            "bound_ok": abs(val) <= surrogate * (1 + 1e-12),
        })
        prev = val
    return rows
