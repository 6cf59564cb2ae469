"""Explicit inequality constants and their grid verifiers.

Each closed-form constant is an evaluable function; each inequality gets a
checker that measures its left side numerically (truncated sums with tail
estimates, or adaptive quadrature) and reports lhs/rhs/margin.  Where a
constant is non-explicit in the underlying estimates, the checker verifies
the claimed scaling shape instead and says so in its notes — no invented
numbers are presented as ground truth.
"""

import math

import numpy as np
from scipy import optimize
from scipy.integrate import dblquad, quad

from . import partitions as pt
from ._accum import fsum_c, fsum_r
from .coefficients import bhat_star_norms
from .errors import BudgetError, ConfigError
from .lattice import MomentumLattice, ProfileSpec, profile_fourier_periodized
from .report import BoundReport

_SPHERE_AREA = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}


def const_C1(E: float, d: int) -> float:
    """sqrt(2) (E^{-1/2}(E+1)^{(d-1)/2} + E^{(d-2)/2}) |S_{d-1}|."""
    if E <= 0:
        raise ConfigError("E must be positive")
    if d not in (1, 2, 3):
        raise ConfigError("d must be 1, 2, or 3")
    return math.sqrt(2.0) * (
        E ** (-0.5) * (E + 1.0) ** ((d - 1) / 2.0) + E ** ((d - 2) / 2.0)
    ) * _SPHERE_AREA[d]


# ---------------------------------------------------------------------------
# full-space transform helpers (continuum-side lemmas)


def _ft_axis_abs(profile: ProfileSpec):
    """|axis transform| of the full-space profile, as a vectorized callable
    (b0 excluded; applied once by the callers)."""
    if profile.kind == "gaussian":
        sig = profile.sigma
        return lambda k: np.exp(-np.pi * np.asarray(k, float) ** 2 / sig) / math.sqrt(sig)
    r = profile.r
    from .lattice import _bump_ft_axis

    return lambda k: np.abs(_bump_ft_axis(r, np.asarray(k, float)))


def ft_norm_inf(profile: ProfileSpec, d: int) -> float:
    """sup |full-space transform|: attained at zero for these profiles."""
    axis = _ft_axis_abs(profile)
    return abs(profile.b0) * float(axis(0.0)) ** d


def ft_norm_l1(profile: ProfileSpec, d: int) -> float:
    """L1 norm of the full-space transform (separable)."""
    if profile.kind == "gaussian":
        # each axis integrates to 1 regardless of sigma
        return abs(profile.b0)
    axis = _ft_axis_abs(profile)
    r = profile.r
    # the transform has zeros at k = m/(2r) for m >= 2; integrate lobe by
    # lobe so the kinks of |.| fall on segment boundaries
    lobes = 800
    edges = [0.0, 1.0 / r] + [m / (2.0 * r) for m in range(3, lobes + 1)]
    val = math.fsum(quad(axis, a, b, limit=50)[0]
                    for a, b in zip(edges, edges[1:]))
    R = edges[-1]
    # |axis FT| <= r / ((2 r k)^2 - 1) beyond the main lobe
    tail = profile.r / (4.0 * profile.r**2 * R)
    return abs(profile.b0) * (2.0 * (val + tail)) ** d


def fullspace_star_norms(profile: ProfileSpec, L: float, d: int,
                         X: int = 8192):
    """(s1, sinf) lattice norms of the full-space transform sampled on the
    dual lattice: s1 = (1/L^d) sum |f|, sinf = sup |f|, both with explicit
    tails for the window cutoff."""
    axis = _ft_axis_abs(profile)
    ks = np.arange(-X, X + 1) / L
    vals = np.asarray(axis(ks), dtype=float)
    edge = X / L
    if profile.kind == "gaussian":
        sig = profile.sigma
        # integral comparison for the monotone gaussian tail
        tail_axis = 2.0 * float(axis(edge)) * (
            sig / (2.0 * math.pi * edge) + 1.0 / L)
    else:
        # envelope r / ((2 r k)^2 - 1) summed past the window
        r = profile.r
        tail_axis = 2.0 * (L / (4.0 * r * edge) + r / (4.0 * r * r *
                                                       edge * edge))
    s1_axis = fsum_r(vals) / L + tail_axis
    s1 = abs(profile.b0) * s1_axis**d
    sinf = abs(profile.b0) * float(np.max(vals)) ** d
    return s1, sinf


def _star_norms(profile: ProfileSpec, L: float, d: int, truncated: bool):
    if truncated:
        return bhat_star_norms(profile, L, d=d)
    return fullspace_star_norms(profile, L, d)


# ---------------------------------------------------------------------------
# window integral and the summed-resolvent constant


def _window_integral(E: float, d: int, eta: float, tol: float = 1e-8) -> float:
    """Integral of |q^2 - E - i eta/sqrt(2)|^{-1} over the cube
    ||q||_inf <= sqrt(2E+1)."""
    a = math.sqrt(2.0 * E + 1.0)
    eta_eff = eta / math.sqrt(2.0)

    if d == 1:
        def f(x):
            return 1.0 / math.hypot(x * x - E, eta_eff)

        pts = [-math.sqrt(E), math.sqrt(E)] if E > 0 else None
        val, _ = quad(f, -a, a, points=pts, limit=400, epsabs=tol, epsrel=tol)
        return val
    if d == 2:
        def f(y, x):
            return 1.0 / math.hypot(x * x + y * y - E, eta_eff)

        val, _ = dblquad(f, -a, a, -a, a, epsabs=tol * 10, epsrel=tol * 10)
        return val
    if d == 3:
        # nested adaptive quadrature, coarser tolerance (documented)
        def inner(x, y):
            def g(zc):
                return 1.0 / math.hypot(x * x + y * y + zc * zc - E, eta_eff)

            v, _ = quad(g, -a, a, limit=100, epsabs=1e-6, epsrel=1e-6)
            return v

        def mid(x):
            v, _ = quad(lambda y: inner(x, y), -a, a, limit=60,
                        epsabs=1e-5, epsrel=1e-5)
            return v

        val, _ = quad(mid, -a, a, limit=60, epsabs=1e-4, epsrel=1e-4)
        return val
    raise ConfigError("d must be 1, 2, or 3")


def const_C0(E: float, d: int, L: float, eta: float,
             profile: ProfileSpec, *, truncated: bool = False) -> float:
    """||f||_{*,inf} times the resonant-window integral, plus
    (E+1)^{-1} ||f||_{*,1}."""
    if E < 0 or eta <= 0:
        raise ConfigError("need E >= 0 and eta > 0")
    s1, sinf = _star_norms(profile, L, d, truncated)
    if s1 == 0.0 and sinf == 0.0:
        return 0.0
    return sinf * _window_integral(E, d, eta) + s1 / (E + 1.0)


def const_C(E: float, d: int, L: float, eta: float,
            profile: ProfileSpec, *, truncated: bool = False) -> float:
    """Closed-form dominating constant for the lattice resolvent sum."""
    if E <= 0 or eta <= 0:
        raise ConfigError("need E > 0 and eta > 0")
    s1, sinf = _star_norms(profile, L, d, truncated)
    log_term = const_C1(2.0 * E, d) * math.log(1.0 / eta + 1.0)
    extra = 2.0**d * math.sqrt(2.0) * (4.0 * E + 1.0) ** (d / 2.0)
    return 2.0 * sinf * (log_term + extra) + 2.0 * s1


# one-slot cache for the big-window lattice data: the verification grids
# sweep (E, eta) with (d, L) fixed, so a single slot gets full reuse
_WINDOW_SLOT = {"key": None, "nu": None, "absf": None}

_BIG_WINDOW = {1: 4096, 2: 384, 3: 48}


def _abs_transform_values(profile: ProfileSpec, pts: np.ndarray, L: float,
                          truncated: bool) -> np.ndarray:
    if truncated:
        return np.abs(profile_fourier_periodized(profile, pts, L))
    axis = _ft_axis_abs(profile)
    vals = np.full(pts.shape[0], abs(profile.b0))
    for j in range(pts.shape[1]):
        vals = vals * np.asarray(axis(pts[:, j]), dtype=float)
    return vals


def _big_window_data(profile: ProfileSpec, d: int, L: float, X: int,
                     truncated: bool):
    key = (profile, d, L, X, truncated)
    if _WINDOW_SLOT["key"] != key:
        chunks_nu = []
        chunks_f = []
        side = np.arange(-X, X + 1)
        if d == 1:
            pts = side[:, None] / L
            chunks_nu.append(0.5 * (pts[:, 0] ** 2))
            chunks_f.append(_abs_transform_values(profile, pts, L, truncated))
        else:
            rest = np.meshgrid(*([side] * (d - 1)), indexing="ij")
            rest = np.stack([g.ravel() for g in rest], axis=-1)
            for m1 in side:
                pts = np.concatenate(
                    [np.full((rest.shape[0], 1), m1), rest], axis=1) / L
                chunks_nu.append(0.5 * np.sum(pts**2, axis=-1))
                chunks_f.append(_abs_transform_values(profile, pts, L,
                                                      truncated))
        _WINDOW_SLOT["key"] = key
        _WINDOW_SLOT["nu"] = np.concatenate(chunks_nu)
        _WINDOW_SLOT["absf"] = np.concatenate(chunks_f)
    return _WINDOW_SLOT["nu"], _WINDOW_SLOT["absf"]


def check_resolvent_sum_bound(E: float, d: int, L: float, eta: float,
                              profile: ProfileSpec, *, X: int = None,
                              truncated: bool = False) -> BoundReport:
    """Lattice sum (1/L^d) sum |f(q)| / |nu(q) - E -+ i eta| against the
    closed-form constant, with f the profile transform sampled on the dual
    lattice (full-space by default; truncated=True uses the box-truncated
    transform instead, whose resonant values can defeat the constant).  The
    sum runs over a large window; the omitted mass is bounded and included
    in the left side.  Summing moduli dominates the modulus of either
    signed sum, so the check is sign-independent."""
    X = X or _BIG_WINDOW[d] * max(1, int(L))
    nu_vals, absf = _big_window_data(profile, d, L, X, truncated)
    lhs_main = fsum_r(absf / np.hypot(nu_vals - E, eta)) / L**d
    # outside the window nu >= (X/L)^2/2 so the resolvent factor is tiny,
    # and (1/L^d) sum |f| over everything is the *,1 norm with tail
    s1, _ = _star_norms(profile, L, d, truncated)
    nu_min = 0.5 * (X / L) ** 2
    if nu_min < 2.0 * E + 1.0:
        raise ConfigError("window too small for the tail estimate")
    tail = s1 * 2.0 / nu_min
    lhs = lhs_main + tail
    rhs = const_C(E, d, L, eta, profile, truncated=truncated)
    return BoundReport(
        name="resolvent_sum_bound",
        lhs=lhs,
        rhs=rhs,
        context={"E": E, "d": d, "L": L, "eta": eta, "window": X,
                 "tail_part": tail,
                 "transform": "truncated" if truncated else "full-space"},
        notes="abs-inside lattice sum vs closed-form constant",
    )


# ---------------------------------------------------------------------------
# continuum log-integral and arctan lemmas


def check_log_integral_bound(E: float, d: int, eta: float,
                             profile: ProfileSpec) -> BoundReport:
    """Continuum integral of |f(q)| / |q^2 - E -+ i eta| against
    C1(E,d) ||f||_inf log(1/eta + 1) + sqrt(2) ||f||_1, with f the
    full-space profile transform."""
    if E <= 0 or eta <= 0:
        raise ConfigError("need E > 0 and eta > 0")
    axis = _ft_axis_abs(profile)
    b0 = abs(profile.b0)
    root = math.sqrt(E)

    if d == 1:
        if profile.kind == "gaussian":
            R = max(8.0 * math.sqrt(profile.sigma), 2.0 * root + 2.0)
        else:
            R = max(400.0 / profile.r, 2.0 * root + 2.0)

        def f(x):
            return b0 * float(axis(x)) / math.hypot(x * x - E, eta)

        val, _ = quad(f, -R, R, points=[-root, root], limit=400)
        tail = 2.0 * b0 * float(axis(R)) * R / (R * R - E)
        lhs = val + tail
    else:
        if profile.kind != "gaussian":
            raise ConfigError(
                "radial reduction needs an isotropic profile in d >= 2")
        sig = profile.sigma
        R = max(8.0 * math.sqrt(sig), 2.0 * root + 2.0)

        def f(r):
            rad = b0 * math.exp(-math.pi * r * r / sig) / sig ** (d / 2.0)
            return _SPHERE_AREA[d] * r ** (d - 1) * rad / math.hypot(
                r * r - E, eta)

        val, _ = quad(f, 0.0, R, points=[root], limit=400)
        lhs = val  # Gaussian decay makes the radial tail negligible
    rhs = const_C1(E, d) * ft_norm_inf(profile, d) * math.log(
        1.0 / eta + 1.0) + math.sqrt(2.0) * ft_norm_l1(profile, d)
    return BoundReport(
        name="log_integral_bound",
        lhs=lhs,
        rhs=rhs,
        context={"E": E, "d": d, "eta": eta},
    )


def check_arctan_bound(f, a: float, b: float, *,
                       sup_window: float = 50.0,
                       grid_points: int = 100_001) -> BoundReport:
    """integral_a^b |f| <= pi * sup |<x>^2 f(x)| for a scalar function.

    The sup is taken numerically on a dense grid spanning the integration
    interval and a wide neighborhood of the origin.
    """
    if b <= a:
        raise ConfigError("need a < b")
    lo = min(a, -sup_window)
    hi = max(b, sup_window)
    xs = np.linspace(lo, hi, grid_points)
    weighted = (1.0 + xs**2) * np.abs(np.asarray(f(xs), dtype=float))
    sup = float(weighted.max())
    val, _ = quad(lambda x: abs(f(x)), a, b, limit=400)
    return BoundReport(
        name="arctan_bound",
        lhs=val,
        rhs=math.pi * sup,
        context={"a": a, "b": b, "sup_weighted": sup},
    )


# ---------------------------------------------------------------------------
# weighted resolvent-square sum: scaling-shape check


def _weighted_square_sum(E, tau, eta, d, L, X):
    """(1/L^d) sum over ||m||_inf <= X of <a>^tau / |a^2-E-i eta|^2 plus an
    integral-comparison remainder for the rest of the dual lattice."""
    side = np.arange(-X, X + 1)
    total = 0.0
    if d == 1:
        a2 = (side / L) ** 2
        total = fsum_r((1.0 + a2) ** (tau / 2.0) / ((a2 - E) ** 2 + eta**2))
    else:
        rest = np.meshgrid(*([side] * (d - 1)), indexing="ij")
        rest2 = np.sum(np.stack([g.ravel() for g in rest], axis=-1) ** 2,
                       axis=-1)
        parts = []
        for m1 in side:
            a2 = (m1**2 + rest2) / L**2
            parts.append(fsum_r((1.0 + a2) ** (tau / 2.0)
                                / ((a2 - E) ** 2 + eta**2)))
        total = fsum_r(parts)
    if (X / L) ** 2 < 2.0 * E + 1.0:
        raise ConfigError("window too small for the remainder estimate")
    # shells ||m||_inf = s > X: a^2 >= (s/L)^2 >= 2E so (a^2-E)^2 >= a^4/4
    rem = (8.0 * d * 3.0 ** (d - 1) * 2.0 ** (tau / 2.0)
           * L ** (4.0 - tau - d) * X ** (d + tau - 4.0) / (4.0 - d - tau))
    return (total + rem) / L**d


def check_weighted_resolvent_sum(E: float, tau: float, eta: float,
                                 lattice: MomentumLattice, *,
                                 decades: float = 3.0, n_eta: int = 13,
                                 L_grid=(1, 2, 4, 8),
                                 ratio_limit: float = 10.0) -> BoundReport:
    """Scaling-shape check for the weighted resolvent-square sum.

    The dominating constant is non-explicit, so the check verifies that
    LHS / (1 + eta^{-2}) stays within a bounded ratio across an eta-grid
    spanning the requested decades (on the given lattice), and reports the
    values across a box-size sweep for boundedness.
    """
    d = lattice.d
    if not 0 <= tau < 4 - d:
        raise ConfigError("tau must lie in [0, 4-d)")
    if eta <= 0:
        raise ConfigError("eta must be positive")
    X = _BIG_WINDOW[d] // 4 * max(1, int(lattice.L))
    etas = np.geomspace(eta, min(1.0, eta * 10.0**decades), n_eta)
    normalized = [
        _weighted_square_sum(E, tau, float(e), d, lattice.L, X)
        / (1.0 + float(e) ** -2)
        for e in etas
    ]
    ratio = max(normalized) / min(normalized)
    by_L = {}
    if L_grid:
        for Lg in L_grid:
            Xg = _BIG_WINDOW[d] // 4 * max(1, int(Lg))
            by_L[float(Lg)] = _weighted_square_sum(
                E, tau, eta, d, float(Lg), Xg) / (1.0 + eta**-2)
    return BoundReport(
        name="weighted_resolvent_sum",
        lhs=ratio,
        rhs=ratio_limit,
        context={"E": E, "tau": tau, "eta_min": float(etas[0]),
                 "eta_max": float(etas[-1]),
                 "normalized_min": min(normalized),
                 "normalized_max": max(normalized),
                 "by_L": by_L},
        notes="shape check: the dominating constant is non-explicit, so the "
              "normalized sum is required to stay within a bounded ratio",
    )


# ---------------------------------------------------------------------------
# main theorem right-hand side


def measured_cB(profile: ProfileSpec, d: int, L_grid=(1, 2, 4, 8)) -> float:
    """Measured sup over the box-size grid of the summed transform norm."""
    return max(bhat_star_norms(profile, float(Lg), d=d)[0] for Lg in L_grid)


def c_tilde(E: float, d: int, profile: ProfileSpec, *,
            L_grid=(1, 2, 4, 8)) -> float:
    """max of the two closed-form branches entering the order-2n sum."""
    normB1 = profile.norm_l1(d)
    cB = measured_cB(profile, d, L_grid)
    branch1 = 2.0 * normB1 * const_C1(2.0 * E, d)
    branch2 = (2.0 * normB1 * 2.0**d * math.sqrt(2.0)
               * (4.0 * E + 1.0) ** (d / 2.0) + 2.0 * cB)
    return max(branch1, branch2)


def main_error_bound_rhs(n: int, d: int, E: float, eta: float, lam: float,
                         profile: ProfileSpec, dist, psi1, psi2, *,
                         L_grid=(1, 2, 4, 8)) -> float:
    """Closed-form dominating bound on the order-n expansion residual:

        lam^n eta^{-n/2} (1 + log(1/eta+1))^n eta^{-3/2} K_n ||psi1|| ||psi2||

    with K_n summing over partitions of {1..2n} and the measured summed
    transform norm standing in for the non-explicit profile constant.
    """
    if n > 4:
        raise BudgetError("order capped at 4 (partition growth)")
    if eta <= 0 or E <= 0:
        raise ConfigError("need E > 0 and eta > 0")
    if dist.moment(1) != 0.0:
        raise ConfigError("the residual bound needs a centered weight law")
    ct = c_tilde(E, d, profile, L_grid=L_grid)
    normB1 = profile.norm_l1(d)
    ksq = 0.0
    if n == 0:
        ksq = 1.0
    else:
        for A in pt.enumerate_partitions(2 * n):
            mw = 1.0
            for block in A.blocks:
                mw *= dist.moment(len(block))
            if mw == 0.0:
                continue
            blocks = len(A.blocks)
            ksq += normB1**blocks * abs(mw) * ct ** (2 * n - blocks)
    K_n = math.sqrt(ksq)
    # wavepackets are unit-normalized in full space by construction, and the
    # box restriction only shrinks the norms, so 1 bounds both factors
    del psi1, psi2
    psi_norms = 1.0
    log_factor = (1.0 + math.log(1.0 / eta + 1.0)) ** n
    return (lam**n * eta ** (-n / 2.0) * log_factor * eta**-1.5
            * K_n * psi_norms)


def scaling_exponent(n: int, eps: float) -> float:
    """Predicted log-log slope of the residual bound under eta = lam^(2-eps),
    after dividing out the logarithmic factor."""
    return n - (2.0 - eps) * (n / 2.0 + 1.5)


# ---------------------------------------------------------------------------
# two-resolvent sup-weight scaling check


def _sup_weight_value(q, v1, v2, E, eta, eps, sigma):
    d = len(q)
    g = 0.0
    for j in range(d):
        g += (-1.0 + eps) * 0.5 * (
            math.log1p(v1[j] ** 2) + math.log1p(v2[j] ** 2))
    k1 = [q[j] + v1[j] for j in range(d)]
    k2 = [q[j] + sigma * v1[j] + v2[j] for j in range(d)]
    nu1 = 0.5 * sum(x * x for x in k1)
    nu2 = 0.5 * sum(x * x for x in k2)
    g -= 0.5 * math.log((nu1 - E) ** 2 + eta**2)
    g -= 0.5 * math.log((nu2 - E) ** 2 + eta**2)
    return g


def _maximize_sup_weight(q, E, eta, eps, sigma, seed=0):
    d = len(q)
    r = math.sqrt(2.0 * E)
    starts = []
    for s1 in (0.0, r, -r):
        v1 = [-q[j] + (s1 if j == 0 else 0.0) for j in range(d)]
        for s2 in (0.0, r, -r):
            base = [q[j] + sigma * v1[j] for j in range(d)]
            v2 = [-base[j] + (s2 if j == 0 else 0.0) for j in range(d)]
            starts.append(np.array(v1 + v2))
    starts.append(np.zeros(2 * d))
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    for _ in range(8):
        starts.append(rng.normal(scale=1.0 + max(abs(x) for x in q),
                                 size=2 * d))

    def neg(xs):
        return -_sup_weight_value(q, xs[:d], xs[d:], E, eta, eps, sigma)

    best = -math.inf
    for x0 in starts:
        res = optimize.minimize(neg, x0, method="Nelder-Mead",
                                options={"xatol": 1e-8, "fatol": 1e-12,
                                         "maxiter": 2000})
        best = max(best, -res.fun)
    return math.exp(best)


def check_sup_weight_grid(E: float, eps: float, eta: float, q_grid, *,
                          sigma: int = 1, seed: int = 0,
                          ratio_limit: float = 50.0) -> BoundReport:
    """Heuristic scaling check of the weighted two-resolvent sup estimate.

    For each grid q, the weighted product is maximized over both internal
    momenta by multi-start local search; the normalized value
    sup * prod <q_j>^{1-eps} / (1 + eta^{-2}) must stay within a bounded
    ratio across the grid.  No constant is claimed.
    """
    if not 0.0 < eps < 1.0:
        raise ConfigError("eps must lie in (0, 1)")
    if sigma not in (0, 1):
        raise ConfigError("sigma selects one of the two coupling branches")
    values = {}
    for q in q_grid:
        q = tuple(float(x) for x in np.atleast_1d(q))
        sup = _maximize_sup_weight(q, E, eta, eps, sigma, seed)
        weight = 1.0
        for qj in q:
            weight *= (1.0 + qj**2) ** ((1.0 - eps) / 2.0)
        values[q] = sup * weight / (1.0 + eta**-2)
    vmax = max(values.values())
    vmin = min(values.values())
    return BoundReport(
        name="sup_weight_grid",
        lhs=vmax / vmin,
        rhs=ratio_limit,
        context={"E": E, "eps": eps, "eta": eta, "sigma": sigma,
                 "normalized": {str(k): v for k, v in values.items()}},
        notes="heuristic multi-start search; verifies scaling shape only",
    )


def sup_weight_decoupled(q, E, eta, eps, seed=0) -> float:
    """sigma = 0 structure: the joint sup as a product of two one-momentum
    sups (used to cross-check the search)."""
    q = tuple(float(x) for x in np.atleast_1d(q))
    d = len(q)

    def neg(v):
        g = 0.0
        for j in range(d):
            g += (-1.0 + eps) * 0.5 * math.log1p(v[j] ** 2)
        nu1 = 0.5 * sum((q[j] + v[j]) ** 2 for j in range(d))
        g -= 0.5 * math.log((nu1 - E) ** 2 + eta**2)
        return -g

    r = math.sqrt(2.0 * E)
    best = -math.inf
    starts = [np.array([-q[j] + (s if j == 0 else 0.0) for j in range(d)])
              for s in (0.0, r, -r)]
    starts.append(np.zeros(d))
    rng = np.random.Generator(np.random.Philox(key=[seed, 1]))
    for _ in range(6):
        starts.append(rng.normal(scale=1.0 + max(abs(x) for x in q), size=d))
    for x0 in starts:
        res = optimize.minimize(neg, x0, method="Nelder-Mead",
                                options={"xatol": 1e-8, "fatol": 1e-12,
                                         "maxiter": 2000})
        best = max(best, -res.fun)
    one = math.exp(best)
    return one * one
