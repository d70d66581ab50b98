"""Independent verification engines for the tail formulas.

The workhorse is the radially conditioned estimator: with the simplex part
Z = sum_i lambda_i U_i^p sampled and the radius integrated out exactly,

    P(S_p > t) = E[ F_bar((t_norm / Z)^{1/p}) ],

every sample contributes its exact log-scale survival value, so tail
probabilities down to ~1e-60 are estimable with ordinary sample sizes; all
of the rarity lives in F_bar, none in the indicator.  A crude frequency
estimator and (for d <= 3) deterministic quadrature oracles cross-check it.

Reproducibility contract: samples are partitioned into fixed-size chunks,
chunk k draws from a substream seeded by (seed, k), and results reduce over
chunks in index order.  The worker count changes scheduling only, never
the result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .aggtail import AggregateSpec, lambda_tilde, tail_asymptotic
from .errors import DomainError, ValidationError
from .producttail import saddle_geometry
from .radial import RadialModel
from .specfun import log1mexp, log_gamma, logsumexp

__all__ = [
    "CHUNK",
    "Estimate",
    "NormingConstants",
    "sample_dirichlet",
    "conditional_mc_tail",
    "crude_mc_tail",
    "quadrature_tail",
    "max_sum_ratio",
    "pairwise_asymindep",
    "norming_constants",
    "empirical_gumbel_mda",
    "gumbel_limit_check",
]

#: fixed chunk size of the deterministic sample partition
CHUNK = 1 << 16


@dataclass(frozen=True)
class Estimate:
    """A tail-probability estimate with its uncertainty.

    stderr is 0 exactly for the deterministic quadrature method (and for
    degenerate one-dimensional conditional estimates whose sample variance
    vanishes identically).
    """

    p_hat: float
    log_p_hat: float
    stderr: float
    n: int
    seed: int
    method: str

    def to_json(self) -> dict:
        return {"method": self.method, "seed": self.seed, "n": self.n,
                "p_hat": self.p_hat, "log_p_hat": self.log_p_hat, "stderr": self.stderr}


def _check_seed(seed) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool) or seed < 0:
        raise ValidationError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed)


def _chunk_sizes(n: int) -> list[int]:
    if not n >= 1:
        raise ValidationError(f"sample count must be >= 1, got {n}")
    full, rest = divmod(int(n), CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def _chunk_rng(seed: int, idx: int) -> np.random.Generator:
    return np.random.default_rng([seed, idx])


def _map_chunks(fn, n_chunks: int, workers: int):
    """Evaluate fn(idx) for idx in range(n_chunks), reducing in index order."""
    if workers <= 1 or n_chunks == 1:
        return [fn(i) for i in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_chunks)))


def _simplex_chunk(rng: np.random.Generator, alpha: np.ndarray, size: int) -> np.ndarray:
    """One chunk of simplex variables U (rows sum to 1)."""
    y = rng.standard_gamma(alpha, size=(size, alpha.size))
    return y / y.sum(axis=1, keepdims=True)


def _z_sup(lam: np.ndarray, p: float) -> float:
    """Supremum of sum lam_i b_i^p over the simplex."""
    if p >= 1.0:
        return float(np.max(lam))
    positive = lam[lam > 0]
    return lambda_tilde(positive, p)


# ----------------------------------------------------------------------
# sampling
# ----------------------------------------------------------------------

def sample_dirichlet(spec: AggregateSpec, n: int, seed: int, return_radius: bool = False):
    """i.i.d. draws of the Dirichlet vector (R*U_1, ..., R*U_d).

    The radius is sampled by quantile inversion of a single uniform per
    draw, so each sample consumes a fixed slice of its chunk substream.
    """
    seed = _check_seed(seed)
    sizes = _chunk_sizes(n)
    alpha = np.asarray(spec.alpha)
    rows, radii = [], []
    for idx, size in enumerate(sizes):
        rng = _chunk_rng(seed, idx)
        u = _simplex_chunk(rng, alpha, size)
        v = np.clip(rng.random(size), 1e-16, 1.0 - 1e-16)
        r = spec.radial.quantile(v)
        rows.append(u * r[:, None])
        radii.append(r)
    x = np.vstack(rows)
    if return_radius:
        return x, np.concatenate(radii)
    return x


# ----------------------------------------------------------------------
# estimators
# ----------------------------------------------------------------------

def _estimate_from_log_moments(ls1: float, ls2: float, n: int, seed: int, method: str) -> Estimate:
    log_mean = ls1 - math.log(n)
    if log_mean == -math.inf:
        return Estimate(p_hat=0.0, log_p_hat=-math.inf, stderr=0.0, n=n, seed=seed, method=method)
    log_m2 = ls2 - math.log(n)
    gap = min(2.0 * log_mean - log_m2, 0.0)
    log_var = log_m2 + log1mexp(gap)
    log_se = 0.5 * (log_var - math.log(n)) if log_var > -math.inf else -math.inf
    return Estimate(p_hat=math.exp(log_mean), log_p_hat=log_mean,
                    stderr=math.exp(log_se) if log_se > -math.inf else 0.0,
                    n=n, seed=seed, method=method)


def conditional_mc_tail(spec: AggregateSpec, t: float, n: int, seed: int,
                        workers: int = 1) -> Estimate:
    """Radially conditioned estimator of P(S_p > t) (t on the raw scale).

    Unbiased: averages the exact radial survival F_bar((t_norm/Z)^{1/p})
    over simplex draws, with the average taken by log-sum-exp because the
    per-sample values can span sixty orders of magnitude.
    """
    seed = _check_seed(seed)
    if not t > 0:
        raise DomainError(f"threshold must be positive, got {t}")
    tn = t / spec.scale
    alpha = np.asarray(spec.alpha)
    lam = np.asarray(spec.lam)
    x_f = spec.radial.upper_endpoint
    if math.isfinite(x_f) and tn >= _z_sup(lam, spec.p) * x_f ** spec.p:
        return Estimate(p_hat=0.0, log_p_hat=-math.inf, stderr=0.0, n=int(n),
                        seed=seed, method="conditional")
    sizes = _chunk_sizes(n)
    inv_p = 1.0 / spec.p

    def one_chunk(idx: int):
        rng = _chunk_rng(seed, idx)
        u = _simplex_chunk(rng, alpha, sizes[idx])
        z = (lam * u ** spec.p).sum(axis=1)
        logs = spec.radial.log_survival(np.minimum((tn / z) ** inv_p, 1e300))
        return logsumexp(logs), logsumexp(2.0 * logs)

    parts = _map_chunks(one_chunk, len(sizes), workers)
    ls1 = logsumexp([p[0] for p in parts])
    ls2 = logsumexp([p[1] for p in parts])
    return _estimate_from_log_moments(ls1, ls2, int(n), seed, "conditional")


def crude_mc_tail(spec: AggregateSpec, t: float, n: int, seed: int,
                  workers: int = 1) -> Estimate:
    """Plain frequency estimator of P(S_p > t) with binomial standard error."""
    seed = _check_seed(seed)
    if not t > 0:
        raise DomainError(f"threshold must be positive, got {t}")
    tn = t / spec.scale
    alpha = np.asarray(spec.alpha)
    lam = np.asarray(spec.lam)
    sizes = _chunk_sizes(n)

    def one_chunk(idx: int):
        rng = _chunk_rng(seed, idx)
        u = _simplex_chunk(rng, alpha, sizes[idx])
        v = np.clip(rng.random(sizes[idx]), 1e-16, 1.0 - 1e-16)
        r = spec.radial.quantile(v)
        z = (lam * u ** spec.p).sum(axis=1)
        return int(np.count_nonzero(r ** spec.p * z > tn))

    hits = sum(_map_chunks(one_chunk, len(sizes), workers))
    n = int(n)
    p_hat = hits / n
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / n)
    return Estimate(p_hat=p_hat, log_p_hat=math.log(p_hat) if p_hat > 0 else -math.inf,
                    stderr=stderr, n=n, seed=seed, method="crude")


# ----------------------------------------------------------------------
# quadrature oracles (d <= 3)
# ----------------------------------------------------------------------

def _log_beta_pdf_arr(a: float, b: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return ((a - 1.0) * np.log(x) + (b - 1.0) * np.log1p(-x)
                + log_gamma(a + b) - log_gamma(a) - log_gamma(b))


def quadrature_tail(spec: AggregateSpec, t: float) -> Estimate:
    """Deterministic oracle for P(S_p > t), d <= 3.

    d = 2 integrates the conditional radial survival against the Beta
    mixing density; d = 3 nests two such integrals over the splitting
    rectangle.  The integrand is normalized by its supremum and integrated
    in linear scale, so the result is exact in log scale at any depth.
    """
    if not t > 0:
        raise DomainError(f"threshold must be positive, got {t}")
    if spec.d > 3:
        raise DomainError(f"quadrature oracle supports d <= 3, got d={spec.d}")
    tn = t / spec.scale
    p = spec.p
    inv_p = 1.0 / p
    radial = spec.radial
    x_f = radial.upper_endpoint

    if spec.d == 1:
        log_val = radial.log_survival(min(tn ** inv_p, 1e300))
        return Estimate(p_hat=math.exp(log_val), log_p_hat=log_val, stderr=0.0,
                        n=1, seed=0, method="quadrature")

    lam = np.asarray(spec.lam)
    z_sup = _z_sup(lam, p)
    u_min = (tn / z_sup) ** inv_p
    if u_min >= x_f:
        return Estimate(p_hat=0.0, log_p_hat=-math.inf, stderr=0.0, n=0,
                        seed=0, method="quadrature")
    log_top = radial.log_survival(u_min)

    a = spec.alpha
    neval = 0

    # for p >= 1 the integrand concentrates in O(1/u_min) layers at the simplex
    # corners; hint the adaptive rule at them
    edge = min(0.4, 1.0 / max(u_min, 2.5))

    if spec.d == 2:
        def integrand(b):
            z = lam[0] * b ** p + lam[1] * (1.0 - b) ** p
            u = min((tn / z) ** inv_p, 1e300)
            return math.exp(_log_beta_pdf_arr(a[0], a[1], b) + radial.log_survival(u) - log_top)

        points = ([saddle_geometry(lam[0], lam[1], p).theta] if 0 < p < 1
                  else [edge, 1.0 - edge])
        val, _err, info = integrate.quad(integrand, 0.0, 1.0, points=points,
                                         limit=300, epsabs=1e-14, epsrel=1e-10,
                                         full_output=True)[:3]
        neval = int(info["neval"])
        log_val = log_top + math.log(val)
        return Estimate(p_hat=math.exp(log_val), log_p_hat=log_val, stderr=0.0,
                        n=neval, seed=0, method="quadrature")

    # d == 3: split off the last index; B3 ~ Beta(a1+a2, a3), inner B2 ~ Beta(a1, a2)
    if 0 < p < 1:
        inner_points = [saddle_geometry(lam[0], lam[1], p).theta]
        lt2 = lambda_tilde(lam[:2], p)
        outer_points = [saddle_geometry(lt2, lam[2], p).theta]
    else:
        inner_points = [edge, 1.0 - edge]
        outer_points = [edge, 1.0 - edge]

    def outer(b3):
        head = b3 ** p
        tail = lam[2] * (1.0 - b3) ** p

        def inner(b2):
            z = head * (lam[0] * b2 ** p + lam[1] * (1.0 - b2) ** p) + tail
            u = min((tn / z) ** inv_p, 1e300)
            return math.exp(_log_beta_pdf_arr(a[0], a[1], b2) + radial.log_survival(u) - log_top)

        val, _ = integrate.quad(inner, 0.0, 1.0, points=inner_points,
                                limit=200, epsabs=1e-14, epsrel=1e-9)
        return val * math.exp(_log_beta_pdf_arr(a[0] + a[1], a[2], b3))

    val, _err, info = integrate.quad(outer, 0.0, 1.0, points=outer_points,
                                     limit=200, epsabs=1e-14, epsrel=1e-8,
                                     full_output=True)[:3]
    neval = int(info["neval"])
    log_val = log_top + math.log(val) if val > 0 else -math.inf
    return Estimate(p_hat=math.exp(log_val), log_p_hat=log_val, stderr=0.0,
                    n=neval, seed=0, method="quadrature")


# ----------------------------------------------------------------------
# diagnostics built on the conditional estimator
# ----------------------------------------------------------------------

def max_sum_ratio(spec: AggregateSpec, t_grid, n: int, seed: int) -> np.ndarray:
    """P(max_i lambda_i X_i^p > t) / P(S_p > t) on a threshold grid.

    Both tails use the conditional estimator with shared simplex draws, so
    the ratio is a smooth function of the noise and always <= 1.  Columns:
    (t, log numerator, log denominator, ratio).
    """
    seed = _check_seed(seed)
    t_grid = [float(t) for t in t_grid]
    if any(t <= 0 for t in t_grid):
        raise DomainError("thresholds must be positive")
    alpha = np.asarray(spec.alpha)
    lam = np.asarray(spec.lam)
    sizes = _chunk_sizes(n)
    inv_p = 1.0 / spec.p

    num_parts = [[] for _ in t_grid]
    den_parts = [[] for _ in t_grid]
    for idx, size in enumerate(sizes):
        rng = _chunk_rng(seed, idx)
        u = _simplex_chunk(rng, alpha, size)
        terms = lam * u ** spec.p
        z = terms.sum(axis=1)
        zmax = terms.max(axis=1)
        for k, t in enumerate(t_grid):
            tn = t / spec.scale
            num_parts[k].append(logsumexp(spec.radial.log_survival(
                np.minimum((tn / zmax) ** inv_p, 1e300))))
            den_parts[k].append(logsumexp(spec.radial.log_survival(
                np.minimum((tn / z) ** inv_p, 1e300))))

    rows = []
    for k, t in enumerate(t_grid):
        log_num = logsumexp(num_parts[k]) - math.log(n)
        log_den = logsumexp(den_parts[k]) - math.log(n)
        rows.append((t, log_num, log_den, math.exp(log_num - log_den)))
    return np.asarray(rows)


@dataclass(frozen=True)
class NormingConstants:
    a_n: float
    b_n: float


def norming_constants(spec: AggregateSpec, n: int) -> NormingConstants:
    """Location b_n and scale a_n normalizing the maximum of n i.i.d. copies
    of S_p toward the Gumbel limit: b_n solves the tail asymptotic at 1/n,
    a_n = 1/w_p(b_n)."""
    if not n >= 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if spec.radial.mda_class != "gumbel":
        raise DomainError("norming constants need a Gumbel-class radial law")
    asym = tail_asymptotic(spec)
    b_n = asym.invert(-math.log(n))
    a_n = spec.scale / spec.radial.power_scaling_wp(spec.p, b_n / spec.scale)
    return NormingConstants(a_n=a_n, b_n=b_n)


def _column_conditional_logs(radial: RadialModel, z: np.ndarray, level: float,
                             p: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        arg = np.where(z > 0, (level / np.where(z > 0, z, 1.0)) ** (1.0 / p), np.inf)
    return radial.log_survival(np.minimum(arg, 1e300))


def pairwise_asymindep(alpha, weights, p: float, radial: RadialModel, i: int, j: int,
                       n_grid, n: int, seed: int) -> np.ndarray:
    """Empirical conditional exceedance P(Y_i > b, Y_j > b) / P(Y_i > b).

    Y_k = sum_r weights[r, k] * X_r^p are linear transforms of the powered
    Dirichlet components.  Levels b are the asymptotic 1 - 1/n quantiles of
    Y_i for n in n_grid; the ratio trending to 0 is the empirical face of
    the joint max-stable limit with independent Gumbel margins.  Columns:
    (n_level, b, ratio).
    """
    seed = _check_seed(seed)
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2:
        raise ValidationError("weights must be a matrix (rows: components, cols: variables)")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValidationError("weights must be non-negative and finite")
    d, n_cols = w.shape
    if len(alpha) != d:
        raise ValidationError("weight matrix rows must match len(alpha)")
    if i == j or not (0 <= i < n_cols and 0 <= j < n_cols):
        raise ValidationError(f"need two distinct column indices in range, got ({i}, {j})")
    if p >= 1.0:
        unit_sets = [set(np.nonzero(w[:, c] == 1.0)[0]) for c in range(n_cols)]
        for c, s in enumerate(unit_sets):
            if not s:
                raise ValidationError(f"column {c} has no unit weight (required for p >= 1)")
        for c1 in range(n_cols):
            for c2 in range(c1 + 1, n_cols):
                if unit_sets[c1] & unit_sets[c2]:
                    raise ValidationError(
                        f"columns {c1} and {c2} share a unit-weight component (p >= 1)")
    else:
        q = 1.0 / (1.0 - p)
        norms = (w ** q).sum(axis=0)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValidationError(
                f"for p < 1 every column must have unit 1/(1-p)-norm, got norms {norms}")
        for c1 in range(n_cols):
            for c2 in range(c1 + 1, n_cols):
                if np.all(w[:, c1] == w[:, c2]):
                    raise ValidationError(f"columns {c1} and {c2} are identical")

    spec_i = _column_spec(alpha, w[:, i], p, radial)
    asym_i = tail_asymptotic(spec_i)
    levels = [(int(nl), asym_i.invert(-math.log(nl))) for nl in n_grid]

    alpha_arr = np.asarray([float(a) for a in alpha])
    sizes = _chunk_sizes(n)
    single_parts = [[] for _ in levels]
    joint_parts = [[] for _ in levels]
    for idx, size in enumerate(sizes):
        rng = _chunk_rng(seed, idx)
        u = _simplex_chunk(rng, alpha_arr, size)
        up = u ** p
        z_i = up @ w[:, i]
        z_j = up @ w[:, j]
        z_min = np.minimum(z_i, z_j)
        for k, (_nl, b) in enumerate(levels):
            single_parts[k].append(logsumexp(_column_conditional_logs(radial, z_i, b, p)))
            joint_parts[k].append(logsumexp(_column_conditional_logs(radial, z_min, b, p)))

    rows = []
    for k, (nl, b) in enumerate(levels):
        log_single = logsumexp(single_parts[k]) - math.log(n)
        log_joint = logsumexp(joint_parts[k]) - math.log(n)
        rows.append((nl, b, math.exp(log_joint - log_single)))
    return np.asarray(rows)


def _column_spec(alpha, column, p, radial) -> AggregateSpec:
    # the zero-weight components must stay: their alphas still shape the
    # simplex law of the remaining coordinates
    from .aggtail import validate_spec
    if not np.any(np.asarray(column) > 0):
        raise ValidationError("a weight column is identically zero")
    return validate_spec(list(alpha), [float(c) for c in column], p, radial)


def empirical_gumbel_mda(spec: AggregateSpec, x_grid, depth_grid, n: int,
                         seed: int) -> np.ndarray:
    """Estimates F_bar_S(v + x/w_p(v)) / F_bar_S(v) at asymptotic depths v.

    Convergence of the ratios to exp(-x) is the empirical face of the
    aggregate inheriting the Gumbel max-domain with scaling w_p.  Columns:
    (depth, v, x, ratio, exp(-x)).
    """
    seed = _check_seed(seed)
    if spec.radial.mda_class != "gumbel":
        raise DomainError("the Gumbel diagnostic needs a Gumbel-class radial law")
    asym = tail_asymptotic(spec)
    alpha = np.asarray(spec.alpha)
    lam = np.asarray(spec.lam)
    sizes = _chunk_sizes(n)
    inv_p = 1.0 / spec.p

    jobs = []
    for depth in depth_grid:
        v = asym.invert(math.log(depth))
        w_raw = spec.radial.power_scaling_wp(spec.p, v / spec.scale) / spec.scale
        thresholds = [v] + [v + float(x) / w_raw for x in x_grid]
        jobs.append((depth, v, thresholds))

    all_parts = {(jk, tk): [] for jk, job in enumerate(jobs) for tk in range(len(job[2]))}
    for idx, size in enumerate(sizes):
        rng = _chunk_rng(seed, idx)
        u = _simplex_chunk(rng, alpha, size)
        z = (lam * u ** spec.p).sum(axis=1)
        for jk, (_depth, _v, thresholds) in enumerate(jobs):
            for tk, t in enumerate(thresholds):
                tn = t / spec.scale
                all_parts[(jk, tk)].append(logsumexp(spec.radial.log_survival(
                    np.minimum((tn / z) ** inv_p, 1e300))))

    rows = []
    for jk, (depth, v, thresholds) in enumerate(jobs):
        log_base = logsumexp(all_parts[(jk, 0)])
        for tk, x in enumerate(x_grid):
            log_shift = logsumexp(all_parts[(jk, tk + 1)])
            rows.append((depth, v, float(x), math.exp(log_shift - log_base),
                         math.exp(-float(x))))
    return np.asarray(rows)


def gumbel_limit_check(spec: AggregateSpec, n: int, replicates: int, x_grid,
                       seed: int) -> np.ndarray:
    """Empirical P(max of n i.i.d. S_p <= a_n x + b_n) against exp(-exp(-x)).

    Block maxima are simulated directly (replicates blocks of n draws);
    the norming constants come from the tail asymptotic.  Columns:
    (x, empirical, limit).
    """
    seed = _check_seed(seed)
    consts = norming_constants(spec, n)
    alpha = np.asarray(spec.alpha)
    lam = np.asarray(spec.lam)
    x_arr = np.asarray([float(x) for x in x_grid])
    cut = consts.b_n + consts.a_n * x_arr

    reps_per_chunk = max(1, CHUNK // max(1, n))
    counts = np.zeros(x_arr.size, dtype=np.int64)
    done = 0
    idx = 0
    while done < replicates:
        reps = min(reps_per_chunk, replicates - done)
        rng = _chunk_rng(seed, idx)
        u = _simplex_chunk(rng, alpha, reps * n)
        v = np.clip(rng.random(reps * n), 1e-16, 1.0 - 1e-16)
        r = spec.radial.quantile(v)
        s = spec.scale * r ** spec.p * (lam * u ** spec.p).sum(axis=1)
        block_max = s.reshape(reps, n).max(axis=1)
        counts += (block_max[:, None] <= cut[None, :]).sum(axis=0)
        done += reps
        idx += 1

    emp = counts / float(replicates)
    return np.asarray([(x, e, math.exp(-math.exp(-x))) for x, e in zip(x_arr, emp)])
