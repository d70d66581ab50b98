"""Tail asymptotics of the aggregated risk S_p = sum_i lambda_i * X_i^p.

X = (R*U_1, ..., R*U_d) is a Dirichlet vector with parameter alpha and
radius R.  After normalizing the weights so that the largest equals one,
the first-order tail of S_p splits into regimes by the power p:

  p > 1   heavy single-component regime: only the unit-weight block with
          the largest alpha matters; P(S_p > u^p) ~ K (u w(u))^rho F_bar(u).
  p = 1   every component with weight below one contributes a polynomial
          thinning factor; same shape with u = t.
  p < 1   the simplex aggregate Z = sum lambda_i U_i^p concentrates at an
          interior point of the simplex; a Laplace-method recursion builds
          the constant and P(S_p > lt * u^p) ~ K (u w(u))^{-(d-1)/2} F_bar(u)
          with lt the attained maximum of sum lambda_i beta_i^p.

For a radius with finite endpoint 1 and regularly varying survival there
(index gamma), the p = 1 analogue near t = 1 is
P(S_1 > 1-u) ~ K u^{sum of left-out alphas} F_bar(1-u).

Every returned TailAsymptotic carries its threshold convention explicitly;
mixing the u^p / lt*u^p / raw-t conventions is the main foreseeable bug.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError, ValidationError, WrongRegimeError
from .producttail import mixture_tail_constant_c, mixture_tail_constant_d, saddle_geometry
from .radial import RadialModel
from .specfun import LogProb, log_gamma

__all__ = [
    "AggregateSpec",
    "SimplexTailGeometry",
    "TailAsymptotic",
    "VarEs",
    "RegimeInfo",
    "validate_spec",
    "lambda_tilde",
    "simplex_tail_geometry",
    "simplex_constant_recursion",
    "tail_gumbel_pgt1",
    "tail_gumbel_peq1",
    "tail_gumbel_plt1",
    "tail_weibull",
    "marginal_component_tail",
    "tail_asymptotic",
    "var_es_asymptotic",
    "regime_classify",
]


# ----------------------------------------------------------------------
# problem instance
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class AggregateSpec:
    """A validated aggregation problem.

    Weights are stored jointly sorted by descending weight and normalized
    so lam[0] == 1; `scale` is the largest raw weight, so a raw threshold t
    corresponds to the normalized threshold t / scale.
    """

    alpha: tuple[float, ...]
    lam: tuple[float, ...]
    p: float
    radial: RadialModel
    scale: float
    m: int            # multiplicity of the unit weight
    alpha_hat: float  # max alpha over the unit-weight block
    m_star: int       # how many alphas in the unit-weight block attain alpha_hat

    @property
    def d(self) -> int:
        return len(self.alpha)

    @property
    def alpha_bar(self) -> float:
        return float(sum(self.alpha))

    @property
    def alpha_bar_m(self) -> float:
        return float(sum(self.alpha[: self.m]))

    def to_json(self) -> dict:
        return {
            "alpha": list(self.alpha),
            "lambda": list(self.lam),
            "p": self.p,
            "scale": self.scale,
            "radial": self.radial.to_json(),
        }


def validate_spec(raw_alpha, raw_lambda, p: float, radial: RadialModel,
                  weight_tol: float = 0.0) -> AggregateSpec:
    """Sort, normalize and sanity-check a problem instance.

    weight_tol is an opt-in absolute tolerance for detecting the unit-weight
    multiplicity; the default 0.0 uses exact equality because the constants
    jump discontinuously with the multiplicity.
    """
    alpha = [float(a) for a in raw_alpha]
    lam = [float(l) for l in raw_lambda]
    if len(alpha) == 0:
        raise ValidationError("alpha must be non-empty")
    if len(alpha) != len(lam):
        raise ValidationError(
            f"alpha and lambda must have equal length, got {len(alpha)} and {len(lam)}")
    if any(not a > 0 or not math.isfinite(a) for a in alpha):
        raise ValidationError(f"all alpha must be positive and finite, got {alpha}")
    if any(l < 0 or not math.isfinite(l) for l in lam):
        raise ValidationError(f"all weights must be non-negative and finite, got {lam}")
    if not any(l > 0 for l in lam):
        raise ValidationError("at least one weight must be positive")
    if not (isinstance(radial, RadialModel)):
        raise ValidationError(f"radial must be a RadialModel, got {type(radial).__name__}")
    if not (math.isfinite(p) and p > 0):
        raise ValidationError(f"p must be positive and finite, got {p}")
    if weight_tol < 0:
        raise ValidationError(f"weight_tol must be non-negative, got {weight_tol}")

    order = sorted(range(len(lam)), key=lambda i: -lam[i])
    scale = lam[order[0]]
    lam_sorted = tuple(lam[i] / scale for i in order)
    alpha_sorted = tuple(alpha[i] for i in order)

    cut = 1.0 - weight_tol
    m = sum(1 for l in lam_sorted if l >= cut)
    top = alpha_sorted[:m]
    alpha_hat = max(top)
    m_star = sum(1 for a in top if a == alpha_hat)
    return AggregateSpec(alpha=alpha_sorted, lam=lam_sorted, p=float(p), radial=radial,
                         scale=scale, m=m, alpha_hat=alpha_hat, m_star=m_star)


def lambda_tilde(lam, p: float) -> float:
    """(sum_i lam_i^{1/(1-p)})^{1-p}: the attained maximum of sum lam_i b_i^p
    over the unit simplex, and the upper endpoint of the normalized aggregate."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise DomainError(f"lambda_tilde needs strictly positive weights, got {lam}")
    if not 0 < p < 1:
        raise DomainError(f"lambda_tilde needs p in (0, 1), got {p}")
    q = 1.0 / (1.0 - p)
    # stable for widely spread weights: factor out the largest
    lmax = float(np.max(lam))
    return lmax * float(np.sum((lam / lmax) ** q)) ** (1.0 - p)


# ----------------------------------------------------------------------
# the asymptotic object
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TailAsymptotic:
    """K * (u w(u))^rho * F_bar(u) against an explicit threshold convention.

    base "gumbel": evaluate(t) = K * (u w(u))^rho * F_bar(u) with
                   u = ((t/scale)/pivot)^(1/p);
    base "weibull": evaluate(t) = K * u^rho * F_bar(1-u) with u = 1 - t/scale.

    `exact` marks degenerate identities (d = 1, or p = 1 with all weights
    equal) where the "asymptotic" is the exact distribution function.
    """

    log_constant: float
    rho: float
    base: str
    radial: RadialModel
    p: float
    scale: float = 1.0
    pivot: float = 1.0
    convention: str = "u = t**(1/p)"
    exact: bool = False

    def threshold_to_base(self, t: float) -> float:
        """Map a raw threshold on S_p to the base variable u."""
        tn = t / self.scale
        if self.base == "gumbel":
            if not tn > 0:
                raise DomainError(f"threshold must be positive, got {t}")
            return (tn / self.pivot) ** (1.0 / self.p)
        if not 0 < tn < 1:
            raise DomainError(
                f"threshold must lie in (0, scale) for an endpoint-1 aggregate, got {t}")
        return 1.0 - tn

    def base_to_threshold(self, u: float) -> float:
        if self.base == "gumbel":
            return self.scale * self.pivot * u ** self.p
        return self.scale * (1.0 - u)

    def _log_at_base(self, u: float) -> float:
        if self.base == "gumbel":
            if u >= self.radial.upper_endpoint:
                return -math.inf
            w = self.radial.scaling_w(u)
            return self.log_constant + self.rho * math.log(u * w) + self.radial.log_survival(u)
        return self.log_constant + self.rho * math.log(u) + self.radial.log_survival(1.0 - u)

    def evaluate_log(self, t: float) -> float:
        """log of the asymptotic tail value at raw threshold t."""
        return self._log_at_base(self.threshold_to_base(t))

    def evaluate(self, t: float) -> LogProb:
        return LogProb(self.evaluate_log(t))

    def invert(self, log_target: float) -> float:
        """Raw threshold t with evaluate_log(t) == log_target (monotone bisection)."""
        if not log_target < 0:
            raise DomainError(f"target must be a log-probability below 0, got {log_target}")
        if self.base == "gumbel":
            x_f = self.radial.upper_endpoint
            lo, hi = 1e-12, min(1.0, x_f / 2 if math.isfinite(x_f) else 1.0)
            while self._log_at_base(hi) > log_target:
                if math.isfinite(x_f):
                    hi = 0.5 * (hi + x_f)
                    if x_f - hi < 1e-15:
                        break
                else:
                    hi *= 2.0
                    if hi > 1e290:
                        raise NumericError("tail inversion ran past 1e290")
            while self._log_at_base(lo) < log_target:
                lo /= 2.0
                if lo < 1e-300:
                    raise DomainError("target is not reachable by this asymptotic")
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if self._log_at_base(mid) > log_target:
                    lo = mid
                else:
                    hi = mid
            return self.base_to_threshold(0.5 * (lo + hi))
        # weibull base: _log_at_base is increasing in u on (0, 1)
        lo, hi = 1e-300, 1.0 - 1e-15
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self._log_at_base(mid) < log_target:
                lo = mid
            else:
                hi = mid
        return self.base_to_threshold(0.5 * (lo + hi))

    def to_json(self) -> dict:
        return {"K_log": self.log_constant, "rho": self.rho, "base": self.base,
                "convention": self.convention}


def _identity_asymptotic(spec: AggregateSpec, base: str) -> TailAsymptotic:
    if base == "gumbel":
        conv = "u = (t/scale)**(1/p)"
    else:
        conv = "u = 1 - t/scale"
    return TailAsymptotic(log_constant=0.0, rho=0.0, base=base, radial=spec.radial,
                          p=spec.p, scale=spec.scale, pivot=1.0, convention=conv, exact=True)


# ----------------------------------------------------------------------
# simplex geometry recursion (p in (0,1))
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SimplexTailGeometry:
    """Per-level output of the Laplace recursion for Z = sum lam_i V_i^p.

    Index k runs over 2..d (levels of the telescoping split); level k holds
    the endpoint lambda_tilde_k of the k-term prefix aggregate, the saddle
    theta_k of the two-term mixture that produced it, the curvature |h''|
    there, and the accumulated constant C_k with

        P(prefix_k > lambda_tilde_k - u) ~ C_k * u^{(k-1)/2}.
    """

    p: float
    lambda_tilde: tuple[float, ...]   # levels 1..d
    theta: tuple[float, ...]          # levels 2..d
    curvature: tuple[float, ...]      # levels 2..d
    c_tilde: tuple[float, ...]        # levels 2..d
    rv_index: tuple[float, ...]       # levels 2..d: (k-1)/2

    @property
    def d(self) -> int:
        return len(self.lambda_tilde)

    @property
    def lambda_tilde_final(self) -> float:
        return self.lambda_tilde[-1]

    @property
    def c_tilde_final(self) -> float:
        return self.c_tilde[-1]


def _log_beta_pdf(a: float, b: float, x: float, one_minus_x: float) -> float:
    return ((a - 1.0) * math.log(x) + (b - 1.0) * math.log(one_minus_x)
            + log_gamma(a + b) - log_gamma(a) - log_gamma(b))


def simplex_tail_geometry(alpha, lam, p: float) -> SimplexTailGeometry:
    """Laplace recursion for the simplex aggregate, in the given index order.

    Processes the terms exactly in the order supplied (no sorting): the
    level-k step splits off index k against the (k-1)-term prefix.  The
    resulting constant is an intrinsic property of the law of the aggregate,
    so any joint permutation of (alpha_i, lam_i) pairs must reproduce it;
    the property tests rely on that.
    """
    alpha = [float(a) for a in alpha]
    lam = [float(l) for l in lam]
    d = len(alpha)
    if d < 2:
        raise DomainError(f"the simplex recursion needs d >= 2, got d={d}")
    if len(lam) != d:
        raise DomainError("alpha and lambda must have equal length")
    if not 0 < p < 1:
        raise DomainError(f"the simplex recursion needs p in (0, 1), got p={p}")
    if any(not a > 0 for a in alpha):
        raise DomainError(f"all alpha must be positive, got {alpha}")
    if any(not l > 0 for l in lam):
        raise DomainError(f"all weights must be strictly positive, got {lam}")

    lts = [lam[0]]
    thetas, curvs, cts, rvs = [], [], [], []
    alpha_prefix = alpha[0]
    c_tilde = math.nan
    for k in range(1, d):
        geom = saddle_geometry(lts[-1], lam[k], p)
        # split variable of the k+1 term prefix: B ~ Beta(sum_{i<=k} alpha, alpha_k)
        g_theta = math.exp(_log_beta_pdf(alpha_prefix, alpha[k], geom.theta,
                                         geom.theta_complement))
        if k == 1:
            c_tilde = mixture_tail_constant_c(g_theta, geom)
        else:
            gamma = (k - 1) / 2.0  # regular-variation index of the k-term prefix at its endpoint
            c_tilde = c_tilde * mixture_tail_constant_d(g_theta, geom, gamma)
        lt_closed = lambda_tilde(lam[: k + 1], p)
        if abs(geom.theta_tilde - lt_closed) > 1e-10 * max(1.0, lt_closed):
            raise NumericError(
                f"saddle endpoint {geom.theta_tilde} disagrees with closed form {lt_closed}")
        lts.append(lt_closed)
        thetas.append(geom.theta)
        curvs.append(geom.curvature)
        cts.append(c_tilde)
        rvs.append(k / 2.0)
        alpha_prefix += alpha[k]

    return SimplexTailGeometry(p=p, lambda_tilde=tuple(lts), theta=tuple(thetas),
                               curvature=tuple(curvs), c_tilde=tuple(cts),
                               rv_index=tuple(rvs))


def simplex_constant_recursion(spec: AggregateSpec) -> SimplexTailGeometry:
    """The recursion applied to a validated spec (descending-weight order)."""
    if not 0 < spec.p < 1:
        raise WrongRegimeError(f"the simplex recursion applies for p in (0, 1), got p={spec.p}")
    if any(l <= 0 for l in spec.lam):
        raise DomainError("the simplex recursion needs all weights strictly positive")
    if spec.d < 2:
        raise DomainError("the simplex recursion needs d >= 2")
    return simplex_tail_geometry(spec.alpha, spec.lam, spec.p)


# ----------------------------------------------------------------------
# the regime asymptotics
# ----------------------------------------------------------------------

def _require_gumbel(spec: AggregateSpec, what: str) -> None:
    if spec.radial.mda_class != "gumbel":
        raise WrongRegimeError(f"{what} needs a Gumbel-class radial law")


def tail_gumbel_pgt1(spec: AggregateSpec) -> TailAsymptotic:
    """Powers above one: P(S_p > scale * u^p) ~ m* Gamma(abar)/Gamma(ahat)
    * (u w(u))^{ahat - abar} * F_bar(u).

    Only the unit-weight block matters, and within it only the components
    with the largest alpha; smaller weights vanish from the constant.
    """
    if spec.d > 1 and not spec.p > 1:
        raise WrongRegimeError(f"this regime needs p > 1, got p={spec.p}")
    _require_gumbel(spec, "the p > 1 asymptotic")
    if spec.d == 1:
        return _identity_asymptotic(spec, "gumbel")
    abar = spec.alpha_bar
    log_k = math.log(spec.m_star) + log_gamma(abar) - log_gamma(spec.alpha_hat)
    return TailAsymptotic(log_constant=log_k, rho=spec.alpha_hat - abar, base="gumbel",
                          radial=spec.radial, p=spec.p, scale=spec.scale, pivot=1.0,
                          convention="u = (t/scale)**(1/p)")


def tail_gumbel_peq1(spec: AggregateSpec) -> TailAsymptotic:
    """Unit power: P(S_1 > scale * u) ~ K (u w(u))^{-sum of left-out alphas} F_bar(u),
    K = prod_{i>m} (1-lam_i)^{-alpha_i} * Gamma(abar)/Gamma(abar_m).

    With all weights equal the sum collapses to the radius itself and the
    returned asymptotic is the exact distribution.
    """
    if spec.p != 1.0:
        raise WrongRegimeError(f"this regime needs p = 1, got p={spec.p}")
    _require_gumbel(spec, "the p = 1 asymptotic")
    if spec.m == spec.d:
        return _identity_asymptotic(spec, "gumbel")
    left_out = spec.lam[spec.m:]
    if any(l >= 1.0 for l in left_out):
        raise ValidationError(
            "weight multiplicity is ambiguous: a left-out weight equals 1; "
            "revisit weight_tol")
    log_k = (sum(-a * math.log1p(-l) for a, l in zip(spec.alpha[spec.m:], left_out))
             + log_gamma(spec.alpha_bar) - log_gamma(spec.alpha_bar_m))
    rho = -(spec.alpha_bar - spec.alpha_bar_m)
    return TailAsymptotic(log_constant=log_k, rho=rho, base="gumbel", radial=spec.radial,
                          p=1.0, scale=spec.scale, pivot=1.0, convention="u = t/scale")


def tail_gumbel_plt1(spec: AggregateSpec) -> TailAsymptotic:
    """Powers below one: P(S_p > scale * lt * u^p) ~ K (u w(u))^{-(d-1)/2} F_bar(u),
    K = Gamma((d+1)/2) * C_d * (p * lt)^{(d-1)/2},

    where lt and C_d come from the simplex Laplace recursion.  Needs every
    weight strictly positive.
    """
    if spec.d > 1 and not 0 < spec.p < 1:
        raise WrongRegimeError(f"this regime needs p in (0, 1), got p={spec.p}")
    _require_gumbel(spec, "the p < 1 asymptotic")
    if spec.d == 1:
        return _identity_asymptotic(spec, "gumbel")
    geometry = simplex_constant_recursion(spec)
    d = spec.d
    lt = geometry.lambda_tilde_final
    log_k = (log_gamma((d + 1) / 2.0) + math.log(geometry.c_tilde_final)
             + (d - 1) / 2.0 * math.log(spec.p * lt))
    return TailAsymptotic(log_constant=log_k, rho=-(d - 1) / 2.0, base="gumbel",
                          radial=spec.radial, p=spec.p, scale=spec.scale, pivot=lt,
                          convention="u = (t/(scale*lambda_tilde))**(1/p)")


def tail_weibull(spec: AggregateSpec) -> TailAsymptotic:
    """Finite endpoint, unit power: for survival regularly varying at 1 with
    index gamma,

    P(S_1 > scale*(1-u)) ~ K u^{sum of left-out alphas} F_bar(1-u),
    K = prod_{i>m}(1-lam_i)^{-alpha_i} * Gamma(abar)*Gamma(gamma+1)
        / (Gamma(abar_m) * Gamma(sum_{i>m} alpha_i + gamma + 1)).

    The exponent on u is positive: the aggregate's tail at 1 is thinner than
    the radius's tail by exactly that polynomial factor.
    """
    if spec.p != 1.0:
        raise WrongRegimeError(f"the endpoint asymptotic needs p = 1, got p={spec.p}")
    if spec.m == spec.d:
        return _identity_asymptotic(spec, "weibull")
    if spec.radial.mda_class != "weibull":
        raise WrongRegimeError("the endpoint asymptotic needs a Weibull-class radial law")
    gamma = spec.radial.weibull_index
    left_out = spec.lam[spec.m:]
    if any(l >= 1.0 for l in left_out):
        raise ValidationError("weight multiplicity is ambiguous: a left-out weight equals 1")
    alpha_out = spec.alpha_bar - spec.alpha_bar_m
    log_k = (sum(-a * math.log1p(-l) for a, l in zip(spec.alpha[spec.m:], left_out))
             + log_gamma(spec.alpha_bar) + log_gamma(gamma + 1.0)
             - log_gamma(spec.alpha_bar_m) - log_gamma(alpha_out + gamma + 1.0))
    return TailAsymptotic(log_constant=log_k, rho=alpha_out, base="weibull",
                          radial=spec.radial, p=1.0, scale=spec.scale, pivot=1.0,
                          convention="u = 1 - t/scale")


def marginal_component_tail(spec: AggregateSpec, i: int) -> TailAsymptotic:
    """Tail of a single weighted component lam_i * X_i^p (validated order):

    P(lam_i X_i^p > lam_i u^p) ~ Gamma(abar)/Gamma(alpha_i) (u w(u))^{alpha_i-abar} F_bar(u).
    """
    _require_gumbel(spec, "the marginal component tail")
    if not 0 <= i < spec.d:
        raise DomainError(f"component index out of range: {i}")
    lam_i = spec.lam[i]
    if lam_i == 0.0:
        return TailAsymptotic(log_constant=-math.inf, rho=0.0, base="gumbel",
                              radial=spec.radial, p=spec.p, scale=spec.scale, pivot=1.0,
                              convention="degenerate zero-weight component")
    if spec.d == 1:
        return _identity_asymptotic(spec, "gumbel")
    log_k = log_gamma(spec.alpha_bar) - log_gamma(spec.alpha[i])
    return TailAsymptotic(log_constant=log_k, rho=spec.alpha[i] - spec.alpha_bar,
                          base="gumbel", radial=spec.radial, p=spec.p, scale=spec.scale,
                          pivot=lam_i, convention="u = (t/(scale*lam_i))**(1/p)")


# ----------------------------------------------------------------------
# regimes, VaR / ES
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class RegimeInfo:
    regime: str            # "a", "b", "c", "weibull" or "degenerate"
    single_big_jump: bool


def regime_classify(spec: AggregateSpec) -> RegimeInfo:
    """Select the applicable asymptotic regime for a validated spec.

    The sum's tail is driven by one big component exactly when p > 1; for
    p <= 1 every component is asymptotically negligible relative to the sum.
    """
    gumbel = spec.radial.mda_class == "gumbel"
    if spec.p > 1.0:
        if not gumbel:
            raise WrongRegimeError("p > 1 is only covered for Gumbel-class radial laws")
        return RegimeInfo(regime="a", single_big_jump=True)
    if spec.p == 1.0:
        if spec.m == spec.d:
            return RegimeInfo(regime="degenerate", single_big_jump=False)
        if gumbel:
            return RegimeInfo(regime="b", single_big_jump=False)
        return RegimeInfo(regime="weibull", single_big_jump=False)
    # p in (0, 1)
    if any(l == 0.0 for l in spec.lam):
        raise WrongRegimeError(
            "p < 1 with zero weights is not covered; drop the zero-weight components")
    if not gumbel:
        raise WrongRegimeError("p < 1 is only covered for Gumbel-class radial laws")
    return RegimeInfo(regime="c", single_big_jump=False)


def tail_asymptotic(spec: AggregateSpec) -> TailAsymptotic:
    """Dispatch to the regime formula that applies to this spec."""
    info = regime_classify(spec)
    if info.regime == "a":
        return tail_gumbel_pgt1(spec)
    if info.regime == "b":
        return tail_gumbel_peq1(spec)
    if info.regime == "c":
        return tail_gumbel_plt1(spec)
    if info.regime == "weibull":
        return tail_weibull(spec)
    # degenerate: S_1 = R exactly; base follows the radial's class
    return _identity_asymptotic(
        spec, "gumbel" if spec.radial.mda_class == "gumbel" else "weibull")


@dataclass(frozen=True)
class VarEs:
    var: float
    es_minus_var: float
    accuracy_warning: bool


def var_es_asymptotic(spec: AggregateSpec, b: float) -> VarEs:
    """Value-at-Risk of S_p at level b from the tail asymptotic, and the
    asymptotic mean excess beyond it.

    The aggregate inherits the Gumbel property with scaling function
    w_p(x) = x^{1/p-1} w(x^{1/p}) / p, so E[S_p - VaR | S_p > VaR] ~ 1/w_p(VaR).
    The result carries an accuracy warning when b is too low for an
    extreme-tail formula to be meaningful (tail probability above 0.1).
    """
    if not 0 < b < 1:
        raise DomainError(f"level b must lie in (0, 1), got {b}")
    if not math.isinf(spec.radial.upper_endpoint):
        raise WrongRegimeError("VaR/ES asymptotics need an infinite upper endpoint")
    _require_gumbel(spec, "the VaR/ES asymptotic")
    asym = tail_asymptotic(spec)
    var = asym.invert(math.log1p(-b))
    es_minus_var = spec.scale / spec.radial.power_scaling_wp(spec.p, var / spec.scale)
    return VarEs(var=var, es_minus_var=es_minus_var, accuracy_warning=(1.0 - b) > 0.1)
