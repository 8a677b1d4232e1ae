"""Signal kernels, Bayesian belief updating, and kernel transformations.

The baseline kernel is type-indexed: a favorable public signal s=1 arrives
with probability q_H(R) for the honest type and q_O(R) for the opportunist,
evaluated at announced revenue.  The default is the saturating-ratio family
q_H(R) = a_H + b_H*R/(R+1), q_O(R) = b_O*R/(R+1).

Transformations:

* garbling -- symmetric bit-flip with level eps applied to both kernels;
* enforcement -- a verified-delivery component that reveals the type, with
  coverage scaling with the revenue base (reveal probability
  lambda*R/(R+1)): audits verify a share of delivered spending, and there is
  nothing to verify when no revenue is delivered;
* threshold -- s = 1{delivered >= kappa} observed through a bit flip, with
  the opportunist (who delivers nothing) at the flip floor;
* instrument weighting -- mix_weights reweight the revenue the kernel sees
  (w_L*R_L + w_B*R_B); the symmetric default (1, 1) reproduces total revenue.

Likelihoods are clamped to [1e-12, 1-1e-12]: the default kernel has
q_O(0) = 0, and clamping keeps Bayes updates defined while preserving
near-revelation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import EconomyDomainError

PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class TransitionMatrix:
    """Two-state type chain: persistence probabilities for H and O."""

    pi_hh: float = 0.9
    pi_oo: float = 0.9

    def __post_init__(self):
        if not (0.0 <= self.pi_hh <= 1.0 and 0.0 <= self.pi_oo <= 1.0):
            raise EconomyDomainError("transition probabilities must lie in [0, 1]")

    def stationary_belief(self) -> float:
        denom = 2.0 - self.pi_hh - self.pi_oo
        if denom == 0.0:  # absorbing chain: any belief is stationary
            return 0.5
        return (1.0 - self.pi_oo) / denom


@dataclass(frozen=True)
class MonitoringTech:
    """Signal kernel plus the garbling/enforcement/weighting levers."""

    kind: str = "ratio"
    a_h: float = 0.2
    b_h: float = 0.8
    b_o: float = 0.1
    kappa: float = 0.1
    eps: float = 0.2
    r_table: tuple = ()
    q_h_table: tuple = ()
    q_o_table: tuple = ()
    garble_eps: float = 0.0
    reveal_weight: float = 0.0
    mix_weights: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.kind not in ("ratio", "threshold", "custom"):
            raise EconomyDomainError(f"unknown monitoring kind {self.kind!r}")
        if not (0.0 <= self.garble_eps <= 0.5):
            raise EconomyDomainError("garble_eps must lie in [0, 0.5]")
        if not (0.0 <= self.reveal_weight <= 1.0):
            raise EconomyDomainError("reveal_weight must lie in [0, 1]")
        if self.mix_weights[0] < 0 or self.mix_weights[1] < 0:
            raise EconomyDomainError("mix weights must be nonnegative")
        if self.kind == "threshold" and not (0.0 < self.eps < 0.5):
            raise EconomyDomainError("threshold bit-flip level must lie in (0, 0.5)")
        if self.kind == "custom" and not (len(self.r_table) and len(self.r_table) == len(self.q_h_table) == len(self.q_o_table)):
            raise EconomyDomainError("custom tech needs equal-length r/q_H/q_O tables")

    # raw kernels before garbling/clamping -----------------------------

    def _base_prob(self, gov_type: str, revenue):
        r = np.asarray(revenue, dtype=float)
        if self.kind == "ratio":
            ratio = r / (r + 1.0)
            return self.a_h + self.b_h * ratio if gov_type == "H" else self.b_o * ratio
        if self.kind == "threshold":
            if gov_type == "H":
                return np.where(r >= self.kappa, 1.0 - self.eps, self.eps)
            return np.full_like(r, self.eps)  # opportunist delivers 0 < kappa
        table = self.q_h_table if gov_type == "H" else self.q_o_table
        return np.interp(r, np.asarray(self.r_table), np.asarray(table))

    def reveal_coverage(self, revenue):
        """Probability the verified component reveals the type at this revenue."""
        r = np.asarray(revenue, dtype=float)
        return self.reveal_weight * r / (r + 1.0)


def _garble(q, eps):
    return (1.0 - eps) * q + eps * (1.0 - q)


def raw_signal_prob(tech: MonitoringTech, gov_type: str, revenue):
    """Garbled but unclamped favorable-signal probability (diagnostics only)."""
    q = tech._base_prob(gov_type, revenue)
    if tech.garble_eps > 0.0:
        q = _garble(q, tech.garble_eps)
    return q


def signal_prob(tech: MonitoringTech, gov_type: str, revenue):
    """P(s=1 | type, announced revenue), garbled and clamped to (0, 1)."""
    if np.any(np.asarray(revenue) < 0):
        raise EconomyDomainError("revenue must be nonnegative")
    return np.clip(raw_signal_prob(tech, gov_type, revenue), PROB_FLOOR, 1.0 - PROB_FLOOR)


def bayes_posterior(theta, revenue, signal: int, tech: MonitoringTech):
    """Posterior honesty probability after observing the signal at announced revenue."""
    q_h = signal_prob(tech, "H", revenue)
    q_o = signal_prob(tech, "O", revenue)
    lik_h = q_h if signal == 1 else 1.0 - q_h
    lik_o = q_o if signal == 1 else 1.0 - q_o
    theta = np.asarray(theta, dtype=float)
    num = theta * lik_h
    return num / (num + (1.0 - theta) * lik_o)


def propagate_prior(posterior, transition: TransitionMatrix):
    """Next prior through the type chain: pi_HH*p + (1-pi_OO)*(1-p)."""
    p = np.asarray(posterior, dtype=float)
    return transition.pi_hh * p + (1.0 - transition.pi_oo) * (1.0 - p)


@dataclass(frozen=True)
class BeliefStep:
    """One-step belief transition at (theta, revenue).

    p1/theta_up/theta_down describe the baseline signal branch.  The full
    distribution over next priors (including the verified-delivery branches,
    when reveal_weight > 0) is in branch_probs/branch_priors.
    """

    p1: float
    theta_up: float
    theta_down: float
    post_up: float
    post_down: float
    branch_probs: np.ndarray
    branch_priors: np.ndarray
    branch_posteriors: np.ndarray

    def mean_posterior(self) -> float:
        return float(np.dot(self.branch_probs, self.branch_posteriors))

    def mean_next_prior(self) -> float:
        return float(np.dot(self.branch_probs, self.branch_priors))


def one_step_kernel(theta: float, revenue: float, tech: MonitoringTech,
                    transition: TransitionMatrix) -> BeliefStep:
    """Signal probability and the next priors after each branch."""
    q_h = float(signal_prob(tech, "H", revenue))
    q_o = float(signal_prob(tech, "O", revenue))
    p1 = theta * q_h + (1.0 - theta) * q_o
    post_up = theta * q_h / p1
    post_down = theta * (1.0 - q_h) / (1.0 - p1)
    up = float(np.clip(propagate_prior(post_up, transition), 0.0, 1.0))
    down = float(np.clip(propagate_prior(post_down, transition), 0.0, 1.0))
    cov = float(tech.reveal_coverage(revenue))
    probs = np.array([(1.0 - cov) * p1, (1.0 - cov) * (1.0 - p1),
                      cov * theta, cov * (1.0 - theta)])
    priors = np.array([up, down,
                       propagate_prior(1.0, transition),
                       propagate_prior(0.0, transition)])
    posteriors = np.array([post_up, post_down, 1.0, 0.0])
    return BeliefStep(p1=p1, theta_up=up, theta_down=down,
                      post_up=float(post_up), post_down=float(post_down),
                      branch_probs=probs, branch_priors=priors,
                      branch_posteriors=posteriors)


def apply_enforcement(tech: MonitoringTech, reveal_weight: float) -> MonitoringTech:
    """Attach a verified-delivery share; coverage scales with the revenue base."""
    if not (0.0 <= reveal_weight <= 1.0):
        raise EconomyDomainError("reveal_weight must lie in [0, 1]")
    return replace(tech, reveal_weight=reveal_weight)


def threshold_tech(kappa: float, eps: float, **kwargs) -> MonitoringTech:
    """Delivery-threshold signal s = 1{G >= kappa} seen through a bit flip."""
    if kappa < 0:
        raise EconomyDomainError("threshold must be nonnegative")
    return MonitoringTech(kind="threshold", kappa=kappa, eps=eps, **kwargs)


@dataclass(frozen=True)
class InformativenessReport:
    """Odds-ratio diagnostic over a revenue grid.

    The odds ratio q_H(1-q_O) / [q_O(1-q_H)] is scanned for monotonicity on
    the points where both likelihoods are interior; points where a raw
    likelihood hits 0 or 1 are perfectly revealing (infinite odds ratio) and
    are listed separately instead of entering the scan.
    """

    r_grid: np.ndarray
    q_h: np.ndarray
    q_o: np.ndarray
    odds_ratio: np.ndarray
    monotone: bool
    informative_at_zero: bool
    revealing_points: np.ndarray


def informativeness_diagnostic(tech: MonitoringTech, r_grid) -> InformativenessReport:
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.size == 0 or np.any(np.diff(r_grid) <= 0):
        raise EconomyDomainError("revenue grid must be nonempty and ascending")
    q_h = np.asarray(raw_signal_prob(tech, "H", r_grid), dtype=float)
    q_o = np.asarray(raw_signal_prob(tech, "O", r_grid), dtype=float)
    interior = (q_h > PROB_FLOOR) & (q_h < 1 - PROB_FLOOR) & (q_o > PROB_FLOOR) & (q_o < 1 - PROB_FLOOR)
    odds = np.full(r_grid.shape, np.inf)
    odds[interior] = q_h[interior] * (1 - q_o[interior]) / (q_o[interior] * (1 - q_h[interior]))
    scanned = odds[interior]
    monotone = bool(np.all(np.diff(scanned) >= -1e-9)) if scanned.size > 1 else True
    qh0 = float(raw_signal_prob(tech, "H", 0.0))
    qo0 = float(raw_signal_prob(tech, "O", 0.0))
    return InformativenessReport(
        r_grid=r_grid, q_h=q_h, q_o=q_o, odds_ratio=odds,
        monotone=monotone,
        informative_at_zero=bool(abs(qh0 - qo0) > 1e-9),
        revealing_points=r_grid[~interior],
    )
