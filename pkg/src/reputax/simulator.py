"""Monte Carlo simulation of the equilibrium path.

The hidden type follows the two-state chain; each period the government
reads its policy from the solved schedule (revenue interpolated linearly in
the public belief, instruments at the nearest grid point), delivery and the
public signal are drawn, and the public belief updates by Bayes' rule at
announced revenue and propagates through the chain.

Randomness contract: every path gets its own counter-based Philox stream
keyed by (seed, path index), and each period consumes a fixed block of four
uniforms (delivery, verification, signal, type transition) whether or not a
lever is active.  Path i is therefore bit-identical regardless of how many
paths run or in what order.

Signal conventions (the kernel is type-indexed, not delivery-indexed): the
realized signal draw uses announced revenue for the ratio/custom kernels;
for the threshold kernel the realized draw depends on delivered spending
(s = 1{G >= kappa} through the bit flip), which reduces to the opportunist
floor eps under diversion.  Public belief updating always uses the
type-indexed kernel at announced revenue, so stored beliefs replay exactly
through the one-step kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamic_solver import PolicySchedule
from .errors import EconomyDomainError
from .monitoring import (
    MonitoringTech,
    TransitionMatrix,
    bayes_posterior,
    one_step_kernel,
    propagate_prior,
    signal_prob,
)


@dataclass(frozen=True)
class SimConfig:
    horizon: int = 50
    n_paths: int = 20
    seed: int = 12345
    initial_theta: float = 0.5
    mimic_prob: float = 0.0

    def __post_init__(self):
        if self.horizon < 1 or self.n_paths < 1:
            raise EconomyDomainError("horizon and n_paths must be >= 1")
        if not (0.0 <= self.initial_theta <= 1.0):
            raise EconomyDomainError("initial belief must lie in [0, 1]")
        if not (0.0 <= self.mimic_prob <= 1.0):
            raise EconomyDomainError("mimic probability must lie in [0, 1]")
        if not (0 <= self.seed < 2 ** 64):
            raise EconomyDomainError("seed must fit in 64 bits")


@dataclass(frozen=True)
class SimPath:
    path_id: int
    honest: np.ndarray      # bool per period
    theta: np.ndarray
    tau_l: np.ndarray
    tau_b: np.ndarray
    revenue: np.ndarray     # announced
    delivered: np.ndarray
    signal: np.ndarray      # int 0/1
    theta_next: np.ndarray

    def type_labels(self) -> list[str]:
        return ["H" if h else "O" for h in self.honest]


@dataclass(frozen=True)
class PathStats:
    mean_theta: np.ndarray
    theta_quantiles: np.ndarray   # rows: q10, q50, q90
    mean_revenue: np.ndarray
    delivery_rate: np.ndarray
    terminal_histogram: tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class SimulationOutput:
    paths: list[SimPath]
    summary: PathStats


def _path_rng(seed: int, path_id: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, path_id], dtype=np.uint64)))


def realized_signal_prob(tech: MonitoringTech, honest: bool, announced: float,
                         delivered: float) -> float:
    if tech.kind == "threshold":
        # the threshold experiment watches delivered spending itself
        return float(signal_prob(tech, "H", delivered))
    return float(signal_prob(tech, "H" if honest else "O", announced))


def _simulate_one(path_id: int, policy: PolicySchedule, tech: MonitoringTech,
                  transition: TransitionMatrix, config: SimConfig) -> SimPath:
    rng = _path_rng(config.seed, path_id)
    horizon = config.horizon
    honest = np.empty(horizon, dtype=bool)
    theta = np.empty(horizon)
    tau_l = np.empty(horizon)
    tau_b = np.empty(horizon)
    revenue = np.empty(horizon)
    delivered = np.empty(horizon)
    signal = np.empty(horizon, dtype=np.int64)
    theta_next = np.empty(horizon)

    is_honest = bool(rng.random() < config.initial_theta)
    belief = float(config.initial_theta)
    for t in range(horizon):
        u_deliver, u_verify, u_signal, u_transition = rng.random(4)
        announced = float(policy.revenue_at(belief))
        inst = policy.instruments_at(belief)
        deliver = is_honest or (u_deliver < config.mimic_prob)
        got = announced if deliver else 0.0
        s = int(u_signal < realized_signal_prob(tech, is_honest, announced, got))
        coverage = float(tech.reveal_coverage(announced))
        if u_verify < coverage:
            posterior = 1.0 if is_honest else 0.0
        else:
            posterior = float(bayes_posterior(belief, announced, s, tech))
        nxt = float(np.clip(propagate_prior(posterior, transition), 0.0, 1.0))

        honest[t] = is_honest
        theta[t] = belief
        tau_l[t] = inst.tau_l
        tau_b[t] = inst.tau_b
        revenue[t] = announced
        delivered[t] = got
        signal[t] = s
        theta_next[t] = nxt

        stay = transition.pi_hh if is_honest else 1.0 - transition.pi_oo
        is_honest = bool(u_transition < stay)
        belief = nxt
    return SimPath(path_id=path_id, honest=honest, theta=theta, tau_l=tau_l,
                   tau_b=tau_b, revenue=revenue, delivered=delivered,
                   signal=signal, theta_next=theta_next)


def simulate_paths(policy: PolicySchedule, tech: MonitoringTech,
                   transition: TransitionMatrix, config: SimConfig) -> SimulationOutput:
    """Simulate n_paths independent trajectories; deterministic given the seed."""
    paths = [_simulate_one(i, policy, tech, transition, config)
             for i in range(config.n_paths)]
    return SimulationOutput(paths=paths, summary=long_run_stats(paths))


def long_run_stats(paths: list[SimPath]) -> PathStats:
    """Cross-path per-period summaries and the terminal belief histogram."""
    if not paths:
        raise EconomyDomainError("path set is empty")
    theta = np.vstack([p.theta for p in paths])
    revenue = np.vstack([p.revenue for p in paths])
    full_delivery = np.vstack([p.delivered >= p.revenue - 1e-15 for p in paths])
    terminal = np.array([p.theta_next[-1] for p in paths])
    counts, edges = np.histogram(terminal, bins=20, range=(0.0, 1.0))
    return PathStats(
        mean_theta=theta.mean(axis=0),
        theta_quantiles=np.quantile(theta, [0.1, 0.5, 0.9], axis=0),
        mean_revenue=revenue.mean(axis=0),
        delivery_rate=full_delivery.mean(axis=0),
        terminal_histogram=(counts, edges),
    )


@dataclass(frozen=True)
class HistoryProbe:
    theta: float
    revenue: float
    theta_up: float
    theta_down: float
    revenue_up: float
    revenue_down: float
    weak_ok: bool
    strict_expected: bool
    strict_ok: bool


@dataclass(frozen=True)
class HistoryReport:
    probes: list[HistoryProbe]

    @property
    def all_weak_ok(self) -> bool:
        return all(p.weak_ok for p in self.probes)

    @property
    def all_strict_ok(self) -> bool:
        return all(p.strict_ok for p in self.probes if p.strict_expected)


def verify_history_dependence(policy: PolicySchedule, tech: MonitoringTech,
                              transition: TransitionMatrix,
                              theta_probes) -> HistoryReport:
    """Step-up/step-down check: tomorrow's scale after good vs bad news.

    Strict inequalities are asserted only where the signal is informative,
    the probe's scale is interior, and the propagated next priors actually
    straddle the probe (the chain pulls beliefs toward its fixed point, so
    above pi_HH the post-good-news prior falls below today's belief).
    """
    def scale_at(belief):
        # the positivity convention matches cutoff detection: sub-tolerance
        # revenue (the polish's infinitesimal information purchase below the
        # cutoff) counts as zero scale
        rev = float(policy.revenue_at(belief))
        return rev if rev > 1e-6 else 0.0

    probes = []
    for theta in theta_probes:
        if not (0.0 < theta < 1.0):
            raise EconomyDomainError("history probes must be interior beliefs")
        rev = scale_at(theta)
        step = one_step_kernel(theta, rev, tech, transition)
        r_up = scale_at(step.theta_up)
        r_down = scale_at(step.theta_down)
        weak = (r_down <= rev + 1e-12) and (rev <= r_up + 1e-12)
        informative = (step.theta_up - step.theta_down) > 1e-9
        interior = rev > 1e-6
        straddles = step.theta_down < theta < step.theta_up
        strict_expected = informative and interior and straddles
        strict = r_down < rev < r_up
        probes.append(HistoryProbe(theta=theta, revenue=rev,
                                   theta_up=step.theta_up, theta_down=step.theta_down,
                                   revenue_up=r_up, revenue_down=r_down,
                                   weak_ok=weak, strict_expected=strict_expected,
                                   strict_ok=strict if strict_expected else True))
    return HistoryReport(probes=probes)
