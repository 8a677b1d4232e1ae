"""One-period benchmark: welfare, trust cutoff, optimal scale/mix, frontier.

The solver is grid-plus-refinement: a deterministic argmax over the tensor
instrument grid (ties broken by smallest revenue, then smallest tau_L, then
smallest tau_B), followed by one golden-section pass on tau_B inside one
coarse grid cell at the best tau_L.  The tie-break makes the zero-tax point
win exactly at indifference.

Welfare conventions differ by backend and are kept as written:

* quant:   ln C - L^2/2 + [theta + (1-theta)phi] * G - a(tau)
* general: U(Y(S) - R) - V(L(S)) + [theta + (1-theta)phi] * R - a(tau)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .economy import (
    Allocation,
    Economy,
    FeasibleArrays,
    GridSpec,
    Instruments,
    allocation_components,
    feasible_arrays,
    net_of_tax_product,
    revenue_components,
    solve_allocation_general,
    solve_allocation_quant,
)
from .errors import EconomyDomainError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
GOLDEN_TOL = 1e-8
R_POSITIVE_TOL = 1e-6


@dataclass(frozen=True)
class InstrumentCosts:
    """Quadratic instrument costs a(tau) = c_L*tau_L^2 + c_B*tau_B^2.

    Zero value and zero marginal cost at the origin, so costless baselines
    are the c = 0 special case.
    """

    c_l: float = 0.0
    c_b: float = 0.0

    def __post_init__(self):
        if self.c_l < 0 or self.c_b < 0:
            raise EconomyDomainError("cost coefficients must be nonnegative")

    def cost(self, tau_l, tau_b):
        return self.c_l * np.asarray(tau_l) ** 2 + self.c_b * np.asarray(tau_b) ** 2


NO_COSTS = InstrumentCosts()


@dataclass(frozen=True)
class StaticSolution:
    instruments: Instruments
    allocation: Allocation
    welfare: float
    at_cutoff: bool


@dataclass(frozen=True)
class CutoffReport:
    theta_bar_static: float
    theta_bar_dynamic: float

    @property
    def gap(self) -> float:
        return self.theta_bar_static - self.theta_bar_dynamic


def payoff_weight(theta, phi):
    """Earmarking replaces theta by theta + (1-theta)*phi in the revenue term."""
    return phi + np.asarray(theta, dtype=float) * (1.0 - phi)


def static_welfare(theta: float, instruments: Instruments, economy: Economy,
                   phi: float = 0.0, costs: InstrumentCosts = NO_COSTS) -> float:
    """Expected one-period welfare of an instrument pair at belief theta."""
    cap = economy.primitives.tau_max
    if instruments.tau_l > cap or instruments.tau_b > cap:
        raise EconomyDomainError(f"instruments {instruments} exceed the domain cap {cap}")
    comp = allocation_components(economy, instruments.tau_l, instruments.tau_b)
    return (float(private_utility(economy, comp))
            + float(payoff_weight(theta, phi)) * float(comp.revenue)
            - float(costs.cost(instruments.tau_l, instruments.tau_b)))


def static_cutoff(economy: Economy, phi: float = 0.0) -> float:
    """Trust threshold: the belief where U'(Y0) equals the payoff weight."""
    prim = economy.primitives
    if economy.backend == "quant":
        y0 = solve_allocation_quant(Instruments(0.0, 0.0)).output
    else:
        y0 = solve_allocation_general(prim, 1.0).output
    bar = float(prim.marginal_utility(y0))
    if phi >= 1.0 or phi >= bar:
        return 0.0
    return (bar - phi) / (1.0 - phi)


def golden_section_max(objective, lo: float, hi: float, tol: float = GOLDEN_TOL):
    """Golden-section maximizer on [lo, hi]; returns (x, objective(x))."""
    a, b = lo, hi
    c = b - (b - a) * INV_PHI
    d = a + (b - a) * INV_PHI
    fc, fd = objective(c), objective(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * INV_PHI
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * INV_PHI
            fd = objective(d)
    x = 0.5 * (a + b)
    return x, objective(x)


def private_utility(economy: Economy, comp) -> np.ndarray:
    """U(C) - V(L) under each backend's consumption convention, elementwise."""
    if economy.backend == "quant":
        return np.log(comp.consumption) - 0.5 * comp.labor ** 2
    prim = economy.primitives
    net_c = comp.output - comp.revenue
    if np.any(net_c <= 0.0):
        raise EconomyDomainError("revenue exceeds output: nonpositive consumption")
    return prim.utility(net_c) - prim.labor_disutility(comp.labor)


def _welfare_grid(arrays: FeasibleArrays, economy: Economy, theta, phi, costs):
    """Vectorized static welfare over the feasible set. theta may be an array."""
    weight = payoff_weight(theta, phi)
    cost = costs.cost(arrays.tau_l, arrays.tau_b)
    u_priv = private_utility(economy, arrays)
    if np.ndim(weight) == 0:
        return u_priv + weight * arrays.revenue - cost
    return u_priv[None, :] + weight[:, None] * arrays.revenue[None, :] - cost[None, :]


def _tie_break_order(arrays: FeasibleArrays) -> np.ndarray:
    """Index order so that argmax-first-hit implements the documented tie-break."""
    return np.lexsort((arrays.tau_b, arrays.tau_l, arrays.revenue))


def _allocation_at(economy: Economy, instruments: Instruments) -> Allocation:
    if economy.backend == "quant":
        return solve_allocation_quant(instruments, economy.primitives.tau_max)
    r_l, r_b = revenue_components(economy, instruments)
    base = solve_allocation_general(economy.primitives, net_of_tax_product(instruments))
    rev = r_l + r_b
    return Allocation(consumption=base.consumption, labor=base.labor, output=base.output,
                      net_of_tax=base.net_of_tax, revenue=rev, delivered=rev)


def solve_static(theta: float, economy: Economy, grid_spec: GridSpec | None = None,
                 costs: InstrumentCosts = NO_COSTS, phi: float = 0.0,
                 refine: bool = True) -> StaticSolution:
    """Grid argmax plus one golden-section refinement round on tau_B."""
    grid_spec = grid_spec or GridSpec()
    arrays = feasible_arrays(economy, grid_spec)
    order = _tie_break_order(arrays)
    values = _welfare_grid(arrays, economy, theta, phi, costs)[order]
    best = order[int(np.argmax(values))]
    best_value = float(np.max(values))
    tau_l = float(arrays.tau_l[best])
    tau_b = float(arrays.tau_b[best])
    best_r = float(arrays.revenue[best])

    if refine and grid_spec.n_b > 1:
        lo = max(tau_b - arrays.cell_b, 0.0)
        hi = min(tau_b + arrays.cell_b, grid_spec.tau_max)

        def objective(x):
            return static_welfare(theta, Instruments(tau_l, x), economy, phi, costs)

        x, fx = golden_section_max(objective, lo, hi)
        if fx > best_value:
            tau_b, best_value = x, fx
            best_r = _allocation_at(economy, Instruments(tau_l, tau_b)).revenue

    instruments = Instruments(tau_l, tau_b)
    allocation = _allocation_at(economy, instruments)
    bar = static_cutoff(economy, phi)
    at_cutoff = abs(theta - bar) <= 0.5 * arrays.cell_b
    return StaticSolution(instruments=instruments, allocation=allocation,
                          welfare=best_value, at_cutoff=at_cutoff)


# ---------------------------------------------------------------------------
# equivalence frontier
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrontierPoint:
    instruments: Instruments
    net_of_tax: float
    revenue: float
    welfare: float


def enumerate_frontier(target_s: float, target_r: float, economy: Economy,
                       tol: float = 1e-6, theta: float | None = None,
                       scan_points: int = 200001) -> list[FrontierPoint]:
    """Instrument pairs within tol of the target (S, R) pair.

    The scan walks a fine tau_L grid and solves tau_B from the wedge
    identity (1-tau_L)(1-tau_B) = S exactly, then filters on |R - R*|.
    The instrument-to-(S,R) map is injective in both backends, so a plain
    tensor-grid scan would generically return nothing; matching S by
    construction recovers the near-frontier neighborhood the tolerance is
    meant to capture.  An empty result is a valid outcome.
    """
    if tol <= 0:
        raise EconomyDomainError("frontier tolerance must be positive")
    if not (0.0 < target_s <= 1.0):
        raise EconomyDomainError(f"target net-of-tax product out of range: {target_s}")
    prim = economy.primitives
    tau_cap = prim.tau_max
    tau_l = np.linspace(0.0, min(tau_cap, 1.0 - target_s), scan_points)
    tau_b = 1.0 - target_s / (1.0 - tau_l)
    keep = (tau_b >= 0.0) & (tau_b <= tau_cap)
    tau_l, tau_b = tau_l[keep], tau_b[keep]

    if economy.backend == "quant":
        labor = np.sqrt((1.0 - tau_l) / (2.0 - tau_l))
        root = np.sqrt(labor)
        revenue = root * (tau_l * (1.0 - tau_b) + 2.0 * tau_b)
        y_ref = 2.0 * math.sqrt(math.sqrt(0.5))  # zero-labor-tax output
    else:
        base = solve_allocation_general(prim, target_s)
        wage_bill = float(prim.marginal_product(base.labor)) * base.labor
        revenue = tau_l * (1.0 - tau_b) * wage_bill + tau_b * base.output
        y_ref = base.output

    hits = np.abs(revenue - target_r) <= tol
    if theta is None:
        # trust level at which the target scale satisfies U'(C*) = theta,
        # making welfare flat to first order in revenue across members
        consumption = max(y_ref - target_r, 1e-9)
        theta = float(np.clip(prim.marginal_utility(consumption), 0.0, 1.0))

    out = []
    for tl, tb, rev in zip(tau_l[hits], tau_b[hits], revenue[hits]):
        inst = Instruments(float(tl), float(tb))
        s_val = net_of_tax_product(inst)
        if abs(s_val - target_s) > tol:
            continue
        out.append(FrontierPoint(
            instruments=inst, net_of_tax=float(s_val), revenue=float(rev),
            welfare=static_welfare(theta, inst, economy),
        ))
    return out


def select_mix_by_cost(frontier: list[FrontierPoint] | list[Instruments],
                       costs: InstrumentCosts) -> Instruments:
    """Cost-minimizing frontier member; ties resolved by smallest tau_L, then tau_B."""
    if not frontier:
        raise EconomyDomainError("cannot select a mix from an empty frontier")
    members = [p.instruments if isinstance(p, FrontierPoint) else p for p in frontier]
    return min(members, key=lambda m: (float(costs.cost(m.tau_l, m.tau_b)), m.tau_l, m.tau_b))
