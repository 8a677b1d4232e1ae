"""Competitive allocations, net-of-tax product, and government revenue.

Two backends coexist and are deliberately kept separate:

* ``quant`` -- the closed-form log/quadratic/square-root economy
  (U = ln C, V = L^2/2, Y = 2*sqrt(L)), where the competitive block is
  L^2 = (1-tau_L)/(2-tau_L), C = (1-tau_B)(2-tau_L)*sqrt(L) and delivered
  public goods G = sqrt(L)*[tau_L(1-tau_B) + 2*tau_B].  Here Y - C = G holds
  identically and announced revenue equals G.
* ``general`` -- parametric primitives where labor solves the intratemporal
  condition V'(L)/U'(C) = S*f'(L) with C = Y = f(L), by bracketed bisection.
  Revenue is tau_L(1-tau_B)*f'(L)L + tau_B*Y.

The two blocks impose different budget conventions (see each welfare
definition in :mod:`reputax.static_solver`); configs select one backend and
results are never mixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BracketingError, EconomyDomainError

DEFAULT_TAU_MAX = 0.99


@dataclass(frozen=True)
class Instruments:
    """A tax pair: labor rate and broad/output rate, each in [0, 1)."""

    tau_l: float
    tau_b: float

    def __post_init__(self):
        if not (0.0 <= self.tau_l < 1.0 and 0.0 <= self.tau_b < 1.0):
            raise EconomyDomainError(
                f"tax rates must lie in [0, 1): got ({self.tau_l}, {self.tau_b})"
            )


@dataclass(frozen=True)
class EconomyPrimitives:
    """Parametric utility/production family.

    utility_curvature is the CRRA coefficient (1.0 selects log utility),
    labor disutility is V(L) = L^p / p, production is f(L) = A * L^alpha.
    """

    utility_curvature: float = 1.0
    labor_disutility_power: float = 2.0
    production_scale: float = 2.0
    production_power: float = 0.5
    tau_max: float = DEFAULT_TAU_MAX

    def __post_init__(self):
        if not (0.0 < self.tau_max < 1.0):
            raise EconomyDomainError(f"tau_max must lie in (0, 1): {self.tau_max}")
        self._check_shapes()

    # U, V, f and their derivatives ------------------------------------

    def utility(self, c):
        c = np.asarray(c, dtype=float)
        if self.utility_curvature == 1.0:
            return np.log(c)
        s = self.utility_curvature
        return (c ** (1.0 - s) - 1.0) / (1.0 - s)

    def marginal_utility(self, c):
        return np.asarray(c, dtype=float) ** (-self.utility_curvature)

    def labor_disutility(self, labor):
        p = self.labor_disutility_power
        return np.asarray(labor, dtype=float) ** p / p

    def marginal_disutility(self, labor):
        return np.asarray(labor, dtype=float) ** (self.labor_disutility_power - 1.0)

    def output(self, labor):
        return self.production_scale * np.asarray(labor, dtype=float) ** self.production_power

    def marginal_product(self, labor):
        a = self.production_power
        return a * self.production_scale * np.asarray(labor, dtype=float) ** (a - 1.0)

    def _check_shapes(self):
        # U inc/concave, V inc/convex, f inc/concave with f(0)=0, verified on
        # a sample grid rather than assumed from the parameter signs alone.
        c = np.linspace(0.2, 5.0, 25)
        du = self.marginal_utility(c)
        if not (np.all(du > 0) and np.all(np.diff(du) < 0)):
            raise EconomyDomainError("utility must be strictly increasing and concave")
        labor = np.linspace(0.05, 3.0, 25)
        dv = self.marginal_disutility(labor)
        if not (np.all(dv > 0) and np.all(np.diff(dv) >= -1e-12)):
            raise EconomyDomainError("labor disutility must be increasing and convex")
        df = self.marginal_product(labor)
        if not (np.all(df > 0) and np.all(np.diff(df) < 0) and self.output(0.0) == 0.0):
            raise EconomyDomainError("production must be strictly increasing and concave with f(0)=0")

    def is_baseline(self) -> bool:
        return (
            self.utility_curvature == 1.0
            and self.labor_disutility_power == 2.0
            and self.production_scale == 2.0
            and self.production_power == 0.5
        )


@dataclass(frozen=True)
class Economy:
    """Backend selector plus primitives. ``quant`` requires baseline primitives."""

    backend: str = "quant"
    primitives: EconomyPrimitives = field(default_factory=EconomyPrimitives)

    def __post_init__(self):
        if self.backend not in ("quant", "general"):
            raise EconomyDomainError(f"unknown backend {self.backend!r}")
        if self.backend == "quant" and not self.primitives.is_baseline():
            raise EconomyDomainError("the quant backend is the closed-form baseline economy; "
                                     "use backend='general' for other primitives")


@dataclass(frozen=True)
class Allocation:
    """One competitive outcome at a given instrument pair."""

    consumption: float
    labor: float
    output: float
    net_of_tax: float
    revenue: float
    delivered: float


@dataclass(frozen=True)
class GridSpec:
    """Tensor-product instrument grid: per-instrument point counts and common cap."""

    n_l: int = 41
    n_b: int = 41
    tau_max: float = DEFAULT_TAU_MAX

    def __post_init__(self):
        if self.n_l < 1 or self.n_b < 1:
            raise EconomyDomainError("grid counts must be >= 1")
        if not (0.0 <= self.tau_max < 1.0):
            raise EconomyDomainError(f"tau_max must lie in [0, 1): {self.tau_max}")

    def tau_l_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.tau_max, self.n_l)

    def tau_b_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.tau_max, self.n_b)


def net_of_tax_product(instruments: Instruments) -> float:
    """S = (1 - tau_L)(1 - tau_B), the single wedge private choices load on."""
    return (1.0 - instruments.tau_l) * (1.0 - instruments.tau_b)


# ---------------------------------------------------------------------------
# quant backend (closed forms)
# ---------------------------------------------------------------------------

def _quant_arrays(tau_l, tau_b):
    labor = np.sqrt((1.0 - tau_l) / (2.0 - tau_l))
    root = np.sqrt(labor)
    output = 2.0 * root
    consumption = (1.0 - tau_b) * (2.0 - tau_l) * root
    delivered = root * (tau_l * (1.0 - tau_b) + 2.0 * tau_b)
    return labor, output, consumption, delivered


def solve_allocation_quant(instruments: Instruments, tau_max: float = DEFAULT_TAU_MAX) -> Allocation:
    """Closed-form allocation of the baseline economy; announced revenue equals G."""
    if instruments.tau_l > tau_max or instruments.tau_b > tau_max:
        raise EconomyDomainError(
            f"instruments {instruments} exceed the instrument domain cap {tau_max}"
        )
    labor, output, consumption, delivered = _quant_arrays(instruments.tau_l, instruments.tau_b)
    return Allocation(
        consumption=float(consumption),
        labor=float(labor),
        output=float(output),
        net_of_tax=net_of_tax_product(instruments),
        revenue=float(delivered),
        delivered=float(delivered),
    )


# ---------------------------------------------------------------------------
# general backend (bracketed root-finding on the intratemporal condition)
# ---------------------------------------------------------------------------

def _labor_residual(primitives: EconomyPrimitives, labor, net_of_tax):
    # V'(L) / U'(f(L)) - S f'(L), written with U' = C^-sigma so the quotient
    # is V'(L) * f(L)^sigma.
    c = primitives.output(labor)
    return (primitives.marginal_disutility(labor) * c ** primitives.utility_curvature
            - net_of_tax * primitives.marginal_product(labor))


def solve_bracketed(f, lo: float, hi: float, residual_tol: float = 1e-12,
                    max_iter: int = 200) -> float:
    """Bisection on a sign-changing f over [lo, hi]; |f(root)| <= residual_tol."""
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketingError(f"no sign change on [{lo}, {hi}]: f={f_lo:.3g},{f_hi:.3g}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) <= residual_tol or (hi - lo) <= 1e-16 * max(1.0, abs(mid)):
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_allocation_general(primitives: EconomyPrimitives, net_of_tax: float) -> Allocation:
    """Unique labor solving V'(L)/U'(C) = S f'(L) with C = Y = f(L).

    Revenue is not determined by S alone; the returned allocation carries
    revenue = delivered = 0 and callers attach revenue separately.
    """
    if not (0.0 < net_of_tax <= 1.0):
        raise EconomyDomainError(f"net-of-tax product must lie in (0, 1]: {net_of_tax}")
    lo = 1e-9
    hi = 1.0
    # expand until the residual turns positive (it is negative near zero)
    while _labor_residual(primitives, hi, net_of_tax) < 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise BracketingError("labor bracket expansion failed; primitives look invalid")
    labor = solve_bracketed(lambda x: _labor_residual(primitives, x, net_of_tax), lo, hi)
    output = float(primitives.output(labor))
    return Allocation(
        consumption=output,
        labor=float(labor),
        output=output,
        net_of_tax=net_of_tax,
        revenue=0.0,
        delivered=0.0,
    )


def _labor_general_vec(primitives: EconomyPrimitives, net_of_tax: np.ndarray) -> np.ndarray:
    """Vectorized bisection for L(S) over an array of wedges."""
    s = np.asarray(net_of_tax, dtype=float)
    lo = np.full_like(s, 1e-9)
    hi = np.ones_like(s)
    for _ in range(40):
        mask = _labor_residual(primitives, hi, s) < 0.0
        if not mask.any():
            break
        hi = np.where(mask, hi * 2.0, hi)
    else:
        raise BracketingError("labor bracket expansion failed; primitives look invalid")
    for _ in range(110):
        mid = 0.5 * (lo + hi)
        neg = _labor_residual(primitives, mid, s) < 0.0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    return 0.5 * (lo + hi)


def revenue_general(primitives: EconomyPrimitives, instruments: Instruments) -> float:
    """R = tau_L(1-tau_B) f'(L)L + tau_B Y at the wedge implied by the instruments."""
    r_l, r_b = revenue_components_general(primitives, instruments)
    return r_l + r_b


def revenue_components_general(primitives: EconomyPrimitives,
                               instruments: Instruments) -> tuple[float, float]:
    """Revenue split into the labor-tax and broad-base terms."""
    s = net_of_tax_product(instruments)
    alloc = solve_allocation_general(primitives, s)
    wage_bill = float(primitives.marginal_product(alloc.labor)) * alloc.labor
    r_l = instruments.tau_l * (1.0 - instruments.tau_b) * wage_bill
    r_b = instruments.tau_b * alloc.output
    return r_l, r_b


def revenue_components_quant(instruments: Instruments) -> tuple[float, float]:
    """Same split in the closed-form economy, where f'(L)L = sqrt(L)."""
    labor = np.sqrt((1.0 - instruments.tau_l) / (2.0 - instruments.tau_l))
    root = float(np.sqrt(labor))
    r_l = instruments.tau_l * (1.0 - instruments.tau_b) * root
    r_b = 2.0 * instruments.tau_b * root
    return r_l, r_b


def revenue_components(economy: Economy, instruments: Instruments) -> tuple[float, float]:
    if economy.backend == "quant":
        return revenue_components_quant(instruments)
    return revenue_components_general(economy.primitives, instruments)


# ---------------------------------------------------------------------------
# feasible set
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AllocationArrays:
    """Vectorized allocations over instrument arrays (shared by all solvers)."""

    tau_l: np.ndarray
    tau_b: np.ndarray
    net_of_tax: np.ndarray
    revenue: np.ndarray
    revenue_labor: np.ndarray
    revenue_broad: np.ndarray
    consumption: np.ndarray
    labor: np.ndarray
    output: np.ndarray


def allocation_components(economy: Economy, tau_l, tau_b) -> AllocationArrays:
    """Allocation, revenue, and the labor/broad revenue split, elementwise."""
    tau_l = np.asarray(tau_l, dtype=float)
    tau_b = np.asarray(tau_b, dtype=float)
    s = (1.0 - tau_l) * (1.0 - tau_b)
    if economy.backend == "quant":
        labor, output, consumption, delivered = _quant_arrays(tau_l, tau_b)
        root = np.sqrt(labor)
        r_l = tau_l * (1.0 - tau_b) * root
        r_b = 2.0 * tau_b * root
        revenue = delivered
    else:
        prim = economy.primitives
        labor = _labor_general_vec(prim, s)
        output = prim.output(labor)
        wage_bill = prim.marginal_product(labor) * labor
        r_l = tau_l * (1.0 - tau_b) * wage_bill
        r_b = tau_b * output
        revenue = r_l + r_b
        consumption = output  # competitive-block convention C = Y; welfare uses Y - R
    return AllocationArrays(tau_l=tau_l, tau_b=tau_b, net_of_tax=s, revenue=revenue,
                            revenue_labor=r_l, revenue_broad=r_b,
                            consumption=consumption, labor=labor, output=output)


@dataclass(frozen=True)
class FeasibleArrays(AllocationArrays):
    """Instrument grid as flat arrays, row-major with tau_L as the outer index
    (matching build_feasible_set ordering, so result files are byte-stable)."""

    cell_b: float = 0.0  # tau_B grid step, the refinement window half-width


def feasible_arrays(economy: Economy, grid_spec: GridSpec) -> FeasibleArrays:
    tl_grid = grid_spec.tau_l_grid()
    tb_grid = grid_spec.tau_b_grid()
    tl, tb = np.meshgrid(tl_grid, tb_grid, indexing="ij")
    comp = allocation_components(economy, tl.ravel(), tb.ravel())
    cell = tb_grid[1] - tb_grid[0] if grid_spec.n_b > 1 else grid_spec.tau_max
    return FeasibleArrays(tau_l=comp.tau_l, tau_b=comp.tau_b,
                          net_of_tax=comp.net_of_tax, revenue=comp.revenue,
                          revenue_labor=comp.revenue_labor, revenue_broad=comp.revenue_broad,
                          consumption=comp.consumption, labor=comp.labor,
                          output=comp.output, cell_b=float(cell))


def build_feasible_set(economy: Economy, grid_spec: GridSpec) -> list[tuple[Instruments, Allocation]]:
    """Instrument grid with precomputed allocations, row-major with tau_L outer."""
    arrays = feasible_arrays(economy, grid_spec)
    out = []
    for i in range(arrays.tau_l.size):
        inst = Instruments(float(arrays.tau_l[i]), float(arrays.tau_b[i]))
        rev = float(arrays.revenue[i])
        out.append((inst, Allocation(
            consumption=float(arrays.consumption[i]),
            labor=float(arrays.labor[i]),
            output=float(arrays.output[i]),
            net_of_tax=float(arrays.net_of_tax[i]),
            revenue=rev,
            delivered=rev,
        )))
    return out
