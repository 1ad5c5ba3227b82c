"""Design vector of the CSRR-loaded patch antenna, its bounds and repair.

Gene order (all millimetres)::

    R1, R2, R3, R4   ring radii, outer pair (R1 > R2) then inner pair (R3 > R4)
    Vr, Ur           ring-centre offset from the ground-plane centre (x, y)
    Wg, Lg           ground-plane width / length
    Wp, Lp           patch width / length

Feed and slot dimensions are fixed constants (``FixedDesign``), not genes.

The variation operators at the bottom work on plain float vectors so the
engines can reuse them for the benchmark problems as well.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass, field, fields

import numpy as np

GENE_NAMES = ("R1", "R2", "R3", "R4", "Vr", "Ur", "Wg", "Lg", "Wp", "Lp")
N_GENES = len(GENE_NAMES)

# float slack for every constraint comparison; repair never moves a gene that
# is already inside its interval by this tolerance
EPS = 1e-9


class InfeasibleBoundsError(ValueError):
    """No point inside the bounds satisfies the geometric constraints."""


@dataclass(frozen=True)
class FixedDesign:
    """Constants of the reference design (substrate, feed, slot geometry)."""

    Ws: float = 41.64
    Ls: float = 37.93
    h: float = 1.57
    Lf: float = 14.3
    Wf: float = 4.85
    D: float = 5.02
    S: float = 3.1
    d1: float = 0.5
    d2: float = 0.5
    s: float = 5.0
    gap: float = 1.5
    eps_r: float = 2.2
    tan_delta: float = 0.0009

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name} must be positive")
        if self.eps_r <= 1.0:
            raise ValueError("eps_r must exceed 1")


@dataclass(frozen=True)
class AntennaGenome:
    R1: float
    R2: float
    R3: float
    R4: float
    Vr: float
    Ur: float
    Wg: float
    Lg: float
    Wp: float
    Lp: float

    def to_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)

    @classmethod
    def from_array(cls, v) -> "AntennaGenome":
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (N_GENES,):
            raise ValueError(f"expected {N_GENES} genes, got shape {v.shape}")
        return cls(*(float(x) for x in v))

    def as_dict(self) -> dict[str, float]:
        return dict(zip(GENE_NAMES, astuple(self)))


# Ground plane starts at substrate size; rings start centred.
NOMINAL = AntennaGenome(
    R1=12.38, R2=11.88, R3=8.25, R4=7.75,
    Vr=0.0, Ur=0.0,
    Wg=41.64, Lg=37.93,
    Wp=22.8, Lp=18.55,
)

DEFAULT_SCALE = (0.85, 1.15)
DEFAULT_OFFSET_LIMIT = 8.0


@dataclass(frozen=True)
class ParameterBounds:
    """Per-gene ``[low, high]`` box plus the geometric clearances used by repair.

    ``separation`` is the minimum radial gap between consecutive radii,
    ``margin`` keeps the outer ring inside the ground plane and
    ``clearance`` keeps the patch smaller than the ground.
    """

    low: np.ndarray
    high: np.ndarray
    separation: float = 0.5
    margin: float = 1.0
    clearance: float = 1.0
    _limits: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        low = np.array(self.low, dtype=np.float64)
        high = np.array(self.high, dtype=np.float64)
        if low.shape != (N_GENES,) or high.shape != (N_GENES,):
            raise ValueError(f"bounds need {N_GENES} entries each")
        if np.any(~np.isfinite(low)) or np.any(~np.isfinite(high)):
            raise ValueError("bounds must be finite")
        low.setflags(write=False)
        high.setflags(write=False)
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)
        object.__setattr__(self, "_limits", self._derive_limits())

    @classmethod
    def default(cls, scale=DEFAULT_SCALE, offset_limit=DEFAULT_OFFSET_LIMIT, **kw):
        """Bounds at ``scale`` times the nominal design, offsets in ``±offset_limit``.

        The ground plane never exceeds the substrate it is printed on.
        """
        nom = NOMINAL.to_array()
        low, high = nom * scale[0], nom * scale[1]
        low[4:6] = -offset_limit
        high[4:6] = offset_limit
        high[6:8] = np.minimum(high[6:8], nom[6:8])
        low[6:8] = np.minimum(low[6:8], high[6:8])
        return cls(low, high, **kw)

    @classmethod
    def point(cls, genome: AntennaGenome, **kw):
        v = genome.to_array()
        return cls(v, v.copy(), **kw)

    def _derive_limits(self):
        lo, hi, s = self.low, self.high, self.separation
        if np.any(lo > hi + EPS):
            bad = [GENE_NAMES[i] for i in np.flatnonzero(lo > hi + EPS)]
            raise InfeasibleBoundsError(f"low exceeds high for {bad}")
        # smallest admissible value of each radius given the ones inside it
        r_min = [
            max(lo[0], lo[1] + s, lo[2] + 2 * s, lo[3] + 3 * s),
            max(lo[1], lo[2] + s, lo[3] + 2 * s),
            max(lo[2], lo[3] + s),
            lo[3],
        ]
        for k in range(4):
            if r_min[k] > hi[k] + EPS:
                raise InfeasibleBoundsError(
                    f"radius ordering with separation {s} cannot fit {GENE_NAMES[k]} bounds")
        v_min = _closest_to_zero(lo[4], hi[4])
        u_min = _closest_to_zero(lo[5], hi[5])
        wg_need = max(2 * (r_min[0] + v_min + self.margin), lo[8] + self.clearance)
        lg_need = max(2 * (r_min[0] + u_min + self.margin), lo[9] + self.clearance)
        if wg_need > hi[6] + EPS:
            raise InfeasibleBoundsError(f"ground width needs {wg_need:.4f} mm > {hi[6]:.4f}")
        if lg_need > hi[7] + EPS:
            raise InfeasibleBoundsError(f"ground length needs {lg_need:.4f} mm > {hi[7]:.4f}")
        return tuple(r_min), wg_need, lg_need


def _closest_to_zero(lo, hi):
    if lo <= 0.0 <= hi:
        return 0.0
    return min(abs(lo), abs(hi))


def _clamp(x, lo, hi):
    if x < lo - EPS:
        return lo
    if x > hi + EPS:
        return hi
    return x


def repair(v, bounds: ParameterBounds) -> np.ndarray:
    """Map any 10-vector onto the feasible set.

    Steps: clamp to the box; grow the ground just enough to host the
    smallest admissible ring; sort the radii descending and clamp each into
    the interval left by its neighbours and the ground; pull the ring
    centre in until the outer ring clears the ground edge; shrink the patch
    to fit on the ground.  Feasible vectors come back unchanged and the map
    is idempotent.
    """
    x = np.array(v, dtype=np.float64)
    if x.shape != (N_GENES,):
        raise ValueError(f"expected {N_GENES} genes, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("genome contains non-finite values")
    lo, hi = bounds.low, bounds.high
    s, margin, clear = bounds.separation, bounds.margin, bounds.clearance
    r_min, wg_need, lg_need = bounds._limits

    for i in range(N_GENES):
        x[i] = _clamp(x[i], lo[i], hi[i])

    x[6] = _clamp(x[6], wg_need, hi[6])
    x[7] = _clamp(x[7], lg_need, hi[7])
    wg, lg = x[6], x[7]

    radii = x[:4]
    if not (radii[0] >= radii[1] >= radii[2] >= radii[3]):
        radii = np.sort(radii)[::-1]
    v_min = _closest_to_zero(lo[4], hi[4])
    u_min = _closest_to_zero(lo[5], hi[5])
    cap = min(hi[0], wg / 2 - margin - v_min, lg / 2 - margin - u_min)
    radii[0] = _clamp(radii[0], r_min[0], cap)
    for k in range(1, 4):
        radii[k] = _clamp(radii[k], r_min[k], min(hi[k], radii[k - 1] - s))
    x[:4] = radii

    r1 = x[0]
    lim_v = max(wg / 2 - margin - r1, 0.0)
    lim_u = max(lg / 2 - margin - r1, 0.0)
    x[4] = _clamp(x[4], max(lo[4], -lim_v), min(hi[4], lim_v))
    x[5] = _clamp(x[5], max(lo[5], -lim_u), min(hi[5], lim_u))

    x[8] = _clamp(x[8], lo[8], min(hi[8], wg - clear))
    x[9] = _clamp(x[9], lo[9], min(hi[9], lg - clear))
    return x


def violations(v, bounds: ParameterBounds) -> list[str]:
    """Names of the genome invariants that ``v`` breaks (empty when feasible)."""
    x = np.asarray(v, dtype=np.float64)
    lo, hi = bounds.low, bounds.high
    s, margin, clear = bounds.separation, bounds.margin, bounds.clearance
    out = []
    for i, name in enumerate(GENE_NAMES):
        if not (lo[i] - EPS <= x[i] <= hi[i] + EPS):
            out.append(f"{name} outside bounds")
    R1, R2, R3, R4, Vr, Ur, Wg, Lg, Wp, Lp = x
    if R1 - R2 < s - EPS:
        out.append("R1 - R2 below separation")
    if R2 - R3 < s - EPS:
        out.append("R2 - R3 below separation")
    if R3 - R4 < s - EPS:
        out.append("R3 - R4 below separation")
    if abs(Vr) + R1 > Wg / 2 - margin + EPS:
        out.append("ring overhangs ground width")
    if abs(Ur) + R1 > Lg / 2 - margin + EPS:
        out.append("ring overhangs ground length")
    if Wp > Wg - clear + EPS:
        out.append("patch wider than ground")
    if Lp > Lg - clear + EPS:
        out.append("patch longer than ground")
    return out


def is_feasible(v, bounds: ParameterBounds) -> bool:
    return not violations(v, bounds)


def _rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def random_vector(low, high, rng) -> np.ndarray:
    low = np.asarray(low, dtype=np.float64)
    high = np.asarray(high, dtype=np.float64)
    return low + rng.random(low.shape[0]) * (high - low)


def random_genome(bounds: ParameterBounds, rng_seed) -> AntennaGenome:
    rng = _rng(rng_seed)
    return AntennaGenome.from_array(repair(random_vector(bounds.low, bounds.high, rng), bounds))


# --------------------------------------------------------------------------
# variation operators on raw vectors
# --------------------------------------------------------------------------


def sbx_crossover(p1, p2, low, high, rng, rate=0.9, eta=15.0):
    """Bounded simulated binary crossover.

    Each gene is recombined with probability 0.5 once the pair is selected
    for crossover (probability ``rate``).  Returns two new arrays.
    """
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    low = np.asarray(low, dtype=np.float64)
    high = np.asarray(high, dtype=np.float64)
    n = p1.shape[0]
    c1, c2 = p1.copy(), p2.copy()
    # fixed number of draws per call keeps the stream aligned across parents
    do_pair = rng.random() < rate
    u_gene = rng.random(n)
    u_beta = rng.random(n)
    u_swap = rng.random(n)
    if not do_pair:
        return c1, c2

    span = high - low
    mask = (u_gene <= 0.5) & (np.abs(p1 - p2) > 1e-14) & (span > 0)
    if not mask.any():
        return c1, c2
    y1 = np.minimum(p1, p2)[mask]
    y2 = np.maximum(p1, p2)[mask]
    lo, hi, u = low[mask], high[mask], u_beta[mask]
    d = y2 - y1
    expo = 1.0 / (eta + 1.0)

    def spread(beta):
        alpha = 2.0 - beta ** -(eta + 1.0)
        return np.where(u <= 1.0 / alpha,
                        (u * alpha) ** expo,
                        (1.0 / np.maximum(2.0 - u * alpha, 1e-300)) ** expo)

    bq1 = spread(1.0 + 2.0 * (y1 - lo) / d)
    bq2 = spread(1.0 + 2.0 * (hi - y2) / d)
    ch1 = np.clip(0.5 * ((y1 + y2) - bq1 * d), lo, hi)
    ch2 = np.clip(0.5 * ((y1 + y2) + bq2 * d), lo, hi)
    swap = u_swap[mask] < 0.5
    ch1, ch2 = np.where(swap, ch2, ch1), np.where(swap, ch1, ch2)
    c1[mask] = ch1
    c2[mask] = ch2
    return c1, c2


def polynomial_mutation(x, low, high, rng, rate=0.1, eta=20.0):
    """Bounded polynomial mutation, each gene mutated with probability ``rate``."""
    x = np.array(x, dtype=np.float64)
    low = np.asarray(low, dtype=np.float64)
    high = np.asarray(high, dtype=np.float64)
    n = x.shape[0]
    u_site = rng.random(n)
    u = rng.random(n)
    span = high - low
    mask = (u_site < rate) & (span > 0)
    if not mask.any():
        return x
    xm, lo, sp, r = x[mask], low[mask], span[mask], u[mask]
    d1 = (xm - lo) / sp
    d2 = (lo + sp - xm) / sp
    expo = 1.0 / (eta + 1.0)
    left = r < 0.5
    val_l = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - d1) ** (eta + 1.0)
    val_r = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - d2) ** (eta + 1.0)
    dq = np.where(left, val_l ** expo - 1.0, 1.0 - val_r ** expo)
    x[mask] = np.clip(xm + dq * sp, lo, lo + sp)
    return x


def crossover(p1: AntennaGenome, p2: AntennaGenome, rng, bounds: ParameterBounds | None = None,
              rate: float = 0.9, eta: float = 15.0) -> tuple[AntennaGenome, AntennaGenome]:
    bounds = bounds or ParameterBounds.default()
    c1, c2 = sbx_crossover(p1.to_array(), p2.to_array(), bounds.low, bounds.high,
                           _rng(rng), rate, eta)
    return (AntennaGenome.from_array(repair(c1, bounds)),
            AntennaGenome.from_array(repair(c2, bounds)))


def mutate(g: AntennaGenome, rng, bounds: ParameterBounds | None = None,
           rate: float = 1.0 / N_GENES, eta: float = 20.0) -> AntennaGenome:
    bounds = bounds or ParameterBounds.default()
    y = polynomial_mutation(g.to_array(), bounds.low, bounds.high, _rng(rng), rate, eta)
    return AntennaGenome.from_array(repair(y, bounds))
