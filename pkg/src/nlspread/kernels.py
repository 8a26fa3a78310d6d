"""Dispersal kernels: even, nonnegative, unit-mass weight functions on the line.

A kernel carries its analytic density J, the tail function
Jtail(z) = integral of J over [z, infinity), a sampled tail table on a
geometric mesh (used for decay classification and diagnostics), and a
cutoff radius beyond which the tail mass is below a configured budget.

Families: uniform(radius), laplace(scale), gaussian(sigma),
powerlaw(gamma, core_width), and table(x, values) for sampled kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

INFINITE = math.inf

TAIL_MESH_RATIO = 1.05     # geometric mesh ratio for the sampled tail table
DEFAULT_EPS_TAIL = 1e-8

_FAMILIES = ("uniform", "laplace", "gaussian", "powerlaw", "table")


class KernelError(ValueError):
    """Invalid kernel description or parameter."""


class NonNormalizable(KernelError):
    """The requested density has no finite mass (powerlaw gamma <= 1)."""


class NegativeTableValue(KernelError):
    """Table kernels must have nonnegative sample values."""


class InvalidLambda(KernelError):
    """Exponential-moment rate must be positive and finite."""


@dataclass(frozen=True)
class KernelSpec:
    """Declarative kernel description; build a usable kernel via make_kernel."""

    family: str
    radius: float | None = None
    scale: float | None = None
    sigma: float | None = None
    gamma: float | None = None
    core_width: float | None = None
    x: tuple[float, ...] | None = None
    values: tuple[float, ...] | None = None

    @classmethod
    def uniform(cls, radius: float) -> "KernelSpec":
        return cls(family="uniform", radius=float(radius))

    @classmethod
    def laplace(cls, scale: float) -> "KernelSpec":
        return cls(family="laplace", scale=float(scale))

    @classmethod
    def gaussian(cls, sigma: float) -> "KernelSpec":
        return cls(family="gaussian", sigma=float(sigma))

    @classmethod
    def powerlaw(cls, gamma: float, core_width: float = 1.0) -> "KernelSpec":
        return cls(family="powerlaw", gamma=float(gamma), core_width=float(core_width))

    @classmethod
    def table(cls, x, values) -> "KernelSpec":
        return cls(family="table", x=tuple(float(v) for v in x),
                   values=tuple(float(v) for v in values))

    def validate(self) -> None:
        if self.family not in _FAMILIES:
            raise KernelError(f"unknown kernel family {self.family!r}")
        if self.family == "uniform":
            if self.radius is None or not (self.radius > 0) or not math.isfinite(self.radius):
                raise KernelError("uniform kernel needs radius > 0")
        elif self.family == "laplace":
            if self.scale is None or not (self.scale > 0) or not math.isfinite(self.scale):
                raise KernelError("laplace kernel needs scale > 0")
        elif self.family == "gaussian":
            if self.sigma is None or not (self.sigma > 0) or not math.isfinite(self.sigma):
                raise KernelError("gaussian kernel needs sigma > 0")
        elif self.family == "powerlaw":
            if self.gamma is None or not math.isfinite(self.gamma):
                raise KernelError("powerlaw kernel needs a finite gamma")
            if self.gamma <= 1.0:
                raise NonNormalizable(
                    f"powerlaw tail exponent gamma={self.gamma} has infinite mass (needs gamma > 1)")
            w = self.core_width if self.core_width is not None else 1.0
            if not (w > 0) or not math.isfinite(w):
                raise KernelError("powerlaw kernel needs core_width > 0")
        elif self.family == "table":
            if self.x is None or self.values is None or len(self.x) != len(self.values):
                raise KernelError("table kernel needs matching x and values arrays")
            if len(self.x) < 3:
                raise KernelError("table kernel needs at least 3 sample points")
            xs = np.asarray(self.x, dtype=float)
            vs = np.asarray(self.values, dtype=float)
            if not np.all(np.isfinite(xs)) or not np.all(np.isfinite(vs)):
                raise KernelError("table kernel samples must be finite")
            if np.any(np.diff(xs) <= 0):
                raise KernelError("table kernel x grid must be strictly increasing")
            if np.any(vs < 0):
                raise NegativeTableValue("table kernel values must be nonnegative")
            span = max(abs(xs[0]), abs(xs[-1]))
            # evenness: the sample grid must mirror about 0 and values must match
            if abs(xs[0] + xs[-1]) > 1e-12 * span:
                raise KernelError("table kernel grid must be symmetric about 0")
            if np.max(np.abs(xs + xs[::-1])) > 1e-12 * span:
                raise KernelError("table kernel grid must be symmetric about 0")
            vmax = float(np.max(vs))
            if vmax <= 0:
                raise KernelError("table kernel must have positive mass")
            if np.max(np.abs(vs - vs[::-1])) > 1e-9 * vmax:
                raise KernelError("table kernel values must be even in x")
            mid = np.interp(0.0, xs, vs)
            if mid <= 0:
                raise KernelError("table kernel must be positive at x = 0")


@dataclass(frozen=True)
class Kernel:
    """Normalized kernel with tail table and cutoff radius. Treat as immutable."""

    spec: KernelSpec
    eps_tail: float
    normalizer: float
    core_scale: float
    cutoff_radius: float
    compact_support: float | None      # exact support radius, or None
    tail_z: np.ndarray = field(repr=False)
    tail_values: np.ndarray = field(repr=False)
    _table_x: np.ndarray | None = field(default=None, repr=False)
    _table_v: np.ndarray | None = field(default=None, repr=False)
    _table_tail_x: np.ndarray | None = field(default=None, repr=False)
    _table_tail_v: np.ndarray | None = field(default=None, repr=False)

    # ------------------------------------------------------------------
    def density(self, x) -> np.ndarray:
        """Evaluate J(x); accepts scalars or arrays."""
        xs = np.abs(np.asarray(x, dtype=float))
        fam = self.spec.family
        if fam == "uniform":
            return np.where(xs <= self.spec.radius, self.normalizer, 0.0)
        if fam == "laplace":
            return self.normalizer * np.exp(-xs / self.spec.scale)
        if fam == "gaussian":
            s = self.spec.sigma
            return self.normalizer * np.exp(-0.5 * (xs / s) ** 2)
        if fam == "powerlaw":
            w = self.core_scale
            return self.normalizer * (w + xs) ** (-self.spec.gamma)
        # table: linear interpolation on |x|, zero outside the sampled range
        return self.normalizer * np.interp(xs, self._table_x, self._table_v,
                                           left=0.0, right=0.0)

    def tail(self, z) -> np.ndarray:
        """Tail mass Jtail(z) = integral of J over [z, inf); z >= 0."""
        zs = np.asarray(z, dtype=float)
        if np.any(zs < 0):
            raise KernelError("tail mass is defined for z >= 0")
        fam = self.spec.family
        if fam == "uniform":
            r = self.spec.radius
            return np.clip(r - zs, 0.0, None) / (2.0 * r)
        if fam == "laplace":
            return 0.5 * np.exp(-zs / self.spec.scale)
        if fam == "gaussian":
            return 0.5 * special.erfc(zs / (self.spec.sigma * math.sqrt(2.0)))
        if fam == "powerlaw":
            w = self.core_scale
            return 0.5 * (w / (w + zs)) ** (self.spec.gamma - 1.0)
        return np.interp(zs, self._table_tail_x, self._table_tail_v,
                         left=self._table_tail_v[0], right=0.0)


# ----------------------------------------------------------------------
# construction

def _core_scale(spec: KernelSpec) -> float:
    if spec.family == "uniform":
        return spec.radius
    if spec.family == "laplace":
        return spec.scale
    if spec.family == "gaussian":
        return spec.sigma
    if spec.family == "powerlaw":
        return spec.core_width if spec.core_width is not None else 1.0
    # table: half width at half maximum of the sampled shape
    xs = np.asarray(spec.x)
    vs = np.asarray(spec.values)
    peak = float(np.max(vs))
    above = xs[vs >= 0.5 * peak]
    half = float(np.max(np.abs(above))) if above.size else float(xs[-1])
    return max(half, 1e-12)


def make_kernel(spec: KernelSpec, eps_tail: float = DEFAULT_EPS_TAIL) -> Kernel:
    """Build a normalized kernel with its tail table and cutoff radius."""
    spec.validate()
    if not (0.0 < eps_tail <= 1e-4):
        raise KernelError("eps_tail must lie in (0, 1e-4]")

    fam = spec.family
    table_x = table_v = tail_x = tail_v = None
    compact = None
    if fam == "uniform":
        normalizer = 1.0 / (2.0 * spec.radius)
        compact = spec.radius
    elif fam == "laplace":
        normalizer = 1.0 / (2.0 * spec.scale)
    elif fam == "gaussian":
        normalizer = 1.0 / (spec.sigma * math.sqrt(2.0 * math.pi))
    elif fam == "powerlaw":
        w = spec.core_width if spec.core_width is not None else 1.0
        normalizer = 0.5 * (spec.gamma - 1.0) * w ** (spec.gamma - 1.0)
    else:
        xs_full = np.asarray(spec.x, dtype=float)
        vs_full = np.asarray(spec.values, dtype=float)
        mass = float(np.trapezoid(vs_full, xs_full))
        if mass <= 0:
            raise NonNormalizable("table kernel has zero mass")
        normalizer = 1.0 / mass
        hx = xs_full[xs_full >= 0]
        hv = vs_full[xs_full >= 0]
        if hx[0] > 0:           # even-length grid: inject the x = 0 sample
            v0 = float(np.interp(0.0, xs_full, vs_full))
            hx = np.concatenate([[0.0], hx])
            hv = np.concatenate([[v0], hv])
        compact = float(hx[-1])
        # cumulative tail on the sample grid (exact for the interpolated density)
        seg = 0.5 * (hv[1:] + hv[:-1]) * np.diff(hx)
        ctail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]]) * normalizer
        table_x = hx
        table_v = hv
        tail_x = hx.copy()
        tail_v = ctail

    core = _core_scale(spec)

    kern = Kernel(
        spec=spec, eps_tail=float(eps_tail), normalizer=normalizer,
        core_scale=core, cutoff_radius=0.0, compact_support=compact,
        tail_z=np.empty(0), tail_values=np.empty(0),
        _table_x=table_x, _table_v=table_v,
        _table_tail_x=tail_x, _table_tail_v=tail_v,
    )

    # geometric tail mesh from a fraction of the core scale out to the cutoff
    z0 = core / 16.0
    mesh = [0.0, z0]
    z = z0
    limit = compact if compact is not None else math.inf
    while True:
        t = float(kern.tail(min(z, limit)))
        if (t < eps_tail and compact is None) or z >= limit:
            break
        z *= TAIL_MESH_RATIO
        mesh.append(min(z, limit))
        if len(mesh) > 20000:
            raise KernelError("tail mesh budget exhausted; eps_tail too small for this family")
    mesh_arr = np.asarray(mesh)
    tail_vals = np.asarray(kern.tail(mesh_arr), dtype=float)

    if compact is not None:
        cutoff = compact
    else:
        below = np.nonzero(tail_vals < eps_tail)[0]
        cutoff = float(mesh_arr[below[0]]) if below.size else float(mesh_arr[-1])

    mesh_arr.setflags(write=False)
    tail_vals.setflags(write=False)
    object.__setattr__(kern, "tail_z", mesh_arr)
    object.__setattr__(kern, "tail_values", tail_vals)
    object.__setattr__(kern, "cutoff_radius", cutoff)

    # construction sanity: the mass inside [-R, R] must equal 1 minus the tail budget
    inside = 1.0 - 2.0 * float(kern.tail(cutoff))
    if not (0.0 < inside <= 1.0 + 1e-12):
        raise NonNormalizable("kernel mass inside the cutoff is not positive")
    return kern


# ----------------------------------------------------------------------
# moments

def tail_mass(kernel: Kernel, z) -> float | np.ndarray:
    """Integral of J over [z, inf); exact 0 beyond compact support."""
    out = kernel.tail(z)
    if np.isscalar(z) or np.asarray(z).ndim == 0:
        return float(out)
    return out


def first_moment(kernel: Kernel) -> float:
    """Integral of x*J(x) over [0, inf); INFINITE when the tail is too heavy."""
    spec = kernel.spec
    fam = spec.family
    if fam == "uniform":
        return spec.radius / 4.0
    if fam == "laplace":
        return spec.scale / 2.0
    if fam == "gaussian":
        return spec.sigma / math.sqrt(2.0 * math.pi)
    if fam == "powerlaw":
        if spec.gamma <= 2.0:
            return INFINITE
        w = kernel.core_scale
        return w / (2.0 * (spec.gamma - 2.0))
    # table: declared divergent when the sampled tail decays like a
    # polynomial with exponent <= 2, otherwise integrate the samples
    g, _ = _tail_regression(kernel)
    if g is not None and g <= 2.0:
        return INFINITE
    xs = kernel._table_x
    vs = kernel._table_v * kernel.normalizer
    return float(np.trapezoid(xs * vs, xs))


def exp_moment(kernel: Kernel, lam: float) -> float:
    """Integral of exp(lam*x)*J(x) over [0, inf); INFINITE when divergent."""
    if not (lam > 0) or not math.isfinite(lam):
        raise InvalidLambda("exponential-moment rate must satisfy 0 < lam < inf")
    spec = kernel.spec
    fam = spec.family
    if fam == "uniform":
        r = spec.radius
        return (math.expm1(lam * r)) / (2.0 * r * lam)
    if fam == "laplace":
        s = spec.scale
        if lam >= 1.0 / s:
            return INFINITE
        return 1.0 / (2.0 * (1.0 - lam * s))
    if fam == "gaussian":
        s = spec.sigma
        return 0.5 * math.exp(0.5 * (lam * s) ** 2) * (1.0 + math.erf(lam * s / math.sqrt(2.0)))
    if fam == "powerlaw":
        return INFINITE
    g, _ = _tail_regression(kernel)
    if g is not None:
        return INFINITE          # polynomial tail defeats every exponential rate
    xs = kernel._table_x
    vs = kernel._table_v * kernel.normalizer
    return float(np.trapezoid(np.exp(lam * xs) * vs, xs))


def two_sided_exp_moment(kernel: Kernel, lam: float) -> float:
    """Integral of exp(lam*x)*J(x) over the whole line (even in lam)."""
    lam = abs(float(lam))
    if lam == 0.0:
        return 1.0
    spec = kernel.spec
    fam = spec.family
    if fam == "uniform":
        r = spec.radius
        return math.sinh(lam * r) / (lam * r)
    if fam == "laplace":
        s = spec.scale
        if lam >= 1.0 / s:
            return INFINITE
        return 1.0 / (1.0 - (lam * s) ** 2)
    if fam == "gaussian":
        return math.exp(0.5 * (lam * spec.sigma) ** 2)
    if fam == "powerlaw":
        return INFINITE
    g, _ = _tail_regression(kernel)
    if g is not None:
        return INFINITE
    xs = kernel._table_x
    vs = kernel._table_v * kernel.normalizer
    return float(np.trapezoid((np.exp(lam * xs) + np.exp(-lam * xs)) * vs, xs))


# ----------------------------------------------------------------------
# classification

@dataclass(frozen=True)
class ClassReport:
    """Decay classification: moment finiteness plus measured tail exponent."""

    finite_first_moment: bool
    finite_exponential_moment: bool
    gamma_hat: float | None
    gamma_stderr: float | None


def _tail_regression(kernel: Kernel) -> tuple[float | None, float | None]:
    """Log-log slope of the tail table over its outer decade.

    Returns (gamma_hat, stderr), or (None, None) when the decay is
    super-polynomial (slope keeps steepening) or the support is compact.
    """
    z = kernel.tail_z
    t = kernel.tail_values
    pos = (z > 0) & (t > 0)
    z, t = z[pos], t[pos]
    if z.size < 8:
        return None, None
    if kernel.spec.family == "table":
        # sampled kernels truncate at the grid edge where the tail collapses;
        # read the decay law from a decade ending well inside the support
        z_hi = 0.1 * float(z[-1])
    else:
        z_hi = float(z[-1])
        if kernel.compact_support is not None:
            # the tail of a compactly supported family hits zero at the edge;
            # there is no polynomial decay law to report
            return None, None
    decade = (z >= z_hi / 10.0) & (z <= z_hi)
    z, t = z[decade], t[decade]
    if z.size < 8:
        return None, None
    lz, lt = np.log(z), np.log(t)
    half = z.size // 2
    s_inner = np.polyfit(lz[:half], lt[:half], 1)[0]
    s_outer = np.polyfit(lz[half:], lt[half:], 1)[0]
    if abs(s_outer) > abs(s_inner) + max(0.5, 0.25 * abs(s_inner)):
        return None, None        # steepening slope: faster than any power
    coef, cov = np.polyfit(lz, lt, 1, cov=True)
    slope = float(coef[0])
    stderr = float(math.sqrt(max(cov[0, 0], 0.0)))
    return 1.0 - slope, stderr


def classify(kernel: Kernel) -> ClassReport:
    """Report moment finiteness and the measured polynomial tail exponent."""
    fam = kernel.spec.family
    gamma_hat, gamma_se = _tail_regression(kernel)
    if fam in ("uniform", "gaussian"):
        fm, em = True, True
    elif fam == "laplace":
        fm, em = True, True
    elif fam == "powerlaw":
        fm = kernel.spec.gamma > 2.0
        em = False
    else:
        fm = not (gamma_hat is not None and gamma_hat <= 2.0)
        em = gamma_hat is None
    return ClassReport(finite_first_moment=fm, finite_exponential_moment=em,
                       gamma_hat=gamma_hat, gamma_stderr=gamma_se)


# ----------------------------------------------------------------------
# JSON interface

def kernel_from_json(obj: dict, eps_tail: float = DEFAULT_EPS_TAIL) -> Kernel:
    """Build a kernel from a config mapping like {"family": "laplace", "scale": 1.0}."""
    if not isinstance(obj, dict) or "family" not in obj:
        raise KernelError("kernel config must be a mapping with a 'family' key")
    fam = obj["family"]
    extra = {k: v for k, v in obj.items() if k != "family"}
    try:
        if fam == "uniform":
            spec = KernelSpec.uniform(extra.pop("radius"))
        elif fam == "laplace":
            spec = KernelSpec.laplace(extra.pop("scale"))
        elif fam == "gaussian":
            spec = KernelSpec.gaussian(extra.pop("sigma"))
        elif fam == "powerlaw":
            spec = KernelSpec.powerlaw(extra.pop("gamma"), extra.pop("core_width", 1.0))
        elif fam == "table":
            spec = KernelSpec.table(extra.pop("x"), extra.pop("values"))
        else:
            raise KernelError(f"unknown kernel family {fam!r}")
    except KeyError as exc:
        raise KernelError(f"kernel family {fam!r} is missing parameter {exc.args[0]!r}") from None
    if extra:
        raise KernelError(f"unexpected kernel parameters for {fam!r}: {sorted(extra)}")
    return make_kernel(spec, eps_tail=eps_tail)
