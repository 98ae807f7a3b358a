"""Levy process symbols A(xi) for the closed-form catalog.

The symbol of a Levy process with characteristics (b, sigma, F) w.r.t. a
truncation h is

    A(xi) = 1/2 <xi, sigma xi> + i<xi, b>
            - int ( e^{-i<xi,y>} - 1 + i<xi,h(y)> ) F(dy),

equivalently A(xi) = -theta(-i xi) for the cumulant theta, so that
mu_hat_t(xi) = e^{-t A(-xi)} (see conventions.py).  Each family below
implements A in closed form; quadrature-backed symbols built from a Levy
density live in measures.py.

Complex powers (M - iu)^Y, (G + iu)^Y in the CGMY exponent use the principal
branch; both bases have strictly positive real part for G, M > 0, so no
branch cut is crossed.  The Student-t Bessel factor is evaluated through the
scaled form K_v(z) e^z so the log subtraction stays finite out to |u| ~ 1e6.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import kve, loggamma

from .errors import EvalOverflow, InvalidParams

_SANITY_POINTS = 64
_HERMITIAN_TOL = 1e-10
_REAL_PART_TOL = 1e-10


class Truncation(enum.Enum):
    """Drift convention h of the Levy-Khintchine formula."""

    IDENTITY = "identity"       # h(x) = x (special semimartingale)
    UNIT_BALL = "unit_ball"     # h(x) = x * 1_{|x|<1}


# --------------------------------------------------------------------------
# family parameter records
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BrownianParams:
    """sigma is the covariance matrix (scalar accepted for d=1)."""

    sigma: tuple | float = 1.0
    b: tuple | float = 0.0


@dataclass(frozen=True)
class NIGParams:
    alpha: float
    beta: tuple | float = 0.0
    delta: float = 1.0
    mu: tuple | float = 0.0
    Delta: tuple | None = None  # defaults to identity


@dataclass(frozen=True)
class CauchyParams:
    c: float = 1.0
    gamma: tuple | float = 0.0


@dataclass(frozen=True)
class StudentTParams:
    """Degrees of freedom f; the Bessel order is delta = f/4 unless given."""

    f: float
    delta: Optional[float] = None
    mu: float = 0.0


@dataclass(frozen=True)
class CGMYParams:
    C: float
    G: float
    M: float
    Y: float
    zero_drift: bool = False  # True forces triplet (0, 0, F); default is the
    # compensated drift b = int x F(dx) for Y < 1 and (0, 0, F) for Y >= 1


@dataclass(frozen=True)
class Stable1dParams:
    alpha: float
    c: float = 1.0
    beta: float = 0.0
    tau: float = 0.0


FamilyParams = (
    BrownianParams | NIGParams | CauchyParams | StudentTParams | CGMYParams | Stable1dParams
)


def _as_vector(v, d: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.shape == (1,) and d > 1:
        arr = np.full(d, arr[0])
    if arr.shape != (d,):
        raise InvalidParams(f"{name} must be a length-{d} vector, got shape {arr.shape}")
    return arr


def _as_matrix(m, d: int, name: str) -> np.ndarray:
    if m is None:
        return np.eye(d)
    arr = np.asarray(m, dtype=float)
    if arr.ndim == 0:
        arr = arr * np.eye(d)
    if arr.shape != (d, d):
        raise InvalidParams(f"{name} must be {d}x{d}, got shape {arr.shape}")
    return arr


def _check_symmetric_psd(m: np.ndarray, name: str, tol: float = 1e-12) -> None:
    if not np.allclose(m, m.T, atol=tol, rtol=0.0):
        raise InvalidParams(f"{name} must be symmetric within {tol:g} elementwise")
    eigs = np.linalg.eigvalsh(0.5 * (m + m.T))
    if eigs.min() < -tol:
        raise InvalidParams(f"{name} must be positive semidefinite (min eigenvalue {eigs.min():g})")


# --------------------------------------------------------------------------
# triplet
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LevyTriplet:
    """Characteristics (b, sigma, F) with an explicit truncation convention.

    `levy_density` is any object exposing a vectorized density ``f`` and an
    optional ``finite_variation`` flag (see measures.LevyDensity); it is only
    inspected, never imported, to keep this module density-free.
    """

    dimension: int
    b: np.ndarray
    sigma: np.ndarray
    levy_density: object | None = None
    truncation: Truncation = Truncation.IDENTITY

    def __post_init__(self):
        d = self.dimension
        if d < 1:
            raise InvalidParams("dimension must be a positive integer")
        object.__setattr__(self, "b", _as_vector(self.b, d, "b"))
        object.__setattr__(self, "sigma", _as_matrix(self.sigma, d, "sigma"))
        _check_symmetric_psd(self.sigma, "sigma")
        if self.truncation is Truncation.IDENTITY and self.levy_density is not None:
            if not _density_has_finite_compensator(self.levy_density):
                raise InvalidParams(
                    "truncation h(x)=x requires int_{|x|>1} |x| f(x) dx < infinity"
                )


def _density_has_finite_compensator(density) -> bool:
    # With h(x)=x the compensator needs the *large*-jump first moment. Trust a
    # declared tag for the small-jump side; probe the tail numerically.
    xs = np.geomspace(1.0, 1e4, 200)
    try:
        vals = xs * (np.abs(density.f(xs)) + np.abs(density.f(-xs)))
    except Exception:
        return True  # opaque density: cannot refute
    partial = np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(xs))
    if partial[-1] == 0.0:
        return True
    tail_growth = partial[-1] - partial[len(partial) // 2]
    return bool(tail_growth <= 0.05 * partial[-1] + 1e-30)


# --------------------------------------------------------------------------
# the Symbol object
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Symbol:
    """Evaluable map xi -> A(xi) in C, immutable after construction.

    `fn` maps an (n, d) float array to an (n,) complex array.  Evaluations
    are pure; the only lazily cached attribute is the frozen quadratic-bound
    constant, which is value-deterministic.
    """

    d: int
    family: str
    params: object | None
    fn: Callable[[np.ndarray], np.ndarray]
    eval_mode: str = "closed-form"  # or "quadrature"
    triplet: LevyTriplet | None = None
    density: object | None = None  # Levy density backing this symbol, if any

    def __call__(self, xi):
        arr = np.asarray(xi, dtype=float)
        scalar = arr.ndim == 0 or (self.d > 1 and arr.ndim == 1)
        if self.d == 1:
            pts = arr.reshape(-1, 1)
        else:
            pts = arr.reshape(-1, self.d)
        if not np.all(np.isfinite(pts)):
            raise InvalidParams("xi must be finite")
        out = np.asarray(self.fn(pts), dtype=complex)
        if not np.all(np.isfinite(out)):
            raise EvalOverflow(f"{self.family} symbol overflowed at |xi| ~ {np.abs(pts).max():g}")
        if scalar:
            return complex(out[0])
        return out.reshape(arr.shape if self.d == 1 else arr.shape[:-1])

    def char_fn(self, t: float, xi):
        """mu_hat_t(xi) = e^{-t A(-xi)}; |result| <= 1 since Re A >= 0."""
        if t <= 0:
            raise InvalidParams("t must be positive")
        return np.exp(-t * self(np.negative(np.asarray(xi, dtype=float))))

    @cached_property
    def quadratic_bound_constant(self) -> float:
        """C with |A(xi)| <= C (1+|xi|)^2, fitted once on |xi| <= 1e6 and frozen."""
        r = np.concatenate(([0.0], np.geomspace(1e-3, 1e6, 512)))
        ratios = []
        for e in _unit_directions(self.d, 8):
            xi = np.outer(r, e)
            vals = self(xi if self.d > 1 else xi[:, 0])
            ratios.append(np.abs(vals) / (1.0 + r) ** 2)
        return float(1.01 * np.max(ratios))

    def __add__(self, other: "Symbol") -> "Symbol":
        if not isinstance(other, Symbol) or other.d != self.d:
            return NotImplemented
        f1, f2 = self.fn, other.fn
        return Symbol(
            d=self.d,
            family=f"sum({self.family},{other.family})",
            params=None,
            fn=lambda pts: f1(pts) + f2(pts),
            eval_mode="quadrature" if "quadrature" in (self.eval_mode, other.eval_mode)
            else "closed-form",
        )


def _unit_directions(d: int, n: int) -> np.ndarray:
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        ang = 2.0 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(ang), np.sin(ang)])
    rng = np.random.default_rng(1729)
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def symbol_from_callable(fn, d: int = 1, family: str = "custom",
                         eval_mode: str = "closed-form", **kw) -> Symbol:
    """Wrap a vectorized map (n,d)->complex (n,) as a Symbol (no sanity check)."""
    return Symbol(d=d, family=family, params=None, fn=fn, eval_mode=eval_mode, **kw)


# --------------------------------------------------------------------------
# closed-form evaluators
# --------------------------------------------------------------------------

def _brownian_fn(sigma: np.ndarray, b: np.ndarray):
    def fn(pts):
        quad = 0.5 * np.einsum("ni,ij,nj->n", pts, sigma, pts)
        return quad + 1j * (pts @ b)
    return fn


def _nig_fn(alpha, beta, delta, mu, Delta):
    gamma0 = math.sqrt(alpha**2 - float(beta @ Delta @ beta))

    def fn(pts):
        # z = alpha^2 - <beta - iu, Delta (beta - iu)>, non-Hermitian bilinear sum
        uDu = np.einsum("ni,ij,nj->n", pts, Delta, pts)
        bDu = pts @ (Delta @ beta)
        z_re = gamma0**2 + uDu
        z_im = 2.0 * bDu
        mod = np.hypot(z_re, z_im)
        # half-angle square root (the paper's formula): principal since Re z > 0
        sq = np.sqrt(0.5 * (mod + z_re)) + 1j * np.sign(z_im) * np.sqrt(
            np.maximum(0.5 * (mod - z_re), 0.0)
        )
        return delta * (sq - gamma0) + 1j * (pts @ mu)
    return fn


def _cauchy_fn(c, gamma_vec):
    def fn(pts):
        return c * np.linalg.norm(pts, axis=1) + 1j * (pts @ gamma_vec)
    return fn


def _student_t_fn(dd: float, mu: float):
    # A(u) = -log K_dd(2 sqrt(dd)|u|) - dd log|u| - c0 + i mu u, with c0 fixed
    # by A(0) = 0; evaluated via kve = K e^z to stay finite for |u| <= 1e6.
    c0 = math.log(2.0) - float(loggamma(dd)) + 0.5 * dd * math.log(dd)

    def fn(pts):
        u = pts[:, 0]
        au = np.abs(u)
        out = np.zeros(len(u), dtype=complex)
        nz = au > 1e-150
        z = 2.0 * math.sqrt(dd) * au[nz]
        log_k = np.log(kve(dd, z)) - z
        out[nz] = -log_k - dd * np.log(au[nz]) - c0
        return out + 1j * mu * u
    return fn


def _cgmy_fn(C, G, M, Y, zero_drift: bool):
    # A(u) = -C Gamma(-Y) [ (M+iu)^Y - M^Y + (G-iu)^Y - G^Y ]          (b = int xF, Y<1)
    # minus i*u*C Gamma(1-Y)(M^{Y-1} - G^{Y-1}) for the (0,0,F) triplet.
    # Y = 1 uses the analytic limit; Y = 0 is variance gamma.
    def fn(pts):
        u = pts[:, 0]
        iu = 1j * u
        if Y == 1.0:
            a = -C * ((M + iu) * np.log((M + iu) / M) + (G - iu) * np.log((G - iu) / G))
            return a
        if Y == 0.0:
            a = C * (np.log((M + iu) / M) + np.log((G - iu) / G))
        else:
            g = gamma_fn(-Y)
            # constants via numpy's complex power so A(0) cancels bitwise
            m_y, g_y = np.complex128(M) ** Y, np.complex128(G) ** Y
            a = -C * g * ((M + iu) ** Y - m_y + (G - iu) ** Y - g_y)
        if zero_drift:
            a = a - iu * C * gamma_fn(1.0 - Y) * (M ** (Y - 1.0) - G ** (Y - 1.0))
        return a
    return fn


def _stable1d_fn(alpha, c, beta, tau):
    def fn(pts):
        u = pts[:, 0]
        au = np.abs(u)
        out = np.zeros(len(u), dtype=complex)
        nz = au > 0
        if alpha == 1.0:
            # A(u) = c|u| (1 - i beta (2/pi) sgn(u) log|u|) + i tau u
            out[nz] = c * au[nz] * (
                1.0 - 1j * beta * (2.0 / np.pi) * np.sign(u[nz]) * np.log(au[nz])
            )
        else:
            out[nz] = c * au[nz] ** alpha
        return out + 1j * tau * u
    return fn


# --------------------------------------------------------------------------
# constructors
# --------------------------------------------------------------------------

def make_symbol(params: FamilyParams, d: int | None = None) -> Symbol:
    """Build the closed-form symbol for a catalog family.

    Raises InvalidParams naming the violated constraint; the returned symbol
    has been checked on a fixed 64-point sanity grid (hermitian symmetry,
    nonnegative real part, finiteness).
    """
    if isinstance(params, BrownianParams):
        b = np.atleast_1d(np.asarray(params.b, dtype=float))
        d = d or len(b)
        b = _as_vector(params.b, d, "b")
        sigma = _as_matrix(params.sigma, d, "sigma")
        _check_symmetric_psd(sigma, "sigma")
        sym = Symbol(d, "brownian", params, _brownian_fn(sigma, b),
                     triplet=LevyTriplet(d, b, sigma))
    elif isinstance(params, NIGParams):
        beta = np.atleast_1d(np.asarray(params.beta, dtype=float))
        d = d or len(beta)
        beta = _as_vector(params.beta, d, "beta")
        mu = _as_vector(params.mu, d, "mu")
        Delta = _as_matrix(params.Delta, d, "Delta")
        _check_symmetric_psd(Delta, "Delta")
        if np.linalg.eigvalsh(Delta).min() <= 0:
            raise InvalidParams("Delta must be positive definite")
        if params.delta <= 0:
            raise InvalidParams("delta must be positive")
        if params.alpha**2 <= float(beta @ Delta @ beta):
            raise InvalidParams("NIG requires alpha^2 > <beta, Delta beta>")
        dens = None
        if d == 1 and float(Delta[0, 0]) == 1.0:
            from .measures import nig_density
            dens = nig_density(params.alpha, float(beta[0]), params.delta)
        sym = Symbol(d, "nig", params, _nig_fn(params.alpha, beta, params.delta, mu, Delta),
                     density=dens)
    elif isinstance(params, CauchyParams):
        g = np.atleast_1d(np.asarray(params.gamma, dtype=float))
        d = d or len(g)
        g = _as_vector(params.gamma, d, "gamma")
        if params.c <= 0:
            raise InvalidParams("Cauchy requires c > 0")
        sym = Symbol(d, "cauchy", params, _cauchy_fn(params.c, g))
    elif isinstance(params, StudentTParams):
        if params.f <= 0:
            raise InvalidParams("student-t requires f > 0")
        dd = params.f / 4.0 if params.delta is None else params.delta
        if dd <= 0:
            raise InvalidParams("student-t requires delta > 0")
        sym = Symbol(1, "student_t", params, _student_t_fn(dd, params.mu))
    elif isinstance(params, CGMYParams):
        if min(params.C, params.G, params.M) <= 0:
            raise InvalidParams("CGMY requires C, G, M > 0")
        if not 0.0 <= params.Y < 2.0:
            raise InvalidParams("CGMY requires 0 <= Y < 2")
        zero = params.zero_drift or params.Y >= 1.0
        from .measures import cgmy_density
        sym = Symbol(1, "vg" if params.Y == 0.0 else "cgmy", params,
                     _cgmy_fn(params.C, params.G, params.M, params.Y, zero),
                     density=cgmy_density(params.C, params.G, params.M, params.Y))
    elif isinstance(params, Stable1dParams):
        return stable_symbol_1d(params)
    else:
        raise InvalidParams(f"unknown parameter record {type(params).__name__}")
    _sanity_check(sym)
    return sym


def stable_symbol_1d(params: Stable1dParams) -> Symbol:
    """Strictly alpha-stable symbol c|u|^alpha + i tau u for alpha != 1, and
    the canonical 1-stable form c|u|(1 - i beta (2/pi) sgn(u) log|u|) + i tau u.

    The skewed form for alpha != 1 is not provided (only the strict case
    beta = 0 has an explicit symbol here); requesting it raises InvalidParams.
    """
    a = params.alpha
    if not 0.0 < a <= 2.0:
        raise InvalidParams("stable requires alpha in (0, 2]")
    if params.c <= 0:
        raise InvalidParams("stable requires c > 0")
    if not -1.0 <= params.beta <= 1.0:
        raise InvalidParams("stable requires beta in [-1, 1]")
    if a != 1.0 and params.beta != 0.0:
        raise InvalidParams("skewed stable symbol is only available for alpha = 1")
    sym = Symbol(1, "stable1d", params, _stable1d_fn(a, params.c, params.beta, params.tau))
    _sanity_check(sym)
    return sym


def eval(symbol: Symbol, xi):  # noqa: A001 - spec operation name
    """A(xi); deterministic, same input gives bit-identical output."""
    return symbol(xi)


def char_fn(symbol: Symbol, t: float, xi):
    return symbol.char_fn(t, xi)


def check_semistable_scaling(symbol: Symbol, a: float, b: float, c, grid) -> float:
    """max over the grid of |a A(u) - A(b u) - i<c,u>| (0 certifies scaling)."""
    if a <= 0 or b <= 0:
        raise InvalidParams("scaling requires a > 0 and b > 0")
    pts = np.asarray(grid, dtype=float)
    if pts.size == 0:
        raise InvalidParams("grid must be nonempty")
    if symbol.d == 1:
        pts = pts.reshape(-1)
        cu = np.asarray(c, dtype=float) * pts
        res = a * symbol(pts) - symbol(b * pts) - 1j * cu
    else:
        pts = pts.reshape(-1, symbol.d)
        cu = pts @ _as_vector(c, symbol.d, "c")
        res = a * symbol(pts) - symbol(b * pts) - 1j * cu
    return float(np.abs(res).max())


def _sanity_grid(d: int) -> np.ndarray:
    rng = np.random.default_rng(97 + d)
    pts = rng.uniform(-50.0, 50.0, size=(_SANITY_POINTS - 4, d))
    extra = np.zeros((4, d))
    extra[1, 0], extra[2, 0], extra[3, 0] = 1.0, -1e3, 1e5
    return np.vstack([extra, pts])


def _sanity_check(sym: Symbol) -> None:
    pts = _sanity_grid(sym.d)
    vals = sym(pts if sym.d > 1 else pts[:, 0])
    mirror = sym(-pts if sym.d > 1 else -pts[:, 0])
    herm = np.abs(vals - np.conj(mirror))
    if np.any(herm > _HERMITIAN_TOL * (1.0 + np.abs(vals))):
        raise InvalidParams(f"{sym.family}: hermitian symmetry A(xi)=conj(A(-xi)) violated")
    r2 = 1.0 + np.sum(pts**2, axis=1)
    if np.any(vals.real < -_REAL_PART_TOL * r2):
        raise InvalidParams(f"{sym.family}: negative real part detected")


# --------------------------------------------------------------------------
# flat key-value serialization (CLI config surface)
# --------------------------------------------------------------------------

def _fmt_vec(v) -> str:
    return ",".join(repr(float(x)) for x in np.atleast_1d(np.asarray(v, dtype=float)))


def _fmt_mat(m) -> str:
    arr = np.atleast_2d(np.asarray(m, dtype=float))
    return ";".join(",".join(repr(float(x)) for x in row) for row in arr)


def _parse_vec(s):
    if isinstance(s, (int, float)):
        return float(s)
    vals = [float(x) for x in str(s).split(",")]
    return vals[0] if len(vals) == 1 else tuple(vals)


def _parse_mat(s):
    if isinstance(s, (int, float)):
        return float(s)
    rows = [tuple(float(x) for x in row.split(",")) for row in str(s).split(";")]
    return rows[0][0] if len(rows) == 1 and len(rows[0]) == 1 else tuple(rows)


def params_to_record(params: FamilyParams) -> dict:
    """Flat text record; exact keys per family are the dataclass field names."""
    if isinstance(params, BrownianParams):
        return {"family": "brownian", "sigma": _fmt_mat(params.sigma), "b": _fmt_vec(params.b)}
    if isinstance(params, NIGParams):
        rec = {"family": "nig", "alpha": params.alpha, "beta": _fmt_vec(params.beta),
               "delta": params.delta, "mu": _fmt_vec(params.mu)}
        if params.Delta is not None:
            rec["Delta"] = _fmt_mat(params.Delta)
        return rec
    if isinstance(params, CauchyParams):
        return {"family": "cauchy", "c": params.c, "gamma": _fmt_vec(params.gamma)}
    if isinstance(params, StudentTParams):
        rec = {"family": "student_t", "f": params.f, "mu": params.mu}
        if params.delta is not None:
            rec["delta"] = params.delta
        return rec
    if isinstance(params, CGMYParams):
        return {"family": "cgmy", "C": params.C, "G": params.G, "M": params.M,
                "Y": params.Y, "zero_drift": params.zero_drift}
    if isinstance(params, Stable1dParams):
        return {"family": "stable1d", "alpha": params.alpha, "c": params.c,
                "beta": params.beta, "tau": params.tau}
    raise InvalidParams(f"cannot serialize {type(params).__name__}")


def params_from_record(rec: dict) -> FamilyParams:
    r = dict(rec)
    fam = str(r.pop("family", "")).lower().replace("-", "_")
    try:
        if fam == "brownian":
            return BrownianParams(sigma=_parse_mat(r.get("sigma", 1.0)),
                                  b=_parse_vec(r.get("b", 0.0)))
        if fam == "nig":
            return NIGParams(alpha=float(r["alpha"]), beta=_parse_vec(r.get("beta", 0.0)),
                             delta=float(r.get("delta", 1.0)), mu=_parse_vec(r.get("mu", 0.0)),
                             Delta=_parse_mat(r["Delta"]) if "Delta" in r else None)
        if fam == "cauchy":
            return CauchyParams(c=float(r.get("c", 1.0)), gamma=_parse_vec(r.get("gamma", 0.0)))
        if fam == "student_t":
            return StudentTParams(f=float(r["f"]),
                                  delta=float(r["delta"]) if "delta" in r else None,
                                  mu=float(r.get("mu", 0.0)))
        if fam in ("cgmy", "vg"):
            zd = r.get("zero_drift", False)
            if isinstance(zd, str):
                zd = zd.strip().lower() in ("1", "true", "yes")
            return CGMYParams(C=float(r["C"]), G=float(r["G"]), M=float(r["M"]),
                              Y=float(r.get("Y", 0.0)), zero_drift=bool(zd))
        if fam == "stable1d":
            return Stable1dParams(alpha=float(r["alpha"]), c=float(r.get("c", 1.0)),
                                  beta=float(r.get("beta", 0.0)), tau=float(r.get("tau", 0.0)))
    except KeyError as exc:
        raise InvalidParams(f"family {fam!r} record missing key {exc}") from exc
    raise InvalidParams(f"unknown family {fam!r}")
