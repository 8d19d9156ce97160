"""Spectral densities and the Bessel-series expansion of the bath correlation.

Everything here works in units with hbar = 1, so beta_hbar is the single
temperature parameter and coupling strengths are plain numbers.

The bath enters the hierarchy through three ingredients bundled in
:class:`BathExpansion`: the complex coefficients ``c_k`` of the expansion
alpha(t) = sum_k c_k J_k(Omega t), the banded matrix ``eta`` that closes the
basis-function derivatives, and the initial values ``phi_at_zero``.  The
exact alpha(t) by adaptive quadrature (:func:`alpha_quadrature`) is kept as
the reference the expansion is judged against; the propagation code never
calls it.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from typing import Union

import numpy as np
from scipy import integrate, sparse

from .bessel import bessel_j_ladder
from .errors import ConfigError, ExpansionWarning, NumericalError, QuadratureError

__all__ = [
    "INFINITE",
    "OhmicExponential",
    "OhmicCircular",
    "SpectralDensity",
    "BathSpec",
    "BathExpansion",
    "evaluate_density",
    "alpha_quadrature",
    "compute_coefficients",
    "alpha_reconstruct",
    "jacobi_anger_residual",
    "build_eta",
    "minimal_K",
    "tail_mass",
    "reconstruction_error",
    "write_expansion",
    "read_expansion",
]

# Zero-temperature tag for beta_hbar.  The coefficient formulas change
# discontinuously in this limit, so it is an explicit branch, not a large
# sentinel temperature.
INFINITE = math.inf

_QUAD_LIMIT = 400


@dataclasses.dataclass(frozen=True)
class OhmicExponential:
    """J(omega) = eta * omega * exp(-|omega|/gamma)."""

    eta: float
    gamma: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ConfigError("eta must be positive", section="bath", key="eta")
        if not self.gamma > 0:
            raise ConfigError("gamma must be positive", section="bath", key="gamma")

    def evaluate(self, omega):
        w = np.asarray(omega, dtype=float)
        return w * self.over_omega(w)

    def over_omega(self, omega):
        """J(omega)/omega, an even function regular at omega = 0."""
        w = np.asarray(omega, dtype=float)
        return self.eta * np.exp(-np.abs(w) / self.gamma)

    def header_items(self):
        return (("density", "ohmic_exponential"),
                ("eta", self.eta), ("gamma", self.gamma))


@dataclasses.dataclass(frozen=True)
class OhmicCircular:
    """J(omega) = zeta * omega * sqrt(1 - (omega/nu)^2), zero for |omega| > nu."""

    zeta: float
    nu: float

    def __post_init__(self):
        if not self.zeta > 0:
            raise ConfigError("zeta must be positive", section="bath", key="zeta")
        if not self.nu > 0:
            raise ConfigError("nu must be positive", section="bath", key="nu")

    def evaluate(self, omega):
        w = np.asarray(omega, dtype=float)
        return w * self.over_omega(w)

    def over_omega(self, omega):
        w = np.asarray(omega, dtype=float)
        out = np.zeros_like(w)
        inside = np.abs(w) <= self.nu
        out[inside] = self.zeta * np.sqrt(1.0 - (w[inside] / self.nu) ** 2)
        return out

    def header_items(self):
        return (("density", "ohmic_circular"),
                ("zeta", self.zeta), ("nu", self.nu))


SpectralDensity = Union[OhmicExponential, OhmicCircular]


def evaluate_density(density: SpectralDensity, omega):
    """Literal J(omega) of the given density (scalar in, scalar out)."""
    val = density.evaluate(omega)
    return float(val) if np.ndim(omega) == 0 else val


@dataclasses.dataclass(frozen=True)
class BathSpec:
    """A spectral density with temperature and expansion parameters.

    Parameters
    ----------
    density : SpectralDensity
    beta_hbar : float
        Inverse temperature times hbar; ``INFINITE`` selects the
        zero-temperature formulas.
    Omega : float
        Expansion cutoff frequency.  Must equal ``nu`` for the circular
        density (where the expansion is exact on the support) and must
        exceed ``gamma`` for the exponential one.
    K : int
        Number of Bessel basis functions, at least 2.
    """

    density: SpectralDensity
    beta_hbar: float
    Omega: float
    K: int

    def __post_init__(self):
        if not (self.beta_hbar > 0):
            raise ConfigError("beta_hbar must be positive or infinite",
                              section="bath", key="beta_hbar")
        if not self.Omega > 0:
            raise ConfigError("Omega must be positive", section="bath", key="Omega")
        if self.K < 2:
            raise ConfigError("K must be at least 2", section="bath", key="K")
        if isinstance(self.density, OhmicCircular):
            if not math.isclose(self.Omega, self.density.nu, rel_tol=1e-12):
                raise ConfigError(
                    f"circular density requires Omega = nu, got Omega={self.Omega} "
                    f"nu={self.density.nu}", section="bath", key="Omega")
        elif isinstance(self.density, OhmicExponential):
            if not self.Omega > self.density.gamma:
                raise ConfigError(
                    f"exponential density requires Omega > gamma, got "
                    f"Omega={self.Omega} gamma={self.density.gamma}",
                    section="bath", key="Omega")

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta_hbar)


@dataclasses.dataclass(frozen=True, eq=False)
class BathExpansion:
    """The (Omega, K, c_k, eta, phi_k(0)) bundle consumed by the hierarchy."""

    Omega: float
    K: int
    c: np.ndarray            # complex, shape (K,)
    eta: sparse.csr_matrix   # real, K x K, banded
    phi_at_zero: np.ndarray  # (1, 0, 0, ...)


def _bose_ratio(y):
    """y / (1 - exp(-y)), with the removable singularity at y = 0 filled in.

    Equals y times the Bose occupation shifted by one; the series branch
    keeps full accuracy where the direct form loses digits.
    """
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    small = np.abs(y) < 1e-4
    ys = y[small]
    out[small] = 1.0 + ys / 2.0 + ys * ys / 12.0
    yb = y[~small]
    with np.errstate(over="ignore"):
        out[~small] = yb / (-np.expm1(-yb))
    return out


def _quad_checked(f, a, b, **kw):
    res = integrate.quad(f, a, b, full_output=1, limit=_QUAD_LIMIT, **kw)
    val, abserr = res[0], res[1]
    if len(res) > 3 and abserr > 1e-6 * max(1.0, abs(val)):
        raise QuadratureError(str(res[3]), residual=abserr)
    return val


def alpha_quadrature(spec: BathSpec, t: float) -> complex:
    """Bath correlation alpha(t) by adaptive quadrature (the reference path).

    Finite temperature evaluates
    Omega * int_{-1}^{1} dx J(Omega x) e^{-i Omega x t} / (1 - e^{-beta_hbar Omega x}),
    written with the regular integrand (J/omega) * y/(1-e^{-y}) / beta_hbar so
    the x = 0 point needs no special node.  Zero temperature evaluates
    Omega * int_0^1 dx J(Omega x) e^{-i Omega x t}.

    The oscillatory factor is handled by QUADPACK's cos/sin weights, which
    stay accurate for large Omega*t.

    Raises
    ------
    QuadratureError
        If the adaptive rule fails to converge; carries the residual estimate.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    Om = spec.Omega
    dens = spec.density
    if spec.zero_temperature:
        def f(x):
            return float(dens.evaluate(Om * x))
        re = _quad_checked(f, 0.0, 1.0, weight="cos", wvar=Om * t)
        im = _quad_checked(f, 0.0, 1.0, weight="sin", wvar=Om * t)
        return Om * (re - 1j * im)

    bh = spec.beta_hbar

    def f(x):
        xv = np.atleast_1d(x)
        return float(dens.over_omega(Om * xv)[0] * _bose_ratio(bh * Om * xv)[0] / bh)

    re = im = 0.0
    for a, b in ((-1.0, 0.0), (0.0, 1.0)):
        re += _quad_checked(f, a, b, weight="cos", wvar=Om * t)
        im += _quad_checked(f, a, b, weight="sin", wvar=Om * t)
    return Om * (re - 1j * im)


def build_eta(K: int, Omega: float) -> sparse.csr_matrix:
    """Banded K x K matrix closing the Bessel derivative recursion.

    Nonzeros: (0,1) = -Omega; (k,k-1) = Omega/2 for k >= 1;
    (k,k+1) = -Omega/2 for 1 <= k <= K-2.  The last row keeps only its
    sub-diagonal entry, which is where the K-term truncation enters.
    """
    if K < 2:
        raise ConfigError("K must be at least 2", section="bath", key="K")
    mat = sparse.lil_matrix((K, K))
    mat[0, 1] = -Omega
    for k in range(1, K):
        mat[k, k - 1] = Omega / 2.0
        if k <= K - 2:
            mat[k, k + 1] = -Omega / 2.0
    return mat.tocsr()


def _chebyshev_t(k: int, x):
    # cos(k arccos x) is exact on [-1, 1]; quadrature nodes stay inside.
    return np.cos(k * np.arccos(np.clip(x, -1.0, 1.0)))


def compute_coefficients(spec: BathSpec, *, rel_tol: float = 1e-6) -> BathExpansion:
    """Expansion coefficients c_k plus the eta matrix and initial values.

    Finite temperature:
        c_k = Omega (2 - delta_{0k}) (-i)^k
              * int_{-1}^{1} dx T_k(x) J(Omega x) / (1 - e^{-beta_hbar Omega x}).
    Zero temperature: even k carry a sgn(x) weight, odd k do not, each with
    an Omega/2 prefactor; the odd-k coefficients are then identical to their
    finite-temperature values (the imaginary part of alpha carries no
    occupation factor).

    Integrals use adaptive Gauss-Kronrod on [-1, 0] and [0, 1]; T_k is
    evaluated as cos(k arccos x).

    Warns with :class:`ExpansionWarning` if the t = 0 reconstruction differs
    from the quadrature value by more than ``rel_tol`` relative.
    """
    Om, K, dens = spec.Omega, spec.K, spec.density
    c = np.zeros(K, dtype=complex)
    if spec.zero_temperature:
        for k in range(K):
            def f(x, k=k):
                return _chebyshev_t(k, x) * float(dens.evaluate(Om * x))
            pos = _quad_checked(f, 0.0, 1.0)
            neg = _quad_checked(f, -1.0, 0.0)
            val = 0.5 * (pos - neg) if k % 2 == 0 else 0.5 * (pos + neg)
            c[k] = (2.0 if k else 1.0) * (-1j) ** k * Om * val
    else:
        bh = spec.beta_hbar
        for k in range(K):
            def f(x, k=k):
                xv = np.atleast_1d(x)
                return float(_chebyshev_t(k, x)
                             * dens.over_omega(Om * xv)[0]
                             * _bose_ratio(bh * Om * xv)[0] / bh)
            val = _quad_checked(f, -1.0, 0.0) + _quad_checked(f, 0.0, 1.0)
            c[k] = (2.0 if k else 1.0) * (-1j) ** k * Om * val

    alpha0 = alpha_quadrature(spec, 0.0)
    scale = max(abs(alpha0), 1e-300)
    if abs(c[0] - alpha0) / scale > rel_tol:
        warnings.warn(
            f"expansion reproduces alpha(0) to {abs(c[0] - alpha0) / scale:.2e} "
            f"relative, above the {rel_tol:.1e} tolerance; consider larger K",
            ExpansionWarning, stacklevel=2)

    phi0 = np.zeros(K)
    phi0[0] = 1.0
    return BathExpansion(Omega=Om, K=K, c=c, eta=build_eta(K, Om),
                         phi_at_zero=phi0)


def alpha_reconstruct(expansion: BathExpansion, t):
    """Sum_k c_k J_k(Omega t) for scalar or array t."""
    z = expansion.Omega * np.asarray(t, dtype=float)
    ladder = bessel_j_ladder(expansion.K, z)
    out = np.tensordot(expansion.c, ladder, axes=(0, 0))
    return complex(out) if np.ndim(t) == 0 else out


def jacobi_anger_residual(x: float, t: float, K: int, Omega: float) -> float:
    """How well K terms of the plane-wave expansion reproduce e^{-i Omega x t}.

    Returns |e^{-i Omega x t} - sum_{k<K} (2 - delta_{0k}) (-i)^k T_k(x) J_k(Omega t)|.
    The residual is the direct diagnostic for choosing K at a given horizon.
    """
    if not -1.0 <= x <= 1.0:
        raise ValueError("x must lie in [-1, 1]")
    z = Omega * t
    ladder = bessel_j_ladder(K, z)
    ks = np.arange(K)
    terms = np.where(ks == 0, 1.0, 2.0) * (-1j) ** ks \
        * _chebyshev_t(ks, x) * ladder
    return float(abs(np.exp(-1j * z * x) - terms.sum()))


def minimal_K(Omega: float, horizon: float, *, tol: float = 1e-6,
              K_max: int = 512) -> int:
    """Smallest K whose plane-wave residual stays below tol up to the horizon.

    Probes x = cos(j pi / 8) for j = 0..8 and 32 times in (0, horizon]; the
    residual is maximal at |x| = 1, so the grid is generous.

    Raises
    ------
    NumericalError
        If no K <= K_max reaches the tolerance.
    """
    if horizon <= 0:
        return 2
    xs = np.cos(np.linspace(0.0, np.pi, 9))
    ts = np.linspace(0.0, horizon, 33)[1:]
    z = Omega * ts
    ladder = bessel_j_ladder(K_max, z)                     # [K_max, nt]
    ks = np.arange(K_max)
    pref = np.where(ks == 0, 1.0, 2.0) * (-1j) ** ks       # [K_max]
    cheb = np.cos(ks[:, None] * np.arccos(xs)[None, :])    # [K_max, nx]
    # partial[k, ix, it] = sum of the first k+1 terms
    terms = pref[:, None, None] * cheb[:, :, None] * ladder[:, None, :]
    partial = np.cumsum(terms, axis=0)
    target = np.exp(-1j * z[None, :] * xs[:, None])        # [nx, nt]
    resid = np.abs(target[None, :, :] - partial).max(axis=(1, 2))
    ok = np.nonzero(resid < tol)[0]
    if ok.size == 0:
        raise NumericalError(
            f"no K <= {K_max} reaches residual {tol:.1e} at horizon "
            f"{horizon} (best {resid.min():.2e})")
    return int(ok[0]) + 1


def tail_mass(spec: BathSpec) -> float:
    """Fraction of the occupation-weighted density lying beyond |omega| = Omega.

    The expansion integrates only over [-Omega, Omega]; this reports how much
    weight that window misses.  Exactly zero for the circular density.  A
    diagnostic, not an error bound.
    """
    dens = spec.density
    if isinstance(dens, OhmicCircular):
        return 0.0
    if spec.zero_temperature:
        def w(omega):
            return float(dens.evaluate(omega))
        total = _quad_checked(w, 0.0, np.inf)
        tail = _quad_checked(w, spec.Omega, np.inf)
        return tail / total
    bh = spec.beta_hbar

    def w(omega):
        ov = np.atleast_1d(omega)
        return float(dens.over_omega(ov)[0] * _bose_ratio(bh * ov)[0] / bh)

    total = (_quad_checked(w, -np.inf, 0.0) + _quad_checked(w, 0.0, np.inf))
    tail = (_quad_checked(w, -np.inf, -spec.Omega)
            + _quad_checked(w, spec.Omega, np.inf))
    return tail / total


def reconstruction_error(spec: BathSpec, expansion: BathExpansion,
                         t_grid) -> float:
    """Max relative deviation of the expansion from quadrature over a grid."""
    ts = np.asarray(t_grid, dtype=float)
    exact = np.array([alpha_quadrature(spec, t) for t in ts])
    approx = alpha_reconstruct(expansion, ts)
    return float(np.abs(exact - approx).max() / np.abs(exact).max())


# ---------------------------------------------------------------------------
# Plain-text expansion files: a header block of '# key = value' lines followed
# by one 'k re_c im_c' row per coefficient.  Floats are written with repr so
# a read-back is bit-identical.

def write_expansion(path, spec: BathSpec, expansion: BathExpansion) -> None:
    lines = []
    for key, val in spec.density.header_items():
        lines.append(f"# {key} = {val!r}" if isinstance(val, float)
                     else f"# {key} = {val}")
    bh = "inf" if spec.zero_temperature else repr(float(spec.beta_hbar))
    lines.append(f"# beta_hbar = {bh}")
    lines.append(f"# Omega = {float(spec.Omega)!r}")
    lines.append(f"# K = {spec.K}")
    lines.append("# columns: k re_c im_c")
    for k in range(expansion.K):
        lines.append(f"{k} {float(expansion.c[k].real)!r} "
                     f"{float(expansion.c[k].imag)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_expansion(path):
    """Read a file written by :func:`write_expansion`.

    Returns
    -------
    (BathSpec, BathExpansion)
    """
    header = {}
    rows = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    header[key.strip()] = val.strip()
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ConfigError(f"malformed coefficient row: {line!r}")
            rows.append((int(parts[0]), float(parts[1]), float(parts[2])))
    try:
        variant = header["density"]
        if variant == "ohmic_exponential":
            density = OhmicExponential(eta=float(header["eta"]),
                                       gamma=float(header["gamma"]))
        elif variant == "ohmic_circular":
            density = OhmicCircular(zeta=float(header["zeta"]),
                                    nu=float(header["nu"]))
        else:
            raise ConfigError(f"unknown density variant {variant!r}",
                              section="bath", key="density")
        beta_hbar = INFINITE if header["beta_hbar"] == "inf" \
            else float(header["beta_hbar"])
        Omega = float(header["Omega"])
        K = int(header["K"])
    except KeyError as exc:
        raise ConfigError(f"expansion file missing header field {exc}") from exc
    if len(rows) != K:
        raise ConfigError(f"expected {K} coefficient rows, found {len(rows)}")
    c = np.zeros(K, dtype=complex)
    for k, re, im in rows:
        if not 0 <= k < K:
            raise ConfigError(f"coefficient index {k} out of range")
        c[k] = re + 1j * im
    phi0 = np.zeros(K)
    phi0[0] = 1.0
    spec = BathSpec(density=density, beta_hbar=beta_hbar, Omega=Omega, K=K)
    expansion = BathExpansion(Omega=Omega, K=K, c=c,
                              eta=build_eta(K, Omega), phi_at_zero=phi0)
    return spec, expansion
