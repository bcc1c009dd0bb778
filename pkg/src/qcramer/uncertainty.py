"""Position/momentum uncertainty relations for grid-sampled wave functions.

Fourier convention: psi_hat(xi) = int psi(x) exp(-2 pi i x.xi) dx, unitary on
L^2, under which a Gaussian saturates E[x^2] E[xi^2] = 1/(16 pi^2).  Other
conventions rescale every bound below by powers of 2 pi.

The transform is the DFT read as a Riemann sum: on x_j = a + j dx and
xi_m = b + m dxi with dxi = 1/(N dx),

    psi_hat(xi_m) = dx exp(-2 pi i a xi_m) sum_j psi_j exp(-2 pi i j dx b) exp(-2 pi i j m / N),

which is exact for band-limited, well-contained psi and satisfies discrete
Parseval identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from .density import GridDensity, read_grid
from .inequalities import lutwak_anchors
from .norms import Lp, conjugate_exponent
from .qgaussian import InadmissibleError, QGaussianParams, as_density
from .quadrature import DEFAULT, QuadratureConfig
from .report import SATURATION_TOL, InequalityReport

__all__ = [
    "AliasingError",
    "WaveFunction",
    "fourier",
    "inverse_fourier",
    "bandwidth_check",
    "gauss_psi",
    "qgauss_psi",
    "bump_psi",
    "two_lobe_psi",
    "grid_psi",
    "escort_moment",
    "info_gen",
    "check_uncertainty_general",
    "check_uncertainty_euclidean",
    "heisenberg_check",
    "heisenberg_bound",
    "modulus_gradient_gap",
    "DEFAULT_POINTS",
]

NORM_TOL = 1e-8
PARSEVAL_TOL = 1e-10
ALIAS_TOL = 1e-8
EDGE_FRACTION = 1.0 / 32
DEFAULT_POINTS = {1: 1 << 15, 2: 256, 3: 64}
# grid width in units of sigma (psi ~ e^-42 at the edge for n > 1); in 1-D the
# wider box also refines the frequency step 1/width
WIDTHS = {1: 208.0, 2: 26.0, 3: 26.0}
NOISE_FLOOR = 1e-13  # amplitudes below this fraction of the peak are round-off

HEISENBERG = 1.0 / (16 * np.pi**2)


def heisenberg_bound() -> float:
    return HEISENBERG


class AliasingError(ValueError):
    """The wave function is not contained in the grid in position or frequency."""


def _step(a: np.ndarray) -> float:
    """Grid spacing from the end points; a[1] - a[0] loses digits far from the origin."""
    return float((a[-1] - a[0]) / (a.size - 1))


@dataclass
class WaveFunction:
    """Complex amplitudes on a uniform tensor grid.

    ``domain`` is ``"x"`` or ``"xi"``; ``partner`` holds the origins of the
    other domain's axes so that a transform pair maps grids onto each other.
    """

    axes: list
    values: np.ndarray
    domain: str = "x"
    name: str = "psi"
    partner: tuple | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axes = [np.asarray(a, float) for a in self.axes]
        self.values = np.asarray(self.values, complex)
        if self.values.shape != tuple(a.size for a in self.axes):
            raise ValueError("values shape does not match the axes")
        for a in self.axes:
            d = np.diff(a)
            if a.size < 4 or not np.allclose(d, d[0], rtol=1e-9, atol=0):
                raise ValueError("wave-function axes must be uniform")

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def steps(self) -> np.ndarray:
        return np.array([_step(a) for a in self.axes])

    @property
    def cell(self) -> float:
        return float(np.prod(self.steps))

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm2(self) -> float:
        return float(np.sum(self.density) * self.cell)

    def points(self) -> np.ndarray:
        grids = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def normalized(self) -> "WaveFunction":
        return WaveFunction(self.axes, self.values / np.sqrt(self.norm2()), self.domain, self.name, self.partner,
                            dict(self.meta))

    def scaled(self, c: float) -> "WaveFunction":
        """psi_c(x) = c^(n/2) psi(c x), realised by relabelling the grid."""
        return WaveFunction([a / c for a in self.axes], self.values * c ** (self.dim / 2), self.domain,
                            f"{self.name}@{c:g}", None, dict(self.meta))

    def as_grid_density(self) -> GridDensity:
        return GridDensity(self.axes, self.density, name=f"|{self.name}|^2", check=False)


def _dft(values, axes, origins_out, sign):
    out = values
    new_axes = []
    for ax, (a_in, b0) in enumerate(zip(axes, origins_out)):
        N = a_in.size
        dx = _step(a_in)
        a0 = a_in[0]
        dxi = 1.0 / (N * dx)
        xi = b0 + dxi * np.arange(N)
        j = np.arange(N)
        shape = [1] * out.ndim
        shape[ax] = N
        # phases reduced mod 1 in extended precision: the raw arguments reach
        # ~N^2/4 cycles, and float64 rounding there would be a visible noise floor
        L = np.longdouble
        t_pre = np.mod(j.astype(L) * (L(dx) * L(b0)), L(1)).astype(float)
        t_post = np.mod(L(a0) * (L(b0) + L(dxi) * j.astype(L)), L(1)).astype(float)
        pre = np.exp(sign * 2j * np.pi * t_pre).reshape(shape)
        post = (dx * np.exp(sign * 2j * np.pi * t_post)).reshape(shape)
        f = np.fft.fft if sign < 0 else (lambda v, axis: np.fft.ifft(v, axis=axis) * N)
        out = f(out * pre, axis=ax) * post
        new_axes.append(xi)
    return out, new_axes


def _centred_origin(a: np.ndarray) -> float:
    N = a.size
    d = 1.0 / (N * _step(a))
    return -(N // 2) * d


def fourier(psi: WaveFunction, check: bool = True) -> WaveFunction:
    """psi_hat on the frequency grid xi_m = -(N//2)/(N dx) + m/(N dx)."""
    if psi.domain != "x":
        raise ValueError("fourier expects a position-domain wave function")
    origins = psi.partner or tuple(_centred_origin(a) for a in psi.axes)
    vals, axes = _dft(psi.values, psi.axes, origins, -1)
    out = WaveFunction(axes, vals, "xi", f"F[{psi.name}]", tuple(a[0] for a in psi.axes), dict(psi.meta))
    if check:
        n0, n1 = psi.norm2(), out.norm2()
        if abs(n1 - n0) > PARSEVAL_TOL * max(1.0, n0):
            raise AliasingError(f"Parseval check failed: {n0!r} vs {n1!r}")
        bandwidth_check(psi, out)
    return out


def inverse_fourier(phi: WaveFunction) -> WaveFunction:
    if phi.domain != "xi":
        raise ValueError("inverse_fourier expects a frequency-domain wave function")
    origins = phi.partner or tuple(_centred_origin(a) for a in phi.axes)
    vals, axes = _dft(phi.values, phi.axes, origins, +1)
    return WaveFunction(axes, vals, "x", f"Finv[{phi.name}]", tuple(a[0] for a in phi.axes), dict(phi.meta))


def _edge_mass(w: WaveFunction) -> float:
    rho = w.density
    total = rho.sum()
    inner = rho
    for ax, a in enumerate(w.axes):
        m = max(1, int(round(EDGE_FRACTION * a.size)))
        inner = np.take(inner, np.arange(m, a.size - m), axis=ax)
    return float((total - inner.sum()) / total)


def bandwidth_check(psi: WaveFunction, psi_hat: WaveFunction | None = None, tol: float = ALIAS_TOL) -> None:
    """Mass of |psi|^2 and |psi_hat|^2 in the outer 1/32 of each axis must be below ``tol``."""
    psi_hat = psi_hat if psi_hat is not None else fourier(psi, check=False)
    for w, label in ((psi, "position"), (psi_hat, "frequency")):
        e = _edge_mass(w)
        if e > tol:
            raise AliasingError(f"{label}-domain mass near the grid edge is {e:.3g} > {tol:g}; "
                                "widen the grid or refine it")


# ------------------------------------------------------------- builtins


def _grid(n: int, half: float, points: int | None, centre=None):
    N = points or DEFAULT_POINTS.get(n, 32)
    centre = np.zeros(n) if centre is None else np.asarray(centre, float)
    # N points with spacing 2 half / N, the origin on a grid point
    d = 2.0 * half / N
    return [c + d * (np.arange(N) - N // 2) for c in centre]


def _from_function(fn, n, half, points, name, meta, normalize=True):
    axes = _grid(n, half, points)
    grids = np.meshgrid(*axes, indexing="ij")
    x = np.stack([g.ravel() for g in grids], axis=-1)
    vals = fn(x).reshape(tuple(a.size for a in axes))
    w = WaveFunction(axes, vals, "x", name, meta=meta)
    return w.normalized() if normalize else w


def gauss_psi(sigma: float = 1.0, n: int = 1, mu: float = 0.0, chirp: float = 0.0, points: int | None = None,
              extent: float | None = None) -> WaveFunction:
    """(2 pi sigma^2)^(-n/4) exp(-|x - mu|^2 / (4 sigma^2) + i chirp |x|^2); |psi|^2 has variance sigma^2."""
    half = 0.5 * (extent or WIDTHS.get(n, 26.0)) * sigma + abs(mu)

    def fn(x):
        d2 = ((x - mu) ** 2).sum(-1)
        return np.exp(-d2 / (4 * sigma**2) + 1j * chirp * (x**2).sum(-1))

    return _from_function(fn, n, half, points, f"gauss(sigma={sigma:g})",
                          {"kind": "gauss", "sigma": sigma, "n": n, "mu": mu, "chirp": chirp})


def qgauss_psi(q: float, gamma: float = 1.0, n: int = 1, points: int | None = None,
               extent: float | None = None) -> WaveFunction:
    """psi = G^(1/k) with G the alpha = 2 Euclidean q-Gaussian and k = 2 / (2q - 1).

    Then |psi|^k / M_{k/2}[|psi|^2] = G, the extremal case of the Euclidean relations.
    """
    k = 2.0 / (2.0 * q - 1.0)
    p = QGaussianParams(q, 2.0, gamma, n, Lp(2))
    G = as_density(p)
    half = 0.5 * (extent or WIDTHS.get(n, 26.0)) * p.scale
    if np.isfinite(p.r_max):
        half = max(half, 1.5 * p.r_max)

    def fn(x):
        return G.pdf(x) ** (1.0 / k) + 0j

    meta = {"kind": "qgauss", "q": q, "gamma": gamma, "n": n}
    N = points or DEFAULT_POINTS.get(n, 32)
    # power-law tails for q < 1: widen (and refine) until the edge mass is negligible
    for _ in range(8):
        w = _from_function(fn, n, half, N, f"qgauss(q={q:g})", meta)
        if _edge_mass(w) < 0.01 * ALIAS_TOL or n > 1 and N >= 1024 or N >= 1 << 18:
            return w
        half *= 2.0
        N *= 2
    return w


def bump_psi(width: float = 1.0, n: int = 1, points: int | None = None) -> WaveFunction:
    """prod_i exp(-1 / (1 - (x_i/width)^2)) on the cube, zero outside."""

    def fn(x):
        t = np.clip(np.abs(x) / width, 0.0, 1.0)
        with np.errstate(divide="ignore"):
            v = np.where(t < 1, np.exp(-1.0 / np.maximum(1e-300, 1.0 - t * t)), 0.0)
        return np.prod(v, axis=-1) + 0j

    return _from_function(fn, n, 1.25 * width, points, f"bump(width={width:g})",
                          {"kind": "bump", "width": width, "n": n})


def two_lobe_psi(sigma: float = 1.0, sep: float = 4.0, n: int = 1, points: int | None = None,
                 extent: float | None = None) -> WaveFunction:
    """Two Gaussian lobes at +-sep/2 along the first axis."""
    off = np.zeros(n)
    off[0] = sep / 2

    def fn(x):
        a = np.exp(-((x - off) ** 2).sum(-1) / (4 * sigma**2))
        b = np.exp(-((x + off) ** 2).sum(-1) / (4 * sigma**2))
        return a + b + 0j

    return _from_function(fn, n, 0.5 * (extent or WIDTHS.get(n, 26.0)) * sigma + sep / 2, points, f"two-lobe(sep={sep:g})",
                          {"kind": "two-lobe", "sigma": sigma, "sep": sep, "n": n})


def grid_psi(path, normalize: bool = False) -> WaveFunction:
    """Wave function from a complex grid file (interleaved real/imag values)."""
    axes, vals = read_grid(path, complex_values=True)
    w = WaveFunction(axes, vals, "x", name=str(path), meta={"kind": "grid", "path": str(path)})
    if normalize:
        return w.normalized()
    if abs(w.norm2() - 1.0) > NORM_TOL:
        raise ValueError(f"wave function in {path} has squared norm {w.norm2()!r}, not 1")
    return w


# ------------------------------------------------------------- moments


def _weights(w: WaveFunction) -> np.ndarray:
    ws = []
    for a in w.axes:
        d = _step(a)
        t = np.full(a.size, d)
        t[0] = t[-1] = d / 2
        ws.append(t)
    grids = np.meshgrid(*ws, indexing="ij")
    return np.prod(np.stack(grids, -1), -1)


def _clean_density(w: WaveFunction) -> np.ndarray:
    """|psi|^2 with round-off level values set to zero.

    Fractional powers (order < 1) would otherwise lift the FFT noise floor
    into the escort moments; high frequency moments multiply it further.
    """
    rho = w.density
    return np.where(rho < (NOISE_FLOOR**2) * rho.max(), 0.0, rho)


def info_gen(w: WaveFunction, order: float) -> float:
    """M_order[|psi|^2] = int |psi|^(2 order)."""
    return float(np.sum(_weights(w) * _clean_density(w) ** order))


def escort_moment(w: WaveFunction, order: float, power: float, lp: float = 2.0, centred: bool = False) -> float:
    """E_order[||x||_lp^power] under the order-``order`` escort of |psi|^2."""
    wt = _weights(w) * _clean_density(w) ** order
    x = w.points()
    if centred:
        x = x - (wt.ravel()[:, None] * x).sum(0) / wt.sum()
    r = Lp(lp).evaluate(x)
    num = float(np.sum(wt.ravel() * r**power))
    if w.dim == 1 and not centred:
        num -= _kink_correction(w, order, power)
    return num / float(np.sum(wt))


def _kink_correction(w: WaveFunction, order: float, power: float) -> float:
    """Leading trapezoid error for |x|^power g(x) with a node at x = 0.

    The generalised Euler-Maclaurin (Navot) expansion gives
    2 zeta(-power) h^(power+1) g(0); it vanishes for even integer powers.
    """
    a = w.axes[0]
    h = _step(a)
    i = int(np.argmin(np.abs(a)))
    if abs(a[i]) > 1e-9 * h or i in (0, a.size - 1):
        return 0.0
    g0 = _clean_density(w)[i] ** order
    return float(2.0 * zeta(-power) * h ** (power + 1.0) * g0)


def _bb_constant(alpha: float, beta: float) -> float:
    return beta ** (1.0 / beta) / alpha ** (1.0 / alpha)


def _admissible(q, alpha, n):
    if not q > max((n - 1) / n, n / (n + alpha)):
        raise InadmissibleError(f"q = {q} not admissible for n = {n}, alpha = {alpha}")


def check_uncertainty_general(psi: WaveFunction, alpha: float, q: float, cfg: QuadratureConfig = DEFAULT,
                              saturation_tol: float = SATURATION_TOL):
    """The (alpha, beta) uncertainty pair for 1 < alpha <= 2 with escort moments.

    First:  M_{a/2}[|psi_hat|^2]^(1/a) M_{k/2}^(1/a) / M_{kq/2} E_{k/2}[||x||_a^a]^(1/a) E_{a/2}[||xi||_b^b]^(1/b)
            >= n / (2 pi k q) C^(-n/(2b))
    Second: M_{a/2}[|psi_hat|^2]^(1/(a lam)) / M_{k/2}^(1/(k lam)) E_{k/2}[||x||_a^a]^(1/a) E_{a/2}[||xi||_b^b]^(1/(b lam))
            >= (2 pi k)^(-1/lam) C^(-n/(2 b lam)) m_a[G]^(1/a) phi_{b,q}[G]^(1/(b lam))
    with C = b^(1/b) / a^(1/a), k = b/(b(q-1)+1), lam = n(q-1)+1, and G the
    q-Gaussian for the l_a norm.  The M's without a hat are taken on |psi|^2.
    """
    if not 1.0 < alpha <= 2.0:
        raise ValueError("alpha must lie in (1, 2]")
    n = psi.dim
    _admissible(q, alpha, n)
    beta = conjugate_exponent(alpha)
    k = beta / (beta * (q - 1.0) + 1.0)
    lam = n * (q - 1.0) + 1.0
    ph = fourier(psi)
    C = _bb_constant(alpha, beta)
    Mh = info_gen(ph, alpha / 2)
    Mk = info_gen(psi, k / 2)
    Mkq = info_gen(psi, k * q / 2)
    Ex = escort_moment(psi, k / 2, alpha, lp=alpha)
    Exi = escort_moment(ph, alpha / 2, beta, lp=beta)
    lhs1 = Mh ** (1 / alpha) * Mk ** (1 / alpha) / Mkq * Ex ** (1 / alpha) * Exi ** (1 / beta)
    rhs1 = n / (2 * np.pi * k * q) * C ** (-n / (2 * beta))
    anchor = lutwak_anchors(q, alpha, n, Lp(alpha), cfg)["lutwak"]
    lhs2 = Mh ** (1 / (alpha * lam)) / Mk ** (1 / (k * lam)) * Ex ** (1 / alpha) * Exi ** (1 / (beta * lam))
    rhs2 = (2 * np.pi * k) ** (-1 / lam) * C ** (-n / (2 * beta * lam)) * anchor
    params = {"alpha": alpha, "beta": beta, "q": q, "k": k, "lambda": lam, "n": n, "psi": psi.name}
    err = 1e-9
    return (InequalityReport("uncertainty-general-1", lhs1, rhs1, err, dict(params), saturation_tol),
            InequalityReport("uncertainty-general-2", lhs2, rhs2, err, dict(params), saturation_tol))


def check_uncertainty_euclidean(psi: WaveFunction, q: float, gamma_mom: float = 2.0, theta_mom: float = 2.0,
                                cfg: QuadratureConfig = DEFAULT, saturation_tol: float = SATURATION_TOL,
                                weak: bool | None = None):
    """The alpha = beta = 2 relations with Euclidean moments of orders gamma_mom, theta_mom >= 2.

    Returns (first, second, weak).  ``weak=None`` includes the weak form when
    k > 2 and returns None in its place otherwise; ``weak=True`` demands it
    and raises for k <= 2; ``weak=False`` never computes it.  The weak
    form drops the M_{k/2} factor from the second and is only implied by it
    when M_{k/2}[|psi|^2] >= 1; ``weak.params["premise_holds"]`` says whether
    that is the case, and a weak report whose premise fails is informational.
    """
    if gamma_mom < 2 or theta_mom < 2:
        raise ValueError("moment orders must be >= 2")
    n = psi.dim
    _admissible(q, 2.0, n)
    k = 2.0 / (2.0 * (q - 1.0) + 1.0)
    if weak and not k > 2:
        raise ValueError(f"the weak form needs k > 2 (q < 1), got k = {k:g}")
    lam = n * (q - 1.0) + 1.0
    ph = fourier(psi)
    Mk = info_gen(psi, k / 2)
    Mkq = info_gen(psi, k * q / 2)
    Ex = escort_moment(psi, k / 2, gamma_mom, lp=2.0) ** (1 / gamma_mom)
    Exi = escort_moment(ph, 1.0, theta_mom, lp=2.0) ** (1 / theta_mom)
    anchor = lutwak_anchors(q, 2.0, n, Lp(2), cfg)["lutwak"]
    rhs2 = (2 * np.pi * k) ** (-1 / lam) * anchor
    params = {"q": q, "k": k, "lambda": lam, "n": n, "gamma_mom": gamma_mom, "theta_mom": theta_mom,
              "psi": psi.name, "M_k2": Mk}
    err = 1e-9
    first = InequalityReport("uncertainty-euclidean-1", Mk**0.5 / Mkq * Ex * Exi, n / (2 * np.pi * k * q), err,
                             dict(params), saturation_tol)
    second = InequalityReport("uncertainty-euclidean-2", Mk ** (-1 / (k * lam)) * Ex * Exi ** (1 / lam), rhs2, err,
                              dict(params), saturation_tol)
    out_weak = None
    if k > 2 and weak is not False:
        # the weak form follows from the second only when M_{k/2}[|psi|^2] >= 1, which
        # can fail (M_{k/2} -> 0 under dilation for k > 2); the premise is recorded
        wp = dict(params, premise="M_k2 >= 1", premise_holds=bool(Mk >= 1.0))
        out_weak = InequalityReport("uncertainty-euclidean-weak", Ex * Exi ** (1 / lam), rhs2, err, wp,
                                saturation_tol)
    return first, second, out_weak


def heisenberg_check(psi: WaveFunction, centred: bool = True, saturation_tol: float = SATURATION_TOL) -> InequalityReport:
    """E[x^2] E[xi^2] >= 1/(16 pi^2) for a 1-D wave function (moments about the mean by default)."""
    if psi.dim != 1:
        raise ValueError("heisenberg_check is one-dimensional")
    ph = fourier(psi)
    vx = escort_moment(psi, 1.0, 2.0, centred=centred)
    vxi = escort_moment(ph, 1.0, 2.0, centred=centred)
    return InequalityReport("heisenberg", vx * vxi, HEISENBERG, 1e-9,
                            {"psi": psi.name, "centred": centred, "var_x": vx, "var_xi": vxi}, saturation_tol)


def modulus_gradient_gap(psi: WaveFunction) -> float:
    """max over grid points and axes of |d_i |psi|| - |d_i psi| (central differences); should be <= 0."""
    gap = -np.inf
    for ax, a in enumerate(psi.axes):
        d = _step(a)
        dm = np.gradient(np.abs(psi.values), d, axis=ax)
        dp = np.gradient(psi.values, d, axis=ax)
        gap = max(gap, float(np.max(np.abs(dm) - np.abs(dp))))
    return gap
