"""Random generation for marginal and joint directional models

Every sampler takes an explicit `numpy.random.Generator` and owns no other
state, so concurrent calls with distinct generators are safe and a fixed
(model, n, generator state) always yields the same sample.
"""

import logging
from typing import Tuple, Union

import numpy as np
from scipy import integrate
from scipy.special import ive

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from shared.errors import ConfigurationError, InputError, SamplerError
from shared.models import TWO_PI, UNIT_NORM_TOL, AngleVector, DirectionalSample, PairedSample

from . import geometry
from .model_spec import (
    BivariateCosine,
    BivariateVonMises,
    BivariateWrappedCauchy,
    CircularMixture,
    CircularUniform,
    Marginal,
    ModelSpec,
    Parabolic,
    Product,
    ProjectedNormal,
    VmfPair,
    VonMises,
    VonMisesCopula,
    VonMisesFisher,
    WrappedCauchy,
)


logger = logging.getLogger(__name__)


# A single draw may consume at most this many rejection proposals
MAX_PROPOSALS = 1_000_000

QUANTILE_XTOL = 1e-10

ArrayLike = Union[float, np.ndarray]


def _check_n(n: int) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ConfigurationError(f"Sample size must be a positive integer, got {n!r}")
    return int(n)


def _check_kappa(kappa: float, name: str = "kappa") -> float:
    kappa = float(kappa)
    if not np.isfinite(kappa) or kappa < 0.0:
        raise ConfigurationError(f"{name} must be a finite value >= 0, got {kappa}")
    return kappa


class _ProposalBudget:
    """Tracks proposals spent since the last acceptance"""

    def __init__(self, sampler: str):
        self.sampler = sampler
        self.since_accept = 0

    def record(self, accepted: np.ndarray) -> None:
        pos = np.flatnonzero(accepted)
        if pos.size == 0:
            self.since_accept += accepted.size
            worst = self.since_accept
        else:
            gaps = np.diff(pos)
            worst = max(self.since_accept + int(pos[0]) + 1, int(gaps.max()) if gaps.size else 0)
            self.since_accept = accepted.size - 1 - int(pos[-1])
        if worst > MAX_PROPOSALS:
            raise SamplerError(
                f"{self.sampler} sampler exceeded {MAX_PROPOSALS} proposals for a single draw"
            )


def vm_centered(kappa: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """n draws from VM(0, kappa) in [-pi, pi] by Best-Fisher rejection"""
    kappa = _check_kappa(kappa)
    if kappa < 1e-9:
        return rng.uniform(-np.pi, np.pi, size=n)

    tau = 1.0 + np.sqrt(1.0 + 4.0 * kappa**2)
    rho = (tau - np.sqrt(2.0 * tau)) / (2.0 * kappa)
    r = (1.0 + rho**2) / (2.0 * rho)

    out = np.empty(n)
    filled = 0
    budget = _ProposalBudget("von Mises")
    while filled < n:
        m = min(MAX_PROPOSALS, 2 * (n - filled) + 16)
        u1, u2, u3 = rng.uniform(size=(3, m))
        z = np.cos(np.pi * u1)
        f = (1.0 + r * z) / (r + z)
        c = kappa * (r - f)
        ok = (u2 < c * (2.0 - c)) | (u2 <= c * np.exp(1.0 - c))
        budget.record(ok)
        theta = np.sign(u3 - 0.5) * np.arccos(np.clip(f, -1.0, 1.0))
        accepted = theta[ok][:n - filled]
        out[filled:filled + accepted.size] = accepted
        filled += accepted.size
    return out


def sample_circular(marginal: Marginal, n: int, rng: np.random.Generator) -> AngleVector:
    """n i.i.d. angles from VM (Best-Fisher), WC (wrapped Cauchy draw) or Unif

    Raises:
        ConfigurationError: If the marginal is not circular or n < 1
    """
    n = _check_n(n)
    if isinstance(marginal, VonMises):
        return AngleVector(marginal.mu + vm_centered(marginal.kappa, n, rng))
    if isinstance(marginal, WrappedCauchy):
        if marginal.rho == 0.0:
            return AngleVector(rng.uniform(0.0, TWO_PI, size=n))
        # WC(mu, rho) is a Cauchy(mu, -log rho) wrapped onto the circle
        return AngleVector(marginal.mu - np.log(marginal.rho) * rng.standard_cauchy(size=n))
    if isinstance(marginal, CircularUniform):
        return AngleVector(rng.uniform(0.0, TWO_PI, size=n))
    raise ConfigurationError(f"{marginal} is not a circular marginal")


def sample_vmf(mu, kappa: float, n: int, rng: np.random.Generator) -> DirectionalSample:
    """n draws from vMF(mu, kappa) on S^(p-1) via Wood's tangent-normal scheme

    The component w = mu'X is drawn by rejection from a Beta-based
    envelope; the tangent direction is an isotropic Gaussian projected
    onto the orthogonal complement of mu.

    Raises:
        InputError: If mu is not a unit vector
        ConfigurationError: If kappa < 0 or n < 1
    """
    n = _check_n(n)
    kappa = _check_kappa(kappa)
    mu = np.asarray(mu, dtype=float).ravel()
    if mu.size < 2:
        raise InputError(f"vMF mean direction needs at least two coordinates, got {mu.size}")
    if abs(np.linalg.norm(mu) - 1.0) > UNIT_NORM_TOL:
        raise InputError(f"vMF mean direction must be a unit vector, got norm {np.linalg.norm(mu):.12g}")
    p = mu.size

    if kappa == 0.0:
        g = rng.standard_normal((n, p))
        return DirectionalSample(g / np.linalg.norm(g, axis=1, keepdims=True))

    dim = p - 1
    b = dim / (np.sqrt(4.0 * kappa**2 + dim**2) + 2.0 * kappa)
    x0 = (1.0 - b) / (1.0 + b)
    c = kappa * x0 + dim * np.log(1.0 - x0**2)

    w = np.empty(n)
    filled = 0
    budget = _ProposalBudget("von Mises-Fisher")
    while filled < n:
        m = min(MAX_PROPOSALS, 2 * (n - filled) + 16)
        z = rng.beta(dim / 2.0, dim / 2.0, size=m)
        cand = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z)
        u = rng.uniform(size=m)
        ok = kappa * cand + dim * np.log(1.0 - x0 * cand) - c >= np.log(u)
        budget.record(ok)
        accepted = cand[ok][:n - filled]
        w[filled:filled + accepted.size] = accepted
        filled += accepted.size

    v = rng.standard_normal((n, p))
    v -= (v @ mu)[:, None] * mu
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    x = v * np.sqrt(np.clip(1.0 - w**2, 0.0, None))[:, None] + w[:, None] * mu
    return DirectionalSample(x / np.linalg.norm(x, axis=1, keepdims=True))


def _draw_marginal(marginal: Marginal, n: int, rng: np.random.Generator) -> DirectionalSample:
    if isinstance(marginal, VonMisesFisher):
        return sample_vmf(marginal.mu, marginal.kappa, n, rng)
    return geometry.angles_to_sample(sample_circular(marginal, n, rng))


# Marginal CDFs and quantiles on [0, 2*pi]

def _as_support(theta: ArrayLike) -> np.ndarray:
    t = np.asarray(theta, dtype=float)
    return np.where(t == TWO_PI, TWO_PI, np.mod(t, TWO_PI))


def _vm_coefficients(kappa: float) -> np.ndarray:
    """I_j(kappa) / (j I_0(kappa)) for j = 1..J, truncated below 1e-17"""
    j = np.arange(1, int(60 + 2.0 * kappa) + 1)
    coef = ive(j, kappa) / ive(0, kappa) / j
    keep = np.flatnonzero(coef > 1e-17)
    return coef[:keep[-1] + 1] if keep.size else coef[:1]


def _vm_antiderivative(t: np.ndarray, mu: float, coef: np.ndarray) -> np.ndarray:
    j = np.arange(1, coef.size + 1)
    return t / TWO_PI + np.sin(np.multiply.outer(t - mu, j)) @ coef / np.pi


def vm_cdf(theta: ArrayLike, kappa: float, mu: float = 0.0) -> ArrayLike:
    """CDF of VM(mu, kappa) on [0, 2*pi], by its Fourier-Bessel series

    F(t) = G(t) - G(0) with G(t) = t/(2 pi) + 1/pi sum_j I_j/(j I_0) sin(j (t - mu)).
    """
    kappa = _check_kappa(kappa)
    t = _as_support(theta)
    if kappa < 1e-9:
        out = t / TWO_PI
    else:
        coef = _vm_coefficients(kappa)
        flat = t.reshape(-1)
        base = _vm_antiderivative(np.zeros(1), mu, coef)[0]
        out = np.clip(_vm_antiderivative(flat, mu, coef) - base, 0.0, 1.0).reshape(t.shape)
    return float(out) if np.ndim(theta) == 0 else out


def vm_pdf(theta: ArrayLike, kappa: float, mu: float = 0.0) -> ArrayLike:
    t = np.asarray(theta, dtype=float)
    return np.exp(kappa * (np.cos(t - mu) - 1.0)) / (TWO_PI * ive(0, kappa))


def vm_quantile(q: ArrayLike, kappa: float, mu: float = 0.0) -> ArrayLike:
    """Inverse of vm_cdf by bracketed Newton iteration (bisection fallback, xtol 1e-10)"""
    kappa = _check_kappa(kappa)
    qa = np.clip(np.asarray(q, dtype=float), 0.0, 1.0)
    flat = qa.reshape(-1)
    if kappa < 1e-9:
        out = TWO_PI * flat
    else:
        coef = _vm_coefficients(kappa)
        base = _vm_antiderivative(np.zeros(1), mu, coef)[0]
        lo = np.zeros_like(flat)
        hi = np.full_like(flat, TWO_PI)
        t = TWO_PI * flat
        for _ in range(200):
            delta = _vm_antiderivative(t, mu, coef) - base - flat
            lo = np.where(delta <= 0.0, t, lo)
            hi = np.where(delta > 0.0, t, hi)
            step = delta / np.maximum(vm_pdf(t, kappa, mu), 1e-300)
            if np.all((hi - lo <= QUANTILE_XTOL) | (np.abs(step) <= 1e-12)):
                break
            nxt = t - step
            t = np.where((nxt <= lo) | (nxt >= hi), 0.5 * (lo + hi), nxt)
        out = t
    out = out.reshape(qa.shape)
    return float(out) if np.ndim(q) == 0 else out


def _wc_half_angle(phi: np.ndarray, rho: float) -> np.ndarray:
    a = (1.0 + rho) / (1.0 - rho)
    return 0.5 + np.arctan2(a * np.sin(0.5 * phi), np.cos(0.5 * phi)) / np.pi


def _wrap(x: ArrayLike) -> np.ndarray:
    return np.mod(np.asarray(x, dtype=float) + np.pi, TWO_PI) - np.pi


def wc_cdf(theta: ArrayLike, rho: float, mu: float = 0.0) -> ArrayLike:
    """CDF of WC(mu, rho) on [0, 2*pi] in closed form"""
    t = _as_support(theta)
    base = _wc_half_angle(_wrap(-mu), rho)
    out = np.mod(_wc_half_angle(_wrap(t - mu), rho) - base, 1.0)
    out = np.where(t == TWO_PI, 1.0, out)
    return float(out) if np.ndim(theta) == 0 else out


def wc_quantile(q: ArrayLike, rho: float, mu: float = 0.0) -> ArrayLike:
    """Inverse of wc_cdf in closed form"""
    qa = np.clip(np.asarray(q, dtype=float), 0.0, 1.0)
    a = (1.0 + rho) / (1.0 - rho)
    s = np.mod(qa + _wc_half_angle(_wrap(-mu), rho), 1.0)
    psi = np.pi * (s - 0.5)
    phi = 2.0 * np.arctan(np.tan(psi) / a)
    out = np.mod(mu + phi, TWO_PI)
    out = np.where(qa >= 1.0, TWO_PI, out)
    return float(out) if np.ndim(q) == 0 else out


# Joint models

def _wehrly_johnson(u1: np.ndarray, omega: np.ndarray, negative: bool = False) -> np.ndarray:
    """CDF value of theta2 such that 2 pi (F1 -/+ F2) equals the binding draw"""
    w = omega / TWO_PI
    return np.mod(w - u1, 1.0) if negative else np.mod(u1 - w, 1.0)


def bcvm_draws(model: BivariateCosine, n: int,
               rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, int]:
    """Rejection sampling on the flat torus with envelope exp(k1 + k2 + |k3|)

    Returns:
        (theta1, theta2, proposals consumed up to the n-th acceptance)

    Raises:
        SamplerError: If a single draw needs more than MAX_PROPOSALS proposals
    """
    n = _check_n(n)
    k1, k2, k3 = model.kappa1, model.kappa2, model.kappa3
    bound = k1 + k2 + abs(k3)
    t1 = np.empty(n)
    t2 = np.empty(n)
    filled = 0
    proposals = 0
    rate = 0.25
    budget = _ProposalBudget("BCvM")
    while filled < n:
        m = int(min(MAX_PROPOSALS, max(256, 1.2 * (n - filled) / max(rate, 1e-4))))
        a, b = rng.uniform(0.0, TWO_PI, size=(2, m))
        log_ratio = k1 * np.cos(a) + k2 * np.cos(b) + k3 * np.cos(a - b) - bound
        ok = np.log(rng.uniform(size=m)) <= log_ratio
        budget.record(ok)
        pos = np.flatnonzero(ok)[:n - filled]
        t1[filled:filled + pos.size] = a[pos]
        t2[filled:filled + pos.size] = b[pos]
        filled += pos.size
        proposals += int(pos[-1]) + 1 if filled == n else m
        rate = max(filled / proposals, 1e-4) if proposals else rate
    return t1, t2, proposals


def bcvm_acceptance_ratio(kappa1: float, kappa2: float, kappa3: float) -> float:
    """Expected acceptance probability of the BCvM rejection sampler

    The mean of exp(k1 cos t1 + k2 cos t2 + k3 cos(t1 - t2) - k1 - k2 - |k3|)
    over the flat torus, by two-dimensional quadrature.
    """
    bound = kappa1 + kappa2 + abs(kappa3)

    def integrand(b, a):
        return np.exp(kappa1 * np.cos(a) + kappa2 * np.cos(b) + kappa3 * np.cos(a - b) - bound)

    value, _ = integrate.dblquad(integrand, 0.0, TWO_PI, 0.0, TWO_PI, epsabs=1e-10)
    return value / TWO_PI**2


def sample_joint(model: ModelSpec, n: int, rng: np.random.Generator) -> PairedSample:
    """n i.i.d. pairs from a joint model

    Raises:
        ConfigurationError: On an unknown model or invalid n
        SamplerError: If the BCvM rejection sampler exhausts its budget
    """
    n = _check_n(n)

    if isinstance(model, Product):
        return PairedSample(_draw_marginal(model.first, n, rng), _draw_marginal(model.second, n, rng))

    if isinstance(model, Parabolic):
        t1 = rng.uniform(0.0, TWO_PI, size=n)
        u = rng.uniform(0.0, TWO_PI, size=n)
        # squares scaled by 1/(2 pi) keep t2 in [0, 2 pi) without wrapping
        t2 = (model.p * t1**2 + (1.0 - model.p) * u**2) / TWO_PI
        return _circular_pair(t1, t2)

    if isinstance(model, BivariateVonMises):
        t1 = AngleVector(vm_centered(model.kappa1, n, rng)).angles
        omega = model.mu_g + vm_centered(model.kappa_g, n, rng)
        u2 = _wehrly_johnson(vm_cdf(t1, model.kappa1), omega)
        return _circular_pair(t1, vm_quantile(u2, model.kappa2))

    if isinstance(model, BivariateWrappedCauchy):
        t1 = sample_circular(WrappedCauchy(0.0, model.rho1), n, rng).angles
        omega = sample_circular(WrappedCauchy(0.0, abs(model.rho)), n, rng).angles
        u2 = _wehrly_johnson(wc_cdf(t1, model.rho1), omega, negative=model.rho < 0.0)
        return _circular_pair(t1, wc_quantile(u2, model.rho2))

    if isinstance(model, BivariateCosine):
        t1, t2, _ = bcvm_draws(model, n, rng)
        return _circular_pair(t1, t2)

    if isinstance(model, CircularMixture):
        t1 = sample_circular(model.first, n, rng).angles
        t3 = sample_circular(model.second, n, rng).angles
        copy = rng.uniform(size=n) < model.p
        return _circular_pair(t1, np.where(copy, t1, t3))

    if isinstance(model, VmfPair):
        x = sample_vmf(model.mu, model.base_kappa, n, rng)
        other = sample_vmf(model.mix_mu, model.mix_kappa, n, rng)
        copy = rng.uniform(size=n) < model.mix_p
        return PairedSample(x, DirectionalSample(np.where(copy[:, None], x.points, other.points)))

    if isinstance(model, ProjectedNormal):
        chol = np.linalg.cholesky(model.covariance)
        g = rng.standard_normal((n, model.d + 1)) @ chol.T
        head = g[:, :model.d]
        x = DirectionalSample(head / np.linalg.norm(head, axis=1, keepdims=True))
        return PairedSample(x, geometry.linear_sample(g[:, model.d]))

    if isinstance(model, VonMisesCopula):
        u = rng.uniform(size=n)
        omega = vm_centered(model.kappa, n, rng)
        v = np.mod(u - omega / TWO_PI, 1.0)
        return PairedSample(geometry.angles_to_sample(TWO_PI * u), geometry.linear_sample(v))

    raise ConfigurationError(f"Unsupported model: {model!r}")


def _circular_pair(t1: np.ndarray, t2: np.ndarray) -> PairedSample:
    return PairedSample(geometry.angles_to_sample(t1), geometry.angles_to_sample(t2))
