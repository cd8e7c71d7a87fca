"""Independent checks of the determinant formulas.

Three routes that never call the determinant path:

* ``mc_gaussian_purity`` estimates the 12-dimensional purity integral by
  importance sampling from the block-diagonal Gaussian ``diag(A, A)``.
* ``reduced_model_purity`` drops the x-momenta and integrates the remaining
  1+1 dimensional model on a dense grid, either for the Gaussian mode
  function or for the exact mismatches with a true sinc.
* ``sinc_gaussian_discrepancy`` audits the sinc-to-Gaussian substitution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import phasematch
from .errors import ConditioningError, ValidationError, WindowError
from .phasematch import Config, QIY, QSY, WI, WS
from .quadratic_state import QuadraticForm, TracePairing, _one_based, assemble_A, bandwidth_from_wavelength, det_pd, pump_duration

MIN_SAMPLES = 10_000
CHUNK = 100_000
MIN_ESS_FRACTION = 0.01

#: Coordinates kept by the reduced model, in order (q_s^y, Omega_s, q_i^y, Omega_i).
REDUCED_IDX = (QSY, WS, QIY, WI)

REDUCED_FREQUENCY_TRACE = TracePairing("frequency", _one_based((1, 2, 3, 4), (5, 2, 7, 4), (5, 6, 7, 8), (1, 6, 3, 8)))
REDUCED_IDLER_TRACE = TracePairing("idler", _one_based((1, 2, 3, 4), (5, 6, 3, 4), (5, 6, 7, 8), (1, 2, 7, 8)))


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float
    samples: int
    ess: float

    def zscore(self, reference):
        return (self.value - reference) / self.stderr if self.stderr > 0 else 0.0


def mc_gaussian_purity(a, pairing: TracePairing, samples=1_000_000, seed=0) -> MCEstimate:
    """Importance-sampling estimate of ``det(2A) / sqrt(det(M))``.

    With ``X = (x, x')`` drawn from the Gaussian of precision ``diag(A, A)``,
    the purity equals ``2^n E[exp(-(X^T M X - X^T diag(A, A) X) / 2)]`` for
    an n-dimensional ``A``. ``X^T M X`` is evaluated as the sum of the four
    wired copies of ``x^T A x``, so no determinant is ever taken.

    Samples are drawn in chunks; chunk ``j`` uses the ``j``-th child of
    ``SeedSequence(seed)`` with a PCG64 generator, and the chunk sums are
    combined with ``math.fsum``, so the result depends only on ``seed`` and
    ``samples``.
    """
    am = a.matrix if isinstance(a, QuadraticForm) else np.asarray(a, dtype=float)
    n = pairing.dim
    if am.shape != (n, n):
        raise ValidationError(f"pairing expects a {n}x{n} form")
    if samples < MIN_SAMPLES:
        raise ValidationError(f"need at least {MIN_SAMPLES} samples")
    # purity is invariant under rescaling each coordinate, so work equilibrated
    d = np.diag(am)
    if np.any(d <= 0):
        raise ConditioningError("proposal is degenerate (non-positive diagonal)")
    s = 1.0 / np.sqrt(d)
    a_eq = am * np.outer(s, s)
    try:
        chol = np.linalg.cholesky(a_eq)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError("proposal diag(A, A) is not positive definite") from exc

    maps = [np.asarray(m) for m in pairing.maps]
    children = np.random.SeedSequence(seed).spawn(-(-samples // CHUNK))
    sums, sqsums = [], []
    remaining = samples
    for child in children:
        m = min(CHUNK, remaining)
        remaining -= m
        rng = np.random.Generator(np.random.PCG64(child))
        z = rng.standard_normal((m, 2 * n))
        # x = L^{-T} z has precision L L^T = A_eq
        x = np.linalg.solve(chol.T, z[:, :n].T).T
        xp = np.linalg.solve(chol.T, z[:, n:].T).T
        big = np.concatenate([x, xp], axis=1)
        quad_m = sum(np.einsum("ij,jk,ik->i", big[:, mp], a_eq, big[:, mp]) for mp in maps)
        quad_d = np.einsum("ij,ij->i", z, z)
        w = np.exp(-0.5 * (quad_m - quad_d))
        sums.append(math.fsum(w))
        sqsums.append(math.fsum(w * w))
    total, total_sq = math.fsum(sums), math.fsum(sqsums)
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    ess = total * total / total_sq if total_sq > 0 else 0.0
    if ess < MIN_ESS_FRACTION * samples:
        raise ConditioningError(f"effective sample size {ess:.0f} is below {MIN_ESS_FRACTION:.0%} of samples")
    scale = 2.0**n
    return MCEstimate(scale * mean, scale * math.sqrt(var / samples), samples, ess)


def reduced_form(config: Config) -> QuadraticForm:
    """4x4 form of the mode function restricted to zero x-momenta."""
    a = assemble_A(config).matrix
    idx = list(REDUCED_IDX)
    return QuadraticForm(a[np.ix_(idx, idx)])


@dataclass(frozen=True)
class ReducedResult:
    purity: float
    grid: int
    half_width: np.ndarray


def _trapezoid_weights(g, h):
    w = np.full(g, h)
    w[0] = w[-1] = h / 2
    return w


def _grid_purity(phi, weights, kind):
    # phi axes: (q_s^y, Omega_s, q_i^y, Omega_i)
    wq = [np.sqrt(w) for w in weights]
    phi = phi * wq[0][:, None, None, None] * wq[1][None, :, None, None] * wq[2][None, None, :, None] * wq[3][None, None, None, :]
    g = phi.shape[0]
    if kind == "frequency":
        mat = phi.transpose(0, 2, 1, 3).reshape(g * g, g * g)
    elif kind == "idler":
        mat = phi.reshape(g * g, g * g)
    else:
        raise ValidationError(f"unknown trace {kind!r}")
    gram = mat @ mat.T
    return float(np.sum(gram * gram) / np.trace(gram) ** 2)


def _reduced_purity(config, grid, kind, model, window_sigmas):
    form = reduced_form(config)
    if not det_pd(form.matrix).positive_definite:
        raise ConditioningError("reduced form is not positive definite (unbounded direction)")
    cov = np.linalg.inv(form.matrix)
    half = window_sigmas * np.sqrt(np.diag(cov))
    axes = [np.linspace(-h, h, grid) for h in half]
    weights = [_trapezoid_weights(grid, 2 * h / (grid - 1)) for h in half]
    mesh = np.meshgrid(*axes, indexing="ij")
    y = np.stack(mesh)
    quad = np.einsum("i...,ij,j...->...", y, form.matrix, y)
    envelope = np.exp(-0.5 * quad)
    density = envelope**2
    boundary = max(
        float(np.max(np.abs(np.take(density, idx, axis=ax)))) for ax in range(4) for idx in (0, -1)
    )
    if boundary > 1e-8 * float(np.max(density)):
        raise WindowError(f"integration window clips the integrand (boundary density ratio {boundary:.2e})")
    if model == "gaussian":
        phi = envelope
    elif model == "sinc":
        phi = _exact_reduced_mode(config, y)
    else:
        raise ValidationError(f"unknown model {model!r}")
    return ReducedResult(_grid_purity(phi, weights, kind), grid, half)


def _exact_reduced_mode(config, y):
    """Mode function with exact mismatches and a true sinc, x-momenta set to 0."""
    x = np.zeros((6,) + y.shape[1:])
    for k, j in enumerate(REDUCED_IDX):
        x[j] = y[k]
    d0, dk = phasematch.delta0_exact(config, x), phasematch.deltak_exact(config, x)
    qsy, ws, qiy, wi = y
    log_amp = -config.w_p_um**2 / 4 * d0**2
    t0 = pump_duration(config)
    log_amp = log_amp - t0**2 / 4 * (ws + wi) ** 2
    for w, q in ((config.w_s_um, qsy), (config.w_i_um, qiy)):
        if math.isinf(w):
            raise ValidationError("the reduced sinc model needs finite collection widths")
        log_amp = log_amp - w**2 / 2 * q**2
    for dl, wl, om in ((config.dl_s_nm, config.lambda_s_um, ws), (config.dl_i_nm, config.lambda_i_um, wi)):
        b = bandwidth_from_wavelength(dl, wl)
        if b == 0:
            raise ValidationError("the reduced sinc model needs nonzero filter bandwidths")
        if b < math.inf:
            log_amp = log_amp - om**2 / (2 * b * b)
    return np.exp(log_amp) * np.sinc(dk * config.length_um / (2 * np.pi))


def reduced_model_purity(config: Config, grid=32, kind="frequency", model="gaussian", window_sigmas=6.0) -> ReducedResult:
    """Purity of the 1+1 dimensional model by dense trapezoid quadrature.

    The window spans ``window_sigmas`` standard deviations of the Gaussian
    amplitude along each axis; a ``WindowError`` is raised if the Gaussian
    density on any boundary face exceeds 1e-8 of its peak. For
    ``model="sinc"`` the same window is used, so the algebraic tails of the
    sinc beyond it are cut off.

    Cost grows as ``grid**6``; 64 points per axis takes a few seconds.
    """
    if grid < 32:
        raise ValidationError("grid must have at least 32 points per axis")
    return _reduced_purity(config, grid, kind, model, window_sigmas)


def reduced_convergence(config: Config, grids=(16, 32, 64), kind="frequency", model="gaussian"):
    """Purities for successively doubled grids, coarse pilot included."""
    if any(b != 2 * a for a, b in zip(grids, grids[1:])):
        raise ValidationError("grids must double")
    return [_reduced_purity(config, g, kind, model, 6.0).purity for g in grids]


def sinc_gaussian_discrepancy(config: Config, grid=1025):
    """Compare ``sinc(dk L / 2)`` with ``exp(-beta^2 dk^2 L^2 / 4)`` for dk in +-4 pi / L.

    Returns the maximum absolute deviation and the L2 deviation relative to
    the sinc profile (trapezoid rule). Both depend on ``beta`` only.
    """
    if grid < 64:
        raise ValidationError("grid must have at least 64 points")
    length = config.length_um
    dk = np.linspace(-4 * np.pi / length, 4 * np.pi / length, grid)
    sinc = np.sinc(dk * length / (2 * np.pi))
    gauss = np.exp(-(config.beta**2) * dk**2 * length**2 / 4)
    diff = sinc - gauss
    return {
        "max_abs": float(np.max(np.abs(diff))),
        "l2_rel": float(np.sqrt(np.trapezoid(diff**2, dk) / np.trapezoid(sinc**2, dk))),
    }
