"""Gaussian quadratic-form model of the two-photon mode function.

The mode function is approximated as ``Phi(x) = N exp(-x^T A x / 2)`` with a
6x6 symmetric positive-definite ``A``. Purities of reduced states follow from
determinant ratios ``det(2A) / sqrt(det(M))``, where the 12x12 matrix ``M``
is the quadratic form of the product of four copies of ``Phi`` whose
arguments are wired together according to the partial trace. Neither the
normalization ``N`` nor any density matrix is ever formed.

The ``exp(-x^T A x / 2)`` convention is the one under which the determinant
ratio is exactly the purity: ``N^4 = det(2A) / (2 pi)^6`` and the 12-dimensional
Gaussian integral contributes ``(2 pi)^6 / sqrt(det M)``.

Limits (zero filter bandwidth, infinite collection width, CW pump) are
replaced by large finite precisions and checked for convergence by
re-evaluating with a more extreme stand-in.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dispersion import C_UM_PER_FS
from .errors import ConditioningError, LimitConvergenceError, NumericalError, ValidationError
from .phasematch import COORDS, FREQUENCY_IDX, MOMENTUM_IDX, QIX, QIY, QSX, QSY, WI, WS, Config, Linearization, linearize

SYMMETRY_TOL = 1e-12
PIVOT_RATIO_MAX = 1e12
OVERSHOOT_TOL = 1e-9
LIMIT_FACTOR = 1e6
LIMIT_TOL = 1e-4
CW_NARROWING = 1e3


@dataclass(frozen=True)
class QuadraticForm:
    """Symmetric matrix with labelled coordinates.

    Six or twelve coordinates for the full model; four or eight for the
    reduced model checked by the oracle.
    """

    matrix: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (4, 6, 8, 12):
            raise ValidationError(f"quadratic form must be square of dimension 4, 6, 8 or 12, got {m.shape}")
        if self.labels is None:
            object.__setattr__(self, "labels", _default_labels(m.shape[0]))
        if len(self.labels) != m.shape[0]:
            raise ValidationError("one label per coordinate required")
        if not np.all(np.isfinite(m)):
            raise NumericalError("quadratic form has non-finite entries")
        _check_symmetric(m)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self):
        return self.matrix.shape[0]


def _default_labels(n):
    if n == 6:
        return COORDS
    if n == 12:
        return COORDS + tuple(lbl + "'" for lbl in COORDS)
    return tuple(f"x{j}" for j in range(n))


def _check_symmetric(m):
    scale = np.max(np.abs(m)) or 1.0
    if np.max(np.abs(m - m.T)) > SYMMETRY_TOL * scale:
        raise ValidationError("matrix is not symmetric")


@dataclass(frozen=True)
class TracePairing:
    """Wiring of the four mode-function copies in a purity integral.

    Each map lists, for the arguments of one copy, the index into the doubled
    vector ``X = (x, x')`` it reads (0-based). The copies alternate
    ``Phi, Phi*, Phi, Phi*``. The full model has six arguments per copy; the
    reduced 1+1 dimensional model used by the oracle has four.
    """

    kind: str
    maps: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.maps) != 4 or len({len(m) for m in self.maps}) != 1:
            raise ValidationError("a pairing needs four maps of equal length")
        if any(not 0 <= i < 2 * self.dim for m in self.maps for i in m):
            raise ValidationError(f"pairing indices must lie in [0, {2 * self.dim})")

    @property
    def dim(self):
        return len(self.maps[0])

    def selection_matrices(self):
        n = self.dim
        mats = []
        for m in self.maps:
            s = np.zeros((n, 2 * n))
            s[np.arange(n), m] = 1.0
            mats.append(s)
        return mats


def _one_based(*maps):
    return tuple(tuple(i - 1 for i in m) for m in maps)


# Tracing out frequency: the conjugate copies share unprimed frequencies.
FREQUENCY_TRACE = TracePairing(
    "frequency",
    _one_based((1, 2, 3, 4, 5, 6), (7, 8, 3, 10, 11, 6), (7, 8, 9, 10, 11, 12), (1, 2, 9, 4, 5, 12)),
)
# Tracing out momentum: the conjugate copies share unprimed momenta.
MOMENTUM_TRACE = TracePairing(
    "momentum",
    _one_based((1, 2, 3, 4, 5, 6), (1, 2, 9, 4, 5, 12), (7, 8, 9, 10, 11, 12), (7, 8, 3, 10, 11, 6)),
)
# Tracing out the idler: the primed signal shares the unprimed idler.
IDLER_TRACE = TracePairing(
    "idler",
    _one_based((1, 2, 3, 4, 5, 6), (7, 8, 9, 4, 5, 6), (7, 8, 9, 10, 11, 12), (1, 2, 3, 10, 11, 12)),
)
# Tracing out the signal, kept for symmetry checks.
SIGNAL_TRACE = TracePairing(
    "signal",
    _one_based((1, 2, 3, 4, 5, 6), (1, 2, 3, 10, 11, 12), (7, 8, 9, 10, 11, 12), (7, 8, 9, 4, 5, 6)),
)

PAIRINGS = {p.kind: p for p in (FREQUENCY_TRACE, MOMENTUM_TRACE, IDLER_TRACE, SIGNAL_TRACE)}


@dataclass(frozen=True)
class DetResult:
    logdet: float
    pivots: np.ndarray
    positive_definite: bool

    @property
    def det(self):
        return math.exp(self.logdet) if self.positive_definite else float("nan")

    @property
    def min_pivot(self):
        return float(np.min(self.pivots))

    @property
    def max_pivot(self):
        return float(np.max(self.pivots))

    @property
    def pivot_ratio(self):
        lo = self.min_pivot
        return self.max_pivot / lo if lo > 0 else math.inf


def det_pd(m) -> DetResult:
    """Log-determinant of a symmetric matrix through an LDL^T factorization.

    The matrix is equilibrated first (``S M S`` with ``S = diag(M)^(-1/2)``),
    so the reported pivots are dimensionless and their ratio measures
    conditioning independently of the coordinate units. Non-positive pivots
    are flagged, not raised.
    """
    if isinstance(m, QuadraticForm):
        m = m.matrix
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError("det_pd needs a square matrix")
    _check_symmetric(m)
    n = m.shape[0]
    diag = np.diag(m)
    if np.any(diag <= 0):
        return DetResult(float("nan"), np.where(diag > 0, 1.0, diag), False)
    s = 1.0 / np.sqrt(diag)
    work = m * np.outer(s, s)
    pivots = np.empty(n)
    lower = np.eye(n)
    for j in range(n):
        d = work[j, j] - np.dot(lower[j, :j] ** 2, pivots[:j])
        pivots[j] = d
        if d <= 0:
            pivots[j + 1 :] = np.nan
            return DetResult(float("nan"), pivots[: j + 1], False)
        for i in range(j + 1, n):
            lower[i, j] = (work[i, j] - np.dot(lower[i, :j] * lower[j, :j], pivots[:j])) / d
    logdet = float(np.sum(np.log(pivots)) + np.sum(np.log(diag)))
    return DetResult(logdet, pivots, True)


def bandwidth_from_wavelength(dl_nm, lambda_um):
    """Angular-frequency filter bandwidth ``B`` (rad/fs) from a 1/e half width in nm.

    ``B = pi c dl / (lambda^2 sqrt(ln 2))``.
    """
    if not dl_nm >= 0:
        raise ValidationError(f"bandwidth must be >= 0, got {dl_nm}")
    if not lambda_um > 0:
        raise ValidationError("wavelength must be positive")
    if math.isinf(dl_nm):
        return math.inf
    return math.pi * C_UM_PER_FS * (dl_nm * 1e-3) / (lambda_um**2 * math.sqrt(math.log(2.0)))


def pump_duration(config: Config, cw_narrowing=CW_NARROWING, lin=None):
    """Pump duration ``T0`` (fs) entering ``exp(-T0^2 Omega_p^2 / 4)``.

    A pump bandwidth is converted like a filter, ``T0 = sqrt(2) / B_p``. A CW
    pump gets a bandwidth ``cw_narrowing`` times narrower than the narrowest
    finite spectral scale of the problem (filters, phase-matching and
    pump-envelope acceptance).
    """
    if config.pump_duration_fs is not None:
        return config.pump_duration_fs
    if config.pump_bandwidth_nm is not None:
        bp = bandwidth_from_wavelength(config.pump_bandwidth_nm, config.lambda_p_um)
        return math.inf if bp == 0 else math.sqrt(2.0) / bp
    lin = lin or linearize(config)
    widths = []
    for dl, wl in ((config.dl_s_nm, config.lambda_s_um), (config.dl_i_nm, config.lambda_i_um)):
        b = bandwidth_from_wavelength(dl, wl)
        if 0 < b < math.inf:
            widths.append(b)
    freq = list(FREQUENCY_IDX)
    for gamma, vec in (
        (config.w_p_um**2 / 4, lin.d0_grad),
        ((config.beta * config.length_um) ** 2 / 4, lin.dk_grad),
    ):
        norm = np.linalg.norm(vec[freq])
        if norm > 0:
            widths.append(1.0 / math.sqrt(2.0 * gamma * norm**2))
    if not widths:
        raise ValidationError("CW pump needs at least one finite spectral scale")
    return math.sqrt(2.0) * cw_narrowing / min(widths)


def _unit(*idx):
    v = np.zeros(6)
    v[list(idx)] = 1.0
    return v


def rank_one_terms(config: Config, lin: Linearization, limit_factor=LIMIT_FACTOR, cw_narrowing=CW_NARROWING, allow_limits=True):
    """List of ``(label, gamma, vector)`` with ``A = sum 2 gamma v v^T``.

    Each factor of the mode function has the form ``exp(-gamma (v . x)^2)``.
    Infinite collection widths and zero filter bandwidths become precisions
    ``limit_factor`` times the largest finite diagonal entry of ``A`` in the
    same coordinate family, CW stand-in included, so the filter limit is
    always taken last.
    """
    wp2 = config.w_p_um**2
    terms = [
        ("pump-x", wp2 / 4, _unit(QSX, QIX)),
        ("pump-y", wp2 / 4, np.asarray(lin.d0_grad, dtype=float)),
        ("phase-matching", (config.beta * config.length_um) ** 2 / 4, np.asarray(lin.dk_grad, dtype=float)),
    ]
    t0 = pump_duration(config, cw_narrowing, lin)
    if math.isinf(t0):
        raise ValidationError("zero pump bandwidth is not supported; use pump_duration_fs or CW")
    if t0 > 0:
        terms.append(("pump-time", t0**2 / 4, _unit(WS, WI)))

    limits = []
    for w, idx in ((config.w_s_um, (QSX, QSY)), (config.w_i_um, (QIX, QIY))):
        for j in idx:
            if math.isinf(w):
                limits.append(("collection-limit", j))
            elif w > 0:
                terms.append(("collection", w**2 / 2, _unit(j)))
    for dl, wl, j in ((config.dl_s_nm, config.lambda_s_um, WS), (config.dl_i_nm, config.lambda_i_um, WI)):
        b = bandwidth_from_wavelength(dl, wl)
        if b == 0:
            limits.append(("filter-limit", j))
        elif b < math.inf:
            terms.append(("filter", 1.0 / (2.0 * b * b), _unit(j)))

    if limits and not allow_limits:
        raise LimitConvergenceError("zero bandwidth / infinite width requested with the limit path disabled")
    if limits:
        diag = np.zeros(6)
        for _, gamma, v in terms:
            diag += 2.0 * gamma * v * v
        for label, j in limits:
            family = MOMENTUM_IDX if j in MOMENTUM_IDX else FREQUENCY_IDX
            scale = max(float(np.max(diag[list(family)])), 1.0)
            terms.append((label, limit_factor * scale / 2.0, _unit(j)))
    return terms


def assemble_A(config: Config, lin: Linearization | None = None, limit_factor=LIMIT_FACTOR, cw_narrowing=CW_NARROWING, allow_limits=True) -> QuadraticForm:
    """Build the 6x6 matrix of the Gaussian mode function."""
    lin = lin or linearize(config)
    a = np.zeros((6, 6))
    for _, gamma, v in rank_one_terms(config, lin, limit_factor, cw_narrowing, allow_limits):
        a += 2.0 * gamma * np.outer(v, v)
    if not np.all(np.isfinite(a)):
        raise NumericalError("assembled matrix has non-finite entries")
    a = 0.5 * (a + a.T)
    return QuadraticForm(a)


def compose_traced_form(a: QuadraticForm, pairing: TracePairing) -> QuadraticForm:
    """``M = sum_k S_k^T A S_k`` over the four selection matrices of ``pairing``."""
    am = a.matrix if isinstance(a, QuadraticForm) else np.asarray(a, dtype=float)
    n = pairing.dim
    if am.shape != (n, n):
        raise ValidationError(f"pairing expects a {n}x{n} form, got {am.shape}")
    m = np.zeros((2 * n, 2 * n))
    for s in pairing.selection_matrices():
        m += s.T @ am @ s
    return QuadraticForm(m)


def _require_pd(res: DetResult, name):
    diag = {"name": name, "min_pivot": res.min_pivot if res.positive_definite else None, "pivots": res.pivots.tolist()}
    if not res.positive_definite:
        raise ConditioningError(f"{name} is not positive definite", diag)
    if res.pivot_ratio > PIVOT_RATIO_MAX:
        raise ConditioningError(f"{name} is ill-conditioned (pivot ratio {res.pivot_ratio:.3g})", diag)


def purity_details(a: QuadraticForm, pairing: TracePairing):
    """Purity plus factorization diagnostics for ``a`` and its traced form."""
    am = a.matrix if isinstance(a, QuadraticForm) else np.asarray(a, dtype=float)
    res_a = det_pd(2.0 * am)
    _require_pd(res_a, "A")
    m = compose_traced_form(am, pairing)
    res_m = det_pd(m.matrix)
    _require_pd(res_m, f"{pairing.kind}-traced form")
    value = math.exp(res_a.logdet - 0.5 * res_m.logdet)
    clamped = False
    if value > 1.0 + OVERSHOOT_TOL:
        raise ConditioningError(
            f"purity {value!r} exceeds 1 by more than rounding", {"purity": value, "pairing": pairing.kind}
        )
    if value > 1.0:
        warnings.warn(f"purity {value!r} clamped to 1", RuntimeWarning, stacklevel=2)
        value, clamped = 1.0, True
    return value, {"A": res_a, "M": res_m, "clamped": clamped}


def purity(a: QuadraticForm, pairing: TracePairing) -> float:
    """``det(2A) / sqrt(det(M))`` for the pairing's traced form ``M``."""
    return purity_details(a, pairing)[0]


def entanglement_measures(purity_signal):
    """Schmidt number ``1/P`` and I-concurrence ``sqrt(2 (1 - P))``."""
    if not 0.0 < purity_signal <= 1.0:
        raise ValidationError(f"purity must lie in (0, 1], got {purity_signal}")
    return 1.0 / purity_signal, math.sqrt(2.0 * (1.0 - purity_signal))


@dataclass(frozen=True)
class PurityReport:
    purity_spatial_pair: float
    purity_signal: float
    schmidt_K: float
    i_concurrence: float
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "purity_spatial_pair": self.purity_spatial_pair,
            "purity_signal": self.purity_signal,
            "schmidt_K": self.schmidt_K,
            "i_concurrence": self.i_concurrence,
        }


def _pair(config, lin, limit_factor, cw_narrowing):
    a = assemble_A(config, lin, limit_factor, cw_narrowing)
    p_sp, d_sp = purity_details(a, FREQUENCY_TRACE)
    p_sig, d_sig = purity_details(a, IDLER_TRACE)
    return a, p_sp, p_sig, d_sp, d_sig


def has_limits(config: Config):
    return (
        math.isinf(config.w_s_um)
        or math.isinf(config.w_i_um)
        or config.dl_s_nm == 0
        or config.dl_i_nm == 0
    )


def evaluate(config: Config, limit_factor=LIMIT_FACTOR, check_limits=True) -> PurityReport:
    """Full pipeline: linearize, assemble, compose, and take determinant ratios.

    When limit stand-ins are involved, the evaluation is repeated with a
    ten-fold more extreme stand-in and both purities must move by less than
    ``LIMIT_TOL``. For a CW pump the duration is doubled and the spatial pair
    purity must move by less than ``LIMIT_TOL``; the signal purity of a CW
    pump is bounded by the stand-in (it vanishes in the strict limit) and is
    flagged with ``cw_signal_limited`` instead.
    """
    lin = linearize(config)
    a, p_sp, p_sig, d_sp, d_sig = _pair(config, lin, limit_factor, CW_NARROWING)
    diagnostics = {
        "A_min_pivot": d_sp["A"].min_pivot,
        "A_max_pivot": d_sp["A"].max_pivot,
        "B_min_pivot": d_sp["M"].min_pivot,
        "B_max_pivot": d_sp["M"].max_pivot,
        "C_min_pivot": d_sig["M"].min_pivot,
        "C_max_pivot": d_sig["M"].max_pivot,
        "clamped": d_sp["clamped"] or d_sig["clamped"],
        "d0_const": lin.d0_const,
        "dk_const": lin.dk_const,
    }
    if check_limits and has_limits(config):
        _, q_sp, q_sig, _, _ = _pair(config, lin, limit_factor * 10, CW_NARROWING)
        delta = max(abs(q_sp - p_sp), abs(q_sig - p_sig))
        diagnostics["limit_delta"] = delta
        if delta > LIMIT_TOL:
            raise LimitConvergenceError(f"limit stand-in not converged (purity moved by {delta:.3g})")
    if config.is_cw:
        # signal purity has no finite CW limit (it scales with the stand-in
        # bandwidth and tends to 0); only the spatial pair purity is gated
        diagnostics["cw_signal_limited"] = True
        if check_limits:
            _, q_sp, q_sig, _, _ = _pair(config, lin, limit_factor, 2 * CW_NARROWING)
            delta = abs(q_sp - p_sp)
            diagnostics["cw_delta"] = delta
            diagnostics["cw_signal_ratio"] = q_sig / p_sig
            if delta > LIMIT_TOL:
                raise LimitConvergenceError(f"CW pump stand-in not converged (purity moved by {delta:.3g})")
    k, conc = entanglement_measures(p_sig)
    return PurityReport(p_sp, p_sig, k, conc, diagnostics)
