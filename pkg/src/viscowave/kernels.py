"""Modal kernels and Green function series for the viscous wave operator.

The operator under study on the strip [0, pi] x (0, T) is

    L u = eps * u_xxt + u_xx - u_tt - a * u_t,

with Neumann data at x = 0 and x = pi, damping 0 < a < 1 and viscosity
0 < eps < 1.  Expanding in the cosine basis, each mode n >= 1 responds
through the impulse response of

    T'' + 2 h_n T' + n^2 T = 0,    T(0) = 0, T'(0) = 1,

with per-mode damping h_n = (a + eps n^2) / 2.  The sign of
omega_sq = h_n^2 - n^2 decides whether the response oscillates
(trigonometric), creeps (hyperbolic) or sits on the critical band
(degenerate).  The viscous limit eps -> 0 replaces h_n by a / 2 for
every mode, which is always oscillatory since a < 1 <= n.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import TruncationError, ValidationError

# Width of the near-critical band in omega_sq.  Inside the band the
# closed forms sin/ sinh lose digits, so a Taylor expansion takes over.
DEGENERACY_TOL = 1e-9

# Mode count that the envelope-based tail estimate looks ahead after the
# truncation point.
_TAIL_WINDOW = 64


@dataclass(frozen=True)
class MediumParams:
    """Damping a and viscosity eps of the medium, both restricted to (0, 1).

    The open-interval restriction keeps a * eps < 1, so the mode
    threshold formulas stay real and the degenerate band stays narrow.
    """

    a: float
    eps: float

    def __post_init__(self) -> None:
        if not (isinstance(self.a, (int, float)) and math.isfinite(self.a)):
            raise ValidationError(f"damping a must be a finite number, got {self.a!r}")
        if not (isinstance(self.eps, (int, float)) and math.isfinite(self.eps)):
            raise ValidationError(f"viscosity eps must be a finite number, got {self.eps!r}")
        if not 0.0 < self.a < 1.0:
            raise ValidationError(f"damping a must lie in (0, 1), got {self.a}")
        if not 0.0 < self.eps < 1.0:
            raise ValidationError(f"viscosity eps must lie in (0, 1), got {self.eps}")


class Regime(str, enum.Enum):
    """Character of one mode's impulse response."""

    ZERO_MODE = "zero_mode"
    TRIGONOMETRIC = "trigonometric"
    DEGENERATE = "degenerate"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class ModeKernel:
    """Per-mode quantities of the viscous operator: damping h_n and omega_sq."""

    n: int
    damping: float
    omega_sq: float
    regime: Regime


@dataclass(frozen=True)
class Truncation:
    """Series truncation policy: hard mode cap plus a tail tolerance."""

    max_modes: int = 2048
    tail_tol: float = 1e-10

    def __post_init__(self) -> None:
        if not (isinstance(self.max_modes, int) and self.max_modes >= 1):
            raise ValidationError(f"max_modes must be a positive integer, got {self.max_modes!r}")
        if not (0.0 < self.tail_tol < 1.0):
            raise ValidationError(f"tail_tol must lie in (0, 1), got {self.tail_tol!r}")


@dataclass(frozen=True)
class GreenValue:
    """Point evaluation of a Green function series with its tail estimate."""

    value: float
    tail_bound: float
    modes_used: int


def classify_mode(params: MediumParams, n: int) -> ModeKernel:
    """Classify mode n of the viscous operator and return its kernel data."""
    if n == 0:
        return ModeKernel(0, params.a / 2.0, params.a * params.a / 4.0, Regime.ZERO_MODE)
    _validate_modes(np.asarray(n))
    h = 0.5 * (params.a + params.eps * n * n)
    omega_sq = h * h - float(n * n)
    if omega_sq < -DEGENERACY_TOL:
        regime = Regime.TRIGONOMETRIC
    elif omega_sq > DEGENERACY_TOL:
        regime = Regime.HYPERBOLIC
    else:
        regime = Regime.DEGENERATE
    return ModeKernel(int(n), h, omega_sq, regime)


def mode_thresholds(params: MediumParams) -> tuple[int, int]:
    """Mode numbers bracketing the oscillatory band.

    Returns (n_lo, n_hi) where n_lo is the smallest natural number
    strictly above (1 - sqrt(1 - a*eps)) / eps and n_hi the largest one
    strictly below (1 + sqrt(1 - a*eps)) / eps.  Modes n_lo..n_hi are
    trigonometric, modes above n_hi are hyperbolic (or degenerate on the
    band edge).  Under the (0, 1) parameter restriction the lower
    threshold sits below 1, so n_lo is always 1.
    """
    root = math.sqrt(1.0 - params.a * params.eps)
    lower = (1.0 - root) / params.eps
    upper = (1.0 + root) / params.eps
    n_lo = math.floor(lower) + 1
    n_hi = math.ceil(upper) - 1
    return max(n_lo, 1), max(n_hi, 1)


def decay_rate(params: MediumParams) -> float:
    """Uniform exponential decay rate of the Green function series part.

    The series part of the Green function is bounded by a multiple of
    exp(-beta t) with beta = min(1 / (eps + a), (a + eps) / 2, a).
    """
    return min(1.0 / (params.eps + params.a), 0.5 * (params.a + params.eps), params.a)


def zero_mode_response(a: float, t, order: int = 0):
    """Mean-mode impulse response (1 - exp(-a t)) / a and its t-derivatives."""
    if not 0.0 < a:
        raise ValidationError(f"damping a must be positive, got {a}")
    t_arr = _validate_times(t)
    _validate_order(order)
    if order == 0:
        out = -np.expm1(-a * t_arr) / a
    elif order == 1:
        out = np.exp(-a * t_arr)
    else:
        out = -a * np.exp(-a * t_arr)
    return _collapse(out)


def modal_kernel(params: MediumParams, n, t, order: int = 0):
    """Impulse response of mode n of the viscous operator, or its derivatives.

    Parameters
    ----------
    params : MediumParams
    n : int or array of int, each >= 1.  Broadcast against t.
    t : float or array, >= 0.
    order : 0 for the value, 1 and 2 for analytic time derivatives.

    The response is exp(-h_n t) sinh(w t) / w with w^2 = h_n^2 - n^2,
    read as sin/ sinc when w^2 < 0 and by a Taylor expansion of
    sinh(z)/z on the degenerate band.  The hyperbolic branch is
    evaluated from the two characteristic roots

        l1 = n^2 / (h_n + w),   l2 = h_n + w,

    which avoids both overflow of sinh and cancellation in h_n - w.
    """
    n_arr = _validate_modes(n)
    t_arr = _validate_times(t)
    _validate_order(order)
    n_b, t_b = np.broadcast_arrays(n_arr.astype(float), t_arr)
    h = 0.5 * (params.a + params.eps * n_b * n_b)
    return _collapse(_oscillator_kernel(h, n_b * n_b, t_b, order))


def limit_kernel(a: float, n, t, order: int = 0):
    """Impulse response of mode n of the damped wave (eps = 0) operator.

    Every mode is oscillatory: exp(-a t / 2) sin(w0 t) / w0 with
    w0 = sqrt(n^2 - a^2 / 4), real because a < 1 <= n.
    """
    if not 0.0 < a < 1.0:
        raise ValidationError(f"damping a must lie in (0, 1), got {a}")
    n_arr = _validate_modes(n)
    t_arr = _validate_times(t)
    _validate_order(order)
    n_b, t_b = np.broadcast_arrays(n_arr.astype(float), t_arr)
    h = np.full_like(n_b, a / 2.0)
    return _collapse(_oscillator_kernel(h, n_b * n_b, t_b, order))


def mode_envelope(params: MediumParams, kind: str, n, t):
    """Monotone per-mode bound on |(2/pi) * kernel_n(t) * cos * cos|.

    For hyperbolic modes the decay exponent n^2 / (a + eps n^2) is used
    instead of the exact slow root; it is a lower bound on the root and
    increases with n, which makes the envelope safe to use as a
    truncation stop rule (the exact envelope is not monotone just above
    the oscillatory band).  For kind="limit" the envelope decays only
    like 1/n, so point evaluations of that series converge slowly by
    nature and may legitimately exhaust the mode cap.
    """
    _validate_kind(kind)
    n_arr = _validate_modes(n).astype(float)
    t_arr = _validate_times(t)
    n_b, t_b = np.broadcast_arrays(n_arr, t_arr)
    if kind == "limit":
        w0 = np.sqrt(n_b * n_b - params.a * params.a / 4.0)
        amp = np.minimum(t_b, 1.0 / w0)
        return _collapse((2.0 / math.pi) * np.exp(-0.5 * params.a * t_b) * amp)
    h = 0.5 * (params.a + params.eps * n_b * n_b)
    omega_sq = h * h - n_b * n_b
    out = np.empty_like(n_b)
    osc = omega_sq <= DEGENERACY_TOL
    if osc.any():
        w = np.sqrt(np.maximum(-omega_sq[osc], 0.0))
        amp = np.minimum(t_b[osc], 1.0 / np.maximum(w, 1e-300))
        out[osc] = np.exp(-h[osc] * t_b[osc]) * amp
    hyp = ~osc
    if hyp.any():
        w = np.sqrt(omega_sq[hyp])
        slow = n_b[hyp] ** 2 / (params.a + params.eps * n_b[hyp] ** 2)
        amp = np.minimum(t_b[hyp], 0.5 / w)
        out[hyp] = np.exp(-slow * t_b[hyp]) * amp
    return _collapse((2.0 / math.pi) * out)


def cosine_series_tail(phi: float, n_start: int) -> float:
    """Tail sum_{n >= n_start} cos(n phi) / n^2 for phi in [0, 2 pi].

    Uses the closed form sum_{n >= 1} cos(n phi)/n^2
    = pi^2/6 - pi phi/2 + phi^2/4 and subtracts the leading partial sum,
    so slowly converging 1/n^2 cosine tails come out exactly.
    """
    phi = float(phi)
    if not (-1e-12 <= phi <= 2.0 * math.pi + 1e-12):
        raise ValidationError(f"phi must lie in [0, 2 pi], got {phi}")
    phi = min(max(phi, 0.0), 2.0 * math.pi)
    closed = math.pi * math.pi / 6.0 - 0.5 * math.pi * phi + 0.25 * phi * phi
    if n_start <= 1:
        return closed
    n = np.arange(1, n_start, dtype=float)
    return closed - float(np.sum(np.cos(n * phi) / (n * n)))


def _hyperbolic_tail_completion(
    params: MediumParams, x: float, xi: float, t: float, n_used: int
) -> tuple[float, float]:
    """Correction and certified remainder for the slow n^-2 series tail.

    Deep in the overdamped range the modal kernel behaves like
    exp(-t/eps) / (eps n^2), so the raw series past any affordable cutoff
    still carries an algebraic tail.  The correction sums exact kernels
    over an extended block and closes the rest with the Bernoulli cosine
    sum for the model term; what remains is the model mismatch, which
    decays like n^-4 and is bounded by its sampled edge value.
    """
    p = max(4 * n_used, 8192)
    n = np.arange(n_used + 1, p + 1)
    kern = modal_kernel(params, n, t)
    segment = (2.0 / math.pi) * float(np.sum(kern * np.cos(n * xi) * np.cos(n * x)))

    scale = math.exp(-t / params.eps) / params.eps
    phi_minus = abs(x - xi)
    phi_plus = x + xi
    main = (scale / math.pi) * (
        cosine_series_tail(phi_minus, p + 1) + cosine_series_tail(phi_plus, p + 1)
    )

    edge = np.arange(p - 2, p + 1)
    resid = modal_kernel(params, edge, t) - scale / edge.astype(float) ** 2
    remainder = (2.0 / math.pi) * float(np.max(np.abs(resid))) * p
    return segment + main, remainder


def green_function(
    params: MediumParams,
    kind: str,
    x: float,
    xi: float,
    t: float,
    trunc: Truncation = Truncation(),
) -> GreenValue:
    """Point value of the Neumann Green function at (x, xi, t).

    G(x, xi, t) = (1/pi) (1 - exp(-a t)) / a
                  + (2/pi) sum_n kernel_n(t) cos(n xi) cos(n x),

    with the viscous kernel for kind="perturbed" and the damped wave
    kernel for kind="limit".  The sum is truncated at the first mode
    whose monotone envelope drops below trunc.tail_tol; if that never
    happens within trunc.max_modes a TruncationError is raised.

    For kind="perturbed" the truncated sum is then completed with a
    closed-form estimate of the remaining overdamped tail (which decays
    only like 1/n^2), and tail_bound certifies the completed value.  For
    kind="limit" the series is conditionally convergent and no completion
    is attempted; tail_bound is an envelope-sum estimate there.
    """
    _validate_kind(kind)
    for name, v in (("x", x), ("xi", xi)):
        if not (0.0 <= v <= math.pi + 1e-12):
            raise ValidationError(f"{name} must lie in [0, pi], got {v}")
    t = float(t)
    if not (t >= 0.0 and math.isfinite(t)):
        raise ValidationError(f"t must be finite and >= 0, got {t}")

    n_use, converged, tail = _truncation_point(params, kind, t, trunc)
    if not converged:
        raise TruncationError(
            f"green_function series not converged after {trunc.max_modes} modes "
            f"(tail estimate {tail:.3e} > tail_tol {trunc.tail_tol:.3e}); "
            "raise max_modes or loosen tail_tol"
        )
    n = np.arange(1, n_use + 1)
    if kind == "perturbed":
        kern = modal_kernel(params, n, t)
    else:
        kern = limit_kernel(params.a, n, t)
    series = (2.0 / math.pi) * float(np.sum(kern * np.cos(n * xi) * np.cos(n * x)))
    if kind == "perturbed" and t > 0.0:
        correction, tail = _hyperbolic_tail_completion(params, x, xi, t, n_use)
        series += correction
        tail += 1e-15 * (abs(series) + 1.0)
    value = zero_mode_response(params.a, t) / math.pi + series
    return GreenValue(value=value, tail_bound=tail, modes_used=n_use)


def _truncation_point(
    params: MediumParams, kind: str, t: float, trunc: Truncation
) -> tuple[int, bool, float]:
    """First mode where the envelope permits stopping, plus a tail estimate."""
    n_all = np.arange(1, trunc.max_modes + _TAIL_WINDOW + 1)
    env = np.atleast_1d(mode_envelope(params, kind, n_all, t))
    if kind == "perturbed":
        # The envelope is only monotone past the oscillatory band.
        n_hi = mode_thresholds(params)[1]
    else:
        n_hi = 0
    allowed = (n_all > n_hi) & (n_all <= trunc.max_modes)
    ok = allowed & (env < trunc.tail_tol)
    if ok.any():
        n_use = int(n_all[np.argmax(ok)])
        converged = True
    else:
        n_use = trunc.max_modes
        converged = False
    window = env[n_use : n_use + _TAIL_WINDOW]
    tail = float(np.sum(window))
    if window.size >= 2 and window[-2] > 0.0:
        ratio = window[-1] / window[-2]
        if 0.0 < ratio < 0.999:
            tail += float(window[-1] * ratio / (1.0 - ratio))
        else:
            tail += float(window[-1] * window.size)
    return n_use, converged, tail


def _oscillator_kernel(h: np.ndarray, nsq: np.ndarray, t: np.ndarray, order: int) -> np.ndarray:
    """Impulse response (and derivatives) of T'' + 2h T' + nsq T = 0 elementwise."""
    omega_sq = h * h - nsq
    out = np.empty_like(h)
    trig = omega_sq < -DEGENERACY_TOL
    hyp = omega_sq > DEGENERACY_TOL
    deg = ~(trig | hyp)
    if trig.any():
        out[trig] = _trig_branch(h[trig], omega_sq[trig], t[trig], order)
    if deg.any():
        out[deg] = _degenerate_branch(h[deg], omega_sq[deg], t[deg], order)
    if hyp.any():
        out[hyp] = _hyperbolic_branch(h[hyp], omega_sq[hyp], nsq[hyp], t[hyp], order)
    return out


def _trig_branch(h, omega_sq, t, order):
    w = np.sqrt(-omega_sq)
    decay = np.exp(-h * t)
    sin_part = np.sin(w * t) / w
    if order == 0:
        return decay * sin_part
    cos_part = np.cos(w * t)
    if order == 1:
        return decay * (cos_part - h * sin_part)
    return decay * ((omega_sq + h * h) * sin_part - 2.0 * h * cos_part)


def _degenerate_branch(h, omega_sq, t, order):
    # Taylor expansions of sinh(z)/z and cosh(z) in q = z^2 = omega_sq t^2,
    # valid for either sign of omega_sq.  |q| <= 1e-9 t^2 on the band, so
    # four terms leave a remainder far below double precision.
    q = omega_sq * t * t
    sinc_like = 1.0 + q / 6.0 + q * q / 120.0 + q * q * q / 5040.0
    sin_part = t * sinc_like
    decay = np.exp(-h * t)
    if order == 0:
        return decay * sin_part
    cos_like = 1.0 + q / 2.0 + q * q / 24.0 + q * q * q / 720.0
    if order == 1:
        return decay * (cos_like - h * sin_part)
    return decay * ((omega_sq + h * h) * sin_part - 2.0 * h * cos_like)


def _hyperbolic_branch(h, omega_sq, nsq, t, order):
    # Characteristic roots -l1, -l2 with l1 l2 = nsq and l1 + l2 = 2h.
    # l1 via nsq / (h + w) avoids the cancellation of h - w.
    w = np.sqrt(omega_sq)
    l1 = nsq / (h + w)
    l2 = h + w
    e1 = np.exp(-l1 * t)
    e2 = np.exp(-l2 * t)
    if order == 0:
        return (e1 - e2) / (2.0 * w)
    if order == 1:
        return (l2 * e2 - l1 * e1) / (2.0 * w)
    return (l1 * l1 * e1 - l2 * l2 * e2) / (2.0 * w)


def _validate_modes(n) -> np.ndarray:
    n_arr = np.asarray(n)
    if n_arr.size == 0:
        raise ValidationError("mode index array is empty")
    if not np.issubdtype(n_arr.dtype, np.number):
        raise ValidationError(f"mode index must be numeric, got dtype {n_arr.dtype}")
    if np.any(n_arr != np.floor(n_arr)):
        raise ValidationError("mode index must be an integer")
    if np.any(n_arr < 1):
        raise ValidationError("mode index must be >= 1 (the mean mode has its own response)")
    return n_arr


def _validate_times(t) -> np.ndarray:
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)):
        raise ValidationError("t must be finite")
    if np.any(t_arr < 0.0):
        raise ValidationError("t must be >= 0")
    return t_arr


def _validate_order(order: int) -> None:
    if order not in (0, 1, 2):
        raise ValidationError(f"order must be 0, 1 or 2, got {order!r}")


def _validate_kind(kind: str) -> None:
    if kind not in ("perturbed", "limit"):
        raise ValidationError(f"kind must be 'perturbed' or 'limit', got {kind!r}")


def _collapse(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr
