"""Noise-synthesis kernels: numba fast path with a pure-numpy fallback.

The detector Monte Carlo is the only hot loop in the package (up to 1e5
traces x 8192 samples per ensemble), so the per-trace synthesis kernel is
implemented twice with identical arithmetic:

* a numba ``@njit`` kernel operating sample by sample, and
* a vectorized numpy implementation that batches traces.

Backend selection: environment variable ``FWMSIM_BACKEND`` set to ``numba``
or ``numpy`` (default ``numba`` when importable), overridable at runtime
with :func:`set_backend`. Results are bit-reproducible within a backend;
across backends they agree to floating rounding (the integer RNG streams
are bit-identical, transcendental libm calls may differ in the last ulp).

Randomness is counter-based (splitmix64 finalizer over derived keys), so
every (seed, trace, sample, channel, draw) tuple addresses one uint64
without any sequential generator state. That makes trace synthesis order
independent and embarrassingly parallel by construction.

Shot noise per sample uses the exact Poisson law below 1e3 expected
photons (Knuth product method under lam < 10, Hormann PTRS transformed
rejection for 10 <= lam < 1e3) and a continuous Gaussian approximation
above, where the distributional error is below 0.1%.
"""

from __future__ import annotations

import math
import os
import warnings

import numpy as np

__all__ = [
    "available_backends",
    "get_backend",
    "set_backend",
    "synth_trace",
    "accumulate_traces",
    "uniform_stream",
    "POISSON_GAUSS_THRESHOLD",
    "POISSON_KNUTH_MAX",
]

POISSON_GAUSS_THRESHOLD = 1.0e3
POISSON_KNUTH_MAX = 10.0

# splitmix64 constants (Steele, Lea, Flood 2014).
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_R30 = np.uint64(30)
_R27 = np.uint64(27)
_R31 = np.uint64(31)
_R11 = np.uint64(11)
_ONE = np.uint64(1)
# Channel tags keep shot-noise and detector-noise substreams disjoint.
_SHOT_TAG = np.uint64(0xD1B54A32D192ED03)
_DET_TAG = np.uint64(0x8BB84B93962EACC9)
_U53 = 2.0 ** -53
_TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------

def _mix64(z):
    """splitmix64 finalizer; works on uint64 scalars and arrays."""
    with np.errstate(over="ignore"):  # uint64 wraparound is the point
        z = (z ^ (z >> _R30)) * _MIX1
        z = (z ^ (z >> _R27)) * _MIX2
        return z ^ (z >> _R31)


def _sm64(key, i):
    """i-th derived uint64 of the counter stream rooted at ``key``."""
    with np.errstate(over="ignore"):
        return _mix64(key + (i + _ONE) * _GOLD)


def _unit(x):
    """Map uint64 to a double in (0, 1]; never returns 0 (log-safe)."""
    return ((x >> _R11) + _ONE) * _U53


_MASK = (1 << 64) - 1
_GOLD_I = 0x9E3779B97F4A7C15


def _mix64_py(z: int) -> int:
    # Python-int twin of _mix64: numpy warns on scalar uint64 overflow.
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def trace_key(seed: int, index: int) -> np.uint64:
    """Per-trace root key derived from the 64-bit seed and trace index."""
    s = _mix64_py((seed + _GOLD_I) & _MASK)
    return np.uint64(_mix64_py((s + (index + 1) * _GOLD_I) & _MASK))


def uniform_stream(key: np.uint64, n: int) -> np.ndarray:
    """First n uniforms of the channel rooted at ``key`` (test hook)."""
    idx = np.arange(n, dtype=np.uint64)
    return _unit(_sm64(key, idx))


def _gauss_np(keys, j0):
    """One standard normal per key via Box-Muller, draws j0 and j0+1."""
    u1 = _unit(_sm64(keys, j0))
    u2 = _unit(_sm64(keys, j0 + _ONE))
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


def _poisson_knuth_np(keys, lam):
    """Exact Poisson for lam < 10 (product of uniforms vs exp(-lam))."""
    n = lam.size
    out = np.zeros(n)
    p = np.ones(n)
    target = np.exp(-lam)
    j = np.zeros(n, dtype=np.uint64)
    active = p > target
    while np.any(active):
        k = keys[active]
        p[active] *= _unit(_sm64(k, j[active]))
        j[active] += _ONE
        done = active & (p <= target)
        active &= ~done
        out[active] += 1.0
    return out


def _poisson_ptrs_np(keys, lam):
    """Exact Poisson for 10 <= lam < 1e3, Hormann's PTRS rejection."""
    from scipy.special import gammaln

    n = lam.size
    out = np.empty(n)
    b = 0.931 + 2.53 * np.sqrt(lam)
    a = -0.059 + 0.02483 * b
    vr = 0.9277 - 3.6224 / (b - 2.0)
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    log_lam = np.log(lam)
    j = np.zeros(n, dtype=np.uint64)
    active = np.ones(n, dtype=bool)
    while np.any(active):
        idx = np.nonzero(active)[0]
        k = keys[idx]
        u = _unit(_sm64(k, j[idx])) - 0.5
        v = _unit(_sm64(k, j[idx] + _ONE))
        j[idx] += np.uint64(2)
        us = 0.5 - np.abs(u)
        kk = np.floor((2.0 * a[idx] / us + b[idx]) * u + lam[idx] + 0.43)
        accept = (us >= 0.07) & (v <= vr[idx])
        retry = (kk < 0.0) | ((us < 0.013) & (v > us))
        slow = ~accept & ~retry
        if np.any(slow):
            s = idx[slow]
            lhs = np.log(v[slow] * inv_alpha[s] / (a[s] / (us[slow] * us[slow]) + b[s]))
            rhs = kk[slow] * log_lam[s] - lam[s] - gammaln(kk[slow] + 1.0)
            ok = lhs <= rhs
            sel = np.zeros(n, dtype=bool)
            sel[s[ok]] = True
            accept |= sel[idx]
        out[idx[accept]] = kk[accept]
        active[idx[accept]] = False
    return out


def _shot_draw_np(keys, lam):
    """Photon-count draw per sample; branch on the expected count."""
    out = np.array(lam, dtype=float, copy=True)
    mk = (lam > 0.0) & (lam < POISSON_KNUTH_MAX)
    mp = (lam >= POISSON_KNUTH_MAX) & (lam < POISSON_GAUSS_THRESHOLD)
    mg = lam >= POISSON_GAUSS_THRESHOLD
    if np.any(mk):
        out[mk] = _poisson_knuth_np(keys[mk], lam[mk])
    if np.any(mp):
        out[mp] = _poisson_ptrs_np(keys[mp], lam[mp])
    if np.any(mg):
        out[mg] = lam[mg] + np.sqrt(lam[mg]) * _gauss_np(keys[mg], np.uint64(0))
    return out


def _lowpass_np(x, alpha):
    """Single-pole IIR low-pass, state initialized at the first sample."""
    from scipy.signal import lfilter

    y, _ = lfilter([alpha], [1.0, alpha - 1.0], x, zi=[(1.0 - alpha) * x[0]])
    return y


def _synth_trace_np(ideal_w, background_w, dt_s, e_photon_j, noise_rms_w,
                    shot, lp_alpha, responsivity, seed, index):
    key = trace_key(seed, index)
    n = ideal_w.size
    sample_idx = np.arange(n, dtype=np.uint64)
    power = ideal_w + background_w
    if shot:
        shot_keys = _sm64(key ^ _SHOT_TAG, sample_idx)
        lam = power * (dt_s / e_photon_j)
        power = _shot_draw_np(shot_keys, lam) * (e_photon_j / dt_s)
    if noise_rms_w > 0.0:
        det_keys = _sm64(key ^ _DET_TAG, sample_idx)
        power = power + noise_rms_w * _gauss_np(det_keys, np.uint64(0))
    if lp_alpha > 0.0:
        power = _lowpass_np(power, lp_alpha)
    return responsivity * power


def _accumulate_np(ideal_w, background_w, dt_s, e_photon_j, noise_rms_w,
                   shot, lp_alpha, responsivity, seed, index_start, m):
    acc = np.zeros(ideal_w.size)
    acc2 = np.zeros(ideal_w.size)
    for i in range(m):
        tr = _synth_trace_np(ideal_w, background_w, dt_s, e_photon_j,
                             noise_rms_w, shot, lp_alpha, responsivity,
                             seed, index_start + i)
        acc += tr
        acc2 += tr * tr
    return acc, acc2


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap if not (args and callable(args[0])) else args[0]


@njit(cache=True)
def _mix64_nb(z):
    z = (z ^ (z >> _R30)) * _MIX1
    z = (z ^ (z >> _R27)) * _MIX2
    return z ^ (z >> _R31)


@njit(cache=True)
def _sm64_nb(key, i):
    return _mix64_nb(key + (i + _ONE) * _GOLD)


@njit(cache=True)
def _unit_nb(x):
    return float((x >> _R11) + _ONE) * _U53


@njit(cache=True)
def _gauss_nb(key, j0):
    u1 = _unit_nb(_sm64_nb(key, j0))
    u2 = _unit_nb(_sm64_nb(key, j0 + _ONE))
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)


@njit(cache=True)
def _poisson_knuth_nb(key, lam):
    target = math.exp(-lam)
    p = 1.0
    j = np.uint64(0)
    k = -1.0
    while p > target:
        p *= _unit_nb(_sm64_nb(key, j))
        j += _ONE
        k += 1.0
    return k


@njit(cache=True)
def _poisson_ptrs_nb(key, lam):
    b = 0.931 + 2.53 * math.sqrt(lam)
    a = -0.059 + 0.02483 * b
    vr = 0.9277 - 3.6224 / (b - 2.0)
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    log_lam = math.log(lam)
    j = np.uint64(0)
    while True:
        u = _unit_nb(_sm64_nb(key, j)) - 0.5
        v = _unit_nb(_sm64_nb(key, j + _ONE))
        j += np.uint64(2)
        us = 0.5 - abs(u)
        kk = math.floor((2.0 * a / us + b) * u + lam + 0.43)
        if us >= 0.07 and v <= vr:
            return kk
        if kk < 0.0 or (us < 0.013 and v > us):
            continue
        lhs = math.log(v * inv_alpha / (a / (us * us) + b))
        if lhs <= kk * log_lam - lam - math.lgamma(kk + 1.0):
            return kk


@njit(cache=True)
def _shot_draw_nb(key, lam):
    if lam <= 0.0:
        return lam
    if lam < POISSON_KNUTH_MAX:
        return _poisson_knuth_nb(key, lam)
    if lam < POISSON_GAUSS_THRESHOLD:
        return _poisson_ptrs_nb(key, lam)
    return lam + math.sqrt(lam) * _gauss_nb(key, np.uint64(0))


@njit(cache=True)
def _synth_trace_nb(ideal_w, background_w, dt_s, e_photon_j, noise_rms_w,
                    shot, lp_alpha, responsivity, key, out):
    n = ideal_w.size
    shot_base = key ^ _SHOT_TAG
    det_base = key ^ _DET_TAG
    per_photon = dt_s / e_photon_j
    per_count = e_photon_j / dt_s
    y_prev = 0.0
    for i in range(n):
        ui = np.uint64(i)
        p = ideal_w[i] + background_w
        if shot:
            lam = p * per_photon
            p = _shot_draw_nb(_sm64_nb(shot_base, ui), lam) * per_count
        if noise_rms_w > 0.0:
            p = p + noise_rms_w * _gauss_nb(_sm64_nb(det_base, ui), np.uint64(0))
        if lp_alpha > 0.0:
            if i == 0:
                y_prev = p
            y_prev = lp_alpha * p + (1.0 - lp_alpha) * y_prev
            p = y_prev
        out[i] = responsivity * p


@njit(cache=True)
def _accumulate_nb(ideal_w, background_w, dt_s, e_photon_j, noise_rms_w,
                   shot, lp_alpha, responsivity, seed, index_start, m):
    n = ideal_w.size
    acc = np.zeros(n)
    acc2 = np.zeros(n)
    tmp = np.empty(n)
    root = _sm64_nb(seed, np.uint64(0))
    for t in range(m):
        key = _sm64_nb(root, np.uint64(index_start + t))
        _synth_trace_nb(ideal_w, background_w, dt_s, e_photon_j, noise_rms_w,
                        shot, lp_alpha, responsivity, key, tmp)
        for i in range(n):
            acc[i] += tmp[i]
            acc2[i] += tmp[i] * tmp[i]
    return acc, acc2


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_backend = os.environ.get("FWMSIM_BACKEND", "numba" if NUMBA_AVAILABLE else "numpy")
if _backend not in ("numba", "numpy"):
    warnings.warn(f"unknown FWMSIM_BACKEND={_backend!r}, falling back to numpy")
    _backend = "numpy"
if _backend == "numba" and not NUMBA_AVAILABLE:
    warnings.warn("numba not importable, using numpy backend")
    _backend = "numpy"


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if NUMBA_AVAILABLE else ("numpy",)


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in available_backends():
        raise ValueError(f"backend must be one of {available_backends()}, got {name!r}")
    _backend = name


def synth_trace(ideal_w: np.ndarray, background_w: float, dt_s: float,
                e_photon_j: float, noise_rms_w: float, shot: bool,
                lp_alpha: float, responsivity: float, seed: int,
                index: int) -> np.ndarray:
    """One noisy detected trace for the given (seed, trace index)."""
    if _backend == "numba":
        out = np.empty(ideal_w.size)
        key = trace_key(seed, index)
        _synth_trace_nb(ideal_w, background_w, dt_s, e_photon_j, noise_rms_w,
                        shot, lp_alpha, responsivity, key, out)
        return out
    return _synth_trace_np(ideal_w, background_w, dt_s, e_photon_j,
                           noise_rms_w, shot, lp_alpha, responsivity,
                           seed, index)


def accumulate_traces(ideal_w: np.ndarray, background_w: float, dt_s: float,
                      e_photon_j: float, noise_rms_w: float, shot: bool,
                      lp_alpha: float, responsivity: float, seed: int,
                      index_start: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Sum and sum-of-squares over traces [index_start, index_start+m).

    Accumulation is index-ordered, so the result is independent of how
    callers split the index range (and bit-stable within a backend).
    """
    if _backend == "numba":
        return _accumulate_nb(ideal_w, background_w, dt_s, e_photon_j,
                              noise_rms_w, shot, lp_alpha, responsivity,
                              np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
                              index_start, m)
    return _accumulate_np(ideal_w, background_w, dt_s, e_photon_j,
                          noise_rms_w, shot, lp_alpha, responsivity,
                          seed, index_start, m)
