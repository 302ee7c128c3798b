"""sRGB <-> CIELAB conversions with analytic derivatives.

Pipeline: sRGB electro-optical decoding -> linear RGB -> XYZ (D65) -> CIELAB.
All pieces are piecewise smooth, defined on the whole real line so that
intermediate out-of-range values during optimization stay finite, and carry
closed-form Jacobians.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "srgb_to_lab",
    "lab_to_srgb",
    "srgb_to_lab_jacobian",
    "SRGB_TO_XYZ",
    "XYZ_TO_SRGB",
    "D65_WHITE",
]

# linear sRGB -> XYZ under the D65 illuminant
SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
XYZ_TO_SRGB = np.linalg.inv(SRGB_TO_XYZ)
D65_WHITE = np.array([0.95047, 1.0, 1.08883])

_SRGB_LIN_THRESHOLD = 0.04045
_SRGB_LIN_SLOPE = 12.92
_SRGB_GAMMA = 2.4
_SRGB_A = 0.055

_LAB_DELTA = 6.0 / 29.0
_LAB_T0 = _LAB_DELTA**3
_LAB_LIN_SLOPE = 1.0 / (3.0 * _LAB_DELTA**2)
_LAB_OFFSET = 4.0 / 29.0


def _srgb_decode(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    lin = c / _SRGB_LIN_SLOPE
    pow_branch = np.sign(c) * ((np.abs(c) + _SRGB_A) / (1.0 + _SRGB_A)) ** _SRGB_GAMMA
    return np.where(np.abs(c) <= _SRGB_LIN_THRESHOLD, lin, pow_branch)


def _srgb_decode_deriv(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    lin = np.full_like(c, 1.0 / _SRGB_LIN_SLOPE)
    pow_branch = (
        _SRGB_GAMMA / (1.0 + _SRGB_A)
    ) * ((np.abs(c) + _SRGB_A) / (1.0 + _SRGB_A)) ** (_SRGB_GAMMA - 1.0)
    return np.where(np.abs(c) <= _SRGB_LIN_THRESHOLD, lin, pow_branch)


def _srgb_encode(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    lin = v * _SRGB_LIN_SLOPE
    pow_branch = np.sign(v) * ((1.0 + _SRGB_A) * np.abs(v) ** (1.0 / _SRGB_GAMMA) - _SRGB_A)
    return np.where(np.abs(v) <= _SRGB_LIN_THRESHOLD / _SRGB_LIN_SLOPE, lin, pow_branch)


def _lab_f(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    return np.where(t > _LAB_T0, np.cbrt(np.maximum(t, _LAB_T0)), t * _LAB_LIN_SLOPE + _LAB_OFFSET)


def _lab_f_deriv(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    cb = np.cbrt(np.maximum(t, _LAB_T0))
    return np.where(t > _LAB_T0, 1.0 / (3.0 * cb * cb), _LAB_LIN_SLOPE)


def _lab_f_inv(f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    return np.where(f > _LAB_DELTA, f**3, (f - _LAB_OFFSET) / _LAB_LIN_SLOPE)


def srgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    """Convert display-referred sRGB values (..., 3) to CIELAB (..., 3)."""
    rgb = np.asarray(rgb, dtype=np.float64)
    linear = _srgb_decode(rgb)
    xyz = linear @ SRGB_TO_XYZ.T
    f = _lab_f(xyz / D65_WHITE)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def lab_to_srgb(lab: np.ndarray) -> np.ndarray:
    """Inverse of srgb_to_lab on its image."""
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    f = np.stack([fx, fy, fz], axis=-1)
    xyz = _lab_f_inv(f) * D65_WHITE
    linear = xyz @ XYZ_TO_SRGB.T
    return _srgb_encode(linear)


def srgb_to_lab_jacobian(rgb: np.ndarray) -> np.ndarray:
    """Per-point Jacobian d(Lab)/d(sRGB) of shape (..., 3, 3)."""
    rgb = np.asarray(rgb, dtype=np.float64)
    linear = _srgb_decode(rgb)
    dlin = _srgb_decode_deriv(rgb)
    xyz = linear @ SRGB_TO_XYZ.T
    df = _lab_f_deriv(xyz / D65_WHITE) / D65_WHITE  # d f_k / d xyz_k

    # d f_k / d rgb_c = df_k * M[k, c] * dlin_c
    dfd = df[..., :, None] * SRGB_TO_XYZ[None, :, :] * dlin[..., None, :]
    jac = np.empty(rgb.shape[:-1] + (3, 3))
    jac[..., 0, :] = 116.0 * dfd[..., 1, :]
    jac[..., 1, :] = 500.0 * (dfd[..., 0, :] - dfd[..., 1, :])
    jac[..., 2, :] = 200.0 * (dfd[..., 1, :] - dfd[..., 2, :])
    return jac
