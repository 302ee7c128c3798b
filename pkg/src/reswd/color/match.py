"""End-to-end color matching: fit a CDL so a source image matches a reference."""

from __future__ import annotations

import numpy as np

from ..estimator import ReswdConfig
from ..numeric import SampleSet
from ..optimize import Adam, MatchReport, fit_transform
from .cdl import CdlParams, apply_cdl, cdl_vjp
from .image import RgbImage, resize_max_dim
from .space import srgb_to_lab, srgb_to_lab_jacobian

__all__ = ["CdlColorTransform", "color_match", "params_to_cdl", "cdl_to_params", "psnr"]

DEFAULT_COLOR_LR = 2e-2
WORKING_MAX_DIM = 128


def cdl_to_params(cdl: CdlParams) -> np.ndarray:
    """Encode a CDL as an unconstrained 10-vector.

    Slope, power and saturation pass through log so that any real parameter
    vector decodes to a valid CDL; offsets are raw.
    """
    return np.concatenate(
        [np.log(cdl.slope), cdl.offset, np.log(cdl.power), [np.log(cdl.saturation)]]
    )


def params_to_cdl(params: np.ndarray) -> CdlParams:
    params = np.asarray(params, dtype=np.float64).reshape(10)
    return CdlParams(
        slope=np.exp(params[0:3]),
        offset=params[3:6],
        power=np.exp(params[6:9]),
        saturation=float(np.exp(params[9])),
    )


class CdlColorTransform:
    """CDL application followed by CIELAB conversion, with parameter VJP.

    Operates on unclamped CDL output so gradients stay informative near the
    range limits; the conversions are defined on the whole real line.
    """

    def apply(self, params: np.ndarray, source: np.ndarray) -> np.ndarray:
        cdl = params_to_cdl(params)
        return srgb_to_lab(apply_cdl(source, cdl, clamp_output=False))

    def vjp(self, params: np.ndarray, source: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
        cdl = params_to_cdl(params)
        rgb_out = apply_cdl(source, cdl, clamp_output=False)
        jac = srgb_to_lab_jacobian(rgb_out)
        g_rgb = np.einsum("...k,...kc->...c", grad_out, jac)
        d_slope, d_offset, d_power, d_sat = cdl_vjp(source, cdl, g_rgb)
        return np.concatenate(
            [
                d_slope * cdl.slope,
                d_offset,
                d_power * cdl.power,
                [d_sat * cdl.saturation],
            ]
        )


def color_match(
    source: RgbImage,
    reference: RgbImage,
    cfg: ReswdConfig | None = None,
    steps: int = 150,
    lr: float = DEFAULT_COLOR_LR,
    mode: str = "reswd",
) -> tuple[CdlParams, MatchReport]:
    """Fit CDL parameters so the graded source matches the reference.

    Both images are downscaled to WORKING_MAX_DIM and treated as pixel
    distributions in CIELAB; the fitted CDL applies to the full-resolution
    source.
    """
    cfg = cfg or ReswdConfig()
    src_small = resize_max_dim(source, WORKING_MAX_DIM).flatten()
    ref_small = resize_max_dim(reference, WORKING_MAX_DIM).flatten()
    ref_lab = srgb_to_lab(ref_small)

    params0 = cdl_to_params(CdlParams.identity())
    params, report = fit_transform(
        params0,
        CdlColorTransform(),
        SampleSet(src_small),
        SampleSet(ref_lab),
        cfg,
        steps,
        Adam(lr=lr),
        mode=mode,
    )
    if float(np.ptp(ref_small, axis=0).max()) < 1e-6:
        report.warnings.append("reference image is a single constant color")
    return params_to_cdl(params), report


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB between arrays of equal shape."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(peak * peak / mse))
