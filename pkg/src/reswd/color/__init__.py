"""Differentiable ASC-CDL color pipeline and color matching."""

from .cdl import CdlParams, LUMA_WEIGHTS, apply_cdl, cdl_vjp, cdl_xml_read, cdl_xml_write, luma
from .image import LabImage, RgbImage, read_png, resize_max_dim, write_png
from .match import CdlColorTransform, cdl_to_params, color_match, params_to_cdl, psnr
from .space import lab_to_srgb, srgb_to_lab, srgb_to_lab_jacobian

__all__ = [
    "CdlParams",
    "LUMA_WEIGHTS",
    "apply_cdl",
    "cdl_vjp",
    "cdl_xml_read",
    "cdl_xml_write",
    "luma",
    "LabImage",
    "RgbImage",
    "read_png",
    "resize_max_dim",
    "write_png",
    "CdlColorTransform",
    "cdl_to_params",
    "color_match",
    "params_to_cdl",
    "psnr",
    "lab_to_srgb",
    "srgb_to_lab",
    "srgb_to_lab_jacobian",
    "image_to_lab",
    "lab_to_image",
]


def image_to_lab(img: RgbImage) -> LabImage:
    """RgbImage -> LabImage using the standard conversion chain."""
    return LabImage(srgb_to_lab(img.pixels))


def lab_to_image(lab: LabImage) -> RgbImage:
    """LabImage -> RgbImage; out-of-gamut values clamp on construction."""
    return RgbImage(lab_to_srgb(lab.pixels))
