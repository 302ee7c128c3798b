"""ASC CDL transform: slope/offset/power per channel plus scalar saturation.

Per channel v = clamp(s * x + o, 0)^p, then saturation mixes each channel
with the luma of the transformed pixel: S(v; sat) = L(v) + sat * (v - L(v)).
The pre-clamp at zero keeps the power real-valued; its gradient is zero on
the clamped side.  Output is clamped to [0, 1] only at write-out.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass

import numpy as np

__all__ = ["CdlParams", "LUMA_WEIGHTS", "luma", "apply_cdl", "cdl_vjp", "cdl_xml_write", "cdl_xml_read"]

LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])


@dataclass(frozen=True)
class CdlParams:
    """Per-channel slope/offset/power and scalar saturation."""

    slope: np.ndarray
    offset: np.ndarray
    power: np.ndarray
    saturation: float

    def __post_init__(self) -> None:
        for name in ("slope", "offset", "power"):
            arr = np.asarray(getattr(self, name), dtype=np.float64).reshape(3)
            object.__setattr__(self, name, arr)
        if np.any(self.slope <= 0):
            raise ValueError(f"slope must be positive, got {self.slope}")
        if np.any(self.power <= 0):
            raise ValueError(f"power must be positive, got {self.power}")
        if self.saturation < 0:
            raise ValueError(f"saturation must be non-negative, got {self.saturation}")
        object.__setattr__(self, "saturation", float(self.saturation))

    @classmethod
    def identity(cls) -> "CdlParams":
        return cls(np.ones(3), np.zeros(3), np.ones(3), 1.0)

    def is_identity(self, tol: float = 0.0) -> bool:
        ref = CdlParams.identity()
        return (
            np.all(np.abs(self.slope - ref.slope) <= tol)
            and np.all(np.abs(self.offset - ref.offset) <= tol)
            and np.all(np.abs(self.power - ref.power) <= tol)
            and abs(self.saturation - ref.saturation) <= tol
        )


def luma(rgb: np.ndarray) -> np.ndarray:
    """Rec. 709 luma: 0.2126 R + 0.7152 G + 0.0722 B."""
    return np.asarray(rgb, dtype=np.float64) @ LUMA_WEIGHTS


def apply_cdl(pixels: np.ndarray, cdl: CdlParams, clamp_output: bool = True) -> np.ndarray:
    """Apply the CDL to (..., 3) pixel values.

    clamp_output=False gives the raw transform used during optimization;
    gradients are always taken on the unclamped values.
    """
    x = np.asarray(pixels, dtype=np.float64)
    pre = x * cdl.slope + cdl.offset
    base = np.maximum(pre, 0.0)
    pw = base**cdl.power
    lum = pw @ LUMA_WEIGHTS
    out = lum[..., None] + cdl.saturation * (pw - lum[..., None])
    if clamp_output:
        out = np.clip(out, 0.0, 1.0)
    return out


def cdl_vjp(
    pixels: np.ndarray, cdl: CdlParams, grad_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Pull a gradient w.r.t. the unclamped output back to the 10 parameters.

    Returns (d_slope, d_offset, d_power, d_saturation) summed over pixels.
    """
    x = np.asarray(pixels, dtype=np.float64)
    g = np.asarray(grad_out, dtype=np.float64)
    pre = x * cdl.slope + cdl.offset
    active = pre > 0.0
    base = np.maximum(pre, 0.0)
    pw = base**cdl.power
    lum = pw @ LUMA_WEIGHTS

    # out_k = sat * pw_k + (1 - sat) * lum
    g_pw = cdl.saturation * g + (1.0 - cdl.saturation) * LUMA_WEIGHTS * g.sum(
        axis=-1, keepdims=True
    )
    d_sat = float(np.sum(g * (pw - lum[..., None])))

    # d pw / d base = p * base^(p-1), zero where the pre-clamp is active
    safe_base = np.where(active, base, 1.0)
    dpw_dbase = np.where(active, cdl.power * safe_base ** (cdl.power - 1.0), 0.0)
    dpw_dpower = np.where(active, pw * np.log(safe_base), 0.0)
    g_base = g_pw * dpw_dbase
    axes = tuple(range(x.ndim - 1))
    d_slope = np.sum(g_base * x, axis=axes)
    d_offset = np.sum(g_base, axis=axes)
    d_power = np.sum(g_pw * dpw_dpower, axis=axes)
    return d_slope, d_offset, d_power, d_sat


def _format_triple(v: np.ndarray) -> str:
    return " ".join(f"{x:.6f}" for x in v)


def cdl_xml_write(cdl: CdlParams) -> str:
    """Serialize to SOPNode/SatNode XML, six decimal places."""
    return (
        "<ColorCorrection>\n"
        "  <SOPNode>\n"
        f"    <Slope>{_format_triple(cdl.slope)}</Slope>\n"
        f"    <Offset>{_format_triple(cdl.offset)}</Offset>\n"
        f"    <Power>{_format_triple(cdl.power)}</Power>\n"
        "  </SOPNode>\n"
        "  <SatNode>\n"
        f"    <Saturation>{cdl.saturation:.6f}</Saturation>\n"
        "  </SatNode>\n"
        "</ColorCorrection>\n"
    )


def _parse_triple(node: ET.Element | None, name: str, parent: str) -> np.ndarray:
    if node is None:
        raise ValueError(f"{name} missing from {parent}")
    parts = (node.text or "").split()
    if len(parts) != 3:
        raise ValueError(f"{name} must hold 3 numbers, got {node.text!r}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise ValueError(f"{name} holds a non-numeric field: {node.text!r}") from exc


def cdl_xml_read(text: str) -> CdlParams:
    """Parse a CDL document written by cdl_xml_write (or equivalent)."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ValueError(f"malformed CDL XML: {exc}") from exc
    sop = root.find(".//SOPNode") if root.tag != "SOPNode" else root
    if sop is None:
        raise ValueError("SOPNode missing")
    slope = _parse_triple(sop.find("Slope"), "Slope", "SOPNode")
    offset = _parse_triple(sop.find("Offset"), "Offset", "SOPNode")
    power = _parse_triple(sop.find("Power"), "Power", "SOPNode")
    sat_node = root.find(".//SatNode")
    if sat_node is None:
        raise ValueError("SatNode missing")
    sat_value = sat_node.find("Saturation")
    if sat_value is None:
        raise ValueError("Saturation missing from SatNode")
    try:
        saturation = float((sat_value.text or "").strip())
    except ValueError as exc:
        raise ValueError(f"Saturation holds a non-numeric field: {sat_value.text!r}") from exc
    return CdlParams(slope, offset, power, saturation)
