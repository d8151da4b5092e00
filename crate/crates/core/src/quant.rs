//! Quantization grid and dequantization of extrusion fields.
//!
//! Every numeric token is an integer on a 64-level grid. Sketch coordinates map
//! to the normalized sketch square `[0, 1)` as `v / 64`. Signed extrusion
//! quantities (extents, translation) are centered on 32 and step by `1/32`,
//! which is the same world-space step as one sketch grid unit. Rotation
//! entries are centered on 32 but step by `1/31` so that `{1, 32, 63}` encode
//! `{-1, 0, 1}` exactly.

/// Number of quantization levels per axis.
pub const GRID: u8 = 64;

/// Token value that dequantizes to zero for signed fields.
pub const SIGNED_ZERO: u8 = 32;

/// Token value that dequantizes to a unit scale factor.
pub const UNIT_SCALE: u8 = 32;

/// Rotation tokens for `-1`, `0` and `1`.
pub const ROT_NEG: u8 = 1;
pub const ROT_ZERO: u8 = 32;
pub const ROT_POS: u8 = 63;

#[inline]
pub fn in_grid(v: u8) -> bool {
    v < GRID
}

/// Sketch coordinate to normalized sketch-plane position in `[0, 1)`.
#[inline]
pub fn sketch_unit(v: f64) -> f64 {
    v / GRID as f64
}

/// Signed world-space displacement in `[-1, 31/32]`.
#[inline]
pub fn signed(v: u8) -> f64 {
    (v as f64 - SIGNED_ZERO as f64) / 32.0
}

#[inline]
pub fn rotation_entry(v: u8) -> f64 {
    (v as f64 - ROT_ZERO as f64) / 31.0
}

#[inline]
pub fn scale(v: u8) -> f64 {
    v as f64 / UNIT_SCALE as f64
}

/// Inverse of [`signed`], rounding to the nearest grid value.
pub fn quantize_signed(x: f64) -> u8 {
    (x * 32.0 + SIGNED_ZERO as f64).round().clamp(0.0, (GRID - 1) as f64) as u8
}
