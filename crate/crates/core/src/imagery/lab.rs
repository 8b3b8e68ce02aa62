//! sRGB (D65) to CIE L*a*b* conversion.

use std::sync::OnceLock;

/// CIE L*a*b* triple.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Lab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

// sRGB primaries to XYZ, D65. Rows sum to the white point below.
const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];
const WHITE_D65: [f64; 3] = [0.95047, 1.0, 1.08883];

// (6/29)^3 and the linear segment slope 1/(3·(6/29)^2).
const EPSILON: f64 = 216.0 / 24389.0;
const LINEAR_SLOPE: f64 = 841.0 / 108.0;

fn linear_table() -> &'static [f64; 256] {
    static TABLE: OnceLock<[f64; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; 256];
        for (i, v) in t.iter_mut().enumerate() {
            *v = srgb_to_linear(i as f64 / 255.0);
        }
        t
    })
}

fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    if t > EPSILON {
        t.cbrt()
    } else {
        LINEAR_SLOPE * t + 4.0 / 29.0
    }
}

/// Converts one 8-bit sRGB pixel.
pub fn srgb8_to_lab(rgb: [u8; 3]) -> Lab {
    let table = linear_table();
    let lin = [
        table[rgb[0] as usize],
        table[rgb[1] as usize],
        table[rgb[2] as usize],
    ];
    let mut xyz = [0.0; 3];
    for (out, row) in xyz.iter_mut().zip(SRGB_TO_XYZ.iter()) {
        *out = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
    }
    let fx = lab_f(xyz[0] / WHITE_D65[0]);
    let fy = lab_f(xyz[1] / WHITE_D65[1]);
    let fz = lab_f(xyz[2] / WHITE_D65[2]);
    Lab {
        l: (116.0 * fy - 16.0).clamp(0.0, 100.0),
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    }
}

/// Converts a row-major RGB8 raster (3 bytes per pixel) to L*a*b*.
///
/// Trailing bytes that do not form a full pixel are ignored.
pub fn rgb_to_lab(raster: &[u8]) -> Vec<Lab> {
    raster
        .chunks_exact(3)
        .map(|p| srgb8_to_lab([p[0], p[1], p[2]]))
        .collect()
}
