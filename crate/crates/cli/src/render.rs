//! Binary PPM rendering of phase-space arrays.
//!
//! In `hls-complex` mode hue encodes the phase and lightness the modulus.
//! The hue wheel is turned by 2/3 so positive reals come out blue and
//! negative reals yellow; lightness is `clamp(|z|, 0, 1)^(1/gamma)`, so zero
//! is black and unit modulus is white. `real-diverging` ignores the
//! imaginary part and fades from white at zero to blue (positive) or yellow
//! (negative) at `|Re z| = 1`.
//!
//! The image is centered on the origin: columns run over `q = -d .. d-1`
//! left to right and rows over `p = d-1 .. -d` top to bottom.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use torus_wigner::phase_repr::PhaseArray;
use torus_wigner::PhasePoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ColorMode {
    HlsComplex,
    RealDiverging,
}

impl fmt::Display for ColorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColorMode::HlsComplex => "hls-complex",
            ColorMode::RealDiverging => "real-diverging",
        })
    }
}

impl FromStr for ColorMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hls-complex" => Ok(ColorMode::HlsComplex),
            "real-diverging" => Ok(ColorMode::RealDiverging),
            _ => Err(format!("unknown color mode `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderSpec {
    /// Pixels per lattice cell along each axis.
    pub scale: usize,
    pub mode: ColorMode,
    pub gamma: f64,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            scale: 8,
            mode: ColorMode::HlsComplex,
            gamma: 1.0,
        }
    }
}

impl RenderSpec {
    /// Picks the scale that gives `width` pixels on a `2d`-cell grid.
    pub fn scale_for_width(width: usize, d: usize) -> Result<usize, String> {
        let cells = 2 * d;
        if width == 0 || !width.is_multiple_of(cells) {
            return Err(format!("width {width} is not a positive multiple of the {cells}-cell grid"));
        }
        Ok(width / cells)
    }
}

/// Hexcone HSL to 8-bit RGB; all inputs in `[0, 1]`.
pub fn hsl_to_rgb(h: f64, s: f64, l: f64) -> [u8; 3] {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = (h.rem_euclid(1.0)) * 6.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let to_byte = |v: f64| ((v + m).clamp(0.0, 1.0) * 255.0).round_ties_even() as u8;
    [to_byte(r), to_byte(g), to_byte(b)]
}

const BLUE_HUE: f64 = 2.0 / 3.0;
const YELLOW_HUE: f64 = 1.0 / 6.0;

pub fn complex_color(z: Complex64, gamma: f64) -> [u8; 3] {
    let hue = (z.arg() / TAU + BLUE_HUE).rem_euclid(1.0);
    let l = z.norm().clamp(0.0, 1.0).powf(1.0 / gamma);
    hsl_to_rgb(hue, 1.0, l)
}

pub fn diverging_color(v: f64, gamma: f64) -> [u8; 3] {
    let t = v.abs().clamp(0.0, 1.0).powf(1.0 / gamma);
    let hue = if v >= 0.0 { BLUE_HUE } else { YELLOW_HUE };
    hsl_to_rgb(hue, 1.0, 1.0 - t / 2.0)
}

/// The label drawn at image cell `(row, col)`.
pub fn cell_label(d: usize, row: usize, col: usize) -> PhasePoint {
    let d = d as i64;
    PhasePoint::new(col as i64 - d, d - 1 - row as i64)
}

pub fn render_ppm(arr: &PhaseArray, spec: &RenderSpec) -> Vec<u8> {
    let d = arr.dim().d();
    let cells = 2 * d;
    let side = cells * spec.scale;
    let mut out = format!("P6\n{side} {side}\n255\n").into_bytes();
    out.reserve(side * side * 3);
    for row in 0..cells {
        let colors: Vec<[u8; 3]> = (0..cells)
            .map(|col| {
                let z = arr.get(cell_label(d, row, col));
                match spec.mode {
                    ColorMode::HlsComplex => complex_color(z, spec.gamma),
                    ColorMode::RealDiverging => diverging_color(z.re, spec.gamma),
                }
            })
            .collect();
        for _ in 0..spec.scale {
            for c in &colors {
                for _ in 0..spec.scale {
                    out.extend_from_slice(c);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primary_hues() {
        assert_eq!(hsl_to_rgb(0.0, 1.0, 0.5), [255, 0, 0]);
        assert_eq!(hsl_to_rgb(1.0 / 3.0, 1.0, 0.5), [0, 255, 0]);
        assert_eq!(hsl_to_rgb(2.0 / 3.0, 1.0, 0.5), [0, 0, 255]);
        assert_eq!(hsl_to_rgb(0.3, 1.0, 0.0), [0, 0, 0]);
        assert_eq!(hsl_to_rgb(0.3, 1.0, 1.0), [255, 255, 255]);
    }

    #[test]
    fn sign_convention() {
        let pos = complex_color(Complex64::new(0.5, 0.0), 1.0);
        let neg = complex_color(Complex64::new(-0.5, 0.0), 1.0);
        assert_eq!(pos, [0, 0, 255]);
        assert_eq!(neg, [255, 255, 0]);
        assert_eq!(complex_color(Complex64::new(0.0, 0.0), 1.0), [0, 0, 0]);
        assert_eq!(diverging_color(0.0, 1.0), [255, 255, 255]);
        assert_eq!(diverging_color(1.0, 1.0), [0, 0, 255]);
        assert_eq!(diverging_color(-1.0, 1.0), [255, 255, 0]);
    }

    #[test]
    fn layout_is_centered() {
        assert_eq!(cell_label(3, 0, 0), PhasePoint::new(-3, 2));
        assert_eq!(cell_label(3, 2, 3), PhasePoint::ORIGIN);
        assert_eq!(RenderSpec::scale_for_width(24, 3), Ok(4));
        assert!(RenderSpec::scale_for_width(25, 3).is_err());
    }
}
