//! Seeded synthetic image pairs with a known changed rectangle.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use broadcd_core::{Error, Result};
use image::{GrayImage, RgbImage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Axis-aligned rectangle, written `X,Y,W,H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl Rect {
    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && y >= self.y && x - self.x < self.width && y - self.y < self.height
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width) * u64::from(self.height)
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.x, self.y, self.width, self.height)
    }
}

impl FromStr for Rect {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<u32> = s
            .split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|e| format!("`{p}`: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        match parts[..] {
            [x, y, width, height] => Ok(Rect {
                x,
                y,
                width,
                height,
            }),
            _ => Err(format!("expected X,Y,W,H, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub width: u32,
    pub height: u32,
    pub rect: Rect,
    /// Standard deviation of the per-channel Gaussian noise, in 8-bit units.
    pub noise: f64,
    /// Intensity shift added to every channel inside the rectangle.
    pub delta: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            width: 64,
            height: 64,
            rect: Rect {
                x: 24,
                y: 24,
                width: 16,
                height: 16,
            },
            noise: 4.0,
            delta: 60.0,
        }
    }
}

pub struct SynthPair {
    pub reference: RgbImage,
    pub test: RgbImage,
    pub mask: GrayImage,
}

const BACKGROUND: [f64; 3] = [110.0, 120.0, 100.0];

fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let r = self.rect;
        if self.width == 0 || self.height == 0 {
            return Err(Error::Geometry(format!(
                "empty image {}x{}",
                self.width, self.height
            )));
        }
        if r.width == 0 || r.height == 0 {
            return Err(Error::Geometry(format!("empty rectangle {r}")));
        }
        let fits_x = u64::from(r.x) + u64::from(r.width) <= u64::from(self.width);
        let fits_y = u64::from(r.y) + u64::from(r.height) <= u64::from(self.height);
        if !fits_x || !fits_y {
            return Err(Error::Geometry(format!(
                "rectangle {r} does not fit in {}x{}",
                self.width, self.height
            )));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise sigma {} must be finite and >= 0",
                self.noise
            )));
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameter("delta must be finite".into()));
        }
        Ok(())
    }

    /// Reference is background plus noise; test is the reference, shifted by
    /// `delta` inside the rectangle, plus fresh noise.
    pub fn generate(&self, seed: u64) -> Result<SynthPair> {
        self.validate()?;
        let normal = Normal::new(0.0, self.noise)
            .map_err(|e| Error::InvalidParameter(format!("noise sigma: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut reference = RgbImage::new(self.width, self.height);
        let mut base = Vec::with_capacity((self.width * self.height * 3) as usize);
        for px in reference.pixels_mut() {
            for (c, bg) in BACKGROUND.iter().enumerate() {
                let v = quantize(bg + normal.sample(&mut rng));
                px.0[c] = v;
                base.push(v);
            }
        }
        let mut test = RgbImage::new(self.width, self.height);
        let mut mask = GrayImage::new(self.width, self.height);
        for (i, (x, y, px)) in test.enumerate_pixels_mut().enumerate() {
            let inside = self.rect.contains(x, y);
            let shift = if inside { self.delta } else { 0.0 };
            for c in 0..3 {
                px.0[c] = quantize(f64::from(base[i * 3 + c]) + shift + normal.sample(&mut rng));
            }
            if inside {
                mask.put_pixel(x, y, image::Luma([255]));
            }
        }
        Ok(SynthPair {
            reference,
            test,
            mask,
        })
    }
}

impl SynthPair {
    /// Writes `ref.png`, `test.png` and `mask.png` into `dir`, creating it if needed.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        let write = |name: &str, img: &dyn Fn(&Path) -> image::ImageResult<()>| {
            let path = dir.join(name);
            img(&path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
        };
        write("ref.png", &|p| self.reference.save(p))?;
        write("test.png", &|p| self.test.save(p))?;
        write("mask.png", &|p| self.mask.save(p))?;
        Ok(())
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}
