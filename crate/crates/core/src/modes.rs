//! Laguerre-Gaussian transverse modes and the tilted-lens charge diagnostic.
//!
//! A tilted lens is modelled as the astigmatic phase
//! `exp(i·a·(x² − y²)/w²)` followed by a far-field (Fourier) transform. An
//! LG beam of charge `l` then breaks into `|l| + 1` lobes separated by `|l|`
//! dark stripes, lined up along one image diagonal for `l > 0` and the other
//! for `l < 0`.
//!
//! Grids are row-major. Row `i` sits at `y = (i − h/2)·pitch` and column `j`
//! at `x = (j − w/2)·pitch`, so pixel `(h/2, w/2)` is exactly on axis.

use std::io::Write;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_CHARGE: i32 = 16;
pub const MIN_PIXELS_PER_WAIST: f64 = 8.0;
pub const DEFAULT_ASTIGMATISM: f64 = 2.0;
/// Profile samples darker than this fraction of the peak count as dark.
pub const DARK_FRACTION: f64 = 0.05;
/// Minimum lobe-to-dip intensity ratio for a clear stripe.
pub const MIN_CONTRAST: f64 = 2.0;

/// An LG mode with radial index 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LgMode {
    l: i32,
    waist: f64,
}

impl LgMode {
    pub fn new(l: i32, waist: f64) -> Result<Self> {
        if l.abs() > MAX_CHARGE {
            return Err(Error::invalid(format!("|l| must be <= {MAX_CHARGE}, got {l}")));
        }
        if !(waist.is_finite() && waist > 0.0) {
            return Err(Error::invalid(format!("beam waist must be positive, got {waist}")));
        }
        Ok(Self { l, waist })
    }

    /// Unit-waist mode.
    pub fn with_charge(l: i32) -> Result<Self> {
        Self::new(l, 1.0)
    }

    pub fn charge(&self) -> i32 {
        self.l
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    /// Radius of peak intensity, `w·√(|l|/2)`.
    pub fn ring_radius(&self) -> f64 {
        self.waist * (self.l.abs() as f64 / 2.0).sqrt()
    }
}

/// Sampling of the transverse plane. `extent` is the half-width of the grid
/// along x in units of the beam waist.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub extent: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { width: 512, height: 512, extent: 6.0 }
    }
}

impl GridSpec {
    pub fn square(size: usize, extent: f64) -> Self {
        Self { width: size, height: size, extent }
    }

    pub fn pixels_per_waist(&self) -> f64 {
        self.width as f64 / (2.0 * self.extent)
    }

    fn check(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 {
            return Err(Error::invalid("grid needs at least 2×2 pixels"));
        }
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return Err(Error::invalid(format!("grid extent must be positive, got {}", self.extent)));
        }
        check_resolution(self.pixels_per_waist())
    }
}

fn check_resolution(pixels_per_waist: f64) -> Result<()> {
    if pixels_per_waist < MIN_PIXELS_PER_WAIST {
        return Err(Error::Resolution {
            pixels_per_waist,
            required: MIN_PIXELS_PER_WAIST,
        });
    }
    Ok(())
}

/// Sampled complex field amplitude.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldGrid {
    pub width: usize,
    pub height: usize,
    /// Pixel pitch in the same length units as `waist`.
    pub pitch: f64,
    pub waist: f64,
    pub values: Vec<Complex64>,
}

impl FieldGrid {
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.width + col]
    }

    pub fn pixels_per_waist(&self) -> f64 {
        self.waist / self.pitch
    }

    /// `Σ|E|² · pitch²`.
    pub fn power(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.pitch * self.pitch
    }

    pub fn intensity(&self) -> IntensityGrid {
        IntensityGrid {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|z| z.norm_sqr()).collect(),
        }
    }

    /// Scales the amplitude by `t`, e.g. the square root of a transmission.
    pub fn attenuate(&self, t: f64) -> FieldGrid {
        FieldGrid {
            values: self.values.iter().map(|z| z * t).collect(),
            ..self.clone()
        }
    }

    fn coords(&self, row: usize, col: usize) -> (f64, f64) {
        let x = (col as f64 - (self.width / 2) as f64) * self.pitch;
        let y = (row as f64 - (self.height / 2) as f64) * self.pitch;
        (x, y)
    }
}

/// `(√2 r/w)^|l| e^{−r²/w²} e^{ilφ}`, normalized to unit power on the grid.
pub fn lg_field(mode: &LgMode, grid: &GridSpec) -> Result<FieldGrid> {
    grid.check()?;
    let w = mode.waist();
    let pitch = 2.0 * grid.extent * w / grid.width as f64;
    let abs_l = mode.charge().unsigned_abs() as i32;
    let mut field = FieldGrid {
        width: grid.width,
        height: grid.height,
        pitch,
        waist: w,
        values: vec![Complex64::new(0.0, 0.0); grid.width * grid.height],
    };
    for row in 0..grid.height {
        for col in 0..grid.width {
            let (x, y) = field.coords(row, col);
            let r2 = (x * x + y * y) / (w * w);
            let radial = (2.0 * r2).sqrt().powi(abs_l) * (-r2).exp();
            let phi = y.atan2(x);
            field.values[row * grid.width + col] =
                Complex64::from_polar(radial, mode.charge() as f64 * phi);
        }
    }
    let norm = field.power().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::NumericalDegeneracy("mode has no power on the grid".into()));
    }
    for z in &mut field.values {
        *z /= norm;
    }
    Ok(field)
}

/// Non-negative intensity image.
#[derive(Clone, Debug, PartialEq)]
pub struct IntensityGrid {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl IntensityGrid {
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Binary PGM (P5), linearly mapping `[0, peak]` onto the full gray range.
    /// 16-bit samples are big-endian.
    pub fn write_pgm<W: Write>(&self, mut w: W, depth: BitDepth) -> Result<()> {
        let maxval: u32 = match depth {
            BitDepth::Eight => 255,
            BitDepth::Sixteen => 65535,
        };
        write!(w, "P5\n{} {}\n{}\n", self.width, self.height, maxval)?;
        let peak = self.peak();
        let scale = if peak > 0.0 { maxval as f64 / peak } else { 0.0 };
        let level = |v: f64| (v.max(0.0) * scale).round().min(maxval as f64) as u32;
        let bytes: Vec<u8> = match depth {
            BitDepth::Eight => self.values.iter().map(|&v| level(v) as u8).collect(),
            BitDepth::Sixteen => self
                .values
                .iter()
                .flat_map(|&v| (level(v) as u16).to_be_bytes())
                .collect(),
        };
        w.write_all(&bytes)?;
        Ok(())
    }

    /// Bilinear sample at fractional `(row, col)`; zero outside the grid.
    fn sample(&self, row: f64, col: f64) -> f64 {
        if row < 0.0 || col < 0.0 {
            return 0.0;
        }
        let (r0, c0) = (row.floor() as usize, col.floor() as usize);
        if r0 + 1 >= self.height || c0 + 1 >= self.width {
            return 0.0;
        }
        let (fr, fc) = (row - r0 as f64, col - c0 as f64);
        let top = self.at(r0, c0) * (1.0 - fc) + self.at(r0, c0 + 1) * fc;
        let bottom = self.at(r0 + 1, c0) * (1.0 - fc) + self.at(r0 + 1, c0 + 1) * fc;
        top * (1.0 - fr) + bottom * fr
    }
}

/// `mode_l{l}_{stage}.pgm`
pub fn pgm_file_name(l: i32, stage: &str) -> String {
    format!("mode_l{l}_{stage}.pgm")
}

/// Moves index `n/2` to 0 (`forward = false`) or 0 to `n/2` (`forward = true`).
fn shift2(data: &[Complex64], width: usize, height: usize, forward: bool) -> Vec<Complex64> {
    let (cw, ch) = (width / 2, height / 2);
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for row in 0..height {
        for col in 0..width {
            let (r, c) = if forward {
                ((row + ch) % height, (col + cw) % width)
            } else {
                ((row + height - ch) % height, (col + width - cw) % width)
            };
            out[r * width + c] = data[row * width + col];
        }
    }
    out
}

fn fft2(data: &mut [Complex64], width: usize, height: usize) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(width).process(data);
    let mut cols = vec![Complex64::new(0.0, 0.0); data.len()];
    for row in 0..height {
        for col in 0..width {
            cols[col * height + row] = data[row * width + col];
        }
    }
    planner.plan_fft_forward(height).process(&mut cols);
    for col in 0..width {
        for row in 0..height {
            data[row * width + col] = cols[col * height + row];
        }
    }
}

/// Far-field intensity after the astigmatic tilted-lens phase.
pub fn tilted_lens_pattern(field: &FieldGrid, astigmatism: f64) -> Result<IntensityGrid> {
    if !(astigmatism.is_finite() && astigmatism > 0.0) {
        return Err(Error::invalid(format!("astigmatism must be positive, got {astigmatism}")));
    }
    check_resolution(field.pixels_per_waist())?;
    let w2 = field.waist * field.waist;
    let mut tilted = field.values.clone();
    for row in 0..field.height {
        for col in 0..field.width {
            let (x, y) = field.coords(row, col);
            let phase = astigmatism * (x * x - y * y) / w2;
            tilted[row * field.width + col] *= Complex64::from_polar(1.0, phase);
        }
    }
    let mut spectrum = shift2(&tilted, field.width, field.height, false);
    fft2(&mut spectrum, field.width, field.height);
    let far = shift2(&spectrum, field.width, field.height, true);
    Ok(IntensityGrid {
        width: field.width,
        height: field.height,
        values: far.iter().map(|z| z.norm_sqr()).collect(),
    })
}

/// Result of [`count_dark_stripes`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripeCount {
    pub count: usize,
    /// Inferred sign of the charge from the lobe-axis tilt; 0 without stripes.
    pub sign: i32,
    /// Angle of the lobe axis from the +x (column) direction, degrees,
    /// positive towards +y (increasing row).
    pub axis_angle_deg: f64,
    /// Lobe structure too weak to trust the count.
    pub indeterminate: bool,
}

impl StripeCount {
    /// Signed charge estimate, `sign · count`.
    pub fn charge(&self) -> i32 {
        self.sign * self.count as i32
    }
}

/// Counts dark stripes crossing the intensity's principal axis.
///
/// The profile through the centroid along the major axis of the intensity
/// distribution is split into lobes brighter than [`DARK_FRACTION`] of the
/// peak; the stripes are the gaps between them. Dips that fail to go dark
/// yet have at least [`MIN_CONTRAST`] against their neighbouring lobes, and
/// gaps with less contrast than that, mark the result indeterminate.
pub fn count_dark_stripes(image: &IntensityGrid) -> StripeCount {
    let indeterminate = StripeCount {
        count: 0,
        sign: 0,
        axis_angle_deg: 0.0,
        indeterminate: true,
    };
    let peak = image.peak();
    let total = image.total();
    if !(peak > 0.0 && peak.is_finite() && total.is_finite()) {
        return indeterminate;
    }

    let (mut ci, mut cj) = (0.0, 0.0);
    for row in 0..image.height {
        for col in 0..image.width {
            let v = image.at(row, col);
            ci += v * row as f64;
            cj += v * col as f64;
        }
    }
    ci /= total;
    cj /= total;
    let (mut s_ii, mut s_jj, mut s_ij) = (0.0, 0.0, 0.0);
    for row in 0..image.height {
        for col in 0..image.width {
            let v = image.at(row, col);
            let (di, dj) = (row as f64 - ci, col as f64 - cj);
            s_ii += v * di * di;
            s_jj += v * dj * dj;
            s_ij += v * di * dj;
        }
    }
    let theta = 0.5 * (2.0 * s_ij).atan2(s_jj - s_ii);
    let (step_i, step_j) = (theta.sin(), theta.cos());

    let reach = ((image.width * image.width + image.height * image.height) as f64).sqrt() / 2.0;
    let step = 0.25;
    let samples = (2.0 * reach / step) as usize;
    let profile: Vec<f64> = (0..=samples)
        .map(|k| {
            let t = -reach + k as f64 * step;
            image.sample(ci + t * step_i, cj + t * step_j)
        })
        .collect();

    let dark = DARK_FRACTION * peak;
    // (max, argmax) per bright run, and the minimum of each dark gap between runs.
    let mut lobes: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (k, &v) in profile.iter().enumerate() {
        match (v > dark, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                lobes.push((s, k));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        lobes.push((s, profile.len()));
    }
    if lobes.is_empty() {
        return indeterminate;
    }

    let mut unclear = false;
    let lobe_max = |&(s, e): &(usize, usize)| profile[s..e].iter().copied().fold(0.0, f64::max);
    for pair in lobes.windows(2) {
        let gap_min = profile[pair[0].1..pair[1].0].iter().copied().fold(f64::INFINITY, f64::min);
        if lobe_max(&pair[0]).min(lobe_max(&pair[1])) < MIN_CONTRAST * gap_min {
            unclear = true;
        }
    }
    for &(s, e) in &lobes {
        if has_unresolved_dip(&profile[s..e]) {
            unclear = true;
        }
    }

    let count = lobes.len() - 1;
    let sign = if count == 0 {
        0
    } else if s_ij.abs() <= 1e-9 * (s_ii + s_jj) {
        unclear = true;
        0
    } else {
        s_ij.signum() as i32
    };
    StripeCount {
        count,
        sign,
        axis_angle_deg: theta.to_degrees(),
        indeterminate: unclear,
    }
}

/// A local minimum inside a bright run with `MIN_CONTRAST` against the
/// brightest samples on both sides: a second lobe that never goes dark.
fn has_unresolved_dip(run: &[f64]) -> bool {
    if run.len() < 3 {
        return false;
    }
    let mut left_max = vec![0.0; run.len()];
    let mut acc: f64 = 0.0;
    for (k, &v) in run.iter().enumerate() {
        acc = acc.max(v);
        left_max[k] = acc;
    }
    let mut right_max: f64 = 0.0;
    for k in (1..run.len() - 1).rev() {
        right_max = right_max.max(run[k + 1]);
        let v = run[k];
        if v <= run[k - 1] && v <= run[k + 1] && left_max[k - 1].min(right_max) >= MIN_CONTRAST * v {
            return true;
        }
    }
    false
}

/// Radius of the brightest pixel along the +x axis, in waists.
pub fn radial_peak(field: &FieldGrid) -> f64 {
    let row = field.height / 2;
    let (best, _) = (field.width / 2..field.width)
        .map(|col| (col, field.at(row, col).norm_sqr()))
        .fold((field.width / 2, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    (best - field.width / 2) as f64 * field.pitch / field.waist
}
