//! HSV colors, the escape-count ramps, and the adjustment algebra applied
//! when shape calls nest.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ColorError {
    #[error("ramp needs max_steps >= 2, got {0}")]
    RampSteps(i64),
    #[error("{channel} adjustment {value} outside [-1, 1]")]
    AdjustmentRange { channel: &'static str, value: f64 },
    #[error("{channel} adjustment is not finite")]
    NotFinite { channel: &'static str },
}

/// Hue in degrees `[0, 360)`, saturation and brightness in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HsvColor {
    hue: f64,
    saturation: f64,
    brightness: f64,
}

impl HsvColor {
    /// Black, the color every primitive starts from.
    pub const BLACK: HsvColor = HsvColor { hue: 0.0, saturation: 0.0, brightness: 0.0 };

    /// Wraps the hue and clamps the other two channels.
    pub fn new(hue: f64, saturation: f64, brightness: f64) -> Self {
        Self {
            hue: wrap_hue(hue),
            saturation: clamp_unit(saturation),
            brightness: clamp_unit(brightness),
        }
    }

    pub fn hue(&self) -> f64 {
        self.hue
    }
    pub fn saturation(&self) -> f64 {
        self.saturation
    }
    pub fn brightness(&self) -> f64 {
        self.brightness
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RgbColor {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl RgbColor {
    pub const WHITE: RgbColor = RgbColor { r: 1.0, g: 1.0, b: 1.0 };

    /// 8-bit quantisation, rounding to nearest.
    pub fn to_rgb8(self) -> [u8; 3] {
        let q = |v: f64| (clamp_unit(v) * 255.0).round() as u8;
        [q(self.r), q(self.g), q(self.b)]
    }
}

/// Optional per-channel changes. Saturation and brightness move the
/// channel toward 1 (positive) or toward 0 (negative); hue is additive.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ColorAdjustment {
    hue: Option<f64>,
    saturation: Option<f64>,
    brightness: Option<f64>,
}

impl ColorAdjustment {
    pub fn new(
        hue: Option<f64>,
        saturation: Option<f64>,
        brightness: Option<f64>,
    ) -> Result<Self, ColorError> {
        if matches!(hue, Some(h) if !h.is_finite()) {
            return Err(ColorError::NotFinite { channel: "hue" });
        }
        check_unit_adjustment("saturation", saturation)?;
        check_unit_adjustment("brightness", brightness)?;
        Ok(Self { hue, saturation, brightness })
    }

    pub fn hue(delta: f64) -> Result<Self, ColorError> {
        Self::new(Some(delta), None, None)
    }

    pub fn saturation(amount: f64) -> Result<Self, ColorError> {
        Self::new(None, Some(amount), None)
    }

    pub fn brightness(amount: f64) -> Result<Self, ColorError> {
        Self::new(None, None, Some(amount))
    }
}

fn check_unit_adjustment(channel: &'static str, v: Option<f64>) -> Result<(), ColorError> {
    match v {
        Some(v) if !v.is_finite() => Err(ColorError::NotFinite { channel }),
        Some(v) if !(-1.0..=1.0).contains(&v) => Err(ColorError::AdjustmentRange { channel, value: v }),
        _ => Ok(()),
    }
}

#[inline]
fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

#[inline]
fn wrap_hue(h: f64) -> f64 {
    if !h.is_finite() {
        return 0.0;
    }
    let w = h.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

#[inline]
fn toward(v: f64, a: f64) -> f64 {
    if a > 0.0 {
        v + a * (1.0 - v)
    } else if a < 0.0 {
        v * (1.0 + a)
    } else {
        v
    }
}

pub fn apply_adjustment(base: HsvColor, adj: ColorAdjustment) -> HsvColor {
    let mut out = base;
    if let Some(dh) = adj.hue {
        out.hue = wrap_hue(base.hue + dh);
    }
    if let Some(a) = adj.saturation {
        out.saturation = clamp_unit(toward(base.saturation, a));
    }
    if let Some(a) = adj.brightness {
        out.brightness = clamp_unit(toward(base.brightness, a));
    }
    out
}

/// Hexcone HSV to RGB.
pub fn hsv_to_rgb(c: HsvColor) -> RgbColor {
    let v = c.brightness;
    if v == 0.0 {
        return RgbColor { r: 0.0, g: 0.0, b: 0.0 };
    }
    let chroma = v * c.saturation;
    let h = c.hue / 60.0;
    let sector = (h.floor() as i64).rem_euclid(6);
    let x = chroma * (1.0 - ((h % 2.0) - 1.0).abs());
    let m = v - chroma;
    let (r, g, b) = match sector {
        0 => (chroma, x, 0.0),
        1 => (x, chroma, 0.0),
        2 => (0.0, chroma, x),
        3 => (0.0, x, chroma),
        4 => (x, 0.0, chroma),
        _ => (chroma, 0.0, x),
    };
    RgbColor { r: clamp_unit(r + m), g: clamp_unit(g + m), b: clamp_unit(b + m) }
}

/// `(n - 1) / (N - 1)`, clamped: 0 for the fastest escape, 1 for in-set points.
pub fn escape_ramp_up(num_steps: i64, max_steps: i64) -> Result<f64, ColorError> {
    if max_steps < 2 {
        return Err(ColorError::RampSteps(max_steps));
    }
    Ok(clamp_unit((num_steps - 1) as f64 / (max_steps - 1) as f64))
}

/// `scale * (1 + (1 - n) / (N - 1))`, clamped. `scale = 1` gives the plain
/// descending ramp; the per-block forest colouring passes its `maxBright`.
pub fn escape_ramp_down(num_steps: i64, max_steps: i64, scale: f64) -> Result<f64, ColorError> {
    if max_steps < 2 {
        return Err(ColorError::RampSteps(max_steps));
    }
    let t = (1 - num_steps) as f64 / (max_steps - 1) as f64;
    Ok(clamp_unit(scale + scale * t))
}
