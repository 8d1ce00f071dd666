use crate::color::{apply_adjustment, ColorAdjustment, HsvColor};

/// 2×3 affine map: `x' = a·x + c·y + e`, `y' = b·x + d·y + f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform2D {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Default for Transform2D {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// `(sin, cos)` of an angle in degrees, exact at multiples of 90°.
fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(360.0);
    match r {
        0.0 => (0.0, 1.0),
        90.0 => (1.0, 0.0),
        180.0 => (0.0, -1.0),
        270.0 => (-1.0, 0.0),
        _ => deg.to_radians().sin_cos(),
    }
}

impl Transform2D {
    pub const IDENTITY: Self = Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0, e: 0.0, f: 0.0 };

    pub fn translate(dx: f64, dy: f64) -> Self {
        Self { e: dx, f: dy, ..Self::IDENTITY }
    }

    pub fn scale(sx: f64, sy: f64) -> Self {
        Self { a: sx, d: sy, ..Self::IDENTITY }
    }

    /// Counter-clockwise rotation about the origin.
    pub fn rotate(deg: f64) -> Self {
        let (s, c) = sin_cos_deg(deg);
        Self { a: c, b: s, c: -s, d: c, e: 0.0, f: 0.0 }
    }

    /// `self ∘ inner`: apply `inner` first, then `self`.
    pub fn then(&self, inner: &Self) -> Self {
        Self {
            a: self.a * inner.a + self.c * inner.b,
            b: self.b * inner.a + self.d * inner.b,
            c: self.a * inner.c + self.c * inner.d,
            d: self.b * inner.c + self.d * inner.d,
            e: self.a * inner.e + self.c * inner.f + self.e,
            f: self.b * inner.e + self.d * inner.f + self.f,
        }
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.a * x + self.c * y + self.e, self.b * x + self.d * y + self.f)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.c, self.d, self.e, self.f].iter().all(|v| v.is_finite())
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let (a, b, c, d) = (self.d / det, -self.b / det, -self.c / det, self.a / det);
        Some(Self { a, b, c, d, e: -(a * self.e + c * self.f), f: -(b * self.e + d * self.f) })
    }

    /// World-space corners of the unit square centred at the local origin.
    pub fn unit_square_corners(&self) -> [(f64, f64); 4] {
        [
            self.apply(-0.5, -0.5),
            self.apply(0.5, -0.5),
            self.apply(0.5, 0.5),
            self.apply(-0.5, 0.5),
        ]
    }
}

/// One evaluated entry of an adjustment list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Adjustment {
    Translate(f64, f64),
    Rotate(f64),
    Scale(f64, f64),
    Hue(f64),
    Saturation(f64),
    Brightness(f64),
}

fn unit_amount(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-1.0, 1.0)
    }
}

/// Applies `adjs` left to right, each geometric one in the frame left by
/// those before it. Saturation and brightness amounts outside `[-1, 1]`
/// are clamped.
pub fn compose_adjustments(parent: &Transform2D, color: HsvColor, adjs: &[Adjustment]) -> (Transform2D, HsvColor) {
    let mut t = *parent;
    let mut c = color;
    for adj in adjs {
        match *adj {
            Adjustment::Translate(dx, dy) => t = t.then(&Transform2D::translate(dx, dy)),
            Adjustment::Rotate(deg) => t = t.then(&Transform2D::rotate(deg)),
            Adjustment::Scale(sx, sy) => t = t.then(&Transform2D::scale(sx, sy)),
            Adjustment::Hue(dh) => {
                let dh = if dh.is_finite() { dh } else { 0.0 };
                c = apply_adjustment(c, ColorAdjustment::hue(dh).expect("finite"));
            }
            Adjustment::Saturation(a) => {
                c = apply_adjustment(c, ColorAdjustment::saturation(unit_amount(a)).expect("in range"));
            }
            Adjustment::Brightness(a) => {
                c = apply_adjustment(c, ColorAdjustment::brightness(unit_amount(a)).expect("in range"));
            }
        }
    }
    (t, c)
}
