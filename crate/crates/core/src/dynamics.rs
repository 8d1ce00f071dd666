//! Complex arithmetic and the quadratic escape-time iteration.
//!
//! Everything here is a pure function over `f64`. The arithmetic is written
//! term-for-term like the scene-language `steps` function so the native path
//! and the interpreted path agree bit-for-bit.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("resolution must be at least 2, got {0}")]
    Resolution(usize),
    #[error("index {index} out of range for resolution {resolution}")]
    Index { index: usize, resolution: usize },
    #[error("degenerate viewport: [{left}, {right}] x [{bottom}, {top}]")]
    Viewport { left: f64, right: f64, bottom: f64, top: f64 },
    #[error("escape budget must be at least 1")]
    Budget,
}

/// A point of the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    /// `|z|²`, computed as `re*re + im*im`.
    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-self.re, -self.im)
    }
}

/// Rectangle `[left, right] x [bottom, top]` of the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    left: f64,
    right: f64,
    bottom: f64,
    top: f64,
}

impl Viewport {
    pub fn new(left: f64, right: f64, bottom: f64, top: f64) -> Result<Self, DynamicsError> {
        let finite = [left, right, bottom, top].iter().all(|v| v.is_finite());
        if !finite || left >= right || bottom >= top {
            return Err(DynamicsError::Viewport { left, right, bottom, top });
        }
        Ok(Self { left, right, bottom, top })
    }

    /// Square viewport of side `side` centred on `center`, built with the
    /// same arithmetic as the scene files (`CX - SIDE/2`, ...).
    pub fn centered(center: Complex, side: f64) -> Result<Self, DynamicsError> {
        Self::new(
            center.re - side / 2.0,
            center.re + side / 2.0,
            center.im - side / 2.0,
            center.im + side / 2.0,
        )
    }

    pub fn left(&self) -> f64 {
        self.left
    }
    pub fn right(&self) -> f64 {
        self.right
    }
    pub fn bottom(&self) -> f64 {
        self.bottom
    }
    pub fn top(&self) -> f64 {
        self.top
    }

    /// Plane coordinate of grid point `(row, col)`, row 0 at the bottom.
    pub fn grid_point(&self, row: usize, col: usize, resolution: usize) -> Result<Complex, DynamicsError> {
        Ok(Complex::new(
            index_to_coord(col, self.left, self.right, resolution)?,
            index_to_coord(row, self.bottom, self.top, resolution)?,
        ))
    }
}

/// Iteration budget `N`: how many steps an orbit may take before the point
/// is classified as belonging to the set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct EscapeBudget(u32);

impl EscapeBudget {
    pub fn new(max_steps: u32) -> Result<Self, DynamicsError> {
        if max_steps == 0 {
            return Err(DynamicsError::Budget);
        }
        Ok(Self(max_steps))
    }

    pub fn max_steps(self) -> u32 {
        self.0
    }
}

/// One application of `f_c(z) = z² + c`.
#[inline]
pub fn quad_step(z: Complex, c: Complex) -> Complex {
    Complex::new(z.re * z.re - z.im * z.im + c.re, 2.0 * z.re * z.im + c.im)
}

/// Smallest `k` with `k == max_steps` or `|z_k|² >= 4`.
///
/// A non-finite iterate fails the `< 4` comparison and therefore counts as
/// escaped at that step.
#[inline]
pub fn escape_steps(z0: Complex, c: Complex, budget: EscapeBudget) -> u32 {
    let max = budget.0;
    let mut z = z0;
    let mut n = 0;
    while n < max && z.re * z.re + z.im * z.im < 4.0 {
        z = quad_step(z, c);
        n += 1;
    }
    n
}

/// Generalised escape count over real-valued counters: starts at `start`,
/// stops as soon as `count < limit` or `|z|² < 4` fails.
///
/// This is the closed form of the recursive scene-language definition
/// `steps(n, zr, zi, cr, ci)` for arbitrary first arguments. Returns the
/// final counter and the number of iterations performed.
#[inline]
pub fn escape_count_from(start: f64, limit: f64, z0: Complex, c: Complex) -> (f64, u64) {
    let mut n = start;
    let mut z = z0;
    let mut iterations = 0u64;
    while n < limit && z.re * z.re + z.im * z.im < 4.0 {
        z = quad_step(z, c);
        n += 1.0;
        iterations += 1;
    }
    (n, iterations)
}

/// `(hi - lo) * i / (resolution - 1) + lo`, evaluated in that order.
#[inline]
pub fn index_to_coord(i: usize, lo: f64, hi: f64, resolution: usize) -> Result<f64, DynamicsError> {
    if resolution < 2 {
        return Err(DynamicsError::Resolution(resolution));
    }
    if i >= resolution {
        return Err(DynamicsError::Index { index: i, resolution });
    }
    Ok((hi - lo) * i as f64 / (resolution - 1) as f64 + lo)
}

/// Width and height of one grid cell (`SIZEX`, `SIZEY`).
pub fn cell_size(v: &Viewport, resolution: usize) -> Result<(f64, f64), DynamicsError> {
    if resolution < 2 {
        return Err(DynamicsError::Resolution(resolution));
    }
    let d = (resolution - 1) as f64;
    Ok(((v.right - v.left) / d, (v.top - v.bottom) / d))
}
