//! Oriented intervals, the affine changes of variable between them, and
//! stadium neighborhoods in the complex plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orientation of an interval: which endpoint plays the role of -1 under
/// the normalizing affine map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// lo maps to -1, hi maps to +1.
    Forward,
    /// lo maps to +1, hi maps to -1.
    Reversed,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Forward => 1.0,
            Orientation::Reversed => -1.0,
        }
    }

    pub fn from_sign(s: f64) -> Self {
        if s >= 0.0 {
            Orientation::Forward
        } else {
            Orientation::Reversed
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Orientation::Forward => Orientation::Reversed,
            Orientation::Reversed => Orientation::Forward,
        }
    }
}

/// A nondegenerate closed interval with an orientation sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedInterval {
    pub lo: f64,
    pub hi: f64,
    pub orientation: Orientation,
}

impl OrientedInterval {
    pub fn new(lo: f64, hi: f64, orientation: Orientation) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::DegenerateInterval { lo, hi });
        }
        Ok(OrientedInterval { lo, hi, orientation })
    }

    /// Construct from two endpoint values in either order.
    pub fn from_endpoints(a: f64, b: f64, orientation: Orientation) -> Result<Self> {
        Self::new(a.min(b), a.max(b), orientation)
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        x >= self.lo - slack && x <= self.hi + slack
    }

    pub fn contains_interval(&self, other: &OrientedInterval, slack: f64) -> bool {
        other.lo >= self.lo - slack && other.hi <= self.hi + slack
    }

    pub fn interior_overlaps(&self, other: &OrientedInterval, tol: f64) -> bool {
        self.lo.max(other.lo) < self.hi.min(other.hi) - tol
    }

    /// The endpoint sent to -1 by the normalizing map.
    pub fn first_endpoint(&self) -> f64 {
        match self.orientation {
            Orientation::Forward => self.lo,
            Orientation::Reversed => self.hi,
        }
    }
}

/// `x -> scale * x + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub scale: f64,
    pub offset: f64,
}

impl AffineMap {
    pub fn identity() -> Self {
        AffineMap { scale: 1.0, offset: 0.0 }
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.offset
    }

    pub fn apply_complex(&self, z: Complex64) -> Complex64 {
        self.scale * z + self.offset
    }

    pub fn inverse(&self) -> AffineMap {
        debug_assert!(self.scale != 0.0);
        AffineMap {
            scale: 1.0 / self.scale,
            offset: -self.offset / self.scale,
        }
    }

    /// self after `inner`: x -> self(inner(x)).
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        AffineMap {
            scale: self.scale * inner.scale,
            offset: self.scale * inner.offset + self.offset,
        }
    }
}

/// The affine map sending `j` onto [-1, 1] respecting its orientation:
/// the first endpoint goes to -1, the other to +1.
pub fn affine_to(j: &OrientedInterval) -> AffineMap {
    let s = j.orientation.sign();
    let scale = 2.0 * s / j.len();
    let offset = -s * (j.lo + j.hi) / j.len();
    AffineMap { scale, offset }
}

/// Stadium neighborhood: all points within `radius` of the base interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stadium {
    pub base: OrientedInterval,
    pub radius: f64,
}

impl Stadium {
    pub fn new(base: OrientedInterval, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParam(format!("stadium radius {radius}")));
        }
        Ok(Stadium { base, radius })
    }

    /// `n` points tracing the boundary: two semicircles joined by the two
    /// horizontal segments, walked at uniform perimeter speed.
    pub fn boundary_points(&self, n: usize) -> Vec<Complex64> {
        let r = self.radius;
        let (a, b) = (self.base.lo, self.base.hi);
        let seg = b - a;
        let perimeter = 2.0 * std::f64::consts::PI * r + 2.0 * seg;
        (0..n)
            .map(|i| {
                let mut s = perimeter * i as f64 / n as f64;
                // top segment, left cap, bottom segment, right cap
                if s < seg {
                    return Complex64::new(a + s, r);
                }
                s -= seg;
                let half_circ = std::f64::consts::PI * r;
                if s < half_circ {
                    let th = std::f64::consts::FRAC_PI_2 + s / r;
                    return Complex64::new(a + r * th.cos(), r * th.sin());
                }
                s -= half_circ;
                if s < seg {
                    return Complex64::new(a + s, -r);
                }
                s -= seg;
                let th = -std::f64::consts::FRAC_PI_2 + s / r;
                Complex64::new(b + r * th.cos(), r * th.sin())
            })
            .collect()
    }

    /// Layered grid: `layers` scaled copies of the boundary plus the real
    /// segment itself (`per_layer` points on each).
    pub fn grid(&self, layers: usize, per_layer: usize) -> Vec<Complex64> {
        let mut pts: Vec<Complex64> = (0..per_layer)
            .map(|i| {
                let x = self.base.lo + self.base.len() * i as f64 / (per_layer - 1) as f64;
                Complex64::new(x, 0.0)
            })
            .collect();
        for l in 1..=layers {
            let shrunk = Stadium {
                base: self.base,
                radius: self.radius * l as f64 / layers as f64,
            };
            pts.extend(shrunk.boundary_points(per_layer));
        }
        pts
    }
}
