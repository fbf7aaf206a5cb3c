use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vec2::Vec2;

/// Rectangular mapped area confining robot motion, with an inner margin used
/// by bounds aversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRegion {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub margin_m: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundaryError {
    #[error("boundary extents must be finite with min < max (x: {x_min}..{x_max}, y: {y_min}..{y_max})")]
    Extents {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    #[error("margin {margin} must lie in (0, {limit})")]
    Margin { margin: f64, limit: f64 },
}

impl BoundaryRegion {
    /// Region with the default margin of `min(width, length) / 15`.
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self, BoundaryError> {
        let margin_m = (x_max - x_min).min(y_max - y_min) / 15.0;
        Self::with_margin(x_min, x_max, y_min, y_max, margin_m)
    }

    pub fn with_margin(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        margin_m: f64,
    ) -> Result<Self, BoundaryError> {
        let b = Self {
            x_min,
            x_max,
            y_min,
            y_max,
            margin_m,
        };
        b.validate()?;
        Ok(b)
    }

    /// Square `[0, side]²` region with the default margin.
    pub fn square(side: f64) -> Result<Self, BoundaryError> {
        Self::new(0.0, side, 0.0, side)
    }

    pub fn validate(&self) -> Result<(), BoundaryError> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(BoundaryError::Extents {
                x_min: self.x_min,
                x_max: self.x_max,
                y_min: self.y_min,
                y_max: self.y_max,
            });
        }
        let limit = self.width().min(self.length()) / 2.0;
        if !(self.margin_m > 0.0 && self.margin_m < limit) {
            return Err(BoundaryError::Margin {
                margin: self.margin_m,
                limit,
            });
        }
        Ok(())
    }

    /// x-extent.
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// y-extent.
    pub fn length(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
        )
    }

    /// Radius of the circling path.
    pub fn circling_radius(&self) -> f64 {
        0.9 * self.width().min(self.length()) / 2.0
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// Distance from `p` to the region (zero inside).
    pub fn outside_distance(&self, p: Vec2) -> f64 {
        let dx = (self.x_min - p.x).max(p.x - self.x_max).max(0.0);
        let dy = (self.y_min - p.y).max(p.y - self.y_max).max(0.0);
        dx.hypot(dy)
    }

    pub fn clamp(&self, p: Vec2) -> Vec2 {
        Vec2::new(
            p.x.clamp(self.x_min, self.x_max),
            p.y.clamp(self.y_min, self.y_max),
        )
    }

    /// Clamp into the margin box `[min + m, max - m]` per axis.
    pub fn clamp_to_margin_box(&self, p: Vec2) -> Vec2 {
        let m = self.margin_m;
        Vec2::new(
            (self.x_max - m).min((self.x_min + m).max(p.x)),
            (self.y_max - m).min((self.y_min + m).max(p.y)),
        )
    }

    pub fn in_margin_box(&self, p: Vec2) -> bool {
        let m = self.margin_m;
        p.x >= self.x_min + m
            && p.x <= self.x_max - m
            && p.y >= self.y_min + m
            && p.y <= self.y_max - m
    }

    pub fn translated(&self, by: Vec2) -> Self {
        Self {
            x_min: self.x_min + by.x,
            x_max: self.x_max + by.x,
            y_min: self.y_min + by.y,
            y_max: self.y_max + by.y,
            margin_m: self.margin_m,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_margin_scales_with_region() {
        let b = BoundaryRegion::square(15.0).unwrap();
        assert!((b.margin_m - 1.0).abs() < 1e-12);
        assert_eq!(b.center(), Vec2::new(7.5, 7.5));
        let b = BoundaryRegion::square(10.0).unwrap();
        assert!((b.circling_radius() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_extents_and_margins() {
        assert!(matches!(
            BoundaryRegion::new(5.0, 5.0, 0.0, 1.0),
            Err(BoundaryError::Extents { .. })
        ));
        assert!(matches!(
            BoundaryRegion::with_margin(0.0, 10.0, 0.0, 4.0, 2.0),
            Err(BoundaryError::Margin { .. })
        ));
        assert!(BoundaryRegion::with_margin(0.0, 10.0, 0.0, 10.0, 0.0).is_err());
        assert!(BoundaryRegion::new(0.0, f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn outside_distance_is_zero_inside() {
        let b = BoundaryRegion::square(10.0).unwrap();
        assert_eq!(b.outside_distance(Vec2::new(3.0, 3.0)), 0.0);
        assert!((b.outside_distance(Vec2::new(13.0, 14.0)) - 5.0).abs() < 1e-12);
    }
}
