use serde::{Deserialize, Serialize};

/// Tolerance for closed-form arithmetic.
pub const ARITHMETIC_TOL: f64 = 1e-9;
/// Relative tolerance for quantities that pass through polygonization only.
pub const POLYGON_TOL: f64 = 1e-4;
/// Relative tolerance for solver- and raster-backed quantities.
pub const SOLVER_TOL: f64 = 0.02;

/// Which side of an inequality is expected to be larger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// lhs ≤ rhs
    AtMost,
    /// lhs ≥ rhs
    AtLeast,
}

/// One checked inequality. `margin` is positive when the inequality holds
/// strictly; it passes when `margin >= -tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub label: String,
    pub orientation: Orientation,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Set when |margin| is within tolerance, i.e. an equality case.
    pub equality: bool,
}

impl InequalityReport {
    pub fn new(
        name: impl Into<String>,
        label: impl Into<String>,
        orientation: Orientation,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
    ) -> Self {
        let margin = match orientation {
            Orientation::AtMost => rhs - lhs,
            Orientation::AtLeast => lhs - rhs,
        };
        Self {
            name: name.into(),
            label: label.into(),
            orientation,
            lhs,
            rhs,
            margin,
            tolerance,
            pass: margin >= -tolerance,
            equality: margin.abs() <= tolerance,
        }
    }

    /// `lhs ≤ rhs` with a tolerance relative to |rhs|.
    pub fn at_most(name: &str, label: &str, lhs: f64, rhs: f64, rel_tol: f64) -> Self {
        Self::new(
            name,
            label,
            Orientation::AtMost,
            lhs,
            rhs,
            rel_tol * rhs.abs().max(lhs.abs()),
        )
    }

    /// `lhs ≥ rhs` with a tolerance relative to |rhs|.
    pub fn at_least(name: &str, label: &str, lhs: f64, rhs: f64, rel_tol: f64) -> Self {
        Self::new(
            name,
            label,
            Orientation::AtLeast,
            lhs,
            rhs,
            rel_tol * rhs.abs().max(lhs.abs()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_margin_above_minus_tolerance() {
        let r = InequalityReport::new("x", "x", Orientation::AtMost, 1.0, 0.99, 0.02);
        assert!(r.pass && r.equality);
        let r = InequalityReport::new("x", "x", Orientation::AtMost, 1.0, 0.97, 0.02);
        assert!(!r.pass && !r.equality);
        let r = InequalityReport::new("x", "x", Orientation::AtLeast, 2.0, 1.0, 0.02);
        assert!(r.pass && !r.equality);
        assert_eq!(r.margin, 1.0);
    }
}
