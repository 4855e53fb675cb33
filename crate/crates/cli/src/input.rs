//! Flag values: fractions, ramps, and the domain a command runs on.

use std::path::{Path, PathBuf};

use shapelab::families::Family;
use shapelab::PlanarDomain;

use crate::Failure;

/// A decimal or a fraction such as `1/256`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
            let d: f64 = d.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
            if d == 0.0 {
                return Err(format!("zero denominator in `{s}`"));
            }
            n / d
        }
        None => s.parse().map_err(|_| format!("`{s}` is not a number"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// Values for a family parameter: a single number, a comma list, or a range
/// `a..b` split into `steps` evenly spaced values (geometrically when `log`).
pub fn parse_ramp(s: &str, steps: usize, log: bool) -> Result<Vec<f64>, String> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (parse_number(a)?, parse_number(b)?);
        if steps < 2 {
            return Err(format!("a range needs at least 2 steps, got {steps}"));
        }
        if log && !(a > 0.0 && b > 0.0) {
            return Err(format!("a geometric range needs positive ends, got {a}..{b}"));
        }
        let last = (steps - 1) as f64;
        Ok((0..steps)
            .map(|i| {
                let s = i as f64 / last;
                if i + 1 == steps {
                    b
                } else if log {
                    a * (b / a).powf(s)
                } else {
                    a + s * (b - a)
                }
            })
            .collect())
    } else {
        s.split(',').map(parse_number).collect()
    }
}

/// The family parameters that can be given as flags.
pub const PARAM_FLAGS: [&str; 13] = [
    "radius",
    "inner",
    "outer",
    "width",
    "height",
    "aspect",
    "n",
    "amplitude",
    "frequency",
    "holes",
    "hole_radius",
    "gap",
    "epsilon",
];

#[derive(Debug, Clone)]
pub enum Source {
    Family(Family),
    File(PathBuf),
}

pub struct Loaded {
    pub domain: PlanarDomain,
    pub family: Option<Family>,
    pub default_h: f64,
    pub default_k: usize,
}

fn pow2_floor(x: f64) -> f64 {
    2f64.powi(x.log2().floor() as i32)
}

pub fn read_domain(path: &Path) -> Result<PlanarDomain, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    PlanarDomain::from_json(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

impl Source {
    pub fn load(&self) -> Result<Loaded, Failure> {
        match self {
            Source::Family(f) => Ok(Loaded {
                domain: f.generate().map_err(Failure::from)?,
                family: Some(*f),
                default_h: f.default_h(),
                default_k: f.declared_k(),
            }),
            Source::File(path) => {
                let domain = read_domain(path)?;
                let m = domain.measure();
                let h = pow2_floor((m.area.sqrt() / 64.0).min(domain.feature_clearance() / 8.0));
                Ok(Loaded {
                    default_k: domain.hole_count(),
                    default_h: h,
                    family: None,
                    domain,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_fractions() {
        assert_eq!(parse_number("1/256").unwrap(), 1.0 / 256.0);
        assert_eq!(parse_number(" 0.45 ").unwrap(), 0.45);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("abc").is_err());
        assert!(parse_number("inf").is_err());
    }

    #[test]
    fn ramps() {
        assert_eq!(parse_ramp("4,8,16,32", 4, false).unwrap(), vec![4.0, 8.0, 16.0, 32.0]);
        assert_eq!(parse_ramp("10..100", 4, false).unwrap(), vec![10.0, 40.0, 70.0, 100.0]);
        let g = parse_ramp("1..1000", 4, true).unwrap();
        assert!((g[1] - 10.0).abs() < 1e-9 && (g[2] - 100.0).abs() < 1e-9 && g[3] == 1000.0);
        assert!(parse_ramp("0..1", 4, true).is_err());
        assert_eq!(parse_ramp("3", 4, false).unwrap(), vec![3.0]);
    }
}
