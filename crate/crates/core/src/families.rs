//! Parametric domain families and parameter ramps over them.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, Analysis, AnalysisConfig};
use crate::domain::PlanarDomain;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::hausdorff::co_hausdorff_distance;
use crate::output::fmt_num;

/// Vertex count for circles, enough for a 10⁻⁴ relative perimeter error.
pub const CIRCLE_VERTICES: usize = 512;

/// Grid spacing for unit-size families.
pub const UNIT_H: f64 = 1.0 / 256.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Disc {
        radius: f64,
    },
    Annulus {
        inner: f64,
        outer: f64,
    },
    Rectangle {
        width: f64,
        height: f64,
    },
    /// Isosceles triangle with unit base and height `aspect`.
    ThinTriangle {
        aspect: f64,
    },
    /// Unit disc minus n radial segments θ = 2πi/n, r ∈ [1/n, 1].
    SlitDisc {
        n: usize,
    },
    /// r(θ) = 1 + amplitude·sin(frequency·θ).
    WigglyDisc {
        amplitude: f64,
        frequency: usize,
    },
    /// Unit disc with `holes` circular holes of radius `hole_radius`.
    KHoleDisc {
        holes: usize,
        hole_radius: f64,
    },
    /// Two unit squares `gap` apart joined by a corridor of width `width`.
    ChannelJoin {
        gap: f64,
        width: f64,
    },
}

pub const FAMILY_NAMES: [&str; 8] = [
    "disc",
    "annulus",
    "rectangle",
    "thin_triangle",
    "slit_disc",
    "wiggly_disc",
    "k_hole_disc",
    "channel_join",
];

fn circle(center: Point, r: f64, n: usize) -> Vec<Point> {
    (0..n)
        .map(|i| center + Point::polar(r, TAU * i as f64 / n as f64))
        .collect()
}

fn bad(constraint: impl Into<String>) -> Error {
    Error::InvalidParameter(constraint.into())
}

/// Largest power of two not above `x`.
fn pow2_floor(x: f64) -> f64 {
    2f64.powi(x.log2().floor() as i32)
}

impl Family {
    /// The family with its default parameters.
    pub fn default_for(name: &str) -> Result<Self> {
        Ok(match name {
            "disc" => Family::Disc { radius: 1.0 },
            "annulus" => Family::Annulus { inner: 0.5, outer: 1.0 },
            "rectangle" | "square" => Family::Rectangle {
                width: 1.0,
                height: 1.0,
            },
            "thin_triangle" => Family::ThinTriangle { aspect: 10.0 },
            "slit_disc" => Family::SlitDisc { n: 4 },
            "wiggly_disc" => Family::WigglyDisc {
                amplitude: 0.2,
                frequency: 16,
            },
            "k_hole_disc" => Family::KHoleDisc {
                holes: 2,
                hole_radius: 0.1,
            },
            "channel_join" => Family::ChannelJoin { gap: 1.0, width: 0.05 },
            other => {
                return Err(bad(format!(
                    "unknown family `{other}` (expected one of {})",
                    FAMILY_NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Disc { .. } => "disc",
            Family::Annulus { .. } => "annulus",
            Family::Rectangle { .. } => "rectangle",
            Family::ThinTriangle { .. } => "thin_triangle",
            Family::SlitDisc { .. } => "slit_disc",
            Family::WigglyDisc { .. } => "wiggly_disc",
            Family::KHoleDisc { .. } => "k_hole_disc",
            Family::ChannelJoin { .. } => "channel_join",
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Family::Disc { radius } => vec![("radius", radius)],
            Family::Annulus { inner, outer } => vec![("inner", inner), ("outer", outer)],
            Family::Rectangle { width, height } => vec![("width", width), ("height", height)],
            Family::ThinTriangle { aspect } => vec![("aspect", aspect)],
            Family::SlitDisc { n } => vec![("n", n as f64)],
            Family::WigglyDisc { amplitude, frequency } => {
                vec![("amplitude", amplitude), ("frequency", frequency as f64)]
            }
            Family::KHoleDisc { holes, hole_radius } => vec![("holes", holes as f64), ("hole_radius", hole_radius)],
            Family::ChannelJoin { gap, width } => vec![("gap", gap), ("width", width)],
        }
    }

    /// Copy with one named parameter replaced. For rectangles `aspect` sets
    /// the width with unit height.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(bad(format!("{name} must be a non-negative integer, got {value}")))
            }
        };
        let mut out = *self;
        match (&mut out, name) {
            (Family::Disc { radius }, "radius") => *radius = value,
            (Family::Annulus { inner, .. }, "inner") => *inner = value,
            (Family::Annulus { outer, .. }, "outer") => *outer = value,
            (Family::Rectangle { width, .. }, "width") => *width = value,
            (Family::Rectangle { height, .. }, "height") => *height = value,
            (Family::Rectangle { width, height }, "aspect") => {
                *width = value;
                *height = 1.0;
            }
            (Family::ThinTriangle { aspect }, "aspect") => *aspect = value,
            (Family::SlitDisc { n }, "n") => *n = count(value)?,
            (Family::WigglyDisc { amplitude, .. }, "amplitude") => *amplitude = value,
            (Family::WigglyDisc { frequency, .. }, "frequency") => *frequency = count(value)?,
            (Family::KHoleDisc { holes, .. }, "holes" | "k") => *holes = count(value)?,
            (Family::KHoleDisc { hole_radius, .. }, "hole_radius") => *hole_radius = value,
            (Family::ChannelJoin { gap, .. }, "gap") => *gap = value,
            (Family::ChannelJoin { width, .. }, "width" | "epsilon") => *width = value,
            _ => return Err(bad(format!("family {} has no parameter `{name}`", self.name()))),
        }
        Ok(out)
    }

    /// Number of bounded complement components of the generated domain.
    pub fn declared_k(&self) -> usize {
        match *self {
            Family::Annulus { .. } => 1,
            Family::KHoleDisc { holes, .. } => holes,
            _ => 0,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Family::Disc { radius } if !(radius > 0.0) => Err(bad("disc radius must be positive")),
            Family::Annulus { inner, outer } if !(inner > 0.0 && inner < outer) => {
                Err(bad("annulus needs 0 < inner < outer"))
            }
            Family::Rectangle { width, height } if !(width > 0.0 && height > 0.0) => {
                Err(bad("rectangle sides must be positive"))
            }
            Family::ThinTriangle { aspect } if !(aspect > 0.0) => Err(bad("triangle aspect must be positive")),
            Family::SlitDisc { n } if n < 2 => Err(bad("slit_disc needs n >= 2")),
            Family::WigglyDisc { amplitude, frequency } if !(0.0..0.5).contains(&amplitude) || frequency == 0 => Err(
                bad("wiggly_disc needs 0 <= amplitude < 1/2 (so that B_1/2 ⊂ Ω ⊂ B_2) and frequency >= 1"),
            ),
            Family::KHoleDisc { holes, hole_radius } => {
                let fits = hole_radius > 0.0
                    && match holes {
                        0 => true,
                        1 => hole_radius < 1.0,
                        k => hole_radius < 0.5 && 2.0 * hole_radius < (PI / k as f64).sin(),
                    };
                if fits {
                    Ok(())
                } else {
                    Err(bad(format!(
                        "k_hole_disc holes of radius {hole_radius} do not fit: need disjoint holes on the circle of radius 1/2 inside the unit disc"
                    )))
                }
            }
            Family::ChannelJoin { gap, width } if !(gap > 0.0 && width > 0.0 && width < 1.0) => {
                Err(bad("channel_join needs gap > 0 and 0 < width < 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn generate(&self) -> Result<PlanarDomain> {
        self.validate()?;
        let origin = Point::new(0.0, 0.0);
        match *self {
            Family::Disc { radius } => PlanarDomain::new(vec![circle(origin, radius, CIRCLE_VERTICES)], vec![], vec![]),
            Family::Annulus { inner, outer } => PlanarDomain::new(
                vec![circle(origin, outer, CIRCLE_VERTICES)],
                vec![circle(origin, inner, CIRCLE_VERTICES)],
                vec![],
            ),
            Family::Rectangle { width, height } => {
                let (a, b) = (0.5 * width, 0.5 * height);
                PlanarDomain::new(
                    vec![vec![
                        Point::new(-a, -b),
                        Point::new(a, -b),
                        Point::new(a, b),
                        Point::new(-a, b),
                    ]],
                    vec![],
                    vec![],
                )
            }
            Family::ThinTriangle { aspect } => PlanarDomain::new(
                vec![vec![
                    Point::new(0.0, 0.0),
                    Point::new(aspect, -0.5),
                    Point::new(aspect, 0.5),
                ]],
                vec![],
                vec![],
            ),
            Family::SlitDisc { n } => {
                let verts = n * CIRCLE_VERTICES.div_ceil(n);
                let ring = circle(origin, 1.0, verts);
                let step = verts / n;
                let slits = (0..n)
                    .map(|i| {
                        let theta = TAU * (i * step) as f64 / verts as f64;
                        vec![Point::polar(1.0 / n as f64, theta), ring[i * step]]
                    })
                    .collect();
                PlanarDomain::new(vec![ring], vec![], slits)
            }
            Family::WigglyDisc { amplitude, frequency } => {
                let verts = CIRCLE_VERTICES.max(32 * frequency);
                let ring = (0..verts)
                    .map(|i| {
                        let theta = TAU * i as f64 / verts as f64;
                        Point::polar(1.0 + amplitude * (frequency as f64 * theta).sin(), theta)
                    })
                    .collect();
                PlanarDomain::new(vec![ring], vec![], vec![])
            }
            Family::KHoleDisc { holes, hole_radius } => {
                let hole_verts = CIRCLE_VERTICES / 2;
                let centers: Vec<Point> = match holes {
                    0 => vec![],
                    1 => vec![origin],
                    k => (0..k).map(|i| Point::polar(0.5, TAU * i as f64 / k as f64)).collect(),
                };
                PlanarDomain::new(
                    vec![circle(origin, 1.0, CIRCLE_VERTICES)],
                    centers
                        .into_iter()
                        .map(|c| circle(c, hole_radius, hole_verts))
                        .collect(),
                    vec![],
                )
            }
            Family::ChannelJoin { gap, width } => {
                let (x0, x1) = (0.5 * gap, 0.5 * gap + 1.0);
                let (y0, y1) = (0.5 - 0.5 * width, 0.5 + 0.5 * width);
                PlanarDomain::new(
                    vec![vec![
                        Point::new(-x1, 0.0),
                        Point::new(-x0, 0.0),
                        Point::new(-x0, y0),
                        Point::new(x0, y0),
                        Point::new(x0, 0.0),
                        Point::new(x1, 0.0),
                        Point::new(x1, 1.0),
                        Point::new(x0, 1.0),
                        Point::new(x0, y1),
                        Point::new(-x0, y1),
                        Point::new(-x0, 1.0),
                        Point::new(-x1, 1.0),
                    ]],
                    vec![],
                    vec![],
                )
            }
        }
    }

    /// Smallest feature the grid must resolve (slit spacing at the rim,
    /// corridor width, gaps between holes, wiggle half-wavelength).
    pub fn feature_size(&self) -> f64 {
        match *self {
            Family::Disc { radius } => radius,
            Family::Annulus { inner, outer } => outer - inner,
            Family::Rectangle { width, height } => width.min(height),
            Family::ThinTriangle { .. } => 1.0,
            Family::SlitDisc { n } => 2.0 * (PI / n as f64).sin(),
            Family::WigglyDisc { amplitude, frequency } => PI * (1.0 - amplitude) / frequency as f64,
            Family::KHoleDisc { holes, hole_radius } => match holes {
                0 => 1.0,
                1 => 1.0 - hole_radius,
                k => (0.5 - hole_radius).min(2.0 * 0.5 * (PI / k as f64).sin() - 2.0 * hole_radius),
            },
            Family::ChannelJoin { width, .. } => width,
        }
    }

    /// Default grid spacing: the family's base spacing, tightened to at most
    /// feature/8, rounded down to a power of two.
    pub fn default_h(&self) -> f64 {
        let base = match *self {
            Family::Rectangle { width, height } => width.min(height) / 64.0,
            Family::ThinTriangle { .. } => 1.0 / 64.0,
            Family::Disc { radius } => UNIT_H * radius,
            _ => UNIT_H,
        };
        pow2_floor(base.min(self.feature_size() / 8.0))
    }

    /// The set a ramp of this family degenerates to or perturbs, when it is
    /// a domain: the unit disc for slit and wiggly discs and the two
    /// separate squares for the channel join.
    pub fn reference_domain(&self) -> Option<PlanarDomain> {
        match *self {
            Family::SlitDisc { .. } | Family::WigglyDisc { .. } => Family::Disc { radius: 1.0 }.generate().ok(),
            Family::ChannelJoin { gap, .. } => {
                let sq = |x: f64| {
                    vec![
                        Point::new(x, 0.0),
                        Point::new(x + 1.0, 0.0),
                        Point::new(x + 1.0, 1.0),
                        Point::new(x, 1.0),
                    ]
                };
                PlanarDomain::new(vec![sq(-0.5 * gap - 1.0), sq(0.5 * gap)], vec![], vec![]).ok()
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    StrictlyIncreasing,
    StrictlyDecreasing,
    Constant,
    NonMonotone,
}

impl Trend {
    /// Trend of a sequence; changes within `rel_tol` of the scale count as flat.
    pub fn of(values: &[f64], rel_tol: f64) -> Self {
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let flat = |d: &f64| d.abs() <= rel_tol * scale;
        if diffs.iter().all(flat) {
            Trend::Constant
        } else if diffs.iter().all(|&d| d > 0.0 && !flat(&d)) {
            Trend::StrictlyIncreasing
        } else if diffs.iter().all(|&d| d < 0.0 && !flat(&d)) {
            Trend::StrictlyDecreasing
        } else {
            Trend::NonMonotone
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub member: usize,
    pub param: String,
    pub value: f64,
    pub h: f64,
    pub area: f64,
    pub perimeter: f64,
    pub h1: f64,
    pub rho: f64,
    pub torsion: f64,
    pub f_q: f64,
    pub f_qk_lower: f64,
    pub f_qk_upper: f64,
    pub co_hausdorff: Option<f64>,
    pub n_components: usize,
    pub n_complement_bounded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendVerdicts {
    pub area: Trend,
    pub perimeter: Trend,
    pub h1: Trend,
    pub torsion: Trend,
    pub f_q: Trend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendTable {
    pub family: String,
    pub param: String,
    pub q: f64,
    pub k: usize,
    pub rows: Vec<TrendRow>,
    pub verdicts: TrendVerdicts,
    /// Set when a member failed; `rows` then holds the members before it.
    pub error: Option<String>,
    #[serde(skip)]
    pub analyses: Vec<Analysis>,
}

pub const TREND_COLUMNS: [&str; 15] = [
    "member",
    "param",
    "value",
    "h",
    "area",
    "perimeter",
    "h1",
    "rho",
    "T",
    "F_q",
    "F_qk_lower",
    "F_qk_upper",
    "co_hausdorff",
    "n_components",
    "n_complement_bounded",
];

impl TrendTable {
    pub fn column(&self, f: impl Fn(&TrendRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TREND_COLUMNS)?;
        for r in &self.rows {
            w.write_record([
                r.member.to_string(),
                r.param.clone(),
                fmt_num(r.value),
                fmt_num(r.h),
                fmt_num(r.area),
                fmt_num(r.perimeter),
                fmt_num(r.h1),
                fmt_num(r.rho),
                fmt_num(r.torsion),
                fmt_num(r.f_q),
                fmt_num(r.f_qk_lower),
                fmt_num(r.f_qk_upper),
                r.co_hausdorff.map(fmt_num).unwrap_or_default(),
                r.n_components.to_string(),
                r.n_complement_bounded.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceOptions {
    pub q: f64,
    /// Hole budget; `None` uses each member's declared count.
    pub k: Option<usize>,
    /// Fixed spacing; `None` applies each member's resolution policy.
    pub h: Option<f64>,
    pub rel_tol: f64,
    pub richardson: bool,
    pub co_hausdorff: bool,
}

impl SequenceOptions {
    pub fn new(q: f64) -> Self {
        Self {
            q,
            k: None,
            h: None,
            rel_tol: crate::torsion::DEFAULT_REL_TOL,
            richardson: true,
            co_hausdorff: true,
        }
    }
}

fn member_row(
    base: &Family,
    param: &str,
    value: f64,
    index: usize,
    opts: &SequenceOptions,
) -> Result<(TrendRow, Analysis)> {
    let fam = base.with_param(param, value)?;
    let domain = fam.generate()?;
    let h = opts.h.unwrap_or_else(|| fam.default_h());
    let k = opts.k.unwrap_or_else(|| fam.declared_k());
    let mut cfg = AnalysisConfig::new(h, opts.q, k);
    cfg.rel_tol = opts.rel_tol;
    cfg.richardson = opts.richardson;
    let a = analyze(&domain, &cfg)?;
    let co_hausdorff = match (opts.co_hausdorff, fam.reference_domain()) {
        (true, Some(reference)) => Some(co_hausdorff_distance(&domain, &reference, h)?),
        _ => None,
    };
    let row = TrendRow {
        member: index,
        param: param.to_string(),
        value,
        h,
        area: a.measure.area,
        perimeter: a.measure.perimeter,
        h1: a.measure.boundary_h1,
        rho: a.rho,
        torsion: a.torsion,
        f_q: a.functional.f_q,
        f_qk_lower: a.functional.f_qk_lower,
        f_qk_upper: a.functional.f_qk_upper,
        co_hausdorff,
        n_components: a.topology.n_components,
        n_complement_bounded: a.topology.n_complement_bounded,
    };
    Ok((row, a))
}

/// Evaluates `base` with `param` set to each of `values`. Members run in
/// parallel; the table keeps ramp order and stops at the first failure.
pub fn run_sequence(base: &Family, param: &str, values: &[f64], opts: &SequenceOptions) -> Result<TrendTable> {
    if values.len() < 4 {
        return Err(bad(format!("a ramp needs at least 4 values, got {}", values.len())));
    }
    crate::functionals::check_exponent(opts.q)?;
    base.with_param(param, values[0])?;
    let results: Vec<Result<(TrendRow, Analysis)>> = values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| member_row(base, param, v, i, opts))
        .collect();
    let mut rows = Vec::new();
    let mut analyses = Vec::new();
    let mut error = None;
    for r in results {
        match r {
            Ok((row, a)) => {
                rows.push(row);
                analyses.push(a);
            }
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    let trend = |f: fn(&TrendRow) -> f64, tol: f64| Trend::of(&rows.iter().map(f).collect::<Vec<_>>(), tol);
    let verdicts = TrendVerdicts {
        area: trend(|r| r.area, 1e-3),
        perimeter: trend(|r| r.perimeter, 1e-3),
        h1: trend(|r| r.h1, 1e-3),
        torsion: trend(|r| r.torsion, 1e-6),
        f_q: trend(|r| r.f_q, 1e-6),
    };
    Ok(TrendTable {
        family: base.name().to_string(),
        param: param.to_string(),
        q: opts.q,
        k: opts.k.unwrap_or_else(|| base.declared_k()),
        rows,
        verdicts,
        error,
        analyses,
    })
}
