//! F_q(Ω) = P·T^q / |Ω|^{2q+1/2}, its relaxed interval, and the inequalities
//! it satisfies.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::MeasureReport;
use crate::error::{Error, Result};
use crate::parallel::ParallelProfile;
use crate::report::{InequalityReport, POLYGON_TOL, SOLVER_TOL};
use crate::torsion::{polya_denominator, TorsionBounds};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub q: f64,
    pub k: usize,
    pub f_q: f64,
    /// F with the relaxed perimeter bracket [H¹, P + 2·slit] in place of P.
    pub f_qk_lower: f64,
    pub f_qk_upper: f64,
    pub measure: MeasureReport,
    pub torsion: f64,
}

pub fn check_exponent(q: f64) -> Result<()> {
    if q > 0.0 && q <= 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "exponent q must lie in (0, 1/2], got {q}"
        )))
    }
}

/// The factor T^q / |Ω|^{2q+1/2} shared by F_q and its relaxations.
fn scale_factor(area: f64, torsion: f64, q: f64) -> f64 {
    torsion.powf(q) / area.powf(2.0 * q + 0.5)
}

pub fn evaluate(m: &MeasureReport, torsion: f64, q: f64, k: usize) -> Result<FunctionalValue> {
    check_exponent(q)?;
    if !(torsion > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "torsion must be positive, got {torsion}"
        )));
    }
    if !(m.area > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "area must be positive, got {}",
            m.area
        )));
    }
    let s = scale_factor(m.area, torsion, q);
    Ok(FunctionalValue {
        q,
        k,
        f_q: m.perimeter * s,
        f_qk_lower: m.pk_lower * s,
        f_qk_upper: m.pk_upper * s,
        measure: *m,
        torsion,
    })
}

/// F_q of the disc (any radius): 2√π·(8π)^{−q}.
pub fn disc_value(q: f64) -> f64 {
    2.0 * PI.sqrt() * (8.0 * PI).powf(-q)
}

/// Lower bound for F_q on A_k:
/// (8π)^{1/2−q}·3^{−1/2}·P/(2H¹−P) for k ≤ 1 and
/// (8π)^{1/2−q}·3^{−1/2}·P/(2H¹+(k−2)P) for k ≥ 2.
/// Without slits these are (8π)^{1/2−q}·3^{−1/2} and (8π)^{1/2−q}/(√3·k).
pub fn functional_lower_bound(m: &MeasureReport, q: f64, k: usize) -> f64 {
    let denom = if k <= 1 {
        2.0 * m.boundary_h1 - m.perimeter
    } else {
        2.0 * m.boundary_h1 + (k as f64 - 2.0) * m.perimeter
    };
    (8.0 * PI).powf(0.5 - q) / 3f64.sqrt() * m.perimeter / denom
}

/// The same bound for a slit-free domain, which depends on q and k only.
pub fn class_lower_bound(q: f64, k: usize) -> f64 {
    let c = (8.0 * PI).powf(0.5 - q) / 3f64.sqrt();
    if k <= 1 {
        c
    } else {
        c / k as f64
    }
}

pub fn verify_isoperimetric(m: &MeasureReport) -> InequalityReport {
    let rhs = 2.0 * PI.sqrt();
    InequalityReport::at_least(
        "isoperimetric",
        "isoperimetric",
        m.perimeter / m.area.sqrt(),
        rhs,
        POLYGON_TOL,
    )
}

pub fn verify_saint_venant(m: &MeasureReport, torsion: f64) -> InequalityReport {
    InequalityReport::at_most(
        "saint_venant",
        "saint_venant",
        torsion / (m.area * m.area),
        1.0 / (8.0 * PI),
        SOLVER_TOL,
    )
}

/// T/|Ω|³ ≥ 1/(3D²) with D = P + 2·slit + 2π·max(k−1,0)·ρ, and the same with
/// the boundary-measure denominator 2H¹ − P in place of P + 2·slit.
pub fn verify_polya(m: &MeasureReport, torsion: f64, profile: &ParallelProfile, k: usize) -> Vec<InequalityReport> {
    let lhs = torsion / m.area.powi(3);
    let d_relaxed = polya_denominator(m, profile.rho, k);
    let d_boundary = 2.0 * m.boundary_h1 - m.perimeter + 2.0 * PI * k.saturating_sub(1) as f64 * profile.rho;
    vec![
        InequalityReport::at_least(
            "polya_relaxed_perimeter",
            "polya_torsion_area_improved",
            lhs,
            1.0 / (3.0 * d_relaxed * d_relaxed),
            SOLVER_TOL,
        ),
        InequalityReport::at_least(
            "polya_boundary_measure",
            "polya_torsion_area",
            lhs,
            1.0 / (3.0 * d_boundary * d_boundary),
            SOLVER_TOL,
        ),
    ]
}

pub fn verify_f_half_bounds(values: &FunctionalValue, m: &MeasureReport, k: usize) -> InequalityReport {
    let name = if (values.q - 0.5).abs() < 1e-15 {
        "functional_half_lower_bound"
    } else {
        "functional_lower_bound"
    };
    InequalityReport::at_least(
        name,
        "functional_lower_bound",
        values.f_q,
        functional_lower_bound(m, values.q, k),
        SOLVER_TOL,
    )
}

/// Bonnesen-type |Ω| ≤ [2H¹ − P + π(k−1)ρ]·ρ and the inradius bound 2πρ ≤ P.
pub fn verify_auxiliary(m: &MeasureReport, profile: &ParallelProfile, k: usize) -> Vec<InequalityReport> {
    let rho = profile.rho;
    let bonnesen = (2.0 * m.boundary_h1 - m.perimeter + PI * (k as f64 - 1.0) * rho) * rho;
    vec![
        InequalityReport::at_most("bonnesen", "bonnesen", m.area, bonnesen, SOLVER_TOL),
        InequalityReport::at_most(
            "inradius_perimeter",
            "inradius_perimeter",
            2.0 * PI * rho,
            m.perimeter,
            SOLVER_TOL,
        ),
    ]
}

/// T_polya ≤ T_parallel ≤ T.
pub fn verify_bound_chain(bounds: &TorsionBounds, torsion: f64) -> Vec<InequalityReport> {
    vec![
        InequalityReport::at_most(
            "polya_below_parallel_trial",
            "torsion_bound_chain",
            bounds.t_polya_lb,
            bounds.t_parallel_lb,
            SOLVER_TOL,
        ),
        InequalityReport::at_most(
            "parallel_trial_below_torsion",
            "torsion_bound_chain",
            bounds.t_parallel_lb,
            torsion,
            SOLVER_TOL,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc_measure() -> MeasureReport {
        MeasureReport {
            area: PI,
            perimeter: 2.0 * PI,
            boundary_h1: 2.0 * PI,
            slit_length: 0.0,
            pk_lower: 2.0 * PI,
            pk_upper: 2.0 * PI,
        }
    }

    #[test]
    fn disc_closed_forms() {
        let v = evaluate(&disc_measure(), PI / 8.0, 0.5, 0).unwrap();
        assert!((v.f_q - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(v.f_qk_lower, v.f_q);
        assert_eq!(v.f_qk_upper, v.f_q);
        for q in [0.1, 0.25, 0.4, 0.45, 0.5] {
            let v = evaluate(&disc_measure(), PI / 8.0, q, 0).unwrap();
            assert!((v.f_q - disc_value(q)).abs() < 1e-12);
        }
        assert!((disc_value(0.45) - 0.830801).abs() < 1e-6);
    }

    #[test]
    fn class_bounds() {
        assert!((class_lower_bound(0.5, 0) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((class_lower_bound(0.45, 0) - 0.678346).abs() < 1e-6);
        assert!((class_lower_bound(0.25, 3) - 0.430902).abs() < 1e-6);
        let m = disc_measure();
        assert!((functional_lower_bound(&m, 0.25, 3) - class_lower_bound(0.25, 3)).abs() < 1e-15);
    }

    #[test]
    fn input_checks() {
        assert!(evaluate(&disc_measure(), 0.0, 0.5, 0).is_err());
        assert!(evaluate(&disc_measure(), 1.0, 0.6, 0).is_err());
        assert!(evaluate(&disc_measure(), 1.0, 0.0, 0).is_err());
    }

    #[test]
    fn isoperimetric_and_saint_venant_equality_for_disc() {
        let m = disc_measure();
        let iso = verify_isoperimetric(&m);
        assert!(iso.pass && iso.equality);
        let sv = verify_saint_venant(&m, PI / 8.0);
        assert!(sv.pass && sv.equality);
        let sq = MeasureReport {
            area: 1.0,
            perimeter: 4.0,
            boundary_h1: 4.0,
            slit_length: 0.0,
            pk_lower: 4.0,
            pk_upper: 4.0,
        };
        let iso = verify_isoperimetric(&sq);
        assert!(iso.pass && !iso.equality);
    }
}
