//! One-stop evaluation of a domain: measures, raster topology, parallel
//! profile, torsion and functional values, and the full inequality bundle.

use serde::{Deserialize, Serialize};

use crate::distance::DistanceField;
use crate::domain::{MeasureReport, PlanarDomain};
use crate::error::Result;
use crate::functionals::{self, FunctionalValue};
use crate::parallel::{self, ParallelProfile};
use crate::raster::{RasterMask, TopologyReport};
use crate::report::{InequalityReport, Orientation};
use crate::torsion::{self, RichardsonEstimate, TorsionBounds, TorsionSummary, DEFAULT_REL_TOL};

pub const DEFAULT_PROFILE_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub h: f64,
    pub q: f64,
    pub k: usize,
    pub rel_tol: f64,
    pub profile_samples: usize,
    /// Extrapolate T from solves at h and h/2; otherwise use the h solve.
    pub richardson: bool,
}

impl AnalysisConfig {
    pub fn new(h: f64, q: f64, k: usize) -> Self {
        Self {
            h,
            q,
            k,
            rel_tol: DEFAULT_REL_TOL,
            profile_samples: DEFAULT_PROFILE_SAMPLES,
            richardson: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub config: AnalysisConfig,
    pub measure: MeasureReport,
    pub hole_loops: usize,
    pub topology: TopologyReport,
    pub counted_area: f64,
    pub rho: f64,
    pub solve: TorsionSummary,
    pub richardson: Option<RichardsonEstimate>,
    /// The torsion used downstream: extrapolated when available.
    pub torsion: f64,
    pub bounds: TorsionBounds,
    pub functional: FunctionalValue,
    #[serde(skip)]
    pub profile: Option<ParallelProfile>,
}

pub fn analyze(domain: &PlanarDomain, config: &AnalysisConfig) -> Result<Analysis> {
    functionals::check_exponent(config.q)?;
    let measure = domain.measure();
    let mask = RasterMask::rasterize(domain, config.h)?;
    let topology = mask.topology();
    let ((field_profile, solve), fine) = rayon::join(
        || {
            rayon::join(
                || -> Result<ParallelProfile> {
                    let field = DistanceField::new(&mask)?;
                    parallel::profile(&field, config.profile_samples)
                },
                || torsion::solve_torsion(&mask, config.rel_tol).map(|s| s.summary()),
            )
        },
        || -> Result<Option<f64>> {
            if !config.richardson {
                return Ok(None);
            }
            let fine_mask = RasterMask::rasterize(domain, 0.5 * config.h)?;
            Ok(Some(torsion::solve_torsion(&fine_mask, config.rel_tol)?.torsion))
        },
    );
    let profile = field_profile?;
    let solve = solve?;
    let richardson = fine?.map(|fine| RichardsonEstimate {
        h: config.h,
        coarse: solve.torsion,
        fine,
        extrapolated: 2.0 * fine - solve.torsion,
    });
    let t = richardson.map_or(solve.torsion, |r| r.extrapolated);
    let bounds = torsion::torsion_bounds(&measure, &profile, config.k)?;
    let functional = functionals::evaluate(&measure, t, config.q, config.k)?;
    Ok(Analysis {
        config: *config,
        measure,
        hole_loops: domain.hole_count(),
        topology,
        counted_area: mask.counted_area(),
        rho: profile.rho,
        solve,
        richardson,
        torsion: t,
        bounds,
        functional,
        profile: Some(profile),
    })
}

impl Analysis {
    pub fn profile(&self) -> &ParallelProfile {
        self.profile.as_ref().expect("analysis carries its profile")
    }

    /// Every inequality checked on this domain for the configured q and k.
    pub fn verify(&self) -> Vec<InequalityReport> {
        let m = &self.measure;
        let k = self.config.k;
        let p = self.profile();
        let mut out = vec![InequalityReport::new(
            "class_membership",
            "hole_count",
            Orientation::AtMost,
            self.topology.n_complement_bounded as f64,
            k as f64,
            0.0,
        )];
        out.push(functionals::verify_isoperimetric(m));
        out.push(functionals::verify_saint_venant(m, self.torsion));
        out.extend(functionals::verify_polya(m, self.torsion, p, k));
        out.push(functionals::verify_f_half_bounds(&self.functional, m, k));
        out.extend(functionals::verify_auxiliary(m, p, k));
        out.push(parallel::check_nagy(p));
        out.push(parallel::check_boundl(p, m, k));
        out.push(parallel::check_bounda(p, m, k));
        out.extend(functionals::verify_bound_chain(&self.bounds, self.torsion));
        out
    }
}
