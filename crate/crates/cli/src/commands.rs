use std::fs;
use std::path::Path;

use serde::Serialize;
use shapelab::analysis::{analyze, Analysis, AnalysisConfig};
use shapelab::families::{run_sequence, Family, SequenceOptions, TrendTable};
use shapelab::functionals::{self, FunctionalValue};
use shapelab::optimizer::{
    self, CircleHole, Evaluation, ObjectiveConfig, OptimizationRun, OptimizeOptions, ProbeReport, ShapeParams,
};
use shapelab::output::to_json_string;
use shapelab::parallel::{self, ParallelProfile};
use shapelab::torsion::{self, RichardsonEstimate, TorsionSummary};
use shapelab::{
    DistanceField, Error, InequalityReport, MeasureReport, PlanarDomain, Point, RasterMask, TopologyReport,
};

use crate::input::{parse_number, parse_ramp, Source};
use crate::{CommonArgs, ComputeArgs, DomainArgs, Failure, OptimizeArgs, ProfileArgs, SweepArgs, SCHEMA_VERSION};

/// Run settings echoed at the top of every JSON document.
#[derive(Debug, Clone, Serialize)]
struct InputEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<Family>,
    #[serde(skip_serializing_if = "Option::is_none")]
    domain_file: Option<String>,
    q: f64,
    k: usize,
    h: f64,
    rel_tol: f64,
    richardson: bool,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<&'a InputEcho>,
    #[serde(flatten)]
    body: T,
}

fn json<T: Serialize>(command: &str, input: Option<&InputEcho>, body: T) -> Result<String, Failure> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        input,
        body,
    };
    to_json_string(&env).map_err(|e| Failure::from(Error::from(e)))
}

/// Prints `text` and, with an output directory, writes it to `name` there.
fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<(), Failure> {
    print!("{text}");
    if let Some(dir) = out {
        write_file(dir, name, text.as_bytes())?;
    }
    Ok(())
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), bytes)?;
    Ok(())
}

fn base_family(args: &DomainArgs) -> Result<Option<Family>, Failure> {
    match &args.family {
        Some(name) => Ok(Some(Family::default_for(name)?)),
        None => {
            if let Some((p, _)) = args.params().first() {
                return Err(Failure::input(format!("--{} needs --family", p.replace('_', "-"))));
            }
            Ok(None)
        }
    }
}

struct Resolved {
    domain: PlanarDomain,
    echo: InputEcho,
}

fn resolve(common: &CommonArgs) -> Result<Resolved, Failure> {
    functionals::check_exponent(common.q)?;
    let source = match base_family(&common.source)? {
        Some(mut fam) => {
            for (p, raw) in common.source.params() {
                fam = fam.with_param(p, parse_number(raw).map_err(Failure::input)?)?;
            }
            Source::Family(fam)
        }
        None => Source::File(
            common
                .source
                .domain
                .clone()
                .expect("clap requires --family or --domain"),
        ),
    };
    let loaded = source.load()?;
    let h = common.h.unwrap_or(loaded.default_h);
    if !(h > 0.0) {
        return Err(Failure::input(format!("h must be positive, got {h}")));
    }
    if !(common.rel_tol > 0.0) {
        return Err(Failure::input(format!(
            "rel-tol must be positive, got {}",
            common.rel_tol
        )));
    }
    Ok(Resolved {
        echo: InputEcho {
            family: loaded.family,
            domain_file: common.source.domain.as_ref().map(|p| p.display().to_string()),
            q: common.q,
            k: common.k.unwrap_or(loaded.default_k),
            h,
            rel_tol: common.rel_tol,
            richardson: !common.no_richardson,
        },
        domain: loaded.domain,
    })
}

#[derive(Serialize)]
struct ComputeBody {
    measure: MeasureReport,
    hole_count: usize,
    topology: TopologyReport,
    solve: TorsionSummary,
    richardson: Option<RichardsonEstimate>,
    torsion: f64,
    functional: FunctionalValue,
}

pub fn compute(args: &ComputeArgs) -> Result<u8, Failure> {
    let common = &args.common;
    let r = resolve(common)?;
    let e = &r.echo;
    let mask = RasterMask::rasterize(&r.domain, e.h)?;
    let (coarse, fine) = rayon::join(
        || torsion::solve_torsion(&mask, e.rel_tol),
        || -> shapelab::Result<Option<f64>> {
            if !e.richardson {
                return Ok(None);
            }
            let m = RasterMask::rasterize(&r.domain, 0.5 * e.h)?;
            Ok(Some(torsion::solve_torsion(&m, e.rel_tol)?.torsion))
        },
    );
    let coarse = coarse?;
    let richardson = fine?.map(|fine| RichardsonEstimate {
        h: e.h,
        coarse: coarse.torsion,
        fine,
        extrapolated: 2.0 * fine - coarse.torsion,
    });
    if args.dump_field {
        if let Some(dir) = &common.out {
            let mut buf = Vec::new();
            coarse.write_field_csv(&mut buf)?;
            write_file(dir, "field.csv", &buf)?;
        }
    }
    let t = richardson.map_or(coarse.torsion, |r| r.extrapolated);
    let measure = r.domain.measure();
    let body = ComputeBody {
        measure,
        hole_count: r.domain.hole_count(),
        topology: mask.topology(),
        solve: coarse.summary(),
        richardson,
        torsion: t,
        functional: functionals::evaluate(&measure, t, e.q, e.k)?,
    };
    emit(common.out.as_deref(), "compute.json", &json("compute", Some(e), body)?)?;
    Ok(0)
}

#[derive(Serialize)]
struct VerifySummary {
    total: usize,
    passed: usize,
    failed: Vec<String>,
    equality: Vec<String>,
    all_pass: bool,
}

impl VerifySummary {
    fn of(reports: &[InequalityReport]) -> Self {
        let failed: Vec<String> = reports.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect();
        Self {
            total: reports.len(),
            passed: reports.len() - failed.len(),
            equality: reports.iter().filter(|r| r.equality).map(|r| r.name.clone()).collect(),
            all_pass: failed.is_empty(),
            failed,
        }
    }
}

#[derive(Serialize)]
struct VerifyBody<'a> {
    analysis: &'a Analysis,
    reports: &'a [InequalityReport],
    summary: VerifySummary,
}

pub fn verify(common: &CommonArgs) -> Result<u8, Failure> {
    let r = resolve(common)?;
    let e = &r.echo;
    let mut cfg = AnalysisConfig::new(e.h, e.q, e.k);
    cfg.rel_tol = e.rel_tol;
    cfg.richardson = e.richardson;
    let a = analyze(&r.domain, &cfg)?;
    let reports = a.verify();
    let summary = VerifySummary::of(&reports);
    let ok = summary.all_pass;
    let body = VerifyBody {
        analysis: &a,
        reports: &reports,
        summary,
    };
    emit(common.out.as_deref(), "verify.json", &json("verify", Some(e), body)?)?;
    Ok(if ok { 0 } else { 1 })
}

#[derive(Serialize)]
struct ProfileBody {
    rho: f64,
    alpha: usize,
    samples: usize,
    flagged: usize,
    coarea_defect: f64,
    g_monotonicity_defect: f64,
    checks: Vec<InequalityReport>,
}

pub fn profile(args: &ProfileArgs) -> Result<u8, Failure> {
    let common = &args.common;
    let r = resolve(common)?;
    let e = &r.echo;
    let mask = RasterMask::rasterize(&r.domain, e.h)?;
    let field = DistanceField::new(&mask)?;
    let p: ParallelProfile = parallel::profile(&field, args.samples)?;
    let m = r.domain.measure();
    let checks = vec![
        parallel::check_nagy(&p),
        parallel::check_boundl(&p, &m, e.k),
        parallel::check_bounda(&p, &m, e.k),
    ];
    let ok = checks.iter().all(|c| c.pass);
    let mut csv = Vec::new();
    p.write_csv(&mut csv)?;
    emit(common.out.as_deref(), "profile.csv", &String::from_utf8_lossy(&csv))?;
    if let Some(dir) = &common.out {
        let body = ProfileBody {
            rho: p.rho,
            alpha: p.alpha,
            samples: p.len(),
            flagged: p.flagged.iter().filter(|&&f| f).count(),
            coarea_defect: p.coarea_defect(parallel::LengthEstimator::Difference),
            g_monotonicity_defect: p.g_monotonicity_defect(),
            checks,
        };
        write_file(dir, "profile.json", json("profile", Some(e), body)?.as_bytes())?;
    }
    Ok(if ok { 0 } else { 1 })
}

pub fn sweep(args: &SweepArgs) -> Result<u8, Failure> {
    let common = &args.common;
    functionals::check_exponent(common.q)?;
    let Some(mut base) = base_family(&common.source)? else {
        return Err(Failure::input("sweep needs --family"));
    };
    let mut ramp: Option<(&str, Vec<f64>)> = None;
    for (p, raw) in common.source.params() {
        let values = parse_ramp(raw, args.steps, args.log).map_err(Failure::input)?;
        if values.len() == 1 {
            base = base.with_param(p, values[0])?;
        } else if ramp.is_some() {
            return Err(Failure::input("only one parameter may be ramped"));
        } else {
            ramp = Some((p, values));
        }
    }
    let Some((param, values)) = ramp else {
        return Err(Failure::input(
            "give one family parameter as a range `a..b` or a list `a,b,c,d`",
        ));
    };
    let mut opts = SequenceOptions::new(common.q);
    opts.k = common.k;
    opts.h = common.h;
    opts.rel_tol = common.rel_tol;
    opts.richardson = !common.no_richardson;
    let table: TrendTable = run_sequence(&base, param, &values, &opts)?;

    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    emit(common.out.as_deref(), "sweep.csv", &String::from_utf8_lossy(&csv))?;
    if let Some(dir) = &common.out {
        #[derive(Serialize)]
        struct SweepBody<'a> {
            table: &'a TrendTable,
        }
        write_file(
            dir,
            "sweep.json",
            json("sweep", None, SweepBody { table: &table })?.as_bytes(),
        )?;
    }
    match &table.error {
        Some(msg) => Err(Failure {
            code: 3,
            message: format!("sweep stopped after {} members: {msg}", table.rows.len()),
        }),
        None => Ok(0),
    }
}

#[derive(Serialize)]
struct OptimizeSummary {
    evaluations: usize,
    feasible_evaluations: usize,
    restarts: usize,
    initial_value: f64,
    best_value: f64,
    reported_value: f64,
    bound: f64,
    gap: f64,
    bound_violations: usize,
}

#[derive(Serialize)]
struct OptimizeBody<'a> {
    summary: OptimizeSummary,
    run: &'a OptimizationRun,
}

#[derive(Serialize)]
struct FailedRun<'a> {
    error: String,
    history: &'a [Evaluation],
}

fn start_shape(modes: usize, holes: usize) -> ShapeParams {
    let mut p = ShapeParams::disc(1.0, modes);
    for i in 0..holes {
        let center = if holes == 1 {
            Point::new(0.0, 0.0)
        } else {
            Point::polar(0.5, std::f64::consts::TAU * i as f64 / holes as f64)
        };
        p.holes.push(CircleHole { center, radius: 0.05 });
    }
    p
}

fn read_run(path: &Path) -> Result<OptimizationRun, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let run = v
        .get("run")
        .ok_or_else(|| Failure::input(format!("{}: missing field `run`", path.display())))?;
    serde_json::from_value(run.clone()).map_err(|e| Failure::input(format!("{}: run: {e}", path.display())))
}

pub fn optimize(args: &OptimizeArgs) -> Result<u8, Failure> {
    functionals::check_exponent(args.q)?;
    let fine = (args.fine_resolution > 0).then_some(args.fine_resolution);
    let out = args.out.as_deref();

    if args.probe {
        let seeds = [args.seed, args.seed + 1, args.seed + 2];
        let report: ProbeReport = optimizer::k_monotonicity_probe(args.q, args.budget, &seeds, args.resolution, fine)?;
        #[derive(Serialize)]
        struct ProbeBody<'a> {
            probe: &'a ProbeReport,
        }
        emit(
            out,
            "probe.json",
            &json("optimize", None, ProbeBody { probe: &report })?,
        )?;
        return Ok(if 2 * report.holds > report.rows.len() { 0 } else { 1 });
    }

    let result = match &args.resume {
        Some(path) => optimizer::resume(&read_run(path)?, args.budget),
        None => {
            if args.start_holes > args.k {
                return Err(Failure::input(format!(
                    "start-holes {} exceeds k = {}",
                    args.start_holes, args.k
                )));
            }
            let cfg = ObjectiveConfig {
                resolution: args.resolution,
                relaxed: args.relaxed,
                ..ObjectiveConfig::new(args.q, args.k)
            };
            let opts = OptimizeOptions {
                tol: args.tol,
                fine_resolution: fine,
                ..OptimizeOptions::new(args.budget, args.seed)
            };
            optimizer::minimize(&start_shape(args.modes, args.start_holes), &cfg, &opts)
        }
    };
    let run = match result {
        Ok(run) => run,
        Err(Error::NoFeasiblePoint { budget, history }) => {
            let err = Error::NoFeasiblePoint {
                budget,
                history: Vec::new(),
            };
            if let Some(dir) = out {
                let body = FailedRun {
                    error: err.to_string(),
                    history: &history,
                };
                write_file(dir, "optimize.json", json("optimize", None, body)?.as_bytes())?;
            }
            return Err(err.into());
        }
        Err(e) => return Err(e.into()),
    };
    let summary = OptimizeSummary {
        evaluations: run.history.len(),
        feasible_evaluations: run.history.iter().filter(|e| e.feasible).count(),
        restarts: run.restarts,
        initial_value: run.initial_value,
        best_value: run.best_value,
        reported_value: run.reported_value(),
        bound: run.bound,
        gap: run.gap,
        bound_violations: run.bound_violations.len(),
    };
    let ok = run.bound_violations.is_empty();
    emit(
        out,
        "optimize.json",
        &json("optimize", None, OptimizeBody { summary, run: &run })?,
    )?;
    Ok(if ok { 0 } else { 1 })
}
