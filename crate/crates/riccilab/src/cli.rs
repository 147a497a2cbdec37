//! Scenario execution and the files a run leaves behind.
//!
//! An output directory holds `timeseries.csv`, `events.csv`,
//! `monitors.report`, `snapshots/` (final states, or the live states of an
//! aborted run) and `timeline/` (the full timeline tree in the normalized
//! frame, enough for `--verify` to replay it).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{RunConfig, Scenario};
use crate::error::{Error, Result};
use crate::homogeneous::{self, Family};
use crate::io::{self, fmt_f64, SeriesRow};
use crate::monitors::{self, MonitorReport};
use crate::surgery::{self, Fate, RunOptions};
use crate::timeline::{self, MetricSnapshot, Payload, Phase, Timeline, WeakReport};
use crate::warped::{self, CurvatureFields, DumbbellShape, ProfileKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_WARNINGS: i32 = 2;

/// Everything a run produced, before it is written out.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub config: RunConfig,
    pub series: Vec<SeriesRow>,
    /// Timeline in the frame scaled by `scale`.
    pub timeline: Timeline,
    pub scale: f64,
    pub monitors: MonitorReport,
    pub outcome: std::result::Result<String, Error>,
    /// Final (or, after an abort, last live) states in the units of the
    /// initial metric, with file stems.
    pub snapshots: Vec<(String, MetricSnapshot)>,
    pub weak: WeakReport,
    pub surgeries: usize,
    pub halt_time: f64,
    pub extinction_time: Option<f64>,
}

impl Artifacts {
    /// 1 on an aborted run or a failed weak-solution audit, 2 when an
    /// enforced monitor fails, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.outcome.is_err() || !self.weak.ok {
            EXIT_ERROR
        } else if !self.monitors.pass() {
            EXIT_WARNINGS
        } else {
            EXIT_OK
        }
    }

    pub fn outcome_tag(&self) -> String {
        match &self.outcome {
            Ok(s) => s.clone(),
            Err(e) => format!("Error({e})"),
        }
    }
}

pub fn initial_profile(config: &RunConfig) -> Result<warped::WarpedProfile> {
    let kind = match config.scenario {
        Scenario::Round => ProfileKind::Round(config.radius),
        Scenario::Dumbbell => {
            let mut shape = DumbbellShape::new(config.waist, config.lobe);
            shape.taper = config.taper;
            ProfileKind::Dumbbell(shape)
        }
        Scenario::Cylinder => ProfileKind::Cylinder {
            radius: config.cyl_radius,
            length: config.cyl_length,
        },
        s => return Err(Error::Config(format!("scenario {s} has no warped profile"))),
    };
    warped::make_profile(kind, config.n)
}

/// Run the scenario in memory. Errors here are setup errors (bad config,
/// initial data that cannot be normalized); failures during the run are
/// reported in [`Artifacts::outcome`].
pub fn execute(config: &RunConfig) -> Result<Artifacts> {
    config.validate()?;
    if config.scenario.is_homogeneous() {
        execute_homogeneous(config)
    } else {
        execute_warped(config)
    }
}

fn execute_warped(config: &RunConfig) -> Result<Artifacts> {
    let params = config.surgery_params()?;
    let opts = RunOptions {
        t_end: config.t_end,
        c_cfl: config.c_cfl,
        width_c: config.width_c,
        enforce_width: config.scenario == Scenario::Round,
        ..RunOptions::default()
    };
    let p = initial_profile(config)?;
    let res = surgery::run_with_surgery(&p, &params, &opts)?;
    let scale = res.scale;
    let back = |t: f64, p: &warped::WarpedProfile| {
        MetricSnapshot::new(t / scale, Payload::Warped(p.scaled(1.0 / scale)), Phase::Regular)
    };
    let mut snapshots = Vec::new();
    for f in &res.finals {
        let tag = match f.fate {
            Fate::ReachedT => "reached",
            Fate::Extinct { .. } => "extinct",
            Fate::LocallyCanonical => "canonical",
        };
        snapshots.push((format!("final_{}_{tag}", path_stem(&f.path)), back(f.time, &f.profile)?));
    }
    if res.outcome.is_err() {
        let t = res.halt_time * scale;
        for (path, p) in &res.last_live {
            snapshots.push((format!("abort_{}", path_stem(path)), back(t, p)?));
        }
    }
    let weak = timeline::verify_weak_solution(&res.timeline);
    let surgeries = res.surgeries();
    Ok(Artifacts {
        config: config.clone(),
        series: res.series,
        timeline: res.timeline,
        scale,
        monitors: res.monitors,
        outcome: res.outcome.map(|o| o.tag().to_string()),
        snapshots,
        weak,
        surgeries,
        halt_time: res.halt_time,
        extinction_time: res.extinction_time,
    })
}

fn path_stem(path: &[usize]) -> String {
    if path.is_empty() {
        "root".into()
    } else {
        path.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("-")
    }
}

fn execute_homogeneous(config: &RunConfig) -> Result<Artifacts> {
    let family = match config.scenario {
        Scenario::HomogeneousConstK => Family::ConstantCurvature { k0: config.k0 },
        _ => Family::CircleTimesHypSurface {
            a: config.a0,
            b: config.b0,
        },
    };
    let tl = homogeneous::run_homogeneous(family, config.ref_volume, config.t_end, config.steps)?;
    let mut series = Vec::with_capacity(tl.states.len());
    let mut report = MonitorReport::default();
    let first = tl.states.first().and_then(|s| match &s.payload {
        Payload::Homogeneous(h) => Some(*h),
        _ => None,
    });
    // The pinching estimates presuppose normalized initial data.
    let normalized = first.map_or(false, |h| h.curvature_eigenvalues().iter().all(|k| k.abs() <= 1.0));
    for s in &tl.states {
        let d = s.diagnostics;
        series.push(SeriesRow {
            t: s.time,
            r_min: d.r_min,
            r_max: d.r_max,
            volume: d.volume,
            rhat: d.rhat,
            width_bound: d.width_bound,
            n_components: 1,
            event_flag: 0,
        });
        if let Payload::Homogeneous(h) = &s.payload {
            let ev = h.curvature_eigenvalues();
            let fields = CurvatureFields {
                k_orth: vec![],
                k_sph: vec![],
                r: vec![h.scalar_curvature()],
                x: vec![(-ev[0]).max(0.0)],
            };
            for c in monitors::check_pinching(&fields, s.time).checks {
                report.absorb(if normalized { c } else { c.logged() });
            }
        }
    }
    let rhat: Vec<(f64, f64)> = series.iter().map(|r| (r.t, r.rhat)).collect();
    report.absorb(monitors::check_rhat_series(&rhat, 1e-6));
    if let Some(r0) = series.first().map(|r| r.r_min) {
        let rmin: Vec<(f64, f64)> = series.iter().map(|r| (r.t, r.r_min)).collect();
        report.absorb(monitors::check_rmin_series(&rmin, r0, 1e-3));
    }
    if series.iter().all(|r| r.width_bound > 0.0) {
        let w: Vec<(f64, f64)> = series.iter().map(|r| (r.t, r.width_bound)).collect();
        report.absorb(monitors::check_width_series(&w, config.width_c, 1e-6));
    }
    let outcome = match homogeneous::classify_longtime(family, config.t_end, 1e-3) {
        Ok(l) => format!("{l:?}"),
        Err(_) => "ReachedT".into(),
    };
    let snapshots = tl
        .states
        .last()
        .map(|s| vec![("final_root".to_string(), s.clone())])
        .unwrap_or_default();
    let weak = timeline::verify_weak_solution(&tl);
    let halt_time = tl.last_time().unwrap_or(0.0);
    let extinction_time = match family {
        Family::ConstantCurvature { k0 } if k0 > 0.0 => Some(0.25 / k0),
        _ => None,
    };
    Ok(Artifacts {
        config: config.clone(),
        series,
        timeline: tl,
        scale: 1.0,
        monitors: report,
        outcome: Ok(outcome),
        snapshots,
        weak,
        surgeries: 0,
        halt_time,
        extinction_time,
    })
}

/// Rows written to `timeseries.csv`: every `every`-th row, every surgery
/// row and the row before it, and the last row.
pub fn thin_series(rows: &[SeriesRow], every: usize) -> Vec<SeriesRow> {
    let n = rows.len();
    (0..n)
        .filter(|&k| {
            k % every.max(1) == 0
                || k + 1 == n
                || rows[k].event_flag != 0
                || rows.get(k + 1).map_or(false, |r| r.event_flag != 0)
        })
        .map(|k| rows[k])
        .collect()
}

fn summary_text(a: &Artifacts) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# scenario = {}", a.config.scenario);
    let _ = writeln!(s, "# outcome = {}", a.outcome_tag());
    let _ = writeln!(s, "# scale = {}", fmt_f64(a.scale));
    let _ = writeln!(s, "# halt_time = {}", fmt_f64(a.halt_time));
    let ext = a.extinction_time.map_or("none".to_string(), fmt_f64);
    let _ = writeln!(s, "# extinction_time = {ext}");
    let _ = writeln!(s, "# surgeries = {}", a.surgeries);
    let _ = writeln!(s, "# weak_solution = {}", if a.weak.ok { "ok" } else { "FAIL" });
    for v in &a.weak.violations {
        let _ = writeln!(s, "#   ({}) t = {}: {}", v.condition, fmt_f64(v.time), v.detail);
    }
    s
}

/// Write all output files into `dir`.
pub fn write_outputs(a: &Artifacts, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.txt"), a.config.to_text())?;
    fs::write(
        dir.join("timeseries.csv"),
        io::write_series(&thin_series(&a.series, a.config.csv_every)),
    )?;
    fs::write(dir.join("events.csv"), io::write_events(&a.timeline, a.scale))?;
    fs::write(
        dir.join("monitors.report"),
        summary_text(a) + &io::write_report(&a.monitors),
    )?;
    let snaps = dir.join("snapshots");
    if snaps.exists() {
        fs::remove_dir_all(&snaps)?;
    }
    fs::create_dir_all(&snaps)?;
    for (name, s) in &a.snapshots {
        fs::write(
            snaps.join(format!("{name}.snap")),
            io::write_snapshot(a.config.scenario.name(), s),
        )?;
    }
    let tdir = dir.join("timeline");
    if tdir.exists() {
        fs::remove_dir_all(&tdir)?;
    }
    io::write_timeline(&tdir, a.config.scenario.name(), &a.timeline)?;
    fs::write(tdir.join("scale.txt"), fmt_f64(a.scale) + "\n")?;
    Ok(())
}

/// Execute and write; returns the exit code and prints problems to stderr.
pub fn run(config: &RunConfig, out: &Path) -> i32 {
    match execute(config).and_then(|a| write_outputs(&a, out).map(|_| a)) {
        Ok(a) => {
            if let Err(e) = &a.outcome {
                eprintln!("riccilab: run aborted: {e}");
            }
            for v in &a.weak.violations {
                eprintln!(
                    "riccilab: weak solution violated ({}) at t = {}: {}",
                    v.condition, v.time, v.detail
                );
            }
            for c in a.monitors.checks.iter().filter(|c| !c.pass && c.enforced) {
                eprintln!(
                    "riccilab: monitor {} failed by {:e} at t = {}",
                    c.name, c.worst_violation, c.location.0
                );
            }
            a.exit_code()
        }
        Err(e) => {
            eprintln!("riccilab: {e}");
            EXIT_ERROR
        }
    }
}

/// Re-run the weak-solution audit on an output directory.
pub fn verify_dir(dir: &Path) -> Result<WeakReport> {
    let t = io::read_timeline(&dir.join("timeline"))?;
    Ok(timeline::verify_weak_solution(&t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: String,
    pub outcome: String,
    pub surgeries: usize,
    pub halt_time: f64,
    pub extinction_time: Option<f64>,
    pub rhat_min: f64,
    pub rhat_max: f64,
    pub exit_code: i32,
}

pub const SUMMARY_HEADER: &str = "value,outcome,surgeries,halt_time,extinction_time,rhat_min,rhat_max,exit_code";

/// Run `template` once per value of the numeric key `axis`, at most `jobs`
/// at a time. Rows come back in the order of `values`; a failing run is a
/// row, not an abort. With `out`, each run also writes into
/// `out/<axis>=<value>/`.
pub fn sweep(
    template: &RunConfig,
    axis: &str,
    values: &[String],
    jobs: usize,
    out: Option<&Path>,
) -> Result<Vec<SweepRow>> {
    if !RunConfig::is_numeric(axis) {
        return Err(Error::Config(format!("`{axis}` is not a numeric config key")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let rows = pool.install(|| {
        values
            .par_iter()
            .map(|v| {
                let mut c = template.clone();
                let res = c.set(axis, v).and_then(|_| execute(&c)).and_then(|a| {
                    if let Some(o) = out {
                        write_outputs(&a, &o.join(format!("{axis}={v}")))?;
                    }
                    Ok(a)
                });
                match res {
                    Ok(a) => SweepRow {
                        value: v.clone(),
                        outcome: a.outcome_tag(),
                        surgeries: a.surgeries,
                        halt_time: a.halt_time,
                        extinction_time: a.extinction_time,
                        rhat_min: a.series.iter().map(|r| r.rhat).fold(f64::INFINITY, f64::min),
                        rhat_max: a.series.iter().map(|r| r.rhat).fold(f64::NEG_INFINITY, f64::max),
                        exit_code: a.exit_code(),
                    },
                    Err(e) => SweepRow {
                        value: v.clone(),
                        outcome: format!("Error({e})"),
                        surgeries: 0,
                        halt_time: f64::NAN,
                        extinction_time: None,
                        rhat_min: f64::NAN,
                        rhat_max: f64::NAN,
                        exit_code: EXIT_ERROR,
                    },
                }
            })
            .collect()
    });
    Ok(rows)
}

pub fn write_summary(rows: &[SweepRow]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.value,
            r.outcome.replace(',', ";"),
            r.surgeries,
            fmt_f64(r.halt_time),
            r.extinction_time.map_or("none".into(), fmt_f64),
            fmt_f64(r.rhat_min),
            fmt_f64(r.rhat_max),
            r.exit_code
        );
    }
    s
}

/// Files compared against goldens.
pub const GOLDEN_FILES: [&str; 2] = ["timeseries.csv", "events.csv"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoldenStatus {
    Match,
    /// No golden existed; the current output was stored as the golden.
    Recorded(Vec<PathBuf>),
    Mismatch(Vec<String>),
}

/// Compare a run's CSV files with `golden_root/<scenario>/`, recording
/// them on first use.
pub fn check_golden(out: &Path, golden_root: &Path, scenario: Scenario) -> Result<GoldenStatus> {
    let gdir = golden_root.join(scenario.name());
    let mut recorded = Vec::new();
    let mut mismatched = Vec::new();
    for name in GOLDEN_FILES {
        let produced = fs::read(out.join(name))?;
        let g = gdir.join(name);
        if g.is_file() {
            if fs::read(&g)? != produced {
                mismatched.push(name.to_string());
            }
        } else {
            fs::create_dir_all(&gdir)?;
            fs::write(&g, &produced)?;
            recorded.push(g);
        }
    }
    Ok(if !mismatched.is_empty() {
        GoldenStatus::Mismatch(mismatched)
    } else if !recorded.is_empty() {
        GoldenStatus::Recorded(recorded)
    } else {
        GoldenStatus::Match
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(flag: u8) -> SeriesRow {
        SeriesRow {
            t: 0.0,
            r_min: 0.0,
            r_max: 0.0,
            volume: 0.0,
            rhat: 0.0,
            width_bound: 0.0,
            n_components: 1,
            event_flag: flag,
        }
    }

    #[test]
    fn thinning_keeps_events_and_ends() {
        let mut rows: Vec<SeriesRow> = (0..10).map(|_| row(0)).collect();
        rows[6].event_flag = 1;
        for (k, r) in rows.iter_mut().enumerate() {
            r.t = k as f64;
        }
        let kept: Vec<f64> = thin_series(&rows, 4).iter().map(|r| r.t).collect();
        assert_eq!(kept, vec![0.0, 4.0, 5.0, 6.0, 8.0, 9.0]);
    }

    #[test]
    fn homogeneous_product_run() {
        let mut c = RunConfig::for_scenario(Scenario::HomogeneousProduct);
        c.t_end = 10.0;
        c.steps = 100;
        let a = execute(&c).unwrap();
        assert_eq!(a.exit_code(), EXIT_OK, "{:?}", a.monitors);
        assert_eq!(a.series.len(), 101);
        assert!(a.weak.ok);
    }

    #[test]
    fn hyperbolic_constk_run() {
        let c = RunConfig::for_scenario(Scenario::HomogeneousConstK);
        let a = execute(&c).unwrap();
        assert_eq!(a.exit_code(), EXIT_OK, "{:?}", a.monitors);
        assert_eq!(a.outcome.as_deref(), Ok("ConvergesHyperbolic"));
    }

    #[test]
    fn bad_sweep_axis() {
        let c = RunConfig::default();
        assert!(sweep(&c, "scenario", &[], 1, None).is_err());
        assert!(sweep(&c, "N", &[], 1, None).unwrap().is_empty());
    }
}
