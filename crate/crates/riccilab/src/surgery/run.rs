//! The flow-with-surgery loop on warped profiles.

use rayon::prelude::*;

use super::{detect_necks, perform_surgery, SurgeryParams};
use crate::error::{Error, Result};
use crate::io::SeriesRow;
use crate::monitors::{self, Check, MonitorReport};
use crate::timeline::{MetricSnapshot, Payload, Phase, PostComponent, SurgeryEvent, Timeline, WarpedScheme};
use crate::topology::{self, Shape};
use crate::warped::{self, CurvatureFields, GridPolicy, Topology, WarpedProfile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Horizon in the units of the initial metric.
    pub t_end: f64,
    pub policy: GridPolicy,
    pub c_cfl: f64,
    /// Store every k-th state in the timeline; 0 keeps only the states at
    /// which a component starts or ends. Every step size is kept either way.
    pub keep_every: usize,
    /// Abort once this many steps have been taken.
    pub max_steps: usize,
    /// Constant of the width inequality.
    pub width_c: f64,
    /// Whether the width inequality counts as an enforced check.
    pub enforce_width: bool,
    /// Relative slack of the `R_min` lower bound.
    pub rmin_rel_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            t_end: 1.0,
            policy: GridPolicy::default(),
            c_cfl: 0.2,
            keep_every: 0,
            max_steps: 2_000_000,
            width_c: 1.0,
            enforce_width: false,
            rmin_rel_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    ReachedT,
    LocallyCanonical,
    Extinct,
}

impl Outcome {
    pub fn tag(self) -> &'static str {
        match self {
            Outcome::ReachedT => "ReachedT",
            Outcome::LocallyCanonical => "LocallyCanonical",
            Outcome::Extinct => "Extinct",
        }
    }
}

/// How a component that was not cut ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fate {
    ReachedT,
    /// Nearly round at the threshold; `extinction` extrapolates the round
    /// law `T = t + 3 / (2 R)` (normalized time).
    Extinct {
        extinction: f64,
    },
    LocallyCanonical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinalComponent {
    /// Path of the component's node in the timeline tree.
    pub path: Vec<usize>,
    /// Normalized time at which it ended.
    pub time: f64,
    pub fate: Fate,
    /// Topology certified from the final profile, when it could be.
    pub shape: Option<Shape>,
    pub profile: WarpedProfile,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// Timeline in the normalized frame.
    pub timeline: Timeline,
    pub outcome: std::result::Result<Outcome, Error>,
    /// Metric factor applied to the initial data.
    pub scale: f64,
    /// Last time reached, in the units of the initial metric.
    pub halt_time: f64,
    /// Latest extrapolated extinction time over extinct components, in the
    /// units of the initial metric.
    pub extinction_time: Option<f64>,
    /// One row per step and per surgery, in the units of the initial metric.
    pub series: Vec<SeriesRow>,
    pub monitors: MonitorReport,
    pub finals: Vec<FinalComponent>,
    pub steps: usize,
    /// Parameters in force (normalized frame).
    pub params: SurgeryParams,
    /// Live components at the last examined time, kept so an aborted run
    /// can be dumped.
    pub last_live: Vec<(Vec<usize>, WarpedProfile)>,
}

impl RunResult {
    pub fn surgeries(&self) -> usize {
        self.timeline.all_surgeries().len()
    }
}

struct Live {
    path: Vec<usize>,
    cur: WarpedProfile,
    since_store: usize,
    store_pending: bool,
}

fn global_row(t: f64, comps: &[(WarpedProfile, CurvatureFields)], flag: u8, scale: f64) -> SeriesRow {
    let mut r_min = f64::INFINITY;
    let mut r_max = f64::NEG_INFINITY;
    let mut volume = 0.0;
    let mut width = 0.0f64;
    for (p, f) in comps {
        r_min = r_min.min(f.r_min());
        r_max = r_max.max(f.r_max());
        volume += warped::volume(p);
        if p.topology == Topology::ClosedS3 {
            let m = p.psi.iter().copied().fold(0.0, f64::max);
            width = width.max(4.0 * std::f64::consts::PI * m * m);
        }
    }
    // Back to the units of the initial metric: g = g_norm / scale.
    let (r_min, r_max, volume) = (r_min * scale, r_max * scale, volume / scale.powf(1.5));
    SeriesRow {
        t: t / scale,
        r_min,
        r_max,
        volume,
        rhat: crate::timeline::rhat(r_min, volume),
        width_bound: width / scale,
        n_components: comps.len(),
        event_flag: flag,
    }
}

fn snapshot(t: f64, p: &WarpedProfile, phase: Phase) -> Result<MetricSnapshot> {
    MetricSnapshot::new(t, Payload::Warped(p.clone()), phase)
}

fn store(tl: &mut Timeline, path: &[usize], t: f64, p: &WarpedProfile) -> Result<()> {
    let node = tl.node_mut(path).expect("live component has a node");
    node.append_state(snapshot(t, p, Phase::Regular)?)
}

/// Evolve `initial` by the flow with surgery up to `opts.t_end`.
///
/// The profile is normalized first; the run then works in the normalized
/// frame. All live components share one step size, the smallest of their
/// admissible steps. When a component's `R_max` reaches `theta` it is
/// declared extinct if it is nearly round with `R > r^-2`, locally
/// canonical if `R > r^-2` everywhere and the canonical cover exists, and
/// otherwise cut along its delta-necks. Surgery happens before the next
/// step. Errors during the run end it; they are reported in
/// [`RunResult::outcome`] along with everything computed so far.
pub fn run_with_surgery(initial: &WarpedProfile, params: &SurgeryParams, opts: &RunOptions) -> Result<RunResult> {
    params.validate()?;
    let (p0, scale) = monitors::normalize(initial)?;
    let t_end = opts.t_end * scale;
    let policy = opts.policy;
    let mut timeline = Timeline::new(Some(WarpedScheme {
        policy,
        c_cfl: opts.c_cfl,
    }));
    let p0 = warped::prepare(&p0, &policy)?.0;
    timeline.append_state(snapshot(0.0, &p0, Phase::Regular)?)?;
    let mut run = Runner {
        params: *params,
        opts: *opts,
        scale,
        timeline,
        series: Vec::new(),
        pinching: MonitorReport::default(),
        cn: Check::new("canonical_neighbourhoods").logged(),
        finals: Vec::new(),
        steps: 0,
        t: 0.0,
        last_live: Vec::new(),
    };
    let live = vec![Live {
        path: vec![],
        cur: p0,
        since_store: 0,
        store_pending: false,
    }];
    let outcome = run.go(live, t_end);
    Ok(run.finish(outcome))
}

struct Runner {
    params: SurgeryParams,
    opts: RunOptions,
    scale: f64,
    timeline: Timeline,
    series: Vec<SeriesRow>,
    pinching: MonitorReport,
    cn: Check,
    finals: Vec<FinalComponent>,
    steps: usize,
    t: f64,
    last_live: Vec<(Vec<usize>, WarpedProfile)>,
}

impl Runner {
    fn go(&mut self, mut live: Vec<Live>, t_end: f64) -> Result<Outcome> {
        let policy = self.opts.policy;
        let red_floor = 1.0 / (self.params.r * self.params.r);
        let mut flag = 0u8;
        let mut reached = false;
        loop {
            let prepared: Vec<(WarpedProfile, CurvatureFields)> = live
                .par_iter()
                .map(|c| warped::prepare(&c.cur, &policy))
                .collect::<Result<_>>()?;
            for (c, (q, _)) in live.iter_mut().zip(&prepared) {
                if c.store_pending {
                    store(&mut self.timeline, &c.path, self.t, q)?;
                    c.store_pending = false;
                    c.since_store = 0;
                }
            }
            self.last_live = live
                .iter()
                .zip(&prepared)
                .map(|(c, (q, _))| (c.path.clone(), q.clone()))
                .collect();
            if !prepared.is_empty() {
                self.series.push(global_row(self.t, &prepared, flag, self.scale));
                for (_, f) in &prepared {
                    self.pinching.extend(monitors::check_pinching(f, self.t));
                }
            }
            flag = 0;

            // Thresholds, in component order.
            let mut next = Vec::with_capacity(live.len());
            let mut cut = false;
            for (c, (q, f)) in live.into_iter().zip(prepared) {
                if reached {
                    self.end(&c, &q, &f, Fate::ReachedT)?;
                    continue;
                }
                if f.r_max() < self.params.theta {
                    next.push((Live { cur: q, ..c }, f));
                    continue;
                }
                // Decisions use the curvature that drives the flow; the wide
                // stencil sees a grid mode next to the poles of evolved profiles.
                if f.r_min() > red_floor && topology::is_nearly_round(&f, self.params.eps) {
                    let extinction = self.t + 1.5 / f.r_min();
                    self.end(&c, &q, &f, Fate::Extinct { extinction })?;
                } else if f.r_min() > red_floor {
                    let (rep, cover) = monitors::check_cn_with(&q, &f, &self.params);
                    for ch in &rep.checks {
                        self.cn.merge(ch);
                    }
                    if let Some(&index) = cover.uncovered.first() {
                        return Err(Error::UncoveredPoint { index });
                    }
                    self.end(&c, &q, &f, Fate::LocallyCanonical)?;
                } else {
                    let c4 = warped::curvature(&q)?;
                    let kids = self.surgery(&c, &q, &c4)?;
                    next.extend(kids.into_iter().map(|l| {
                        let f = warped::flow_curvature(&l.cur);
                        (l, f)
                    }));
                    cut = true;
                }
            }
            if next.is_empty() {
                return Ok(self.outcome());
            }
            if cut {
                // Re-examine everything before stepping.
                live = next.into_iter().map(|(l, _)| l).collect();
                flag = 1;
                continue;
            }

            let dt_max = next
                .iter()
                .map(|(l, f)| warped::max_step(&l.cur, f, self.opts.c_cfl))
                .fold(f64::INFINITY, f64::min);
            let dt = if t_end - self.t <= dt_max {
                reached = true;
                t_end - self.t
            } else {
                dt_max
            };
            if !(dt > 0.0) {
                // Already at the horizon.
                for (l, f) in &next {
                    self.end(l, &l.cur.clone(), f, Fate::ReachedT)?;
                }
                return Ok(self.outcome());
            }
            let c_cfl = self.opts.c_cfl;
            let stepped: Vec<WarpedProfile> = next
                .par_iter()
                .map(|(l, f)| warped::step_with(&l.cur, f, dt, c_cfl))
                .collect::<Result<_>>()?;
            live = Vec::with_capacity(next.len());
            for ((mut l, _), p) in next.into_iter().zip(stepped) {
                self.timeline.node_mut(&l.path).expect("node").push_step(dt);
                l.cur = p;
                l.since_store += 1;
                let k = self.opts.keep_every;
                l.store_pending = k > 0 && l.since_store % k == 0;
                live.push(l);
            }
            self.t += dt;
            self.steps += 1;
            if self.steps > self.opts.max_steps {
                return Err(Error::BadParameters(format!(
                    "step budget of {} exhausted at t = {}",
                    self.opts.max_steps, self.t
                )));
            }
        }
    }

    /// Close a component's timeline with its final state.
    fn end(&mut self, c: &Live, q: &WarpedProfile, f: &CurvatureFields, fate: Fate) -> Result<()> {
        if c.since_store > 0 || c.store_pending {
            store(&mut self.timeline, &c.path, self.t, q)?;
        }
        let shape = topology::classify_profile_with(q, f, &self.params).ok();
        self.finals.push(FinalComponent {
            path: c.path.clone(),
            time: self.t,
            fate,
            shape,
            profile: q.clone(),
        });
        Ok(())
    }

    fn surgery(&mut self, c: &Live, q: &WarpedProfile, c4: &CurvatureFields) -> Result<Vec<Live>> {
        // The cover at the threshold is logged; surgery only needs the necks.
        let (rep, _) = monitors::check_cn_with(q, c4, &self.params);
        for ch in &rep.checks {
            self.cn.merge(&Check {
                location: (self.t, ch.location.1),
                ..ch.clone()
            });
        }
        let scan = detect_necks(q, c4, &self.params)?;
        if scan.necks.is_empty() {
            return Err(Error::NoSeparatingNecks(format!("no necks found ({:?})", scan.reason)));
        }
        let out = perform_surgery(q, &scan.necks, &self.params)?;
        let pre = snapshot(self.t, q, Phase::PreSurgery)?;
        let post = out
            .pieces
            .iter()
            .map(|pc| {
                Ok(PostComponent {
                    snapshot: snapshot(self.t, &pc.profile, Phase::PostSurgery)?,
                    pre_start: pc.pre_start,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let event = SurgeryEvent {
            time: self.t,
            pre,
            post,
            necks_used: scan.necks.clone(),
            theta: self.params.theta,
        };
        self.timeline.node_mut(&c.path).expect("node").record_surgery(event)?;
        Ok(out
            .pieces
            .into_iter()
            .enumerate()
            .map(|(k, pc)| {
                let mut path = c.path.clone();
                path.push(k);
                Live {
                    path,
                    cur: pc.profile,
                    since_store: 0,
                    store_pending: false,
                }
            })
            .collect())
    }

    fn outcome(&self) -> Outcome {
        if self.finals.iter().any(|f| f.fate == Fate::ReachedT) {
            Outcome::ReachedT
        } else if self.finals.iter().any(|f| f.fate == Fate::LocallyCanonical) {
            Outcome::LocallyCanonical
        } else {
            Outcome::Extinct
        }
    }

    fn finish(self, outcome: Result<Outcome>) -> RunResult {
        let scale = self.scale;
        let mut monitors = self.pinching;
        // Everything reported in the units of the initial metric.
        let mut spacing = monitors::check_surgery_spacing(&self.timeline, &self.params);
        let mut cn = self.cn;
        for c in monitors.checks.iter_mut().chain([&mut spacing, &mut cn]) {
            c.location.0 /= scale;
        }
        let rhat: Vec<(f64, f64)> = self.series.iter().map(|r| (r.t, r.rhat)).collect();
        monitors.absorb(monitors::check_rhat_series(&rhat, 1e-6));
        if let Some(first) = self.series.first() {
            let rmin: Vec<(f64, f64)> = self.series.iter().map(|r| (r.t, r.r_min)).collect();
            monitors.absorb(monitors::check_rmin_series(&rmin, first.r_min, self.opts.rmin_rel_tol));
        }
        if self.series.iter().all(|r| r.width_bound > 0.0) {
            let w: Vec<(f64, f64)> = self.series.iter().map(|r| (r.t, r.width_bound)).collect();
            let chk = monitors::check_width_series(&w, self.opts.width_c, 1e-6);
            monitors.absorb(if self.opts.enforce_width { chk } else { chk.logged() });
        }
        let mut semi = Check::new("width_surgery");
        for ev in self.timeline.all_surgeries() {
            semi.observe(ev.post_width() - ev.pre.diagnostics.width_bound, ev.time / scale, 0.0);
        }
        monitors.absorb(semi);
        monitors.absorb(spacing);
        monitors.absorb(cn);
        let extinction_time = self
            .finals
            .iter()
            .filter_map(|f| match f.fate {
                Fate::Extinct { extinction } => Some(extinction / scale),
                _ => None,
            })
            .fold(None, |a: Option<f64>, b| Some(a.map_or(b, |a| a.max(b))));
        RunResult {
            timeline: self.timeline,
            outcome,
            scale,
            halt_time: self.t / scale,
            extinction_time,
            series: self.series,
            monitors,
            finals: self.finals,
            steps: self.steps,
            params: self.params,
            last_live: self.last_live,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surgery::{cutoff_params, CutoffConfig};
    use crate::timeline::verify_weak_solution;
    use crate::warped::{make_profile, ProfileKind};

    fn params() -> SurgeryParams {
        cutoff_params(4.0, 8e-3, &CutoffConfig::default()).unwrap()
    }

    #[test]
    fn tiny_horizon_reaches_t() {
        let p = make_profile(ProfileKind::Round(1.0), 100).unwrap();
        let opts = RunOptions {
            t_end: 1e-6,
            ..Default::default()
        };
        let res = run_with_surgery(&p, &params(), &opts).unwrap();
        assert_eq!(res.outcome, Ok(Outcome::ReachedT));
        assert_eq!(res.surgeries(), 0);
        assert_eq!(res.halt_time, 1e-6);
        assert!(verify_weak_solution(&res.timeline).ok);
    }

    #[test]
    fn cylinder_piece_flows() {
        let p = make_profile(
            ProfileKind::Cylinder {
                radius: 1.0,
                length: 20.0,
            },
            200,
        )
        .unwrap();
        let opts = RunOptions {
            t_end: 0.05,
            keep_every: 50,
            ..Default::default()
        };
        let res = run_with_surgery(&p, &params(), &opts).unwrap();
        assert_eq!(res.outcome, Ok(Outcome::ReachedT));
        // psi^2 = 1 - 2t on the exact cylinder.
        let last = res.finals[0].profile.psi[0] / res.scale.sqrt();
        assert!((last * last - 0.9).abs() < 1e-6, "{last}");
        let rep = verify_weak_solution(&res.timeline);
        assert!(rep.ok, "{:?}", rep.violations);
    }
}
