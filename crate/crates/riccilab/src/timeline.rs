//! The evolving metric: snapshots with cached diagnostics, surgery events,
//! and the weak-solution audit.

use crate::error::{Condition, Error, Result};
use crate::homogeneous::{self, HomogeneousState};
use crate::surgery::NeckDescriptor;
use crate::warped::{self, GridPolicy, Topology, WarpedProfile};

/// Metric data of a snapshot.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Homogeneous(HomogeneousState),
    Warped(WarpedProfile),
}

/// Where a snapshot sits relative to a singular time. Pre and post
/// snapshots share their time; pre comes first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Regular,
    PreSurgery,
    PostSurgery,
}

impl Phase {
    pub fn tag(self) -> &'static str {
        match self {
            Phase::Regular => "regular",
            Phase::PreSurgery => "pre",
            Phase::PostSurgery => "post",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        match s {
            "regular" => Some(Phase::Regular),
            "pre" => Some(Phase::PreSurgery),
            "post" => Some(Phase::PostSurgery),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub r_min: f64,
    pub r_max: f64,
    pub volume: f64,
    /// `r_min * volume^(2/3)`.
    pub rhat: f64,
    /// Largest round-sweepout slice area; 0 where no sweepout is defined.
    pub width_bound: f64,
    /// Largest `max(0, -lowest curvature operator eigenvalue)`.
    pub x_max: f64,
}

pub fn rhat(r_min: f64, volume: f64) -> f64 {
    r_min * volume.powf(2.0 / 3.0)
}

impl DiagnosticsRecord {
    pub fn compute(payload: &Payload) -> Result<Self> {
        let (r_min, r_max, volume, width_bound, x_max) = match payload {
            Payload::Homogeneous(st) => {
                st.validate()?;
                let r = st.scalar_curvature();
                let x = (-st.curvature_eigenvalues()[0]).max(0.0);
                (r, r, st.volume(), st.width_bound(), x)
            }
            Payload::Warped(p) => {
                let c = warped::curvature(p)?;
                let w = match p.topology {
                    Topology::ClosedS3 => warped_width(p),
                    Topology::PeriodicS2xS1 => 0.0,
                };
                (c.r_min(), c.r_max(), warped::volume(p), w, c.x_max())
            }
        };
        Ok(DiagnosticsRecord {
            r_min,
            r_max,
            volume,
            rhat: rhat(r_min, volume),
            width_bound,
            x_max,
        })
    }

    fn mismatch(&self, other: &DiagnosticsRecord, tol: f64) -> Option<&'static str> {
        let close = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300);
        let fields = [
            ("r_min", self.r_min, other.r_min),
            ("r_max", self.r_max, other.r_max),
            ("volume", self.volume, other.volume),
            ("rhat", self.rhat, other.rhat),
            ("width_bound", self.width_bound, other.width_bound),
            ("x_max", self.x_max, other.x_max),
        ];
        fields.iter().find(|f| !close(f.1, f.2)).map(|f| f.0)
    }
}

/// `max 4 pi psi^2`.
pub(crate) fn warped_width(p: &WarpedProfile) -> f64 {
    let m = p.psi.iter().fold(0.0f64, |a, &b| a.max(b));
    4.0 * std::f64::consts::PI * m * m
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSnapshot {
    pub time: f64,
    pub payload: Payload,
    pub diagnostics: DiagnosticsRecord,
    pub phase: Phase,
}

impl MetricSnapshot {
    pub fn new(time: f64, payload: Payload, phase: Phase) -> Result<Self> {
        if !(time.is_finite() && time >= 0.0) {
            return Err(Error::BadParameters(format!(
                "snapshot time must be finite and >= 0, got {time}"
            )));
        }
        let diagnostics = DiagnosticsRecord::compute(&payload)?;
        Ok(MetricSnapshot {
            time,
            payload,
            diagnostics,
            phase,
        })
    }

    pub fn warped(&self) -> Option<&WarpedProfile> {
        match &self.payload {
            Payload::Warped(p) => Some(p),
            _ => None,
        }
    }

    /// Recompute the diagnostics and compare with the cached ones.
    pub fn check_diagnostics(&self, tol: f64) -> std::result::Result<(), String> {
        let fresh = DiagnosticsRecord::compute(&self.payload).map_err(|e| e.to_string())?;
        match self.diagnostics.mismatch(&fresh, tol) {
            None => Ok(()),
            Some(field) => Err(format!("cached {field} does not match the payload")),
        }
    }
}

/// One connected piece right after a surgery.
#[derive(Debug, Clone, PartialEq)]
pub struct PostComponent {
    pub snapshot: MetricSnapshot,
    /// Pre-surgery node matching node 0 of this piece. Later nodes follow in
    /// order, wrapping around on periodic profiles.
    pub pre_start: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurgeryEvent {
    pub time: f64,
    pub pre: MetricSnapshot,
    pub post: Vec<PostComponent>,
    pub necks_used: Vec<NeckDescriptor>,
    /// Curvature threshold in force.
    pub theta: f64,
}

/// A failed clause of the weak-solution definition.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub time: f64,
    pub condition: Condition,
    pub detail: String,
}

impl SurgeryEvent {
    pub fn components_after(&self) -> usize {
        self.post.len()
    }

    pub fn post_r_min(&self) -> f64 {
        self.post
            .iter()
            .map(|c| c.snapshot.diagnostics.r_min)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn post_r_max(&self) -> f64 {
        self.post
            .iter()
            .map(|c| c.snapshot.diagnostics.r_max)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn post_volume(&self) -> f64 {
        self.post.iter().map(|c| c.snapshot.diagnostics.volume).sum()
    }

    pub fn post_width(&self) -> f64 {
        self.post
            .iter()
            .map(|c| c.snapshot.diagnostics.width_bound)
            .fold(0.0, f64::max)
    }

    /// Audit the event from its payloads, ignoring cached diagnostics.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |condition, detail: String| {
            out.push(Violation {
                time: self.time,
                condition,
                detail,
            })
        };
        let pre = match DiagnosticsRecord::compute(&self.pre.payload) {
            Ok(d) => d,
            Err(e) => {
                push(Condition::FlowResidual, format!("pre-surgery metric unreadable: {e}"));
                return out;
            }
        };
        if self.post.is_empty() {
            push(Condition::MetricDecrease, "surgery left no component".into());
        }
        for (k, comp) in self.post.iter().enumerate() {
            if comp.snapshot.time != self.time || self.pre.time != self.time {
                push(
                    Condition::FlowResidual,
                    format!("component {k}: pre and post times differ from the event time"),
                );
            }
            let post = match DiagnosticsRecord::compute(&comp.snapshot.payload) {
                Ok(d) => d,
                Err(e) => {
                    push(Condition::MetricDecrease, format!("component {k} unreadable: {e}"));
                    continue;
                }
            };
            // Shared nodes carry identical curvature up to rounding.
            if post.r_min < pre.r_min - 1e-9 * pre.r_min.abs().max(1.0) {
                push(
                    Condition::MinCurvature,
                    format!("component {k}: R_min {} < {} before", post.r_min, pre.r_min),
                );
            }
            if post.r_max > 0.5 * self.theta {
                push(
                    Condition::MaxCurvature,
                    format!("component {k}: R_max {} > theta/2 = {}", post.r_max, 0.5 * self.theta),
                );
            }
            if let Some(d) = metric_increase(&self.pre.payload, &comp.snapshot.payload, comp.pre_start) {
                push(Condition::MetricDecrease, format!("component {k}: {d}"));
            }
        }
        out
    }
}

/// First node where the post metric exceeds the pre metric, if any.
fn metric_increase(pre: &Payload, post: &Payload, start: usize) -> Option<String> {
    match (pre, post) {
        (Payload::Warped(a), Payload::Warped(b)) => {
            let n = a.n();
            let periodic = a.topology == Topology::PeriodicS2xS1;
            if !periodic && start + b.n() > n {
                return Some(format!("piece of {} intervals does not fit at node {start}", b.n()));
            }
            for k in 0..=b.n() {
                let i = if periodic { (start + k) % n } else { start + k };
                if b.psi[k] > a.psi[i] {
                    return Some(format!(
                        "psi rises at node {k} (pre node {i}): {} > {}",
                        b.psi[k], a.psi[i]
                    ));
                }
                if b.phi[k] > a.phi[i] {
                    return Some(format!(
                        "phi rises at node {k} (pre node {i}): {} > {}",
                        b.phi[k], a.phi[i]
                    ));
                }
            }
            None
        }
        (Payload::Homogeneous(a), Payload::Homogeneous(b)) => {
            (b.family != a.family || b.scale > a.scale).then(|| "homogeneous metric grew".to_string())
        }
        _ => Some("payload kinds differ".into()),
    }
}

/// Stepping rules needed to replay a warped trajectory exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpedScheme {
    pub policy: GridPolicy,
    pub c_cfl: f64,
}

/// A piecewise smooth evolving metric. A surgery ends a timeline; each
/// surviving component continues in a child timeline that starts with its
/// post-surgery snapshot.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Timeline {
    pub states: Vec<MetricSnapshot>,
    pub singular_times: Vec<f64>,
    pub surgeries: Vec<SurgeryEvent>,
    pub children: Vec<Timeline>,
    /// Every step taken, in order.
    pub dts: Vec<f64>,
    /// Number of steps taken before each stored state.
    pub marks: Vec<usize>,
    /// Set for warped flows; enables the replay audit.
    pub scheme: Option<WarpedScheme>,
}

impl Timeline {
    pub fn new(scheme: Option<WarpedScheme>) -> Self {
        Timeline {
            scheme,
            ..Timeline::default()
        }
    }

    pub fn last_time(&self) -> Option<f64> {
        self.states.last().map(|s| s.time)
    }

    pub fn append_state(&mut self, snap: MetricSnapshot) -> Result<()> {
        if let Some(last) = self.last_time() {
            if !(snap.time > last) {
                return Err(Error::NonMonotoneTime { last, next: snap.time });
            }
        }
        if !self.surgeries.is_empty() {
            return Err(Error::BadParameters("timeline already ended in a surgery".into()));
        }
        self.marks.push(self.dts.len());
        self.states.push(snap);
        Ok(())
    }

    /// Note a flow step of size `dt` taken since the last stored state.
    pub fn push_step(&mut self, dt: f64) {
        self.dts.push(dt);
    }

    /// Close the timeline with a surgery. The pre snapshot is stored here
    /// and each post component opens a child timeline.
    pub fn record_surgery(&mut self, mut event: SurgeryEvent) -> Result<()> {
        if let Some(last) = self.last_time() {
            if !(event.time > last) {
                return Err(Error::NonMonotoneTime { last, next: event.time });
            }
        }
        if !self.surgeries.is_empty() {
            return Err(Error::BadParameters("timeline already ended in a surgery".into()));
        }
        if let Some(v) = event.violations().into_iter().next() {
            return Err(Error::WeakSolutionViolation {
                condition: v.condition,
                detail: v.detail,
            });
        }
        event.pre.phase = Phase::PreSurgery;
        for comp in &mut event.post {
            comp.snapshot.phase = Phase::PostSurgery;
            let mut child = Timeline::new(self.scheme);
            child.marks.push(0);
            child.states.push(comp.snapshot.clone());
            self.children.push(child);
        }
        self.marks.push(self.dts.len());
        self.states.push(event.pre.clone());
        self.singular_times.push(event.time);
        self.surgeries.push(event);
        Ok(())
    }

    /// Depth-first walk over this timeline and its descendants.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Timeline, &[usize])) {
        fn go<'a>(t: &'a Timeline, path: &mut Vec<usize>, f: &mut dyn FnMut(&'a Timeline, &[usize])) {
            f(t, path);
            for (k, c) in t.children.iter().enumerate() {
                path.push(k);
                go(c, path, f);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), f);
    }

    pub fn node(&self, path: &[usize]) -> Option<&Timeline> {
        path.iter().try_fold(self, |t, &k| t.children.get(k))
    }

    pub fn node_mut(&mut self, path: &[usize]) -> Option<&mut Timeline> {
        path.iter().try_fold(self, |t, &k| t.children.get_mut(k))
    }

    /// All surgery events, depth first.
    pub fn all_surgeries(&self) -> Vec<&SurgeryEvent> {
        let mut out = Vec::new();
        self.walk(&mut |t, _| out.extend(t.surgeries.iter()));
        out
    }

    /// Timelines with no children, with their paths.
    pub fn leaves(&self) -> Vec<(Vec<usize>, &Timeline)> {
        let mut out = Vec::new();
        self.walk(&mut |t, p| {
            if t.children.is_empty() {
                out.push((p.to_vec(), t));
            }
        });
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Audit a timeline tree: cached diagnostics, time ordering, every surgery
/// event, and the flow on each smooth stretch (exact replay for warped
/// flows, difference quotients for homogeneous ones).
pub fn verify_weak_solution(timeline: &Timeline) -> WeakReport {
    let mut violations = Vec::new();
    timeline.walk(&mut |t, _| violations.extend(audit(t)));
    WeakReport {
        ok: violations.is_empty(),
        violations,
    }
}

fn audit(t: &Timeline) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |time, condition, detail: String| {
        out.push(Violation {
            time,
            condition,
            detail,
        })
    };
    for s in &t.states {
        if let Err(d) = s.check_diagnostics(1e-9) {
            push(s.time, Condition::Diagnostics, d);
        }
    }
    for w in t.states.windows(2) {
        if !(w[1].time > w[0].time) {
            push(
                w[1].time,
                Condition::FlowResidual,
                format!("state time {} does not follow {}", w[1].time, w[0].time),
            );
        }
    }
    for ev in &t.surgeries {
        out.extend(ev.violations());
    }
    if t.marks.len() != t.states.len() {
        out.push(Violation {
            time: 0.0,
            condition: Condition::FlowResidual,
            detail: "step marks do not match states".into(),
        });
        return out;
    }
    for k in 1..t.states.len() {
        let (a, b) = (&t.states[k - 1], &t.states[k]);
        let (m0, m1) = (t.marks[k - 1], t.marks[k]);
        let detail = match (&a.payload, &b.payload) {
            (Payload::Warped(p), Payload::Warped(q)) => {
                let Some(scheme) = t.scheme else {
                    out.push(Violation {
                        time: b.time,
                        condition: Condition::FlowResidual,
                        detail: "no stepping scheme recorded".into(),
                    });
                    continue;
                };
                match t.dts.get(m0..m1) {
                    Some(dts) => replay_mismatch(p, q, a.time, b.time, dts, &scheme),
                    None => Some("step record too short".into()),
                }
            }
            (Payload::Homogeneous(p), Payload::Homogeneous(q)) => {
                let r = homogeneous::flow_residual(p, q, b.time - a.time);
                (r > 1e-8).then(|| format!("flow residual {r:e}"))
            }
            _ => Some("payload kind changes".into()),
        };
        if let Some(d) = detail {
            out.push(Violation {
                time: b.time,
                condition: Condition::FlowResidual,
                detail: d,
            });
        }
    }
    out
}

fn replay_mismatch(
    p: &WarpedProfile,
    q: &WarpedProfile,
    t0: f64,
    t1: f64,
    dts: &[f64],
    scheme: &WarpedScheme,
) -> Option<String> {
    let mut t = t0;
    for dt in dts {
        t += dt;
    }
    if t != t1 {
        return Some(format!("steps add up to t = {t}, state says {t1}"));
    }
    let r = match warped::advance(p, dts, &scheme.policy, scheme.c_cfl) {
        Ok(r) => r,
        Err(e) => return Some(format!("replay failed: {e}")),
    };
    if r.n() != q.n() || r.topology != q.topology {
        return Some(format!("replay ends on {} intervals, state has {}", r.n(), q.n()));
    }
    let scale = q.psi.iter().chain(&q.phi).fold(0.0f64, |a, b| a.max(b.abs()));
    let worst = r
        .psi
        .iter()
        .zip(&q.psi)
        .chain(r.phi.iter().zip(&q.phi))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    (worst > 1e-12 * scale).then(|| format!("state differs from the replayed flow by {worst:e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warped::{make_profile, ProfileKind};

    fn snap(t: f64) -> MetricSnapshot {
        let st = homogeneous::state_at(homogeneous::Family::ConstantCurvature { k0: -1.0 }, 1.0, t).unwrap();
        MetricSnapshot::new(t, Payload::Homogeneous(st), Phase::Regular).unwrap()
    }

    #[test]
    fn append_in_order() {
        let mut tl = Timeline::default();
        tl.append_state(snap(0.0)).unwrap();
        assert_eq!(tl.states.len(), 1);
        tl.append_state(snap(1.0)).unwrap();
        tl.append_state(snap(1.1)).unwrap();
        assert_eq!(tl.states.len(), 3);
        assert!(matches!(tl.append_state(snap(0.9)), Err(Error::NonMonotoneTime { .. })));
    }

    #[test]
    fn diagnostics_identities() {
        let s = snap(3.0);
        let d = s.diagnostics;
        assert!(d.r_min <= d.r_max);
        assert_eq!(d.rhat, d.r_min * d.volume.powf(2.0 / 3.0));
        assert!(d.x_max >= 0.0);
        s.check_diagnostics(1e-9).unwrap();
    }

    fn round_event(post_scale: f64, bump: Option<usize>) -> SurgeryEvent {
        let p = make_profile(ProfileKind::Round(1.0), 200).unwrap();
        let pre = MetricSnapshot::new(1.0, Payload::Warped(p.clone()), Phase::PreSurgery).unwrap();
        let mut q = p.scaled(post_scale);
        if let Some(i) = bump {
            q.psi[i] = p.psi[i] * 1.01;
        }
        let post = MetricSnapshot::new(1.0, Payload::Warped(q), Phase::PostSurgery).unwrap();
        SurgeryEvent {
            time: 1.0,
            pre,
            post: vec![PostComponent {
                snapshot: post,
                pre_start: 0,
            }],
            necks_used: vec![],
            theta: 1e6,
        }
    }

    #[test]
    fn accepted_event() {
        // Shrinking a round sphere raises R_min and lowers the metric.
        let ev = round_event(0.9, None);
        assert!(ev.post_r_min() >= ev.pre.diagnostics.r_min + 0.5);
        let mut tl = Timeline::default();
        tl.record_surgery(ev).unwrap();
        assert_eq!(tl.singular_times, vec![1.0]);
        assert_eq!(tl.children.len(), 1);
        assert_eq!(tl.children[0].states[0].phase, Phase::PostSurgery);
    }

    #[test]
    fn rmin_drop_is_ii_a() {
        let ev = round_event(1.05, None);
        let v = ev.violations();
        assert!(v.iter().any(|v| v.condition == Condition::MinCurvature));
        let mut tl = Timeline::default();
        match tl.record_surgery(ev) {
            Err(Error::WeakSolutionViolation { condition, .. }) => assert_eq!(condition.code(), "ii.a"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pointwise_increase_is_ii_b() {
        let ev = round_event(0.9, None);
        let mut ev2 = ev.clone();
        if let Payload::Warped(q) = &mut ev2.post[0].snapshot.payload {
            let pre = ev.pre.warped().unwrap();
            q.psi[50] = pre.psi[50] * 1.01;
        }
        let v = ev2.violations();
        assert!(
            v.iter()
                .any(|v| v.condition == Condition::MetricDecrease && v.detail.contains("node 50")),
            "{v:?}"
        );
        let _ = round_event(1.0, Some(10));
    }

    #[test]
    fn single_snapshot_verifies() {
        let mut tl = Timeline::default();
        tl.append_state(snap(0.0)).unwrap();
        let r = verify_weak_solution(&tl);
        assert!(r.ok && r.violations.is_empty());
    }

    #[test]
    fn homogeneous_run_verifies() {
        let tl =
            homogeneous::run_homogeneous(homogeneous::Family::ConstantCurvature { k0: -1.0 }, 1.0, 10.0, 20).unwrap();
        assert!(verify_weak_solution(&tl).ok);
    }
}
