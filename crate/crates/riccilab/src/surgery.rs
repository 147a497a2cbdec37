//! Cutoff parameters, the red/orange/green partition, delta-neck detection
//! and cap replacement on warped profiles.

mod run;

pub use run::{run_with_surgery, Fate, FinalComponent, Outcome, RunOptions, RunResult};

use crate::error::{Error, Result};
use crate::topology::{self, Decomposition, PieceKind, Shape};
use crate::warped::{self, smoothstep, CurvatureFields, Topology, WarpedProfile};

/// The surgery parameter ledger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurgeryParams {
    pub eps: f64,
    pub r: f64,
    pub delta: f64,
    pub h: f64,
    pub d: f64,
    pub theta: f64,
    pub c_eq6: f64,
}

/// Overrides accepted by [`cutoff_params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffConfig {
    pub eps: f64,
    pub d_default: f64,
    pub c_eq6: f64,
}

impl Default for CutoffConfig {
    fn default() -> Self {
        CutoffConfig {
            eps: 1e-2,
            d_default: 10.0,
            c_eq6: 1.0,
        }
    }
}

impl SurgeryParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadParameters(m));
        if !(self.r > 0.0 && self.delta > 0.0 && self.h > 0.0 && self.c_eq6 > 0.0) {
            return bad("r, delta, h and C must be positive".into());
        }
        if !(self.delta < self.eps && self.eps <= 1e-2) {
            return bad(format!(
                "need delta < eps <= 1e-2, got delta = {}, eps = {}",
                self.delta, self.eps
            ));
        }
        if !(self.h < self.delta * self.r) {
            return bad(format!(
                "need h < delta r, got h = {}, delta r = {}",
                self.h,
                self.delta * self.r
            ));
        }
        if !(self.d >= 1.0) {
            return bad(format!("need D >= 1, got {}", self.d));
        }
        if self.theta != 2.0 * self.d / (self.h * self.h) {
            return bad("theta must equal 2 D / h^2".into());
        }
        Ok(())
    }

    /// `D h^-2`, the lower edge of the red band.
    pub fn red_threshold(&self) -> f64 {
        self.d / (self.h * self.h)
    }

    /// `2 r^-2`, the upper edge of the green band.
    pub fn green_threshold(&self) -> f64 {
        2.0 / (self.r * self.r)
    }

    /// Half-length of the neck window in rescaled units: `2 / delta` total, capped at 10.
    pub fn window_half(&self) -> f64 {
        (1.0 / self.delta).min(5.0)
    }
}

/// `h = delta r / 2`, `D` from the config, `theta = 2 D / h^2`.
pub fn cutoff_params(r: f64, delta: f64, config: &CutoffConfig) -> Result<SurgeryParams> {
    let h = 0.5 * delta * r;
    let p = SurgeryParams {
        eps: config.eps,
        r,
        delta,
        h,
        d: config.d_default,
        theta: 2.0 * config.d_default / (h * h),
        c_eq6: config.c_eq6,
    };
    p.validate()?;
    Ok(p)
}

/// Minimum time between surgeries: `dR/dt < C R^2` needs `1 / (C theta)` to climb from `theta/2` to `theta`.
pub fn min_spacing(params: &SurgeryParams) -> f64 {
    1.0 / (params.c_eq6 * params.theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    Red,
    Orange,
    Green,
}

pub fn partition_regions(r_field: &[f64], params: &SurgeryParams) -> Result<Vec<RegionLabel>> {
    let red = params.red_threshold();
    let green = params.green_threshold();
    if red <= green {
        return Err(Error::InconsistentThresholds { red, green });
    }
    Ok(r_field
        .iter()
        .map(|&r| {
            if r >= red {
                RegionLabel::Red
            } else if r <= green {
                RegionLabel::Green
            } else {
                RegionLabel::Orange
            }
        })
        .collect())
}

/// Which side of the neck the high-curvature region lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeckDescriptor {
    pub center_index: usize,
    /// Arclength of the interpolated crossing `R = h^-2`.
    pub center_s: f64,
    /// Rescale factor `R(center) / 2` turning the neck into a unit cylinder.
    pub lambda: f64,
    /// Window half-length in arclength.
    pub half_length_s: f64,
    pub quality: f64,
    /// Side of the neck that holds the red region, if any.
    pub red_side: Option<Side>,
}

/// Why [`detect_necks`] returned nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoNeckReason {
    NoRedPoints,
    NoGreenPoints,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeckScan {
    pub necks: Vec<NeckDescriptor>,
    pub reason: Option<NoNeckReason>,
}

/// Distance of the rescaled profile from the unit cylinder, in the C^2 norm
/// over the window of rescaled half-length `half` around node `center`.
/// Infinite when the window leaves the manifold.
pub fn neck_quality(
    p: &WarpedProfile,
    s: &[f64],
    deriv: &(Vec<f64>, Vec<f64>),
    center: usize,
    lambda: f64,
    half: f64,
) -> (f64, f64) {
    let k = lambda.sqrt();
    let half_s = half / k;
    let n = p.n();
    let s0 = s[center];
    let total = s[n];
    let closed = p.topology == Topology::ClosedS3;
    if closed && (s0 - half_s <= 0.0 || s0 + half_s >= total) {
        return (f64::INFINITY, half_s);
    }
    if !closed && 2.0 * half_s >= total {
        return (f64::INFINITY, half_s);
    }
    let mut q: f64 = 0.0;
    let mut visit = |i: usize| {
        let a = (k * p.psi[i] - 1.0).abs();
        let b = deriv.0[i].abs();
        let c = deriv.1[i].abs() / k;
        q = q.max(a).max(b).max(c);
    };
    // Walk outwards until the arclength leaves the window.
    let step = |i: usize, fwd: bool| -> usize {
        if fwd {
            if i == n {
                1
            } else {
                i + 1
            }
        } else if i == 0 {
            n - 1
        } else {
            i - 1
        }
    };
    visit(center);
    for fwd in [true, false] {
        let mut i = center;
        let mut dist = 0.0;
        loop {
            let j = step(i, fwd);
            let ds = if fwd {
                if j > i {
                    s[j] - s[i]
                } else {
                    s[j]
                }
            } else if j < i {
                s[i] - s[j]
            } else {
                total - s[j]
            };
            dist += ds;
            if dist > half_s {
                break;
            }
            visit(j);
            i = j;
        }
    }
    (q, half_s)
}

/// Neck descriptor centred at node `c`, with no red side. Useful on model
/// objects such as the exact cylinder.
pub fn neck_at(p: &WarpedProfile, c: usize, params: &SurgeryParams) -> Result<NeckDescriptor> {
    let curv = warped::curvature(p)?;
    let r = curv.r[c];
    if !(r > 0.0) {
        return Err(Error::BadParameters(format!("no neck at node {c}: R = {r}")));
    }
    let s = p.arclength();
    let deriv = warped::arclength_derivatives(p);
    let lambda = r / 2.0;
    let (quality, half_length_s) = neck_quality(p, &s, &deriv, c, lambda, params.window_half());
    Ok(NeckDescriptor {
        center_index: c,
        center_s: s[c],
        lambda,
        half_length_s,
        quality,
        red_side: None,
    })
}

/// Find a delta-neck on each side of every red block.
pub fn detect_necks(p: &WarpedProfile, curv: &CurvatureFields, params: &SurgeryParams) -> Result<NeckScan> {
    let labels = partition_regions(&curv.r, params)?;
    if !labels.contains(&RegionLabel::Red) {
        return Ok(NeckScan {
            necks: vec![],
            reason: Some(NoNeckReason::NoRedPoints),
        });
    }
    if !labels.contains(&RegionLabel::Green) {
        return Ok(NeckScan {
            necks: vec![],
            reason: Some(NoNeckReason::NoGreenPoints),
        });
    }
    let s = p.arclength();
    let deriv = warped::arclength_derivatives(p);
    let n = p.n();
    let target = 1.0 / (params.h * params.h);
    let closed = p.topology == Topology::ClosedS3;
    let mut necks: Vec<NeckDescriptor> = Vec::new();
    let high: Vec<bool> = curv.r.iter().map(|&r| r >= target).collect();
    if high.iter().all(|&b| b) {
        return Err(Error::NoSeparatingNecks("curvature exceeds h^-2 everywhere".into()));
    }
    // Maximal runs of R >= h^-2 that contain a red node; their ends are the crossings.
    let runs = runs_of(&high, closed);
    for (a, b) in runs {
        let has_red = index_range(a, b, n, closed).any(|i| labels[i] == RegionLabel::Red);
        if !has_red {
            continue;
        }
        let ends = [(a, Side::Right), (b, Side::Left)];
        for (edge, red_side) in ends {
            // `edge` is the last high node; the crossing lies towards the outside.
            let outer = match red_side {
                Side::Right => {
                    if edge == 0 {
                        if closed {
                            continue;
                        } else {
                            n - 1
                        }
                    } else {
                        edge - 1
                    }
                }
                Side::Left => {
                    if edge == n {
                        if closed {
                            continue;
                        } else {
                            1
                        }
                    } else {
                        edge + 1
                    }
                }
            };
            let (r_in, r_out) = (curv.r[edge], curv.r[outer]);
            let frac = (r_in - target) / (r_in - r_out);
            let center_s = s[edge] + frac * (s[outer] - s[edge]);
            let center_index = if frac < 0.5 { edge } else { outer };
            let lambda = curv.r[center_index] / 2.0;
            let (quality, half_length_s) = neck_quality(p, &s, &deriv, center_index, lambda, params.window_half());
            if quality > params.delta {
                return Err(Error::NoSeparatingNecks(format!(
                    "best neck at s = {center_s:.6} has quality {quality:.3e} > delta = {}",
                    params.delta
                )));
            }
            necks.push(NeckDescriptor {
                center_index,
                center_s,
                lambda,
                half_length_s,
                quality,
                red_side: Some(red_side),
            });
        }
    }
    necks.sort_by(|x, y| x.center_s.partial_cmp(&y.center_s).expect("finite"));
    for w in necks.windows(2) {
        if w[0].center_s + w[0].half_length_s > w[1].center_s - w[1].half_length_s {
            return Err(Error::NoSeparatingNecks("neck windows overlap".into()));
        }
    }
    Ok(NeckScan { necks, reason: None })
}

fn runs_of(mask: &[bool], closed: bool) -> Vec<(usize, usize)> {
    let n = mask.len() - 1;
    let mut runs = Vec::new();
    let mut i = 0;
    let last = if closed { n } else { n - 1 };
    while i <= last {
        if mask[i] {
            let a = i;
            while i < last && mask[i + 1] {
                i += 1;
            }
            runs.push((a, i));
        }
        i += 1;
    }
    if !closed && runs.len() > 1 {
        let (fa, fb) = runs[0];
        let (la, lb) = *runs.last().expect("nonempty");
        if fa == 0 && lb == n - 1 {
            runs.pop();
            runs[0] = (la, fb);
        }
    }
    runs
}

fn index_range(a: usize, b: usize, n: usize, closed: bool) -> Box<dyn Iterator<Item = usize>> {
    if a <= b {
        Box::new(a..=b)
    } else {
        debug_assert!(!closed);
        Box::new((a..n).chain(0..=b))
    }
}

/// Cap radius factor at fraction `u` of the way from the join to the pole:
/// `cos(pi g(u) / 2)` with `g(u) = 2 u^3 - u^4`. It is 1 to second order at
/// the join and closes with unit slope when the cap length is `pi psi_pole`.
pub fn cap_factor(u: f64) -> f64 {
    let g = 2.0 * u.powi(3) - u.powi(4);
    (0.5 * std::f64::consts::PI * g).cos()
}

/// One connected piece left after surgery.
#[derive(Debug, Clone, PartialEq)]
pub struct SurgeryPiece {
    pub profile: WarpedProfile,
    /// Pre-surgery index of node 0 of this piece; later nodes follow in
    /// order, wrapping around on periodic profiles.
    pub pre_start: usize,
    /// Nodes of the piece that belong to a new cap.
    pub cap_nodes: Vec<usize>,
}

/// Result of cutting a profile along its necks.
#[derive(Debug, Clone, PartialEq)]
pub struct SurgeryOutcome {
    /// Surviving pieces ordered by their leftmost pre-surgery node.
    pub pieces: Vec<SurgeryPiece>,
    /// Shapes certified for the discarded regions.
    pub discarded: Vec<Shape>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum End {
    Pole,
    /// Cap grows past the cut, into the discarded side.
    Outward,
    /// Cap grows from the cut into the piece itself.
    Inward,
}

/// Cut along every neck, drop the regions holding red points once they are
/// certified as balls or tubes, and close what is left with caps.
///
/// Each cap replaces the profile beyond a cut by
/// `A(u) cos(pi g(u) / 2)`, where `u` runs from 0 at the join to 1 at the
/// new pole, `A` blends the old radius into the pole-side radius `psi_j`
/// with a quintic smoothstep, and the cap has length `pi psi_j`. Caps only
/// ever shrink `psi` and leave `phi` alone.
pub fn perform_surgery(p: &WarpedProfile, necks: &[NeckDescriptor], params: &SurgeryParams) -> Result<SurgeryOutcome> {
    if necks.is_empty() {
        return Err(Error::BadParameters("surgery needs at least one neck".into()));
    }
    if let Some(nk) = necks.iter().find(|nk| nk.quality > params.delta) {
        return Err(Error::BadParameters(format!(
            "neck quality {:.3e} exceeds delta",
            nk.quality
        )));
    }
    let n = p.n();
    let curv = warped::curvature(p)?;
    let periodic = p.topology == Topology::PeriodicS2xS1;
    if periodic && necks.iter().all(|nk| nk.red_side.is_none()) {
        if necks.len() != 1 {
            return Err(Error::BadParameters(
                "a periodic profile without red points takes one cut".into(),
            ));
        }
        let c = necks[0].center_index % n;
        let line = rotate(p, c);
        let s = line.arclength();
        let piece = build_piece(&line, &s, 0, n, End::Inward, End::Inward, params)?;
        return Ok(SurgeryOutcome {
            pieces: vec![SurgeryPiece {
                pre_start: (piece.pre_start + c) % n,
                ..piece
            }],
            discarded: vec![],
        });
    }
    if necks.iter().any(|nk| nk.red_side.is_none()) {
        return Err(Error::BadParameters(
            "necks next to red points must say which side is red".into(),
        ));
    }
    // On a periodic profile, start the line inside the red region.
    let shift = if periodic {
        (0..n)
            .max_by(|&i, &j| curv.r[i].partial_cmp(&curv.r[j]).expect("finite"))
            .unwrap_or(0)
    } else {
        0
    };
    let line = if periodic { rotate(p, shift) } else { p.clone() };
    let line_curv = if periodic { warped::curvature(&line)? } else { curv };
    let s = line.arclength();
    let mut cuts: Vec<(usize, Side)> = necks
        .iter()
        .map(|nk| {
            let i = if periodic {
                (nk.center_index + n - shift) % n
            } else {
                nk.center_index
            };
            (i, nk.red_side.expect("checked"))
        })
        .collect();
    cuts.sort_by_key(|c| c.0);
    let mut pieces = Vec::new();
    let mut discarded = Vec::new();
    let mut wrap_necks = 0usize;
    for k in 0..=cuts.len() {
        let left = if k == 0 { None } else { Some(cuts[k - 1]) };
        let right = cuts.get(k).copied();
        let a = left.map_or(0, |c| c.0);
        let b = right.map_or(n, |c| c.0);
        // A pole end goes with the neck at the other end of the segment.
        let (keep_left, keep_right) = match (left, right) {
            (Some(l), Some(r)) => (l.1 == Side::Left, r.1 == Side::Right),
            (None, Some(r)) => (r.1 == Side::Right && !periodic, r.1 == Side::Right),
            (Some(l), None) => (l.1 == Side::Left, l.1 == Side::Left && !periodic),
            (None, None) => unreachable!("at least one cut"),
        };
        if keep_left && keep_right {
            let l = if left.is_some() { End::Outward } else { End::Pole };
            let r = if right.is_some() { End::Outward } else { End::Pole };
            let mut piece = build_piece(&line, &s, a, b, l, r, params)?;
            piece.pre_start = (piece.pre_start + shift) % if periodic { n } else { n + 1 };
            pieces.push(piece);
        } else if !keep_left && !keep_right {
            let cover = topology::cover_interval(
                &line,
                &line_curv,
                a,
                b,
                params.eps,
                params.window_half(),
                f64::NEG_INFINITY,
            );
            if let Some(&i) = cover.uncovered.first() {
                return Err(Error::NoSeparatingNecks(format!(
                    "discarded region has no canonical neighbourhood at node {}",
                    (i + shift) % (n + 1)
                )));
            }
            if periodic && (left.is_none() || right.is_none()) {
                // The two ends of the line are one region.
                wrap_necks += cover.windows.len();
                if right.is_none() {
                    discarded.push(certify(wrap_necks, false, false)?);
                }
                continue;
            }
            discarded.push(certify(cover.windows.len(), left.is_none(), right.is_none())?);
        } else {
            return Err(Error::NoSeparatingNecks(format!(
                "necks around nodes {a}..{b} face the same way"
            )));
        }
    }
    if pieces.is_empty() {
        return Err(Error::NoSeparatingNecks("surgery would leave nothing".into()));
    }
    pieces.sort_by_key(|pc| pc.pre_start);
    Ok(SurgeryOutcome { pieces, discarded })
}

fn certify(necks: usize, pole_left: bool, pole_right: bool) -> Result<Shape> {
    let mut kinds = Vec::new();
    if pole_left {
        kinds.push(PieceKind::Cap);
    }
    kinds.extend(std::iter::repeat(PieceKind::Neck).take(necks.max(1)));
    if pole_right {
        kinds.push(PieceKind::Cap);
    }
    let shape = topology::classify(&Decomposition::chain(&kinds));
    match shape {
        Shape::R3 | Shape::S2xR => Ok(shape),
        other => Err(Error::NoSeparatingNecks(format!(
            "discarded region classifies as {other}"
        ))),
    }
}

/// Periodic profile re-indexed to start at node `c`.
fn rotate(p: &WarpedProfile, c: usize) -> WarpedProfile {
    let n = p.n();
    let idx = |k: usize| (c + k) % n;
    WarpedProfile {
        phi: (0..=n).map(|k| p.phi[idx(k)]).collect(),
        psi: (0..=n).map(|k| p.psi[idx(k)]).collect(),
        topology: p.topology,
    }
}

/// Nodes `a..=b` of `line`, closed off at each end that is a cut.
fn build_piece(
    line: &WarpedProfile,
    s: &[f64],
    a: usize,
    b: usize,
    left: End,
    right: End,
    params: &SurgeryParams,
) -> Result<SurgeryPiece> {
    let mut psi = line.psi.clone();
    let mut cap_nodes = Vec::new();
    let lo = match left {
        End::Pole => a,
        End::Outward => cap(&mut psi, s, a, false, &mut cap_nodes)?,
        End::Inward => cap_at(&mut psi, s, a, true, &mut cap_nodes),
    };
    let hi = match right {
        End::Pole => b,
        End::Outward => cap(&mut psi, s, b, true, &mut cap_nodes)?,
        End::Inward => cap_at(&mut psi, s, b, false, &mut cap_nodes),
    };
    if hi < lo + 16 {
        return Err(Error::CapConstructionFailed(format!(
            "piece {lo}..{hi} is too short for its caps"
        )));
    }
    let scale = (hi - lo) as f64 / line.n() as f64;
    let phi: Vec<f64> = line.phi[lo..=hi].iter().map(|f| f * scale).collect();
    let profile = WarpedProfile::new(phi, psi[lo..=hi].to_vec(), Topology::ClosedS3)?;
    let mut cap_nodes: Vec<usize> = cap_nodes
        .into_iter()
        .filter(|&k| k >= lo && k <= hi)
        .map(|k| k - lo)
        .collect();
    cap_nodes.sort_unstable();
    let curv = warped::curvature(&profile)?;
    let (floor, ceil) = (0.5 / (params.h * params.h), 0.5 * params.theta);

    for &k in &cap_nodes {
        let r = curv.r[k];
        if !(r >= floor && r <= ceil) {
            return Err(Error::CapConstructionFailed(format!(
                "cap scalar curvature {r:.4e} at node {k} leaves [{floor:.4e}, {ceil:.4e}]"
            )));
        }
    }
    Ok(SurgeryPiece {
        profile,
        pre_start: lo,
        cap_nodes,
    })
}

/// Grow a cap from the cut at node `c`, walking forwards or backwards. The
/// new pole is the first node `j` at distance at least `pi psi_j` from the
/// cut. Returns `j`.
fn cap(psi: &mut [f64], s: &[f64], c: usize, forward: bool, nodes: &mut Vec<usize>) -> Result<usize> {
    let last = psi.len() - 1;
    let mut j = c;
    loop {
        j = match (forward, j) {
            (true, j) if j < last => j + 1,
            (false, j) if j > 0 => j - 1,
            _ => break,
        };
        if psi[j] <= 0.0 {
            break;
        }
        if (s[j] - s[c]).abs() >= std::f64::consts::PI * psi[j] {
            return Ok(cap_at(psi, s, j, !forward, nodes));
        }
    }
    Err(Error::CapConstructionFailed(format!(
        "no room for a cap next to node {c}"
    )))
}

/// Put a pole at node `j` and reshape the nodes within `pi psi_j` of it on
/// the side given by `forward`.
fn cap_at(psi: &mut [f64], s: &[f64], j: usize, forward: bool, nodes: &mut Vec<usize>) -> usize {
    let last = psi.len() - 1;
    let pole = psi[j];
    let len = std::f64::consts::PI * pole;
    let mut k = j;
    loop {
        k = match (forward, k) {
            (true, k) if k < last => k + 1,
            (false, k) if k > 0 => k - 1,
            _ => break,
        };
        let to_pole = (s[j] - s[k]).abs();
        if to_pole >= len {
            break;
        }
        let u = 1.0 - to_pole / len;
        let q = smoothstep(u);
        let base = (1.0 - q) * psi[k] + q * pole;
        psi[k] = base * cap_factor(u);
        nodes.push(k);
    }
    psi[j] = 0.0;
    nodes.push(j);
    j
}
