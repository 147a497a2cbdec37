//! Checks of the curvature estimates and monotone quantities along runs.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::surgery::SurgeryParams;
use crate::timeline::{MetricSnapshot, Timeline};
use crate::topology::{self, Cover};
use crate::warped::{self, CurvatureFields, Topology, WarpedProfile};

/// Outcome of one named check. `worst_violation` is the largest amount by
/// which the checked inequality fails; it is `<= 0` exactly when the check
/// passes.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub worst_violation: f64,
    /// `(t, x)` of the worst point; `x` is the grid coordinate in `[0, 1]`.
    pub location: (f64, f64),
    /// Logged checks are reported but never turn a run into a warning.
    pub enforced: bool,
}

impl Check {
    /// Fresh check with nothing seen yet.
    pub fn new(name: &str) -> Self {
        Check {
            name: name.into(),
            pass: true,
            worst_violation: f64::NEG_INFINITY,
            location: (0.0, 0.0),
            enforced: true,
        }
    }

    pub fn logged(mut self) -> Self {
        self.enforced = false;
        self
    }

    /// Record a violation amount (negative means slack).
    pub fn observe(&mut self, violation: f64, t: f64, x: f64) {
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        if v > self.worst_violation {
            self.worst_violation = v;
            self.location = (t, x);
        }
        self.pass = self.worst_violation <= 0.0;
    }

    pub fn merge(&mut self, other: &Check) {
        self.observe(other.worst_violation, other.location.0, other.location.1);
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MonitorReport {
    pub checks: Vec<Check>,
}

impl MonitorReport {
    /// All enforced checks pass.
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass || !c.enforced)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Fold `check` into the entry of the same name.
    pub fn absorb(&mut self, check: Check) {
        match self.checks.iter_mut().find(|c| c.name == check.name) {
            Some(c) => c.merge(&check),
            None => self.checks.push(check),
        }
    }

    pub fn extend(&mut self, other: MonitorReport) {
        for c in other.checks {
            self.absorb(c);
        }
    }
}

fn grid_x(i: usize, n: usize) -> f64 {
    i as f64 / n as f64
}

// ---------------------------------------------------------------- balls

/// Linear interpolation of `psi` at arclength `s` (wrapped when periodic,
/// `None` outside a closed profile).
fn psi_at(p: &WarpedProfile, s_nodes: &[f64], s: f64) -> Option<f64> {
    let n = p.n();
    let total = s_nodes[n];
    let s = match p.topology {
        Topology::PeriodicS2xS1 => s.rem_euclid(total),
        Topology::ClosedS3 if !(0.0..=total).contains(&s) => return None,
        Topology::ClosedS3 => s,
    };
    let i = s_nodes.partition_point(|&v| v <= s).clamp(1, n);
    let (a, b) = (s_nodes[i - 1], s_nodes[i]);
    let w = if b > a { (s - a) / (b - a) } else { 0.0 };
    Some(p.psi[i - 1] * (1.0 - w) + p.psi[i] * w)
}

/// Volumes of the geodesic balls of radii `radii` about the point of the
/// fibre sphere at arclength `s0`.
///
/// The distance from the centre is solved on the surface of revolution
/// `ds^2 + psi(s)^2 da^2` spanned by a meridian plane, by first order fast
/// sweeping on a `2m x m` grid in `(s, a)`. The ball then contains, at
/// each level `s`, a spherical cap of the fibre of angular radius `a_max(s)`.
pub fn ball_volumes(p: &WarpedProfile, s_nodes: &[f64], s0: f64, radii: &[f64], m: usize) -> Vec<f64> {
    let rho_max = radii.iter().copied().fold(0.0, f64::max);
    let ds = rho_max / m as f64;
    let ns = 2 * m + 1;
    let psi: Vec<Option<f64>> = (0..ns)
        .map(|i| psi_at(p, s_nodes, s0 + (i as f64 - m as f64) * ds))
        .collect();
    // Keep cells close to square: psi_max * da ~ ds.
    let psi_max = psi.iter().flatten().copied().fold(0.0, f64::max);
    let na = ((std::f64::consts::PI * psi_max / ds).ceil() as usize)
        .clamp(m / 2, 4 * m)
        .max(4);
    let da = std::f64::consts::PI / na as f64;
    let idx = |i: usize, j: usize| i * (na + 1) + j;
    let mut d = vec![f64::INFINITY; ns * (na + 1)];
    // Seed a few cells around the centre with the local flat distance;
    // this removes the leading error of first order sweeping.
    if let Some(r0) = psi[m] {
        let k = 4usize;
        for i in m.saturating_sub(k)..=(m + k).min(ns - 1) {
            let Some(ri) = psi[i] else { continue };
            let dy = (i as f64 - m as f64) * ds;
            for j in 0..=k.min(na) {
                let w = 0.5 * (r0 + ri) * j as f64 * da;
                d[idx(i, j)] = (dy * dy + w * w).sqrt();
            }
        }
    }
    d[idx(m, 0)] = 0.0;
    if psi[m] == Some(0.0) {
        for j in 0..=na {
            d[idx(m, j)] = 0.0;
        }
    }
    let update = |d: &mut Vec<f64>, i: usize, j: usize| {
        let Some(r) = psi[i] else { return };
        let get = |ii: isize, jj: isize| -> f64 {
            if ii < 0 || ii as usize >= ns || psi[ii as usize].is_none() {
                return f64::INFINITY;
            }
            let jj = if jj < 0 {
                -jj
            } else if jj as usize > na {
                2 * na as isize - jj
            } else {
                jj
            };
            d[idx(ii as usize, jj as usize)]
        };
        let (ii, jj) = (i as isize, j as isize);
        let a = get(ii - 1, jj).min(get(ii + 1, jj));
        let b = get(ii, jj - 1).min(get(ii, jj + 1));
        let ha = r * da;
        let new = if ha <= 0.0 {
            a + ds
        } else if !a.is_finite() && !b.is_finite() {
            return;
        } else if (a - b).abs() >= ds.max(ha) || !a.is_finite() || !b.is_finite() {
            (a + ds).min(b + ha)
        } else {
            // (d - a)^2 / ds^2 + (d - b)^2 / ha^2 = 1, larger root.
            let (p2, q2) = (1.0 / (ds * ds), 1.0 / (ha * ha));
            let qa = p2 + q2;
            let qb = -2.0 * (a * p2 + b * q2);
            let qc = a * a * p2 + b * b * q2 - 1.0;
            let disc = qb * qb - 4.0 * qa * qc;
            let root = if disc >= 0.0 {
                (-qb + disc.sqrt()) / (2.0 * qa)
            } else {
                f64::INFINITY
            };
            if root >= a.max(b) {
                root
            } else {
                (a + ds).min(b + ha)
            }
        };
        let k = idx(i, j);
        if new < d[k] {
            d[k] = new;
        }
    };
    for _ in 0..6 {
        let before: f64 = d.iter().filter(|v| v.is_finite()).sum();
        for &(ri, rj) in &[(false, false), (true, false), (false, true), (true, true)] {
            for a in 0..ns {
                let i = if ri { ns - 1 - a } else { a };
                for b in 0..=na {
                    let j = if rj { na - b } else { b };
                    update(&mut d, i, j);
                }
                // A fibre of radius zero is a single point.
                if psi[i] == Some(0.0) {
                    let lo = (0..=na).map(|j| d[idx(i, j)]).fold(f64::INFINITY, f64::min);
                    for j in 0..=na {
                        d[idx(i, j)] = lo;
                    }
                }
            }
        }
        let after: f64 = d.iter().filter(|v| v.is_finite()).sum();
        if (before - after).abs() <= 1e-13 * after.abs() {
            break;
        }
    }
    let four_pi = 4.0 * std::f64::consts::PI;
    let total = s_nodes[p.n()];
    radii
        .iter()
        .map(|&rho| {
            // Fold levels onto one period so wrapped balls are not double counted.
            let mut levels: Vec<(f64, f64, f64)> = Vec::new();
            for i in 0..ns {
                let Some(r) = psi[i] else { continue };
                let row = |j: usize| d[idx(i, j)];
                let amax = if row(0) > rho {
                    0.0
                } else {
                    let mut a = std::f64::consts::PI;
                    for j in 1..=na {
                        if row(j) > rho {
                            let (d0, d1) = (row(j - 1), row(j));
                            let w = if d1.is_finite() && d1 > d0 {
                                (rho - d0) / (d1 - d0)
                            } else {
                                0.0
                            };
                            a = (j as f64 - 1.0 + w) * da;
                            break;
                        }
                    }
                    a
                };
                let frac = 0.5 * (1.0 - amax.cos());
                let s = s0 + (i as f64 - m as f64) * ds;
                levels.push((s, frac, r));
            }
            let integrand = |frac: f64, r: f64| four_pi * r * r * frac;
            if p.topology == Topology::PeriodicS2xS1 && 2.0 * rho > total {
                let cells = ((total / ds).round() as usize).max(1);
                let h = total / cells as f64;
                let mut best = vec![0.0f64; cells];
                for &(s, frac, _) in &levels {
                    let k = (((s - s0).rem_euclid(total)) / h).floor() as usize % cells;
                    best[k] = best[k].max(frac);
                }
                (0..cells)
                    .map(|k| {
                        let r = psi_at(p, s_nodes, s0 + (k as f64 + 0.5) * h).unwrap_or(0.0);
                        integrand(best[k], r) * h
                    })
                    .sum()
            } else {
                levels
                    .windows(2)
                    .map(|w| 0.5 * (integrand(w[0].1, w[0].2) + integrand(w[1].1, w[1].2)) * (w[1].0 - w[0].0))
                    .sum()
            }
        })
        .collect()
}

/// Half the volume of the Euclidean unit ball.
const HALF_UNIT_BALL: f64 = 2.0 * std::f64::consts::PI / 3.0;

/// First node whose unit ball has less than half the Euclidean volume.
fn ball_condition_failure(p: &WarpedProfile) -> Option<usize> {
    let s = p.arclength();
    (0..=p.n())
        .into_par_iter()
        .find_first(|&i| ball_volumes(p, &s, s[i], &[1.0], 64)[0] < HALF_UNIT_BALL)
}

/// Relative slack on `|sec| <= 1`, absorbing discretization error.
pub const SEC_TOL: f64 = 1e-4;

/// `|sec| <= 1` everywhere and every unit ball has at least half the
/// Euclidean volume.
pub fn is_normalized(p: &WarpedProfile) -> Result<bool> {
    let c = warped::curvature(p)?;
    Ok(c.max_abs_sec() <= 1.0 + SEC_TOL && ball_condition_failure(p).is_none())
}

/// Scale by the smallest power of two that brings `|sec|` down to 1, then
/// keep doubling (at most 16 times) until the ball condition holds.
/// Returns the scaled profile and the metric factor used.
pub fn normalize(p: &WarpedProfile) -> Result<(WarpedProfile, f64)> {
    let k = warped::curvature(p)?.max_abs_sec();
    let mut lambda = 1.0f64;
    while k / lambda > 1.0 + SEC_TOL {
        lambda *= 2.0;
    }
    let mut last = 0;
    for _ in 0..=16 {
        let q = p.scaled(lambda);
        match ball_condition_failure(&q) {
            None => return Ok((q, lambda)),
            Some(i) => last = i,
        }
        lambda *= 2.0;
    }
    Err(Error::CannotNormalize { center: last })
}

// ------------------------------------------------------------- pinching

/// Absolute slack granted to the pinching inequalities.
pub const PINCHING_TOL: f64 = 1e-8;

/// `R >= -6 / (4t + 1)` everywhere, and `R >= 2X (ln X + ln(1 + t) - 3)`
/// wherever `X > 0`.
pub fn check_pinching(fields: &CurvatureFields, t: f64) -> MonitorReport {
    let mut floor_chk = Check::new("pinching_floor");
    let mut log_chk = Check::new("pinching_log");
    let n = fields.r.len().saturating_sub(1).max(1);
    let floor = -6.0 / (4.0 * t + 1.0);
    for (i, (&r, &x)) in fields.r.iter().zip(&fields.x).enumerate() {
        let xi = grid_x(i, n);
        floor_chk.observe(floor - r - PINCHING_TOL, t, xi);
        if x > 0.0 {
            log_chk.observe(2.0 * x * (x.ln() + (1.0 + t).ln() - 3.0) - r - PINCHING_TOL, t, xi);
        }
    }
    MonitorReport {
        checks: vec![floor_chk, log_chk],
    }
}

// ----------------------------------------------------------------- rhat

pub fn rhat(snap: &MetricSnapshot) -> f64 {
    crate::timeline::rhat(snap.diagnostics.r_min, snap.diagnostics.volume)
}

/// `rhat` may not drop by more than `tol` across a step that starts at a
/// nonpositive value.
pub fn check_rhat_series(series: &[(f64, f64)], tol: f64) -> Check {
    let mut c = Check::new("rhat_monotone");
    for w in series.windows(2) {
        let ((_, a), (t, b)) = (w[0], w[1]);
        if a <= 0.0 {
            c.observe(a - tol - b, t, 0.0);
        }
    }
    c
}

/// Every root-to-leaf history of a timeline tree, pre snapshots followed
/// by the post snapshot of the branch taken.
pub fn lineages(timeline: &Timeline) -> Vec<Vec<&MetricSnapshot>> {
    fn go<'a>(t: &'a Timeline, prefix: &mut Vec<&'a MetricSnapshot>, out: &mut Vec<Vec<&'a MetricSnapshot>>) {
        let len = prefix.len();
        prefix.extend(t.states.iter());
        if t.children.is_empty() {
            out.push(prefix.clone());
        }
        for c in &t.children {
            go(c, prefix, out);
        }
        prefix.truncate(len);
    }
    let mut out = Vec::new();
    go(timeline, &mut Vec::new(), &mut out);
    out
}

/// [`check_rhat_series`] along every lineage, surgeries included.
pub fn check_rhat_monotone(timeline: &Timeline, tol: f64) -> Check {
    let mut c = Check::new("rhat_monotone");
    for line in lineages(timeline) {
        let series: Vec<(f64, f64)> = line.iter().map(|s| (s.time, rhat(s))).collect();
        c.merge(&check_rhat_series(&series, tol));
    }
    c
}

// ----------------------------------------------------- lifetime bounds

/// `R_min(0) / (1 - 2 t R_min(0) / 3)`, the solution of `r' = 2 r^2 / 3`.
pub fn rmin_lower_bound(rmin0: f64, t: f64) -> Result<f64> {
    if rmin0 > 0.0 {
        let blowup = 1.5 / rmin0;
        if t >= blowup {
            return Err(Error::PastBlowup { t, blowup });
        }
    }
    Ok(rmin0 / (1.0 - 2.0 * t * rmin0 / 3.0))
}

/// `3 / (2 R_min(0))`.
pub fn lifetime_bound(rmin0: f64) -> Result<f64> {
    if !(rmin0 > 0.0) {
        return Err(Error::BadParameters(format!(
            "lifetime bound needs R_min(0) > 0, got {rmin0}"
        )));
    }
    Ok(1.5 / rmin0)
}

/// `R_min(t) >= bound(t) - rel_tol |bound(t)|` along a series of `(t, R_min)`.
pub fn check_rmin_series(series: &[(f64, f64)], rmin0: f64, rel_tol: f64) -> Check {
    let mut c = Check::new("rmin_lower_bound");
    for &(t, r) in series {
        match rmin_lower_bound(rmin0, t) {
            Ok(b) => c.observe(b - rel_tol * b.abs() - r, t, 0.0),
            Err(_) => c.observe(f64::INFINITY, t, 0.0),
        }
    }
    c
}

// ----------------------------------------------------------------- width

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthEstimate {
    pub value: f64,
    pub argmax_s: f64,
}

/// Upper bound for the width from the sweepout by fibre spheres: the
/// largest fibre area `4 pi psi^2`.
pub fn width_bound(p: &WarpedProfile) -> Result<WidthEstimate> {
    if p.topology != Topology::ClosedS3 {
        return Err(Error::WrongTopology);
    }
    let s = p.arclength();
    let (i, m) = p
        .psi
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    Ok(WidthEstimate {
        value: 4.0 * std::f64::consts::PI * m * m,
        argmax_s: s[i],
    })
}

/// Difference-quotient form of `dW/dt <= -4 pi + 3 W / (4 (t + C))` along a
/// series of `(t, W)`, with slack `tol`.
pub fn check_width_series(series: &[(f64, f64)], c: f64, tol: f64) -> Check {
    let mut chk = Check::new("width_decay");
    for w in series.windows(2) {
        let ((t0, w0), (t1, w1)) = (w[0], w[1]);
        if t1 > t0 {
            let q = (w1 - w0) / (t1 - t0);
            let rhs = -4.0 * std::f64::consts::PI + 3.0 * w0 / (4.0 * (t0 + c));
            chk.observe(q - rhs - tol, t1, 0.0);
        }
    }
    chk
}

/// Width along each lineage: the decay inequality on smooth stretches and
/// no increase across surgeries.
pub fn check_width_inequality(timeline: &Timeline, c: f64, tol: f64) -> Result<MonitorReport> {
    let mut decay = Check::new("width_decay");
    let mut semi = Check::new("width_surgery");
    let mut bad = false;
    timeline.walk(&mut |t, _| {
        for s in &t.states {
            if s.warped().map_or(false, |p| p.topology != Topology::ClosedS3) {
                bad = true;
            }
        }
        let series: Vec<(f64, f64)> = t.states.iter().map(|s| (s.time, s.diagnostics.width_bound)).collect();
        decay.merge(&check_width_series(&series, c, tol));
        for ev in &t.surgeries {
            semi.observe(ev.post_width() - ev.pre.diagnostics.width_bound, ev.time, 0.0);
        }
    });
    if bad {
        return Err(Error::WrongTopology);
    }
    Ok(MonitorReport {
        checks: vec![decay, semi],
    })
}

// ------------------------------------------------------------ thick/thin

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Thickness {
    Thick,
    Thin,
}

/// Radii searched by [`thick_thin`]: 32 steps, log spaced from 1 down to 1e-3.
pub fn thin_radii() -> Vec<f64> {
    (0..32).map(|k| 10f64.powf(-3.0 * k as f64 / 31.0)).collect()
}

/// A point is thin when some ball `B(x, rho)`, `rho <= 1`, has all
/// sectional curvatures `>= -rho^-2` and volume `< eps rho^3`.
pub fn thick_thin(p: &WarpedProfile, eps: f64) -> Result<Vec<Thickness>> {
    let c = warped::curvature(p)?;
    let s = p.arclength();
    let n = p.n();
    let total = s[n];
    let radii = thin_radii();
    let labels = (0..=n)
        .into_par_iter()
        .map(|i| {
            for &rho in &radii {
                // Ball nodes: everything within rho in arclength.
                let inside = |j: usize| {
                    let d = (s[j] - s[i]).abs();
                    let d = if p.topology == Topology::PeriodicS2xS1 {
                        d.min(total - d)
                    } else {
                        d
                    };
                    d <= rho
                };
                let (mut kmin, mut kmax) = (f64::INFINITY, 0.0f64);
                for j in (0..=n).filter(|&j| inside(j)) {
                    kmin = kmin.min(c.k_orth[j].min(c.k_sph[j]));
                    kmax = kmax.max(c.k_orth[j].abs().max(c.k_sph[j].abs()));
                }
                if kmin < -1.0 / (rho * rho) {
                    continue;
                }
                // Tiny, nearly flat balls away from thin fibres are Euclidean.
                let psi_min = (0..=n)
                    .filter(|&j| inside(j) && p.psi[j] > 0.0)
                    .map(|j| p.psi[j])
                    .fold(f64::INFINITY, f64::min);
                let euclid = rho * kmax.sqrt() <= 0.05 && (p.psi[i] >= 20.0 * rho || p.psi[i] == 0.0) && psi_min >= 0.0;
                let vol = if euclid {
                    4.0 / 3.0 * std::f64::consts::PI * rho.powi(3) * 0.95
                } else {
                    ball_volumes(p, &s, s[i], &[rho], 32)[0]
                };
                if vol < eps * rho.powi(3) {
                    return Thickness::Thin;
                }
            }
            Thickness::Thick
        })
        .collect();
    Ok(labels)
}

// ------------------------------------------------------------- canonical

/// Canonical-neighbourhood check at scale `r`: every node with
/// `R >= r^-2` lies in a neck window of quality `<= eps`, in a cap, or the
/// whole component is nearly round. The violation is the number of
/// uncovered nodes.
pub fn check_cn(p: &WarpedProfile, params: &SurgeryParams) -> Result<(MonitorReport, Cover)> {
    Ok(check_cn_with(p, &warped::curvature(p)?, params))
}

/// [`check_cn`] with the curvature supplied by the caller.
pub fn check_cn_with(p: &WarpedProfile, curv: &CurvatureFields, params: &SurgeryParams) -> (MonitorReport, Cover) {
    let cover = topology::cover_profile(p, curv, params.eps, params.window_half(), 1.0 / (params.r * params.r));
    let mut c = Check::new("canonical_neighbourhoods");
    let x = cover.uncovered.first().map_or(0.0, |&i| grid_x(i, p.n()));
    c.observe(cover.uncovered.len() as f64, 0.0, x);
    (MonitorReport { checks: vec![c] }, cover)
}

/// Consecutive surgeries along each lineage at least `1 / (C theta)` apart,
/// up to a relative `1e-6`.
pub fn check_surgery_spacing(timeline: &Timeline, params: &SurgeryParams) -> Check {
    let min = crate::surgery::min_spacing(params);
    let mut c = Check::new("surgery_spacing");
    fn go(t: &Timeline, last: Option<f64>, min: f64, c: &mut Check) {
        let mut last = last;
        for ev in &t.surgeries {
            if let Some(l) = last {
                c.observe(min * (1.0 - 1e-6) - (ev.time - l), ev.time, 0.0);
            }
            last = Some(ev.time);
        }
        for ch in &t.children {
            go(ch, last, min, c);
        }
    }
    go(timeline, None, min, &mut c);
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warped::{make_profile, ProfileKind};

    #[test]
    fn round_unit_is_normalized() {
        let p = make_profile(ProfileKind::Round(1.0), 200).unwrap();
        assert!(is_normalized(&p).unwrap());
    }

    #[test]
    fn half_sphere_scales_by_four() {
        let p = make_profile(ProfileKind::Round(0.5), 200).unwrap();
        let (q, lambda) = normalize(&p).unwrap();
        assert_eq!(lambda, 4.0);
        let k = warped::curvature(&q).unwrap().max_abs_sec();
        assert!((k - 1.0).abs() < 1e-4, "{k}");
    }

    #[test]
    fn unit_ball_in_round_sphere() {
        // Exact: 4 pi int_0^1 sin^2 r dr = 2 pi (1 - sin 2 / 2).
        let p = make_profile(ProfileKind::Round(1.0), 400).unwrap();
        let s = p.arclength();
        let exact = 2.0 * std::f64::consts::PI * (1.0 - (2.0f64).sin() / 2.0);
        for &i in &[0usize, 100, 200] {
            let v = ball_volumes(&p, &s, s[i], &[1.0], 96)[0];
            assert!((v - exact).abs() < 0.03 * exact, "node {i}: {v} vs {exact}");
            // First order sweeping: the error roughly halves with the grid.
            let fine = ball_volumes(&p, &s, s[i], &[1.0], 192)[0];
            assert!(
                (fine - exact).abs() < 0.65 * (v - exact).abs() + 1e-3,
                "node {i}: {fine}"
            );
        }
    }

    #[test]
    fn pinching_examples() {
        let p = make_profile(ProfileKind::Round(1.0), 200).unwrap();
        let c = warped::curvature(&p).unwrap();
        assert!(check_pinching(&c, 0.0).pass());
        let flat = CurvatureFields {
            k_orth: vec![0.0; 3],
            k_sph: vec![0.0; 3],
            r: vec![0.0; 3],
            x: vec![0.0; 3],
        };
        let rep = check_pinching(&flat, 2.0);
        assert!(rep.pass());
        assert_eq!(rep.get("pinching_log").unwrap().worst_violation, f64::NEG_INFINITY);
        let bad = CurvatureFields {
            k_orth: vec![0.0],
            k_sph: vec![0.0],
            r: vec![-7.0],
            x: vec![0.0],
        };
        let rep = check_pinching(&bad, 0.0);
        let floor_chk = rep.get("pinching_floor").unwrap();
        assert!(!floor_chk.pass);
        assert!((floor_chk.worst_violation - 1.0).abs() < 1e-7);
    }

    #[test]
    fn lifetime_examples() {
        assert_eq!(lifetime_bound(6.0).unwrap(), 0.25);
        assert_eq!(rmin_lower_bound(0.0, 5.0).unwrap(), 0.0);
        assert!((rmin_lower_bound(3.0, 0.4).unwrap() - 15.0).abs() < 1e-12);
        assert!(matches!(rmin_lower_bound(3.0, 0.5), Err(Error::PastBlowup { .. })));
    }

    #[test]
    fn width_of_round_sphere() {
        let p = make_profile(ProfileKind::Round(2.0), 200).unwrap();
        let w = width_bound(&p).unwrap();
        assert!((w.value - 16.0 * std::f64::consts::PI).abs() < 1e-9);
        let c = make_profile(
            ProfileKind::Cylinder {
                radius: 1.0,
                length: 10.0,
            },
            100,
        )
        .unwrap();
        assert_eq!(width_bound(&c), Err(Error::WrongTopology));
    }

    #[test]
    fn round_is_thick() {
        let p = make_profile(ProfileKind::Round(1.0), 100).unwrap();
        assert!(thick_thin(&p, 1e-2).unwrap().iter().all(|&l| l == Thickness::Thick));
    }

    #[test]
    fn cn_on_model_objects() {
        let prm = crate::surgery::cutoff_params(1.0, 5e-3, &Default::default()).unwrap();
        let p = make_profile(ProfileKind::Round(1.0), 200).unwrap();
        let (rep, cover) = check_cn(&p, &prm).unwrap();
        assert!(rep.pass() && cover.spherical);
        let c = make_profile(
            ProfileKind::Cylinder {
                radius: 1.0,
                length: 40.0,
            },
            400,
        )
        .unwrap();
        let (rep, cover) = check_cn(&c, &prm).unwrap();
        assert!(rep.pass());
        assert!(!cover.windows.is_empty());
    }
}
