//! Rotationally symmetric metrics `g = phi(x)^2 dx^2 + psi(x)^2 g_S2` on `x in [0, 1]`.
//!
//! The grid in `x` is always uniform; `phi` carries the arclength density, so
//! re-gridding is a change of coordinates and leaves the metric untouched.
//! Spatial derivatives are fourth-order central differences in `x`, turned
//! into arclength derivatives by the chain rule.

use crate::error::{Error, Result};

/// Closed manifolds carried by a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// `psi = 0` at both ends, smooth poles.
    ClosedS3,
    /// Periodic in `x`; node `N` is identified with node 0.
    PeriodicS2xS1,
}

impl Topology {
    pub fn tag(self) -> &'static str {
        match self {
            Topology::ClosedS3 => "ClosedS3",
            Topology::PeriodicS2xS1 => "PeriodicS2xS1",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "ClosedS3" => Some(Topology::ClosedS3),
            "PeriodicS2xS1" => Some(Topology::PeriodicS2xS1),
            _ => None,
        }
    }
}

/// Below this, an interior sphere radius counts as collapsed.
pub const PSI_FLOOR: f64 = 1e-10;

const GHOSTS: usize = 3;

/// Discretized warped metric on `N + 1` uniform nodes `x_i = i / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedProfile {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub topology: Topology,
}

/// Sectional and scalar curvature at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureFields {
    /// Planes containing the radial direction.
    pub k_orth: Vec<f64>,
    /// Planes tangent to the spheres.
    pub k_sph: Vec<f64>,
    /// `4 k_orth + 2 k_sph`.
    pub r: Vec<f64>,
    /// `max(0, -min(k_orth, k_sph))`.
    pub x: Vec<f64>,
}

impl CurvatureFields {
    /// Largest sectional curvature in absolute value.
    pub fn max_abs_sec(&self) -> f64 {
        self.k_orth
            .iter()
            .chain(&self.k_sph)
            .fold(0.0_f64, |m, k| m.max(k.abs()))
    }

    pub fn r_min(&self) -> f64 {
        self.r.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn r_max(&self) -> f64 {
        self.r.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn x_max(&self) -> f64 {
        self.x.iter().copied().fold(0.0, f64::max)
    }

    fn from_parts(k_orth: Vec<f64>, k_sph: Vec<f64>) -> Self {
        let r = k_orth.iter().zip(&k_sph).map(|(a, b)| 4.0 * a + 2.0 * b).collect();
        let x = k_orth.iter().zip(&k_sph).map(|(a, b)| (-a.min(*b)).max(0.0)).collect();
        CurvatureFields { k_orth, k_sph, r, x }
    }
}

/// Initial-data families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    /// Round sphere of radius `rho`.
    Round(f64),
    /// Two round lobes joined by a slowly tapered bar.
    Dumbbell(DumbbellShape),
    /// Periodic cylinder of radius `radius` and period `length`.
    Cylinder { radius: f64, length: f64 },
}

/// Geometry of the dumbbell.
///
/// Around its midpoint the bar has `psi^2 = waist^2 + taper^2 u^2`, where `u` is
/// arclength from the midpoint, for `|u| <= core_half`. A quintic smoothstep
/// over `blend` arclength hands over to the lobe `lobe * sin(d / lobe)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumbbellShape {
    pub waist: f64,
    pub lobe: f64,
    pub core_half: f64,
    pub blend: f64,
    pub taper: f64,
}

impl DumbbellShape {
    pub fn new(waist: f64, lobe: f64) -> Self {
        DumbbellShape {
            waist,
            lobe,
            core_half: 4.0 * lobe,
            blend: lobe,
            taper: 1.2e-3,
        }
    }

    /// Total arclength pole to pole.
    pub fn length(&self) -> f64 {
        2.0 * (0.5 * std::f64::consts::PI * self.lobe + self.blend + self.core_half)
    }

    /// Sphere radius at arclength `s` from the left pole.
    pub fn psi_at(&self, s: f64) -> f64 {
        let half = 0.5 * self.length();
        let u = (s - half).abs();
        let d = half - u;
        let core = (self.waist * self.waist + self.taper * self.taper * u * u).sqrt();
        let lobe = self.lobe * (d / self.lobe).sin();
        if u <= self.core_half {
            core
        } else if u < self.core_half + self.blend {
            let q = smoothstep((self.core_half + self.blend - u) / self.blend);
            q * core + (1.0 - q) * lobe
        } else {
            lobe
        }
    }
}

/// Quintic smoothstep on `[0, 1]` with vanishing first and second derivatives at both ends.
pub fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

impl WarpedProfile {
    pub fn new(phi: Vec<f64>, psi: Vec<f64>, topology: Topology) -> Result<Self> {
        let p = WarpedProfile { phi, psi, topology };
        p.validate()?;
        Ok(p)
    }

    /// Number of grid intervals.
    pub fn n(&self) -> usize {
        self.psi.len() - 1
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.n() as f64
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.psi.len();
        if n < 8 || self.phi.len() != n {
            return Err(Error::BadParameters(format!(
                "profile needs matching phi/psi with at least 8 nodes, got {} and {}",
                self.phi.len(),
                n
            )));
        }
        if let Some(i) = self.phi.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::BadParameters(format!(
                "phi[{i}] = {} is not positive",
                self.phi[i]
            )));
        }
        if let Some(i) = self.psi.iter().position(|p| !p.is_finite()) {
            return Err(Error::BadParameters(format!("psi[{i}] is not finite")));
        }
        match self.topology {
            Topology::ClosedS3 => {
                if self.psi[0] != 0.0 || self.psi[n - 1] != 0.0 {
                    return Err(Error::BadParameters(
                        "closed profile needs psi = 0 at both poles".into(),
                    ));
                }
                for i in 1..n - 1 {
                    if self.psi[i] < PSI_FLOOR {
                        return Err(Error::DegenerateProfile {
                            index: i,
                            psi: self.psi[i],
                        });
                    }
                }
            }
            Topology::PeriodicS2xS1 => {
                if self.psi[0] != self.psi[n - 1] || self.phi[0] != self.phi[n - 1] {
                    return Err(Error::BadParameters(
                        "periodic profile needs node N equal to node 0".into(),
                    ));
                }
                for i in 0..n {
                    if self.psi[i] < PSI_FLOOR {
                        return Err(Error::DegenerateProfile {
                            index: i,
                            psi: self.psi[i],
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Slope `|dpsi/ds|` at each pole, which is 1 for a smooth closed profile.
    pub fn pole_slopes(&self) -> Option<(f64, f64)> {
        if self.topology != Topology::ClosedS3 {
            return None;
        }
        let n = self.n();
        let gpsi = self.ghosted(&self.psi, true);
        let gphi = self.ghosted(&self.phi, false);
        let h = self.dx();
        let left = d1(&gpsi, GHOSTS, h) / gphi[GHOSTS];
        let right = d1(&gpsi, GHOSTS + n, h) / gphi[GHOSTS + n];
        Some((left.abs(), right.abs()))
    }

    /// Cumulative arclength at each node (trapezoid rule on `phi`).
    pub fn arclength(&self) -> Vec<f64> {
        let h = self.dx();
        let mut s = Vec::with_capacity(self.phi.len());
        s.push(0.0);
        for i in 1..self.phi.len() {
            let prev = s[i - 1];
            s.push(prev + 0.5 * h * (self.phi[i - 1] + self.phi[i]));
        }
        s
    }

    pub fn length(&self) -> f64 {
        *self.arclength().last().expect("nonempty")
    }

    /// Metric multiplied by `lambda`: lengths scale by `sqrt(lambda)`.
    pub fn scaled(&self, lambda: f64) -> WarpedProfile {
        let k = lambda.sqrt();
        WarpedProfile {
            phi: self.phi.iter().map(|p| p * k).collect(),
            psi: self.psi.iter().map(|p| p * k).collect(),
            topology: self.topology,
        }
    }

    fn ghosted(&self, f: &[f64], odd: bool) -> Vec<f64> {
        let n = f.len() - 1;
        let mut g = vec![0.0; n + 1 + 2 * GHOSTS];
        g[GHOSTS..GHOSTS + n + 1].copy_from_slice(f);
        for k in 1..=GHOSTS {
            match self.topology {
                Topology::ClosedS3 => {
                    let sign = if odd { -1.0 } else { 1.0 };
                    g[GHOSTS - k] = sign * f[k];
                    g[GHOSTS + n + k] = sign * f[n - k];
                }
                Topology::PeriodicS2xS1 => {
                    g[GHOSTS - k] = f[n - k];
                    g[GHOSTS + n + k] = f[k];
                }
            }
        }
        g
    }
}

fn d1(g: &[f64], j: usize, h: f64) -> f64 {
    (g[j - 2] - 8.0 * g[j - 1] + 8.0 * g[j + 1] - g[j + 2]) / (12.0 * h)
}

fn d2(g: &[f64], j: usize, h: f64) -> f64 {
    (-g[j - 2] + 16.0 * g[j - 1] - 30.0 * g[j] + 16.0 * g[j + 1] - g[j + 2]) / (12.0 * h * h)
}

/// Arclength derivatives `(psi_s, psi_ss)` at every node.
pub fn arclength_derivatives(p: &WarpedProfile) -> (Vec<f64>, Vec<f64>) {
    let n = p.n();
    let h = p.dx();
    let gpsi = p.ghosted(&p.psi, true);
    let gphi = p.ghosted(&p.phi, false);
    let mut ps = vec![0.0; n + 1];
    let mut pss = vec![0.0; n + 1];
    for i in 0..=n {
        let j = i + GHOSTS;
        let phi = gphi[j];
        let psi_x = d1(&gpsi, j, h);
        let psi_xx = d2(&gpsi, j, h);
        let phi_x = d1(&gphi, j, h);
        ps[i] = psi_x / phi;
        pss[i] = (psi_xx - psi_x * phi_x / phi) / (phi * phi);
    }
    (ps, pss)
}

/// Sectional and scalar curvature of the profile.
///
/// Away from poles `k_orth = -psi_ss / psi` and `k_sph = (1 - psi_s^2) / psi^2`.
/// At a pole both equal the even extrapolation of `k_orth` from the two
/// nearest nodes. On the node next to a pole `k_sph` is the average of
/// `k_orth` over `d(psi^2)`, which avoids the cancellation in `1 - psi_s^2`.
pub fn curvature(p: &WarpedProfile) -> Result<CurvatureFields> {
    p.validate()?;
    let n = p.n();
    let (ps, pss) = arclength_derivatives(p);
    let mut ko = vec![0.0; n + 1];
    let mut ks = vec![0.0; n + 1];
    for i in 0..=n {
        let psi = p.psi[i];
        if psi > 0.0 {
            ko[i] = -pss[i] / psi;
            ks[i] = (1.0 - ps[i] * ps[i]) / (psi * psi);
        }
    }
    if p.topology == Topology::ClosedS3 {
        let s = p.arclength();
        let total = s[n];
        let k_left = pole_value(s[1], s[2], ko[1], ko[2]);
        let k_right = pole_value(total - s[n - 1], total - s[n - 2], ko[n - 1], ko[n - 2]);
        ko[0] = k_left;
        ks[0] = k_left;
        ko[n] = k_right;
        ks[n] = k_right;
        ks[1] = sphere_from_radial(0.0, p.psi[1], 0.0, ko[0], ko[1]);
        ks[n - 1] = sphere_from_radial(0.0, p.psi[n - 1], 0.0, ko[n], ko[n - 1]);
    }
    Ok(CurvatureFields::from_parts(ko, ks))
}

/// Even extrapolation to a pole from the nodes at distances `d1 < d2`.
fn pole_value(d1: f64, d2: f64, k1: f64, k2: f64) -> f64 {
    let (a, b) = (d1 * d1, d2 * d2);
    (b * k1 - a * k2) / (b - a)
}

/// `k_sph` one node further from a pole, from `d(psi^2 k_sph) = k_orth d(psi^2)`.
const POLE_BLEND_START: usize = 8;
const POLE_BLEND_END: usize = 16;

fn sphere_from_radial(psi_prev: f64, psi: f64, ks_prev: f64, ko_prev: f64, ko: f64) -> f64 {
    let (q0, q1) = (psi_prev * psi_prev, psi * psi);
    (q0 * ks_prev + 0.5 * (ko_prev + ko) * (q1 - q0)) / q1
}

/// Curvature used by the time stepper: compact three-point stencils on the
/// possibly non-uniform arclength grid. Wider stencils let the slope mode
/// near a pole grow; this form keeps it damped.
pub fn flow_curvature(p: &WarpedProfile) -> CurvatureFields {
    let n = p.n();
    let h = p.dx();
    let periodic = p.topology == Topology::PeriodicS2xS1;
    let ds: Vec<f64> = p.phi.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).collect();
    let slope: Vec<f64> = (0..n).map(|i| (p.psi[i + 1] - p.psi[i]) / ds[i]).collect();
    let cell = |i: isize| -> usize {
        if i < 0 {
            if periodic {
                n - 1
            } else {
                0
            }
        } else if i as usize >= n {
            if periodic {
                0
            } else {
                n - 1
            }
        } else {
            i as usize
        }
    };
    let mut ko = vec![0.0; n + 1];
    let mut ks = vec![0.0; n + 1];
    for i in 0..=n {
        let (l, r) = (cell(i as isize - 1), cell(i as isize));
        let (da, db) = (ds[l], ds[r]);
        // The slope is even across a pole, so the mirrored cell repeats it.
        let (a, b) = (slope[l], slope[r]);
        let pss = (b - a) / (0.5 * (da + db));
        let ps = (a * db + b * da) / (da + db);
        let psi = p.psi[i];
        if psi > 0.0 {
            ko[i] = -pss / psi;
            ks[i] = (1.0 - ps * ps) / (psi * psi);
        }
    }
    if !periodic {
        let s = p.arclength();
        let total = s[n];
        ko[0] = pole_value(s[1], s[2], ko[1], ko[2]);
        ko[n] = pole_value(total - s[n - 1], total - s[n - 2], ko[n - 1], ko[n - 2]);
        ks[0] = ko[0];
        ks[n] = ko[n];
        // `1 - psi_s^2` cancels badly near a pole; integrate
        // `d(psi^2 k_sph) = k_orth d(psi^2)` over a few nodes and blend into
        // the direct value. A longer integration carries errors from the cap
        // into the rest of the profile.
        let weight = |k: usize| ((POLE_BLEND_END - k) as f64 / (POLE_BLEND_END - POLE_BLEND_START) as f64).min(1.0);
        let mut prev = ks[0];
        let mut i = 1;
        while i < POLE_BLEND_END && i < n / 2 && (i == 1 || p.psi[i] > p.psi[i - 1]) {
            prev = sphere_from_radial(p.psi[i - 1], p.psi[i], prev, ko[i - 1], ko[i]);
            let w = weight(i);
            ks[i] = w * prev + (1.0 - w) * ks[i];
            i += 1;
        }
        let mut prev = ks[n];
        let mut k = 1;
        while k < POLE_BLEND_END && k < n / 2 && (k == 1 || p.psi[n - k] > p.psi[n - k + 1]) {
            let j = n - k;
            prev = sphere_from_radial(p.psi[j + 1], p.psi[j], prev, ko[j + 1], ko[j]);
            let w = weight(k);
            ks[j] = w * prev + (1.0 - w) * ks[j];
            k += 1;
        }
    }
    CurvatureFields::from_parts(ko, ks)
}

/// Step bound: the curvature trust interval `2^-4 / max|Rm|` and the explicit
/// stability bound `c_cfl * (min ds)^2`, whichever is smaller.
pub fn max_step(p: &WarpedProfile, curv: &CurvatureFields, c_cfl: f64) -> f64 {
    let rm = curv.max_abs_sec();
    let trust = if rm > 0.0 { 0.0625 / rm } else { f64::INFINITY };
    let h = p.dx();
    let ds_min = p
        .phi
        .windows(2)
        .map(|w| 0.5 * h * (w[0] + w[1]))
        .fold(f64::INFINITY, f64::min);
    trust.min(c_cfl * ds_min * ds_min)
}

/// Time derivatives `(psi_t, phi_t)` under the flow.
pub fn flow_rate(p: &WarpedProfile, curv: &CurvatureFields) -> (Vec<f64>, Vec<f64>) {
    let n = p.n();
    let mut dpsi = vec![0.0; n + 1];
    let mut dphi = vec![0.0; n + 1];
    for i in 0..=n {
        dpsi[i] = -p.psi[i] * (curv.k_orth[i] + curv.k_sph[i]);
        dphi[i] = -2.0 * p.phi[i] * curv.k_orth[i];
    }
    if p.topology == Topology::ClosedS3 {
        dpsi[0] = 0.0;
        dpsi[n] = 0.0;
    }
    (dpsi, dphi)
}

fn euler(p: &WarpedProfile, rate: &(Vec<f64>, Vec<f64>), dt: f64) -> Result<WarpedProfile> {
    let mut q = p.clone();
    for i in 0..q.psi.len() {
        q.psi[i] += dt * rate.0[i];
        q.phi[i] += dt * rate.1[i];
    }
    q.fix_ends();
    check_collapse(&q)?;
    Ok(q)
}

fn check_collapse(q: &WarpedProfile) -> Result<()> {
    let n = q.n();
    let range = match q.topology {
        Topology::ClosedS3 => 1..n,
        Topology::PeriodicS2xS1 => 0..n,
    };
    for i in range {
        if !(q.psi[i] >= PSI_FLOOR) || !(q.phi[i] > 0.0) {
            return Err(Error::DegenerateProfile {
                index: i,
                psi: q.psi[i],
            });
        }
    }
    Ok(())
}

impl WarpedProfile {
    fn fix_ends(&mut self) {
        let n = self.n();
        match self.topology {
            Topology::ClosedS3 => {
                self.psi[0] = 0.0;
                self.psi[n] = 0.0;
            }
            Topology::PeriodicS2xS1 => {
                self.psi[n] = self.psi[0];
                self.phi[n] = self.phi[0];
            }
        }
    }
}

/// One Heun (RK2) step of the flow.
pub fn step(p: &WarpedProfile, dt: f64, c_cfl: f64) -> Result<WarpedProfile> {
    let c0 = curvature(p)?;
    step_with(p, &c0, dt, c_cfl)
}

/// [`step`] reusing already computed curvature of `p`.
pub fn step_with(p: &WarpedProfile, c0: &CurvatureFields, dt: f64, c_cfl: f64) -> Result<WarpedProfile> {
    let max = max_step(p, c0, c_cfl);
    if !(dt > 0.0) || dt > max * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, max });
    }
    let r0 = flow_rate(p, &flow_curvature(p));
    let p1 = euler(p, &r0, dt)?;
    let r1 = flow_rate(&p1, &flow_curvature(&p1));
    let avg = (
        r0.0.iter().zip(&r1.0).map(|(a, b)| 0.5 * (a + b)).collect(),
        r0.1.iter().zip(&r1.1).map(|(a, b)| 0.5 * (a + b)).collect(),
    );
    euler(p, &avg, dt)
}

/// Re-grid until the grid meets `policy`, returning the profile and the
/// curvature that drives the next step.
pub fn prepare(p: &WarpedProfile, policy: &GridPolicy) -> Result<(WarpedProfile, CurvatureFields)> {
    let mut p = p.clone();
    for _ in 0..4 {
        let c = flow_curvature(&p);
        if !needs_regrid(&p, &c, policy) {
            return Ok((p, c));
        }
        p = regrid(&p, &c, policy)?;
    }
    let c = flow_curvature(&p);
    Ok((p, c))
}

/// Take the steps `dts` in order, re-gridding before each one as a run
/// does. Replaying a run's steps from one of its states reproduces the next
/// state exactly.
pub fn advance(p: &WarpedProfile, dts: &[f64], policy: &GridPolicy, c_cfl: f64) -> Result<WarpedProfile> {
    let mut p = prepare(p, policy)?.0;
    for &dt in dts {
        let (q, c) = prepare(&p, policy)?;
        p = step_with(&q, &c, dt, c_cfl)?;
    }
    Ok(prepare(&p, policy)?.0)
}

/// Volume `int 4 pi psi^2 phi dx` by the trapezoid rule.
pub fn volume(p: &WarpedProfile) -> f64 {
    let h = p.dx();
    let f: Vec<f64> = p
        .psi
        .iter()
        .zip(&p.phi)
        .map(|(s, f)| 4.0 * std::f64::consts::PI * s * s * f)
        .collect();
    f.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum()
}

/// `(R_min, R_max)` over grid nodes.
pub fn r_extrema(p: &WarpedProfile) -> Result<(f64, f64)> {
    let c = curvature(p)?;
    Ok((c.r_min(), c.r_max()))
}

/// Build initial data on `n` intervals.
pub fn make_profile(kind: ProfileKind, n: usize) -> Result<WarpedProfile> {
    if n < 64 {
        return Err(Error::BadParameters(format!("need N >= 64, got {n}")));
    }
    let xs = (0..=n).map(|i| i as f64 / n as f64);
    match kind {
        ProfileKind::Round(rho) => {
            if !(rho > 0.0) {
                return Err(Error::BadParameters(format!(
                    "round radius must be positive, got {rho}"
                )));
            }
            let mut psi: Vec<f64> = xs.map(|x| rho * (std::f64::consts::PI * x).sin()).collect();
            psi[0] = 0.0;
            psi[n] = 0.0;
            WarpedProfile::new(vec![std::f64::consts::PI * rho; n + 1], psi, Topology::ClosedS3)
        }
        ProfileKind::Cylinder { radius, length } => {
            if !(radius > 0.0 && length > 0.0) {
                return Err(Error::BadParameters(
                    "cylinder radius and length must be positive".into(),
                ));
            }
            WarpedProfile::new(vec![length; n + 1], vec![radius; n + 1], Topology::PeriodicS2xS1)
        }
        ProfileKind::Dumbbell(shape) => {
            let DumbbellShape {
                waist,
                lobe,
                core_half,
                blend,
                taper,
            } = shape;
            if !(waist > 0.0 && lobe > waist && core_half >= 0.0 && taper >= 0.0) {
                return Err(Error::BadParameters(format!(
                    "dumbbell needs 0 < waist < lobe, got {waist}, {lobe}"
                )));
            }
            if !(blend > 0.0 && blend < 0.5 * std::f64::consts::PI * lobe) {
                return Err(Error::BadParameters(
                    "dumbbell blend must lie in (0, pi lobe / 2)".into(),
                ));
            }
            let edge = (waist * waist + taper * taper * core_half * core_half).sqrt();
            if edge >= lobe * (blend / lobe).cos() {
                return Err(Error::BadParameters(
                    "dumbbell bar is wider than the lobe at the blend".into(),
                ));
            }
            let len = shape.length();
            let mut psi: Vec<f64> = xs.map(|x| shape.psi_at(x * len)).collect();
            psi[0] = 0.0;
            psi[n] = 0.0;
            WarpedProfile::new(vec![len; n + 1], psi, Topology::ClosedS3)
        }
    }
}

/// Controls for curvature-adapted re-gridding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPolicy {
    /// Target nodes per local curvature radius.
    pub points_per_radius: f64,
    /// Upper bound on any spacing, in arclength.
    pub max_spacing: f64,
    /// Never re-grid to fewer intervals than this.
    pub n_min: usize,
    /// Re-grid once some cell exceeds this multiple of its target spacing.
    pub trigger: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy {
            points_per_radius: 8.0,
            max_spacing: 0.5,
            n_min: 200,
            trigger: 1.5,
        }
    }
}

/// Desired spacing at each node, Lipschitz-limited so neighbouring cells
/// differ by a bounded ratio.
pub fn target_spacing(p: &WarpedProfile, curv: &CurvatureFields, policy: &GridPolicy) -> Vec<f64> {
    let s = p.arclength();
    let n = p.n();
    let mut h: Vec<f64> = (0..=n)
        .map(|i| {
            let k = curv.k_orth[i].abs().max(curv.k_sph[i].abs());
            let radius = if k > 0.0 { 1.0 / k.sqrt() } else { f64::INFINITY };
            radius.min(policy.max_spacing * policy.points_per_radius) / policy.points_per_radius
        })
        .collect();
    let slope = 0.15;
    let sweeps = if p.topology == Topology::PeriodicS2xS1 { 2 } else { 1 };
    for _ in 0..sweeps {
        for i in 1..=n {
            h[i] = h[i].min(h[i - 1] + slope * (s[i] - s[i - 1]));
        }
        if p.topology == Topology::PeriodicS2xS1 {
            h[0] = h[0].min(h[n]);
        }
        for i in (0..n).rev() {
            h[i] = h[i].min(h[i + 1] + slope * (s[i + 1] - s[i]));
        }
        if p.topology == Topology::PeriodicS2xS1 {
            h[n] = h[n].min(h[0]);
        }
    }
    h
}

/// Largest ratio of actual cell length to target spacing.
pub fn resolution_ratio(p: &WarpedProfile, target: &[f64]) -> f64 {
    let h = p.dx();
    (0..p.n())
        .map(|i| 0.5 * h * (p.phi[i] + p.phi[i + 1]) / target[i].min(target[i + 1]))
        .fold(0.0, f64::max)
}

/// Re-grid when some cell is coarser than `policy.trigger` times its target.
pub fn needs_regrid(p: &WarpedProfile, curv: &CurvatureFields, policy: &GridPolicy) -> bool {
    resolution_ratio(p, &target_spacing(p, curv, policy)) > policy.trigger
}

/// Move the nodes so they equidistribute the target density. The metric is
/// unchanged up to interpolation error: `psi` is resampled as a function of
/// arclength and `phi` becomes the new arclength density.
pub fn regrid(p: &WarpedProfile, curv: &CurvatureFields, policy: &GridPolicy) -> Result<WarpedProfile> {
    let n = p.n();
    let s = p.arclength();
    let total = s[n];
    let target = target_spacing(p, curv, policy);
    let mut rho: Vec<f64> = target.iter().map(|h| 1.0 / h).collect();
    for _ in 0..3 {
        let prev = rho.clone();
        for i in 0..=n {
            let (a, b) = match (i, p.topology) {
                (0, Topology::ClosedS3) => (prev[1], prev[1]),
                (0, Topology::PeriodicS2xS1) => (prev[n - 1], prev[1]),
                (i, Topology::ClosedS3) if i == n => (prev[n - 1], prev[n - 1]),
                (i, Topology::PeriodicS2xS1) if i == n => (prev[n - 1], prev[1]),
                (i, _) => (prev[i - 1], prev[i + 1]),
            };
            rho[i] = 0.25 * (a + 2.0 * prev[i] + b).max(0.0);
            rho[i] = rho[i].max(prev[i] * 0.5);
        }
    }
    let mut cum = vec![0.0; n + 1];
    for i in 1..=n {
        cum[i] = cum[i - 1] + 0.5 * (rho[i - 1] + rho[i]) * (s[i] - s[i - 1]);
    }
    let c_total = cum[n];
    let m = (c_total.ceil() as usize).max(policy.n_min).max(64);
    let mut new_s = Vec::with_capacity(m + 1);
    let mut new_phi = Vec::with_capacity(m + 1);
    let mut cell = 0;
    for k in 0..=m {
        let c = c_total * k as f64 / m as f64;
        while cell + 1 < n && cum[cell + 1] < c {
            cell += 1;
        }
        let (ra, rb) = (rho[cell], rho[cell + 1]);
        let width = s[cell + 1] - s[cell];
        let dc = c - cum[cell];
        let slope = (rb - ra) / width;
        let tau = if slope.abs() * dc < 1e-12 * ra * ra {
            dc / ra
        } else {
            (-ra + (ra * ra + 2.0 * slope * dc).max(0.0).sqrt()) / slope
        };
        let tau = tau.clamp(0.0, width);
        let sk = if k == m {
            total
        } else if k == 0 {
            0.0
        } else {
            s[cell] + tau
        };
        new_s.push(sk);
        new_phi.push(c_total / (ra + slope * (sk - s[cell]).clamp(0.0, width)));
    }
    let mut new_psi: Vec<f64> = new_s.iter().map(|&sk| interpolate_psi(p, &s, sk)).collect();
    match p.topology {
        Topology::ClosedS3 => {
            new_psi[0] = 0.0;
            new_psi[m] = 0.0;
        }
        Topology::PeriodicS2xS1 => {
            new_psi[m] = new_psi[0];
            new_phi[m] = new_phi[0];
        }
    }
    WarpedProfile::new(new_phi, new_psi, p.topology)
}

/// Cubic Lagrange interpolation of `psi` in arclength, with the same
/// reflections as the difference stencils beyond the ends.
fn interpolate_psi(p: &WarpedProfile, s: &[f64], sk: f64) -> f64 {
    let n = p.n();
    let total = s[n];
    let node = |j: isize| -> (f64, f64) {
        match p.topology {
            Topology::ClosedS3 => {
                if j < 0 {
                    (-s[(-j) as usize], -p.psi[(-j) as usize])
                } else if j as usize > n {
                    let r = 2 * n - j as usize;
                    (2.0 * total - s[r], -p.psi[r])
                } else {
                    (s[j as usize], p.psi[j as usize])
                }
            }
            Topology::PeriodicS2xS1 => {
                if j < 0 {
                    let r = (j + n as isize) as usize;
                    (s[r] - total, p.psi[r])
                } else if j as usize > n {
                    let r = j as usize - n;
                    (s[r] + total, p.psi[r])
                } else {
                    (s[j as usize], p.psi[j as usize])
                }
            }
        }
    };
    let i = match s.binary_search_by(|v| v.partial_cmp(&sk).expect("finite arclength")) {
        Ok(i) => return p.psi[i],
        Err(i) => i as isize - 1,
    };
    let pts: Vec<(f64, f64)> = (i - 1..=i + 2).map(node).collect();
    let mut out = 0.0;
    for (a, &(xa, ya)) in pts.iter().enumerate() {
        let mut w = 1.0;
        for (b, &(xb, _)) in pts.iter().enumerate() {
            if a != b {
                w *= (sk - xb) / (xa - xb);
            }
        }
        out += w * ya;
    }
    out
}
