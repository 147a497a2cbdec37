//! Closed-form flows of locally homogeneous metrics: constant curvature
//! quotients and the product of a circle with a hyperbolic surface.

use crate::error::{Error, Result};
use crate::timeline::{MetricSnapshot, Payload, Phase, Timeline};

/// Model geometry of a homogeneous state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Reference metric of constant sectional curvature `k0`.
    ConstantCurvature { k0: f64 },
    /// `a g_H + b dtheta^2` with `g_H` of curvature -1 and a flat circle.
    CircleTimesHypSurface { a: f64, b: f64 },
}

/// A homogeneous metric: `scale` times the family's metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousState {
    pub family: Family,
    pub scale: f64,
    /// Volume of the reference metric (`scale = 1`, and `a = b = 1` for the product).
    pub ref_volume: f64,
}

impl HomogeneousState {
    pub fn new(family: Family, scale: f64, ref_volume: f64) -> Result<Self> {
        let st = HomogeneousState {
            family,
            scale,
            ref_volume,
        };
        st.validate()?;
        Ok(st)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::BadParameters(format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        if !(self.ref_volume > 0.0) {
            return Err(Error::BadParameters("reference volume must be positive".into()));
        }
        match self.family {
            Family::ConstantCurvature { k0 } if !k0.is_finite() => {
                Err(Error::BadParameters("K0 must be finite".into()))
            }
            Family::CircleTimesHypSurface { a, b } if !(a > 0.0 && b > 0.0) => {
                Err(Error::BadParameters(format!("need a, b > 0, got a = {a}, b = {b}")))
            }
            _ => Ok(()),
        }
    }

    /// Eigenvalues of the curvature operator, ascending.
    pub fn curvature_eigenvalues(&self) -> [f64; 3] {
        match self.family {
            Family::ConstantCurvature { k0 } => [k0 / self.scale; 3],
            Family::CircleTimesHypSurface { a, .. } => [-1.0 / (a * self.scale), 0.0, 0.0],
        }
    }

    /// Sectional curvature of the constant curvature family.
    pub fn sectional(&self) -> Option<f64> {
        match self.family {
            Family::ConstantCurvature { k0 } => Some(k0 / self.scale),
            _ => None,
        }
    }

    pub fn scalar_curvature(&self) -> f64 {
        2.0 * self.curvature_eigenvalues().iter().sum::<f64>()
    }

    pub fn volume(&self) -> f64 {
        let shape = match self.family {
            Family::ConstantCurvature { .. } => 1.0,
            Family::CircleTimesHypSurface { a, b } => a * b.sqrt(),
        };
        self.ref_volume * shape * self.scale.powf(1.5)
    }

    /// Round-sweepout width of a positively curved space form, 0 otherwise.
    pub fn width_bound(&self) -> f64 {
        match self.sectional() {
            Some(k) if k > 0.0 => 4.0 * std::f64::consts::PI / k,
            _ => 0.0,
        }
    }

    /// `scale` multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> HomogeneousState {
        HomogeneousState {
            scale: self.scale * lambda,
            ..*self
        }
    }
}

/// Result of [`flow_constant_curvature`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantFlow {
    pub scale: f64,
    /// `1 / (4 K0)` when `K0 > 0`.
    pub extinction: Option<f64>,
}

/// `g(t) = (1 - 4 K0 t) g0`.
pub fn flow_constant_curvature(k0: f64, t: f64) -> Result<ConstantFlow> {
    if !(t >= 0.0) {
        return Err(Error::BadParameters(format!("time must be nonnegative, got {t}")));
    }
    let extinction = (k0 > 0.0).then(|| 1.0 / (4.0 * k0));
    if let Some(te) = extinction {
        if t >= te {
            return Err(Error::PastExtinction { t, extinction: te });
        }
    }
    Ok(ConstantFlow {
        scale: 1.0 - 4.0 * k0 * t,
        extinction,
    })
}

/// Circle times hyperbolic surface: the surface factor grows as `a0 + 2t`,
/// the circle stays put.
pub fn flow_product(a0: f64, b0: f64, t: f64) -> Result<(f64, f64)> {
    if !(a0 > 0.0 && b0 > 0.0 && t >= 0.0) {
        return Err(Error::BadParameters(format!(
            "need a0, b0 > 0 and t >= 0, got {a0}, {b0}, {t}"
        )));
    }
    Ok((a0 + 2.0 * t, b0))
}

/// State of `family` (with unit scale at `t = 0`) after flowing for `t`.
pub fn state_at(family: Family, ref_volume: f64, t: f64) -> Result<HomogeneousState> {
    match family {
        Family::ConstantCurvature { k0 } => {
            HomogeneousState::new(family, flow_constant_curvature(k0, t)?.scale, ref_volume)
        }
        Family::CircleTimesHypSurface { a, b } => {
            let (a, b) = flow_product(a, b, t)?;
            HomogeneousState::new(Family::CircleTimesHypSurface { a, b }, 1.0, ref_volume)
        }
    }
}

/// `(4t)^-1 g`. Curvatures scale by `4t`, volume by `(4t)^-3/2`, and
/// `rhat` is unchanged.
pub fn hyperbolic_rescale(snap: &MetricSnapshot, t: f64) -> Result<MetricSnapshot> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    let lambda = 1.0 / (4.0 * t);
    let payload = match &snap.payload {
        Payload::Homogeneous(st) => Payload::Homogeneous(st.scaled(lambda)),
        Payload::Warped(p) => Payload::Warped(p.scaled(lambda)),
    };
    let d = snap.diagnostics;
    let mut out = snap.clone();
    out.payload = payload;
    out.diagnostics.r_min = d.r_min / lambda;
    out.diagnostics.r_max = d.r_max / lambda;
    out.diagnostics.x_max = d.x_max / lambda;
    out.diagnostics.volume = d.volume * lambda.powf(1.5);
    out.diagnostics.width_bound = d.width_bound * lambda;
    Ok(out)
}

/// Long-time fate of a homogeneous flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LongTime {
    ShrinksToPoint { extinction: f64 },
    ConvergesHyperbolic,
    CollapsesBoundedCurvature,
}

/// Decide the fate by looking at the rescaled metric at `horizon`.
pub fn classify_longtime(family: Family, horizon: f64, tol: f64) -> Result<LongTime> {
    if !(horizon > 0.0 && tol > 0.0) {
        return Err(Error::BadParameters("horizon and tol must be positive".into()));
    }
    match family {
        Family::ConstantCurvature { k0 } if k0 > 0.0 => Ok(LongTime::ShrinksToPoint {
            extinction: 1.0 / (4.0 * k0),
        }),
        Family::ConstantCurvature { k0 } if k0 < 0.0 => {
            let scale = flow_constant_curvature(k0, horizon)?.scale;
            let rescaled = k0 / scale * 4.0 * horizon;
            if (rescaled + 1.0).abs() <= tol {
                Ok(LongTime::ConvergesHyperbolic)
            } else {
                Err(Error::Undecided(horizon))
            }
        }
        Family::ConstantCurvature { .. } => {
            // Flat: the rescaled metric shrinks with zero curvature.
            if 1.0 / (4.0 * horizon) < tol {
                Ok(LongTime::CollapsesBoundedCurvature)
            } else {
                Err(Error::Undecided(horizon))
            }
        }
        Family::CircleTimesHypSurface { a, b } => {
            let (a, b) = flow_product(a, b, horizon)?;
            let circle = b / (4.0 * horizon);
            let curv = -4.0 * horizon / a;
            if circle < tol && (-3.0..=0.0).contains(&curv) {
                Ok(LongTime::CollapsesBoundedCurvature)
            } else {
                Err(Error::Undecided(horizon))
            }
        }
    }
}

/// Residual of the flow between two states of the same family: the
/// difference quotient of the metric coefficients against `-2 Ric`.
pub fn flow_residual(a: &HomogeneousState, b: &HomogeneousState, dt: f64) -> f64 {
    match (a.family, b.family) {
        (Family::ConstantCurvature { k0 }, Family::ConstantCurvature { k0: k1 }) if k0 == k1 => {
            ((b.scale - a.scale) / dt + 4.0 * k0).abs()
        }
        (Family::CircleTimesHypSurface { a: a0, b: b0 }, Family::CircleTimesHypSurface { a: a1, b: b1 }) => {
            let ga = |s: &HomogeneousState, x: f64| s.scale * x;
            let da = (ga(b, a1) - ga(a, a0)) / dt - 2.0;
            let db = (ga(b, b1) - ga(a, b0)) / dt;
            da.abs().max(db.abs())
        }
        _ => f64::INFINITY,
    }
}

/// Sample the closed-form flow at `steps + 1` equally spaced times on
/// `[0, horizon]`, stopping short of extinction.
pub fn run_homogeneous(family: Family, ref_volume: f64, horizon: f64, steps: usize) -> Result<Timeline> {
    if steps == 0 || !(horizon > 0.0) {
        return Err(Error::BadParameters("need steps >= 1 and horizon > 0".into()));
    }
    let end = match family {
        Family::ConstantCurvature { k0 } if k0 > 0.0 => horizon.min(1.0 / (4.0 * k0)),
        _ => horizon,
    };
    let mut tl = Timeline::default();
    for k in 0..=steps {
        let t = end * k as f64 / steps as f64;
        let st = match state_at(family, ref_volume, t) {
            Ok(st) => st,
            Err(Error::PastExtinction { .. }) => break,
            Err(e) => return Err(e),
        };
        tl.append_state(MetricSnapshot::new(t, Payload::Homogeneous(st), Phase::Regular)?)?;
    }
    Ok(tl)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_sphere_halves_at_one_eighth() {
        let f = flow_constant_curvature(1.0, 0.125).unwrap();
        assert_eq!(f.scale, 0.5);
        assert_eq!(f.extinction, Some(0.25));
    }

    #[test]
    fn flat_is_fixed() {
        assert_eq!(flow_constant_curvature(0.0, 123.0).unwrap().scale, 1.0);
    }

    #[test]
    fn hyperbolic_expands() {
        let f = flow_constant_curvature(-1.0, 10.0).unwrap();
        assert_eq!(f.scale, 41.0);
        assert!((f.scale / 40.0 - 1.025).abs() < 1e-15);
    }

    #[test]
    fn past_extinction_is_an_error() {
        assert!(matches!(
            flow_constant_curvature(1.0, 0.25),
            Err(Error::PastExtinction { .. })
        ));
    }

    #[test]
    fn product_starts_at_initial_data() {
        assert_eq!(flow_product(1.0, 1.0, 0.0).unwrap(), (1.0, 1.0));
        assert_eq!(flow_product(1.0, 1.0, 5.0).unwrap(), (11.0, 1.0));
    }

    #[test]
    fn rescale_needs_positive_time() {
        let st = state_at(Family::ConstantCurvature { k0: -1.0 }, 1.0, 0.0).unwrap();
        let snap = MetricSnapshot::new(0.0, Payload::Homogeneous(st), Phase::Regular).unwrap();
        assert!(matches!(hyperbolic_rescale(&snap, 0.0), Err(Error::NonpositiveTime(_))));
    }

    #[test]
    fn rescale_to_unit_scale() {
        let t = 2.5;
        let st = HomogeneousState::new(Family::ConstantCurvature { k0: -1.0 }, 4.0 * t, 1.0).unwrap();
        let snap = MetricSnapshot::new(t, Payload::Homogeneous(st), Phase::Regular).unwrap();
        let out = hyperbolic_rescale(&snap, t).unwrap();
        match out.payload {
            Payload::Homogeneous(s) => assert!((s.scale - 1.0).abs() < 1e-15),
            _ => unreachable!(),
        }
        assert!((out.diagnostics.rhat - snap.diagnostics.rhat).abs() <= 1e-12 * snap.diagnostics.rhat.abs());
        out.check_diagnostics(1e-9).unwrap();
    }

    #[test]
    fn longtime_cases() {
        assert_eq!(
            classify_longtime(Family::ConstantCurvature { k0: 1.0 }, 1.0, 1e-3).unwrap(),
            LongTime::ShrinksToPoint { extinction: 0.25 }
        );
        assert_eq!(
            classify_longtime(Family::ConstantCurvature { k0: -1.0 }, 1e4, 1e-3).unwrap(),
            LongTime::ConvergesHyperbolic
        );
        assert_eq!(
            classify_longtime(Family::CircleTimesHypSurface { a: 1.0, b: 1.0 }, 1e6, 1e-3).unwrap(),
            LongTime::CollapsesBoundedCurvature
        );
        assert!(matches!(
            classify_longtime(Family::ConstantCurvature { k0: -1.0 }, 1.0, 1e-3),
            Err(Error::Undecided(_))
        ));
    }

    #[test]
    fn run_stops_before_extinction() {
        let tl = run_homogeneous(Family::ConstantCurvature { k0: 1.0 }, 1.0, 1.0, 10).unwrap();
        assert!(tl.states.last().unwrap().time < 0.25);
        assert_eq!(tl.states.len(), 10);
    }
}
