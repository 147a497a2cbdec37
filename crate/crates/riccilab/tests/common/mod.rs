//! Helpers shared by the integration tests: independent oracles and a
//! per-process cache of the default scenario runs.
#![allow(dead_code)]

use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use riccilab::cli::{self, Artifacts};
use riccilab::config::{RunConfig, Scenario};
use riccilab::topology::{Decomposition, Piece, PieceKind, Port};

pub type Metric = dyn Fn([f64; 3]) -> [[f64; 3]; 3];

fn inverse(g: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, d) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (g[a][c] * g[b][d] - g[a][d] * g[b][c]) / det;
        }
    }
    inv
}

/// Fourth-order central difference of `f` along coordinate `k`.
fn diff<const M: usize>(f: &dyn Fn([f64; 3]) -> [f64; M], q: [f64; 3], k: usize, h: f64) -> [f64; M] {
    let at = |o: f64| {
        let mut p = q;
        p[k] += o * h;
        f(p)
    };
    let (m2, m1, p1, p2) = (at(-2.0), at(-1.0), at(1.0), at(2.0));
    let mut out = [0.0; M];
    for i in 0..M {
        out[i] = (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h);
    }
    out
}

fn flat(g: [[f64; 3]; 3]) -> [f64; 9] {
    let mut o = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            o[3 * i + j] = g[i][j];
        }
    }
    o
}

/// Christoffel symbols `gamma[r][m][n]` from differences of the metric.
fn christoffel(g: &Metric, q: [f64; 3], h: f64) -> [f64; 27] {
    let gf = |p: [f64; 3]| flat(g(p));
    let dg: Vec<[f64; 9]> = (0..3).map(|k| diff(&gf, q, k, h)).collect();
    let inv = inverse(&g(q));
    let d = |k: usize, i: usize, j: usize| dg[k][3 * i + j];
    let mut out = [0.0; 27];
    for r in 0..3 {
        for m in 0..3 {
            for n in 0..3 {
                let mut s = 0.0;
                for l in 0..3 {
                    s += inv[r][l] * (d(m, l, n) + d(n, l, m) - d(l, m, n));
                }
                out[9 * r + 3 * m + n] = 0.5 * s;
            }
        }
    }
    out
}

/// Riemann tensor `R^r_{s m n}` assembled from the coordinate metric.
pub struct Riemann {
    pub g: [[f64; 3]; 3],
    pub r: [[[[f64; 3]; 3]; 3]; 3],
}

impl Riemann {
    pub fn at(g: &Metric, q: [f64; 3]) -> Self {
        Riemann::with_step(g, q, 1e-3)
    }

    /// `h` is the outer difference step; keep `2h` away from coordinate
    /// singularities.
    pub fn with_step(g: &Metric, q: [f64; 3], h: f64) -> Self {
        let gam = |p: [f64; 3]| christoffel(g, p, 0.1 * h);
        let dgam: Vec<[f64; 27]> = (0..3).map(|k| diff(&gam, q, k, h)).collect();
        let c = gam(q);
        let cg = |r: usize, m: usize, n: usize| c[9 * r + 3 * m + n];
        let dc = |k: usize, r: usize, m: usize, n: usize| dgam[k][9 * r + 3 * m + n];
        let mut r = [[[[0.0; 3]; 3]; 3]; 3];
        for a in 0..3 {
            for s in 0..3 {
                for m in 0..3 {
                    for n in 0..3 {
                        let mut v = dc(m, a, n, s) - dc(n, a, m, s);
                        for l in 0..3 {
                            v += cg(a, m, l) * cg(l, n, s) - cg(a, n, l) * cg(l, m, s);
                        }
                        r[a][s][m][n] = v;
                    }
                }
            }
        }
        Riemann { g: g(q), r }
    }

    /// Sectional curvature of the plane of coordinate directions `u`, `v`
    /// (assumed orthogonal).
    pub fn sectional(&self, u: usize, v: usize) -> f64 {
        let mut low = 0.0;
        for l in 0..3 {
            low += self.g[u][l] * self.r[l][v][u][v];
        }
        low / (self.g[u][u] * self.g[v][v])
    }

    pub fn ricci(&self, s: usize, n: usize) -> f64 {
        (0..3).map(|a| self.r[a][s][a][n]).sum()
    }

    pub fn scalar(&self) -> f64 {
        let inv = inverse(&self.g);
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += inv[i][j] * self.ricci(i, j);
            }
        }
        s
    }
}

/// `phi(x)^2 dx^2 + psi(x)^2 (dth^2 + sin^2 th dph^2)`.
pub fn warped_metric(phi: impl Fn(f64) -> f64 + 'static, psi: impl Fn(f64) -> f64 + 'static) -> Box<Metric> {
    Box::new(move |q: [f64; 3]| {
        let (f, p, s) = (phi(q[0]), psi(q[0]), q[1].sin());
        [[f * f, 0.0, 0.0], [0.0, p * p, 0.0], [0.0, 0.0, p * p * s * s]]
    })
}

/// `(K_orth, K_sph, R)` of a warped metric at coordinate `x`, differencing
/// with outer step `h`.
pub fn warped_oracle(g: &Metric, x: f64, h: f64) -> (f64, f64, f64) {
    let rm = Riemann::with_step(g, [x, std::f64::consts::FRAC_PI_3, 0.4], h);
    (rm.sectional(0, 1), rm.sectional(1, 2), rm.scalar())
}

/// Max deviation of `curvature` from the oracle over nodes with `x` in
/// `[lo, hi]`, for a round sphere of radius 1 sampled on `n` intervals.
pub fn round_error(n: usize, lo: f64, hi: f64) -> f64 {
    let p = riccilab::warped::make_profile(riccilab::warped::ProfileKind::Round(1.0), n).unwrap();
    let c = riccilab::warped::curvature(&p).unwrap();
    let g = warped_metric(|_| std::f64::consts::PI, |x| (std::f64::consts::PI * x).sin());
    (1..n)
        .filter(|&i| (lo..=hi).contains(&p.x(i)))
        .map(|i| {
            let (ko, ks, r) = warped_oracle(&g, p.x(i), pole_step(p.x(i)));
            (c.k_orth[i] - ko)
                .abs()
                .max((c.k_sph[i] - ks).abs())
                .max((c.r[i] - r).abs())
        })
        .fold(0.0, f64::max)
}

/// Outer step for a profile on `[0, 1]` with poles at both ends. Polar
/// coordinates make the Christoffel symbols grow like `1/x`, so the step
/// shrinks near a pole. `K_sph` cancels like `1/psi^2` there, so oracle
/// values within about 0.1 of a pole carry errors above 1e-7.
pub fn pole_step(x: f64) -> f64 {
    1e-3f64.min(x.min(1.0 - x) / 40.0)
}

/// Every decomposition whose piece kinds are listed in (Neck, Cap,
/// Spherical) order with at most `max_pieces` pieces, under every partial
/// gluing of boundary spheres; unglued neck ends are left open, unglued cap
/// boundaries stay free.
pub fn enumerate_decompositions(max_pieces: usize) -> Vec<Decomposition> {
    fn kinds(len: usize, from: usize, cur: &mut Vec<PieceKind>, out: &mut Vec<Vec<PieceKind>>) {
        const ORDER: [PieceKind; 3] = [PieceKind::Neck, PieceKind::Cap, PieceKind::Spherical];
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for k in from..3 {
            cur.push(ORDER[k]);
            kinds(len, k, cur, out);
            cur.pop();
        }
    }
    fn matchings(ports: &[Port], used: &mut Vec<bool>, cur: &mut Vec<(Port, Port)>, out: &mut Vec<Vec<(Port, Port)>>) {
        let Some(i) = used.iter().position(|u| !u) else {
            out.push(cur.clone());
            return;
        };
        used[i] = true;
        matchings(ports, used, cur, out);
        for j in i + 1..ports.len() {
            if !used[j] {
                used[j] = true;
                cur.push((ports[i], ports[j]));
                matchings(ports, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
        used[i] = false;
    }
    let mut out = Vec::new();
    for len in 1..=max_pieces {
        let mut seqs = Vec::new();
        kinds(len, 0, &mut Vec::new(), &mut seqs);
        for seq in seqs {
            let pieces: Vec<Piece> = seq.iter().enumerate().map(|(id, &kind)| Piece { kind, id }).collect();
            let ports: Vec<Port> = seq
                .iter()
                .enumerate()
                .flat_map(|(i, k)| (0..k.ports()).map(move |p| (i, p)))
                .collect();
            let mut ms = Vec::new();
            matchings(&ports, &mut vec![false; ports.len()], &mut Vec::new(), &mut ms);
            for adjacency in ms {
                let open_ends = ports
                    .iter()
                    .filter(|p| seq[p.0] == PieceKind::Neck && !adjacency.iter().any(|(a, b)| a == *p || b == *p))
                    .copied()
                    .collect();
                out.push(Decomposition {
                    pieces: pieces.clone(),
                    adjacency,
                    open_ends,
                });
            }
        }
    }
    out
}

pub struct GoldenRun {
    pub artifacts: Artifacts,
    pub elapsed: Duration,
}

static RUN_LOCK: Mutex<()> = Mutex::new(());

/// Run `config` with no other cached run in flight, so wall times are
/// comparable.
pub fn timed_run(config: &RunConfig) -> GoldenRun {
    let _guard = RUN_LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let artifacts = cli::execute(config).expect("scenario setup failed");
    GoldenRun {
        artifacts,
        elapsed: start.elapsed(),
    }
}

/// Default run of `scenario`, computed once per test binary.
pub fn golden(scenario: Scenario) -> &'static GoldenRun {
    static CELLS: [OnceLock<GoldenRun>; 5] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    let k = Scenario::ALL.iter().position(|s| *s == scenario).unwrap();
    CELLS[k].get_or_init(|| timed_run(&RunConfig::for_scenario(scenario)))
}

/// Directory of the checked-in golden CSV files.
pub fn golden_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

/// Ways to corrupt a surgery so the weak-solution audit must object.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Dent the largest sphere of a post component: R_min drops.
    RminDrop,
    /// Bulge it slightly: the metric rises above the pre-surgery metric.
    MetricIncrease,
    /// Shrink the whole component until R_max exceeds theta/2.
    RmaxAboveHalfTheta,
}

impl Mutation {
    pub const ALL: [Mutation; 3] = [
        Mutation::RminDrop,
        Mutation::MetricIncrease,
        Mutation::RmaxAboveHalfTheta,
    ];

    pub fn expected(self) -> riccilab::error::Condition {
        use riccilab::error::Condition;
        match self {
            Mutation::RminDrop => Condition::MinCurvature,
            Mutation::MetricIncrease => Condition::MetricDecrease,
            Mutation::RmaxAboveHalfTheta => Condition::MaxCurvature,
        }
    }
}

fn gaussian_factor(p: &riccilab::warped::WarpedProfile, amp: f64, sigma: f64) -> riccilab::warped::WarpedProfile {
    let s = p.arclength();
    let c = (0..=p.n()).max_by(|&a, &b| p.psi[a].total_cmp(&p.psi[b])).unwrap();
    let mut q = p.clone();
    for i in 0..=p.n() {
        let u = (s[i] - s[c]) / sigma;
        q.psi[i] *= 1.0 + amp * (-0.5 * u * u).exp();
    }
    q
}

/// Apply `m` to the first post component of the first surgery.
pub fn mutate(t: &riccilab::timeline::Timeline, m: Mutation) -> riccilab::timeline::Timeline {
    use riccilab::timeline::{MetricSnapshot, Payload};
    let mut t = t.clone();
    let ev = t.surgeries.first_mut().expect("timeline has no surgery");
    let comp = &mut ev.post[0];
    let p = comp.snapshot.warped().expect("warped component").clone();
    let q = match m {
        Mutation::RminDrop => gaussian_factor(&p, -0.05, 0.3),
        Mutation::MetricIncrease => gaussian_factor(&p, 1e-3, 0.3),
        Mutation::RmaxAboveHalfTheta => {
            let rmax = comp.snapshot.diagnostics.r_max;
            p.scaled(0.5 * (2.0 * rmax / ev.theta))
        }
    };
    comp.snapshot = MetricSnapshot::new(comp.snapshot.time, Payload::Warped(q), comp.snapshot.phase).unwrap();
    t
}
