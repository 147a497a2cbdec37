//! Piece graphs of canonical neighbourhoods and what they glue up to.
//!
//! A [`Decomposition`] lists necks (two boundary spheres), caps (one) and
//! spherical pieces (none), the gluings between boundary spheres, and the
//! neck ends left open. [`classify`] reads off the manifold; [`oracle_classify`]
//! reaches the same answer by contracting necks.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::surgery::{self, SurgeryParams};
use crate::warped::{self, CurvatureFields, Topology, WarpedProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PieceKind {
    Neck,
    Cap,
    Spherical,
}

impl PieceKind {
    /// Number of boundary spheres.
    pub fn ports(self) -> usize {
        match self {
            PieceKind::Neck => 2,
            PieceKind::Cap => 1,
            PieceKind::Spherical => 0,
        }
    }

    fn letter(self) -> char {
        match self {
            PieceKind::Neck => 'N',
            PieceKind::Cap => 'C',
            PieceKind::Spherical => 'S',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Piece {
    pub kind: PieceKind,
    pub id: usize,
}

/// A boundary sphere: `(piece index, boundary index)`.
pub type Port = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Decomposition {
    pub pieces: Vec<Piece>,
    pub adjacency: Vec<(Port, Port)>,
    pub open_ends: Vec<Port>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    S3,
    S2xS1,
    Spherical,
    R3,
    S2xR,
    Invalid,
}

impl Shape {
    pub fn tag(self) -> &'static str {
        match self {
            Shape::S3 => "S3",
            Shape::S2xS1 => "S2xS1",
            Shape::Spherical => "Spherical",
            Shape::R3 => "R3",
            Shape::S2xR => "S2xR",
            Shape::Invalid => "Invalid",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl Decomposition {
    fn with_kinds(kinds: &[PieceKind]) -> Self {
        Decomposition {
            pieces: kinds.iter().enumerate().map(|(id, &kind)| Piece { kind, id }).collect(),
            adjacency: vec![],
            open_ends: vec![],
        }
    }

    /// Pieces glued in a row. Neck ends at either end of the row stay open.
    pub fn chain(kinds: &[PieceKind]) -> Self {
        let mut d = Decomposition::with_kinds(kinds);
        let k = kinds.len();
        // Right-hand port of piece i and left-hand port of piece i + 1.
        let right = |i: usize| if kinds[i] == PieceKind::Neck { 1 } else { 0 };
        for i in 0..k.saturating_sub(1) {
            d.adjacency.push(((i, right(i)), (i + 1, 0)));
        }
        if k > 0 {
            if kinds[0] == PieceKind::Neck {
                d.open_ends.push((0, 0));
            }
            if kinds[k - 1] == PieceKind::Neck {
                d.open_ends.push((k - 1, 1));
            }
        }
        d
    }

    /// `k` necks glued in a ring.
    pub fn cycle(k: usize) -> Self {
        let mut d = Decomposition::with_kinds(&vec![PieceKind::Neck; k]);
        for i in 0..k {
            d.adjacency.push(((i, 1), ((i + 1) % k, 0)));
        }
        d
    }

    pub fn spherical() -> Self {
        Decomposition::with_kinds(&[PieceKind::Spherical])
    }

    /// One-line text form: `C-N-N-C`, `cycle:N4`, `C-N-…`, `S`, or a raw
    /// listing for graphs that are neither rows nor rings.
    pub fn text(&self) -> String {
        if let Some(order) = self.as_row() {
            let mut parts: Vec<String> = Vec::new();
            let first = order.first().copied();
            if let Some((i, p)) = first {
                if self.open_ends.contains(&(i, p)) {
                    parts.push("…".into());
                }
            }
            for &(i, _) in &order {
                parts.push(self.pieces[i].kind.letter().to_string());
            }
            if let Some(&(i, entry)) = order.last() {
                if self.pieces[i].kind == PieceKind::Neck && self.open_ends.contains(&(i, 1 - entry)) {
                    parts.push("…".into());
                }
            }
            return parts.join("-");
        }
        if classify(self) == Shape::S2xS1 {
            return format!("cycle:N{}", self.pieces.len());
        }
        let kinds: String = self.pieces.iter().map(|p| p.kind.letter()).collect();
        let glue: Vec<String> = self
            .adjacency
            .iter()
            .map(|((a, p), (b, q))| format!("{a}.{p}-{b}.{q}"))
            .collect();
        let open: Vec<String> = self.open_ends.iter().map(|(a, p)| format!("{a}.{p}")).collect();
        format!("graph:{kinds};{};{}", glue.join(","), open.join(","))
    }

    /// Pieces in row order with the port each is entered by, when the graph
    /// is a simple row starting at a piece with a free or open end.
    fn as_row(&self) -> Option<Vec<(usize, usize)>> {
        if classify(self) == Shape::Invalid || classify(self) == Shape::S2xS1 {
            return None;
        }
        let n = self.pieces.len();
        if n == 0 {
            return None;
        }
        let partner = self.partners().ok()?;
        // Start from a cap, else from a neck with an open end.
        let start = (0..n)
            .find(|&i| self.pieces[i].kind == PieceKind::Cap)
            .or_else(|| (0..n).find(|&i| (0..self.pieces[i].kind.ports()).any(|p| partner[i][p].is_none())))
            .unwrap_or(0);
        let entry = (0..self.pieces[start].kind.ports())
            .find(|&p| partner[start][p].is_none())
            .unwrap_or(0);
        let mut order = vec![(start, entry)];
        let (mut cur, mut port_in) = (start, entry);
        loop {
            let ports = self.pieces[cur].kind.ports();
            if ports < 2 && order.len() > 1 {
                break;
            }
            let out = if ports == 2 { 1 - port_in } else { 0 };
            if ports == 0 {
                break;
            }
            match partner[cur][out] {
                Some((j, q)) => {
                    order.push((j, q));
                    cur = j;
                    port_in = q;
                }
                None => break,
            }
            if order.len() > n {
                return None;
            }
        }
        Some(order)
    }

    /// Glue partner of every port, or an error when a port is misused.
    fn partners(&self) -> std::result::Result<Vec<Vec<Option<Port>>>, ()> {
        let mut partner: Vec<Vec<Option<Port>>> = self.pieces.iter().map(|p| vec![None; p.kind.ports()]).collect();
        let valid = |(i, p): Port| i < self.pieces.len() && p < self.pieces[i].kind.ports();
        for &(a, b) in &self.adjacency {
            if !valid(a) || !valid(b) || a == b {
                return Err(());
            }
            if partner[a.0][a.1].is_some() || partner[b.0][b.1].is_some() {
                return Err(());
            }
            partner[a.0][a.1] = Some(b);
            partner[b.0][b.1] = Some(a);
        }
        Ok(partner)
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

/// What the pieces glue up to.
pub fn classify(d: &Decomposition) -> Shape {
    let n = d.pieces.len();
    if n == 0 {
        return Shape::Invalid;
    }
    let partner = match d.partners() {
        Ok(p) => p,
        Err(()) => return Shape::Invalid,
    };
    let mut open = vec![vec![false; 2]; n];
    for &(i, p) in &d.open_ends {
        if i >= n || d.pieces[i].kind != PieceKind::Neck || p >= 2 || partner[i][p].is_some() || open[i][p] {
            return Shape::Invalid;
        }
        open[i][p] = true;
    }
    // Every boundary sphere is glued or declared open.
    for (i, piece) in d.pieces.iter().enumerate() {
        for p in 0..piece.kind.ports() {
            if partner[i][p].is_none() && !open[i][p] {
                return Shape::Invalid;
            }
        }
    }
    if d.pieces.iter().any(|p| p.kind == PieceKind::Spherical) {
        return if n == 1 { Shape::Spherical } else { Shape::Invalid };
    }
    // Connectivity by breadth-first search.
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for &(j, _) in partner[i].iter().flatten() {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Shape::Invalid;
    }
    let caps = d.pieces.iter().filter(|p| p.kind == PieceKind::Cap).count();
    let opens = d.open_ends.len();
    // Every piece has at most two ports, so a connected graph is a row or a ring.
    match (caps, opens) {
        (0, 0) => Shape::S2xS1,
        (2, 0) => Shape::S3,
        (1, 1) => Shape::R3,
        (0, 2) => Shape::S2xR,
        _ => Shape::Invalid,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum End {
    Glued(usize, usize),
    Open,
    Free,
}

/// Independent classification: contract every neck glued to a different
/// piece until at most two pieces remain, then match the normal form.
pub fn oracle_classify(d: &Decomposition) -> Shape {
    let n = d.pieces.len();
    if n == 0 {
        return Shape::Invalid;
    }
    let mut ends: Vec<Vec<End>> = d.pieces.iter().map(|p| vec![End::Free; p.kind.ports()]).collect();
    for &((a, p), (b, q)) in &d.adjacency {
        if a >= n || b >= n || p >= ends[a].len() || q >= ends[b].len() || (a, p) == (b, q) {
            return Shape::Invalid;
        }
        if ends[a][p] != End::Free || ends[b][q] != End::Free {
            return Shape::Invalid;
        }
        ends[a][p] = End::Glued(b, q);
        ends[b][q] = End::Glued(a, p);
    }
    for &(a, p) in &d.open_ends {
        if a >= n || p >= ends[a].len() || ends[a][p] != End::Free || d.pieces[a].kind != PieceKind::Neck {
            return Shape::Invalid;
        }
        ends[a][p] = End::Open;
    }
    if ends.iter().flatten().any(|e| *e == End::Free) {
        return Shape::Invalid;
    }
    // Connectivity by union-find over the gluings.
    let mut root: Vec<usize> = (0..n).collect();
    fn find(root: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while root[i] != i {
            root[i] = root[root[i]];
            i = root[i];
        }
        i
    }
    for &((a, _), (b, _)) in &d.adjacency {
        let (ra, rb) = (find(&mut root, a), find(&mut root, b));
        root[ra] = rb;
    }
    let r0 = find(&mut root, 0);
    if (1..n).any(|i| find(&mut root, i) != r0) {
        return Shape::Invalid;
    }
    let mut alive: Vec<bool> = vec![true; n];
    let kind = |i: usize| d.pieces[i].kind;
    loop {
        let pick = (0..n)
            .filter(|&i| alive[i] && kind(i) == PieceKind::Neck)
            .find_map(|i| {
                (0..2).find_map(|p| match ends[i][p] {
                    End::Glued(j, q) if j != i => Some((i, p, j, q)),
                    _ => None,
                })
            });
        let Some((i, p, j, q)) = pick else { break };
        // The neck's far end takes the place of the glued port on `j`.
        let far = ends[i][1 - p];
        ends[j][q] = far;
        if let End::Glued(k, r) = far {
            ends[k][r] = End::Glued(j, q);
        }
        alive[i] = false;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    match rest.as_slice() {
        [i] => match (kind(*i), ends[*i].as_slice()) {
            (PieceKind::Spherical, []) => Shape::Spherical,
            (PieceKind::Cap, [End::Open]) => Shape::R3,
            (PieceKind::Neck, [End::Open, End::Open]) => Shape::S2xR,
            (PieceKind::Neck, [End::Glued(a, _), End::Glued(b, _)]) if *a == *i && *b == *i => Shape::S2xS1,
            _ => Shape::Invalid,
        },
        [i, j] => match (kind(*i), kind(*j)) {
            (PieceKind::Cap, PieceKind::Cap) => Shape::S3,
            _ => Shape::Invalid,
        },
        _ => Shape::Invalid,
    }
}

/// A neck window found while covering a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeckWindow {
    pub center: usize,
    /// First and last node inside the window (indices wrap on periodic profiles).
    pub lo: usize,
    pub hi: usize,
    pub quality: f64,
}

/// How the nodes of a profile, or of a stretch of it, are covered.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cover {
    pub windows: Vec<NeckWindow>,
    /// Pole-adjacent node ranges accepted as caps.
    pub caps: Vec<(usize, usize)>,
    /// The whole component is nearly round.
    pub spherical: bool,
    /// Nodes that needed covering but got none.
    pub uncovered: Vec<usize>,
}

impl Cover {
    pub fn ok(&self) -> bool {
        self.uncovered.is_empty()
    }
}

/// Round-component proxy: every sectional curvature within `eps * max|K|` of the others.
pub fn is_nearly_round(curv: &CurvatureFields, eps: f64) -> bool {
    let all = curv.k_orth.iter().chain(&curv.k_sph);
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &k| (a.min(k), b.max(k)));
    lo > 0.0 && hi - lo <= eps * hi
}

struct Scanner<'a> {
    p: &'a WarpedProfile,
    s: Vec<f64>,
    deriv: (Vec<f64>, Vec<f64>),
    r: &'a [f64],
    eps: f64,
    half: f64,
    quality: Vec<Option<(f64, f64)>>,
}

impl<'a> Scanner<'a> {
    fn new(p: &'a WarpedProfile, curv: &'a CurvatureFields, eps: f64, half: f64) -> Self {
        Scanner {
            p,
            s: p.arclength(),
            deriv: warped::arclength_derivatives(p),
            r: &curv.r,
            eps,
            half,
            quality: vec![None; p.n() + 1],
        }
    }

    /// `(quality, half-length in arclength)` of the neck centred at node `c`.
    fn neck(&mut self, c: usize) -> (f64, f64) {
        if let Some(q) = self.quality[c] {
            return q;
        }
        let q = if self.r[c] > 0.0 && self.p.psi[c] > 0.0 {
            surgery::neck_quality(self.p, &self.s, &self.deriv, c, self.r[c] / 2.0, self.half)
        } else {
            (f64::INFINITY, 0.0)
        };
        self.quality[c] = Some(q);
        q
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        let d = (self.s[i] - self.s[j]).abs();
        if self.p.topology == Topology::PeriodicS2xS1 {
            d.min(self.s[self.p.n()] - d)
        } else {
            d
        }
    }

    fn wrap(&self, i: isize) -> Option<usize> {
        let n = self.p.n() as isize;
        match self.p.topology {
            Topology::PeriodicS2xS1 => Some(i.rem_euclid(n) as usize),
            Topology::ClosedS3 => (0..=n).contains(&i).then_some(i as usize),
        }
    }

    /// Best accepted neck window containing node `i`: the centre furthest
    /// ahead, else any centre behind.
    fn window_for(&mut self, i: usize) -> Option<NeckWindow> {
        let n = self.p.n() as isize;
        let mut best = None;
        for dir in [1isize, -1] {
            let mut k = 0isize;
            loop {
                let Some(c) = self.wrap(i as isize + dir * k) else {
                    break;
                };
                if k > n {
                    break;
                }
                let d = self.dist(i, c);
                let (q, half_s) = self.neck(c);
                // Radii never shrink by more than a factor ~2 across a window,
                // so scanning stops once the distance is clearly out of reach.
                if d > half_s && d > 4.0 * self.half * self.p.psi[i].max(self.p.psi[c]) {
                    break;
                }
                if d <= half_s && q <= self.eps {
                    best = Some((c, q, half_s));
                }
                k += 1;
            }
            if best.is_some() {
                break;
            }
        }
        let (c, q, half_s) = best?;
        let mut lo = c as isize;
        while let Some(j) = self.wrap(lo - 1) {
            if self.dist(j, c) > half_s || j == c {
                break;
            }
            lo -= 1;
        }
        let mut hi = c as isize;
        while let Some(j) = self.wrap(hi + 1) {
            if self.dist(j, c) > half_s || j == c {
                break;
            }
            hi += 1;
        }
        Some(NeckWindow {
            center: c,
            lo: self.wrap(lo).expect("in range"),
            hi: self.wrap(hi).expect("in range"),
            quality: q,
        })
    }
}

/// Cover nodes `a..=b` of `p` whose scalar curvature is at least `threshold`
/// by neck windows of quality at most `eps`, and uncovered runs touching a
/// pole by caps. A pole run is a cap when `psi` climbs monotonically from
/// the pole and then never drops below its value where the first window starts.
#[allow(clippy::too_many_arguments)]
pub fn cover_interval(
    p: &WarpedProfile,
    curv: &CurvatureFields,
    a: usize,
    b: usize,
    eps: f64,
    half: f64,
    threshold: f64,
) -> Cover {
    let n = p.n();
    let periodic = p.topology == Topology::PeriodicS2xS1;
    let mut sc = Scanner::new(p, curv, eps, half);
    let mut covered = vec![false; n + 1];
    let mut cover = Cover::default();
    let needs = |i: usize| curv.r[i] >= threshold;
    let last = if periodic && a == 0 && b == n { n - 1 } else { b };
    let mut misses = Vec::new();
    for i in a..=last {
        if covered[i] || !needs(i) {
            continue;
        }
        match sc.window_for(i) {
            Some(w) => {
                let mut j = w.lo;
                loop {
                    covered[j] = true;
                    if j == w.hi {
                        break;
                    }
                    j = if periodic { (j + 1) % n } else { j + 1 };
                }
                cover.windows.push(w);
            }
            None => misses.push(i),
        }
    }
    if periodic && covered[0] {
        covered[n] = true;
    }
    // Uncovered runs against a pole may be caps.
    let closed = !periodic;
    let mut caps = Vec::new();
    let mut uncovered = Vec::new();
    let first_cov = (a..=b).find(|&i| covered[i]);
    let last_cov = (a..=b).rev().find(|&i| covered[i]);
    for &i in &misses {
        let left_cap = closed && a == 0 && first_cov.map_or(false, |f| i < f);
        let right_cap = closed && b == n && last_cov.map_or(false, |l| i > l);
        if !(left_cap || right_cap) {
            uncovered.push(i);
        }
    }
    if closed && a == 0 {
        if let Some(f) = first_cov {
            if f > 0 {
                if cap_shape_ok(&p.psi, f, true) {
                    caps.push((0, f - 1));
                } else {
                    uncovered.extend(misses.iter().filter(|&&i| i < f));
                }
            }
        }
    }
    if closed && b == n {
        if let Some(l) = last_cov {
            if l < n {
                if cap_shape_ok(&p.psi, l, false) {
                    caps.push((l + 1, n));
                } else {
                    uncovered.extend(misses.iter().filter(|&&i| i > l));
                }
            }
        }
    }
    uncovered.sort_unstable();
    uncovered.dedup();
    cover.caps = caps;
    cover.uncovered = uncovered;
    cover
}

fn cap_shape_ok(psi: &[f64], junction: usize, from_left: bool) -> bool {
    let target = psi[junction];
    let order: Vec<usize> = if from_left {
        (0..junction).collect()
    } else {
        (junction + 1..psi.len()).rev().collect()
    };
    let mut climbing = true;
    let mut prev = 0.0;
    for i in order {
        let v = psi[i];
        if climbing {
            if v >= target {
                climbing = false;
            } else if v < prev {
                return false;
            }
        } else if v < target * (1.0 - 1e-9) {
            return false;
        }
        prev = v;
    }
    true
}

/// Cover of a whole profile at curvature level `threshold`.
pub fn cover_profile(p: &WarpedProfile, curv: &CurvatureFields, eps: f64, half: f64, threshold: f64) -> Cover {
    if is_nearly_round(curv, eps) {
        return Cover {
            spherical: true,
            ..Cover::default()
        };
    }
    let n = p.n();
    let mut c = cover_interval(p, curv, 0, n, eps, half, threshold);
    if c.windows.is_empty() {
        // Nothing to anchor caps on.
        c.caps.clear();
        c.uncovered = (0..=n).filter(|&i| curv.r[i] >= threshold).collect();
    }
    c
}

/// Piece graph of a profile: one spherical piece, a ring of necks, or
/// cap, necks, cap.
pub fn from_profile(p: &WarpedProfile, params: &SurgeryParams) -> Result<Decomposition> {
    from_profile_with(p, &warped::curvature(p)?, params)
}

/// [`from_profile`] with the curvature supplied by the caller.
pub fn from_profile_with(p: &WarpedProfile, curv: &CurvatureFields, params: &SurgeryParams) -> Result<Decomposition> {
    let cover = cover_profile(p, curv, params.eps, params.window_half(), f64::NEG_INFINITY);
    if cover.spherical {
        return Ok(Decomposition::spherical());
    }
    if let Some(&index) = cover.uncovered.first() {
        return Err(Error::UncoveredPoint { index });
    }
    let necks = chain_length(&cover);
    match p.topology {
        Topology::PeriodicS2xS1 => Ok(Decomposition::cycle(necks.max(1))),
        Topology::ClosedS3 => {
            let mut kinds = vec![PieceKind::Cap];
            kinds.extend(std::iter::repeat(PieceKind::Neck).take(necks.max(1)));
            kinds.push(PieceKind::Cap);
            Ok(Decomposition::chain(&kinds))
        }
    }
}

/// Number of necks in the chain: overlapping windows merge into one run of necks.
fn chain_length(cover: &Cover) -> usize {
    cover.windows.len()
}

/// Classification of a profile; a single spherical piece on a closed profile is S3.
pub fn classify_profile(p: &WarpedProfile, params: &SurgeryParams) -> Result<Shape> {
    classify_profile_with(p, &warped::curvature(p)?, params)
}

/// [`classify_profile`] with the curvature supplied by the caller.
pub fn classify_profile_with(p: &WarpedProfile, curv: &CurvatureFields, params: &SurgeryParams) -> Result<Shape> {
    let d = from_profile_with(p, curv, params)?;
    let shape = classify(&d);
    Ok(if shape == Shape::Spherical && p.topology == Topology::ClosedS3 {
        Shape::S3
    } else {
        shape
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use PieceKind::*;

    #[test]
    fn chains_and_cycles() {
        assert_eq!(classify(&Decomposition::chain(&[Cap, Neck, Cap])), Shape::S3);
        assert_eq!(classify(&Decomposition::chain(&[Cap, Cap])), Shape::S3);
        assert_eq!(classify(&Decomposition::cycle(4)), Shape::S2xS1);
        assert_eq!(classify(&Decomposition::chain(&[Cap, Neck])), Shape::R3);
        assert_eq!(classify(&Decomposition::chain(&[Neck, Neck, Neck])), Shape::S2xR);
        assert_eq!(classify(&Decomposition::spherical()), Shape::Spherical);
    }

    #[test]
    fn self_loop_is_s2xs1() {
        let d = Decomposition {
            pieces: vec![Piece { kind: Neck, id: 0 }],
            adjacency: vec![((0, 0), (0, 1))],
            open_ends: vec![],
        };
        assert_eq!(classify(&d), Shape::S2xS1);
        assert_eq!(oracle_classify(&d), Shape::S2xS1);
    }

    #[test]
    fn cap_glued_twice_is_invalid() {
        let mut d = Decomposition::chain(&[Cap, Neck, Cap]);
        d.adjacency.push(((0, 0), (2, 0)));
        assert_eq!(classify(&d), Shape::Invalid);
        assert_eq!(oracle_classify(&d), Shape::Invalid);
    }

    #[test]
    fn lone_cap_is_invalid() {
        let d = Decomposition::chain(&[Cap]);
        assert_eq!(classify(&d), Shape::Invalid);
    }

    #[test]
    fn text_forms() {
        assert_eq!(Decomposition::chain(&[Cap, Neck, Neck, Cap]).text(), "C-N-N-C");
        assert_eq!(Decomposition::cycle(4).text(), "cycle:N4");
        assert_eq!(Decomposition::chain(&[Cap, Neck]).text(), "C-N-…");
        assert_eq!(Decomposition::spherical().text(), "S");
    }

    #[test]
    fn round_profile_is_spherical() {
        let p = warped::make_profile(warped::ProfileKind::Round(1.0), 400).unwrap();
        let params = surgery::cutoff_params(1.0, 5e-3, &Default::default()).unwrap();
        assert_eq!(classify(&from_profile(&p, &params).unwrap()), Shape::Spherical);
        assert_eq!(classify_profile(&p, &params).unwrap(), Shape::S3);
    }

    #[test]
    fn cylinder_is_a_ring() {
        let p = warped::make_profile(
            warped::ProfileKind::Cylinder {
                radius: 1.0,
                length: 40.0,
            },
            400,
        )
        .unwrap();
        let params = surgery::cutoff_params(1.0, 5e-3, &Default::default()).unwrap();
        let d = from_profile(&p, &params).unwrap();
        assert_eq!(classify(&d), Shape::S2xS1);
    }
}
