//! Finite presentations of pointwise finite-dimensional contravariant functors on the strip:
//! grid-indexed vector spaces with a matrix for every covering relation, block sums, the
//! diagram formula, and the checkers for functoriality, continuity, decomposition,
//! middle exactness, the long exact sequences across tiles, the colexicographic
//! filtration, and natural transformations out of blocks.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_geometry::{
    block_contains, t_pow, tile_index_opt, Coord, ExtRational, Region, StripPoint, TypedInterval,
};
use crate::field_linalg::{column_space_sum_dim, Field, Mat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModuleError {
    #[error("missing neighbor samples around {0}; the grid is too small")]
    GridTooSmall(Box<StripPoint>),
    #[error("points are not comparable: {} and {}", .0.0, .0.1)]
    Incomparable(Box<(StripPoint, StripPoint)>),
    #[error("no monotone sample path from {} down to {}", .0.1, .0.0)]
    NoPath(Box<(StripPoint, StripPoint)>),
    #[error("sample {0} is not in the grid")]
    NotASample(Box<StripPoint>),
    #[error("point {0} lies on the boundary of the strip")]
    Boundary(Box<StripPoint>),
    #[error("{0}")]
    Check(Box<Counterexample>),
    #[error("malformed module dump: {0}")]
    Dump(String),
}

/// A witness for a failed check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub check: String,
    pub at: Vec<StripPoint>,
    pub detail: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self.at.iter().map(|p| p.to_string()).collect();
        write!(f, "{} failed at [{}]: {}", self.check, pts.join(", "), self.detail)
    }
}

fn cex(check: &str, at: Vec<StripPoint>, detail: impl Into<String>) -> Counterexample {
    Counterexample { check: check.to_string(), at, detail: detail.into() }
}

/// A sample of the grid at the intersection of x-line `i` and y-line `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub i: usize,
    pub j: usize,
    pub point: StripPoint,
    pub tile: Option<i64>,
    pub boundary: bool,
}

/// Samples at intersections of sorted coordinate lines, ordered colexicographically by `(y, x)`.
#[derive(Clone, Debug)]
pub struct SampleGrid {
    pub xs: Vec<Coord>,
    pub ys: Vec<Coord>,
    pub x_critical: Vec<bool>,
    pub y_critical: Vec<bool>,
    pub samples: Vec<Sample>,
    index: HashMap<(usize, usize), usize>,
}

fn normalize_lines(mut lines: Vec<(Coord, bool)>) -> (Vec<Coord>, Vec<bool>) {
    lines.sort_by(|a, b| a.0.cmp(&b.0));
    let mut coords: Vec<Coord> = vec![];
    let mut crit: Vec<bool> = vec![];
    for (c, k) in lines {
        if coords.last() == Some(&c) {
            let last = crit.last_mut().unwrap();
            *last = *last || k;
        } else {
            coords.push(c);
            crit.push(k);
        }
    }
    (coords, crit)
}

impl SampleGrid {
    /// Builds the grid from x-lines and y-lines flagged as critical, keeping the points of
    /// the strip accepted by `keep`.
    pub fn new(xs: Vec<(Coord, bool)>, ys: Vec<(Coord, bool)>, keep: impl Fn(&StripPoint) -> bool) -> SampleGrid {
        let (xs, x_critical) = normalize_lines(xs);
        let (ys, y_critical) = normalize_lines(ys);
        let mut samples = vec![];
        for (j, y) in ys.iter().enumerate() {
            for (i, x) in xs.iter().enumerate() {
                let point = StripPoint::new(x.clone(), y.clone());
                if !point.in_strip() || !keep(&point) {
                    continue;
                }
                let boundary = point.is_boundary();
                let tile = if boundary { None } else { tile_index_opt(&point) };
                samples.push(Sample { i, j, point, tile, boundary });
            }
        }
        let index = samples.iter().enumerate().map(|(s, p)| ((p.i, p.j), s)).collect();
        SampleGrid { xs, ys, x_critical, y_critical, samples, index }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn at(&self, i: usize, j: usize) -> Option<usize> {
        self.index.get(&(i, j)).copied()
    }

    fn at_signed(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 {
            return None;
        }
        self.at(i as usize, j as usize)
    }

    /// The sample with the next smaller x, which lies above in the order.
    pub fn left(&self, s: usize) -> Option<usize> {
        let p = &self.samples[s];
        self.at_signed(p.i as isize - 1, p.j as isize)
    }

    /// The sample with the next larger y, which lies above in the order.
    pub fn up(&self, s: usize) -> Option<usize> {
        let p = &self.samples[s];
        self.at_signed(p.i as isize, p.j as isize + 1)
    }

    /// The sample with the next larger x, which lies below in the order.
    pub fn right(&self, s: usize) -> Option<usize> {
        let p = &self.samples[s];
        self.at_signed(p.i as isize + 1, p.j as isize)
    }

    /// The sample with the next smaller y, which lies below in the order.
    pub fn down(&self, s: usize) -> Option<usize> {
        let p = &self.samples[s];
        self.at_signed(p.i as isize, p.j as isize - 1)
    }

    pub fn find(&self, p: &StripPoint) -> Option<usize> {
        let i = self.xs.binary_search(&p.x).ok()?;
        let j = self.ys.binary_search(&p.y).ok()?;
        self.at(i, j)
    }

    pub fn point(&self, s: usize) -> &StripPoint {
        &self.samples[s].point
    }

    /// Whether sample `s` is an interior grid vertex on two critical lines.
    pub fn is_vertex(&self, s: usize) -> bool {
        let p = &self.samples[s];
        !p.boundary && self.x_critical[p.i] && self.y_critical[p.j]
    }

    /// `p <= q` in the order of the strip.
    pub fn leq(&self, p: usize, q: usize) -> bool {
        let (a, b) = (&self.samples[p], &self.samples[q]);
        a.i >= b.i && a.j <= b.j
    }

    /// Reflection of the grid at the diagonal.
    pub fn reflected(&self) -> SampleGrid {
        let xs = self.ys.iter().cloned().zip(self.y_critical.iter().copied()).collect();
        let ys = self.xs.iter().cloned().zip(self.x_critical.iter().copied()).collect();
        let keep: std::collections::HashSet<StripPoint> =
            self.samples.iter().map(|s| crate::exact_geometry::reflect(&s.point)).collect();
        SampleGrid::new(xs, ys, |p| keep.contains(p))
    }
}

/// Numbers of unit squares and spliced sequences verified by the cohomological check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CohomologicalStats {
    pub squares: usize,
    pub sequences: usize,
}

/// A grid module: a vector space per sample and the maps of covering relations.
///
/// `left[s]` is the map `M(left(s)) -> M(s)` and `up[s]` the map `M(up(s)) -> M(s)`.
#[derive(Clone, Debug)]
pub struct GridModule {
    pub grid: Arc<SampleGrid>,
    pub field: Field,
    pub dims: Vec<usize>,
    pub left: Vec<Option<Mat>>,
    pub up: Vec<Option<Mat>>,
}

/// A finite multiset of diagram points with optional annotations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub x: Coord,
    pub y: Coord,
    pub multiplicity: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub degree: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub region: Option<Region>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pair: Option<(ExtRational, ExtRational)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub levelset: Option<LevelsetBar>,
}

impl DiagramPoint {
    pub fn point(&self) -> StripPoint {
        StripPoint::new(self.x.clone(), self.y.clone())
    }
}

/// A level set barcode interval in a given degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelsetBar {
    pub degree: i64,
    #[serde(flatten)]
    pub interval: TypedInterval,
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diagram {
    pub points: Vec<DiagramPoint>,
}

impl Diagram {
    pub fn from_points(points: Vec<(StripPoint, usize)>) -> Diagram {
        let mut d = Diagram::default();
        for (p, m) in points {
            d.add(p, m);
        }
        d
    }

    pub fn add(&mut self, p: StripPoint, m: usize) {
        if m == 0 {
            return;
        }
        if let Some(e) = self.points.iter_mut().find(|e| e.x == p.x && e.y == p.y) {
            e.multiplicity += m;
            return;
        }
        self.points.push(DiagramPoint {
            x: p.x,
            y: p.y,
            multiplicity: m,
            degree: None,
            region: None,
            pair: None,
            levelset: None,
        });
    }

    /// Points with multiplicities, sorted for multiset comparison.
    pub fn multiset(&self) -> Vec<(StripPoint, usize)> {
        let mut v: Vec<(StripPoint, usize)> = self.points.iter().map(|e| (e.point(), e.multiplicity)).collect();
        v.sort_by(|a, b| (&a.0.y, &a.0.x).cmp(&(&b.0.y, &b.0.x)));
        v
    }

    pub fn total(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of blocks (with multiplicity) whose supports contain both `p` and `q`.
    pub fn block_count(&self, p: &StripPoint, q: &StripPoint) -> usize {
        self.points
            .iter()
            .filter(|e| {
                let v = e.point();
                block_contains(&v, p) && block_contains(&v, q)
            })
            .map(|e| e.multiplicity)
            .sum()
    }
}

fn sum_rank(m: usize, mats: &[&Mat]) -> usize {
    let used: Vec<&Mat> = mats.iter().copied().filter(|x| x.cols > 0).collect();
    if m == 0 || used.is_empty() {
        0
    } else {
        column_space_sum_dim(&used).expect("maps into one space share the row count")
    }
}

impl GridModule {
    pub fn zero(grid: Arc<SampleGrid>, field: Field) -> GridModule {
        let n = grid.len();
        let mut m = GridModule { grid, field, dims: vec![0; n], left: vec![None; n], up: vec![None; n] };
        m.fill_zero_maps();
        m
    }

    fn fill_zero_maps(&mut self) {
        for s in 0..self.grid.len() {
            if let Some(l) = self.grid.left(s) {
                self.left[s] = Some(Mat::zeros(self.field, self.dims[s], self.dims[l]));
            }
            if let Some(u) = self.grid.up(s) {
                self.up[s] = Some(Mat::zeros(self.field, self.dims[s], self.dims[u]));
            }
        }
    }

    /// The direct sum of blocks at the given points, restricted to the samples.
    pub fn from_blocks(blocks: &[(StripPoint, usize)], grid: Arc<SampleGrid>, field: Field) -> GridModule {
        let mut list: Vec<&StripPoint> = vec![];
        for (v, m) in blocks {
            for _ in 0..*m {
                list.push(v);
            }
        }
        let n = grid.len();
        let members: Vec<Vec<usize>> = (0..n)
            .map(|s| (0..list.len()).filter(|&b| block_contains(list[b], grid.point(s))).collect())
            .collect();
        let dims = members.iter().map(|m| m.len()).collect();
        let mut module = GridModule { grid: grid.clone(), field, dims, left: vec![None; n], up: vec![None; n] };
        let block_map = |to: &[usize], from: &[usize]| {
            let mut m = Mat::zeros(field, to.len(), from.len());
            for (c, b) in from.iter().enumerate() {
                if let Some(r) = to.iter().position(|x| x == b) {
                    m.set(r, c, 1);
                }
            }
            m
        };
        for s in 0..n {
            if let Some(l) = grid.left(s) {
                module.left[s] = Some(block_map(&members[s], &members[l]));
            }
            if let Some(u) = grid.up(s) {
                module.up[s] = Some(block_map(&members[s], &members[u]));
            }
        }
        module
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }

    /// Composites `M(q -> p)` for all samples `q >= p` reachable by monotone paths,
    /// restricted to `q` with `i >= i_min` and `j <= j_max`. Fails if two paths disagree.
    pub fn composites_from(
        &self,
        p: usize,
        i_min: usize,
        j_max: usize,
    ) -> Result<HashMap<usize, Mat>, Counterexample> {
        let g = &self.grid;
        let (ip, jp) = (g.samples[p].i, g.samples[p].j);
        let mut out: HashMap<usize, Mat> = HashMap::new();
        out.insert(p, Mat::identity(self.field, self.dims[p]));
        let mut i = ip as isize;
        while i >= i_min as isize {
            for j in jp..=j_max.min(g.ys.len().saturating_sub(1)) {
                let Some(q) = g.at(i as usize, j) else { continue };
                if q == p {
                    continue;
                }
                let via_x = if (i as usize) < ip {
                    g.at(i as usize + 1, j).and_then(|r| {
                        out.get(&r).map(|c| c.compose(self.left[r].as_ref().expect("left map between samples")))
                    })
                } else {
                    None
                };
                let via_y = if j > jp {
                    g.at(i as usize, j - 1).and_then(|r| {
                        out.get(&r).map(|c| c.compose(self.up[r].as_ref().expect("up map between samples")))
                    })
                } else {
                    None
                };
                let c = match (via_x, via_y) {
                    (Some(a), Some(b)) => {
                        if a != b {
                            return Err(cex(
                                "path independence",
                                vec![g.point(p).clone(), g.point(q).clone()],
                                format!("composites differ: {a:?} vs {b:?}"),
                            ));
                        }
                        a
                    }
                    (Some(a), None) | (None, Some(a)) => a,
                    (None, None) => continue,
                };
                out.insert(q, c);
            }
            i -= 1;
        }
        Ok(out)
    }

    /// The map `M(q -> p)` for samples `p <= q`.
    pub fn map_between(&self, p: usize, q: usize) -> Result<Mat, ModuleError> {
        let g = &self.grid;
        if !g.leq(p, q) {
            return Err(ModuleError::Incomparable(Box::new((g.point(p).clone(), g.point(q).clone()))));
        }
        let sq = &g.samples[q];
        let all = self.composites_from(p, sq.i, sq.j).map_err(|c| ModuleError::Check(Box::new(c)))?;
        all.get(&q).cloned().ok_or_else(|| ModuleError::NoPath(Box::new((g.point(p).clone(), g.point(q).clone()))))
    }

    pub fn rank_between(&self, p: usize, q: usize) -> Result<usize, ModuleError> {
        Ok(self.map_between(p, q)?.rank())
    }

    /// The multiplicity function at one sample.
    pub fn mu_at(&self, s: usize) -> Result<usize, ModuleError> {
        let d = self.dims[s];
        if d == 0 {
            return Ok(0);
        }
        let g = &self.grid;
        let (Some(l), Some(u)) = (self.left[s].as_ref(), self.up[s].as_ref()) else {
            return Err(ModuleError::GridTooSmall(Box::new(g.point(s).clone())));
        };
        Ok(d - sum_rank(d, &[l, u]))
    }

    /// The diagram: the multiplicity function at interior grid vertices.
    pub fn dgm(&self) -> Result<Diagram, ModuleError> {
        let mut d = Diagram::default();
        for s in 0..self.grid.len() {
            if !self.grid.is_vertex(s) {
                continue;
            }
            let m = self.mu_at(s)?;
            d.add(self.grid.point(s).clone(), m);
        }
        Ok(d)
    }

    /// Checks that the multiplicity function vanishes off the grid vertices.
    pub fn dgm_support_check(&self) -> Result<(), Counterexample> {
        for s in 0..self.grid.len() {
            if self.grid.is_vertex(s) || self.grid.samples[s].boundary {
                continue;
            }
            match self.mu_at(s) {
                Ok(0) => {}
                Ok(m) => {
                    return Err(cex("diagram support", vec![self.grid.point(s).clone()], format!("mu = {m}")));
                }
                Err(_) => {}
            }
        }
        Ok(())
    }

    /// Path independence and rank comparison against the blocks of the diagram, for
    /// every comparable pair of samples.
    pub fn decomposition_check(&self, dgm: &Diagram) -> Result<usize, Counterexample> {
        let g = &self.grid;
        let mut pairs = 0usize;
        for p in 0..g.len() {
            let comps = self.composites_from(p, 0, usize::MAX)?;
            for (q, m) in comps {
                pairs += 1;
                let r = m.rank();
                let expected = dgm.block_count(g.point(p), g.point(q));
                if r != expected {
                    return Err(cex(
                        "decomposition",
                        vec![g.point(p).clone(), g.point(q).clone()],
                        format!("rank {r} but {expected} blocks contain both"),
                    ));
                }
            }
        }
        Ok(pairs)
    }

    /// Middle exactness of `M(q) -> M(c1) + M(c2) -> M(p)` for a square `p <= c1, c2 <= q`.
    pub fn middle_exact(&self, q_to_c1: &Mat, q_to_c2: &Mat, c1_to_p: &Mat, c2_to_p: &Mat) -> bool {
        middle_exact_maps(self.field, q_to_c1, q_to_c2, c1_to_p, c2_to_p)
    }

    /// Middle exactness of all unit squares, and exactness of the spliced long sequences
    /// `M(w) -> M(v1)+M(v2) -> M(u) -> M(T^-1 w) -> M(T^-1 v1)+M(T^-1 v2) -> M(T^-1 u)`
    /// whose connecting map is the module map `M(u -> T^-1 w)`.
    pub fn cohomological_check(&self) -> Result<CohomologicalStats, Counterexample> {
        let g = &self.grid;
        let f = self.field;
        let mut stats = CohomologicalStats::default();
        for u in 0..g.len() {
            let (Some(v1), Some(v2)) = (g.left(u), g.up(u)) else { continue };
            let Some(w) = g.up(v1) else { continue };
            let l_v1 = self.left[u].as_ref().unwrap();
            let u_v2 = self.up[u].as_ref().unwrap();
            let w_v1 = self.up[v1].as_ref().unwrap();
            let w_v2 = self.left[v2].as_ref().unwrap();
            let pts = || vec![g.point(u).clone(), g.point(w).clone()];
            if !middle_exact_maps(f, w_v1, w_v2, l_v1, u_v2) {
                return Err(cex("middle exactness", pts(), "square is not middle exact"));
            }
            stats.squares += 1;
            // The spliced sequence needs the T^{-1} images of the square.
            let tpt = |s: usize| g.find(&t_pow(g.point(s), -1));
            let (Some(tw), Some(tv1), Some(tv2), Some(tu)) = (tpt(w), tpt(v1), tpt(v2), tpt(u)) else { continue };
            if [u, v1, v2, w].iter().any(|&s| g.samples[s].boundary) {
                continue;
            }
            let conn = match self.map_between(tw, u) {
                Ok(m) => m,
                Err(_) => continue,
            };
            // T reverses both axes, so T^-1 v1 lies above T^-1 u along y and T^-1 v2 along x.
            let tw_tv1 = self.left[tv1].as_ref().unwrap();
            let tw_tv2 = self.up[tv2].as_ref().unwrap();
            let tv1_tu = self.up[tu].as_ref().unwrap();
            let tv2_tu = self.left[tu].as_ref().unwrap();
            let first = stack_rows(f, &[w_v1, w_v2], self.dims[w]);
            let diff = diff_cols(f, l_v1, u_v2, self.dims[u]);
            let second = stack_rows(f, &[tw_tv1, tw_tv2], self.dims[tw]);
            let tdiff = diff_cols(f, tv1_tu, tv2_tu, self.dims[tu]);
            let seq = [&first, &diff, &conn, &second, &tdiff];
            for k in 0..seq.len() - 1 {
                if !exact_at(seq[k], seq[k + 1]) {
                    return Err(cex(
                        "long exact sequence",
                        pts(),
                        format!("not exact at term {} of the spliced sequence", k + 1),
                    ));
                }
            }
            stats.sequences += 1;
        }
        Ok(stats)
    }

    /// For every sample `u` and the adjacent sample `w` below it, the map `M(u) -> M(w)` is
    /// an isomorphism unless `w` is on the boundary or on a critical line in the moving
    /// coordinate.
    pub fn seq_continuity_check(&self) -> Result<usize, Counterexample> {
        let g = &self.grid;
        let mut checked = 0;
        for w in 0..g.len() {
            if g.samples[w].boundary {
                continue;
            }
            let sw = &g.samples[w];
            let cands = [(g.left(w), self.left[w].as_ref(), g.x_critical[sw.i]), (g.up(w), self.up[w].as_ref(), g.y_critical[sw.j])];
            for (u, m, critical) in cands {
                let (Some(u), Some(m)) = (u, m) else { continue };
                if critical {
                    continue;
                }
                checked += 1;
                let iso = self.dims[u] == self.dims[w] && m.rank() == self.dims[w];
                if !iso {
                    return Err(cex(
                        "sequential continuity",
                        vec![g.point(u).clone(), g.point(w).clone()],
                        format!("map of dims {} -> {} is not an isomorphism", self.dims[u], self.dims[w]),
                    ));
                }
            }
        }
        Ok(checked)
    }

    /// The colexicographic filtration of `M(u)` by images from the points
    /// `u_{i,j} = (x_i, y_j)` with `x_0 = -pi - y < ... < x_k = x` and
    /// `y_0 = pi - x > ... > y_l = y` running over the critical lines.
    ///
    /// Returns the dimensions `dim G_{i,j}` indexed `[j][i]`, after asserting the
    /// boundary equations and the quotient dimension identity at every `(i, j)`.
    pub fn colex_filtration(&self, u: usize) -> Result<Vec<Vec<usize>>, ModuleError> {
        let g = &self.grid;
        let pu = g.samples[u].clone();
        if pu.boundary {
            return Err(ModuleError::Boundary(Box::new(pu.point.clone())));
        }
        let tu = t_pow(&pu.point, 1);
        let t_sample = g.find(&tu).ok_or_else(|| ModuleError::NotASample(Box::new(tu.clone())))?;
        let (i0, j0) = (g.samples[t_sample].i, g.samples[t_sample].j);
        // x indices from x_0 up to x_k = x, y indices from y_0 down to y_l = y.
        let xi: Vec<usize> = (i0..=pu.i).filter(|&i| i == i0 || i == pu.i || g.x_critical[i]).collect();
        let yj: Vec<usize> = (pu.j..=j0).rev().filter(|&j| j == j0 || j == pu.j || g.y_critical[j]).collect();
        let (k, l) = (xi.len() - 1, yj.len() - 1);
        let comps = self.composites_from(u, i0, j0).map_err(|c| ModuleError::Check(Box::new(c)))?;
        let sample = |i: usize, j: usize| g.at(xi[i], yj[j]);
        let d = self.dims[u];
        let zero = Mat::zeros(self.field, d, 0);
        let image = |i: usize, j: usize| -> Mat {
            sample(i, j).and_then(|s| comps.get(&s).cloned()).unwrap_or_else(|| zero.clone())
        };
        let fail = |what: String| ModuleError::Check(Box::new(cex("colexicographic filtration", vec![pu.point.clone()], what)));
        let mut dims = vec![vec![0usize; k + 1]; l + 1];
        let mut cumulative: Vec<Mat> = vec![];
        for j in 0..=l {
            // Images from all rows before j span G_{k,j-1}.
            let earlier = cumulative.clone();
            for i in 0..=k {
                let a = image(i, j);
                cumulative.push(a.clone());
                let refs: Vec<&Mat> = cumulative.iter().collect();
                let gij = sum_rank(d, &refs);
                let by_eq = if j == 0 {
                    0
                } else {
                    let mut refs: Vec<&Mat> = earlier.iter().collect();
                    refs.push(&a);
                    sum_rank(d, &refs)
                };
                if j == 0 && gij != 0 {
                    return Err(fail(format!("G_({i},0) = {gij} is not zero")));
                }
                if gij != by_eq {
                    return Err(fail(format!("G_({i},{j}) = {gij} but the recursive formula gives {by_eq}")));
                }
                dims[j][i] = gij;
            }
            if j >= 1 && dims[j][0] != dims[j - 1][k] {
                return Err(fail(format!("G_(0,{j}) differs from G_(k,{})", j - 1)));
            }
        }
        if dims[l][k] != d {
            return Err(fail(format!("filtration ends at {} instead of {}", dims[l][k], d)));
        }
        // Quotient dimension identity for (i, j) in [1, k] x [1, l].
        for j in 1..=l {
            for i in 1..=k {
                let Some(s) = sample(i, j) else { continue };
                let ds = self.dims[s];
                let mut ims = vec![];
                for (a, b) in [(i - 1, j), (i, j - 1)] {
                    if let Some(t) = sample(a, b) {
                        ims.push(self.map_between(s, t)?);
                    }
                }
                let refs: Vec<&Mat> = ims.iter().collect();
                let lhs = ds - sum_rank(ds, &refs);
                let rhs = dims[j][i] - dims[j][i - 1];
                if lhs != rhs {
                    return Err(fail(format!("quotient identity fails at ({i},{j}): {lhs} vs {rhs}")));
                }
            }
        }
        Ok(dims)
    }

    /// Dimension of the space of natural transformations from the block at sample `v`
    /// into this module, as the solution space of the grid naturality equations.
    pub fn nat_space_dim(&self, v: &StripPoint) -> usize {
        let g = &self.grid;
        let f = self.field;
        let supp: Vec<bool> = (0..g.len()).map(|s| block_contains(v, g.point(s))).collect();
        let mut offset = vec![usize::MAX; g.len()];
        let mut n = 0;
        for s in 0..g.len() {
            if supp[s] {
                offset[s] = n;
                n += self.dims[s];
            }
        }
        let mut rows: Vec<Vec<u32>> = vec![];
        for p in 0..g.len() {
            for (q, m) in [(g.left(p), self.left[p].as_ref()), (g.up(p), self.up[p].as_ref())] {
                let (Some(q), Some(m)) = (q, m) else { continue };
                if !supp[q] {
                    continue;
                }
                // M(q -> p) eta_q - [p in supp] eta_p = 0, one row per coordinate of M(p).
                for r in 0..self.dims[p] {
                    let mut row = vec![0u32; n];
                    for c in 0..self.dims[q] {
                        row[offset[q] + c] = m.get(r, c);
                    }
                    if supp[p] {
                        let idx = offset[p] + r;
                        row[idx] = f.sub(row[idx], 1);
                    }
                    rows.push(row);
                }
            }
        }
        if n == 0 {
            return 0;
        }
        if rows.is_empty() {
            return n;
        }
        let mut m = Mat::zeros(f, rows.len(), n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        n - m.rank()
    }

    /// The dual of the module precomposed with the reflection, as a module on the
    /// reflected grid; middle exactness is preserved.
    pub fn reflected_dual(&self) -> GridModule {
        let rg = Arc::new(self.grid.reflected());
        let n = rg.len();
        let mut out = GridModule { grid: rg.clone(), field: self.field, dims: vec![0; n], left: vec![None; n], up: vec![None; n] };
        let orig = |s: usize| self.grid.find(&crate::exact_geometry::reflect(rg.point(s))).unwrap();
        for s in 0..n {
            out.dims[s] = self.dims[orig(s)];
        }
        for s in 0..n {
            let o = orig(s);
            // Reflection reverses the order and dualizing reverses the arrows back, so the
            // new maps are transposes of the maps out of the reflected sample.
            if rg.left(s).is_some() {
                let t = self.grid.down(o).expect("reflected neighbor");
                out.left[s] = self.up[t].as_ref().map(|m| m.transpose());
            }
            if rg.up(s).is_some() {
                let t = self.grid.right(o).expect("reflected neighbor");
                out.up[s] = self.left[t].as_ref().map(|m| m.transpose());
            }
        }
        out
    }

    /// Dense debug dump of the module.
    pub fn to_dump(&self) -> ModuleDump {
        let g = &self.grid;
        let samples = g
            .samples
            .iter()
            .enumerate()
            .map(|(s, p)| DumpSample { i: p.i, j: p.j, x: p.point.x.clone(), y: p.point.y.clone(), dim: self.dims[s] })
            .collect();
        let maps = |v: &Vec<Option<Mat>>, nb: &dyn Fn(usize) -> Option<usize>| {
            (0..g.len())
                .filter_map(|s| v[s].as_ref().map(|m| DumpMap { from: nb(s).unwrap(), to: s, matrix: m.to_rows() }))
                .collect()
        };
        ModuleDump {
            field: self.field.p,
            xs: g.xs.iter().cloned().zip(g.x_critical.iter().copied()).map(|(c, k)| DumpLine { coord: c, critical: k }).collect(),
            ys: g.ys.iter().cloned().zip(g.y_critical.iter().copied()).map(|(c, k)| DumpLine { coord: c, critical: k }).collect(),
            samples,
            left: maps(&self.left, &|s| g.left(s)),
            up: maps(&self.up, &|s| g.up(s)),
        }
    }

    pub fn from_dump(d: &ModuleDump) -> Result<GridModule, ModuleError> {
        let field = Field::new(d.field).map_err(|e| ModuleError::Dump(e.to_string()))?;
        let keep: std::collections::HashSet<(Coord, Coord)> = d.samples.iter().map(|s| (s.x.clone(), s.y.clone())).collect();
        let grid = Arc::new(SampleGrid::new(
            d.xs.iter().map(|l| (l.coord.clone(), l.critical)).collect(),
            d.ys.iter().map(|l| (l.coord.clone(), l.critical)).collect(),
            |p| keep.contains(&(p.x.clone(), p.y.clone())),
        ));
        if grid.len() != d.samples.len() {
            return Err(ModuleError::Dump("sample list does not match the grid".into()));
        }
        let mut m = GridModule::zero(grid.clone(), field);
        for (s, ds) in d.samples.iter().enumerate() {
            let gs = grid.at(ds.i, ds.j).ok_or_else(|| ModuleError::Dump(format!("sample {s} not in grid")))?;
            m.dims[gs] = ds.dim;
        }
        m.fill_zero_maps();
        let to_mat = |rows: &Vec<Vec<u32>>, r: usize, c: usize| -> Result<Mat, ModuleError> {
            if rows.len() != r || rows.iter().any(|x| x.len() != c) {
                return Err(ModuleError::Dump("matrix shape does not match dimensions".into()));
            }
            let mut mat = Mat::zeros(field, r, c);
            for (i, row) in rows.iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    mat.set(i, j, x % field.p);
                }
            }
            Ok(mat)
        };
        let index = |s: usize| -> Result<usize, ModuleError> {
            let ds = d.samples.get(s).ok_or_else(|| ModuleError::Dump(format!("bad sample index {s}")))?;
            grid.at(ds.i, ds.j).ok_or_else(|| ModuleError::Dump(format!("sample {s} not in grid")))
        };
        for e in &d.left {
            let (from, to) = (index(e.from)?, index(e.to)?);
            if grid.left(to) != Some(from) {
                return Err(ModuleError::Dump("left map between non-neighbors".into()));
            }
            m.left[to] = Some(to_mat(&e.matrix, m.dims[to], m.dims[from])?);
        }
        for e in &d.up {
            let (from, to) = (index(e.from)?, index(e.to)?);
            if grid.up(to) != Some(from) {
                return Err(ModuleError::Dump("up map between non-neighbors".into()));
            }
            m.up[to] = Some(to_mat(&e.matrix, m.dims[to], m.dims[from])?);
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpLine {
    pub coord: Coord,
    pub critical: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpSample {
    pub i: usize,
    pub j: usize,
    pub x: Coord,
    pub y: Coord,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpMap {
    pub from: usize,
    pub to: usize,
    pub matrix: Vec<Vec<u32>>,
}

/// JSON debug format of a grid module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleDump {
    pub field: u32,
    pub xs: Vec<DumpLine>,
    pub ys: Vec<DumpLine>,
    pub samples: Vec<DumpSample>,
    pub left: Vec<DumpMap>,
    pub up: Vec<DumpMap>,
}

fn stack_rows(f: Field, mats: &[&Mat], cols: usize) -> Mat {
    let used: Vec<&Mat> = mats.to_vec();
    if used.iter().all(|m| m.rows == 0) {
        return Mat::zeros(f, 0, cols);
    }
    Mat::vstack(&used).expect("maps out of one space share the column count")
}

fn diff_cols(f: Field, a: &Mat, b: &Mat, rows: usize) -> Mat {
    let nb = b.scale(f.neg(1));
    if a.cols + b.cols == 0 {
        return Mat::zeros(f, rows, 0);
    }
    Mat::hstack(&[a, &nb]).expect("maps into one space share the row count")
}

/// Exactness of `U --a--> V --b--> W` at `V`.
pub fn exact_at(a: &Mat, b: &Mat) -> bool {
    assert_eq!(a.rows, b.cols, "composable maps");
    let v = a.rows;
    if !b.compose(a).is_zero() {
        return false;
    }
    let rank_b = if b.rows == 0 || v == 0 { 0 } else { b.rank() };
    let rank_a = if a.cols == 0 || v == 0 { 0 } else { a.rank() };
    v - rank_b == rank_a
}

/// Middle exactness of `Q -> C1 + C2 -> P` with the maps `(q_c1, q_c2)` and `(c1_p, -c2_p)`.
pub fn middle_exact_maps(f: Field, q_c1: &Mat, q_c2: &Mat, c1_p: &Mat, c2_p: &Mat) -> bool {
    let first = stack_rows(f, &[q_c1, q_c2], q_c1.cols);
    let second = diff_cols(f, c1_p, c2_p, c1_p.rows);
    exact_at(&first, &second)
}

/// Coordinate lines with their criticality flags.
pub type GridLines = Vec<(Coord, bool)>;

/// T-closed coordinate lines `(2j, l)`, `(2j+1, -l)`, `(j, inf)` for x and
/// `(2j, l)`, `(2j-1, -l)`, `(j, inf)` for y, with the given `k` ranges.
pub fn t_closed_lines(
    levels: &[(crate::exact_geometry::Q, bool)],
    xk: (i64, i64),
    yk: (i64, i64),
) -> (GridLines, GridLines) {
    let mut xs = vec![];
    let mut ys = vec![];
    for k in xk.0..=xk.1 {
        xs.push((Coord::half_pi(k), false));
        for (l, c) in levels {
            let v = if k.rem_euclid(2) == 0 { l.clone() } else { -l.clone() };
            xs.push((Coord::new(k, v), *c));
        }
    }
    for k in yk.0..=yk.1 {
        ys.push((Coord::half_pi(k), false));
        for (l, c) in levels {
            let v = if k.rem_euclid(2) == 0 { l.clone() } else { -l.clone() };
            ys.push((Coord::new(k, v), *c));
        }
    }
    (xs, ys)
}
