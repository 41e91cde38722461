//! Assembly of the RISC functor `h(f)` of a PL function as a grid module: level grids,
//! refinement of the complex so that every open model is a homotopy model, per-tile
//! relative cohomology, inclusion maps, connecting maps across tiles, and the diagram with
//! its classical annotations and level set barcode.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_geometry::{
    beta_levelset, classify_region, format_rational, rho_data, t_pow, tile_index_opt, GeometryError,
    StripPoint, TypedInterval, XRat, Q,
};
use crate::field_linalg::{Field, LinalgError, Mat};
use crate::plc::{
    induced_map, interval_model, mv_connecting, relative_cohomology, two_ray_model, CohomBasis, LevelGrid,
    PLComplex, PlcError, Sub, Triad, DEFAULT_SIMPLEX_CAP,
};
use crate::strip_module::{t_closed_lines, Diagram, GridLines, GridModule, LevelsetBar, ModuleError, SampleGrid};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error(transparent)]
    Plc(#[from] PlcError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error("joint grid insufficient: no split level of function {fun} inside ({lo}, {hi})")]
    GridInsufficient { fun: usize, lo: String, hi: String },
    #[error("{0}")]
    Check(String),
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub field: Field,
    pub cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { field: Field::default(), cap: DEFAULT_SIMPLEX_CAP }
    }
}

/// A pair of subcomplexes `(A, B)` with `B` contained in `A`.
pub type PairKey = (Sub, Sub);

/// Evaluates `h(f)` at arbitrary points of the strip and its maps between comparable
/// points, for any function of a refined complex.
///
/// In probe mode no cohomology is computed: all spaces are zero and every finite open
/// interval that lacks a split level is recorded, so that the complex can be refined
/// before the real run.
pub struct Evaluator {
    pub complex: PLComplex,
    pub field: Field,
    /// Sorted split levels per function.
    pub levels: Vec<Vec<Q>>,
    probe: Option<RefCell<Vec<(usize, XRat, XRat)>>>,
    bases: RefCell<HashMap<(PairKey, usize), Rc<CohomBasis>>>,
}

impl Evaluator {
    pub fn new(complex: PLComplex, field: Field, levels: Vec<Vec<Q>>) -> Evaluator {
        Evaluator { complex, field, levels, probe: None, bases: RefCell::new(HashMap::new()) }
    }

    pub fn probe(complex: PLComplex, field: Field, levels: Vec<Vec<Q>>) -> Evaluator {
        Evaluator { complex, field, levels, probe: Some(RefCell::new(vec![])), bases: RefCell::new(HashMap::new()) }
    }

    pub fn is_probe(&self) -> bool {
        self.probe.is_some()
    }

    fn stabbed(&self, fun: usize, lo: &XRat, hi: &XRat) -> bool {
        let (XRat::Fin(a), XRat::Fin(b)) = (lo, hi) else { return true };
        let lv = &self.levels[fun];
        let i = lv.partition_point(|s| s <= a);
        i < lv.len() && &lv[i] < b
    }

    /// The model `full{lo < f < hi}` of `f^{-1}(lo, hi)`.
    pub fn rho1_model(&self, fun: usize, lo: &XRat, hi: &XRat) -> Result<Sub, BuildError> {
        if lo >= hi {
            return Ok(Sub::empty());
        }
        if !self.stabbed(fun, lo, hi) {
            match &self.probe {
                Some(rec) => rec.borrow_mut().push((fun, lo.clone(), hi.clone())),
                None => {
                    return Err(BuildError::GridInsufficient { fun, lo: lo.to_string(), hi: hi.to_string() });
                }
            }
        }
        Ok(interval_model(&self.complex, fun, lo, hi))
    }

    /// The model of `R \ [a, b]`, or of `R` when the complement is empty.
    pub fn rho0_model(&self, fun: usize, comp: &Option<(XRat, XRat)>) -> Sub {
        match comp {
            None => Sub::full(&self.complex),
            Some((a, b)) => two_ray_model(&self.complex, fun, a, b),
        }
    }

    /// The model pair of `f^{-1}(rho(w))`.
    pub fn pair_at(&self, fun: usize, w: &StripPoint) -> Result<PairKey, BuildError> {
        let d = rho_data(w);
        let a = match &d.rho1 {
            None => Sub::empty(),
            Some((lo, hi)) => self.rho1_model(fun, lo, hi)?,
        };
        let b = self.rho0_model(fun, &d.comp);
        Ok((a, b))
    }

    /// Relative cohomology of a model pair, cached.
    pub fn basis(&self, pair: &PairKey, n: usize) -> Result<Rc<CohomBasis>, BuildError> {
        if self.is_probe() || n > self.complex.dim().unwrap_or(0) {
            return Ok(Rc::new(CohomBasis::zero(self.field, n, &self.complex)));
        }
        let key = (pair.clone(), n);
        if let Some(b) = self.bases.borrow().get(&key) {
            return Ok(b.clone());
        }
        let b = Rc::new(relative_cohomology(&self.complex, &pair.0, &pair.1, n, self.field)?);
        self.bases.borrow_mut().insert(key, b.clone());
        Ok(b)
    }

    /// The tile index of `p`, or `None` for boundary points and negative tiles.
    pub fn degree(p: &StripPoint) -> Option<usize> {
        tile_index_opt(p).and_then(|n| usize::try_from(n).ok())
    }

    /// The space `h(f)(p)` as a basis of `H^n` at `T^n(p)`, with `n` the tile index.
    pub fn space(&self, fun: usize, p: &StripPoint) -> Result<Rc<CohomBasis>, BuildError> {
        let Some(n) = Self::degree(p) else {
            return Ok(Rc::new(CohomBasis::zero(self.field, 0, &self.complex)));
        };
        if n > self.complex.dim().map_or(0, |d| d + 1) || self.complex.is_empty() {
            return Ok(Rc::new(CohomBasis::zero(self.field, n, &self.complex)));
        }
        let pair = self.pair_at(fun, &t_pow(p, n as i64))?;
        self.basis(&pair, n)
    }

    /// The Mayer-Vietoris triad of the rectangle `u <= v1, v2 <= w` with
    /// `v1 = (u.x, w.y)` and `v2 = (w.x, u.y)`.
    pub fn rectangle_triad(&self, fun: usize, u: &StripPoint, w: &StripPoint) -> Result<Triad, BuildError> {
        let v1 = StripPoint::new(u.x.clone(), w.y.clone());
        let v2 = StripPoint::new(w.x.clone(), u.y.clone());
        let triad = Triad {
            w: self.pair_at(fun, w)?,
            v1: self.pair_at(fun, &v1)?,
            v2: self.pair_at(fun, &v2)?,
            u: self.pair_at(fun, u)?,
        };
        if !self.is_probe() {
            triad.validate(&self.complex)?;
        }
        Ok(triad)
    }

    /// The connecting map `H^n(u) -> H^{n+1}(w)` of a triad, between the given bases.
    pub fn connecting(&self, triad: &Triad, from: &CohomBasis, to: &CohomBasis) -> Result<Mat, BuildError> {
        if self.is_probe() || from.dim() == 0 || to.dim() == 0 {
            return Ok(Mat::zeros(self.field, to.dim(), from.dim()));
        }
        let b1 = triad.v1.1.simplex_mask(&self.complex);
        let a1 = triad.v1.0.simplex_mask(&self.complex);
        Ok(mv_connecting(&self.complex, &b1, &a1, from, to)?)
    }

    /// The map `h(f)(q) -> h(f)(p)` for `p <= q`.
    pub fn map(&self, fun: usize, p: &StripPoint, q: &StripPoint) -> Result<Mat, BuildError> {
        let from = self.space(fun, q)?;
        let to = self.space(fun, p)?;
        let zero = || Mat::zeros(self.field, to.dim(), from.dim());
        let (Some(np), Some(nq)) = (Self::degree(p), Self::degree(q)) else { return Ok(zero()) };
        if np == nq {
            if from.dim() == 0 || to.dim() == 0 {
                return Ok(zero());
            }
            return Ok(induced_map(&from, &to)?);
        }
        if np == nq + 1 && q.leq(&t_pow(p, 1)) {
            let u = t_pow(q, nq as i64);
            let w = t_pow(p, nq as i64 + 1);
            if (from.dim() == 0 || to.dim() == 0) && !self.is_probe() {
                return Ok(zero());
            }
            let triad = self.rectangle_triad(fun, &u, &w)?;
            return self.connecting(&triad, &from, &to);
        }
        Ok(zero())
    }

    /// Intervals recorded in probe mode.
    pub fn recorded(&self) -> Vec<(usize, XRat, XRat)> {
        self.probe.as_ref().map(|r| r.borrow().clone()).unwrap_or_default()
    }
}

/// Points stabbing every recorded interval not already stabbed by `levels`.
pub fn stabbing_points(levels: &[Q], intervals: &[(XRat, XRat)]) -> Vec<Q> {
    let mut iv: Vec<(Q, Q)> = intervals
        .iter()
        .filter_map(|(a, b)| match (a, b) {
            (XRat::Fin(a), XRat::Fin(b)) if a < b => Some((a.clone(), b.clone())),
            _ => None,
        })
        .collect();
    iv.sort_by(|x, y| (&x.1, &x.0).cmp(&(&y.1, &y.0)));
    iv.dedup();
    let mut all: BTreeSet<Q> = levels.iter().cloned().collect();
    let mut added = vec![];
    for (a, b) in iv {
        if all.range((std::ops::Bound::Excluded(a.clone()), std::ops::Bound::Excluded(b.clone()))).next().is_some() {
            continue;
        }
        let m = (&a + &b) / Q::from_integer(2.into());
        all.insert(m.clone());
        added.push(m);
    }
    added
}

/// Refines `k` for the given functions: probes a run, splits at the grid levels and at
/// points stabbing every interval the run needs, and returns the real evaluator.
pub fn refine(
    k: &PLComplex,
    funs: &[usize],
    opts: &BuildOptions,
    run: impl Fn(&Evaluator) -> Result<(), BuildError>,
) -> Result<Evaluator, BuildError> {
    let nf = k.num_functions();
    let mut levels: Vec<Vec<Q>> = (0..nf).map(|f| LevelGrid::for_function(k, f).lambda).collect();
    let probe = Evaluator::probe(k.clone(), opts.field, levels.clone());
    run(&probe)?;
    let rec = probe.recorded();
    for &f in funs {
        let iv: Vec<(XRat, XRat)> = rec.iter().filter(|r| r.0 == f).map(|r| (r.1.clone(), r.2.clone())).collect();
        let extra = stabbing_points(&levels[f], &iv);
        levels[f].extend(extra);
        levels[f].sort();
        levels[f].dedup();
    }
    let mut split = k.clone();
    for &f in funs {
        split = split.split_levels(f, &levels[f], opts.cap)?;
    }
    Ok(Evaluator::new(split, opts.field, levels))
}

/// Grid lines for a level grid: the values `Lambda` with the vertex values marked
/// critical, on the translates covering tiles `-1..=depth`.
pub fn grid_lines(grid: &LevelGrid, depth: i64) -> (GridLines, GridLines) {
    let levels: Vec<(Q, bool)> = grid.lambda.iter().map(|l| (l.clone(), grid.is_critical(l))).collect();
    t_closed_lines(&levels, (-2, depth + 2), (-depth - 2, 2))
}

/// The sample grid of `h(f)`: T-closed grid lines intersected with the strip, keeping
/// the tiles `-1..=depth` and the boundary points of the window.
pub fn build_grid(grid: &LevelGrid, depth: i64) -> SampleGrid {
    if grid.lambda.is_empty() {
        return SampleGrid::new(vec![], vec![], |_| true);
    }
    let (xs, ys) = grid_lines(grid, depth);
    SampleGrid::new(xs, ys, |p| match tile_index_opt(p) {
        Some(t) => (-1..=depth).contains(&t),
        None => true,
    })
}

/// Evaluates the module on a sample grid with the given evaluator.
pub fn assemble(ev: &Evaluator, grid: &Arc<SampleGrid>, fun: usize) -> Result<GridModule, BuildError> {
    let n = grid.len();
    let mut m = GridModule::zero(grid.clone(), ev.field);
    let spaces: Vec<Rc<CohomBasis>> =
        (0..n).map(|s| ev.space(fun, grid.point(s))).collect::<Result<_, _>>()?;
    m.dims = spaces.iter().map(|b| b.dim()).collect();
    for s in 0..n {
        let p = grid.point(s);
        if let Some(l) = grid.left(s) {
            m.left[s] = Some(ev.map(fun, p, grid.point(l))?);
        }
        if let Some(u) = grid.up(s) {
            m.up[s] = Some(ev.map(fun, p, grid.point(u))?);
        }
    }
    Ok(m)
}

/// The module `h(f)` together with its diagram and level grid.
#[derive(Clone, Debug)]
pub struct RiscResult {
    pub module: GridModule,
    pub diagram: Diagram,
    pub grid: LevelGrid,
    pub max_degree: usize,
    /// The refined complex on which the models were evaluated.
    pub complex: PLComplex,
    pub fun: usize,
}

/// Adds degree, region, classical pair, and level set interval to every diagram point.
pub fn annotate(d: &mut Diagram) -> Result<(), BuildError> {
    for e in &mut d.points {
        let p = e.point();
        let info = classify_region(&p)?;
        let (n, iv) = beta_levelset(&p)?;
        e.degree = Some(info.degree);
        e.region = Some(info.region);
        e.pair = Some(info.pair);
        e.levelset = Some(LevelsetBar { degree: n, interval: iv });
    }
    d.points.sort_by(|a, b| {
        (a.degree, &a.y, &a.x).cmp(&(b.degree, &b.y, &b.x))
    });
    Ok(())
}

/// Evaluates `h(f)` for function `fun` of `k` after refining the complex.
pub fn evaluate(k: &PLComplex, fun: usize, opts: &BuildOptions) -> Result<RiscResult, BuildError> {
    let levels = LevelGrid::for_function(k, fun);
    let depth = k.dim().map_or(0, |d| d as i64 + 1);
    let grid = Arc::new(build_grid(&levels, depth));
    let ev = refine(k, &[fun], opts, |ev| assemble(ev, &grid, fun).map(|_| ()))?;
    let module = assemble(&ev, &grid, fun)?;
    let mut diagram = module.dgm()?;
    annotate(&mut diagram)?;
    Ok(RiscResult { module, diagram, grid: levels, max_degree: depth as usize, complex: ev.complex, fun })
}

/// One bar of the level set barcode.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bar {
    pub degree: i64,
    #[serde(flatten)]
    pub interval: TypedInterval,
    pub multiplicity: usize,
}

/// The level set barcode obtained from the diagram.
pub fn barcode(r: &RiscResult) -> Result<Vec<Bar>, BuildError> {
    barcode_of(&r.diagram)
}

pub fn barcode_of(d: &Diagram) -> Result<Vec<Bar>, BuildError> {
    let mut bars: Vec<Bar> = vec![];
    for e in &d.points {
        let (degree, interval) = beta_levelset(&e.point())?;
        match bars.iter_mut().find(|b| b.degree == degree && b.interval == interval) {
            Some(b) => b.multiplicity += e.multiplicity,
            None => bars.push(Bar { degree, interval, multiplicity: e.multiplicity }),
        }
    }
    Ok(bars)
}

/// Compares, for a regular value `t`, the number of bars containing `t` in each degree
/// with the cohomology of the interlevel model around `t`. Returns the fiber dimensions.
pub fn fiber_dimension_check(r: &RiscResult, t: &Q) -> Result<Vec<usize>, BuildError> {
    if r.grid.is_critical(t) {
        return Err(BuildError::Check(format!("{} is a critical value", format_rational(t))));
    }
    let v = &r.grid.vertex_values;
    let i = v.partition_point(|c| c < t);
    let lo = if i == 0 { XRat::NegInf } else { XRat::Fin(v[i - 1].clone()) };
    let hi = if i == v.len() { XRat::PosInf } else { XRat::Fin(v[i].clone()) };
    let k = &r.complex;
    let model = interval_model(k, r.fun, &lo, &hi);
    let top = k.dim().unwrap_or(0);
    let bars = barcode(r)?;
    let mut dims = vec![];
    for n in 0..=top {
        let h = relative_cohomology(k, &model, &Sub::empty(), n, r.module.field)?.dim();
        let count: usize = bars
            .iter()
            .filter(|b| b.degree == n as i64 && b.interval.contains(t))
            .map(|b| b.multiplicity)
            .sum();
        if h != count {
            return Err(BuildError::Check(format!(
                "at t = {} in degree {n}: {count} bars but fiber dimension {h}",
                format_rational(t)
            )));
        }
        dims.push(h);
    }
    Ok(dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_geometry::{q, qf, Region};

    fn hood(values: [i64; 5]) -> PLComplex {
        let vals = values.iter().map(|&v| q(v)).collect();
        PLComplex::new(
            &[1, 2, 3, 4, 5],
            vec![vals],
            &[vec![1, 2, 5], vec![2, 3, 5], vec![3, 4, 5], vec![4, 1, 5]],
        )
        .unwrap()
    }

    fn circle() -> PLComplex {
        PLComplex::single(vec![q(0), q(1), q(2), q(1)], &[vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]])
            .unwrap()
    }

    fn point_set(r: &RiscResult) -> Vec<(StripPoint, usize)> {
        r.diagram.multiset()
    }

    #[test]
    fn one_point_complex() {
        let k = PLComplex::single(vec![q(0)], &[vec![0]]).unwrap();
        let r = evaluate(&k, 0, &BuildOptions::default()).unwrap();
        let v = StripPoint::ints((0, 0), (0, 0));
        assert_eq!(point_set(&r), vec![(v.clone(), 1)]);
        let g = &r.module.grid;
        for s in 0..g.len() {
            assert_eq!(r.module.dims[s], usize::from(crate::exact_geometry::block_contains(&v, g.point(s))));
        }
        let bars = barcode(&r).unwrap();
        assert_eq!(bars.len(), 1);
        assert_eq!(bars[0].interval.to_string(), "[0, 0]");
        assert_eq!(fiber_dimension_check(&r, &qf(1, 2)).unwrap(), vec![0]);
    }

    #[test]
    fn empty_complex() {
        let k = PLComplex::single(vec![], &[]).unwrap();
        let r = evaluate(&k, 0, &BuildOptions::default()).unwrap();
        assert!(r.diagram.is_empty());
        assert!(r.module.is_zero());
        assert!(barcode(&r).unwrap().is_empty());
    }

    #[test]
    fn hood_diagram() {
        let r = evaluate(&hood([0, 1, 0, 2, 2]), 0, &BuildOptions::default()).unwrap();
        let mut expected = vec![(StripPoint::ints((0, 2), (0, 0)), 1), (StripPoint::ints((1, -1), (0, 0)), 1)];
        expected.sort_by(|a, b| (&a.0.y, &a.0.x).cmp(&(&b.0.y, &b.0.x)));
        assert_eq!(point_set(&r), expected);
        let bars: Vec<String> = barcode(&r).unwrap().iter().map(|b| format!("{} {}", b.degree, b.interval)).collect();
        assert!(bars.contains(&"0 [0, 2]".to_string()), "{bars:?}");
        assert!(bars.contains(&"0 [0, 1)".to_string()), "{bars:?}");
        assert_eq!(fiber_dimension_check(&r, &qf(1, 2)).unwrap()[0], 2);
    }

    #[test]
    fn flattened_hood_diagram() {
        let r = evaluate(&hood([0, 1, 0, 0, 2]), 0, &BuildOptions::default()).unwrap();
        let mut expected = vec![(StripPoint::ints((0, 2), (0, 0)), 1), (StripPoint::ints((1, -1), (-2, 2)), 1)];
        expected.sort_by(|a, b| (&a.0.y, &a.0.x).cmp(&(&b.0.y, &b.0.x)));
        assert_eq!(point_set(&r), expected);
    }

    #[test]
    fn circle_diagram_and_checks() {
        let r = evaluate(&circle(), 0, &BuildOptions::default()).unwrap();
        let mut expected = vec![(StripPoint::ints((0, 2), (0, 0)), 1), (StripPoint::ints((1, -2), (-1, 0)), 1)];
        expected.sort_by(|a, b| (&a.0.y, &a.0.x).cmp(&(&b.0.y, &b.0.x)));
        assert_eq!(point_set(&r), expected);
        let regions: Vec<(Option<i64>, Option<Region>)> = r.diagram.points.iter().map(|p| (p.degree, p.region)).collect();
        assert_eq!(regions, vec![(Some(0), Some(Region::Ext)), (Some(1), Some(Region::Ext))]);
        assert_eq!(fiber_dimension_check(&r, &qf(3, 2)).unwrap()[0], 2);
        r.module.decomposition_check(&r.diagram).unwrap();
        r.module.cohomological_check().unwrap();
        r.module.seq_continuity_check().unwrap();
        r.module.dgm_support_check().unwrap();
    }

    #[test]
    fn stabbing_adds_missing_levels() {
        let lv = vec![q(0), q(1)];
        let add = stabbing_points(&lv, &[(XRat::Fin(q(0)), XRat::Fin(q(1))), (XRat::Fin(qf(1, 4)), XRat::Fin(q(1)))]);
        assert_eq!(add, vec![qf(1, 2)]);
    }
}
