//! Shifts and morphisms between RISC functors: the distance pair of two functions, the
//! transformation `h(g) o alpha_a -> h(f)`, interleavings against `Omega_delta`, the
//! compatibility squares with composition and precomposition, and the morphisms induced
//! by simplicial maps.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::exact_geometry::{
    alpha_raw, block_contains, format_rational, rho_data, t_pow, tile_index_opt, ShiftVector, StripPoint, Q,
};
use crate::field_linalg::{Field, Mat};
use crate::plc::{check_simplicial, pullback_cochain, CohomBasis, LevelGrid, PLComplex, PlcError, Triad};
use crate::risc_builder::{
    assemble, build_grid, stabbing_points, BuildError, BuildOptions, Evaluator, PairKey,
};
use crate::strip_module::{Counterexample, Diagram, GridModule, SampleGrid};

/// `d(f, g) = (min (g - f), max (g - f))` over the vertices.
pub fn distance_pair(k: &PLComplex, f: usize, g: usize) -> ShiftVector {
    let diffs: Vec<Q> = (0..k.num_vertices()).map(|v| &k.values[g][v] - &k.values[f][v]).collect();
    match (diffs.iter().min(), diffs.iter().max()) {
        (Some(lo), Some(hi)) => ShiftVector::new(lo.clone(), hi.clone()),
        _ => ShiftVector::zero(),
    }
}

/// `sup |f - g|` over the vertices.
pub fn sup_distance(k: &PLComplex, f: usize, g: usize) -> Q {
    (0..k.num_vertices())
        .map(|v| {
            let d = &k.values[g][v] - &k.values[f][v];
            if d < Q::from_integer(0.into()) { -d } else { d }
        })
        .max()
        .unwrap_or_else(|| Q::from_integer(0.into()))
}

/// Per-sample matrices of a morphism between two modules on one sample grid.
#[derive(Clone, Debug)]
pub struct MorphismData {
    pub grid: Arc<SampleGrid>,
    pub field: Field,
    pub maps: Vec<Mat>,
}

impl MorphismData {
    pub fn is_identity(&self) -> bool {
        self.maps.iter().all(|m| m.rows == m.cols && *m == Mat::identity(self.field, m.rows))
    }
}

/// Checks that `target(q -> p) o phi_q = phi_p o source(q -> p)` for all covering pairs.
pub fn naturality_check(source: &GridModule, target: &GridModule, m: &MorphismData) -> Result<usize, Counterexample> {
    let g = &m.grid;
    let mut checked = 0;
    for p in 0..g.len() {
        for (q, st, tt) in [
            (g.left(p), source.left[p].as_ref(), target.left[p].as_ref()),
            (g.up(p), source.up[p].as_ref(), target.up[p].as_ref()),
        ] {
            let (Some(q), Some(st), Some(tt)) = (q, st, tt) else { continue };
            let lhs = tt.compose(&m.maps[q]);
            let rhs = m.maps[p].compose(st);
            checked += 1;
            if lhs != rhs {
                return Err(Counterexample {
                    check: "naturality".into(),
                    at: vec![g.point(p).clone(), g.point(q).clone()],
                    detail: format!("{lhs:?} vs {rhs:?}"),
                });
            }
        }
    }
    Ok(checked)
}

fn same_pair(ev: &Evaluator, a: &PairKey, b: &PairKey) -> bool {
    a.0.same_simplices(&b.0, &ev.complex) && a.1.same_simplices(&b.1, &ev.complex)
}

/// The pair `xi(p) = (g^{-1} rho1(alpha_a p), f^{-1} rho0(p))`.
fn xi_pair(ev: &Evaluator, f: usize, g: usize, a: &ShiftVector, p: &StripPoint) -> Result<PairKey, BuildError> {
    let ap = alpha_raw(a, p);
    let d_g = rho_data(&ap);
    let d_f = rho_data(p);
    let big = match &d_g.rho1 {
        None => crate::plc::Sub::empty(),
        Some((lo, hi)) => ev.rho1_model(g, lo, hi)?,
    };
    Ok((big, ev.rho0_model(f, &d_f.comp)))
}

/// Which construction defines the component of the transformation at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Restriction,
    Connecting,
    Zero,
}

/// The branch of `hvec_at` used at `u`.
pub fn hvec_branch(a: &ShiftVector, u: &StripPoint) -> Branch {
    let Some(n) = Evaluator::degree(u) else { return Branch::Zero };
    match tile_index_opt(&alpha_raw(a, &t_pow(u, n as i64))) {
        Some(0) => Branch::Restriction,
        Some(-1) => Branch::Connecting,
        _ => Branch::Zero,
    }
}

/// The component `h(g)(alpha_a u) -> h(f)(u)` of the transformation induced by `a`.
///
/// With `w = T^n u` in the fundamental domain, it is the restriction along
/// `f^{-1} rho(w) <= g^{-1} rho(alpha_a w)` when `alpha_a w` lies in the fundamental
/// domain, and the Mayer-Vietoris differential of the `xi`-rectangle from `T^{-1} w` to `w`
/// when `alpha_a w` lies one tile up. Otherwise it is zero.
pub fn hvec_at(ev: &Evaluator, f: usize, g: usize, a: &ShiftVector, u: &StripPoint) -> Result<Mat, BuildError> {
    let au = alpha_raw(a, u);
    let source = ev.space(g, &au)?;
    let target = ev.space(f, u)?;
    let zero = || Mat::zeros(ev.field, target.dim(), source.dim());
    let Some(n) = Evaluator::degree(u) else { return Ok(zero()) };
    let w = t_pow(u, n as i64);
    let aw = alpha_raw(a, &w);
    match tile_index_opt(&aw) {
        Some(0) => {
            if source.dim() == 0 || target.dim() == 0 {
                return Ok(zero());
            }
            Ok(crate::plc::induced_map(&source, &target)?)
        }
        Some(-1) => {
            if !ev.is_probe() && (source.dim() == 0 || target.dim() == 0) {
                return Ok(zero());
            }
            let b = t_pow(&w, -1);
            let c1 = StripPoint::new(b.x.clone(), w.y.clone());
            let c2 = StripPoint::new(w.x.clone(), b.y.clone());
            let triad = Triad {
                w: xi_pair(ev, f, g, a, &w)?,
                v1: xi_pair(ev, f, g, a, &c1)?,
                v2: xi_pair(ev, f, g, a, &c2)?,
                u: xi_pair(ev, f, g, a, &b)?,
            };
            if ev.is_probe() {
                return Ok(zero());
            }
            triad.validate(&ev.complex)?;
            let g_bottom = ev.pair_at(g, &alpha_raw(a, &b))?;
            let f_top = ev.pair_at(f, &w)?;
            if !same_pair(ev, &triad.u, &g_bottom) || !same_pair(ev, &triad.w, &f_top) {
                return Err(BuildError::Check(format!("xi-rectangle at {w} does not match the end pairs")));
            }
            ev.connecting(&triad, &source, &target)
        }
        _ => Ok(zero()),
    }
}

/// The module `h(g) o alpha_a` on a sample grid.
pub fn shifted_module(ev: &Evaluator, g: usize, a: &ShiftVector, grid: &Arc<SampleGrid>) -> Result<GridModule, BuildError> {
    let n = grid.len();
    let pts: Vec<StripPoint> = (0..n).map(|s| alpha_raw(a, grid.point(s))).collect();
    let mut m = GridModule::zero(grid.clone(), ev.field);
    for s in 0..n {
        m.dims[s] = ev.space(g, &pts[s])?.dim();
    }
    for s in 0..n {
        if let Some(l) = grid.left(s) {
            m.left[s] = Some(ev.map(g, &pts[s], &pts[l])?);
        }
        if let Some(u) = grid.up(s) {
            m.up[s] = Some(ev.map(g, &pts[s], &pts[u])?);
        }
    }
    Ok(m)
}

/// The transformation `h(g) o alpha_a -> h(f)` on a sample grid, with `a = d(f, g)`.
pub fn build_transformation(ev: &Evaluator, f: usize, g: usize, grid: &Arc<SampleGrid>) -> Result<MorphismData, BuildError> {
    let a = distance_pair(&ev.complex, f, g);
    let maps = (0..grid.len()).map(|s| hvec_at(ev, f, g, &a, grid.point(s))).collect::<Result<_, _>>()?;
    Ok(MorphismData { grid: grid.clone(), field: ev.field, maps })
}

/// The sample grid of function `fun` of an unrefined complex.
pub fn function_grid(k: &PLComplex, fun: usize) -> Arc<SampleGrid> {
    Arc::new(build_grid(&LevelGrid::for_function(k, fun), depth_of(k)))
}

fn depth_of(k: &PLComplex) -> i64 {
    k.dim().map_or(0, |d| d as i64 + 1)
}

/// Refines a complex for the interleaving of functions `f` and `g` at level `delta`.
pub fn refine_interleaving(k: &PLComplex, f: usize, g: usize, delta: &Q, opts: &BuildOptions) -> Result<Evaluator, BuildError> {
    let fg = function_grid(k, f);
    let gg = function_grid(k, g);
    crate::risc_builder::refine(k, &[f, g], opts, |ev| {
        run_interleaving(ev, f, g, delta, &fg, &gg).map(|_| ())
    })
}

/// A sample where the interleaving map is nonzero between one-dimensional spaces whose
/// blocks lie in different classical degrees.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub sample: StripPoint,
    pub shifted: StripPoint,
    pub f_block: StripPoint,
    pub g_block: StripPoint,
    pub f_degree: i64,
    pub g_degree: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleFailure {
    pub sample: StripPoint,
    pub lhs: Vec<Vec<u32>>,
    pub rhs: Vec<Vec<u32>>,
}

/// Outcome of an interleaving check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterleaveReport {
    pub delta: String,
    pub ok: bool,
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<TriangleFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// `phi_u = hvec(f, g)_u o h(g)(alpha_a u <= Omega_delta u)`: `h(g)(Omega u) -> h(f)(u)`.
fn shifted_hvec(ev: &Evaluator, f: usize, g: usize, delta: &Q, u: &StripPoint) -> Result<Mat, BuildError> {
    let a = distance_pair(&ev.complex, f, g);
    let om = ShiftVector::omega(delta);
    let h = hvec_at(ev, f, g, &a, u)?;
    let shift = ev.map(g, &alpha_raw(&a, u), &alpha_raw(&om, u))?;
    Ok(h.compose(&shift))
}

fn triangles(ev: &Evaluator, f: usize, g: usize, delta: &Q, grid: &SampleGrid) -> Result<(usize, Option<TriangleFailure>), BuildError> {
    let om = ShiftVector::omega(delta);
    let mut checked = 0;
    for s in 0..grid.len() {
        let u = grid.point(s);
        let ou = alpha_raw(&om, u);
        let phi = shifted_hvec(ev, f, g, delta, u)?;
        let psi = shifted_hvec(ev, g, f, delta, &ou)?;
        let lhs = phi.compose(&psi);
        let rhs = ev.map(f, u, &alpha_raw(&om, &ou))?;
        checked += 1;
        if lhs != rhs && !ev.is_probe() {
            return Ok((checked, Some(TriangleFailure { sample: u.clone(), lhs: lhs.to_rows(), rhs: rhs.to_rows() })));
        }
    }
    Ok((checked, None))
}

fn run_interleaving(
    ev: &Evaluator,
    f: usize,
    g: usize,
    delta: &Q,
    fg: &Arc<SampleGrid>,
    gg: &Arc<SampleGrid>,
) -> Result<InterleaveReport, BuildError> {
    let (c1, fail1) = triangles(ev, f, g, delta, fg)?;
    let (c2, fail2) = if fail1.is_none() { triangles(ev, g, f, delta, gg)? } else { (0, None) };
    let counterexample = fail1.or(fail2);
    Ok(InterleaveReport {
        delta: format_rational(delta),
        ok: counterexample.is_none(),
        checked: c1 + c2,
        counterexample,
        witness: None,
    })
}

/// Verifies both triangle identities of the interleaving built from `h(f)` and `h(g)`
/// at every sample of either function's grid, and searches for a witness sample.
pub fn interleaving_check(k: &PLComplex, f: usize, g: usize, delta: &Q, opts: &BuildOptions) -> Result<InterleaveReport, BuildError> {
    if delta < &sup_distance(k, f, g) {
        return Err(BuildError::Check(format!("delta {} is below sup |f - g|", format_rational(delta))));
    }
    let ev = refine_interleaving(k, f, g, delta, opts)?;
    let fg = function_grid(k, f);
    let gg = function_grid(k, g);
    let mut report = run_interleaving(&ev, f, g, delta, &fg, &gg)?;
    if report.ok {
        report.witness = find_witness(&ev, f, g, delta, &fg, &gg)?;
    }
    Ok(report)
}

fn diagram_of(ev: &Evaluator, fun: usize, grid: &Arc<SampleGrid>) -> Result<Diagram, BuildError> {
    let mut d = assemble(ev, grid, fun)?.dgm()?;
    crate::risc_builder::annotate(&mut d)?;
    Ok(d)
}

fn unique_block(d: &Diagram, p: &StripPoint) -> Option<(StripPoint, i64)> {
    let hits: Vec<_> = d.points.iter().filter(|e| block_contains(&e.point(), p)).collect();
    match hits.as_slice() {
        [e] if e.multiplicity == 1 => Some((e.point(), e.degree.unwrap_or(0))),
        _ => None,
    }
}

/// The first sample `u` where `phi_u` is nonzero between one-dimensional spaces, with
/// `u` and `Omega u` in single blocks of different classical degrees.
pub fn find_witness(
    ev: &Evaluator,
    f: usize,
    g: usize,
    delta: &Q,
    fg: &Arc<SampleGrid>,
    gg: &Arc<SampleGrid>,
) -> Result<Option<Witness>, BuildError> {
    let df = diagram_of(ev, f, fg)?;
    let dg = diagram_of(ev, g, gg)?;
    let om = ShiftVector::omega(delta);
    for s in 0..fg.len() {
        let u = fg.point(s);
        let ou = alpha_raw(&om, u);
        let phi = shifted_hvec(ev, f, g, delta, u)?;
        if phi.rows != 1 || phi.cols != 1 || phi.is_zero() {
            continue;
        }
        let (Some((vf, nf)), Some((vg, ng))) = (unique_block(&df, u), unique_block(&dg, &ou)) else { continue };
        if nf != ng {
            return Ok(Some(Witness { sample: u.clone(), shifted: ou, f_block: vf, g_block: vg, f_degree: nf, g_degree: ng }));
        }
    }
    Ok(None)
}

/// Checks `hvec(f1, f2) o (hvec(f2, f3) o alpha_a) = hvec(f1, f3) o (shift c <= a + b)`
/// at every sample of the grid of `f1`.
pub fn composition_check(k: &PLComplex, funs: [usize; 3], opts: &BuildOptions) -> Result<usize, BuildError> {
    let [f1, f2, f3] = funs;
    let grid = function_grid(k, f1);
    let run = |ev: &Evaluator| -> Result<usize, BuildError> {
        let a = distance_pair(&ev.complex, f1, f2);
        let b = distance_pair(&ev.complex, f2, f3);
        let c = distance_pair(&ev.complex, f1, f3);
        let ab = a.add(&b);
        if !c.leq(&ab) {
            return Err(BuildError::Check("triangle inequality fails".into()));
        }
        let mut checked = 0;
        for s in 0..grid.len() {
            let u = grid.point(s);
            let au = alpha_raw(&a, u);
            let lhs = hvec_at(ev, f1, f2, &a, u)?.compose(&hvec_at(ev, f2, f3, &b, &au)?);
            let shift = ev.map(f3, &alpha_raw(&c, u), &alpha_raw(&ab, u))?;
            let rhs = hvec_at(ev, f1, f3, &c, u)?.compose(&shift);
            checked += 1;
            if lhs != rhs && !ev.is_probe() {
                return Err(BuildError::Check(format!("composition square fails at {u}: {lhs:?} vs {rhs:?}")));
            }
        }
        Ok(checked)
    };
    let ev = crate::risc_builder::refine(k, &funs, opts, |ev| run(ev).map(|_| ()))?;
    run(&ev)
}

/// Refines `x` and `y` at the same levels and transports the vertex map `phi: x -> y`
/// to the refined complexes through the subdivided edges.
pub struct MappedPair {
    pub x: Evaluator,
    pub y: Evaluator,
    pub phi: Vec<usize>,
}

fn check_value_preserving(x: &PLComplex, y: &PLComplex, phi: &[usize], funs: &[usize]) -> Result<(), BuildError> {
    for &f in funs {
        for v in 0..x.num_vertices() {
            if x.values[f][v] != y.values[f][phi[v]] {
                return Err(BuildError::Plc(PlcError::NotSimplicial(format!(
                    "vertex {} changes the value of function {f}",
                    x.ids[v]
                ))));
            }
        }
    }
    Ok(())
}

fn transport(x: &PLComplex, y: &PLComplex, phi: &[usize], n_old: usize) -> Result<Vec<usize>, BuildError> {
    let by_edge: HashMap<(usize, usize), usize> = (0..y.num_vertices())
        .filter_map(|v| y.origins[v].edge.map(|(a, b)| ((a.min(b), a.max(b)), v)))
        .collect();
    let mut out = phi.to_vec();
    for v in n_old..x.num_vertices() {
        let (a, b) = x.origins[v].edge.expect("new vertices come from edges");
        let (pa, pb) = (out[a], out[b]);
        let img = by_edge.get(&(pa.min(pb), pa.max(pb))).copied().ok_or_else(|| {
            BuildError::Plc(PlcError::NotSimplicial("a subdivided edge has no subdivided image".into()))
        })?;
        out.push(img);
    }
    Ok(out)
}

/// Refines both complexes for the given run and transports the vertex map.
pub fn refine_map(
    x: &PLComplex,
    y: &PLComplex,
    phi: &[usize],
    funs: &[usize],
    opts: &BuildOptions,
    run: impl Fn(&Evaluator, &Evaluator, &[usize]) -> Result<(), BuildError>,
) -> Result<MappedPair, BuildError> {
    check_simplicial(x, y, phi)?;
    check_value_preserving(x, y, phi, funs)?;
    let levels: Vec<Vec<Q>> = (0..y.num_functions()).map(|f| LevelGrid::for_function(y, f).lambda).collect();
    let px = Evaluator::probe(x.clone(), opts.field, levels.clone());
    let py = Evaluator::probe(y.clone(), opts.field, levels.clone());
    run(&px, &py, phi)?;
    let mut levels = levels;
    let rec: Vec<_> = px.recorded().into_iter().chain(py.recorded()).collect();
    for &f in funs {
        let iv: Vec<_> = rec.iter().filter(|r| r.0 == f).map(|r| (r.1.clone(), r.2.clone())).collect();
        let extra = stabbing_points(&levels[f], &iv);
        levels[f].extend(extra);
        levels[f].sort();
        levels[f].dedup();
    }
    let mut xs = x.clone();
    let mut ys = y.clone();
    let mut map = phi.to_vec();
    for &f in funs {
        for s in &levels[f] {
            let n_old = xs.num_vertices();
            xs = xs.split_at_level(f, s);
            ys = ys.split_at_level(f, s);
            if xs.num_simplices() > opts.cap || ys.num_simplices() > opts.cap {
                return Err(BuildError::Plc(PlcError::CapExceeded(xs.num_simplices().max(ys.num_simplices()), opts.cap)));
            }
            map = transport(&xs, &ys, &map, n_old)?;
        }
    }
    check_simplicial(&xs, &ys, &map)?;
    Ok(MappedPair {
        x: Evaluator::new(xs, opts.field, levels.clone()),
        y: Evaluator::new(ys, opts.field, levels),
        phi: map,
    })
}

/// The component `h(g)(u) -> h(g o phi)(u)` of the morphism induced by `phi: X -> Y`.
pub fn induced_at(ex: &Evaluator, ey: &Evaluator, phi: &[usize], fun: usize, u: &StripPoint) -> Result<Mat, BuildError> {
    let from = ey.space(fun, u)?;
    let to = ex.space(fun, u)?;
    let mut m = Mat::zeros(ex.field, to.dim(), from.dim());
    if from.dim() == 0 || to.dim() == 0 {
        return Ok(m);
    }
    let n = from.degree;
    for (j, z) in from.reps.iter().enumerate() {
        let pulled = pullback_cochain(&ex.complex, &ey.complex, phi, z, n, ex.field)?;
        let restricted = pulled.filter(|s| to.is_cell(s));
        let c = coords(&to, &restricted)?;
        for (i, v) in c.into_iter().enumerate() {
            m.set(i, j, v);
        }
    }
    Ok(m)
}

fn coords(b: &CohomBasis, z: &crate::field_linalg::SparseVec) -> Result<Vec<u32>, BuildError> {
    Ok(b.coords(z)?)
}

/// The morphism `h(g) -> h(g o phi)` on the sample grid of `fun` over `Y`.
pub fn induced_morphism(x: &PLComplex, y: &PLComplex, phi: &[usize], fun: usize, opts: &BuildOptions) -> Result<(MorphismData, MappedPair), BuildError> {
    let grid = Arc::new(build_grid(&LevelGrid::for_function(y, fun), depth_of(y)));
    let run = |ex: &Evaluator, ey: &Evaluator, phi: &[usize]| -> Result<Vec<Mat>, BuildError> {
        (0..grid.len()).map(|s| induced_at(ex, ey, phi, fun, grid.point(s))).collect()
    };
    let pair = refine_map(x, y, phi, &[fun], opts, |ex, ey, p| run(ex, ey, p).map(|_| ()))?;
    let maps = run(&pair.x, &pair.y, &pair.phi)?;
    Ok((MorphismData { grid, field: opts.field, maps }, pair))
}

/// Checks `h(phi) o hvec_Y(f, g) = hvec_X(f phi, g phi) o (shift b <= a) o h(phi)` at every
/// sample of the grid of `f` over `Y`, where `a = d(f, g)` and `b = d(f phi, g phi)`.
pub fn precomposition_check(x: &PLComplex, y: &PLComplex, phi: &[usize], f: usize, g: usize, opts: &BuildOptions) -> Result<usize, BuildError> {
    let grid = Arc::new(build_grid(&LevelGrid::for_function(y, f), depth_of(y)));
    let run = |ex: &Evaluator, ey: &Evaluator, phi: &[usize]| -> Result<usize, BuildError> {
        let a = distance_pair(&ey.complex, f, g);
        let b = distance_pair(&ex.complex, f, g);
        if !b.leq(&a) {
            return Err(BuildError::Check("d(f phi, g phi) is not below d(f, g)".into()));
        }
        let mut checked = 0;
        for s in 0..grid.len() {
            let u = grid.point(s);
            let au = alpha_raw(&a, u);
            let bu = alpha_raw(&b, u);
            let lhs = induced_at(ex, ey, phi, f, u)?.compose(&hvec_at(ey, f, g, &a, u)?);
            let rhs = hvec_at(ex, f, g, &b, u)?
                .compose(&ex.map(g, &bu, &au)?)
                .compose(&induced_at(ex, ey, phi, g, &au)?);
            checked += 1;
            if lhs != rhs && !ex.is_probe() {
                return Err(BuildError::Check(format!("precomposition square fails at {u}: {lhs:?} vs {rhs:?}")));
            }
        }
        Ok(checked)
    };
    let pair = refine_map(x, y, phi, &[f, g], opts, |ex, ey, p| run(ex, ey, p).map(|_| ()))?;
    run(&pair.x, &pair.y, &pair.phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_geometry::q;
    use crate::field_linalg::Field;

    fn hood_fg() -> PLComplex {
        let f = [0, 1, 0, 2, 2].map(q).to_vec();
        let g = [1, 2, 1, 1, 3].map(q).to_vec();
        let gp = [0, 1, 0, 0, 2].map(q).to_vec();
        PLComplex::new(
            &[1, 2, 3, 4, 5],
            vec![f, g, gp],
            &[vec![1, 2, 5], vec![2, 3, 5], vec![3, 4, 5], vec![4, 1, 5]],
        )
        .unwrap()
    }

    #[test]
    fn distance_examples() {
        let k = hood_fg();
        assert_eq!(distance_pair(&k, 0, 0), ShiftVector::zero());
        assert_eq!(distance_pair(&k, 0, 2), ShiftVector::new(q(-2), q(0)));
        assert_eq!(sup_distance(&k, 0, 1), q(1));
    }

    #[test]
    fn identity_transformation() {
        let k = hood_fg();
        let opts = BuildOptions::default();
        let grid = Arc::new(build_grid(&LevelGrid::for_function(&k, 0), 3));
        let ev = crate::risc_builder::refine(&k, &[0], &opts, |ev| build_transformation(ev, 0, 0, &grid).map(|_| ())).unwrap();
        let m = build_transformation(&ev, 0, 0, &grid).unwrap();
        assert!(m.is_identity());
    }

    #[test]
    fn hood_transformation_is_natural() {
        let k = hood_fg();
        let opts = BuildOptions::default();
        let grid = Arc::new(build_grid(&LevelGrid::for_function(&k, 0), 3));
        let ev = crate::risc_builder::refine(&k, &[0, 2], &opts, |ev| build_transformation(ev, 0, 2, &grid).map(|_| ())).unwrap();
        let m = build_transformation(&ev, 0, 2, &grid).unwrap();
        let target = assemble(&ev, &grid, 0).unwrap();
        let source = shifted_module(&ev, 2, &distance_pair(&ev.complex, 0, 2), &grid).unwrap();
        naturality_check(&source, &target, &m).unwrap();
        let a = distance_pair(&ev.complex, 0, 2);
        let connecting = (0..grid.len())
            .filter(|&s| hvec_branch(&a, grid.point(s)) == Branch::Connecting && !m.maps[s].is_zero())
            .count();
        let restriction = (0..grid.len())
            .filter(|&s| hvec_branch(&a, grid.point(s)) == Branch::Restriction && !m.maps[s].is_zero())
            .count();
        assert!(connecting > 0 && restriction > 0, "{connecting} {restriction}");
    }

    #[test]
    fn hood_interleaving_with_witness() {
        let k = hood_fg();
        let r = interleaving_check(&k, 0, 1, &q(1), &BuildOptions::default()).unwrap();
        assert!(r.ok, "{r:?}");
        let w = r.witness.expect("witness sample");
        assert_eq!(w.f_block, StripPoint::ints((1, -1), (0, 0)));
        assert_ne!(w.f_degree, w.g_degree);
    }

    #[test]
    fn hood_interleaving_over_gf3() {
        let k = hood_fg();
        let opts = BuildOptions { field: Field::new(3).unwrap(), ..BuildOptions::default() };
        assert!(interleaving_check(&k, 0, 1, &q(1), &opts).unwrap().ok);
    }

    #[test]
    fn self_interleaving() {
        let k = hood_fg();
        let r = interleaving_check(&k, 0, 0, &q(0), &BuildOptions::default()).unwrap();
        assert!(r.ok);
    }

    #[test]
    fn hood_composition() {
        let k = hood_fg();
        assert!(composition_check(&k, [0, 2, 1], &BuildOptions::default()).unwrap() > 0);
    }

    #[test]
    fn edge_collapse_round_trip_is_identity() {
        let edge = PLComplex::single(vec![q(0), q(0)], &[vec![0, 1]]).unwrap();
        let (m, _) = induced_morphism(&edge, &edge, &[0, 0], 0, &BuildOptions::default()).unwrap();
        assert!(m.is_identity());
        assert!(m.maps.iter().any(|x| x.rows > 0));
    }

    #[test]
    fn subcomplex_precomposition() {
        let k = hood_fg();
        let (x, verts) = k.induced_subcomplex(&[0, 1, 4]);
        assert!(precomposition_check(&x, &k, &verts, 0, 1, &BuildOptions::default()).unwrap() > 0);
    }

    #[test]
    fn refined_map_follows_subdivision() {
        let y = PLComplex::single(vec![q(0), q(2)], &[vec![0, 1]]).unwrap();
        let opts = BuildOptions::default();
        let pair = refine_map(&y, &y, &[0, 1], &[0], &opts, |_, _, _| Ok(())).unwrap();
        assert_eq!(pair.phi, (0..pair.x.complex.num_vertices()).collect::<Vec<_>>());
        assert!(pair.x.complex.num_vertices() > 2);
        let mid = pair.x.complex.values[0].iter().filter(|v| **v == q(1)).count();
        assert_eq!(mid, 1);
    }
}
