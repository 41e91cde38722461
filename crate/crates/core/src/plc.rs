//! Finite simplicial complexes carrying exact piecewise-linear functions, level splitting
//! by stellar edge subdivision, subcomplex models of open preimages, relative simplicial
//! cohomology over GF(p), restriction maps, and Mayer-Vietoris connecting maps.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::exact_geometry::{format_rational, RealOpenSet, XRat, Q};
use crate::field_linalg::{sparse_kernel, Field, LinalgError, Mat, SparseReducer, SparseVec};

/// Default limit on the number of simplices after splitting.
pub const DEFAULT_SIMPLEX_CAP: usize = 20_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlcError {
    #[error("simplex refers to unknown vertex id {0}")]
    DanglingVertex(i64),
    #[error("empty simplex in input")]
    EmptySimplex,
    #[error("simplex {0:?} repeats a vertex")]
    RepeatedVertex(Vec<i64>),
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(i64),
    #[error("simplex {0:?} listed twice")]
    DuplicateSimplex(Vec<i64>),
    #[error("function {0} has {1} values for {2} vertices")]
    ValueCount(usize, usize, usize),
    #[error("complex has {0} simplices, above the cap of {1}")]
    CapExceeded(usize, usize),
    #[error("open set endpoint {0} is not a regular value")]
    NotRegular(String),
    #[error("subcomplex pair is not nested")]
    NotNested,
    #[error("triad conditions violated: {0}")]
    BadTriad(String),
    #[error("vertex map is not simplicial: {0}")]
    NotSimplicial(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Where a vertex of a split complex comes from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexOrigin {
    /// The subdivided edge, as vertex indices at the time of the split, if any.
    pub edge: Option<(usize, usize)>,
    /// Smallest simplex of the unsplit complex containing the vertex, as original vertex indices.
    pub carrier: Vec<usize>,
}

/// A finite abstract simplicial complex with one or more exact vertex functions.
#[derive(Clone, Debug)]
pub struct PLComplex {
    /// External vertex ids, indexed by vertex index.
    pub ids: Vec<i64>,
    /// `values[k][v]` is the value of function `k` at vertex `v`.
    pub values: Vec<Vec<Q>>,
    /// All simplices as sorted vertex index lists, ordered by dimension then lexicographically.
    pub simplices: Vec<Vec<usize>>,
    pub facets: Vec<Vec<usize>>,
    pub origins: Vec<VertexOrigin>,
    index: HashMap<Vec<usize>, usize>,
    /// Faces of each simplex with incidence signs `(-1)^i`.
    faces: Vec<Vec<(usize, bool)>>,
    /// Cofaces of each simplex with incidence signs.
    cofaces: Vec<Vec<(usize, bool)>>,
}

impl PLComplex {
    /// Builds a complex from external ids, per-function values, and a list of faces
    /// (maximal faces suffice). Vertices are ordered by id.
    pub fn new(ids: &[i64], values: Vec<Vec<Q>>, simplices: &[Vec<i64>]) -> Result<PLComplex, PlcError> {
        let n = ids.len();
        for (k, vals) in values.iter().enumerate() {
            if vals.len() != n {
                return Err(PlcError::ValueCount(k, vals.len(), n));
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| ids[i]);
        let mut pos: HashMap<i64, usize> = HashMap::new();
        for (new, &old) in order.iter().enumerate() {
            if pos.insert(ids[old], new).is_some() {
                return Err(PlcError::DuplicateVertex(ids[old]));
            }
        }
        let sorted_ids: Vec<i64> = order.iter().map(|&i| ids[i]).collect();
        let sorted_values: Vec<Vec<Q>> =
            values.iter().map(|vals| order.iter().map(|&i| vals[i].clone()).collect()).collect();
        let mut seen = BTreeSet::new();
        let mut facets = vec![];
        for s in simplices {
            if s.is_empty() {
                return Err(PlcError::EmptySimplex);
            }
            let mut idx = vec![];
            for v in s {
                idx.push(*pos.get(v).ok_or(PlcError::DanglingVertex(*v))?);
            }
            idx.sort_unstable();
            if idx.windows(2).any(|w| w[0] == w[1]) {
                return Err(PlcError::RepeatedVertex(s.clone()));
            }
            if !seen.insert(idx.clone()) {
                return Err(PlcError::DuplicateSimplex(s.clone()));
            }
            facets.push(idx);
        }
        let origins = (0..n).map(|v| VertexOrigin { edge: None, carrier: vec![v] }).collect();
        Ok(PLComplex::assemble(sorted_ids, sorted_values, facets, origins))
    }

    /// Convenience constructor for a single function with integer ids `0..n`.
    pub fn single(values: Vec<Q>, simplices: &[Vec<i64>]) -> Result<PLComplex, PlcError> {
        let ids: Vec<i64> = (0..values.len() as i64).collect();
        PLComplex::new(&ids, vec![values], simplices)
    }

    fn assemble(ids: Vec<i64>, values: Vec<Vec<Q>>, facets: Vec<Vec<usize>>, origins: Vec<VertexOrigin>) -> PLComplex {
        let n = ids.len();
        let mut all: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
        for v in 0..n {
            all.insert((0, vec![v]));
        }
        for f in &facets {
            let d = f.len();
            for mask in 1u64..(1u64 << d) {
                let s: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).map(|i| f[i]).collect();
                all.insert((s.len() - 1, s));
            }
        }
        let simplices: Vec<Vec<usize>> = all.into_iter().map(|(_, s)| s).collect();
        let index: HashMap<Vec<usize>, usize> = simplices.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut faces = vec![vec![]; simplices.len()];
        let mut cofaces = vec![vec![]; simplices.len()];
        for (t, s) in simplices.iter().enumerate() {
            if s.len() < 2 {
                continue;
            }
            for i in 0..s.len() {
                let mut face = s.clone();
                face.remove(i);
                let fi = index[&face];
                let neg = i % 2 == 1;
                faces[t].push((fi, neg));
                cofaces[fi].push((t, neg));
            }
        }
        let mut facets = facets;
        if facets.is_empty() {
            facets = (0..n).map(|v| vec![v]).collect();
        }
        PLComplex { ids, values, simplices, facets, origins, index, faces, cofaces }
    }

    pub fn num_vertices(&self) -> usize {
        self.ids.len()
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices.len()
    }

    pub fn num_functions(&self) -> usize {
        self.values.len()
    }

    pub fn dim(&self) -> Option<usize> {
        self.simplices.last().map(|s| s.len() - 1)
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn simplex_index(&self, s: &[usize]) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn simplex_dim(&self, i: usize) -> usize {
        self.simplices[i].len() - 1
    }

    pub fn faces_of(&self, i: usize) -> &[(usize, bool)] {
        &self.faces[i]
    }

    pub fn cofaces_of(&self, i: usize) -> &[(usize, bool)] {
        &self.cofaces[i]
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices.iter().map(|s| if s.len() % 2 == 1 { 1 } else { -1 }).sum()
    }

    /// Keeps only function `k`.
    pub fn with_function(&self, k: usize) -> PLComplex {
        let mut c = self.clone();
        c.values = vec![self.values[k].clone()];
        c
    }

    /// Replaces the functions carried by the complex.
    pub fn with_values(&self, values: Vec<Vec<Q>>) -> PLComplex {
        assert!(values.iter().all(|v| v.len() == self.num_vertices()));
        let mut c = self.clone();
        c.values = values;
        c
    }

    /// Subdivides every edge crossing level `s` of function `fun`.
    ///
    /// Crossing edges are processed in lexicographic order of their vertex indices. A
    /// split of `{a, b}` at a new vertex `x` replaces each facet `sigma` containing the edge by
    /// `sigma - {b} + {x}` and `sigma - {a} + {x}`, so the new edges never cross `s` and the
    /// remaining crossing edges are untouched.
    pub fn split_at_level(&self, fun: usize, s: &Q) -> PLComplex {
        let f = &self.values[fun];
        let mut crossing: Vec<(usize, usize)> = self
            .simplices
            .iter()
            .filter(|e| e.len() == 2)
            .filter(|e| {
                let (a, b) = (&f[e[0]], &f[e[1]]);
                (a < s && s < b) || (b < s && s < a)
            })
            .map(|e| (e[0], e[1]))
            .collect();
        if crossing.is_empty() {
            return self.clone();
        }
        crossing.sort_unstable();
        let mut ids = self.ids.clone();
        let mut values = self.values.clone();
        let mut origins = self.origins.clone();
        let mut facets = self.facets.clone();
        let first_id = ids.iter().copied().max().unwrap_or(-1) + 1;
        for (next_id, (a, b)) in (first_id..).zip(crossing) {
            let x = ids.len();
            ids.push(next_id);
            let t = (s - &f[a]) / (&f[b] - &f[a]);
            for vals in values.iter_mut() {
                let v = &vals[a] + &t * (&vals[b] - &vals[a]);
                vals.push(v);
            }
            let carrier: BTreeSet<usize> =
                origins[a].carrier.iter().chain(origins[b].carrier.iter()).copied().collect();
            origins.push(VertexOrigin { edge: Some((a, b)), carrier: carrier.into_iter().collect() });
            let mut out = Vec::with_capacity(facets.len() + 4);
            for fc in facets {
                if fc.contains(&a) && fc.contains(&b) {
                    for drop in [b, a] {
                        let mut nf: Vec<usize> = fc.iter().copied().filter(|&v| v != drop).collect();
                        nf.push(x);
                        nf.sort_unstable();
                        out.push(nf);
                    }
                } else {
                    out.push(fc);
                }
            }
            facets = out;
        }
        PLComplex::assemble(ids, values, facets, origins)
    }

    /// Splits at each level in increasing order, failing once the simplex count exceeds `cap`.
    pub fn split_levels(&self, fun: usize, levels: &[Q], cap: usize) -> Result<PLComplex, PlcError> {
        let mut sorted: Vec<Q> = levels.to_vec();
        sorted.sort();
        sorted.dedup();
        let mut k = self.clone();
        for s in &sorted {
            k = k.split_at_level(fun, s);
            if k.num_simplices() > cap {
                return Err(PlcError::CapExceeded(k.num_simplices(), cap));
            }
        }
        Ok(k)
    }

    /// Splits at every level of the grid, using function `fun`.
    pub fn split_all(&self, fun: usize, grid: &LevelGrid, cap: usize) -> Result<PLComplex, PlcError> {
        self.split_levels(fun, &grid.lambda, cap)
    }

    /// Whether every simplex has all values of function `fun` in one closed interval
    /// between adjacent sorted levels.
    pub fn spans_adjacent_levels(&self, fun: usize, levels: &[Q]) -> bool {
        let f = &self.values[fun];
        self.simplices.iter().all(|s| {
            let lo = s.iter().map(|&v| &f[v]).min().unwrap();
            let hi = s.iter().map(|&v| &f[v]).max().unwrap();
            !levels.iter().any(|l| lo < l && l < hi)
        })
    }

    /// Restriction to the vertices whose carrier lies in the given set of original vertices.
    ///
    /// Returns the restricted complex and, per new vertex, its index in `self`.
    pub fn restrict_to_carrier(&self, keep: &[usize]) -> (PLComplex, Vec<usize>) {
        let keep: BTreeSet<usize> = keep.iter().copied().collect();
        let verts: Vec<usize> =
            (0..self.num_vertices()).filter(|&v| self.origins[v].carrier.iter().all(|c| keep.contains(c))).collect();
        self.induced_subcomplex(&verts)
    }

    /// Full subcomplex on the given vertex indices, keeping order and origins.
    pub fn induced_subcomplex(&self, verts: &[usize]) -> (PLComplex, Vec<usize>) {
        let mut map = vec![usize::MAX; self.num_vertices()];
        for (i, &v) in verts.iter().enumerate() {
            map[v] = i;
        }
        let ids = verts.iter().map(|&v| self.ids[v]).collect();
        let values = self.values.iter().map(|f| verts.iter().map(|&v| f[v].clone()).collect()).collect();
        let origins = verts.iter().map(|&v| self.origins[v].clone()).collect();
        let facets: Vec<Vec<usize>> = self
            .simplices
            .iter()
            .filter(|s| s.iter().all(|&v| map[v] != usize::MAX))
            .map(|s| s.iter().map(|&v| map[v]).collect())
            .collect();
        (PLComplex::assemble(ids, values, facets, origins), verts.to_vec())
    }
}

impl fmt::Display for PLComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "complex with {} vertices and {} simplices", self.num_vertices(), self.num_simplices())?;
        if let Some(vals) = self.values.first() {
            let v: Vec<String> = vals.iter().map(format_rational).collect();
            write!(f, ", values [{}]", v.join(", "))?;
        }
        Ok(())
    }
}

/// Vertex values `V`, interleaving regular values `S`, and `Lambda = V u S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelGrid {
    pub vertex_values: Vec<Q>,
    pub regular_values: Vec<Q>,
    pub lambda: Vec<Q>,
}

impl LevelGrid {
    /// Midpoints of consecutive values plus the guards `v_1 - 1` and `v_m + 1`.
    pub fn new(values: &[Q]) -> LevelGrid {
        let mut v: Vec<Q> = values.to_vec();
        v.sort();
        v.dedup();
        let mut s = vec![];
        if let (Some(first), Some(last)) = (v.first(), v.last()) {
            let one = Q::from_integer(1.into());
            s.push(first - &one);
            for w in v.windows(2) {
                s.push((&w[0] + &w[1]) / Q::from_integer(2.into()));
            }
            s.push(last + &one);
        }
        let mut lambda: Vec<Q> = v.iter().chain(s.iter()).cloned().collect();
        lambda.sort();
        LevelGrid { vertex_values: v, regular_values: s, lambda }
    }

    pub fn for_function(k: &PLComplex, fun: usize) -> LevelGrid {
        LevelGrid::new(&k.values[fun])
    }

    pub fn is_critical(&self, t: &Q) -> bool {
        self.vertex_values.binary_search(t).is_ok()
    }

    pub fn is_regular(&self, t: &Q) -> bool {
        self.regular_values.binary_search(t).is_ok()
    }
}

/// A set of vertex indices as a bitset.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet {
    bits: Vec<u64>,
}

impl VertexSet {
    pub fn from_pred(n: usize, pred: impl Fn(usize) -> bool) -> VertexSet {
        let mut bits = vec![0u64; n.div_ceil(64)];
        for v in 0..n {
            if pred(v) {
                bits[v / 64] |= 1 << (v % 64);
            }
        }
        VertexSet { bits }
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.bits.get(v / 64).is_some_and(|w| w >> (v % 64) & 1 == 1)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn intersect(&self, o: &VertexSet) -> VertexSet {
        VertexSet { bits: self.bits.iter().zip(o.bits.iter()).map(|(a, b)| a & b).collect() }
    }

    pub fn is_subset(&self, o: &VertexSet) -> bool {
        self.bits.iter().zip(o.bits.iter()).all(|(a, b)| a & !b == 0)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// A union of full subcomplexes, each given by its vertex set.
///
/// A simplex belongs to the subcomplex iff all its vertices lie in one of the parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sub {
    parts: Vec<VertexSet>,
}

impl Sub {
    pub fn empty() -> Sub {
        Sub { parts: vec![] }
    }

    pub fn full(k: &PLComplex) -> Sub {
        Sub::spanned(VertexSet::from_pred(k.num_vertices(), |_| true))
    }

    pub fn spanned(set: VertexSet) -> Sub {
        Sub::from_parts(vec![set])
    }

    /// Full subcomplex on the vertices where function `fun` satisfies `pred`.
    pub fn spanned_by(k: &PLComplex, fun: usize, pred: impl Fn(&Q) -> bool) -> Sub {
        let f = &k.values[fun];
        Sub::spanned(VertexSet::from_pred(k.num_vertices(), |v| pred(&f[v])))
    }

    fn from_parts(mut parts: Vec<VertexSet>) -> Sub {
        parts.retain(|p| !p.is_empty());
        parts.sort();
        parts.dedup();
        let keep: Vec<bool> = (0..parts.len())
            .map(|i| !(0..parts.len()).any(|j| j != i && parts[i].is_subset(&parts[j])))
            .collect();
        let parts = parts.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect();
        Sub { parts }
    }

    pub fn union(&self, o: &Sub) -> Sub {
        Sub::from_parts(self.parts.iter().chain(o.parts.iter()).cloned().collect())
    }

    pub fn intersection(&self, o: &Sub) -> Sub {
        let mut parts = vec![];
        for a in &self.parts {
            for b in &o.parts {
                parts.push(a.intersect(b));
            }
        }
        Sub::from_parts(parts)
    }

    pub fn contains_simplex(&self, s: &[usize]) -> bool {
        self.parts.iter().any(|p| s.iter().all(|&v| p.contains(v)))
    }

    /// Indicator over all simplices of `k`.
    pub fn simplex_mask(&self, k: &PLComplex) -> Vec<bool> {
        k.simplices.iter().map(|s| self.contains_simplex(s)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Simplex-level inclusion.
    pub fn is_subcomplex_of(&self, o: &Sub, k: &PLComplex) -> bool {
        k.simplices.iter().all(|s| !self.contains_simplex(s) || o.contains_simplex(s))
    }

    /// Equality as sets of simplices.
    pub fn same_simplices(&self, o: &Sub, k: &PLComplex) -> bool {
        k.simplices.iter().all(|s| self.contains_simplex(s) == o.contains_simplex(s))
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }
}

fn in_open(t: &Q, lo: &XRat, hi: &XRat) -> bool {
    let t = XRat::Fin(t.clone());
    *lo < t && t < *hi
}

/// Full subcomplex on vertices with values strictly inside `U`, whose finite endpoints
/// must be regular values of the grid.
pub fn open_model(k: &PLComplex, fun: usize, grid: &LevelGrid, u: &RealOpenSet) -> Result<Sub, PlcError> {
    for (a, b) in &u.intervals {
        for e in [a, b] {
            if let XRat::Fin(t) = e {
                if !grid.is_regular(t) {
                    return Err(PlcError::NotRegular(format_rational(t)));
                }
            }
        }
    }
    let f = &k.values[fun];
    let set = VertexSet::from_pred(k.num_vertices(), |v| u.intervals.iter().any(|(a, b)| in_open(&f[v], a, b)));
    Ok(Sub::spanned(set))
}

/// Full subcomplex on vertices with `lo < f < hi`, empty if `lo >= hi`.
pub fn interval_model(k: &PLComplex, fun: usize, lo: &XRat, hi: &XRat) -> Sub {
    if lo >= hi {
        return Sub::empty();
    }
    Sub::spanned_by(k, fun, |t| in_open(t, lo, hi))
}

/// Union of the full subcomplexes on `f < a` and on `f > b`.
pub fn two_ray_model(k: &PLComplex, fun: usize, a: &XRat, b: &XRat) -> Sub {
    let below = interval_model(k, fun, &XRat::NegInf, a);
    let above = interval_model(k, fun, b, &XRat::PosInf);
    below.union(&above)
}

/// A basis of `H^n(A, B; GF(p))` by representative relative cocycles.
#[derive(Clone, Debug)]
pub struct CohomBasis {
    pub degree: usize,
    pub field: Field,
    /// Representative cocycles, indexed by global simplex index.
    pub reps: Vec<SparseVec>,
    /// Indicator of the cells of `A \ B` over all simplices.
    cells: Vec<bool>,
    /// Echelon reducer over image columns (label `None`) and representatives (`Some(i)`).
    reducer: SparseReducer<Option<usize>>,
}

impl CohomBasis {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn is_cell(&self, s: usize) -> bool {
        self.cells[s]
    }

    /// Coordinates of the class of a relative cocycle supported on the cells of this pair.
    pub fn coords(&self, z: &SparseVec) -> Result<Vec<u32>, LinalgError> {
        let (res, used) = self.reducer.reduce(z);
        if !res.is_zero() {
            return Err(LinalgError::NotInSpan);
        }
        let f = self.field;
        let mut c = vec![0u32; self.dim()];
        for (label, coef) in used {
            if let Some(i) = label {
                c[i] = f.add(c[i], coef);
            }
        }
        Ok(c)
    }

    /// A basis with no classes, used when only the shape of a computation matters.
    pub fn zero(field: Field, degree: usize, k: &PLComplex) -> CohomBasis {
        CohomBasis {
            degree,
            field,
            reps: vec![],
            cells: vec![false; k.num_simplices()],
            reducer: SparseReducer::new(field),
        }
    }
}

/// Relative simplicial cohomology of the pair `(A, B)` in degree `n`.
pub fn relative_cohomology(
    k: &PLComplex,
    a: &Sub,
    b: &Sub,
    n: usize,
    field: Field,
) -> Result<CohomBasis, PlcError> {
    let in_a = a.simplex_mask(k);
    let in_b = b.simplex_mask(k);
    if in_b.iter().zip(in_a.iter()).any(|(&bb, &aa)| bb && !aa) {
        return Err(PlcError::NotNested);
    }
    let cells: Vec<bool> = in_a.iter().zip(in_b.iter()).map(|(&aa, &bb)| aa && !bb).collect();
    Ok(cohomology_of_cells(k, cells, n, field))
}

fn coboundary(k: &PLComplex, s: usize, cells: &[bool], field: Field) -> SparseVec {
    let pairs = k
        .cofaces_of(s)
        .iter()
        .filter(|(t, _)| cells[*t])
        .map(|&(t, neg)| (t, if neg { field.neg(1) } else { 1 }))
        .collect();
    SparseVec::from_pairs(field, pairs)
}

/// Full coboundary of a cochain, over all simplices of the complex.
pub fn coboundary_of(k: &PLComplex, c: &SparseVec, field: Field) -> SparseVec {
    let mut pairs = vec![];
    for &(s, v) in &c.entries {
        for &(t, neg) in k.cofaces_of(s) {
            pairs.push((t, if neg { field.neg(v) } else { v }));
        }
    }
    SparseVec::from_pairs(field, pairs)
}

fn cohomology_of_cells(k: &PLComplex, cells: Vec<bool>, n: usize, field: Field) -> CohomBasis {
    let mut reducer: SparseReducer<Option<usize>> = SparseReducer::new(field);
    let of_dim = |d: usize| -> Vec<usize> {
        (0..k.num_simplices()).filter(|&s| cells[s] && k.simplex_dim(s) == d).collect()
    };
    if n > 0 {
        for s in of_dim(n - 1) {
            let c = coboundary(k, s, &cells, field);
            reducer.add(&c, None);
        }
    }
    let cols: Vec<(usize, SparseVec)> = of_dim(n).into_iter().map(|s| (s, coboundary(k, s, &cells, field))).collect();
    let kernel = sparse_kernel(field, &cols);
    let mut reps = vec![];
    for z in kernel {
        let (r, _) = reducer.reduce(&z);
        if !r.is_zero() {
            let label = Some(reps.len());
            reducer.insert(r.clone(), label);
            reps.push(r);
        }
    }
    CohomBasis { degree: n, field, reps, cells, reducer }
}

/// Matrix of the restriction `H^n(A, B) -> H^n(A', B')` for `A' <= A` and `B' <= B`.
pub fn induced_map(from: &CohomBasis, to: &CohomBasis) -> Result<Mat, PlcError> {
    let f = from.field;
    let mut m = Mat::zeros(f, to.dim(), from.dim());
    for (j, z) in from.reps.iter().enumerate() {
        let r = z.filter(|s| to.is_cell(s));
        let c = to.coords(&r)?;
        for (i, v) in c.into_iter().enumerate() {
            m.set(i, j, v);
        }
    }
    Ok(m)
}

/// A Mayer-Vietoris triad: two pairs together with their union and intersection.
#[derive(Clone, Debug)]
pub struct Triad {
    pub w: (Sub, Sub),
    pub v1: (Sub, Sub),
    pub v2: (Sub, Sub),
    pub u: (Sub, Sub),
}

impl Triad {
    /// Checks that `w` is the componentwise union and `u` the componentwise intersection.
    pub fn validate(&self, k: &PLComplex) -> Result<(), PlcError> {
        let checks = [
            ("A_w = A_1 u A_2", self.v1.0.union(&self.v2.0).same_simplices(&self.w.0, k)),
            ("B_w = B_1 u B_2", self.v1.1.union(&self.v2.1).same_simplices(&self.w.1, k)),
            ("A_u = A_1 n A_2", self.v1.0.intersection(&self.v2.0).same_simplices(&self.u.0, k)),
            ("B_u = B_1 n B_2", self.v1.1.intersection(&self.v2.1).same_simplices(&self.u.1, k)),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(PlcError::BadTriad(name.to_string()));
            }
        }
        Ok(())
    }
}

/// The connecting map `H^n(A_u, B_u) -> H^{n+1}(A_w, B_w)` of the Mayer-Vietoris sequence
/// `H^n(w) -> H^n(v1) + H^n(v2) -> H^n(u) -> H^{n+1}(w)` whose middle map is the difference
/// of restrictions.
///
/// A cocycle `z` on `(A_u, B_u)` is lifted to `alpha = z` off `B_1` on `A_1` and
/// `beta = -z` on `B_1` on `A_2`; the coboundaries agree on `A_u` and glue to `gamma`.
pub fn mv_connecting(
    k: &PLComplex,
    b1_mask: &[bool],
    a1_mask: &[bool],
    from: &CohomBasis,
    to: &CohomBasis,
) -> Result<Mat, PlcError> {
    let f = from.field;
    let mut m = Mat::zeros(f, to.dim(), from.dim());
    for (j, z) in from.reps.iter().enumerate() {
        let alpha = z.filter(|s| !b1_mask[s]);
        let beta = z.filter(|s| b1_mask[s]).scale(f, f.neg(1));
        let da = coboundary_of(k, &alpha, f);
        let db = coboundary_of(k, &beta, f);
        let mut pairs = vec![];
        for &(t, v) in &da.entries {
            if a1_mask[t] && to.is_cell(t) {
                pairs.push((t, v));
            }
        }
        for &(t, v) in &db.entries {
            if !a1_mask[t] && to.is_cell(t) {
                pairs.push((t, v));
            }
        }
        let gamma = SparseVec::from_pairs(f, pairs);
        let c = to.coords(&gamma)?;
        for (i, v) in c.into_iter().enumerate() {
            m.set(i, j, v);
        }
    }
    Ok(m)
}

/// Convenience wrapper computing all bases of a triad and its connecting map in degree `n`.
pub fn mv_connecting_triad(k: &PLComplex, triad: &Triad, n: usize, field: Field) -> Result<Mat, PlcError> {
    triad.validate(k)?;
    let from = relative_cohomology(k, &triad.u.0, &triad.u.1, n, field)?;
    let to = relative_cohomology(k, &triad.w.0, &triad.w.1, n + 1, field)?;
    let b1 = triad.v1.1.simplex_mask(k);
    let a1 = triad.v1.0.simplex_mask(k);
    mv_connecting(k, &b1, &a1, &from, &to)
}

/// Pulls a cochain on `Y` back along a vertex map `phi: X -> Y`.
///
/// A simplex of `X` whose image has fewer vertices gets zero; otherwise the value is the
/// image simplex's value times the sign of the sorting permutation.
pub fn pullback_cochain(
    x: &PLComplex,
    y: &PLComplex,
    phi: &[usize],
    c: &SparseVec,
    degree: usize,
    field: Field,
) -> Result<SparseVec, PlcError> {
    let mut pairs = vec![];
    for (s, simplex) in x.simplices.iter().enumerate() {
        if simplex.len() != degree + 1 {
            continue;
        }
        let img: Vec<usize> = simplex.iter().map(|&v| phi[v]).collect();
        let mut sorted = img.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let t = y
            .simplex_index(&sorted)
            .ok_or_else(|| PlcError::NotSimplicial(format!("image of {simplex:?} is not a simplex")))?;
        let v = c.get(t);
        if v == 0 {
            continue;
        }
        let inversions = (0..img.len()).flat_map(|i| (i + 1..img.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| img[i] > img[j])
            .count();
        pairs.push((s, if inversions % 2 == 1 { field.neg(v) } else { v }));
    }
    Ok(SparseVec::from_pairs(field, pairs))
}

/// Checks that `phi` maps simplices of `x` onto simplices of `y`.
pub fn check_simplicial(x: &PLComplex, y: &PLComplex, phi: &[usize]) -> Result<(), PlcError> {
    if phi.len() != x.num_vertices() {
        return Err(PlcError::NotSimplicial("vertex map has the wrong length".into()));
    }
    for s in &x.simplices {
        let mut img: Vec<usize> = s.iter().map(|&v| phi[v]).collect();
        img.sort_unstable();
        img.dedup();
        if img.iter().any(|&v| v >= y.num_vertices()) || y.simplex_index(&img).is_none() {
            return Err(PlcError::NotSimplicial(format!("image of {s:?} is not a simplex")));
        }
    }
    Ok(())
}

/// Betti numbers of the whole complex in degrees `0..=dim`.
pub fn betti_numbers(k: &PLComplex, field: Field) -> Vec<usize> {
    let Some(d) = k.dim() else { return vec![] };
    let all = Sub::full(k);
    (0..=d).map(|n| relative_cohomology(k, &all, &Sub::empty(), n, field).map(|b| b.dim()).unwrap_or(0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_geometry::{q, qf};

    const F2: Field = Field { p: 2 };

    fn qs(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| q(x)).collect()
    }

    fn hood() -> PLComplex {
        PLComplex::new(
            &[1, 2, 3, 4, 5],
            vec![qs(&[0, 1, 0, 2, 2])],
            &[vec![1, 2, 5], vec![2, 3, 5], vec![3, 4, 5], vec![4, 1, 5]],
        )
        .unwrap()
    }

    fn circle(vals: &[i64]) -> PLComplex {
        PLComplex::single(qs(vals), &[vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]]).unwrap()
    }

    #[test]
    fn validate_examples() {
        let p = PLComplex::single(qs(&[0]), &[vec![0]]).unwrap();
        assert_eq!(p.num_simplices(), 1);
        let e = PLComplex::single(qs(&[0, 1]), &[vec![0, 1]]).unwrap();
        assert_eq!(e.num_simplices(), 3);
        assert!(matches!(PLComplex::single(qs(&[0, 1]), &[vec![0, 0]]), Err(PlcError::RepeatedVertex(_))));
        assert!(matches!(PLComplex::single(qs(&[0]), &[vec![3]]), Err(PlcError::DanglingVertex(3))));
        assert!(matches!(PLComplex::single(qs(&[0]), &[vec![]]), Err(PlcError::EmptySimplex)));
        assert!(matches!(
            PLComplex::single(qs(&[0, 1]), &[vec![0, 1], vec![1, 0]]),
            Err(PlcError::DuplicateSimplex(_))
        ));
    }

    #[test]
    fn split_edge() {
        let e = PLComplex::single(qs(&[0, 2]), &[vec![0, 1]]).unwrap();
        let s = e.split_at_level(0, &q(1));
        assert_eq!(s.num_vertices(), 3);
        assert_eq!(s.values[0][2], q(1));
        assert_eq!(s.facets, vec![vec![0, 2], vec![1, 2]]);
        assert_eq!(s.ids, vec![0, 1, 2]);
        assert_eq!(s.origins[2].carrier, vec![0, 1]);
    }

    #[test]
    fn split_triangle() {
        let t = PLComplex::single(qs(&[0, 0, 2]), &[vec![0, 1, 2]]).unwrap();
        let s = t.split_at_level(0, &q(1));
        assert_eq!(s.num_vertices(), 5);
        assert_eq!(s.euler_characteristic(), 1);
        let level: Vec<usize> = (0..5).filter(|&v| s.values[0][v] == q(1)).collect();
        assert_eq!(level.len(), 2);
        assert!(s.simplex_index(&level).is_some());
        assert_eq!(s.facets.len(), 3);
        assert!(s.spans_adjacent_levels(0, &[q(1)]));
    }

    #[test]
    fn split_all_hood() {
        let h = hood();
        let g = LevelGrid::for_function(&h, 0);
        let s = h.split_all(0, &g, DEFAULT_SIMPLEX_CAP).unwrap();
        assert!(s.spans_adjacent_levels(0, &g.lambda));
        assert_eq!(s.split_all(0, &g, DEFAULT_SIMPLEX_CAP).unwrap().num_simplices(), s.num_simplices());
        assert_eq!(s.euler_characteristic(), h.euler_characteristic());
    }

    #[test]
    fn level_grid() {
        let g = LevelGrid::new(&qs(&[2, 0, 1, 0]));
        assert_eq!(g.vertex_values, qs(&[0, 1, 2]));
        assert_eq!(g.regular_values, vec![q(-1), qf(1, 2), qf(3, 2), q(3)]);
        assert_eq!(g.lambda.len(), 7);
    }

    #[test]
    fn open_model_examples() {
        let h = hood();
        let g = LevelGrid::for_function(&h, 0);
        let s = h.split_all(0, &g, DEFAULT_SIMPLEX_CAP).unwrap();
        let full = open_model(&s, 0, &g, &RealOpenSet::reals()).unwrap();
        assert!(full.same_simplices(&Sub::full(&s), &s));
        let empty = open_model(&s, 0, &g, &RealOpenSet::empty()).unwrap();
        assert!(empty.is_empty());
        let below = RealOpenSet::from_intervals(vec![(XRat::NegInf, XRat::Fin(qf(1, 2)))]);
        let m = open_model(&s, 0, &g, &below).unwrap();
        let h0 = relative_cohomology(&s, &m, &Sub::empty(), 0, F2).unwrap();
        assert_eq!(h0.dim(), 2);
        let bad = RealOpenSet::from_intervals(vec![(XRat::NegInf, XRat::Fin(q(1)))]);
        assert!(open_model(&s, 0, &g, &bad).is_err());
    }

    #[test]
    fn relative_cohomology_examples() {
        let p = PLComplex::single(qs(&[0]), &[vec![0]]).unwrap();
        assert_eq!(relative_cohomology(&p, &Sub::full(&p), &Sub::empty(), 0, F2).unwrap().dim(), 1);
        let path = PLComplex::single(qs(&[0, 2, 1]), &[vec![0, 2], vec![2, 1]]).unwrap();
        let ends = Sub::spanned(VertexSet::from_pred(3, |v| v != 2));
        assert_eq!(relative_cohomology(&path, &Sub::full(&path), &ends, 1, F2).unwrap().dim(), 1);
        assert_eq!(relative_cohomology(&path, &Sub::full(&path), &ends, 0, F2).unwrap().dim(), 0);
        let c = circle(&[0, 1, 2, 1]);
        assert_eq!(betti_numbers(&c, F2), vec![1, 1]);
        assert_eq!(betti_numbers(&c, Field::new(3).unwrap()), vec![1, 1]);
        assert_eq!(betti_numbers(&hood(), F2), vec![1, 0, 0]);
    }

    #[test]
    fn induced_map_examples() {
        let c = circle(&[0, 1, 2, 1]);
        let all = relative_cohomology(&c, &Sub::full(&c), &Sub::empty(), 1, F2).unwrap();
        assert_eq!(induced_map(&all, &all).unwrap(), Mat::identity(F2, 1));
        // The circle as the base of a cone; H^1 of the cone is zero.
        let cone = PLComplex::single(
            qs(&[0, 1, 2, 1, 3]),
            &[vec![0, 1, 4], vec![1, 2, 4], vec![2, 3, 4], vec![3, 0, 4]],
        )
        .unwrap();
        let base = Sub::spanned(VertexSet::from_pred(5, |v| v < 4));
        let hc = relative_cohomology(&cone, &Sub::full(&cone), &Sub::empty(), 1, F2).unwrap();
        let hb = relative_cohomology(&cone, &base, &Sub::empty(), 1, F2).unwrap();
        assert_eq!(hc.dim(), 0);
        let m = induced_map(&hc, &hb).unwrap();
        assert_eq!((m.rows, m.cols), (1, 0));
    }

    #[test]
    fn circle_mayer_vietoris() {
        let c = circle(&[0, 1, 2, 1]);
        let arc1 = Sub::spanned(VertexSet::from_pred(4, |v| v != 2));
        let arc2 = Sub::spanned(VertexSet::from_pred(4, |v| v != 0));
        let triad = Triad {
            w: (Sub::full(&c), Sub::empty()),
            v1: (arc1.clone(), Sub::empty()),
            v2: (arc2.clone(), Sub::empty()),
            u: (arc1.intersection(&arc2), Sub::empty()),
        };
        triad.validate(&c).unwrap();
        for p in [2, 3, 5] {
            let f = Field::new(p).unwrap();
            let d = mv_connecting_triad(&c, &triad, 0, f).unwrap();
            assert_eq!(d.rank(), 1);
        }
        let id = Triad {
            w: (Sub::full(&c), Sub::empty()),
            v1: (Sub::full(&c), Sub::empty()),
            v2: (Sub::full(&c), Sub::empty()),
            u: (Sub::full(&c), Sub::empty()),
        };
        assert!(mv_connecting_triad(&c, &id, 0, F2).unwrap().is_zero());
        let bad = Triad { u: (Sub::empty(), Sub::empty()), ..triad };
        assert!(bad.validate(&c).is_err());
    }

    #[test]
    fn sub_algebra() {
        let c = circle(&[0, 1, 2, 1]);
        let a = Sub::spanned(VertexSet::from_pred(4, |v| v < 2));
        let b = Sub::spanned(VertexSet::from_pred(4, |v| v >= 2));
        let u = a.union(&b);
        assert!(u.contains_simplex(&[0, 1]));
        assert!(!u.contains_simplex(&[1, 2]));
        assert!(a.intersection(&b).is_empty());
        assert!(a.is_subcomplex_of(&u, &c));
    }

    #[test]
    fn pullback_of_identity() {
        let c = circle(&[0, 1, 2, 1]);
        let h = relative_cohomology(&c, &Sub::full(&c), &Sub::empty(), 1, Field::new(3).unwrap()).unwrap();
        let phi: Vec<usize> = (0..4).collect();
        check_simplicial(&c, &c, &phi).unwrap();
        let z = &h.reps[0];
        assert_eq!(&pullback_cochain(&c, &c, &phi, z, 1, h.field).unwrap(), z);
        // A reflection of the circle reverses orientation of H^1.
        let refl = vec![0, 3, 2, 1];
        let pz = pullback_cochain(&c, &c, &refl, z, 1, h.field).unwrap();
        assert_eq!(h.coords(&pz).unwrap(), vec![2]);
    }
}
