//! Independent oracles shared by the integration tests. Nothing here calls the
//! cohomology or module code of the library; only complexes and values are read.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use risc::exact_geometry::Q;
use risc::plc::PLComplex;

/// Rank over GF(2) of a set of columns given as sorted row index lists.
pub fn rank_gf2(cols: &[Vec<usize>]) -> usize {
    let mut pivots: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut rank = 0;
    for c in cols {
        let mut c = c.clone();
        while let Some(&low) = c.last() {
            match pivots.get(&low) {
                Some(p) => c = sym_diff(&c, p),
                None => {
                    pivots.insert(low, c);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

fn sym_diff(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            out.push(b[j]);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    out
}

fn faces(s: &[usize]) -> Vec<Vec<usize>> {
    (0..s.len())
        .map(|i| s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect())
        .collect()
}

/// Betti numbers over GF(2) of a simplicial complex given by all of its simplices.
pub fn betti_gf2(simplices: &[Vec<usize>]) -> Vec<usize> {
    let top = simplices.iter().map(|s| s.len()).max().unwrap_or(0);
    if top == 0 {
        return vec![];
    }
    let mut by_dim: Vec<Vec<Vec<usize>>> = vec![vec![]; top];
    for s in simplices {
        let mut s = s.clone();
        s.sort();
        by_dim[s.len() - 1].push(s);
    }
    let index: Vec<HashMap<Vec<usize>, usize>> =
        by_dim.iter().map(|ss| ss.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()).collect();
    // rank of the boundary from dimension d to d - 1.
    let mut ranks = vec![0; top + 1];
    for d in 1..top {
        let cols: Vec<Vec<usize>> = by_dim[d]
            .iter()
            .map(|s| {
                let mut c: Vec<usize> = faces(s).iter().map(|f| index[d - 1][f]).collect();
                c.sort();
                c
            })
            .collect();
        ranks[d] = rank_gf2(&cols);
    }
    (0..top).map(|d| by_dim[d].len() - ranks[d] - ranks[d + 1]).collect()
}

pub fn euler(simplices: &[Vec<usize>]) -> i64 {
    simplices.iter().map(|s| if s.len() % 2 == 1 { 1 } else { -1 }).sum()
}

/// Betti numbers of the full subcomplex on the vertices satisfying `keep`.
pub fn full_subcomplex_betti(k: &PLComplex, keep: impl Fn(usize) -> bool) -> Vec<usize> {
    let ss: Vec<Vec<usize>> = k.simplices.iter().filter(|s| s.iter().all(|&v| keep(v))).cloned().collect();
    betti_gf2(&ss)
}

/// Betti numbers of the level set `f^{-1}(t)`, after splitting every simplex at `t`.
pub fn level_set_betti(k: &PLComplex, fun: usize, t: &Q) -> Vec<usize> {
    let split = k.split_levels(fun, std::slice::from_ref(t), usize::MAX).expect("split");
    full_subcomplex_betti(&split, |v| &split.values[fun][v] == t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Ord,
    Rel,
    Ext,
}

/// One extended persistence pair: degree, kind, birth value, death value.
pub type EpPair = (usize, Kind, Q, Q);

/// Extended persistence of the lower star filtration of `f`, by reduction of the boundary
/// matrix of the coned filtration over GF(2): the cone point first, then the complex by
/// ascending maximum value, then the cone over each simplex by descending minimum value.
pub fn extended_persistence(f: &[Q], simplices: &[Vec<usize>]) -> BTreeMap<EpPair, usize> {
    #[derive(Clone)]
    struct Cell {
        base: Vec<usize>,
        coned: bool,
        value: Q,
    }
    let max_of = |s: &[usize]| s.iter().map(|&v| f[v].clone()).max().unwrap();
    let min_of = |s: &[usize]| s.iter().map(|&v| f[v].clone()).min().unwrap();
    let mut lower: Vec<Cell> =
        simplices.iter().map(|s| Cell { base: s.clone(), coned: false, value: max_of(s) }).collect();
    lower.sort_by(|a, b| (&a.value, a.base.len(), &a.base).cmp(&(&b.value, b.base.len(), &b.base)));
    let mut upper: Vec<Cell> =
        simplices.iter().map(|s| Cell { base: s.clone(), coned: true, value: min_of(s) }).collect();
    upper.sort_by(|a, b| (&b.value, a.base.len(), &a.base).cmp(&(&a.value, b.base.len(), &b.base)));
    let apex = Cell { base: vec![], coned: true, value: Q::from_integer(0.into()) };
    let cells: Vec<Cell> = std::iter::once(apex).chain(lower).chain(upper).collect();
    let pos: HashMap<(Vec<usize>, bool), usize> =
        cells.iter().enumerate().map(|(i, c)| ((c.base.clone(), c.coned), i)).collect();
    let dim = |c: &Cell| c.base.len() as i64 - 1 + c.coned as i64;

    let mut lows: HashMap<usize, usize> = HashMap::new();
    let mut reduced: Vec<Vec<usize>> = vec![];
    let mut out = BTreeMap::new();
    for (j, c) in cells.iter().enumerate() {
        let mut col: Vec<usize> = vec![];
        if c.coned {
            if !c.base.is_empty() {
                col.push(pos[&(c.base.clone(), false)]);
                if c.base.len() == 1 {
                    col.push(0);
                } else {
                    col.extend(faces(&c.base).into_iter().map(|f| pos[&(f, true)]));
                }
            }
        } else if c.base.len() > 1 {
            col.extend(faces(&c.base).into_iter().map(|f| pos[&(f, false)]));
        }
        col.sort();
        while let Some(&low) = col.last() {
            match lows.get(&low) {
                Some(&k) => col = sym_diff(&col, &reduced[k]),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            lows.insert(low, j);
            let b = &cells[low];
            let degree = dim(b) as usize;
            let kind = match (b.coned, c.coned) {
                (false, false) => Kind::Ord,
                (false, true) => Kind::Ext,
                (true, true) => Kind::Rel,
                (true, false) => unreachable!("a coned cell precedes an uncone cell"),
            };
            if kind == Kind::Ext || b.value != c.value {
                *out.entry((degree, kind, b.value.clone(), c.value.clone())).or_insert(0) += 1;
            }
        }
        reduced.push(col);
    }
    out
}
