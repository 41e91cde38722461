//! Exact model of the strip `M = { (x, y) : -pi <= x + y <= pi }`, its product order,
//! the glide reflection `T`, the shift action `alpha`, the map `rho`, tiles, regions,
//! and the level set barcode bijection.
//!
//! Every coordinate is stored as `k*pi + arctan(v)` with `k` an integer and `v` an
//! extended rational, so all predicates are decided without floating point.

use std::cmp::Ordering;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Exact rational numbers used throughout the crate.
pub type Q = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("point {0} lies outside the strip")]
    OutsideStrip(Box<StripPoint>),
    #[error("point {0} lies on the boundary of the strip")]
    OnBoundary(Box<StripPoint>),
    #[error("no tile index found for {0} in the search window")]
    NoTile(Box<StripPoint>),
    #[error("region classification failed for {0}: {1}")]
    Region(Box<StripPoint>, String),
    #[error("negative shift parameter {0}")]
    NegativeDelta(Q),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"-0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Q, GeometryError> {
    let t = s.trim();
    let err = || GeometryError::Parse(s.to_string());
    if t.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Q::new(p, q));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let neg = ip.starts_with('-');
        let ip_digits = ip.trim_start_matches(['-', '+']);
        if !ip_digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let whole: BigInt = if ip_digits.is_empty() { BigInt::zero() } else { ip_digits.parse().map_err(|_| err())? };
        let frac: BigInt = fp.parse().map_err(|_| err())?;
        let den = num::pow(BigInt::from(10), fp.len());
        let mag = Q::new(whole * &den + frac, den);
        return Ok(if neg { -mag } else { mag });
    }
    let p: BigInt = t.parse().map_err(|_| err())?;
    Ok(Q::from_integer(p))
}

/// Formats a rational as `"p"` or `"p/q"`.
pub fn format_rational(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Serde adapter storing a rational as its `"p/q"` string.
pub mod qstr {
    use super::{format_rational, parse_rational, Q};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

/// A rational or `+inf`; `-inf` never occurs in canonical coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtRational {
    Fin(Q),
    PosInf,
}

impl ExtRational {
    pub fn fin(&self) -> Option<&Q> {
        match self {
            ExtRational::Fin(v) => Some(v),
            ExtRational::PosInf => None,
        }
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, ExtRational::PosInf)
    }

    /// Negation into the two-sided extended rationals.
    pub fn neg(&self) -> XRat {
        match self {
            ExtRational::Fin(v) => XRat::Fin(-v),
            ExtRational::PosInf => XRat::NegInf,
        }
    }

    pub fn to_xrat(&self) -> XRat {
        match self {
            ExtRational::Fin(v) => XRat::Fin(v.clone()),
            ExtRational::PosInf => XRat::PosInf,
        }
    }

    fn shifted(&self, d: &Q) -> ExtRational {
        match self {
            ExtRational::Fin(v) => ExtRational::Fin(v + d),
            ExtRational::PosInf => ExtRational::PosInf,
        }
    }

    pub fn atan(&self) -> f64 {
        match self {
            ExtRational::Fin(v) => q_to_f64(v).atan(),
            ExtRational::PosInf => std::f64::consts::FRAC_PI_2,
        }
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRational::Fin(a), ExtRational::Fin(b)) => a.cmp(b),
            (ExtRational::Fin(_), ExtRational::PosInf) => Ordering::Less,
            (ExtRational::PosInf, ExtRational::Fin(_)) => Ordering::Greater,
            (ExtRational::PosInf, ExtRational::PosInf) => Ordering::Equal,
        }
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Fin(v) => write!(f, "{}", format_rational(v)),
            ExtRational::PosInf => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "inf" || s == "+inf" {
            return Ok(ExtRational::PosInf);
        }
        parse_rational(&s).map(ExtRational::Fin).map_err(serde::de::Error::custom)
    }
}

/// Two-sided extended rationals, used for interval endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum XRat {
    NegInf,
    Fin(Q),
    PosInf,
}

impl XRat {
    pub fn fin(&self) -> Option<&Q> {
        match self {
            XRat::Fin(v) => Some(v),
            _ => None,
        }
    }

    pub fn neg(&self) -> XRat {
        match self {
            XRat::NegInf => XRat::PosInf,
            XRat::Fin(v) => XRat::Fin(-v),
            XRat::PosInf => XRat::NegInf,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            XRat::NegInf => f64::NEG_INFINITY,
            XRat::Fin(v) => q_to_f64(v),
            XRat::PosInf => f64::INFINITY,
        }
    }
}

impl fmt::Display for XRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XRat::NegInf => write!(f, "-inf"),
            XRat::Fin(v) => write!(f, "{}", format_rational(v)),
            XRat::PosInf => write!(f, "inf"),
        }
    }
}

impl Serialize for XRat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for XRat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "inf" | "+inf" => Ok(XRat::PosInf),
            "-inf" => Ok(XRat::NegInf),
            _ => parse_rational(&s).map(XRat::Fin).map_err(serde::de::Error::custom),
        }
    }
}

/// The real number `k*pi + arctan(v)`, with `arctan(+inf) = pi/2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub k: i64,
    pub v: ExtRational,
}

impl Coord {
    pub fn new(k: i64, v: Q) -> Coord {
        Coord { k, v: ExtRational::Fin(v) }
    }

    pub fn int(k: i64, v: i64) -> Coord {
        Coord::new(k, q(v))
    }

    /// `k*pi + pi/2`.
    pub fn half_pi(k: i64) -> Coord {
        Coord { k, v: ExtRational::PosInf }
    }

    /// Canonical coordinate for `k*pi + arctan(v)` where `v` may be `-inf`.
    pub fn from_xrat(k: i64, v: XRat) -> Coord {
        match v {
            XRat::NegInf => Coord { k: k - 1, v: ExtRational::PosInf },
            XRat::Fin(x) => Coord { k, v: ExtRational::Fin(x) },
            XRat::PosInf => Coord { k, v: ExtRational::PosInf },
        }
    }

    /// `k*pi - arctan(self.v)` expressed canonically, i.e. `(k, -v)`.
    fn neg_v(k: i64, v: &ExtRational) -> Coord {
        Coord::from_xrat(k, v.neg())
    }

    /// Translation by `m*pi`.
    pub fn shift_pi(&self, m: i64) -> Coord {
        Coord { k: self.k + m, v: self.v.clone() }
    }

    pub fn to_f64(&self) -> f64 {
        self.k as f64 * std::f64::consts::PI + self.v.atan()
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k, self.v)
    }
}

/// A point `(x, y)` of the plane; most operations require it to lie in the strip.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StripPoint {
    pub x: Coord,
    pub y: Coord,
}

impl fmt::Display for StripPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Position of a point relative to the strip.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StripPosition {
    Interior,
    Boundary,
    Outside,
}

impl StripPoint {
    pub fn new(x: Coord, y: Coord) -> StripPoint {
        StripPoint { x, y }
    }

    /// Shorthand for integer coordinate values, e.g. `StripPoint::ints((1, -1), (0, 0))`.
    pub fn ints(x: (i64, i64), y: (i64, i64)) -> StripPoint {
        StripPoint { x: Coord::int(x.0, x.1), y: Coord::int(y.0, y.1) }
    }

    /// The diagonal point `(arctan t, arctan t)`.
    pub fn diagonal(t: Q) -> StripPoint {
        StripPoint { x: Coord::new(0, t.clone()), y: Coord::new(0, t) }
    }

    pub fn position(&self) -> StripPosition {
        use StripPosition::*;
        let s = self.x.k + self.y.k;
        // Compare x.v against -y.v; the sum of the two arctangents is positive exactly when x.v > -y.v.
        let xv = self.x.v.to_xrat();
        let nyv = self.y.v.neg();
        match s {
            0 => {
                if self.x.v.is_inf() && self.y.v.is_inf() {
                    Boundary
                } else {
                    Interior
                }
            }
            1 => match xv.cmp(&nyv) {
                Ordering::Less => Interior,
                Ordering::Equal => Boundary,
                Ordering::Greater => Outside,
            },
            -1 => match xv.cmp(&nyv) {
                Ordering::Greater => Interior,
                Ordering::Equal => Boundary,
                Ordering::Less => Outside,
            },
            -2 => {
                if self.x.v.is_inf() && self.y.v.is_inf() {
                    Boundary
                } else {
                    Outside
                }
            }
            _ => Outside,
        }
    }

    pub fn in_strip(&self) -> bool {
        self.position() != StripPosition::Outside
    }

    pub fn is_interior(&self) -> bool {
        self.position() == StripPosition::Interior
    }

    pub fn is_boundary(&self) -> bool {
        self.position() == StripPosition::Boundary
    }

    fn require_strip(&self) -> Result<(), GeometryError> {
        if self.in_strip() {
            Ok(())
        } else {
            Err(GeometryError::OutsideStrip(Box::new(self.clone())))
        }
    }

    /// The order of the strip: `p <= q` iff `p.x >= q.x` and `p.y <= q.y`.
    pub fn leq(&self, other: &StripPoint) -> bool {
        self.x >= other.x && self.y <= other.y
    }

    pub fn lt(&self, other: &StripPoint) -> bool {
        self.leq(other) && self != other
    }

    /// Greatest lower bound in the product order.
    pub fn meet(&self, other: &StripPoint) -> StripPoint {
        StripPoint { x: self.x.clone().max(other.x.clone()), y: self.y.clone().min(other.y.clone()) }
    }

    /// Least upper bound in the product order.
    pub fn join(&self, other: &StripPoint) -> StripPoint {
        StripPoint { x: self.x.clone().min(other.x.clone()), y: self.y.clone().max(other.y.clone()) }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }
}

/// Applies `T(x, y) = (-pi - y, pi - x)` without the strip precondition.
fn t_raw(p: &StripPoint) -> StripPoint {
    StripPoint { x: Coord::neg_v(-1 - p.y.k, &p.y.v), y: Coord::neg_v(1 - p.x.k, &p.x.v) }
}

/// Applies `T^{-1}(x, y) = (pi - y, -pi - x)` without the strip precondition.
fn t_inv_raw(p: &StripPoint) -> StripPoint {
    StripPoint { x: Coord::neg_v(1 - p.y.k, &p.y.v), y: Coord::neg_v(-1 - p.x.k, &p.x.v) }
}

pub fn t_apply(p: &StripPoint) -> Result<StripPoint, GeometryError> {
    p.require_strip()?;
    Ok(t_raw(p))
}

pub fn t_inverse(p: &StripPoint) -> Result<StripPoint, GeometryError> {
    p.require_strip()?;
    Ok(t_inv_raw(p))
}

/// `T^n(p)` for any integer `n`, using that `T^2` is the translation by `(-2pi, 2pi)`.
pub fn t_pow(p: &StripPoint, n: i64) -> StripPoint {
    let m = n.div_euclid(2);
    let r = n.rem_euclid(2);
    let base = StripPoint { x: p.x.shift_pi(-2 * m), y: p.y.shift_pi(2 * m) };
    if r == 1 {
        t_raw(&base)
    } else {
        base
    }
}

/// Reflection at the diagonal, `(x, y) -> (y, x)`.
pub fn reflect(p: &StripPoint) -> StripPoint {
    StripPoint { x: p.y.clone(), y: p.x.clone() }
}

/// An element `(a1, a2)` of the ordered group `R^op x R`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShiftVector {
    #[serde(with = "qstr")]
    pub a1: Q,
    #[serde(with = "qstr")]
    pub a2: Q,
}

impl ShiftVector {
    pub fn new(a1: Q, a2: Q) -> ShiftVector {
        ShiftVector { a1, a2 }
    }

    pub fn zero() -> ShiftVector {
        ShiftVector { a1: Q::zero(), a2: Q::zero() }
    }

    /// The shift `(-delta, delta)` defining `Omega_delta`.
    pub fn omega(delta: &Q) -> ShiftVector {
        ShiftVector { a1: -delta.clone(), a2: delta.clone() }
    }

    /// `a <= b` iff `a1 >= b1` and `a2 <= b2`.
    pub fn leq(&self, other: &ShiftVector) -> bool {
        self.a1 >= other.a1 && self.a2 <= other.a2
    }

    pub fn add(&self, other: &ShiftVector) -> ShiftVector {
        ShiftVector { a1: &self.a1 + &other.a1, a2: &self.a2 + &other.a2 }
    }

    pub fn neg(&self) -> ShiftVector {
        ShiftVector { a1: -self.a1.clone(), a2: -self.a2.clone() }
    }
}

impl fmt::Display for ShiftVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", format_rational(&self.a1), format_rational(&self.a2))
    }
}

fn is_even(k: i64) -> bool {
    k.rem_euclid(2) == 0
}

/// The shift action without the strip precondition.
pub fn alpha_raw(a: &ShiftVector, p: &StripPoint) -> StripPoint {
    let na1 = -a.a1.clone();
    let na2 = -a.a2.clone();
    let dx = if is_even(p.x.k) { &a.a1 } else { &na2 };
    let dy = if is_even(p.y.k) { &a.a2 } else { &na1 };
    StripPoint {
        x: Coord { k: p.x.k, v: p.x.v.shifted(dx) },
        y: Coord { k: p.y.k, v: p.y.v.shifted(dy) },
    }
}

pub fn alpha_apply(a: &ShiftVector, p: &StripPoint) -> Result<StripPoint, GeometryError> {
    p.require_strip()?;
    Ok(alpha_raw(a, p))
}

pub fn omega_apply(delta: &Q, p: &StripPoint) -> Result<StripPoint, GeometryError> {
    if delta.is_negative() {
        return Err(GeometryError::NegativeDelta(delta.clone()));
    }
    alpha_apply(&ShiftVector::omega(delta), p)
}

/// A finite union of disjoint open intervals, sorted by left endpoint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RealOpenSet {
    pub intervals: Vec<(XRat, XRat)>,
}

impl RealOpenSet {
    pub fn empty() -> RealOpenSet {
        RealOpenSet { intervals: vec![] }
    }

    pub fn reals() -> RealOpenSet {
        RealOpenSet { intervals: vec![(XRat::NegInf, XRat::PosInf)] }
    }

    /// Builds a set from intervals, dropping empty ones and merging overlaps.
    pub fn from_intervals(mut iv: Vec<(XRat, XRat)>) -> RealOpenSet {
        iv.retain(|(a, b)| a < b);
        iv.sort();
        let mut out: Vec<(XRat, XRat)> = vec![];
        for (a, b) in iv {
            if let Some(last) = out.last_mut() {
                // Open intervals (l, r) and (a, b) with a < r overlap; touching ones stay apart.
                if a < last.1 {
                    if b > last.1 {
                        last.1 = b;
                    }
                    continue;
                }
            }
            out.push((a, b));
        }
        RealOpenSet { intervals: out }
    }

    pub fn contains(&self, t: &Q) -> bool {
        let t = XRat::Fin(t.clone());
        self.intervals.iter().any(|(a, b)| *a < t && t < *b)
    }

    pub fn is_subset(&self, other: &RealOpenSet) -> bool {
        self.intervals.iter().all(|(a, b)| other.intervals.iter().any(|(c, d)| c <= a && b <= d))
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

impl fmt::Display for RealOpenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self.intervals.iter().map(|(a, b)| format!("({a}, {b})")).collect();
        write!(f, "{}", parts.join(" u "))
    }
}

/// The data of `rho(p)`: the open interval `rho1` and the closed complement `C` of `rho0`.
///
/// `rho0 = R \ C` where `C = [c_lo, c_hi]`; an infinite end of `C` is open.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RhoData {
    /// `rho1 = (lo, hi)`, or `None` when empty.
    pub rho1: Option<(XRat, XRat)>,
    /// `C = [lo, hi]`, or `None` when empty (so that `rho0 = R`).
    pub comp: Option<(XRat, XRat)>,
}

impl RhoData {
    pub fn rho1_set(&self) -> RealOpenSet {
        match &self.rho1 {
            None => RealOpenSet::empty(),
            Some((a, b)) => RealOpenSet::from_intervals(vec![(a.clone(), b.clone())]),
        }
    }

    pub fn rho0_set(&self) -> RealOpenSet {
        match &self.comp {
            None => RealOpenSet::reals(),
            Some((a, b)) => {
                RealOpenSet::from_intervals(vec![(XRat::NegInf, a.clone()), (b.clone(), XRat::PosInf)])
            }
        }
    }
}

/// Computes `rho(p)` from the explicit formula, without the strip precondition.
pub fn rho_data(p: &StripPoint) -> RhoData {
    let half = Coord::half_pi(0);
    let neg_half = Coord::half_pi(-1);
    let neg_three_half = Coord::half_pi(-2);
    let three_half = Coord::half_pi(1);
    // rho1 = { t : -pi - y < arctan t < pi - x }.
    let lo = if p.y >= neg_half {
        Some(XRat::NegInf)
    } else if p.y > neg_three_half {
        // y = (-1, v) with v finite, so -pi - y = arctan(-v).
        Some(p.y.v.neg())
    } else {
        None
    };
    let hi = if p.x <= half {
        Some(XRat::PosInf)
    } else if p.x < three_half {
        Some(p.x.v.neg())
    } else {
        None
    };
    let rho1 = match (lo, hi) {
        (Some(a), Some(b)) if a < b => Some((a, b)),
        _ => None,
    };
    // C = { t : y <= arctan t <= x }.
    let c_lo = if p.y <= neg_half {
        Some(XRat::NegInf)
    } else if p.y < half {
        Some(p.y.v.to_xrat())
    } else {
        None
    };
    let c_hi = if p.x >= half {
        Some(XRat::PosInf)
    } else if p.x > neg_half {
        Some(p.x.v.to_xrat())
    } else {
        None
    };
    let comp = match (c_lo, c_hi) {
        (Some(a), Some(b)) if a <= b => Some((a, b)),
        _ => None,
    };
    RhoData { rho1, comp }
}

pub fn rho(p: &StripPoint) -> Result<(RealOpenSet, RealOpenSet), GeometryError> {
    p.require_strip()?;
    let d = rho_data(p);
    Ok((d.rho1_set(), d.rho0_set()))
}

fn in_down_im(p: &StripPoint) -> bool {
    p.y <= p.x && p.y <= Coord::half_pi(0) && p.x >= Coord::half_pi(-1)
}

fn in_t_inv_down_im(p: &StripPoint) -> bool {
    p.x >= Coord::half_pi(0) && p.y <= Coord::half_pi(-1) && p.y <= p.x.shift_pi(-2)
}

/// Membership in the fundamental domain `D = (down Im) \ T^{-1}(down Im)`.
pub fn in_fundamental_domain(p: &StripPoint) -> bool {
    p.is_interior() && in_down_im(p) && !in_t_inv_down_im(p)
}

/// The unique `n` with `T^n(p)` in the fundamental domain.
pub fn tile_index(p: &StripPoint) -> Result<i64, GeometryError> {
    match p.position() {
        StripPosition::Outside => return Err(GeometryError::OutsideStrip(Box::new(p.clone()))),
        StripPosition::Boundary => return Err(GeometryError::OnBoundary(Box::new(p.clone()))),
        StripPosition::Interior => {}
    }
    // T lowers x - y by 2pi, and D lies between x - y = 0 and x - y = 2pi.
    let (fx, fy) = p.to_f64();
    let est = ((fx - fy) / (2.0 * std::f64::consts::PI)).floor() as i64;
    let hits: Vec<i64> = (est - 2..=est + 2).filter(|&n| in_fundamental_domain(&t_pow(p, n))).collect();
    match hits.as_slice() {
        [n] => Ok(*n),
        [] => Err(GeometryError::NoTile(Box::new(p.clone()))),
        _ => panic!("tile index of {p} is not unique: {hits:?}"),
    }
}

/// Tile index, or `None` for points on the boundary of the strip.
pub fn tile_index_opt(p: &StripPoint) -> Option<i64> {
    tile_index(p).ok()
}

/// Membership of `p` in the support `(down v) and int(up T^{-1} v)` of the block at `v`.
pub fn block_contains(v: &StripPoint, p: &StripPoint) -> bool {
    if !p.is_interior() || !p.leq(v) {
        return false;
    }
    let t = t_inv_raw(v);
    p.x < t.x && p.y > t.y
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    Ord,
    Rel,
    Ext,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Region::Ord => "Ord",
            Region::Rel => "Rel",
            Region::Ext => "Ext",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionInfo {
    pub degree: i64,
    pub region: Region,
    pub pair: (ExtRational, ExtRational),
}

fn ext_neg(v: &ExtRational) -> ExtRational {
    match v.neg() {
        XRat::Fin(x) => ExtRational::Fin(x),
        // Only reachable for the boundary conventions; report the magnitude.
        _ => ExtRational::PosInf,
    }
}

/// Classifies a diagram point as ordinary, relative, or extended, with its classical pair.
pub fn classify_region(u: &StripPoint) -> Result<RegionInfo, GeometryError> {
    let t = tile_index(u)?;
    let neg_half = Coord::half_pi(-1);
    let half = Coord::half_pi(0);
    let hits: Vec<(i64, StripPoint)> = (t - 2..=t + 2)
        .map(|n| (n, t_pow(u, n)))
        .filter(|(_, w)| w.x > neg_half && w.y >= neg_half)
        .collect();
    if hits.len() != 1 {
        return Err(GeometryError::Region(Box::new(u.clone()), format!("{} candidate degrees", hits.len())));
    }
    let (n, w) = hits.into_iter().next().unwrap();
    let birth_relative = w.x < half;
    let death_absolute = w.y < half;
    let (region, pair) = match (birth_relative, death_absolute) {
        (false, true) => (Region::Ord, (w.y.v.clone(), ext_neg(&w.x.v))),
        (true, true) => (Region::Ext, (w.y.v.clone(), w.x.v.clone())),
        (true, false) => (Region::Rel, (ext_neg(&w.y.v), w.x.v.clone())),
        (false, false) => {
            return Err(GeometryError::Region(Box::new(u.clone()), "absolute birth with relative death".into()));
        }
    };
    Ok(RegionInfo { degree: n, region, pair })
}

/// An interval of the real line with endpoint types.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypedInterval {
    pub lo: XRat,
    pub hi: XRat,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl TypedInterval {
    pub fn contains(&self, t: &Q) -> bool {
        let t = XRat::Fin(t.clone());
        let lo_ok = if self.lo_closed { self.lo <= t } else { self.lo < t };
        let hi_ok = if self.hi_closed { t <= self.hi } else { t < self.hi };
        lo_ok && hi_ok
    }
}

impl fmt::Display for TypedInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// The level set barcode interval `rho1 \ rho0` at `T^n(u)` with `n` the tile index.
pub fn beta_levelset(u: &StripPoint) -> Result<(i64, TypedInterval), GeometryError> {
    let n = tile_index(u)?;
    let w = t_pow(u, n);
    let d = rho_data(&w);
    let bad = || GeometryError::Region(Box::new(u.clone()), "empty level set interval".into());
    let (lo, hi) = d.rho1.ok_or_else(bad)?;
    let (a, b) = d.comp.ok_or_else(bad)?;
    let (l, lc) = if a > lo { (a, true) } else { (lo.clone(), false) };
    let (r, rc) = if b < hi { (b, true) } else { (hi.clone(), false) };
    let nonempty = l < r || (l == r && lc && rc);
    if !nonempty {
        return Err(bad());
    }
    Ok((n, TypedInterval { lo: l, hi: r, lo_closed: lc, hi_closed: rc }))
}

/// Floating-point evaluation of the transcendental definitions, used to cross-check the
/// exact coordinate rules.
pub mod float_oracle {
    use std::f64::consts::{FRAC_PI_2, PI};

    pub fn t(x: f64, y: f64) -> (f64, f64) {
        (-PI - y, PI - x)
    }

    pub fn t_inv(x: f64, y: f64) -> (f64, f64) {
        (PI - y, -PI - x)
    }

    /// The lift of the circle map `g_a` fixing `pi/2`. On the right half circle the slope
    /// is shifted by `a2`, on the left half by `-a1`.
    pub fn g_lift(a1: f64, a2: f64, theta: f64) -> f64 {
        let m = ((theta - FRAC_PI_2) / PI).ceil();
        let base = m * PI;
        let phi = theta - base;
        if (phi - FRAC_PI_2).abs() < 1e-15 {
            return theta;
        }
        let shift = if (m as i64).rem_euclid(2) == 0 { a2 } else { -a1 };
        base + (phi.tan() + shift).atan()
    }

    fn sigma(t: f64) -> f64 {
        PI - t
    }

    /// `alpha_a = (sigma g sigma) x g`.
    pub fn alpha(a1: f64, a2: f64, x: f64, y: f64) -> (f64, f64) {
        (sigma(g_lift(a1, a2, sigma(x))), g_lift(a1, a2, y))
    }

    pub fn in_strip(x: f64, y: f64, tol: f64) -> bool {
        let s = x + y;
        s >= -PI - tol && s <= PI + tol
    }

    /// `rho1` as `(lo, hi)` with infinite ends, or `None` if empty.
    pub fn rho1(x: f64, y: f64) -> Option<(f64, f64)> {
        let lb = -PI - y;
        let ub = PI - x;
        let lo = if lb <= -FRAC_PI_2 { f64::NEG_INFINITY } else if lb < FRAC_PI_2 { lb.tan() } else { return None };
        let hi = if ub >= FRAC_PI_2 { f64::INFINITY } else if ub > -FRAC_PI_2 { ub.tan() } else { return None };
        if lo < hi {
            Some((lo, hi))
        } else {
            None
        }
    }

    /// The closed complement of `rho0` as `(lo, hi)`, or `None` if empty.
    pub fn rho0_complement(x: f64, y: f64) -> Option<(f64, f64)> {
        let lo = if y <= -FRAC_PI_2 { f64::NEG_INFINITY } else if y < FRAC_PI_2 { y.tan() } else { return None };
        let hi = if x >= FRAC_PI_2 { f64::INFINITY } else if x > -FRAC_PI_2 { x.tan() } else { return None };
        if lo <= hi {
            Some((lo, hi))
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: (i64, i64), y: (i64, i64)) -> StripPoint {
        StripPoint::ints(x, y)
    }

    #[test]
    fn t_examples() {
        assert_eq!(t_apply(&p((0, 0), (0, 0))).unwrap(), p((-1, 0), (1, 0)));
        assert_eq!(t_pow(&p((0, 0), (0, 0)), 2), p((-2, 0), (2, 0)));
        assert_eq!(t_inverse(&p((-1, 0), (1, 0))).unwrap(), p((0, 0), (0, 0)));
        // pi - y and -pi - x for x = pi - arctan 1, y = -2pi + arctan 2.
        assert_eq!(t_inverse(&p((1, -1), (-2, 2))).unwrap(), p((3, -2), (-2, 1)));
        assert_eq!(t_apply(&p((1, -1), (-2, 2))).unwrap(), p((1, -2), (0, 1)));
    }

    #[test]
    fn t_handles_infinite_coordinates() {
        let pt = StripPoint::new(Coord::half_pi(0), Coord::int(0, 0));
        let img = t_apply(&pt).unwrap();
        // -pi - 0 = (-1, 0) and pi - pi/2 = pi/2 = (0, inf).
        assert_eq!(img, StripPoint::new(Coord::int(-1, 0), Coord::half_pi(0)));
        assert_eq!(t_inverse(&img).unwrap(), pt);
    }

    #[test]
    fn membership_cases() {
        assert!(p((0, 0), (0, 0)).is_interior());
        assert!(StripPoint::new(Coord::half_pi(0), Coord::half_pi(0)).is_boundary());
        assert!(p((1, -1), (0, 1)).is_boundary());
        assert!(p((1, -1), (0, 0)).is_interior());
        assert_eq!(p((1, 1), (0, 0)).position(), StripPosition::Outside);
        assert!(StripPoint::new(Coord::half_pi(-1), Coord::half_pi(-1)).is_boundary());
        assert_eq!(p((2, 0), (0, 0)).position(), StripPosition::Outside);
        assert!(t_apply(&p((2, 0), (0, 0))).is_err());
    }

    #[test]
    fn alpha_examples() {
        let a = ShiftVector::new(q(3), qf(1, 2));
        assert_eq!(
            alpha_apply(&a, &p((0, 0), (0, 0))).unwrap(),
            StripPoint::new(Coord::new(0, q(3)), Coord::new(0, qf(1, 2)))
        );
        let h = ShiftVector::new(q(-2), q(0));
        assert_eq!(alpha_apply(&h, &p((0, 4), (0, 0))).unwrap(), p((0, 2), (0, 0)));
        assert_eq!(alpha_apply(&h, &p((1, -1), (-2, 2))).unwrap(), p((1, -1), (-2, 2)));
        assert_eq!(omega_apply(&q(1), &p((0, 2), (0, 0))).unwrap(), p((0, 1), (0, 1)));
        assert!(omega_apply(&q(-1), &p((0, 2), (0, 0))).is_err());
    }

    #[test]
    fn rho_examples() {
        let (r1, r0) = rho(&StripPoint::diagonal(q(3))).unwrap();
        assert_eq!(r1, RealOpenSet::reals());
        assert_eq!(
            r0.intervals,
            vec![(XRat::NegInf, XRat::Fin(q(3))), (XRat::Fin(q(3)), XRat::PosInf)]
        );
        let (r1, r0) = rho(&p((1, -1), (0, 0))).unwrap();
        assert_eq!(r1.intervals, vec![(XRat::NegInf, XRat::Fin(q(1)))]);
        assert_eq!(r0.intervals, vec![(XRat::NegInf, XRat::Fin(q(0)))]);
        let (r1, r0) = rho(&p((0, 2), (0, 0))).unwrap();
        assert_eq!(r1, RealOpenSet::reals());
        assert_eq!(
            r0.intervals,
            vec![(XRat::NegInf, XRat::Fin(q(0))), (XRat::Fin(q(2)), XRat::PosInf)]
        );
    }

    #[test]
    fn tile_examples() {
        assert_eq!(tile_index(&p((0, 0), (0, 0))).unwrap(), 0);
        assert_eq!(tile_index(&p((-1, 0), (1, 0))).unwrap(), -1);
        assert_eq!(tile_index(&p((1, -1), (-2, 2))).unwrap(), 1);
        assert_eq!(tile_index(&p((1, -2), (-1, 0))).unwrap(), 0);
        assert!(tile_index(&p((1, -1), (0, 1))).is_err());
    }

    #[test]
    fn block_examples() {
        let v = p((1, -1), (0, 0));
        assert!(block_contains(&v, &v));
        assert!(!block_contains(&v, &t_inverse(&v).unwrap()));
        let w = StripPoint::new(Coord::int(1, -1), Coord::new(-1, qf(1, 2)));
        assert!(block_contains(&v, &w));
    }

    #[test]
    fn region_examples() {
        let r = classify_region(&p((0, 2), (0, 0))).unwrap();
        assert_eq!((r.degree, r.region), (0, Region::Ext));
        assert_eq!(r.pair, (ExtRational::Fin(q(0)), ExtRational::Fin(q(2))));
        let r = classify_region(&p((1, -1), (0, 0))).unwrap();
        assert_eq!((r.degree, r.region), (0, Region::Ord));
        assert_eq!(r.pair, (ExtRational::Fin(q(0)), ExtRational::Fin(q(1))));
        let r = classify_region(&p((1, -1), (-2, 2))).unwrap();
        assert_eq!((r.degree, r.region), (1, Region::Ord));
        assert_eq!(r.pair, (ExtRational::Fin(q(1)), ExtRational::Fin(q(2))));
        let r = classify_region(&p((1, -2), (-1, 0))).unwrap();
        assert_eq!((r.degree, r.region), (1, Region::Ext));
        assert_eq!(r.pair, (ExtRational::Fin(q(2)), ExtRational::Fin(q(0))));
    }

    #[test]
    fn beta_examples() {
        let (n, i) = beta_levelset(&StripPoint::diagonal(q(5))).unwrap();
        assert_eq!(n, 0);
        assert_eq!(i, TypedInterval { lo: XRat::Fin(q(5)), hi: XRat::Fin(q(5)), lo_closed: true, hi_closed: true });
        let (_, i) = beta_levelset(&p((1, -1), (0, 0))).unwrap();
        assert_eq!(i.to_string(), "[0, 1)");
        let (_, i) = beta_levelset(&p((0, 2), (0, 0))).unwrap();
        assert_eq!(i.to_string(), "[0, 2]");
    }

    #[test]
    fn reflect_examples() {
        let o = p((0, 0), (0, 0));
        assert_eq!(reflect(&o), o);
        let a = p((1, -1), (0, 3));
        assert_eq!(reflect(&reflect(&a)), a);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/6").unwrap(), qf(1, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), qf(-1, 4));
        assert_eq!(parse_rational("7").unwrap(), q(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert_eq!(format_rational(&qf(-3, 6)), "-1/2");
    }

    #[test]
    fn open_set_normalization() {
        let s = RealOpenSet::from_intervals(vec![
            (XRat::Fin(q(2)), XRat::Fin(q(5))),
            (XRat::NegInf, XRat::Fin(q(1))),
            (XRat::Fin(q(1)), XRat::Fin(q(1))),
            (XRat::Fin(q(4)), XRat::PosInf),
        ]);
        assert_eq!(s.intervals, vec![(XRat::NegInf, XRat::Fin(q(1))), (XRat::Fin(q(2)), XRat::PosInf)]);
        assert!(!s.contains(&q(1)));
        assert!(s.contains(&q(3)));
    }
}
