//! Interval algebra, cross ratios and the Möbius-type symmetries.

use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Interval endpoint. Unbounded ends are a separate variant, never a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    NegInf,
    Finite(f64),
    PosInf,
}

impl Endpoint {
    pub fn value(self) -> f64 {
        match self {
            Endpoint::NegInf => f64::NEG_INFINITY,
            Endpoint::Finite(x) => x,
            Endpoint::PosInf => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Endpoint::Finite(_))
    }

    fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            Endpoint::PosInf
        } else if x == f64::NEG_INFINITY {
            Endpoint::NegInf
        } else {
            Endpoint::Finite(x)
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::NegInf => write!(f, "-inf"),
            Endpoint::PosInf => write!(f, "inf"),
            Endpoint::Finite(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Endpoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Endpoint::Finite(x) => s.serialize_f64(*x),
            Endpoint::PosInf => s.serialize_str("inf"),
            Endpoint::NegInf => s.serialize_str("-inf"),
        }
    }
}

/// Open interval `(a, b)` with at most one unbounded end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: Endpoint,
    b: Endpoint,
}

impl Interval {
    /// Builds `(a, b)`; `±f64::INFINITY` is accepted and mapped to the
    /// unbounded variants.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a.is_nan() || b.is_nan() {
            return Err(Error::domain("interval endpoint is NaN"));
        }
        let (ea, eb) = (Endpoint::from_f64(a), Endpoint::from_f64(b));
        if ea == Endpoint::PosInf || eb == Endpoint::NegInf {
            return Err(Error::domain(format!("interval ({a}, {b}) has a misplaced infinity")));
        }
        if !ea.is_finite() && !eb.is_finite() {
            return Err(Error::domain("at most one endpoint may be infinite"));
        }
        if a >= b {
            return Err(Error::domain(format!("interval ({a}, {b}) needs a < b")));
        }
        Ok(Interval { a: ea, b: eb })
    }

    /// Bounded interval; panics on invalid input. Intended for literals.
    pub fn finite(a: f64, b: f64) -> Self {
        assert!(a.is_finite() && b.is_finite() && a < b, "invalid interval ({a}, {b})");
        Interval { a: Endpoint::Finite(a), b: Endpoint::Finite(b) }
    }

    /// `(a, +∞)`.
    pub fn right_unbounded(a: f64) -> Result<Self> {
        Self::new(a, f64::INFINITY)
    }

    pub fn left(&self) -> Endpoint {
        self.a
    }

    pub fn right(&self) -> Endpoint {
        self.b
    }

    /// Left endpoint as a float (`-inf` when unbounded).
    pub fn lo(&self) -> f64 {
        self.a.value()
    }

    /// Right endpoint as a float (`+inf` when unbounded).
    pub fn hi(&self) -> f64 {
        self.b.value()
    }

    pub fn is_bounded(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }

    /// Lebesgue measure, `+inf` for unbounded intervals.
    pub fn length(&self) -> f64 {
        self.hi() - self.lo()
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo() + self.hi())
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo() && x < self.hi()
    }

    /// Distance between closures; zero when they touch, negative when they overlap.
    pub fn gap(&self, other: &Interval) -> f64 {
        if self.lo() <= other.lo() {
            other.lo() - self.hi()
        } else {
            self.lo() - other.hi()
        }
    }

    fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo().max(other.lo());
        let hi = self.hi().min(other.hi());
        (lo < hi).then(|| Interval { a: Endpoint::from_f64(lo), b: Endpoint::from_f64(hi) })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(&self.a)?;
        seq.serialize_element(&self.b)?;
        seq.end()
    }
}

fn parse_endpoint(tok: &str) -> Result<f64> {
    let t = tok.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => t
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::domain(format!("malformed endpoint '{t}'"))),
    }
}

impl FromStr for Interval {
    type Err = Error;

    /// Parses `"a,b"`; `inf` is accepted as the right endpoint (and `-inf` as the left).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::domain(format!("malformed interval '{s}', expected 'a,b'")));
        }
        Interval::new(parse_endpoint(parts[0])?, parse_endpoint(parts[1])?)
    }
}

fn check_separated(left: &Interval, right: &Interval) -> Result<f64> {
    let gap = right.lo() - left.hi();
    if gap == 0.0 {
        Err(Error::TouchingClosures { at: left.hi() })
    } else if gap < 0.0 || gap.is_nan() {
        Err(Error::domain(format!("intervals {left} and {right} overlap")))
    } else {
        Ok(gap)
    }
}

/// Logarithm of the cross ratio of two intervals with disjoint closures.
///
/// For `(a,b)` left of `(c,d)` this is `ln[(c-a)(d-b) / ((c-b)(d-a))]`,
/// evaluated as `ln_1p((b-a)(d-c) / ((c-b)(d-a)))` so that far-separated
/// pairs keep full relative precision. One unbounded end is allowed and
/// gives the limit form.
pub fn cross_ratio_log(i1: &Interval, i2: &Interval) -> Result<f64> {
    let (l, r) = if i1.lo() <= i2.lo() { (i1, i2) } else { (i2, i1) };
    let gap = check_separated(l, r)?;
    match (l.is_bounded(), r.is_bounded()) {
        (true, true) => {
            let (a, b, c, d) = (l.lo(), l.hi(), r.lo(), r.hi());
            Ok(((b - a) * (d - c) / (gap * (d - a))).ln_1p())
        }
        // (a,b) and (c,∞): ratio (c-a)/(c-b)
        (true, false) => Ok((l.length() / gap).ln_1p()),
        // (-∞,b) and (c,d): ratio (d-b)/(c-b)
        (false, true) => Ok((r.length() / gap).ln_1p()),
        (false, false) => Err(Error::domain("at most one interval may be unbounded")),
    }
}

/// Finite union of open intervals, kept sorted by left endpoint.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn new(mut intervals: Vec<Interval>) -> Self {
        intervals.sort_by(|x, y| x.lo().total_cmp(&y.lo()));
        IntervalSet { intervals }
    }

    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn single(i: Interval) -> Self {
        IntervalSet { intervals: vec![i] }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals.iter().all(Interval::is_bounded)
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    /// Whether all closures are pairwise disjoint.
    pub fn is_strictly_separated(&self) -> bool {
        self.intervals.windows(2).all(|w| w[1].lo() > w[0].hi())
    }

    /// Minimal distance between consecutive closures. Errors if any two
    /// closures touch or overlap; `+inf` for fewer than two intervals.
    pub fn min_gap(&self) -> Result<f64> {
        let mut g = f64::INFINITY;
        for w in self.intervals.windows(2) {
            g = g.min(check_separated(&w[0], &w[1])?);
        }
        Ok(g)
    }

    /// Plain concatenation of two sets (no merging).
    pub fn join(&self, other: &IntervalSet) -> IntervalSet {
        let mut v = self.intervals.clone();
        v.extend_from_slice(&other.intervals);
        IntervalSet::new(v)
    }

    /// Set union; overlapping members are merged, touching ones are kept apart
    /// since the shared endpoint is not in either open interval.
    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let all = self.join(other);
        let mut out: Vec<Interval> = Vec::with_capacity(all.len());
        for i in all.intervals {
            match out.last_mut() {
                Some(last) if i.lo() < last.hi() => {
                    if i.hi() > last.hi() {
                        last.b = i.b;
                    }
                }
                _ => out.push(i),
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let mut v = Vec::new();
        for x in &self.intervals {
            for y in &other.intervals {
                if let Some(z) = x.intersect(y) {
                    v.push(z);
                }
            }
        }
        IntervalSet::new(v)
    }

    /// `self ∖ other`, up to the (measure-zero) endpoints of `other`.
    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        let mut pieces = self.intervals.clone();
        for cut in &other.intervals {
            let mut next = Vec::with_capacity(pieces.len() + 1);
            for p in pieces {
                if cut.hi() <= p.lo() || cut.lo() >= p.hi() {
                    next.push(p);
                    continue;
                }
                if cut.lo() > p.lo() {
                    next.push(Interval { a: p.a, b: Endpoint::from_f64(cut.lo()) });
                }
                if cut.hi() < p.hi() {
                    next.push(Interval { a: Endpoint::from_f64(cut.hi()), b: p.b });
                }
            }
            pieces = next;
        }
        IntervalSet::new(pieces)
    }

    pub fn apply(&self, t: Mobius) -> Result<IntervalSet> {
        apply_mobius(self, t)
    }
}

impl From<Interval> for IntervalSet {
    fn from(i: Interval) -> Self {
        IntervalSet::single(i)
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "∅");
        }
        for (k, i) in self.intervals.iter().enumerate() {
            if k > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl FromStr for IntervalSet {
    type Err = Error;

    /// Semicolon-separated list of `"a,b"` intervals.
    fn from_str(s: &str) -> Result<Self> {
        let v = s
            .split(';')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Interval>>>()?;
        Ok(IntervalSet::new(v))
    }
}

/// Split of the indices of an [`IntervalSet`] into two nonempty groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    p1: Vec<usize>,
    p2: Vec<usize>,
}

impl Partition {
    pub fn new(mut p1: Vec<usize>, mut p2: Vec<usize>, n: usize) -> Result<Self> {
        p1.sort_unstable();
        p2.sort_unstable();
        if p1.is_empty() || p2.is_empty() {
            return Err(Error::argument("both partition classes must be nonempty"));
        }
        let mut seen = vec![false; n];
        for &k in p1.iter().chain(&p2) {
            if k >= n {
                return Err(Error::argument(format!("partition index {k} out of range 0..{n}")));
            }
            if seen[k] {
                return Err(Error::argument(format!("partition index {k} used twice")));
            }
            seen[k] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::argument("partition does not cover every interval"));
        }
        Ok(Partition { p1, p2 })
    }

    pub fn first(&self) -> &[usize] {
        &self.p1
    }

    pub fn second(&self) -> &[usize] {
        &self.p2
    }

    pub fn swapped(&self) -> Partition {
        Partition { p1: self.p2.clone(), p2: self.p1.clone() }
    }

    /// The two groups as interval sets.
    pub fn split(&self, set: &IntervalSet) -> (IntervalSet, IntervalSet) {
        let pick = |idx: &[usize]| IntervalSet::new(idx.iter().map(|&k| set.intervals[k]).collect());
        (pick(&self.p1), pick(&self.p2))
    }
}

/// Parses a grouped set spec such as `"0,1;4,5|2,3"`: the union of both groups
/// (sorted) together with the partition that recovers them.
pub fn parse_partitioned(s: &str) -> Result<(IntervalSet, Partition)> {
    let groups: Vec<&str> = s.split('|').collect();
    if groups.len() != 2 {
        return Err(Error::domain(format!("malformed grouped set '{s}', expected 'A|B'")));
    }
    let g1: IntervalSet = groups[0].parse()?;
    let g2: IntervalSet = groups[1].parse()?;
    from_groups(&g1, &g2)
}

/// Union of two groups together with the partition that recovers them.
pub fn from_groups(g1: &IntervalSet, g2: &IntervalSet) -> Result<(IntervalSet, Partition)> {
    let all = g1.join(g2);
    let index_of = |i: &Interval| all.intervals.iter().position(|j| j == i).unwrap_or(usize::MAX);
    let p1 = g1.intervals.iter().map(index_of).collect();
    let p2 = g2.intervals.iter().map(index_of).collect();
    let part = Partition::new(p1, p2, all.len())?;
    Ok((all, part))
}

/// Sum of pairwise cross-ratio logs between the two partition groups.
pub fn multi_cross_ratio_log(set: &IntervalSet, part: &Partition) -> Result<f64> {
    Partition::new(part.p1.clone(), part.p2.clone(), set.len())?;
    set.min_gap()?;
    // sum in a fixed pair order so that swapping the groups is exact
    let mut pairs: Vec<(usize, usize)> =
        part.p1.iter().flat_map(|&k| part.p2.iter().map(move |&l| (k.min(l), k.max(l)))).collect();
    pairs.sort_unstable();
    let mut total = 0.0;
    for (k, l) in pairs {
        total += cross_ratio_log(&set.intervals[k], &set.intervals[l])?;
    }
    Ok(total)
}

/// Symmetry transforms under which the cross ratio is invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mobius {
    Translate(f64),
    Scale(f64),
    /// `x ↦ 1/x`, for sets in the positive half-line.
    Invert,
}

fn map_interval(i: &Interval, t: Mobius) -> Result<Interval> {
    let (a, b) = (i.lo(), i.hi());
    let (lo, hi) = match t {
        Mobius::Translate(c) => (a + c, b + c),
        Mobius::Scale(s) if s > 0.0 => (s * a, s * b),
        Mobius::Scale(s) => (s * b, s * a),
        Mobius::Invert => (1.0 / b, 1.0 / a),
    };
    Interval::new(lo, hi)
}

/// Endpoint-wise image of a set, re-sorted.
pub fn apply_mobius(set: &IntervalSet, t: Mobius) -> Result<IntervalSet> {
    match t {
        Mobius::Translate(c) if !c.is_finite() => {
            return Err(Error::argument("translation must be finite"))
        }
        Mobius::Scale(s) if s == 0.0 || !s.is_finite() => {
            return Err(Error::argument("scale factor must be finite and nonzero"))
        }
        Mobius::Invert if set.intervals.iter().any(|i| i.lo() <= 0.0) => {
            return Err(Error::domain("inversion needs strictly positive endpoints"))
        }
        _ => {}
    }
    let v = set.intervals.iter().map(|i| map_interval(i, t)).collect::<Result<Vec<_>>>()?;
    Ok(IntervalSet::new(v))
}

/// Difference, intersection and union of two intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetAlgebra {
    pub difference: IntervalSet,
    pub intersection: IntervalSet,
    pub union: IntervalSet,
}

pub fn set_algebra(i1: &Interval, i2: &Interval) -> SetAlgebra {
    let (s1, s2) = (IntervalSet::single(*i1), IntervalSet::single(*i2));
    SetAlgebra {
        difference: s1.difference(&s2),
        intersection: s1.intersection(&s2),
        union: s1.union(&s2),
    }
}
