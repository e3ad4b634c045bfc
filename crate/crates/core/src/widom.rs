//! Widom's coefficient for mollified interval symbols: the mollifier, the
//! Besov seminorm and the three-term combination whose ε → 0 limit gives the
//! two-interval trace.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{cross_ratio_log, Interval, IntervalSet};
use crate::quad::{gauss_legendre, QuadratureRule};
use crate::smooth::step_jet;
use crate::testfns::{u01, u_coefficient, TestFunction};

/// Gauss–Legendre nodes per collar.
pub const COLLAR_NODES: usize = 48;

/// Smoothed indicator of a finite union of intervals: zero outside, one on
/// the inner plateaus, a C^∞ transition across each ε-collar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MollifiedSymbol {
    base: IntervalSet,
    epsilon: f64,
}

impl MollifiedSymbol {
    pub fn new(base: IntervalSet, epsilon: f64) -> Result<Self> {
        if base.is_empty() || !base.is_bounded() {
            return Err(Error::argument("mollified symbols need a nonempty bounded interval set"));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::argument(format!("ε must be positive, got {epsilon}")));
        }
        let shortest = base.intervals().iter().map(|i| i.length()).fold(f64::INFINITY, f64::min);
        if !(epsilon < shortest / 2.0) {
            return Err(Error::argument(format!("ε = {epsilon} must be below half the shortest interval ({shortest})")));
        }
        if base.len() > 1 {
            let gap = base.min_gap()?;
            if !(epsilon < gap / 4.0) {
                return Err(Error::argument(format!("ε = {epsilon} must be below a quarter of the gap ({gap})")));
            }
        }
        Ok(MollifiedSymbol { base, epsilon })
    }

    pub fn base(&self) -> &IntervalSet {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The real line cut into constant stretches and collars, left to right.
    fn segments(&self) -> Vec<Segment> {
        let e = self.epsilon;
        let mut out = Vec::new();
        let mut left = f64::NEG_INFINITY;
        for i in self.base.intervals() {
            let (a, b) = (i.lo(), i.hi());
            out.push(Segment::Flat { lo: left, hi: a, value: 0.0 });
            out.push(Segment::Collar { lo: a, hi: a + e, rising: true });
            out.push(Segment::Flat { lo: a + e, hi: b - e, value: 1.0 });
            out.push(Segment::Collar { lo: b - e, hi: b, rising: false });
            left = b;
        }
        out.push(Segment::Flat { lo: left, hi: f64::INFINITY, value: 0.0 });
        out
    }
}

#[derive(Debug, Clone, Copy)]
enum Segment {
    Flat { lo: f64, hi: f64, value: f64 },
    Collar { lo: f64, hi: f64, rising: bool },
}

fn collar_jet(lo: f64, hi: f64, rising: bool, x: f64) -> [f64; 2] {
    let w = hi - lo;
    if rising {
        let [p, d, _] = step_jet((x - lo) / w);
        [p, d / w]
    } else {
        let [p, d, _] = step_jet((hi - x) / w);
        [p, -d / w]
    }
}

fn interval_of(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).expect("segment bounds are ordered")
}

/// `∫_lo^hi dx/(x-y)²` for `y` outside `[lo, hi]`; infinite ends contribute zero.
fn inverse_square_mass(lo: f64, hi: f64, y: f64) -> f64 {
    let term = |s: f64| if s.is_finite() { 1.0 / (s - y) } else { 0.0 };
    term(lo) - term(hi)
}

/// `φ_ε(x)`.
pub fn mollifier_eval(sym: &MollifiedSymbol, x: f64) -> f64 {
    let e = sym.epsilon;
    for i in sym.base.intervals() {
        let (a, b) = (i.lo(), i.hi());
        if x <= a || x >= b {
            continue;
        }
        if x < a + e {
            return collar_jet(a, a + e, true, x)[0];
        }
        if x > b - e {
            return collar_jet(b - e, b, false, x)[0];
        }
        return 1.0;
    }
    0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesovValue {
    pub value: f64,
    pub quadrature_error: f64,
}

/// `∫∫ (φ(x)-φ(y))²/(x-y)² dx dy` with `n` Gauss nodes per collar.
fn besov_integral(sym: &MollifiedSymbol, n: usize) -> Result<f64> {
    let segs = sym.segments();
    let rules: Vec<Option<QuadratureRule>> = segs
        .iter()
        .map(|s| match *s {
            Segment::Collar { lo, hi, .. } => gauss_legendre(n, interval_of(lo, hi)).map(Some),
            Segment::Flat { .. } => Ok(None),
        })
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for (i, si) in segs.iter().enumerate() {
        for (j, sj) in segs.iter().enumerate().skip(i) {
            let mult = if i == j { 1.0 } else { 2.0 };
            let part = match (*si, *sj) {
                (Segment::Flat { lo: a, hi: b, value: u }, Segment::Flat { lo: c, hi: d, value: v }) => {
                    if i == j || u == v {
                        0.0
                    } else {
                        (u - v).powi(2) * cross_ratio_log(&interval_of(a, b), &interval_of(c, d))?
                    }
                }
                (Segment::Flat { lo, hi, value }, Segment::Collar { lo: cl, hi: ch, rising })
                | (Segment::Collar { lo: cl, hi: ch, rising }, Segment::Flat { lo, hi, value }) => {
                    let rule = rules[if matches!(*si, Segment::Collar { .. }) { i } else { j }].as_ref().unwrap();
                    rule.integrate(|y| {
                        let d = value - collar_jet(cl, ch, rising, y)[0];
                        if d == 0.0 {
                            0.0
                        } else {
                            d * d * inverse_square_mass(lo, hi, y)
                        }
                    })
                }
                (Segment::Collar { lo: l1, hi: h1, rising: r1 }, Segment::Collar { lo: l2, hi: h2, rising: r2 }) => {
                    let (ri, rj) = (rules[i].as_ref().unwrap(), rules[j].as_ref().unwrap());
                    ri.integrate(|x| {
                        let [px, dx] = collar_jet(l1, h1, r1, x);
                        rj.integrate(|y| {
                            if x == y {
                                dx * dx
                            } else {
                                let q = (px - collar_jet(l2, h2, r2, y)[0]) / (x - y);
                                q * q
                            }
                        })
                    })
                }
            };
            total += mult * part;
        }
    }
    Ok(total)
}

/// `⦀φ_ε⦀ = ((1/8π²) ∫∫ (φ(x)-φ(y))²/(x-y)²)^{1/2}`, by region decomposition;
/// the error is the change under doubling the collar nodes.
pub fn besov_seminorm(sym: &MollifiedSymbol) -> Result<BesovValue> {
    let norm = |v: f64| (v / (8.0 * PI * PI)).sqrt();
    let coarse = norm(besov_integral(sym, COLLAR_NODES)?);
    let fine = norm(besov_integral(sym, 2 * COLLAR_NODES)?);
    let err = (fine - coarse).abs();
    if !fine.is_finite() || err > 1e-6 * fine.max(1.0) {
        return Err(Error::numerical(format!("Besov seminorm did not settle: {fine:e} ± {err:e}")));
    }
    Ok(BesovValue { value: fine, quadrature_error: err })
}

/// `U(σ1,σ2;f)` memoised on arguments rounded to 1e-12.
struct UCache<'a> {
    f: &'a TestFunction,
    map: Mutex<HashMap<(i64, i64), f64>>,
}

impl<'a> UCache<'a> {
    fn new(f: &'a TestFunction) -> Self {
        UCache { f, map: Mutex::new(HashMap::new()) }
    }

    fn get(&self, s1: f64, s2: f64) -> Result<f64> {
        let key = |s: f64| (s * 1e12).round() as i64;
        let k = if s1 <= s2 { (key(s1), key(s2)) } else { (key(s2), key(s1)) };
        if let Some(&v) = self.map.lock().expect("cache lock").get(&k) {
            return Ok(v);
        }
        let v = u_coefficient(self.f, s1, s2)?.value;
        self.map.lock().expect("cache lock").insert(k, v);
        Ok(v)
    }
}

/// `B(φ₁²;f) + B(φ₂²;f) - B(φ²;f)` with `B(a;f) = (1/8π²)∫∫ U(a(x),a(y);f)/(x-y)²`
/// and `φ = φ₁ + φ₂` the mollified indicator of `I1 ∪ I2`.
///
/// The integrand cancels unless one point lies in each interval, where it
/// reads `U(p,0) + U(0,q) - U(p,q)` with `p = φ₁²(x)`, `q = φ₂²(y)`. The
/// plateau block is `2U(0,1)` times a closed-form log; mixed blocks have
/// an analytic plateau integral; collar blocks use tensor Gauss–Legendre.
pub fn widom_combination(i1: &Interval, i2: &Interval, f: &TestFunction, epsilon: f64) -> Result<f64> {
    MollifiedSymbol::new(IntervalSet::new(vec![*i1, *i2]), epsilon)?;
    let cache = UCache::new(f);
    let u10 = u01(f)?;
    let parts = |i: &Interval| {
        let (a, b) = (i.lo(), i.hi());
        let collars = [(a, a + epsilon, true), (b - epsilon, b, false)];
        (interval_of(a + epsilon, b - epsilon), collars)
    };
    let (p1, c1) = parts(i1);
    let (p2, c2) = parts(i2);
    // squared symbol values on each collar's nodes
    let nodes = |c: &(f64, f64, bool)| -> Result<Vec<(f64, f64, f64)>> {
        let rule = gauss_legendre(COLLAR_NODES, interval_of(c.0, c.1))?;
        Ok(rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| (x, w, collar_jet(c.0, c.1, c.2, x)[0].powi(2)))
            .collect())
    };
    let n1: Vec<_> = c1.iter().map(nodes).collect::<Result<_>>()?;
    let n2: Vec<_> = c2.iter().map(nodes).collect::<Result<_>>()?;

    let mut total = 2.0 * u10 * cross_ratio_log(&p1, &p2)?;
    // collar of one interval against the plateau of the other
    let mixed = |collar: &[(f64, f64, f64)], plateau: &Interval| -> Result<f64> {
        let mut s = 0.0;
        for &(y, w, q) in collar {
            let g = u10 + cache.get(0.0, q)? - cache.get(1.0, q)?;
            s += w * g * inverse_square_mass(plateau.lo(), plateau.hi(), y);
        }
        Ok(s)
    };
    for c in &n2 {
        total += mixed(c, &p1)?;
    }
    for c in &n1 {
        total += mixed(c, &p2)?;
    }
    for ca in &n1 {
        for cb in &n2 {
            let rows: Vec<f64> = ca
                .par_iter()
                .map(|&(x, wx, p)| -> Result<f64> {
                    let up = cache.get(p, 0.0)?;
                    let mut s = 0.0;
                    for &(y, wy, q) in cb {
                        let g = up + cache.get(0.0, q)? - cache.get(p, q)?;
                        s += wy * g / ((x - y) * (x - y));
                    }
                    Ok(wx * s)
                })
                .collect::<Result<_>>()?;
            total += rows.iter().sum::<f64>();
        }
    }
    Ok(total / (4.0 * PI * PI))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidomLimit {
    pub per_eps: Vec<(f64, f64)>,
    pub limit: f64,
    pub reference: f64,
}

/// Values at `ε, ε/2, ε/4` and their Richardson extrapolation, removing the
/// linear and quadratic terms in ε.
pub fn widom_limit(i1: &Interval, i2: &Interval, f: &TestFunction, epsilon: f64) -> Result<WidomLimit> {
    let eps = [epsilon, epsilon / 2.0, epsilon / 4.0];
    let vals: Vec<f64> = eps.iter().map(|&e| widom_combination(i1, i2, f, e)).collect::<Result<_>>()?;
    let limit = (8.0 * vals[2] - 6.0 * vals[1] + vals[0]) / 3.0;
    let reference = u01(f)? / (2.0 * PI * PI) * cross_ratio_log(i1, i2)?;
    Ok(WidomLimit { per_eps: eps.iter().copied().zip(vals).collect(), limit, reference })
}
