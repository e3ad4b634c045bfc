//! Quadrature rules: Gauss–Legendre, tanh-sinh, semi-infinite maps and a
//! subtract-and-add principal-value rule.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    GaussLegendre,
    TanhSinh,
    PvCorrected,
}

/// Maps from `(0,1)` onto `(1/2, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SemiInfiniteMap {
    /// `λ = 1/2 + u/(1-u)`
    Rational,
    /// `λ = 1/2 + expm1(u/(1-u))`
    Exp,
}

/// Nodes and positive weights on an open domain, nodes strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub scheme: Scheme,
    pub domain: Interval,
}

/// Value plus an engine error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Integrates and flags divergence: fails if the outermost node's term
    /// still carries more than `1e-3` of the total. Meant for semi-infinite rules.
    pub fn integrate_checked<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<f64> {
        let terms: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).collect();
        let total: f64 = terms.iter().sum();
        let last = terms.last().copied().unwrap_or(0.0);
        if !total.is_finite() || last.abs() > 1e-3 * total.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::numerical(format!(
                "integral over {} does not converge: outermost term {last:e}, total {total:e}",
                self.domain
            )));
        }
        Ok(total)
    }

    /// Principal value `PV∫ φ(y)/(x-y) dy` over the rule's domain at an
    /// arbitrary interior point, by subtract-and-add. Exact when φ is a
    /// polynomial of degree at most `2n`. If `x` hits a node the
    /// `(n+1)`-point rule is used instead.
    pub fn pv_at<F: Fn(f64) -> f64>(&self, x: f64, phi: F) -> Result<f64> {
        let (a, b) = (self.domain.lo(), self.domain.hi());
        if !(x > a && x < b) {
            return Err(Error::argument(format!("PV evaluation point {x} outside {}", self.domain)));
        }
        if self.nodes.contains(&x) {
            let wider = gauss_legendre(self.len() + 1, self.domain)?;
            return wider.pv_at(x, phi);
        }
        let px = phi(x);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&y, &w)| w * (phi(y) - px) / (x - y))
            .sum();
        Ok(sum + px * ((x - a) / (b - x)).ln())
    }

    /// Node-collocated PV matrix: `(M v)_i ≈ PV∫ v(y)/(x_i-y) dy`, with the
    /// diagonal absorbing the subtracted constant so that constants are exact.
    pub fn pv_matrix(&self) -> Vec<Vec<f64>> {
        let (a, b) = (self.domain.lo(), self.domain.hi());
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            let xi = self.nodes[i];
            let mut off = 0.0;
            for j in 0..n {
                if j != i {
                    let v = self.weights[j] / (xi - self.nodes[j]);
                    m[i][j] = v;
                    off += v;
                }
            }
            m[i][i] = ((xi - a) / (b - xi)).ln() - off;
        }
        m
    }
}

fn finite_bounds(domain: &Interval) -> Result<(f64, f64)> {
    if !domain.is_bounded() {
        return Err(Error::argument(format!("quadrature domain {domain} must be bounded")));
    }
    Ok((domain.lo(), domain.hi()))
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = if n == 0 { 0.0 } else { n as f64 * (x * p - p0) / (x * x - 1.0) };
    (p, dp)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
fn gauss_legendre_unit(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for k in 1..=n.div_ceil(2) {
        let mut z = (PI * (k as f64 - 0.25) / (nf + 0.5)).cos();
        let mut converged = false;
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::numerical(format!("Legendre root {k} of degree {n} did not converge")));
        }
        let (_, dp) = legendre(n, z);
        let wk = 2.0 / ((1.0 - z * z) * dp * dp);
        // roots come out descending from +1
        x[n - k] = z;
        w[n - k] = wk;
        x[k - 1] = -z;
        w[k - 1] = wk;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

/// `n`-point Gauss–Legendre rule on a bounded domain.
pub fn gauss_legendre(n: usize, domain: Interval) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::argument("Gauss–Legendre needs n >= 1"));
    }
    let (a, b) = finite_bounds(&domain)?;
    let (x, w) = gauss_legendre_unit(n)?;
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    Ok(QuadratureRule {
        nodes: x.iter().map(|t| c + h * t).collect(),
        weights: w.iter().map(|v| h * v).collect(),
        scheme: Scheme::GaussLegendre,
        domain,
    })
}

/// Nodes per interval for a kernel with wavenumber `k` on length `len`:
/// two nodes per half-wavelength plus a margin of 16.
pub fn oscillatory_nodes(k: f64, len: f64) -> usize {
    (2.0 * k * len / PI).ceil() as usize + 16
}

/// Abscissa range of the tanh-sinh sum; beyond it the weights underflow
/// relative to any integrand with at most algebraic endpoint growth.
const TANH_SINH_TMAX: f64 = 4.0;

/// Double-exponential rule on a bounded domain with step `2^(3-levels)`.
pub fn tanh_sinh(levels: u32, domain: Interval) -> Result<QuadratureRule> {
    if levels < 3 {
        return Err(Error::argument("tanh-sinh needs levels >= 3"));
    }
    let (a, b) = finite_bounds(&domain)?;
    let len = b - a;
    let h = 2f64.powi(3 - levels as i32);
    let m = (TANH_SINH_TMAX / h).round() as i64;
    let mut nodes = Vec::with_capacity(2 * m as usize + 1);
    let mut weights = Vec::with_capacity(2 * m as usize + 1);
    for k in -m..=m {
        let t = k as f64 * h;
        let u = FRAC_PI_2 * t.sinh();
        // distances to both ends, each computed without cancellation
        let left = len / (1.0 + (-2.0 * u).exp());
        let right = len / (1.0 + (2.0 * u).exp());
        let x = if u <= 0.0 { a + left } else { b - right };
        if !(x > a && x < b) {
            continue;
        }
        let cu = u.cosh();
        let w = h * len * 0.5 * FRAC_PI_2 * t.cosh() / (cu * cu);
        if w > 0.0 {
            nodes.push(x);
            weights.push(w);
        }
    }
    Ok(QuadratureRule { nodes, weights, scheme: Scheme::TanhSinh, domain })
}

/// Tanh-sinh integration with an error estimate from the half-density
/// rule, floored at a few ulps of the absolute sum.
///
/// The integrand receives `(x, x-a, b-x)` with both distances computed
/// without cancellation, so nodes that round onto an endpoint still carry
/// their true position.
pub fn tanh_sinh_integrate<F: FnMut(f64, f64, f64) -> f64>(
    levels: u32,
    domain: Interval,
    mut f: F,
) -> Result<Estimate> {
    let (a, b) = finite_bounds(&domain)?;
    let len = b - a;
    let h = 2f64.powi(3 - levels.max(3) as i32);
    let m = (TANH_SINH_TMAX / h).round() as i64;
    let (mut fine, mut coarse, mut abs) = (0.0, 0.0, 0.0);
    for k in -m..=m {
        let t = k as f64 * h;
        let u = FRAC_PI_2 * t.sinh();
        let dl = len / (1.0 + (-2.0 * u).exp());
        let dr = len / (1.0 + (2.0 * u).exp());
        if !(dl > 0.0 && dr > 0.0) {
            continue;
        }
        let x = if u <= 0.0 { a + dl } else { b - dr };
        let cu = u.cosh();
        let w = len * 0.5 * FRAC_PI_2 * t.cosh() / (cu * cu);
        if w == 0.0 {
            continue;
        }
        let fx = w * f(x, dl, dr);
        fine += h * fx;
        abs += h * fx.abs();
        if k % 2 == 0 {
            coarse += 2.0 * h * fx;
        }
    }
    if !fine.is_finite() {
        return Err(Error::numerical("tanh-sinh sum is not finite"));
    }
    let error = (fine - coarse).abs().max(64.0 * f64::EPSILON * abs);
    Ok(Estimate { value: fine, error })
}

/// Regrades a rule on `(0,1)` by `u = v²`, clustering nodes at the left end.
pub fn grade_quadratic(base: &QuadratureRule) -> QuadratureRule {
    QuadratureRule {
        nodes: base.nodes.iter().map(|v| v * v).collect(),
        weights: base.nodes.iter().zip(&base.weights).map(|(v, w)| 2.0 * v * w).collect(),
        ..base.clone()
    }
}

/// Maps a rule on `(0,1)` onto `(1/2, ∞)`. Exp-map nodes with
/// `u/(1-u) > 700` are dropped (their λ overflows).
pub fn semi_infinite(map: SemiInfiniteMap, base: &QuadratureRule) -> Result<QuadratureRule> {
    if base.domain.lo() != 0.0 || base.domain.hi() != 1.0 {
        return Err(Error::argument("semi-infinite map needs a base rule on (0,1)"));
    }
    let mut nodes = Vec::with_capacity(base.len());
    let mut weights = Vec::with_capacity(base.len());
    for (&u, &w) in base.nodes.iter().zip(&base.weights) {
        let one_minus = 1.0 - u;
        match map {
            SemiInfiniteMap::Rational => {
                nodes.push(0.5 + u / one_minus);
                weights.push(w / (one_minus * one_minus));
            }
            SemiInfiniteMap::Exp => {
                let s = u / one_minus;
                if s > 700.0 {
                    continue;
                }
                nodes.push(0.5 + s.exp_m1());
                weights.push(w * s.exp() / (one_minus * one_minus));
            }
        }
    }
    Ok(QuadratureRule { nodes, weights, scheme: base.scheme, domain: Interval::right_unbounded(0.5)? })
}

/// Gauss–Legendre based PV rule on a bounded interval, `n >= 8`.
pub fn pv_rule(n: usize, domain: Interval) -> Result<QuadratureRule> {
    if n < 8 {
        return Err(Error::argument("PV rule needs n >= 8"));
    }
    let mut r = gauss_legendre(n, domain)?;
    r.scheme = Scheme::PvCorrected;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit() -> Interval {
        Interval::finite(0.0, 1.0)
    }

    #[test]
    fn two_point_rule() {
        let r = gauss_legendre(2, Interval::finite(-1.0, 1.0)).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_relative_eq!(r.nodes[0], -s, epsilon = 1e-15);
        assert_relative_eq!(r.nodes[1], s, epsilon = 1e-15);
        assert_relative_eq!(r.weights[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(r.weights[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn cubic_exact_with_two_points() {
        let r = gauss_legendre(2, unit()).unwrap();
        assert_relative_eq!(r.integrate(|x| x * x * x), 0.25, epsilon = 1e-16);
    }

    #[test]
    fn oscillatory_sizing_resolves_sin50() {
        let r = gauss_legendre(60, unit()).unwrap();
        let want = (1.0 - 50f64.cos()) / 50.0;
        assert!((r.integrate(|x| (50.0 * x).sin()) - want).abs() < 1e-12);
        assert!(oscillatory_nodes(50.0, 1.0) <= 60);
    }

    #[test]
    fn weights_sum_and_ordering() {
        for n in [1, 2, 3, 7, 64, 401, 1500] {
            let r = gauss_legendre(n, Interval::finite(-2.0, 5.0)).unwrap();
            assert!((r.weights.iter().sum::<f64>() - 7.0).abs() < 1e-12, "n={n}");
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!(r.nodes.windows(2).all(|p| p[0] < p[1]));
            assert!(r.nodes[0] > -2.0 && r.nodes[n - 1] < 5.0);
        }
    }

    #[test]
    fn unbounded_domain_rejected() {
        let d = Interval::right_unbounded(0.0).unwrap();
        assert!(matches!(gauss_legendre(4, d), Err(Error::Argument(_))));
        assert!(matches!(gauss_legendre(0, unit()), Err(Error::Argument(_))));
    }

    #[test]
    fn tanh_sinh_log_and_constant() {
        let r = tanh_sinh(8, unit()).unwrap();
        assert!((r.integrate(f64::ln) + 1.0).abs() < 1e-10);
        assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-12);
        assert!(r.weights.iter().all(|&w| w > 0.0));
        assert!(r.nodes.windows(2).all(|p| p[0] < p[1]));
        assert!(r.nodes[0] > 0.0 && *r.nodes.last().unwrap() < 1.0);
        let e = tanh_sinh_integrate(8, unit(), |_, l, r| -l.ln() - r.ln()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-10 && e.error < 1e-8);
    }

    #[test]
    fn tanh_sinh_log_singular_u_pattern() {
        // inner pattern of U for the von Neumann function: h(t)/(t(1-t)) has
        // logarithmic endpoint singularities and integrates to π²/3
        let h = |t: f64, s: f64| -t * t.ln() - s * s.ln();
        let e = tanh_sinh_integrate(8, unit(), |_, t, s| h(t, s) / (t * s)).unwrap();
        assert!((e.value - PI * PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite_examples() {
        let base = gauss_legendre(200, unit()).unwrap();
        for map in [SemiInfiniteMap::Rational, SemiInfiniteMap::Exp] {
            let r = semi_infinite(map, &base).unwrap();
            let v = r.integrate_checked(|l| 1.0 / (l * l)).unwrap();
            assert!((v - 2.0).abs() < 1e-8, "{map:?}: {v}");
            let e = r.integrate_checked(|l| (-l).exp()).unwrap();
            assert!((e - (-0.5f64).exp()).abs() < 1e-10, "{map:?}: {e}");
        }
        let r = semi_infinite(SemiInfiniteMap::Rational, &base).unwrap();
        assert!(matches!(r.integrate_checked(|_| 1.0), Err(Error::Numerical(_))));
    }

    #[test]
    fn graded_rule_keeps_weights_positive() {
        let g = grade_quadratic(&gauss_legendre(50, unit()).unwrap());
        assert!((g.integrate(|u| u.sqrt()) - 2.0 / 3.0).abs() < 1e-14);
        assert!(g.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn pv_examples() {
        let sym = pv_rule(16, Interval::finite(-1.0, 1.0)).unwrap();
        assert!(sym.pv_at(0.0, |_| 1.0).unwrap().abs() < 1e-15);
        assert_relative_eq!(sym.pv_at(0.0, |y| y).unwrap(), -2.0, epsilon = 1e-14);
        let r = pv_rule(16, Interval::finite(0.0, 2.0)).unwrap();
        assert_relative_eq!(r.pv_at(0.5, |_| 1.0).unwrap(), -(3f64.ln()), epsilon = 1e-14);
        assert!(matches!(r.pv_at(2.5, |_| 1.0), Err(Error::Argument(_))));
        assert!(pv_rule(4, unit()).is_err());
    }

    #[test]
    fn pv_at_node_uses_wider_rule() {
        let r = pv_rule(9, Interval::finite(-1.0, 1.0)).unwrap();
        // 0 is the middle node of an odd rule
        assert_relative_eq!(r.pv_at(0.0, |y| y * y + y).unwrap(), -2.0, epsilon = 1e-13);
    }

    #[test]
    fn pv_matrix_is_exact_on_constants() {
        let d = Interval::finite(0.5, 2.0);
        let r = pv_rule(24, d).unwrap();
        let m = r.pv_matrix();
        for (i, row) in m.iter().enumerate() {
            let x = r.nodes[i];
            let want = ((x - 0.5) / (2.0 - x)).ln();
            assert!((row.iter().sum::<f64>() - want).abs() < 1e-12);
        }
    }

    /// `PV∫_a^b y^k/(x-y) dy` from `y^k = x^k + (y^k - x^k)`.
    fn hilbert_monomial(k: i32, a: f64, b: f64, x: f64) -> f64 {
        let mut v = x.powi(k) * ((x - a) / (b - x)).ln();
        for j in 0..k {
            v -= x.powi(k - 1 - j) * (b.powi(j + 1) - a.powi(j + 1)) / (j + 1) as f64;
        }
        v
    }

    proptest! {
        #[test]
        fn degree_exactness(n in 1usize..30, seed in proptest::collection::vec(-1.0..1.0f64, 60), a in -3.0..3.0f64, l in 0.1..4.0f64) {
            let deg = 2 * n - 1;
            let c = &seed[..=deg.min(59)];
            let r = gauss_legendre(n, Interval::finite(a, a + l)).unwrap();
            let got = r.integrate(|x| c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck));
            let prim = |x: f64| c.iter().enumerate().rev().fold(0.0, |acc, (k, &ck)| acc * x + ck / (k + 1) as f64) * x;
            let want = prim(a + l) - prim(a);
            let scale = (0..c.len()).map(|k| (a.abs().max((a + l).abs())).powi(k as i32 + 1)).sum::<f64>();
            prop_assert!((got - want).abs() < 1e-10 * scale.max(1.0));
        }

        #[test]
        fn pv_reproduces_finite_hilbert_transform(k in 0i32..6, a in -2.0..1.0f64, l in 0.2..3.0f64, s in 0.01..0.99f64) {
            let b = a + l;
            let x = a + s * l;
            let r = pv_rule(12, Interval::finite(a, b)).unwrap();
            let got = r.pv_at(x, |y| y.powi(k)).unwrap();
            let want = hilbert_monomial(k, a, b, x);
            prop_assert!((got - want).abs() < 1e-8 * want.abs().max(1.0), "{got} vs {want}");
        }

        #[test]
        fn tanh_sinh_weights_positive(levels in 3u32..10) {
            let r = tanh_sinh(levels, Interval::finite(-1.0, 2.0)).unwrap();
            prop_assert!(r.weights.iter().all(|&w| w > 0.0));
        }
    }
}
