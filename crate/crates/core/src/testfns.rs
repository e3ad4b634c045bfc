//! Test functions, the `U` coefficient and the Hölder-type diagnostic norm.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Interval;
use crate::quad::tanh_sinh_integrate;
use crate::smooth::ramp_jet;

/// Distance from 1 below which the von Neumann branch is used.
pub const ALPHA_ONE_TOL: f64 = 1e-9;

/// Rényi entropy function `h_α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenyiFunction {
    alpha: f64,
}

impl RenyiFunction {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::argument(format!("Rényi index must be positive and finite, got {alpha}")));
        }
        Ok(RenyiFunction { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn is_von_neumann(&self) -> bool {
        (self.alpha - 1.0).abs() < ALPHA_ONE_TOL
    }

    /// `[h, h', h'']`; all zero outside `(0,1)`.
    pub fn jet(&self, t: f64) -> [f64; 3] {
        self.jet_pair(t, 1.0 - t)
    }

    /// Jet at `t` given also `s = 1 - t`, which the caller may know more
    /// accurately than `1.0 - t` would give.
    pub fn jet_pair(&self, t: f64, s: f64) -> [f64; 3] {
        if !(t > 0.0 && s > 0.0) {
            return [0.0; 3];
        }
        // evaluate on the half nearer 0 so that h(t) = h(1-t) bit for bit
        let (u, sign) = if t <= s { (t, 1.0) } else { (s, -1.0) };
        let v = 1.0 - u;
        let a = self.alpha;
        let [h, d1, d2] = if self.is_von_neumann() {
            let h = -u * u.ln() - v * (-u).ln_1p();
            [h, (v / u).ln(), -1.0 / u - 1.0 / v]
        } else {
            let ua = u.powf(a);
            // u^α + v^α - 1, keeping the small part accurate
            let excess = ua + (a * (-u).ln_1p()).exp_m1();
            let s = 1.0 + excess;
            let h = excess.ln_1p() / (1.0 - a);
            let s1 = a * (u.powf(a - 1.0) - v.powf(a - 1.0));
            let s2 = a * (a - 1.0) * (u.powf(a - 2.0) + v.powf(a - 2.0));
            let r1 = s1 / s;
            [h, r1 / (1.0 - a), (s2 / s - r1 * r1) / (1.0 - a)]
        };
        [h, sign * d1, d2]
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.jet(t)[0]
    }
}

/// `h_α(t)`.
pub fn renyi_eval(alpha: f64, t: f64) -> Result<f64> {
    Ok(RenyiFunction::new(alpha)?.eval(t))
}

/// `U(0,1;h_α) = π²(1+α)/(6α)`.
pub fn u_renyi_closed(alpha: f64) -> Result<f64> {
    RenyiFunction::new(alpha)?;
    Ok(PI * PI * (1.0 + alpha) / (6.0 * alpha))
}

/// Harmonic number `H_n`.
pub fn harmonic(n: u32) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

type Jet = dyn Fn(f64) -> [f64; 3] + Send + Sync;

#[derive(Clone)]
enum Kind {
    Renyi(RenyiFunction),
    /// `Σ c_k t^(k+1)`
    Poly(Vec<f64>),
    Custom(Arc<Jet>),
}

/// Real function with analytic first and second derivatives and a finite
/// set of points where it fails to be smooth.
#[derive(Clone)]
pub struct TestFunction {
    kind: Kind,
    label: String,
    singular_points: Vec<f64>,
    support_hint: Option<Interval>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("singular_points", &self.singular_points)
            .finish()
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl Serialize for TestFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label)
    }
}

impl TestFunction {
    pub fn renyi(alpha: f64) -> Result<Self> {
        let r = RenyiFunction::new(alpha)?;
        Ok(TestFunction {
            kind: Kind::Renyi(r),
            label: format!("halpha:{alpha}"),
            singular_points: vec![0.0, 1.0],
            support_hint: Some(Interval::finite(0.0, 1.0)),
        })
    }

    pub fn von_neumann() -> Self {
        Self::renyi(1.0).expect("alpha = 1 is valid")
    }

    /// `t^m`, `m >= 1`.
    pub fn monomial(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::argument("monomial degree must be >= 1"));
        }
        let mut c = vec![0.0; m as usize];
        c[m as usize - 1] = 1.0;
        let mut f = Self::polynomial(c)?;
        f.label = format!("monomial:{m}");
        Ok(f)
    }

    /// `Σ c_k t^k` for `k = 1..`, i.e. without a constant term.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::argument("polynomial needs finite coefficients"));
        }
        let label = format!(
            "poly:{}",
            coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
        );
        Ok(TestFunction { kind: Kind::Poly(coeffs), label, singular_points: vec![], support_hint: None })
    }

    /// User function given by its jet `x ↦ [f, f', f'']`.
    pub fn custom<F>(label: impl Into<String>, jet: F, singular_points: Vec<f64>) -> Self
    where
        F: Fn(f64) -> [f64; 3] + Send + Sync + 'static,
    {
        TestFunction {
            kind: Kind::Custom(Arc::new(jet)),
            label: label.into(),
            singular_points,
            support_hint: None,
        }
    }

    pub fn with_support_hint(mut self, hint: Interval) -> Self {
        self.support_hint = Some(hint);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn singular_points(&self) -> &[f64] {
        &self.singular_points
    }

    pub fn support_hint(&self) -> Option<Interval> {
        self.support_hint
    }

    pub fn zero_at_zero(&self) -> bool {
        self.eval(0.0) == 0.0
    }

    pub fn as_renyi(&self) -> Option<RenyiFunction> {
        match &self.kind {
            Kind::Renyi(r) => Some(*r),
            _ => None,
        }
    }

    /// Coefficients of `t, t², …` when the function is a polynomial.
    pub fn poly_coeffs(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Poly(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_monomial(&self) -> Option<u32> {
        let c = self.poly_coeffs()?;
        let nz: Vec<usize> = (0..c.len()).filter(|&k| c[k] != 0.0).collect();
        (nz.len() == 1 && c[nz[0]] == 1.0).then(|| nz[0] as u32 + 1)
    }

    pub fn jet(&self, x: f64) -> [f64; 3] {
        match &self.kind {
            Kind::Renyi(r) => r.jet(x),
            Kind::Poly(c) => {
                // Horner on Σ c_k x^(k+1) and its derivatives
                let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
                for &ck in c.iter().rev() {
                    ddp = ddp * x + 2.0 * dp;
                    dp = dp * x + p;
                    p = p * x + ck;
                }
                // multiply the cofactor by x
                [p * x, dp * x + p, ddp * x + 2.0 * dp]
            }
            Kind::Custom(j) => j(x),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.jet(x)[0]
    }

    /// `f(base + delta)`, exploiting known structure to avoid rounding
    /// `base + delta` when it sits next to a singular point.
    pub fn eval_offset(&self, base: f64, delta: f64) -> f64 {
        match &self.kind {
            Kind::Renyi(r) => r.jet_pair(base + delta, (1.0 - base) - delta)[0],
            _ => self.eval(base + delta),
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.jet(x)[1]
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.jet(x)[2]
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    /// `halpha:<α>`, `monomial:<m>` or `poly:<c1,c2,...>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::argument(format!("malformed function '{s}', expected name:args")))?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::argument(format!("malformed number '{t}' in function '{s}'")))
        };
        match name.trim() {
            "halpha" => Self::renyi(num(arg)?),
            "monomial" => {
                let m = arg
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| Error::argument(format!("malformed degree in '{s}'")))?;
                Self::monomial(m)
            }
            "poly" => Self::polynomial(arg.split(',').map(num).collect::<Result<Vec<_>>>()?),
            other => Err(Error::argument(format!("unknown function family '{other}'"))),
        }
    }
}

/// `U(σ1,σ2;f)` with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UCoefficient {
    pub sigma1: f64,
    pub sigma2: f64,
    pub value: f64,
    pub quadrature_error: f64,
}

/// Tanh-sinh level used for the `U` integral (257 nodes).
pub const U_LEVELS: u32 = 8;

/// `U(σ1,σ2;f) = ∫₀¹ [f((1-t)σ1+tσ2) - (1-t)f(σ1) - t f(σ2)] / (t(1-t)) dt`.
pub fn u_coefficient(f: &TestFunction, sigma1: f64, sigma2: f64) -> Result<UCoefficient> {
    if !sigma1.is_finite() || !sigma2.is_finite() {
        return Err(Error::argument("U needs finite arguments"));
    }
    if sigma1 == sigma2 {
        return Ok(UCoefficient { sigma1, sigma2, value: 0.0, quadrature_error: 0.0 });
    }
    // U is symmetric; integrate in a canonical orientation
    let (s1, s2) = if sigma1 < sigma2 { (sigma1, sigma2) } else { (sigma2, sigma1) };
    let (f1, f2) = (f.eval(s1), f.eval(s2));
    let d = s2 - s1;
    let est = tanh_sinh_integrate(U_LEVELS, Interval::finite(0.0, 1.0), |_, t, s| {
        // anchor the argument at the nearer end of the segment
        let y = if t <= s { f.eval_offset(s1, t * d) } else { f.eval_offset(s2, -s * d) };
        (y - s * f1 - t * f2) / (t * s)
    })?;
    if !(est.error <= 1e-6 * est.value.abs().max(1.0)) {
        return Err(Error::numerical(format!(
            "U({sigma1}, {sigma2}; {f}) quadrature did not converge: value {:e}, error estimate {:e}",
            est.value, est.error
        )));
    }
    Ok(UCoefficient { sigma1, sigma2, value: est.value, quadrature_error: est.error })
}

/// `U(0,1;f)`: closed form for Rényi functions and polynomials, quadrature otherwise.
pub fn u01(f: &TestFunction) -> Result<f64> {
    if let Some(r) = f.as_renyi() {
        return u_renyi_closed(r.alpha());
    }
    if let Some(c) = f.poly_coeffs() {
        // U(0,1;t^m) = -H_{m-1}
        return Ok(c.iter().enumerate().map(|(k, &ck)| -ck * harmonic(k as u32)).sum());
    }
    Ok(u_coefficient(f, 0.0, 1.0)?.value)
}

/// Sampling grid for [`hoelder_norm`]: dyadic shells `R·2^(-j-1)·[1, 2]`
/// on both sides of `y`, `per_level` steps each, `levels` shells deep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoelderGrid {
    pub radius: f64,
    pub levels: u32,
    pub per_level: u32,
}

impl Default for HoelderGrid {
    fn default() -> Self {
        HoelderGrid { radius: 1.0, levels: 12, per_level: 16 }
    }
}

impl HoelderGrid {
    /// Doubles depth and density; the refined grid contains the original.
    pub fn refined(&self) -> Self {
        HoelderGrid { radius: self.radius, levels: 2 * self.levels, per_level: 2 * self.per_level }
    }

    pub fn points(&self, y: f64) -> Vec<f64> {
        let m = self.per_level.max(1);
        let mut v = Vec::with_capacity(2 * (self.levels * (m + 1)) as usize);
        for j in 0..self.levels {
            let base = self.radius * 2f64.powi(-(j as i32) - 1);
            for k in 0..=m {
                let r = base * (1.0 + k as f64 / m as f64);
                v.push(y - r);
                v.push(y + r);
            }
        }
        v
    }
}

/// Grid lower bound for `max_k sup_x |f^(k)(x)| |x-y|^(k-γ)`, `k = 0,1,2`.
pub fn hoelder_norm(f: &TestFunction, y: f64, gamma: f64, grid: &HoelderGrid) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::argument(format!("Hölder exponent must lie in [0,1], got {gamma}")));
    }
    let mut sup: f64 = 0.0;
    for x in grid.points(y) {
        let dist = (x - y).abs();
        let jet = f.jet(x);
        for (k, dk) in jet.iter().enumerate() {
            let v = dk.abs() * dist.powf(k as f64 - gamma);
            if v.is_nan() {
                continue;
            }
            sup = sup.max(v);
        }
    }
    Ok(sup)
}

/// Splits `f` into pieces that are each singular at no more than one point of
/// its singular set and vanish there, plus a final piece `Σ f(x_i) ζ_i`
/// carrying the values at the singular points (identically zero when `f`
/// vanishes on the whole set).
///
/// `ζ_i` equals 1 within `zeta_width·s_i/2` of `x_i` and 0 beyond
/// `zeta_width·s_i`, where `s_i` is half the distance to the nearest other
/// singular point. The localizing partition of unity switches at the
/// midpoints between consecutive singular points.
pub fn assumption_split(f: &TestFunction, zeta_width: f64) -> Result<Vec<TestFunction>> {
    if !(zeta_width > 0.0 && zeta_width < 1.0) {
        return Err(Error::argument(format!("zeta width must lie in (0,1), got {zeta_width}")));
    }
    let mut xs = f.singular_points.clone();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let n = xs.len();
    if n == 0 {
        return Ok(vec![f.clone(), zero_function()]);
    }
    let half = |i: usize| -> f64 {
        let left = if i > 0 { xs[i] - xs[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < n { xs[i + 1] - xs[i] } else { f64::INFINITY };
        let s = 0.5 * left.min(right);
        if s.is_finite() { s } else { 0.5 }
    };
    let spreads: Vec<f64> = (0..n).map(|i| zeta_width * half(i)).collect();
    let values: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
    // switching ramps between consecutive singular points
    let ramps: Vec<(f64, f64)> = (0..n.saturating_sub(1))
        .map(|i| {
            let mid = 0.5 * (xs[i] + xs[i + 1]);
            let d = 0.25 * (xs[i + 1] - xs[i]);
            (mid - d, mid + d)
        })
        .collect();

    let zetas = Arc::new((xs.clone(), spreads, values.clone()));
    let carrier = {
        let z = Arc::clone(&zetas);
        move |t: f64| -> [f64; 3] {
            let (xs, spreads, values) = &*z;
            let mut out = [0.0; 3];
            for i in 0..xs.len() {
                if values[i] == 0.0 {
                    continue;
                }
                let zj = bump_jet(t, xs[i], spreads[i]);
                for k in 0..3 {
                    out[k] += values[i] * zj[k];
                }
            }
            out
        }
    };
    let carrier: Arc<Jet> = Arc::new(carrier);
    let base = Arc::new(f.clone());
    let ramps = Arc::new(ramps);

    let mut pieces = Vec::with_capacity(n + 1);
    for i in 0..n {
        let (base, carrier, ramps) = (Arc::clone(&base), Arc::clone(&carrier), Arc::clone(&ramps));
        let jet = move |t: f64| -> [f64; 3] {
            let fj = base.jet(t);
            let cj = carrier(t);
            let g = [fj[0] - cj[0], fj[1] - cj[1], fj[2] - cj[2]];
            let chi = partition_jet(t, i, &ramps);
            product_jet(g, chi)
        };
        pieces.push(TestFunction::custom(format!("{}[piece {i}]", f.label), jet, vec![xs[i]]));
    }
    let carrier_fn = Arc::clone(&carrier);
    let all_zero = values.iter().all(|&v| v == 0.0);
    pieces.push(if all_zero {
        zero_function()
    } else {
        TestFunction::custom(format!("{}[values]", f.label), move |t| carrier_fn(t), vec![])
    });
    Ok(pieces)
}

fn zero_function() -> TestFunction {
    TestFunction::custom("zero", |_| [0.0; 3], vec![])
}

/// Plateau bump: 1 within `r/2` of `c`, 0 beyond `r`.
fn bump_jet(t: f64, c: f64, r: f64) -> [f64; 3] {
    let d = t - c;
    let s = d.signum();
    let [p, p1, p2] = ramp_jet(d.abs(), 0.5 * r, r);
    [1.0 - p, -s * p1, -p2]
}

/// `i`-th member of the telescoping partition `1-σ_0, σ_0-σ_1, …, σ_{n-2}`.
fn partition_jet(t: f64, i: usize, ramps: &[(f64, f64)]) -> [f64; 3] {
    let sig = |k: usize| -> [f64; 3] {
        let (lo, hi) = ramps[k];
        ramp_jet(t, lo, hi)
    };
    let up = if i == 0 { [1.0, 0.0, 0.0] } else { sig(i - 1) };
    let down = if i < ramps.len() { sig(i) } else { [0.0; 3] };
    [up[0] - down[0], up[1] - down[1], up[2] - down[2]]
}

fn product_jet(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] * b[0], a[1] * b[0] + a[0] * b[1], a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn renyi_at_half_is_ln2() {
        for a in [0.3, 1.0, 2.0, 7.5] {
            assert_relative_eq!(renyi_eval(a, 0.5).unwrap(), 2f64.ln(), max_relative = 1e-14);
        }
    }

    #[test]
    fn renyi_half_alpha_oracle() {
        // (1/(1-α)) ln(√0.1 + √0.9) at α = 1/2
        let want = 2.0 * (0.1f64.sqrt() + 0.9f64.sqrt()).ln();
        assert_relative_eq!(renyi_eval(0.5, 0.1).unwrap(), want, max_relative = 1e-14);
    }

    #[test]
    fn renyi_rejects_nonpositive_alpha() {
        assert!(matches!(renyi_eval(0.0, 0.5), Err(Error::Argument(_))));
        assert!(matches!(renyi_eval(-1.0, 0.5), Err(Error::Argument(_))));
        assert!(u_renyi_closed(0.0).is_err());
    }

    #[test]
    fn renyi_vanishes_outside_and_is_continuous_at_ends() {
        for a in [0.5, 1.0, 3.0] {
            assert_eq!(renyi_eval(a, -0.1).unwrap(), 0.0);
            assert_eq!(renyi_eval(a, 1.3).unwrap(), 0.0);
            assert_eq!(renyi_eval(a, 0.0).unwrap(), 0.0);
            assert!(renyi_eval(a, 1e-12).unwrap() < 1e-5);
            assert!(renyi_eval(a, 1.0 - 1e-12).unwrap() < 1e-5);
        }
    }

    #[test]
    fn renyi_continuous_across_von_neumann_threshold() {
        for t in [0.05, 0.3, 0.5, 0.77] {
            let vn = renyi_eval(1.0, t).unwrap();
            for da in [1e-6, 1e-8, 2e-9, 5e-10] {
                for a in [1.0 - da, 1.0 + da] {
                    assert!((renyi_eval(a, t).unwrap() - vn).abs() < 1e-5, "α={a} t={t}");
                }
            }
        }
    }

    #[test]
    fn renyi_derivatives_match_finite_differences() {
        let h = 1e-6;
        for a in [0.3, 1.0, 2.0, 3.5] {
            let r = RenyiFunction::new(a).unwrap();
            for k in 1..20 {
                let t = k as f64 / 20.0;
                let [_, d1, d2] = r.jet(t);
                let fd1 = (r.eval(t + h) - r.eval(t - h)) / (2.0 * h);
                let fd2 = (r.jet(t + h)[1] - r.jet(t - h)[1]) / (2.0 * h);
                assert!((d1 - fd1).abs() < 1e-6, "α={a} t={t}: {d1} vs {fd1}");
                assert!((d2 - fd2).abs() < 1e-6 * d2.abs().max(1.0), "α={a} t={t}: {d2} vs {fd2}");
            }
        }
    }

    #[test]
    fn u_of_von_neumann() {
        let f = TestFunction::von_neumann();
        let u = u_coefficient(&f, 0.0, 1.0).unwrap();
        assert!((u.value - PI * PI / 3.0).abs() < 1e-9);
        assert_relative_eq!(u.value, 3.2898681, epsilon = 1e-7);
    }

    #[test]
    fn u_of_linear_is_zero() {
        let f = TestFunction::polynomial(vec![1.0]).unwrap();
        assert!(u_coefficient(&f, 0.0, 1.0).unwrap().value.abs() < 1e-15);
        assert_eq!(u01(&f).unwrap(), 0.0);
    }

    #[test]
    fn u_of_monomials() {
        for m in 2..=6 {
            let f = TestFunction::monomial(m).unwrap();
            let u = u_coefficient(&f, 0.0, 1.0).unwrap();
            assert!((u.value + harmonic(m - 1)).abs() < 1e-10, "m={m}: {}", u.value);
            assert_eq!(u01(&f).unwrap(), -harmonic(m - 1));
        }
        let f = TestFunction::monomial(3).unwrap();
        assert!((u_coefficient(&f, 0.0, 1.0).unwrap().value + 1.5).abs() < 1e-10);
    }

    #[test]
    fn u_renyi_closed_values() {
        assert_relative_eq!(u_renyi_closed(1.0).unwrap(), PI * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(u_renyi_closed(0.5).unwrap(), PI * PI / 2.0, max_relative = 1e-15);
        assert_relative_eq!(u_renyi_closed(1e12).unwrap(), PI * PI / 6.0, max_relative = 1e-11);
    }

    #[test]
    fn u_quadrature_matches_renyi_closed_form() {
        for a in [0.5, 1.0, 2.0, 3.0] {
            let f = TestFunction::renyi(a).unwrap();
            let u = u_coefficient(&f, 0.0, 1.0).unwrap();
            assert!((u.value - u_renyi_closed(a).unwrap()).abs() < 1e-7, "α={a}");
            assert!((u.value - u_renyi_closed(a).unwrap()).abs() <= u.quadrature_error.max(1e-12));
        }
    }

    #[test]
    fn u_failure_is_numerical_error() {
        // 1/t singularity with f(0) ≠ 0 is not integrable
        let f = TestFunction::custom("log", |x: f64| [x.abs().ln(), 1.0 / x, -1.0 / (x * x)], vec![0.0]);
        assert!(matches!(u_coefficient(&f, 0.0, 1.0), Err(Error::Numerical(_))));
    }

    #[test]
    fn parse_functions() {
        let f: TestFunction = "halpha:2".parse().unwrap();
        assert_eq!(f.as_renyi().unwrap().alpha(), 2.0);
        let m: TestFunction = "monomial:3".parse().unwrap();
        assert_eq!(m.as_monomial(), Some(3));
        let p: TestFunction = "poly:1,-1".parse().unwrap();
        assert_eq!(p.eval(0.5), 0.25);
        assert_eq!(p.as_monomial(), None);
        assert!("halpha:-1".parse::<TestFunction>().is_err());
        assert!("sin:1".parse::<TestFunction>().is_err());
        assert!("monomial".parse::<TestFunction>().is_err());
        assert_eq!(m.label(), "monomial:3");
    }

    #[test]
    fn polynomial_jet() {
        // 2t - 3t^3
        let p = TestFunction::polynomial(vec![2.0, 0.0, -3.0]).unwrap();
        let x = 0.7;
        assert_relative_eq!(p.eval(x), 2.0 * x - 3.0 * x * x * x, max_relative = 1e-15);
        assert_relative_eq!(p.d1(x), 2.0 - 9.0 * x * x, max_relative = 1e-15);
        assert_relative_eq!(p.d2(x), -18.0 * x, max_relative = 1e-15);
        assert!(p.zero_at_zero());
    }

    #[test]
    fn hoelder_examples() {
        let g = HoelderGrid::default();
        let p = TestFunction::polynomial(vec![1.0, -1.0]).unwrap();
        let v = hoelder_norm(&p, 0.0, 1.0, &g).unwrap();
        assert!(v.is_finite() && v > 0.0);

        let shifted = TestFunction::custom("1+t", |x| [1.0 + x, 1.0, 0.0], vec![]);
        let a = hoelder_norm(&shifted, 0.0, 0.5, &g).unwrap();
        let b = hoelder_norm(&shifted, 0.0, 0.5, &g.refined()).unwrap();
        let c = hoelder_norm(&shifted, 0.0, 0.5, &g.refined().refined()).unwrap();
        assert!(b > 10.0 * a && c > 10.0 * b);

        for alpha in [0.3, 0.7] {
            let h = TestFunction::renyi(alpha).unwrap();
            // keep the grid away from the other singular point at 1
            let g = HoelderGrid { radius: 0.5, ..g };
            let a = hoelder_norm(&h, 0.0, alpha, &g).unwrap();
            let b = hoelder_norm(&h, 0.0, alpha, &g.refined().refined()).unwrap();
            assert!(b.is_finite() && b < 2.0 * a + 1.0, "α={alpha}: {a} -> {b}");
        }
        assert!(hoelder_norm(&p, 0.0, 1.5, &g).is_err());
    }

    #[test]
    fn split_von_neumann() {
        let f = TestFunction::von_neumann();
        let pieces = assumption_split(&f, 0.5).unwrap();
        assert_eq!(pieces.len(), 3);
        assert_eq!(pieces[0].singular_points(), &[0.0]);
        assert_eq!(pieces[1].singular_points(), &[1.0]);
        assert_eq!(pieces[0].eval(0.0), 0.0);
        assert_eq!(pieces[1].eval(1.0), 0.0);
        // each localized piece is flat zero near the other singular point
        assert_eq!(pieces[0].eval(0.999), 0.0);
        assert_eq!(pieces[1].eval(0.001), 0.0);
        assert_eq!(pieces[2].eval(0.3), 0.0);
    }

    #[test]
    fn split_already_regular() {
        let f = TestFunction::custom("t(1-t)", |x| [x * (1.0 - x), 1.0 - 2.0 * x, -2.0], vec![0.0]);
        let p = assumption_split(&f, 0.4).unwrap();
        assert_eq!(p.len(), 2);
        for k in 0..=50 {
            let t = -1.0 + k as f64 / 25.0;
            assert!((p[0].eval(t) - f.eval(t)).abs() < 1e-15);
            assert_eq!(p[1].eval(t), 0.0);
        }
    }

    #[test]
    fn split_sum_reproduces_function() {
        let f = TestFunction::custom(
            "shifted",
            |x: f64| [(3.0 * x).sin() + 1.0, 3.0 * (3.0 * x).cos(), -9.0 * (3.0 * x).sin()],
            vec![-0.5, 0.0, 0.4, 1.0],
        );
        let pieces = assumption_split(&f, 0.6).unwrap();
        assert_eq!(pieces.len(), 5);
        let mut dev: f64 = 0.0;
        for k in 0..=100 {
            let t = -1.0 + 2.5 * k as f64 / 100.0;
            let s: f64 = pieces.iter().map(|p| p.eval(t)).sum();
            dev = dev.max((s - f.eval(t)).abs());
        }
        assert!(dev < 1e-12, "{dev}");
        // localized pieces vanish at their own singular point
        for (p, x) in pieces.iter().zip([-0.5, 0.0, 0.4, 1.0]) {
            assert!(p.eval(x).abs() < 1e-15);
        }
    }

    #[test]
    fn split_rejects_bad_width() {
        let f = TestFunction::von_neumann();
        assert!(assumption_split(&f, 0.0).is_err());
        assert!(assumption_split(&f, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn renyi_symmetry(alpha in 0.05..6.0f64, k in -(1i64 << 51)..(3i64 << 51)) {
            // dyadic points so that 1 - t is exact
            let t = k as f64 / (1i64 << 52) as f64;
            let r = RenyiFunction::new(alpha).unwrap();
            prop_assert!((r.eval(t) - r.eval(1.0 - t)).abs() <= 1e-14);
        }

        #[test]
        fn renyi_bounds(alpha in 0.05..6.0f64, t in 0.0..1.0f64) {
            let v = renyi_eval(alpha, t).unwrap();
            prop_assert!(v >= 0.0 && v <= 2f64.ln() + 1e-15);
        }

        #[test]
        fn u_vanishes_on_diagonal(s in -2.0..2.0f64, alpha in 0.2..4.0f64) {
            let f = TestFunction::renyi(alpha).unwrap();
            prop_assert_eq!(u_coefficient(&f, s, s).unwrap().value, 0.0);
        }

        #[test]
        fn u_symmetric(s1 in 0.0..1.0f64, s2 in 0.0..1.0f64, alpha in 0.3..4.0f64) {
            let f = TestFunction::renyi(alpha).unwrap();
            let a = u_coefficient(&f, s1, s2).unwrap().value;
            let b = u_coefficient(&f, s2, s1).unwrap().value;
            prop_assert_eq!(a, b);
        }

        #[test]
        fn u_of_parabola(s1 in -3.0..3.0f64, s2 in -3.0..3.0f64) {
            let f = TestFunction::polynomial(vec![1.0, -1.0]).unwrap();
            let u = u_coefficient(&f, s1, s2).unwrap().value;
            prop_assert!((u - (s1 - s2).powi(2)).abs() < 1e-10 * (1.0 + (s1 - s2).powi(2)));
        }

        #[test]
        fn hoelder_refinement_monotone(y in -0.5..1.5f64, gamma in 0.0..1.0f64, alpha in 0.2..3.0f64) {
            let f = TestFunction::renyi(alpha).unwrap();
            let g = HoelderGrid { radius: 0.7, levels: 5, per_level: 4 };
            let a = hoelder_norm(&f, y, gamma, &g).unwrap();
            let b = hoelder_norm(&f, y, gamma, &g.refined()).unwrap();
            prop_assert!(b >= a);
        }
    }
}
