//! Integral representation of the Rényi functions `h_α`, `0 < α <= 1`, as
//! superpositions of resolvents `1/(z - 1/2 ± λ)` over `λ ∈ (1/2, ∞)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Interval;
use crate::quad::{gauss_legendre, grade_quadratic, semi_infinite, QuadratureRule, SemiInfiniteMap};

/// Smallest Rényi index accepted by [`herglotz_eval`].
pub const MIN_ALPHA: f64 = 0.05;
/// Points of the Gauss–Legendre base rule on `(0,1)`.
pub const BASE_NODES: usize = 400;
/// Required agreement between the rational- and exp-map evaluations.
pub const MAP_AGREEMENT: f64 = 1e-8;

/// Spectral weight `f_α(λ) = (1/π)·arctan[r^α sin απ / (1 + r^α cos απ)]`,
/// `r = (2λ-1)/(2λ+1)`.
pub fn f_alpha(alpha: f64, lambda: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::argument(format!("spectral weight needs 0 < α < 1, got {alpha}")));
    }
    if !(lambda >= 0.5) {
        return Err(Error::domain(format!("spectral weight needs λ >= 1/2, got {lambda}")));
    }
    Ok(f_alpha_unchecked(alpha, lambda))
}

fn f_alpha_unchecked(alpha: f64, lambda: f64) -> f64 {
    if lambda.is_infinite() {
        return alpha / 2.0;
    }
    let r = (2.0 * lambda - 1.0) / (2.0 * lambda + 1.0);
    let ra = r.powf(alpha);
    let (s, c) = (alpha * PI).sin_cos();
    // denominator stays positive for r < 1
    (ra * s).atan2(1.0 + ra * c) / PI
}

/// Constant term `B(α) = ½ ln(1 + 2^α + 2^(α/2+1) cos(3απ/4))`.
pub fn b_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::argument(format!("constant term needs 0 < α <= 1, got {alpha}")));
    }
    let arg = 1.0 + 2f64.powf(alpha) + 2f64.powf(alpha / 2.0 + 1.0) * (0.75 * alpha * PI).cos();
    if !(arg > 0.0) {
        return Err(Error::numerical(format!("constant term has nonpositive log argument {arg}")));
    }
    Ok(0.5 * arg.ln())
}

/// `(R_z(λ), R_z(-λ))` with `R_z(λ) = 1/(z - 1/2 + λ)`.
pub fn resolvent_pair(z: f64, lambda: f64) -> Result<(f64, f64)> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::domain(format!("resolvent needs 0 < z < 1, got {z}")));
    }
    if !(lambda >= 0.5) {
        return Err(Error::domain(format!("resolvent needs λ >= 1/2, got {lambda}")));
    }
    let (p, m) = (z - 0.5 + lambda, z - 0.5 - lambda);
    if p == 0.0 || m == 0.0 {
        return Err(Error::domain(format!("resolvent pole hit at z = {z}, λ = {lambda}")));
    }
    Ok((1.0 / p, 1.0 / m))
}

/// Resolvent difference plus the two counterterms,
/// `R_t(λ) - R_t(-λ) + (½-λ)/((½-λ)²+1) - (½+λ)/((½+λ)²+1)`,
/// rearranged so that the leading `2/λ` pieces cancel analytically.
fn kernel_bracket(t: f64, lambda: f64) -> f64 {
    let c = t - 0.5;
    let c2 = c * c;
    let y = 1.0 / (lambda * lambda);
    let num = (0.75 + c2) + (25.0 / 16.0 + 0.75 * c2) * y;
    let den = (1.0 - c2 * y) * (1.0 + 1.5 * y + 25.0 / 16.0 * y * y);
    2.0 * y / lambda * num / den
}

/// Integrand of the representation, `f_α(λ)` times the counterterm-corrected
/// resolvent difference.
pub fn herglotz_integrand(alpha: f64, t: f64, lambda: f64) -> f64 {
    f_alpha_unchecked(alpha, lambda) * kernel_bracket(t, lambda)
}

/// Integrand of the von Neumann limit,
/// `(λ-½)(R_t(λ)-R_t(-λ)) - 2λ/(λ+½) = 2λ(c²-¼)/((λ²-c²)(λ+½))`, `c = t-½`.
pub fn von_neumann_integrand(t: f64, lambda: f64) -> f64 {
    let c = t - 0.5;
    // c² - ¼ = -t(1-t)
    -2.0 * lambda * t * (1.0 - t) / ((lambda - c) * (lambda + c) * (lambda + 0.5))
}

fn base_rule() -> &'static QuadratureRule {
    static BASE: OnceLock<QuadratureRule> = OnceLock::new();
    BASE.get_or_init(|| {
        let gl = gauss_legendre(BASE_NODES, Interval::finite(0.0, 1.0)).expect("static rule");
        grade_quadratic(&gl)
    })
}

fn mapped_rule(map: SemiInfiniteMap) -> &'static QuadratureRule {
    static RATIONAL: OnceLock<QuadratureRule> = OnceLock::new();
    static EXP: OnceLock<QuadratureRule> = OnceLock::new();
    let cell = match map {
        SemiInfiniteMap::Rational => &RATIONAL,
        SemiInfiniteMap::Exp => &EXP,
    };
    cell.get_or_init(|| semi_infinite(map, base_rule()).expect("base rule is on (0,1)"))
}

/// Semi-infinite rule used for the representation, plus the index it is for.
#[derive(Debug, Clone, Serialize)]
pub struct HerglotzRepresentation {
    pub alpha: f64,
    pub quadrature: QuadratureRule,
}

impl HerglotzRepresentation {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(HerglotzRepresentation { alpha, quadrature: mapped_rule(SemiInfiniteMap::Rational).clone() })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        herglotz_eval(self.alpha, t)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(MIN_ALPHA..1.0).contains(&alpha) {
        return Err(Error::argument(format!(
            "representation is validated for {MIN_ALPHA} <= α < 1, got {alpha}"
        )));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::domain(format!("representation needs 0 < t < 1, got {t}")));
    }
    Ok(())
}

/// Integrates over `(1/2, ∞)` with both maps and insists they agree.
fn integrate_both<F: Fn(f64) -> f64>(f: F, what: &str) -> Result<f64> {
    let a = mapped_rule(SemiInfiniteMap::Rational).integrate_checked(&f)?;
    let b = mapped_rule(SemiInfiniteMap::Exp).integrate_checked(&f)?;
    if (a - b).abs() > MAP_AGREEMENT * a.abs().max(1.0) {
        return Err(Error::numerical(format!(
            "{what}: rational and exp maps disagree ({a:.15e} vs {b:.15e})"
        )));
    }
    Ok(a)
}

/// `h_α(t)` via `B(α)/(1-α) - (1/(1-α))∫ f_α(λ)[…] dλ`.
pub fn herglotz_eval(alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_t(t)?;
    let integral = integrate_both(|l| herglotz_integrand(alpha, t, l), "representation integral")?;
    Ok((b_alpha(alpha)? - integral) / (1.0 - alpha))
}

/// `h_1(t)` via `-∫ [(λ-½)(R_t(λ)-R_t(-λ)) - 2λ/(λ+½)] dλ`.
pub fn von_neumann_eval(t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(-integrate_both(|l| von_neumann_integrand(t, l), "von Neumann integral")?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfns::renyi_eval;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn spectral_weight_ends() {
        assert_eq!(f_alpha(0.4, 0.5).unwrap(), 0.0);
        for a in [0.1, 0.5, 0.9] {
            assert!((f_alpha(a, 1e12).unwrap() - a / 2.0).abs() < 1e-10);
        }
        assert!(matches!(f_alpha(0.5, 0.4), Err(Error::Domain(_))));
        assert!(f_alpha(1.0, 1.0).is_err());
    }

    #[test]
    fn spectral_weight_von_neumann_limit() {
        let a = 1.0 - 1e-6;
        for l in [1.0, 2.0, 10.0] {
            let v = f_alpha(a, l).unwrap() / (1.0 - a);
            assert!((v - (l - 0.5)).abs() < 1e-3, "λ={l}: {v}");
        }
    }

    #[test]
    fn constant_term() {
        assert!(b_alpha(1.0).unwrap().abs() < 1e-15);
        assert!((b_alpha(1e-9).unwrap() - 2f64.ln()).abs() < 1e-8);
        let want = 0.5 * (1.0 + 2f64.powf(2.0 / 3.0)).ln();
        assert_relative_eq!(b_alpha(2.0 / 3.0).unwrap(), want, max_relative = 1e-14);
        assert!(b_alpha(1.5).is_err());
    }

    #[test]
    fn resolvents() {
        assert_eq!(resolvent_pair(0.5, 1.0).unwrap(), (1.0, -1.0));
        for l in [0.7, 3.0, 40.0] {
            let (p, m) = resolvent_pair(0.5, l).unwrap();
            assert_eq!(p, -m);
        }
        let (p, m) = resolvent_pair(0.3, 1e4).unwrap();
        assert!(((p - m) - 2e-4).abs() < 1e-11);
        assert!(matches!(resolvent_pair(1.0, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn bracket_matches_direct_form() {
        for t in [0.1, 0.5, 0.83] {
            for l in [0.5, 0.9, 3.0, 17.0] {
                let (p, m) = resolvent_pair(t, l).unwrap();
                let direct = p - m + (0.5 - l) / ((0.5 - l).powi(2) + 1.0) - (0.5 + l) / ((0.5 + l).powi(2) + 1.0);
                assert!((kernel_bracket(t, l) - direct).abs() < 1e-13, "t={t} λ={l}");
                let vn = (l - 0.5) * (p - m) - 2.0 * l / (l + 0.5);
                assert!((von_neumann_integrand(t, l) - vn).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn integrand_tail_decay() {
        for (a, t) in [(0.3, 0.1), (0.5, 0.5), (0.9, 0.8)] {
            let c: Vec<f64> = [1e2, 1e3, 1e4].iter().map(|&l| herglotz_integrand(a, t, l).abs() * l * l).collect();
            assert!(c.windows(2).all(|w| w[1] <= w[0]), "{c:?}");
            assert!(c[0] < 1.0);
        }
    }

    #[test]
    fn examples() {
        assert!((herglotz_eval(0.5, 0.5).unwrap() - 2f64.ln()).abs() < 1e-6);
        assert!((herglotz_eval(0.3, 0.1).unwrap() - renyi_eval(0.3, 0.1).unwrap()).abs() < 1e-6);
        assert!((von_neumann_eval(0.5).unwrap() - 2f64.ln()).abs() < 1e-6);
        let h09 = -0.9 * 0.9f64.ln() - 0.1 * 0.1f64.ln();
        assert!((von_neumann_eval(0.9).unwrap() - h09).abs() < 1e-6);
        assert_relative_eq!(h09, 0.325083, epsilon = 1e-6);
    }

    #[test]
    fn identity_on_grid() {
        let mut worst: f64 = 0.0;
        for a in [0.1, 0.3, 0.5, 0.7, 0.9] {
            for k in 1..=9 {
                let t = k as f64 / 10.0;
                worst = worst.max((herglotz_eval(a, t).unwrap() - renyi_eval(a, t).unwrap()).abs());
            }
        }
        assert!(worst < 1e-10, "{worst:e}");
    }

    #[test]
    fn limit_chain() {
        for t in [0.2, 0.5, 0.8] {
            let d = (herglotz_eval(1.0 - 1e-4, t).unwrap() - von_neumann_eval(t).unwrap()).abs();
            assert!(d < 1e-3, "t={t}: {d}");
        }
    }

    #[test]
    fn bounds_are_enforced() {
        assert!(matches!(herglotz_eval(0.01, 0.5), Err(Error::Argument(_))));
        assert!(matches!(herglotz_eval(1.0, 0.5), Err(Error::Argument(_))));
        assert!(matches!(herglotz_eval(0.5, 1.0), Err(Error::Domain(_))));
        assert!(von_neumann_eval(0.0).is_err());
        assert_eq!(HerglotzRepresentation::new(0.5).unwrap().quadrature.len(), BASE_NODES);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn spectral_weight_monotone(a in 0.01..0.99f64, l in 0.5..1e3f64, dl in 0.0..10.0f64) {
            prop_assert!(f_alpha(a, l + dl).unwrap() >= f_alpha(a, l).unwrap());
        }

        #[test]
        fn spectral_weight_range(a in 0.01..0.99f64, l in 0.5..1e6f64) {
            let v = f_alpha(a, l).unwrap();
            prop_assert!(v >= 0.0 && v <= a / 2.0 + 1e-15);
        }

        #[test]
        fn constant_term_continuous(a in 0.001..1.0f64) {
            let d = 1e-7;
            let (lo, hi) = (b_alpha(a).unwrap(), b_alpha((a + d).min(1.0)).unwrap());
            prop_assert!((hi - lo).abs() < 1e-5);
        }

        #[test]
        fn von_neumann_symmetric(t in 0.02..0.98f64) {
            prop_assert!((von_neumann_eval(t).unwrap() - von_neumann_eval(1.0 - t).unwrap()).abs() < 1e-8);
        }
    }
}
