//! C^∞ transition `ψ(u) = g(u)/(g(u)+g(1-u))`, `g(u) = exp(-1/u)`, with
//! its first two derivatives.

/// `[ψ(u), ψ'(u), ψ''(u)]`; exactly `0` for `u <= 0` and `1` for `u >= 1`.
pub fn step_jet(u: f64) -> [f64; 3] {
    if u <= 0.0 {
        return [0.0, 0.0, 0.0];
    }
    if u >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let v = 1.0 - u;
    // ψ = 1/(1+e^z), 1-ψ = 1/(1+e^-z)
    let z = 1.0 / u - 1.0 / v;
    let psi = 1.0 / (1.0 + z.exp());
    let co = 1.0 / (1.0 + (-z).exp());
    let pq = psi * co;
    // log-derivatives of g(u) and g(1-u)
    let q = 1.0 / (u * u) + 1.0 / (v * v);
    let dq = -2.0 / (u * u * u) + 2.0 / (v * v * v);
    let d1 = pq * q;
    let d2 = d1 * (co - psi) * q + pq * dq;
    // guard 0·∞ at the extreme ends, where ψ(1-ψ) underflows first
    let fix = |x: f64| if x.is_finite() { x } else { 0.0 };
    [psi, fix(d1), fix(d2)]
}

pub fn step(u: f64) -> f64 {
    step_jet(u)[0]
}

/// Smooth ramp from `0` at `x <= lo` to `1` at `x >= hi`, chain-ruled jet.
pub fn ramp_jet(x: f64, lo: f64, hi: f64) -> [f64; 3] {
    let w = hi - lo;
    let [p, d1, d2] = step_jet((x - lo) / w);
    [p, d1 / w, d2 / (w * w)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn flat_ends_and_midpoint() {
        assert_eq!(step(-0.3), 0.0);
        assert_eq!(step(0.0), 0.0);
        assert_eq!(step(1.0), 1.0);
        assert_eq!(step(7.0), 1.0);
        assert_eq!(step(0.5), 0.5);
        assert!(step(1e-3) < 1e-300);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for k in 1..40 {
            let u = k as f64 / 40.0;
            let [_, d1, d2] = step_jet(u);
            let fd1 = (step(u + h) - step(u - h)) / (2.0 * h);
            let fd2 = (step_jet(u + h)[1] - step_jet(u - h)[1]) / (2.0 * h);
            assert!((d1 - fd1).abs() < 1e-6 * d1.abs().max(1.0), "u={u}");
            assert!((d2 - fd2).abs() < 1e-5 * d2.abs().max(1.0), "u={u}");
        }
    }

    proptest! {
        #[test]
        fn reflection_symmetry(u in 0.0..1.0f64) {
            prop_assert!((step(u) + step(1.0 - u) - 1.0).abs() < 1e-15);
        }

        #[test]
        fn monotone(u in 0.0..1.0f64, du in 0.0..0.1f64) {
            prop_assert!(step(u + du) >= step(u));
        }
    }
}
