//! Dense Nyström discretizations: the band-limited projector on interval
//! unions, the Fermi projector's off-diagonal and principal-value blocks,
//! eigen- and singular-value post-processing.

use std::f64::consts::PI;

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Interval, IntervalSet};
use crate::quad::{gauss_legendre, oscillatory_nodes, pv_rule, QuadratureRule};
use crate::testfns::TestFunction;

/// Hard cap on quadrature nodes per interval.
pub const MAX_NODES_PER_INTERVAL: usize = 4000;

/// Eigenvalues further than this outside `[0,1]` are clipped with a warning.
pub const CLIP_TOL: f64 = 1e-6;
/// Eigenvalues further than this outside `[0,1]` are an error.
pub const CLIP_FAIL: f64 = 1e-3;

/// How many Gauss–Legendre nodes to put on each interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeSizing {
    /// Two nodes per half-wavelength of the kernel plus a margin.
    Auto,
    /// The automatic count multiplied by a factor.
    Scaled(f64),
    Fixed(usize),
}

impl NodeSizing {
    pub fn nodes(&self, kappa: f64, len: f64) -> Result<usize> {
        let n = match *self {
            NodeSizing::Auto => oscillatory_nodes(kappa, len),
            NodeSizing::Scaled(s) => {
                if !(s > 0.0) {
                    return Err(Error::argument(format!("node scale must be positive, got {s}")));
                }
                (s * oscillatory_nodes(kappa, len) as f64).ceil() as usize
            }
            NodeSizing::Fixed(n) => n,
        };
        if n > MAX_NODES_PER_INTERVAL {
            return Err(Error::Resource(format!(
                "{n} nodes requested on an interval of length {len} (cap {MAX_NODES_PER_INTERVAL})"
            )));
        }
        Ok(n.max(1))
    }
}

impl std::str::FromStr for NodeSizing {
    type Err = Error;

    /// `auto`, `scale:<factor>` or a fixed count.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "auto" {
            return Ok(NodeSizing::Auto);
        }
        if let Some(f) = s.strip_prefix("scale:") {
            return f
                .trim()
                .parse()
                .map(NodeSizing::Scaled)
                .map_err(|_| Error::argument(format!("malformed node scale '{s}'")));
        }
        s.parse().map(NodeSizing::Fixed).map_err(|_| Error::argument(format!("malformed node sizing '{s}'")))
    }
}

/// Quadrature nodes over an interval set together with a dense symmetric
/// operator matrix in the `√w`-weighted basis.
#[derive(Debug, Clone)]
pub struct SpectralSystem {
    pub support: IntervalSet,
    pub rules: Vec<QuadratureRule>,
    pub matrix: DMatrix<f64>,
    /// Half-bandwidth κ of the sine kernel (the one-sided cutoff wavenumber is 2κ).
    pub kappa: f64,
}

impl SpectralSystem {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

/// `sin(κd)/(πd)`, continuous at `d = 0`.
fn sine_kernel(kappa: f64, d: f64) -> f64 {
    let z = kappa * d;
    if z.abs() < 1e-4 {
        kappa / PI * (1.0 - z * z / 6.0)
    } else {
        z.sin() / (PI * d)
    }
}

/// Gauss–Legendre rules for each interval of `support`.
pub fn rules_for(support: &IntervalSet, kappa: f64, sizing: NodeSizing) -> Result<Vec<QuadratureRule>> {
    support
        .intervals()
        .iter()
        .map(|i| {
            if !i.is_bounded() {
                return Err(Error::argument(format!("cutoff systems need bounded intervals, got {i}")));
            }
            gauss_legendre(sizing.nodes(kappa, i.length())?, *i)
        })
        .collect()
}

/// Symmetric Nyström matrix of the sine kernel on the given rules.
pub fn sine_kernel_matrix(rules: &[QuadratureRule], kappa: f64) -> DMatrix<f64> {
    let (x, sw): (Vec<f64>, Vec<f64>) = rules
        .iter()
        .flat_map(|r| r.nodes.iter().zip(&r.weights).map(|(&x, &w)| (x, w.sqrt())))
        .unzip();
    let n = x.len();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = sw[j] * sw[j] * kappa / PI;
        for i in (j + 1)..n {
            let v = sw[i] * sw[j] * sine_kernel(kappa, x[i] - x[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Band-limited projector `sin(κ(x-y))/(π(x-y))` restricted to `support`.
pub fn assemble_cutoff_projector(support: &IntervalSet, kappa: f64, sizing: NodeSizing) -> Result<SpectralSystem> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::argument(format!("cutoff must be finite and nonnegative, got {kappa}")));
    }
    let rules = rules_for(support, kappa, sizing)?;
    let matrix = sine_kernel_matrix(&rules, kappa);
    Ok(SpectralSystem { support: support.clone(), rules, matrix, kappa })
}

/// Full spectrum, sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub residual_norm: f64,
}

impl SpectrumResult {
    /// CSV rows `index,eigenvalue`.
    pub fn to_csv_rows(&self) -> Vec<String> {
        self.eigenvalues.iter().enumerate().map(|(k, v)| format!("{k},{v:.17e}")).collect()
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Dense symmetric eigendecomposition with residual and orthogonality checks.
pub fn sym_eig(matrix: &DMatrix<f64>) -> Result<SpectrumResult> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::argument("eigensolve needs a square matrix"));
    }
    if n == 0 {
        return Ok(SpectrumResult { eigenvalues: vec![], residual_norm: 0.0 });
    }
    let scale = max_abs(matrix);
    let asym = max_abs(&(matrix - matrix.transpose()));
    if asym > 1e-12 * scale {
        return Err(Error::argument(format!("matrix is not symmetric (defect {asym:e})")));
    }
    if scale == 0.0 {
        return Ok(SpectrumResult { eigenvalues: vec![0.0; n], residual_norm: 0.0 });
    }
    let eig = SymmetricEigen::try_new(matrix.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::numerical("symmetric eigensolver did not converge"))?;
    let v = &eig.eigenvectors;
    let mut resid = matrix * v;
    for (k, lam) in eig.eigenvalues.iter().enumerate() {
        let mut col = resid.column_mut(k);
        col.axpy(-lam, &v.column(k), 1.0);
    }
    let norm = matrix.norm();
    let residual_norm = (0..n).map(|k| resid.column(k).norm()).fold(0.0, f64::max) / norm;
    let ortho = max_abs(&(v.transpose() * v - DMatrix::identity(n, n)));
    if !(residual_norm < 1e-10) || !(ortho < 1e-10) {
        return Err(Error::numerical(format!(
            "eigendecomposition failed checks: residual {residual_norm:e}, orthogonality defect {ortho:e}"
        )));
    }
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    Ok(SpectrumResult { eigenvalues, residual_norm })
}

/// Eigenvalues of a cutoff system.
pub fn spectrum(sys: &SpectralSystem) -> Result<SpectrumResult> {
    sym_eig(&sys.matrix)
}

/// `Σ f(λ_i)` over a spectrum clipped to `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropySum {
    pub value: f64,
    /// Eigenvalues moved onto `[0,1]` (any distance).
    pub clipped: usize,
    pub max_excursion: f64,
}

pub fn entropy_sum(spec: &SpectrumResult, f: &TestFunction) -> Result<EntropySum> {
    let mut clipped = 0;
    let mut max_excursion: f64 = 0.0;
    let mut value = 0.0;
    for &lam in &spec.eigenvalues {
        let exc = (-lam).max(lam - 1.0);
        if exc > 0.0 {
            if exc > CLIP_FAIL {
                return Err(Error::numerical(format!("eigenvalue {lam} lies outside [0,1]")));
            }
            clipped += 1;
            max_excursion = max_excursion.max(exc);
        }
        value += f.eval(lam.clamp(0.0, 1.0));
    }
    if max_excursion > CLIP_TOL {
        warn!("clipped {clipped} eigenvalues, largest excursion {max_excursion:e} beyond [0,1]");
    }
    Ok(EntropySum { value, clipped, max_excursion })
}

/// Off-diagonal block `1_{I1} P 1_{I2}` of the Fermi projector, stored as the
/// real Nyström matrix of `1/(2π(x-y))`. The true block is `i` times this.
#[derive(Debug, Clone)]
pub struct CrossBlock {
    pub rows_support: Interval,
    pub cols_support: Interval,
    pub row_rule: QuadratureRule,
    pub col_rule: QuadratureRule,
    pub matrix: DMatrix<f64>,
    /// Analytic Hilbert–Schmidt mass (squared norm) cut off by truncation.
    pub truncated_hs: f64,
}

/// Real Nyström matrix of `1/(2π(x-y))` between two rules.
pub fn hilbert_kernel_matrix(rows: &QuadratureRule, cols: &QuadratureRule) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        (rows.weights[i] * cols.weights[j]).sqrt() / (2.0 * PI * (rows.nodes[i] - cols.nodes[j]))
    })
}

pub fn assemble_cross_block(i1: &Interval, i2: &Interval, n1: usize, n2: usize) -> Result<CrossBlock> {
    assemble_cross_block_truncated(i1, i2, n1, n2, None)
}

/// As [`assemble_cross_block`], but an unbounded interval is cut to length
/// `truncate` measured from its finite end; the discarded Hilbert–Schmidt
/// mass is reported.
pub fn assemble_cross_block_truncated(
    i1: &Interval,
    i2: &Interval,
    n1: usize,
    n2: usize,
    truncate: Option<f64>,
) -> Result<CrossBlock> {
    let gap = i1.gap(i2);
    if gap == 0.0 {
        return Err(Error::TouchingClosures { at: if i1.lo() < i2.lo() { i1.hi() } else { i1.lo() } });
    }
    if !(gap > 0.0) {
        return Err(Error::domain(format!("cross block needs separated intervals, got {i1} and {i2}")));
    }
    let mut truncated_hs = 0.0;
    let mut cut = |i: &Interval, other: &Interval| -> Result<Interval> {
        if i.is_bounded() {
            return Ok(*i);
        }
        let len = truncate.ok_or_else(|| {
            Error::argument(format!("unbounded interval {i} needs an explicit truncation length"))
        })?;
        if !other.is_bounded() {
            return Err(Error::domain("at most one interval may be unbounded"));
        }
        let (t, far) = if i.hi().is_infinite() {
            let t = Interval::new(i.lo(), i.lo() + len)?;
            (t, (t.hi() - other.lo()) / (t.hi() - other.hi()))
        } else {
            let t = Interval::new(i.hi() - len, i.hi())?;
            (t, (other.hi() - t.lo()) / (other.lo() - t.lo()))
        };
        // ∫∫ over the discarded tail of 1/(4π²(x-y)²)
        truncated_hs += far.ln() / (4.0 * PI * PI);
        Ok(t)
    };
    let r1 = cut(i1, i2)?;
    let r2 = cut(i2, i1)?;
    let row_rule = gauss_legendre(n1, r1)?;
    let col_rule = gauss_legendre(n2, r2)?;
    let matrix = hilbert_kernel_matrix(&row_rule, &col_rule);
    Ok(CrossBlock { rows_support: *i1, cols_support: *i2, row_rule, col_rule, matrix, truncated_hs })
}

impl CrossBlock {
    /// Singular values, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.matrix.clone().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Squared Frobenius norm plus the truncated tail.
    pub fn hilbert_schmidt_sq(&self) -> f64 {
        self.matrix.norm_squared() + self.truncated_hs
    }
}

/// Schatten norm with a bound on the unresolved singular-value tail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchattenValue {
    pub p: f64,
    pub value: f64,
    pub tail_bound: f64,
    pub singular_values: Vec<f64>,
}

pub fn schatten_norm(block: &CrossBlock, p: f64) -> Result<SchattenValue> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::argument(format!("Schatten index must be positive and finite, got {p}")));
    }
    let s = block.singular_values();
    let sum: f64 = s.iter().map(|v| v.powf(p)).sum();
    let value = sum.powf(1.0 / p);
    // geometric decay ratio over the resolved part of the spectrum
    let s0 = s.first().copied().unwrap_or(0.0);
    let resolved = s.iter().rposition(|&v| v > 1e-12 * s0).unwrap_or(0);
    let mut tail = 0.0;
    if resolved >= 5 {
        let q = (s[resolved] / s[resolved - 5]).powf(0.2);
        if q < 1.0 {
            let qp = q.powf(p);
            tail = s[resolved].powf(p) * qp / (1.0 - qp);
        } else {
            tail = f64::INFINITY;
        }
    }
    let mut tail_bound = (sum + tail).powf(1.0 / p) - value;
    if block.truncated_hs > 0.0 {
        tail_bound = if p >= 2.0 {
            tail_bound + block.truncated_hs.sqrt()
        } else {
            // the truncated tail's S_p norm is not controlled by its HS mass for p < 2
            f64::INFINITY
        };
    }
    Ok(SchattenValue { p, value, tail_bound, singular_values: s })
}

/// Diagonal block `1_I P 1_I = ½ + (i/2)H` of the Fermi projector.
#[derive(Debug, Clone)]
pub struct PvBlock {
    pub rule: QuadratureRule,
    /// Antisymmetric real Nyström matrix of `1/(2π(x-y))` with zero
    /// diagonal; the block is `½I + i·kernel`, self-adjoint by construction.
    pub kernel: DMatrix<f64>,
    /// Node-collocated subtract-and-add PV matrix scaled by `1/(2π)`,
    /// acting on function values.
    pub collocated: DMatrix<f64>,
}

pub fn assemble_pv_block(interval: &Interval, n: usize) -> Result<PvBlock> {
    let rule = pv_rule(n, *interval)?;
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let kernel = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            sw[i] * sw[j] / (2.0 * PI * (rule.nodes[i] - rule.nodes[j]))
        }
    });
    let pv = rule.pv_matrix();
    let collocated = DMatrix::from_fn(n, n, |i, j| pv[i][j] / (2.0 * PI));
    Ok(PvBlock { rule, kernel, collocated })
}

impl PvBlock {
    /// The represented operator `½I + i·kernel` in the `√w` basis.
    pub fn operator(&self) -> DMatrix<Complex64> {
        let n = self.kernel.nrows();
        DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(if i == j { 0.5 } else { 0.0 }, self.kernel[(i, j)])
        })
    }

    /// Collocated image of the constant function at the nodes:
    /// `½ + (i/2π)·PV∫ dy/(x-y)`.
    pub fn constant_image(&self) -> Vec<Complex64> {
        let n = self.collocated.nrows();
        (0..n).map(|i| Complex64::new(0.5, self.collocated.row(i).sum())).collect()
    }
}

/// Complex cross block `i·K` with `K = 1/(2π(x-y))`.
pub fn complex_cross(block: &CrossBlock) -> DMatrix<Complex64> {
    block.matrix.map(|v| Complex64::new(0.0, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cross_ratio_log;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::finite(a, b)
    }

    #[test]
    fn cutoff_trace_identity() {
        let s: IntervalSet = "0,1;2,3.5".parse().unwrap();
        let sys = assemble_cutoff_projector(&s, 40.0, NodeSizing::Auto).unwrap();
        assert!((sys.trace() - 40.0 * 2.5 / PI).abs() < 1e-10);
    }

    #[test]
    fn cutoff_spectrum_is_projector_like() {
        let s = IntervalSet::single(iv(0.0, 1.0));
        let sys = assemble_cutoff_projector(&s, 50.0, NodeSizing::Auto).unwrap();
        let spec = spectrum(&sys).unwrap();
        assert!(spec.eigenvalues.iter().all(|&l| l > -1e-6 && l < 1.0 + 1e-6));
        assert!(spec.residual_norm < 1e-10);
        // roughly κ|I|/π eigenvalues near one
        let ones = spec.eigenvalues.iter().filter(|&&l| l > 0.5).count() as f64;
        assert!((ones - 50.0 / PI).abs() < 2.0);
    }

    #[test]
    fn vanishing_cutoff() {
        let s = IntervalSet::single(iv(0.0, 1.0));
        let sys = assemble_cutoff_projector(&s, 1e-9, NodeSizing::Fixed(20)).unwrap();
        let spec = spectrum(&sys).unwrap();
        assert!(spec.eigenvalues.iter().all(|l| l.abs() < 1e-9));
    }

    #[test]
    fn cutoff_rejects_unbounded() {
        let s = IntervalSet::single(Interval::right_unbounded(0.0).unwrap());
        assert!(matches!(assemble_cutoff_projector(&s, 1.0, NodeSizing::Auto), Err(Error::Argument(_))));
    }

    #[test]
    fn node_cap_is_resource_error() {
        let s = IntervalSet::single(iv(0.0, 100.0));
        let e = assemble_cutoff_projector(&s, 100.0, NodeSizing::Auto).unwrap_err();
        assert_eq!(e.class(), crate::error::ErrorClass::Resource);
    }

    #[test]
    fn small_eigen_examples() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = sym_eig(&m).unwrap();
        assert_relative_eq!(e.eigenvalues[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(e.eigenvalues[1], -1.0, epsilon = 1e-15);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 2.0]));
        assert_eq!(sym_eig(&d).unwrap().eigenvalues, vec![3.0, 2.0, 1.0]);
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(sym_eig(&bad), Err(Error::Argument(_))));
    }

    #[test]
    fn random_symmetric_trace() {
        // deterministic pseudo-random fill
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut m = DMatrix::zeros(50, 50);
        for i in 0..50 {
            for j in 0..=i {
                let v = next();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let e = sym_eig(&m).unwrap();
        assert!((e.eigenvalues.iter().sum::<f64>() - m.trace()).abs() < 1e-10);
    }

    #[test]
    fn entropy_sum_examples() {
        let h = TestFunction::von_neumann();
        let pure = SpectrumResult { eigenvalues: vec![1.0, 1.0, 0.0, 0.0], residual_norm: 0.0 };
        assert_eq!(entropy_sum(&pure, &h).unwrap().value, 0.0);
        let half = SpectrumResult { eigenvalues: vec![0.5], residual_norm: 0.0 };
        assert_relative_eq!(entropy_sum(&half, &h).unwrap().value, 2f64.ln(), max_relative = 1e-15);
        let noisy = SpectrumResult { eigenvalues: vec![1.0 + 1e-5, -1e-8], residual_norm: 0.0 };
        let e = entropy_sum(&noisy, &h).unwrap();
        assert_eq!((e.value, e.clipped), (0.0, 2));
        let broken = SpectrumResult { eigenvalues: vec![1.01], residual_norm: 0.0 };
        assert!(matches!(entropy_sum(&broken, &h), Err(Error::Numerical(_))));
    }

    #[test]
    fn entropy_log_law() {
        // S(κ|I|) ≈ (1/3) ln(κ|I|) + c, chirality two
        let h = TestFunction::von_neumann();
        let s = IntervalSet::single(iv(0.0, 1.0));
        let ent = |k: f64| {
            let sys = assemble_cutoff_projector(&s, k, NodeSizing::Auto).unwrap();
            entropy_sum(&spectrum(&sys).unwrap(), &h).unwrap().value
        };
        let slope = (ent(400.0) - ent(100.0)) / 4f64.ln();
        assert!((slope - 1.0 / 3.0).abs() < 0.02, "{slope}");
    }

    #[test]
    fn hilbert_schmidt_closed_form() {
        let (i1, i2) = (iv(0.0, 1.0), iv(2.0, 3.0));
        let want = (4f64 / 3.0).ln() / (4.0 * PI * PI);
        assert_relative_eq!(want, 0.0072871, epsilon = 1e-7);
        let b = assemble_cross_block(&i1, &i2, 40, 40).unwrap();
        assert!((b.hilbert_schmidt_sq() - want).abs() < 1e-12);
        let p2 = schatten_norm(&b, 2.0).unwrap();
        assert!((p2.value - want.sqrt()).abs() < 1e-10);
        assert_relative_eq!(p2.value, 0.085364, epsilon = 1e-6);
        assert!((p2.value - b.matrix.norm()).abs() < 1e-14);
    }

    #[test]
    fn midpoint_cross_block() {
        let b = assemble_cross_block(&iv(0.0, 1.0), &iv(2.0, 4.0), 1, 1).unwrap();
        assert_relative_eq!(b.matrix[(0, 0)], (2.0f64).sqrt() / (2.0 * PI * (0.5 - 3.0)), max_relative = 1e-15);
    }

    #[test]
    fn cross_block_gap_errors() {
        assert!(matches!(
            assemble_cross_block(&iv(0.0, 1.0), &iv(1.0, 2.0), 4, 4),
            Err(Error::TouchingClosures { .. })
        ));
        assert!(matches!(assemble_cross_block(&iv(0.0, 2.0), &iv(1.0, 3.0), 4, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn wider_gap_shrinks_singular_values() {
        let near = assemble_cross_block(&iv(0.0, 1.0), &iv(2.0, 3.0), 30, 30).unwrap().singular_values();
        let far = assemble_cross_block(&iv(0.0, 1.0), &iv(3.0, 4.0), 30, 30).unwrap().singular_values();
        for k in 0..8 {
            assert!(far[k] < near[k], "k={k}");
        }
    }

    #[test]
    fn singular_values_decay_geometrically() {
        let s = assemble_cross_block(&iv(0.0, 1.0), &iv(2.0, 3.0), 60, 60).unwrap().singular_values();
        for m in 2..8 {
            assert!(s[m + 5] / s[m] < 0.5, "m={m}");
        }
    }

    #[test]
    fn schatten_monotone_and_trace_norm_stable() {
        let b = assemble_cross_block(&iv(0.0, 1.0), &iv(2.0, 3.0), 40, 40).unwrap();
        let vals: Vec<f64> = [0.5, 1.0, 1.5, 2.0, 4.0].iter().map(|&p| schatten_norm(&b, p).unwrap().value).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]));
        let fine = assemble_cross_block(&iv(0.0, 1.0), &iv(2.0, 3.0), 80, 80).unwrap();
        let p1 = schatten_norm(&b, 1.0).unwrap();
        assert!((p1.value - schatten_norm(&fine, 1.0).unwrap().value).abs() < 1e-6);
        assert!(p1.tail_bound < 1e-6);
    }

    #[test]
    fn truncated_unbounded_block() {
        let (i1, i2) = (iv(0.0, 1.0), Interval::right_unbounded(2.0).unwrap());
        assert!(assemble_cross_block(&i1, &i2, 10, 10).is_err());
        let b = assemble_cross_block_truncated(&i1, &i2, 40, 200, Some(50.0)).unwrap();
        let want = cross_ratio_log(&i1, &i2).unwrap() / (4.0 * PI * PI);
        assert!((b.hilbert_schmidt_sq() - want).abs() < 1e-6, "{} vs {want}", b.hilbert_schmidt_sq());
        assert!(b.truncated_hs > 0.0);
    }

    #[test]
    fn pv_block_constant_image() {
        let i = iv(0.0, 2.0);
        let blk = assemble_pv_block(&i, 32).unwrap();
        for (x, v) in blk.rule.nodes.iter().zip(blk.constant_image()) {
            assert!((v.re - 0.5).abs() < 1e-15);
            assert!((v.im - (x / (2.0 - x)).ln() / (2.0 * PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn pv_block_is_self_adjoint() {
        let blk = assemble_pv_block(&iv(-1.0, 0.5), 24).unwrap();
        assert!(max_abs(&(&blk.kernel + blk.kernel.transpose())) < 1e-12);
        let op = blk.operator();
        let defect = (&op - op.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        assert!(defect < 1e-12);
    }

    #[test]
    fn word_trace_matches_hilbert_schmidt() {
        let (i1, i2) = (iv(0.0, 1.0), iv(2.0, 3.0));
        let b = assemble_cross_block(&i1, &i2, 30, 30).unwrap();
        let t = complex_cross(&b);
        let tr = (t.adjoint() * &t).trace();
        assert!((tr.re - b.hilbert_schmidt_sq()).abs() < 1e-14 && tr.im.abs() < 1e-16);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn spectrum_translation_and_scaling_invariant(shift in -20.0..20.0f64, scale in 0.3..3.0f64) {
            let s: IntervalSet = "0,1;2,3".parse().unwrap();
            let kappa = 30.0;
            let n = NodeSizing::Fixed(40);
            let base = spectrum(&assemble_cutoff_projector(&s, kappa, n).unwrap()).unwrap();
            let moved = s.apply(crate::geometry::Mobius::Translate(shift)).unwrap();
            let a = spectrum(&assemble_cutoff_projector(&moved, kappa, n).unwrap()).unwrap();
            let scaled = s.apply(crate::geometry::Mobius::Scale(scale)).unwrap();
            let b = spectrum(&assemble_cutoff_projector(&scaled, kappa / scale, n).unwrap()).unwrap();
            for k in 0..base.eigenvalues.len() {
                prop_assert!((a.eigenvalues[k] - base.eigenvalues[k]).abs() < 1e-10);
                prop_assert!((b.eigenvalues[k] - base.eigenvalues[k]).abs() < 1e-10);
            }
        }

        #[test]
        fn cutoff_trace_identity_random(kappa in 0.5..80.0f64, l1 in 0.2..2.0f64, g in 0.1..2.0f64, l2 in 0.2..2.0f64) {
            let s = IntervalSet::new(vec![iv(0.0, l1), iv(l1 + g, l1 + g + l2)]);
            let sys = assemble_cutoff_projector(&s, kappa, NodeSizing::Auto).unwrap();
            prop_assert!((sys.trace() - kappa * (l1 + l2) / PI).abs() < 1e-10);
        }
    }
}
