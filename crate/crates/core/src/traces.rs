//! Numerical estimators for the entropy traces: band-limited spectral sweeps
//! for general test functions and exact block-word expansions for monomials.

use std::f64::consts::PI;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::closedform::{separation_expansion, SeparationExpansion};
use crate::error::{Error, Result};
use crate::geometry::{set_algebra, Interval, IntervalSet};
use crate::quad::QuadratureRule;
use crate::specops::{
    assemble_pv_block, entropy_sum, hilbert_kernel_matrix, rules_for, sine_kernel_matrix, sym_eig, NodeSizing,
};
use crate::testfns::TestFunction;

/// Ratio between the band-limited estimate and the one-sided trace: the
/// band `[0, 2κ]` has two Fermi points, each contributing one chiral copy.
pub const CHIRALITY_FACTOR: f64 = 2.0;

/// Largest monomial degree accepted by [`delta_trace_poly`].
pub const MAX_POLY_DEGREE: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Plain mean of the raw values.
    None,
    /// Mean over κ-windows spanning two oscillation periods `π/d`, where `d`
    /// is the minimal endpoint distance.
    WindowMean,
}

/// κ-sweep of the sine-kernel cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepConfig {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub samples: usize,
    pub averaging: Averaging,
    pub nodes: NodeSizing,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            kappa_min: 200.0,
            kappa_max: 260.0,
            samples: 13,
            averaging: Averaging::WindowMean,
            nodes: NodeSizing::Auto,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_min > 0.0) || !self.kappa_max.is_finite() {
            return Err(Error::argument("cutoff range must be positive and finite"));
        }
        if self.samples == 0 {
            return Err(Error::argument("sweep needs at least one sample"));
        }
        if self.samples > 1 && !(self.kappa_min < self.kappa_max) {
            return Err(Error::argument("sweep needs kappa_min < kappa_max"));
        }
        Ok(())
    }

    pub fn kappas(&self) -> Vec<f64> {
        if self.samples == 1 {
            return vec![self.kappa_min];
        }
        let step = (self.kappa_max - self.kappa_min) / (self.samples - 1) as f64;
        (0..self.samples).map(|k| self.kappa_min + step * k as f64).collect()
    }

    /// Same sweep with every cutoff divided by `s`.
    pub fn rescaled(&self, s: f64) -> Self {
        SweepConfig { kappa_min: self.kappa_min / s, kappa_max: self.kappa_max / s, ..*self }
    }
}

/// Averaged sweep result. `value` estimates `CHIRALITY_FACTOR` times the
/// one-sided trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEstimate {
    pub value: f64,
    pub error_bar: f64,
    pub per_kappa: Vec<(f64, f64)>,
    pub chirality_factor: f64,
    pub windows: usize,
    pub warnings: Vec<String>,
}

impl TraceEstimate {
    /// The estimate divided by the chirality factor.
    pub fn chiral_value(&self) -> f64 {
        self.value / self.chirality_factor
    }
}

/// Smallest distance between distinct endpoints.
fn min_endpoint_distance(panels: &[Interval]) -> f64 {
    let mut pts: Vec<f64> = panels.iter().flat_map(|i| [i.lo(), i.hi()]).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

fn sample_std(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn average(per_kappa: Vec<(f64, f64)>, sweep: &SweepConfig, d: f64) -> TraceEstimate {
    let mut warnings = Vec::new();
    let raw: Vec<f64> = per_kappa.iter().map(|p| p.1).collect();
    let (value, error_bar, windows) = match sweep.averaging {
        Averaging::None => (raw.iter().sum::<f64>() / raw.len() as f64, sample_std(&raw), raw.len()),
        Averaging::WindowMean => {
            let span = sweep.kappa_max - sweep.kappa_min;
            let width = 2.0 * PI / d;
            let nw = ((span / width).floor() as usize).clamp(1, raw.len());
            if span < width {
                warnings.push(format!("cutoff window {span} is shorter than two oscillation periods ({width})"));
            }
            let mut sums = vec![(0.0, 0usize); nw];
            for &(k, v) in &per_kappa {
                let idx = if span > 0.0 { (((k - sweep.kappa_min) / span) * nw as f64).floor() as usize } else { 0 };
                let s = &mut sums[idx.min(nw - 1)];
                s.0 += v;
                s.1 += 1;
            }
            let means: Vec<f64> = sums.iter().filter(|s| s.1 > 0).map(|s| s.0 / s.1 as f64).collect();
            (means.iter().sum::<f64>() / means.len() as f64, sample_std(&means), means.len())
        }
    };
    if windows < 2 {
        warnings.push("fewer than two averaging windows: no error bar".to_string());
    }
    for w in &warnings {
        warn!("{w}");
    }
    TraceEstimate { value, error_bar, per_kappa, chirality_factor: CHIRALITY_FACTOR, windows, warnings }
}

/// `Σ f(λ)` over the spectrum of the sine kernel on the union of `panels`.
pub fn panel_entropy(panels: &[&QuadratureRule], kappa: f64, f: &TestFunction) -> Result<f64> {
    let rules: Vec<QuadratureRule> = panels.iter().map(|&r| r.clone()).collect();
    let m = sine_kernel_matrix(&rules, kappa);
    Ok(entropy_sum(&sym_eig(&m)?, f)?.value)
}

fn sweep_map<F>(sweep: &SweepConfig, per: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    sweep.validate()?;
    sweep.kappas().into_par_iter().map(|k| Ok((k, per(k)?))).collect()
}

/// Per-κ raw values `S(𝓘1) + S(𝓘2) - S(𝓘1 ∪ 𝓘2)`, with the union system
/// reusing the nodes of both parts.
pub fn delta_raw(set1: &IntervalSet, set2: &IntervalSet, f: &TestFunction, kappa: f64, nodes: NodeSizing) -> Result<f64> {
    let r1 = rules_for(set1, kappa, nodes)?;
    let r2 = rules_for(set2, kappa, nodes)?;
    let p1: Vec<&QuadratureRule> = r1.iter().collect();
    let p2: Vec<&QuadratureRule> = r2.iter().collect();
    let both: Vec<&QuadratureRule> = r1.iter().chain(&r2).collect();
    Ok(panel_entropy(&p1, kappa, f)? + panel_entropy(&p2, kappa, f)? - panel_entropy(&both, kappa, f)?)
}

fn check_cutoff_sets(set1: &IntervalSet, set2: &IntervalSet) -> Result<()> {
    if set1.is_empty() || set2.is_empty() {
        return Err(Error::argument("both interval sets must be nonempty"));
    }
    if !set1.is_bounded() || !set2.is_bounded() {
        return Err(Error::argument("cutoff estimates need bounded intervals"));
    }
    set1.join(set2).min_gap()?;
    Ok(())
}

/// Band-limited estimate of `CHIRALITY_FACTOR · tr Δ(𝓘1,𝓘2;f)`.
pub fn delta_trace_cutoff(
    set1: &IntervalSet,
    set2: &IntervalSet,
    f: &TestFunction,
    sweep: &SweepConfig,
) -> Result<TraceEstimate> {
    check_cutoff_sets(set1, set2)?;
    let per = sweep_map(sweep, |k| delta_raw(set1, set2, f, k, sweep.nodes))?;
    let all = set1.join(set2);
    Ok(average(per, sweep, min_endpoint_distance(all.intervals())))
}

/// Panels `I1∖I2`, `I1∩I2`, `I2∖I1` of two overlapping intervals.
pub fn overlap_panels(i1: &Interval, i2: &Interval) -> Result<(Interval, Interval, Interval)> {
    let a = set_algebra(i1, i2);
    let b = set_algebra(i2, i1);
    if a.intersection.is_empty() {
        return Err(Error::domain(format!("{i1} and {i2} have no overlap")));
    }
    if a.difference.len() != 1 || b.difference.len() != 1 {
        return Err(Error::domain(format!(
            "{i1} and {i2} must overlap with both differences a single nonempty interval"
        )));
    }
    Ok((a.difference.intervals()[0], a.intersection.intervals()[0], b.difference.intervals()[0]))
}

/// Per-κ `S(I1) + S(I2) - S(I1∩I2) - S(I1∪I2)` on shared panel grids.
pub fn f_raw(i1: &Interval, i2: &Interval, f: &TestFunction, kappa: f64, nodes: NodeSizing) -> Result<f64> {
    let (l, c, r) = overlap_panels(i1, i2)?;
    let set = IntervalSet::new(vec![l, c, r]);
    let rules = rules_for(&set, kappa, nodes)?;
    // rules follow the sorted panel order
    let find = |i: &Interval| set.intervals().iter().position(|j| j == i).expect("panel present");
    let (rl, rc, rr) = (&rules[find(&l)], &rules[find(&c)], &rules[find(&r)]);
    Ok(panel_entropy(&[rl, rc], kappa, f)? + panel_entropy(&[rc, rr], kappa, f)?
        - panel_entropy(&[rc], kappa, f)?
        - panel_entropy(&[rl, rc, rr], kappa, f)?)
}

/// Band-limited estimate of `CHIRALITY_FACTOR · tr F(I1,I2;f)` for overlapping intervals.
pub fn f_trace_cutoff(i1: &Interval, i2: &Interval, f: &TestFunction, sweep: &SweepConfig) -> Result<TraceEstimate> {
    if !i1.is_bounded() || !i2.is_bounded() {
        return Err(Error::argument("cutoff estimates need bounded intervals"));
    }
    let (l, c, r) = overlap_panels(i1, i2)?;
    let per = sweep_map(sweep, |k| f_raw(i1, i2, f, k, sweep.nodes))?;
    Ok(average(per, sweep, min_endpoint_distance(&[l, c, r])))
}

/// Cyclic words of length `m` over `k` letters, one per rotation class,
/// with the class size.
fn necklaces(k: usize, m: usize) -> Vec<(Vec<usize>, usize)> {
    let total = k.pow(m as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut w = vec![0; m];
        let mut c = code;
        for slot in w.iter_mut().rev() {
            *slot = c % k;
            c /= k;
        }
        let mut is_min = true;
        let mut period = m;
        for s in 1..m {
            let rot: Vec<usize> = w[s..].iter().chain(&w[..s]).copied().collect();
            if rot < w {
                is_min = false;
                break;
            }
            if rot == w && period == m {
                period = s;
            }
        }
        if is_min {
            out.push((w, period));
        }
    }
    out
}

/// `tr Δ(A, B; t^m)` for finite unions of panels `A` and `B`, as minus the
/// sum of traces of all cyclic block words touching both groups. Diagonal
/// blocks are `½I + iK` with `K` the antisymmetric Nyström matrix of
/// `1/(2π(x-y))`; off-diagonal blocks are `i` times the same kernel.
pub fn poly_cross_trace(a: &[Interval], b: &[Interval], m: u32, n_nodes: usize) -> Result<f64> {
    if !(2..=MAX_POLY_DEGREE).contains(&m) {
        return Err(Error::argument(format!("monomial degree must lie in 2..={MAX_POLY_DEGREE}, got {m}")));
    }
    let panels: Vec<Interval> = a.iter().chain(b).copied().collect();
    if panels.iter().any(|p| !p.is_bounded()) {
        return Err(Error::argument("block words need bounded panels"));
    }
    let in_a = |p: usize| p < a.len();
    let k = panels.len();
    let diag: Vec<_> = panels.iter().map(|p| assemble_pv_block(p, n_nodes)).collect::<Result<_>>()?;
    let mut blocks: Vec<Vec<DMatrix<Complex64>>> = Vec::with_capacity(k);
    for i in 0..k {
        let mut row = Vec::with_capacity(k);
        for j in 0..k {
            row.push(if i == j {
                diag[i].operator()
            } else {
                hilbert_kernel_matrix(&diag[i].rule, &diag[j].rule).map(|v| Complex64::new(0.0, v))
            });
        }
        blocks.push(row);
    }
    let words: Vec<(Vec<usize>, usize)> = necklaces(k, m as usize)
        .into_iter()
        .filter(|(w, _)| w.iter().any(|&p| in_a(p)) && w.iter().any(|&p| !in_a(p)))
        .collect();
    let traces: Vec<f64> = words
        .par_iter()
        .map(|(w, period)| {
            let mm = w.len();
            let mut prod = blocks[w[0]][w[1 % mm]].clone();
            for s in 1..mm {
                prod = &prod * &blocks[w[s]][w[(s + 1) % mm]];
            }
            // the conjugate word is also summed, so only the real part survives
            *period as f64 * prod.trace().re
        })
        .collect();
    Ok(-traces.iter().sum::<f64>())
}

/// `tr Δ(I1,I2;t^m)` of the Fermi projector from block words, `n_nodes` per interval.
pub fn delta_trace_poly(i1: &Interval, i2: &Interval, m: u32, n_nodes: usize) -> Result<f64> {
    if !i1.is_bounded() || !i2.is_bounded() {
        return Err(Error::argument("block words need bounded intervals"));
    }
    IntervalSet::new(vec![*i1, *i2]).min_gap()?;
    poly_cross_trace(&[*i1], &[*i2], m, n_nodes)
}

/// Per-ε values and the ε → 0 extrapolation of the overlapping-interval trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyLimit {
    pub per_eps: Vec<(f64, f64)>,
    pub limit: f64,
    pub fit_residual: f64,
}

/// `tr F(I1,I2;t^m)` as the ε → 0 limit of
/// `Δ((I1∖I2)_ε, I2) - Δ((I1∖I2)_ε, I1∩I2)`, where `(I1∖I2)_ε` is the
/// difference pulled back by ε from the overlap. `I2` is represented by its
/// two panels so the terms involving the overlap cancel on identical grids.
pub fn f_trace_poly_limit(i1: &Interval, i2: &Interval, m: u32, eps_list: &[f64], n_nodes: usize) -> Result<PolyLimit> {
    if !i1.is_bounded() || !i2.is_bounded() {
        return Err(Error::argument("block words need bounded intervals"));
    }
    let (l, c, r) = overlap_panels(i1, i2)?;
    if eps_list.len() < 3 {
        return Err(Error::argument("extrapolation needs at least three ε values"));
    }
    let left_of_overlap = l.hi() <= c.lo();
    let mut per_eps = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !(eps > 0.0 && eps < l.length()) {
            return Err(Error::argument(format!("ε = {eps} must lie in (0, {})", l.length())));
        }
        let shrunk = if left_of_overlap { Interval::new(l.lo(), l.hi() - eps)? } else { Interval::new(l.lo() + eps, l.hi())? };
        let with_i2 = poly_cross_trace(&[shrunk], &[c, r], m, n_nodes)?;
        let with_c = poly_cross_trace(&[shrunk], &[c], m, n_nodes)?;
        per_eps.push((eps, with_i2 - with_c));
    }
    // linear least squares over the three smallest ε
    let mut pts = per_eps.clone();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let pts = &pts[..3];
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / 3.0, pts.iter().map(|p| p.1).sum::<f64>() / 3.0);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let limit = my - slope * mx;
    let fit_residual = pts.iter().map(|p| (p.1 - (limit + slope * p.0)).abs()).fold(0.0, f64::max);
    if !limit.is_finite() || fit_residual > 1e-3 * limit.abs().max(1e-12) {
        return Err(Error::numerical(format!(
            "ε-extrapolation did not settle: limit {limit:e}, fit residual {fit_residual:e}"
        )));
    }
    Ok(PolyLimit { per_eps, limit, fit_residual })
}

/// One row of the separation study: exact value, leading term, their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticRow {
    pub r: f64,
    pub exact: f64,
    pub leading: f64,
    pub ratio: f64,
}

impl From<SeparationExpansion> for AsymptoticRow {
    fn from(e: SeparationExpansion) -> Self {
        AsymptoticRow { r: e.r, exact: e.exact, leading: e.leading, ratio: e.exact / e.leading }
    }
}

/// Exact Rényi mutual information against its leading large-separation term
/// for `i2` shifted by each `r`.
pub fn asymptotic_check(i1: &Interval, i2: &Interval, alpha: f64, r_list: &[f64]) -> Result<Vec<AsymptoticRow>> {
    if r_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::argument("separations must be strictly increasing"));
    }
    r_list.iter().map(|&r| separation_expansion(i1, i2, r, alpha).map(AsymptoticRow::from)).collect()
}
