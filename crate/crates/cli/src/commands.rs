//! One function per subcommand; each returns rendered output.

use std::f64::consts::PI;

use dirac_ee::closedform::{intersecting_trace, n_interval_trace, two_interval_trace};
use dirac_ee::geometry::{cross_ratio_log, parse_partitioned};
use dirac_ee::herglotz::{herglotz_eval, von_neumann_eval};
use dirac_ee::report::{num, CsvTable, Report};
use dirac_ee::specops::{assemble_cross_block_truncated, assemble_cutoff_projector, schatten_norm, spectrum};
use dirac_ee::suite::run_suite;
use dirac_ee::testfns::{renyi_eval, u_coefficient};
use dirac_ee::traces::{
    asymptotic_check, delta_trace_cutoff, delta_trace_poly, f_trace_cutoff, f_trace_poly_limit, TraceEstimate,
};
use dirac_ee::widom::widom_limit;
use dirac_ee::{Averaging, Error, Interval, IntervalSet, NodeSizing, SweepConfig, TestFunction};
use serde::Serialize;
use serde_json::json;

use crate::{CliError, Command, Format, PairArgs, SweepArgs};

/// Nodes per panel for the overlapping-interval polynomial limit.
const POLY_LIMIT_NODES: usize = 32;

pub struct Output {
    pub text: String,
    /// Failing criterion ids, for the suite.
    pub failed: Option<Vec<String>>,
}

impl From<String> for Output {
    fn from(text: String) -> Self {
        Output { text, failed: None }
    }
}

type Res<T> = Result<T, CliError>;

fn arg_err(msg: impl Into<String>) -> CliError {
    CliError::Core(Error::Argument(msg.into()))
}

fn pair(p: &PairArgs) -> Res<(Interval, Interval)> {
    match (&p.i1, &p.i2) {
        (Some(a), Some(b)) => Ok((a.parse()?, b.parse()?)),
        _ => Err(arg_err("both --i1 and --i2 are required")),
    }
}

fn function(text: &str) -> Res<TestFunction> {
    Ok(text.parse()?)
}

fn list(text: &str, flag: &str) -> Res<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| arg_err(format!("malformed number '{t}' in --{flag}"))))
        .collect()
}

fn sweep(s: &SweepArgs) -> Res<SweepConfig> {
    let averaging = match s.averaging.as_str() {
        "window" => Averaging::WindowMean,
        "none" => Averaging::None,
        other => return Err(arg_err(format!("unknown averaging '{other}', expected window or none"))),
    };
    let cfg = SweepConfig {
        kappa_min: s.kappa_min,
        kappa_max: s.kappa_max,
        samples: s.samples,
        averaging,
        nodes: s.nodes.parse::<NodeSizing>()?,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Separated groups from `--sets A|B` or `--i1/--i2`.
fn groups(p: &PairArgs, sets: &Option<String>) -> Res<(IntervalSet, IntervalSet)> {
    match sets {
        Some(s) => {
            let (all, part) = parse_partitioned(s)?;
            Ok(part.split(&all))
        }
        None => {
            let (a, b) = pair(p)?;
            Ok((IntervalSet::single(a), IntervalSet::single(b)))
        }
    }
}

fn closed_form(g1: &IntervalSet, g2: &IntervalSet, f: &TestFunction) -> Res<dirac_ee::closedform::ClosedFormResult> {
    if g1.len() == 1 && g2.len() == 1 {
        return Ok(two_interval_trace(&g1.intervals()[0], &g2.intervals()[0], f)?);
    }
    let (all, part) = dirac_ee::geometry::from_groups(g1, g2)?;
    Ok(n_interval_trace(&all, &part, f)?)
}

fn report<T: Serialize>(command: &str, value: &T, warnings: Vec<String>) -> Res<Output> {
    Ok(Report::new(command, value)?.with_warnings(warnings).render().into())
}

fn single_row(name: &str, cols: &[&str], row: Vec<String>) -> Output {
    let mut t = CsvTable::new(name, cols);
    t.push(row);
    t.render().into()
}

pub fn dispatch(cmd: &Command, format: Option<Format>) -> Res<Output> {
    let name = cmd.name();
    match cmd {
        Command::Formula { pair: p, sets, f } => {
            let f = function(f)?;
            let (g1, g2) = groups(p, sets)?;
            let r = closed_form(&g1, &g2, &f)?;
            match format.unwrap_or(Format::Json) {
                Format::Json => report(name, &r, vec![]),
                Format::Csv => Ok(single_row(
                    name,
                    &["value", "formula_id", "conjectural"],
                    vec![num(r.value), json!(r.formula_id).as_str().unwrap_or_default().to_string(), r.conjectural.to_string()],
                )),
            }
        }
        Command::Ucoef { f, s1, s2 } => {
            let u = u_coefficient(&function(f)?, *s1, *s2)?;
            match format.unwrap_or(Format::Json) {
                Format::Json => report(name, &u, vec![]),
                Format::Csv => Ok(single_row(
                    name,
                    &["sigma1", "sigma2", "value", "quadrature_error"],
                    vec![num(u.sigma1), num(u.sigma2), num(u.value), num(u.quadrature_error)],
                )),
            }
        }
        Command::Spectrum { sets, kappa, nodes } => {
            let support: IntervalSet = sets.parse()?;
            let sys = assemble_cutoff_projector(&support, *kappa, nodes.parse()?)?;
            let sp = spectrum(&sys)?;
            match format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut t = CsvTable::new(name, &["index", "eigenvalue"]);
                    for (i, l) in sp.eigenvalues.iter().enumerate() {
                        t.push(vec![i.to_string(), num(*l)]);
                    }
                    Ok(t.render().into())
                }
                Format::Json => report(
                    name,
                    &json!({
                        "support": support,
                        "kappa": kappa,
                        "dim": sys.dim(),
                        "trace": sys.trace(),
                        "expected_trace": kappa * support.measure() / PI,
                        "eigenvalue_sum": sp.eigenvalues.iter().sum::<f64>(),
                        "residual_norm": sp.residual_norm,
                        "eigenvalues": sp.eigenvalues,
                    }),
                    vec![],
                ),
            }
        }
        Command::Mutualinfo { pair: p, sets, f, sweep: s } => {
            let f = function(f)?;
            let cfg = sweep(s)?;
            let (g1, g2) = groups(p, sets)?;
            let reference = 2.0 * closed_form(&g1, &g2, &f)?.value;
            let est = delta_trace_cutoff(&g1, &g2, &f, &cfg)?;
            estimate_output(name, &est, reference, format)
        }
        Command::Polytrace { pair: p, m, nodes } => {
            let (i1, i2) = pair(p)?;
            let value = delta_trace_poly(&i1, &i2, *m, *nodes)?;
            let reference = two_interval_trace(&i1, &i2, &TestFunction::monomial(*m)?)?.value;
            match format.unwrap_or(Format::Json) {
                Format::Json => report(
                    name,
                    &json!({ "m": m, "nodes": nodes, "value": value, "reference": reference,
                             "abs_deviation": (value - reference).abs() }),
                    vec![],
                ),
                Format::Csv => Ok(single_row(
                    name,
                    &["m", "nodes", "value", "reference"],
                    vec![m.to_string(), nodes.to_string(), num(value), num(reference)],
                )),
            }
        }
        Command::Schatten { pair: p, p: index, nodes, truncate } => {
            let (i1, i2) = pair(p)?;
            let block = assemble_cross_block_truncated(&i1, &i2, *nodes, *nodes, *truncate)?;
            let s = schatten_norm(&block, *index)?;
            let hs_reference = cross_ratio_log(&i1, &i2)? / (4.0 * PI * PI);
            match format.unwrap_or(Format::Json) {
                Format::Json => report(
                    name,
                    &json!({ "schatten": s, "hilbert_schmidt_sq": block.hilbert_schmidt_sq(),
                             "hilbert_schmidt_sq_reference": hs_reference }),
                    vec![],
                ),
                Format::Csv => {
                    let mut t = CsvTable::new(name, &["index", "singular_value"]);
                    for (i, v) in s.singular_values.iter().enumerate() {
                        t.push(vec![i.to_string(), num(*v)]);
                    }
                    Ok(t.render().into())
                }
            }
        }
        Command::Intersect { pair: p, f, method, m, eps, sweep: s } => {
            let (i1, i2) = pair(p)?;
            match method.as_str() {
                "closed" => {
                    let r = intersecting_trace(&i1, &i2, &function(f)?)?;
                    report(name, &r, vec![])
                }
                "poly" => {
                    let eps = list(eps, "eps")?;
                    let lim = f_trace_poly_limit(&i1, &i2, *m, &eps, POLY_LIMIT_NODES)?;
                    let reference = intersecting_trace(&i1, &i2, &TestFunction::monomial(*m)?)?.value;
                    match format.unwrap_or(Format::Json) {
                        Format::Json => report(name, &json!({ "m": m, "limit": lim, "reference": reference }), vec![]),
                        Format::Csv => {
                            let mut t = CsvTable::new(name, &["eps", "value", "extrapolated", "reference"]);
                            for (e, v) in &lim.per_eps {
                                t.push_nums(&[*e, *v, lim.limit, reference]);
                            }
                            Ok(t.render().into())
                        }
                    }
                }
                "cutoff" => {
                    let f = function(f)?;
                    let closed = intersecting_trace(&i1, &i2, &f)?;
                    let mut est = f_trace_cutoff(&i1, &i2, &f, &sweep(s)?)?;
                    if closed.conjectural {
                        est.warnings.push("reference value is conjectural for this test function".into());
                    }
                    estimate_output(name, &est, 2.0 * closed.value, format)
                }
                other => Err(arg_err(format!("unknown method '{other}', expected closed, poly or cutoff"))),
            }
        }
        Command::Widom { pair: p, f, eps } => {
            let (i1, i2) = pair(p)?;
            let lim = widom_limit(&i1, &i2, &function(f)?, *eps)?;
            match format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut t = CsvTable::new(name, &["eps", "value", "extrapolated", "reference"]);
                    for (e, v) in &lim.per_eps {
                        t.push_nums(&[*e, *v, lim.limit, lim.reference]);
                    }
                    Ok(t.render().into())
                }
                Format::Json => report(name, &lim, vec![]),
            }
        }
        Command::Herglotz { alpha, t } => {
            let ts = list(t, "t")?;
            let mut rows = Vec::with_capacity(ts.len());
            for &t in &ts {
                let rep = if *alpha == 1.0 { von_neumann_eval(t)? } else { herglotz_eval(*alpha, t)? };
                let direct = renyi_eval(*alpha, t)?;
                rows.push([t, rep, direct, rep - direct]);
            }
            match format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut tab = CsvTable::new(name, &["t", "representation", "direct", "difference"]);
                    for r in &rows {
                        tab.push_nums(r);
                    }
                    Ok(tab.render().into())
                }
                Format::Json => report(name, &json!({ "alpha": alpha, "rows": rows }), vec![]),
            }
        }
        Command::Asymptotics { pair: p, alpha, r } => {
            let (i1, i2) = pair(p)?;
            let rows = asymptotic_check(&i1, &i2, *alpha, &list(r, "r")?)?;
            match format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut t = CsvTable::new(name, &["r", "exact", "leading", "ratio"]);
                    for row in &rows {
                        t.push_nums(&[row.r, row.exact, row.leading, row.ratio]);
                    }
                    Ok(t.render().into())
                }
                Format::Json => report(name, &rows, vec![]),
            }
        }
        Command::Suite { only } => {
            let outcomes = run_suite(only)?;
            let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.to_string()).collect();
            let text = match format {
                None => outcomes
                    .iter()
                    .map(|o| {
                        let v = if o.passed { "PASS" } else { "FAIL" };
                        format!("{v} {:<18} score {:.3}  {}\n", o.id, o.score, o.detail)
                    })
                    .collect(),
                Some(Format::Csv) => {
                    let mut t = CsvTable::new(name, &["id", "passed", "score", "detail"]);
                    for o in &outcomes {
                        t.push(vec![o.id.into(), o.passed.to_string(), num(o.score), format!("\"{}\"", o.detail)]);
                    }
                    t.render()
                }
                Some(Format::Json) => Report::new(name, &outcomes)?.render(),
            };
            Ok(Output { text, failed: (!failed.is_empty()).then_some(failed) })
        }
    }
}

fn estimate_output(name: &str, est: &TraceEstimate, reference: f64, format: Option<Format>) -> Res<Output> {
    let deviation = (est.value - reference) / reference;
    match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut t = CsvTable::new(name, &["kappa", "raw"]);
            for (k, v) in &est.per_kappa {
                t.push_nums(&[*k, *v]);
            }
            let mut text = t.render();
            text.push_str(&format!(
                "# value={} error_bar={} reference={} relative_deviation={}\n",
                num(est.value),
                num(est.error_bar),
                num(reference),
                num(deviation)
            ));
            Ok(text.into())
        }
        Format::Json => report(
            name,
            &json!({
                "value": est.value,
                "error_bar": est.error_bar,
                "chirality_factor": est.chirality_factor,
                "chiral_value": est.chiral_value(),
                "reference": reference,
                "relative_deviation": deviation,
                "windows": est.windows,
                "per_kappa": est.per_kappa,
            }),
            est.warnings.clone(),
        ),
    }
}
