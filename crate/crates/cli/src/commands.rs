use lame_core::analysis::{count_zeros_segment, verify_comparison, verify_limit, winding_unit_circle, Comparison};
use lame_core::elliptic::jacobi;
use lame_core::floquet::floquet_eigenvalues;
use lame_core::recurrence::{recessive_ratio, tail_ratio, RecessiveRatio};
use lame_core::special::{algebraic_functions, ell_index, lame_polynomials};
use lame_core::spectra::wangerin_eigenvalues;
use lame_core::wangerin::{eigenfunction, evaluate_in_strip, evaluate_on_segment};
use lame_core::{Form, LameParams, Modulus, Normalization};

use crate::output::OutputRecord;
use crate::{Command, Failure, FormArg, NormArg, Suite, Where};

type Outcome = Result<(OutputRecord, bool), Failure>;

pub const DEFAULT_NU: [f64; 8] = [0.3, 1.6, -0.7, -1.5, -2.2, -2.5, -2.7, -4.2];
pub const DEFAULT_K: [f64; 3] = [0.3, 0.5, 0.8];
const FAR_TAIL: usize = 1_500_000;
const RATIO_TOL: f64 = 1e-6;
const LIMIT_KS: [f64; 2] = [0.1, 0.05];
const LIMIT_BOUND: f64 = 5e-3;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// `start:end:count`, inclusive of both ends.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!("grid `{spec}` is not start:end:count")));
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| usage(format!("bad grid start `{}`", parts[0])))?;
    let end: f64 = parts[1].trim().parse().map_err(|_| usage(format!("bad grid end `{}`", parts[1])))?;
    let count: usize = parts[2].trim().parse().map_err(|_| usage(format!("bad grid count `{}`", parts[2])))?;
    if count == 0 || !start.is_finite() || !end.is_finite() {
        return Err(usage(format!("grid `{spec}` is empty or not finite")));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count).map(|i| start + (end - start) * i as f64 / (count - 1) as f64).collect())
}

fn kind_arg(kind: u8) -> Result<u8, Failure> {
    match kind {
        1 | 2 => Ok(kind),
        _ => Err(usage(format!("--kind must be 1 or 2, got {kind}"))),
    }
}

pub fn execute(cmd: &Command) -> Outcome {
    match cmd {
        Command::Elliptic { k, grid } => elliptic(*k, grid),
        Command::Floquet { mu, cell, mmax, tol } => {
            let p = LameParams::new(cell.nu, cell.k)?;
            let hs = floquet_eigenvalues(*mu, &p, *mmax, *tol)?;
            let mut rec = OutputRecord::new("floquet", &["m", "h"]);
            rec.param("mu", *mu).param("nu", cell.nu).param("k", cell.k).param("mmax", *mmax).param("tol", *tol);
            for (m, h) in hs.iter().enumerate() {
                rec.row("h", vec![m as f64, *h]);
            }
            Ok((rec, true))
        }
        Command::Wangerin { kind, cell, mmax, tol } => {
            let kind = kind_arg(*kind)?;
            let p = LameParams::new(cell.nu, cell.k)?;
            let pairs = wangerin_eigenvalues(kind, &p, *mmax, *tol)?;
            let mut rec = OutputRecord::new("wangerin", &["m", "h", "truncation", "residual"]);
            rec.param("kind", kind).param("nu", cell.nu).param("k", cell.k).param("mmax", *mmax).param("tol", *tol);
            for e in &pairs {
                rec.row("H", vec![e.index as f64, e.h, e.truncation as f64, e.residual]);
            }
            Ok((rec, true))
        }
        Command::Eigenfunction {
            kind,
            m,
            cell,
            grid,
            y_grid,
            location,
            form,
            norm,
        } => {
            let kind = kind_arg(*kind)?;
            let p = LameParams::new(cell.nu, cell.k)?;
            let form = match form {
                FormArg::SelfAdjoint => Form::SelfAdjoint,
                FormArg::Plain => Form::Plain,
            };
            let norm = match norm {
                NormArg::Endpoint => Normalization::Endpoint,
                NormArg::Unit => Normalization::UnitCoeff,
            };
            let f = eigenfunction(kind, form, *m, &p, norm)?;
            let big_k = p.modulus.big_k;
            let xs = parse_grid(grid)?;
            let mut rec = match location {
                Where::Segment => OutputRecord::new("eigenfunction", &["u", "w"]),
                _ => OutputRecord::new("eigenfunction", &["x", "y", "re", "im"]),
            };
            rec.param("kind", kind).param("m", *m).param("nu", cell.nu).param("k", cell.k);
            rec.param("grid", grid.as_str()).param("where", format!("{location:?}").to_lowercase());
            rec.diag("h", f.h()).diag("truncation", f.truncation).diag("coefficients", f.coeffs.len());
            rec.diag("recursion_residual", f.recursion_residual()?);
            match location {
                Where::Segment => {
                    for t in xs {
                        let u = t * big_k;
                        rec.row("w", vec![u, evaluate_on_segment(&f, u)?]);
                    }
                }
                Where::Real => {
                    for t in xs {
                        let v = evaluate_in_strip(&f, t * big_k, 0.0)?;
                        rec.row("w", vec![t * big_k, 0.0, v.re, v.im]);
                    }
                }
                Where::Strip => {
                    rec.param("y_grid", y_grid.as_str());
                    let ys = parse_grid(y_grid)?;
                    for s in &ys {
                        for t in &xs {
                            let (x, y) = (t * big_k, s * p.modulus.big_kprime);
                            let v = evaluate_in_strip(&f, x, y)?;
                            rec.row("w", vec![x, y, v.re, v.im]);
                        }
                    }
                }
            }
            Ok((rec, true))
        }
        Command::Algebraic { p, k } => {
            let modulus = Modulus::new(*k)?;
            let pairs = algebraic_functions(*p, &modulus)?;
            let mut columns = vec!["m".to_string(), "h".to_string()];
            columns.extend((0..*p).map(|i| format!("a{i}")));
            let mut rec = OutputRecord::new("algebraic", &columns.iter().map(String::as_str).collect::<Vec<_>>());
            rec.param("p", *p).param("k", *k).param("nu", -(*p as f64) - 0.5);
            for (m, pair) in pairs.iter().enumerate() {
                let mut values = vec![m as f64, pair.h];
                values.extend(&pair.first.coeffs);
                rec.row("pair", values);
            }
            Ok((rec, true))
        }
        Command::Polynomial { p, k } => {
            let modulus = Modulus::new(*k)?;
            let sols = lame_polynomials(*p, &modulus)?;
            let width = p + 1;
            let mut columns = vec!["kind".to_string(), "h".to_string(), "defect".to_string()];
            columns.extend((0..width).map(|i| format!("c{i}")));
            let mut rec = OutputRecord::new("polynomial", &columns.iter().map(String::as_str).collect::<Vec<_>>());
            rec.param("p", *p).param("k", *k).param("nu", -(*p as f64) - 1.0);
            for s in &sols {
                let mut values = vec![s.kindj as f64, s.h, s.ode_defect().max_abs() / s.poly.max_abs()];
                let mut c = s.coeffs.clone();
                c.resize(width, 0.0);
                values.extend(c);
                rec.row(s.class.to_string(), values);
            }
            Ok((rec, true))
        }
        Command::Limit { kind, m, nu, klist } => {
            let kind = kind_arg(*kind)?;
            let report = verify_limit(kind, *m, *nu, klist)?;
            let mut rec = OutputRecord::new("limit", &["k", "max_error", "ratio"]);
            rec.param("kind", kind).param("m", *m).param("nu", *nu).param("klist", klist.clone());
            for (i, s) in report.samples.iter().enumerate() {
                let ratio = if i == 0 { 0.0 } else { report.ratios[i - 1] };
                rec.row("error", vec![s.k, s.max_error, ratio]);
            }
            if let Some(r) = report.ratios.last() {
                rec.diag("empirical_order", r.log2());
            }
            Ok((rec, true))
        }
        Command::Zeros { kind, m, cell } => {
            let kind = kind_arg(*kind)?;
            let p = LameParams::new(cell.nu, cell.k)?;
            let f = eigenfunction(kind, Form::SelfAdjoint, *m, &p, Normalization::UnitCoeff)?;
            let zeros = count_zeros_segment(&f)?;
            let ell = ell_index(kind, *m, cell.nu)?.ell;
            let mut rec = OutputRecord::new("zeros", &["value", "extra", "ell"]);
            rec.param("kind", kind).param("m", *m).param("nu", cell.nu).param("k", cell.k);
            rec.diag("segment_count", zeros.count).diag("grid_size", zeros.grid_size).diag("stable", zeros.stable);
            for u in &zeros.locations {
                rec.row("zero", vec![*u, 0.0, ell as f64]);
            }
            match winding_unit_circle(&f) {
                Ok(w) => {
                    rec.row("winding", vec![w.winding as f64, w.min_modulus_on_circle, ell as f64]);
                    rec.diag("winding_grid", w.grid_size);
                }
                Err(e) => {
                    rec.diag("winding", e.to_string());
                }
            }
            Ok((rec, true))
        }
        Command::Verify { suite, nu, k, grid, depth } => verify(*suite, *nu, *k, grid.as_deref(), *depth),
    }
}

fn elliptic(k: f64, grid: &str) -> Outcome {
    let m = Modulus::new(k)?;
    let mut rec = OutputRecord::new("elliptic", &["x", "sn", "cn", "dn", "am"]);
    rec.param("k", k).param("grid", grid);
    rec.row("constants", vec![m.k, m.kprime, m.big_k, m.big_kprime, m.eta1]);
    rec.diag("K", m.big_k).diag("Kprime", m.big_kprime).diag("eta1", m.eta1).diag("eta2", m.eta2).diag("kprime", m.kprime);
    for t in parse_grid(grid)? {
        let x = t * m.big_k;
        let j = jacobi(x, &m);
        rec.row("table", vec![x, j.sn, j.cn, j.dn, j.am]);
    }
    Ok((rec, true))
}

fn cells(nu: Option<f64>, k: Option<f64>, grid: Option<&str>) -> Result<Vec<(f64, f64)>, Failure> {
    match grid {
        Some("default") | None => {}
        Some(other) => return Err(usage(format!("unknown grid `{other}` (only `default`)"))),
    }
    if grid.is_some() || (nu.is_none() && k.is_none()) {
        return Ok(DEFAULT_NU.iter().flat_map(|&n| DEFAULT_K.iter().map(move |&k| (n, k))).collect());
    }
    match (nu, k) {
        (Some(n), Some(k)) => Ok(vec![(n, k)]),
        (Some(n), None) => Ok(DEFAULT_K.iter().map(|&k| (n, k)).collect()),
        (None, Some(k)) => Ok(DEFAULT_NU.iter().map(|&n| (n, k)).collect()),
        (None, None) => unreachable!(),
    }
}

struct Checks {
    rec: OutputRecord,
    failures: usize,
}

impl Checks {
    #[allow(clippy::too_many_arguments)]
    fn push(&mut self, label: String, nu: f64, k: f64, lhs: f64, rhs: f64, margin: f64, holds: bool) {
        if !holds {
            self.failures += 1;
        }
        self.rec.row(label, vec![nu, k, lhs, rhs, margin, if holds { 1.0 } else { 0.0 }]);
    }
}

/// Zero count on the segment: `m` above `ν = −3/2`, otherwise `m − p`
/// floored at zero for `−p − 3/2 < ν ≤ −p − ½`.
fn expected_segment_zeros(m: usize, nu: f64) -> usize {
    if nu > -1.5 {
        m
    } else {
        m.saturating_sub((-nu - 0.5).floor() as usize)
    }
}

fn is_positive_integer(x: f64) -> bool {
    x >= 1.0 && (x - x.round()).abs() < 1e-12
}

fn verify(suite: Suite, nu: Option<f64>, k: Option<f64>, grid: Option<&str>, depth: usize) -> Outcome {
    let cells = cells(nu, k, grid)?;
    let name = format!("{suite:?}").to_lowercase();
    let mut checks = Checks {
        rec: OutputRecord::new("verify", &["nu", "k", "lhs", "rhs", "margin", "holds"]),
        failures: 0,
    };
    checks.rec.param("suite", name.as_str()).param("depth", depth).param("cells", cells.len());
    let theorem = match suite {
        Suite::C1 => Some(Comparison::FloquetMerge),
        Suite::C2 => Some(Comparison::Reflection),
        Suite::C3 => Some(Comparison::Interleaving),
        _ => None,
    };
    if let Some(theorem) = theorem {
        for &(nu, k) in &cells {
            let report = verify_comparison(theorem, nu, k, depth)?;
            for r in &report.relations {
                checks.push(r.label.clone(), nu, k, r.lhs, r.rhs, r.margin, r.holds);
            }
        }
    }
    match suite {
        Suite::Z1 => {
            for &(nu, k) in &cells {
                let p = LameParams::new(nu, k)?;
                for kind in [1u8, 2] {
                    for m in 0..=depth.min(5) {
                        let f = eigenfunction(kind, Form::SelfAdjoint, m, &p, Normalization::UnitCoeff)?;
                        let r = count_zeros_segment(&f)?;
                        let expect = expected_segment_zeros(m, nu);
                        let holds = r.count == expect && r.stable;
                        checks.push(format!("zeros of w{kind}_{m}"), nu, k, r.count as f64, expect as f64, 0.0, holds);
                    }
                }
            }
        }
        Suite::Z2 => {
            for &(nu, k) in &cells {
                let p = LameParams::new(nu, k)?;
                for kind in [1u8, 2] {
                    for m in 0..=depth.min(4) {
                        let shift = if kind == 1 { 0.0 } else { 1.0 };
                        if is_positive_integer(-(m as f64) - nu - shift) {
                            continue;
                        }
                        let f = eigenfunction(kind, Form::SelfAdjoint, m, &p, Normalization::UnitCoeff)?;
                        let ell = ell_index(kind, m, nu)?.ell as f64;
                        let label = format!("winding of v{kind}_{m}");
                        match winding_unit_circle(&f) {
                            Ok(w) => checks.push(label, nu, k, w.winding as f64, ell, w.min_modulus_on_circle, w.winding as f64 == ell),
                            Err(_) => checks.push(label + " (refused)", nu, k, -1.0, ell, 0.0, false),
                        }
                    }
                }
            }
        }
        Suite::Recessive => {
            for &(nu, k) in &cells {
                let p = LameParams::new(nu, k)?;
                for kind in [1u8, 2] {
                    for m in 0..=depth.min(2) {
                        let f = eigenfunction(kind, Form::SelfAdjoint, m, &p, Normalization::UnitCoeff)?;
                        let eta1 = p.modulus.eta1;
                        if f.terminating {
                            let holds = recessive_ratio(&f.coeffs, 10)? == RecessiveRatio::Terminating;
                            checks.push(format!("termination of w{kind}_{m}"), nu, k, 0.0, 0.0, 0.0, holds);
                        } else {
                            let r = tail_ratio(f.recurrence_kind(), &f.params, FAR_TAIL, 10)?;
                            let gap = (r - eta1).abs();
                            checks.push(format!("tail ratio of w{kind}_{m}"), nu, k, r, eta1, gap, gap < RATIO_TOL);
                        }
                    }
                }
            }
        }
        Suite::Limit => {
            let mut nus: Vec<f64> = cells.iter().map(|c| c.0).collect();
            nus.dedup();
            for nu in nus {
                for kind in [1u8, 2] {
                    for m in 0..=depth.min(2) {
                        let r = verify_limit(kind, m, nu, &LIMIT_KS)?;
                        let (coarse, fine) = (r.samples[0].max_error, r.samples[1].max_error);
                        let holds = fine < LIMIT_BOUND && fine <= coarse;
                        checks.push(format!("limit of w{kind}_{m} (margin: error ratio)"), nu, LIMIT_KS[1], fine, coarse, r.ratios[0], holds);
                    }
                }
            }
        }
        _ => {}
    }
    let total = checks.rec.results.len();
    let failures = checks.failures;
    checks.rec.diag("checks", total).diag("failures", failures);
    Ok((checks.rec, failures == 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0.25:9:1").unwrap(), vec![0.25]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a:1:2").is_err());
    }

    #[test]
    fn expected_zero_counts() {
        assert_eq!((0..5).map(|m| expected_segment_zeros(m, 0.3)).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
        assert_eq!((0..6).map(|m| expected_segment_zeros(m, -4.2)).collect::<Vec<_>>(), vec![0, 0, 0, 0, 1, 2]);
        assert_eq!(expected_segment_zeros(3, -2.5), 1);
        assert_eq!(expected_segment_zeros(3, -1.5), 2);
    }

    #[test]
    fn cell_selection() {
        assert_eq!(cells(Some(0.3), Some(0.5), None).unwrap(), vec![(0.3, 0.5)]);
        assert_eq!(cells(None, None, None).unwrap().len(), 24);
        assert_eq!(cells(Some(0.3), Some(0.5), Some("default")).unwrap().len(), 24);
        assert!(cells(None, None, Some("fine")).is_err());
    }
}
