//! Zero counting and automated checks of the eigenvalue comparison and
//! `k → 0` limit statements.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::elliptic::u_from_eta;
use crate::error::{domain, LameError, Result};
use crate::floquet::{brent, floquet_eigenvalues};
use crate::recurrence::LameParams;
use crate::special::gegenbauer_limit;
use crate::spectra::wangerin_eigenvalues;
use crate::wangerin::{eigenfunction, evaluate_on_segment, Form, Normalization, SeriesEigenfunction};

const INITIAL_GRID: usize = 2048;
const MAX_GRID: usize = 1 << 20;
const WINDING_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroReport {
    pub count: usize,
    /// `u`-coordinates in `(0, K)`.
    pub locations: Vec<f64>,
    pub grid_size: usize,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindingReport {
    pub winding: i64,
    pub min_modulus_on_circle: f64,
    pub grid_size: usize,
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

fn horner_complex(c: &[f64], x: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * x + a)
}

fn sign_changes(c: &[f64], eta_max: f64, n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut prev = (eta_max / n as f64, horner(c, eta_max / n as f64));
    for i in 2..n {
        let x = eta_max * i as f64 / n as f64;
        let v = horner(c, x);
        if v == 0.0 || v.signum() != prev.1.signum() {
            out.push((prev.0, x));
        }
        prev = (x, v);
    }
    out
}

/// Zeros of `Σ cₙ ηⁿ` on `(0, η_max)`, by sign changes on a uniform grid
/// refined until two successive doublings agree. Returns the count, the
/// η-locations and the final grid size.
pub fn count_series_zeros(c: &[f64], eta_max: f64) -> Result<(Vec<f64>, usize)> {
    let mut n = INITIAL_GRID;
    let mut history = vec![sign_changes(c, eta_max, n).len()];
    loop {
        let len = history.len();
        if len >= 3 && history[len - 1] == history[len - 2] && history[len - 2] == history[len - 3] {
            break;
        }
        if n >= MAX_GRID {
            return Err(LameError::NonConvergence(format!("zero count not stable up to grid {n}: {history:?}")));
        }
        n *= 2;
        history.push(sign_changes(c, eta_max, n).len());
    }
    let mut f = |x: f64| Ok(horner(c, x));
    let roots = sign_changes(c, eta_max, n)
        .into_iter()
        .map(|(a, b)| {
            let (fa, fb) = (horner(c, a), horner(c, b));
            brent(&mut f, a, b, fa, fb, 1e-15 * eta_max)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((roots, n))
}

/// Zeros of `w` on the open segment from `iK'` to `K + iK'`, counted in
/// the coefficient series, whose prefactors do not vanish there.
pub fn count_zeros_segment(f: &SeriesEigenfunction) -> Result<ZeroReport> {
    let m = &f.params.modulus;
    let (etas, grid_size) = count_series_zeros(&f.coeffs, m.eta1)?;
    let locations = etas.iter().map(|&e| u_from_eta(e, m)).collect::<Result<Vec<f64>>>()?;
    Ok(ZeroReport {
        count: locations.len(),
        locations,
        grid_size,
        stable: true,
    })
}

/// Winding number of `θ ↦ Σ cₙ e^{inθ}` about the origin.
pub fn winding_of_series(c: &[f64]) -> Result<WindingReport> {
    let scale = c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if scale == 0.0 {
        return domain("zero series");
    }
    let mut n = 256;
    loop {
        let values: Vec<Complex64> = (0..=n)
            .map(|i| horner_complex(c, Complex64::from_polar(1.0, 2.0 * PI * i as f64 / n as f64)))
            .collect();
        let min_modulus = values.iter().fold(f64::INFINITY, |a, v| a.min(v.norm()));
        if min_modulus < WINDING_FLOOR * scale {
            return Err(LameError::Refused(format!("|v| = {min_modulus:e} on the unit circle")));
        }
        let steps: Vec<f64> = values.windows(2).map(|w| (w[1] / w[0]).arg()).collect();
        if steps.iter().all(|s| s.abs() < 0.5 * PI) {
            let total: f64 = steps.iter().sum();
            return Ok(WindingReport {
                winding: (total / (2.0 * PI)).round() as i64,
                min_modulus_on_circle: min_modulus,
                grid_size: n,
            });
        }
        if n >= MAX_GRID {
            return Err(LameError::NonConvergence(format!("phase steps not resolved at grid {n}")));
        }
        n *= 2;
    }
}

/// Number of zeros of the self-adjoint coefficient series in `|η| < 1`.
pub fn winding_unit_circle(f: &SeriesEigenfunction) -> Result<WindingReport> {
    winding_of_series(&f.coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// Floquet eigenvalues at `μ = ν + 1` as a merge of both kinds.
    FloquetMerge,
    /// `H_m(ν)` against `H_m(−ν−1)`.
    Reflection,
    /// First kind against second kind at equal `ν`.
    Interleaving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationKind {
    Equal,
    Less,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub label: String,
    pub kind: RelationKind,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs` for `<`, `|lhs − rhs|` for `=`.
    pub margin: f64,
    pub tol: f64,
    pub holds: bool,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.holds { "ok" } else { "VIOLATED" };
        write!(f, "{status}: {} ({} vs {}, margin {:e})", self.label, self.lhs, self.rhs, self.margin)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub theorem: Comparison,
    pub nu: f64,
    pub k: f64,
    pub case: String,
    pub relations: Vec<Relation>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.relations.iter().all(|r| r.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Relation> {
        self.relations.iter().filter(|r| !r.holds)
    }

    fn equal(&mut self, label: String, lhs: f64, rhs: f64, tol: f64) {
        let margin = (lhs - rhs).abs();
        self.relations.push(Relation {
            label,
            kind: RelationKind::Equal,
            lhs,
            rhs,
            margin,
            tol,
            holds: margin <= tol,
        });
    }

    fn less(&mut self, label: String, lhs: f64, rhs: f64) {
        self.relations.push(Relation {
            label,
            kind: RelationKind::Less,
            lhs,
            rhs,
            margin: rhs - lhs,
            tol: 0.0,
            holds: lhs < rhs,
        });
    }
}

const MERGE_TOL: f64 = 1e-7;
const DOUBLE_TOL: f64 = 1e-6;
const WANGERIN_EQ_TOL: f64 = 1e-8;
const HALF_INTEGER_TOL: f64 = 1e-12;

fn wangerin_list(kindj: u8, nu: f64, k: f64, m_max: usize) -> Result<Vec<f64>> {
    let p = LameParams::new(nu, k)?;
    Ok(wangerin_eigenvalues(kindj, &p, m_max, 1e-12)?.into_iter().map(|e| e.h).collect())
}

/// `Some(p)` when `ν = −p − ½`.
fn half_integer_degree(nu: f64) -> Option<usize> {
    let x = -nu - 0.5;
    (x > -HALF_INTEGER_TOL && (x - x.round()).abs() < HALF_INTEGER_TOL).then(|| x.round() as usize)
}

/// Checks one comparison statement for indices up to `depth`, computing
/// both sides independently.
pub fn verify_comparison(theorem: Comparison, nu: f64, k: f64, depth: usize) -> Result<ComparisonReport> {
    if !(k > 0.0 && k < 1.0) {
        return domain(format!("k = {k} outside (0, 1)"));
    }
    let mut report = ComparisonReport {
        theorem,
        nu,
        k,
        case: String::new(),
        relations: Vec::new(),
    };
    match theorem {
        Comparison::FloquetMerge => floquet_merge(&mut report, depth)?,
        Comparison::Reflection => reflection(&mut report, depth)?,
        Comparison::Interleaving => interleaving(&mut report, depth)?,
    }
    Ok(report)
}

type Entry<'a> = &'a dyn Fn(usize) -> (f64, String);

fn floquet_merge(r: &mut ComparisonReport, depth: usize) -> Result<()> {
    let (nu, k) = (r.nu, r.k);
    let p = nu.abs().ceil() as usize;
    let floquet = floquet_eigenvalues(nu + 1.0, &LameParams::new(nu, k)?, depth, 1e-10)?;
    let first = wangerin_list(1, nu, k, p + depth)?;
    let second = wangerin_list(2, -nu - 1.0, k, p + depth)?;
    let h1 = |i: usize| (first[i], format!("H⁽¹⁾_{i}(ν)"));
    let h2 = |i: usize| (second[i], format!("H⁽²⁾_{i}(−ν−1)"));
    // the kind that fills the first p slots and the odd offsets
    let (lead, other): (Entry, Entry) = if nu >= 0.0 { (&h2, &h1) } else { (&h1, &h2) };
    r.case = format!("p = {p}, {}", if nu >= 0.0 { "ν ≥ 0" } else { "ν < 0" });
    for (m, &h) in floquet.iter().enumerate() {
        let (value, name) = if m < p {
            lead(m)
        } else if (m - p) % 2 == 0 {
            other((m - p) / 2)
        } else {
            lead(p + (m - p - 1) / 2)
        };
        r.equal(format!("h_{m}(ν+1,ν) = {name}"), h, value, MERGE_TOL);
    }
    if nu == nu.round() {
        r.case.push_str(", integer ν");
        for m in 0..floquet.len() - 1 {
            let label = format!("h_{m} ~ h_{}", m + 1);
            if m >= p && (m - p) % 2 == 0 {
                r.equal(label.replace('~', "="), floquet[m], floquet[m + 1], DOUBLE_TOL);
            } else {
                r.less(label.replace('~', "<"), floquet[m], floquet[m + 1]);
            }
        }
    }
    Ok(())
}

fn reflection(r: &mut ComparisonReport, depth: usize) -> Result<()> {
    // the statement is symmetric under ν ↔ −ν−1
    let nu = if r.nu > -0.5 { -r.nu - 1.0 } else { r.nu };
    let mirror = -nu - 1.0;
    let x = -nu - 0.5;
    let (p, exact) = match half_integer_degree(nu) {
        Some(p) => (p, true),
        None => (x.floor() as usize, false),
    };
    r.case = format!("ν' = {nu}, p = {p}, {}", if exact { "ν' = −p−½" } else { "open interval" });
    for kindj in [1u8, 2] {
        let lo = wangerin_list(kindj, nu, r.k, p + depth + 1)?;
        let hi = wangerin_list(kindj, mirror, r.k, depth + 1)?;
        let a = |i: usize| format!("H⁽{kindj}⁾_{i}(ν')");
        let b = |i: usize| format!("H⁽{kindj}⁾_{i}(−ν'−1)");
        if exact {
            if p >= 1 {
                r.less(format!("{} < {}", a(p - 1), b(0)), lo[p - 1], hi[0]);
            }
            for i in 0..=depth {
                r.equal(format!("{} = {}", b(i), a(p + i)), hi[i], lo[p + i], WANGERIN_EQ_TOL);
                r.less(format!("{} < {}", a(p + i), b(i + 1)), lo[p + i], hi[i + 1]);
            }
        } else {
            for i in 0..=depth {
                r.less(format!("{} < {}", a(p + i), b(i)), lo[p + i], hi[i]);
                r.less(format!("{} < {}", b(i), a(p + i + 1)), hi[i], lo[p + i + 1]);
            }
        }
    }
    Ok(())
}

fn interleaving(r: &mut ComparisonReport, depth: usize) -> Result<()> {
    let nu = r.nu;
    let first = wangerin_list(1, nu, r.k, depth + 1)?;
    let second = wangerin_list(2, nu, r.k, depth + 1)?;
    let a = |i: usize| format!("H⁽¹⁾_{i}");
    let b = |i: usize| format!("H⁽²⁾_{i}");
    let tail_from = |r: &mut ComparisonReport, start: usize| {
        for i in start..=depth {
            r.less(format!("{} < {}", a(i), b(i)), first[i], second[i]);
            r.less(format!("{} < {}", b(i), a(i + 1)), second[i], first[i + 1]);
        }
    };
    match half_integer_degree(nu) {
        Some(p) if p >= 1 => {
            r.case = format!("ν = −p−½, p = {p}");
            for m in 0..p.min(depth + 1) {
                r.equal(format!("{} = {}", a(m), b(m)), first[m], second[m], WANGERIN_EQ_TOL);
                r.less(format!("{} < {}", a(m), a(m + 1)), first[m], first[m + 1]);
            }
            tail_from(r, p);
        }
        _ if nu > -1.5 => {
            r.case = "ν > −3/2".into();
            tail_from(r, 0);
        }
        _ => {
            let p = (-nu - 0.5).floor() as usize;
            r.case = format!("open interval, p = {p}");
            for m in 0..p.min(depth + 1) {
                if (m + p) % 2 == 0 {
                    r.less(format!("{} < {} (m+p even)", a(m), b(m)), first[m], second[m]);
                } else {
                    r.less(format!("{} < {} (m+p odd)", b(m), a(m)), second[m], first[m]);
                }
                let top = first[m].max(second[m]);
                if m + 1 < p {
                    let next = first[m + 1].min(second[m + 1]);
                    r.less(format!("pair {m} < pair {}", m + 1), top, next);
                } else {
                    r.less(format!("pair {m} < {}", a(p)), top, first[p]);
                }
            }
            tail_from(r, p);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitSample {
    pub k: f64,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub kindj: u8,
    pub m: usize,
    pub nu: f64,
    pub samples: Vec<LimitSample>,
    /// `error(kᵢ)/error(kᵢ₊₁)`.
    pub ratios: Vec<f64>,
}

/// Sample points of the comparison window `[0.3π, 0.7π]`.
pub const LIMIT_GRID: usize = 41;

/// Distance between the endpoint-normalized eigenfunction, in
/// `s = πu/(2K)`, and its `k = 0` limit, for each `k` in turn.
pub fn verify_limit(kindj: u8, m: usize, nu: f64, k_list: &[f64]) -> Result<LimitReport> {
    if k_list.iter().any(|&k| !(k > 0.0 && k <= 0.2)) {
        return domain("each k must lie in (0, 0.2]");
    }
    if k_list.windows(2).any(|w| w[1] >= w[0]) {
        return domain("k list must be decreasing");
    }
    let mut samples = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let p = LameParams::new(nu, k)?;
        let f = eigenfunction(kindj, Form::SelfAdjoint, m, &p, Normalization::Endpoint)?;
        let big_k = p.modulus.big_k;
        // the kind-2 derivative normalization is in u; rescale to s
        let scale = if kindj == 1 { 1.0 } else { PI / (2.0 * big_k) };
        let mut max_error = 0.0f64;
        for i in 0..LIMIT_GRID {
            let s = PI * (0.3 + 0.4 * i as f64 / (LIMIT_GRID - 1) as f64);
            let w = scale * evaluate_on_segment(&f, 2.0 * big_k * s / PI)?;
            max_error = max_error.max((w - gegenbauer_limit(kindj, m, nu, s)?).abs());
        }
        samples.push(LimitSample { k, max_error });
    }
    let ratios = samples.windows(2).map(|w| w[0].max_error / w[1].max_error).collect();
    Ok(LimitReport {
        kindj,
        m,
        nu,
        samples,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ell_index;
    use proptest::prelude::*;

    fn sa(kindj: u8, m: usize, nu: f64, k: f64) -> SeriesEigenfunction {
        let p = LameParams::new(nu, k).unwrap();
        eigenfunction(kindj, Form::SelfAdjoint, m, &p, Normalization::Endpoint).unwrap()
    }

    #[test]
    fn segment_counts() {
        for kindj in [1u8, 2] {
            for m in 0..5 {
                let r = count_zeros_segment(&sa(kindj, m, 0.3, 0.5)).unwrap();
                assert_eq!(r.count, m, "ν=0.3 j={kindj} m={m}");
                assert!(r.stable && r.grid_size >= 4 * INITIAL_GRID);
            }
        }
        for m in 0..6 {
            let r = count_zeros_segment(&sa(1, m, -4.2, 0.5)).unwrap();
            assert_eq!(r.count, m.saturating_sub(3), "ν=−4.2 m={m}");
        }
    }

    #[test]
    fn sine_zero_locations() {
        for k in [0.3, 0.7] {
            let f = sa(1, 2, 0.0, k);
            let big_k = f.params.modulus.big_k;
            let r = count_zeros_segment(&f).unwrap();
            assert_eq!(r.count, 2);
            assert!((r.locations[0] - 0.4 * big_k).abs() < 1e-9);
            assert!((r.locations[1] - 0.8 * big_k).abs() < 1e-9);
        }
    }

    #[test]
    fn monomial_winding() {
        for ell in 0..6 {
            let mut c = vec![0.0; ell + 1];
            c[ell] = 1.0;
            let w = winding_of_series(&c).unwrap();
            assert_eq!(w.winding, ell as i64);
            assert!((w.min_modulus_on_circle - 1.0).abs() < 1e-14);
        }
        assert!(matches!(winding_of_series(&[1.0, 1.0]), Err(LameError::Refused(_))));
    }

    #[test]
    fn winding_matches_ell() {
        for kindj in [1u8, 2] {
            for nu in [0.3, -1.7, -4.2] {
                for m in 0..5 {
                    let f = sa(kindj, m, nu, 0.5);
                    let w = winding_unit_circle(&f).unwrap();
                    let ell = ell_index(kindj, m, nu).unwrap().ell as i64;
                    assert_eq!(w.winding, ell, "j={kindj} ν={nu} m={m}");
                    let segment = count_zeros_segment(&f).unwrap().count as i64;
                    assert!(w.winding >= segment);
                }
            }
        }
        let f = sa(1, 0, -4.2, 0.5);
        assert_eq!(winding_unit_circle(&f).unwrap().winding, 2);
        assert_eq!(count_zeros_segment(&f).unwrap().count, 0);
    }

    #[test]
    fn no_zeros_on_real_axis() {
        use crate::wangerin::evaluate_in_strip;
        for nu in [0.3, -1.7, -4.2] {
            for m in 0..3 {
                let f = sa(1, m, nu, 0.5);
                let two_k = 2.0 * f.params.modulus.big_k;
                let min = (0..200)
                    .map(|i| evaluate_in_strip(&f, two_k * i as f64 / 200.0, 0.0).unwrap().norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(min > 1e-8, "ν={nu} m={m}: {min}");
            }
        }
    }

    #[test]
    fn merge_examples() {
        for nu in [0.3, -0.7, 1.0, -2.5] {
            let r = verify_comparison(Comparison::FloquetMerge, nu, 0.5, 6).unwrap();
            if let Some(rel) = r.failures().next() {
                panic!("ν={nu}: {rel}");
            }
            assert!(r.relations.len() >= 7);
        }
    }

    #[test]
    fn reflection_and_interleaving_grid() {
        for nu in [0.3, 1.6, -0.7, -1.5, -2.2, -2.5, -2.7, -4.2] {
            for k in [0.3, 0.8] {
                for theorem in [Comparison::Reflection, Comparison::Interleaving] {
                    let r = verify_comparison(theorem, nu, k, 6).unwrap();
                    assert!(r.passed(), "{theorem:?} ν={nu} k={k}: {:?}", r.failures().collect::<Vec<_>>());
                }
            }
        }
        let r = verify_comparison(Comparison::Reflection, -2.5, 0.5, 6).unwrap();
        assert!(r.relations.iter().any(|x| x.kind == RelationKind::Equal));
        let r = verify_comparison(Comparison::Interleaving, -2.7, 0.5, 6).unwrap();
        assert!(r.case.contains("p = 2"));
    }

    #[test]
    fn broken_relation_is_reported() {
        let mut r = ComparisonReport {
            theorem: Comparison::Interleaving,
            nu: 0.0,
            k: 0.5,
            case: String::new(),
            relations: Vec::new(),
        };
        r.less("a < b".into(), 2.0, 1.0);
        r.equal("c = d".into(), 1.0, 1.0 + 1e-6, 1e-8);
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 2);
        assert!(r.failures().next().unwrap().to_string().starts_with("VIOLATED: a < b"));
    }

    #[test]
    fn limit_rates() {
        // the O(k²) term of the rescaled equation is a constant absorbed
        // by the eigenvalue, so the eigenfunctions converge like k⁴
        for (kindj, m, nu) in [(1u8, 1usize, 0.3), (1, 0, -1.7), (2, 2, 0.3)] {
            let r = verify_limit(kindj, m, nu, &[0.1, 0.05]).unwrap();
            assert!((12.0..=20.0).contains(&r.ratios[0]), "{:?}", r);
        }
        let r = verify_limit(2, 0, 0.3, &[0.1, 0.05]).unwrap();
        assert!(r.samples[1].max_error < r.samples[0].max_error);
        assert!(r.samples[1].max_error < 5e-3);
        // ν = 0: the eigenfunction is the limit sine for every k
        let r = verify_limit(1, 2, 0.0, &[0.2, 0.1, 0.05]).unwrap();
        assert!(r.samples.iter().all(|s| s.max_error < 1e-9), "{r:?}");
        assert!(verify_limit(1, 0, 0.3, &[0.05, 0.1]).is_err());
        assert!(verify_limit(1, 0, 0.3, &[0.5]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn winding_counts_polynomial_roots(roots in proptest::collection::vec((0.05f64..3.0, any::<bool>()), 1..6)) {
            // real-rooted polynomial with roots ±r
            let mut c = vec![1.0];
            for (r, neg) in &roots {
                let r = if *neg { -r } else { *r };
                let mut next = vec![0.0; c.len() + 1];
                for (i, a) in c.iter().enumerate() {
                    next[i] -= r * a;
                    next[i + 1] += a;
                }
                c = next;
            }
            let inside = roots.iter().filter(|(r, _)| *r < 1.0).count() as i64;
            let near = roots.iter().any(|(r, _)| (r - 1.0).abs() < 1e-3);
            prop_assume!(!near);
            prop_assert_eq!(winding_of_series(&c).unwrap().winding, inside);
            let (found, _) = count_series_zeros(&c, 0.99).unwrap();
            let positive = roots.iter().filter(|(r, neg)| !neg && *r < 0.99).count();
            prop_assert_eq!(found.len(), positive);
        }
    }
}
