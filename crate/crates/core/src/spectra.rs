//! Symmetric tridiagonal eigenproblems: Sturm counts, bisection, inverse
//! iteration, and builders for the operators of the Lamé–Wangerin,
//! algebraic and polynomial problems.

use crate::elliptic::Modulus;
use crate::error::{domain, LameError, Result};
use crate::recurrence::{row, LameParams, RecurrenceKind};

/// Symmetric tridiagonal matrix, optionally obtained from a nonsymmetric
/// one by a diagonal similarity.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub symmetrized: bool,
    /// `d_n` with `v = D c`; eigenvectors `v` of the symmetric matrix map
    /// back to `c = D⁻¹ v`.
    pub scaling: Option<Vec<f64>>,
}

impl TridiagonalMatrix {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || offdiag.len() + 1 != diag.len() {
            return domain(format!(
                "inconsistent lengths: diag {}, offdiag {}",
                diag.len(),
                offdiag.len()
            ));
        }
        if diag.iter().chain(offdiag.iter()).any(|v| !v.is_finite()) {
            return domain("non-finite matrix entry");
        }
        Ok(TridiagonalMatrix {
            diag,
            offdiag,
            symmetrized: false,
            scaling: None,
        })
    }

    /// Symmetrizes rows `sub_n c_{n-1} + diag_n c_n + sup_n c_{n+1}`.
    /// `sub[0]` and `sup[N-1]` are ignored; every product
    /// `sup_n sub_{n+1}` must be nonnegative.
    pub fn from_nonsymmetric(sub: &[f64], diag: Vec<f64>, sup: &[f64]) -> Result<Self> {
        let n = diag.len();
        if sub.len() != n || sup.len() != n {
            return domain("sub, diag and sup must have equal length");
        }
        let mut off = Vec::with_capacity(n.saturating_sub(1));
        let mut scale = vec![1.0; n];
        for i in 0..n.saturating_sub(1) {
            let (up, down) = (sup[i], sub[i + 1]);
            let prod = up * down;
            if prod < 0.0 {
                return domain(format!("sup·sub = {prod} < 0 at row {i}; not symmetrizable"));
            }
            off.push(prod.sqrt());
            // d_{i+1}/d_i = √(sup_i / sub_{i+1})
            scale[i + 1] = if up == 0.0 || down == 0.0 {
                scale[i]
            } else {
                scale[i] * (up / down).sqrt()
            };
        }
        let mut m = TridiagonalMatrix::new(diag, off)?;
        m.symmetrized = true;
        m.scaling = Some(scale);
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Maps an eigenvector of the symmetric matrix back to the original
    /// (nonsymmetric) coordinates.
    pub fn back_transform(&self, v: &[f64]) -> Vec<f64> {
        match &self.scaling {
            Some(d) => v.iter().zip(d).map(|(x, s)| x / s).collect(),
            None => v.to_vec(),
        }
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn norm_inf(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// `max_n |((M − h) v)_n|`.
    pub fn residual(&self, h: f64, v: &[f64]) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut r = (self.diag[i] - h) * v[i];
                if i > 0 {
                    r += self.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    r += self.offdiag[i] * v[i + 1];
                }
                r.abs()
            })
            .fold(0.0, f64::max)
    }

    /// Index ranges of the blocks separated by exactly zero couplings.
    pub fn blocks(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for (i, e) in self.offdiag.iter().enumerate() {
            if *e == 0.0 {
                out.push(start..i + 1);
                start = i + 1;
            }
        }
        out.push(start..self.len());
        out
    }

    fn sub_block(&self, r: std::ops::Range<usize>) -> TridiagonalMatrix {
        TridiagonalMatrix {
            diag: self.diag[r.clone()].to_vec(),
            offdiag: self.offdiag[r.start..r.end - 1].to_vec(),
            symmetrized: self.symmetrized,
            scaling: None,
        }
    }
}

/// Eigenvalue with its normalized coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub index: usize,
    pub h: f64,
    pub vector: Vec<f64>,
    pub truncation: usize,
    pub residual: f64,
}

/// Number of eigenvalues of `m` strictly below `lambda`.
pub fn sturm_count(m: &TridiagonalMatrix, lambda: f64) -> usize {
    let max_e2 = m.offdiag.iter().fold(0.0f64, |a, e| a.max(e * e));
    let pivmin = f64::MIN_POSITIVE * max_e2.max(1.0);
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..m.len() {
        let e2 = if i > 0 { m.offdiag[i - 1].powi(2) } else { 0.0 };
        q = m.diag[i] - lambda - if i > 0 { e2 / q } else { 0.0 };
        // a zero pivot means lambda is an eigenvalue of the leading block;
        // taking it positive keeps the count strict
        if q.abs() < pivmin {
            q = if q < 0.0 { -pivmin } else { pivmin };
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Bisection width floor: a few ulp of the bracket.
fn width_floor(lo: f64, hi: f64) -> f64 {
    4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
}

/// Eigenvalues `0..=m_max` in ascending order, each bisected to a
/// bracket of width at most `tol` (floored at a few ulp).
pub fn eigenvalues_bisection(m: &TridiagonalMatrix, m_max: usize, tol: f64) -> Result<Vec<f64>> {
    if m_max >= m.len() {
        return domain(format!("m_max = {m_max} ≥ N = {}", m.len()));
    }
    if tol.is_nan() || tol < 0.0 {
        return domain(format!("invalid tolerance {tol}"));
    }
    let (g_lo, g_hi) = m.gershgorin();
    let pad = 1e-12 * (1.0 + g_lo.abs().max(g_hi.abs()));
    let (g_lo, g_hi) = (g_lo - pad, g_hi + pad);
    let mut out: Vec<f64> = Vec::with_capacity(m_max + 1);
    for idx in 0..=m_max {
        let mut lo = out.last().map_or(g_lo, |v| v - width_floor(*v, *v)).max(g_lo);
        let mut hi = g_hi;
        // Invariant: count(lo) ≤ idx < count(hi).
        if sturm_count(m, lo) > idx {
            lo = g_lo;
        }
        while hi - lo > tol.max(width_floor(lo, hi)) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(m, mid) > idx {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

/// Tridiagonal LU with partial pivoting of `B − s I`.
struct ShiftedLu {
    l: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn new(b: &TridiagonalMatrix, s: f64) -> Self {
        let n = b.len();
        let tiny = f64::EPSILON * b.norm_inf().max(1.0);
        let mut d: Vec<f64> = b.diag.iter().map(|x| x - s).collect();
        let mut up: Vec<f64> = b.offdiag.clone();
        let lo: Vec<f64> = b.offdiag.clone();
        let mut up2 = vec![0.0; n];
        let mut l = vec![0.0; n];
        let mut swapped = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            if lo[i].abs() > d[i].abs() {
                // swap rows i and i+1
                swapped[i] = true;
                let fact = d[i] / lo[i];
                l[i] = fact;
                d[i] = lo[i];
                let t = up[i];
                up[i] = d[i + 1];
                d[i + 1] = t - fact * d[i + 1];
                if i + 1 < n - 1 {
                    up2[i] = up[i + 1];
                    up[i + 1] = -fact * up[i + 1];
                }
            } else {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = lo[i] / d[i];
                l[i] = fact;
                d[i + 1] -= fact * up[i];
            }
        }
        for x in d.iter_mut() {
            if x.abs() < tiny {
                *x = if *x < 0.0 { -tiny } else { tiny };
            }
        }
        ShiftedLu {
            l,
            u0: d,
            u1: up,
            u2: up2,
            swapped,
        }
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                rhs.swap(i, i + 1);
                rhs[i + 1] -= self.l[i] * rhs[i];
            } else {
                rhs[i + 1] -= self.l[i] * rhs[i];
            }
        }
        for i in (0..n).rev() {
            let mut x = rhs[i];
            if i + 1 < n {
                x -= self.u1[i] * rhs[i + 1];
            }
            if i + 2 < n {
                x -= self.u2[i] * rhs[i + 2];
            }
            rhs[i] = x / self.u0[i];
        }
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        let max = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let lead = v.iter().find(|x| x.abs() > 1e-8 * max).copied().unwrap_or(1.0);
        let s = lead.signum() / norm;
        v.iter_mut().for_each(|x| *x *= s);
    }
}

/// Residual bound accepted by [`eigenvector_inverse_iteration`].
pub fn residual_tolerance(h: f64) -> f64 {
    1e-9 * (1.0 + 1e-4 * h.abs())
}

fn inverse_iterate(b: &TridiagonalMatrix, s: f64) -> Vec<f64> {
    let n = b.len();
    if n == 1 {
        return vec![1.0];
    }
    let lu = ShiftedLu::new(b, s);
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.25 * ((i as f64) * 0.7).sin()).collect();
    for _ in 0..6 {
        lu.solve(&mut v);
        normalize(&mut v);
    }
    v
}

/// Unit eigenvector for the eigenvalue nearest `h`, first significant
/// entry positive. At exactly zero couplings the vector is supported on
/// a single block (the first one, if several blocks share the value).
pub fn eigenvector_inverse_iteration(m: &TridiagonalMatrix, h: f64) -> Result<Vec<f64>> {
    if !h.is_finite() {
        return domain(format!("shift {h} not finite"));
    }
    let blocks = m.blocks();
    let range = if blocks.len() == 1 {
        blocks[0].clone()
    } else {
        let mut delta = 1e-12 * (1.0 + h.abs());
        loop {
            let hit = blocks.iter().find(|r| {
                let b = m.sub_block((*r).clone());
                sturm_count(&b, h + delta) > sturm_count(&b, h - delta)
            });
            if let Some(r) = hit {
                break r.clone();
            }
            delta *= 4.0;
            if delta > 1e6 * (1.0 + m.norm_inf()) {
                return domain(format!("no eigenvalue near {h}"));
            }
        }
    };
    let block = m.sub_block(range.clone());
    let tol = residual_tolerance(h);
    let mut shift = h;
    let mut best = f64::INFINITY;
    for attempt in 0..4 {
        let v = inverse_iterate(&block, shift);
        let res = block.residual(h, &v);
        if res <= tol {
            let mut full = vec![0.0; m.len()];
            full[range.clone()].copy_from_slice(&v);
            return Ok(full);
        }
        best = best.min(res);
        let sign = if attempt % 2 == 0 { 1.0 } else { -1.0 };
        shift = h + sign * 1e-12 * h.abs().max(1e-300) * (attempt + 1) as f64;
    }
    Err(LameError::Stagnation { shift: h, residual: best })
}

/// `S⁽ʲ⁾` truncated to `N × N`: diagonal `ε⁽ʲ⁾_n`, off-diagonal `δ_{n+1}`.
pub fn build_wangerin(kindj: u8, p: &LameParams, n: usize) -> Result<TridiagonalMatrix> {
    if n < 2 {
        return domain(format!("truncation N = {n} < 2"));
    }
    let kind = match kindj {
        1 => RecurrenceKind::W1SelfAdjoint,
        2 => RecurrenceKind::W2SelfAdjoint,
        _ => return domain(format!("kind must be 1 or 2, got {kindj}")),
    };
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n - 1);
    for i in 0..n {
        let r = row(kind, i as i64, p)?;
        diag.push(r.diag);
        if i + 1 < n {
            off.push(r.sup);
        }
    }
    TridiagonalMatrix::new(diag, off)
}

pub const MAX_TRUNCATION: usize = 100_000;

/// Eigenvalues `H_0 .. H_{m_max}` of `S⁽ʲ⁾` with eigenvectors.
///
/// The truncation starts at `m_max + 30` and doubles until no eigenvalue
/// moves by `tol/10` (or by its round-off level) or more.
pub fn wangerin_eigenvalues(kindj: u8, p: &LameParams, m_max: usize, tol: f64) -> Result<Vec<Eigenpair>> {
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    let mut n = m_max + 30;
    let mut prev = eigenvalues_bisection(&build_wangerin(kindj, p, n)?, m_max, tol / 20.0)?;
    loop {
        let next_n = 2 * n;
        if next_n > MAX_TRUNCATION {
            return Err(LameError::NonConvergence(format!(
                "eigenvalues still drifting at N = {n} (ν = {}, k = {})",
                p.nu,
                p.k()
            )));
        }
        let mat = build_wangerin(kindj, p, next_n)?;
        let cur = eigenvalues_bisection(&mat, m_max, tol / 20.0)?;
        // drift below tol/10, or below round-off for large eigenvalues
        let settled = prev
            .iter()
            .zip(&cur)
            .all(|(a, b)| (a - b).abs() < (tol / 10.0).max(64.0 * f64::EPSILON * b.abs()));
        if settled {
            let exact = eigenvalues_bisection(&mat, m_max, 0.0)?;
            return exact
                .into_iter()
                .enumerate()
                .map(|(index, h)| {
                    let vector = eigenvector_inverse_iteration(&mat, h)?;
                    let residual = mat.residual(h, &vector);
                    Ok(Eigenpair {
                        index,
                        h,
                        vector,
                        truncation: next_n,
                        residual,
                    })
                })
                .collect();
        }
        prev = cur;
        n = next_n;
    }
}

/// The `p × p` symmetric matrix `S_p⁽ʲ⁾` of the algebraic problem at
/// `ν = −p − ½`.
pub fn build_algebraic(j: u8, p_int: usize, m: &Modulus) -> Result<TridiagonalMatrix> {
    if p_int == 0 {
        return domain("p must be positive");
    }
    let sign = match j {
        1 => -1.0,
        2 => 1.0,
        _ => return domain(format!("j must be 1 or 2, got {j}")),
    };
    let k2 = m.k2();
    let p = p_int as f64;
    let diag = (0..p_int)
        .map(|n| {
            let x = 2.0 * n as f64 + 1.0 - p;
            0.5 * k2 * (p * p - 0.25) + sign * m.kprime * x + (1.0 - 0.5 * k2) * (0.25 + x * x)
        })
        .collect();
    let off = (1..p_int)
        .map(|n| {
            let x = n as f64;
            k2 * x * (p - x)
        })
        .collect();
    TridiagonalMatrix::new(diag, off)
}

/// The matrices `T⁽¹⁾_{p+1}` and `T⁽²⁾_p` whose eigenvalues are the
/// eigenvalues of the Lamé polynomials of degree `p`, symmetrized with
/// the scaling retained.
pub fn build_lame_polynomial(kindj: u8, p_int: usize, m: &Modulus) -> Result<TridiagonalMatrix> {
    let k2 = m.k2();
    let p = p_int as f64;
    let (sub, diag, sup): (Vec<f64>, Vec<f64>, Vec<f64>) = match kindj {
        1 => {
            let size = p_int + 1;
            let alpha = |n: f64| 0.5 * k2 * (p + 1.0 - n) * (2.0 * n - 1.0);
            let gamma = |n: f64| 0.5 * k2 * (2.0 * p + 1.0 - 2.0 * n) * n;
            (
                (0..size).map(|n| if n == 0 { 0.0 } else { alpha(n as f64) }).collect(),
                (0..size)
                    .map(|n| 0.5 * k2 * p * (p + 1.0) + (1.0 - 0.5 * k2) * (2.0 * n as f64 - p).powi(2))
                    .collect(),
                (0..size).map(|n| gamma(n as f64 + 1.0)).collect(),
            )
        }
        2 => {
            if p_int == 0 {
                return domain("second kind needs p ≥ 1");
            }
            let alpha = |n: f64| 0.5 * k2 * (p + 1.0 - n) * (2.0 * n - 1.0);
            let gamma = |n: f64| 0.5 * k2 * (2.0 * p + 1.0 - 2.0 * n) * n;
            (
                (0..p_int).map(|n| alpha(n as f64 + 1.0)).collect(),
                (0..p_int)
                    .map(|n| 0.5 * k2 * p * (p + 1.0) + (1.0 - 0.5 * k2) * (2.0 * n as f64 + 1.0 - p).powi(2))
                    .collect(),
                (0..p_int).map(|n| gamma(n as f64 + 1.0)).collect(),
            )
        }
        _ => return domain(format!("kind must be 1 or 2, got {kindj}")),
    };
    TridiagonalMatrix::from_nonsymmetric(&sub, diag, &sup)
}

/// All eigenpairs of a small matrix, with residuals.
pub fn all_eigenpairs(m: &TridiagonalMatrix) -> Result<Vec<Eigenpair>> {
    let values = eigenvalues_bisection(m, m.len() - 1, 0.0)?;
    let blocks = m.blocks();
    let mut used: Vec<Vec<f64>> = Vec::new();
    values
        .into_iter()
        .enumerate()
        .map(|(index, h)| {
            let mut v = eigenvector_inverse_iteration(m, h)?;
            // a repeated value from a different block: take the next block
            if used.iter().any(|u| dot(u, &v).abs() > 0.5) && blocks.len() > 1 {
                if let Some(alt) = blocks.iter().find_map(|r| {
                    let b = m.sub_block(r.clone());
                    let d = 1e-10 * (1.0 + h.abs());
                    if sturm_count(&b, h + d) == sturm_count(&b, h - d) {
                        return None;
                    }
                    let w = inverse_iterate(&b, h);
                    let mut full = vec![0.0; m.len()];
                    full[r.clone()].copy_from_slice(&w);
                    (!used.iter().any(|u| dot(u, &full).abs() > 0.5)).then_some(full)
                }) {
                    v = alt;
                }
            }
            used.push(v.clone());
            let residual = m.residual(h, &v);
            Ok(Eigenpair {
                index,
                h,
                vector: v,
                truncation: m.len(),
                residual,
            })
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Cyclic Jacobi rotations on a dense copy: independent eigenvalue oracle.
    fn dense_eigenvalues(m: &TridiagonalMatrix) -> Vec<f64> {
        let n = m.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = m.diag[i];
            if i + 1 < n {
                a[i][i + 1] = m.offdiag[i];
                a[i + 1][i] = m.offdiag[i];
            }
        }
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ev
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> TridiagonalMatrix {
        let d = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let e = (0..n - 1).map(|_| rng.gen_range(-3.0..3.0)).collect();
        TridiagonalMatrix::new(d, e).unwrap()
    }

    #[test]
    fn sturm_trivial() {
        let m = TridiagonalMatrix::new(vec![1.0, 2.0, 3.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(sturm_count(&m, 2.5), 2);
        assert_eq!(sturm_count(&m, 0.0), 0);
        assert_eq!(sturm_count(&m, 2.0), 1);
        assert!(TridiagonalMatrix::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(TridiagonalMatrix::new(vec![1.0, f64::NAN], vec![0.0]).is_err());
    }

    #[test]
    fn random_matrices_against_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(2..=8);
            let m = random_matrix(&mut rng, n);
            let oracle = dense_eigenvalues(&m);
            let ev = eigenvalues_bisection(&m, n - 1, 1e-13).unwrap();
            for (a, b) in ev.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-11, "{a} vs {b}");
            }
            for (i, x) in oracle.iter().enumerate() {
                assert_eq!(sturm_count(&m, x - 1e-8), i);
            }
            let (lo, _) = m.gershgorin();
            assert_eq!(sturm_count(&m, lo - 1.0), 0);
            for h in ev {
                let v = eigenvector_inverse_iteration(&m, h).unwrap();
                assert!(m.residual(h, &v) < 1e-10);
                assert_relative_eq!(v.iter().map(|x| x * x).sum::<f64>(), 1.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        let (a, b) = (1.3, -0.4);
        let m = TridiagonalMatrix::new(vec![a, a], vec![b]).unwrap();
        let ev = eigenvalues_bisection(&m, 1, 1e-14).unwrap();
        assert_relative_eq!(ev[0], a - b.abs(), epsilon = 1e-14);
        assert_relative_eq!(ev[1], a + b.abs(), epsilon = 1e-14);
        // lower eigenvector of [[a,b],[b,a]] with b < 0 is (1,1)/√2
        let v = eigenvector_inverse_iteration(&m, ev[0]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] - r).abs() < 1e-12 && (v[1] - r).abs() < 1e-12);
        assert!(eigenvalues_bisection(&m, 2, 1e-10).is_err());
    }

    #[test]
    fn diagonal_matrix_gives_coordinate_vectors() {
        let m = TridiagonalMatrix::new(vec![3.0, 1.0, 2.0], vec![0.0, 0.0]).unwrap();
        let v = eigenvector_inverse_iteration(&m, 1.0).unwrap();
        assert_eq!(v, vec![0.0, 1.0, 0.0]);
        let pairs = all_eigenpairs(&m).unwrap();
        assert_eq!(pairs[2].vector, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn repeated_values_in_separate_blocks() {
        let m = TridiagonalMatrix::new(vec![2.0, 2.0, 5.0], vec![0.0, 1.0]).unwrap();
        let pairs = all_eigenpairs(&m).unwrap();
        // 2 appears in block 0 and as an eigenvalue of [[2,1],[1,5]]? no: those are 3.5 ∓ √3.25
        assert_relative_eq!(pairs[1].h, 2.0, epsilon = 1e-14);
        let m = TridiagonalMatrix::new(vec![1.0, 1.0], vec![0.0]).unwrap();
        let pairs = all_eigenpairs(&m).unwrap();
        assert_eq!(pairs[0].vector, vec![1.0, 0.0]);
        assert_eq!(pairs[1].vector, vec![0.0, 1.0]);
    }

    #[test]
    fn wangerin_builder_entries() {
        let p = LameParams::new(-1.5, 0.6).unwrap();
        let m = build_wangerin(1, &p, 10).unwrap();
        assert_eq!(m.offdiag[0], 0.0);
        assert_eq!(m.blocks()[0], 0..1);
        assert_relative_eq!(m.diag[0], 0.34, epsilon = 1e-15);

        let q = LameParams::new(0.37, 1e-9).unwrap();
        let m = build_wangerin(1, &q, 6).unwrap();
        for n in 0..6 {
            assert_relative_eq!(m.diag[n], (2.0 * n as f64 + 1.37).powi(2), max_relative = 1e-8);
        }

        let r = LameParams::new(0.8, 0.45).unwrap();
        let a = build_wangerin(1, &r, 12).unwrap();
        let b = build_wangerin(2, &r, 12).unwrap();
        for n in 0..12 {
            let expect = 2.0 * r.modulus.kprime * (2.0 * n as f64 + 1.5 + 0.8);
            assert!((b.diag[n] - a.diag[n] - expect).abs() < 1e-12 * (1.0 + b.diag[n]));
        }
        assert!(build_wangerin(3, &r, 12).is_err());
        assert!(build_wangerin(1, &r, 1).is_err());
    }

    #[test]
    fn closed_form_algebraic_values() {
        for k in [0.2, 0.5, 0.8] {
            let m = Modulus::new(k).unwrap();
            let k2 = k * k;
            let a1 = build_algebraic(1, 1, &m).unwrap();
            assert_relative_eq!(a1.diag[0], 0.25 * (1.0 + k2), epsilon = 1e-15);
            let root = (1.0 - k2 + k2 * k2).sqrt();
            for j in [1, 2] {
                let ev = eigenvalues_bisection(&build_algebraic(j, 2, &m).unwrap(), 1, 0.0).unwrap();
                assert_relative_eq!(ev[0], 1.25 * (1.0 + k2) - root, epsilon = 1e-13);
                assert_relative_eq!(ev[1], 1.25 * (1.0 + k2) + root, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn algebraic_matches_wangerin_block() {
        for p_int in 1..6 {
            let nu = -(p_int as f64) - 0.5;
            let params = LameParams::new(nu, 0.7).unwrap();
            for j in [1, 2] {
                let s = build_algebraic(j, p_int, &params.modulus).unwrap();
                let w = build_wangerin(j, &params, p_int + 5).unwrap();
                assert_eq!(w.offdiag[p_int - 1], 0.0);
                for n in 0..p_int {
                    assert!((s.diag[n] - w.diag[n]).abs() < 1e-12 * (1.0 + s.diag[n].abs()));
                    if n + 1 < p_int {
                        assert!((s.offdiag[n] - w.offdiag[n]).abs() < 1e-12 * (1.0 + s.offdiag[n].abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn algebraic_mirror_symmetry() {
        let m = Modulus::new(0.65).unwrap();
        for p_int in 1..8 {
            let a = all_eigenpairs(&build_algebraic(1, p_int, &m).unwrap()).unwrap();
            let b = all_eigenpairs(&build_algebraic(2, p_int, &m).unwrap()).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x.h - y.h).abs() < 1e-12 * (1.0 + x.h.abs()));
                let rev: Vec<f64> = x.vector.iter().rev().copied().collect();
                let sign = if rev[0] * y.vector[0] < 0.0 { -1.0 } else { 1.0 };
                for (u, v) in rev.iter().zip(&y.vector) {
                    assert!((sign * u - v).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn wangerin_closed_forms() {
        let p = LameParams::new(-1.5, 0.6).unwrap();
        let e = wangerin_eigenvalues(1, &p, 3, 1e-10).unwrap();
        assert_relative_eq!(e[0].h, 0.34, epsilon = 1e-10);
        assert!(e[0].vector[1..].iter().all(|v| *v == 0.0));

        let p = LameParams::new(-2.5, 0.5f64.sqrt()).unwrap();
        for j in [1, 2] {
            let e = wangerin_eigenvalues(j, &p, 2, 1e-10).unwrap();
            assert!((e[0].h - 1.0089746).abs() < 1e-7);
            assert!((e[1].h - 2.7410254).abs() < 1e-7);
        }

        // ν = 0: w'' + h w = 0 with the boundary conditions of the first kind
        let p = LameParams::new(0.0, 0.5).unwrap();
        let e = wangerin_eigenvalues(1, &p, 5, 1e-10).unwrap();
        for pair in &e {
            let expect = ((2 * pair.index + 1) as f64 * std::f64::consts::PI / (2.0 * p.modulus.big_k)).powi(2);
            assert!((pair.h - expect).abs() < 1e-9, "m={}: {} vs {expect}", pair.index, pair.h);
            assert!(pair.residual < 1e-9);
        }
        for w in e.windows(2) {
            assert!(w[0].h < w[1].h);
        }
    }

    #[test]
    fn truncation_drift_is_geometric() {
        for k in [0.3, 0.5, 0.8] {
            let p = LameParams::new(0.4, k).unwrap();
            let eta1 = p.modulus.eta1;
            let ev = |n| eigenvalues_bisection(&build_wangerin(1, &p, n).unwrap(), 2, 0.0).unwrap()[2];
            let exact = ev(400);
            let d1 = (ev(8) - exact).abs();
            let d2 = (ev(16) - exact).abs();
            if d1 > 1e-12 {
                assert!(d2 <= d1 * eta1.powi(2) * 50.0 + 1e-13, "k={k}: {d1} {d2}");
            }
        }
    }

    #[test]
    fn lame_polynomial_small_cases() {
        for k in [0.3, 0.6, 0.9] {
            let m = Modulus::new(k).unwrap();
            let k2 = k * k;
            let t = build_lame_polynomial(1, 1, &m).unwrap();
            assert!(t.symmetrized);
            let ev = eigenvalues_bisection(&t, 1, 0.0).unwrap();
            assert_relative_eq!(ev[0], 1.0, epsilon = 1e-14);
            assert_relative_eq!(ev[1], 1.0 + k2, epsilon = 1e-14);
            let t2 = build_lame_polynomial(2, 1, &m).unwrap();
            assert_relative_eq!(t2.diag[0], k2, epsilon = 1e-15);
            let t0 = build_lame_polynomial(1, 0, &m).unwrap();
            assert_eq!(t0.diag, vec![0.0]);
        }
        assert!(build_lame_polynomial(2, 0, &Modulus::new(0.5).unwrap()).is_err());
    }

    #[test]
    fn lame_polynomial_symmetric_subspaces() {
        let m = Modulus::new(0.75).unwrap();
        for p_int in 1..9 {
            let t = build_lame_polynomial(1, p_int, &m).unwrap();
            for pair in all_eigenpairs(&t).unwrap() {
                let c = t.back_transform(&pair.vector);
                let sym = (0..=p_int).all(|n| (c[n] - c[p_int - n]).abs() < 1e-9 * c.iter().fold(0.0f64, |a, x| a.max(x.abs())));
                let anti = (0..=p_int).all(|n| (c[n] + c[p_int - n]).abs() < 1e-9 * c.iter().fold(0.0f64, |a, x| a.max(x.abs())));
                assert!(sym || anti, "p={p_int}, m={}", pair.index);
            }
        }
    }

    #[test]
    fn back_transform_satisfies_original_rows() {
        let m = Modulus::new(0.55).unwrap();
        let p_int = 5;
        let k2 = m.k2();
        let p = p_int as f64;
        let t = build_lame_polynomial(1, p_int, &m).unwrap();
        for pair in all_eigenpairs(&t).unwrap() {
            let c = t.back_transform(&pair.vector);
            let scale = c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            for n in 0..=p_int {
                let x = n as f64;
                let a = 0.5 * k2 * (p + 1.0 - x) * (2.0 * x - 1.0);
                let b = 0.5 * k2 * p * (p + 1.0) + (1.0 - 0.5 * k2) * (2.0 * x - p).powi(2);
                let g = 0.5 * k2 * (2.0 * p - 1.0 - 2.0 * x) * (x + 1.0);
                let prev = if n > 0 { c[n - 1] } else { 0.0 };
                let next = if n < p_int { c[n + 1] } else { 0.0 };
                let r = a * prev + (b - pair.h) * c[n] + g * next;
                assert!(r.abs() < 1e-10 * scale * (1.0 + pair.h.abs()));
            }
        }
    }

    proptest! {
        #[test]
        fn sturm_count_monotone(seed in 0u64..1000, a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..20);
            let m = random_matrix(&mut rng, n);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(sturm_count(&m, lo) <= sturm_count(&m, hi));
        }

        #[test]
        fn count_jumps_by_multiplicity(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..12);
            let m = random_matrix(&mut rng, n);
            let ev = eigenvalues_bisection(&m, n - 1, 0.0).unwrap();
            for (i, x) in ev.iter().enumerate() {
                let d = 1e-9 * (1.0 + x.abs());
                let mult = ev.iter().filter(|y| (*y - x).abs() < d).count();
                let below = sturm_count(&m, x - d);
                prop_assert_eq!(sturm_count(&m, x + d) - below, mult);
                prop_assert!(below <= i);
            }
        }
    }
}
