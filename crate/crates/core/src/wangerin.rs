//! Lamé–Wangerin eigenfunctions as power series in `η`, evaluated on the
//! segment `(iK', 2K + iK')` and in the strip `0 ≤ Im z < K'`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;

use crate::elliptic::{eta_on_segment, jacobi, jacobi_complex, Modulus};
use crate::error::{domain, LameError, Result};
use crate::recurrence::{minimal_solution, row, row_residual, LameParams, RecurrenceKind};
use crate::spectra::{build_lame_polynomial, eigenvalues_bisection, eigenvector_inverse_iteration, wangerin_eigenvalues};

/// Which coefficient sequence represents the function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Form {
    /// `c_n` (first kind) or `d_n` (second kind).
    Plain,
    /// `a_n` (first kind) or `b_n` (second kind), the symmetric recursion.
    SelfAdjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// Unit Euclidean coefficient norm, first significant coefficient positive.
    UnitCoeff,
    /// First kind `w(K + iK') = 1`; second kind `dw/du = 1` at `u = K`.
    Endpoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesEigenfunction {
    pub kindj: u8,
    pub form: Form,
    pub index: usize,
    /// `h` is always bound.
    pub params: LameParams,
    pub coeffs: Vec<f64>,
    pub normalization: Normalization,
    /// Truncation of the matrix the eigenvalue came from.
    pub truncation: usize,
    /// The series has finitely many nonzero terms.
    pub terminating: bool,
}

impl SeriesEigenfunction {
    pub fn h(&self) -> f64 {
        self.params.h.expect("eigenfunctions carry h")
    }

    pub fn recurrence_kind(&self) -> RecurrenceKind {
        recurrence_kind(self.kindj, self.form)
    }

    /// Largest row defect of the coefficient recursion, relative to
    /// `max |coeff|`. The last row is skipped since it couples to the
    /// first dropped coefficient.
    pub fn recursion_residual(&self) -> Result<f64> {
        let kind = self.recurrence_kind();
        let scale = self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let mut worst = 0.0f64;
        for n in 0..self.coeffs.len() - 1 {
            let r = row_residual(kind, n, &self.params, self.h(), &self.coeffs)?;
            worst = worst.max(r.abs());
        }
        Ok(worst / scale)
    }
}

pub fn recurrence_kind(kindj: u8, form: Form) -> RecurrenceKind {
    match (kindj, form) {
        (1, Form::Plain) => RecurrenceKind::W1Plain,
        (1, Form::SelfAdjoint) => RecurrenceKind::W1SelfAdjoint,
        (_, Form::Plain) => RecurrenceKind::W2Plain,
        (_, Form::SelfAdjoint) => RecurrenceKind::W2SelfAdjoint,
    }
}

/// Square-root kernels of the continuation at one point of the strip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationKernels {
    pub i1: Complex64,
    pub i2: Complex64,
    pub j1: Complex64,
    pub j2: Complex64,
}

/// `√(dn + cn)` on the reduced strip `Re z ∈ (−2K, 2K]`, taking the
/// interior limit on the ray `Re z = 2K`.
fn sqrt_dn_plus_cn(x: f64, y: f64, m: &Modulus) -> Result<Complex64> {
    let four_k = 4.0 * m.big_k;
    let turns = ((x + 2.0 * m.big_k) / four_k).ceil() - 1.0;
    let xr = x - turns * four_k;
    let sign = if (turns as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let j = jacobi_complex(xr, y, m)?;
    let s = j.dn + j.cn;
    let root = if y > 0.0 && (xr - 2.0 * m.big_k).abs() <= 4.0 * f64::EPSILON * m.big_k && s.re < 0.0 {
        Complex64::new(0.0, -s.norm().sqrt())
    } else {
        s.sqrt()
    };
    Ok(sign * root)
}

pub fn kernels(x: f64, y: f64, m: &Modulus) -> Result<ContinuationKernels> {
    if !x.is_finite() {
        return domain(format!("Re z = {x} not finite"));
    }
    let i1 = sqrt_dn_plus_cn(x, y, m)?;
    let i2 = -sqrt_dn_plus_cn(x + 2.0 * m.big_k, y, m)?;
    let plus = Complex64::from_polar(1.0, FRAC_PI_4);
    let minus = Complex64::from_polar(1.0, -FRAC_PI_4);
    Ok(ContinuationKernels {
        i1,
        i2,
        j1: (plus * i1 + minus * i2) / (1.0 - m.kprime).sqrt(),
        j2: (plus * i1 - minus * i2) / (1.0 + m.kprime).sqrt(),
    })
}

/// Coefficients of `(η₂ − η)^{e}` as a power series in `η`.
fn binomial_series(e: f64, m: &Modulus, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut term = m.eta2.powf(e);
    for j in 0..len {
        out.push(term);
        // binom(e, j+1)/binom(e, j) = (e − j)/(j + 1); each power of η
        // brings −1/η₂ = −η₁
        term *= (e - j as f64) / (j as f64 + 1.0) * (-m.eta1);
    }
    out
}

fn convolve(a: &[f64], s: &[f64]) -> Vec<f64> {
    (0..a.len())
        .map(|n| (0..=n).map(|j| a[j] * s[n - j]).sum())
        .collect()
}

/// Coefficient count such that the series is negligible afterwards.
fn series_length(m: &Modulus, index: usize) -> usize {
    let rate = m.eta1.log10().abs().max(1e-3);
    index + 30 + (18.0 / rate).ceil() as usize
}

fn normalize_unit(c: &mut [f64]) {
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    let max = c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let lead = c.iter().find(|x| x.abs() > 1e-8 * max).copied().unwrap_or(1.0);
    let s = lead.signum() / norm;
    c.iter_mut().for_each(|x| *x *= s);
}

/// `H_m⁽ʲ⁾(ν, k)` and its eigenfunction in the requested form.
pub fn eigenfunction(kindj: u8, form: Form, m: usize, p: &LameParams, norm: Normalization) -> Result<SeriesEigenfunction> {
    if kindj != 1 && kindj != 2 {
        return domain(format!("kind must be 1 or 2, got {kindj}"));
    }
    let pairs = wangerin_eigenvalues(kindj, p, m, 1e-11)?;
    let pair = &pairs[m];
    let h = pair.h;
    let params = LameParams {
        nu: p.nu_snapped(),
        mu: None,
        modulus: p.modulus.clone(),
        h: Some(h),
    };
    let len = series_length(&p.modulus, m).max(pair.vector.len().min(4 * m + 60));
    let sa_kind = recurrence_kind(kindj, Form::SelfAdjoint);

    // A vector supported strictly before the end of the truncation
    // is a finite block: keep its exact zeros.
    let last_nonzero = pair.vector.iter().rposition(|v| *v != 0.0).unwrap_or(0);
    let terminating_sa = last_nonzero + 1 < pair.vector.len() && pair.vector[last_nonzero + 1..].iter().all(|v| *v == 0.0);
    let mut sa: Vec<f64> = if terminating_sa {
        let mut v = pair.vector[..=last_nonzero].to_vec();
        v.resize(len.max(last_nonzero + 2), 0.0);
        v
    } else {
        let mut v = pair.vector.clone();
        v.resize(len, 0.0);
        match two_sided(sa_kind, &params, &pair.vector, len)? {
            Some(a) if (0..pair.vector.len().min(a.len())).all(|i| (a[i] - v[i]).abs() < 1e-8) => a,
            _ => v,
        }
    };
    normalize_unit(&mut sa);

    let mut terminating = terminating_sa;
    let (mut coeffs, endpoint) = match form {
        Form::SelfAdjoint => {
            let e = endpoint_factor_self_adjoint(kindj, &params, &sa);
            (sa, e)
        }
        Form::Plain => {
            let e = endpoint_factor_self_adjoint(kindj, &params, &sa);
            let poly = polynomial_coefficients(kindj, &params, h, m)?;
            // a finite self-adjoint series still has an infinite plain form
            terminating = poly.is_some();
            let c = match poly {
                Some(mut c) => {
                    // match the scale of the converted series
                    let conv = convert_to_plain(kindj, &params.modulus, &sa);
                    let dot: f64 = c.iter().zip(&conv).map(|(a, b)| a * b).sum();
                    let nn: f64 = c.iter().map(|a| a * a).sum();
                    c.iter_mut().for_each(|x| *x *= dot / nn);
                    c.resize(conv.len(), 0.0);
                    c
                }
                None => convert_to_plain(kindj, &params.modulus, &sa),
            };
            (c, e)
        }
    };
    match norm {
        Normalization::UnitCoeff => normalize_unit(&mut coeffs),
        Normalization::Endpoint => {
            if endpoint == 0.0 || !endpoint.is_finite() {
                return Err(LameError::Refused("endpoint normalization degenerate".into()));
            }
            coeffs.iter_mut().for_each(|x| *x /= endpoint);
        }
    }
    Ok(SeriesEigenfunction {
        kindj,
        form,
        index: m,
        params,
        coeffs,
        normalization: norm,
        truncation: pair.truncation,
        terminating,
    })
}

/// Coefficients accurate to working precision in every entry: the
/// recursion runs forward from the start of the support up to the peak
/// of the eigenvector (where the forward solution dominates) and
/// backward from far out down to the peak; the two halves are joined at
/// the peak. Returns `None` if a vanishing coupling blocks the forward
/// sweep.
fn two_sided(kind: RecurrenceKind, p: &LameParams, vector: &[f64], len: usize) -> Result<Option<Vec<f64>>> {
    let h = p.h.expect("h bound");
    let peak = (0..vector.len())
        .max_by(|a, b| vector[*a].abs().partial_cmp(&vector[*b].abs()).unwrap())
        .unwrap_or(0);
    let start = vector.iter().position(|x| *x != 0.0).unwrap_or(0);
    let back = minimal_solution(kind, p, len.max(peak + 10))?.coeffs;
    if back[peak] == 0.0 {
        return Ok(None);
    }
    let mut fwd = vec![0.0; peak + 1];
    fwd[start] = 1.0;
    for n in start..peak {
        let r = row(kind, n as i64, p)?;
        if r.sup == 0.0 {
            return Ok(None);
        }
        let prev = if n > start { fwd[n - 1] } else { 0.0 };
        fwd[n + 1] = -(r.sub * prev + (r.diag - h) * fwd[n]) / r.sup;
    }
    if fwd[peak] == 0.0 || !fwd[peak].is_finite() {
        return Ok(None);
    }
    let scale = back[peak] / fwd[peak];
    let mut out = back;
    for n in 0..peak {
        out[n] = fwd[n] * scale;
    }
    normalize_unit(&mut out);
    let lead = vector.iter().find(|x| x.abs() > 1e-8).copied().unwrap_or(1.0);
    let sign = if out.iter().find(|x| x.abs() > 1e-8).copied().unwrap_or(1.0) * lead < 0.0 { -1.0 } else { 1.0 };
    out.iter_mut().for_each(|x| *x *= sign);
    Ok(Some(out))
}

/// Plain coefficients from self-adjoint ones.
pub fn convert_to_plain(kindj: u8, m: &Modulus, sa: &[f64]) -> Vec<f64> {
    let e = if kindj == 1 { 0.5 } else { -0.5 };
    convolve(sa, &binomial_series(e, m, sa.len()))
}

/// Endpoint value (kind 1) or endpoint `u`-derivative (kind 2) of the
/// function with self-adjoint coefficients `sa`.
fn endpoint_factor_self_adjoint(kindj: u8, p: &LameParams, sa: &[f64]) -> f64 {
    let m = &p.modulus;
    let eta1 = m.eta1;
    let sum = horner(sa, eta1);
    let lead = eta1.powf(0.5 * (p.nu + 1.0));
    if kindj == 1 {
        lead * (m.eta2 - eta1).sqrt() * sum
    } else {
        // (η₁ − η)^{1/2} ≈ |u − K| k √k' / (1 + k'), positive for u < K
        -lead * m.k * m.kprime.sqrt() / (1.0 + m.kprime) * sum
    }
}

/// Lamé polynomial coefficients when the plain series terminates, i.e.
/// `ν = −p − 1` and `h` is an eigenvalue of the finite matrix.
fn polynomial_coefficients(kindj: u8, p: &LameParams, h: f64, m: usize) -> Result<Option<Vec<f64>>> {
    let nu = p.nu;
    let p_int = -nu - 1.0;
    if p_int < 0.0 || p_int.fract() != 0.0 {
        return Ok(None);
    }
    let p_int = p_int as usize;
    let size = if kindj == 1 { p_int + 1 } else { p_int };
    if size == 0 || m >= size {
        return Ok(None);
    }
    let t = build_lame_polynomial(kindj, p_int, &p.modulus)?;
    let values = eigenvalues_bisection(&t, size - 1, 0.0)?;
    let Some(hit) = values.iter().copied().find(|v| (v - h).abs() < 1e-8 * (1.0 + h.abs())) else {
        return Ok(None);
    };
    let v = eigenvector_inverse_iteration(&t, hit)?;
    Ok(Some(t.back_transform(&v)))
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

fn horner_complex(c: &[f64], x: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * x + a)
}

/// `w(u + iK')` for `0 < u < 2K`.
pub fn evaluate_on_segment(f: &SeriesEigenfunction, u: f64) -> Result<f64> {
    let m = &f.params.modulus;
    let two_k = 2.0 * m.big_k;
    if !(u > 0.0 && u < two_k) {
        return domain(format!("u = {u} outside (0, 2K)"));
    }
    let (ur, parity) = if u > m.big_k {
        (two_k - u, if f.kindj == 1 { 1.0 } else { -1.0 })
    } else {
        (u, 1.0)
    };
    let eta = eta_on_segment(ur, m)?;
    let nu = f.params.nu;
    let sum = horner(&f.coeffs, eta);
    let lead = eta.powf(0.5 * (nu + 1.0));
    let j = jacobi(ur, m);
    let cs = j.cn / j.sn;
    let value = match (f.kindj, f.form) {
        (1, Form::Plain) => lead * sum,
        (1, Form::SelfAdjoint) => lead * (m.eta2 - eta).sqrt() * sum,
        (_, Form::Plain) => lead * eta.sqrt() * 2.0 / m.k * cs * sum,
        // (η₁ − η)^{1/2} through (η₁ − η)(η₂ − η) = η (2 cs/k)², free of
        // cancellation near u = K
        (_, Form::SelfAdjoint) => lead * eta.sqrt() * 2.0 / m.k * cs / (m.eta2 - eta).sqrt() * sum,
    };
    Ok(parity * value)
}

/// `w(x + iy)` for `0 ≤ y < K'`.
pub fn evaluate_in_strip(f: &SeriesEigenfunction, x: f64, y: f64) -> Result<Complex64> {
    let m = &f.params.modulus;
    let j = jacobi_complex(x, y, m)?;
    let t = Complex64::new(FRAC_PI_2, 0.0) - j.am;
    let eta = (Complex64::new(0.0, -2.0) * t).exp();
    let nu = f.params.nu;
    let phase = |e: f64| (Complex64::new(0.0, -e) * t).exp();
    let sum = horner_complex(&f.coeffs, eta);
    let value = match (f.kindj, f.form) {
        (1, Form::Plain) => phase(nu + 1.0) * sum,
        (1, Form::SelfAdjoint) => phase(nu + 1.5) * kernels(x, y, m)?.j1 * sum,
        (_, Form::Plain) => Complex64::new(0.0, 2.0 / m.k) * phase(nu + 2.0) * j.dn * sum,
        (_, Form::SelfAdjoint) => phase(nu + 1.5) * kernels(x, y, m)?.j2 * sum,
    };
    Ok(value)
}
