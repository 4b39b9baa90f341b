//! Closed-form and finite cases: the `k = 0` index map, algebraic Lamé
//! functions, Lamé polynomials and the Gegenbauer limits.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::elliptic::{jacobi, Modulus};
use crate::error::{domain, Result};
use crate::recurrence::LameParams;
use crate::spectra::{all_eigenpairs, build_algebraic, build_lame_polynomial};
use crate::wangerin::{Form, Normalization, SeriesEigenfunction};

/// Position `ℓ` of the `m`-th eigenvalue at `k = 0`, where the
/// eigenvalues are the squares `(2n + ν + j)²`, `n ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllIndex {
    pub m: usize,
    pub nu: f64,
    pub kindj: u8,
    pub ell: usize,
    /// `(2ℓ + ν + j)²`.
    pub value: f64,
}

pub fn ell_index(kindj: u8, m: usize, nu: f64) -> Result<EllIndex> {
    if kindj != 1 && kindj != 2 {
        return domain(format!("kind must be 1 or 2, got {kindj}"));
    }
    if !nu.is_finite() {
        return domain(format!("ν = {nu} not finite"));
    }
    let j = kindj as f64;
    // squares decrease in n until 2n + ν + j crosses zero, so the window
    // must reach past that point by m + 2
    let window = m + nu.abs().ceil() as usize + 2;
    let mut values: Vec<(f64, usize)> = (0..=window).map(|n| ((2.0 * n as f64 + nu + j).powi(2), n)).collect();
    values.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let (value, ell) = values[m];
    Ok(EllIndex {
        m,
        nu,
        kindj,
        ell,
        value,
    })
}

/// `F(−ℓ, b; c; x)`, a polynomial of degree `ℓ`.
pub fn terminating_hypergeometric(ell: usize, b: f64, c: f64, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 0..ell {
        let jf = j as f64;
        term *= (jf - ell as f64) * (b + jf) / ((c + jf) * (jf + 1.0)) * x;
        sum += term;
    }
    sum
}

/// The `k → 0` limit of the endpoint-normalized eigenfunction, in the
/// variable `s = πu/(2K)`.
pub fn gegenbauer_limit(kindj: u8, m: usize, nu: f64, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < std::f64::consts::PI) {
        return domain(format!("s = {s} outside (0, π)"));
    }
    let ell = ell_index(kindj, m, nu)?.ell;
    let (sin, cos) = s.sin_cos();
    let lead = sin.powf(nu + 1.0);
    Ok(if kindj == 1 {
        lead * terminating_hypergeometric(ell, ell as f64 + nu + 1.0, 0.5, cos * cos)
    } else {
        -lead * cos * terminating_hypergeometric(ell, ell as f64 + nu + 2.0, 1.5, cos * cos)
    })
}

/// A solution pair at `ν = −p − ½` sharing the eigenvalue `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicPair {
    pub h: f64,
    /// First kind, self-adjoint form with coefficients `a`.
    pub first: SeriesEigenfunction,
    /// Second kind, self-adjoint form with the reversed coefficients.
    pub second: SeriesEigenfunction,
}

/// The `p` algebraic Lamé function pairs at `ν = −p − ½`.
pub fn algebraic_functions(p_int: usize, m: &Modulus) -> Result<Vec<AlgebraicPair>> {
    let matrix = build_algebraic(1, p_int, m)?;
    let nu = -(p_int as f64) - 0.5;
    all_eigenpairs(&matrix)?
        .into_iter()
        .map(|pair| {
            let params = LameParams::with_modulus(nu, m.clone()).with_h(pair.h);
            let make = |kindj: u8, coeffs: Vec<f64>| SeriesEigenfunction {
                kindj,
                form: Form::SelfAdjoint,
                index: pair.index,
                params: params.clone(),
                coeffs,
                normalization: Normalization::UnitCoeff,
                truncation: p_int,
                terminating: true,
            };
            let reversed: Vec<f64> = pair.vector.iter().rev().copied().collect();
            Ok(AlgebraicPair {
                h: pair.h,
                first: make(1, pair.vector.clone()),
                second: make(2, reversed),
            })
        })
        .collect()
}

/// Polynomial in `sn, cn, dn`, kept reduced: `cn` and `dn` appear at
/// most linearly (`cn² = 1 − sn²`, `dn² = 1 − k² sn²`). Keys are the
/// exponents of `(sn, cn, dn)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnCnDnPoly<T> {
    pub k2: f64,
    pub terms: BTreeMap<(u32, u32, u32), T>,
}

type Coeff = Complex64;

impl SnCnDnPoly<Coeff> {
    pub fn constant(k2: f64, c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0, 0, 0), c);
        SnCnDnPoly { k2, terms }
    }

    fn add_term(&mut self, key: (u32, u32, u32), c: Coeff) {
        let (a, b, e) = key;
        // reduce cn² and dn²
        let mut parts: Vec<((u32, u32, u32), Coeff)> = vec![((a, b, e), c)];
        let mut out = Vec::new();
        while let Some(((a, b, e), c)) = parts.pop() {
            if b >= 2 {
                parts.push(((a, b - 2, e), c));
                parts.push(((a + 2, b - 2, e), -c));
            } else if e >= 2 {
                parts.push(((a, b, e - 2), c));
                parts.push(((a + 2, b, e - 2), -c * self.k2));
            } else {
                out.push(((a, b, e), c));
            }
        }
        for (key, c) in out {
            *self.terms.entry(key).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = SnCnDnPoly {
            k2: self.k2,
            terms: BTreeMap::new(),
        };
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                out.add_term((ka.0 + kb.0, ka.1 + kb.1, ka.2 + kb.2), ca * cb);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, *c);
        }
        out
    }

    pub fn scale(&self, f: Coeff) -> Self {
        SnCnDnPoly {
            k2: self.k2,
            terms: self.terms.iter().map(|(k, c)| (*k, c * f)).collect(),
        }
    }

    /// `d/dz`, from `sn' = cn dn`, `cn' = −sn dn`, `dn' = −k² sn cn`.
    pub fn derivative(&self) -> Self {
        let mut out = SnCnDnPoly {
            k2: self.k2,
            terms: BTreeMap::new(),
        };
        for (&(a, b, e), &c) in &self.terms {
            if a > 0 {
                out.add_term((a - 1, b + 1, e + 1), c * a as f64);
            }
            if b > 0 {
                out.add_term((a + 1, b - 1, e + 1), -c * b as f64);
            }
            if e > 0 {
                out.add_term((a + 1, b + 1, e - 1), -c * (e as f64 * self.k2));
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.norm()))
    }

    pub fn evaluate(&self, sn: f64, cn: f64, dn: f64) -> Coeff {
        self.terms
            .iter()
            .map(|(&(a, b, e), c)| c * sn.powi(a as i32) * cn.powi(b as i32) * dn.powi(e as i32))
            .sum()
    }
}

/// Which of the eight families a Lamé polynomial belongs to: the factors
/// present in front of a polynomial in `sn²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PolynomialClass {
    pub sn: bool,
    pub cn: bool,
    pub dn: bool,
}

impl fmt::Display for PolynomialClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.sn {
            parts.push("sn");
        }
        if self.cn {
            parts.push("cn");
        }
        if self.dn {
            parts.push("dn");
        }
        parts.push("P(sn²)");
        write!(f, "{}", parts.join("·"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSolution {
    pub p: usize,
    pub kindj: u8,
    pub h: f64,
    pub class: PolynomialClass,
    /// `c_0..c_p` (first kind) or `d_0..d_{p−1}` (second kind).
    pub coeffs: Vec<f64>,
    /// Real coefficients of the polynomial in `(sn, cn, dn)`.
    pub poly: SnCnDnPoly<Complex64>,
}

impl PolynomialSolution {
    pub fn evaluate(&self, z: f64, m: &Modulus) -> f64 {
        let j = jacobi(z, m);
        self.poly.evaluate(j.sn, j.cn, j.dn).re
    }

    /// `w'' + (h − ν(ν+1) k² sn²) w` as a reduced polynomial.
    pub fn ode_defect(&self) -> SnCnDnPoly<Complex64> {
        let k2 = self.poly.k2;
        let pf = self.p as f64;
        // ν(ν+1) = p(p+1) at ν = −p − 1
        let second = self.poly.derivative().derivative();
        let mut pot = SnCnDnPoly::constant(k2, Complex64::new(self.h, 0.0));
        pot.add_term((2, 0, 0), Complex64::new(-pf * (pf + 1.0) * k2, 0.0));
        second.add(&pot.mul(&self.poly))
    }
}

/// `(sn − i cn)^e` for integer `e`; negative powers use
/// `(sn − i cn)⁻¹ = sn + i cn`.
fn xi_power(e: i64, k2: f64) -> SnCnDnPoly<Coeff> {
    let mut base = SnCnDnPoly::constant(k2, Complex64::new(0.0, 0.0));
    base.terms.clear();
    let sign = if e >= 0 { -1.0 } else { 1.0 };
    base.add_term((1, 0, 0), Complex64::new(1.0, 0.0));
    base.add_term((0, 1, 0), Complex64::new(0.0, sign));
    let mut out = SnCnDnPoly::constant(k2, Complex64::new(1.0, 0.0));
    for _ in 0..e.unsigned_abs() {
        out = out.mul(&base);
    }
    out
}

fn classify(poly: &SnCnDnPoly<Coeff>) -> PolynomialClass {
    let scale = poly.max_abs();
    let mut class = PolynomialClass {
        sn: false,
        cn: false,
        dn: false,
    };
    for (&(a, b, e), c) in &poly.terms {
        if c.norm() > 1e-12 * scale {
            class.sn = a % 2 == 1;
            class.cn = b == 1;
            class.dn = e == 1;
        }
    }
    class
}

/// Keeps the real part, after rotating a purely imaginary polynomial onto
/// the real axis; drops round-off terms.
fn realify(poly: SnCnDnPoly<Coeff>) -> SnCnDnPoly<Coeff> {
    let re = poly.terms.values().fold(0.0f64, |a, c| a.max(c.re.abs()));
    let im = poly.terms.values().fold(0.0f64, |a, c| a.max(c.im.abs()));
    let rot = if im > re { Complex64::new(0.0, -1.0) } else { Complex64::new(1.0, 0.0) };
    let scale = re.max(im);
    let mut out = poly.scale(rot);
    out.terms = out
        .terms
        .into_iter()
        .filter(|(_, c)| c.re.abs() > 1e-13 * scale)
        .map(|(k, c)| (k, Complex64::new(c.re, 0.0)))
        .collect();
    out
}

/// The `2p + 1` Lamé polynomials at `ν = −p − 1`: `p + 1` of the first
/// kind then `p` with a `dn` factor, each in increasing `h`.
pub fn lame_polynomials(p_int: usize, m: &Modulus) -> Result<Vec<PolynomialSolution>> {
    let k2 = m.k2();
    let p = p_int as i64;
    let mut out = Vec::with_capacity(2 * p_int + 1);
    for kindj in [1u8, 2] {
        if kindj == 2 && p_int == 0 {
            break;
        }
        let t = build_lame_polynomial(kindj, p_int, m)?;
        for pair in all_eigenpairs(&t)? {
            let c = t.back_transform(&pair.vector);
            let mut sum = SnCnDnPoly::constant(k2, Complex64::new(0.0, 0.0));
            let offset = if kindj == 1 { -p } else { 1 - p };
            for (n, cn) in c.iter().enumerate() {
                let term = xi_power(2 * n as i64 + offset, k2).scale(Complex64::new(*cn, 0.0));
                sum = sum.add(&term);
            }
            if kindj == 2 {
                let mut dn = SnCnDnPoly::constant(k2, Complex64::new(0.0, 0.0));
                dn.terms.clear();
                dn.add_term((0, 0, 1), Complex64::new(0.0, 2.0 / m.k));
                sum = sum.mul(&dn);
            }
            let poly = realify(sum);
            out.push(PolynomialSolution {
                p: p_int,
                kindj,
                h: pair.h,
                class: classify(&poly),
                coeffs: c,
                poly,
            });
        }
    }
    Ok(out)
}
