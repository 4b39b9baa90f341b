//! Hill's discriminant of the Lamé equation and Floquet eigenvalues.
//!
//! The equation is integrated in `z` over a half period `[0, K]`; the
//! potential is even about `K`, so the monodromy over `[0, 2K]` follows
//! from the half-period values.

use std::f64::consts::PI;

use crate::elliptic::{jacobi, Modulus};
use crate::error::{domain, LameError, Result};
use crate::recurrence::LameParams;

/// Fundamental solutions at `z = 2K` and the discriminant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscriminantSample {
    pub h: f64,
    pub d: f64,
    pub w1_end: f64,
    pub dw1_end: f64,
    pub w2_end: f64,
    pub dw2_end: f64,
}

impl DiscriminantSample {
    pub fn wronskian(&self) -> f64 {
        self.w1_end * self.dw2_end - self.dw1_end * self.w2_end
    }
}

/// Local error tolerance of the integrator.
pub const LOCAL_TOL: f64 = 1e-12;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type State = [f64; 4];

/// Dormand–Prince 5(4) for both fundamental solutions from `0` to `end`.
fn integrate_span(h: f64, coupling: f64, m: &Modulus, end: f64, tol: f64) -> Result<State> {
    let rhs = |z: f64, y: &State| -> State {
        let sn = jacobi(z, m).sn;
        let q = h - coupling * sn * sn;
        [y[1], -q * y[0], y[3], -q * y[2]]
    };
    let mut y: State = [1.0, 0.0, 0.0, 1.0];
    let mut z = 0.0;
    let mut step = (0.1 / (1.0 + h.abs()).sqrt()).min(end);
    let mut k = [[0.0; 4]; 7];
    k[0] = rhs(z, &y);
    let mut steps = 0usize;
    while z < end {
        if step < 1e-14 * end || steps > 2_000_000 {
            return Err(LameError::Integration(format!(
                "step size collapsed at z = {z} (h = {h})"
            )));
        }
        let last = z + step >= end;
        if last {
            step = end - z;
        }
        for s in 1..7 {
            let mut ys = y;
            for (i, yi) in ys.iter_mut().enumerate() {
                *yi += step * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
            }
            k[s] = rhs(z + C[s] * step, &ys);
        }
        let mut ynew = y;
        for (i, yi) in ynew.iter_mut().enumerate() {
            *yi += step * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>();
        }
        // k[6] was evaluated at ynew (FSAL)
        let err = (0..4)
            .map(|i| {
                let e = step * (0..7).map(|j| ERR[j] * k[j][i]).sum::<f64>();
                e.abs() / (tol + tol * y[i].abs().max(ynew[i].abs()))
            })
            .fold(0.0, f64::max);
        steps += 1;
        if err <= 1.0 {
            z = if last { end } else { z + step };
            y = ynew;
            k[0] = k[6];
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        step *= factor;
    }
    Ok(y)
}

/// `ν(ν+1)k²`, the coefficient of `sn²`.
fn coupling(p: &LameParams) -> f64 {
    let nu = p.nu_snapped();
    nu * (nu + 1.0) * p.modulus.k2()
}

fn sample_with_tol(h: f64, p: &LameParams, tol: f64) -> Result<DiscriminantSample> {
    if !h.is_finite() {
        return domain(format!("h = {h} not finite"));
    }
    let m = &p.modulus;
    let [a, da, b, db] = integrate_span(h, coupling(p), m, m.big_k, tol)?;
    // reflection about K: the monodromy is assembled from half-period data
    let diag = a * db + da * b;
    Ok(DiscriminantSample {
        h,
        d: 2.0 * diag,
        w1_end: diag,
        dw1_end: 2.0 * a * da,
        w2_end: 2.0 * b * db,
        dw2_end: diag,
    })
}

/// Fundamental solutions `w₁, w₂` (`w₁(0)=1, w₁'(0)=0, w₂(0)=0,
/// w₂'(0)=1`) at `z = 2K`.
pub fn integrate_lame(h: f64, p: &LameParams) -> Result<DiscriminantSample> {
    sample_with_tol(h, p, LOCAL_TOL)
}

/// Values `(w₁, w₁', w₂, w₂')` at `end`, integrated directly.
pub fn fundamental_solutions(h: f64, p: &LameParams, end: f64) -> Result<[f64; 4]> {
    if !(end >= 0.0) || !end.is_finite() {
        return domain(format!("end point {end} must be finite and nonnegative"));
    }
    if end == 0.0 {
        return Ok([1.0, 0.0, 0.0, 1.0]);
    }
    integrate_span(h, coupling(p), &p.modulus, end, LOCAL_TOL)
}

/// Hill's discriminant `D(h) = w₁(2K) + w₂'(2K)`.
pub fn discriminant(h: f64, p: &LameParams) -> Result<f64> {
    Ok(integrate_lame(h, p)?.d)
}

/// Canonical representative `(μ', ν')` with `μ' ∈ [0, 1]` and
/// `ν' ≥ −½`; the Floquet eigenvalues are unchanged.
pub fn canonicalize(mu: f64, nu: f64) -> (f64, f64) {
    let mut m = mu.rem_euclid(2.0);
    if m > 1.0 {
        m = 2.0 - m;
    }
    let n = if nu < -0.5 { -nu - 1.0 } else { nu };
    (m, n)
}

/// Brent's method on a sign-changing bracket.
pub(crate) fn brent(f: &mut dyn FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, tol: f64) -> Result<f64> {
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(LameError::RootTracking(format!("no sign change on [{a}, {b}]")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let t = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let half = 0.5 * (c - b);
        if half.abs() <= t || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= t && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut pp, mut q);
            if a == c {
                pp = 2.0 * half * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                pp = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if pp > 0.0 {
                q = -q;
            } else {
                pp = -pp;
            }
            if 2.0 * pp < (3.0 * half * q - (t * q).abs()).min((e * q).abs()) {
                e = d;
                d = pp / q;
            } else {
                d = half;
                e = d;
            }
        } else {
            d = half;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > t { d } else { t * half.signum() };
        fb = f(b)?;
    }
    Err(LameError::RootTracking("Brent iteration limit".into()))
}

/// Golden-section search for the maximum of `g` on `[a, b]`.
fn golden_max(g: &mut dyn FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut g1 = g(x1)?;
    let mut g2 = g(x2)?;
    while b - a > tol.max(4.0 * f64::EPSILON * a.abs().max(b.abs())) {
        if g1 < g2 {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + r * (b - a);
            g2 = g(x2)?;
        } else {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - r * (b - a);
            g1 = g(x1)?;
        }
    }
    Ok(if g1 > g2 { (x1, g1) } else { (x2, g2) })
}

/// `μ` within this distance of an integer is treated as an integer.
pub const INTEGER_MU_TOL: f64 = 1e-12;
/// Threshold on `|D ∓ 2|` at a critical point for a double root.
pub const DOUBLE_ROOT_TOL: f64 = 1e-10;
const HOMOTOPY_STEPS: usize = 8;
const HOMOTOPY_START: f64 = 1.0 / 64.0;

struct Problem<'a> {
    p: &'a LameParams,
    target: f64,
    /// `+1` for `μ = 0` (periodic), `−1` for `μ = 1`, `0` otherwise.
    integer_sign: f64,
    int_tol: f64,
    double_tol: f64,
}

impl Problem<'_> {
    fn f(&self, h: f64) -> Result<f64> {
        Ok(sample_with_tol(h, self.p, self.int_tol)?.d - self.target)
    }

    fn lower_bound(&self) -> f64 {
        coupling(self.p).min(0.0) - 1.0
    }

    /// Roots for simple (non-integer `μ`) spectra, bracketed between
    /// midpoints of the predicted values.
    fn simple_roots(&self, pred: &[f64], tol: f64) -> Result<Vec<f64>> {
        let n = pred.len();
        let mut edges = Vec::with_capacity(n + 1);
        edges.push(self.lower_bound().min(pred[0] - 1.0));
        for i in 1..n {
            edges.push(0.5 * (pred[i - 1] + pred[i]));
        }
        let top = pred[n - 1] + 0.5 * (pred[n - 1] - pred[n - 2].min(pred[n - 1] - 1.0));
        edges.push(top);
        let vals: Vec<f64> = edges.iter().map(|h| self.f(*h)).collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut f = |h: f64| self.f(h);
            let (a, b, fa, fb) = (edges[i], edges[i + 1], vals[i], vals[i + 1]);
            if fa.signum() == fb.signum() {
                return Err(LameError::RootTracking(format!("bracket [{a}, {b}] lost root {i}")));
            }
            out.push(brent(&mut f, a, b, fa, fb, tol)?);
        }
        Ok(out)
    }

    /// Roots for integer `μ`, where eigenvalues pair into clusters that
    /// may be double.
    fn clustered_roots(&self, pred: &[f64], tol: f64) -> Result<Vec<f64>> {
        let s = self.integer_sign;
        let mut clusters: Vec<(usize, f64)> = Vec::new();
        let mut i = 0;
        if s > 0.0 {
            clusters.push((1, pred[0]));
            i = 1;
        }
        while i + 1 < pred.len() {
            clusters.push((2, 0.5 * (pred[i] + pred[i + 1])));
            i += 2;
        }
        let mut out = Vec::with_capacity(pred.len());
        for (ci, &(size, centre)) in clusters.iter().enumerate() {
            let a = if ci == 0 {
                self.lower_bound().min(centre - 1.0)
            } else {
                0.5 * (clusters[ci - 1].1 + centre)
            };
            let b = if ci + 1 < clusters.len() {
                0.5 * (centre + clusters[ci + 1].1)
            } else {
                centre + (centre - a)
            };
            let mut f = |h: f64| self.f(h);
            if size == 1 {
                let (fa, fb) = (f(a)?, f(b)?);
                out.push(brent(&mut f, a, b, fa, fb, tol)?);
                continue;
            }
            // g = s·(D − target) is nonnegative exactly inside the cluster
            let mut g = |h: f64| Ok(s * self.f(h)?);
            let samples = 24;
            let grid: Vec<f64> = (0..=samples).map(|j| a + (b - a) * j as f64 / samples as f64).collect();
            let gv: Vec<f64> = grid.iter().map(|h| g(*h)).collect::<Result<_>>()?;
            let best = (1..samples)
                .max_by(|x, y| gv[*x].partial_cmp(&gv[*y]).unwrap())
                .unwrap_or(1);
            let (h_ext, g_ext) = golden_max(&mut g, grid[best - 1], grid[best + 1], tol.max(1e-9))?;
            if g_ext.abs() <= self.double_tol {
                out.push(h_ext);
                out.push(h_ext);
            } else if g_ext > 0.0 {
                let (ga, gb) = (self.f(a)?, self.f(b)?);
                let fe = self.f(h_ext)?;
                out.push(brent(&mut f, a, h_ext, ga, fe, tol)?);
                out.push(brent(&mut f, h_ext, b, fe, gb, tol)?);
            } else {
                return Err(LameError::RootTracking(format!(
                    "cluster near {centre} not found (max {g_ext:e})"
                )));
            }
        }
        Ok(out)
    }

    fn roots(&self, pred: &[f64], tol: f64) -> Result<Vec<f64>> {
        if self.integer_sign != 0.0 {
            self.clustered_roots(pred, tol)
        } else {
            self.simple_roots(pred, tol)
        }
    }

    /// Fallback: sweep `h` upward from the lower bound until `count`
    /// roots are found.
    fn scan(&self, count: usize, tol: f64) -> Result<Vec<f64>> {
        let big_k = self.p.modulus.big_k;
        let mut out = Vec::new();
        let mut h0 = self.lower_bound();
        let mut f0 = self.f(h0)?;
        let mut prev: Option<(f64, f64)> = None;
        let ceiling = (2.0 * count as f64 + 2.0).powi(2) + coupling(self.p).abs() + 10.0;
        while out.len() < count {
            if h0 > ceiling {
                return Err(LameError::RootTracking(format!(
                    "scan found {} of {count} roots below {ceiling}",
                    out.len()
                )));
            }
            let step = 0.05 * (h0 - self.lower_bound()).max(1.0).sqrt() / big_k;
            let h1 = h0 + step;
            let f1 = self.f(h1)?;
            if f0.signum() != f1.signum() {
                let mut f = |h: f64| self.f(h);
                out.push(brent(&mut f, h0, h1, f0, f1, tol)?);
            } else if self.integer_sign != 0.0 {
                if let Some((hp, fp)) = prev {
                    let s = self.integer_sign;
                    // local maximum of s·f just below zero: a touching root
                    if s * f0 >= s * fp && s * f0 >= s * f1 && (s * f0) > -1e-4 {
                        let mut g = |h: f64| Ok(s * self.f(h)?);
                        let (he, ge) = golden_max(&mut g, hp, h1, tol.max(1e-9))?;
                        if ge.abs() <= self.double_tol {
                            out.push(he);
                            out.push(he);
                        }
                    }
                }
            }
            prev = Some((h0, f0));
            h0 = h1;
            f0 = f1;
        }
        out.truncate(count);
        Ok(out)
    }
}

/// The Floquet eigenvalues `h_0 ≤ … ≤ h_{m_max}` for exponent `μ`:
/// solutions of `D(h) = 2 cos(μπ)`, tracked by homotopy in `k`.
pub fn floquet_eigenvalues(mu: f64, p: &LameParams, m_max: usize, tol: f64) -> Result<Vec<f64>> {
    if !mu.is_finite() {
        return domain(format!("μ = {mu} not finite"));
    }
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    let (mu_c, nu_c) = canonicalize(mu, p.nu);
    let mu_round = mu_c.round();
    let integer = (mu_c - mu_round).abs() < INTEGER_MU_TOL;
    let mu_c = if integer { mu_round } else { mu_c };
    let integer_sign = match (integer, mu_round as i64) {
        (true, 0) => 1.0,
        (true, _) => -1.0,
        _ => 0.0,
    };
    let target = if integer { 2.0 * integer_sign } else { 2.0 * (mu_c * PI).cos() };

    let tracked = m_max + 4;
    let n_span = tracked as i64 + 2;
    let mut free: Vec<f64> = (-n_span..=n_span).map(|n| (mu_c + 2.0 * n as f64).powi(2)).collect();
    free.sort_by(|a, b| a.partial_cmp(b).unwrap());
    free.truncate(tracked);

    let k = p.modulus.k;
    let nu_term = nu_c * (nu_c + 1.0);
    let mut prev: Option<(f64, Vec<f64>)> = None;
    let mut current = free.clone();
    let mut k_prev = 0.0;
    for step in 0..=HOMOTOPY_STEPS {
        let ks = k * HOMOTOPY_START * (1.0 / HOMOTOPY_START).powf(step as f64 / HOMOTOPY_STEPS as f64);
        let last = step == HOMOTOPY_STEPS;
        let params = if last {
            LameParams::with_modulus(nu_c, p.modulus.clone())
        } else {
            LameParams::with_modulus(nu_c, Modulus::new(ks)?)
        };
        let pred: Vec<f64> = match &prev {
            None => current.iter().map(|h| h + 0.5 * nu_term * ks * ks).collect(),
            Some((k_pp, older)) => {
                let ratio = (ks * ks - k_prev * k_prev) / (k_prev * k_prev - k_pp * k_pp);
                current.iter().zip(older).map(|(c, o)| c + (c - o) * ratio).collect()
            }
        };
        let (level_tol, int_tol, double_tol) = if last {
            (tol, LOCAL_TOL, DOUBLE_ROOT_TOL)
        } else {
            (1e-6, 1e-9, 1e-6)
        };
        let problem = Problem {
            p: &params,
            target,
            integer_sign,
            int_tol,
            double_tol,
        };
        let found = match problem.roots(&pred, level_tol) {
            Ok(r) => r,
            Err(_) => problem.scan(tracked, level_tol)?,
        };
        prev = Some((k_prev, std::mem::replace(&mut current, found)));
        k_prev = ks;
    }
    if integer {
        current = refine_integer(current, integer_sign, &LameParams::with_modulus(nu_c, p.modulus.clone()), tol)?;
    }
    current.truncate(m_max + 1);
    Ok(current)
}

/// At integer `μ`, `D ∓ 2` factors into half-period data: `D − 2 = 4a'b`
/// and `D + 2 = 4ab'`. Each factor has simple roots, so double roots are
/// resolved to full precision instead of the `√ε` of an extremum search.
fn refine_integer(roots: Vec<f64>, integer_sign: f64, p: &LameParams, tol: f64) -> Result<Vec<f64>> {
    let m = &p.modulus;
    let g = coupling(p);
    let factor = |which: usize, h: f64| -> Result<f64> {
        let [a, da, b, db] = integrate_span(h, g, m, m.big_k, LOCAL_TOL)?;
        Ok(match (integer_sign > 0.0, which) {
            (true, 0) => da,
            (true, _) => b,
            (false, 0) => a,
            (false, _) => db,
        })
    };
    let mut out = Vec::with_capacity(roots.len());
    for &h in &roots {
        let delta = 1e-5 * (1.0 + h.abs());
        let mut best: Option<f64> = None;
        for which in 0..2 {
            let (lo, hi) = (h - delta, h + delta);
            let (flo, fhi) = (factor(which, lo)?, factor(which, hi)?);
            if flo.signum() == fhi.signum() {
                continue;
            }
            let mut f = |x: f64| factor(which, x);
            let r = brent(&mut f, lo, hi, flo, fhi, tol.min(1e-13 * (1.0 + h.abs())))?;
            // a double root appears twice in the list; take each factor once
            let taken = out.contains(&r);
            if !taken && best.is_none_or(|b| (r - h).abs() < (b - h).abs()) {
                best = Some(r);
            }
        }
        out.push(best.unwrap_or(h));
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}
