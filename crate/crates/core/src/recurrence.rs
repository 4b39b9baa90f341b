//! Three-term recursions for the expansion coefficients and their
//! minimal (recessive) solutions.
//!
//! Every recursion has the shape
//!
//! ```text
//! sub_n c_{n-1} + (diag_n - h) c_n + sup_n c_{n+1} = 0
//! ```
//!
//! and [`row`] returns `(sub_n, diag_n, sup_n)` with `diag_n` excluding
//! the `-h`, so rows are reusable across spectral scans.

use crate::elliptic::Modulus;
use crate::error::{domain, LameError, Result};

/// Parameters shared by all problems: `ν`, optional Floquet exponent `μ`,
/// the modulus and an optional spectral parameter `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct LameParams {
    pub nu: f64,
    pub mu: Option<f64>,
    pub modulus: Modulus,
    pub h: Option<f64>,
}

/// Values of `ν` within this distance of a negative integer or negative
/// half-integer are snapped onto it.
pub const SNAP_TOL: f64 = 1e-12;

impl LameParams {
    pub fn new(nu: f64, k: f64) -> Result<Self> {
        if !nu.is_finite() {
            return domain(format!("ν = {nu} is not finite"));
        }
        Ok(LameParams {
            nu,
            mu: None,
            modulus: Modulus::new(k)?,
            h: None,
        })
    }

    pub fn with_modulus(nu: f64, modulus: Modulus) -> Self {
        LameParams {
            nu,
            mu: None,
            modulus,
            h: None,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = Some(h);
        self
    }

    pub fn k(&self) -> f64 {
        self.modulus.k
    }

    /// `ν` snapped onto a nearby negative integer or half-integer, so that
    /// vanishing couplings vanish exactly.
    pub fn nu_snapped(&self) -> f64 {
        snap_nu(self.nu)
    }
}

pub fn snap_nu(nu: f64) -> f64 {
    let twice = (2.0 * nu).round();
    if twice < 0.0 && (nu - twice / 2.0).abs() < SNAP_TOL {
        twice / 2.0
    } else {
        nu
    }
}

/// Which recursion to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecurrenceKind {
    /// `ρ_n, σ_n, τ_{n+1}`: Fourier coefficients of a Floquet solution.
    FloquetPlain,
    /// `τ_n, σ_n, ρ_{n+1}`: the adjoint recursion.
    FloquetAdjoint,
    /// `α_n, β⁽¹⁾_n, γ_{n+1}`: first kind, `c_n`.
    W1Plain,
    /// `δ_n, ε⁽¹⁾_n, δ_{n+1}`: first kind, `a_n`.
    W1SelfAdjoint,
    /// `α_{n+1}, β⁽²⁾_n, γ_{n+1}`: second kind, `d_n`.
    W2Plain,
    /// `δ_n, ε⁽²⁾_n, δ_{n+1}`: second kind, `b_n`.
    W2SelfAdjoint,
}

impl RecurrenceKind {
    pub fn is_floquet(self) -> bool {
        matches!(self, RecurrenceKind::FloquetPlain | RecurrenceKind::FloquetAdjoint)
    }

    pub fn is_self_adjoint(self) -> bool {
        matches!(self, RecurrenceKind::W1SelfAdjoint | RecurrenceKind::W2SelfAdjoint)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceRow {
    pub sub: f64,
    pub diag: f64,
    pub sup: f64,
}

// The individual coefficient families, in `ν, μ, k`.

pub fn rho(n: f64, mu: f64, nu: f64, k2: f64) -> f64 {
    -0.25 * k2 * (2.0 * n - 1.0 + mu + nu) * (2.0 * n - 2.0 + mu - nu)
}

pub fn sigma(n: f64, mu: f64, nu: f64, k2: f64) -> f64 {
    0.5 * k2 * nu * (nu + 1.0) + (1.0 - 0.5 * k2) * (2.0 * n + mu).powi(2)
}

pub fn tau(n: f64, mu: f64, nu: f64, k2: f64) -> f64 {
    -0.25 * k2 * (2.0 * n + mu + nu) * (2.0 * n - 1.0 + mu - nu)
}

pub fn alpha(n: f64, nu: f64, k2: f64) -> f64 {
    -0.5 * k2 * (n + nu) * (2.0 * n - 1.0)
}

pub fn beta(j: u8, n: f64, nu: f64, k2: f64) -> f64 {
    let shift = if j == 1 { 1.0 } else { 2.0 };
    0.5 * k2 * nu * (nu + 1.0) + (1.0 - 0.5 * k2) * (2.0 * n + nu + shift).powi(2)
}

pub fn gamma(n: f64, nu: f64, k2: f64) -> f64 {
    -0.5 * k2 * (2.0 * n + 2.0 * nu + 1.0) * n
}

pub fn delta(n: f64, nu: f64, k2: f64) -> f64 {
    -0.5 * k2 * n * (2.0 * n + 2.0 * nu + 1.0)
}

/// `ε⁽ʲ⁾_n`; the two kinds differ only in the sign of the `k'` term.
pub fn epsilon(j: u8, n: f64, nu: f64, m: &Modulus) -> f64 {
    let k2 = m.k2();
    let x = 2.0 * n + 1.5 + nu;
    let sign = if j == 1 { -1.0 } else { 1.0 };
    0.5 * k2 * nu * (nu + 1.0) + sign * m.kprime * x + (1.0 - 0.5 * k2) * (0.25 + x * x)
}

/// One row of the requested recursion at index `n`.
///
/// Wangerin kinds are defined for `n ≥ 0` (row 0 has `sub = 0`); Floquet
/// kinds for all integers and need `μ` in `p`.
pub fn row(kind: RecurrenceKind, n: i64, p: &LameParams) -> Result<RecurrenceRow> {
    let nu = p.nu_snapped();
    let k2 = p.modulus.k2();
    let x = n as f64;
    if !kind.is_floquet() && n < 0 {
        return domain(format!("row index {n} < 0 for {kind:?}"));
    }
    let row = match kind {
        RecurrenceKind::FloquetPlain | RecurrenceKind::FloquetAdjoint => {
            let mu = p
                .mu
                .ok_or_else(|| LameError::Domain("Floquet recursion needs μ".into()))?;
            let (r0, t0) = (rho(x, mu, nu, k2), tau(x, mu, nu, k2));
            let (r1, t1) = (rho(x + 1.0, mu, nu, k2), tau(x + 1.0, mu, nu, k2));
            let diag = sigma(x, mu, nu, k2);
            if kind == RecurrenceKind::FloquetPlain {
                RecurrenceRow { sub: r0, diag, sup: t1 }
            } else {
                RecurrenceRow { sub: t0, diag, sup: r1 }
            }
        }
        RecurrenceKind::W1Plain => RecurrenceRow {
            sub: if n == 0 { 0.0 } else { alpha(x, nu, k2) },
            diag: beta(1, x, nu, k2),
            sup: gamma(x + 1.0, nu, k2),
        },
        RecurrenceKind::W2Plain => RecurrenceRow {
            sub: if n == 0 { 0.0 } else { alpha(x + 1.0, nu, k2) },
            diag: beta(2, x, nu, k2),
            sup: gamma(x + 1.0, nu, k2),
        },
        RecurrenceKind::W1SelfAdjoint | RecurrenceKind::W2SelfAdjoint => {
            let j = if kind == RecurrenceKind::W1SelfAdjoint { 1 } else { 2 };
            RecurrenceRow {
                sub: delta(x, nu, k2),
                diag: epsilon(j, x, nu, &p.modulus),
                sup: delta(x + 1.0, nu, k2),
            }
        }
    };
    Ok(row)
}

/// Residual of row `n` for the coefficient list `c` (indices from 0).
pub fn row_residual(kind: RecurrenceKind, n: usize, p: &LameParams, h: f64, c: &[f64]) -> Result<f64> {
    let r = row(kind, n as i64, p)?;
    let prev = if n == 0 { 0.0 } else { c[n - 1] };
    let next = c.get(n + 1).copied().unwrap_or(0.0);
    Ok(r.sub * prev + (r.diag - h) * c[n] + r.sup * next)
}

/// Backward sweep buffer: enough steps for the dominant solution to be
/// suppressed by `η₁^B < 1e-18`.
pub fn backward_buffer(m: &Modulus) -> usize {
    (18.0 / m.eta1.log10().abs()).ceil() as usize + 20
}

const RESCALE_EVERY: usize = 50;

/// Minimal solution of a recursion for fixed `h`, indices `0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalSolution {
    /// `c_0..c_{n_max}`, normalized so that `max |c_n| = 1`. Far tails
    /// may underflow to zero.
    pub coeffs: Vec<f64>,
    /// `c_{n+1}/c_n` for `n = 0..n_max`, free of underflow.
    pub ratios: Vec<f64>,
}

/// Computes the recessive solution by backward recurrence from
/// `n_max + B` with seed `(…, 0, 1)`.
///
/// Rows `1..=n_max` are satisfied; row 0 is the eigenvalue condition and
/// holds only when `h` is an eigenvalue. If a row's `sub` coefficient
/// vanishes the recursion decouples there and the coefficients below are
/// continued from zero.
pub fn minimal_solution(kind: RecurrenceKind, p: &LameParams, n_max: usize) -> Result<MinimalSolution> {
    let h = p
        .h
        .ok_or_else(|| LameError::Domain("minimal_solution needs h".into()))?;
    if !h.is_finite() {
        return domain(format!("h = {h} is not finite"));
    }
    if n_max < 10 {
        return domain(format!("n_max = {n_max} < 10"));
    }
    let top = n_max + backward_buffer(&p.modulus);
    // Work with ratios r_n = c_n / c_{n-1} as long as possible, then
    // rebuild magnitudes from the bottom.
    let mut c = vec![0.0; top + 2];
    c[top] = 1.0;
    // log-scale bookkeeping: rescale blocks so nothing overflows.
    for n in (1..=top).rev() {
        let r = row(kind, n as i64, p)?;
        let val = if r.sub == 0.0 {
            0.0
        } else {
            -((r.diag - h) * c[n] + r.sup * c[n + 1]) / r.sub
        };
        c[n - 1] = val;
        if (top - n) % RESCALE_EVERY == 0 || !val.is_finite() || val.abs() > 1e250 {
            let s = c[n - 1].abs().max(c[n].abs());
            if s > 0.0 && s.is_finite() && (s > 1e100 || s < 1e-100) {
                for v in c[n - 1..].iter_mut() {
                    *v /= s;
                }
            }
        }
    }
    let mut ratios = Vec::with_capacity(n_max);
    for n in 0..n_max {
        ratios.push(if c[n] != 0.0 { c[n + 1] / c[n] } else { f64::INFINITY });
    }
    c.truncate(n_max + 1);
    let max = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max > 0.0 {
        let sign = c.iter().find(|v| **v != 0.0).map(|v| v.signum()).unwrap_or(1.0);
        for v in c.iter_mut() {
            *v *= sign / max;
        }
    }
    Ok(MinimalSolution { coeffs: c, ratios })
}

/// Ratio `c_{n+1}/c_n` of the minimal solution at large index `n_far`,
/// averaged geometrically over `window` steps ending at `n_far`.
///
/// Only ratios are propagated, so indices far beyond the underflow
/// threshold of the coefficients themselves are reachable.
pub fn tail_ratio(kind: RecurrenceKind, p: &LameParams, n_far: usize, window: usize) -> Result<f64> {
    let h = p
        .h
        .ok_or_else(|| LameError::Domain("tail_ratio needs h".into()))?;
    if window == 0 || window > n_far {
        return domain(format!("window {window} invalid for n_far {n_far}"));
    }
    let top = n_far + backward_buffer(&p.modulus);
    // q_n = c_n / c_{n+1}, from sub c_{n-1} = -(diag - h) c_n - sup c_{n+1}:
    // q_{n-1} = -((diag - h) q_n + sup) / sub · ... rewritten as ratio
    // s_n = c_{n}/c_{n-1} = -sub / ((diag - h) + sup s_{n+1}).
    let mut s_next = 0.0;
    let mut log_sum = 0.0;
    let mut sign = 1.0;
    for n in (1..=top).rev() {
        let r = row(kind, n as i64, p)?;
        let s = -r.sub / ((r.diag - h) + r.sup * s_next);
        // s = c_n / c_{n-1}; window covers ratios c_{m+1}/c_m, m = n_far-window..n_far-1
        if n <= n_far && n > n_far - window {
            log_sum += s.abs().ln();
            sign *= s.signum();
        }
        s_next = s;
        if n <= n_far - window {
            break;
        }
    }
    Ok(sign.signum() * (log_sum / window as f64).exp())
}

/// Outcome of a trailing-ratio estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecessiveRatio {
    Ratio(f64),
    /// The trailing window is exactly zero: a finite (polynomial or
    /// algebraic) coefficient sequence.
    Terminating,
}

/// Geometric-mean ratio of consecutive coefficients over the trailing
/// `window` entries of `c`.
pub fn recessive_ratio(c: &[f64], window: usize) -> Result<RecessiveRatio> {
    if window == 0 || c.len() < window + 2 {
        return domain(format!("need at least window + 2 = {} coefficients", window + 2));
    }
    let tail = &c[c.len() - window - 1..];
    if tail.iter().all(|v| *v == 0.0) {
        return Ok(RecessiveRatio::Terminating);
    }
    if tail.iter().any(|v| *v == 0.0) {
        return domain("trailing window mixes zero and nonzero coefficients");
    }
    let first = tail[0];
    let last = tail[window];
    let mean = (last / first).abs().ln() / window as f64;
    let sign = (tail[window] / tail[window - 1]).signum();
    Ok(RecessiveRatio::Ratio(sign * mean.exp()))
}
