//! Jacobi elliptic functions, complete elliptic integrals and the η-map.
//!
//! Complete integrals come from the arithmetic–geometric mean; the real
//! Jacobi functions from the descending Landen (AGM) scheme. Complex
//! arguments in the strip `0 ≤ Im z < K'` are assembled from real values
//! at moduli `k` and `k'` with the addition theorem.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Descending Landen ladder stops once `c_n / a_n` is below this.
const LANDEN_EPS: f64 = 1e-15;
const MAX_LADDER: usize = 64;

/// Precomputed AGM ladder for a modulus. Shared by `K` and by the
/// amplitude computation.
#[derive(Debug, Clone, PartialEq)]
struct Ladder {
    /// `c_n / a_n` for n = 1..N (index 0 unused).
    ratios: Vec<f64>,
    /// `2^N a_N`.
    scale: f64,
}

impl Ladder {
    fn new(k: f64, kprime: f64) -> Self {
        let mut a = 1.0f64;
        let mut b = kprime;
        let mut ratios = vec![k];
        let mut scale = 1.0;
        for _ in 0..MAX_LADDER {
            if ratios.last().copied().unwrap_or(0.0) < LANDEN_EPS {
                break;
            }
            let an = 0.5 * (a + b);
            let c = 0.5 * (a - b);
            b = (a * b).sqrt();
            a = an;
            ratios.push(c / a);
            scale *= 2.0;
        }
        Ladder { ratios, scale: scale * a }
    }

    /// `π / (2 · AGM(1, k'))`.
    fn complete(&self) -> f64 {
        // scale = 2^N a_N, so a_N = AGM(1, k') up to the last halving.
        PI * (self.scale / (1u64 << (self.ratios.len() - 1)) as f64).recip() / 2.0
    }

    fn amplitude(&self, x: f64) -> f64 {
        let mut phi = self.scale * x;
        for n in (1..self.ratios.len()).rev() {
            phi = 0.5 * (phi + (self.ratios[n] * phi.sin()).asin());
        }
        phi
    }
}

/// All constants derived from the modulus `k ∈ (0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Modulus {
    pub k: f64,
    pub kprime: f64,
    /// `K(k)`.
    pub big_k: f64,
    /// `K'(k) = K(k')`.
    pub big_kprime: f64,
    /// `arccosh(1/k)`.
    pub l: f64,
    /// `(1 − k')/(1 + k')`.
    pub eta1: f64,
    /// `(1 + k')/(1 − k')`.
    pub eta2: f64,
    ladder: Ladder,
    ladder_prime: Ladder,
}

/// Real-argument Jacobi functions and amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
    pub am: f64,
}

/// Complex-argument values in the strip, plus the continuous amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexJacobi {
    pub sn: Complex64,
    pub cn: Complex64,
    pub dn: Complex64,
    /// Amplitude continued from the real axis along a vertical line.
    pub am: Complex64,
}

/// Builds all constants for `k`. Fails outside `(0, 1)`.
pub fn modulus_from_k(k: f64) -> Result<Modulus> {
    if !(k > 0.0 && k < 1.0) {
        return domain(format!("modulus k = {k} outside (0, 1)"));
    }
    let kprime = ((1.0 - k) * (1.0 + k)).sqrt();
    let ladder = Ladder::new(k, kprime);
    let ladder_prime = Ladder::new(kprime, k);
    // k² / (1 + k')² avoids cancellation in 1 − k' for small k.
    let eta1 = (k / (1.0 + kprime)).powi(2);
    let eta2 = ((1.0 + kprime) / k).powi(2);
    Ok(Modulus {
        k,
        kprime,
        big_k: ladder.complete(),
        big_kprime: ladder_prime.complete(),
        l: ((1.0 + kprime) / k).ln(),
        eta1,
        eta2,
        ladder,
        ladder_prime,
    })
}

impl Modulus {
    pub fn new(k: f64) -> Result<Self> {
        modulus_from_k(k)
    }

    pub fn k2(&self) -> f64 {
        self.k * self.k
    }

    /// Amplitude `am(x, k)`, exact quasi-periodicity `am(x + 2K) = am(x) + π`.
    pub fn am(&self, x: f64) -> f64 {
        let period = 2.0 * self.big_k;
        let shift = (x / period).round();
        let r = x - shift * period;
        self.ladder.amplitude(r) + shift * PI
    }

    fn jacobi_prime(&self, y: f64) -> JacobiTriple {
        let period = 2.0 * self.big_kprime;
        let shift = (y / period).round();
        let r = y - shift * period;
        let am = self.ladder_prime.amplitude(r) + shift * PI;
        triple(am, self.kprime)
    }
}

fn triple(am: f64, k: f64) -> JacobiTriple {
    let (sn, cn) = am.sin_cos();
    let dn = (1.0 - k * k * sn * sn).sqrt();
    JacobiTriple { sn, cn, dn, am }
}

/// `sn, cn, dn, am` at real `x`. Non-finite input propagates NaN.
pub fn jacobi(x: f64, m: &Modulus) -> JacobiTriple {
    triple(m.am(x), m.k)
}

/// `sn, cn, dn` at `z = x + iy` with `0 ≤ y < K'`.
pub fn jacobi_complex(x: f64, y: f64, m: &Modulus) -> Result<ComplexJacobi> {
    if !(0.0..m.big_kprime).contains(&y) {
        return domain(format!("Im z = {y} outside [0, K') with K' = {}", m.big_kprime));
    }
    let r = jacobi(x, m);
    if y == 0.0 {
        return Ok(ComplexJacobi {
            sn: r.sn.into(),
            cn: r.cn.into(),
            dn: r.dn.into(),
            am: r.am.into(),
        });
    }
    let i = m.jacobi_prime(y);
    let (s, c, d) = (r.sn, r.cn, r.dn);
    let (s1, c1, d1) = (i.sn, i.cn, i.dn);
    let k2 = m.k2();
    let den = c1 * c1 + k2 * s * s * s1 * s1;
    let sn = Complex64::new(s * d1, c * d * s1 * c1) / den;
    let cn = Complex64::new(c * c1, -s * d * s1 * d1) / den;
    let dn = Complex64::new(d * c1 * d1, -k2 * s * c * s1) / den;
    // e^{i am} = cn + i sn; pick the branch nearest the real amplitude,
    // the vertical path never moves Re am by π/2 or more.
    let log = (cn + Complex64::i() * sn).ln();
    let mut am = Complex64::new(log.im, -log.re);
    let turns = ((r.am - am.re) / (2.0 * PI)).round();
    am.re += turns * 2.0 * PI;
    Ok(ComplexJacobi { sn, cn, dn, am })
}

/// `η = (1 − dn u)/(1 + dn u)` for `z = u + iK'`, `0 ≤ u ≤ 2K`.
pub fn eta_on_segment(u: f64, m: &Modulus) -> Result<f64> {
    let two_k = 2.0 * m.big_k;
    if !(0.0..=two_k).contains(&u) {
        return domain(format!("u = {u} outside [0, 2K]"));
    }
    let j = jacobi(u, m);
    Ok((m.k * j.sn / (1.0 + j.dn)).powi(2))
}

/// Inverse of [`eta_on_segment`] on `(0, K]`.
pub fn u_from_eta(eta: f64, m: &Modulus) -> Result<f64> {
    if !(0.0..=m.eta1).contains(&eta) {
        return domain(format!("η = {eta} outside [0, η₁]"));
    }
    // dn u = (1 − η)/(1 + η), sn² = (1 − dn²)/k².
    let dn = (1.0 - eta) / (1.0 + eta);
    let sn2 = ((1.0 - dn) * (1.0 + dn) / m.k2()).clamp(0.0, 1.0);
    let phi = sn2.sqrt().asin();
    Ok(incomplete_first_kind(phi, m))
}

/// `F(φ, k)` for `φ ∈ [0, π/2]`, by inverting the amplitude.
pub fn incomplete_first_kind(phi: f64, m: &Modulus) -> f64 {
    let (mut lo, mut hi) = (0.0, m.big_k);
    if phi >= FRAC_PI_2 {
        return m.big_k;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if m.am(mid) < phi {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `η = exp(−2i(π/2 − am x))` on the real axis.
pub fn eta_on_real_axis(x: f64, m: &Modulus) -> Complex64 {
    let t = FRAC_PI_2 - m.am(x);
    Complex64::from_polar(1.0, -2.0 * t)
}
