//! Special functions shared by the physics modules: log-gamma, beta,
//! associated Laguerre and Gegenbauer polynomials, spherical Bessel
//! functions of the first kind, and closed-form tail integrals of
//! `x^s · j_l(x)²` used by the momentum-space tail models.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpecFunError {
    #[error("ln_gamma requires x > 0, got {x}")]
    GammaDomain { x: f64 },
    #[error("spherical_bessel_j supports 0 <= l <= {max}, got {l}")]
    BesselOrder { l: i64, max: u32 },
    #[error("spherical_bessel_j requires x >= 0, got {x}")]
    BesselArgument { x: f64 },
    #[error("gegenbauer requires eta > 0, got {eta}")]
    GegenbauerDomain { eta: f64 },
    #[error("assoc_laguerre requires alpha > -1 and x >= 0, got alpha={alpha}, x={x}")]
    LaguerreDomain { alpha: f64, x: f64 },
}

/// Highest spherical Bessel order supported by this crate.
pub const MAX_BESSEL_ORDER: u32 = 8;

// Lanczos approximation, g = 607/128, 15 terms (Godfrey coefficients).
// Relative error below 1e-14 over the positive real axis.
const LANCZOS_G: f64 = 4.742_187_5;
const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_188_6e-5,
    4.652_362_892_704_857_7e-5,
    -9.837_447_530_487_957e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_048_7e-4,
    2.174_396_181_152_126_4e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_274e-5,
    -2.619_083_840_158_141e-5,
    3.689_918_265_953_162e-6,
];

/// Natural log of the Gamma function for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64, SpecFunError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::GammaDomain { x });
    }
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate regime.
        let pi = std::f64::consts::PI;
        return Ok((pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + sum.ln())
}

/// Euler beta function `B(a, b) = Γ(a)Γ(b)/Γ(a+b)` via log-gamma.
pub fn beta(a: f64, b: f64) -> Result<f64, SpecFunError> {
    Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
}

/// ln(n!) for integer n >= 0.
pub fn ln_factorial(n: u32) -> f64 {
    ln_gamma(n as f64 + 1.0).expect("n+1 > 0")
}

/// Associated Laguerre polynomial `L_k^{(α)}(x)` by forward recurrence.
pub fn assoc_laguerre(k: u32, alpha: f64, x: f64) -> Result<f64, SpecFunError> {
    if !(alpha > -1.0) || !(x >= 0.0) {
        return Err(SpecFunError::LaguerreDomain { alpha, x });
    }
    let mut lm1 = 1.0;
    if k == 0 {
        return Ok(lm1);
    }
    let mut l = 1.0 + alpha - x;
    for m in 1..k {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + alpha - x) * l - (mf + alpha) * lm1) / (mf + 1.0);
        lm1 = l;
        l = next;
    }
    Ok(l)
}

/// Gegenbauer (ultraspherical) polynomial `C_k^{η}(t)` by three-term recurrence.
pub fn gegenbauer(k: u32, eta: f64, t: f64) -> Result<f64, SpecFunError> {
    if !(eta > 0.0) {
        return Err(SpecFunError::GegenbauerDomain { eta });
    }
    let mut cm1 = 1.0;
    if k == 0 {
        return Ok(cm1);
    }
    let mut c = 2.0 * eta * t;
    for m in 2..=k {
        let mf = m as f64;
        let next = (2.0 * t * (mf + eta - 1.0) * c - (mf + 2.0 * eta - 2.0) * cm1) / mf;
        cm1 = c;
        c = next;
    }
    Ok(c)
}

/// Spherical Bessel function of the first kind `j_l(x)` for `0 <= l <= 8`.
///
/// Upward recurrence where it is stable (`x >= l`), Maclaurin series for
/// small arguments, downward (Miller) recurrence in between.
pub fn spherical_bessel_j(l: u32, x: f64) -> Result<f64, SpecFunError> {
    if l > MAX_BESSEL_ORDER {
        return Err(SpecFunError::BesselOrder { l: l as i64, max: MAX_BESSEL_ORDER });
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(SpecFunError::BesselArgument { x });
    }
    Ok(sph_jl_unchecked(l, x))
}

/// `j_l(x)` without the domain checks, for hot inner loops.
pub(crate) fn sph_jl_unchecked(l: u32, x: f64) -> f64 {
    debug_assert!(l <= MAX_BESSEL_ORDER && x >= 0.0);
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if x < 0.6 {
        return sph_jl_series(l, x);
    }
    if (l as f64) < x + 1.0 {
        return sph_jl_upward(l, x);
    }
    sph_jl_downward(l, x)
}

fn sph_jl_series(l: u32, x: f64) -> f64 {
    // j_l(x) = x^l / (2l+1)!! * sum_m (-x²/2)^m / (m! (2l+3)(2l+5)...(2l+2m+1))
    let mut double_fact = 1.0;
    for i in 1..=l {
        double_fact *= (2 * i + 1) as f64;
    }
    let x2 = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..60 {
        term *= x2 / (m as f64 * (2 * l as u64 + 2 * m as u64 + 1) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    x.powi(l as i32) / double_fact * sum
}

fn sph_jl_upward(l: u32, x: f64) -> f64 {
    let j0 = x.sin() / x;
    if l == 0 {
        return j0;
    }
    let j1 = x.sin() / (x * x) - x.cos() / x;
    if l == 1 {
        return j1;
    }
    let mut jm1 = j0;
    let mut j = j1;
    for k in 1..l {
        let next = (2 * k + 1) as f64 / x * j - jm1;
        jm1 = j;
        j = next;
    }
    j
}

fn sph_jl_downward(l: u32, x: f64) -> f64 {
    let start = l as usize + 24;
    let mut fp1 = 0.0;
    let mut f = 1e-300;
    let mut target = 0.0;
    let mut f0 = 0.0;
    let mut f1 = 0.0;
    for k in (0..=start).rev() {
        let fm1 = (2 * k + 3) as f64 / x * f - fp1;
        if k == l as usize {
            target = fm1;
        }
        if k == 1 {
            f1 = fm1;
        }
        if k == 0 {
            f0 = fm1;
            break;
        }
        fp1 = f;
        f = fm1;
        // Rescale to dodge overflow while far above the target order.
        if f.abs() > 1e250 {
            f *= 1e-250;
            fp1 *= 1e-250;
            if k <= l as usize {
                target *= 1e-250;
            }
            if k <= 1 {
                f1 *= 1e-250;
            }
        }
    }
    let j0 = x.sin() / x;
    let j1 = x.sin() / (x * x) - x.cos() / x;
    let scale = if f0.abs() >= f1.abs() { j0 / f0 } else { j1 / f1 };
    target * scale
}

// ──────────────────────────────────────────────────────────────────────
// Trigonometric representation of j_l and tail integrals of x^s j_l(x)²
// ──────────────────────────────────────────────────────────────────────

/// Coefficients (powers of 1/x) of `x·j_l(x) = A(1/x)·sin x + B(1/x)·cos x`.
///
/// Exact integer-valued coefficients from the upward order recurrence;
/// degree grows with l, so entries stay well inside the f64 integer range
/// for l <= 8.
pub(crate) fn riccati_trig_coeffs(l: u32) -> (Vec<f64>, Vec<f64>) {
    let mut a_prev = vec![1.0]; // l = 0: sin x
    let mut b_prev = vec![0.0];
    if l == 0 {
        return (a_prev, b_prev);
    }
    let mut a = vec![0.0, 1.0]; // l = 1: sin x / x − cos x
    let mut b = vec![-1.0, 0.0];
    for cur in 1..l {
        let factor = (2 * cur + 1) as f64;
        let next_len = cur as usize + 2;
        let mut a_next = vec![0.0; next_len];
        let mut b_next = vec![0.0; next_len];
        for (d, &coef) in a.iter().enumerate() {
            a_next[d + 1] += factor * coef;
        }
        for (d, &coef) in b.iter().enumerate() {
            b_next[d + 1] += factor * coef;
        }
        for (d, &coef) in a_prev.iter().enumerate() {
            a_next[d] -= coef;
        }
        for (d, &coef) in b_prev.iter().enumerate() {
            b_next[d] -= coef;
        }
        a_prev = std::mem::replace(&mut a, a_next);
        b_prev = std::mem::replace(&mut b, b_next);
    }
    (a, b)
}

/// Tail integrals `∫_{x0}^∞ x^{-j} dx`, `∫ x^{-j} sin 2x dx`, `∫ x^{-j} cos 2x dx`
/// for j = 2..=j_max, evaluated to near machine precision for x0 ≳ 15.
///
/// For j below the asymptotic knee (j < 2·x0) the coupled
/// integration-by-parts cascade in the oscillation is unwound from a deep
/// seed; above the knee the power factor dominates and the expansion in
/// 2x0/j applies instead.
pub(crate) struct TrigTails {
    x0: f64,
    plain: Vec<f64>,
    sin2: Vec<f64>,
    cos2: Vec<f64>,
}

impl TrigTails {
    /// Minimum supported lower limit; below this the marginal zone between
    /// the two expansions would erode the low-j accuracy.
    pub const MIN_X0: f64 = 25.0;

    pub fn new(x0: f64, j_max: usize) -> Self {
        assert!(
            x0 >= Self::MIN_X0,
            "trig tails need x0 >= {}, got {x0}",
            Self::MIN_X0
        );
        let j_max = j_max.max(2);
        let mut plain = vec![0.0; j_max + 1];
        for (j, slot) in plain.iter_mut().enumerate().skip(2) {
            *slot = x0.powi(1 - j as i32) / (j as f64 - 1.0);
        }
        let mut sin2 = vec![0.0; j_max + 1];
        let mut cos2 = vec![0.0; j_max + 1];
        let s = (2.0 * x0).sin();
        let c = (2.0 * x0).cos();
        // The integration-by-parts cascade in the trig factor damps relative
        // errors going down in j as long as j stays below 2·x0; seed it well
        // below that knee and as deep as possible so that the seed error is
        // damped away by the time the requested orders are reached.
        let knee = (2.0 * x0).floor() as usize;
        for j in (knee - 1)..=j_max {
            // Orders at or beyond the knee (tiny in magnitude): power-side
            // expansion directly.
            let (ts, tc) = Self::power_side(x0, j, s, c);
            sin2[j] = ts;
            cos2[j] = tc;
        }
        let seed = (j_max + 48).min(knee - 1);
        let (mut ts_next, mut tc_next) = Self::power_side(x0, seed + 1, s, c);
        for j in (2..=seed).rev() {
            let inv_pow = x0.powi(-(j as i32));
            let tc = -s * 0.5 * inv_pow + 0.5 * j as f64 * ts_next;
            let ts = c * 0.5 * inv_pow - 0.5 * j as f64 * tc_next;
            if j <= j_max {
                sin2[j] = ts;
                cos2[j] = tc;
            }
            ts_next = ts;
            tc_next = tc;
        }
        Self { x0, plain, sin2, cos2 }
    }

    /// Power-side expansion, useful for j ≳ 2·x0:
    /// T^s_j = x0^{1-j}[ s/(j-1) + 2x0·c/((j-1)(j-2)) − (2x0)²·s/((j-1)(j-2)(j-3)) − ... ]
    /// T^c_j = x0^{1-j}[ c/(j-1) − 2x0·s/((j-1)(j-2)) − (2x0)²·c/(...) + ... ]
    ///
    /// Asymptotic; truncated at the smallest term.
    fn power_side(x0: f64, j: usize, s: f64, c: f64) -> (f64, f64) {
        let base = x0.powi(1 - j as i32);
        let mut ts = 0.0;
        let mut tc = 0.0;
        let mut coef = 1.0 / (j as f64 - 1.0);
        let mut prev_mag = f64::INFINITY;
        for step in 0..64usize {
            let (fs, fc) = match step % 4 {
                0 => (s, c),
                1 => (c, -s),
                2 => (-s, -c),
                _ => (-c, s),
            };
            let ds = coef * fs;
            let dc = coef * fc;
            let mag = coef.abs();
            if mag >= prev_mag {
                break; // smallest term reached; stop before divergence
            }
            ts += ds;
            tc += dc;
            prev_mag = mag;
            let denom = j as f64 - 2.0 - step as f64;
            if denom <= 1.0 {
                break;
            }
            coef *= 2.0 * x0 / denom;
        }
        (base * ts, base * tc)
    }

    pub fn plain(&self, j: usize) -> f64 {
        self.plain[j]
    }
    pub fn sin2(&self, j: usize) -> f64 {
        self.sin2[j]
    }
    pub fn cos2(&self, j: usize) -> f64 {
        self.cos2[j]
    }
    pub fn x0(&self) -> f64 {
        self.x0
    }
}

/// `∫_{x0}^∞ x^s · j_l(x)² dx` for integer `s <= 0` (divergent for s >= 1).
///
/// Uses the exact trigonometric form of j_l: `x² j_l(x)²` splits into a
/// smooth power part plus sin(2x)/cos(2x) parts with polynomial
/// coefficients in 1/x.
pub(crate) fn bessel_sq_tail(l: u32, s: i32, tails: &TrigTails) -> Option<f64> {
    if s >= 1 {
        return None;
    }
    let (a, b) = riccati_trig_coeffs(l);
    let deg = a.len() - 1;
    // x² j_l² = P(w) + Q(w) cos 2x + R(w) sin 2x,  w = 1/x
    let mut p = vec![0.0; 2 * deg + 1];
    let mut q = vec![0.0; 2 * deg + 1];
    let mut r = vec![0.0; 2 * deg + 1];
    for (i, &ai) in a.iter().enumerate() {
        for (k, &ak) in a.iter().enumerate() {
            p[i + k] += 0.5 * ai * ak;
            q[i + k] -= 0.5 * ai * ak;
        }
    }
    for (i, &bi) in b.iter().enumerate() {
        for (k, &bk) in b.iter().enumerate() {
            p[i + k] += 0.5 * bi * bk;
            q[i + k] += 0.5 * bi * bk;
        }
    }
    for (i, &ai) in a.iter().enumerate() {
        for (k, &bk) in b.iter().enumerate() {
            r[i + k] += ai * bk;
        }
    }
    let mut total = 0.0;
    for d in 0..=(2 * deg) {
        let j = (2 + d as i32 - s) as usize;
        total += p[d] * tails.plain(j) + q[d] * tails.cos2(j) + r[d] * tails.sin2(j);
    }
    Some(total)
}

/// Smallest j index needed by [`bessel_sq_tail`] for order `l`, exponent `s`.
pub(crate) fn bessel_sq_tail_jmax(l: u32, s_min: i32) -> usize {
    (2 + 2 * l as i32 - s_min) as usize
}
