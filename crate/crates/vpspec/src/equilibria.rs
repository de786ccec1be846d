//! Radial equilibria `μ(e)`, their moments, and the survival threshold `κ₀`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
// std's inherent float methods shadow these in test builds
#[allow(unused_imports)]
use num_traits::Float;

use crate::quad::{integrate, integrate_to_infinity, Tol};
use crate::{Error, Result};

/// Closed-form equilibrium families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `μ(e) = A·exp(−βe)`
    Gaussian { amplitude: f64, beta: f64 },
    /// `μ(e) = A·(E_max − e)^N₁` on `e ≤ E_max`, zero beyond.
    CompactPolynomial { amplitude: f64, e_max: f64, order: i32 },
    /// `μ(e) = A·(1 + e)^(−N₁)`
    PowerLaw { amplitude: f64, order: i32 },
}

/// A radial equilibrium together with its regularity metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumProfile {
    pub family: Family,
    /// `N₀`: smoothness of `μ(½|v|²)`.
    pub smoothness_order: i32,
    /// `N₁`: decay order at infinity, or vanishing order at `Υ`.
    pub decay_order: i32,
}

// Stand-in for "infinitely many" derivatives or decay orders.
const SMOOTH: i32 = 32;

/// Level below which `μ(½u²)` is treated as zero on unbounded support.
pub const TAIL_LEVEL: f64 = 1e-16;

impl EquilibriumProfile {
    pub fn gaussian(amplitude: f64, beta: f64) -> Self {
        EquilibriumProfile {
            family: Family::Gaussian { amplitude, beta },
            smoothness_order: SMOOTH,
            decay_order: SMOOTH,
        }
    }

    /// The compact family is `C^{N₁}` across `|v| = Υ` in the sense used for time
    /// decay of the kernel, so `N₀` is set to `N₁`.
    pub fn compact(amplitude: f64, e_max: f64, order: i32) -> Self {
        EquilibriumProfile {
            family: Family::CompactPolynomial { amplitude, e_max, order },
            smoothness_order: order,
            decay_order: order,
        }
    }

    pub fn power_law(amplitude: f64, order: i32) -> Self {
        EquilibriumProfile {
            family: Family::PowerLaw { amplitude, order },
            smoothness_order: SMOOTH,
            decay_order: order,
        }
    }

    /// Normalized Maxwellian `(2π)^{−3/2} e^{−e}`.
    pub fn maxwellian() -> Self {
        Self::gaussian((2.0 * PI).powf(-1.5), 1.0)
    }

    /// `(1 − e)⁴₊`, the reference compact profile.
    pub fn compact_default() -> Self {
        Self::compact(1.0, 1.0, 4)
    }

    pub fn amplitude(&self) -> f64 {
        match self.family {
            Family::Gaussian { amplitude, .. }
            | Family::CompactPolynomial { amplitude, .. }
            | Family::PowerLaw { amplitude, .. } => amplitude,
        }
    }

    /// Same profile with the amplitude multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut p = *self;
        match &mut p.family {
            Family::Gaussian { amplitude, .. }
            | Family::CompactPolynomial { amplitude, .. }
            | Family::PowerLaw { amplitude, .. } => *amplitude *= c,
        }
        p
    }

    pub fn is_compact(&self) -> bool {
        matches!(self.family, Family::CompactPolynomial { .. })
    }

    /// Maximal speed `Υ` (`∞` for unbounded support).
    pub fn upsilon(&self) -> f64 {
        match self.family {
            Family::CompactPolynomial { e_max, .. } => (2.0 * e_max).sqrt(),
            _ => f64::INFINITY,
        }
    }

    /// Effective speed cutoff `Υ*`: `Υ` itself, or the speed `M` past which
    /// `μ(½M²) < 1e−16`.
    pub fn cutoff(&self) -> f64 {
        match self.family {
            Family::CompactPolynomial { e_max, .. } => (2.0 * e_max).sqrt(),
            Family::Gaussian { amplitude, beta } => {
                let r = (amplitude.abs() / TAIL_LEVEL).ln().max(1.0);
                (2.0 * r / beta).sqrt()
            }
            Family::PowerLaw { amplitude, order } => {
                let r = (amplitude.abs() / TAIL_LEVEL).powf(1.0 / order as f64);
                (2.0 * (r - 1.0).max(1.0)).sqrt()
            }
        }
    }

    /// `μ(e)`; zero outside the support.
    pub fn mu(&self, e: f64) -> f64 {
        match self.family {
            Family::Gaussian { amplitude, beta } => amplitude * (-beta * e).exp(),
            Family::CompactPolynomial { amplitude, e_max, order } => {
                if e >= e_max {
                    0.0
                } else {
                    amplitude * (e_max - e).powi(order)
                }
            }
            Family::PowerLaw { amplitude, order } => amplitude * (1.0 + e).powi(-order),
        }
    }

    /// Closed-form complex extension of `μ`. For the compact family this is the
    /// polynomial, not the truncated function.
    pub fn mu_complex(&self, e: Complex64) -> Complex64 {
        match self.family {
            Family::Gaussian { amplitude, beta } => (e * (-beta)).exp() * amplitude,
            Family::CompactPolynomial { amplitude, e_max, order } => (Complex64::new(e_max, 0.0) - e).powi(order) * amplitude,
            Family::PowerLaw { amplitude, order } => (e + 1.0).powi(-order) * amplitude,
        }
    }

    /// Velocity density `g(u) = u·μ(½u²)`.
    pub fn g(&self, u: f64) -> f64 {
        u * self.mu(0.5 * u * u)
    }

    /// `n`-th derivative of `g` on the real line (zero outside the support).
    pub fn g_deriv(&self, n: usize, u: f64) -> f64 {
        if n == 0 {
            return self.g(u);
        }
        if let Family::CompactPolynomial { .. } = self.family {
            if u.abs() >= self.upsilon() {
                return 0.0;
            }
        }
        self.g_deriv_complex(n, Complex64::new(u, 0.0)).re
    }

    /// `n`-th derivative of the analytic extension of `g`.
    pub fn g_deriv_complex(&self, n: usize, z: Complex64) -> Complex64 {
        let terms = GTerms::new(self, n);
        terms.eval(z)
    }
}

/// `g⁽ⁿ⁾` written as `Σ c·u^a·P^m`, with `P` depending on the family:
/// `e^{−βu²/2}` (Gaussian, `m` unused), `E − u²/2` (compact), `1 + u²/2` (power law).
#[derive(Debug, Clone)]
pub struct GTerms {
    family: Family,
    terms: Vec<(f64, i32, i32)>,
}

impl GTerms {
    pub fn new(profile: &EquilibriumProfile, n: usize) -> Self {
        let (amp, m0) = match profile.family {
            Family::Gaussian { amplitude, .. } => (amplitude, 1),
            Family::CompactPolynomial { amplitude, order, .. } => (amplitude, order),
            Family::PowerLaw { amplitude, order } => (amplitude, -order),
        };
        let mut terms: Vec<(f64, i32, i32)> = alloc::vec![(amp, 1, m0)];
        for _ in 0..n {
            let mut next: Vec<(f64, i32, i32)> = Vec::with_capacity(2 * terms.len());
            for &(c, a, m) in &terms {
                if a > 0 {
                    push_term(&mut next, c * a as f64, a - 1, m);
                }
                match profile.family {
                    Family::Gaussian { beta, .. } => push_term(&mut next, -beta * c, a + 1, m),
                    Family::CompactPolynomial { .. } => {
                        if m != 0 {
                            push_term(&mut next, -c * m as f64, a + 1, m - 1)
                        }
                    }
                    Family::PowerLaw { .. } => push_term(&mut next, c * m as f64, a + 1, m - 1),
                }
            }
            terms = next;
        }
        GTerms { family: profile.family, terms }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let z2 = z * z * 0.5;
        let base = match self.family {
            Family::Gaussian { beta, .. } => (z2 * (-beta)).exp(),
            Family::CompactPolynomial { e_max, .. } => Complex64::new(e_max, 0.0) - z2,
            Family::PowerLaw { .. } => z2 + 1.0,
        };
        let mut s = Complex64::new(0.0, 0.0);
        for &(c, a, m) in &self.terms {
            let pm = match self.family {
                Family::Gaussian { .. } => base,
                _ => base.powi(m),
            };
            s += z.powi(a) * pm * c;
        }
        s
    }
}

impl GTerms {
    /// Real-line evaluation of the analytic expression (no support cut).
    pub fn eval_re(&self, u: f64) -> f64 {
        let u2 = 0.5 * u * u;
        let base = match self.family {
            Family::Gaussian { beta, .. } => (-beta * u2).exp(),
            Family::CompactPolynomial { e_max, .. } => e_max - u2,
            Family::PowerLaw { .. } => 1.0 + u2,
        };
        let gaussian = matches!(self.family, Family::Gaussian { .. });
        let mut s = 0.0;
        for &(c, a, m) in &self.terms {
            let pm = if gaussian { base } else { base.powi(m) };
            s += c * u.powi(a) * pm;
        }
        s
    }
}

fn push_term(v: &mut Vec<(f64, i32, i32)>, c: f64, a: i32, m: i32) {
    if let Some(t) = v.iter_mut().find(|t| t.1 == a && t.2 == m) {
        t.0 += c;
    } else {
        v.push((c, a, m));
    }
}

fn moment_tol() -> Tol {
    Tol::new(1e-15, 1e-13)
}

/// `∫₀^Υ f(u) du` over the support, mapping to `[0, ∞)` when unbounded.
fn support_integral<F: FnMut(f64) -> f64>(profile: &EquilibriumProfile, f: F) -> f64 {
    if profile.is_compact() {
        integrate(f, 0.0, profile.upsilon(), moment_tol()).value
    } else {
        integrate_to_infinity(f, 0.0, moment_tol()).value
    }
}

/// `τ_j² = 2π ∫ u^{2j+2} μ(½u²) du`.
pub fn moment_tau(profile: &EquilibriumProfile, j: usize) -> Result<f64> {
    if let Family::PowerLaw { order, .. } = profile.family {
        if 2 * j as i32 + 3 >= 2 * order {
            return Err(Error::DivergentMoment("u^{2j+2} μ is not integrable at infinity"));
        }
    }
    let p = 2 * j as i32 + 2;
    Ok(4.0 * PI * support_integral(profile, |u| u.powi(p) * profile.mu(0.5 * u * u)))
}

// `μ(½u²) = A·2^{−N₁}·(Υ−u)^{N₁}(Υ+u)^{N₁}` for the compact family.
fn compact_parts(profile: &EquilibriumProfile) -> Result<(f64, i32, f64)> {
    match profile.family {
        Family::CompactPolynomial { amplitude, order, .. } => Ok((amplitude * 2f64.powi(-order), order, profile.upsilon())),
        _ => Err(Error::InfiniteSupport),
    }
}

/// `κ_j² = 2π ∫ uμ(½u²)/(Υ−u)^{j+1} du`, symmetrized on `[0, Υ]` with the
/// vanishing factor of `μ` cancelled against the singular denominator.
pub fn moment_kappa(profile: &EquilibriumProfile, j: usize) -> Result<f64> {
    let (c, n1, ups) = compact_parts(profile)?;
    let p = j as i32 + 1;
    if p >= n1 {
        return Err(Error::DivergentMoment("κ_j² needs j + 1 < N₁"));
    }
    let f = |u: f64| {
        let a = ups - u;
        let b = ups + u;
        c * u * (a.powi(n1 - p) * b.powi(n1) - a.powi(n1) * b.powi(n1 - p))
    };
    Ok(2.0 * PI * integrate(f, 0.0, ups, moment_tol()).value)
}

/// `κ₀ = (4π ∫₀^Υ u²μ(½u²)/(Υ²−u²) du)^{1/2}`, zero for unbounded support.
pub fn survival_threshold(profile: &EquilibriumProfile) -> f64 {
    let Ok((c, n1, ups)) = compact_parts(profile) else {
        return 0.0;
    };
    let f = |u: f64| c * u * u * (ups * ups - u * u).powi(n1 - 1);
    let k2 = 4.0 * PI * integrate(f, 0.0, ups, moment_tol()).value;
    k2.max(0.0).sqrt()
}

/// `κ₀²Υ² − (τ₀² + κ₁²)`; reported rather than assumed to vanish.
pub fn upsilon_identity_residual(profile: &EquilibriumProfile) -> Result<f64> {
    let ups = profile.upsilon();
    let k0 = survival_threshold(profile);
    let kappa1 = moment_kappa(profile, 1)?;
    Ok(k0 * k0 * ups * ups - (moment_tau(profile, 0)? + kappa1))
}

/// Moment constants of a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub tau_sq: Vec<f64>,
    pub kappa_sq: Vec<f64>,
    pub kappa0: f64,
}

impl MomentTable {
    /// `τ_j²` for `j ≤ jmax` (stopping at the first divergent one) and every
    /// finite `κ_j²`.
    pub fn new(profile: &EquilibriumProfile, jmax: usize) -> Self {
        let mut tau_sq = Vec::new();
        for j in 0..=jmax {
            match moment_tau(profile, j) {
                Ok(v) => tau_sq.push(v),
                Err(_) => break,
            }
        }
        let mut kappa_sq = Vec::new();
        for j in 0..=jmax {
            match moment_kappa(profile, j) {
                Ok(v) => kappa_sq.push(v),
                Err(_) => break,
            }
        }
        MomentTable { tau_sq, kappa_sq, kappa0: survival_threshold(profile) }
    }
}

/// A violated modelling assumption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    NonFiniteParameter,
    Negativity,
    EmptyInterior,
    SmoothnessBelow4,
    DecayBelow4,
    NonPositiveScale,
}

impl Violation {
    pub fn message(&self) -> &'static str {
        match self {
            Violation::NonFiniteParameter => "non-finite parameter",
            Violation::Negativity => "negativity",
            Violation::EmptyInterior => "μ vanishes inside the support",
            Violation::SmoothnessBelow4 => "smoothness_order below 4",
            Violation::DecayBelow4 => "decay_order below 4",
            Violation::NonPositiveScale => "non-positive scale parameter",
        }
    }
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.message())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the standing assumptions: finite parameters, `μ ≥ 0` with `μ > 0` on
/// the open support (sampled), `N₀, N₁ ≥ 4`.
pub fn validate_profile(profile: &EquilibriumProfile) -> ValidationReport {
    let mut v = Vec::new();
    let (amp, scale) = match profile.family {
        Family::Gaussian { amplitude, beta } => (amplitude, beta),
        Family::CompactPolynomial { amplitude, e_max, .. } => (amplitude, e_max),
        Family::PowerLaw { amplitude, .. } => (amplitude, 1.0),
    };
    if !amp.is_finite() || !scale.is_finite() {
        v.push(Violation::NonFiniteParameter);
        return ValidationReport { violations: v };
    }
    if scale <= 0.0 {
        v.push(Violation::NonPositiveScale);
        return ValidationReport { violations: v };
    }
    let ups = profile.upsilon().min(profile.cutoff());
    let mut negative = false;
    let mut zero = false;
    for i in 0..400 {
        let u = ups * (i as f64 + 0.5) / 400.0;
        let m = profile.mu(0.5 * u * u);
        negative |= m < 0.0;
        zero |= m == 0.0 && profile.is_compact();
    }
    if negative || amp < 0.0 {
        v.push(Violation::Negativity);
    } else if zero || amp == 0.0 {
        v.push(Violation::EmptyInterior);
    }
    if profile.smoothness_order < 4 {
        v.push(Violation::SmoothnessBelow4);
    }
    if profile.decay_order < 4 {
        v.push(Violation::DecayBelow4);
    }
    ValidationReport { violations: v }
}
