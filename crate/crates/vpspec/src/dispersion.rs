//! The reduced Cauchy transform `H(z) = 2π ∫ uμ(½u²)/(z−u) du`, the
//! dielectric function `D(λ,k) = 1 − H(iλ/k)/k²`, and the time kernel `N(t)`.
//!
//! `H` is evaluated in three regimes, recorded in [`BranchTag`]: directly for
//! `Im z > 0`, as the `z + i0` boundary value on the real line, and by analytic
//! continuation from above for `Im z < 0`. The continuation adds the jump
//! `−4π²i·g(z)` of the boundary values across the support, with `g(z)` the
//! closed-form extension of `u·μ(½u²)`.

use core::f64::consts::PI;
use num_complex::Complex64;
// std's inherent float methods shadow these in test builds
#[allow(unused_imports)]
use num_traits::Float;

use crate::equilibria::{EquilibriumProfile, Family, GTerms};
use crate::quad::{integrate, integrate_pts, Tol};
use crate::{Error, Result};

/// Which evaluation regime produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchTag {
    Upper,
    Boundary,
    Continued,
}

impl BranchTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            BranchTag::Upper => "upper",
            BranchTag::Boundary => "boundary",
            BranchTag::Continued => "continued",
        }
    }
}

/// `H` or one of its `z`-derivatives at a point, with the regime used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HValue {
    pub value: Complex64,
    pub tag: BranchTag,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSample {
    pub k: f64,
    pub lambda: Complex64,
    pub value: Complex64,
    pub tag: BranchTag,
}

const H_TOL: Tol = Tol { abs: 1e-15, rel: 1e-13 };

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `2π ∫ g⁽ⁿ⁾(u)/(z − u) du`, continued from the upper half plane.
///
/// `n = 0` gives `H`; `n = 1` gives `H′` (integration by parts moves the
/// derivative onto `g`).
pub fn cauchy_transform(profile: &EquilibriumProfile, n: usize, z: Complex64) -> Result<HValue> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::OutOfRange("z must be finite"));
    }
    let terms = GTerms::new(profile, n);
    let l = profile.cutoff();
    let tag = if z.im > 0.0 {
        BranchTag::Upper
    } else if z.im == 0.0 {
        BranchTag::Boundary
    } else {
        BranchTag::Continued
    };

    let mut jump = false;
    if tag == BranchTag::Continued {
        match profile.family {
            Family::Gaussian { .. } => jump = true,
            Family::CompactPolynomial { .. } => {
                let ups = profile.upsilon();
                if z.re.abs() < ups {
                    jump = true;
                } else if z.re.abs() == ups {
                    return Err(Error::ContinuationUnavailable { re: z.re, im: z.im });
                }
                // |Re z| > Υ: the transform is analytic across the real axis there,
                // so the direct integral is already the continuation.
            }
            Family::PowerLaw { .. } => {
                if z.im <= -(2f64.sqrt()) {
                    return Err(Error::ContinuationUnavailable { re: z.re, im: z.im });
                }
                jump = true;
            }
        }
    }

    let theta = 0.25 * l.min(4.0);
    let mut value = if z.im.abs() < theta && z.re.abs() < l + theta {
        near(&terms, z, l)
    } else {
        far(&terms, n, z, l)
    };
    if jump {
        value += c(0.0, -4.0 * PI * PI) * terms.eval(z);
    }
    Ok(HValue { value, tag })
}

// Subtraction form: ∫ (f(u) − f(z))/(z − u) du + f(z)·∫ du/(z − u).
fn near(terms: &GTerms, z: Complex64, l: f64) -> Complex64 {
    let fz = terms.eval(z);
    let split = z.re.clamp(-l, l);
    let r = integrate_pts(
        |u: f64| {
            let d = z - u;
            if d.re == 0.0 && d.im == 0.0 {
                c(0.0, 0.0)
            } else {
                (c(terms.eval_re(u), 0.0) - fz) / d
            }
        },
        -l,
        l,
        &[split, 0.0],
        H_TOL,
    );
    let mut s = r.value;
    let on_edge = z.im == 0.0 && z.re.abs() == l;
    if !on_edge {
        let log = if z.im == 0.0 {
            let x = z.re;
            if x.abs() < l {
                c(((l + x) / (l - x)).ln(), -PI)
            } else {
                c(((x + l) / (x - l)).abs().ln(), 0.0)
            }
        } else {
            (z + l).ln() - (z - l).ln()
        };
        s += fz * log;
    }
    s * (2.0 * PI)
}

// Symmetrized direct integral; g⁽ⁿ⁾ is odd for even n and even for odd n.
fn far(terms: &GTerms, n: usize, z: Complex64, l: f64) -> Complex64 {
    let z2 = z * z;
    let pts = [z.re.abs().min(l)];
    let v = if n % 2 == 0 {
        integrate_pts(|u: f64| c(terms.eval_re(u) * 2.0 * u, 0.0) / (z2 - u * u), 0.0, l, &pts, H_TOL).value
    } else {
        // even and of zero mean on [−L, L]: 2z/(z²−u²) = (2/z)(1 + u²/(z²−u²))
        integrate_pts(|u: f64| c(terms.eval_re(u) * u * u, 0.0) / (z2 - u * u), 0.0, l, &pts, H_TOL).value * 2.0 / z
    };
    v * (2.0 * PI)
}

/// `H(z)`.
pub fn eval_h(profile: &EquilibriumProfile, z: Complex64) -> Result<HValue> {
    cauchy_transform(profile, 0, z)
}

/// `H′(z)`.
pub fn eval_dh(profile: &EquilibriumProfile, z: Complex64) -> Result<HValue> {
    cauchy_transform(profile, 1, z)
}

fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange("k must be positive"))
    }
}

/// `D(λ,k) = 1 − H(iλ/k)/k²`.
pub fn eval_d(profile: &EquilibriumProfile, lambda: Complex64, k: f64) -> Result<DispersionSample> {
    check_k(k)?;
    let h = eval_h(profile, c(-lambda.im, lambda.re) / k)?;
    Ok(DispersionSample { k, lambda, value: c(1.0, 0.0) - h.value / (k * k), tag: h.tag })
}

/// `∂_λD(λ,k) = −i·H′(iλ/k)/k³`.
pub fn eval_dd(profile: &EquilibriumProfile, lambda: Complex64, k: f64) -> Result<Complex64> {
    check_k(k)?;
    let h = eval_dh(profile, c(-lambda.im, lambda.re) / k)?;
    Ok(c(0.0, -1.0) * h.value / (k * k * k))
}

/// `D` and `∂_λD` together.
pub fn eval_d_and_dd(profile: &EquilibriumProfile, lambda: Complex64, k: f64) -> Result<(Complex64, Complex64)> {
    Ok((eval_d(profile, lambda, k)?.value, eval_dd(profile, lambda, k)?))
}

/// Principal value `P.V.∫_a^b f(u)/(u − p) du` by second-order subtraction.
pub fn pv_integral<F: Fn(f64) -> f64>(f: F, pole: f64, a: f64, b: f64) -> Result<f64> {
    if !(a < pole && pole < b) {
        return Err(Error::PoleOutsideDomain { pole, a, b });
    }
    let h = 1e-3 * (b - a);
    // any slope works in the identity below; a good one keeps the integrand smooth
    let slope = (8.0 * (f(pole + h) - f(pole - h)) - (f(pole + 2.0 * h) - f(pole - 2.0 * h))) / (12.0 * h);
    let fp = f(pole);
    let r = integrate_pts(
        |u: f64| {
            let d = u - pole;
            if d == 0.0 {
                slope
            } else {
                (f(u) - fp - slope * d) / d
            }
        },
        a,
        b,
        &[pole],
        Tol::new(1e-15, 1e-13),
    );
    Ok(r.value + fp * ((b - pole) / (pole - a)).ln() + slope * (b - a))
}

/// Time kernel `N(t) = 2π ∫ e^{−iut} uμ(½u²) du = −4πi ∫₀^∞ sin(ut) uμ(½u²) du`.
pub fn eval_n(profile: &EquilibriumProfile, t: f64) -> Complex64 {
    c(0.0, -sine_transform(profile, t))
}

/// `4π ∫₀^L sin(ut)·g(u) du`.
pub fn sine_transform(profile: &EquilibriumProfile, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let l = profile.cutoff();
    let pieces = ((l * t.abs()) / (4.0 * PI)).ceil().min(4000.0) as usize;
    let mut pts = alloc::vec::Vec::with_capacity(pieces);
    for i in 1..pieces {
        pts.push(l * i as f64 / pieces as f64);
    }
    4.0 * PI * integrate_pts(|u: f64| (u * t).sin() * profile.g(u), 0.0, l, &pts, Tol::new(1e-16, 1e-13)).value
}

/// `ω(y) = 2π ∫ u²μ(½u²)/(1 − yu²) du` and its first two `y`-derivatives.
pub fn eval_omega(profile: &EquilibriumProfile, y: f64, order: u32) -> Result<f64> {
    if order > 2 {
        return Err(Error::OutOfRange("order must be 0, 1 or 2"));
    }
    let ups = profile.upsilon();
    let ymax = if ups.is_finite() { 1.0 / (ups * ups) } else { 0.0 };
    // y = Υ⁻² computed by the caller may be off by an ulp
    let y = if (y - ymax).abs() <= 4.0 * f64::EPSILON * ymax { ymax } else { y };
    if !(0.0..=ymax).contains(&y) {
        return Err(Error::OutOfRange("y must lie in [0, Υ⁻²]"));
    }
    let p = order as i32 + 1;
    if y == ymax && profile.decay_order < p && ups.is_finite() {
        return Err(Error::DivergentMoment("ω derivative at y = Υ⁻²"));
    }
    let fact = [1.0, 1.0, 2.0][order as usize];
    let l = profile.cutoff();
    let f = |u: f64| {
        let u2 = u * u;
        u2.powi(order as i32 + 1) * profile.mu(0.5 * u2) / (1.0 - y * u2).powi(p)
    };
    let v = if profile.is_compact() {
        if y == ymax {
            // (1 − u²/Υ²)^{−p} against (Υ² − u²)^{N₁}: cancel analytically
            let Family::CompactPolynomial { amplitude, order: n1, .. } = profile.family else { unreachable!() };
            let c0 = amplitude * 2f64.powi(-n1) * (ups * ups).powi(p);
            integrate(|u: f64| {
                let u2 = u * u;
                c0 * u2.powi(order as i32 + 1) * (ups * ups - u2).powi(n1 - p)
            }, 0.0, ups, H_TOL)
            .value
        } else {
            integrate(f, 0.0, l, H_TOL).value
        }
    } else {
        crate::quad::integrate_to_infinity(f, 0.0, H_TOL).value
    };
    Ok(4.0 * PI * fact * v)
}
