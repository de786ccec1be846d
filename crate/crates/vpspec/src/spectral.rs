//! Roots of `D(λ,k) = 0`: the Langmuir branch `λ± = ±iτ*(k)` for `k ≤ κ₀`,
//! Landau-damped roots past the threshold, stability certificates.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
// std's inherent float methods shadow these in test builds
#[allow(unused_imports)]
use num_traits::Float;

use crate::dispersion::{eval_d, eval_d_and_dd, eval_dd, eval_h, eval_dh, eval_omega};
use crate::equilibria::{moment_kappa, moment_tau, survival_threshold, EquilibriumProfile};
use crate::quad::{integrate, Tol};
use crate::{Error, Result};

/// One sample of the Langmuir branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub k: f64,
    pub tau_star: f64,
    pub dtau: f64,
    pub d2tau: f64,
    pub phase_velocity: f64,
    pub group_velocity: f64,
    /// Largest relative gap between the analytic and finite-difference derivatives.
    pub fd_mismatch: f64,
}

impl BranchPoint {
    /// `x* = τ*²`
    pub fn x_star(&self) -> f64 {
        self.tau_star * self.tau_star
    }

    /// `y* = k²/x*`
    pub fn y_star(&self) -> f64 {
        self.k * self.k / self.x_star()
    }
}

/// Relative tolerance between analytic and finite-difference `τ*′, τ*″`.
pub const FD_TOLERANCE: f64 = 1e-4;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn branch_limits(profile: &EquilibriumProfile) -> Result<(f64, f64)> {
    let ups = profile.upsilon();
    if !ups.is_finite() {
        return Err(Error::InfiniteSupport);
    }
    Ok((survival_threshold(profile), 1.0 / (ups * ups)))
}

/// Solves `y·ω(y) = k²` on `(0, Υ⁻²]`; equivalently `H(z) = k²` with `z = y^{−1/2} ≥ Υ`.
fn solve_y(profile: &EquilibriumProfile, k: f64, kappa0: f64, ymax: f64) -> Result<f64> {
    if k == kappa0 {
        return Ok(ymax);
    }
    let k2 = k * k;
    let f = |y: f64| -> Result<f64> { Ok(y * eval_omega(profile, y, 0)? - k2) };
    let (mut lo, mut hi) = (0.0, ymax);
    for _ in 0..8 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut y = 0.5 * (lo + hi);
    for _ in 0..60 {
        let fy = f(y)?;
        if fy < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let d = eval_omega(profile, y, 0)? + y * eval_omega(profile, y, 1)?;
        let mut yn = y - fy / d;
        if !(yn > lo && yn < hi) {
            yn = 0.5 * (lo + hi);
        }
        let done = (yn - y).abs() <= 1e-15 * y || hi - lo <= 1e-16 * hi;
        y = yn;
        if done {
            break;
        }
    }
    Ok(y)
}

fn tau_at(profile: &EquilibriumProfile, k: f64, kappa0: f64, ymax: f64) -> Result<f64> {
    Ok(k / solve_y(profile, k, kappa0, ymax)?.sqrt())
}

/// Langmuir branch point at `0 < k ≤ κ₀`, with `τ*′, τ*″` from differentiating
/// `x = ω(k²/x)` and checked against finite differences (step `1e−4·κ₀`).
pub fn langmuir_branch(profile: &EquilibriumProfile, k: f64) -> Result<BranchPoint> {
    let (kappa0, ymax) = branch_limits(profile)?;
    if !(k > 0.0 && k <= kappa0) {
        return Err(Error::OutOfRange("langmuir branch needs 0 < k ≤ κ₀"));
    }
    let y = solve_y(profile, k, kappa0, ymax)?;
    let tau = k / y.sqrt();
    let x = tau * tau;
    let w1 = eval_omega(profile, y, 1)?;
    let w2 = eval_omega(profile, y, 2)?;
    let cc = 1.0 + k * k * w1 / (x * x);
    let dx = 2.0 * k * w1 / (x * cc);
    let d2x = (w2 * k * k * (2.0 * x - k * dx).powi(2) / x.powi(4) + w1 * 2.0 * (x - k * dx).powi(2) / x.powi(3)) / cc;
    let dtau = dx / (2.0 * tau);
    let d2tau = d2x / (2.0 * tau) - dx * dx / (4.0 * tau * tau * tau);

    let h = 1e-4 * kappa0;
    let t = |kk: f64| tau_at(profile, kk, kappa0, ymax);
    let (fd1, fd2) = if k + h <= kappa0 && k - h > 0.0 {
        let (tp, tm) = (t(k + h)?, t(k - h)?);
        ((tp - tm) / (2.0 * h), (tp - 2.0 * tau + tm) / (h * h))
    } else if k + h > kappa0 {
        let (t1, t2, t3) = (t(k - h)?, t(k - 2.0 * h)?, t(k - 3.0 * h)?);
        ((3.0 * tau - 4.0 * t1 + t2) / (2.0 * h), (2.0 * tau - 5.0 * t1 + 4.0 * t2 - t3) / (h * h))
    } else {
        let (t1, t2, t3) = (t(k + h)?, t(k + 2.0 * h)?, t(k + 3.0 * h)?);
        ((-3.0 * tau + 4.0 * t1 - t2) / (2.0 * h), (2.0 * tau - 5.0 * t1 + 4.0 * t2 - t3) / (h * h))
    };
    let mismatch = ((fd1 - dtau) / dtau).abs().max(((fd2 - d2tau) / d2tau).abs());
    if !(mismatch <= FD_TOLERANCE) {
        return Err(Error::DerivativeMismatch(mismatch));
    }
    Ok(BranchPoint {
        k,
        tau_star: tau,
        dtau,
        d2tau,
        phase_velocity: 1.0 / y.sqrt(),
        group_velocity: dtau,
        fd_mismatch: mismatch,
    })
}

/// `|x* − ω(k²/x*)|`.
pub fn xstar_residual(profile: &EquilibriumProfile, bp: &BranchPoint) -> Result<f64> {
    Ok((bp.x_star() - eval_omega(profile, bp.y_star(), 0)?).abs())
}

/// Branch samples over a grid plus the convexity certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchScan {
    pub points: Vec<BranchPoint>,
    pub min_d2tau: f64,
    pub max_d2tau: f64,
    pub tau_increasing: bool,
    pub nu_decreasing: bool,
}

impl BranchScan {
    pub fn certified(&self) -> bool {
        self.tau_increasing && self.nu_decreasing && self.min_d2tau > 0.0
    }
}

pub fn branch_scan(profile: &EquilibriumProfile, ks: &[f64]) -> Result<BranchScan> {
    let mut points = Vec::with_capacity(ks.len());
    for &k in ks {
        points.push(langmuir_branch(profile, k)?);
    }
    let tau_increasing = points.windows(2).all(|w| w[1].tau_star > w[0].tau_star);
    let nu_decreasing = points.windows(2).all(|w| w[1].phase_velocity < w[0].phase_velocity);
    let min_d2tau = points.iter().map(|p| p.d2tau).fold(f64::INFINITY, f64::min);
    let max_d2tau = points.iter().map(|p| p.d2tau).fold(f64::NEG_INFINITY, f64::max);
    Ok(BranchScan { points, min_d2tau, max_d2tau, tau_increasing, nu_decreasing })
}

/// A root of the continued dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedRoot {
    pub k: f64,
    pub lambda: Complex64,
    pub newton_residual: f64,
    /// Asymptotic-law value of `Re λ`, when the law applies at this `k`.
    pub predicted_rate: Option<f64>,
}

const NEWTON_TARGET: f64 = 1e-12;

/// Complex Newton on `D(·,k)` from `seed`.
pub fn newton_root(profile: &EquilibriumProfile, k: f64, seed: Complex64) -> Result<(Complex64, f64)> {
    let ups = profile.upsilon();
    let mut lam = seed;
    let mut res = f64::INFINITY;
    for _ in 0..60 {
        if (lam.im / k).abs() >= ups && lam.re < 0.0 {
            return Err(Error::ContinuationUnavailable { re: -lam.im / k, im: lam.re / k });
        }
        let (d, dd) = eval_d_and_dd(profile, lam, k)?;
        res = d.norm();
        if !res.is_finite() {
            break;
        }
        let step = d / dd;
        lam -= step;
        if res < NEWTON_TARGET || step.norm() < 1e-15 * (1.0 + lam.norm()) {
            let r = eval_d(profile, lam, k)?.value.norm();
            if r < 1e-10 {
                return Ok((lam, r));
            }
            res = r;
        }
    }
    Err(Error::NewtonDiverged { residual: res })
}

/// Damped root near `seed` for `k` past the threshold.
pub fn damped_root(profile: &EquilibriumProfile, k: f64, seed: Complex64) -> Result<DampedRoot> {
    let kappa0 = survival_threshold(profile);
    if !(k > kappa0) {
        return Err(Error::OutOfRange("damped roots need k > κ₀"));
    }
    let (lambda, newton_residual) = newton_root(profile, k, seed)?;
    Ok(DampedRoot { k, lambda, newton_residual, predicted_rate: landau_rate_asymptotic(profile, k).ok() })
}

/// Seed for `λ₊` near the start of a continuation path.
fn start_of_path(profile: &EquilibriumProfile) -> Result<(f64, Complex64)> {
    if profile.is_compact() {
        let k0 = survival_threshold(profile);
        Ok((k0, c(0.0, k0 * profile.upsilon())))
    } else {
        // small k: λ₊ ≈ i(τ₀ + τ₁²k²/(2τ₀³))
        let k = 0.05;
        let t0 = moment_tau(profile, 0)?.sqrt();
        let t1 = moment_tau(profile, 1)?;
        let seed = c(0.0, t0 + t1 * k * k / (2.0 * t0 * t0 * t0));
        let (lam, _) = newton_root(profile, k, seed)?;
        Ok((k, lam))
    }
}

/// `λ₊(k)` past the threshold by continuation in `k`, with a secant predictor
/// and step halving; `λ₋ = conj(λ₊)`.
pub fn continue_root(profile: &EquilibriumProfile, k: f64) -> Result<DampedRoot> {
    let (k_start, seed) = start_of_path(profile)?;
    if k <= k_start {
        if profile.is_compact() && k > 0.0 {
            let bp = langmuir_branch(profile, k)?;
            let lambda = c(0.0, bp.tau_star);
            let r = eval_d(profile, lambda, k)?.value.norm();
            return Ok(DampedRoot { k, lambda, newton_residual: r, predicted_rate: None });
        }
        let lam = newton_root(profile, k, seed)?;
        return Ok(DampedRoot { k, lambda: lam.0, newton_residual: lam.1, predicted_rate: None });
    }
    let mut path: Vec<(f64, Complex64)> = alloc::vec![(k_start, seed)];
    let mut h = ((k - k_start) / 4.0).min(0.02);
    let mut kc = k_start;
    let mut last = (seed, 0.0);
    while kc < k {
        let kn = (kc + h).min(k);
        let predict = if path.len() >= 2 {
            let (k1, l1) = path[path.len() - 2];
            let (k2, l2) = path[path.len() - 1];
            l2 + (l2 - l1) * ((kn - k2) / (k2 - k1))
        } else {
            path[0].1
        };
        match newton_root(profile, kn, predict) {
            Ok(r) if (r.0 - path[path.len() - 1].1).norm() < 0.5 * (1.0 + (kn - kc) * 20.0) => {
                path.push((kn, r.0));
                kc = kn;
                last = r;
                h = (h * 1.5).min(0.05);
            }
            Ok(_) | Err(_) => {
                h *= 0.5;
                if h < 1e-6 {
                    return Err(Error::NewtonDiverged { residual: f64::NAN });
                }
            }
        }
    }
    Ok(DampedRoot { k, lambda: last.0, newton_residual: last.1, predicted_rate: landau_rate_asymptotic(profile, k).ok() })
}

/// Both roots `(λ₊, λ₋)` at `k`, paired by conjugation.
pub fn root_pair(profile: &EquilibriumProfile, k: f64) -> Result<(DampedRoot, DampedRoot)> {
    let plus = continue_root(profile, k)?;
    let seed = plus.lambda.conj();
    let minus = if plus.lambda.re == 0.0 {
        DampedRoot { lambda: seed, ..plus }
    } else {
        let (lambda, r) = newton_root(profile, k, seed)?;
        DampedRoot { k, lambda, newton_residual: r, predicted_rate: plus.predicted_rate }
    };
    Ok((plus, minus))
}

/// Width `δ₀` of the `k`-interval past `κ₀` on which the damped roots can be
/// continued, capped at 1.
pub fn validity_width(profile: &EquilibriumProfile) -> f64 {
    let (k_start, seed) = match start_of_path(profile) {
        Ok(s) => s,
        Err(_) => return 0.0,
    };
    let kappa0 = survival_threshold(profile);
    let k_end = kappa0 + 1.0;
    let mut prev = (k_start, seed);
    let mut prev2: Option<(f64, Complex64)> = None;
    let mut h = 0.02;
    let mut kc = k_start;
    while kc < k_end {
        let kn = (kc + h).min(k_end);
        let predict = match prev2 {
            Some((k1, l1)) => prev.1 + (prev.1 - l1) * ((kn - prev.0) / (prev.0 - k1)),
            None => prev.1,
        };
        match newton_root(profile, kn, predict) {
            Ok((lam, _)) if lam.re <= 1e-12 && (lam - prev.1).norm() < 0.5 => {
                prev2 = Some(prev);
                prev = (kn, lam);
                kc = kn;
                h = (h * 1.5).min(0.05);
            }
            _ => {
                h *= 0.5;
                if h < 1e-4 {
                    return (kc - kappa0).max(0.0);
                }
            }
        }
    }
    1.0
}

/// Phase velocity `ν*(k) < Υ` solving `Re H(ν + i0) = k²` past the threshold.
pub fn resonant_velocity(profile: &EquilibriumProfile, k: f64) -> Result<f64> {
    let ups = profile.upsilon();
    let k2 = k * k;
    let re_h = |v: f64| -> Result<f64> { Ok(eval_h(profile, c(v, 0.0))?.value.re) };
    let mut hi = ups;
    let mut lo = ups;
    let mut step = 1e-3 * ups;
    loop {
        lo = (lo - step).max(0.0);
        if re_h(lo)? > k2 {
            break;
        }
        hi = lo;
        if lo == 0.0 {
            return Err(Error::OutOfRange("no resonant velocity: k too large"));
        }
        step *= 2.0;
    }
    let mut v = 0.5 * (lo + hi);
    for _ in 0..100 {
        let f = re_h(v)? - k2;
        if f > 0.0 {
            lo = v;
        } else {
            hi = v;
        }
        let d = eval_dh(profile, c(v, 0.0))?.value.re;
        let mut vn = v - f / d;
        if !(vn > lo && vn < hi) {
            vn = 0.5 * (lo + hi);
        }
        let done = (vn - v).abs() < 1e-15 * ups || hi - lo < 1e-15 * ups;
        v = vn;
        if done {
            break;
        }
    }
    Ok(v)
}

/// Asymptotic damping rate `Re λ±(k)`.
///
/// Gaussian: `−(π²/τ₀)·ν³μ(½ν²)` with `ν = τ₀/k`.
/// Compact: `−(2π²k/κ₁²)·νμ(½ν²)` with `ν` the resonant velocity.
pub fn landau_rate_asymptotic(profile: &EquilibriumProfile, k: f64) -> Result<f64> {
    if profile.is_compact() {
        let kappa0 = survival_threshold(profile);
        if !(k > kappa0 && k <= kappa0 + 1.0) {
            return Err(Error::OutOfRange("compact Landau law needs κ₀ < k ≤ κ₀ + δ₀"));
        }
        let v = resonant_velocity(profile, k)?;
        Ok(-2.0 * PI * PI * k / moment_kappa(profile, 1)? * profile.g(v))
    } else {
        if !(k > 0.0 && k <= 1.0) {
            return Err(Error::OutOfRange("Gaussian Landau law needs 0 < k ≤ δ₀"));
        }
        let t0 = moment_tau(profile, 0)?.sqrt();
        let v = t0 / k;
        Ok(-(PI * PI / t0) * v * v * v * profile.mu(0.5 * v * v))
    }
}

/// The compact law evaluated at the linearized velocity `Υ − 2κ₀(k−κ₀)/κ₁²`.
pub fn landau_rate_linearized(profile: &EquilibriumProfile, k: f64) -> Result<f64> {
    let kappa0 = survival_threshold(profile);
    let kappa1 = moment_kappa(profile, 1)?;
    let v = profile.upsilon() - 2.0 * kappa0 * (k - kappa0) / kappa1;
    Ok(-2.0 * PI * PI * k / kappa1 * profile.g(v))
}

/// Axis-aligned rectangle in the `λ`-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    pub winding: i64,
    /// Raw value of `(1/2πi)∮ D′/D`.
    pub value: Complex64,
    pub residual: f64,
}

/// `(1/2πi)∮ ∂_λD/D dλ` counterclockwise around `rect`.
pub fn winding_number(profile: &EquilibriumProfile, k: f64, rect: Rect) -> Result<Winding> {
    let corners = [
        c(rect.re_min, rect.im_min),
        c(rect.re_max, rect.im_min),
        c(rect.re_max, rect.im_max),
        c(rect.re_min, rect.im_max),
    ];
    let mut total = c(0.0, 0.0);
    let mut failure = None;
    for i in 0..4 {
        let a = corners[i];
        let b = corners[(i + 1) % 4];
        let r = integrate(
            |s: f64| {
                let lam = a + (b - a) * s;
                match eval_d_and_dd(profile, lam, k) {
                    Ok((d, dd)) => dd / d * (b - a),
                    Err(e) => {
                        failure.get_or_insert(e);
                        c(0.0, 0.0)
                    }
                }
            },
            0.0,
            1.0,
            Tol::new(1e-10, 1e-9),
        );
        if !r.converged {
            return Err(Error::QuadratureStall("winding integral"));
        }
        total += r.value;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let value = total / c(0.0, 2.0 * PI);
    let winding = value.re.round();
    let residual = (value - winding).norm();
    if residual > 0.1 {
        return Err(Error::ContourTooCoarse { value: value.re, residual });
    }
    Ok(Winding { winding: winding as i64, value, residual })
}

/// `min |D(iτ,k)|` over a `(k, τ)` grid on the imaginary axis, together with
/// the far-field bound `|D| ≥ ½` beyond the scanned `τ`-range.
pub fn penrose_margin(profile: &EquilibriumProfile, k_min: f64, k_max: f64, nk: usize, ntau: usize) -> Result<f64> {
    let l = profile.cutoff();
    let g1 = 2.0 * integrate(|u: f64| profile.g(u).abs(), 0.0, l, Tol::DEFAULT).value;
    let mut margin: f64 = 0.5;
    for i in 0..nk.max(1) {
        let k = if nk <= 1 { k_min } else { k_min + (k_max - k_min) * i as f64 / (nk - 1) as f64 };
        // |H(z)| ≤ 4πG₁/|z| for |z| ≥ 2L, so |D| ≥ ½ once |z| ≥ max(2L, 8πG₁/k²)
        let tmax = k * (2.0 * l).max(8.0 * PI * g1 / (k * k));
        for j in 0..=ntau {
            let tau = tmax * j as f64 / ntau as f64;
            let d = eval_d(profile, c(0.0, tau), k)?.value.norm();
            margin = margin.min(d);
        }
    }
    Ok(margin)
}

/// Spectral-stability evidence at one wave number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityCertificate {
    pub k: f64,
    pub contour: Rect,
    pub winding: i64,
    pub penrose_margin: f64,
}

/// Winding number over `[1e−2, 10] × [−10i·s, 10i·s]`, `s = max(1, τ*)`, plus the
/// axis margin at this single `k`.
pub fn stability_certificate(profile: &EquilibriumProfile, k: f64) -> Result<StabilityCertificate> {
    let kappa0 = survival_threshold(profile);
    let s = if profile.is_compact() && k <= kappa0 {
        langmuir_branch(profile, k)?.tau_star.max(1.0)
    } else {
        1.0
    };
    let contour = Rect { re_min: 1e-2, re_max: 10.0, im_min: -10.0 * s, im_max: 10.0 * s };
    let w = winding_number(profile, k, contour)?;
    let m = penrose_margin(profile, k, k, 1, 400)?;
    Ok(StabilityCertificate { k, contour, winding: w.winding, penrose_margin: m })
}

/// `|∂_λD|` at a root, or `DegenerateRoot`.
pub fn root_derivative(profile: &EquilibriumProfile, lambda: Complex64, k: f64) -> Result<Complex64> {
    let dd = eval_dd(profile, lambda, k)?;
    if dd.norm() < 1e-8 {
        return Err(Error::DegenerateRoot(dd.norm()));
    }
    Ok(dd)
}
