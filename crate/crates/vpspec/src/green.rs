//! Mode-wise Green function `Ĝ_k(t) = δ(t) + Σ± a±e^{λ±t} + Ĝ^r_k(t)`.
//!
//! `Ĝ_k − δ` is the inverse Laplace transform of `1/D − 1`. The remainder is
//! computed on the imaginary axis after subtracting the root poles
//! `a/(λ − λ±)` (untapered residues) and a tail `Σ c_m/(λ+σ)^m` matched to the
//! large-`λ` expansion of `1/D − 1`; both subtracted pieces have closed-form
//! inverse transforms, and what is left is smooth on the axis and decays like
//! `|λ|^{−M−1}`. Near an on-axis root the subtracted integrand is evaluated
//! through a Cauchy integral on a surrounding circle, which avoids the
//! cancellation between `1/D` and the pole.
//!
//! The Volterra solver for `ρ = S + K⋆ρ` needs neither roots nor contours and is
//! the independent check on the whole construction.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
// std's inherent float methods shadow these in test builds
#[allow(unused_imports)]
use num_traits::Float;

use crate::dispersion::{eval_d, sine_transform};
use crate::equilibria::{moment_tau, survival_threshold, EquilibriumProfile};
use crate::quad::GaussLegendre;
use crate::spectral::{continue_root, newton_root, root_derivative, validity_width};
use crate::{Error, Result};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// C² smoothstep cut-off for the residue weights: 1 up to `κ₀ + δ₀/2`, 0 from
/// `min(κ₀ + δ₀, κ₀ + 1)` on.
pub fn taper(k: f64, kappa0: f64, delta0: f64) -> f64 {
    let k1 = kappa0 + 0.5 * delta0;
    let k2 = (kappa0 + delta0).min(kappa0 + 1.0);
    if k <= k1 {
        1.0
    } else if k >= k2 {
        0.0
    } else {
        let s = (k - k1) / (k2 - k1);
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

/// Roots, residues and taper at one wave number.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenContext {
    pub profile: EquilibriumProfile,
    pub k: f64,
    pub kappa0: f64,
    pub delta0: f64,
    pub taper: f64,
    /// `(λ₊, λ₋)` when the roots exist (`k ≤ κ₀ + δ₀`).
    pub roots: Option<[Complex64; 2]>,
    /// Untapered `1/∂_λD` at the roots.
    pub residues: Option<[Complex64; 2]>,
}

impl GreenContext {
    pub fn new(profile: &EquilibriumProfile, k: f64) -> Result<Self> {
        Self::with_width(profile, k, validity_width(profile))
    }

    /// Same as [`GreenContext::new`] with a precomputed `δ₀`.
    pub fn with_width(profile: &EquilibriumProfile, k: f64, delta0: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::OutOfRange("k must be positive"));
        }
        let kappa0 = survival_threshold(profile);
        let plus = if k <= kappa0 + delta0 { Some(continue_root(profile, k)?.lambda) } else { None };
        Self::from_root(profile, k, delta0, plus)
    }

    /// Context built around a root `λ₊` found elsewhere (`None` past the
    /// validity strip).
    pub fn from_root(profile: &EquilibriumProfile, k: f64, delta0: f64, plus: Option<Complex64>) -> Result<Self> {
        let kappa0 = survival_threshold(profile);
        let (roots, residues) = match plus {
            Some(plus) => {
                let a = 1.0 / root_derivative(profile, plus, k)?;
                (Some([plus, plus.conj()]), Some([a, a.conj()]))
            }
            None => (None, None),
        };
        Ok(GreenContext { profile: *profile, k, kappa0, delta0, taper: taper(k, kappa0, delta0), roots, residues })
    }

    /// Tapered `a±(k)`.
    pub fn a_pm(&self) -> [Complex64; 2] {
        match self.residues {
            Some([a, b]) => [a * self.taper, b * self.taper],
            None => [c(0.0, 0.0); 2],
        }
    }

    /// Radius of a circle around `λ₊` that stays clear of `λ₋` and, for compact
    /// support, of the branch point `ikΥ`: `min(k/2, 0.45·distance)`.
    pub fn residue_radius(&self) -> Option<f64> {
        let r = self.roots?;
        let mut dist = (r[0] - r[1]).norm();
        if self.profile.is_compact() {
            dist = dist.min((r[0] - c(0.0, self.k * self.profile.upsilon())).norm());
        }
        Some((0.5 * self.k).min(0.45 * dist))
    }

    /// `Σ± a±e^{λ±t}` (complex; the imaginary part is roundoff).
    pub fn oscillatory(&self, t: f64) -> Complex64 {
        match self.roots {
            Some(r) => {
                let a = self.a_pm();
                a[0] * (r[0] * t).exp() + a[1] * (r[1] * t).exp()
            }
            None => c(0.0, 0.0),
        }
    }
}

/// `(a₊, a₋)` with the taper applied.
pub fn residue_weight(profile: &EquilibriumProfile, k: f64) -> Result<[Complex64; 2]> {
    let ctx = GreenContext::new(profile, k)?;
    if ctx.roots.is_none() {
        return Err(Error::OutOfRange("no roots past κ₀ + δ₀"));
    }
    Ok(ctx.a_pm())
}

/// `(1/2πi)∮ dλ/D` over a circle of radius `r` around `center`, by the
/// trapezoidal rule with `n` points.
pub fn contour_residue(profile: &EquilibriumProfile, k: f64, center: Complex64, r: f64, n: usize) -> Result<Complex64> {
    let mut s = c(0.0, 0.0);
    for j in 0..n {
        let e = c(0.0, 2.0 * PI * j as f64 / n as f64).exp();
        let lam = center + e * r;
        s += e * r / eval_d(profile, lam, k)?.value;
    }
    Ok(s / n as f64)
}

/// `Σ± a±e^{λ±t}`.
pub fn green_oscillatory(profile: &EquilibriumProfile, k: f64, t: f64) -> Result<Complex64> {
    Ok(GreenContext::new(profile, k)?.oscillatory(t))
}

/// What the remainder quadrature actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    /// Effective cut-off speed `Υ*`.
    pub upsilon_star: f64,
    /// The axis integral runs over `|τ| ≤ tau_cut`.
    pub tau_cut: f64,
    /// Shift of the tail terms `c_m/(λ+σ)^m`.
    pub sigma: f64,
    pub tail_coefficients: Vec<f64>,
    pub nodes: usize,
    pub panels: usize,
    /// Radius of the circle used near the on-axis root (0 if none).
    pub disk_radius: f64,
}

/// Panel budget: more nodes than this means the time window is too long for
/// the mode.
pub const NODE_BUDGET: usize = 4_000_000;

/// Prepared remainder quadrature for one mode and a time window `[0, t_max]`.
#[derive(Debug, Clone)]
pub struct Remainder {
    pub ctx: GreenContext,
    pub spec: ContourSpec,
    nodes: Vec<f64>,
    weighted: Vec<Complex64>,
}

fn binom(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Coefficients `b_n` of `λ^{−n}`, `n = 1..=m`, in the large-`λ` expansion of
/// `1/D − 1` minus the root poles.
fn large_lambda_expansion(ctx: &GreenContext, m: usize) -> Vec<f64> {
    let k2 = ctx.k * ctx.k;
    // w = H/k² = Σ_{n≥1} W_n s^n with s = λ⁻²
    let half = m / 2;
    let mut w = vec![0.0; half + 1];
    let mut kpow = 1.0;
    for (n, wn) in w.iter_mut().enumerate().skip(1) {
        match moment_tau(&ctx.profile, n - 1) {
            Ok(t) => *wn = if n % 2 == 0 { t * kpow } else { -t * kpow },
            Err(_) => break,
        }
        kpow *= k2;
    }
    // E = w/(1 − w): E_n = W_n + Σ W_i E_{n−i}
    let mut e = vec![0.0; half + 1];
    for n in 1..=half {
        let mut s = w[n];
        for i in 1..n {
            s += w[i] * e[n - i];
        }
        e[n] = s;
    }
    let mut b = vec![0.0; m + 1];
    for n in 1..=half {
        b[2 * n] = e[n];
    }
    if let (Some(r), Some(a)) = (ctx.roots, ctx.residues) {
        for n in 1..=m {
            let p = a[0] * r[0].powi(n as i32 - 1) + a[1] * r[1].powi(n as i32 - 1);
            b[n] -= p.re;
        }
    }
    b
}

impl Remainder {
    /// Number of tail terms `c_m/(λ+σ)^m`.
    pub const TAIL_ORDER: usize = 10;

    pub fn new(ctx: &GreenContext, t_max: f64) -> Result<Self> {
        let k = ctx.k;
        let profile = &ctx.profile;
        let l = profile.cutoff();
        let sigma = 1.5;
        let m = Self::TAIL_ORDER;
        let b = large_lambda_expansion(ctx, m);
        // b_n = Σ_{j≤n} c_j C(n−1, n−j)(−σ)^{n−j}
        let mut cm = vec![0.0; m + 1];
        for n in 1..=m {
            let mut s = b[n];
            for j in 1..n {
                s -= cm[j] * binom(n - 1, n - j) * (-sigma).powi((n - j) as i32);
            }
            cm[n] = s;
        }

        let raw = |lam: Complex64| -> Result<Complex64> {
            let d = eval_d(profile, lam, k)?.value;
            let mut v = 1.0 / d - 1.0;
            if let (Some(r), Some(a)) = (ctx.roots, ctx.residues) {
                v -= a[0] / (lam - r[0]) + a[1] / (lam - r[1]);
            }
            let inv = 1.0 / (lam + sigma);
            let mut p = inv;
            for cj in cm.iter().skip(1) {
                v -= p * *cj;
                p *= inv;
            }
            Ok(v)
        };

        // circle around λ₊ when it sits close to the axis
        let mut disk: Option<(Complex64, f64, Vec<Complex64>)> = None;
        if let Some(r) = ctx.roots {
            let lp = r[0];
            let mut dist = (lp - r[1]).norm();
            if profile.is_compact() {
                let bp = c(0.0, k * profile.upsilon());
                dist = dist.min((lp - bp).norm()).min((lp.im - bp.im).abs());
            }
            let rad = (0.45 * dist).min(0.25);
            if lp.re.abs() < rad / 3.0 {
                let n = 64;
                let mut vals = Vec::with_capacity(n);
                for j in 0..n {
                    let e = c(0.0, 2.0 * PI * j as f64 / n as f64).exp();
                    vals.push(raw(lp + e * rad)?);
                }
                disk = Some((lp, rad, vals));
            }
        }
        let f_axis = |tau: f64| -> Result<Complex64> {
            let lam = c(0.0, tau);
            if let Some((center, rad, vals)) = &disk {
                if (lam - *center).norm() < rad / 3.0 {
                    let n = vals.len();
                    let mut s = c(0.0, 0.0);
                    for (j, v) in vals.iter().enumerate() {
                        let e = c(0.0, 2.0 * PI * j as f64 / n as f64).exp() * *rad;
                        s += *v * e / (*center + e - lam);
                    }
                    return Ok(s / n as f64);
                }
            }
            raw(lam)
        };

        // cut-off: |F(iτ)|·τ at the roundoff floor on two consecutive steps
        let root_scale = ctx.roots.map(|r| r[0].norm()).unwrap_or(0.0);
        let mut tau_cut = (3.0 * sigma).max(2.0 * (root_scale + k * l)).max(10.0);
        let mut quiet = 0;
        while tau_cut < 4000.0 {
            let small = (0..4).all(|j| {
                let t = tau_cut * (1.0 + 0.25 * j as f64);
                f_axis(t).map(|v| v.norm() * t < 1e-13).unwrap_or(false)
            });
            if small {
                quiet += 1;
                if quiet == 2 {
                    break;
                }
            } else {
                quiet = 0;
            }
            tau_cut *= 1.5;
        }

        let hmax = (6.0 / t_max.max(1e-3)).min(0.25 * k.max(0.05)).min(0.5);
        let mut breaks = vec![0.0, tau_cut];
        let kink = if profile.is_compact() { Some(k * profile.upsilon()) } else { None };
        if let Some(x) = kink {
            if x < tau_cut {
                breaks.push(x);
            }
        }
        if let Some(r) = ctx.roots {
            if r[0].im > 0.0 && r[0].im < tau_cut {
                breaks.push(r[0].im);
            }
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();

        let gl = GaussLegendre::new(16);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut panels = 0;
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            // geometric grading toward the C³ point τ = kΥ
            let grade_left = kink.is_some_and(|x| x == a);
            let grade_right = kink.is_some_and(|x| x == b);
            let mut lo = a;
            let mut hi = b;
            let g = (hmax).min(0.25 * (b - a));
            if grade_left {
                let mut d = 1e-12 * (1.0 + a);
                gl.push_panel(a, a + d, &mut nodes, &mut weights);
                panels += 1;
                while 2.0 * d < g {
                    gl.push_panel(a + d, a + 2.0 * d, &mut nodes, &mut weights);
                    d *= 2.0;
                    panels += 1;
                }
                lo = a + d;
            }
            if grade_right {
                let mut d = 1e-12 * (1.0 + b);
                gl.push_panel(b - d, b, &mut nodes, &mut weights);
                panels += 1;
                while 2.0 * d < g {
                    gl.push_panel(b - 2.0 * d, b - d, &mut nodes, &mut weights);
                    d *= 2.0;
                    panels += 1;
                }
                hi = b - d;
            }
            let np = ((hi - lo) / hmax).ceil().max(1.0) as usize;
            if nodes.len() + np * 16 > NODE_BUDGET {
                return Err(Error::QuadratureStall("too many oscillations on the axis for the node budget"));
            }
            for i in 0..np {
                let p0 = lo + (hi - lo) * i as f64 / np as f64;
                let p1 = lo + (hi - lo) * (i + 1) as f64 / np as f64;
                gl.push_panel(p0, p1, &mut nodes, &mut weights);
            }
            panels += np;
        }
        let mut weighted = Vec::with_capacity(nodes.len());
        for (x, w) in nodes.iter().zip(&weights) {
            weighted.push(f_axis(*x)? * (*w / PI));
        }
        let spec = ContourSpec {
            upsilon_star: l,
            tau_cut,
            sigma,
            tail_coefficients: cm[1..].to_vec(),
            nodes: nodes.len(),
            panels,
            disk_radius: disk.as_ref().map(|d| d.1).unwrap_or(0.0),
        };
        Ok(Remainder { ctx: ctx.clone(), spec, nodes, weighted })
    }

    // closed-form part: untapered-minus-tapered root terms and the tail terms
    fn explicit(&self, t: f64) -> f64 {
        let mut v = 0.0;
        if let (Some(r), Some(a)) = (self.ctx.roots, self.ctx.residues) {
            let share = 1.0 - self.ctx.taper;
            v += share * (a[0] * (r[0] * t).exp() + a[1] * (r[1] * t).exp()).re;
        }
        let sigma = self.spec.sigma;
        let e = (-sigma * t).exp();
        let mut p = e;
        for (j, cj) in self.spec.tail_coefficients.iter().enumerate() {
            v += cj * p;
            p *= t / (j + 1) as f64;
        }
        v
    }

    /// `Ĝ^r_k(t)`.
    pub fn at(&self, t: f64) -> f64 {
        let mut s = 0.0;
        for (x, wf) in self.nodes.iter().zip(&self.weighted) {
            let (sn, cs) = (x * t).sin_cos();
            s += wf.re * cs - wf.im * sn;
        }
        s + self.explicit(t)
    }

    /// `Ĝ^r_k(jh)`, `j = 0..n`, by a phase recurrence re-anchored every 128 steps.
    pub fn uniform(&self, h: f64, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for j in 0..n {
            out[j] = self.explicit(j as f64 * h);
        }
        const CHUNK: usize = 128;
        for (x, wf) in self.nodes.iter().zip(&self.weighted) {
            let step = c(0.0, x * h).exp();
            let mut j0 = 0;
            while j0 < n {
                let mut ph = c(0.0, x * h * j0 as f64).exp() * *wf;
                for o in out.iter_mut().take((j0 + CHUNK).min(n)).skip(j0) {
                    *o += ph.re;
                    ph *= step;
                }
                j0 += CHUNK;
            }
        }
        out
    }
}

/// Green function split at one wave number, sampled on a time grid.
#[derive(Debug, Clone)]
pub struct GreenDecomposition {
    pub k: f64,
    pub lambda_pm: Option<[Complex64; 2]>,
    pub a_pm: [Complex64; 2],
    pub remainder: Vec<(f64, f64)>,
    pub contour_spec: ContourSpec,
}

/// `Ĝ^r_k` on `t_grid` together with the roots and tapered residues.
pub fn green_remainder(profile: &EquilibriumProfile, k: f64, t_grid: &[f64]) -> Result<GreenDecomposition> {
    let ctx = GreenContext::new(profile, k)?;
    let t_max = t_grid.iter().fold(0.0f64, |m, &t| m.max(t));
    let rem = Remainder::new(&ctx, t_max)?;
    let remainder = t_grid.iter().map(|&t| (t, rem.at(t))).collect();
    Ok(GreenDecomposition { k, lambda_pm: ctx.roots, a_pm: ctx.a_pm(), remainder, contour_spec: rem.spec })
}

/// Volterra kernel `K_k(s) = −(i/k)·N(ks)`, whose Laplace transform is `1 − D`.
pub fn volterra_kernel(profile: &EquilibriumProfile, k: f64, s: f64) -> f64 {
    -sine_transform(profile, k * s) / k
}

/// Solves `ρ(t) = S(t) + ∫₀^t K(t−s)ρ(s) ds` on `t_j = jh`, `j < n`, by
/// trapezoidal product integration (`K(0) = 0`, so every step is explicit).
pub fn volterra_solve(kernel: &[f64], source: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = source.len();
    let mut rho = vec![c(0.0, 0.0); n];
    if n == 0 {
        return rho;
    }
    rho[0] = source[0];
    for i in 1..n {
        let mut s = rho[0] * (0.5 * kernel[i]);
        for j in 1..i {
            s += rho[j] * kernel[i - j];
        }
        rho[i] = source[i] + s * h;
    }
    rho
}

/// `ρ̂_k` by the Volterra route at step `h`, `n` samples.
pub fn volterra_density<F: Fn(f64) -> Complex64>(profile: &EquilibriumProfile, k: f64, source: F, h: f64, n: usize) -> Vec<Complex64> {
    let kern: Vec<f64> = (0..n).map(|j| volterra_kernel(profile, k, j as f64 * h)).collect();
    let s: Vec<Complex64> = (0..n).map(|j| source(j as f64 * h)).collect();
    volterra_solve(&kern, &s, h)
}

/// Volterra route at steps `h` and `h/2`, combined by Richardson extrapolation
/// (the trapezoidal error expands in even powers of `h`).
pub fn volterra_density_extrapolated<F: Fn(f64) -> Complex64>(profile: &EquilibriumProfile, k: f64, source: F, h: f64, n: usize) -> Vec<Complex64> {
    let coarse = volterra_density(profile, k, &source, h, n);
    let fine = volterra_density(profile, k, &source, 0.5 * h, 2 * n - 1);
    (0..n).map(|j| (fine[2 * j] * 4.0 - coarse[j]) / 3.0).collect()
}

/// Resolvent kernel `R = Ĝ_k − δ`, from `R = K + K⋆R`, Richardson-extrapolated.
pub fn resolvent_kernel(profile: &EquilibriumProfile, k: f64, h: f64, n: usize) -> Vec<f64> {
    let r = volterra_density_extrapolated(profile, k, |t| c(volterra_kernel(profile, k, t), 0.0), h, n);
    r.into_iter().map(|v| v.re).collect()
}

/// `∫₀^{t_j} e^{λ(t_j − s)} S(s) ds` for `t_j = jh`, stepping exactly in the
/// exponential and integrating each step with 8-point Gauss–Legendre.
pub fn exp_convolution<F: Fn(f64) -> Complex64>(lambda: Complex64, source: &F, h: f64, n: usize) -> Vec<Complex64> {
    let gl = GaussLegendre::new(8);
    let decay = (lambda * h).exp();
    let mut out = vec![c(0.0, 0.0); n];
    for j in 1..n {
        let t0 = (j - 1) as f64 * h;
        let mut inc = c(0.0, 0.0);
        for (x, w) in gl.x.iter().zip(&gl.w) {
            let s = 0.5 * h * (1.0 + x);
            inc += source(t0 + s) * (lambda * (h - s)).exp() * (0.5 * h * w);
        }
        out[j] = out[j - 1] * decay + inc;
    }
    out
}

/// Trapezoidal `∫₀^{t_j} g(t_j − s) f(s) ds` on a uniform grid.
pub fn trapezoid_convolution(g: &[f64], f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    let mut out = vec![c(0.0, 0.0); n];
    for i in 1..n {
        let mut s = (f[0] * g[i] + f[i] * g[0]) * 0.5;
        for j in 1..i {
            s += f[j] * g[i - j];
        }
        out[i] = s * h;
    }
    out
}

/// `Ĝ^r⋆S` on `t_j = jh`, Richardson-extrapolated from steps `h` and `h/2`.
pub fn remainder_convolution<F: Fn(f64) -> Complex64>(rem: &Remainder, source: &F, h: f64, n: usize) -> Vec<Complex64> {
    let s: Vec<Complex64> = (0..n).map(|j| source(j as f64 * h)).collect();
    let coarse = trapezoid_convolution(&rem.uniform(h, n), &s, h);
    let hf = 0.5 * h;
    let nf = 2 * n - 1;
    let sf: Vec<Complex64> = (0..nf).map(|j| source(j as f64 * hf)).collect();
    let fine = trapezoid_convolution(&rem.uniform(hf, nf), &sf, hf);
    (0..n).map(|j| (fine[2 * j] * 4.0 - coarse[j]) / 3.0).collect()
}

/// `ρ̂_k = S + (Ĝ^osc + Ĝ^r)⋆S` on `t_j = jh`.
pub fn green_density<F: Fn(f64) -> Complex64>(rem: &Remainder, source: F, h: f64, n: usize) -> Vec<Complex64> {
    let ctx = &rem.ctx;
    let mut rho: Vec<Complex64> = (0..n).map(|j| source(j as f64 * h)).collect();
    if let Some(r) = ctx.roots {
        let a = ctx.a_pm();
        if ctx.taper > 0.0 {
            for i in 0..2 {
                let e = exp_convolution(r[i], &source, h, n);
                for (o, v) in rho.iter_mut().zip(e) {
                    *o += v * a[i];
                }
            }
        }
    }
    for (o, v) in rho.iter_mut().zip(remainder_convolution(rem, &source, h, n)) {
        *o += v;
    }
    rho
}

/// `a₊` at small `k` for unbounded profiles, seeded from `±iτ₀`.
pub fn small_k_residue(profile: &EquilibriumProfile, k: f64) -> Result<Complex64> {
    let t0 = moment_tau(profile, 0)?.sqrt();
    let t1 = moment_tau(profile, 1)?;
    let seed = c(0.0, t0 + t1 * k * k / (2.0 * t0 * t0 * t0));
    let (lam, _) = newton_root(profile, k, seed)?;
    Ok(1.0 / root_derivative(profile, lam, k)?)
}
