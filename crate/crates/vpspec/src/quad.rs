//! Quadrature: adaptive Gauss–Kronrod (21-point) on finite and semi-infinite
//! intervals, plus Gauss–Legendre rules for fixed panel sums.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};
use num_complex::Complex64;
// std's inherent float methods shadow these in test builds
#[allow(unused_imports)]
use num_traits::Float;

/// Absolute / relative error targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
}

impl Tol {
    pub const DEFAULT: Tol = Tol { abs: 1e-12, rel: 1e-10 };
    pub const TIGHT: Tol = Tol { abs: 1e-15, rel: 1e-13 };

    pub const fn new(abs: f64, rel: f64) -> Self {
        Tol { abs, rel }
    }
}

impl Default for Tol {
    fn default() -> Self {
        Tol::DEFAULT
    }
}

/// Values a quadrature can accumulate.
pub trait Quadrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn modulus(self) -> f64;
}

impl Quadrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Quadrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208067474730,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

fn gk21<T: Quadrand, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = T::zero();
    for j in 0..10 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let kv = kron * h;
    let gv = gauss * h;
    (kv, (kv - gv).modulus())
}

/// Adaptive 21-point Gauss–Kronrod on `[a, b]`, bisecting the interval with
/// the largest local error until the total meets `tol`.
pub fn integrate<T: Quadrand, F: FnMut(f64) -> T>(mut f: F, a: f64, b: f64, tol: Tol) -> QuadResult<T> {
    integrate_limited(&mut f, a, b, tol, 4000)
}

pub fn integrate_limited<T: Quadrand, F: FnMut(f64) -> T>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: Tol,
    max_segments: usize,
) -> QuadResult<T> {
    if a == b {
        return QuadResult { value: T::zero(), error: 0.0, evals: 0, converged: true };
    }
    let (v0, e0) = gk21(f, a, b);
    let mut segs: Vec<(f64, f64, T, f64)> = vec![(a, b, v0, e0)];
    let mut total = v0;
    let mut err = e0;
    let mut evals = 21;
    loop {
        let target = tol.abs.max(tol.rel * total.modulus());
        if err <= target {
            return QuadResult { value: total, error: err, evals, converged: true };
        }
        if segs.len() >= max_segments {
            return QuadResult { value: total, error: err, evals, converged: false };
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, be), (i, s)| if s.3 > be { (i, s.3) } else { (bi, be) });
        let (sa, sb, sv, se) = segs.swap_remove(idx);
        let m = 0.5 * (sa + sb);
        if m <= sa || m >= sb {
            // interval exhausted at machine resolution
            return QuadResult { value: total, error: err, evals, converged: false };
        }
        let (lv, le) = gk21(f, sa, m);
        let (rv, re) = gk21(f, m, sb);
        evals += 42;
        total = total - sv + lv + rv;
        err = err - se + le + re;
        segs.push((sa, m, lv, le));
        segs.push((m, sb, rv, re));
        if err < 0.0 {
            err = segs.iter().map(|s| s.3).sum();
        }
    }
}

/// Integral over `[a, b]` split at the interior breakpoints `pts` (sorted or not).
pub fn integrate_pts<T: Quadrand, F: FnMut(f64) -> T>(mut f: F, a: f64, b: f64, pts: &[f64], tol: Tol) -> QuadResult<T> {
    let mut cuts: Vec<f64> = pts.iter().copied().filter(|&p| p > a && p < b).collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    let mut edges = vec![a];
    edges.extend(cuts);
    edges.push(b);
    let n = (edges.len() - 1) as f64;
    let piece_tol = Tol { abs: tol.abs / n, rel: tol.rel };
    let mut out = QuadResult { value: T::zero(), error: 0.0, evals: 0, converged: true };
    for w in edges.windows(2) {
        let r = integrate_limited(&mut f, w[0], w[1], piece_tol, 4000);
        out.value = out.value + r.value;
        out.error += r.error;
        out.evals += r.evals;
        out.converged &= r.converged;
    }
    out
}

/// Integral over `[a, ∞)` through the map `u = a + s/(1-s)`.
pub fn integrate_to_infinity<T: Quadrand, F: FnMut(f64) -> T>(mut f: F, a: f64, tol: Tol) -> QuadResult<T> {
    let mut g = |s: f64| {
        let one = 1.0 - s;
        let u = a + s / one;
        f(u) * (1.0 / (one * one))
    };
    integrate_limited(&mut g, 0.0, 1.0, tol, 4000)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            dp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// A reusable Gauss–Legendre rule mapped onto arbitrary panels.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        GaussLegendre { x, w }
    }

    /// Append nodes and weights of this rule on `[a, b]` to the output vectors.
    pub fn push_panel(&self, a: f64, b: f64, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        for (xi, wi) in self.x.iter().zip(&self.w) {
            nodes.push(c + h * xi);
            weights.push(h * wi);
        }
    }

    pub fn panel<T: Quadrand, F: FnMut(f64) -> T>(&self, mut f: F, a: f64, b: f64) -> T {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = T::zero();
        for (xi, wi) in self.x.iter().zip(&self.w) {
            s = s + f(c + h * xi) * *wi;
        }
        s * h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gk_polynomial_exact() {
        let r = integrate(|x: f64| x.powi(8) - 3.0 * x.powi(5), -1.0, 2.0, Tol::DEFAULT);
        let exact = (512.0 + 1.0) / 9.0 - 0.5 * (64.0 - 1.0);
        assert!((r.value - exact).abs() < 1e-12);
        assert_eq!(r.evals, 21);
    }

    #[test]
    fn gk_oscillatory() {
        let r = integrate(|x: f64| (40.0 * x).sin() * x, 0.0, PI, Tol::TIGHT);
        let exact = -PI * (40.0 * PI).cos() / 40.0 + (40.0 * PI).sin() / 1600.0;
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn semi_infinite_gaussian() {
        let r = integrate_to_infinity(|x: f64| (-x * x / 2.0).exp(), 0.0, Tol::TIGHT);
        assert!((r.value - (PI / 2.0).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn legendre_rule() {
        let gl = GaussLegendre::new(16);
        assert!((gl.w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let v = gl.panel(|x: f64| x.exp(), 0.0, 1.0);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
    }
}
