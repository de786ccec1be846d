//! Property suite over the two shipped profiles, reported as JSON lines.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;
use vpspec::dispersion::{eval_d, eval_h};
use vpspec::equilibria::{moment_kappa, moment_tau, survival_threshold, EquilibriumProfile};
use vpspec::field::{field_decomposition, volterra_step, InitialData, SpatialProfile, UniformGrid};
use vpspec::green::{
    contour_residue, green_density, small_k_residue, volterra_density_extrapolated, GreenContext, Remainder,
};
use vpspec::spectral::{
    branch_scan, continue_root, langmuir_branch, penrose_margin, root_pair, winding_number, xstar_residual, Rect,
};
use vpspec::{Complex64, Result};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `value ≤ threshold`; the threshold is a tolerance and may be overridden.
    AtMost,
    /// `value > threshold`, fixed.
    Above,
    /// `value < threshold`, fixed.
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub invariant: &'static str,
    pub profile: &'static str,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub failed_invariants: Vec<String>,
}

struct Spec {
    invariant: &'static str,
    relation: Relation,
    threshold: f64,
}

const SPECS: [Spec; 18] = [
    Spec { invariant: "moments.kappa0_closed_form", relation: Relation::AtMost, threshold: 1e-8 },
    Spec { invariant: "moments.kappa0_zero", relation: Relation::AtMost, threshold: 1e-300 },
    Spec { invariant: "moments.kappa_sq0_cross", relation: Relation::AtMost, threshold: 1e-8 },
    Spec { invariant: "dispersion.endpoint", relation: Relation::AtMost, threshold: 1e-8 },
    Spec { invariant: "dispersion.plemelj", relation: Relation::AtMost, threshold: 1e-6 },
    Spec { invariant: "branch.xstar_residual", relation: Relation::AtMost, threshold: 1e-9 },
    Spec { invariant: "branch.nu_end", relation: Relation::AtMost, threshold: 1e-8 },
    Spec { invariant: "branch.tau_end", relation: Relation::AtMost, threshold: 1e-8 },
    Spec { invariant: "branch.convexity", relation: Relation::Above, threshold: 0.0 },
    Spec { invariant: "branch.monotone", relation: Relation::Above, threshold: 0.0 },
    Spec { invariant: "landau.band", relation: Relation::Below, threshold: 1.0 },
    Spec { invariant: "landau.damped", relation: Relation::Below, threshold: 0.0 },
    Spec { invariant: "spectral.winding", relation: Relation::Below, threshold: 0.5 },
    Spec { invariant: "spectral.penrose_margin", relation: Relation::Above, threshold: 0.0 },
    Spec { invariant: "green.residue", relation: Relation::AtMost, threshold: 1e-8 },
    Spec { invariant: "green.small_k_residue", relation: Relation::AtMost, threshold: 1e-6 },
    Spec { invariant: "green.oracle", relation: Relation::AtMost, threshold: 1e-4 },
    Spec { invariant: "field.identity", relation: Relation::AtMost, threshold: 1e-6 },
];

/// Names accepted in the config's `tolerances` map.
pub fn tolerance_names() -> Vec<&'static str> {
    SPECS.iter().filter(|s| s.relation == Relation::AtMost).map(|s| s.invariant).collect()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0f64, f64::max)
}

fn endpoint(p: &EquilibriumProfile) -> Result<f64> {
    let k0 = survival_threshold(p);
    let ups = p.upsilon();
    let mut worst: f64 = 0.0;
    for k in [0.5 * k0, k0, 2.0 * k0] {
        let d = eval_d(p, c(0.0, k * ups), k)?.value;
        worst = worst.max((d - c(1.0 - k0 * k0 / (k * k), 0.0)).norm());
    }
    Ok(worst)
}

/// Boundary `H(x)` against the interior values at `γ = 10⁻², 10⁻³, 10⁻⁴`
/// extrapolated quadratically to `γ = 0`.
fn plemelj(p: &EquilibriumProfile) -> Result<f64> {
    let ups = p.upsilon();
    let gs = [1e-2, 1e-3, 1e-4];
    let mut worst: f64 = 0.0;
    for x in [-0.8, -0.35, 0.1, 0.5, 0.85] {
        let x = x * ups;
        let mut limit = c(0.0, 0.0);
        for i in 0..3 {
            let mut w = 1.0;
            for j in 0..3 {
                if i != j {
                    w *= gs[j] / (gs[j] - gs[i]);
                }
            }
            limit += eval_h(p, c(x, gs[i]))?.value * w;
        }
        let b = eval_h(p, c(x, 0.0))?.value;
        worst = worst.max((b - limit).norm() / b.norm().max(1.0));
    }
    Ok(worst)
}

fn winding(p: &EquilibriumProfile) -> Result<f64> {
    let k0 = survival_threshold(p);
    let first = if p.is_compact() { 0.5 * k0 } else { 0.5 };
    let mut worst: f64 = 0.0;
    for k in [first, 1.0, 2.0] {
        let s = if p.is_compact() && k <= k0 { langmuir_branch(p, k)?.tau_star.max(1.0) } else { 1.0 };
        let rect = Rect { re_min: 1e-2, re_max: 10.0, im_min: -10.0 * s, im_max: 10.0 * s };
        worst = worst.max((winding_number(p, k, rect)?.winding as f64).abs());
    }
    Ok(worst)
}

fn residue(p: &EquilibriumProfile, k: f64) -> Result<f64> {
    let ctx = GreenContext::new(p, k)?;
    let (Some(roots), Some(res), Some(r)) = (ctx.roots, ctx.residues, ctx.residue_radius()) else {
        return Err(vpspec::Error::OutOfRange("no root to take a residue at"));
    };
    Ok((contour_residue(p, k, roots[0], r, 128)? - res[0]).norm())
}

fn oracle(p: &EquilibriumProfile, k: f64, t_max: f64) -> Result<f64> {
    let data = InitialData::new(SpatialProfile::Gaussian { width: 1.0 }, *p);
    let h = volterra_step(p, k);
    let n = (t_max / h).ceil() as usize + 1;
    let h = t_max / (n - 1) as f64;
    let src = |t: f64| c(data.free_density(k, t), 0.0);
    let rem = Remainder::new(&GreenContext::new(p, k)?, t_max)?;
    let g = green_density(&rem, src, h, n);
    let v = volterra_density_extrapolated(p, k, src, h, n);
    let scale = max_of(v.iter().map(|z| z.norm()));
    Ok(max_of(g.iter().zip(&v).map(|(a, b)| (a - b).norm())) / scale)
}

fn identity(p: &EquilibriumProfile, k: f64) -> Result<f64> {
    let data = InitialData::new(SpatialProfile::Gaussian { width: 1.0 }, *p);
    let tr = field_decomposition(p, &data, k, UniformGrid::new(20.0, 2001)?)?;
    Ok(tr.identity_residual.unwrap_or(f64::NAN))
}

/// Runs every check, in a fixed order.
fn measurements() -> Vec<(&'static str, &'static str, Result<f64>)> {
    let cp = EquilibriumProfile::compact_default();
    let mx = EquilibriumProfile::maxwellian();
    let k0 = survival_threshold(&cp);
    let mut out = Vec::new();
    let exact = 64.0 * 2f64.sqrt() * PI / 315.0;
    out.push(("moments.kappa0_closed_form", "compact", Ok((k0 * k0 - exact).abs() / exact)));
    out.push(("moments.kappa0_zero", "maxwellian", Ok(survival_threshold(&mx))));
    // the two integral forms of κ₀² must agree
    out.push(("moments.kappa_sq0_cross", "compact", moment_kappa(&cp, 0).map(|v| (v - k0 * k0).abs() / (k0 * k0))));
    out.push(("dispersion.endpoint", "compact", endpoint(&cp)));
    out.push(("dispersion.plemelj", "compact", plemelj(&cp)));

    let ks: Vec<f64> = (1..=50).map(|i| k0 * i as f64 / 50.0).collect();
    match branch_scan(&cp, &ks) {
        Ok(scan) => {
            let xr = scan.points.iter().map(|b| xstar_residual(&cp, b)).collect::<Result<Vec<f64>>>();
            out.push(("branch.xstar_residual", "compact", xr.map(|v| max_of(v.into_iter().map(f64::abs)))));
            let last = scan.points[scan.points.len() - 1];
            out.push(("branch.nu_end", "compact", Ok((last.phase_velocity - cp.upsilon()).abs())));
            let end = k0 * cp.upsilon();
            out.push(("branch.tau_end", "compact", Ok((last.tau_star - end).abs() / end)));
            out.push(("branch.convexity", "compact", Ok(scan.min_d2tau)));
            let monotone = scan.tau_increasing && scan.nu_decreasing;
            out.push(("branch.monotone", "compact", Ok(if monotone { 1.0 } else { 0.0 })));
        }
        Err(e) => {
            for name in ["branch.xstar_residual", "branch.nu_end", "branch.convexity", "branch.monotone"] {
                out.push((name, "compact", Err(e.clone())));
            }
        }
    }

    let band = [1e-3, 1e-2, 5e-2]
        .iter()
        .map(|&dk| -> Result<f64> {
            let (plus, minus) = root_pair(&cp, k0 + dk)?;
            let law = plus.predicted_rate.ok_or(vpspec::Error::OutOfRange("no asymptotic rate"))?;
            if (minus.lambda - plus.lambda.conj()).norm() > 1e-12 * plus.lambda.norm() {
                return Ok(f64::INFINITY);
            }
            // in units of the band half-width 5(k − κ₀)
            Ok((plus.lambda.re / law - 1.0).abs() / (5.0 * dk))
        })
        .collect::<Result<Vec<f64>>>();
    out.push(("landau.band", "compact", band.map(max_of)));
    let damped = [0.01, 0.1, 0.3, 0.6]
        .iter()
        .map(|dk| continue_root(&cp, k0 + dk).map(|r| r.lambda.re))
        .collect::<Result<Vec<f64>>>();
    out.push(("landau.damped", "compact", damped.map(|v| v.into_iter().fold(f64::NEG_INFINITY, f64::max))));

    for (p, name) in [(cp, "compact"), (mx, "maxwellian")] {
        out.push(("spectral.winding", name, winding(&p)));
        let kp = survival_threshold(&p);
        out.push(("spectral.penrose_margin", name, penrose_margin(&p, kp + 0.2, kp + 4.0, 39, 400)));
    }
    out.push(("green.residue", "compact", residue(&cp, 0.5 * k0)));
    out.push(("green.residue", "maxwellian", residue(&mx, 0.5)));
    let small = (|| -> Result<f64> {
        let a1 = small_k_residue(&mx, 0.02)?;
        let a2 = small_k_residue(&mx, 0.01)?;
        let a0 = (a2 * 4.0 - a1) / 3.0;
        Ok((a0 - c(0.0, 0.5 * moment_tau(&mx, 0)?.sqrt())).norm())
    })();
    out.push(("green.small_k_residue", "maxwellian", small));
    out.push(("green.oracle", "compact", oracle(&cp, 0.5 * k0, 30.0)));
    out.push(("green.oracle", "maxwellian", oracle(&mx, 1.0, 30.0)));
    out.push(("field.identity", "compact", identity(&cp, 0.5 * k0)));
    out.push(("field.identity", "maxwellian", identity(&mx, 0.5)));
    out
}

/// The suite's JSON lines followed by a summary line, and whether all passed.
pub fn verify(cfg: &RunConfig) -> CliResult<(String, bool)> {
    let names = tolerance_names();
    if let Some(bad) = cfg.tolerances.keys().find(|k| !names.contains(&k.as_str())) {
        return Err(CliError::Validation(format!(
            "unknown tolerance `{bad}` (expected one of {})",
            names.join(", ")
        )));
    }
    let thresholds: BTreeMap<&str, (Relation, f64)> = SPECS
        .iter()
        .map(|s| {
            let t = match s.relation {
                Relation::AtMost => cfg.tolerances.get(s.invariant).copied().or(cfg.tol).unwrap_or(s.threshold),
                _ => s.threshold,
            };
            (s.invariant, (s.relation, t))
        })
        .collect();
    let mut text = String::new();
    let mut failed = Vec::new();
    let mut passed = 0;
    for (invariant, profile, m) in measurements() {
        let (relation, threshold) = thresholds[invariant];
        let (value, error) = match m {
            Ok(v) => (v, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        let pass = match relation {
            Relation::AtMost => value <= threshold,
            Relation::Above => value > threshold,
            Relation::Below => value < threshold,
        };
        if pass {
            passed += 1;
        } else {
            failed.push(format!("{invariant}[{profile}]"));
        }
        let line = CheckLine { invariant, profile, value, relation, threshold, pass, error };
        text.push_str(&serde_json::to_string(&line).expect("plain struct serializes"));
        text.push('\n');
    }
    let ok = failed.is_empty();
    let summary = Summary { passed, failed: failed.len(), failed_invariants: failed };
    text.push_str(&serde_json::to_string(&serde_json::json!({ "summary": summary })).expect("plain struct serializes"));
    text.push('\n');
    Ok((text, ok))
}
