//! The data-producing subcommands.

use vpspec::equilibria::{upsilon_identity_residual, EquilibriumProfile, Family, MomentTable};
use vpspec::field::{field_decomposition, volterra_step, OscSynthesis, UniformGrid};
use vpspec::fit::{decay_exponent_fit, envelope};
use vpspec::green::{green_density, volterra_density_extrapolated, GreenContext, Remainder};
use vpspec::spectral::{branch_scan, continue_root, xstar_residual, FD_TOLERANCE};
use vpspec::{Complex64, Error};

use crate::config::RunConfig;
use crate::csv::{num, Cell, Table};
use crate::error::{CliError, CliResult};

/// What a command produced: the main table, an optional companion table
/// written next to it, and warnings for stderr.
#[derive(Debug, Clone, Default)]
pub struct Output {
    pub main: String,
    pub synthesis: Option<String>,
    pub warnings: Vec<String>,
}

impl Output {
    fn table(t: Table) -> Self {
        Output { main: t.into_string(), ..Default::default() }
    }
}

/// Row flag raised by the Green and field commands.
const DEFAULT_ORACLE_TOL: f64 = 1e-4;
const DEFAULT_IDENTITY_TOL: f64 = 1e-6;

/// Width of the Landau band `|ratio − 1| ≤ 5(k − κ₀)`, and where it applies.
const LANDAU_BAND: f64 = 5.0;
const LANDAU_BAND_REACH: f64 = 5e-2;

pub fn describe(p: &EquilibriumProfile) -> String {
    match p.family {
        Family::Gaussian { amplitude, beta } => format!("gaussian(amplitude={amplitude}, beta={beta})"),
        Family::CompactPolynomial { amplitude, e_max, order } => {
            format!("compact_polynomial(amplitude={amplitude}, e_max={e_max}, order={order})")
        }
        Family::PowerLaw { amplitude, order } => format!("power_law(amplitude={amplitude}, order={order})"),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn moments(cfg: &RunConfig) -> CliResult<Output> {
    let p = cfg.checked_profile()?;
    let table = MomentTable::new(&p, 4);
    let mut t = Table::new(&["quantity", "j", "value"]);
    t.comment(format!("profile {}", describe(&p)));
    let k0 = table.kappa0;
    t.row(vec!["kappa0".into(), "-".into(), k0.into()]);
    t.row(vec!["kappa0_sq".into(), "-".into(), (k0 * k0).into()]);
    t.row(vec!["upsilon".into(), "-".into(), p.upsilon().into()]);
    for (j, v) in table.tau_sq.iter().enumerate() {
        t.row(vec!["tau_sq".into(), j.to_string().into(), (*v).into()]);
    }
    for (j, v) in table.kappa_sq.iter().enumerate() {
        t.row(vec!["kappa_sq".into(), j.to_string().into(), (*v).into()]);
    }
    // κ₀²Υ² against τ₀² + κ₁², reported rather than assumed
    match upsilon_identity_residual(&p) {
        Ok(r) => {
            let alt = table.tau_sq[0] + table.kappa_sq[1];
            t.row(vec!["kappa0_upsilon".into(), "-".into(), (k0 * p.upsilon()).into()]);
            t.row(vec!["sqrt_tau0_sq_plus_kappa1_sq".into(), "-".into(), alt.sqrt().into()]);
            t.row(vec!["identity_residual".into(), "-".into(), r.into()]);
        }
        Err(e) => t.comment(format!("identity_residual unavailable: {e}")),
    }
    t.comment("validation passed");
    Ok(Output::table(t))
}

pub fn branch(cfg: &RunConfig) -> CliResult<Output> {
    let p = cfg.checked_profile()?;
    let k0 = cfg.kappa0();
    if !p.is_compact() || k0 == 0.0 {
        return Err(CliError::Usage("empty k-grid: the branch lives on (0, κ₀] and κ₀ = 0 for unbounded support".into()));
    }
    let ks = cfg.k_grid(k0 / 200.0, k0, 200)?;
    if let Some(&k) = ks.iter().find(|&&k| k > k0 * (1.0 + 1e-12)) {
        return Err(CliError::Validation(format!("k = {k} lies past κ₀ = {k0}; use `landau` there")));
    }
    let scan = branch_scan(&p, &ks)?;
    let mut t = Table::new(&[
        "k",
        "tau_star",
        "dtau",
        "d2tau",
        "nu_star",
        "group_velocity",
        "xstar_residual",
        "fd_mismatch",
        "flag",
    ]);
    for bp in &scan.points {
        let res = xstar_residual(&p, bp)?;
        let flag = if bp.fd_mismatch > FD_TOLERANCE { "fd_mismatch" } else { "ok" };
        t.row(vec![
            bp.k.into(),
            bp.tau_star.into(),
            bp.dtau.into(),
            bp.d2tau.into(),
            bp.phase_velocity.into(),
            bp.group_velocity.into(),
            res.into(),
            bp.fd_mismatch.into(),
            flag.into(),
        ]);
    }
    t.comment(format!(
        "certificate tau_increasing={} nu_decreasing={} min_d2tau={} max_d2tau={} certified={}",
        scan.tau_increasing,
        scan.nu_decreasing,
        num(scan.min_d2tau),
        num(scan.max_d2tau),
        scan.certified()
    ));
    if let Some(last) = scan.points.last() {
        if (last.k - k0).abs() <= 1e-12 * k0 {
            t.comment(format!("nu_star_at_kappa0_minus_upsilon={}", num(last.phase_velocity - p.upsilon())));
        }
    }
    Ok(Output::table(t))
}

pub fn landau(cfg: &RunConfig) -> CliResult<Output> {
    let p = cfg.checked_profile()?;
    let k0 = cfg.kappa0();
    let ks = if p.is_compact() { cfg.k_grid(k0 + 1e-3, k0 + 0.5, 25)? } else { cfg.k_grid(0.3, 1.5, 25)? };
    if let Some(&k) = ks.iter().find(|&&k| k <= k0) {
        return Err(CliError::Validation(format!("k = {k} is not above κ₀ = {k0}; use `branch` there")));
    }
    let mut t = Table::new(&[
        "k",
        "re_lambda",
        "im_lambda",
        "newton_residual",
        "predicted_re",
        "ratio",
        "band",
        "flag",
    ]);
    for &k in &ks {
        let dk = k - k0;
        let band = if p.is_compact() && dk <= LANDAU_BAND_REACH { LANDAU_BAND * dk } else { f64::NAN };
        match continue_root(&p, k) {
            Ok(r) => {
                let pred = r.predicted_rate.unwrap_or(f64::NAN);
                let ratio = r.lambda.re / pred;
                let flag = if !(r.lambda.re < 0.0) {
                    "not_damped"
                } else if band.is_finite() && !((ratio - 1.0).abs() <= band) {
                    "outside_band"
                } else {
                    "ok"
                };
                t.row(vec![
                    k.into(),
                    r.lambda.re.into(),
                    r.lambda.im.into(),
                    r.newton_residual.into(),
                    pred.into(),
                    ratio.into(),
                    band.into(),
                    flag.into(),
                ]);
            }
            Err(Error::NewtonDiverged { residual }) => {
                let nan = f64::NAN;
                t.row(vec![
                    k.into(),
                    nan.into(),
                    nan.into(),
                    residual.into(),
                    nan.into(),
                    nan.into(),
                    band.into(),
                    "newton_diverged".into(),
                ]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    t.comment("lambda_minus = conj(lambda_plus) on every row");
    Ok(Output::table(t))
}

/// Steps past this multiple of the Volterra step leave the Green route
/// under-resolved.
const COARSE_FACTOR: f64 = 10.0;

/// Log–log slope of the remainder envelope over `kt ∈ [5, 50]`.
fn remainder_slope(p: &EquilibriumProfile, k: f64, times: &[f64], g_r: &[f64]) -> String {
    let trace: Vec<(f64, f64)> = times
        .iter()
        .zip(g_r)
        .filter(|(t, _)| k * **t >= 5.0 && k * **t <= 50.0)
        .map(|(t, g)| (*t, *g))
        .collect();
    let speed = if p.is_compact() { p.upsilon() } else { 1.0 };
    let env = envelope(&trace, 2.0 * std::f64::consts::PI / (k * speed));
    match decay_exponent_fit(&env, (5.0 / k, 50.0 / k)) {
        Ok(f) => format!(
            "remainder_slope k={} slope={} residual={} samples={} flagged={}",
            num(k),
            num(f.slope),
            num(f.residual),
            f.samples,
            f.flagged
        ),
        Err(e) => format!("remainder_slope k={} unavailable: {e}", num(k)),
    }
}

pub fn green(cfg: &RunConfig) -> CliResult<Output> {
    let p = cfg.checked_profile()?;
    let k0 = cfg.kappa0();
    let kd = if p.is_compact() { 0.5 * k0 } else { 1.0 };
    let ks = cfg.k_grid(kd, kd, 1)?;
    let (t_max, n) = cfg.t_grid(50.0, 2001)?;
    let tol = cfg.tol.unwrap_or(DEFAULT_ORACLE_TOL);
    let grid = UniformGrid::new(t_max, n)?;
    let h = grid.step;
    let times = grid.times();
    let data = cfg.data;
    let mut out = Output::default();
    let mut t = Table::new(&[
        "k",
        "t",
        "re_G_osc",
        "im_G_osc",
        "re_G_r",
        "im_G_r",
        "rho_green",
        "rho_volterra",
        "oracle_delta",
        "flag",
    ]);
    for &k in &ks {
        let vstep = volterra_step(&p, k);
        if h > COARSE_FACTOR * vstep {
            out.warnings.push(format!(
                "t-grid step {h:.3e} at k = {k} is coarser than {:.3e}; the Green route may be under-resolved",
                COARSE_FACTOR * vstep
            ));
        }
        let ctx = GreenContext::new(&p, k)?;
        let rem = match Remainder::new(&ctx, t_max) {
            Ok(r) => r,
            Err(Error::QuadratureStall(why)) => {
                let nan = f64::NAN;
                for &tj in &times {
                    t.row(vec![
                        k.into(),
                        tj.into(),
                        nan.into(),
                        nan.into(),
                        nan.into(),
                        nan.into(),
                        nan.into(),
                        nan.into(),
                        nan.into(),
                        "quadrature_stall".into(),
                    ]);
                }
                t.comment(format!("k={} quadrature stalled: {why}", num(k)));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let src = |s: f64| c(data.free_density(k, s), 0.0);
        let rho = green_density(&rem, src, h, n);
        let sub = (h / vstep).ceil().max(1.0) as usize;
        let rv = volterra_density_extrapolated(&p, k, src, h / sub as f64, (n - 1) * sub + 1);
        let scale = rho.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let g_r: Vec<f64> = times.iter().map(|&s| rem.at(s)).collect();
        for j in 0..n {
            let g_osc = ctx.oscillatory(times[j]);
            let gap = (rho[j] - rv[j * sub]).norm();
            let delta = if scale > 0.0 { gap / scale } else { gap };
            t.row(vec![
                k.into(),
                times[j].into(),
                g_osc.re.into(),
                g_osc.im.into(),
                g_r[j].into(),
                0.0.into(),
                rho[j].re.into(),
                rv[j * sub].re.into(),
                delta.into(),
                (if delta <= tol { "ok" } else { "oracle" }).into(),
            ]);
        }
        t.comment(format!("tail_cut k={} tau_cut={}", num(k), num(rem.spec.tau_cut)));
        t.comment(remainder_slope(&p, k, &times, &g_r));
    }
    out.main = t.into_string();
    Ok(out)
}

/// Times of the synthesis table: 40 log-spaced samples over `[T/20, T]`.
fn synthesis_times(t_max: f64) -> Vec<f64> {
    let (a, b) = ((t_max / 20.0).ln(), t_max.ln());
    (0..40).map(|i| (a + (b - a) * i as f64 / 39.0).exp()).collect()
}

pub fn evolve(cfg: &RunConfig) -> CliResult<Output> {
    let p = cfg.checked_profile()?;
    let k0 = cfg.kappa0();
    let kd = if p.is_compact() { 0.5 * k0 } else { 0.5 };
    let ks = cfg.k_grid(kd, kd, 1)?;
    if let Some(&k) = ks.iter().find(|&&k| k >= k0 + 1.0) {
        return Err(CliError::Validation(format!("k = {k} is beyond κ₀ + 1 = {}", k0 + 1.0)));
    }
    let (t_max, n) = cfg.t_grid(50.0, 2001)?;
    let tol = cfg.tol.unwrap_or(DEFAULT_IDENTITY_TOL);
    let grid = UniformGrid::new(t_max, n)?;
    let data = cfg.data;
    let mut t = Table::new(&[
        "k",
        "t",
        "re_S",
        "im_S",
        "re_E",
        "im_E",
        "re_E_osc",
        "im_E_osc",
        "re_E_r",
        "im_E_r",
        "identity_residual",
        "volterra_delta",
        "flag",
    ]);
    for &k in &ks {
        let tr = field_decomposition(&p, &data, k, grid)?;
        let (Some(osc), Some(e_r), Some(res)) = (&tr.e_osc, &tr.e_r, tr.identity_residual) else {
            unreachable!("field_decomposition fills the split");
        };
        let flag = if res > tol {
            "identity"
        } else if tr.volterra_delta > DEFAULT_ORACLE_TOL {
            "oracle"
        } else {
            "ok"
        };
        for j in 0..n {
            let e_osc = osc[0][j] + osc[1][j];
            t.row(vec![
                k.into(),
                grid.t(j).into(),
                tr.s_hat[j].re.into(),
                tr.s_hat[j].im.into(),
                tr.e_hat[j].re.into(),
                tr.e_hat[j].im.into(),
                e_osc.re.into(),
                e_osc.im.into(),
                e_r[j].re.into(),
                e_r[j].im.into(),
                Cell::Num(res),
                Cell::Num(tr.volterra_delta),
                flag.into(),
            ]);
        }
    }
    let mut out = Output::table(t);
    if p.is_compact() {
        let syn = OscSynthesis::new(&p, &data, t_max)?;
        let pts = syn.evaluate(&synthesis_times(t_max));
        let mut s = Table::new(&["t", "E_osc_value", "E_osc_point", "fitted_alpha", "fit_residual", "flag"]);
        let trace: Vec<(f64, f64)> = pts.iter().map(|q| (q.t, q.magnitude)).collect();
        let (alpha, resid, flag) = if pts.iter().all(|q| q.magnitude == 0.0) {
            (f64::NAN, f64::NAN, "zero_field")
        } else {
            let f = decay_exponent_fit(&trace, (0.0, f64::INFINITY))?;
            (-f.slope, f.residual, if f.flagged { "not_power_law" } else { "ok" })
        };
        for q in &pts {
            s.row(vec![q.t.into(), q.value.into(), q.magnitude.into(), alpha.into(), resid.into(), flag.into()]);
        }
        s.comment(format!("synthesis k_nodes={}", syn.node_count()));
        out.synthesis = Some(s.into_string());
    } else {
        out.warnings.push("synthesis skipped: it needs a compactly supported equilibrium".into());
    }
    Ok(out)
}
