use crate::config::RunConfig;
use crate::table::Table;
use hypoisson_core::boundary::seeded_test_forms;
use hypoisson_core::cfun::{c_component, c_components, c_integral_oracle, OracleOptions};
use hypoisson_core::eisenstein::{eisenstein_closed, eisenstein_focused, hs_limit_check, scalar_components};
use hypoisson_core::invops::{casimir_residual, eigen_report, Steps};
use hypoisson_core::lorentz::{embed_k, geodesic};
use hypoisson_core::poisson::{fatou_residual, fatou_residual_l2, gamma_lambda, hardy_norms, invert_many};
use hypoisson_core::sphquad::{seeded_rotations, FocusedRule};
use hypoisson_core::verify;
use hypoisson_core::{Complex64, Error, PoissonField, SphereQuadrature};

/// Table plus the verdict of the tolerance checks attached to the subcommand.
pub struct Outcome {
    pub table: Table,
    pub passed: bool,
    pub summary: String,
}

pub enum CmdError {
    /// Invalid request; exit code 2.
    Config(String),
    /// Numerical failure; exit code 1.
    Compute(String),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Domain(_) | Error::Degree(_) | Error::Divergence(_) => CmdError::Config(e.to_string()),
            _ => CmdError::Compute(e.to_string()),
        }
    }
}

type CmdResult = Result<Outcome, CmdError>;

/// Focused rule used when fields feed finite differences or L^r norms.
const FIELD_RULE: FocusedRule = FocusedRule { panel_points: 8, level: 3 };
/// Cheaper rule for the nested inversion integral.
const INVERT_RULE: FocusedRule = FocusedRule { panel_points: 6, level: 2 };

fn rel_or_abs(a: Complex64, b: Complex64, scale: f64) -> f64 {
    let d = (a - b).norm();
    if b.norm() > 1e-12 * scale {
        d / b.norm()
    } else {
        d / scale
    }
}

pub fn cmd_cfun(cfg: &RunConfig) -> CmdResult {
    let mut table = Table::new(&[
        "mu_re", "mu_im", "c_scalar_re", "c_scalar_im", "c_qminus_re", "c_qminus_im", "c_q_re", "c_q_im", "oracle_err",
    ]);
    let mut worst: f64 = 0.0;
    for j in 0..cfg.samples {
        let mu = Complex64::new(cfg.mu_re + 0.5 * j as f64, cfg.mu_im);
        let params = cfg.params()?.with_mu(mu)?;
        let c = c_components(&params)?;
        let lower = c.lower.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        let oracle_err = if cfg.n <= 4 && mu.re > 0.0 {
            let o = c_integral_oracle(&params, &OracleOptions::default())?;
            let scale = c.scalar.norm();
            let mut e = rel_or_abs(o.upper, c.upper, scale);
            if let (Some(a), Some(b)) = (o.lower, c.lower) {
                e = e.max(rel_or_abs(a, b, scale));
            }
            worst = worst.max(e);
            e
        } else {
            f64::NAN
        };
        table.push(vec![
            mu.re.into(),
            mu.im.into(),
            c.scalar.re.into(),
            c.scalar.im.into(),
            lower.re.into(),
            lower.im.into(),
            c.upper.re.into(),
            c.upper.im.into(),
            oracle_err.into(),
        ]);
    }
    Ok(Outcome {
        table,
        passed: worst < verify::ORACLE_REL_TOL,
        summary: format!("max oracle error {worst:.2e} (tol {:.0e})", verify::ORACLE_REL_TOL),
    })
}

pub fn cmd_fatou(cfg: &RunConfig) -> CmdResult {
    let params = cfg.params()?;
    let f = seeded_test_forms(cfg.n, cfg.q, 0.8, 1, cfg.seed)?.remove(0);
    let field = PoissonField::new(params, f, FIELD_RULE)?;
    let quad = SphereQuadrature::build(cfg.n, cfg.quad_level)?;
    let ks = seeded_rotations(cfg.n, cfg.samples, cfg.seed.wrapping_add(1));
    let mut table = Table::new(&["t", "sample", "residual", "relative"]);
    let mut l2 = Vec::new();
    for t in cfg.t_grid() {
        for (i, k) in ks.iter().enumerate() {
            let r = fatou_residual(&field, k, t)?;
            let fk = field.boundary.eval_on_k(k)?.norm();
            table.push(vec![t.into(), i.to_string().as_str().into(), r.into(), (r / fk).into()]);
        }
        let (r, nf) = fatou_residual_l2(&field, t, &quad)?;
        table.push(vec![t.into(), "l2".into(), r.into(), (r / nf).into()]);
        l2.push(r / nf);
    }
    let decreasing = l2.windows(2).all(|w| w[1] < w[0]);
    let last = *l2.last().expect("non-empty grid");
    Ok(Outcome {
        table,
        passed: decreasing,
        summary: format!("L2 residual decreasing in t: {decreasing}; final relative residual {last:.2e}"),
    })
}

pub fn cmd_eigencheck(cfg: &RunConfig) -> CmdResult {
    let params = cfg.params()?;
    let forms = seeded_test_forms(cfg.n, cfg.q, 0.8, cfg.samples, cfg.seed)?;
    let rots = seeded_rotations(cfg.n, 2 * cfg.samples, cfg.seed.wrapping_add(1));
    let grid = cfg.t_grid();
    let mut table = Table::new(&["sample", "t", "first_order", "casimir", "dd_star", "d_star_d"]);
    let (mut first, mut cas, mut second) = (0.0f64, 0.0f64, 0.0f64);
    for (i, f) in forms.into_iter().enumerate() {
        let field = PoissonField::new(params, f, FocusedRule::default())?;
        let t = grid[i % grid.len()];
        let g = embed_k(&rots[2 * i]).mul(&geodesic(cfg.n, t)).mul(&embed_k(&rots[2 * i + 1]));
        if cfg.p == 0 {
            // no D* on functions: only the Casimir equation applies
            let c = casimir_residual(&field, g.matrix(), Steps::default().second)?;
            cas = cas.max(c);
            table.push(vec![i.into(), t.into(), f64::NAN.into(), c.into(), f64::NAN.into(), f64::NAN.into()]);
            continue;
        }
        let r = eigen_report(&field, g.matrix(), Steps::default())?;
        first = first.max(r.first_order);
        cas = cas.max(r.casimir);
        second = second.max(r.second_order());
        table.push(vec![i.into(), t.into(), r.first_order.into(), r.casimir.into(), r.dd_star.into(), r.d_star_d.into()]);
    }
    Ok(Outcome {
        table,
        passed: first < verify::FIRST_ORDER_TOL && cas < verify::CASIMIR_TOL && second < verify::SECOND_ORDER_TOL,
        summary: format!("max relative residuals: first order {first:.2e}, Casimir {cas:.2e}, second order {second:.2e}"),
    })
}

pub fn cmd_eisenstein(cfg: &RunConfig) -> CmdResult {
    let params = cfg.params()?;
    let grid = cfg.t_grid();
    let hs = hs_limit_check(&params, &grid, &[])?;
    let mut table = Table::new(&[
        "t",
        "f_qminus_quad_re",
        "f_qminus_quad_im",
        "f_q_quad_re",
        "f_q_quad_im",
        "f_qminus_closed_re",
        "f_qminus_closed_im",
        "f_q_closed_re",
        "f_q_closed_im",
        "component_err",
        "schur_residual",
        "hs_deviation",
    ]);
    let mut worst: f64 = 0.0;
    for (i, &t) in grid.iter().enumerate() {
        let a = scalar_components(&eisenstein_focused(&params, t, &FocusedRule::default())?, cfg.n, cfg.p)?;
        let b = eisenstein_closed(&params, t)?;
        let err = (a.f_qminus - b.f_qminus).norm().max((a.f_q - b.f_q).norm());
        worst = worst.max(err);
        table.push(vec![
            t.into(),
            a.f_qminus.re.into(),
            a.f_qminus.im.into(),
            a.f_q.re.into(),
            a.f_q.im.into(),
            b.f_qminus.re.into(),
            b.f_qminus.im.into(),
            b.f_q.re.into(),
            b.f_q.im.into(),
            err.into(),
            a.schur_residual.into(),
            hs.deviation[i].into(),
        ]);
    }
    Ok(Outcome {
        table,
        passed: worst < verify::EISENSTEIN_TOL,
        summary: format!("max component error {worst:.2e} (tol {:.0e}); final HS deviation {:.2e}", verify::EISENSTEIN_TOL, hs.final_deviation()),
    })
}

pub fn cmd_invert(cfg: &RunConfig) -> CmdResult {
    let params = cfg.params()?;
    let f = seeded_test_forms(cfg.n, cfg.q, 0.8, 1, cfg.seed)?.remove(0);
    let field = PoissonField::new(params, f, INVERT_RULE)?;
    let samples = SphereQuadrature::build(cfg.n, 1)?;
    let mut table = Table::new(&["t", "sample", "error", "f_norm"]);
    let mut last = f64::NAN;
    for t in cfg.t_grid() {
        let quad_h = SphereQuadrature::focused(cfg.n, &INVERT_RULE, t)?;
        let g = invert_many(&field, t, &samples.sections, &quad_h)?;
        let (mut err2, mut f2) = (0.0, 0.0);
        for (i, (gk, k)) in g.iter().zip(&samples.sections).enumerate() {
            let fk = field.boundary.eval_on_k(k)?;
            let e = (&gk.coeffs - &fk.coeffs).norm();
            err2 += samples.weights[i] * e * e;
            f2 += samples.weights[i] * fk.norm().powi(2);
            table.push(vec![t.into(), i.to_string().as_str().into(), e.into(), fk.norm().into()]);
        }
        table.push(vec![t.into(), "l2".into(), err2.sqrt().into(), f2.sqrt().into()]);
        last = err2.sqrt() / f2.sqrt();
    }
    Ok(Outcome {
        table,
        passed: last < verify::INVERSION_TOL,
        summary: format!("relative L2 error at t_max {last:.2e} (tol {:.0e})", verify::INVERSION_TOL),
    })
}

pub fn cmd_hardy(cfg: &RunConfig) -> CmdResult {
    let params = cfg.params()?;
    let grid = cfg.t_grid();
    let quad = SphereQuadrature::build(cfg.n, cfg.quad_level)?;
    let gamma = gamma_lambda(&params, &grid)?.value;
    let cq = c_component(&params)?.norm();
    let mut table = Table::new(&[
        "form", "r", "lower_bound", "hardy_norm", "grid_max", "limit", "upper_bound", "lower_slack", "upper_slack", "gamma",
    ]);
    let mut worst = f64::INFINITY;
    for (i, f) in seeded_test_forms(cfg.n, cfg.q, 0.8, cfg.samples, cfg.seed)?.into_iter().enumerate() {
        let field = PoissonField::new(params, f, FIELD_RULE)?;
        for (h, &r) in hardy_norms(&field, &cfg.r_values, &grid, &quad)?.iter().zip(&cfg.r_values) {
            let fr = field.boundary.lr_norm(r, &quad)?;
            let lo = params.cpq() * cq * fr;
            let hi = params.cpq() * gamma * fr;
            worst = worst.min(h.value - lo).min(hi - h.value);
            table.push(vec![
                i.into(),
                r.into(),
                lo.into(),
                h.value.into(),
                h.grid_max.into(),
                h.limit.into(),
                hi.into(),
                (h.value - lo).into(),
                (hi - h.value).into(),
                gamma.into(),
            ]);
        }
    }
    Ok(Outcome {
        table,
        passed: worst >= verify::SANDWICH_SLACK,
        summary: format!("minimum slack {worst:.2e} (tol {:.0e})", verify::SANDWICH_SLACK),
    })
}
