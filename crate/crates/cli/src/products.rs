//! `matrix-product`, `recurrence` and `rs-cf`.

use cflimits::limitset::geometric_tail;
use cflimits::matprod::{cocycle_limit, max_norm, residue_matrix_limits, MatrixSequencePair, Side};
use cflimits::recur::{asymptotic_coefficients, PoincareRecurrence};
use cflimits::rsmatrix::{rs_asymptotics, RSSystem};
use cflimits::Complex64;
use serde_json::{json, Value};

use crate::config::{settings, ComplexInput, MatrixProductConfig, RecurrenceConfig, RsConfig};
use crate::error::{CliError, CliResult};
use crate::output::{self, complex, matrix, num};
use crate::Artifacts;

const DEFAULT_PERRON_N: usize = 10_000;
const DEFAULT_RS_COUNT: usize = 1000;

fn artifacts(name: &str, v: &Value) -> Artifacts {
    let text = output::to_json_text(v);
    Artifacts { stdout: text.clone(), files: vec![(format!("{name}.json"), text)] }
}

fn values(xs: &[ComplexInput]) -> CliResult<Vec<Complex64>> {
    xs.iter().map(ComplexInput::value).collect()
}

pub fn matrix_product(
    cfg: &MatrixProductConfig,
    flag_tol: Option<f64>,
    flag_max_n: Option<usize>,
) -> CliResult<Artifacts> {
    let (tol, max_n) = settings(cfg.tol, cfg.max_n, flag_tol, flag_max_n)?;
    let pm = cfg.matrices()?;
    let side: Side = cfg.side.into();
    let pair =
        MatrixSequencePair::with_constant_m(pm.term(), pm.limit.clone())?.with_side(side).with_tail_bound(pm.tail());
    let lim = cocycle_limit(&pair, tol, max_n)?;
    let mut report = json!({
        "side": match side { Side::Left => "left", Side::Right => "right" },
        "f": matrix(&lim.f),
        "det": complex(lim.det),
        "all_d_nonsingular": lim.all_d_nonsingular,
        "terms": lim.terms,
        "inverse_residual": num(lim.inverse_residual),
    });
    if let Some(m) = cfg.order {
        let res = residue_matrix_limits(pm.term(), pm.limit.clone(), m, side, tol, max_n)?;
        report["residue_limits"] = Value::Array(res.residues.iter().map(matrix).collect());
        report["finite_order_consistency"] = num(max_norm(&(&res.f - &lim.f)));
    }
    Ok(artifacts("matrix-product", &report))
}

pub fn recurrence(cfg: &RecurrenceConfig, flag_tol: Option<f64>, flag_max_n: Option<usize>) -> CliResult<Artifacts> {
    let (tol, max_n) = settings(cfg.tol, cfg.max_n, flag_tol, flag_max_n)?;
    let limits = values(&cfg.limits)?;
    let x0 = values(&cfg.initial)?;
    if x0.len() != limits.len() {
        return Err(CliError::Config(format!(
            "{} initial values for a recurrence of order {}",
            x0.len(),
            limits.len()
        )));
    }
    let (pert, ratio) = match &cfg.perturbation {
        Some(p) => {
            if !(0.0..1.0).contains(&p.ratio) {
                return Err(CliError::Config("perturbation ratio must lie in [0, 1)".into()));
            }
            (values(&p.coefficients)?, p.ratio)
        }
        None => (vec![Complex64::new(0.0, 0.0); limits.len()], 0.0),
    };
    if pert.len() != limits.len() {
        return Err(CliError::Config("perturbation needs one coefficient per limit".into()));
    }
    let size = pert.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let l = limits.clone();
    let coeffs = move |n: usize| {
        let r = ratio.powi(n as i32);
        l.iter().zip(&pert).map(|(&a, &e)| a + e * r).collect::<Vec<_>>()
    };
    let rec = PoincareRecurrence::new(coeffs, limits)?.with_tail_bound(move |n| size * geometric_tail(ratio, n));
    let fit = asymptotic_coefficients(&rec, &x0, tol, max_n)?;
    let perron_n = cfg.perron_n.unwrap_or(DEFAULT_PERRON_N);
    let perron = rec.perron_diagnostic(&x0, perron_n)?;
    let report = json!({
        "order": rec.order(),
        "roots": rec.roots().iter().map(|r| complex(r.to_complex())).collect::<Vec<_>>(),
        "c": fit.c.iter().map(|&z| complex(z)).collect::<Vec<_>>(),
        "f": matrix(&fit.f),
        "terms": fit.terms,
        "fit_residual": num(fit.residual),
        "perron_n": perron_n,
        "perron_diagnostic": num(perron),
    });
    Ok(artifacts("recurrence", &report))
}

pub fn rs_cf(cfg: &RsConfig, flag_tol: Option<f64>, flag_max_n: Option<usize>) -> CliResult<Artifacts> {
    let (tol, max_n) = settings(cfg.tol, cfg.max_n, flag_tol, flag_max_n)?;
    let pm = cfg.matrices()?;
    if pm.limit.nrows() != cfg.r + cfg.s {
        return Err(CliError::Config(format!(
            "theta must be {0}×{0} for r = {1}, s = {2}",
            cfg.r + cfg.s,
            cfg.r,
            cfg.s
        )));
    }
    let sys = RSSystem::new(cfg.r, cfg.s, pm.term())?.with_limit(pm.limit.clone())?.with_tail_bound(pm.tail());
    let asym = rs_asymptotics(&sys, tol, max_n)?;
    let count = cfg.count.unwrap_or(DEFAULT_RS_COUNT);
    if count < 2 {
        return Err(CliError::Config("count must be at least 2".into()));
    }
    let from = count / 2;
    let mut worst = 0.0f64;
    let mut singular = 0usize;
    let mut last = None;
    for (k, s) in sys.approximants().take(count) {
        let Ok(s) = s else {
            singular += 1;
            continue;
        };
        if k >= from {
            match asym.predictor(k) {
                Ok(p) => worst = worst.max(max_norm(&(&s - &p))),
                Err(_) => singular += 1,
            }
        }
        if k == count {
            last = Some(s);
        }
    }
    let mut report = json!({
        "r": cfg.r,
        "s": cfg.s,
        "f": matrix(&asym.f),
        "terms": asym.terms,
        "last_approximant": last.as_ref().map(matrix),
        "predictor_error": { "from": from, "to": count, "max": num(worst) },
        "undefined_approximants": singular,
    });
    if let Some(m) = cfg.order {
        let res = asym.residue_limits(m)?;
        report["residue_limits"] = Value::Array(res.iter().map(matrix).collect());
    }
    Ok(artifacts("rs-cf", &report))
}
