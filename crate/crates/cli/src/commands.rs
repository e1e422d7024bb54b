//! `steps`, `curve`, `asymptotics` and `premap`.

use anyhow::{Context, Result};
use hfun_core::asymfit::{exact_c0, fit_exp_growth, FitResult, REFERENCE_C_LEFT};
use hfun_core::conformal::{find_preimage, PreimageSnapshot};
use hfun_core::format::g12;
use hfun_core::geometry::{cantor_level_capped, gap_schedule, BasepointMode};
use hfun_core::hfun::{build_curve_with, Remainder};
use hfun_core::pipeline::Pipeline;
use hfun_core::reference;
use serde_json::json;

use crate::config::{emit, emit_json, RunConfig};

pub fn pipeline(cfg: &RunConfig, level: u32) -> Result<Pipeline> {
    let p = Pipeline::build(level, cfg.basepoint, &cfg.pipeline()?)?;
    log::info!(
        "level {level} {}: criterion {:.2e} after {} iterations ({:.2} s), harmonic {:.2} s",
        cfg.basepoint.as_str(),
        p.report.criterion,
        p.report.iterations,
        p.timings.preimage_s,
        p.timings.harmonic_s
    );
    Ok(p)
}

pub fn remainder(cfg: &RunConfig) -> Remainder {
    if cfg.exact_remainder {
        Remainder::Exact
    } else {
        Remainder::Constant
    }
}

pub fn steps_csv(p: &Pipeline, level: u32) -> Result<String> {
    let sched = gap_schedule(&p.ctx.slits, &p.ctx.basepoint)?;
    let mut s = String::from("level,mode,k,r_lo,r_hi,omega\n");
    for (st, omega) in sched.steps.iter().zip(p.step_heights()) {
        s.push_str(&format!(
            "{level},{},{},{},{},{}\n",
            p.mode().as_str(),
            st.k,
            g12(st.r_lo),
            g12(st.r_hi),
            g12(omega)
        ));
    }
    Ok(s)
}

pub fn steps(cfg: &RunConfig) -> Result<()> {
    let p = pipeline(cfg, cfg.level)?;
    emit(cfg.output.as_deref(), &steps_csv(&p, cfg.level)?)?;
    let sched = gap_schedule(&p.ctx.slits, &p.ctx.basepoint)?;
    let omegas = p.step_heights();
    let table_diff = reference::step_heights(cfg.level, cfg.basepoint)
        .map(|t| t.iter().zip(&omegas).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    emit_json(
        cfg.metadata.as_deref(),
        &json!({
            "command": "steps",
            "level": cfg.level,
            "mode": cfg.basepoint.as_str(),
            "m": p.ctx.m(),
            "z0": p.ctx.basepoint.z0,
            "leading": sched.leading,
            "trailing": sched.trailing,
            "rows": omegas.len(),
            "table_max_diff": table_diff,
            "report": p.report,
            "timings": p.timings,
        }),
    )
}

pub fn curve(cfg: &RunConfig) -> Result<()> {
    let p = pipeline(cfg, cfg.level)?;
    let t = std::time::Instant::now();
    let c = build_curve_with(&p.ctx, cfg.samples, remainder(cfg))?;
    let curve_s = t.elapsed().as_secs_f64();
    emit(cfg.output.as_deref(), &c.to_csv())?;
    emit_json(
        cfg.metadata.as_deref(),
        &json!({
            "command": "curve",
            "level": cfg.level,
            "mode": cfg.basepoint.as_str(),
            "m": c.m,
            "leading": c.leading,
            "trailing": c.trailing,
            "steps": c.steps.len(),
            "arcs": c.arcs.len(),
            "samples_per_slit": cfg.samples,
            "remainder": remainder(cfg),
            "diagnostics": c.diagnostics,
            "report": p.report,
            "timings": {
                "preimage_s": p.timings.preimage_s,
                "harmonic_s": p.timings.harmonic_s,
                "curve_s": curve_s,
            },
        }),
    )
}

pub fn fit_row(level: u32, mode: BasepointMode, f: &FitResult) -> String {
    let reference = reference::c_constant(level, mode);
    let delta = reference.map(|r| f.c - r);
    let opt = |v: Option<f64>| v.map(g12).unwrap_or_default();
    format!(
        "{level},{},{},{},{},{},{},{}\n",
        mode.as_str(),
        g12(f.r_star),
        g12(f.c),
        g12(f.beta),
        g12(f.e),
        opt(reference),
        opt(delta)
    )
}

pub fn asymptotics(cfg: &RunConfig, levels: &[u32]) -> Result<()> {
    let mut csv = String::from("level,mode,r_star,c,beta,e,reference_c,delta_c\n");
    let mut fits = Vec::new();
    for &level in levels {
        let p = pipeline(cfg, level)?;
        let f = p
            .near_threshold_fit(cfg.asym_eps, cfg.asym_count)
            .with_context(|| format!("level {level}"))?;
        csv.push_str(&fit_row(level, cfg.basepoint, &f));
        fits.push((level, f));
    }
    emit(cfg.output.as_deref(), &csv)?;

    let growth = if cfg.basepoint == BasepointMode::LeftExterior {
        let lv: Vec<f64> = (0..REFERENCE_C_LEFT.len()).map(|l| l as f64).collect();
        let fixture = fit_exp_growth(&lv, &REFERENCE_C_LEFT)?;
        let computed = if fits.len() >= 3 {
            let l: Vec<f64> = fits.iter().map(|(l, _)| *l as f64).collect();
            let c: Vec<f64> = fits.iter().map(|(_, f)| f.c).collect();
            Some(fit_exp_growth(&l, &c)?)
        } else {
            None
        };
        json!({ "fixture": fixture, "computed": computed })
    } else {
        serde_json::Value::Null
    };
    emit_json(
        cfg.metadata.as_deref(),
        &json!({
            "command": "asymptotics",
            "mode": cfg.basepoint.as_str(),
            "eps": cfg.asym_eps,
            "count": cfg.asym_count,
            "exact_c0": exact_c0(),
            "fits": fits.iter().map(|(l, f)| json!({"level": l, "fit": f})).collect::<Vec<_>>(),
            "growth": growth,
        }),
    )
}

pub fn premap(cfg: &RunConfig) -> Result<()> {
    let slits = cantor_level_capped(cfg.level, cfg.max_slits)?;
    let pc = cfg.preimage();
    let t = std::time::Instant::now();
    let pre = find_preimage(&slits, &pc)?;
    log::info!(
        "preimage: criterion {:.2e} after {} iterations ({:.2} s)",
        pre.criterion,
        pre.iterations,
        t.elapsed().as_secs_f64()
    );
    let snap = PreimageSnapshot::from_preimage(&pre, slits.level, &pc);
    let path = cfg.snapshot.as_deref().or(cfg.output.as_deref());
    emit(path, &(snap.to_json() + "\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_row_reference_columns() {
        let f = FitResult {
            c: 0.94,
            beta: 0.5,
            e: 1e-20,
            r_star: 1.0,
            samples: vec![],
        };
        let row = fit_row(1, BasepointMode::LeftExterior, &f);
        assert!(row.starts_with("1,left,1,0.94,0.5,1e-20,0.939343,"));
        assert!(fit_row(9, BasepointMode::Center, &f).ends_with(",,\n"));
    }
}
