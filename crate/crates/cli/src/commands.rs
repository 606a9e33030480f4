use std::io::Write;

use serde_json::{json, Value};

use halfint_core::experiments::{
    exponent_fit, log_spaced, partial_sum_series, prime_sign_changes, ramanujan_growth_from_table,
    second_moment, sign_change_count, write_moments, write_partial_sums, write_sign_changes,
    IntervalSpec,
};
use halfint_core::forms::{
    build_with_horizon, eigenvalue_check, load_form, HalfIntegralForm, ShimuraLiftOracle,
};
use halfint_core::lcentral::{
    central_value, siegel_probe, waldspurger_ratio_scan, write_siegel, write_waldspurger,
    CentralOptions, Kernel, LiftCoefficients, TwistedLSpec, TRUNCATION_FACTOR,
};
use halfint_core::sieve::{
    cache, dyadic_decomposition, lambda_tables, random_cases, random_two_term_cases, vaughan_terms,
    FactorSieve, LambdaContext, VaughanParams,
};
use halfint_core::{Error, Result};

use crate::args::*;

/// Smallest truncation used for any central value.
const MIN_TRUNCATION: usize = 60;

fn sieve_for(limit: usize) -> Result<FactorSieve> {
    let dir = cache::dir_from_env();
    cache::load_or_build(dir.as_deref(), limit.max(2))
}

/// Sieve large enough for every `n ≤ x` the form can serve; requests beyond
/// the form's precision are rejected by the experiment itself.
fn filter_sieve(form: &HalfIntegralForm, x: f64) -> Result<FactorSieve> {
    let cap = form.precision().saturating_sub(1);
    let top = if x.is_finite() && x > 0.0 { (x.floor() as usize).min(cap) } else { 2 };
    sieve_for(top)
}

fn kernel(opts: &KernelOpts) -> Result<Kernel> {
    match opts.kernel {
        KernelArg::Gamma => Ok(Kernel::IncompleteGamma),
        KernelArg::Gaussian if opts.sigma > 0.0 && opts.sigma.is_finite() => {
            Ok(Kernel::Gaussian { sigma: opts.sigma })
        }
        KernelArg::Gaussian => Err(Error::Validation(format!(
            "sigma must be positive, got {}",
            opts.sigma
        ))),
    }
}

fn intervals(i: &Intervals) -> IntervalSpec {
    IntervalSpec {
        ratio: i.ratio,
        floor: i.floor,
    }
}

fn csv_out<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

/// Runs one command, writing its artifact to `w` and returning a summary.
pub fn run(cmd: &Command, w: &mut dyn Write) -> Result<Value> {
    match cmd {
        Command::Form(FormCmd::Build(a)) => form_build(a, w),
        Command::Form(FormCmd::Check(a)) => form_check(a, w),
        Command::Lambda(LambdaCmd::Table(a)) => lambda_table(a, w),
        Command::Vaughan(VaughanCmd::Verify(a)) => vaughan_verify(a, w),
        Command::Sums(SumsCmd::Partial(a)) => sums_partial(a, w),
        Command::Signs(SignsCmd::Count(a)) => signs_count(a, w),
        Command::Signs(SignsCmd::Primes(a)) => signs_primes(a, w),
        Command::Moment(MomentCmd::Second(a)) => moment_second(a, w),
        Command::Growth(GrowthCmd::Ramanujan(a)) => growth(a, w),
        Command::Lvalue(LvalueCmd::Central(a)) => lvalue_central(a, w),
        Command::Lvalue(LvalueCmd::Waldspurger(a)) => lvalue_waldspurger(a, w),
        Command::Lvalue(LvalueCmd::Siegel(a)) => lvalue_siegel(a, w),
        Command::Replay(_) => Err(Error::Validation("replay cannot be nested".into())),
    }
}

fn form_build(a: &FormBuild, w: &mut dyn Write) -> Result<Value> {
    let f = build_with_horizon(a.ell, a.prec, a.horizon)?;
    w.write_all(f.to_json().as_bytes())?;
    let head: Vec<String> = (0..f.precision().min(10)).map(|n| f.coeff(n).to_string()).collect();
    Ok(json!({
        "ell": f.ell(),
        "weight": f.weight(),
        "level": f.level(),
        "precision": f.precision(),
        "dimension": 1,
        "leading_coefficients": head,
    }))
}

fn form_check(a: &FormCheck, w: &mut dyn Write) -> Result<Value> {
    let f = load_form(&a.form)?;
    let pmax = a.primes.iter().copied().max().unwrap_or(2);
    let oracle = ShimuraLiftOracle::new(pmax as usize + 1);
    let reports = a
        .primes
        .iter()
        .map(|&p| eigenvalue_check(&f, p, &oracle))
        .collect::<Result<Vec<_>>>()?;
    let doc = serde_json::to_string_pretty(&reports)?;
    writeln!(w, "{doc}")?;
    let failed: Vec<u64> = reports.iter().filter(|r| !r.passed).map(|r| r.p).collect();
    if !failed.is_empty() {
        return Err(Error::Assertion(format!("T(p^2) eigenvalue mismatch at p = {failed:?}")));
    }
    Ok(json!({ "precision": f.precision(), "certified": reports }))
}

fn lambda_table(a: &LambdaTable, w: &mut dyn Write) -> Result<Value> {
    if a.r == 0 {
        return Err(Error::Validation("r must be at least 1".into()));
    }
    let sieve = sieve_for(a.x)?;
    let tables = lambda_tables(a.r, a.x, &sieve)?;
    let mut header = vec!["n".to_string()];
    header.extend((1..=a.r).map(|r| format!("Lambda_{r}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut out = csv_out(w, &header)?;
    for n in 1..=a.x {
        let mut row = vec![n.to_string()];
        row.extend(tables.iter().map(|t| t[n].to_string()));
        out.write_record(&row)?;
    }
    out.flush()?;
    let sums: Vec<f64> = tables.iter().map(|t| t.iter().sum()).collect();
    Ok(json!({ "x": a.x, "r": a.r, "sums": sums }))
}

fn vaughan_verify(a: &VaughanVerify, w: &mut dyn Write) -> Result<Value> {
    if a.r == 0 || a.trials == 0 || a.nmax < 3 {
        return Err(Error::Validation("need r >= 1, trials >= 1 and nmax >= 3".into()));
    }
    let nmax = a.nmax as u64;
    let mut cases = match a.kind {
        VaughanKind::Identity => random_cases(a.seed, a.trials, nmax, a.r),
        _ => random_two_term_cases(a.seed, a.trials, nmax, a.r),
    };
    if let (Some(q), Some(r)) = (a.q_cut, a.r_cut) {
        if !matches!(a.kind, VaughanKind::Identity) {
            return Err(Error::Validation(
                "fixed Q and R are only supported for the identity check".into(),
            ));
        }
        let p = VaughanParams::new(q, r)?;
        cases.iter_mut().for_each(|c| c.params = p);
    }
    let ctx = LambdaContext::new(a.nmax, a.r)?;
    let mut worst = 0.0f64;
    let mut failures = 0usize;
    let mut vanishing_failures = 0usize;
    match a.kind {
        VaughanKind::Identity | VaughanKind::TwoTerm => {
            let mut out = csv_out(w, &["n", "r", "Q", "R", "S1", "S2", "S3", "S4", "lambda", "error"])?;
            for c in &cases {
                let t = vaughan_terms(c.n, c.r, &c.params, &ctx)?;
                let lam = ctx.lambda(c.r, c.n);
                let err = (t.reassembled() - lam).abs();
                let scale = (c.n as f64).ln().powi(c.r as i32).max(1.0);
                worst = worst.max(err / scale);
                if err > 1e-9 * scale {
                    failures += 1;
                }
                if c.params.in_two_term_range(c.n) && (t.s3 != 0.0 || t.s4 != 0.0) {
                    vanishing_failures += 1;
                }
                out.write_record([
                    c.n.to_string(),
                    c.r.to_string(),
                    c.params.q().to_string(),
                    c.params.r().to_string(),
                    t.s1.to_string(),
                    t.s2.to_string(),
                    t.s3.to_string(),
                    t.s4.to_string(),
                    lam.to_string(),
                    err.to_string(),
                ])?;
            }
            out.flush()?;
        }
        VaughanKind::Dyadic => {
            let mut out = csv_out(
                w,
                &["n", "r", "Q", "R", "lambda_star_R", "grid_sum", "L_blocks", "M_blocks", "lambda", "error"],
            )?;
            for c in &cases {
                let d = dyadic_decomposition(c.n, c.r, &c.params, &ctx)?;
                let lam = ctx.lambda(c.r, c.n);
                let err = (d.reassembled() - lam).abs();
                let scale = (c.n as f64).ln().powi(c.r as i32).max(1.0);
                worst = worst.max(err / scale);
                if err > 1e-9 * scale {
                    failures += 1;
                }
                let grid_sum: f64 = d.grid.iter().flatten().sum();
                out.write_record([
                    c.n.to_string(),
                    c.r.to_string(),
                    c.params.q().to_string(),
                    c.params.r().to_string(),
                    d.lambda_star_r.to_string(),
                    grid_sum.to_string(),
                    d.l_blocks.len().to_string(),
                    d.m_blocks.len().to_string(),
                    lam.to_string(),
                    err.to_string(),
                ])?;
            }
            out.flush()?;
        }
    }
    let summary = json!({
        "cases": cases.len(),
        "two_term_cases": cases.iter().filter(|c| c.params.in_two_term_range(c.n)).count(),
        "max_relative_error": worst,
        "failures": failures,
        "nonvanishing_s3_s4": vanishing_failures,
    });
    if failures > 0 || vanishing_failures > 0 {
        return Err(Error::Assertion(format!(
            "{failures} identity failures, {vanishing_failures} cases with S3 or S4 nonzero"
        )));
    }
    Ok(summary)
}

fn sums_partial(a: &SumsPartial, w: &mut dyn Write) -> Result<Value> {
    if !(a.xmin >= 1.0 && a.xmax >= a.xmin) || a.samples == 0 {
        return Err(Error::Validation(format!(
            "need 1 <= xmin <= xmax and samples >= 1 (xmin = {}, xmax = {})",
            a.xmin, a.xmax
        )));
    }
    let f = load_form(&a.filter.form)?;
    let xs = log_spaced(a.xmin, a.xmax, a.samples);
    let sieve = filter_sieve(&f, a.xmax)?;
    let samples = partial_sum_series(
        &f,
        a.filter.r,
        a.filter.mode.into(),
        &xs,
        a.character.into(),
        a.smoothing.into(),
        &sieve,
    )?;
    write_partial_sums(&mut *w, &samples)?;
    let fit = exponent_fit(&samples).ok();
    Ok(json!({
        "samples": samples.len(),
        "theta_hat": fit.as_ref().map(|f| f.theta_hat),
        "fit_residual": fit.as_ref().map(|f| f.residual),
        "skipped_zero_samples": fit.as_ref().map(|f| f.skipped),
    }))
}

fn sign_summary(rep: &halfint_core::experiments::SignChangeReport) -> Value {
    json!({
        "total_changes": rep.total_changes,
        "intervals": rep.interval_flags.len(),
        "intervals_with_change": rep.intervals_with_change(),
        "interval_flags": rep.interval_flags,
    })
}

fn signs_count(a: &SignsCount, w: &mut dyn Write) -> Result<Value> {
    let f = load_form(&a.filter.form)?;
    let sieve = filter_sieve(&f, a.x)?;
    let spec = intervals(&a.intervals);
    let rep = sign_change_count(&f, a.filter.r, a.filter.mode.into(), a.x, &spec, &sieve)?;
    write_sign_changes(&mut *w, &rep, &f.normalized_table())?;
    Ok(sign_summary(&rep))
}

fn signs_primes(a: &SignsPrimes, w: &mut dyn Write) -> Result<Value> {
    let f = load_form(&a.form)?;
    let sieve = filter_sieve(&f, a.x)?;
    let rep = prime_sign_changes(&f, a.x, &intervals(&a.intervals), &sieve)?;
    write_sign_changes(&mut *w, &rep, &f.normalized_table())?;
    Ok(sign_summary(&rep))
}

fn moment_second(a: &MomentSecond, w: &mut dyn Write) -> Result<Value> {
    if a.y.is_empty() {
        return Err(Error::Validation("at least one Y is required".into()));
    }
    let f = load_form(&a.filter.form)?;
    let ymax = a.y.iter().copied().fold(0.0, f64::max);
    let sieve = filter_sieve(&f, ymax)?;
    let rows = a
        .y
        .iter()
        .map(|&y| second_moment(&f, a.filter.r, a.filter.mode.into(), y, a.delta, &sieve))
        .collect::<Result<Vec<_>>>()?;
    write_moments(&mut *w, &rows)?;
    let ratios: Vec<f64> = rows.iter().map(|m| m.ratio).collect();
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(json!({ "ratios": ratios, "max_over_min": max / min }))
}

fn growth(a: &GrowthRamanujan, w: &mut dyn Write) -> Result<Value> {
    let f = load_form(&a.form)?;
    let rep = ramanujan_growth_from_table(&f.normalized_table(), a.x, a.checkpoints)?;
    let mut out = csv_out(w, &["n", "running_max"])?;
    for (n, m) in &rep.running_max {
        out.write_record([n.to_string(), m.to_string()])?;
    }
    out.flush()?;
    Ok(json!({
        "exponent": rep.exponent,
        "threshold": rep.threshold,
        "below_threshold": rep.below_threshold,
    }))
}

fn lvalue_central(a: &LvalueCentral, w: &mut dyn Write) -> Result<Value> {
    if a.d.is_empty() {
        return Err(Error::Validation("at least one D is required".into()));
    }
    let kern = kernel(&a.kernel)?;
    let truncation = |d: i64| {
        a.truncation
            .unwrap_or((TRUNCATION_FACTOR * d.unsigned_abs() as usize).max(MIN_TRUNCATION))
    };
    let len = a.d.iter().map(|&d| truncation(d)).max().unwrap_or(MIN_TRUNCATION) + 1;
    let coeffs = LiftCoefficients::with_len(len);
    let mut out = csv_out(w, &["D", "L_value", "imag", "truncation", "error_estimate", "root_number"])?;
    let mut values = Vec::new();
    for &d in &a.d {
        let spec = TwistedLSpec::new(&coeffs, d)?;
        let opts = CentralOptions::new(truncation(d)).kernel(kern).balance(a.balance);
        let v = central_value(&spec, &opts)?;
        out.write_record([
            d.to_string(),
            v.value.to_string(),
            v.imag.to_string(),
            v.truncation.to_string(),
            v.error_estimate.to_string(),
            v.root_number.to_string(),
        ])?;
        values.push(json!({ "D": d, "value": v.value, "forced_zero": v.forced_zero() }));
    }
    out.flush()?;
    Ok(json!({ "values": values }))
}

fn lvalue_waldspurger(a: &LvalueWaldspurger, w: &mut dyn Write) -> Result<Value> {
    let f = load_form(&a.form)?;
    let coeffs = LiftCoefficients::with_len((TRUNCATION_FACTOR * a.dmax).max(MIN_TRUNCATION) + 1);
    let scan = waldspurger_ratio_scan(&f, &coeffs, a.dmax as u64, a.d_power, a.min_l, kernel(&a.kernel)?)?;
    write_waldspurger(&mut *w, &scan)?;
    Ok(json!({
        "d_power": scan.d_power,
        "min_l": scan.min_l,
        "discriminants": scan.rows.len(),
        "included": scan.rows.iter().filter(|r| r.ratio.is_some()).count(),
        "max_over_min": scan.max_over_min,
    }))
}

fn lvalue_siegel(a: &LvalueSiegel, w: &mut dyn Write) -> Result<Value> {
    let coeffs = LiftCoefficients::with_len((TRUNCATION_FACTOR * a.pmax).max(MIN_TRUNCATION) + 1);
    let rep = siegel_probe(&coeffs, a.pmax as u64, kernel(&a.kernel)?)?;
    write_siegel(&mut *w, &rep)?;
    Ok(json!({
        "primes": rep.rows.len(),
        "min_nonzero": rep.min_nonzero,
        "epsilons": halfint_core::lcentral::SIEGEL_EPSILONS,
        "above_reference": rep.above_reference,
    }))
}
