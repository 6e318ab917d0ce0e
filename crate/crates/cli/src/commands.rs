//! The experiments behind each subcommand.

use crate::output::{Cell, Table};
use crate::params::{p, Config, Param, UsageError};
use klab::arith::{
    kloosterman_all, kloosterman_direct, make_prime_context, primes_in, PrimeContext,
};
use klab::bilinear::{bilinear_sharp, bilinear_smooth, type_ii_sum, CoefficientSeq, ThirdWeight};
use klab::modforms::{
    cusp_voronoi_check, delta_coefficients_cached, required_n_max, twisted_voronoi_check,
    voronoi_test_weight, CuspCheck,
};
use klab::moments::{
    l_half_afe_all, l_half_oracle_all, moment_eta_max, moment_exponent_certificate, moment_series,
    quadrilinear_sum,
};
use klab::primes::{
    eta_case_certificate, hb_lambda_check, prime_kloosterman_sharp, prime_kloosterman_smooth,
    sigma_decomposition_check,
};
use klab::report::BoundReport;
use klab::scans::{assess, run_family};
use klab::transforms::{
    tempered_voronoi_check, verify_kloosterman_lemma_with, PeriodicFunction, TailPolicy,
    TestFunction2D,
};
use klab::weights::make_bump;
use klab::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::path::PathBuf;

pub enum CmdError {
    Usage(String),
    Compute(Error),
}

impl From<UsageError> for CmdError {
    fn from(e: UsageError) -> Self {
        CmdError::Usage(e.0)
    }
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        match e {
            Error::CompositeModulus(_)
            | Error::IndexOutOfRange { .. }
            | Error::NotCoprime(..)
            | Error::DegenerateSupport(..)
            | Error::InvalidDelta(_)
            | Error::RangeOutOfBounds(..)
            | Error::ParameterOutOfRange(_)
            | Error::TupleInvariantViolated(_)
            | Error::GridTooCoarse(_) => CmdError::Usage(e.to_string()),
            _ => CmdError::Compute(e),
        }
    }
}

pub struct Outcome {
    pub table: Table,
    /// Acceptance thresholds that were not met.
    pub violations: Vec<String>,
}

type Run = fn(&Config) -> Result<Outcome, CmdError>;

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub params: &'static [Param],
    pub run: Run,
}

pub const COMMANDS: [Command; 12] = [
    Command {
        name: "verify-lemma",
        about: "closed forms of the Fourier and Voronoi transforms of Kl, and the Weil bound",
        params: &[
            p("q-min", "2", "smallest modulus"),
            p("q-max", "200", "largest modulus"),
            p("tolerance", "1e-9", "allowed error in the closed forms"),
            p(
                "weil-q-max",
                "1000",
                "check |Kl| <= 2 for all primes up to this (0: skip)",
            ),
            p(
                "direct-q",
                "101,1009,10007",
                "moduli for the fast-vs-direct table comparison",
            ),
        ],
        run: verify_lemma,
    },
    Command {
        name: "voronoi-check",
        about: "two-sided tempered Voronoi formula with Kloosterman kernel",
        params: &[
            p("q", "101", "prime modulus"),
            p("a", "1", "kernel Kl(a x; q)"),
            p("M", "30", "first scale"),
            p("N", "30", "second scale"),
            p("tolerance", "1e-6", "allowed residual"),
        ],
        run: voronoi_check,
    },
    Command {
        name: "cusp-voronoi-check",
        about: "two-sided Voronoi formula for the discriminant form Delta",
        params: &[
            p("q", "13", "prime modulus"),
            p("a", "1", "residue coprime to q"),
            p("N", "50", "length"),
            p(
                "twisted",
                "false",
                "check the additive-twist formula instead",
            ),
            p("tolerance", "1e-6", "allowed residual"),
            p(
                "congruence-max",
                "1000",
                "check tau(p) = 1 + p^11 mod 691 for p up to this",
            ),
            p("grid", "false", "run the cuspidal bound-ratio grid instead"),
        ],
        run: cusp_voronoi,
    },
    Command {
        name: "bilinear-scan",
        about: "sharp and smoothed bilinear sums of Kl with bound ratios",
        params: &[
            p("mode", "smooth", "sharp, smooth or smooth3"),
            p("q", "1009", "prime modulus"),
            p("a", "1", "twist a in Kl(a m n; q)"),
            p("M", "64", "first scale (interval length in sharp mode)"),
            p("N", "64", "second scale"),
            p("Q", "1", "weight parameter"),
            p("Y", "auto", "scale of the third weight (auto: M N)"),
            p("grid", "false", "run the fixed scan grids instead"),
        ],
        run: bilinear_scan,
    },
    Command {
        name: "typeii-scan",
        about: "type II sums with random signs",
        params: &[
            p("q", "1009", "prime modulus"),
            p("M", "32", "alpha supported on [M, 2M]"),
            p("N", "32", "beta supported on [N, 2N]"),
            p("grid", "false", "run the fixed scan grid instead"),
        ],
        run: typeii_scan,
    },
    Command {
        name: "quadrilinear-scan",
        about: "quadrilinear sums of Kl(+-m1 m2 m3 m4; q)",
        params: &[
            p("q", "1009", "prime modulus"),
            p("M1", "auto", "scales, nondecreasing (auto: q^(1/2))"),
            p("M2", "auto", ""),
            p("M3", "auto", ""),
            p("M4", "auto", ""),
            p("sign", "1", "1 or -1"),
            p("Q", "1", "weight parameter"),
        ],
        run: quadrilinear_scan,
    },
    Command {
        name: "hb-verify",
        about: "Heath-Brown identity: Lambda reconstruction and dyadic recombination",
        params: &[
            p("J", "2,3,4", "identity parameters for the reconstruction"),
            p("X", "10000", "reconstruct Lambda(n) for n <= X"),
            p("q", "1009", "modulus for the decomposition check"),
            p("decomp-X", "1000", "length of the decomposed sum"),
            p("decomp-J", "2", "identity parameter for the decomposition"),
        ],
        run: hb_verify,
    },
    Command {
        name: "primes-scan",
        about: "sums of Kl(p; q) over primes, smooth and sharp",
        params: &[
            p("mode", "both", "smooth, sharp or both"),
            p("q", "10007", "prime modulus"),
            p("X", "auto", "length (auto: q)"),
            p("Q", "2", "weight parameter for the smooth sum"),
            p("grid", "false", "run the fixed scan grids instead"),
        ],
        run: primes_scan,
    },
    Command {
        name: "eta-certify",
        about: "grid certificate for the exponent case analysis over primes",
        params: &[
            p("x", "0.75,0.8,0.9,1.0", "values of log_q X"),
            p("kappa", "0,0.02", "values of log_q Q"),
            p("J", "10", "identity parameter"),
            p("grid", "1/30", "grid step"),
        ],
        run: eta_certify,
    },
    Command {
        name: "moment-scan",
        about: "fourth moment of L(1/2, chi) over prime moduli",
        params: &[
            p("q-range", "50:2000", "primes lo:hi or an explicit list"),
            p("fit", "false", "fit a quartic in log q"),
            p(
                "check-afe",
                "false",
                "compare Hurwitz and AFE values for every character",
            ),
        ],
        run: moment_scan,
    },
    Command {
        name: "moment-certify",
        about: "grid certificate for the exponent bookkeeping of the moment bound",
        params: &[
            p("eta", "1/20,1/16,1/10", "exponents to test"),
            p("grid", "1/40", "grid step"),
        ],
        run: moment_certify,
    },
    Command {
        name: "tau-table",
        about: "Ramanujan tau(n)",
        params: &[p("n-max", "1000", "largest n")],
        run: tau_table,
    },
];

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("KLAB_CACHE_DIR")
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

fn ctx_for(q: u64) -> Result<(PrimeContext, Vec<f64>), CmdError> {
    let ctx = make_prime_context(q)?;
    let kl = kloosterman_all(&ctx);
    Ok((ctx, kl))
}

// ---------------------------------------------------------------------------

fn verify_lemma(cfg: &Config) -> Result<Outcome, CmdError> {
    let (lo, hi, tol) = (cfg.u64("q-min")?, cfg.u64("q-max")?, cfg.f64("tolerance")?);
    let mut t = Table::new(&["q", "a", "max_error"]);
    let mut v = Vec::new();
    let mut worst = 0.0f64;
    for q in primes_in(lo.max(2), hi) {
        let (ctx, kl) = ctx_for(q)?;
        let errs: Vec<f64> = (1..q as i64)
            .into_par_iter()
            .map(|a| verify_kloosterman_lemma_with(&ctx, &kl, a))
            .collect::<Result<_, _>>()?;
        let mut qmax = 0.0f64;
        for (a, e) in errs.into_iter().enumerate() {
            t.push(vec![q.into(), (a as u64 + 1).into(), e.into()]);
            qmax = qmax.max(e);
        }
        t.point(q as f64, qmax, "lemma_error");
        worst = worst.max(qmax);
    }
    t.note("lemma_max_error", worst);
    if !(worst < tol) {
        v.push(format!("lemma error {worst:e} >= {tol:e}"));
    }
    let weil_max = cfg.u64("weil-q-max")?;
    if weil_max >= 3 {
        let mut excess = 0.0f64;
        for q in primes_in(3, weil_max) {
            let (_, kl) = ctx_for(q)?;
            excess = kl[1..].iter().fold(excess, |m, k| m.max(k.abs()));
        }
        t.note("weil_max_abs_kl", excess);
        if excess > 2.0 + 1e-9 {
            v.push(format!("Weil bound exceeded: {excess}"));
        }
    }
    let mut fast_direct = 0.0f64;
    for q in cfg.u64_list("direct-q")? {
        let (ctx, kl) = ctx_for(q)?;
        let d = (0..q as i64)
            .into_par_iter()
            .map(|m| (kl[m as usize] - kloosterman_direct(m, &ctx)).abs())
            .reduce(|| 0.0, f64::max);
        t.note(&format!("fast_vs_direct_q{q}"), d);
        fast_direct = fast_direct.max(d);
    }
    if !(fast_direct < 1e-10) {
        v.push(format!(
            "fast and direct Kl tables differ by {fast_direct:e}"
        ));
    }
    Ok(Outcome {
        table: t,
        violations: v,
    })
}

fn voronoi_check(cfg: &Config) -> Result<Outcome, CmdError> {
    let (q, a, m, n, tol) = (
        cfg.u64("q")?,
        cfg.i64("a")?,
        cfg.f64("M")?,
        cfg.f64("N")?,
        cfg.f64("tolerance")?,
    );
    let ctx = make_prime_context(q)?;
    let k = PeriodicFunction::kloosterman(&ctx, a);
    let w = make_bump(1.0, (0.5, 2.0))?;
    let g = TestFunction2D::new(w.clone(), w, m, n);
    let c = tempered_voronoi_check(
        &ctx,
        &k,
        &g,
        TailPolicy {
            target: tol,
            ..TailPolicy::default()
        },
    )?;
    let mut t = Table::new(&[
        "q",
        "a",
        "M",
        "N",
        "lhs_re",
        "lhs_im",
        "rhs_re",
        "rhs_im",
        "residual",
        "radius_m",
        "radius_n",
        "tail_bound",
    ]);
    t.push(vec![
        q.into(),
        a.into(),
        m.into(),
        n.into(),
        c.lhs.re.into(),
        c.lhs.im.into(),
        c.rhs.re.into(),
        c.rhs.im.into(),
        c.residual.into(),
        c.radii.0.into(),
        c.radii.1.into(),
        c.tail_bound.into(),
    ]);
    t.point(q as f64, c.residual, "residual");
    let v = if c.residual < tol {
        vec![]
    } else {
        vec![format!("residual {:e} >= {tol:e}", c.residual)]
    };
    Ok(Outcome {
        table: t,
        violations: v,
    })
}

fn cusp_voronoi(cfg: &Config) -> Result<Outcome, CmdError> {
    if cfg.bool("grid")? {
        return grid_outcome(&["cuspidal"], cfg.u64("seed")?);
    }
    let (q, a, n, tol) = (
        cfg.u64("q")?,
        cfg.i64("a")?,
        cfg.f64("N")?,
        cfg.f64("tolerance")?,
    );
    let twisted = cfg.bool("twisted")?;
    let cmax = cfg.u64("congruence-max")? as usize;
    let ctx = make_prime_context(q)?;
    let w = voronoi_test_weight();
    let need = required_n_max(&w, q, n, tol, twisted)?;
    let hd = delta_coefficients_cached(need.max(cmax).max(2), cache_dir().as_deref())?;
    let c: CuspCheck = if twisted {
        twisted_voronoi_check(&hd, &ctx, a, &w, n, tol)?
    } else {
        cusp_voronoi_check(&hd, &ctx, a, &w, n, tol)?
    };
    let mut t = Table::new(&[
        "q",
        "a",
        "N",
        "twisted",
        "lhs_re",
        "lhs_im",
        "rhs_re",
        "rhs_im",
        "residual",
        "cutoff",
        "ibp_order",
        "tail_bound",
    ]);
    t.push(vec![
        q.into(),
        a.into(),
        n.into(),
        twisted.into(),
        c.lhs.re.into(),
        c.lhs.im.into(),
        c.rhs.re.into(),
        c.rhs.im.into(),
        c.residual.into(),
        c.cutoff.into(),
        c.ibp_order.into(),
        c.tail_bound.into(),
    ]);
    t.point(n, c.residual, "residual");
    let mut v = Vec::new();
    if !(c.residual < tol) {
        v.push(format!("residual {:e} >= {tol:e}", c.residual));
    }
    let primes: Vec<u64> = primes_in(2, cmax as u64);
    let bad: Vec<u64> = primes
        .iter()
        .copied()
        .filter(|&p| (hd.tau[p as usize] - 1 - (p as i128).pow(11)).rem_euclid(691) != 0)
        .collect();
    t.note("tau_congruence_primes", primes.len());
    t.note("tau_congruence_ok", bad.is_empty());
    if !bad.is_empty() {
        v.push(format!("tau(p) = 1 + p^11 mod 691 fails at p = {bad:?}"));
    }
    Ok(Outcome {
        table: t,
        violations: v,
    })
}

// ---------------------------------------------------------------------------
// bound-ratio reports

const REPORT_COLUMNS: [&str; 9] = [
    "experiment",
    "q",
    "params",
    "value_re",
    "value_im",
    "envelope",
    "formula",
    "envelope_value",
    "ratio",
];

fn params_text(r: &BoundReport) -> String {
    r.params
        .iter()
        .filter(|(k, _)| k.as_str() != "q")
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn push_report(t: &mut Table, r: &BoundReport) {
    let q = r.params.get("q").copied().unwrap_or(0.0);
    for (e, ratio) in r.envelopes.iter().zip(&r.ratios) {
        t.push(vec![
            r.experiment.as_str().into(),
            (q as u64).into(),
            params_text(r).into(),
            r.sum_value.re.into(),
            r.sum_value.im.into(),
            e.name.as_str().into(),
            e.formula.as_str().into(),
            e.value.into(),
            (*ratio).into(),
        ]);
    }
    t.point(q, r.primary_ratio(), &r.experiment);
}

fn single_report(r: BoundReport) -> Outcome {
    let mut t = Table::new(&REPORT_COLUMNS);
    push_report(&mut t, &r);
    let mut v = Vec::new();
    if !(r.primary_ratio() < klab::scans::RATIO_CEILING) {
        v.push(format!(
            "{} ratio {} >= {}",
            r.experiment,
            r.primary_ratio(),
            klab::scans::RATIO_CEILING
        ));
    }
    Outcome {
        table: t,
        violations: v,
    }
}

fn grid_outcome(families: &[&str], seed: u64) -> Result<Outcome, CmdError> {
    let mut t = Table::new(&REPORT_COLUMNS);
    let mut v = Vec::new();
    for &f in families {
        let reports = run_family(f, seed, cache_dir().as_deref())?;
        reports.iter().for_each(|r| push_report(&mut t, r));
        let verdict = assess(f, &reports);
        t.note(&format!("{f}_max_ratio"), verdict.max_ratio);
        t.note(&format!("{f}_slope"), verdict.slope);
        t.note(&format!("{f}_pass"), verdict.passes());
        if !verdict.passes() {
            v.push(format!(
                "{f}: max ratio {:.4}, slope {:.4}",
                verdict.max_ratio, verdict.slope
            ));
        }
    }
    Ok(Outcome {
        table: t,
        violations: v,
    })
}

fn bilinear_scan(cfg: &Config) -> Result<Outcome, CmdError> {
    let mode = cfg.choice("mode", &["sharp", "smooth", "smooth3"])?;
    if cfg.bool("grid")? {
        let fam = match mode.as_str() {
            "sharp" => "bilinear_sharp",
            "smooth" => "bilinear_smooth",
            _ => "bilinear_smooth3",
        };
        return grid_outcome(&[fam], cfg.u64("seed")?);
    }
    let (q, a, m, n) = (cfg.u64("q")?, cfg.i64("a")?, cfg.f64("M")?, cfg.f64("N")?);
    let (ctx, kl) = ctx_for(q)?;
    let r = match mode.as_str() {
        "sharp" => {
            let (mi, ni) = (m.round() as u64, n.round() as u64);
            bilinear_sharp(&ctx, &kl, (1, mi), (1, ni))?
        }
        _ => {
            let w = make_bump(cfg.f64("Q")?, (0.5, 2.0))?;
            let y = cfg.f64_or("Y", m * n)?;
            let third = (mode == "smooth3").then(|| ThirdWeight { w: &w, y });
            bilinear_smooth(&ctx, &kl, a, &w, &w, m, n, third)?
        }
    };
    Ok(single_report(r))
}

fn random_signs(l: u64, rng: &mut ChaCha8Rng) -> CoefficientSeq {
    CoefficientSeq::from_fn(l, |_| {
        Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0)
    })
}

fn typeii_scan(cfg: &Config) -> Result<Outcome, CmdError> {
    let seed = cfg.u64("seed")?;
    if cfg.bool("grid")? {
        return grid_outcome(&["type_ii"], seed);
    }
    let (q, m, n) = (cfg.u64("q")?, cfg.u64("M")?, cfg.u64("N")?);
    let (ctx, kl) = ctx_for(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = random_signs(m, &mut rng);
    let beta = random_signs(n, &mut rng);
    Ok(single_report(type_ii_sum(
        &ctx, &kl, &alpha, &beta, None, 1.0,
    )?))
}

fn quadrilinear_scan(cfg: &Config) -> Result<Outcome, CmdError> {
    let q = cfg.u64("q")?;
    let root = (q as f64).sqrt();
    let m = [
        cfg.f64_or("M1", root)?,
        cfg.f64_or("M2", root)?,
        cfg.f64_or("M3", root)?,
        cfg.f64_or("M4", root)?,
    ];
    let sign = cfg.i64("sign")? as i32;
    let (ctx, kl) = ctx_for(q)?;
    let w = make_bump(cfg.f64("Q")?, (0.5, 2.0))?;
    Ok(single_report(quadrilinear_sum(
        &ctx, &kl, [&w; 4], m, sign,
    )?))
}

fn primes_scan(cfg: &Config) -> Result<Outcome, CmdError> {
    if cfg.bool("grid")? {
        return grid_outcome(&["prime_smooth", "prime_sharp"], cfg.u64("seed")?);
    }
    let mode = cfg.choice("mode", &["smooth", "sharp", "both"])?;
    let q = cfg.u64("q")?;
    let x = cfg.f64_or("X", q as f64)?;
    let (ctx, kl) = ctx_for(q)?;
    let mut t = Table::new(&REPORT_COLUMNS);
    let mut v = Vec::new();
    let ceiling = klab::scans::RATIO_CEILING;
    if mode != "sharp" {
        let w = make_bump(cfg.f64("Q")?, (0.5, 2.0))?;
        let r = prime_kloosterman_smooth(&ctx, &kl, &w, x)?;
        push_report(&mut t, &r);
        for k in ["lambda_sum", "prime_power_part", "prime_power_bound"] {
            t.note(&format!("smooth_{k}"), r.diagnostics[k]);
        }
        if !(r.primary_ratio() < ceiling) {
            v.push(format!("smooth ratio {} >= {ceiling}", r.primary_ratio()));
        }
        if r.diagnostics["prime_power_part"].abs() > r.diagnostics["prime_power_bound"] {
            v.push("prime-power part exceeds its bound".into());
        }
    }
    if mode != "smooth" {
        let (r, windows) = prime_kloosterman_sharp(&ctx, &kl, x)?;
        push_report(&mut t, &r);
        let d = |k: &str| r.diagnostics[k];
        let cancel = r.sum_value.re.abs() / d("pi_x");
        t.note("sharp_over_pi", cancel);
        t.note("sharp_sandwich", d("sandwich"));
        t.note("sharp_sandwich_difference", d("sandwich_difference"));
        t.note("sharp_fringe_bound", d("fringe_bound"));
        t.note("sharp_windows", windows.len());
        t.note("sharp_delta_clamped", d("delta_clamped") != 0.0);
        if !(r.primary_ratio() < ceiling) {
            v.push(format!("sharp ratio {} >= {ceiling}", r.primary_ratio()));
        }
        if d("sandwich_difference") > d("fringe_bound") {
            v.push("sandwich difference exceeds the fringe bound".into());
        }
        if !(cancel < 0.5) {
            v.push(format!("|sum| / pi(X) = {cancel} >= 0.5"));
        }
    }
    Ok(Outcome {
        table: t,
        violations: v,
    })
}

fn hb_verify(cfg: &Config) -> Result<Outcome, CmdError> {
    let x = cfg.u64("X")?;
    let mut t = Table::new(&["check", "J", "X", "error", "threshold"]);
    let mut v = Vec::new();
    for j in cfg.u64_list("J")? {
        let e = hb_lambda_check(j as u32, x)?;
        t.push(vec![
            "lambda".into(),
            j.into(),
            x.into(),
            e.into(),
            1e-9.into(),
        ]);
        t.point(j as f64, e, "lambda_error");
        if !(e < 1e-9) {
            v.push(format!("Lambda reconstruction error {e:e} at J = {j}"));
        }
    }
    let (q, dx, dj) = (cfg.u64("q")?, cfg.u64("decomp-X")?, cfg.u64("decomp-J")?);
    let (ctx, kl) = ctx_for(q)?;
    let r = sigma_decomposition_check(&ctx, &kl, dx, dj as u32)?;
    let rel = r.diagnostics["relative_error"];
    t.push(vec![
        "decomposition".into(),
        dj.into(),
        dx.into(),
        rel.into(),
        1e-6.into(),
    ]);
    t.note("decomposition_terms", r.diagnostics["terms"] as u64);
    t.note("decomposition_term_envelope", r.envelopes[0].value);
    t.note("decomposition_direct", r.diagnostics["direct"]);
    t.note("decomposition_ranges_ok", r.diagnostics["restr_ok"] != 0.0);
    if !(rel < 1e-6) {
        v.push(format!("recombination error {rel:e}"));
    }
    if r.diagnostics["terms"] > r.envelopes[0].value {
        v.push("term count exceeds 2 log^(2J) X".into());
    }
    if r.diagnostics["restr_ok"] == 0.0 {
        v.push("a term violates the range constraints".into());
    }
    Ok(Outcome {
        table: t,
        violations: v,
    })
}

fn eta_certify(cfg: &Config) -> Result<Outcome, CmdError> {
    let (j, grid) = (cfg.u64("J")? as usize, cfg.f64("grid")?);
    let mut t = Table::new(&[
        "x",
        "kappa",
        "J",
        "grid",
        "worst_margin",
        "slack",
        "tuples",
        "pass",
    ]);
    let mut v = Vec::new();
    for x in cfg.f64_list("x")? {
        for kappa in cfg.f64_list("kappa")? {
            let c = eta_case_certificate(x, kappa, j, grid)?;
            t.push(vec![
                x.into(),
                kappa.into(),
                j.into(),
                grid.into(),
                c.worst_margin.into(),
                c.slack.into(),
                c.tuples.into(),
                c.passes().into(),
            ]);
            t.point(x, c.worst_margin, &format!("kappa={kappa}"));
            if !c.passes() {
                v.push(format!(
                    "certificate fails at x = {x}, kappa = {kappa}: margin {}",
                    c.worst_margin
                ));
            }
        }
    }
    Ok(Outcome {
        table: t,
        violations: v,
    })
}

fn moment_scan(cfg: &Config) -> Result<Outcome, CmdError> {
    let qs = cfg.primes("q-range")?;
    if qs.is_empty() {
        return Err(CmdError::Usage("--q-range contains no primes".into()));
    }
    let fit = cfg.bool("fit")?;
    if fit && qs.len() < 5 {
        return Err(CmdError::Usage("--fit needs at least 5 moduli".into()));
    }
    let s = moment_series(&qs)?;
    let mut cols = vec!["q", "moment"];
    if fit {
        cols.extend(["fitted", "residual"]);
    }
    let mut t = Table::new(&cols);
    let mut v = Vec::new();
    for (i, &q) in s.qs.iter().enumerate() {
        let mut row: Vec<Cell> = vec![q.into(), s.values[i].into()];
        if fit {
            row.push((s.values[i] - s.residuals[i]).into());
            row.push(s.residuals[i].into());
            t.point((q as f64).ln(), s.values[i] - s.residuals[i], "fit");
        }
        t.point((q as f64).ln(), s.values[i], "moment");
        t.push(row);
        if !(s.values[i] > 0.0) {
            v.push(format!("moment at q = {q} is not positive"));
        }
    }
    if fit {
        for (k, c) in s.coefficients.iter().enumerate() {
            t.note(&format!("c{k}"), *c);
        }
        let classical = 1.0 / (2.0 * std::f64::consts::PI.powi(2));
        let rel = s.coefficients[4] / classical;
        t.note("leading_over_classical", rel);
        if !(rel > 1.0 / 3.0 && rel < 3.0) {
            v.push(format!("leading coefficient is {rel} times 1/(2 pi^2)"));
        }
    }
    if cfg.bool("check-afe")? {
        let (mut dual, mut conj) = (0.0f64, 0.0f64);
        for &q in &qs {
            let ctx = make_prime_context(q)?;
            let o = l_half_oracle_all(&ctx)?;
            let a = l_half_afe_all(&ctx)?;
            let n1 = o.len();
            for j in 1..n1 {
                dual = dual.max((o[j] - a[j]).norm());
                conj = conj.max((o[j] - o[n1 - j].conj()).norm());
            }
        }
        t.note("afe_max_difference", dual);
        t.note("conjugation_max_difference", conj);
        if !(dual < 1e-6) {
            v.push(format!("oracle and AFE differ by {dual:e}"));
        }
        if !(conj < 1e-8) {
            v.push(format!("conjugation symmetry off by {conj:e}"));
        }
    }
    Ok(Outcome {
        table: t,
        violations: v,
    })
}

/// Whether the certificate should pass at eta: Some(true) up to 1/20
/// (1/16 tightened), Some(false) from 1/10 on.
fn expected_pass(eta: f64, tightened: bool) -> Option<bool> {
    let limit = if tightened { 1.0 / 16.0 } else { 1.0 / 20.0 };
    if eta <= limit + 1e-12 {
        Some(true)
    } else if !tightened && eta >= 0.1 - 1e-12 {
        Some(false)
    } else {
        None
    }
}

fn moment_certify(cfg: &Config) -> Result<Outcome, CmdError> {
    let grid = cfg.f64("grid")?;
    let mut t = Table::new(&[
        "eta",
        "tightened",
        "worst_margin",
        "slack",
        "tuples",
        "pass",
    ]);
    let mut v = Vec::new();
    for tightened in [false, true] {
        for eta in cfg.f64_list("eta")? {
            let c = moment_exponent_certificate(eta, grid, tightened)?;
            t.push(vec![
                eta.into(),
                tightened.into(),
                c.worst_margin.into(),
                c.slack.into(),
                c.tuples.into(),
                c.passes().into(),
            ]);
            t.point(
                eta,
                c.worst_margin,
                if tightened { "tightened" } else { "plain" },
            );
            if let Some(e) = expected_pass(eta, tightened) {
                if e != c.passes() {
                    v.push(format!(
                        "eta = {eta} (tightened = {tightened}): pass = {}, expected {e}",
                        c.passes()
                    ));
                }
            }
        }
        let key = if tightened {
            "eta_max_tightened"
        } else {
            "eta_max"
        };
        t.note(key, moment_eta_max(grid, tightened)?);
    }
    Ok(Outcome {
        table: t,
        violations: v,
    })
}

fn tau_table(cfg: &Config) -> Result<Outcome, CmdError> {
    let n = cfg.u64("n-max")? as usize;
    if n == 0 {
        return Err(CmdError::Usage("--n-max must be positive".into()));
    }
    let hd = delta_coefficients_cached(n, cache_dir().as_deref())?;
    let mut t = Table::new(&["n", "tau"]);
    for k in 1..=n {
        t.push(vec![k.into(), hd.tau[k].into()]);
        t.point(k as f64, hd.lambda[k], "lambda");
    }
    t.note("max_abs_lambda_over_divisor", {
        let d = klab::arith::arith_tables(n).divisor;
        (1..=n)
            .map(|k| hd.lambda[k].abs() / d[k] as f64)
            .fold(0.0, f64::max)
    });
    Ok(Outcome {
        table: t,
        violations: vec![],
    })
}
