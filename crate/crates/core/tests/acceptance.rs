//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test --release --test acceptance` runs everything; pass criterion
//! numbers (`-- 3 8`) to run a subset.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ipld::apps::{build_dsl_instance, build_num_instance, generate_dsl, synthetic_num, synthetic_num_with};
use ipld::baseline::{build_cp_num, cp_tune, default_tau_grid, CP_DEFAULT_MAX_ITER, CP_STEP_PRODUCT};
use ipld::model::ProblemInstance;
use ipld::oracle::{oracle_error_suite, reference_oracle};
use ipld::path::{
    exact_contraction, neighborhood_diagnostics, phase1, solve, tolerance_sweep, SolveOutcome, SolverConfig,
    SweepAxis, ToleranceSchedule,
};
use ipld::scalar::{
    c_nu, jmax_bound, kmax_bound, lemma4_region_check, mt_coeff, omega, omega_star, phase1_decrease, phase1_stepsize,
    sigma_rule,
};

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

/// Seeded NUM instances with 10 to 50 nodes; the larger ones keep the five
/// heaviest destinations per source so the short-step runs fit the time budget.
fn path_instances() -> Vec<(String, ProblemInstance)> {
    (0..20)
        .map(|i| {
            let nodes = 10 + (40 * i + 9) / 19;
            let dest = if nodes <= 20 { None } else { Some(5) };
            // sparse demand can leave two edges with identical flow sets; such
            // draws are rejected by the builder and the next seed is taken
            (0..50u64)
                .find_map(|attempt| {
                    let seed = 100 + i as u64 + 1000 * attempt;
                    let data = synthetic_num_with(nodes, seed, dest).expect("instance data");
                    let inst = build_num_instance(&data).ok()?;
                    Some((format!("num{nodes}/p{}/seed{seed}", data.n_vars()), inst))
                })
                .expect("a full-rank draw")
        })
        .collect()
}

fn path_config() -> SolverConfig {
    SolverConfig {
        beta: 0.05,
        eps: 1e-3,
        delta: ToleranceSchedule::constant(1e-5),
        eps_master: ToleranceSchedule::constant(1e-5),
        diagnostics: true,
        ..SolverConfig::default()
    }
}

/// Criteria 1-3 share the same 20 diagnostic runs.
struct PathRuns {
    runs: Vec<(String, f64, Result<SolveOutcome, ipld::IpldError>)>,
    elapsed: Duration,
    max_p: usize,
}

fn path_runs() -> PathRuns {
    let started = Instant::now();
    let cfg = path_config();
    let mut max_p = 0;
    let runs = path_instances()
        .into_iter()
        .map(|(name, inst)| {
            max_p = max_p.max(inst.primal_dim());
            let nu = inst.nu();
            (name, nu, solve(&inst, &cfg))
        })
        .collect();
    PathRuns { runs, elapsed: started.elapsed(), max_p }
}

fn criterion_1(p: &PathRuns) -> Verdict {
    let beta = path_config().beta;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut iterates = 0;
    for (name, _, r) in &p.runs {
        match r {
            Ok(o) => {
                for rec in &o.trace.records {
                    match &rec.diagnostics {
                        Some(d) => {
                            iterates += 1;
                            worst = worst.max(d.lambda_current);
                            if d.lambda_current > beta {
                                failures.push(format!("{name} k={}", rec.k));
                            }
                        }
                        None => failures.push(format!("{name} k={} unmeasured", rec.k)),
                    }
                }
                let rep = neighborhood_diagnostics(&o.trace);
                if !rep.passed() {
                    failures.push(format!("{name}: neighborhood estimates"));
                }
            }
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    let fast = within(p.elapsed, 300);
    Verdict::new(
        failures.is_empty() && fast && p.max_p <= 2000,
        format!(
            "{} iterates on {} instances (max p {}), max lambda {:.4} vs beta {beta}, {:.1} s{}",
            iterates,
            p.runs.len(),
            p.max_p,
            worst,
            p.elapsed.as_secs_f64(),
            summary(&failures)
        ),
    )
}

fn criterion_2(p: &PathRuns) -> Verdict {
    let mut failures = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    for (name, nu, r) in &p.runs {
        let Ok(o) = r else {
            failures.push(format!("{name}: no run"));
            continue;
        };
        let m = &o.trace.meta;
        let sigma = sigma_rule(m.beta, *nu).expect("sigma");
        let bound = kmax_bound(m.t0, m.eps / (1.0 + nu.sqrt()), sigma) + 1;
        worst_ratio = worst_ratio.max(o.iterations() as f64 / bound as f64);
        if o.iterations() > bound {
            failures.push(format!("{name}: {} > {bound}", o.iterations()));
        }
    }
    Verdict::new(failures.is_empty(), format!("max iterations/bound {worst_ratio:.4}{}", summary(&failures)))
}

fn criterion_3(p: &PathRuns) -> Verdict {
    let eps = path_config().eps;
    let mut failures = Vec::new();
    let mut worst_primal: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    for (name, _, r) in &p.runs {
        let Ok(o) = r else {
            failures.push(format!("{name}: no run"));
            continue;
        };
        for rec in &o.trace.records {
            let c = &rec.certificate;
            worst_primal = worst_primal.max(c.primal_opt / c.bound_primal);
            if c.bound_dual > 0.0 {
                let rel = (c.dual_resid_e - c.bound_dual).abs().max((c.dual_resid_r - c.bound_dual).abs()) / c.bound_dual;
                worst_identity = worst_identity.max(rel);
            }
            if !c.primal_within_bound() || !c.dual_identities_hold(1e-10) {
                failures.push(format!("{name} k={}", rec.k));
            }
        }
        if !o.certificate.passes(eps) {
            failures.push(format!("{name}: final certificate {:?}", o.certificate));
        }
    }
    Verdict::new(
        failures.is_empty(),
        format!(
            "max primal_opt/bound {worst_primal:.4}, max dual identity error {worst_identity:.2e}, final certificates at eps {eps}{}",
            summary(&failures)
        ),
    )
}

fn criterion_4() -> Verdict {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut max_p = 0;
    let mut rows = 0;
    for s in 0..10u64 {
        let nodes = if s % 2 == 0 { 5 } else { 4 };
        let inst = build_num_instance(&synthetic_num(nodes, 400 + s).expect("data")).expect("instance");
        max_p = max_p.max(inst.primal_dim());
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + s);
        let t = [1.0, 0.25, 0.05][s as usize % 3];
        let y = DVector::from_fn(inst.n_rows(), |_, _| rng.random_range(-1.0..1.0));
        match oracle_error_suite(&inst, t, &y, &[0.3, 0.05, 1e-3]) {
            Ok(rep) => {
                rows += rep.rows.len();
                for r in rep.rows.iter().filter(|r| !r.passed()) {
                    failures.push(format!("instance {s} delta {}: {r:?}", r.requested));
                }
            }
            Err(e) => failures.push(format!("instance {s}: {e}")),
        }
    }
    let elapsed = started.elapsed();
    Verdict::new(
        failures.is_empty() && max_p <= 20 && within(elapsed, 60),
        format!("{rows} oracle rows on 10 instances (max p {max_p}), {:.2} s{}", elapsed.as_secs_f64(), summary(&failures)),
    )
}

fn criterion_5() -> Verdict {
    let insts: Vec<ProblemInstance> = (0..5u64)
        .map(|s| build_num_instance(&synthetic_num(5, 500 + s).expect("data")).expect("instance"))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for k in 0..50 {
        let inst = &insts[k % insts.len()];
        let t = 10f64.powf(rng.random_range(-2.0..0.0));
        let y = DVector::from_fn(inst.n_rows(), |_, _| rng.random_range(-1.0..1.0));
        let base = reference_oracle(inst, t, &y, None).expect("oracle");
        let h = 1e-5;
        let mut fd = DVector::zeros(y.len());
        for i in 0..y.len() {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[i] += h;
            ym[i] -= h;
            let dp = reference_oracle(inst, t, &yp, Some(&base.x_tilde)).expect("oracle").d_value;
            let dm = reference_oracle(inst, t, &ym, Some(&base.x_tilde)).expect("oracle").d_value;
            fd[i] = (dp - dm) / (2.0 * h);
        }
        let rel = (&fd - &base.grad).norm() / base.grad.norm().max(1e-300);
        worst = worst.max(rel);
        if rel > 1e-5 {
            failures.push(format!("pair {k}: t {t:.3e} relative error {rel:.2e}"));
        }
    }
    Verdict::new(failures.is_empty(), format!("50 (y,t) pairs, max relative error {worst:.2e}{}", summary(&failures)))
}

fn criterion_6() -> Verdict {
    let mut failures = Vec::new();
    let mut tested = Vec::new();
    for s in 0..10u64 {
        let inst = if s < 6 {
            build_num_instance(&synthetic_num(6 + s as usize, 600 + s).expect("data")).expect("instance")
        } else {
            build_dsl_instance(&generate_dsl(3, 6, 600 + s).expect("data")).expect("instance")
        };
        let cfg = SolverConfig { beta: 0.1, ..SolverConfig::default() };
        let p1 = match phase1(&inst, &cfg) {
            Ok(p) => p,
            Err(e) => {
                failures.push(format!("instance {s}: phase 1: {e}"));
                continue;
            }
        };
        // shrink t until the start is well inside the unit decrement ball but not trivially close
        let mut done = false;
        for shrink in [0.5, 0.7, 0.85, 0.95, 1.0] {
            let t = cfg.t0 * shrink;
            match exact_contraction(&inst, &cfg, t, &p1.y0, Some(&p1.x0), 1e-12) {
                Ok((l0, l1)) if l0 < 0.5 => {
                    let bound = l0 * l0 / ((1.0 - l0) * (1.0 - l0));
                    tested.push(l0);
                    if l1 > bound + 1e-6 {
                        failures.push(format!("instance {s}: lambda {l0:.3e} -> {l1:.3e} > {bound:.3e}"));
                    }
                    done = true;
                    break;
                }
                Ok(_) => continue,
                Err(e) => {
                    failures.push(format!("instance {s}: {e}"));
                    done = true;
                    break;
                }
            }
        }
        if !done {
            failures.push(format!("instance {s}: no start with lambda < 0.5"));
        }
    }
    let lo = tested.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tested.iter().copied().fold(0.0, f64::max);
    Verdict::new(
        failures.is_empty() && tested.len() == 10,
        format!("10 instances, starting lambda in [{lo:.3e}, {hi:.3e}]{}", summary(&failures)),
    )
}

fn criterion_7() -> Verdict {
    let mut failures = Vec::new();
    let mut steps = 0;
    let mut worst_margin = f64::INFINITY;
    let cfg = SolverConfig { diagnostics: true, ..SolverConfig::default() };
    for s in 0..8u64 {
        let inst = if s < 4 {
            build_num_instance(&synthetic_num(8 + 2 * s as usize, 700 + s).expect("data")).expect("instance")
        } else {
            build_dsl_instance(&generate_dsl(4, 10, 700 + s).expect("data")).expect("instance")
        };
        match phase1(&inst, &cfg) {
            Ok(p) => {
                for st in &p.steps {
                    steps += 1;
                    let m = st.descent_margin(cfg.beta).unwrap_or(f64::NEG_INFINITY);
                    worst_margin = worst_margin.min(m);
                    if m < -1e-8 {
                        failures.push(format!("instance {s} step {}: margin {m:.3e}", st.j));
                    }
                }
                if p.lambda > cfg.beta {
                    failures.push(format!("instance {s}: final lambda {}", p.lambda));
                }
            }
            Err(e) => failures.push(format!("instance {s}: {e}")),
        }
    }
    Verdict::new(
        failures.is_empty() && steps > 0,
        format!(
            "{steps} phase-1 steps on 8 instances, guaranteed decrease {:.4e}, worst margin {worst_margin:.3e}{}",
            phase1_decrease(cfg.beta),
            summary(&failures)
        ),
    )
}

fn criterion_8() -> Verdict {
    let data = synthetic_num(10, 7).expect("data");
    let inst = build_num_instance(&data).expect("instance");
    let cfg = SolverConfig { eps: 1e-8, ..SolverConfig::default() };
    let ipld = match solve(&inst, &cfg) {
        Ok(o) => o,
        Err(e) => return Verdict::new(false, format!("IPLD failed: {e}")),
    };
    let cp = build_cp_num(&data).expect("cp problem");
    let res = match cp_tune(&cp.problem, &default_tau_grid(), CP_DEFAULT_MAX_ITER, 1e-7, 1e-7) {
        Ok(r) => r,
        Err(e) => return Verdict::new(false, format!("CP failed: {e}")),
    };
    let cp_obj = cp.objective(&data, &res);
    let cp_feas = cp.flow_feasibility(&data, &res);
    let rel = (ipld.objective - cp_obj).abs() / ipld.objective.abs().max(1.0);
    let product = res.step_product();
    Verdict::new(
        rel <= 1e-5 && ipld.feasibility <= 1e-7 && cp_feas <= 1e-7 && res.converged && product <= CP_STEP_PRODUCT * (1.0 + 1e-12),
        format!(
            "p {}, relative objective difference {rel:.2e}, feasibility IPLD {:.2e} CP {cp_feas:.2e}, CP {} iterations at tau {:.0e}, tau*sigma*|K|^2 = {product:.6}",
            inst.primal_dim(),
            ipld.feasibility,
            res.iters,
            res.tau
        ),
    )
}

fn criterion_9() -> Verdict {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut pairs = 0;
    for i in 0..5 {
        let a = 0.02 + 0.17 * i as f64;
        for j in 0..5 {
            let b = (0.9 - a) * (j + 1) as f64 / 5.0;
            pairs += 1;
            match lemma4_region_check(a, b, 0.005, 5.0) {
                Ok(true) => {}
                Ok(false) => failures.push(format!("({a:.3}, {b:.3})")),
                Err(e) => failures.push(format!("({a:.3}, {b:.3}): {e}")),
            }
        }
    }
    let elapsed = started.elapsed();
    Verdict::new(
        failures.is_empty() && within(elapsed, 10),
        format!("{pairs} (a,b) pairs on a 0.005 grid over [0,5]^2, {:.2} s{}", elapsed.as_secs_f64(), summary(&failures)),
    )
}

fn sweep_check(counts: &[(f64, Option<usize>)], stable_below: f64) -> Result<String, String> {
    let mut it = Vec::new();
    for &(v, c) in counts {
        it.push((v, c.ok_or_else(|| format!("run at {v:e} failed"))?));
    }
    // grid runs loose to tight
    for w in it.windows(2) {
        if w[1].1 > w[0].1 {
            return Err(format!("count rises from {} at {:e} to {} at {:e}", w[0].1, w[0].0, w[1].1, w[1].0));
        }
    }
    let tightest = it.last().expect("non-empty").1;
    for &(v, c) in &it {
        if v <= stable_below * (1.0 + 1e-12) && c.abs_diff(tightest) > 2 {
            return Err(format!("{c} iterations at {v:e} vs {tightest} at the tightest value"));
        }
    }
    Ok(it.iter().map(|(v, c)| format!("{v:.0e}:{c}")).collect::<Vec<_>>().join(" "))
}

fn criterion_10() -> Verdict {
    let started = Instant::now();
    let inst = build_dsl_instance(&generate_dsl(7, 50, 10).expect("data")).expect("instance");
    let base = SolverConfig {
        eps: 1e-2,
        delta: ToleranceSchedule::constant(1e-5),
        eps_master: ToleranceSchedule::constant(1e-5),
        ..SolverConfig::default()
    };
    let mut details = Vec::new();
    let mut ok = true;
    for axis in [SweepAxis::EpsMaster, SweepAxis::Delta] {
        let cells = tolerance_sweep(&inst, &base, axis, &axis.default_grid());
        let counts: Vec<(f64, Option<usize>)> = cells.iter().map(|c| (c.value, c.iterations())).collect();
        match sweep_check(&counts, 1e-4) {
            Ok(s) => details.push(format!("{axis:?} [{s}]")),
            Err(e) => {
                ok = false;
                details.push(format!("{axis:?}: {e}"));
            }
        }
    }
    let elapsed = started.elapsed();
    Verdict::new(ok && within(elapsed, 300), format!("{}, {:.1} s", details.join("; "), elapsed.as_secs_f64()))
}

fn criterion_11() -> Verdict {
    let checks: Vec<(&str, f64, f64)> = vec![
        ("sigma_rule(0.1, 4)", sigma_rule(0.1, 4.0).unwrap(), 0.985_714_285_714_285_7),
        ("sigma_rule(0.05, 10)", sigma_rule(0.05, 10.0).unwrap(), 0.995_436_344_710_511_8),
        ("c_nu canonical beta 0.1", c_nu(sigma_rule(0.1, 4.0).unwrap(), 0.001, 4.0).unwrap(), 0.03),
        ("c_nu canonical beta 0.05", c_nu(sigma_rule(0.05, 100.0).unwrap(), 0.0005, 100.0).unwrap(), 0.015),
        ("mt_coeff(1)", mt_coeff(1.0).unwrap(), 1.0),
        ("mt_coeff(0.25)", mt_coeff(0.25).unwrap(), 4.0),
        ("mt_coeff(0.5)", mt_coeff(0.5).unwrap(), 2.0),
        ("phase1_stepsize(1,0,0)", phase1_stepsize(1.0, 0.0, 0.0).unwrap(), 0.5),
        ("phase1_stepsize(0.2,0,0)", phase1_stepsize(0.2, 0.0, 0.0).unwrap(), 0.833_333_333_333_333_3),
        ("phase1_stepsize(0.5,1e-3,1e-3)", phase1_stepsize(0.5, 1e-3, 1e-3).unwrap(), 0.663_778_075_755_491_5),
        ("omega(1)", omega(1.0), 0.306_852_819_440_054_7),
        ("omega_star(0.5)", omega_star(0.5).unwrap(), 0.193_147_180_559_945_3),
        ("phase-1 decrease beta 0.05", phase1_decrease(0.05), 0.001_138_307_186_118_255_7),
        ("kmax(0.25, 1e-6, sigma(0.1,4))", kmax_bound(0.25, 1e-6, sigma_rule(0.1, 4.0).unwrap()) as f64, 863.0),
        ("kmax(t0 = eps)", kmax_bound(0.25, 0.25, 0.99) as f64, 0.0),
        ("jmax(1, 0.05)", jmax_bound(1.0, 0.05) as f64, 879.0),
        ("jmax(0, 0.05)", jmax_bound(0.0, 0.05) as f64, 1.0),
    ];
    let bad: Vec<String> = checks
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > 1e-12)
        .map(|(n, got, want)| format!("{n}: {got} vs {want}"))
        .collect();
    Verdict::new(bad.is_empty(), format!("{} scalar values within 1e-12{}", checks.len(), summary(&bad)))
}

fn summary(failures: &[String]) -> String {
    if failures.is_empty() {
        return String::new();
    }
    let shown: Vec<&str> = failures.iter().take(3).map(String::as_str).collect();
    format!("; {} failures, e.g. {}", failures.len(), shown.join(" | "))
}

fn main() -> ExitCode {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let run = |k: usize| wanted.is_empty() || wanted.contains(&k);
    let mut results: Vec<(usize, Verdict)> = Vec::new();
    if run(1) || run(2) || run(3) {
        let p = path_runs();
        for (k, f) in [(1, criterion_1 as fn(&PathRuns) -> Verdict), (2, criterion_2), (3, criterion_3)] {
            if run(k) {
                results.push((k, f(&p)));
            }
        }
    }
    let rest: [(usize, fn() -> Verdict); 8] = [
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
    ];
    for (k, f) in rest {
        if run(k) {
            results.push((k, f()));
        }
    }
    results.sort_by_key(|r| r.0);
    let mut all = true;
    for (k, v) in &results {
        all &= v.passed;
        println!("criterion {k:>2}: {}  {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
