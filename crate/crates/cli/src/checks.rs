//! Named verification checks grouped into suites. Every check reports a
//! signed margin and a pinned tolerance; it passes when
//! `margin >= -tolerance`. Randomized checks draw their stream from
//! `rng_for(seed, scenario, check_index)`, so results are identical no
//! matter how many worker threads execute them.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use bmolab_core::*;
use rand::Rng;

pub const SUITES: &[&str] = &[
    "theorem-chain",
    "bellman-geometry",
    "truncation-lemmas",
    "regularizer",
    "counterexamples",
];

type CheckFn = Box<dyn Fn(u64, &str, u64) -> Result<f64> + Send + Sync>;

pub struct CheckSpec {
    pub suite: String,
    pub name: String,
    pub tolerance: f64,
    run: CheckFn,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub suite: String,
    pub name: String,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub struct VerifyParams {
    pub gauges: Vec<(String, OscillationGauge)>,
    pub t_values: Vec<f64>,
    pub cases: usize,
    pub fuzz_segments: usize,
}

fn spec(
    suite: &str,
    name: String,
    tolerance: f64,
    overrides: &BTreeMap<String, f64>,
    run: CheckFn,
) -> CheckSpec {
    let tolerance = overrides.get(&name).copied().unwrap_or(tolerance);
    CheckSpec { suite: suite.to_string(), name, tolerance, run }
}

fn random_phi(rng: &mut impl Rng, n: usize, max_depth: u32) -> DyadicSimpleFunction {
    let depth = rng.gen_range(1..=max_depth);
    let count = 1usize << (n as u32 * depth);
    let leaves: Vec<f64> = (0..count).map(|_| rng.gen_range(-3.0..3.0)).collect();
    DyadicSimpleFunction::new(n, depth, leaves).expect("within caps")
}

fn bellman_geometry(p: &VerifyParams, o: &BTreeMap<String, f64>, out: &mut Vec<CheckSpec>) {
    let suite = "bellman-geometry";
    for (gname, g) in &p.gauges {
        for &t in &p.t_values {
            let h = g.clone();
            out.push(spec(
                suite,
                format!("boundary:{gname}:t={t}"),
                1e-9,
                o,
                Box::new(move |_, _, _| {
                    let ev = GEvaluator::new(t, &h)?;
                    let mut worst = 0.0f64;
                    for i in 0..400 {
                        let x1 = -10.0 * t + 20.0 * t * i as f64 / 399.0;
                        worst = worst.max((ev.eval(x1, x1 * x1)? - h.eval(x1.abs())).abs());
                    }
                    Ok(-worst)
                }),
            ));
            let h = g.clone();
            out.push(spec(
                suite,
                format!("seam:{gname}:t={t}"),
                1e-6,
                o,
                Box::new(move |_, _, _| Ok(-seam_continuity_check(t, &h, 400)?)),
            ));
            let h = g.clone();
            let segments = p.fuzz_segments;
            out.push(spec(
                suite,
                format!("convexity:{gname}:t={t}"),
                1e-8,
                o,
                Box::new(move |seed, scenario, idx| {
                    let mut rng = rng_for(seed, scenario, idx);
                    let fuzz_seed: u64 = rng.gen();
                    local_convexity_fuzz(t, &h, segments, fuzz_seed)
                }),
            ));
            let h = g.clone();
            out.push(spec(
                suite,
                format!("closing:{gname}:t={t}"),
                1e-10,
                o,
                Box::new(move |_, _, _| {
                    let mut worst = 0.0f64;
                    for n in [1usize, 2] {
                        let big_t = 2.0f64.powf(n as f64 / 2.0) * t;
                        let gap = (lower_bound_a(t, &h, n) - g_eval(0.0, t * t, big_t, &h)?).abs();
                        worst = worst.max(gap);
                    }
                    Ok(-worst)
                }),
            ));
        }
    }
}

fn theorem_chain(p: &VerifyParams, o: &BTreeMap<String, f64>, out: &mut Vec<CheckSpec>) {
    let suite = "theorem-chain";
    for (gname, g) in &p.gauges {
        let h = g.clone();
        let cases = p.cases;
        out.push(spec(
            suite,
            format!("inverted-bound:{gname}"),
            1e-9,
            o,
            Box::new(move |seed, scenario, idx| {
                let mut rng = rng_for(seed, scenario, idx);
                let mut worst = f64::INFINITY;
                for case in 0..cases {
                    let n = if case % 4 == 3 { 2 } else { 1 };
                    let phi = random_phi(&mut rng, n, if n == 1 { 8 } else { 4 });
                    let norm = bmo_dyadic(&phi).value;
                    let k = k_h_dyadic(&phi, &h).value;
                    worst = worst.min(norm - h.inverse(k)?);
                }
                Ok(worst)
            }),
        ));
        let h = g.clone();
        out.push(spec(
            suite,
            format!("closed-form-lower:{gname}"),
            1e-9,
            o,
            Box::new(move |seed, scenario, idx| {
                let mut rng = rng_for(seed, scenario, idx);
                let mut worst = f64::INFINITY;
                for case in 0..cases {
                    let n = if case % 4 == 3 { 2 } else { 1 };
                    let phi = random_phi(&mut rng, n, if n == 1 { 8 } else { 4 });
                    let norm = bmo_dyadic(&phi).value;
                    let k = k_h_dyadic(&phi, &h).value;
                    let p_exp = (n + 2) as f64;
                    let lower = 0.5f64.powf(p_exp) * h.eval(2.0f64.powf(p_exp / 2.0) * norm);
                    worst = worst.min(k - lower);
                }
                Ok(worst)
            }),
        ));
        let h = g.clone();
        out.push(spec(
            suite,
            format!("sharp-interval:{gname}"),
            1e-9,
            o,
            Box::new(move |seed, scenario, idx| {
                let mut rng = rng_for(seed, scenario, idx);
                let mut worst = f64::INFINITY;
                for _ in 0..cases {
                    let phi = random_phi(&mut rng, 1, 6);
                    let gdepth = phi.depth();
                    let norm = bmo_grid(&phi, gdepth)?.value;
                    if norm <= 1e-9 {
                        continue;
                    }
                    let leaves = phi.leaves();
                    let cells = leaves.len();
                    for i in 0..cells {
                        for j in (i + 1)..=cells {
                            let seg = &leaves[i..j];
                            let cnt = seg.len() as f64;
                            let mean = seg.iter().sum::<f64>() / cnt;
                            let var =
                                seg.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / cnt;
                            let rhs =
                                seg.iter().map(|v| h.eval((v - mean).abs())).sum::<f64>() / cnt;
                            let lhs = var / (4.0 * norm * norm) * h.eval(2.0 * norm);
                            worst = worst.min(rhs - lhs);
                        }
                    }
                }
                Ok(worst)
            }),
        ));
        let h = g.clone();
        out.push(spec(
            suite,
            format!("induction:{gname}"),
            1e-8,
            o,
            Box::new(move |seed, scenario, idx| {
                let mut rng = rng_for(seed, scenario, idx);
                let mut worst = f64::INFINITY;
                for _ in 0..cases.min(200) {
                    let phi = random_phi(&mut rng, 1, 3);
                    let t = bmo_dyadic(&phi).value.max(1e-6);
                    let k = rng.gen_range(1..=phi.depth());
                    worst = worst.min(bellman_induction_check(&phi, t, &h, k)?);
                }
                Ok(worst)
            }),
        ));
    }
}

fn truncation_lemmas(p: &VerifyParams, o: &BTreeMap<String, f64>, out: &mut Vec<CheckSpec>) {
    let suite = "truncation-lemmas";
    for (gname, g) in &p.gauges {
        for which in ["doubling", "lipschitz"] {
            let h = g.clone();
            let cases = p.cases;
            let doubling = which == "doubling";
            out.push(spec(
                suite,
                format!("{which}:{gname}"),
                1e-10,
                o,
                Box::new(move |seed, scenario, idx| {
                    let mut rng = rng_for(seed, scenario, idx);
                    let mut worst = f64::INFINITY;
                    for case in 0..cases {
                        let n = if case % 4 == 3 { 2 } else { 1 };
                        let phi = random_phi(&mut rng, n, if n == 1 { 8 } else { 4 });
                        let m = rng.gen_range(0..=phi.depth());
                        let rep = truncation_gap_check(&phi, &h, m)?;
                        worst =
                            worst.min(if doubling { rep.doubling_margin } else { rep.lipschitz_margin });
                    }
                    Ok(worst)
                }),
            ));
        }
    }
    let cases = p.cases;
    out.push(spec(
        suite,
        "second-moment-contraction".into(),
        1e-12,
        o,
        Box::new(move |seed, scenario, idx| {
            let mut rng = rng_for(seed, scenario, idx);
            let mut worst = f64::INFINITY;
            for _ in 0..cases {
                let phi = random_phi(&mut rng, 1, 6);
                let m = rng.gen_range(0..=phi.depth());
                let root = DyadicCube::root(1);
                let full = phi.second_moment(&root)?;
                let trunc = phi.truncate(m).second_moment(&DyadicCube::root(1))?;
                worst = worst.min(full - trunc);
            }
            Ok(worst)
        }),
    ));
}

fn regularizer(_p: &VerifyParams, o: &BTreeMap<String, f64>, out: &mut Vec<CheckSpec>) {
    let suite = "regularizer";
    // the driving example: the non-monotone gauge lifted by a constant, with
    // the growth flag declared so the regularizer accepts it
    let build = || {
        let h6 = section6_gauge();
        let flags = GaugeFlags { continuous: true, tends_to_infinity: true, ..GaugeFlags::none() };
        let f = OscillationGauge::from_fn("lifted", flags, move |t| h6.eval(t) + 3.0);
        regularize(&f, 1e3, 1e-3).map(|r| (f, r))
    };
    out.push(spec(
        suite,
        "thresholds-grow".into(),
        1e-9,
        o,
        Box::new(move |_, _, _| {
            let (_, reg) = build()?;
            let mut worst = f64::INFINITY;
            for (m, &tm) in reg.thresholds().iter().enumerate() {
                let target = (1u64 << m) as f64;
                worst = worst.min((tm - target) / target);
            }
            Ok(worst)
        }),
    ));
    out.push(spec(
        suite,
        "domination".into(),
        1e-12,
        o,
        Box::new(move |_, _, _| {
            let (f, reg) = build()?;
            let mut worst = f64::INFINITY;
            for &t in log_grid(1e-6, 1e3, 5000).iter() {
                worst = worst.min(f.eval(t) - reg.eval(t));
            }
            Ok(worst)
        }),
    ));
    out.push(spec(
        suite,
        "derivative-signs".into(),
        0.0,
        o,
        Box::new(move |_, _, _| {
            let (_, reg) = build()?;
            let mut worst = f64::INFINITY;
            for &t in log_grid(1e-6, 1e3, 5000).iter() {
                worst = worst.min(reg.d1(t).min(-reg.d2(t)).min(reg.d3(t)));
            }
            Ok(worst)
        }),
    ));
}

fn counterexamples(p: &VerifyParams, o: &BTreeMap<String, f64>, out: &mut Vec<CheckSpec>) {
    let suite = "counterexamples";
    let cases = p.cases;
    out.push(spec(
        suite,
        "bounded-norm-random".into(),
        0.0,
        o,
        Box::new(move |seed, scenario, idx| {
            let h = section6_gauge();
            let mut rng = rng_for(seed, scenario, idx);
            let mut worst = f64::INFINITY;
            for _ in 0..cases {
                let depth = rng.gen_range(2..=6u32);
                let m = 1usize << depth;
                let mut leaves = vec![0.0f64; m];
                for _ in 0..rng.gen_range(1..=3) {
                    let k = rng.gen_range(1..=depth);
                    let scale: f64 = rng.gen_range(-2.0..2.0);
                    let start = 1usize << (depth - k);
                    let half = start / 2;
                    for l in leaves.iter_mut().skip(start).take(half) {
                        *l += -scale;
                    }
                    for l in leaves.iter_mut().skip(start + half).take(half) {
                        *l += scale;
                    }
                }
                let slope: f64 = rng.gen_range(-1.0..1.0);
                for (i, l) in leaves.iter_mut().enumerate() {
                    *l += slope * i as f64 / m as f64;
                }
                let phi = DyadicSimpleFunction::new(1, depth, leaves)?;
                let k = k_h_grid(&phi, &h, depth)?.value;
                let rep = verify_sqrt10m(&phi, 1.05 * k + 0.01)?;
                worst = worst.min(if rep.fractional_ok { rep.margin } else { -1.0 });
            }
            Ok(worst)
        }),
    ));
    out.push(spec(
        suite,
        "adversarial-ratio".into(),
        0.0,
        o,
        Box::new(move |seed, scenario, idx| {
            let mut rng = rng_for(seed, scenario, idx);
            let s: u64 = rng.gen();
            Ok(10.0 - adversarial_ratio_search(4, 20_000, s)?)
        }),
    ));
    out.push(spec(
        suite,
        "divergent-series-depth".into(),
        0.0,
        o,
        Box::new(move |_, _, _| {
            let h = dip_gauge();
            let (_, phi) = haar_series_build(&h, 1.0, 10, 4096.0)?;
            Ok(-((phi.depth() as f64 - 21.0).abs()))
        }),
    ));
    out.push(spec(
        suite,
        "divergent-series-audit".into(),
        0.0,
        o,
        Box::new(move |_, _, _| {
            let h = dip_gauge();
            let (series, phi) = haar_series_build(&h, 1.0, 10, 4096.0)?;
            let rep = haar_series_audit(&series, &phi, &h)?;
            if !rep.ok() {
                return Ok(-1.0);
            }
            Ok(1.0 - rep.k_d)
        }),
    ));
    out.push(spec(
        suite,
        "divergent-series-variance".into(),
        1e-9,
        o,
        Box::new(move |_, _, _| {
            let h = dip_gauge();
            let (series, phi) = haar_series_build(&h, 1.0, 10, 4096.0)?;
            let rep = haar_series_audit(&series, &phi, &h)?;
            let mut worst = f64::INFINITY;
            for &(terms, var, _) in &rep.variance_table {
                worst = worst.min(var - terms as f64);
            }
            Ok(worst)
        }),
    ));
}

/// Builds the ordered check list for the selected suites. The order is the
/// identity the deterministic RNG keys off, so it must not depend on job
/// count or execution order.
pub fn build_checks(
    suites: &[String],
    params: &VerifyParams,
    overrides: &BTreeMap<String, f64>,
) -> Result<Vec<CheckSpec>> {
    let mut out = Vec::new();
    for s in suites {
        match s.as_str() {
            "theorem-chain" => theorem_chain(params, overrides, &mut out),
            "bellman-geometry" => bellman_geometry(params, overrides, &mut out),
            "truncation-lemmas" => truncation_lemmas(params, overrides, &mut out),
            "regularizer" => regularizer(params, overrides, &mut out),
            "counterexamples" => counterexamples(params, overrides, &mut out),
            other => {
                return Err(Error::Precondition(format!(
                    "unknown suite '{other}' (known: {})",
                    SUITES.join(", ")
                )))
            }
        }
    }
    Ok(out)
}

/// Runs the checks on `jobs` worker threads. Each check owns its RNG stream
/// keyed by its index in the list, and results are re-sorted into list
/// order, so the output is byte-identical for any job count.
pub fn run_checks(
    checks: &[CheckSpec],
    seed: u64,
    scenario: &str,
    jobs: usize,
) -> Result<Vec<CheckResult>> {
    let jobs = jobs.max(1).min(checks.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<CheckResult>>>> =
        Mutex::new((0..checks.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= checks.len() {
                    break;
                }
                let c = &checks[i];
                let res = (c.run)(seed, scenario, i as u64).map(|margin| CheckResult {
                    suite: c.suite.clone(),
                    name: c.name.clone(),
                    margin,
                    tolerance: c.tolerance,
                    pass: margin >= -c.tolerance,
                });
                slots.lock().unwrap()[i] = Some(res);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|s| s.expect("all slots filled")).collect()
}
