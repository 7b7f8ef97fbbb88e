//! `bmolab` — scenario-driven driver for the dyadic oscillation toolkit.
//!
//! Four subcommands, all fed by a sectioned key=value config file:
//! * `verify` runs named check suites and writes `margins.csv` + `report.txt`
//! * `surface` samples the sub-solution over its parabolic strip and writes
//!   `surface.csv`, `surface.svg`, `report.txt`
//! * `oracle` sandwiches the extremal value between the closed-form lower
//!   bound and the sub-solution upper bound, writing `oracle.csv`,
//!   `witness.dsf`, `report.txt`
//! * `counterexample` rebuilds the two counterexample constructions and
//!   writes their audit artifacts

mod checks;
mod config;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use bmolab_core::*;
use clap::{Parser, Subcommand};

use checks::{build_checks, run_checks, CheckResult, VerifyParams};
use config::{parse_gauge, ScenarioConfig};

#[derive(Parser)]
#[command(name = "bmolab", about = "dyadic oscillation toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario config file
    #[arg(long)]
    config: PathBuf,
    /// Output directory for artifacts (default: current directory)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed for all randomized checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; results are identical for any value
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites from the scenario config
    Verify(Common),
    /// Sample the sub-solution over its domain
    Surface(Common),
    /// Run the extremal-value search and report the sandwich
    Oracle(Common),
    /// Rebuild a counterexample construction and audit it
    Counterexample(Common),
}

fn main() {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Verify(c) => run("verify", c, cmd_verify),
        Command::Surface(c) => run("surface", c, cmd_surface),
        Command::Oracle(c) => run("oracle", c, cmd_oracle),
        Command::Counterexample(c) => run("counterexample", c, cmd_counterexample),
    };
    std::process::exit(code);
}

struct Ctx<'a> {
    cfg: ScenarioConfig,
    cfg_text: String,
    out: PathBuf,
    scenario: String,
    seed: u64,
    jobs: usize,
    common: &'a Common,
}

fn run(kind: &str, common: &Common, f: fn(&Ctx) -> Result<(bool, String)>) -> i32 {
    let ctx = match load_ctx(kind, common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bmolab {kind}: {e}");
            return 2;
        }
    };
    let started = Instant::now();
    match f(&ctx) {
        Ok((pass, body)) => {
            let elapsed = started.elapsed();
            if let Err(e) = write_report(&ctx, kind, pass, &body, elapsed.as_millis()) {
                eprintln!("bmolab {kind}: {e}");
                return 2;
            }
            if pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("bmolab {kind}: {e}");
            2
        }
    }
}

fn load_ctx<'a>(kind: &str, common: &'a Common) -> std::result::Result<Ctx<'a>, String> {
    let cfg_text = std::fs::read_to_string(&common.config)
        .map_err(|e| format!("{}: {e}", common.config.display()))?;
    let cfg = ScenarioConfig::parse(&cfg_text).map_err(|e| e.to_string())?;
    if let Some(k) = cfg.get("kind") {
        if k != kind {
            return Err(format!(
                "config declares kind = {k} but the {kind} subcommand was invoked"
            ));
        }
    }
    let stem = common
        .config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    let scenario = cfg.str_or("name", &stem);
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| format!("{}: {e}", out.display()))?;
    Ok(Ctx { cfg, cfg_text, out, scenario, seed: common.seed, jobs: common.jobs, common })
}

fn write_report(
    ctx: &Ctx,
    kind: &str,
    pass: bool,
    body: &str,
    millis: u128,
) -> std::io::Result<()> {
    let mut r = String::new();
    let _ = writeln!(r, "bmolab {kind} report");
    let _ = writeln!(r, "scenario: {}", ctx.scenario);
    let _ = writeln!(r, "config: {}", ctx.common.config.display());
    let _ = writeln!(r, "seed: {}", ctx.seed);
    let _ = writeln!(r, "jobs: {}", ctx.jobs);
    let _ = writeln!(r, "wall-time-ms: {millis}");
    let _ = writeln!(r, "status: {}", if pass { "PASS" } else { "FAIL" });
    let _ = writeln!(r);
    r.push_str(body);
    let _ = writeln!(r);
    let _ = writeln!(r, "--- config echo ---");
    r.push_str(&ctx.cfg_text);
    if !ctx.cfg_text.ends_with('\n') {
        r.push('\n');
    }
    std::fs::write(ctx.out.join("report.txt"), r)
}

fn parse_gauges(ctx: &Ctx) -> Result<Vec<(String, OscillationGauge)>> {
    let mut specs = ctx.cfg.list_of_strs("gauges");
    if specs.is_empty() {
        specs = vec!["power:p=0.5".into(), "log1p".into()];
    }
    specs
        .into_iter()
        .map(|s| {
            let g = parse_gauge(&s).map_err(Error::Precondition)?;
            Ok((s, g))
        })
        .collect()
}

// --- verify ---------------------------------------------------------------

fn cmd_verify(ctx: &Ctx) -> Result<(bool, String)> {
    let suites = ctx.cfg.list_of_strs("suites");
    if suites.is_empty() {
        return Err(Error::Precondition(format!(
            "no suites selected; set `suites = ...` in [scenario] (known: {})",
            checks::SUITES.join(", ")
        )));
    }
    let params = VerifyParams {
        gauges: parse_gauges(ctx)?,
        t_values: ctx
            .cfg
            .list_of_nums("t_values", &[0.5, 1.0, 2.0])
            .map_err(|e| Error::Precondition(e.to_string()))?,
        cases: ctx.cfg.int_or("cases", 200).map_err(|e| Error::Precondition(e.to_string()))?
            as usize,
        fuzz_segments: ctx
            .cfg
            .int_or("fuzz_segments", 2000)
            .map_err(|e| Error::Precondition(e.to_string()))? as usize,
    };
    let list = build_checks(&suites, &params, &ctx.cfg.tolerances)?;
    let results = run_checks(&list, ctx.seed, &ctx.scenario, ctx.jobs)?;

    let mut csv = String::from("suite,check,margin,tolerance,pass\n");
    for r in &results {
        let _ = writeln!(
            csv,
            "{},{},{:.17e},{:.3e},{}",
            r.suite, r.name, r.margin, r.tolerance, r.pass
        );
    }
    std::fs::write(ctx.out.join("margins.csv"), csv)?;

    let mut body = String::new();
    let _ = writeln!(body, "suites: {}", suites.join(", "));
    let _ = writeln!(body, "checks: {}", results.len());
    let failed: Vec<&CheckResult> = results.iter().filter(|r| !r.pass).collect();
    let _ = writeln!(body, "failed: {}", failed.len());
    let _ = writeln!(body, "artifacts: margins.csv, report.txt");
    for r in &results {
        println!(
            "{}/{}: {} (margin {:+.3e}, tol {:.1e})",
            r.suite,
            r.name,
            if r.pass { "pass" } else { "fail" },
            r.margin,
            r.tolerance
        );
    }
    if let Some(first) = failed.first() {
        eprintln!("first failing check: {}/{}", first.suite, first.name);
        let _ = writeln!(body, "first failing check: {}/{}", first.suite, first.name);
    }
    Ok((failed.is_empty(), body))
}

// --- surface --------------------------------------------------------------

fn cmd_surface(ctx: &Ctx) -> Result<(bool, String)> {
    let gspec = ctx.cfg.str_or("gauge", "power:p=0.5");
    let h = parse_gauge(&gspec).map_err(Error::Precondition)?;
    let t = ctx.cfg.num_or("t", 1.0).map_err(|e| Error::Precondition(e.to_string()))?;
    let mut res = ctx.cfg.int_or("resolution", 64).map_err(|e| Error::Precondition(e.to_string()))?
        as usize;
    if res % 2 == 1 {
        res += 1; // even, so the x1 grid contains 0 exactly
    }
    if !(t > 0.0) || res < 2 {
        return Err(Error::Precondition("surface needs t > 0 and resolution ≥ 2".into()));
    }
    let ev = GEvaluator::new(t, &h)?;

    let mut csv = String::from("x1,x2,t,branch,G\n");
    let mut samples = Vec::with_capacity((res + 1) * (res + 1));
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for i in 0..=res {
        let x1 = -2.5 * t + 5.0 * t * i as f64 / res as f64;
        for j in 0..=res {
            // vertical fibers from the boundary parabola to the top of the strip
            let x2 = x1 * x1 + t * t * j as f64 / res as f64;
            let (v, branch) = ev.eval_with_branch(x1, x2)?;
            let _ = writeln!(csv, "{x1:.17e},{x2:.17e},{t:.17e},{branch},{v:.17e}");
            vmin = vmin.min(v);
            vmax = vmax.max(v);
            samples.push((i, j, v));
        }
    }
    std::fs::write(ctx.out.join("surface.csv"), csv)?;

    let apex = ev.eval(0.0, t * t)?;
    let apex_ref = h.eval(2.0 * t) / 4.0;
    let apex_gap = (apex - apex_ref).abs();

    let cell = 8usize;
    let side = (res + 1) * cell;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{side}\" height=\"{side}\" viewBox=\"0 0 {side} {side}\">"
    );
    let span = (vmax - vmin).max(1e-300);
    for &(i, j, v) in &samples {
        let u = (v - vmin) / span;
        let rch = (255.0 * u) as u8;
        let bch = (255.0 * (1.0 - u)) as u8;
        let x = i * cell;
        let y = (res - j) * cell;
        let _ = writeln!(
            svg,
            "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"rgb({rch},64,{bch})\"/>"
        );
    }
    let _ = writeln!(svg, "</svg>");
    std::fs::write(ctx.out.join("surface.svg"), svg)?;

    let mut body = String::new();
    let _ = writeln!(body, "gauge: {gspec}");
    let _ = writeln!(body, "t: {t}");
    let _ = writeln!(body, "resolution: {res}");
    let _ = writeln!(body, "samples: {}", samples.len());
    let _ = writeln!(body, "value range: [{vmin:.12e}, {vmax:.12e}]");
    let _ = writeln!(body, "apex value G(0, t^2): {apex:.12e}");
    let _ = writeln!(body, "apex reference h(2t)/4: {apex_ref:.12e} (gap {apex_gap:.3e})");
    let _ = writeln!(body, "artifacts: surface.csv, surface.svg, report.txt");
    Ok((apex_gap <= 1e-9, body))
}

// --- oracle ---------------------------------------------------------------

fn cmd_oracle(ctx: &Ctx) -> Result<(bool, String)> {
    let gspec = ctx.cfg.str_or("gauge", "power:p=0.5");
    let h = parse_gauge(&gspec).map_err(Error::Precondition)?;
    let e = |e: config::ConfigError| Error::Precondition(e.to_string());
    let t = ctx.cfg.num_or("t", 1.0).map_err(e)?;
    let x1 = ctx.cfg.num_or("x1", 0.0).map_err(e)?;
    let x2 = ctx.cfg.num_or("x2", t * t).map_err(e)?;
    let depth = ctx.cfg.int_or("depth", 3).map_err(e)? as u32;
    let budget = ctx.cfg.int_or("budget", 200_000).map_err(e)?;
    let order = ctx.cfg.int_or("order", 1).map_err(e)? as usize;

    let big_t = 2.0f64.powf(order as f64 / 2.0) * t;
    let lower = g_eval(x1, x2, big_t, &h)?;
    let result = bellman_oracle(x1, x2, t, &h, depth, budget, ctx.seed)?;
    let at_apex = x1.abs() <= 1e-12 && (x2 - t * t).abs() <= 1e-12 * (1.0 + t * t);
    let upper = if at_apex { Some(h.eval(2.0 * t) / 4.0) } else { None };

    let mut csv = String::from("x1,x2,t,lower_bound,oracle_value,upper_bound\n");
    let upper_col = upper.map(|u| format!("{u:.17e}")).unwrap_or_default();
    let _ = writeln!(
        csv,
        "{x1:.17e},{x2:.17e},{t:.17e},{lower:.17e},{:.17e},{upper_col}",
        result.value
    );
    std::fs::write(ctx.out.join("oracle.csv"), csv)?;

    let dsf = result.witness.to_dsf_string();
    std::fs::write(ctx.out.join("witness.dsf"), &dsf)?;
    let back = DyadicSimpleFunction::from_dsf_str(&dsf)?;
    let round_trip_ok = back.leaves() == result.witness.leaves();

    let sandwich_ok = result.value >= lower - 1e-6
        && upper.map(|u| result.value <= u + 1e-9).unwrap_or(true);

    let mut body = String::new();
    let _ = writeln!(body, "gauge: {gspec}");
    let _ = writeln!(body, "point: ({x1}, {x2}), t = {t}, depth ≤ {depth}");
    let _ = writeln!(body, "budget: {budget} evaluations ({} used, {} starts)",
        result.evaluations, result.starts);
    let _ = writeln!(body, "lower bound (sub-solution, order {order}): {lower:.12e}");
    let _ = writeln!(body, "search value: {:.12e}", result.value);
    match upper {
        Some(u) => {
            let _ = writeln!(body, "upper bound h(2t)/4: {u:.12e}");
        }
        None => {
            let _ = writeln!(body, "upper bound: n/a (point is not the apex (0, t^2))");
        }
    }
    let _ = writeln!(body, "witness round-trip: {}", if round_trip_ok { "ok" } else { "MISMATCH" });
    let _ = writeln!(body, "artifacts: oracle.csv, witness.dsf, report.txt");
    Ok((sandwich_ok && round_trip_ok, body))
}

// --- counterexample -------------------------------------------------------

fn cmd_counterexample(ctx: &Ctx) -> Result<(bool, String)> {
    let e = |e: config::ConfigError| Error::Precondition(e.to_string());
    let construction = ctx.cfg.str_or("construction", "divergent-series");
    match construction.as_str() {
        "divergent-series" => {
            let gspec = ctx.cfg.str_or("gauge", "dip");
            let h = if gspec == "dip" {
                dip_gauge()
            } else {
                parse_gauge(&gspec).map_err(Error::Precondition)?
            };
            let bound = ctx.cfg.num_or("bound", 1.0).map_err(e)?;
            let terms = ctx.cfg.int_or("terms", 10).map_err(e)? as usize;
            let horizon = ctx.cfg.num_or("horizon", 4096.0).map_err(e)?;
            let (series, phi) = haar_series_build(&h, bound, terms, horizon)?;
            let rep = haar_series_audit(&series, &phi, &h)?;

            let mut csv = String::from("terms,variance,k_d\n");
            for &(tc, var, k) in &rep.variance_table {
                let _ = writeln!(csv, "{tc},{var:.17e},{k:.17e}");
            }
            std::fs::write(ctx.out.join("variance_table.csv"), csv)?;

            let mut body = String::new();
            let _ = writeln!(body, "construction: divergent-series");
            let _ = writeln!(body, "gauge: {gspec}");
            let _ = writeln!(body, "bound: {bound}");
            let _ = writeln!(body, "terms: {} (requested {terms})", series.term_count);
            let _ = writeln!(body, "thresholds: {:?}", series.thresholds);
            let _ = writeln!(body, "orders: {:?}", series.orders);
            let _ = writeln!(body, "representation depth: {}", phi.depth());
            let _ = writeln!(body, "K^d of full sum: {:.12e} (bound {:.12e})", rep.k_d, rep.k_bound);
            let _ = writeln!(body, "non-constant node means vanish: {}", rep.nonconstant_means_vanish);
            let _ = writeln!(body, "values in expected set: {}", rep.values_in_set);
            let l1 = series.l1_partial_sums();
            let _ = writeln!(
                body,
                "L1 partial sums: first {:.6}, last {:.6}, bound {:.6}",
                l1.first().unwrap_or(&0.0),
                l1.last().unwrap_or(&0.0),
                series.l1_upper_bound()
            );
            let variance_ok = rep
                .variance_table
                .iter()
                .all(|&(tc, var, k)| var >= tc as f64 - 1e-9 && k <= rep.k_bound + 1e-12);
            let _ = writeln!(body, "variance grows at least linearly in terms: {variance_ok}");
            let _ = writeln!(body, "artifacts: variance_table.csv, report.txt");
            Ok((rep.ok() && variance_ok && rep.k_d <= bound, body))
        }
        "bounded-norm" => {
            let bound = ctx.cfg.num_or("bound", 0.0).map_err(e)?;
            let phi = match ctx.cfg.get("function") {
                Some(path) => DyadicSimpleFunction::from_dsf_str(&std::fs::read_to_string(path)?)?,
                None => DyadicSimpleFunction::new(
                    1,
                    3,
                    vec![-2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0],
                )?,
            };
            let h = section6_gauge();
            let k = k_h_grid(&phi, &h, phi.depth().min(12))?.value;
            let m_bound = if bound > 0.0 { bound } else { 1.05 * k + 0.01 };
            let rep = verify_sqrt10m(&phi, m_bound)?;

            let mut csv = String::from("interval_lo,interval_hi,kind\n");
            for &(a, b) in &rep.set_a {
                let _ = writeln!(csv, "{a:.17e},{b:.17e},set_a");
            }
            for &(a, b) in &rep.rising_sun_intervals {
                let _ = writeln!(csv, "{a:.17e},{b:.17e},rising_sun");
            }
            std::fs::write(ctx.out.join("intervals.csv"), csv)?;

            let mut body = String::new();
            let _ = writeln!(body, "construction: bounded-norm");
            let _ = writeln!(body, "oscillation functional K: {k:.12e}");
            let _ = writeln!(body, "assumed bound M: {m_bound:.12e}");
            let _ = writeln!(body, "BMO norm: {:.12e}", rep.bmo);
            let _ = writeln!(body, "sqrt(10 M) ceiling: {:.12e}", (10.0 * m_bound).sqrt());
            let _ = writeln!(body, "margin: {:.12e}", rep.margin);
            let _ = writeln!(body, "inequality margins: {:?}", rep.inequality_margins);
            let _ = writeln!(body, "fractional-value property: {}", rep.fractional_ok);
            let _ = writeln!(body, "artifacts: intervals.csv, report.txt");
            Ok((rep.margin >= 0.0 && rep.fractional_ok, body))
        }
        other => Err(Error::Precondition(format!(
            "unknown construction '{other}' (known: divergent-series, bounded-norm)"
        ))),
    }
}
