//! `zmtile`: command-line access to the zmtile library.
//!
//! Exit codes: 0 success, 1 a requested check failed, 2 invalid usage or
//! input. Reports go to stdout, diagnostics to stderr.

mod render;

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use zmtile::cyclotomic::t1t2_report;
use zmtile::delsarte::{
    clique_number, clique_search, delsarte_bound, delta_m, delta_screen, k_of, screen, screen_full,
    DelsarteKind,
};
use zmtile::fourier::{eigen_check, ft_step};
use zmtile::sweep::{self, SweepConfig, SweepLayout};
use zmtile::tiling::{
    check_counterexample, construct_pd_pair, counterexample_pair, div_star, find_complement,
    pd_tile_feasible, sands_check, spectral_support, tiles_directly, TileSet,
};
use zmtile::{ClassSet, Error, Modulus, Rational, StepFunction};

use render::{emit, Format};

#[derive(Parser)]
#[command(
    name = "zmtile",
    version,
    about = "Tilings and functional pd-tilings of Z_M"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ClassArgs {
    /// The modulus M.
    #[arg(short = 'M', long = "modulus", alias = "M")]
    m: u64,
    /// Class set: comma-separated divisors (must include M) or a 0x mask.
    #[arg(long = "h")]
    h: String,
    /// delta: "screen" (1/(M^2 phi(M))), "m" (1/(M phi(M))) or a rational.
    #[arg(long, default_value = "screen")]
    delta: String,
}

#[derive(Subcommand)]
enum Command {
    /// Divisors, class sizes and thresholds of Z_M.
    Info { m: u64 },
    /// Transform a step function read from a JSON file ("-" for stdin).
    Ft { file: String },
    /// Cyclotomic spectrum and (T1)/(T2) report for a set or a step function.
    Cyclo {
        #[arg(short = 'M', long = "modulus", alias = "M", requires = "set")]
        m: Option<u64>,
        /// Residues, comma-separated.
        #[arg(long, conflicts_with = "file")]
        set: Option<String>,
        /// Step function JSON file.
        #[arg(long)]
        file: Option<String>,
    },
    /// Delsarte bounds D+, D-, D(delta)+ for H and its standard complement.
    Delsarte {
        #[command(flatten)]
        class: ClassArgs,
        /// Also compute the clique number of Gamma_H.
        #[arg(long)]
        clique: bool,
    },
    /// Two-LP screen D(delta)+(H) = D-(H) = k_H.
    Screen {
        #[command(flatten)]
        class: ClassArgs,
        /// Solve every bound, including the complement chain.
        #[arg(long)]
        full: bool,
    },
    /// Sands' criterion for A (+) B = Z_M, with a direct check.
    Sands {
        #[arg(short = 'M', long = "modulus", alias = "M")]
        m: u64,
        a: String,
        b: String,
    },
    /// Whether A pd-tiles Z_M, with a step-function complement.
    Pdtile {
        #[arg(short = 'M', long = "modulus", alias = "M")]
        m: u64,
        a: String,
    },
    /// The functional pd-tiling on Z_{p^4 q^2} that fails (T2).
    Counterexample {
        #[arg(short)]
        p: u64,
        #[arg(short)]
        q: u64,
        /// Verify every claim exactly; exit 1 if any fails.
        #[arg(long)]
        check: bool,
    },
    /// Functional pd-tiling attached to a screened class set.
    #[command(name = "pair-from-h", alias = "pair-from-H")]
    PairFromH {
        #[arg(short = 'M', long = "modulus", alias = "M")]
        m: u64,
        #[arg(long = "h")]
        h: String,
    },
    /// Screening sweep over candidate class sets for M = (p1 p2 p3)^2.
    Sweep(SweepArgs),
    /// Clique number of the Cayley graph Gamma_H.
    Clique {
        #[arg(short = 'M', long = "modulus", alias = "M")]
        m: u64,
        #[arg(long = "h")]
        h: String,
        /// Stop after this many search nodes and report the best clique found.
        #[arg(long)]
        node_budget: Option<u64>,
    },
}

/// Sweep settings. Every flag except `--config` and `--merge` may also come
/// from a JSON config file keyed by the flag names (`"M"` for the modulus,
/// underscores for dashes); flags given on the command line win.
#[derive(Args, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SweepArgs {
    /// JSON file with sweep settings.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Modulus [default: 11025].
    #[arg(short = 'M', long = "modulus", alias = "M")]
    #[serde(rename = "M")]
    m: Option<u64>,
    /// One row, as its prime powers (e.g. 3,5,7); all rows if omitted.
    #[arg(long)]
    row: Option<String>,
    /// Output directory for CSV, violators and summary; a path ending in
    /// `.csv` receives the CSV table, with violators beside it as
    /// `<stem>.violators.jsonl`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Checkpoint file; resumed from when present.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Decide every candidate with the exact kernel only.
    #[arg(long)]
    no_prescreen: bool,
    /// Also run the four-LP screen on passes and report its counts.
    #[arg(long)]
    full_screen: bool,
    /// "screen", "m" or a rational [default: screen].
    #[arg(long)]
    delta: Option<String>,
    /// Shard as index/count, e.g. 0/4 [default: 0/1].
    #[arg(long)]
    shard: Option<String>,
    /// Counter range start..end within every row.
    #[arg(long)]
    range: Option<String>,
    /// Stop cleanly after this many seconds, keeping the checkpoint.
    #[arg(long)]
    time_budget: Option<u64>,
    /// Checkpoint interval in candidates [default: 16384].
    #[arg(long)]
    checkpoint_every: Option<u64>,
    /// Merge finished shard files in --out instead of sweeping.
    #[arg(long)]
    #[serde(skip)]
    merge: bool,
}

impl SweepArgs {
    /// Command-line values over file values.
    fn overlay(&self, file: SweepArgs) -> SweepArgs {
        SweepArgs {
            config: None,
            m: self.m.or(file.m),
            row: self.row.clone().or(file.row),
            out: self.out.clone().or(file.out),
            checkpoint: self.checkpoint.clone().or(file.checkpoint),
            jobs: self.jobs.or(file.jobs),
            no_prescreen: self.no_prescreen || file.no_prescreen,
            full_screen: self.full_screen || file.full_screen,
            delta: self.delta.clone().or(file.delta),
            shard: self.shard.clone().or(file.shard),
            range: self.range.clone().or(file.range),
            time_budget: self.time_budget.or(file.time_budget),
            checkpoint_every: self.checkpoint_every.or(file.checkpoint_every),
            merge: self.merge,
        }
    }
}

/// Outcome of a command: a report and whether its checks passed.
struct Report {
    value: Value,
    ok: bool,
    csv: Option<String>,
}

impl Report {
    fn ok(value: Value) -> Self {
        Report {
            value,
            ok: true,
            csv: None,
        }
    }
}

type CmdResult = Result<Report, Error>;

fn modulus(m: u64) -> Result<Arc<Modulus>, Error> {
    Ok(Arc::new(Modulus::new(m)?))
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn parse_delta(spec: &str, md: &Modulus) -> Result<Rational, Error> {
    match spec.trim() {
        "screen" => Ok(delta_screen(md)),
        "m" | "M" => Ok(delta_m(md)),
        other => {
            let v: Rational = serde_json::from_value(json!(other))
                .map_err(|_| invalid(format!("bad delta {other:?}")))?;
            Ok(v)
        }
    }
}

fn read_input(path: &str) -> Result<String, Error> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

fn read_step(path: &str) -> Result<StepFunction, Error> {
    serde_json::from_str(&read_input(path)?).map_err(|e| invalid(format!("{path}: {e}")))
}

fn class_json(h: &ClassSet) -> Value {
    json!({ "members": h.members(), "mask": h.to_hex() })
}

fn cmd_info(m: u64) -> CmdResult {
    let md = modulus(m)?;
    let classes: Vec<Value> = md
        .divisors()
        .iter()
        .enumerate()
        .map(|(i, &d)| json!({ "m": d, "size": md.class_size_at(i), "mu_M_over_m": md.mu(m / d) }))
        .collect();
    Ok(Report::ok(json!({
        "M": m,
        "factors": md.factors(),
        "divisor_count": md.divisor_count(),
        "phi_M": md.phi(m),
        "prime_power_divisors": md.prime_power_divisors(),
        "classes": classes,
        "delta_M": delta_m(&md),
        "delta_screen": delta_screen(&md),
    })))
}

fn cmd_ft(file: &str) -> CmdResult {
    let f = read_step(file)?;
    let fh = ft_step(&f);
    let eigen = if f.is_zero() { None } else { eigen_check(&f)? };
    Ok(Report::ok(json!({
        "input": f,
        "transform": fh,
        "support": fh.support(),
        "eigenvalue": eigen,
    })))
}

fn cmd_cyclo(m: Option<u64>, set: Option<String>, file: Option<String>) -> CmdResult {
    let report = match (m, set, file) {
        (Some(m), Some(set), None) => {
            let a = TileSet::parse(modulus(m)?, &set)?;
            t1t2_report((&a.indicator()).into())?
        }
        (None, None, Some(file)) => t1t2_report((&read_step(&file)?).into())?,
        _ => return Err(invalid("give either --modulus with --set, or --file")),
    };
    Ok(Report::ok(serde_json::to_value(report)?))
}

fn bounds_json(h: &ClassSet, delta: &Rational) -> Result<Value, Error> {
    Ok(json!({
        "H": class_json(h),
        "k_H": k_of(h),
        "d_plus": delsarte_bound(h, &DelsarteKind::Plus)?,
        "d_minus": delsarte_bound(h, &DelsarteKind::Minus)?,
        "d_delta_plus": delsarte_bound(h, &DelsarteKind::DeltaPlus(delta.clone()))?,
    }))
}

fn cmd_delsarte(c: &ClassArgs, clique: bool) -> CmdResult {
    let md = modulus(c.m)?;
    let h = ClassSet::parse(md.clone(), &c.h)?;
    let delta = parse_delta(&c.delta, &md)?;
    let mut v = json!({
        "M": c.m,
        "delta": delta,
        "bounds": bounds_json(&h, &delta)?,
        "complement": bounds_json(&h.standard_complement(), &delta)?,
    });
    if clique {
        v["clique_number"] = json!(clique_number(&h)?);
    }
    Ok(Report::ok(v))
}

fn cmd_screen(c: &ClassArgs, full: bool) -> CmdResult {
    let md = modulus(c.m)?;
    let h = ClassSet::parse(md.clone(), &c.h)?;
    let delta = parse_delta(&c.delta, &md)?;
    let v = if full {
        serde_json::to_value(screen_full(&h, &delta)?)?
    } else {
        serde_json::to_value(screen(&h, &delta)?)?
    };
    Ok(Report::ok(v))
}

fn cmd_sands(m: u64, a: &str, b: &str) -> CmdResult {
    let md = modulus(m)?;
    let (a, b) = (TileSet::parse(md.clone(), a)?, TileSet::parse(md, b)?);
    let sands = sands_check(&a, &b)?;
    let direct = tiles_directly(&a, &b)?;
    Ok(Report::ok(json!({
        "A": a,
        "B": b,
        "div_star_A": div_star(&a).members(),
        "div_star_B": div_star(&b).members(),
        "sands": sands,
        "direct": direct,
    })))
}

/// Largest `M` for which `pdtile` also searches for a proper complement.
const COMPLEMENT_SEARCH_MAX_M: u64 = 64;

fn cmd_pdtile(m: u64, a: &str) -> CmdResult {
    let md = modulus(m)?;
    let a = TileSet::parse(md, a)?;
    let (feasible, witness) = pd_tile_feasible(&a)?;
    let mut v = json!({
        "A": a,
        "spectral_support": spectral_support(&a)?.members(),
        "pd_tiles": feasible,
        "witness": witness,
    });
    if m <= COMPLEMENT_SEARCH_MAX_M {
        v["complement"] = json!(find_complement(&a));
    }
    Ok(Report::ok(v))
}

fn cmd_counterexample(p: u64, q: u64, check: bool) -> CmdResult {
    if check {
        let r = check_counterexample(p, q)?;
        let ok = r.all_checks_pass;
        return Ok(Report {
            value: serde_json::to_value(r)?,
            ok,
            csv: None,
        });
    }
    let (f, g) = counterexample_pair(p, q)?;
    Ok(Report::ok(
        json!({ "p": p, "q": q, "M": f.modulus().value(), "f": f, "g": g }),
    ))
}

fn cmd_pair(m: u64, h: &str) -> CmdResult {
    let h = ClassSet::parse(modulus(m)?, h)?;
    match construct_pd_pair(&h)? {
        Some(pair) => Ok(Report::ok(
            json!({ "H": class_json(&h), "found": true, "pair": pair }),
        )),
        None => Ok(Report {
            value: json!({ "H": class_json(&h), "found": false }),
            ok: false,
            csv: None,
        }),
    }
}

fn cmd_clique(m: u64, h: &str, node_budget: Option<u64>) -> CmdResult {
    let h = ClassSet::parse(modulus(m)?, h)?;
    let bound = clique_search(&h, node_budget)?;
    Ok(Report::ok(
        json!({ "H": class_json(&h), "clique_number": bound.size, "exact": bound.exact }),
    ))
}

fn parse_pair(spec: &str, sep: &str, what: &str) -> Result<(u64, u64), Error> {
    let bad = || invalid(format!("bad {what} {spec:?}"));
    let (a, b) = spec.split_once(sep).ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn cmd_sweep(args: &SweepArgs) -> CmdResult {
    let file = match &args.config {
        Some(path) => serde_json::from_str(&read_input(&path.to_string_lossy())?)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?,
        None => SweepArgs::default(),
    };
    let s = &args.overlay(file);
    let m = s.m.unwrap_or(sweep::PUBLISHED_M);
    let mut cfg = SweepConfig::new(m)?;
    let md = modulus(m)?;
    let layout = SweepLayout::new(md.clone())?;
    cfg.row = s
        .row
        .as_deref()
        .map(|r| layout.row_of_label(r))
        .transpose()?;
    cfg.delta = parse_delta(s.delta.as_deref().unwrap_or("screen"), &md)?;
    cfg.float_prescreen = !s.no_prescreen;
    cfg.full_screen = s.full_screen;
    cfg.shard = parse_pair(s.shard.as_deref().unwrap_or("0/1"), "/", "shard")?;
    cfg.counter_range = s
        .range
        .as_deref()
        .map(|r| parse_pair(r, "..", "range"))
        .transpose()?;
    cfg.checkpoint_path = s.checkpoint.clone();
    cfg.checkpoint_every = s
        .checkpoint_every
        .unwrap_or(sweep::DEFAULT_CHECKPOINT_EVERY);
    cfg.time_budget = s.time_budget.map(Duration::from_secs);

    let csv_target = s
        .out
        .clone()
        .filter(|p| !s.merge && p.extension().is_some_and(|e| e == "csv"));
    cfg.output_path = if csv_target.is_some() {
        None
    } else {
        s.out.clone()
    };

    if s.merge {
        let dir = s
            .out
            .as_ref()
            .ok_or_else(|| invalid("--merge needs --out"))?;
        let summary = sweep::merge_shards(dir, &cfg)?;
        let csv = fs::read_to_string(dir.join(sweep::CSV_FILE))?;
        return Ok(Report {
            value: serde_json::to_value(summary)?,
            ok: true,
            csv: Some(csv),
        });
    }

    let run = || sweep::run_sweep(&cfg);
    let outcome = match s.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| invalid(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    eprintln!(
        "zmtile sweep: {} candidates this run, {} rejected by float prescreen, {} screened exactly{}",
        outcome.stats.candidates,
        outcome.stats.prescreen_rejected,
        outcome.stats.exact_screened,
        if outcome.complete { "" } else { "; stopped early, checkpoint kept" }
    );
    let summary = sweep::summary_of(&cfg, &outcome.checkpoint)?;
    let rows: Vec<_> = summary.rows.iter().map(|r| r.counts.clone()).collect();
    let csv = sweep::to_csv(&rows);
    let violators = sweep::violators_of(&cfg, &outcome.checkpoint)?;
    if let (Some(path), true) = (&csv_target, outcome.complete) {
        fs::write(path, &csv)?;
        fs::write(
            path.with_extension("violators.jsonl"),
            sweep::to_jsonl(&violators)?,
        )?;
    }
    let mut value = serde_json::to_value(&summary)?;
    value["shard"] = json!(cfg.shard);
    value["violators"] = serde_json::to_value(violators)?;
    value["stats"] = serde_json::to_value(&outcome.stats)?;
    Ok(Report {
        value,
        ok: true,
        csv: Some(csv),
    })
}

fn dispatch(cmd: &Command) -> CmdResult {
    match cmd {
        Command::Info { m } => cmd_info(*m),
        Command::Ft { file } => cmd_ft(file),
        Command::Cyclo { m, set, file } => cmd_cyclo(*m, set.clone(), file.clone()),
        Command::Delsarte { class, clique } => cmd_delsarte(class, *clique),
        Command::Screen { class, full } => cmd_screen(class, *full),
        Command::Sands { m, a, b } => cmd_sands(*m, a, b),
        Command::Pdtile { m, a } => cmd_pdtile(*m, a),
        Command::Counterexample { p, q, check } => cmd_counterexample(*p, *q, *check),
        Command::PairFromH { m, h } => cmd_pair(*m, h),
        Command::Sweep(s) => cmd_sweep(s),
        Command::Clique { m, h, node_budget } => cmd_clique(*m, h, *node_budget),
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) | Error::Json(_) | Error::Checkpoint(_) => 2,
        Error::ResourceLimit(_) | Error::Io(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(report) => {
            emit(cli.format, &report.value, report.csv.as_deref());
            if report.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("zmtile: check failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("zmtile: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
