//! Screening sweep over candidate spectral supports for `M = (p1 p2 p3)^2`.
//!
//! For each of the 8 rows (one class out of every pair
//! `{R_{M/p}, R_{M/p^2}}` goes into `H`) the 20 classes `R_{M/d}` with `d`
//! neither 1 nor a prime power are switched on and off by a 20-bit counter;
//! bit `j` is the `j`-th such class in ascending divisor order. A candidate
//! passes when `D(delta)+(H) = D-(H) = k_H = p1 p2 p3`, and violates (T2)
//! when it passes and [`support_t2`] fails.
//!
//! Every pass is decided by the exact kernel. The optional float prescreen
//! only discards candidates whose float `D-` or `D+` is off `k_H` by more
//! than [`PRESCREEN_TOL`]; `D(delta)+ <= D+ <= D-` makes a pass imply
//! `D+ = D- = k_H`, so the filter never touches a true pass unless the float
//! solver errs by more than the tolerance.
//!
//! Work is cut into contiguous counter ranges (shards), each processed in
//! chunks of [`DEFAULT_CHECKPOINT_EVERY`] candidates. Results are aggregated
//! in counter order, so output bytes do not depend on scheduling, shard
//! count, or restarts.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::class_set::ClassSet;
use crate::cyclotomic::support_t2_witness;
use crate::delsarte::{delta_screen, screen, screen_full, ScreenReport};
use crate::error::{ensure, Error, Result};
use crate::fourier::StepFourierMatrix;
use crate::rational::Rational;
use crate::zm_arith::{prime_power, Modulus};

/// Number of free classes in every row.
pub const FREE_CLASSES: usize = 20;
pub const CANDIDATES_PER_ROW: u64 = 1 << FREE_CLASSES;
pub const ROWS: usize = 8;
pub const DEFAULT_CHECKPOINT_EVERY: u64 = 1 << 14;
/// Float margin below which candidates go to the exact kernel.
pub const PRESCREEN_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PublishedRow {
    pub prime_powers: &'static str,
    pub passing: u64,
    pub t2_violating: u64,
}

/// Reference counts for `M = 11025`, in row order.
pub const PUBLISHED_M: u64 = 11025;
pub const PUBLISHED: [PublishedRow; ROWS] = [
    PublishedRow {
        prime_powers: "{3,5,7}",
        passing: 10796,
        t2_violating: 2,
    },
    PublishedRow {
        prime_powers: "{3,5,49}",
        passing: 5384,
        t2_violating: 5,
    },
    PublishedRow {
        prime_powers: "{3,25,7}",
        passing: 6164,
        t2_violating: 11,
    },
    PublishedRow {
        prime_powers: "{3,25,49}",
        passing: 2190,
        t2_violating: 18,
    },
    PublishedRow {
        prime_powers: "{9,5,7}",
        passing: 5523,
        t2_violating: 50,
    },
    PublishedRow {
        prime_powers: "{9,5,49}",
        passing: 2834,
        t2_violating: 12,
    },
    PublishedRow {
        prime_powers: "{9,25,7}",
        passing: 3190,
        t2_violating: 2,
    },
    PublishedRow {
        prime_powers: "{9,25,49}",
        passing: 1281,
        t2_violating: 13,
    },
];
pub const PUBLISHED_TOTAL_PASSING: u64 = 37362;
pub const PUBLISHED_TOTAL_VIOLATING: u64 = 113;

/// Row and counter geometry for one modulus.
#[derive(Debug, Clone)]
pub struct SweepLayout {
    modulus: Arc<Modulus>,
    primes: [u64; 3],
    /// Divisor indices of the free classes, ascending.
    free: Vec<usize>,
}

impl SweepLayout {
    pub fn new(modulus: Arc<Modulus>) -> Result<Self> {
        let f = modulus.factors();
        ensure!(
            f.len() == 3 && f.iter().all(|&(_, e)| e == 2),
            "sweep needs M = (p1 p2 p3)^2 with three distinct primes, got {}",
            modulus.value()
        );
        let primes = [f[0].0, f[1].0, f[2].0];
        let m = modulus.value();
        let free: Vec<usize> = (0..modulus.top_index())
            .filter(|&i| prime_power(m / modulus.divisors()[i]).is_none())
            .collect();
        debug_assert_eq!(free.len(), FREE_CLASSES);
        Ok(SweepLayout {
            modulus,
            primes,
            free,
        })
    }

    pub fn modulus(&self) -> &Arc<Modulus> {
        &self.modulus
    }

    pub fn primes(&self) -> [u64; 3] {
        self.primes
    }

    /// Class divisors `m` of the free classes, in counter-bit order.
    pub fn free_classes(&self) -> Vec<u64> {
        self.free
            .iter()
            .map(|&i| self.modulus.divisors()[i])
            .collect()
    }

    /// Prime powers `s` with `R_{M/s}` in `H`; bit `2 - i` of `row` squares
    /// the `i`-th prime.
    pub fn selection(&self, row: usize) -> [u64; 3] {
        assert!(row < ROWS, "row {row} out of range");
        let mut s = self.primes;
        for (i, x) in s.iter_mut().enumerate() {
            if row >> (2 - i) & 1 == 1 {
                *x *= *x;
            }
        }
        s
    }

    pub fn row_label(&self, row: usize) -> String {
        let s = self.selection(row);
        format!("{{{},{},{}}}", s[0], s[1], s[2])
    }

    /// Row whose selection is the given set of prime powers, in any order.
    pub fn row_of_label(&self, label: &str) -> Result<usize> {
        let body = label.trim().trim_start_matches('{').trim_end_matches('}');
        let mut want: Vec<u64> = body
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::invalid(format!("bad row entry {t:?}")))
            })
            .collect::<Result<_>>()?;
        want.sort_unstable();
        (0..ROWS)
            .find(|&r| {
                let mut s = self.selection(r).to_vec();
                s.sort_unstable();
                s == want
            })
            .ok_or_else(|| {
                Error::invalid(format!(
                    "{label:?} is not a row of M = {}",
                    self.modulus.value()
                ))
            })
    }

    /// `k_H`, the same for every candidate.
    pub fn k(&self) -> u64 {
        self.primes.iter().product()
    }

    pub fn candidate(&self, row: usize, counter: u64) -> ClassSet {
        assert!(
            counter < CANDIDATES_PER_ROW,
            "counter {counter} out of range"
        );
        let m = self.modulus.value();
        let mut flags = vec![false; self.modulus.divisor_count()];
        for s in self.selection(row) {
            flags[self.modulus.index_of(m / s).expect("divisor")] = true;
        }
        for (j, &i) in self.free.iter().enumerate() {
            flags[i] = counter >> j & 1 == 1;
        }
        ClassSet::from_flags(self.modulus.clone(), flags)
    }
}

/// All `2^20` candidates of a row, in counter order.
pub fn enumerate_candidates(
    layout: &SweepLayout,
    row: usize,
) -> impl Iterator<Item = ClassSet> + '_ {
    (0..CANDIDATES_PER_ROW).map(move |c| layout.candidate(row, c))
}

/// Float `D+` and `D-` for `H` (each `None` if the float solver fails).
///
/// Columns are boxed to `[-1, 1]`, which is exact: `h(0) = 1` and `h^ >= 0`
/// force `|h| <= 1`.
pub fn float_bounds(h: &ClassSet) -> (Option<f64>, Option<f64>) {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};
    let modulus = h.modulus();
    let top = modulus.top_index();
    let t = StepFourierMatrix::shared(modulus);
    let solve = |minus: bool| -> Option<f64> {
        let mut p = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<(usize, minilp::Variable)> = (0..top)
            .filter(|&i| minus || h.contains_index(i))
            .map(|i| {
                let range = match (minus, h.contains_index(i)) {
                    (false, _) => (0.0, 1.0),
                    (true, true) => (-1.0, 1.0),
                    (true, false) => (-1.0, 0.0),
                };
                (i, p.add_var(modulus.class_size_at(i) as f64, range))
            })
            .collect();
        if vars.is_empty() {
            return Some(1.0);
        }
        for e in 0..modulus.divisor_count() {
            let row = t.row(e);
            let expr: Vec<(minilp::Variable, f64)> = vars
                .iter()
                .filter(|(i, _)| row[*i] != 0)
                .map(|&(i, v)| (v, row[i] as f64))
                .collect();
            if !expr.is_empty() {
                p.add_constraint(&expr[..], ComparisonOp::Ge, -(row[top] as f64));
            }
        }
        p.solve()
            .ok()
            .map(|s| s.objective() + 1.0)
            .filter(|v| v.is_finite())
    };
    (solve(false), solve(true))
}

/// True when the float bounds show `H` cannot pass.
pub fn prescreen_rejects(h: &ClassSet, k: u64) -> bool {
    let k = k as f64;
    let (plus, minus) = float_bounds(h);
    matches!(minus, Some(v) if (v - k).abs() > PRESCREEN_TOL)
        || matches!(plus, Some(v) if v < k - PRESCREEN_TOL)
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub m: u64,
    pub delta: Rational,
    /// `None`: all rows.
    pub row: Option<usize>,
    pub float_prescreen: bool,
    /// Also run the four-LP screen (with the complement chain) on passes.
    pub full_screen: bool,
    /// `(index, count)`.
    pub shard: (u64, u64),
    /// Restrict every row to counters in `[start, end)`.
    pub counter_range: Option<(u64, u64)>,
    pub checkpoint_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub checkpoint_every: u64,
    pub time_budget: Option<Duration>,
    /// Stop after at least this many candidates in this invocation.
    pub stop_after: Option<u64>,
}

impl SweepConfig {
    pub fn new(m: u64) -> Result<Self> {
        let modulus = Modulus::new(m)?;
        Ok(SweepConfig {
            m,
            delta: delta_screen(&modulus),
            row: None,
            float_prescreen: true,
            full_screen: false,
            shard: (0, 1),
            counter_range: None,
            checkpoint_path: None,
            output_path: None,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
            time_budget: None,
            stop_after: None,
        })
    }

    fn validate(&self) -> Result<SweepLayout> {
        let layout = SweepLayout::new(Arc::new(Modulus::new(self.m)?))?;
        ensure!(self.delta.is_positive(), "delta must be positive");
        ensure!(
            self.shard.1 >= 1 && self.shard.0 < self.shard.1,
            "shard index must be below count"
        );
        ensure!(
            self.checkpoint_every >= 1,
            "checkpoint interval must be positive"
        );
        if let Some(r) = self.row {
            ensure!(r < ROWS, "row must be below {ROWS}");
        }
        if let Some((a, b)) = self.counter_range {
            ensure!(
                a < b && b <= CANDIDATES_PER_ROW,
                "counter range must satisfy start < end <= 2^20"
            );
        }
        Ok(layout)
    }

    fn rows(&self) -> Vec<usize> {
        self.row.map_or_else(|| (0..ROWS).collect(), |r| vec![r])
    }

    fn range(&self) -> (u64, u64) {
        self.counter_range.unwrap_or((0, CANDIDATES_PER_ROW))
    }

    /// This shard's slice of the counter range.
    pub fn shard_range(&self) -> (u64, u64) {
        let (a, b) = self.range();
        let (i, n) = self.shard;
        let len = b - a;
        (a + len * i / n, a + len * (i + 1) / n)
    }

    /// Hash of everything that determines results, shard excluded.
    pub fn plan_hash(&self) -> String {
        let plan = serde_json::json!({
            "M": self.m,
            "delta": self.delta,
            "rows": self.rows(),
            "full_screen": self.full_screen,
            "float_prescreen": self.float_prescreen,
            "range": self.range(),
        });
        hex::encode(Sha256::digest(plan.to_string().as_bytes()))
    }

    fn checkpoint_hash(&self) -> String {
        let tagged = format!("{}:{}/{}", self.plan_hash(), self.shard.0, self.shard.1);
        hex::encode(Sha256::digest(tagged.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violator {
    pub row: usize,
    pub prime_powers: String,
    pub counter: u64,
    pub mask: String,
    pub members: Vec<u64>,
    pub support_t2_witness: u64,
    pub screen: ScreenReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_screen_passes: Option<bool>,
}

/// Progress of one row within one shard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowProgress {
    pub row: usize,
    pub start: u64,
    pub end: u64,
    /// First counter not yet processed.
    pub next: u64,
    pub passing: u64,
    pub full_passing: Option<u64>,
    pub full_t2_violating: Option<u64>,
    pub violators: Vec<Violator>,
}

impl RowProgress {
    fn is_done(&self) -> bool {
        self.next == self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config_hash: String,
    pub plan_hash: String,
    pub shard: (u64, u64),
    pub rows: Vec<RowProgress>,
}

const CHECKPOINT_VERSION: u32 = 1;

impl Checkpoint {
    fn fresh(cfg: &SweepConfig) -> Self {
        let (a, b) = cfg.shard_range();
        let full = cfg.full_screen.then_some(0);
        Checkpoint {
            version: CHECKPOINT_VERSION,
            config_hash: cfg.checkpoint_hash(),
            plan_hash: cfg.plan_hash(),
            shard: cfg.shard,
            rows: cfg
                .rows()
                .into_iter()
                .map(|row| RowProgress {
                    row,
                    start: a,
                    end: b,
                    next: a,
                    passing: 0,
                    full_passing: full,
                    full_t2_violating: full,
                    violators: Vec::new(),
                })
                .collect(),
        }
    }

    pub fn load(path: &Path, cfg: &SweepConfig) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let cp: Checkpoint = serde_json::from_str(&text)
            .map_err(|e| Error::Checkpoint(format!("{}: unreadable ({e})", path.display())))?;
        let bad = |why: &str| Err(Error::Checkpoint(format!("{}: {why}", path.display())));
        if cp.version != CHECKPOINT_VERSION {
            return bad("unsupported version");
        }
        if cp.config_hash != cfg.checkpoint_hash() {
            return bad("written under a different configuration");
        }
        let expect = Checkpoint::fresh(cfg);
        let shape_ok = cp.rows.len() == expect.rows.len()
            && cp.rows.iter().zip(&expect.rows).all(|(r, e)| {
                r.row == e.row
                    && r.start == e.start
                    && r.end == e.end
                    && (r.start..=r.end).contains(&r.next)
                    && r.passing <= r.next - r.start
                    && (r.violators.len() as u64) <= r.passing
                    && r.full_passing.is_some() == cfg.full_screen
            });
        if !shape_ok {
            return bad("progress does not match the configured rows and ranges");
        }
        Ok(cp)
    }

    fn store(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(self)?)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(RowProgress::is_done)
    }
}

/// Per-invocation counters; not part of any output file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SweepStats {
    pub candidates: u64,
    pub prescreen_rejected: u64,
    pub exact_screened: u64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub complete: bool,
    pub checkpoint: Checkpoint,
    pub stats: SweepStats,
}

struct Evaluated {
    counter: u64,
    pass: Option<(ScreenReport, Option<u64>, Option<bool>)>,
    prescreened: bool,
}

fn evaluate(
    layout: &SweepLayout,
    cfg: &SweepConfig,
    row: usize,
    counter: u64,
) -> Result<Evaluated> {
    let h = layout.candidate(row, counter);
    if cfg.float_prescreen && prescreen_rejects(&h, layout.k()) {
        return Ok(Evaluated {
            counter,
            pass: None,
            prescreened: true,
        });
    }
    let report = screen(&h, &cfg.delta)?;
    let pass = if report.passes {
        let full = if cfg.full_screen {
            Some(screen_full(&h, &cfg.delta)?.passes)
        } else {
            None
        };
        Some((report, support_t2_witness(&h), full))
    } else {
        None
    };
    Ok(Evaluated {
        counter,
        pass,
        prescreened: false,
    })
}

/// Processes this shard, resuming from the checkpoint if one exists.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    let layout = cfg.validate()?;
    let mut cp = match &cfg.checkpoint_path {
        Some(p) if p.exists() => Checkpoint::load(p, cfg)?,
        _ => Checkpoint::fresh(cfg),
    };
    let started = Instant::now();
    let mut stats = SweepStats::default();
    let out_of_budget = |stats: &SweepStats| {
        cfg.stop_after.is_some_and(|n| stats.candidates >= n)
            || cfg.time_budget.is_some_and(|b| started.elapsed() >= b)
    };
    'rows: for ri in 0..cp.rows.len() {
        while !cp.rows[ri].is_done() {
            if out_of_budget(&stats) {
                break 'rows;
            }
            let progress = &cp.rows[ri];
            let (row, lo) = (progress.row, progress.next);
            let hi = (lo + cfg.checkpoint_every).min(progress.end);
            let results: Vec<Evaluated> = (lo..hi)
                .into_par_iter()
                .map(|c| evaluate(&layout, cfg, row, c))
                .collect::<Result<_>>()?;
            let progress = &mut cp.rows[ri];
            for r in results {
                stats.candidates += 1;
                if r.prescreened {
                    stats.prescreen_rejected += 1;
                } else {
                    stats.exact_screened += 1;
                }
                let Some((report, witness, full)) = r.pass else {
                    continue;
                };
                progress.passing += 1;
                if let Some(true) = full {
                    *progress.full_passing.as_mut().expect("full screen enabled") += 1;
                    if witness.is_some() {
                        *progress
                            .full_t2_violating
                            .as_mut()
                            .expect("full screen enabled") += 1;
                    }
                }
                if let Some(w) = witness {
                    let h = layout.candidate(row, r.counter);
                    progress.violators.push(Violator {
                        row,
                        prime_powers: layout.row_label(row),
                        counter: r.counter,
                        mask: h.to_hex(),
                        members: h.members(),
                        support_t2_witness: w,
                        screen: report,
                        full_screen_passes: full,
                    });
                }
            }
            progress.next = hi;
            if let Some(p) = &cfg.checkpoint_path {
                cp.store(p)?;
            }
        }
    }
    let complete = cp.is_complete();
    if let Some(dir) = &cfg.output_path {
        fs::create_dir_all(dir)?;
        if cfg.shard.1 == 1 {
            write_outputs(dir, &layout, cfg, &cp.rows, complete)?;
        } else {
            let name = format!("shard-{}-of-{}.json", cfg.shard.0, cfg.shard.1);
            cp.store(&dir.join(name))?;
        }
    }
    Ok(SweepOutcome {
        complete,
        checkpoint: cp,
        stats,
    })
}

/// Final counts for one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub row: usize,
    pub prime_powers: String,
    pub total: u64,
    pub passing: u64,
    pub t2_violating: u64,
    pub violating_h: Vec<String>,
    pub full_passing: Option<u64>,
    pub full_t2_violating: Option<u64>,
}

/// Sums progress records per row; counter ranges must join up exactly.
pub fn aggregate(
    layout: &SweepLayout,
    progress: &[RowProgress],
) -> Result<(Vec<SweepRow>, Vec<Violator>)> {
    let mut rows: Vec<usize> = progress.iter().map(|p| p.row).collect();
    rows.sort_unstable();
    rows.dedup();
    let mut out = Vec::new();
    let mut violators = Vec::new();
    for row in rows {
        let mut parts: Vec<&RowProgress> = progress.iter().filter(|p| p.row == row).collect();
        parts.sort_by_key(|p| p.start);
        ensure!(
            parts.windows(2).all(|w| w[0].end == w[1].start),
            "row {row}: shard ranges do not join up"
        );
        let mut vs: Vec<Violator> = parts
            .iter()
            .flat_map(|p| p.violators.iter().cloned())
            .collect();
        vs.sort_by_key(|v| v.counter);
        let sum_opt = |pick: fn(&RowProgress) -> Option<u64>| -> Option<u64> {
            parts.iter().map(|p| pick(p)).sum::<Option<u64>>()
        };
        out.push(SweepRow {
            row,
            prime_powers: layout.row_label(row),
            total: parts.iter().map(|p| p.next - p.start).sum(),
            passing: parts.iter().map(|p| p.passing).sum(),
            t2_violating: vs.len() as u64,
            violating_h: vs.iter().map(|v| v.mask.clone()).collect(),
            full_passing: sum_opt(|p| p.full_passing),
            full_t2_violating: sum_opt(|p| p.full_t2_violating),
        });
        violators.extend(vs);
    }
    Ok((out, violators))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSummary {
    #[serde(flatten)]
    pub counts: SweepRow,
    pub published_passing: Option<u64>,
    pub published_t2_violating: Option<u64>,
    /// Exact minus published.
    pub delta_passing: Option<i64>,
    pub delta_t2_violating: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    #[serde(rename = "M")]
    pub m: u64,
    pub delta: Rational,
    pub complete: bool,
    pub rows: Vec<RowSummary>,
    pub total_passing: u64,
    pub total_t2_violating: u64,
}

/// Attaches published reference counts where the run covers a full row of
/// the reference modulus.
pub fn summarize(m: u64, delta: &Rational, rows: Vec<SweepRow>, complete: bool) -> SweepSummary {
    let total_passing = rows.iter().map(|r| r.passing).sum();
    let total_t2_violating = rows.iter().map(|r| r.t2_violating).sum();
    let rows = rows
        .into_iter()
        .map(|r| {
            let reference =
                (m == PUBLISHED_M && r.total == CANDIDATES_PER_ROW).then(|| PUBLISHED[r.row]);
            RowSummary {
                published_passing: reference.map(|p| p.passing),
                published_t2_violating: reference.map(|p| p.t2_violating),
                delta_passing: reference.map(|p| r.passing as i64 - p.passing as i64),
                delta_t2_violating: reference
                    .map(|p| r.t2_violating as i64 - p.t2_violating as i64),
                counts: r,
            }
        })
        .collect();
    SweepSummary {
        m,
        delta: delta.clone(),
        complete,
        rows,
        total_passing,
        total_t2_violating,
    }
}

pub const CSV_HEADER: &str = "prime_powers,total,passing,t2_violating";

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in rows {
        s.push_str(&format!(
            "\"{}\",{},{},{}\n",
            r.prime_powers, r.total, r.passing, r.t2_violating
        ));
    }
    s
}

pub fn to_jsonl(violators: &[Violator]) -> Result<String> {
    let mut s = String::new();
    for v in violators {
        s.push_str(&serde_json::to_string(v)?);
        s.push('\n');
    }
    Ok(s)
}

pub const CSV_FILE: &str = "sweep.csv";
pub const VIOLATORS_FILE: &str = "violators.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

fn write_outputs(
    dir: &Path,
    layout: &SweepLayout,
    cfg: &SweepConfig,
    progress: &[RowProgress],
    complete: bool,
) -> Result<SweepSummary> {
    let (rows, violators) = aggregate(layout, progress)?;
    fs::write(dir.join(CSV_FILE), to_csv(&rows))?;
    fs::write(dir.join(VIOLATORS_FILE), to_jsonl(&violators)?)?;
    let summary = summarize(cfg.m, &cfg.delta, rows, complete);
    let mut f = fs::File::create(dir.join(SUMMARY_FILE))?;
    serde_json::to_writer_pretty(&mut f, &summary)?;
    f.write_all(b"\n")?;
    Ok(summary)
}

/// Combines `shard-*-of-*.json` files from `dir` into the final outputs.
/// All shards must be complete and share one plan.
pub fn merge_shards(dir: &Path, cfg: &SweepConfig) -> Result<SweepSummary> {
    let layout = cfg.validate()?;
    let n = cfg.shard.1;
    let mut progress = Vec::new();
    for i in 0..n {
        let path = dir.join(format!("shard-{i}-of-{n}.json"));
        let text = fs::read_to_string(&path)
            .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
        let cp: Checkpoint = serde_json::from_str(&text)
            .map_err(|e| Error::Checkpoint(format!("{}: unreadable ({e})", path.display())))?;
        if cp.plan_hash != cfg.plan_hash() || cp.shard != (i, n) {
            return Err(Error::Checkpoint(format!(
                "{}: different plan or shard",
                path.display()
            )));
        }
        if !cp.is_complete() {
            return Err(Error::Checkpoint(format!(
                "{}: shard incomplete",
                path.display()
            )));
        }
        progress.extend(cp.rows);
    }
    write_outputs(dir, &layout, cfg, &progress, true)
}

/// Rebuilds the summary from a finished single-shard checkpoint.
pub fn summary_of(cfg: &SweepConfig, cp: &Checkpoint) -> Result<SweepSummary> {
    let layout = cfg.validate()?;
    let (rows, _) = aggregate(&layout, &cp.rows)?;
    Ok(summarize(cfg.m, &cfg.delta, rows, cp.is_complete()))
}

/// Violators of a checkpoint in output order.
pub fn violators_of(cfg: &SweepConfig, cp: &Checkpoint) -> Result<Vec<Violator>> {
    let layout = cfg.validate()?;
    Ok(aggregate(&layout, &cp.rows)?.1)
}
