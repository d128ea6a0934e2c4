//! Delsarte linear-programming bounds for the Cayley graphs `Gamma_H`.
//!
//! For a class set `H` (a union of step classes containing 0) the graph
//! `Gamma_H` joins `x` and `y` when `x - y` lies in `H`. Each bound maximizes
//! `sum_z h(z) = sum_m c_m phi(M/m)` over step functions with `h(0) = 1` and
//! nonnegative transform, and differs only in the sign pattern imposed on
//! `h`:
//!
//! * `D+`: `h >= 0` on `H`, `h = 0` off `H`;
//! * `D-`: `h` free on `H`, `h <= 0` off `H`;
//! * `D(delta)+`: `h >= delta` on `H`, `h = 0` off `H`.
//!
//! `D(delta)+ <= D+ <= D-`, `omega(H) <= D+(H)`, and `D+(H) D-(H') = M` for
//! the standard complement `H'`.

use serde::{Deserialize, Serialize};

use crate::class_set::ClassSet;
use crate::error::{ensure, Error, Result};
use crate::fourier::StepFourierMatrix;
use crate::rational::Rational;
use crate::ratlp::{solve, LpProblem, LpStatus, Relation};
use crate::step_fn::StepFunction;
use crate::zm_arith::{prime_power, Modulus};

/// Default ceiling on `M` for clique search; override with `ZMTILE_MAX_CLIQUE_M`.
pub const DEFAULT_MAX_CLIQUE_M: u64 = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DelsarteKind {
    Plus,
    Minus,
    DeltaPlus(Rational),
}

/// `1 / (M phi(M))`, the smallest nonzero value an autocorrelation `h_A` takes.
pub fn delta_m(modulus: &Modulus) -> Rational {
    let m = modulus.value() as i64;
    Rational::new(1, m * modulus.phi_at(modulus.top_index()) as i64)
}

/// `1 / (M^2 phi(M))`, the threshold of the two-LP screen.
pub fn delta_screen(modulus: &Modulus) -> Rational {
    let m = Rational::from(modulus.value());
    let phi = Rational::from(modulus.phi_at(modulus.top_index()));
    (m.clone() * m * phi).recip()
}

/// `k_H = prod p` over prime powers `p^a` with `M/p^a` in `H`.
pub fn k_of(h: &ClassSet) -> u64 {
    let m = h.modulus().value();
    h.modulus()
        .prime_power_divisors()
        .into_iter()
        .filter(|&s| h.contains(m / s))
        .map(|s| prime_power(s).expect("prime power").0)
        .product()
}

/// The Delsarte program for `H`, with the divisor index of each variable.
/// Variables are `c_m` for `m != M`; `c_M = 1` enters as a constant.
pub fn delsarte_program(h: &ClassSet, kind: &DelsarteKind) -> Result<(LpProblem, Vec<usize>)> {
    if let DelsarteKind::DeltaPlus(d) = kind {
        ensure!(d.is_positive(), "delta must be positive, got {d}");
    }
    let modulus = h.modulus();
    let top = modulus.top_index();
    let vars: Vec<usize> = (0..top)
        .filter(|&i| matches!(kind, DelsarteKind::Minus) || h.contains_index(i))
        .collect();
    let t = StepFourierMatrix::shared(modulus);
    let objective = vars
        .iter()
        .map(|&i| Rational::from(modulus.class_size_at(i)))
        .collect();
    let mut lp = LpProblem::new(objective);
    lp.set_constant(Rational::one());
    for (j, &i) in vars.iter().enumerate() {
        lp.set_name(j, format!("c{}", modulus.divisors()[i]));
        let (lo, hi) = match kind {
            DelsarteKind::Plus => (Some(Rational::zero()), None),
            DelsarteKind::DeltaPlus(d) => (Some(d.clone()), None),
            DelsarteKind::Minus if h.contains_index(i) => (None, None),
            DelsarteKind::Minus => (None, Some(Rational::zero())),
        };
        lp.set_bounds(j, lo, hi);
    }
    // Transform nonnegativity on every frequency class; the zero frequency is
    // implied by the others (the transform sums to M) but kept for clarity.
    for e in 0..modulus.divisor_count() {
        let row = t.row(e);
        let coeffs = vars.iter().map(|&i| Rational::from(row[i])).collect();
        lp.add_constraint(coeffs, Relation::Ge, Rational::from(-row[top]));
    }
    Ok((lp, vars))
}

#[derive(Debug, Clone)]
pub struct DelsarteSolution {
    pub value: Rational,
    pub witness: StepFunction,
}

/// Optimum and an optimal step function; `None` when the program is
/// infeasible (only possible for `DeltaPlus` with `delta` too large).
pub fn delsarte_solve(h: &ClassSet, kind: &DelsarteKind) -> Result<Option<DelsarteSolution>> {
    let (lp, vars) = delsarte_program(h, kind)?;
    if vars.is_empty() {
        // Only h = delta_0 remains, and its transform is identically 1.
        let witness = StepFunction::delta0(h.modulus().clone());
        return Ok(Some(DelsarteSolution {
            value: Rational::one(),
            witness,
        }));
    }
    let res = solve(&lp)?;
    match res.status {
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(Error::invalid("Delsarte program reported unbounded")),
        LpStatus::Optimal => {
            let modulus = h.modulus();
            let mut coeffs = vec![Rational::zero(); modulus.divisor_count()];
            coeffs[modulus.top_index()] = Rational::one();
            for (x, &i) in res.witness.unwrap().into_iter().zip(&vars) {
                coeffs[i] = x;
            }
            let witness = StepFunction::new(modulus.clone(), coeffs)?;
            Ok(Some(DelsarteSolution {
                value: res.value.unwrap(),
                witness,
            }))
        }
    }
}

pub fn delsarte_bound(h: &ClassSet, kind: &DelsarteKind) -> Result<Option<Rational>> {
    Ok(delsarte_solve(h, kind)?.map(|s| s.value))
}

fn max_clique_m() -> u64 {
    std::env::var("ZMTILE_MAX_CLIQUE_M")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_MAX_CLIQUE_M)
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, &w)| k * 64 + w.trailing_zeros() as usize)
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

struct CliqueSearch {
    adj: Vec<Bits>,
    best: usize,
    ceiling: usize,
    nodes: u64,
    budget: u64,
}

impl CliqueSearch {
    // Greedy coloring of `cand`; returns vertices with their color bound,
    // in nondecreasing color order.
    fn color(&self, cand: &Bits) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(cand.count());
        let mut uncolored = cand.clone();
        let mut avail = cand.clone();
        let mut color = 0;
        while !uncolored.is_empty() {
            color += 1;
            avail.0.copy_from_slice(&uncolored.0);
            while let Some(v) = avail.first() {
                avail.clear(v);
                uncolored.clear(v);
                for (w, a) in avail.0.iter_mut().zip(&self.adj[v].0) {
                    *w &= !a;
                }
                out.push((v, color));
            }
        }
        out
    }

    fn done(&self) -> bool {
        self.best >= self.ceiling || self.nodes >= self.budget
    }

    fn expand(&mut self, cand: Bits, size: usize) {
        self.nodes += 1;
        let order = self.color(&cand);
        let mut cand = cand;
        for &(v, c) in order.iter().rev() {
            if size + c <= self.best || self.done() {
                return;
            }
            let next = cand.and(&self.adj[v]);
            if next.is_empty() {
                self.best = self.best.max(size + 1);
            } else {
                self.expand(next, size + 1);
            }
            cand.clear(v);
        }
    }
}

/// Outcome of a clique search: the largest clique found, and whether it is
/// proven maximal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueBound {
    pub size: u64,
    pub exact: bool,
}

/// Node budget for the search in `Gamma_{H'}` that seeds the ceiling.
const COCLIQUE_PROBE_NODES: u64 = 2_000;

/// `omega(H)`, the clique number of `Gamma_H`. `M` is capped at
/// `ZMTILE_MAX_CLIQUE_M` (default 200).
pub fn clique_number(h: &ClassSet) -> Result<u64> {
    Ok(clique_search(h, None)?.size)
}

/// Branch and bound for `omega(H)`, giving up after `node_budget` search
/// nodes. A clique `B` of `Gamma_{H'}` caps the search at `M / |B|`, since
/// `a + b = a' + b'` forces `a - a'` into `H` and `H'` at once, so
/// `|A| |B| <= M`.
pub fn clique_search(h: &ClassSet, node_budget: Option<u64>) -> Result<CliqueBound> {
    let modulus = h.modulus();
    let m = modulus.value();
    let cap = max_clique_m();
    if m > cap {
        return Err(Error::ResourceLimit(format!(
            "clique search refused for M = {m} above {cap} (set ZMTILE_MAX_CLIQUE_M)"
        )));
    }
    Ok(search_uncapped(h, node_budget))
}

fn search_uncapped(h: &ClassSet, node_budget: Option<u64>) -> CliqueBound {
    let m = h.modulus().value();
    let (coclique, _) =
        branch_and_bound(&h.standard_complement(), m as usize, COCLIQUE_PROBE_NODES);
    let ceiling = (m / coclique as u64) as usize;
    let (size, complete) = branch_and_bound(h, ceiling, node_budget.unwrap_or(u64::MAX));
    CliqueBound {
        size: size as u64,
        exact: complete || size == ceiling,
    }
}

// Largest clique found, and whether the search ran to completion.
fn branch_and_bound(h: &ClassSet, ceiling: usize, budget: u64) -> (usize, bool) {
    let modulus = h.modulus();
    let n = modulus.value() as usize;
    let top = modulus.top_index();
    let classes = modulus.class_index_table();
    let mut allowed: Vec<bool> = (0..modulus.divisor_count())
        .map(|i| h.contains_index(i))
        .collect();
    let mut search = CliqueSearch {
        adj: Vec::new(),
        best: 1,
        ceiling,
        nodes: 0,
        budget,
    };
    // Translations put 0 in the clique and units move the second vertex onto
    // the divisor of its class. Once class i is done, every clique with a
    // difference in R_i has been seen, so later branches drop R_i from H.
    for i in h.member_indices().filter(|&i| i != top) {
        search.best = search.best.max(2);
        if search.done() {
            break;
        }
        search.adj = (0..n)
            .map(|x| {
                let mut b = Bits::empty(n);
                for y in 0..n {
                    if x != y && allowed[classes[(x + n - y) % n] as usize] {
                        b.set(y);
                    }
                }
                b
            })
            .collect();
        let v = modulus.divisors()[i] as usize;
        let cand = search.adj[0].and(&search.adj[v]);
        if !cand.is_empty() {
            search.expand(cand, 2);
        }
        allowed[i] = false;
    }
    (search.best, search.nodes < search.budget)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenReport {
    #[serde(rename = "M")]
    pub m: u64,
    pub mask: String,
    pub d_delta_plus: Option<Rational>,
    pub d_plus: Option<Rational>,
    pub d_minus: Option<Rational>,
    pub k_h: u64,
    pub passes: bool,
    pub delta_used: Rational,
}

/// `D(delta)+(H) = D-(H) = k_H`, cheapest first. `D+` is sandwiched between
/// the two, so on a pass it is recorded as `k_H` without being solved.
pub fn screen(h: &ClassSet, delta: &Rational) -> Result<ScreenReport> {
    ensure!(delta.is_positive(), "delta must be positive, got {delta}");
    let k = k_of(h);
    let kr = Rational::from(k);
    let mut report = ScreenReport {
        m: h.modulus().value(),
        mask: h.to_hex(),
        d_delta_plus: None,
        d_plus: None,
        d_minus: None,
        k_h: k,
        passes: false,
        delta_used: delta.clone(),
    };
    report.d_delta_plus = delsarte_bound(h, &DelsarteKind::DeltaPlus(delta.clone()))?;
    if report.d_delta_plus.as_ref() != Some(&kr) {
        return Ok(report);
    }
    report.d_minus = delsarte_bound(h, &DelsarteKind::Minus)?;
    if report.d_minus.as_ref() != Some(&kr) {
        return Ok(report);
    }
    report.d_plus = Some(kr);
    report.passes = true;
    Ok(report)
}

/// Every value solved, plus the complement chain
/// `D+(H') = D-(H') = k_{H'}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullScreenReport {
    pub screen: ScreenReport,
    pub complement_d_plus: Rational,
    pub complement_d_minus: Rational,
    pub complement_k: u64,
    pub passes: bool,
}

pub fn screen_full(h: &ClassSet, delta: &Rational) -> Result<FullScreenReport> {
    ensure!(delta.is_positive(), "delta must be positive, got {delta}");
    let k = k_of(h);
    let solved = |hh: &ClassSet, kind| -> Result<Rational> {
        delsarte_bound(hh, &kind)?.ok_or_else(|| Error::invalid("D+ and D- are always feasible"))
    };
    let d_delta_plus = delsarte_bound(h, &DelsarteKind::DeltaPlus(delta.clone()))?;
    let d_plus = solved(h, DelsarteKind::Plus)?;
    let d_minus = solved(h, DelsarteKind::Minus)?;
    let hc = h.standard_complement();
    let complement_d_plus = solved(&hc, DelsarteKind::Plus)?;
    let complement_d_minus = solved(&hc, DelsarteKind::Minus)?;
    let complement_k = k_of(&hc);
    let kr = Rational::from(k);
    let kc = Rational::from(complement_k);
    let first = d_delta_plus.as_ref() == Some(&kr) && d_plus == kr && d_minus == kr;
    let passes = first && complement_d_plus == kc && complement_d_minus == kc;
    Ok(FullScreenReport {
        screen: ScreenReport {
            m: h.modulus().value(),
            mask: h.to_hex(),
            d_delta_plus,
            d_plus: Some(d_plus),
            d_minus: Some(d_minus),
            k_h: k,
            passes: first,
            delta_used: delta.clone(),
        },
        complement_d_plus,
        complement_d_minus,
        complement_k,
        passes,
    })
}
