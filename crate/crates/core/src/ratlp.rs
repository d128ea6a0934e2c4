//! Exact linear programming over the rationals.
//!
//! Dense-tableau two-phase simplex with Bland's rule, so every run terminates
//! and identical inputs pivot identically. Problems are maximizations; bounds
//! are folded into the standard form by shifting, negating or splitting
//! variables.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::rational::Rational;

/// Default pivot ceiling; override with `ZMTILE_MAX_LP_PIVOTS`.
pub const DEFAULT_MAX_PIVOTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize constant + objective . x` subject to constraints and bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub names: Vec<String>,
    pub objective: Vec<Rational>,
    pub constant: Rational,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<Option<Rational>>,
    pub upper: Vec<Option<Rational>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpResult {
    pub status: LpStatus,
    pub value: Option<Rational>,
    pub witness: Option<Vec<Rational>>,
    pub pivots: usize,
}

impl LpProblem {
    /// All variables start free and are named `x0, x1, ...`.
    pub fn new(objective: Vec<Rational>) -> Self {
        let n = objective.len();
        LpProblem {
            names: (0..n).map(|j| format!("x{j}")).collect(),
            objective,
            constant: Rational::zero(),
            constraints: Vec::new(),
            lower: vec![None; n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_constant(&mut self, c: Rational) {
        self.constant = c;
    }

    pub fn set_name(&mut self, j: usize, name: impl Into<String>) {
        self.names[j] = name.into();
    }

    pub fn set_bounds(&mut self, j: usize, lower: Option<Rational>, upper: Option<Rational>) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        let mut acc = self.constant.clone();
        for (c, v) in self.objective.iter().zip(x) {
            acc.add_mul(c, v);
        }
        acc
    }

    /// Exact feasibility of `x`, no tolerance.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        let bounds_ok = x.iter().enumerate().all(|(j, v)| {
            self.lower[j].as_ref().is_none_or(|l| v >= l)
                && self.upper[j].as_ref().is_none_or(|u| v <= u)
        });
        bounds_ok
            && self.constraints.iter().all(|c| {
                let mut lhs = Rational::zero();
                for (a, v) in c.coeffs.iter().zip(x) {
                    lhs.add_mul(a, v);
                }
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                }
            })
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        ensure!(n > 0, "LP has no variables");
        ensure!(
            self.names.len() == n && self.lower.len() == n && self.upper.len() == n,
            "LP variable tables disagree in length"
        );
        for (i, c) in self.constraints.iter().enumerate() {
            ensure!(
                c.coeffs.len() == n,
                "constraint {i} has {} coefficients, expected {n}",
                c.coeffs.len()
            );
        }
        let any_bound = self.lower.iter().chain(&self.upper).any(Option::is_some);
        ensure!(
            !self.constraints.is_empty() || any_bound,
            "LP has neither constraints nor bounds"
        );
        Ok(())
    }
}

fn max_pivots() -> usize {
    std::env::var("ZMTILE_MAX_LP_PIVOTS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_MAX_PIVOTS)
}

// How an original variable is recovered from standard-form columns.
enum Recover {
    Shift { col: usize, lower: Rational },
    Negate { col: usize, upper: Rational },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    cols: usize,
    pivots: usize,
    limit: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        if !inv.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
            self.rhs[r] *= &inv;
        }
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        let nz: Vec<usize> = (0..self.cols).filter(|&j| !prow[j].is_zero()).collect();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let factor = self.rows[i][c].clone();
            let row = &mut self.rows[i];
            for &j in &nz {
                row[j].sub_mul(&factor, &prow[j]);
            }
            self.rhs[i].sub_mul(&factor, &prhs);
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Maximizes `cost . x` over columns not in `banned`.
    fn optimize(&mut self, cost: &[Rational], banned: &[bool]) -> Result<Outcome> {
        // Reduced costs d_j = c_j - c_B B^-1 A_j.
        let mut reduced: Vec<Rational> = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            for (d, a) in reduced.iter_mut().zip(&self.rows[i][..self.cols]) {
                if !a.is_zero() {
                    d.sub_mul(&cost[b], a);
                }
            }
        }
        loop {
            let entering = (0..self.cols).find(|&j| !banned[j] && reduced[j].is_positive());
            let Some(c) = entering else {
                return Ok(Outcome::Optimal);
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return Ok(Outcome::Unbounded);
            };
            if self.pivots >= self.limit {
                return Err(Error::ResourceLimit(format!(
                    "LP exceeded {} pivots",
                    self.limit
                )));
            }
            self.pivot(r, c);
            let dc = reduced[c].clone();
            for (d, a) in reduced.iter_mut().zip(&self.rows[r][..self.cols]) {
                if !a.is_zero() {
                    d.sub_mul(&dc, a);
                }
            }
        }
    }
}

/// Solves `p` exactly.
pub fn solve(p: &LpProblem) -> Result<LpResult> {
    p.validate()?;
    let n = p.num_vars();

    // Structural columns and extra bound rows.
    let mut recover = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut bound_rows: Vec<(usize, Rational)> = Vec::new();
    for j in 0..n {
        match (&p.lower[j], &p.upper[j]) {
            (Some(l), u) => {
                if let Some(u) = u {
                    if u < l {
                        return Ok(LpResult {
                            status: LpStatus::Infeasible,
                            value: None,
                            witness: None,
                            pivots: 0,
                        });
                    }
                    bound_rows.push((ncols, u - l));
                }
                recover.push(Recover::Shift {
                    col: ncols,
                    lower: l.clone(),
                });
                ncols += 1;
            }
            (None, Some(u)) => {
                recover.push(Recover::Negate {
                    col: ncols,
                    upper: u.clone(),
                });
                ncols += 1;
            }
            (None, None) => {
                recover.push(Recover::Split {
                    pos: ncols,
                    neg: ncols + 1,
                });
                ncols += 2;
            }
        }
    }
    let structural = ncols;

    // Rows in structural columns: (coeffs, relation, rhs).
    let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
    let mut obj = vec![Rational::zero(); structural];
    let mut obj_const = p.constant.clone();
    for (j, rec) in recover.iter().enumerate() {
        let c = &p.objective[j];
        match rec {
            Recover::Shift { col, lower } => {
                obj[*col] = c.clone();
                obj_const.add_mul(c, lower);
            }
            Recover::Negate { col, upper } => {
                obj[*col] = -c;
                obj_const.add_mul(c, upper);
            }
            Recover::Split { pos, neg } => {
                obj[*pos] = c.clone();
                obj[*neg] = -c;
            }
        }
    }
    for con in &p.constraints {
        let mut coeffs = vec![Rational::zero(); structural];
        let mut rhs = con.rhs.clone();
        for (j, rec) in recover.iter().enumerate() {
            let a = &con.coeffs[j];
            if a.is_zero() {
                continue;
            }
            match rec {
                Recover::Shift { col, lower } => {
                    coeffs[*col] = a.clone();
                    rhs.sub_mul(a, lower);
                }
                Recover::Negate { col, upper } => {
                    coeffs[*col] = -a;
                    rhs.sub_mul(a, upper);
                }
                Recover::Split { pos, neg } => {
                    coeffs[*pos] = a.clone();
                    coeffs[*neg] = -a;
                }
            }
        }
        rows.push((coeffs, con.relation, rhs));
    }
    for (col, width) in bound_rows {
        let mut coeffs = vec![Rational::zero(); structural];
        coeffs[col] = Rational::one();
        rows.push((coeffs, Relation::Le, width));
    }

    // Nonnegative right-hand sides.
    for (coeffs, rel, rhs) in rows.iter_mut() {
        if rhs.is_negative() {
            for a in coeffs.iter_mut() {
                *a = -&*a;
            }
            *rhs = -&*rhs;
            *rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let art_count = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = structural + slack_count + art_count;
    let mut tab = Tableau {
        rows: Vec::with_capacity(rows.len()),
        rhs: Vec::with_capacity(rows.len()),
        basis: Vec::with_capacity(rows.len()),
        cols,
        pivots: 0,
        limit: max_pivots(),
    };
    let (mut next_slack, mut next_art) = (structural, structural + slack_count);
    for (coeffs, rel, rhs) in rows {
        let mut row = coeffs;
        row.resize(cols, Rational::zero());
        match rel {
            Relation::Le => {
                row[next_slack] = Rational::one();
                tab.basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -Rational::one();
                next_slack += 1;
                row[next_art] = Rational::one();
                tab.basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = Rational::one();
                tab.basis.push(next_art);
                next_art += 1;
            }
        }
        tab.rows.push(row);
        tab.rhs.push(rhs);
    }
    let first_art = structural + slack_count;
    let is_art = |j: usize| j >= first_art;

    // Phase 1: maximize -sum(artificials).
    if art_count > 0 {
        let mut cost = vec![Rational::zero(); cols];
        for c in cost.iter_mut().skip(first_art) {
            *c = -Rational::one();
        }
        let banned = vec![false; cols];
        tab.optimize(&cost, &banned)?;
        let infeasible = tab
            .basis
            .iter()
            .zip(&tab.rhs)
            .any(|(&b, v)| is_art(b) && !v.is_zero());
        if infeasible {
            return Ok(LpResult {
                status: LpStatus::Infeasible,
                value: None,
                witness: None,
                pivots: tab.pivots,
            });
        }
        // Drive zero-level artificials out; drop rows that are redundant.
        let mut i = 0;
        while i < tab.rows.len() {
            if is_art(tab.basis[i]) {
                match (0..first_art).find(|&j| !tab.rows[i][j].is_zero()) {
                    Some(j) => {
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.rhs.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    // Phase 2.
    let mut cost = obj;
    cost.resize(cols, Rational::zero());
    let banned: Vec<bool> = (0..cols).map(is_art).collect();
    if let Outcome::Unbounded = tab.optimize(&cost, &banned)? {
        return Ok(LpResult {
            status: LpStatus::Unbounded,
            value: None,
            witness: None,
            pivots: tab.pivots,
        });
    }

    let mut xs = vec![Rational::zero(); cols];
    for (i, &b) in tab.basis.iter().enumerate() {
        xs[b] = tab.rhs[i].clone();
    }
    let witness: Vec<Rational> = recover
        .iter()
        .map(|rec| match rec {
            Recover::Shift { col, lower } => lower + &xs[*col],
            Recover::Negate { col, upper } => upper - &xs[*col],
            Recover::Split { pos, neg } => &xs[*pos] - &xs[*neg],
        })
        .collect();
    let value = p.objective_value(&witness);
    debug_assert!(p.is_feasible(&witness));
    debug_assert_eq!(
        value,
        obj_const + cost.iter().zip(&xs).map(|(c, x)| c * x).sum::<Rational>()
    );
    Ok(LpResult {
        status: LpStatus::Optimal,
        value: Some(value),
        witness: Some(witness),
        pivots: tab.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    #[test]
    fn trivial_examples() {
        let mut p = LpProblem::new(vec![r(1)]);
        p.add_constraint(vec![r(1)], Relation::Le, r(3));
        let res = solve(&p).unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert_eq!(res.value, Some(r(3)));

        let mut p = LpProblem::new(vec![r(1)]);
        p.add_constraint(vec![r(1)], Relation::Ge, r(1));
        p.add_constraint(vec![r(1)], Relation::Le, r(0));
        assert_eq!(solve(&p).unwrap().status, LpStatus::Infeasible);

        let mut p = LpProblem::new(vec![r(1)]);
        p.add_constraint(vec![r(1)], Relation::Ge, r(0));
        assert_eq!(solve(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn one_variable_delsarte_program() {
        // max 1 + 2 c1 s.t. 1 - 2 c1 >= 0, c1 >= 0.
        let mut p = LpProblem::new(vec![r(2)]);
        p.set_constant(r(1));
        p.set_bounds(0, Some(r(0)), None);
        p.add_constraint(vec![r(-2)], Relation::Ge, r(-1));
        let res = solve(&p).unwrap();
        assert_eq!(res.value, Some(r(2)));
        assert_eq!(res.witness, Some(vec![q(1, 2)]));
    }

    #[test]
    fn malformed_problems_are_rejected() {
        let p = LpProblem::new(vec![r(1)]);
        assert!(solve(&p).is_err());
        let mut p = LpProblem::new(vec![r(1), r(1)]);
        p.add_constraint(vec![r(1)], Relation::Le, r(1));
        assert!(solve(&p).is_err());
    }

    #[test]
    fn bounds_and_equalities() {
        // max x - y with x in [1, 4], y <= -2 (upper only), x + y = 1.
        let mut p = LpProblem::new(vec![r(1), r(-1)]);
        p.set_bounds(0, Some(r(1)), Some(r(4)));
        p.set_bounds(1, None, Some(r(-2)));
        p.add_constraint(vec![r(1), r(1)], Relation::Eq, r(1));
        let res = solve(&p).unwrap();
        assert_eq!(res.value, Some(r(7)));
        assert_eq!(res.witness, Some(vec![r(4), r(-3)]));

        let mut p = LpProblem::new(vec![r(1)]);
        p.set_bounds(0, Some(r(2)), Some(r(1)));
        assert_eq!(solve(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn redundant_equalities() {
        let mut p = LpProblem::new(vec![r(1), r(1)]);
        p.set_bounds(0, Some(r(0)), None);
        p.set_bounds(1, Some(r(0)), None);
        p.add_constraint(vec![r(1), r(2)], Relation::Eq, r(4));
        p.add_constraint(vec![r(2), r(4)], Relation::Eq, r(8));
        let res = solve(&p).unwrap();
        assert_eq!(res.value, Some(r(4)));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the textbook largest-coefficient rule.
        let mut p = LpProblem::new(vec![q(3, 4), r(-150), q(1, 50), r(-6)]);
        for j in 0..4 {
            p.set_bounds(j, Some(r(0)), None);
        }
        p.add_constraint(vec![q(1, 4), r(-60), q(-1, 25), r(9)], Relation::Le, r(0));
        p.add_constraint(vec![q(1, 2), r(-90), q(-1, 50), r(3)], Relation::Le, r(0));
        p.add_constraint(vec![r(0), r(0), r(1), r(0)], Relation::Le, r(1));
        let res = solve(&p).unwrap();
        assert_eq!(res.value, Some(q(1, 20)));
    }

    const BOX: f64 = 1e4;

    // Float reference with every column boxed to [-BOX, BOX]; minilp returns
    // NaN on some unbounded instances, and the box keeps it well-posed.
    fn float_solve(p: &LpProblem) -> std::result::Result<f64, minilp::Error> {
        use minilp::{ComparisonOp, OptimizationDirection, Problem};
        let mut fp = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<_> = (0..p.num_vars())
            .map(|j| {
                let lo = p.lower[j].as_ref().map_or(-BOX, Rational::to_f64);
                let hi = p.upper[j].as_ref().map_or(BOX, Rational::to_f64);
                fp.add_var(p.objective[j].to_f64(), (lo, hi))
            })
            .collect();
        for c in &p.constraints {
            let expr: Vec<_> = vars
                .iter()
                .zip(&c.coeffs)
                .map(|(v, a)| (*v, a.to_f64()))
                .collect();
            let op = match c.relation {
                Relation::Le => ComparisonOp::Le,
                Relation::Ge => ComparisonOp::Ge,
                Relation::Eq => ComparisonOp::Eq,
            };
            fp.add_constraint(&expr[..], op, c.rhs.to_f64());
        }
        fp.solve().map(|s| s.objective() + p.constant.to_f64())
    }

    #[test]
    fn agrees_with_float_solver_on_random_programs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut seen = [0usize; 3];
        for _ in 0..500 {
            let n = rng.gen_range(1..=6);
            let m = rng.gen_range(1..=6);
            let small = |rng: &mut ChaCha8Rng| q(rng.gen_range(-5..=5), rng.gen_range(1..=3));
            let mut p = LpProblem::new((0..n).map(|_| small(&mut rng)).collect());
            for j in 0..n {
                let lo = match rng.gen_range(0..4) {
                    0 => None,
                    _ => Some(r(rng.gen_range(-2..=1))),
                };
                let hi = match rng.gen_range(0..3) {
                    0 => Some(r(rng.gen_range(1..=4))),
                    _ => None,
                };
                p.set_bounds(j, lo, hi);
            }
            for _ in 0..m {
                let rel = match rng.gen_range(0..5) {
                    0 => Relation::Eq,
                    1 => Relation::Ge,
                    _ => Relation::Le,
                };
                p.add_constraint(
                    (0..n).map(|_| small(&mut rng)).collect(),
                    rel,
                    small(&mut rng),
                );
            }
            let exact = solve(&p).unwrap();
            match (exact.status, float_solve(&p)) {
                (LpStatus::Optimal, Ok(v)) => {
                    let w = exact.witness.as_ref().unwrap();
                    assert!(p.is_feasible(w));
                    assert_eq!(p.objective_value(w), *exact.value.as_ref().unwrap());
                    if w.iter().all(|x| x.to_f64().abs() < BOX) {
                        assert!((exact.value.unwrap().to_f64() - v).abs() < 1e-6, "{p:?}");
                        seen[0] += 1;
                    }
                }
                (LpStatus::Infeasible, Err(minilp::Error::Infeasible)) => seen[1] += 1,
                (LpStatus::Unbounded, Ok(v)) if v > 100.0 => seen[2] += 1,
                (s, f) => panic!("exact {s:?} vs float {f:?} on {p:?}"),
            }
        }
        assert!(seen.iter().all(|&k| k > 10), "status mix {seen:?}");
    }
}
