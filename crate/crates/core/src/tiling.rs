//! Tilings `A (+) B = Z_M`, pd-tilings and functional pd-tilings.
//!
//! # pd-tiling feasibility
//!
//! `A` pd-tiles `Z_M` when some `f >= 0` with `f(0) = 1` and `f^ >= 0`
//! satisfies `1_A * f = 1`. On the transform side this reads
//! `1_A^ f^ = M delta_0`: `f^(0) = M/|A|`, and `f^` vanishes wherever `1_A^`
//! does not. Because `1_A` has integer values, `1_A^` vanishes on a whole
//! class `R_e` or nowhere in it (`Phi_{M/e}` divides the mask polynomial or
//! it does not), so the zero pattern is class-constant.
//!
//! That makes the search a linear program over step functions:
//!
//! * a step solution is a pd-tiling complement as it stands;
//! * any dense complement `f` averages over units, `c_m = mean of f on R_m`,
//!   to a step function. Averaging keeps `f >= 0`, `f(0) = 1`, and the
//!   transform's class means, which are still `>= 0` and still vanish on every
//!   class where `f^` vanished. So a dense complement exists iff a step one
//!   does.
//!
//! # Pair construction
//!
//! [`construct_pd_pair`] first solves the eigen-shaped programs (support of
//! the function and of its transform both inside `H`, resp. `H'`). When that
//! program is infeasible, or its `f` happens to satisfy (T2) although the
//! support pattern of `H` violates it, the pair is built from Delsarte
//! optimizers instead: with `u` optimal for `D(delta)+(H) = k_H` and `v`
//! optimal for `D+(H') = M/k_H`, the functions `f = u^/k_H` and
//! `g = v^ k_H/M` form a functional pd-tiling whose `f^` is supported on
//! exactly `H`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::class_set::ClassSet;
use crate::cyclotomic::{divides, support_t2, t1t2_report, CycloReport};
use crate::delsarte::{clique_number, delsarte_solve, delta_screen, k_of, screen, DelsarteKind};
use crate::error::{ensure, Error, Result};
use crate::fourier::{eigen_check, ft_step, StepFourierMatrix};
use crate::rational::Rational;
use crate::ratlp::{solve, LpProblem, LpStatus, Relation};
use crate::step_fn::{convolve_step, DenseFunction, StepFunction};
use crate::zm_arith::{is_prime, Modulus};

/// A finite set `A` of residues mod `M`, sorted, with `0 in A`.
#[derive(Clone, PartialEq, Eq)]
pub struct TileSet {
    modulus: Arc<Modulus>,
    elements: Vec<u64>,
}

impl std::fmt::Debug for TileSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "TileSet(M={}, {:?})",
            self.modulus.value(),
            self.elements
        )
    }
}

impl TileSet {
    pub fn new(modulus: Arc<Modulus>, elements: &[u64]) -> Result<Self> {
        let m = modulus.value();
        let mut elements = elements.to_vec();
        elements.sort_unstable();
        ensure!(
            elements.windows(2).all(|w| w[0] != w[1]),
            "tile set elements must be distinct"
        );
        ensure!(
            elements.last().is_none_or(|&x| x < m),
            "tile set elements must lie in 0..{m}"
        );
        ensure!(elements.first() == Some(&0), "tile set must contain 0");
        Ok(TileSet { modulus, elements })
    }

    pub fn full(modulus: Arc<Modulus>) -> Self {
        let elements = (0..modulus.value()).collect();
        TileSet { modulus, elements }
    }

    /// Parses `"0,1,2"`, with optional surrounding braces.
    pub fn parse(modulus: Arc<Modulus>, spec: &str) -> Result<Self> {
        let body = spec.trim().trim_start_matches('{').trim_end_matches('}');
        let elements = body
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<u64>()
                    .map_err(|_| Error::invalid(format!("bad element {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        TileSet::new(modulus, &elements)
    }

    pub fn modulus(&self) -> &Arc<Modulus> {
        &self.modulus
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    /// Never true: `0` is always present.
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn indicator(&self) -> DenseFunction {
        DenseFunction::indicator(self.modulus.clone(), &self.elements)
    }
}

#[derive(Serialize, Deserialize)]
struct TileSetJson {
    #[serde(rename = "M")]
    m: u64,
    elements: Vec<u64>,
}

impl Serialize for TileSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TileSetJson {
            m: self.modulus.value(),
            elements: self.elements.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TileSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = TileSetJson::deserialize(d)?;
        let modulus = Arc::new(Modulus::new(raw.m).map_err(serde::de::Error::custom)?);
        TileSet::new(modulus, &raw.elements).map_err(serde::de::Error::custom)
    }
}

/// `{gcd(a - a', M)}`; always contains `M`.
pub fn div_star(a: &TileSet) -> ClassSet {
    let modulus = a.modulus();
    let m = modulus.value();
    let mut flags = vec![false; modulus.divisor_count()];
    flags[modulus.top_index()] = true;
    for (i, &x) in a.elements.iter().enumerate() {
        for &y in &a.elements[i + 1..] {
            flags[modulus.class_index_of(y - x)] = true;
        }
    }
    debug_assert!(a.elements.iter().all(|&x| x < m));
    ClassSet::from_flags(modulus.clone(), flags)
}

fn same_modulus(a: &TileSet, b: &TileSet) -> Result<()> {
    ensure!(
        a.modulus.value() == b.modulus.value(),
        "moduli differ: {} and {}",
        a.modulus.value(),
        b.modulus.value()
    );
    Ok(())
}

/// Every residue has exactly one representation `a + b`.
pub fn tiles_directly(a: &TileSet, b: &TileSet) -> Result<bool> {
    same_modulus(a, b)?;
    let m = a.modulus.value();
    if (a.len() * b.len()) as u64 != m {
        return Ok(false);
    }
    let mut hit = vec![false; m as usize];
    for &x in &a.elements {
        for &y in &b.elements {
            let s = ((x + y) % m) as usize;
            if hit[s] {
                return Ok(false);
            }
            hit[s] = true;
        }
    }
    Ok(true)
}

/// Sands: `|A||B| = M` and `Div*(A)` meets `Div*(B)` only in the class of 0.
pub fn sands_check(a: &TileSet, b: &TileSet) -> Result<bool> {
    same_modulus(a, b)?;
    if (a.len() * b.len()) as u64 != a.modulus.value() {
        return Ok(false);
    }
    let (da, db) = (div_star(a), div_star(b));
    let top = a.modulus.top_index();
    let disjoint = da
        .member_indices()
        .all(|i| i == top || !db.contains_index(i));
    Ok(disjoint)
}

/// Backtracking over complements `B` with `0 in B`: the smallest residue not
/// yet covered fixes the next translate, so each `B` is produced once.
struct ComplementSearch<'a> {
    a: &'a [u64],
    m: u64,
    covered: Vec<bool>,
    b: Vec<u64>,
    found: Vec<Vec<u64>>,
    limit: usize,
}

impl ComplementSearch<'_> {
    fn fits(&self, t: u64) -> bool {
        self.a
            .iter()
            .all(|&x| !self.covered[((x + t) % self.m) as usize])
    }

    fn mark(&mut self, t: u64, on: bool) {
        for &x in self.a {
            self.covered[((x + t) % self.m) as usize] = on;
        }
    }

    fn run(&mut self, from: u64) {
        if self.found.len() >= self.limit {
            return;
        }
        let Some(x) = (from..self.m).find(|&x| !self.covered[x as usize]) else {
            let mut b = self.b.clone();
            b.sort_unstable();
            self.found.push(b);
            return;
        };
        for i in 0..self.a.len() {
            let t = (x + self.m - self.a[i]) % self.m;
            if self.fits(t) {
                self.mark(t, true);
                self.b.push(t);
                self.run(x + 1);
                self.b.pop();
                self.mark(t, false);
            }
        }
    }
}

fn complements_up_to(a: &TileSet, limit: usize) -> Vec<TileSet> {
    let m = a.modulus.value();
    if m % a.len() as u64 != 0 {
        return Vec::new();
    }
    let mut search = ComplementSearch {
        a: &a.elements,
        m,
        covered: vec![false; m as usize],
        b: vec![0],
        found: Vec::new(),
        limit,
    };
    search.mark(0, true);
    search.run(1);
    search
        .found
        .into_iter()
        .map(|b| TileSet {
            modulus: a.modulus.clone(),
            elements: b,
        })
        .collect()
}

/// Some `B` with `0 in B` and `A (+) B = Z_M`.
pub fn find_complement(a: &TileSet) -> Option<TileSet> {
    complements_up_to(a, 1).pop()
}

pub fn tiles(a: &TileSet) -> bool {
    find_complement(a).is_some()
}

/// Every complement `B` with `0 in B`, ascending.
pub fn all_complements(a: &TileSet) -> Vec<TileSet> {
    let mut out = complements_up_to(a, usize::MAX);
    out.sort_by(|x, y| x.elements.cmp(&y.elements));
    out
}

/// Largest `M` accepted by [`enumerate_tilings`] (cliques use `u128` masks).
pub const MAX_ENUMERATION_M: u64 = 128;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tiling {
    pub a: TileSet,
    pub b: TileSet,
}

/// Cliques of `Gamma_H` of size exactly `k` that contain 0, as ascending
/// element lists.
fn cliques_with_zero(h: &ClassSet, k: usize, out: &mut Vec<Vec<u64>>) {
    let modulus = h.modulus();
    let m = modulus.value() as usize;
    let adj: Vec<u128> = (0..m)
        .map(|x| {
            (0..m)
                .filter(|&y| y != x && h.contains_residue(((x + m - y) % m) as u64))
                .fold(0u128, |acc, y| acc | 1 << y)
        })
        .collect();
    fn go(adj: &[u128], cand: u128, clique: &mut Vec<u64>, k: usize, out: &mut Vec<Vec<u64>>) {
        if clique.len() == k {
            out.push(clique.clone());
            return;
        }
        let mut rest = cand;
        while rest != 0 {
            if (rest.count_ones() as usize) < k - clique.len() {
                return;
            }
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            clique.push(v as u64);
            go(adj, rest & adj[v], clique, k, out);
            clique.pop();
        }
    }
    let mut clique = vec![0u64];
    go(&adj, adj[0], &mut clique, k, out);
}

/// Every class set of `M` (as bitmasks over the divisors below `M`).
pub fn all_class_sets(modulus: &Arc<Modulus>) -> Vec<ClassSet> {
    let top = modulus.top_index();
    (0u64..1 << top)
        .map(|mask| {
            ClassSet::from_flags(
                modulus.clone(),
                (0..=top).map(|i| i == top || mask >> i & 1 == 1),
            )
        })
        .collect()
}

/// All tilings `A (+) B = Z_M` with `0 in A, B`.
///
/// A tile `A` with complement `B` is a maximum clique of `Gamma_H` for
/// `H = Div*(A)`, and `B` one of `Gamma_H'`, with `omega(H) omega(H') = M`.
/// So it suffices to scan those `H`, list the size-`omega(H)` cliques
/// through 0 whose `Div*` is exactly `H`, and complete each one.
pub fn enumerate_tilings(modulus: &Arc<Modulus>) -> Result<Vec<Tiling>> {
    let m = modulus.value();
    if m > MAX_ENUMERATION_M {
        return Err(Error::ResourceLimit(format!(
            "tiling enumeration supports M <= {MAX_ENUMERATION_M}, got {m}"
        )));
    }
    let mut out = Vec::new();
    for h in all_class_sets(modulus) {
        let w = clique_number(&h)?;
        if w * clique_number(&h.standard_complement())? != m {
            continue;
        }
        let mut cliques = Vec::new();
        cliques_with_zero(&h, w as usize, &mut cliques);
        for c in cliques {
            let a = TileSet {
                modulus: modulus.clone(),
                elements: c,
            };
            if div_star(&a) != h {
                continue;
            }
            for b in all_complements(&a) {
                out.push(Tiling { a: a.clone(), b });
            }
        }
    }
    out.sort_by(|x, y| (&x.a.elements, &x.b.elements).cmp(&(&y.a.elements, &y.b.elements)));
    Ok(out)
}

/// Feasibility program over step functions `f` with `c_M = 1`.
///
/// `var(i)`: class `i` may carry weight (bounded below by `lower`);
/// `zero(e)`: `f^` must vanish on frequency class `e`; elsewhere `f^ >= 0`;
/// `f^(0) = weight`.
fn transform_program(
    modulus: &Arc<Modulus>,
    var: impl Fn(usize) -> bool,
    lower: &Rational,
    zero: impl Fn(usize) -> bool,
    weight: &Rational,
) -> Result<Option<StepFunction>> {
    let top = modulus.top_index();
    let t = StepFourierMatrix::shared(modulus);
    let vars: Vec<usize> = (0..top).filter(|&i| var(i)).collect();
    let row_of = |e: usize| -> (Vec<Rational>, Rational) {
        let row = t.row(e);
        (
            vars.iter().map(|&i| Rational::from(row[i])).collect(),
            Rational::from(-row[top]),
        )
    };
    if vars.is_empty() {
        // Only delta_0, whose transform is identically 1.
        let ok = (0..top).all(|e| !zero(e)) && weight.is_one();
        return Ok(ok.then(|| StepFunction::delta0(modulus.clone())));
    }
    let mut lp = LpProblem::new(vec![Rational::zero(); vars.len()]);
    for (j, &i) in vars.iter().enumerate() {
        lp.set_name(j, format!("c{}", modulus.divisors()[i]));
        lp.set_bounds(j, Some(lower.clone()), None);
    }
    for e in 0..top {
        let (coeffs, rhs) = row_of(e);
        let rel = if zero(e) { Relation::Eq } else { Relation::Ge };
        lp.add_constraint(coeffs, rel, rhs);
    }
    let (coeffs, rhs) = row_of(top);
    lp.add_constraint(coeffs, Relation::Eq, rhs + weight);
    let res = solve(&lp)?;
    match res.status {
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(Error::invalid("feasibility program reported unbounded")),
        LpStatus::Optimal => {
            let mut coeffs = vec![Rational::zero(); modulus.divisor_count()];
            coeffs[top] = Rational::one();
            for (x, &i) in res.witness.expect("optimal witness").into_iter().zip(&vars) {
                coeffs[i] = x;
            }
            Ok(Some(StepFunction::new(modulus.clone(), coeffs)?))
        }
    }
}

/// Divisor indices `e < top` where `1_A^` is nonzero on `R_e`.
fn indicator_support(a: &TileSet) -> Result<Vec<bool>> {
    let modulus = a.modulus();
    let m = modulus.value();
    let ind = a.indicator();
    let top = modulus.top_index();
    (0..top)
        .map(|e| Ok(!divides((&ind).into(), m / modulus.divisors()[e])?))
        .collect()
}

/// `supp |1_A^|^2` as a class set: the classes `R_e` with `Phi_{M/e}` not
/// dividing the mask polynomial, plus the class of 0.
pub fn spectral_support(a: &TileSet) -> Result<ClassSet> {
    let mut flags = indicator_support(a)?;
    flags.push(true);
    Ok(ClassSet::from_flags(a.modulus().clone(), flags))
}

/// Whether `A` pd-tiles `Z_M`, with a step-function complement when it does.
pub fn pd_tile_feasible(a: &TileSet) -> Result<(bool, Option<StepFunction>)> {
    let modulus = a.modulus();
    let m = modulus.value();
    if m % a.len() as u64 != 0 {
        return Ok((false, None));
    }
    let nonzero = indicator_support(a)?;
    let weight = Rational::from(m / a.len() as u64);
    let f = transform_program(
        modulus,
        |_| true,
        &Rational::zero(),
        |e| nonzero[e],
        &weight,
    )?;
    Ok((f.is_some(), f))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdTilingChecks {
    pub f_nonnegative: bool,
    pub g_nonnegative: bool,
    pub f_at_zero_is_one: bool,
    pub g_at_zero_is_one: bool,
    pub f_transform_nonnegative: bool,
    pub g_transform_nonnegative: bool,
    /// `f^ g^` vanishes off the zero frequency.
    pub transforms_disjoint: bool,
    pub weight_product_is_m: bool,
    /// `transforms_disjoint && weight_product_is_m`, i.e. `f * g = 1`.
    pub convolution_is_one: bool,
}

impl PdTilingChecks {
    fn all(&self) -> bool {
        self.f_nonnegative
            && self.g_nonnegative
            && self.f_at_zero_is_one
            && self.g_at_zero_is_one
            && self.f_transform_nonnegative
            && self.g_transform_nonnegative
            && self.convolution_is_one
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdTilingReport {
    #[serde(rename = "M")]
    pub m: u64,
    pub valid: bool,
    pub checks: PdTilingChecks,
    pub weight_f: Rational,
    pub weight_g: Rational,
    pub t1_f: bool,
    pub t2_f: bool,
    pub t1_g: bool,
    pub t2_g: bool,
    /// `None` when the weight is not positive.
    pub cyclo_f: Option<CycloReport>,
    pub cyclo_g: Option<CycloReport>,
}

fn cyclo_of(f: &StepFunction) -> Result<Option<CycloReport>> {
    if !f.total_weight().is_positive() {
        return Ok(None);
    }
    t1t2_report(f.into()).map(Some)
}

/// Exact check of `f, g >= 0`, `f(0) = g(0) = 1`, `f^, g^ >= 0`, `f * g = 1`.
/// The convolution is checked on the transform side.
pub fn verify_functional_pd_tiling(f: &StepFunction, g: &StepFunction) -> Result<PdTilingReport> {
    ensure!(
        f.modulus().value() == g.modulus().value(),
        "moduli differ: {} and {}",
        f.modulus().value(),
        g.modulus().value()
    );
    let modulus = f.modulus();
    let m = modulus.value();
    let top = modulus.top_index();
    let (fh, gh) = (ft_step(f), ft_step(g));
    let (wf, wg) = (f.total_weight(), g.total_weight());
    let transforms_disjoint =
        (0..top).all(|e| fh.coeff_at(e).is_zero() || gh.coeff_at(e).is_zero());
    let weight_product_is_m = &wf * &wg == Rational::from(m);
    let checks = PdTilingChecks {
        f_nonnegative: f.is_nonnegative(),
        g_nonnegative: g.is_nonnegative(),
        f_at_zero_is_one: f.coeff_at(top).is_one(),
        g_at_zero_is_one: g.coeff_at(top).is_one(),
        f_transform_nonnegative: fh.is_nonnegative(),
        g_transform_nonnegative: gh.is_nonnegative(),
        transforms_disjoint,
        weight_product_is_m,
        convolution_is_one: transforms_disjoint && weight_product_is_m,
    };
    let (cyclo_f, cyclo_g) = (cyclo_of(f)?, cyclo_of(g)?);
    let flag =
        |r: &Option<CycloReport>, pick: fn(&CycloReport) -> bool| r.as_ref().is_some_and(pick);
    Ok(PdTilingReport {
        m,
        valid: checks.all(),
        checks,
        weight_f: wf,
        weight_g: wg,
        t1_f: flag(&cyclo_f, |r| r.t1),
        t2_f: flag(&cyclo_f, |r| r.t2),
        t1_g: flag(&cyclo_g, |r| r.t1),
        t2_g: flag(&cyclo_g, |r| r.t2),
        cyclo_f,
        cyclo_g,
    })
}

fn check_pq(p: u64, q: u64) -> Result<()> {
    ensure!(is_prime(p), "p = {p} is not prime");
    ensure!(is_prime(q), "q = {q} is not prime");
    ensure!(p < q, "need p < q, got p = {p}, q = {q}");
    ensure!(q < p * p, "need q < p^2, got q = {q} >= p^2 = {}", p * p);
    let m = p.checked_pow(4).and_then(|x| x.checked_mul(q * q));
    ensure!(
        m.is_some_and(|m| m <= crate::zm_arith::MAX_MODULUS),
        "M = p^4 q^2 is too large for p = {p}, q = {q}"
    );
    Ok(())
}

/// The pair `f, g` on `Z_{p^4 q^2}` for primes `p < q < p^2`: both are
/// eigenfunctions of the transform with eigenvalue `p^2 q`, `f * g = 1`,
/// both satisfy (T1) and both fail (T2).
pub fn counterexample_pair(p: u64, q: u64) -> Result<(StepFunction, StepFunction)> {
    check_pq(p, q)?;
    let m = p.pow(4) * q * q;
    let modulus = Arc::new(Modulus::new(m)?);
    let (pi, qi) = (p as i64, q as i64);
    let r = |n: i64, d: i64| Rational::new(n, d);
    let phi_p = pi - 1;
    let phi_q = qi - 1;
    let phi_q2 = qi * (qi - 1);
    let d = 2 * pi * qi - pi * pi - qi;
    // Rows alpha = 0..4 (class M/p^alpha), columns beta = 0..2 (M/q^beta).
    let f_table: [[Rational; 3]; 5] = [
        [r(1, 1), r(0, 1), r(qi - pi, phi_q2)],
        [r(0, 1), r(1, phi_q), r(qi - pi, phi_q2)],
        [
            r(qi * qi - pi * qi + pi * pi - qi, pi * phi_q2),
            r(pi * pi - qi, pi * phi_q2),
            r(0, 1),
        ],
        [r(qi - pi, pi * phi_q), r(0, 1), r(0, 1)],
        [r(0, 1), r(0, 1), r(1, pi * pi * phi_q)],
    ];
    let g_table: [[Rational; 3]; 5] = [
        [r(1, 1), r(pi * (qi - pi), d), r(0, 1)],
        [r(qi * phi_p, d), r(0, 1), r(0, 1)],
        [r(0, 1), r(0, 1), r(1, d)],
        [r(0, 1), r(qi, pi * d), r(phi_p, pi * d)],
        [r(qi - pi, pi * d), r(qi - pi, pi * d), r(0, 1)],
    ];
    let build = |table: &[[Rational; 3]; 5]| -> Result<StepFunction> {
        let mut pairs = Vec::with_capacity(15);
        for (alpha, row) in table.iter().enumerate() {
            for (beta, c) in row.iter().enumerate() {
                let class = m / (p.pow(alpha as u32) * q.pow(beta as u32));
                pairs.push((class, c.clone()));
            }
        }
        StepFunction::from_pairs(modulus.clone(), &pairs)
    };
    Ok((build(&f_table)?, build(&g_table)?))
}

/// Every claim about [`counterexample_pair`], checked exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub p: u64,
    pub q: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub f: StepFunction,
    pub g: StepFunction,
    pub f_nonnegative: bool,
    pub g_nonnegative: bool,
    /// `supp f` and `supp g` share only the class of 0.
    pub supports_meet_only_at_zero: bool,
    pub eigenvalue_f: Option<Rational>,
    pub eigenvalue_g: Option<Rational>,
    pub weight_f: Rational,
    pub weight_g: Rational,
    /// `f * g = 1`, by direct convolution.
    pub convolution_is_one: bool,
    pub pd_tiling: PdTilingReport,
    pub cyclo_f: CycloReport,
    pub cyclo_g: CycloReport,
    pub expected_witness_f: u64,
    pub expected_witness_g: u64,
    pub all_checks_pass: bool,
}

pub fn check_counterexample(p: u64, q: u64) -> Result<CounterexampleReport> {
    let (f, g) = counterexample_pair(p, q)?;
    let modulus = f.modulus().clone();
    let m = modulus.value();
    let sqrt_m = Rational::from(p * p * q);
    let top = modulus.top_index();
    let supports_meet_only_at_zero =
        (0..top).all(|i| f.coeff_at(i).is_zero() || g.coeff_at(i).is_zero());
    let conv = convolve_step(&f, &g)?;
    let convolution_is_one = conv == StepFunction::constant(modulus.clone(), Rational::one());
    let pd_tiling = verify_functional_pd_tiling(&f, &g)?;
    let cyclo_f = t1t2_report((&f).into())?;
    let cyclo_g = t1t2_report((&g).into())?;
    let (eigenvalue_f, eigenvalue_g) = (eigen_check(&f)?, eigen_check(&g)?);
    let (wf, wg) = (f.total_weight(), g.total_weight());
    let expected_witness_f = p * q;
    let expected_witness_g = p * p * q * q;
    let all_checks_pass = f.is_nonnegative()
        && g.is_nonnegative()
        && supports_meet_only_at_zero
        && eigenvalue_f.as_ref() == Some(&sqrt_m)
        && eigenvalue_g.as_ref() == Some(&sqrt_m)
        && wf == sqrt_m
        && wg == sqrt_m
        && convolution_is_one
        && pd_tiling.valid
        && cyclo_f.t1
        && cyclo_g.t1
        && cyclo_f.t2_witness == Some(expected_witness_f)
        && cyclo_g.t2_witness == Some(expected_witness_g);
    Ok(CounterexampleReport {
        p,
        q,
        m,
        f_nonnegative: f.is_nonnegative(),
        g_nonnegative: g.is_nonnegative(),
        f,
        g,
        supports_meet_only_at_zero,
        eigenvalue_f,
        eigenvalue_g,
        weight_f: wf,
        weight_g: wg,
        convolution_is_one,
        pd_tiling,
        cyclo_f,
        cyclo_g,
        expected_witness_f,
        expected_witness_g,
        all_checks_pass,
    })
}

/// Digit tiling of `Z_{p^alpha}`: `C` uses the base-`p` digits at positions
/// `j - 1` for `j in J`, `D` the remaining positions.
pub fn standard_prime_power_tiling(p: u64, alpha: u32, j: &[u32]) -> Result<(TileSet, TileSet)> {
    ensure!(is_prime(p), "p = {p} is not prime");
    ensure!(alpha >= 1, "exponent must be positive");
    ensure!(
        j.iter().all(|&x| (1..=alpha).contains(&x)),
        "J must be a subset of 1..={alpha}"
    );
    let m = p
        .checked_pow(alpha)
        .filter(|&m| m <= crate::zm_arith::MAX_MODULUS)
        .ok_or_else(|| Error::ResourceLimit(format!("{p}^{alpha} is too large")))?;
    let modulus = Arc::new(Modulus::new(m)?);
    let digits = |positions: &[u32]| -> Vec<u64> {
        let mut set = vec![0u64];
        for &pos in positions {
            let step = p.pow(pos - 1);
            set = set
                .iter()
                .flat_map(|&x| (0..p).map(move |a| x + a * step))
                .collect();
        }
        set
    };
    let mut jc: Vec<u32> = j.to_vec();
    jc.sort_unstable();
    jc.dedup();
    let rest: Vec<u32> = (1..=alpha).filter(|x| !jc.contains(x)).collect();
    let c = TileSet::new(modulus.clone(), &digits(&jc))?;
    let d = TileSet::new(modulus, &digits(&rest))?;
    ensure!(tiles_directly(&c, &d)?, "digit sets failed to tile");
    Ok((c, d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairRoute {
    /// `H = {M}`: `(delta_0, 1)`.
    Trivial,
    /// Supports of `f, f^` in `H` and of `g, g^` in `H'`.
    EigenLp,
    /// Transforms of the `D(delta)+(H)` and `D+(H')` optimizers.
    Duality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdPair {
    pub f: StepFunction,
    pub g: StepFunction,
    pub route: PairRoute,
    pub report: PdTilingReport,
}

/// A functional pd-tiling `f * g = 1` attached to a class set `H` that
/// passed [`screen`] at `delta = 1/(M^2 phi(M))`.
///
/// Returns `None` when neither route produces a verified pair.
pub fn construct_pd_pair(h: &ClassSet) -> Result<Option<PdPair>> {
    let modulus = h.modulus().clone();
    let m = modulus.value();
    let top = modulus.top_index();
    let delta = delta_screen(&modulus);
    let screened = screen(h, &delta)?;
    ensure!(
        screened.passes,
        "class set {} did not pass the screen",
        h.to_list_string()
    );
    let k = k_of(h);
    if h.len() == 1 {
        let f = StepFunction::delta0(modulus.clone());
        let g = StepFunction::constant(modulus, Rational::one());
        let report = verify_functional_pd_tiling(&f, &g)?;
        return Ok(Some(PdPair {
            f,
            g,
            route: PairRoute::Trivial,
            report,
        }));
    }
    let hc = h.standard_complement();
    let kr = Rational::from(k);
    let kc = Rational::from(m / k);
    let want_t2_failure = !support_t2(h);

    let f = transform_program(
        &modulus,
        |i| h.contains_index(i),
        &delta,
        |e| !h.contains_index(e),
        &kr,
    )?;
    let g = transform_program(
        &modulus,
        |i| hc.contains_index(i),
        &Rational::zero(),
        |e| !hc.contains_index(e),
        &kc,
    )?;
    if let (Some(f), Some(g)) = (f, g) {
        let report = verify_functional_pd_tiling(&f, &g)?;
        if report.valid && (!want_t2_failure || !report.t2_f) {
            return Ok(Some(PdPair {
                f,
                g,
                route: PairRoute::EigenLp,
                report,
            }));
        }
    }

    let u = delsarte_solve(h, &DelsarteKind::DeltaPlus(delta))?;
    let v = delsarte_solve(&hc, &DelsarteKind::Plus)?;
    let (Some(u), Some(v)) = (u, v) else {
        return Ok(None);
    };
    if u.value != kr || v.value != kc {
        return Ok(None);
    }
    let f = ft_step(&u.witness).scaled(&kr.recip());
    let g = ft_step(&v.witness).scaled(&kc.recip());
    debug_assert!(f.coeff_at(top).is_one());
    let report = verify_functional_pd_tiling(&f, &g)?;
    Ok(report.valid.then_some(PdPair {
        f,
        g,
        route: PairRoute::Duality,
        report,
    }))
}
