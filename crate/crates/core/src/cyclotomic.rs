//! Cyclotomic divisibility of mask polynomials `F(X) = sum f(z) X^z`.
//!
//! Divisibility of `F` by `Phi_d` only depends on the fold `f_d` to `Z_d`.
//! Dense functions are folded and then reduced modulo `Phi_d` exactly. Step
//! functions need a single `d`-cuboid with a vertex at 0: every cuboid with
//! a vertex at 0 has the same evaluation on a step function, and that
//! evaluation vanishes iff `Phi_d | F`. A cuboid evaluation of a fold is a
//! fixed integer combination of the step coefficients, so it is precomputed
//! once per `(M, d)`.
//!
//! For a dense function one cuboid is not enough: `1_{0,2}` on `Z_6` has a
//! zero evaluation on the cuboid at 0 but not on the one at 1.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::class_set::ClassSet;
use crate::error::{ensure, Result};
use crate::rational::Rational;
use crate::step_fn::{fold, DenseFunction, FunctionRef, StepFunction};
use crate::zm_arith::{prime_power, Modulus};

/// `X^c prod_i (1 - X^{d_i})` on `Z_N` with `d_i = rho_i N / p_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cuboid {
    modulus: Arc<Modulus>,
    base: u64,
    rho: Vec<u64>,
}

impl Cuboid {
    /// `rho` has one entry per distinct prime of `N`, with `1 <= rho_i < p_i`.
    pub fn new(modulus: Arc<Modulus>, base: u64, rho: Vec<u64>) -> Result<Self> {
        ensure!(
            rho.len() == modulus.omega(),
            "cuboid on Z_{} needs {} offsets, got {}",
            modulus.value(),
            modulus.omega(),
            rho.len()
        );
        for (&r, p) in rho.iter().zip(modulus.primes()) {
            ensure!(r >= 1 && r < p, "rho = {r} out of range 1..{p}");
        }
        let base = base % modulus.value();
        Ok(Cuboid { modulus, base, rho })
    }

    /// The canonical cuboid: vertex 0, every `rho_i = 1`.
    pub fn canonical(modulus: Arc<Modulus>) -> Self {
        let rho = vec![1; modulus.omega()];
        Cuboid {
            modulus,
            base: 0,
            rho,
        }
    }

    pub fn modulus(&self) -> &Arc<Modulus> {
        &self.modulus
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn rho(&self) -> &[u64] {
        &self.rho
    }

    pub fn offsets(&self) -> Vec<u64> {
        let n = self.modulus.value();
        self.rho
            .iter()
            .zip(self.modulus.primes())
            .map(|(&r, p)| r * (n / p))
            .collect()
    }

    /// Vertices with their signs `(-1)^{|eps|}`, in binary order of `eps`.
    pub fn vertices(&self) -> Vec<(u64, i64)> {
        let n = self.modulus.value();
        let offsets = self.offsets();
        (0..1u32 << offsets.len())
            .map(|eps| {
                let mut x = self.base;
                for (j, d) in offsets.iter().enumerate() {
                    if eps >> j & 1 == 1 {
                        x = (x + d) % n;
                    }
                }
                let sign = if eps.count_ones() % 2 == 0 { 1 } else { -1 };
                (x, sign)
            })
            .collect()
    }
}

/// `F[Delta] = sum_eps (-1)^{|eps|} f(x_eps)`.
pub fn cuboid_eval(f: FunctionRef<'_>, cuboid: &Cuboid) -> Result<Rational> {
    ensure!(
        f.modulus().value() == cuboid.modulus.value(),
        "cuboid lives on Z_{} but the function on Z_{}",
        cuboid.modulus.value(),
        f.modulus().value()
    );
    let mut acc = Rational::zero();
    for (x, sign) in cuboid.vertices() {
        if sign > 0 {
            acc += f.value(x);
        } else {
            acc -= f.value(x);
        }
    }
    Ok(acc)
}

/// Integer coefficients of `Phi_d`, constant term first. Cached per `d`.
pub fn cyclotomic_polynomial(d: u64) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<i64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().unwrap().get(&d) {
        return p.clone();
    }
    let p = Arc::new(build_cyclotomic(d));
    cache.lock().unwrap().entry(d).or_insert(p).clone()
}

// Phi_d = prod_{e | d} (X^{d/e} - 1)^{mu(e)}: multiply the mu = +1 factors,
// then divide out the mu = -1 factors exactly.
fn build_cyclotomic(d: u64) -> Vec<i64> {
    assert!(d >= 1);
    if d == 1 {
        return vec![-1, 1];
    }
    let md = Modulus::new(d).expect("d >= 2");
    let mut poly: Vec<i64> = vec![1];
    let mut divisors_neg = Vec::new();
    for (i, &e) in md.divisors().iter().enumerate() {
        match md.mu_at(i) {
            1 => {
                let k = (d / e) as usize;
                let mut next = vec![0i64; poly.len() + k];
                for (j, &c) in poly.iter().enumerate() {
                    next[j + k] += c;
                    next[j] -= c;
                }
                poly = next;
            }
            -1 => divisors_neg.push((d / e) as usize),
            _ => {}
        }
    }
    for k in divisors_neg {
        // p = q (X^k - 1)  =>  q[i] = q[i - k] - p[i].
        let deg = poly.len() - 1 - k;
        let mut quo = vec![0i64; deg + 1];
        for i in 0..=deg {
            let prev = if i >= k { quo[i - k] } else { 0 };
            quo[i] = prev - poly[i];
        }
        poly = quo;
    }
    poly
}

/// Remainder of `F(X)` modulo `Phi_d(X)`, as `phi(d)` coefficients (constant
/// term first). Requires `d | M`.
pub fn remainder_oracle(f: &DenseFunction, d: u64) -> Result<Vec<Rational>> {
    let m = f.modulus().value();
    ensure!(d >= 1 && m % d == 0, "{d} does not divide {m}");
    let folded: Vec<Rational> = if d == 1 {
        vec![f.total_weight()]
    } else {
        fold(f, d)?.values().to_vec()
    };
    let phi = cyclotomic_polynomial(d);
    Ok(reduce_rational(folded, &phi))
}

// Long division by a monic integer polynomial.
fn reduce_rational(mut a: Vec<Rational>, phi: &[i64]) -> Vec<Rational> {
    let deg = phi.len() - 1;
    for top in (deg..a.len()).rev() {
        let lead = std::mem::take(&mut a[top]);
        if lead.is_zero() {
            continue;
        }
        for (j, &c) in phi[..deg].iter().enumerate() {
            if c != 0 {
                a[top - deg + j].sub_mul(&lead, &Rational::from(c));
            }
        }
    }
    a.resize(deg, Rational::zero());
    a
}

// Integer remainder; `None` on overflow.
fn reduce_integer(mut a: Vec<i128>, phi: &[i64]) -> Option<Vec<i128>> {
    let deg = phi.len() - 1;
    for top in (deg..a.len()).rev() {
        let lead = std::mem::take(&mut a[top]);
        if lead == 0 {
            continue;
        }
        for (j, &c) in phi[..deg].iter().enumerate() {
            if c != 0 {
                let t = lead.checked_mul(c as i128)?;
                a[top - deg + j] = a[top - deg + j].checked_sub(t)?;
            }
        }
    }
    a.truncate(deg);
    Some(a)
}

fn dense_divides(f: &DenseFunction, d: u64) -> Result<bool> {
    // Integral values take an exact i128 route.
    let ints: Option<Vec<i64>> = f.values().iter().map(Rational::to_i64).collect();
    if let Some(ints) = ints {
        let mut folded = vec![0i128; d as usize];
        for (y, v) in ints.iter().enumerate() {
            folded[y % d as usize] += *v as i128;
        }
        if let Some(r) = reduce_integer(folded, &cyclotomic_polynomial(d)) {
            return Ok(r.iter().all(|&c| c == 0));
        }
    }
    Ok(remainder_oracle(f, d)?.iter().all(Rational::is_zero))
}

/// Per-`M` table of canonical-cuboid functionals: for each divisor `d > 1`,
/// the integers `W_d[m]` with `f_d[Delta] = sum_m W_d[m] c_m`.
#[derive(Debug)]
pub struct CuboidFunctionals {
    modulus: Arc<Modulus>,
    weights: Vec<Vec<i64>>,
}

impl CuboidFunctionals {
    pub fn build(modulus: Arc<Modulus>) -> Self {
        let m = modulus.value();
        let weights = modulus
            .divisors()
            .iter()
            .map(|&d| {
                let mut w = vec![0i64; modulus.divisor_count()];
                if d == 1 {
                    return w;
                }
                let level = Modulus::new(d).expect("d >= 2");
                for (y, sign) in Cuboid::canonical(Arc::new(level)).vertices() {
                    for k in 0..m / d {
                        w[modulus.class_index_of(y + k * d)] += sign;
                    }
                }
                w
            })
            .collect();
        CuboidFunctionals { modulus, weights }
    }

    pub fn shared(modulus: &Arc<Modulus>) -> Arc<CuboidFunctionals> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<CuboidFunctionals>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().unwrap().get(&modulus.value()) {
            return t.clone();
        }
        let t = Arc::new(CuboidFunctionals::build(modulus.clone()));
        cache
            .lock()
            .unwrap()
            .entry(modulus.value())
            .or_insert(t)
            .clone()
    }

    /// `W_d` for the divisor at index `i`; all zero for `d = 1`.
    pub fn weights_at(&self, i: usize) -> &[i64] {
        &self.weights[i]
    }

    /// Canonical cuboid evaluation of the fold of `f` to `Z_d`.
    pub fn eval_at(&self, f: &StepFunction, i: usize) -> Rational {
        let mut acc = Rational::zero();
        for (w, c) in self.weights[i].iter().zip(f.coeffs()) {
            if *w != 0 && !c.is_zero() {
                acc.add_mul(c, &Rational::from(*w));
            }
        }
        acc
    }

    pub fn modulus(&self) -> &Arc<Modulus> {
        &self.modulus
    }
}

/// `Phi_d | F` for `1 < d | M`.
pub fn divides(f: FunctionRef<'_>, d: u64) -> Result<bool> {
    let modulus = f.modulus();
    ensure!(d > 1, "divisibility by Phi_1 is not a step-class question");
    let i = modulus
        .index_of(d)
        .ok_or_else(|| crate::Error::invalid(format!("{d} does not divide {}", modulus.value())))?;
    match f {
        FunctionRef::Step(s) => Ok(CuboidFunctionals::shared(modulus).eval_at(s, i).is_zero()),
        FunctionRef::Dense(g) => dense_divides(g, d),
    }
}

/// All `1 < d | M` with `Phi_d | F`, ascending.
pub fn spectrum(f: FunctionRef<'_>) -> Vec<u64> {
    let modulus = f.modulus().clone();
    match f {
        FunctionRef::Step(s) => {
            let table = CuboidFunctionals::shared(&modulus);
            (0..modulus.divisor_count())
                .filter(|&i| modulus.divisors()[i] > 1 && table.eval_at(s, i).is_zero())
                .map(|i| modulus.divisors()[i])
                .collect()
        }
        FunctionRef::Dense(g) => modulus
            .divisors()
            .iter()
            .copied()
            .filter(|&d| d > 1 && dense_divides(g, d).expect("d divides M"))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycloReport {
    pub spectrum: Vec<u64>,
    #[serde(rename = "S_F")]
    pub s_f: Vec<u64>,
    pub t1: bool,
    pub t2: bool,
    pub t2_witness: Option<u64>,
}

/// Products of every subset of `powers` with at least two members and
/// pairwise distinct primes, ascending.
pub fn distinct_prime_products(powers: &[u64]) -> Vec<u64> {
    let mut by_prime: Vec<(u64, Vec<u64>)> = Vec::new();
    for &s in powers {
        let (p, _) = prime_power(s).expect("prime power");
        match by_prime.iter_mut().find(|(q, _)| *q == p) {
            Some((_, v)) => v.push(s),
            None => by_prime.push((p, vec![s])),
        }
    }
    // (product, number of factors)
    let mut acc: Vec<(u64, usize)> = vec![(1, 0)];
    for (_, choices) in &by_prime {
        let mut next = acc.clone();
        for &(prod, k) in &acc {
            for &s in choices {
                next.push((prod * s, k + 1));
            }
        }
        acc = next;
    }
    let mut out: Vec<u64> = acc
        .into_iter()
        .filter(|&(_, k)| k >= 2)
        .map(|t| t.0)
        .collect();
    out.sort_unstable();
    out
}

/// Coven-Meyerowitz style report for a function with positive weight.
pub fn t1t2_report(f: FunctionRef<'_>) -> Result<CycloReport> {
    let weight = f.total_weight();
    ensure!(
        weight.is_positive(),
        "t1/t2 report needs positive total weight, got {weight}"
    );
    let spec = spectrum(f);
    let s_f: Vec<u64> = spec
        .iter()
        .copied()
        .filter(|&d| prime_power(d).is_some())
        .collect();
    let k: u64 = s_f.iter().map(|&s| prime_power(s).unwrap().0).product();
    let t1 = weight == Rational::from(k);
    let t2_witness = distinct_prime_products(&s_f)
        .into_iter()
        .find(|prod| spec.binary_search(prod).is_err());
    Ok(CycloReport {
        spectrum: spec,
        s_f,
        t1,
        t2: t2_witness.is_none(),
        t2_witness,
    })
}

/// First product `s_1...s_k` (ascending) with `M/(s_1...s_k)` in `H`, where
/// the `s_i` range over prime powers with `M/s_i` outside `H`.
pub fn support_t2_witness(h: &ClassSet) -> Option<u64> {
    let modulus = h.modulus();
    let m = modulus.value();
    let s: Vec<u64> = modulus
        .prime_power_divisors()
        .into_iter()
        .filter(|&s| !h.contains(m / s))
        .collect();
    distinct_prime_products(&s)
        .into_iter()
        .find(|&prod| h.contains(m / prod))
}

/// (T2) read off a candidate support `H` of `|1_A^|^2`, using
/// `Phi_d | A  <=>  M/d not in H`.
pub fn support_t2(h: &ClassSet) -> bool {
    support_t2_witness(h).is_none()
}

/// Divisibility through all cuboids of the fold, over every base point and
/// offset choice. Cost is `Theta(d prod (p_i - 1))`; for cross-checking.
pub fn divides_all_cuboids(f: &DenseFunction, d: u64) -> Result<bool> {
    let m = f.modulus().value();
    ensure!(
        d > 1 && m % d == 0,
        "{d} must be a divisor of {m} greater than 1"
    );
    let folded = fold(f, d)?;
    let level = folded.modulus().clone();
    let primes: Vec<u64> = level.primes().collect();
    let mut rho = vec![1u64; primes.len()];
    loop {
        for c in 0..d {
            let cub = Cuboid::new(level.clone(), c, rho.clone())?;
            if !cuboid_eval(FunctionRef::Dense(&folded), &cub)?.is_zero() {
                return Ok(false);
            }
        }
        // Odometer over rho.
        let mut j = 0;
        loop {
            if j == rho.len() {
                return Ok(true);
            }
            rho[j] += 1;
            if rho[j] < primes[j] {
                break;
            }
            rho[j] = 1;
            j += 1;
        }
    }
}
