//! Exact Fourier transforms of step functions.
//!
//! The transform convention is `f^(xi) = sum_z f(z) exp(-2 pi i z xi / M)`.
//! The transform of the class indicator `1_{R_m}` takes the integer value
//! `sum_{d | gcd(M/m, xi)} mu(M/(m d)) d` (a Ramanujan sum), which depends on
//! `xi` only through `gcd(xi, M)`. Transforms are therefore computed at
//! divisor-class resolution and individual frequencies never appear.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{ensure, Result};
use crate::rational::Rational;
use crate::step_fn::StepFunction;
use crate::zm_arith::{gcd, Modulus};

/// `T[e, m]`: transform of `1_{R_m}` at any frequency in `R_e`.
#[derive(Debug)]
pub struct StepFourierMatrix {
    modulus: Arc<Modulus>,
    n: usize,
    entries: Vec<i64>,
}

impl StepFourierMatrix {
    pub fn build(modulus: Arc<Modulus>) -> Self {
        let n = modulus.divisor_count();
        let big_m = modulus.value();
        let divs = modulus.divisors();
        let mut entries = vec![0i64; n * n];
        for (ei, &e) in divs.iter().enumerate() {
            for (mi, &m) in divs.iter().enumerate() {
                let k = big_m / m;
                let g = gcd(k, e);
                let mut acc = 0i64;
                for &d in divs.iter().take_while(|&&d| d <= g) {
                    if g % d == 0 {
                        let mu = modulus.mu(k / d).expect("divisor of M") as i64;
                        acc += mu * d as i64;
                    }
                }
                entries[ei * n + mi] = acc;
            }
        }
        StepFourierMatrix {
            modulus,
            n,
            entries,
        }
    }

    /// Process-wide cached matrix for `M`, built on first use.
    pub fn shared(modulus: &Arc<Modulus>) -> Arc<StepFourierMatrix> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<StepFourierMatrix>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().unwrap().get(&modulus.value()) {
            return t.clone();
        }
        let t = Arc::new(StepFourierMatrix::build(modulus.clone()));
        cache
            .lock()
            .unwrap()
            .entry(modulus.value())
            .or_insert(t)
            .clone()
    }

    pub fn modulus(&self) -> &Arc<Modulus> {
        &self.modulus
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Entry by divisor indices (frequency class, spatial class).
    #[inline]
    pub fn at(&self, e: usize, m: usize) -> i64 {
        self.entries[e * self.n + m]
    }

    pub fn row(&self, e: usize) -> &[i64] {
        &self.entries[e * self.n..(e + 1) * self.n]
    }

    /// Entry by divisor values.
    pub fn get(&self, e: u64, m: u64) -> Option<i64> {
        Some(self.at(self.modulus.index_of(e)?, self.modulus.index_of(m)?))
    }
}

pub fn ft_class_matrix(modulus: &Arc<Modulus>) -> Arc<StepFourierMatrix> {
    StepFourierMatrix::shared(modulus)
}

/// `(f^)_e = sum_m c_m T[e, m]`.
pub fn ft_step(f: &StepFunction) -> StepFunction {
    let t = StepFourierMatrix::shared(f.modulus());
    let nonzero: Vec<(usize, &Rational)> = f
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .collect();
    let coeffs = (0..t.size())
        .map(|e| {
            let row = t.row(e);
            let mut acc = Rational::zero();
            for &(m, c) in &nonzero {
                if row[m] != 0 {
                    acc.add_mul(c, &Rational::from(row[m]));
                }
            }
            acc
        })
        .collect();
    StepFunction::new(f.modulus().clone(), coeffs).expect("same divisor count")
}

/// `Some(lambda)` if `f^ = lambda f` exactly.
pub fn eigen_check(f: &StepFunction) -> Result<Option<Rational>> {
    ensure!(!f.is_zero(), "eigenvalue of the zero function is undefined");
    let fhat = ft_step(f);
    let pivot = f
        .coeffs()
        .iter()
        .position(|c| !c.is_zero())
        .expect("nonzero function");
    let lambda = fhat.coeff_at(pivot) / f.coeff_at(pivot);
    let matches = f
        .coeffs()
        .iter()
        .zip(fhat.coeffs())
        .all(|(c, h)| &(c * &lambda) == h);
    Ok(matches.then_some(lambda))
}

/// Divisors `e` for which the transform is nonzero on `R_e`, ascending.
pub fn ft_support(f: &StepFunction) -> Vec<u64> {
    ft_step(f).support()
}
