//! Number-theoretic tables for a modulus `M`: factorization, the divisor
//! lattice, Euler's totient and the Möbius function on divisors.
//!
//! Every divisor-indexed vector in this crate uses the ascending divisor
//! order exposed by [`Modulus::divisors`].

use std::collections::HashMap;
use std::fmt;

use crate::error::{ensure, Result};

/// Largest modulus accepted. Factorization is by trial division, and dense
/// functions allocate `M` values, so anything beyond desk scale is refused.
pub const MAX_MODULUS: u64 = 1_000_000_000;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Trial-division factorization; primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// If `n` is a prime power `p^a` with `a >= 1`, returns `(p, a)`.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    match factorize(n).as_slice() {
        [(p, a)] => Some((*p, *a)),
        _ => None,
    }
}

#[derive(Clone)]
pub struct Modulus {
    m: u64,
    factors: Vec<(u64, u32)>,
    divisors: Vec<u64>,
    phi: Vec<u64>,
    mu: Vec<i8>,
    index: HashMap<u64, usize>,
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Modulus({})", self.m)
    }
}

impl PartialEq for Modulus {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m
    }
}

impl Eq for Modulus {}

impl Modulus {
    pub fn new(m: u64) -> Result<Self> {
        ensure!(m >= 2, "modulus must be at least 2, got {m}");
        ensure!(
            m <= MAX_MODULUS,
            "modulus {m} exceeds the supported bound {MAX_MODULUS}"
        );
        let factors = factorize(m);

        // Divisors with their (phi, mu), built prime by prime.
        let mut table: Vec<(u64, u64, i8)> = vec![(1, 1, 1)];
        for &(p, e) in &factors {
            let mut next = Vec::with_capacity(table.len() * (e as usize + 1));
            for &(d, ph, mu) in &table {
                next.push((d, ph, mu));
                let mut pk = 1;
                for k in 1..=e {
                    pk *= p;
                    let ph_pk = pk - pk / p;
                    let mu_pk = if k == 1 { -mu } else { 0 };
                    next.push((d * pk, ph * ph_pk, mu_pk));
                }
            }
            table = next;
        }
        table.sort_unstable_by_key(|t| t.0);

        let divisors: Vec<u64> = table.iter().map(|t| t.0).collect();
        let index = divisors.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        Ok(Modulus {
            m,
            factors,
            phi: table.iter().map(|t| t.1).collect(),
            mu: table.iter().map(|t| t.2).collect(),
            divisors,
            index,
        })
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.m
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|f| f.0)
    }

    /// All divisors, ascending.
    pub fn divisors(&self) -> &[u64] {
        &self.divisors
    }

    pub fn divisor_count(&self) -> usize {
        self.divisors.len()
    }

    pub fn index_of(&self, d: u64) -> Option<usize> {
        self.index.get(&d).copied()
    }

    /// Index of `M` itself (the class of 0); always the last one.
    pub fn top_index(&self) -> usize {
        self.divisors.len() - 1
    }

    pub fn divides(&self, d: u64) -> bool {
        d != 0 && self.m % d == 0
    }

    /// Euler's totient of a divisor.
    pub fn phi(&self, d: u64) -> Option<u64> {
        self.index_of(d).map(|i| self.phi[i])
    }

    pub fn phi_at(&self, i: usize) -> u64 {
        self.phi[i]
    }

    pub fn mu(&self, d: u64) -> Option<i8> {
        self.index_of(d).map(|i| self.mu[i])
    }

    pub fn mu_at(&self, i: usize) -> i8 {
        self.mu[i]
    }

    /// `|R_m| = phi(M/m)` for the divisor at index `i`.
    pub fn class_size_at(&self, i: usize) -> u64 {
        self.phi[self.divisors.len() - 1 - i]
    }

    /// The step class containing `z`, i.e. `gcd(z, M)`; the class of 0 is `M`.
    #[inline]
    pub fn class_of(&self, z: u64) -> u64 {
        gcd(z % self.m, self.m)
    }

    pub fn class_index_of(&self, z: u64) -> usize {
        self.index[&self.class_of(z)]
    }

    /// Per-residue class index, `0..M`. Allocates `M` entries.
    pub fn class_index_table(&self) -> Vec<u32> {
        (0..self.m).map(|z| self.class_index_of(z) as u32).collect()
    }

    /// Prime-power divisors `p^a > 1` of `M`, ascending.
    pub fn prime_power_divisors(&self) -> Vec<u64> {
        let mut out: Vec<u64> = self
            .factors
            .iter()
            .flat_map(|&(p, e)| (1..=e).map(move |k| p.pow(k)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Number of distinct primes dividing `M`.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }
}
