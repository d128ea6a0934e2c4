//! Rational-valued functions on `Z_M`: dense functions (one value per
//! residue) and step functions (one value per step class `R_m`).

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::de::Deserializer;
use serde::ser::{SerializeMap, SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::rational::Rational;
use crate::zm_arith::Modulus;

#[derive(Clone, PartialEq, Eq)]
pub struct DenseFunction {
    modulus: Arc<Modulus>,
    values: Vec<Rational>,
}

impl fmt::Debug for DenseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DenseFunction(M={}, {:?})",
            self.modulus.value(),
            self.values
        )
    }
}

impl DenseFunction {
    pub fn new(modulus: Arc<Modulus>, values: Vec<Rational>) -> Result<Self> {
        ensure!(
            values.len() as u64 == modulus.value(),
            "expected {} values, got {}",
            modulus.value(),
            values.len()
        );
        Ok(DenseFunction { modulus, values })
    }

    pub fn zero(modulus: Arc<Modulus>) -> Self {
        let values = vec![Rational::zero(); modulus.value() as usize];
        DenseFunction { modulus, values }
    }

    /// Indicator of a set of residues (reduced mod `M`).
    pub fn indicator(modulus: Arc<Modulus>, elements: &[u64]) -> Self {
        let mut f = Self::zero(modulus);
        let m = f.modulus.value();
        for &a in elements {
            f.values[(a % m) as usize] = Rational::one();
        }
        f
    }

    pub fn delta(modulus: Arc<Modulus>, a: u64) -> Self {
        Self::indicator(modulus, &[a])
    }

    pub fn modulus(&self) -> &Arc<Modulus> {
        &self.modulus
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, z: u64) -> &Rational {
        &self.values[(z % self.modulus.value()) as usize]
    }

    pub fn total_weight(&self) -> Rational {
        self.values.iter().sum()
    }

    /// True if the function is constant on every step class.
    pub fn is_step(&self) -> bool {
        let mut seen: HashMap<usize, &Rational> = HashMap::new();
        for (z, v) in self.values.iter().enumerate() {
            let c = self.modulus.class_index_of(z as u64);
            if let Some(prev) = seen.insert(c, v) {
                if prev != v {
                    return false;
                }
            }
        }
        true
    }

    pub fn reflect(&self) -> DenseFunction {
        let m = self.values.len();
        let values = (0..m).map(|z| self.values[(m - z) % m].clone()).collect();
        DenseFunction {
            modulus: self.modulus.clone(),
            values,
        }
    }

    pub fn is_integral(&self) -> bool {
        self.values.iter().all(Rational::is_integer)
    }
}

/// A function constant on every step class, stored as one coefficient per
/// divisor in ascending divisor order.
#[derive(Clone, PartialEq, Eq)]
pub struct StepFunction {
    modulus: Arc<Modulus>,
    coeffs: Vec<Rational>,
}

impl fmt::Debug for StepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("StepFunction{")?;
        for (i, (d, c)) in self.modulus.divisors().iter().zip(&self.coeffs).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{d}: {c}")?;
        }
        f.write_str("}")
    }
}

impl StepFunction {
    pub fn new(modulus: Arc<Modulus>, coeffs: Vec<Rational>) -> Result<Self> {
        ensure!(
            coeffs.len() == modulus.divisor_count(),
            "expected {} coefficients, got {}",
            modulus.divisor_count(),
            coeffs.len()
        );
        Ok(StepFunction { modulus, coeffs })
    }

    /// Coefficients by divisor; unlisted classes are zero.
    pub fn from_pairs(modulus: Arc<Modulus>, pairs: &[(u64, Rational)]) -> Result<Self> {
        let mut f = Self::zero(modulus);
        for (m, c) in pairs {
            let i = f.modulus.index_of(*m).ok_or_else(|| {
                Error::invalid(format!("{m} does not divide {}", f.modulus.value()))
            })?;
            f.coeffs[i] = c.clone();
        }
        Ok(f)
    }

    pub fn zero(modulus: Arc<Modulus>) -> Self {
        let coeffs = vec![Rational::zero(); modulus.divisor_count()];
        StepFunction { modulus, coeffs }
    }

    /// The indicator of `{0}`.
    pub fn delta0(modulus: Arc<Modulus>) -> Self {
        let mut f = Self::zero(modulus);
        let top = f.modulus.top_index();
        f.coeffs[top] = Rational::one();
        f
    }

    pub fn constant(modulus: Arc<Modulus>, value: Rational) -> Self {
        let coeffs = vec![value; modulus.divisor_count()];
        StepFunction { modulus, coeffs }
    }

    pub fn modulus(&self) -> &Arc<Modulus> {
        &self.modulus
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff_at(&self, i: usize) -> &Rational {
        &self.coeffs[i]
    }

    /// Coefficient of the class `R_m`.
    pub fn coeff(&self, m: u64) -> Option<&Rational> {
        self.modulus.index_of(m).map(|i| &self.coeffs[i])
    }

    /// Value at a residue.
    pub fn value(&self, z: u64) -> &Rational {
        &self.coeffs[self.modulus.class_index_of(z)]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    /// `sum_m c_m * phi(M/m)`.
    pub fn total_weight(&self) -> Rational {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| c * Rational::from(self.modulus.class_size_at(i)))
            .sum()
    }

    /// Divisors whose class carries a nonzero value, ascending.
    pub fn support(&self) -> Vec<u64> {
        self.modulus
            .divisors()
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| !c.is_zero())
            .map(|(d, _)| *d)
            .collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    pub fn scaled(&self, k: &Rational) -> StepFunction {
        StepFunction {
            modulus: self.modulus.clone(),
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    pub fn to_dense(&self) -> DenseFunction {
        let values = (0..self.modulus.value())
            .map(|z| self.value(z).clone())
            .collect();
        DenseFunction {
            modulus: self.modulus.clone(),
            values,
        }
    }
}

/// Either representation, for operations defined on both.
#[derive(Clone, Copy, Debug)]
pub enum FunctionRef<'a> {
    Step(&'a StepFunction),
    Dense(&'a DenseFunction),
}

impl<'a> From<&'a StepFunction> for FunctionRef<'a> {
    fn from(f: &'a StepFunction) -> Self {
        FunctionRef::Step(f)
    }
}

impl<'a> From<&'a DenseFunction> for FunctionRef<'a> {
    fn from(f: &'a DenseFunction) -> Self {
        FunctionRef::Dense(f)
    }
}

impl FunctionRef<'_> {
    pub fn modulus(&self) -> &Arc<Modulus> {
        match self {
            FunctionRef::Step(f) => f.modulus(),
            FunctionRef::Dense(f) => f.modulus(),
        }
    }

    pub fn value(&self, z: u64) -> &Rational {
        match self {
            FunctionRef::Step(f) => f.value(z),
            FunctionRef::Dense(f) => f.value(z),
        }
    }

    pub fn total_weight(&self) -> Rational {
        match self {
            FunctionRef::Step(f) => f.total_weight(),
            FunctionRef::Dense(f) => f.total_weight(),
        }
    }
}

/// Class means: `c_m = (1/|R_m|) sum_{z in R_m} f(z)`.
///
/// This equals averaging `f(rz)` over all units `r`, since the unit orbit
/// of `z` is exactly its step class.
pub fn average_to_step(f: &DenseFunction) -> StepFunction {
    let modulus = f.modulus.clone();
    let mut sums = vec![Rational::zero(); modulus.divisor_count()];
    for (z, v) in f.values.iter().enumerate() {
        if !v.is_zero() {
            sums[modulus.class_index_of(z as u64)] += v;
        }
    }
    let coeffs = sums
        .into_iter()
        .enumerate()
        .map(|(i, s)| s / Rational::from(modulus.class_size_at(i)))
        .collect();
    StepFunction { modulus, coeffs }
}

/// `h_A`: the class average of `(1/|A|) 1_A * 1_{-A}`.
pub fn autocorrelation_step(modulus: &Arc<Modulus>, set: &[u64]) -> Result<StepFunction> {
    ensure!(!set.is_empty(), "autocorrelation of an empty set");
    let m = modulus.value();
    ensure!(set.iter().any(|&a| a % m == 0), "set must contain 0");
    let mut elems: Vec<u64> = set.iter().map(|a| a % m).collect();
    elems.sort_unstable();
    elems.dedup();

    // Difference counts aggregated straight into classes.
    let mut class_counts = vec![0u64; modulus.divisor_count()];
    for &a in &elems {
        for &b in &elems {
            class_counts[modulus.class_index_of((a + m - b) % m)] += 1;
        }
    }
    let n = elems.len() as i64;
    let coeffs = class_counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            if c == 0 {
                Rational::zero()
            } else {
                Rational::new(c as i64, n * modulus.class_size_at(i) as i64)
            }
        })
        .collect();
    Ok(StepFunction {
        modulus: modulus.clone(),
        coeffs,
    })
}

/// `f_N(z) = sum over y = z (mod N) of f(y)`, a function on `Z_N`.
pub fn fold(f: &DenseFunction, n: u64) -> Result<DenseFunction> {
    let m = f.modulus.value();
    ensure!(
        n >= 2 && m % n == 0,
        "fold target {n} must be a divisor of {m} greater than 1"
    );
    let target = Arc::new(Modulus::new(n)?);
    let mut values = vec![Rational::zero(); n as usize];
    for (y, v) in f.values.iter().enumerate() {
        if !v.is_zero() {
            values[y % n as usize] += v;
        }
    }
    Ok(DenseFunction {
        modulus: target,
        values,
    })
}

/// Folding a step function: the result is again a step function on `Z_N`,
/// computed class by class without materializing `M` values.
pub fn fold_step(f: &StepFunction, n: u64) -> Result<StepFunction> {
    let m = f.modulus.value();
    ensure!(
        n >= 2 && m % n == 0,
        "fold target {n} must be a divisor of {m} greater than 1"
    );
    let target = Arc::new(Modulus::new(n)?);
    let lifts = m / n;
    let coeffs = target
        .divisors()
        .iter()
        .map(|&r| {
            (0..lifts)
                .map(|k| f.value(r % n + k * n))
                .filter(|v| !v.is_zero())
                .sum()
        })
        .collect();
    Ok(StepFunction {
        modulus: target,
        coeffs,
    })
}

/// Cyclic convolution `(f*g)(x) = sum_y f(y) g(x-y)`.
pub fn convolve(f: &DenseFunction, g: &DenseFunction) -> Result<DenseFunction> {
    ensure!(
        f.modulus.value() == g.modulus.value(),
        "modulus mismatch: {} vs {}",
        f.modulus.value(),
        g.modulus.value()
    );
    let m = f.values.len();
    let mut out = vec![Rational::zero(); m];
    for (y, fy) in f.values.iter().enumerate() {
        if fy.is_zero() {
            continue;
        }
        for (t, gt) in g.values.iter().enumerate() {
            if !gt.is_zero() {
                out[(y + t) % m].add_mul(fy, gt);
            }
        }
    }
    Ok(DenseFunction {
        modulus: f.modulus.clone(),
        values: out,
    })
}

/// Convolution of step functions, evaluated directly at one representative
/// per class: `O(M tau(M))` instead of `O(M^2)`.
pub fn convolve_step(f: &StepFunction, g: &StepFunction) -> Result<StepFunction> {
    ensure!(
        f.modulus.value() == g.modulus.value(),
        "modulus mismatch: {} vs {}",
        f.modulus.value(),
        g.modulus.value()
    );
    let modulus = f.modulus.clone();
    let m = modulus.value();
    let classes = modulus.class_index_table();
    let coeffs = modulus
        .divisors()
        .iter()
        .map(|&x| {
            let mut acc = Rational::zero();
            for y in 0..m {
                let fy = &f.coeffs[classes[y as usize] as usize];
                if fy.is_zero() {
                    continue;
                }
                let gy = &g.coeffs[classes[((x % m + m - y) % m) as usize] as usize];
                if !gy.is_zero() {
                    acc.add_mul(fy, gy);
                }
            }
            acc
        })
        .collect();
    Ok(StepFunction { modulus, coeffs })
}

impl Serialize for StepFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        struct Coeffs<'a>(&'a StepFunction);
        impl Serialize for Coeffs<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let f = self.0;
                let mut map = serializer.serialize_map(Some(f.coeffs.len()))?;
                for (d, c) in f.modulus.divisors().iter().zip(&f.coeffs) {
                    map.serialize_entry(&d.to_string(), &c.to_fraction_string())?;
                }
                map.end()
            }
        }
        let mut s = serializer.serialize_struct("StepFunction", 2)?;
        s.serialize_field("M", &self.modulus.value())?;
        s.serialize_field("coeffs", &Coeffs(self))?;
        s.end()
    }
}

#[derive(Deserialize)]
struct StepFunctionJson {
    #[serde(rename = "M")]
    m: u64,
    coeffs: HashMap<String, Rational>,
}

impl<'de> Deserialize<'de> for StepFunction {
    /// Missing divisors read as zero.
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = StepFunctionJson::deserialize(deserializer)?;
        let modulus = Arc::new(Modulus::new(raw.m).map_err(serde::de::Error::custom)?);
        let mut pairs = Vec::with_capacity(raw.coeffs.len());
        for (k, v) in raw.coeffs {
            let d: u64 = k
                .trim()
                .parse()
                .map_err(|_| serde::de::Error::custom(format!("bad divisor key {k:?}")))?;
            pairs.push((d, v));
        }
        StepFunction::from_pairs(modulus, &pairs).map_err(serde::de::Error::custom)
    }
}

impl Serialize for DenseFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("DenseFunction", 2)?;
        s.serialize_field("M", &self.modulus.value())?;
        s.serialize_field("values", &self.values)?;
        s.end()
    }
}

#[derive(Deserialize)]
struct DenseFunctionJson {
    #[serde(rename = "M")]
    m: u64,
    values: Vec<Rational>,
}

impl<'de> Deserialize<'de> for DenseFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = DenseFunctionJson::deserialize(deserializer)?;
        let modulus = Arc::new(Modulus::new(raw.m).map_err(serde::de::Error::custom)?);
        DenseFunction::new(modulus, raw.values).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn z(m: u64) -> Arc<Modulus> {
        Arc::new(Modulus::new(m).unwrap())
    }

    fn dense(m: &Arc<Modulus>, vals: &[i64]) -> DenseFunction {
        DenseFunction::new(m.clone(), vals.iter().map(|&v| Rational::from(v)).collect()).unwrap()
    }

    // Coefficients of a step function on Z_4 in divisor order (1, 2, 4).
    fn c4(f: &StepFunction) -> [Rational; 3] {
        [
            f.coeff(4).unwrap().clone(),
            f.coeff(2).unwrap().clone(),
            f.coeff(1).unwrap().clone(),
        ]
    }

    #[test]
    fn average_examples() {
        let m = z(4);
        let h = average_to_step(&dense(&m, &[1, 3, 0, 5]));
        assert_eq!(c4(&h), [q(1, 1), q(0, 1), q(4, 1)]);

        // (1/2) 1_{0,2} * 1_{0,-2}: 0 -> 2/2, 2 -> 2/2.
        let a = DenseFunction::indicator(m.clone(), &[0, 2]);
        let auto = convolve(&a, &a.reflect()).unwrap();
        let half = DenseFunction::new(
            m.clone(),
            auto.values().iter().map(|v| v * q(1, 2)).collect(),
        )
        .unwrap();
        assert_eq!(c4(&average_to_step(&half)), [q(1, 1), q(1, 1), q(0, 1)]);
    }

    #[test]
    fn autocorrelation_examples() {
        let m = z(4);
        assert_eq!(
            c4(&autocorrelation_step(&m, &[0]).unwrap()),
            [q(1, 1), q(0, 1), q(0, 1)]
        );
        let full = autocorrelation_step(&m, &[0, 1, 2, 3]).unwrap();
        assert_eq!(full, StepFunction::constant(m.clone(), q(1, 1)));
        assert_eq!(
            c4(&autocorrelation_step(&m, &[0, 1]).unwrap()),
            [q(1, 1), q(0, 1), q(1, 2)]
        );
        assert!(autocorrelation_step(&m, &[]).is_err());
        assert!(autocorrelation_step(&m, &[1, 2]).is_err());
    }

    #[test]
    fn autocorrelation_matches_dense_route() {
        let m = z(12);
        let set = [0u64, 1, 5, 6];
        let a = DenseFunction::indicator(m.clone(), &set);
        let auto = convolve(&a, &a.reflect()).unwrap();
        let scaled = DenseFunction::new(
            m.clone(),
            auto.values().iter().map(|v| v * q(1, 4)).collect(),
        )
        .unwrap();
        assert_eq!(
            average_to_step(&scaled),
            autocorrelation_step(&m, &set).unwrap()
        );
    }

    #[test]
    fn fold_examples() {
        let m = z(12);
        let ones = DenseFunction::new(m.clone(), vec![Rational::one(); 12]).unwrap();
        assert_eq!(fold(&ones, 4).unwrap().values(), &vec![q(3, 1); 4][..]);
        let d5 = DenseFunction::delta(m.clone(), 5);
        assert_eq!(fold(&d5, 4).unwrap(), DenseFunction::delta(z(4), 1));
        assert!(fold(&d5, 5).is_err());
        assert!(fold(&d5, 1).is_err());
    }

    #[test]
    fn convolve_examples() {
        let m = z(4);
        let a = DenseFunction::indicator(m.clone(), &[0, 1]);
        let b = DenseFunction::indicator(m.clone(), &[0, 2]);
        assert_eq!(convolve(&a, &b).unwrap().values(), &vec![q(1, 1); 4][..]);
        let d = convolve(
            &DenseFunction::delta(m.clone(), 3),
            &DenseFunction::delta(m.clone(), 2),
        );
        assert_eq!(d.unwrap(), DenseFunction::delta(m, 1));
        assert!(convolve(&a, &DenseFunction::zero(z(6))).is_err());
    }

    #[test]
    fn weights() {
        let m = z(30);
        assert_eq!(
            StepFunction::constant(m.clone(), q(1, 1)).total_weight(),
            q(30, 1)
        );
        assert_eq!(
            DenseFunction::indicator(m, &[0, 4, 7]).total_weight(),
            q(3, 1)
        );
    }

    #[test]
    fn json_round_trip_and_order() {
        let m = z(12);
        let f = StepFunction::from_pairs(m, &[(12, q(1, 1)), (2, q(-3, 7))]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert!(
            s.starts_with(r#"{"M":12,"coeffs":{"1":"0/1","2":"-3/7","3":"0/1""#),
            "{s}"
        );
        let back: StepFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    fn arb_step(m: Arc<Modulus>) -> impl Strategy<Value = StepFunction> {
        let n = m.divisor_count();
        proptest::collection::vec((-5i64..6, 1i64..5), n).prop_map(move |v| {
            StepFunction::new(m.clone(), v.into_iter().map(|(a, b)| q(a, b)).collect()).unwrap()
        })
    }

    fn arb_dense(m: Arc<Modulus>) -> impl Strategy<Value = DenseFunction> {
        let n = m.value() as usize;
        proptest::collection::vec((-4i64..5, 1i64..4), n).prop_map(move |v| {
            DenseFunction::new(m.clone(), v.into_iter().map(|(a, b)| q(a, b)).collect()).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn averaging_is_idempotent(f in arb_step(z(72))) {
            prop_assert_eq!(average_to_step(&f.to_dense()), f);
        }

        #[test]
        fn fold_of_step_is_step(
            (n, f) in prop::sample::select(vec![(900u64, 30u64), (900, 36), (360, 12), (144, 48), (900, 900)])
                .prop_flat_map(|(m, n)| (Just(n), arb_step(z(m)))),
        ) {
            let dense_fold = fold(&f.to_dense(), n).unwrap();
            prop_assert!(dense_fold.is_step());
            prop_assert_eq!(dense_fold.total_weight(), f.total_weight());
            prop_assert_eq!(fold_step(&f, n).unwrap().to_dense(), dense_fold);
        }

        #[test]
        fn convolution_commutes_and_weights_multiply(
            f in arb_dense(z(18)),
            g in arb_dense(z(18)),
        ) {
            let fg = convolve(&f, &g).unwrap();
            prop_assert_eq!(&fg, &convolve(&g, &f).unwrap());
            prop_assert_eq!(fg.total_weight(), f.total_weight() * g.total_weight());
        }

        #[test]
        fn step_convolution_matches_dense(f in arb_step(z(36)), g in arb_step(z(36))) {
            let direct = convolve_step(&f, &g).unwrap();
            prop_assert_eq!(direct.to_dense(), convolve(&f.to_dense(), &g.to_dense()).unwrap());
        }
    }
}
