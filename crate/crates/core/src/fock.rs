//! Integer-N Fock-space model: N independent two-mode squeezed vacua.
//!
//! Each process emits `n` pairs with amplitude `Tⁿ/C` (`T = tanh ξ`,
//! `C = cosh ξ`). The total pair-number distribution, the 2- and 4-photon
//! sector norms and the resulting χ give the two analytic limits χ → 1
//! (one process) and χ → 1/N (many independent processes).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::{two, Real};

pub const DEFAULT_MAX_PAIRS: usize = 6;
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-6;

/// A single two-mode squeezed vacuum truncated at `max_pairs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedProcess<T> {
    pub xi: T,
    pub max_pairs: usize,
}

impl<T: Real> SqueezedProcess<T> {
    pub fn new(xi: T, max_pairs: usize) -> Result<Self> {
        if !(xi >= T::zero()) || !xi.is_finite() {
            return Err(domain(format!("squeezing parameter must be finite and ≥ 0, got {xi}")));
        }
        Ok(Self { xi, max_pairs })
    }

    /// `T = tanh ξ`.
    pub fn t(&self) -> T {
        self.xi.tanh()
    }

    /// `C = cosh ξ`.
    pub fn c(&self) -> T {
        self.xi.cosh()
    }

    /// Amplitude of `|n; n⟩`.
    pub fn amplitude(&self, n: usize) -> T {
        self.t().powi(n as i32) / self.c()
    }

    /// `P(n pairs) = T²ⁿ/C²` for `n = 0..=max_pairs`.
    pub fn probabilities(&self) -> Vec<T> {
        (0..=self.max_pairs).map(|n| self.amplitude(n).powi(2)).collect()
    }

    /// `T^{2(n_max+1)}/(1 − T²)`, an upper bound on the discarded mass.
    pub fn tail_bound(&self) -> T {
        let t2 = self.t() * self.t();
        t2.powi(self.max_pairs as i32 + 1) / (T::one() - t2)
    }
}

/// `N` independent, identical processes sharing one pump pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiProcessState<T> {
    pub processes: usize,
    pub xi: T,
    /// Largest total pair number kept in the table.
    pub max_pairs: usize,
    pub tolerance: T,
}

impl<T: Real> MultiProcessState<T> {
    pub fn new(processes: usize, xi: T) -> Result<Self> {
        if processes == 0 {
            return Err(domain("need at least one process"));
        }
        SqueezedProcess::new(xi, DEFAULT_MAX_PAIRS)?;
        Ok(Self { processes, xi, max_pairs: DEFAULT_MAX_PAIRS, tolerance: T::lit(DEFAULT_TAIL_TOLERANCE) })
    }

    pub fn with_max_pairs(mut self, max_pairs: usize) -> Self {
        self.max_pairs = max_pairs;
        self
    }

    pub fn with_tolerance(mut self, tolerance: T) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn process(&self) -> SqueezedProcess<T> {
        SqueezedProcess { xi: self.xi, max_pairs: self.max_pairs }
    }

    /// Upper bound on `P(total pairs > max_pairs)`.
    ///
    /// The total is negative-binomial; successive tail terms shrink by at
    /// most `q = (m+N)/(m+1)·T²` beyond `m = max_pairs + 1`, so the tail is
    /// bounded by a geometric series.
    pub fn tail_bound(&self) -> T {
        let x = self.xi.tanh().powi(2);
        if x == T::zero() {
            return T::zero();
        }
        let n = T::from_usize_lossy(self.processes);
        let m = self.max_pairs + 1;
        let mut term = (T::one() - x).powf(n);
        for i in 1..=m {
            term = term * (n - T::one() + T::from_usize_lossy(i)) / T::from_usize_lossy(i) * x;
        }
        let q = (T::from_usize_lossy(m) + n) / T::from_usize_lossy(m + 1) * x;
        if q >= T::one() {
            T::one()
        } else {
            (term / (T::one() - q)).min(T::one())
        }
    }
}

/// Truncated total pair-number distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable<T> {
    /// `probabilities[n]` = P(n pairs in total).
    pub probabilities: Vec<T>,
    pub tail_bound: T,
}

impl<T: Real> ProbabilityTable<T> {
    pub fn get(&self, pairs: usize) -> T {
        self.probabilities.get(pairs).copied().unwrap_or(T::zero())
    }

    pub fn total(&self) -> T {
        self.probabilities.iter().copied().sum()
    }

    /// CSV with header `n_pairs,probability`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        w.write_record(["n_pairs", "probability"])?;
        for (n, p) in self.probabilities.iter().enumerate() {
            w.write_record([n.to_string(), p.as_f64().to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Exact truncated distribution of the total number of pairs, by direct
/// convolution of the per-process distributions (all `C` factors kept).
pub fn probabilities<T: Real>(state: &MultiProcessState<T>) -> Result<ProbabilityTable<T>> {
    let tail_bound = state.tail_bound();
    if tail_bound > state.tolerance {
        return Err(Error::Truncation { bound: tail_bound.as_f64(), tolerance: state.tolerance.as_f64() });
    }
    let single = state.process().probabilities();
    let len = state.max_pairs + 1;
    let mut dist = vec![T::zero(); len];
    dist[0] = T::one();
    for _ in 0..state.processes {
        let mut next = vec![T::zero(); len];
        for (a, &pa) in dist.iter().enumerate() {
            if pa == T::zero() {
                continue;
            }
            for (b, &pb) in single.iter().enumerate().take(len - a) {
                next[a + b] = next[a + b] + pa * pb;
            }
        }
        dist = next;
    }
    Ok(ProbabilityTable { probabilities: dist, tail_bound })
}

/// `χ = 2P₄/P₂² − 1` from the exact table, where `P₂` and `P₄` are the
/// one- and two-pair probabilities.
///
/// Relative to the `C = 1` limit `1/N` this carries the finite-gain factor:
/// `χ = C^{2N}(N+1)/N − 1`.
pub fn chi_from_fock<T: Real>(state: &MultiProcessState<T>) -> Result<T> {
    if state.max_pairs < 2 {
        return Err(domain("table must extend to two pairs"));
    }
    let table = probabilities(state)?;
    let p2 = table.get(1);
    let p4 = table.get(2);
    if !(p2 > T::zero()) {
        return Err(Error::Degenerate("P2 = 0: χ undefined (vacuum)".into()));
    }
    Ok(two::<T>() * p4 / (p2 * p2) - T::one())
}

/// Visit every occupation vector `(n_1, …, n_N)` with `Σ n_j = pairs`.
pub fn for_each_pattern<F: FnMut(&[u32])>(processes: usize, pairs: u32, mut visit: F) {
    // recurses only into occupied slots, so the depth is bounded by `pairs`
    fn recurse<F: FnMut(&[u32])>(slots: &mut [u32], start: usize, remaining: u32, visit: &mut F) {
        if remaining == 0 {
            visit(slots);
            return;
        }
        for j in start..slots.len() {
            for k in (1..=remaining).rev() {
                slots[j] = k;
                recurse(slots, j + 1, remaining - k, visit);
            }
            slots[j] = 0;
        }
    }
    if processes == 0 {
        return;
    }
    let mut slots = vec![0u32; processes];
    recurse(&mut slots, 0, pairs, &mut visit);
}

/// Squared norms of the un-normalised 2- and 4-photon sectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorNorms {
    pub two_photon: u64,
    pub four_photon: u64,
}

/// Count the orthogonal, unit-coefficient components of `|2⟩` and `|4⟩`.
pub fn sector_norms(processes: usize) -> Result<SectorNorms> {
    if processes == 0 {
        return Err(domain("need at least one process"));
    }
    let mut two_photon = 0u64;
    for_each_pattern(processes, 1, |_| two_photon += 1);
    let mut four_photon = 0u64;
    for_each_pattern(processes, 2, |_| four_photon += 1);
    Ok(SectorNorms { two_photon, four_photon })
}

/// Split of the normalised four-photon state into the stimulated
/// (`|4 entg⟩`) and independent-pair (`|2 EPR⟩`) sectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourPhotonDecomposition<T> {
    pub weight_entangled: T,
    pub weight_two_pairs: T,
    pub chi_equivalent: T,
}

/// Sector weights for `N` processes from an enumeration of the two-pair
/// patterns: a doubly occupied process is a stimulated component, two singly
/// occupied processes an independent-pair component.
pub fn four_photon_decomposition<T: Real>(processes: u64) -> Result<FourPhotonDecomposition<T>> {
    if processes == 0 {
        return Err(domain("need at least one process"));
    }
    // one doubly occupied slot per process, one singly occupied pair per process pair
    let stimulated = processes;
    let cross = processes.checked_mul(processes - 1).ok_or_else(|| domain("process count too large"))? / 2;
    let total = stimulated + cross;
    let as_t = |v: u64| T::from_u64(v).expect("count representable");
    Ok(FourPhotonDecomposition {
        weight_entangled: as_t(stimulated) / as_t(total),
        weight_two_pairs: as_t(cross) / as_t(total),
        chi_equivalent: T::one() / as_t(processes),
    })
}

fn poisson_pmf<T: Real>(mean: T, len: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(len);
    let mut p = (-mean).exp();
    for n in 0..len {
        out.push(p);
        p = p * mean / T::from_usize_lossy(n + 1);
    }
    out
}

/// Total-variation distance between the exact `N`-process distribution with
/// per-process `T² = μ/N` and Poisson(μ). Mass beyond the table is lumped
/// into one extra bin on both sides.
pub fn poisson_limit_check<T: Real>(processes: usize, mean: T) -> Result<T> {
    if processes < 10 {
        return Err(domain(format!("Poisson limit needs N ≥ 10, got {processes}")));
    }
    if !(mean >= T::zero()) || !mean.is_finite() {
        return Err(domain(format!("mean pair number must be ≥ 0, got {mean}")));
    }
    let x = mean / T::from_usize_lossy(processes);
    if x >= T::one() {
        return Err(domain(format!("per-process T² = μ/N = {x} must be < 1")));
    }
    let xi = x.sqrt().atanh();
    let max_pairs = 12 + (mean + T::lit(10.0) * mean.sqrt()).ceil().to_usize().unwrap_or(0);
    let state = MultiProcessState::new(processes, xi)?.with_max_pairs(max_pairs).with_tolerance(T::one());
    let exact = probabilities(&state)?;
    let poisson = poisson_pmf(mean, max_pairs + 1);
    let mut distance = T::zero();
    for (a, b) in exact.probabilities.iter().zip(&poisson) {
        distance = distance + (*a - *b).abs();
    }
    let tail_exact = (T::one() - exact.total()).max(T::zero());
    let tail_poisson = (T::one() - poisson.iter().copied().sum::<T>()).max(T::zero());
    distance = distance + (tail_exact - tail_poisson).abs();
    Ok(distance / two::<T>())
}

/// JSON summary of a Fock computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockSummary<T> {
    pub chi: T,
    pub tail_bound: T,
    #[serde(rename = "N")]
    pub processes: usize,
    pub xi: T,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_process_amplitudes() {
        let p = SqueezedProcess::new(0.3f64, 6).unwrap();
        let (t, c) = (0.3f64.tanh(), 0.3f64.cosh());
        assert!((p.amplitude(3) - t.powi(3) / c).abs() < 1e-16);
        assert!(p.tail_bound() < 1e-6);
        let total: f64 = p.probabilities().iter().sum();
        assert!(total <= 1.0 && total + p.tail_bound() >= 1.0);
    }

    #[test]
    fn one_pair_probability_small_xi() {
        let state = MultiProcessState::new(1, 0.1f64).unwrap();
        let table = probabilities(&state).unwrap();
        // tanh²(0.1)/cosh²(0.1)
        assert!((table.get(1) - 9.835_030_575_032_565e-3).abs() < 1e-16, "{}", table.get(1));
    }

    #[test]
    fn vacuum() {
        for n in [1, 3, 20] {
            let table = probabilities(&MultiProcessState::new(n, 0.0f64).unwrap()).unwrap();
            assert_eq!(table.get(0), 1.0);
            assert!(table.probabilities[1..].iter().all(|&p| p == 0.0));
            assert_eq!(table.tail_bound, 0.0);
            assert!(matches!(chi_from_fock(&MultiProcessState::new(n, 0.0f64).unwrap()), Err(Error::Degenerate(_))));
        }
    }

    #[test]
    fn truncation_error_reports_bound() {
        let state = MultiProcessState::new(1, 1.5f64).unwrap();
        match probabilities(&state) {
            Err(Error::Truncation { bound, tolerance }) => assert!(bound > tolerance),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_invalid_states() {
        assert!(MultiProcessState::new(0, 0.1f64).is_err());
        assert!(MultiProcessState::new(2, -0.1f64).is_err());
        assert!(sector_norms(0).is_err());
        assert!(four_photon_decomposition::<f64>(0).is_err());
        assert!(poisson_limit_check(5, 0.1f64).is_err());
        assert!(poisson_limit_check(10, 20.0f64).is_err());
    }

    #[test]
    fn small_sector_norms() {
        assert_eq!(sector_norms(1).unwrap(), SectorNorms { two_photon: 1, four_photon: 1 });
        assert_eq!(sector_norms(2).unwrap(), SectorNorms { two_photon: 2, four_photon: 3 });
        assert_eq!(sector_norms(5).unwrap(), SectorNorms { two_photon: 5, four_photon: 15 });
    }

    #[test]
    fn decomposition_examples() {
        let d = four_photon_decomposition::<f64>(1).unwrap();
        assert_eq!((d.weight_entangled, d.weight_two_pairs, d.chi_equivalent), (1.0, 0.0, 1.0));
        let d = four_photon_decomposition::<f64>(3).unwrap();
        assert_eq!((d.weight_entangled, d.weight_two_pairs), (0.5, 0.5));
        assert!((d.chi_equivalent - 1.0 / 3.0).abs() < 1e-16);
        let d = four_photon_decomposition::<f64>(1_000_000).unwrap();
        assert!(d.weight_entangled < 3e-6 && d.weight_two_pairs > 1.0 - 3e-6 && d.chi_equivalent < 2e-6);
    }

    #[test]
    fn decomposition_matches_enumeration() {
        for n in 1..=40usize {
            let (mut stimulated, mut total) = (0u64, 0u64);
            for_each_pattern(n, 2, |slots| {
                total += 1;
                stimulated += slots.contains(&2) as u64;
            });
            let d = four_photon_decomposition::<f64>(n as u64).unwrap();
            assert_eq!(d.weight_entangled, stimulated as f64 / total as f64);
        }
    }

    #[test]
    fn poisson_zero_mean() {
        assert_eq!(poisson_limit_check(50, 0.0f64).unwrap(), 0.0);
    }

    #[test]
    fn csv_table_format() {
        let table = ProbabilityTable { probabilities: vec![0.75, 0.25], tail_bound: 0.0 };
        let mut out = Vec::new();
        table.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "n_pairs,probability\n0,0.75\n1,0.25\n");
    }
}
