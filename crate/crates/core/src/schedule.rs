//! Measurement-time sets and their bitstring encoding.

use std::fmt;

use rand::seq::index;

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// A set of measurement times `M ⊆ {0, …, T}`, stored sorted and without
/// duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MeasurementSchedule {
    horizon: usize,
    times: Vec<usize>,
}

impl MeasurementSchedule {
    /// Builds a schedule from arbitrary-order times. Duplicates and times
    /// beyond the horizon are rejected.
    pub fn new(horizon: usize, mut times: Vec<usize>) -> Result<Self> {
        times.sort_unstable();
        if let Some(&last) = times.last() {
            if last > horizon {
                return Err(Error::InvalidSchedule(format!(
                    "time {last} is outside [0, {horizon}]"
                )));
            }
        }
        if let Some(w) = times.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidSchedule(format!("time {} appears twice", w[0])));
        }
        Ok(MeasurementSchedule { horizon, times })
    }

    pub fn empty(horizon: usize) -> Self {
        MeasurementSchedule {
            horizon,
            times: Vec::new(),
        }
    }

    /// Every time step `0..=horizon`.
    pub fn full(horizon: usize) -> Self {
        MeasurementSchedule {
            horizon,
            times: (0..=horizon).collect(),
        }
    }

    /// Parses the comma-separated form produced by `Display`, e.g. `"0,3,6"`.
    /// Whitespace around entries is ignored; an empty string is the empty
    /// schedule.
    pub fn parse(horizon: usize, text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Self::empty(horizon));
        }
        let times = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidSchedule(format!("bad time {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(horizon, times)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn times(&self) -> &[usize] {
        &self.times
    }

    pub fn cardinality(&self) -> usize {
        self.times.len()
    }

    pub fn contains(&self, t: usize) -> bool {
        self.times.binary_search(&t).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.times.iter().copied()
    }

    pub fn encode(&self) -> ScheduleBits {
        let mut bits = vec![false; self.horizon + 1];
        for &t in &self.times {
            bits[t] = true;
        }
        ScheduleBits { bits }
    }
}

impl fmt::Display for MeasurementSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.times.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Genome view of a schedule: bit `t` is set iff `t ∈ M`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScheduleBits {
    bits: Vec<bool>,
}

impl ScheduleBits {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        assert!(!bits.is_empty(), "a genome covers at least t = 0");
        ScheduleBits { bits }
    }

    /// Parses a string of `0`/`1` characters, `"10100"` meaning `{0, 2}`.
    pub fn from_str_bits(s: &str) -> Self {
        Self::from_bits(
            s.chars()
                .map(|c| match c {
                    '0' => false,
                    '1' => true,
                    other => panic!("not a bit: {other:?}"),
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.bits.len() - 1
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn get(&self, t: usize) -> bool {
        self.bits[t]
    }

    pub fn set(&mut self, t: usize, value: bool) {
        self.bits[t] = value;
    }

    pub fn flip(&mut self, t: usize) {
        self.bits[t] = !self.bits[t];
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn decode(&self) -> MeasurementSchedule {
        MeasurementSchedule {
            horizon: self.horizon(),
            times: self
                .bits
                .iter()
                .enumerate()
                .filter_map(|(t, &b)| b.then_some(t))
                .collect(),
        }
    }
}

impl fmt::Display for ScheduleBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Equally spaced times `{ round(kT/(N−1)) : k = 0…N−1 }`, rounding half away
/// from zero.
///
/// Fails when rounding maps two `k` to the same time, since callers rely on
/// `|M| = N` exactly.
pub fn regular_schedule(horizon: usize, budget: usize) -> Result<MeasurementSchedule> {
    if budget < 2 {
        return Err(Error::InvalidParameter(format!(
            "regular schedule needs N >= 2, got {budget}"
        )));
    }
    if budget > horizon + 1 {
        return Err(Error::InvalidParameter(format!(
            "N = {budget} exceeds T + 1 = {}",
            horizon + 1
        )));
    }
    let denom = budget - 1;
    // round(kT/d) for non-negative operands, in exact integer arithmetic
    let mut times: Vec<usize> = (0..budget)
        .map(|k| (2 * k * horizon + denom) / (2 * denom))
        .collect();
    times.dedup();
    if times.len() != budget {
        return Err(Error::RegularCollision {
            horizon,
            budget,
            distinct: times.len(),
        });
    }
    Ok(MeasurementSchedule { horizon, times })
}

/// Uniform draw over all `C(T+1, N)` subsets of size `N`.
///
/// # Panics
/// If `N > T + 1`.
pub fn random_schedule(horizon: usize, budget: usize, rng: &mut SimRng) -> MeasurementSchedule {
    assert!(
        budget <= horizon + 1,
        "N = {budget} exceeds T + 1 = {}",
        horizon + 1
    );
    let mut times = index::sample(rng, horizon + 1, budget).into_vec();
    times.sort_unstable();
    MeasurementSchedule { horizon, times }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    #[test]
    fn regular_benchmark_instance_has_step_three() {
        let m = regular_schedule(60, 21).unwrap();
        assert_eq!(m.times(), (0..=60).step_by(3).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn regular_small_cases() {
        assert_eq!(regular_schedule(10, 3).unwrap().times(), &[0, 5, 10]);
        // 7/2 = 3.5 rounds up
        assert_eq!(regular_schedule(7, 3).unwrap().times(), &[0, 4, 7]);
        assert_eq!(regular_schedule(1, 2).unwrap().times(), &[0, 1]);
    }

    #[test]
    fn regular_rejects_bad_budgets() {
        assert!(matches!(regular_schedule(10, 1), Err(Error::InvalidParameter(_))));
        assert!(matches!(regular_schedule(10, 12), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn regular_always_contains_endpoints() {
        for horizon in 1..80 {
            for budget in 2..=horizon + 1 {
                if let Ok(m) = regular_schedule(horizon, budget) {
                    assert!(m.contains(0) && m.contains(horizon));
                    assert_eq!(m.cardinality(), budget);
                }
            }
        }
    }

    #[test]
    fn random_schedule_trivial_space() {
        let mut rng = seeded(1);
        for _ in 0..20 {
            assert_eq!(random_schedule(1, 2, &mut rng).times(), &[0, 1]);
        }
    }

    #[test]
    fn random_schedule_marginals_are_uniform() {
        let mut rng = seeded(2);
        let draws = 100_000;
        let mut counts = [0usize; 61];
        for _ in 0..draws {
            let m = random_schedule(60, 21, &mut rng);
            assert_eq!(m.cardinality(), 21);
            for t in m.iter() {
                counts[t] += 1;
            }
        }
        let expected = 21.0 / 61.0;
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - expected).abs() < 0.01, "{freq} vs {expected}");
        }
    }

    #[test]
    #[should_panic]
    fn random_schedule_rejects_oversized_budget() {
        random_schedule(3, 5, &mut seeded(0));
    }

    #[test]
    fn encode_examples() {
        let m = MeasurementSchedule::new(4, vec![2, 0]).unwrap();
        assert_eq!(m.encode().to_string(), "10100");
        assert_eq!(MeasurementSchedule::empty(4).encode().to_string(), "00000");
        assert_eq!(ScheduleBits::from_str_bits("10100").decode(), m);
    }

    #[test]
    fn construction_errors() {
        assert!(MeasurementSchedule::new(4, vec![5]).is_err());
        assert!(MeasurementSchedule::new(4, vec![1, 1]).is_err());
        assert!(MeasurementSchedule::parse(4, "0,x").is_err());
    }

    #[test]
    fn text_form_round_trips() {
        let m = regular_schedule(60, 21).unwrap();
        let text = m.to_string();
        assert!(text.starts_with("0,3,6,"));
        assert_eq!(MeasurementSchedule::parse(60, &text).unwrap(), m);
        assert_eq!(MeasurementSchedule::parse(60, " 6, 0 ,3").unwrap().to_string(), "0,3,6");
        assert_eq!(MeasurementSchedule::parse(5, "").unwrap().cardinality(), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn encode_decode_is_bijective(bits in proptest::collection::vec(any::<bool>(), 1..100)) {
            let genome = ScheduleBits::from_bits(bits);
            let schedule = genome.decode();
            prop_assert_eq!(schedule.cardinality(), genome.popcount());
            prop_assert_eq!(schedule.encode(), genome);
        }
    }
}
