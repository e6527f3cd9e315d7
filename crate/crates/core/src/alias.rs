//! Vose's alias method: O(M) construction, O(1) draws.

use rand::Rng;

use crate::error::{Error, Result};

/// Inputs must sum to 1 within this tolerance.
pub const SUM_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct AliasTable {
    /// Acceptance threshold of each bucket, in `[0, 1]`.
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    pub fn new(probabilities: &[f64]) -> Result<Self> {
        let n = probabilities.len();
        if n == 0 {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidDistribution("too many outcomes".into()));
        }
        if let Some(p) = probabilities.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("invalid probability {p}")));
        }
        let total: f64 = probabilities.iter().sum();
        if total == 0.0 {
            return Err(Error::InvalidDistribution("probabilities sum to zero".into()));
        }
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }

        let scale = n as f64 / total;
        let mut scaled: Vec<f64> = probabilities.iter().map(|p| p * scale).collect();
        let mut prob = vec![1.0; n];
        let mut alias: Vec<u32> = (0..n as u32).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            prob[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // leftovers are 1 up to rounding
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
            alias[i] = i as u32;
        }
        Ok(Self { prob, alias })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    /// 0-based outcome.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.prob.len());
        let u: f64 = rng.random();
        if u < self.prob[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }

    /// The distribution encoded by the tables.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.prob.len() as f64;
        let mut p = vec![0.0; self.prob.len()];
        for (i, (&keep, &a)) in self.prob.iter().zip(&self.alias).enumerate() {
            p[i] += keep / n;
            p[a as usize] += (1.0 - keep) / n;
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngState;

    #[test]
    fn point_mass() {
        let t = AliasTable::new(&[1.0]).unwrap();
        let mut rng = RngState::new(1, 0).rng();
        assert!((0..100).all(|_| t.draw(&mut rng) == 0));
    }

    #[test]
    fn reconstruction() {
        let p = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
        let q = AliasTable::new(&p).unwrap().probabilities();
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_entries_never_drawn() {
        let t = AliasTable::new(&[0.0, 0.25, 0.0, 0.75]).unwrap();
        let mut rng = RngState::new(2, 0).rng();
        for _ in 0..10_000 {
            let i = t.draw(&mut rng);
            assert!(i == 1 || i == 3);
        }
    }

    #[test]
    fn fair_coin_frequencies() {
        let t = AliasTable::new(&[0.5, 0.5]).unwrap();
        let mut rng = RngState::new(3, 0).rng();
        let n = 1_000_000;
        let ones = (0..n).filter(|_| t.draw(&mut rng) == 1).count() as f64;
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((ones - n as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(AliasTable::new(&[]).is_err());
        assert!(AliasTable::new(&[0.0, 0.0]).is_err());
        assert!(AliasTable::new(&[1.5, -0.5]).is_err());
        assert!(AliasTable::new(&[0.5, 0.4]).is_err());
        assert!(AliasTable::new(&[f64::NAN, 1.0]).is_err());
    }
}
