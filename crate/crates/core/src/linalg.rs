//! Banded LU factorisation without pivoting.
//!
//! The profile BVP matrices have one super-diagonal and a long lower band
//! from the delayed terms. Without pivoting the factors keep the band shape,
//! so elimination costs `O(n kl ku)`.

use crate::error::{Error, Result};

/// Square band matrix stored row by row, `kl + ku + 1` slots per row.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, data: vec![0.0; n * (kl + ku + 1)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n || j + self.kl < i || i + self.ku < j {
            return None;
        }
        Some(i * (self.kl + self.ku + 1) + (j + self.kl - i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Adds `v` to entry `(i, j)`; panics if it lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j).unwrap_or_else(|| panic!("entry ({i}, {j}) outside the band"));
        self.data[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j).unwrap_or_else(|| panic!("entry ({i}, {j}) outside the band"));
        self.data[k] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Doolittle factorisation in place. Fails when a pivot is tiny
    /// relative to the largest entry of its row.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let mut min_ratio = f64::INFINITY;
        for k in 0..n {
            let row_scale = (k.saturating_sub(self.kl)..=(k + self.ku).min(n - 1))
                .map(|j| self.get(k, j).abs())
                .fold(0.0, f64::max);
            let pivot = self.get(k, k);
            let ratio = if row_scale > 0.0 { pivot.abs() / row_scale } else { 0.0 };
            min_ratio = min_ratio.min(ratio);
            if !(ratio > 1e-13) {
                return Err(Error::Singular(format!("pivot {pivot:e} at row {k} (row scale {row_scale:e})")));
            }
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + self.ku).min(n - 1);
            for i in k + 1..=last_row {
                let lik = self.get(i, k) / pivot;
                if lik == 0.0 {
                    continue;
                }
                self.set(i, k, lik);
                for j in k + 1..=last_col {
                    let ukj = self.get(k, j);
                    self.add(i, j, -lik * ukj);
                }
            }
        }
        Ok(BandLu { lu: self, min_pivot_ratio: min_ratio })
    }
}

/// Packed `L U` factors of a [`BandMatrix`].
#[derive(Debug, Clone)]
pub struct BandLu {
    lu: BandMatrix,
    /// Smallest `|pivot| / max|row entry|` met during elimination.
    pub min_pivot_ratio: f64,
}

impl BandLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let a = &self.lu;
        let n = a.n;
        assert_eq!(rhs.len(), n, "right-hand side length");
        let mut x = rhs.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(a.kl);
            let s: f64 = (lo..i).map(|j| a.get(i, j) * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let hi = (i + a.ku).min(n - 1);
            let s: f64 = (i + 1..=hi).map(|j| a.get(i, j) * x[j]).sum();
            x[i] = (x[i] - s) / a.get(i, i);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_random_dominant_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(n, kl, ku) in &[(1, 0, 0), (5, 2, 1), (40, 7, 1), (60, 3, 4), (30, 29, 29)] {
            let mut a = BandMatrix::zeros(n, kl, ku);
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    a.set(i, j, rng.gen_range(-1.0..1.0));
                }
                a.add(i, i, (kl + ku + 2) as f64);
            }
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let rhs = a.mul_vec(&x);
            let lu = a.factor().unwrap();
            let y = lu.solve(&rhs);
            for (u, v) in x.iter().zip(&y) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tridiagonal_poisson() {
        let n = 50;
        let mut a = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.set(i, i, 2.0);
            if i > 0 {
                a.set(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.set(i, i + 1, -1.0);
            }
        }
        // -x'' = 0 with x(-1) = 0, x(n) = 1 (folded into the rhs)
        let mut rhs = vec![0.0; n];
        rhs[n - 1] = 1.0;
        let x = a.factor().unwrap().solve(&rhs);
        for (i, v) in x.iter().enumerate() {
            assert!((v - (i + 1) as f64 / (n + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let mut a = BandMatrix::zeros(2, 1, 1);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        assert!(matches!(a.factor(), Err(Error::Singular(_))));
    }

    #[test]
    #[should_panic]
    fn outside_band_panics() {
        let mut a = BandMatrix::zeros(4, 1, 0);
        a.set(0, 2, 1.0);
    }
}
