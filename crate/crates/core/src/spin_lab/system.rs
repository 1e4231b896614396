use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use crate::error::{Error, Result};

/// N spin-1/2 sites on a ring with nearest-neighbour coupling `J` and a
/// uniform field `h`, sampled at inverse temperature `beta`.
///
/// Energy convention: `H = -J Σ s_i s_{i+1} - h Σ s_i` with periodic
/// closure. A single site (`n = 1`) couples to itself, so its bond energy is
/// the constant `-J`.
///
/// The random stream is a PCG-64 seeded from `rng_seed`. Each Metropolis
/// attempt draws the site index first and the acceptance uniform second,
/// always both, so a trace depends only on the seed and the call sequence.
#[derive(Debug, Clone)]
pub struct SpinSystem {
    coupling_j: f64,
    field_h: f64,
    beta: f64,
    spins: Vec<i8>,
    sum: i64,
    rng_seed: u64,
    rng: Pcg64,
}

fn check_finite(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite, got {x}")))
    }
}

impl SpinSystem {
    /// All spins up.
    pub fn new(n_sites: usize, coupling_j: f64, field_h: f64, beta: f64, rng_seed: u64) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::invalid("n_sites", "must be at least 1"));
        }
        Self::with_spins(vec![1; n_sites], coupling_j, field_h, beta, rng_seed)
    }

    pub fn with_spins(spins: Vec<i8>, coupling_j: f64, field_h: f64, beta: f64, rng_seed: u64) -> Result<Self> {
        if spins.is_empty() {
            return Err(Error::invalid("n_sites", "must be at least 1"));
        }
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::invalid("spins", format!("spin value {bad} is not ±1")));
        }
        check_finite("coupling_j", coupling_j)?;
        check_finite("field_h", field_h)?;
        check_finite("beta", beta)?;
        let sum = spins.iter().map(|&s| s as i64).sum();
        Ok(Self {
            coupling_j,
            field_h,
            beta,
            spins,
            sum,
            rng_seed,
            rng: Pcg64::seed_from_u64(rng_seed),
        })
    }

    /// Independent random spins drawn from the system's own stream.
    pub fn randomized(mut self) -> Self {
        for s in self.spins.iter_mut() {
            *s = if self.rng.gen::<bool>() { 1 } else { -1 };
        }
        self.sum = self.spins.iter().map(|&s| s as i64).sum();
        self
    }

    pub fn n_sites(&self) -> usize {
        self.spins.len()
    }

    pub fn coupling_j(&self) -> f64 {
        self.coupling_j
    }

    pub fn field_h(&self) -> f64 {
        self.field_h
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn set_field(&mut self, field_h: f64) -> Result<()> {
        check_finite("field_h", field_h)?;
        self.field_h = field_h;
        Ok(())
    }

    pub fn set_beta(&mut self, beta: f64) -> Result<()> {
        check_finite("beta", beta)?;
        self.beta = beta;
        Ok(())
    }

    /// Sum of spins, `n_up - n_down`.
    pub fn spin_sum(&self) -> i64 {
        self.sum
    }

    pub fn magnetization(&self) -> f64 {
        self.sum as f64 / self.spins.len() as f64
    }

    fn bond_sum(&self) -> i64 {
        let n = self.spins.len();
        if n == 1 {
            return 1;
        }
        (0..n)
            .map(|i| (self.spins[i] * self.spins[(i + 1) % n]) as i64)
            .sum()
    }

    pub fn energy_per_spin(&self) -> f64 {
        let n = self.spins.len() as f64;
        (-self.coupling_j * self.bond_sum() as f64 - self.field_h * self.sum as f64) / n
    }

    /// Energy change from flipping site `i`.
    fn flip_cost(&self, i: usize) -> f64 {
        let n = self.spins.len();
        let s = self.spins[i] as f64;
        let neighbours = if n == 1 {
            0.0
        } else {
            (self.spins[(i + n - 1) % n] + self.spins[(i + 1) % n]) as f64
        };
        2.0 * s * (self.coupling_j * neighbours + self.field_h)
    }

    /// One single-site Metropolis attempt. Returns whether the flip was taken.
    pub(crate) fn attempt(&mut self) -> bool {
        let i = self.rng.gen_range(0..self.spins.len());
        let u: f64 = self.rng.gen();
        let cost = self.flip_cost(i);
        if u < (-self.beta * cost).exp() {
            self.spins[i] = -self.spins[i];
            self.sum += 2 * self.spins[i] as i64;
            true
        } else {
            false
        }
    }

    /// Runs `n_sweeps` sweeps of `n_sites` random-site Metropolis attempts
    /// each. Zero sweeps leave the state and the random stream untouched.
    pub fn metropolis_sweep(&mut self, n_sweeps: usize) -> Result<()> {
        check_finite("beta", self.beta)?;
        check_finite("coupling_j", self.coupling_j)?;
        check_finite("field_h", self.field_h)?;
        let n = self.spins.len();
        for _ in 0..n_sweeps * n {
            self.attempt();
        }
        Ok(())
    }

    /// Magnetization recorded after each of `n_samples` sweeps.
    pub fn sample_magnetization(&mut self, n_samples: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n_samples);
        for _ in 0..n_samples {
            self.metropolis_sweep(1)?;
            out.push(self.magnetization());
        }
        Ok(out)
    }
}
