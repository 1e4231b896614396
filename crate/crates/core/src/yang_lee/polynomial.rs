use crate::error::{Error, Result};

pub const MAX_CHAIN_SITES: usize = 4096;
pub const MAX_HIERARCHY_GENERATIONS: usize = 4;

/// Which complexified variable the polynomial is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariableKind {
    /// Lee–Yang: `z = exp(-2 beta h)` at fixed coupling.
    Fugacity,
    /// Fisher: `t = tanh(beta J)` at zero field.
    Temperature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolynomialOrigin {
    /// Open Ising chain with reduced coupling `K = beta J`.
    Chain { coupling_k: f64, n_sites: usize },
    /// Diamond hierarchical lattice after `generations` bond replacements.
    Hierarchical { generations: usize },
}

/// A partition function written as a real polynomial.
///
/// Coefficients are stored rescaled by a common positive factor so that the
/// largest is 1; `log_scale` restores them: `c_k = coefficients[k] * e^log_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionPolynomial {
    /// Ascending powers, `coefficients[k]` multiplies `x^k`.
    pub coefficients: Vec<f64>,
    pub log_scale: f64,
    pub variable_kind: VariableKind,
    pub origin: PolynomialOrigin,
}

impl PartitionPolynomial {
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// Coefficients with the common scale put back.
    pub fn unscaled_coefficients(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .map(|c| (c.ln() + self.log_scale).exp())
            .collect()
    }

    /// `ln Z` of the chain at reduced field `h_beta = beta h`, including the
    /// `exp(N beta h)` factor removed from the fugacity polynomial.
    pub fn chain_log_partition(&self, h_beta: f64) -> Option<f64> {
        let PolynomialOrigin::Chain { n_sites, .. } = self.origin else {
            return None;
        };
        let z = (-2.0 * h_beta).exp();
        let p: f64 = self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * z + c);
        Some(n_sites as f64 * h_beta + self.log_scale + p.ln())
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Fugacity polynomial of the open chain, `Z_N e^{-N beta h} = Σ_d c_d z^d`
/// where `d` counts down spins.
///
/// Built by a two-state transfer-matrix recursion that carries the
/// polynomial attached to each value of the last spin. The recursion runs in
/// log space so neither the Boltzmann weights nor the binomial-size
/// coefficients overflow at `N = 4096`.
pub fn chain_partition_polynomial(coupling_k: f64, n_sites: usize) -> Result<PartitionPolynomial> {
    if !(1..=MAX_CHAIN_SITES).contains(&n_sites) {
        return Err(Error::invalid(
            "n_sites",
            format!("must lie in [1, {MAX_CHAIN_SITES}], got {n_sites}"),
        ));
    }
    if !coupling_k.is_finite() {
        return Err(Error::invalid("coupling_k", "must be finite"));
    }
    let same = coupling_k;
    let diff = -coupling_k;
    let ninf = f64::NEG_INFINITY;
    // ln of the polynomial coefficients for paths ending up / down
    let mut up = vec![ninf; n_sites + 1];
    let mut down = vec![ninf; n_sites + 1];
    up[0] = 0.0;
    down[1] = 0.0;
    for len in 1..n_sites {
        let mut next_up = vec![ninf; n_sites + 1];
        let mut next_down = vec![ninf; n_sites + 1];
        for d in 0..=len {
            next_up[d] = log_add(same + up[d], diff + down[d]);
            next_down[d + 1] = log_add(diff + up[d], same + down[d]);
        }
        up = next_up;
        down = next_down;
    }
    let log_c: Vec<f64> = up.iter().zip(&down).map(|(&a, &b)| log_add(a, b)).collect();
    let log_scale = log_c.iter().copied().fold(ninf, f64::max);
    Ok(PartitionPolynomial {
        coefficients: log_c.iter().map(|&l| (l - log_scale).exp()).collect(),
        log_scale,
        variable_kind: VariableKind::Fugacity,
        origin: PolynomialOrigin::Chain { coupling_k, n_sites },
    })
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, &x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, &y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

fn poly_pow4(a: &[f64]) -> Vec<f64> {
    let sq = poly_mul(a, a);
    poly_mul(&sq, &sq)
}

/// Zero-field partition function of the diamond hierarchical lattice in the
/// variable `t = tanh K`, up to the non-vanishing factor `cosh(K)^{4^g}`.
///
/// Writing the `k`-times renormalized coupling as `N_k(t)/D_k(t)` with
/// `N_{k+1} = 2 N_k² D_k²` and `D_{k+1} = D_k⁴ + N_k⁴`, the generation-`g`
/// partition function is proportional to `D_g`, so its temperature zeros are
/// the points sent onto the pole set of the map after `g - 1` iterations.
pub fn hierarchical_temperature_polynomial(generations: usize) -> Result<PartitionPolynomial> {
    if !(1..=MAX_HIERARCHY_GENERATIONS).contains(&generations) {
        return Err(Error::invalid(
            "generations",
            format!("must lie in [1, {MAX_HIERARCHY_GENERATIONS}], got {generations}"),
        ));
    }
    let mut num = vec![0.0, 1.0];
    let mut den = vec![1.0];
    for _ in 0..generations {
        let nd = poly_mul(&num, &den);
        let next_num: Vec<f64> = poly_mul(&nd, &nd).into_iter().map(|c| 2.0 * c).collect();
        let next_den = poly_add(&poly_pow4(&den), &poly_pow4(&num));
        num = next_num;
        den = next_den;
    }
    let max = den.iter().copied().fold(0.0, f64::max);
    Ok(PartitionPolynomial {
        coefficients: den.iter().map(|c| c / max).collect(),
        log_scale: max.ln(),
        variable_kind: VariableKind::Temperature,
        origin: PolynomialOrigin::Hierarchical { generations },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Σ over all 2^n open-chain configurations, grouped by number of down spins.
    pub(crate) fn brute_force_chain(k: f64, n: usize) -> Vec<f64> {
        let mut c = vec![0.0; n + 1];
        for cfg in 0..(1u64 << n) {
            let s = |i: usize| if cfg >> i & 1 == 1 { -1.0 } else { 1.0 };
            let bonds: f64 = (0..n.saturating_sub(1)).map(|i| s(i) * s(i + 1)).sum();
            c[cfg.count_ones() as usize] += (k * bonds).exp();
        }
        c
    }

    #[test]
    fn free_spin_and_pair() {
        let p = chain_partition_polynomial(0.0, 1).unwrap();
        assert_eq!(p.unscaled_coefficients(), vec![1.0, 1.0]);
        let p = chain_partition_polynomial(0.0, 2).unwrap();
        let c = p.unscaled_coefficients();
        assert_eq!(p.degree(), 2);
        for (a, b) in c.iter().zip([1.0, 2.0, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn coupled_pair_weights() {
        let c = chain_partition_polynomial(0.5, 2).unwrap().unscaled_coefficients();
        let expect = [1.6487212707001282, 1.2130613194252668, 1.6487212707001282];
        for (a, b) in c.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn matches_enumeration() {
        for &k in &[0.0, 0.3, -0.7, 2.0] {
            for n in 1..=10 {
                let got = chain_partition_polynomial(k, n).unwrap().unscaled_coefficients();
                let want = brute_force_chain(k, n);
                for (a, b) in got.iter().zip(&want) {
                    assert!((a - b).abs() <= 1e-12 * b, "K={k} n={n}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn large_chain_stays_positive() {
        let p = chain_partition_polynomial(1.0, MAX_CHAIN_SITES).unwrap();
        assert_eq!(p.degree(), MAX_CHAIN_SITES);
        assert!(p.log_scale.is_finite());
        assert!(chain_partition_polynomial(1.0, 0).is_err());
        assert!(chain_partition_polynomial(1.0, MAX_CHAIN_SITES + 1).is_err());
    }

    #[test]
    fn log_partition_matches_direct_sum() {
        let (k, n, hb) = (0.4, 6, 0.3);
        let p = chain_partition_polynomial(k, n).unwrap();
        let mut z = 0.0;
        for cfg in 0..(1u64 << n) {
            let s = |i: usize| if cfg >> i & 1 == 1 { -1.0 } else { 1.0 };
            let e: f64 = (0..n - 1).map(|i| k * s(i) * s(i + 1)).sum::<f64>() + (0..n).map(|i| hb * s(i)).sum::<f64>();
            z += e.exp();
        }
        assert!((p.chain_log_partition(hb).unwrap() - z.ln()).abs() < 1e-12);
    }

    #[test]
    fn hierarchical_first_generation() {
        // D_1 = 1 + t^4, D_2 = (1 + t^4)^4 + 16 t^8
        let p = hierarchical_temperature_polynomial(1).unwrap();
        assert_eq!(p.unscaled_coefficients().len(), 5);
        let c = p.unscaled_coefficients();
        for (a, b) in c.iter().zip([1.0, 0.0, 0.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let c2 = hierarchical_temperature_polynomial(2).unwrap().unscaled_coefficients();
        assert_eq!(c2.len(), 17);
        assert!((c2[8] - (6.0 + 16.0)).abs() < 1e-12);
        assert!((c2[4] - 4.0).abs() < 1e-12);
    }
}
