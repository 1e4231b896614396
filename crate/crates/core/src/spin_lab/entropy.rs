use crate::error::{Error, Result};
use crate::table::{float17, CsvTable};

/// Largest ring handled by exact density-of-states enumeration.
pub const MAX_ENUMERATION_SITES: usize = 24;

/// Microcanonical entropy per spin as a function of energy per spin.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCurve {
    /// `(energy_per_spin, entropy_per_spin)`, sorted by energy.
    pub points: Vec<(f64, f64)>,
    pub coupling_j: f64,
    pub field_h: f64,
    pub n_sites: usize,
}

impl EntropyCurve {
    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["energy_per_spin", "entropy_per_spin"]);
        for &(e, s) in &self.points {
            t.row([float17(e), float17(s)]);
        }
        t.finish()
    }

    /// Entropy per spin at the point whose energy is closest to `energy`.
    pub fn entropy_near(&self, energy: f64) -> Option<f64> {
        self.points
            .iter()
            .min_by(|a, b| (a.0 - energy).abs().total_cmp(&(b.0 - energy).abs()))
            .map(|p| p.1)
    }
}

/// Number of ring configurations with `ups` up-spins and `broken` unsatisfied
/// bonds, indexed `[ups][broken]`.
fn ring_state_counts(n: usize) -> Vec<Vec<u64>> {
    let mut total = vec![vec![0u64; n + 1]; n + 1];
    if n == 1 {
        // a lone site's bond to itself is always satisfied
        total[1][0] = 1;
        total[0][0] = 1;
        return total;
    }
    for first in [1i8, -1] {
        // dp[last spin up?][ups][broken]
        let mut dp = vec![vec![vec![0u64; n + 1]; n + 1]; 2];
        let up0 = (first == 1) as usize;
        dp[up0][up0][0] = 1;
        for _ in 1..n {
            let mut next = vec![vec![vec![0u64; n + 1]; n + 1]; 2];
            for last in 0..2 {
                for ups in 0..=n {
                    for broken in 0..n {
                        let c = dp[last][ups][broken];
                        if c == 0 {
                            continue;
                        }
                        for cur in 0..2 {
                            let b = broken + (cur != last) as usize;
                            next[cur][ups + cur][b] += c;
                        }
                    }
                }
            }
            dp = next;
        }
        for last in 0..2 {
            for ups in 0..=n {
                for broken in 0..n {
                    let c = dp[last][ups][broken];
                    if c > 0 {
                        total[ups][broken + (last != up0) as usize] += c;
                    }
                }
            }
        }
    }
    total
}

/// Exact entropy curve `S(E)/N = ln g(E) / N` of the ring by enumeration of
/// its density of states.
///
/// Energies that coincide (within rounding) are merged, so for `J = 0` the
/// degeneracies collapse onto the binomial counts `C(N, N_up)`.
pub fn entropy_curve(coupling_j: f64, field_h: f64, n_sites: usize) -> Result<EntropyCurve> {
    if n_sites == 0 {
        return Err(Error::invalid("n_sites", "must be at least 1"));
    }
    if n_sites > MAX_ENUMERATION_SITES {
        return Err(Error::ResourceLimit(format!(
            "exact enumeration supports at most {MAX_ENUMERATION_SITES} sites, got {n_sites}"
        )));
    }
    if !coupling_j.is_finite() || !field_h.is_finite() {
        return Err(Error::invalid("coupling_j/field_h", "must be finite"));
    }
    let n = n_sites;
    let nf = n as f64;
    let counts = ring_state_counts(n);
    let mut levels: Vec<(f64, u64)> = Vec::new();
    for (ups, row) in counts.iter().enumerate() {
        for (broken, &g) in row.iter().enumerate() {
            if g == 0 {
                continue;
            }
            let bonds = nf - 2.0 * broken as f64;
            let spin_sum = 2.0 * ups as f64 - nf;
            levels.push(((-coupling_j * bonds - field_h * spin_sum) / nf, g));
        }
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    let merge_tol = 1e-12 * (coupling_j.abs() + field_h.abs() + 1.0);
    let mut merged: Vec<(f64, u64)> = Vec::new();
    for (e, g) in levels {
        match merged.last_mut() {
            Some(last) if (e - last.0).abs() <= merge_tol => last.1 += g,
            _ => merged.push((e, g)),
        }
    }
    Ok(EntropyCurve {
        points: merged
            .into_iter()
            .map(|(e, g)| (e, (g as f64).ln() / nf))
            .collect(),
        coupling_j,
        field_h,
        n_sites,
    })
}

/// Finite-N paramagnet entropy per spin at magnetization `m`:
/// `ln C(N, N(1+m)/2) / N`. Returns `None` if `m` is not attainable.
pub fn paramagnet_entropy(n_sites: usize, m: f64) -> Option<f64> {
    let ups = (n_sites as f64 * (1.0 + m) / 2.0).round();
    if !(0.0..=n_sites as f64).contains(&ups) {
        return None;
    }
    let k = ups as u64;
    let n = n_sites as u64;
    let k = k.min(n - k);
    // C(n, k) for n <= 64 without overflow
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    Some((c as f64).ln() / n_sites as f64)
}

/// Large-N limit `ln 2 - ½[(1+m)ln(1+m) + (1-m)ln(1-m)]`.
pub fn paramagnet_entropy_limit(m: f64) -> f64 {
    let xlnx = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
    std::f64::consts::LN_2 - 0.5 * (xlnx(1.0 + m) + xlnx(1.0 - m))
}
