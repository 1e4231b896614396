use num_complex::Complex64;

use super::{PartitionPolynomial, PolynomialOrigin};
use crate::error::{Error, Result};
use crate::table::{float17, CsvTable};

pub const DEFAULT_ROOT_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 1000;

/// Complex zeros of a partition polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    /// Sorted by real part, then imaginary part.
    pub zeros: Vec<Complex64>,
    /// Largest relative backward error `|P(z)| / Σ|c_k||z|^k` over the zeros.
    pub residual_bound: f64,
}

impl ZeroSet {
    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["re", "im"]);
        for z in &self.zeros {
            t.row([float17(z.re), float17(z.im)]);
        }
        t.finish()
    }

    /// Distance from the zero set to the ray `[0, ∞)`.
    pub fn distance_to_positive_axis(&self) -> f64 {
        self.zeros
            .iter()
            .map(|z| if z.re >= 0.0 { z.im.abs() } else { z.norm() })
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `||z| - 1|`.
    pub fn max_circle_deviation(&self) -> f64 {
        self.zeros.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Relative backward error of `z` as a root of `coeffs`.
pub fn relative_residual(coeffs: &[f64], z: Complex64) -> f64 {
    let r = z.norm();
    let scale = coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c.abs());
    if scale == 0.0 {
        return 0.0;
    }
    horner(coeffs, z).norm() / scale
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect()
}

/// Value and derivative at a point, sharing an arbitrary common scale, plus
/// the residual of the point measured against the size of the terms that
/// cancel there.
#[derive(Debug, Clone, Copy)]
struct Eval {
    p: Complex64,
    dp: Complex64,
    residual: f64,
}

/// How a polynomial is evaluated during root finding.
///
/// Expanded coefficients are fine for small or well-conditioned inputs, but
/// the partition functions of longer chains have coefficients spanning many
/// orders of magnitude and their zeros cannot be resolved from rounded
/// coefficients at all. For those the structured product that built the
/// polynomial is evaluated directly.
#[derive(Debug, Clone)]
enum Evaluator<'a> {
    Monomial(&'a [f64]),
    /// Open chain: `v ← T(z) v` with `T = [[a, b], [z b, z a]]`, started from
    /// `(1, z)` and summed at the end.
    Chain { same: f64, diff: f64, n_sites: usize },
    /// Hierarchical lattice: `N ← 2N²D²`, `D ← D⁴ + N⁴` from `(t, 1)`.
    Hierarchy { generations: usize },
}

impl Evaluator<'_> {
    fn eval(&self, z: Complex64) -> Eval {
        match *self {
            Evaluator::Monomial(coeffs) => {
                let mut p = Complex64::new(0.0, 0.0);
                let mut dp = Complex64::new(0.0, 0.0);
                for &c in coeffs.iter().rev() {
                    dp = dp * z + p;
                    p = p * z + c;
                }
                Eval {
                    p,
                    dp,
                    residual: relative_residual(coeffs, z),
                }
            }
            Evaluator::Chain { same, diff, n_sites } => {
                let one = Complex64::new(1.0, 0.0);
                let zero = Complex64::new(0.0, 0.0);
                let (mut up, mut down) = (one, z);
                let (mut dup, mut ddown) = (zero, one);
                let mut log_norm = 0.0;
                for _ in 1..n_sites {
                    let nu = up * same + down * diff;
                    let nd = z * (up * diff + down * same);
                    let ndu = dup * same + ddown * diff;
                    let ndd = (up * diff + down * same) + z * (dup * diff + ddown * same);
                    let s = nu.norm().max(nd.norm()).max(f64::MIN_POSITIVE);
                    log_norm += s.ln();
                    up = nu / s;
                    down = nd / s;
                    dup = ndu / s;
                    ddown = ndd / s;
                }
                let p = up + down;
                let dp = dup + ddown;
                // the two transfer eigenvalues set the size of the cancelling terms
                let tr = (z + 1.0) * same;
                let det = z * (same * same - diff * diff);
                let disc = (tr * tr - det * 4.0).sqrt();
                let l1 = ((tr + disc) * 0.5).norm();
                let l2 = ((tr - disc) * 0.5).norm();
                let lmax = l1.max(l2);
                let m = (n_sites - 1) as f64;
                let log_scale = if lmax > 0.0 {
                    m * lmax.ln() + (1.0 + (l1.min(l2) / lmax).powf(m)).ln()
                } else {
                    0.0
                } + (1.0 + z.norm()).ln();
                let log_value = p.norm().ln() + log_norm;
                Eval {
                    p,
                    dp,
                    residual: (log_value - log_scale).exp(),
                }
            }
            Evaluator::Hierarchy { generations } => {
                let (mut num, mut den) = (z, Complex64::new(1.0, 0.0));
                let (mut dnum, mut dden) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
                let mut scale = 1.0;
                for _ in 0..generations {
                    let nd = num * den;
                    let dnd = dnum * den + num * dden;
                    let next_num = nd * nd * 2.0;
                    let next_dnum = nd * dnd * 4.0;
                    let (n2, d2) = (num * num, den * den);
                    let next_den = d2 * d2 + n2 * n2;
                    let next_dden = d2 * den * dden * 4.0 + n2 * num * dnum * 4.0;
                    scale = d2.norm() * d2.norm() + n2.norm() * n2.norm();
                    num = next_num;
                    den = next_den;
                    dnum = next_dnum;
                    dden = next_dden;
                }
                Eval {
                    p: den,
                    dp: dden,
                    residual: if scale > 0.0 { den.norm() / scale } else { 0.0 },
                }
            }
        }
    }
}

/// Aberth–Ehrlich simultaneous iteration. Returns the approximations and
/// whether every root met the stopping rule before the cap.
fn aberth(eval: &Evaluator<'_>, coeffs: &[f64], max_iter: usize) -> (Vec<Complex64>, bool) {
    let n = coeffs.len() - 1;
    let lead = coeffs[n].abs();
    let radius = (coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max) / lead).powf(1.0 / n as f64);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64 + 0.4))
        .collect();
    let mut done = vec![false; n];
    let floor = 4.0 * f64::EPSILON;
    for _ in 0..max_iter {
        if done.iter().all(|&d| d) {
            return (z, true);
        }
        for i in 0..n {
            if done[i] {
                continue;
            }
            let e = eval.eval(z[i]);
            if e.residual <= floor {
                done[i] = true;
                continue;
            }
            let ratio = e.p / e.dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                continue;
            }
            z[i] -= step;
            if step.norm() <= f64::EPSILON * z[i].norm().max(f64::MIN_POSITIVE) {
                done[i] = true;
            }
        }
    }
    let converged = done.iter().all(|&d| d);
    (z, converged)
}

/// Replaces clusters of approximations that straddle a multiple root by the
/// root itself.
///
/// A cluster of `k` approximations is accepted as a `k`-fold root when
/// Newton's method on `P^{(k-1)}`, started from the centroid, lands on a point
/// where `P, P', …, P^{(k-1)}` all vanish to within `tol`. Clusters are
/// formed by single linkage at increasing radii; rejected clusters keep their
/// individual approximations.
fn refine_clusters(coeffs: &[f64], roots: &mut [Complex64], tol: f64) {
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    let n = roots.len();
    let mut settled = vec![false; n];
    for radius in [1e-6, 1e-4, 1e-3, 1e-2, 3e-2, 0.1, 0.2, 0.3] {
        let mut label: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for j in i + 1..n {
                if settled[i] || settled[j] {
                    continue;
                }
                let scale = roots[i].norm().max(1.0);
                if (roots[i] - roots[j]).norm() <= radius * scale {
                    let (a, b) = (find(&mut label, i), find(&mut label, j));
                    label[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            if !settled[i] {
                let r = find(&mut label, i);
                groups.entry(r).or_default().push(i);
            }
        }
        for members in groups.into_values().filter(|m| m.len() >= 2) {
            let k = members.len();
            let mut ders = vec![coeffs.to_vec()];
            for _ in 1..k {
                let next = derivative(ders.last().unwrap());
                ders.push(next);
            }
            let target = &ders[k - 1];
            let deriv = derivative(target);
            let mut c: Complex64 = members.iter().map(|&i| roots[i]).sum::<Complex64>() / k as f64;
            for _ in 0..50 {
                let step = horner(target, c) / horner(&deriv, c);
                if !step.is_finite() {
                    break;
                }
                c -= step;
                if step.norm() <= 4.0 * f64::EPSILON * c.norm().max(1.0) {
                    break;
                }
            }
            if ders.iter().all(|d| relative_residual(d, c) <= tol) {
                for &i in &members {
                    roots[i] = c;
                    settled[i] = true;
                }
            }
        }
    }
}

/// Forces exact conjugate pairs: each root in the upper half plane is
/// averaged with its nearest partner below, and unpaired near-real roots are
/// projected onto the real axis.
fn symmetrize(roots: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    let n = roots.len();
    let mut used = vec![false; n];
    let mut out = Vec::with_capacity(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| roots[b].im.abs().total_cmp(&roots[a].im.abs()));
    let pair_tol = tol.sqrt();
    for &i in &order {
        if used[i] {
            continue;
        }
        used[i] = true;
        let zi = roots[i];
        let scale = zi.norm().max(1.0);
        let partner = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| (roots[a] - zi.conj()).norm().total_cmp(&(roots[b] - zi.conj()).norm()));
        match partner {
            Some(j) if zi.im != 0.0 && (roots[j] - zi.conj()).norm() <= pair_tol * scale => {
                used[j] = true;
                let upper = if zi.im >= 0.0 { zi } else { zi.conj() };
                let lower = if zi.im >= 0.0 { roots[j].conj() } else { roots[j] };
                let avg = (upper + lower) * 0.5;
                if avg.im == 0.0 {
                    out.push(Complex64::new(avg.re, 0.0));
                    out.push(Complex64::new(avg.re, 0.0));
                } else {
                    out.push(avg);
                    out.push(avg.conj());
                }
            }
            _ if zi.im.abs() <= pair_tol * scale => out.push(Complex64::new(zi.re, 0.0)),
            _ => {
                return Err(Error::NumericFailure {
                    message: format!("root {zi} has no conjugate partner"),
                    best_residual: f64::NAN,
                })
            }
        }
    }
    Ok(out)
}

fn solve(eval: &Evaluator<'_>, coeffs: &[f64], tol: f64) -> Result<ZeroSet> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    if coeffs.len() < 2 || coeffs[coeffs.len() - 1] == 0.0 {
        return Err(Error::invalid("degree", "polynomial must have degree at least 1"));
    }
    let (mut approx, converged) = aberth(eval, coeffs, MAX_ITERATIONS);
    if let Evaluator::Monomial(c) = eval {
        refine_clusters(c, &mut approx, tol.min(1e-10));
    }
    let best = approx.iter().map(|&z| eval.eval(z).residual).fold(0.0, f64::max);
    if !converged && best > tol {
        return Err(Error::NumericFailure {
            message: format!("Aberth iteration did not converge in {MAX_ITERATIONS} iterations"),
            best_residual: best,
        });
    }
    let mut roots = symmetrize(&approx, tol)?;
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let residual_bound = roots.iter().map(|&z| eval.eval(z).residual).fold(0.0, f64::max);
    if residual_bound > tol {
        return Err(Error::NumericFailure {
            message: "root residual above tolerance".into(),
            best_residual: residual_bound,
        });
    }
    Ok(ZeroSet { zeros: roots, residual_bound })
}

/// All complex roots of `coeffs` (ascending powers) by Aberth iteration with
/// multiple-root refinement and conjugate symmetrization.
pub fn polynomial_roots(coeffs: &[f64], tol: f64) -> Result<ZeroSet> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("coefficients", "must be finite"));
    }
    let top = coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0);
    let trimmed = &coeffs[..=top];
    if trimmed.len() < 2 {
        return Err(Error::invalid("degree", "polynomial must have degree at least 1"));
    }
    let at_origin = trimmed.iter().position(|&c| c != 0.0).unwrap();
    let core = &trimmed[at_origin..];
    let mut set = if core.len() > 1 {
        solve(&Evaluator::Monomial(core), core, tol)?
    } else {
        ZeroSet {
            zeros: Vec::new(),
            residual_bound: 0.0,
        }
    };
    if at_origin > 0 {
        set.zeros.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), at_origin));
        set.zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    }
    Ok(set)
}

/// Zeros of a partition polynomial in its own variable.
///
/// Chain and hierarchical-lattice polynomials are evaluated through the
/// products that define them; the residual reported for each zero is
/// `|P(z)|` relative to the magnitude of the terms cancelling at `z`.
pub fn find_zeros(poly: &PartitionPolynomial, tol: f64) -> Result<ZeroSet> {
    let eval = match poly.origin {
        PolynomialOrigin::Chain { coupling_k, n_sites } => Evaluator::Chain {
            same: (coupling_k - coupling_k.abs()).exp(),
            diff: (-coupling_k - coupling_k.abs()).exp(),
            n_sites,
        },
        PolynomialOrigin::Hierarchical { generations } => Evaluator::Hierarchy { generations },
    };
    solve(&eval, &poly.coefficients, tol)
}

#[cfg(test)]
mod structured_tests {
    use super::*;
    use crate::yang_lee::{chain_partition_polynomial, hierarchical_temperature_polynomial, RenormMap};

    #[test]
    fn pinching_toward_positive_axis() {
        let d = |n| find_zeros(&chain_partition_polynomial(0.5, n).unwrap(), DEFAULT_ROOT_TOL).unwrap().distance_to_positive_axis();
        let (d8, d64) = (d(8), d(64));
        assert!(d64 < d8, "{d64} vs {d8}");
        assert!((d8 - 0.8188405000816067).abs() < 1e-9);
        assert!((d64 - 0.6882258656440606).abs() < 1e-9);
    }

    #[test]
    fn hierarchical_zeros_map_onto_pole_set() {
        let map = RenormMap::dhl_ising().unwrap();
        for g in 1..=3 {
            let poly = hierarchical_temperature_polynomial(g).unwrap();
            let zs = find_zeros(&poly, DEFAULT_ROOT_TOL).unwrap();
            assert_eq!(zs.zeros.len(), 4usize.pow(g as u32));
            for &z in &zs.zeros {
                // g - 1 forward steps land on a fourth root of -1
                let mut w = z;
                for _ in 1..g {
                    w = map.apply_complex(w).unwrap();
                }
                let w4 = w.powi(4);
                assert!((w4 + 1.0).norm() < 1e-6, "g={g} z={z} w^4={w4}");
            }
        }
    }
}
