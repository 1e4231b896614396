use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_pcg::Pcg64;

use super::RenormMap;
use crate::error::{Error, Result};
use crate::table::{float17, CsvTable};

/// Acceptance bound on `|R(p) - parent(p)|` for emitted points.
pub const PREIMAGE_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JuliaOptions {
    pub generations: usize,
    pub cap: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JuliaPoint {
    pub z: Complex64,
    pub parent: Option<usize>,
    pub generation: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JuliaCloud {
    pub points: Vec<JuliaPoint>,
    /// Last generation that produced points.
    pub generations: usize,
    /// Preimages discarded for landing on the pole set.
    pub skipped_pole: usize,
    /// Preimages discarded for exceeding [`PREIMAGE_RESIDUAL`].
    pub skipped_residual: usize,
}

impl JuliaCloud {
    /// `re,im` rows in canonical order (real part, then imaginary part).
    pub fn to_csv(&self) -> String {
        let mut zs: Vec<Complex64> = self.points.iter().map(|p| p.z).collect();
        zs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let mut t = CsvTable::new(&["re", "im"]);
        for z in zs {
            t.row([float17(z.re), float17(z.im)]);
        }
        t.finish()
    }

    /// `|R(p) - parent(p)|` for every point past generation 0.
    pub fn residuals<'a>(&'a self, map: &'a RenormMap) -> impl Iterator<Item = f64> + 'a {
        self.points.iter().filter_map(move |p| {
            let parent = self.points[p.parent?].z;
            Some(map.apply_complex(p.z).map_or(f64::INFINITY, |w| (w - parent).norm()))
        })
    }
}

/// Backward orbit of `seed_point` under the map.
///
/// Every frontier point is expanded into all of its preimages while the full
/// tree still fits under `cap`; after that each frontier point contributes a
/// single randomly chosen branch, so the frontier keeps a constant size and
/// the cloud spreads over the Julia set until `cap` points exist or
/// `generations` levels are done.
pub fn julia_inverse_iteration(map: &RenormMap, seed_point: Complex64, options: &JuliaOptions) -> Result<JuliaCloud> {
    if options.cap == 0 {
        return Err(Error::invalid("cap", "must be positive"));
    }
    if !seed_point.is_finite() {
        return Err(Error::invalid("seed_point", "must be finite"));
    }
    let mut rng = Pcg64::seed_from_u64(options.seed);
    let mut cloud = JuliaCloud {
        points: vec![JuliaPoint {
            z: seed_point,
            parent: None,
            generation: 0,
        }],
        generations: 0,
        skipped_pole: 0,
        skipped_residual: 0,
    };
    let mut frontier = vec![0usize];
    for generation in 1..=options.generations {
        let room = options.cap - cloud.points.len();
        if room == 0 || frontier.is_empty() {
            break;
        }
        let expand_all = frontier.len() * 4 <= room;
        let mut next = Vec::new();
        for &parent in &frontier {
            if cloud.points.len() >= options.cap {
                break;
            }
            let w = cloud.points[parent].z;
            let mut valid = Vec::with_capacity(4);
            for p in map.preimages(w) {
                match map.apply_complex(p) {
                    Err(Error::Pole) => cloud.skipped_pole += 1,
                    Err(e) => return Err(e),
                    Ok(image) if (image - w).norm() > PREIMAGE_RESIDUAL || !p.is_finite() => {
                        cloud.skipped_residual += 1
                    }
                    Ok(_) => valid.push(p),
                }
            }
            if !expand_all {
                valid = valid.choose(&mut rng).copied().into_iter().collect();
            }
            for p in valid {
                if cloud.points.len() >= options.cap {
                    break;
                }
                next.push(cloud.points.len());
                cloud.points.push(JuliaPoint {
                    z: p,
                    parent: Some(parent),
                    generation,
                });
            }
        }
        if !next.is_empty() {
            cloud.generations = generation;
        }
        frontier = next;
    }
    Ok(cloud)
}
