use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::table::float17;

/// Step used for the central-difference cross-check of the multiplier.
const FD_STEP: f64 = 1e-5;
const MULTIPLIER_AGREEMENT: f64 = 1e-6;

/// Values the renormalization map can act on.
pub trait MapValue: Copy {
    fn renormalize(self) -> Result<Self>;
}

/// Near-pole guard: `|1 + t⁴|` below a few ulps of its terms.
fn on_pole(denominator: f64, t4_norm: f64) -> bool {
    denominator <= 4.0 * f64::EPSILON * (1.0 + t4_norm)
}

impl MapValue for f64 {
    fn renormalize(self) -> Result<f64> {
        if !self.is_finite() {
            return Err(Error::invalid("t", "must be finite"));
        }
        let t2 = self * self;
        Ok(2.0 * t2 / (1.0 + t2 * t2))
    }
}

impl MapValue for Complex64 {
    fn renormalize(self) -> Result<Complex64> {
        if !self.is_finite() {
            return Err(Error::invalid("t", "must be finite"));
        }
        let t2 = self * self;
        let t4 = t2 * t2;
        let den = t4 + 1.0;
        if on_pole(den.norm(), t4.norm()) {
            return Err(Error::Pole);
        }
        Ok(t2 * 2.0 / den)
    }
}

/// Diamond hierarchical-lattice Ising map `t ↦ 2t² / (1 + t⁴)` in `t = tanh K`.
pub fn dhl_renorm_apply<T: MapValue>(t: T) -> Result<T> {
    t.renormalize()
}

/// `R'(t) = 4t(1 - t⁴) / (1 + t⁴)²`.
pub fn dhl_derivative(t: f64) -> f64 {
    let t4 = t.powi(4);
    4.0 * t * (1.0 - t4) / ((1.0 + t4) * (1.0 + t4))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapId {
    DhlIsing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub t: f64,
    /// `|R'(t*)|`; above 1 means repelling.
    pub multiplier: f64,
}

impl FixedPoint {
    pub fn is_repelling(&self) -> bool {
        self.multiplier > 1.0
    }
}

/// Outcome of a bracketed fixed-point search, with both derivative routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointReport {
    pub t_star: f64,
    pub multiplier: f64,
    pub multiplier_fd: f64,
    pub map_residual: f64,
}

impl FixedPointReport {
    /// `key=value` lines.
    pub fn to_text(&self) -> String {
        format!(
            "t_star={}\nmultiplier={}\nmultiplier_fd={}\nmap_residual={}\nrepelling={}\n",
            float17(self.t_star),
            float17(self.multiplier),
            float17(self.multiplier_fd),
            float17(self.map_residual),
            self.multiplier > 1.0
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenormMap {
    pub map_id: MapId,
    /// Real fixed points in `[-0.1, 1.1]`: the two attracting ends `t = 0`
    /// (high temperature) and `t = 1` (zero temperature) and the repelling
    /// critical point between them.
    pub fixed_points: Vec<FixedPoint>,
}

impl RenormMap {
    pub fn dhl_ising() -> Result<Self> {
        let mut map = RenormMap {
            map_id: MapId::DhlIsing,
            fixed_points: Vec::new(),
        };
        for bracket in [(-0.1, 0.1), (0.3, 0.8), (0.9, 1.1)] {
            let r = find_fixed_point(&map, bracket)?;
            map.fixed_points.push(FixedPoint {
                t: r.t_star,
                multiplier: r.multiplier,
            });
        }
        Ok(map)
    }

    pub fn apply(&self, t: f64) -> Result<f64> {
        match self.map_id {
            MapId::DhlIsing => dhl_renorm_apply(t),
        }
    }

    pub fn apply_complex(&self, t: Complex64) -> Result<Complex64> {
        match self.map_id {
            MapId::DhlIsing => dhl_renorm_apply(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self.map_id {
            MapId::DhlIsing => dhl_derivative(t),
        }
    }

    /// The repelling (critical) fixed point.
    pub fn critical_point(&self) -> Option<FixedPoint> {
        self.fixed_points.iter().copied().find(FixedPoint::is_repelling)
    }

    /// `t, R(t), R(R(t)), …` with `steps` applications.
    pub fn forward_orbit(&self, t0: f64, steps: usize) -> Result<Vec<f64>> {
        let mut orbit = Vec::with_capacity(steps + 1);
        orbit.push(t0);
        let mut t = t0;
        for _ in 0..steps {
            t = self.apply(t)?;
            orbit.push(t);
        }
        Ok(orbit)
    }

    /// All solutions of `R(t) = w`. The quartic `w t⁴ - 2t² + w = 0` gives
    /// `t² = (1 ± √(1 - w²)) / w`; the two values of `t²` multiply to 1, so
    /// the smaller is taken as the reciprocal of the larger for accuracy.
    pub fn preimages(&self, w: Complex64) -> Vec<Complex64> {
        match self.map_id {
            MapId::DhlIsing => {
                if w.norm() == 0.0 {
                    return vec![Complex64::new(0.0, 0.0)];
                }
                let s = (Complex64::new(1.0, 0.0) - w * w).sqrt();
                let plus = Complex64::new(1.0, 0.0) + s;
                let minus = Complex64::new(1.0, 0.0) - s;
                let big = if plus.norm() >= minus.norm() { plus / w } else { minus / w };
                let small = big.inv();
                let mut out = Vec::with_capacity(4);
                for u in [big, small] {
                    let r = u.sqrt();
                    out.push(r);
                    out.push(-r);
                }
                out
            }
        }
    }
}

/// Fixed point of `map` inside `bracket` by safeguarded Newton iteration on
/// `g(t) = R(t) - t`, falling back to bisection whenever a Newton step would
/// leave the current bracket.
pub fn find_fixed_point(map: &RenormMap, bracket: (f64, f64)) -> Result<FixedPointReport> {
    let (mut lo, mut hi) = if bracket.0 <= bracket.1 { bracket } else { (bracket.1, bracket.0) };
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::invalid("bracket", "endpoints must be finite"));
    }
    let g = |t: f64| -> Result<f64> { Ok(map.apply(t)? - t) };
    let mut g_lo = g(lo)?;
    let g_hi = g(hi)?;
    if g_lo == 0.0 {
        hi = lo;
    } else if g_hi == 0.0 {
        lo = hi;
    } else if g_lo.signum() == g_hi.signum() {
        return Err(Error::Bracket { lo, hi });
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
        let gt = g(t)?;
        if gt == 0.0 {
            lo = t;
            hi = t;
            break;
        }
        if gt.signum() == g_lo.signum() {
            lo = t;
            g_lo = gt;
        } else {
            hi = t;
        }
        let slope = map.derivative(t) - 1.0;
        let newton = t - gt / slope;
        t = if slope != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let t_star = if lo == hi { lo } else { t.clamp(lo, hi) };
    let multiplier = map.derivative(t_star).abs();
    let multiplier_fd = ((map.apply(t_star + FD_STEP)? - map.apply(t_star - FD_STEP)?) / (2.0 * FD_STEP)).abs();
    if (multiplier - multiplier_fd).abs() > MULTIPLIER_AGREEMENT {
        return Err(Error::NumericFailure {
            message: format!("analytic multiplier {multiplier} disagrees with finite difference {multiplier_fd}"),
            best_residual: (multiplier - multiplier_fd).abs(),
        });
    }
    Ok(FixedPointReport {
        t_star,
        multiplier,
        multiplier_fd,
        map_residual: (map.apply(t_star)? - t_star).abs(),
    })
}
