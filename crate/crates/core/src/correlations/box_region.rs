use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rational half-space {x : normal·x ≤ bound} in ℝ^s.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Vec<Ratio<i64>>,
    pub bound: Ratio<i64>,
}

impl HalfSpace {
    pub fn new(normal: Vec<Ratio<i64>>, bound: Ratio<i64>) -> HalfSpace {
        HalfSpace { normal, bound }
    }

    pub fn from_ints(normal: Vec<i64>, bound: i64) -> HalfSpace {
        HalfSpace {
            normal: normal.into_iter().map(|c| Ratio::new(c, 1)).collect(),
            bound: Ratio::new(bound, 1),
        }
    }

    fn holds_at(&self, point: &[Ratio<i64>]) -> bool {
        let dot: Ratio<i64> = self
            .normal
            .iter()
            .zip(point)
            .map(|(c, x)| c * x)
            .fold(Ratio::zero(), |a, b| a + b);
        dot <= self.bound
    }
}

/// The integer-point region (scale·𝔎 + shift) ∩ ℤ^s, where 𝔎 ⊆ [−1,1]^s
/// is an intersection of rational half-spaces of positive volume.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeBox {
    dimension: usize,
    scale: Ratio<i64>,
    half_spaces: Vec<HalfSpace>,
    shift: Vec<Ratio<i64>>,
}

impl LatticeBox {
    pub fn new(
        dimension: usize,
        scale: Ratio<i64>,
        half_spaces: Vec<HalfSpace>,
        shift: Vec<Ratio<i64>>,
    ) -> Result<LatticeBox> {
        if dimension == 0 {
            return Err(Error::domain("dimension must be positive"));
        }
        if scale <= Ratio::zero() {
            return Err(Error::domain("scale must be positive"));
        }
        if shift.len() != dimension
            || half_spaces.iter().any(|h| h.normal.len() != dimension)
        {
            return Err(Error::domain("half-space and shift arity must match dimension"));
        }
        let bx = LatticeBox {
            dimension,
            scale,
            half_spaces,
            shift,
        };
        if !bx.has_interior_point() {
            return Err(Error::domain(
                "region has no detectable interior point in [-1,1]^s (zero volume?)",
            ));
        }
        Ok(bx)
    }

    /// [0,1]^s at the given scale, no shift.
    pub fn unit_cube(dimension: usize, scale: Ratio<i64>) -> Result<LatticeBox> {
        let mut hs = Vec::new();
        for i in 0..dimension {
            let mut lo = vec![Ratio::zero(); dimension];
            lo[i] = Ratio::new(-1, 1);
            hs.push(HalfSpace::new(lo, Ratio::zero()));
            let mut hi = vec![Ratio::zero(); dimension];
            hi[i] = Ratio::new(1, 1);
            hs.push(HalfSpace::new(hi, Ratio::new(1, 1)));
        }
        LatticeBox::new(dimension, scale, hs, vec![Ratio::zero(); dimension])
    }

    /// [−1,1]^s at the given scale, no shift.
    pub fn symmetric_cube(dimension: usize, scale: Ratio<i64>) -> Result<LatticeBox> {
        let mut hs = Vec::new();
        for i in 0..dimension {
            let mut lo = vec![Ratio::zero(); dimension];
            lo[i] = Ratio::new(-1, 1);
            hs.push(HalfSpace::new(lo, Ratio::new(1, 1)));
            let mut hi = vec![Ratio::zero(); dimension];
            hi[i] = Ratio::new(1, 1);
            hs.push(HalfSpace::new(hi, Ratio::new(1, 1)));
        }
        LatticeBox::new(dimension, scale, hs, vec![Ratio::zero(); dimension])
    }

    /// Same region and shift at a different scale.
    pub fn with_scale(&self, scale: Ratio<i64>) -> Result<LatticeBox> {
        if scale <= Ratio::zero() {
            return Err(Error::domain("scale must be positive"));
        }
        let mut bx = self.clone();
        bx.scale = scale;
        Ok(bx)
    }

    /// Adds a half-space constraint (the result must keep positive volume).
    pub fn intersect(&self, half_space: HalfSpace) -> Result<LatticeBox> {
        if half_space.normal.len() != self.dimension {
            return Err(Error::domain("half-space arity must match dimension"));
        }
        let mut hs = self.half_spaces.clone();
        hs.push(half_space);
        LatticeBox::new(self.dimension, self.scale, hs, self.shift.clone())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn scale(&self) -> Ratio<i64> {
        self.scale
    }

    pub fn shift(&self) -> &[Ratio<i64>] {
        &self.shift
    }

    /// Does the integer point x lie in scale·𝔎 + shift? Exact rational test.
    pub fn contains(&self, x: &[i64]) -> bool {
        debug_assert_eq!(x.len(), self.dimension);
        // y = (x − shift)/scale must lie in 𝔎 ∩ [−1,1]^s
        let y: Vec<Ratio<i64>> = x
            .iter()
            .zip(&self.shift)
            .map(|(&xi, ai)| (Ratio::new(xi, 1) - ai) / self.scale)
            .collect();
        let one = Ratio::new(1, 1);
        if y.iter().any(|c| *c > one || *c < -one) {
            return false;
        }
        self.half_spaces.iter().all(|h| h.holds_at(&y))
    }

    /// Per-coordinate integer bounds [lo_i, hi_i] covering the region.
    pub fn integer_bounds(&self) -> Vec<(i64, i64)> {
        self.shift
            .iter()
            .map(|ai| {
                let lo = ai - self.scale;
                let hi = ai + self.scale;
                (ceil_ratio(lo), floor_ratio(hi))
            })
            .collect()
    }

    /// Number of integer points in the covering cube.
    pub fn cube_size(&self) -> u128 {
        self.integer_bounds()
            .iter()
            .map(|&(lo, hi)| if hi < lo { 0u128 } else { (hi - lo + 1) as u128 })
            .product()
    }

    /// Looks for a strictly interior rational point of 𝔎 ∩ [−1,1]^s on
    /// dyadic grids of increasing resolution (sufficient, not necessary,
    /// for positive volume; regions this library exercises are polytopes
    /// with dyadic-rational interior points).
    fn has_interior_point(&self) -> bool {
        for res in [2i64, 4, 8, 16] {
            let steps = 2 * res - 1; // odd multiples avoided: use all interior grid points
            let mut idx = vec![0i64; self.dimension];
            loop {
                let point: Vec<Ratio<i64>> = idx
                    .iter()
                    .map(|&k| Ratio::new(k - (res - 1), res)) // in (−1, 1)
                    .collect();
                let strict = self.half_spaces.iter().all(|h| {
                    let dot: Ratio<i64> = h
                        .normal
                        .iter()
                        .zip(&point)
                        .map(|(c, x)| c * x)
                        .fold(Ratio::zero(), |a, b| a + b);
                    dot < h.bound
                });
                if strict {
                    return true;
                }
                let mut i = 0;
                loop {
                    if i == self.dimension {
                        idx.clear();
                        break;
                    }
                    idx[i] += 1;
                    if idx[i] < steps {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if idx.is_empty() {
                    break;
                }
            }
        }
        false
    }
}

/// Visits every integer point of the covering cube, in odometer order.
pub(crate) fn for_each_cube_point(
    bounds: &[(i64, i64)],
    mut visit: impl FnMut(&[i64]),
) {
    if bounds.iter().any(|&(lo, hi)| hi < lo) {
        return;
    }
    let mut x: Vec<i64> = bounds.iter().map(|&(lo, _)| lo).collect();
    loop {
        visit(&x);
        let mut i = 0;
        loop {
            if i == bounds.len() {
                return;
            }
            x[i] += 1;
            if x[i] <= bounds[i].1 {
                break;
            }
            x[i] = bounds[i].0;
            i += 1;
        }
    }
}

fn floor_ratio(r: Ratio<i64>) -> i64 {
    r.floor().to_integer()
}

fn ceil_ratio(r: Ratio<i64>) -> i64 {
    r.ceil().to_integer()
}
