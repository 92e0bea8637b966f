use num_rational::Ratio;

use super::box_region::{for_each_cube_point, LatticeBox};
use crate::arith::{spf_factor, SpfTable};
use crate::error::{Error, Result};
use crate::local_densities::LinearFormSystem;
use crate::multiplicative::FrobMultSpec;
use crate::value::Scalar;

/// Default cap on integer points visited per correlation sum.
pub const DEFAULT_POINT_BUDGET: u128 = 1 << 29;

/// Largest spf table built for value factorization; larger values fall back
/// to direct factorization per value.
const MAX_SPF_TABLE: u64 = 1 << 24;

pub(crate) struct ValueEvaluator {
    table: SpfTable,
}

impl ValueEvaluator {
    pub(crate) fn new(system: &LinearFormSystem, bounds: &[(i64, i64)]) -> Result<ValueEvaluator> {
        let mut max_val: i64 = 2;
        for f in system.forms() {
            let mut m = f.constant.abs();
            for (i, &c) in f.coeffs.iter().enumerate() {
                let (lo, hi) = bounds[i];
                m += (c * lo).abs().max((c * hi).abs());
            }
            max_val = max_val.max(m);
        }
        let table = SpfTable::new((max_val as u64).min(MAX_SPF_TABLE))?;
        Ok(ValueEvaluator { table })
    }

    /// ∏_j ρ_j(L_j(x)) with ρ_j(m) = 0 for m ≤ 0.
    pub(crate) fn product_at(
        &self,
        system: &LinearFormSystem,
        specs: &[FrobMultSpec],
        x: &[i64],
    ) -> Result<Scalar> {
        let mut prod = Scalar::ONE;
        for (form, spec) in system.forms().iter().zip(specs) {
            let v = form.eval(x);
            if v <= 0 {
                return Ok(Scalar::ZERO);
            }
            let f = spf_factor(v as i128, &self.table)?;
            let s = spec.evaluate(&f);
            if s.is_zero() {
                return Ok(Scalar::ZERO);
            }
            prod = prod.mul(&s);
        }
        Ok(prod)
    }
}

fn check_arity(bx: &LatticeBox, system: &LinearFormSystem, specs: &[FrobMultSpec]) -> Result<()> {
    if system.s() != bx.dimension() {
        return Err(Error::domain("system arity must match box dimension"));
    }
    if specs.len() != system.r() {
        return Err(Error::domain("need one spec per form"));
    }
    Ok(())
}

fn check_budget(bx: &LatticeBox) -> Result<()> {
    let n = bx.cube_size();
    if n > DEFAULT_POINT_BUDGET {
        return Err(Error::Capacity {
            what: "correlation sum enumeration",
            needed: n,
            budget: DEFAULT_POINT_BUDGET,
        });
    }
    Ok(())
}

/// Σ_{x ∈ (scale·𝔎 + shift) ∩ ℤ^s} ∏_j ρ_j(L_j(x)), with ρ_j(m) = 0 for
/// m ≤ 0; exact for exact-valued specs.
pub fn correlation_sum(
    bx: &LatticeBox,
    system: &LinearFormSystem,
    specs: &[FrobMultSpec],
) -> Result<Scalar> {
    correlation_sum_coprime_to(bx, system, specs, &[])
}

/// Same sum restricted to points with gcd(x, p) = 1 for every p in
/// `coprime_to` (gcd over all coordinates).
pub fn correlation_sum_coprime_to(
    bx: &LatticeBox,
    system: &LinearFormSystem,
    specs: &[FrobMultSpec],
    coprime_to: &[u64],
) -> Result<Scalar> {
    check_arity(bx, system, specs)?;
    check_budget(bx)?;
    let bounds = bx.integer_bounds();
    let ev = ValueEvaluator::new(system, &bounds)?;
    let mut acc = Scalar::ZERO;
    let mut err: Option<Error> = None;
    for_each_cube_point(&bounds, |x| {
        if err.is_some() || !bx.contains(x) {
            return;
        }
        if coprime_to
            .iter()
            .any(|&p| x.iter().all(|&xi| xi.rem_euclid(p as i64) == 0))
        {
            return;
        }
        match ev.product_at(system, specs, x) {
            Ok(s) => acc = acc.add(&s),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

/// The same sum computed by splitting the leading coordinate into slabs of
/// the given width and recombining by exact addition; bit-identical to the
/// sequential result for exact-valued specs.
pub fn correlation_sum_segmented(
    bx: &LatticeBox,
    system: &LinearFormSystem,
    specs: &[FrobMultSpec],
    slab_width: i64,
) -> Result<Scalar> {
    if slab_width <= 0 {
        return Err(Error::domain("slab width must be positive"));
    }
    check_arity(bx, system, specs)?;
    check_budget(bx)?;
    let bounds = bx.integer_bounds();
    let ev = ValueEvaluator::new(system, &bounds)?;
    let (lead_lo, lead_hi) = bounds[0];
    let mut acc = Scalar::ZERO;
    let mut lo = lead_lo;
    while lo <= lead_hi {
        let hi = (lo + slab_width - 1).min(lead_hi);
        let mut slab_bounds = bounds.clone();
        slab_bounds[0] = (lo, hi);
        let mut slab = Scalar::ZERO;
        let mut err: Option<Error> = None;
        for_each_cube_point(&slab_bounds, |x| {
            if err.is_some() || !bx.contains(x) {
                return;
            }
            match ev.product_at(system, specs, x) {
                Ok(s) => slab = slab.add(&s),
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        acc = acc.add(&slab);
        lo = hi + 1;
    }
    Ok(acc)
}

/// The slab-split sum with the slabs evaluated on a thread pool and
/// recombined in slab order: bit-identical to [`correlation_sum_segmented`]
/// and hence to the sequential sum, for every thread count.
pub fn correlation_sum_parallel(
    bx: &LatticeBox,
    system: &LinearFormSystem,
    specs: &[FrobMultSpec],
    slab_width: i64,
    threads: usize,
) -> Result<Scalar> {
    if slab_width <= 0 {
        return Err(Error::domain("slab width must be positive"));
    }
    if threads == 0 {
        return Err(Error::domain("need at least one thread"));
    }
    check_arity(bx, system, specs)?;
    check_budget(bx)?;
    let bounds = bx.integer_bounds();
    let ev = ValueEvaluator::new(system, &bounds)?;
    let (lead_lo, lead_hi) = bounds[0];
    let mut slabs = Vec::new();
    let mut lo = lead_lo;
    while lo <= lead_hi {
        let hi = (lo + slab_width - 1).min(lead_hi);
        slabs.push((lo, hi));
        lo = hi + 1;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::domain(format!("thread pool: {e}")))?;
    let partials: Vec<Result<Scalar>> = pool.install(|| {
        use rayon::prelude::*;
        slabs
            .par_iter()
            .map(|&(lo, hi)| {
                let mut slab_bounds = bounds.clone();
                slab_bounds[0] = (lo, hi);
                let mut slab = Scalar::ZERO;
                let mut err: Option<Error> = None;
                for_each_cube_point(&slab_bounds, |x| {
                    if err.is_some() || !bx.contains(x) {
                        return;
                    }
                    match ev.product_at(system, specs, x) {
                        Ok(s) => slab = slab.add(&s),
                        Err(e) => err = Some(e),
                    }
                });
                match err {
                    Some(e) => Err(e),
                    None => Ok(slab),
                }
            })
            .collect()
    });
    let mut acc = Scalar::ZERO;
    for p in partials {
        acc = acc.add(&p?);
    }
    Ok(acc)
}

/// Convenience: the scale as a rational from an integer B.
pub fn scale(b: i64) -> Ratio<i64> {
    Ratio::new(b, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_densities::LinearForm;
    use crate::multiplicative::spec::test_specs::*;
    use crate::multiplicative::partial_sum;

    fn x0_system(s: usize) -> LinearFormSystem {
        let mut coeffs = vec![0i64; s];
        coeffs[0] = 1;
        LinearFormSystem::new(vec![LinearForm::new(coeffs, 0)]).unwrap()
    }

    #[test]
    fn counting_measure_matches_direct_loop() {
        // ρ ≡ 1, 𝔎 = [0,1]², L = x₀: counts lattice points with x₀ ≥ 1
        for b in [7i64, 10, 23] {
            let bx = LatticeBox::unit_cube(2, scale(b)).unwrap();
            let got = correlation_sum(&bx, &x0_system(2), &[one()]).unwrap();
            let mut direct = 0i64;
            for _x0 in 1..=b {
                for _x1 in 0..=b {
                    direct += 1;
                }
            }
            assert_eq!(got.exact_real().unwrap(), num_rational::Ratio::new(direct, 1));
        }
    }

    #[test]
    fn divisor_sum_matches_partial_sum() {
        let bx = LatticeBox::unit_cube(1, scale(10)).unwrap();
        let got = correlation_sum(&bx, &x0_system(1), &[tau()]).unwrap();
        assert_eq!(got.exact_real().unwrap(), num_rational::Ratio::new(27, 1));
        let ps = partial_sum(&tau(), 10).unwrap();
        assert!((got.to_c64().re - ps.re).abs() < 1e-12);
    }

    #[test]
    fn disjoint_supports_give_zero() {
        // ρ₁ supported on {p ≡ 1 mod 4}-smooth values, ρ₂ on {p ≡ 3 mod 4}-smooth
        // values of the same form x₀ + 1 ≥ 2: the product vanishes identically
        use crate::frobenian::{DirichletCharacter, FrobenianSpec};
        let chi = DirichletCharacter::from_discriminant(-4).unwrap();
        let half = Scalar::from_ratio(1, 2);
        let plus = FrobenianSpec::character_combo(
            vec![
                (DirichletCharacter::trivial(), half),
                (chi.clone(), half),
            ],
            vec![(2, Scalar::ZERO)],
        )
        .unwrap();
        let minus = FrobenianSpec::character_combo(
            vec![
                (DirichletCharacter::trivial(), half),
                (chi, Scalar::from_ratio(-1, 2)),
            ],
            vec![(2, Scalar::ZERO)],
        )
        .unwrap();
        let r1 = crate::multiplicative::FrobMultSpec::new(
            plus,
            crate::multiplicative::PrimePowerRule::CompletelyMultiplicative,
            1,
        )
        .unwrap();
        let r2 = crate::multiplicative::FrobMultSpec::new(
            minus,
            crate::multiplicative::PrimePowerRule::CompletelyMultiplicative,
            1,
        )
        .unwrap();
        let sys = LinearFormSystem::new_lenient(vec![
            LinearForm::new(vec![1], 1),
            LinearForm::new(vec![1], 1),
        ])
        .unwrap();
        let bx = LatticeBox::unit_cube(1, scale(50)).unwrap();
        let got = correlation_sum(&bx, &sys, &[r1, r2]).unwrap();
        // only the value 1 carries both indicators, and x₀ + 1 ≥ 1 hits it at x₀ = 0
        assert_eq!(got.exact_real().unwrap(), num_rational::Ratio::new(1, 1));
        // shifting the box to x₀ ≥ 1 removes it
        let shifted = LatticeBox::new(
            1,
            scale(50),
            vec![
                super::super::box_region::HalfSpace::from_ints(vec![-1], 0),
                super::super::box_region::HalfSpace::from_ints(vec![1], 1),
            ],
            vec![num_rational::Ratio::new(1, 1)],
        )
        .unwrap();
        let got = correlation_sum(&shifted, &sys, &[
            correlation_test_spec_one_mod_four(),
            correlation_test_spec_three_mod_four(),
        ])
        .unwrap();
        assert!(got.is_zero());
    }

    fn correlation_test_spec_one_mod_four() -> FrobMultSpec {
        varpi_one_mod_four()
    }

    fn correlation_test_spec_three_mod_four() -> FrobMultSpec {
        use crate::frobenian::{DirichletCharacter, FrobenianSpec};
        let chi = DirichletCharacter::from_discriminant(-4).unwrap();
        let base = FrobenianSpec::character_combo(
            vec![
                (DirichletCharacter::trivial(), Scalar::from_ratio(1, 2)),
                (chi, Scalar::from_ratio(-1, 2)),
            ],
            vec![(2, Scalar::ZERO)],
        )
        .unwrap();
        crate::multiplicative::FrobMultSpec::new(
            base,
            crate::multiplicative::PrimePowerRule::CompletelyMultiplicative,
            1,
        )
        .unwrap()
    }

    #[test]
    fn parallel_sum_is_bit_identical_across_thread_counts() {
        let sys = LinearFormSystem::new(vec![
            LinearForm::new(vec![1, 0], 0),
            LinearForm::new(vec![1, 1], 0),
        ])
        .unwrap();
        let bx = LatticeBox::unit_cube(2, scale(50)).unwrap();
        let specs = [varpi_one_mod_four(), tau()];
        let whole = correlation_sum(&bx, &sys, &specs).unwrap();
        for threads in [1usize, 2, 3, 8] {
            for w in [1i64, 9, 51] {
                let par = correlation_sum_parallel(&bx, &sys, &specs, w, threads).unwrap();
                assert_eq!(whole, par, "threads {threads}, slab width {w}");
            }
        }
    }

    #[test]
    fn segmentation_is_bit_identical() {
        let sys = LinearFormSystem::new(vec![
            LinearForm::new(vec![1, 0], 0),
            LinearForm::new(vec![1, 1], 0),
        ])
        .unwrap();
        let bx = LatticeBox::unit_cube(2, scale(60)).unwrap();
        let specs = [varpi_one_mod_four(), mu_squared()];
        let whole = correlation_sum(&bx, &sys, &specs).unwrap();
        for w in [1i64, 7, 16, 61] {
            let seg = correlation_sum_segmented(&bx, &sys, &specs, w).unwrap();
            assert_eq!(whole, seg, "slab width {w}");
        }
    }

    #[test]
    fn coprime_restriction() {
        // ρ ≡ 1 over [1,B]², gcd(x, 2) = 1 removes the even-even quadrant
        let bx = LatticeBox::unit_cube(2, scale(10)).unwrap();
        let sys = x0_system(2);
        let all = correlation_sum(&bx, &sys, &[one()]).unwrap();
        let odd = correlation_sum_coprime_to(&bx, &sys, &[one()], &[2]).unwrap();
        // x₀ ∈ [1,10], x₁ ∈ [0,10]: 110 points; both even: x₀ ∈ {2,..,10}, x₁ ∈ {0,..,10} even → 5·6
        assert_eq!(all.exact_real().unwrap(), num_rational::Ratio::new(110, 1));
        assert_eq!(odd.exact_real().unwrap(), num_rational::Ratio::new(80, 1));
    }
}
