use frobcount_core::families::{
    ConicBundleFamily, MultinormFamily, QuadraticPencil, QuaternionBrauerFamily,
};
use frobcount_core::frobenian::{DirichletCharacter, FrobenianSpec};
use frobcount_core::multiplicative::{indicator_from_prime_set, FrobMultSpec, PrimePowerRule};
use frobcount_core::{Error, Result, Scalar};
use serde::Deserialize;

/// The single JSON document driving a run; `command` selects the pipeline
/// and the matching section supplies its inputs.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    /// Output file stem (`<label>.csv` / `<label>.json`).
    #[serde(default = "default_label")]
    pub label: String,
    pub family: Option<FamilyConfig>,
    /// Geometric height grid; `b` is the single-height alternative.
    pub grid: Option<GridConfig>,
    pub b: Option<i64>,
    pub sum: Option<SumConfig>,
    pub detect: Option<DetectConfig>,
    pub search: Option<SearchConfig>,
    pub identity_grid: Option<IdentityGridConfig>,
    pub fit: Option<FitConfig>,
    /// Cap on lattice points visited per call; the environment variable
    /// FROBCOUNT_POINT_BUDGET overrides it.
    pub point_budget: Option<u128>,
}

fn default_label() -> String {
    "report".to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub b_min: i64,
    pub b_max: i64,
    pub points: usize,
}

impl GridConfig {
    /// Strictly increasing geometric grid from b_min to b_max inclusive.
    pub fn heights(&self) -> Result<Vec<i64>> {
        if self.b_min < 1 || self.b_max <= self.b_min || self.points < 2 {
            return Err(Error::config(
                "grid needs 1 <= b_min < b_max and at least 2 points",
            ));
        }
        let lo = self.b_min as f64;
        let hi = self.b_max as f64;
        let n = self.points;
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let t = k as f64 / (n - 1) as f64;
            let b = (lo.ln() + t * (hi.ln() - lo.ln())).exp().round() as i64;
            if out.last().map_or(true, |&prev| b > prev) {
                out.push(b);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    Conic {
        a: i64,
        forms: Vec<(i64, i64)>,
        exponents: Option<Vec<u32>>,
    },
    Multinorm {
        fields: Vec<Vec<i64>>,
        forms: Vec<(i64, i64)>,
        exponents: Option<Vec<u32>>,
    },
    Brauer {
        hyperplanes: Vec<Vec<i64>>,
        classes: Vec<BrauerClassConfig>,
    },
    Pencil {
        d: i64,
        residue_elt: (i64, i64),
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrauerClassConfig {
    pub a: i64,
    pub exponents: Vec<i64>,
}

/// The realized family behind a [`FamilyConfig`].
pub enum Family {
    Conic(ConicBundleFamily),
    Multinorm(MultinormFamily),
    Brauer(QuaternionBrauerFamily),
    Pencil(QuadraticPencil),
}

impl FamilyConfig {
    pub fn build(&self) -> Result<Family> {
        match self {
            FamilyConfig::Conic { a, forms, exponents } => {
                let e = exponents.clone().unwrap_or_else(|| vec![1; forms.len()]);
                Ok(Family::Conic(ConicBundleFamily::new(*a, forms.clone(), e)?))
            }
            FamilyConfig::Multinorm {
                fields,
                forms,
                exponents,
            } => {
                let e = exponents.clone().unwrap_or_else(|| vec![1; forms.len()]);
                Ok(Family::Multinorm(MultinormFamily::new(
                    fields.clone(),
                    forms.clone(),
                    e,
                )?))
            }
            FamilyConfig::Brauer {
                hyperplanes,
                classes,
            } => {
                let cs = classes
                    .iter()
                    .map(|c| (c.a, c.exponents.clone()))
                    .collect();
                Ok(Family::Brauer(QuaternionBrauerFamily::new(
                    hyperplanes.clone(),
                    cs,
                )?))
            }
            FamilyConfig::Pencil { d, residue_elt } => {
                Ok(Family::Pencil(QuadraticPencil::new(*d, *residue_elt)?))
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumConfig {
    pub forms: Vec<FormConfig>,
    pub specs: Vec<SpecConfig>,
    /// "unit" ([0,1]^s) or "symmetric" ([-1,1]^s).
    #[serde(default = "default_box")]
    pub box_shape: String,
    pub dimension: usize,
    pub slab_width: Option<i64>,
}

fn default_box() -> String {
    "unit".to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormConfig {
    pub coeffs: Vec<i64>,
    #[serde(default)]
    pub constant: i64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpecConfig {
    /// ρ ≡ 1.
    One,
    /// The divisor function τ.
    Tau,
    /// μ², the squarefree indicator.
    MuSquared,
    /// The indicator of sums of two squares.
    TwoSquares,
    /// The completely multiplicative indicator of integers whose prime
    /// factors p satisfy χ_disc(p) = 1 or lie in the exceptional set.
    SmoothIndicator {
        disc: i64,
        #[serde(default)]
        exceptional: Vec<u64>,
    },
}

impl SpecConfig {
    pub fn build(&self) -> Result<FrobMultSpec> {
        let trivial_combo = |v: Scalar| {
            FrobenianSpec::character_combo(vec![(DirichletCharacter::trivial(), v)], vec![])
        };
        match self {
            SpecConfig::One => FrobMultSpec::new(
                trivial_combo(Scalar::ONE)?,
                PrimePowerRule::CompletelyMultiplicative,
                1,
            ),
            SpecConfig::Tau => FrobMultSpec::new(
                trivial_combo(Scalar::from_int(2))?,
                PrimePowerRule::DivisorFunction,
                2,
            ),
            SpecConfig::MuSquared => FrobMultSpec::new(
                trivial_combo(Scalar::ONE)?,
                PrimePowerRule::SquarefreeSupport,
                1,
            ),
            SpecConfig::TwoSquares => {
                let chi = DirichletCharacter::from_discriminant(-4)?;
                let base = FrobenianSpec::character_combo(
                    vec![
                        (DirichletCharacter::trivial(), Scalar::from_ratio(1, 2)),
                        (chi, Scalar::from_ratio(1, 2)),
                    ],
                    vec![(2, Scalar::ONE)],
                )?;
                FrobMultSpec::new(base, PrimePowerRule::EvenExponentOne, 1)
            }
            SpecConfig::SmoothIndicator { disc, exceptional } => {
                let chi = DirichletCharacter::from_discriminant(*disc)?;
                let base = FrobenianSpec::character_combo(
                    vec![
                        (DirichletCharacter::trivial(), Scalar::from_ratio(1, 2)),
                        (chi, Scalar::from_ratio(1, 2)),
                    ],
                    exceptional.iter().map(|&p| (p, Scalar::ONE)).collect(),
                )?;
                indicator_from_prime_set(&base)
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectConfig {
    pub anchor: Vec<i64>,
    /// (numerator, denominator) of the closeness radius δ.
    pub delta: (i64, i64),
    #[serde(default)]
    pub primes: Vec<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub prime_bound: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Exponent d in N ≈ c·B^d/(log B)^Δ; defaults to 2 (counts on ℙ¹).
    pub dimension: Option<f64>,
    /// Δ override; defaults to the family's own Δ-exponent.
    pub delta: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityGridConfig {
    pub primes: Vec<u64>,
    /// Number of forms, taken from {x₀, x₁, x₀+x₁}; at most 3.
    pub max_r: usize,
    pub max_c: u32,
    pub max_a: u32,
}
