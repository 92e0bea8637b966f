use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integer linear polynomial φ(u) = Σ coeffs[i]·u_i + constant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearForm {
    pub coeffs: Vec<i64>,
    pub constant: i64,
}

impl LinearForm {
    pub fn new(coeffs: Vec<i64>, constant: i64) -> LinearForm {
        LinearForm { coeffs, constant }
    }

    pub fn eval(&self, u: &[i64]) -> i64 {
        debug_assert_eq!(u.len(), self.coeffs.len());
        self.coeffs
            .iter()
            .zip(u)
            .fold(self.constant, |acc, (&c, &x)| acc + c * x)
    }

    /// Max modulus of the coefficients of the non-constant part.
    pub fn norm(&self) -> i64 {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// A system of linear polynomials φ_1..φ_r in s variables whose
/// non-constant parts are pairwise linearly independent over ℚ
/// (finite complexity).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearFormSystem {
    forms: Vec<LinearForm>,
    s: usize,
}

impl LinearFormSystem {
    pub fn new(forms: Vec<LinearForm>) -> Result<LinearFormSystem> {
        let sys = LinearFormSystem::new_lenient(forms)?;
        for i in 0..sys.forms.len() {
            for j in 0..i {
                if !independent(&sys.forms[i].coeffs, &sys.forms[j].coeffs) {
                    return Err(Error::domain(format!(
                        "forms {j} and {i} have proportional non-constant parts"
                    )));
                }
            }
        }
        Ok(sys)
    }

    /// Skips the finite-complexity check (used for deliberately degenerate
    /// systems, e.g. contradictory congruence demos).
    pub fn new_lenient(forms: Vec<LinearForm>) -> Result<LinearFormSystem> {
        if forms.is_empty() {
            return Err(Error::domain("need at least one form"));
        }
        let s = forms[0].coeffs.len();
        if s == 0 || forms.iter().any(|f| f.coeffs.len() != s) {
            return Err(Error::domain("all forms need the same positive arity"));
        }
        if forms.iter().any(|f| f.is_constant()) {
            return Err(Error::domain("constant forms are not allowed"));
        }
        Ok(LinearFormSystem { forms, s })
    }

    pub fn forms(&self) -> &[LinearForm] {
        &self.forms
    }

    pub fn r(&self) -> usize {
        self.forms.len()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// max_i ‖φ_i‖ over the non-constant parts.
    pub fn norm(&self) -> i64 {
        self.forms.iter().map(|f| f.norm()).max().unwrap()
    }
}

/// Are two coefficient vectors linearly independent over ℚ?
fn independent(a: &[i64], b: &[i64]) -> bool {
    for i in 0..a.len() {
        for j in 0..i {
            // 2×2 minor
            if (a[j] as i128) * (b[i] as i128) != (a[i] as i128) * (b[j] as i128) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complexity_check() {
        let ok = LinearFormSystem::new(vec![
            LinearForm::new(vec![1, 0], 0),
            LinearForm::new(vec![1, 1], 0),
        ]);
        assert!(ok.is_ok());
        // proportional non-constant parts
        let bad = LinearFormSystem::new(vec![
            LinearForm::new(vec![1, 0], 0),
            LinearForm::new(vec![2, 0], 3),
        ]);
        assert!(bad.is_err());
        // but the lenient constructor accepts them
        assert!(LinearFormSystem::new_lenient(vec![
            LinearForm::new(vec![1, 0], 0),
            LinearForm::new(vec![2, 0], 3),
        ])
        .is_ok());
        // one variable cannot host two independent forms
        let bad1 = LinearFormSystem::new(vec![
            LinearForm::new(vec![1], 0),
            LinearForm::new(vec![1], 2),
        ]);
        assert!(bad1.is_err());
    }

    #[test]
    fn eval_and_norm() {
        let f = LinearForm::new(vec![2, -3], 5);
        assert_eq!(f.eval(&[1, 1]), 4);
        assert_eq!(f.norm(), 3);
        let sys = LinearFormSystem::new(vec![
            LinearForm::new(vec![2, -3], 5),
            LinearForm::new(vec![1, 1], 0),
        ])
        .unwrap();
        assert_eq!(sys.norm(), 3);
        assert_eq!((sys.r(), sys.s()), (2, 2));
    }
}
