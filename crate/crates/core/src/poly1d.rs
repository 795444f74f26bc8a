//! Dense univariate polynomials in the monomial basis on `[0, 1]`.

/// Polynomial `c_0 + c_1 x + ... + c_d x^d`. Degrees beyond 20 are outside
/// the supported range of the crate and are not special-cased here.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly1 {
    pub coeffs: Vec<f64>,
}

impl Poly1 {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a polynomial needs at least one coefficient"
        );
        Self { coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        Self {
            coeffs: vec![0.0; degree + 1],
        }
    }

    /// Index of the last stored coefficient (the formal degree).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut value = 0.0;
        for &c in self.coeffs.iter().rev() {
            value = value * x + c;
        }
        value
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }
}
