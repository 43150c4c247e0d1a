use bse_core::Method;

/// Leading-order flop count `coefficient·n³`, with the coefficient kept as
/// an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlopModel {
    pub method: Method,
    pub numerator: u64,
    pub denominator: u64,
}

impl FlopModel {
    pub const fn of(method: Method) -> Self {
        let (numerator, denominator) = match method {
            Method::Sqrt => (86, 3),
            Method::Chol => (40, 3),
            Method::CholSvd => (74, 3),
            Method::Reference => (112, 1),
        };
        Self {
            method,
            numerator,
            denominator,
        }
    }

    pub fn coefficient(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// `self / other` as a reduced fraction.
    pub fn ratio_to(&self, other: &FlopModel) -> (u64, u64) {
        let num = self.numerator * other.denominator;
        let den = self.denominator * other.numerator;
        let g = gcd(num, den);
        (num / g, den / g)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Estimated flops of `method` at half-dimension `n`; `None` for `n = 0`.
pub fn flop_estimate(method: Method, n: usize) -> Option<f64> {
    if n == 0 {
        return None;
    }
    let m = FlopModel::of(method);
    let n3 = (n as f64).powi(3);
    Some(m.numerator as f64 * n3 / m.denominator as f64)
}
