//! Small numeric helpers shared across modules.

/// Neumaier-compensated accumulator.
///
/// Used for every reduction whose result must not depend on the
/// accumulation order beyond the last few ulps.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if !t.is_finite() {
            self.sum = t;
            return;
        }
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        if self.sum.is_finite() {
            self.sum + self.compensation
        } else {
            self.sum
        }
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// `e^{1/e}`, the constant in the subgaussian absolute-moment bound.
pub fn exp_inv_e() -> f64 {
    std::f64::consts::E.recip().exp()
}

/// `e^{1/e + 1/2}`, the constant of the single-draw bounds.
pub fn exp_inv_e_half() -> f64 {
    (std::f64::consts::E.recip() + 0.5).exp()
}

/// Rounds `x` to `digits` decimal digits. Values too large for the
/// rounding to matter are returned unchanged.
pub fn round_to_digits(x: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits);
    let scaled = x * scale;
    if !scaled.is_finite() || scaled.abs() >= 9.0e15 {
        return x;
    }
    let r = scaled.round() / scale;
    // normalise -0.0
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// True when `x` is within `tol` of a positive integer.
pub fn is_positive_integer(x: f64, tol: f64) -> bool {
    x.is_finite() && x >= 1.0 - tol && (x - x.round()).abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_beats_naive_on_cancellation() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn rounding() {
        assert_eq!(round_to_digits(0.1 + 0.2, 12), 0.3);
        assert_eq!(round_to_digits(-1e-20, 10), 0.0);
        assert!(round_to_digits(-1e-20, 10).is_sign_positive());
        assert_eq!(round_to_digits(1e300, 12), 1e300);
    }

    #[test]
    fn integer_detection() {
        assert!(is_positive_integer(3.0, 1e-9));
        assert!(is_positive_integer(2.9999999999, 1e-9));
        assert!(!is_positive_integer(2.5, 1e-9));
        assert!(!is_positive_integer(0.0, 1e-9));
    }

    #[test]
    fn constants() {
        assert!((exp_inv_e() - 1.444_667_861_009_766).abs() < 1e-14);
        assert!((exp_inv_e_half() - exp_inv_e() * 0.5f64.exp()).abs() < 1e-14);
    }
}
