//! Nonlinearities `f` together with their primitive `F` and derivative `f'`.

/// A `C¹` nonlinearity with `f(0) = 0`.
///
/// The primitive must satisfy `F(0) = 0` and `F' = f`.
pub trait Nonlinearity {
    fn f(&self, t: f64) -> f64;
    /// `F(t) = ∫₀ᵗ f(s) ds`.
    fn primitive(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
    /// `F(b) − F(a)`; implementations should avoid the cancellation of the
    /// naive difference when `a ≈ b`.
    fn primitive_difference(&self, a: f64, b: f64) -> f64 {
        self.primitive(b) - self.primitive(a)
    }
    /// Odd nonlinearities make odd reflections of solutions solutions again.
    fn is_odd(&self) -> bool;
}

/// The quintic family `f_λ(t) = t³ − λ t⁵`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticParams {
    lambda: f64,
}

impl QuinticParams {
    /// Returns `None` for negative or non-finite `λ`.
    pub fn new(lambda: f64) -> Option<Self> {
        (lambda.is_finite() && lambda >= 0.0).then_some(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eval_f(&self, t: f64) -> f64 {
        let t2 = t * t;
        t2 * t * (1.0 - self.lambda * t2)
    }

    pub fn eval_primitive(&self, t: f64) -> f64 {
        let t2 = t * t;
        t2 * t2 * (0.25 - self.lambda * t2 / 6.0)
    }

    pub fn eval_fprime(&self, t: f64) -> f64 {
        let t2 = t * t;
        t2 * (3.0 - 5.0 * self.lambda * t2)
    }

    /// Largest positive `t` with `f(t) ≥ 0`, i.e. `1/√λ` (infinite for `λ = 0`).
    pub fn positive_root(&self) -> f64 {
        if self.lambda == 0.0 {
            f64::INFINITY
        } else {
            1.0 / libm::sqrt(self.lambda)
        }
    }
}

impl Nonlinearity for QuinticParams {
    fn f(&self, t: f64) -> f64 {
        self.eval_f(t)
    }
    fn primitive(&self, t: f64) -> f64 {
        self.eval_primitive(t)
    }
    fn derivative(&self, t: f64) -> f64 {
        self.eval_fprime(t)
    }
    fn primitive_difference(&self, a: f64, b: f64) -> f64 {
        // b⁴ − a⁴ and b⁶ − a⁶ both carry the factor (b − a)(b + a).
        let (a2, b2) = (a * a, b * b);
        let common = (b - a) * (b + a);
        common * ((a2 + b2) * 0.25 - self.lambda * (a2 * a2 + a2 * b2 + b2 * b2) / 6.0)
    }
    fn is_odd(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(l: f64) -> QuinticParams {
        QuinticParams::new(l).unwrap()
    }

    #[test]
    fn point_values() {
        assert_eq!(q(1.0).eval_f(0.0), 0.0);
        assert_eq!(q(1.0).eval_f(1.0), 0.0);
        assert_eq!(q(0.5).eval_f(1.0), 0.5);
        assert_eq!(q(1.0).eval_primitive(0.0), 0.0);
        assert!((q(1.0).eval_primitive(1.0) - 1.0 / 12.0).abs() < 1e-15);
        assert!(q(1.5).eval_primitive(1.0).abs() < 1e-15);
        assert_eq!(q(0.7).eval_fprime(0.0), 0.0);
        assert_eq!(q(1.0).eval_fprime(1.0), -2.0);
        assert_eq!(q(0.0).eval_fprime(2.0), 12.0);
    }

    #[test]
    fn rejects_negative_lambda() {
        assert!(QuinticParams::new(-1e-3).is_none());
        assert!(QuinticParams::new(f64::NAN).is_none());
    }

    #[test]
    fn primitive_bounded_above_with_interior_maximum() {
        // −F_λ ≥ k_λ: the sextic term dominates for λ > 0.
        for &l in &[0.05, 0.3, 1.0, 3.0] {
            let p = q(l);
            let (mut best, mut arg) = (f64::INFINITY, 0.0);
            for k in 0..=20_000 {
                let t = -10.0 + 20.0 * k as f64 / 20_000.0;
                let v = -p.eval_primitive(t);
                if v < best {
                    best = v;
                    arg = t;
                }
            }
            assert!(best.is_finite());
            assert!(arg.abs() < 10.0, "minimum at sampling edge for λ={l}");
        }
    }

    proptest! {
        #[test]
        fn primitive_difference_matches(a in -5.0f64..5.0, b in -5.0f64..5.0, l in 0.0f64..1.0) {
            let p = q(l);
            let naive = p.eval_primitive(b) - p.eval_primitive(a);
            let scale = 1.0 + p.eval_primitive(a).abs() + p.eval_primitive(b).abs();
            prop_assert!((p.primitive_difference(a, b) - naive).abs() <= 1e-13 * scale);
        }

        #[test]
        fn f_is_odd(t in -3.0f64..3.0, l in 0.0f64..3.0) {
            let p = q(l);
            prop_assert_eq!(p.eval_f(-t), -p.eval_f(t));
        }

        #[test]
        fn derivatives_match_finite_differences(t in -2.0f64..2.0, l in 0.0f64..1.0) {
            let p = q(l);
            let h = 1e-5;
            let df = (p.eval_primitive(t + h) - p.eval_primitive(t - h)) / (2.0 * h);
            prop_assert!((df - p.eval_f(t)).abs() < 1e-8);
            let dfp = (p.eval_f(t + h) - p.eval_f(t - h)) / (2.0 * h);
            prop_assert!((dfp - p.eval_fprime(t)).abs() < 1e-8);
        }
    }
}
