/// A real test function with known derivative, equal to `far_value()` outside `[-R, R]`.
pub trait Profile: Sync {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    fn support_radius(&self) -> f64;
    fn far_value(&self) -> f64 {
        0.0
    }
}

#[inline]
fn smoothstep(t: f64) -> f64 {
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

#[inline]
fn smoothstep_prime(t: f64) -> f64 {
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

/// Plateau bump: 1 on `[-L, L]`, 0 outside `[-2L, 2L]`, quintic smoothstep ramps between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpFunction {
    scale: f64,
}

impl BumpFunction {
    pub fn reference() -> Self {
        BumpFunction { scale: 1.0 }
    }

    /// `φ_L(x) = φ(x / L)`.
    pub fn scaled(&self, l: f64) -> Self {
        assert!(l > 0.0);
        BumpFunction { scale: self.scale * l }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `‖φ‖_∞`.
    pub const SUP: f64 = 1.0;
    /// `‖φ′‖_∞` of the unscaled bump, attained mid-ramp.
    pub const LIP: f64 = 1.875;

    /// `‖φ_L‖₂² = L (2 + 2∫₀¹(1 − S)²)`, with `∫₀¹(1 − S)² = ∫₀¹ S² = 181/462`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.scale * (2.0 + 2.0 * 181.0 / 462.0)
    }
}

impl Profile for BumpFunction {
    fn value(&self, x: f64) -> f64 {
        let y = (x / self.scale).abs();
        if y <= 1.0 {
            1.0
        } else if y >= 2.0 {
            0.0
        } else {
            1.0 - smoothstep(y - 1.0)
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        let y = x / self.scale;
        let a = y.abs();
        if a <= 1.0 || a >= 2.0 {
            0.0
        } else {
            -y.signum() * smoothstep_prime(a - 1.0) / self.scale
        }
    }

    fn support_radius(&self) -> f64 {
        2.0 * self.scale
    }
}

/// `Σ w_i φ_{s_i}` for the reference bump.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpMixture {
    pub terms: Vec<(f64, f64)>,
}

impl Profile for BumpMixture {
    fn value(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(w, s)| w * BumpFunction::reference().scaled(s).value(x)).sum()
    }

    fn derivative(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(w, s)| w * BumpFunction::reference().scaled(s).derivative(x)).sum()
    }

    fn support_radius(&self) -> f64 {
        self.terms.iter().map(|&(_, s)| 2.0 * s).fold(0.0, f64::max)
    }
}

/// A constant function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantProfile(pub f64);

impl Profile for ConstantProfile {
    fn value(&self, _: f64) -> f64 {
        self.0
    }

    fn derivative(&self, _: f64) -> f64 {
        0.0
    }

    fn support_radius(&self) -> f64 {
        0.0
    }

    fn far_value(&self) -> f64 {
        self.0
    }
}
