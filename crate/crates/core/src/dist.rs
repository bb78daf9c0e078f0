//! Scalar distributions used for ensemble coordinates, multipliers and
//! order-statistics experiments, with their analytic absolute moments.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};

/// Shape of a scalar law before scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistKind {
    Gaussian,
    Rademacher,
    /// Standard exponential, mean one (not centred).
    Exponential,
    /// `Exp(1) - 1`: mean zero, unit variance.
    CenteredExponential,
    /// Laplace with unit scale (variance two).
    Laplace,
    /// Student t with `dof` degrees of freedom; moments of order `< dof` exist.
    StudentT { dof: f64 },
    /// Pareto on `[1, inf)` with `P(X > x) = x^-tail`; moments of order `< tail` exist.
    Pareto { tail: f64 },
    /// Pareto magnitude with an independent random sign.
    SymmetricPareto { tail: f64 },
    /// Square of a standard gaussian.
    GaussianSquared,
    /// Square of a standard exponential.
    ExponentialSquared,
}

/// A scaled scalar distribution `scale * X` with `X ~ kind`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dist {
    pub kind: DistKind,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl From<DistKind> for Dist {
    fn from(kind: DistKind) -> Self {
        Dist { kind, scale: 1.0 }
    }
}

impl Dist {
    pub fn new(kind: DistKind) -> Result<Self> {
        let d = Dist { kind, scale: 1.0 };
        d.validate()?;
        Ok(d)
    }

    pub fn gaussian() -> Self {
        DistKind::Gaussian.into()
    }

    pub fn exponential() -> Self {
        DistKind::Exponential.into()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale >= 0.0) {
            return invalid(format!("distribution scale must be finite and >= 0, got {}", self.scale));
        }
        match self.kind {
            DistKind::StudentT { dof } if !(dof > 0.0 && dof.is_finite()) => {
                invalid(format!("student t needs dof > 0, got {dof}"))
            }
            DistKind::Pareto { tail } | DistKind::SymmetricPareto { tail }
                if !(tail > 0.0 && tail.is_finite()) =>
            {
                invalid(format!("pareto needs tail index > 0, got {tail}"))
            }
            _ => Ok(()),
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Dist { kind: self.kind, scale: self.scale * factor }
    }

    /// Rescales so that `E X^2 = 1`. Fails when the second moment is infinite.
    pub fn standardized(self) -> Result<Self> {
        match self.abs_moment(2.0) {
            Some(m2) if m2 > 0.0 => Ok(self.scaled(1.0 / m2)),
            _ => invalid(format!("{:?} has no finite second moment", self.kind)),
        }
    }

    /// True when the law is symmetric about zero (so `E X = 0`).
    pub fn is_symmetric(&self) -> bool {
        matches!(
            self.kind,
            DistKind::Gaussian
                | DistKind::Rademacher
                | DistKind::Laplace
                | DistKind::StudentT { .. }
                | DistKind::SymmetricPareto { .. }
        )
    }

    /// Mean, when finite.
    pub fn mean(&self) -> Option<f64> {
        let m = match self.kind {
            DistKind::Exponential => 1.0,
            DistKind::CenteredExponential => 0.0,
            DistKind::GaussianSquared => 1.0,
            DistKind::ExponentialSquared => 2.0,
            DistKind::Pareto { tail } => {
                if tail <= 1.0 {
                    return None;
                }
                tail / (tail - 1.0)
            }
            DistKind::StudentT { dof } if dof <= 1.0 => return None,
            DistKind::SymmetricPareto { tail } if tail <= 1.0 => return None,
            _ => 0.0,
        };
        Some(self.scale * m)
    }

    /// `||X||_{L_q} = (E|X|^q)^{1/q}` for `q > 0`; `None` when infinite.
    pub fn abs_moment(&self, q: f64) -> Option<f64> {
        if !(q > 0.0) {
            return None;
        }
        let base = match self.kind {
            DistKind::Gaussian => gaussian_abs_moment(q),
            DistKind::Rademacher => 1.0,
            DistKind::Exponential | DistKind::Laplace => exponential_abs_moment(q),
            DistKind::CenteredExponential => centered_exponential_abs_moment(q),
            DistKind::StudentT { dof } => student_abs_moment(dof, q)?,
            DistKind::Pareto { tail } | DistKind::SymmetricPareto { tail } => {
                if q >= tail {
                    return None;
                }
                (tail / (tail - q)).powf(1.0 / q)
            }
            DistKind::GaussianSquared => gaussian_abs_moment(2.0 * q).powi(2),
            DistKind::ExponentialSquared => exponential_abs_moment(2.0 * q).powi(2),
        };
        Some(self.scale * base)
    }

    /// Prepares a sampler; construction cost is paid once.
    pub fn sampler(&self) -> Sampler {
        let gamma = match self.kind {
            DistKind::StudentT { dof } => {
                Some(Gamma::new(dof / 2.0, 2.0).expect("dof validated positive"))
            }
            _ => None,
        };
        Sampler { dist: *self, gamma }
    }
}

/// Draws from a [`Dist`].
#[derive(Debug, Clone)]
pub struct Sampler {
    dist: Dist,
    gamma: Option<Gamma<f64>>,
}

impl Sampler {
    pub fn dist(&self) -> &Dist {
        &self.dist
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = match self.dist.kind {
            DistKind::Gaussian => StandardNormal.sample(rng),
            DistKind::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            DistKind::Exponential => Exp1.sample(rng),
            DistKind::CenteredExponential => {
                let e: f64 = Exp1.sample(rng);
                e - 1.0
            }
            DistKind::Laplace => {
                let e: f64 = Exp1.sample(rng);
                if rng.random::<bool>() {
                    e
                } else {
                    -e
                }
            }
            DistKind::StudentT { dof } => {
                let z: f64 = StandardNormal.sample(rng);
                let v = self.gamma.as_ref().expect("student sampler").sample(rng);
                z / (v / dof).sqrt()
            }
            DistKind::Pareto { tail } => pareto(rng, tail),
            DistKind::SymmetricPareto { tail } => {
                let x = pareto(rng, tail);
                if rng.random::<bool>() {
                    x
                } else {
                    -x
                }
            }
            DistKind::GaussianSquared => {
                let z: f64 = StandardNormal.sample(rng);
                z * z
            }
            DistKind::ExponentialSquared => {
                let e: f64 = Exp1.sample(rng);
                e * e
            }
        };
        self.dist.scale * x
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for x in out.iter_mut() {
            *x = self.sample(rng);
        }
    }
}

fn pareto<R: Rng + ?Sized>(rng: &mut R, tail: f64) -> f64 {
    // 1 - U lies in (0, 1], so the power is finite.
    let u: f64 = 1.0 - rng.random::<f64>();
    u.powf(-1.0 / tail)
}

/// `||g||_{L_q}` for a standard gaussian.
pub fn gaussian_abs_moment(q: f64) -> f64 {
    let ln = 0.5 * q * std::f64::consts::LN_2 + ln_gamma((q + 1.0) / 2.0)
        - 0.5 * std::f64::consts::PI.ln();
    (ln / q).exp()
}

/// `||Y||_{L_q} = Gamma(q+1)^{1/q}` for a standard exponential.
pub fn exponential_abs_moment(q: f64) -> f64 {
    (ln_gamma(q + 1.0) / q).exp()
}

fn student_abs_moment(dof: f64, q: f64) -> Option<f64> {
    if q >= dof {
        return None;
    }
    let ln = 0.5 * q * dof.ln() + ln_gamma((q + 1.0) / 2.0) + ln_gamma((dof - q) / 2.0)
        - 0.5 * std::f64::consts::PI.ln()
        - ln_gamma(dof / 2.0);
    Some((ln / q).exp())
}

/// `E|Y - 1|^q = e^{-1} Gamma(q+1) + e^{-1} int_0^1 x^q e^x dx`.
fn centered_exponential_abs_moment(q: f64) -> f64 {
    // composite Simpson on [0, 1]; the integrand is smooth for q > 0
    let n = 2000;
    let h = 1.0 / n as f64;
    let f = |x: f64| x.powf(q) * x.exp();
    let mut acc = f(0.0) + f(1.0);
    for i in 1..n {
        let x = i as f64 * h;
        acc += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    let inner = acc * h / 3.0;
    let e_inv = (-1.0f64).exp();
    let total = e_inv * (ln_gamma(q + 1.0).exp() + inner);
    total.powf(1.0 / q)
}
