//! Reference quantities computed independently of the series sampler.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::cone::{AlphaAdmissibility, Carrier, Character, ConeDescriptor, ConeElement, Involution, ScalingKind, SemigroupOp};
use crate::lepage::{eps_condition_check, IntegralBudget};
use crate::polar::RadialLaw;
use crate::rng::stream_rng;
use crate::spectral::PointMass;
use crate::{Error, Result};

/// `n` symmetric α-stable variates with characteristic function
/// `exp{−|u|^α}` (Chambers–Mallows–Stuck), from stream `(seed, stream)`.
pub fn cms_oracle(alpha: f64, n: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::domain(format!("the symmetric stable oracle needs alpha in (0, 2), got {alpha}")));
    }
    let mut rng = stream_rng(seed, stream);
    Ok((0..n)
        .map(|_| {
            let v = FRAC_PI_2 * (2.0 * rng.random::<f64>() - 1.0);
            let w: f64 = Exp1.sample(&mut rng);
            if alpha == 1.0 {
                return v.tan();
            }
            (alpha * v).sin() / v.cos().powf(1.0 / alpha) * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
        })
        .collect())
}

/// `C_α = α ∫_0^∞ (1 − cos t) t^{−α−1} dt`, the scale of the series with
/// marks `±1`: `E exp{iuξ} = exp{−C_α |u|^α}`. Computed by quadrature.
pub fn stable_constant(alpha: f64) -> Result<f64> {
    let law = RadialLaw::new(alpha)?;
    let line = ConeDescriptor {
        op: SemigroupOp::VectorSum,
        scaling: ScalingKind::Multiplicative,
        involution: Involution::Negation,
        carrier: Carrier::Euclidean { dim: 1 },
        admissible: AlphaAdmissibility::SUM,
        nonnegative: false,
    };
    let budget = IntegralBudget { draws: 1, ..IntegralBudget::default() };
    let check = eps_condition_check(
        &line,
        &law,
        &PointMass(ConeElement::Euclidean(vec![1.0])),
        &Character::fourier(vec![1.0]),
        &budget,
    )?;
    if !check.is_finite() {
        return Err(Error::domain(format!("C_alpha diverges for alpha = {alpha}")));
    }
    Ok(alpha * check.value.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::mean_se;

    #[test]
    fn oracle_range_gate() {
        assert!(cms_oracle(2.0, 10, 0, 0).is_err());
        assert!(cms_oracle(0.0, 10, 0, 0).is_err());
        assert_eq!(cms_oracle(1.0, 10, 0, 0).unwrap().len(), 10);
    }

    #[test]
    fn oracle_characteristic_function_at_one() {
        for alpha in [0.7, 1.0, 1.3] {
            let xs = cms_oracle(alpha, 100_000, 42, 0).unwrap();
            let (m, se) = mean_se(&xs.iter().map(|x| x.cos()).collect::<Vec<_>>());
            let expected = (-1.0f64).exp();
            assert!((m - expected).abs() < 3.0 * se, "alpha {alpha}: {m} vs {expected} (se {se})");
            let (s, se_s) = mean_se(&xs.iter().map(|x| x.signum()).collect::<Vec<_>>());
            assert!(s.abs() < 3.0 * se_s);
        }
    }

    #[test]
    fn stable_constant_at_one_is_half_pi() {
        assert!((stable_constant(1.0).unwrap() - FRAC_PI_2).abs() < 1e-6);
    }
}
