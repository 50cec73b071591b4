use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::StatsError;
use crate::scalar::{average_ranks, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation<T> {
    pub r: T,
    /// Two-sided, from the t distribution with n - 2 degrees of freedom.
    pub p_value: T,
    pub n: usize,
}

fn pearson<T: Scalar>(a: &[T], b: &[T]) -> Option<T> {
    let n = T::of_usize(a.len());
    let ma = a.iter().copied().sum::<T>() / n;
    let mb = b.iter().copied().sum::<T>() / n;
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    (saa > T::zero() && sbb > T::zero()).then(|| (sab / (saa * sbb).sqrt()).max(-T::one()).min(T::one()))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman<T: Scalar>(x: &[T], y: &[T]) -> Result<Correlation<T>, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFew { need: 3, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let r = pearson(&average_ranks(x), &average_ranks(y)).ok_or(StatsError::ConstantInput)?;
    let df = (x.len() - 2) as f64;
    let rf = r.as_f64();
    let p = if rf.abs() >= 1.0 {
        0.0
    } else {
        let t = rf * (df / (1.0 - rf * rf)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
        (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
    };
    Ok(Correlation { r, p_value: T::of(p), n: x.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_reverse() {
        let x = [3.0, 1.0, 4.0, 1.5, 9.0, 2.6];
        assert_eq!(spearman(&x, &x).unwrap().r, 1.0);
        let mut sorted = x.to_vec();
        sorted.sort_by(f64::total_cmp);
        let rev: Vec<f64> = sorted.iter().rev().copied().collect();
        assert_eq!(spearman(&sorted, &rev).unwrap().r, -1.0);
    }

    #[test]
    fn tied_data_is_pearson_of_average_ranks() {
        let x = [1.0, 2.0, 2.0, 3.0, 5.0, 5.0, 5.0];
        let y = [2.0, 1.0, 4.0, 4.0, 3.0, 6.0, 7.0];
        // Average ranks by hand.
        let rx = [1.0, 2.5, 2.5, 4.0, 6.0, 6.0, 6.0];
        let ry = [2.0, 1.0, 4.5, 4.5, 3.0, 6.0, 7.0];
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (mx, my) = (mean(&rx), mean(&ry));
        let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
        let expected = cov / (vx * vy).sqrt();
        assert!((spearman(&x, &y).unwrap().r - expected).abs() < 1e-14);
    }

    #[test]
    fn reference_p_value() {
        // scipy.stats.spearmanr
        let x = [1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        let y = [2.0, 1.0, 4.0, 3.0, 7.0, 5.0, 6.0, 10.0, 8.0, 9.0];
        let c = spearman(&x, &y).unwrap();
        assert!((c.r - 0.903_030_303_030_303).abs() < 1e-12);
        assert!((c.p_value - REF_P).abs() < 1e-9, "{}", c.p_value);
    }

    const REF_P: f64 = 0.000_343_612_197_763_282_23;

    #[test]
    fn monotone_transform_invariance() {
        let x = [0.5f64, 2.0, 1.0, 7.0, 3.3, 3.3];
        let y = [1.0, 0.2, 0.9, 4.0, 2.2, 8.0];
        let tx: Vec<f64> = x.iter().map(|v| v.exp() * 3.0 + 1.0).collect();
        assert_eq!(spearman(&x, &y).unwrap().r, spearman(&tx, &y).unwrap().r);
    }

    #[test]
    fn errors() {
        assert_eq!(spearman(&[1.0, 2.0], &[1.0, 2.0]), Err(StatsError::TooFew { need: 3, got: 2 }));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0]), Err(StatsError::LengthMismatch(3, 2)));
        assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(StatsError::ConstantInput));
    }
}
