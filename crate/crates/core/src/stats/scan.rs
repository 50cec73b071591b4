use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cvm_two_sample, StatsError, TestConfig, TestMethod};
use crate::dismantle::DismantlingCurve;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint<T> {
    pub k: usize,
    pub statistic: T,
    pub p_value: T,
    pub method: TestMethod,
}

/// CvM tests between the first `k` removal increments of two curves, for
/// every `k` in `2..=max_k`.
pub fn prefix_cvm_scan<T: Scalar>(
    a: &DismantlingCurve<T>,
    b: &DismantlingCurve<T>,
    max_k: usize,
    config: &TestConfig,
) -> Result<Vec<ScanPoint<T>>, StatsError> {
    let available = a.increments.len().min(b.increments.len());
    if max_k > available {
        return Err(StatsError::PrefixTooLong { requested: max_k, available });
    }
    (2..=max_k)
        .into_par_iter()
        .map(|k| {
            let r = cvm_two_sample(&a.increments[..k], &b.increments[..k], config)?;
            Ok(ScanPoint { k, statistic: r.statistic, p_value: r.p_value, method: r.method })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricName;

    fn curve(increments: Vec<f64>) -> DismantlingCurve<f64> {
        let mut rem = 1.0;
        let mut points = vec![(0, 1.0)];
        for (k, m) in increments.iter().enumerate() {
            rem -= m;
            points.push((k + 1, rem));
        }
        DismantlingCurve { metric: MetricName::Fib, residual_floor: rem, points, increments, total_weight: 1 }
    }

    #[test]
    fn identical_curves_never_differ() {
        let inc: Vec<f64> = (0..40).map(|i| 0.02 / f64::from(i + 1)).collect();
        let c = curve(inc);
        let scan = prefix_cvm_scan(&c, &c, 40, &TestConfig::default()).unwrap();
        assert_eq!(scan.len(), 39);
        assert_eq!(scan[0].k, 2);
        assert!(scan.iter().all(|p| p.p_value >= 0.99));
    }

    #[test]
    fn too_long_prefix_is_an_error() {
        let c = curve(vec![0.1; 5]);
        assert_eq!(
            prefix_cvm_scan(&c, &c, 6, &TestConfig::default()),
            Err(StatsError::PrefixTooLong { requested: 6, available: 5 })
        );
    }
}
