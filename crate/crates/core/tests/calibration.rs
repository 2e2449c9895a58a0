//! False rejection rate of the permutation-calibrated two-sample test when
//! both sides come from the same configuration.

use lepage_core::cone::ConeElement;
use lepage_core::lepage::Series;
use lepage_core::verify::two_sample_ecf_test;
use lepage_core::{make_cone, ConeSpec, RadialLaw};
use statrs::distribution::{Binomial, DiscreteCDF};

#[test]
fn two_sample_test_rejects_at_the_declared_rate() {
    let cone = make_cone(&ConeSpec::euclidean(1)).unwrap();
    let spectral = cone.default_spectral(true);
    let series = Series::new(&cone.descriptor, RadialLaw::new(0.7).unwrap(), &*spectral, 100.0).unwrap();
    let zeros = vec![0.0; cone.probes.len()];
    let reps = 200u64;
    let mut rejections = 0u64;
    for rep in 0..reps {
        let draw = |side| -> Vec<ConeElement> {
            series.sample_values(rep, side, 1000).unwrap().into_iter().map(|v| v.value).collect()
        };
        let report = two_sample_ecf_test("null", &draw(0), &draw(1), &cone.probes, &zeros, 100, 0.01, rep).unwrap();
        rejections += u64::from(!report.passed);
    }
    // upper 0.999 quantile of Binomial(200, 0.01)
    let binom = Binomial::new(0.01, reps).unwrap();
    let limit = (0..=reps).find(|k| binom.cdf(*k) >= 0.999).unwrap();
    assert!(rejections <= limit, "{rejections} rejections in {reps} null runs (limit {limit})");
}
