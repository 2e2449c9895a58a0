#![allow(dead_code)]

use lepage_core::cone::{Atom, Carrier, ConeElement, Jump};
use lepage_core::expm::Matrix;
use lepage_core::{make_cone, Cone, ConeSpec};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// One cone of each kind; the operator cone has a non-diagonal matrix.
pub fn all_cones() -> Vec<Cone> {
    let grid: Vec<f64> = (0..=10).map(f64::from).collect();
    let matrix = Matrix::from_rows(&[vec![0.8, 0.3], vec![-0.2, 1.1]]).unwrap();
    [
        ConeSpec::euclidean(2),
        ConeSpec::operator(matrix),
        ConeSpec::max_grid(grid.clone()),
        ConeSpec::time_stable(grid.clone()),
        ConeSpec::time_stable(grid).with_nonnegative(true),
        ConeSpec::atomic_measure(2),
    ]
    .iter()
    .map(|s| make_cone(s).unwrap())
    .collect()
}

fn magnitude(rng: &mut impl Rng) -> f64 {
    10f64.powf(rng.random_range(-2.0..2.0))
}

/// A random non-neutral element spread over several orders of magnitude.
pub fn random_element(cone: &Cone, rng: &mut impl Rng) -> ConeElement {
    let normal = |rng: &mut dyn rand::RngCore| -> f64 { StandardNormal.sample(rng) };
    match &cone.descriptor.carrier {
        Carrier::Euclidean { dim } => {
            let m = magnitude(rng);
            ConeElement::Euclidean((0..*dim).map(|_| m * normal(rng)).collect())
        }
        Carrier::Grid(grid) => {
            let m = magnitude(rng);
            let mut v: Vec<f64> = (0..grid.len()).map(|_| m * rng.random::<f64>()).collect();
            v[0] += m;
            ConeElement::grid(grid, v)
        }
        Carrier::Steps(grid) => {
            let m = magnitude(rng);
            let k = rng.random_range(1..=4);
            let jumps = (0..k)
                .map(|_| {
                    let size = m * normal(rng);
                    Jump {
                        time: rng.random_range(0.05..12.0),
                        size: if cone.descriptor.nonnegative { size.abs() } else { size },
                    }
                })
                .collect();
            ConeElement::step(grid, jumps)
        }
        Carrier::Measure { dim } => {
            let m = magnitude(rng);
            let k = rng.random_range(1..=4);
            ConeElement::Measure(
                (0..k)
                    .map(|_| {
                        let w: f64 = Exp1.sample(rng);
                        Atom::new((0..*dim).map(|_| rng.random()).collect(), m * (w + 0.01))
                    })
                    .collect(),
            )
        }
    }
}
