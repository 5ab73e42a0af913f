//! Fixtures shared by the benchmarks.

use weakbmo::random::{instance_rng, random_function, random_space, Layout, MassKind, SpaceParams, Template};
use weakbmo::MetricMeasureSpace;

/// Uniform random space in the unit square with Gaussian values.
pub fn random_fixture(atoms: usize, seed: u64) -> (MetricMeasureSpace, Vec<f64>) {
    let mut rng = instance_rng(seed, 0);
    let params = SpaceParams { atoms, dim: 2, masses: MassKind::Dyadic, layout: Layout::Uniform };
    let space = random_space(&mut rng, params).expect("valid parameters");
    let values = random_function(&mut rng, &space, Template::Gaussian);
    (space, values)
}
