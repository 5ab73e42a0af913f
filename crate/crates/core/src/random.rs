//! Seeded generators for random spaces, functions and covering instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_measure::{ball_members, build_space, Atom, Ball, MetricMeasureSpace, MetricSpec};

/// Generator for instance `stream` of a run seeded with `seed`.
pub fn instance_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassKind {
    Unit,
    /// `2^-j` with `j` uniform in `0..=6`.
    Dyadic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// Uniform points in `[0, 1]^dim`.
    Uniform,
    /// Distinct points of a coarse grid, so many distances tie.
    Lattice,
    /// Distance `2^-l` where `l` is the common prefix length of random
    /// binary words; given as a matrix.
    Ultrametric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Template {
    Gaussian,
    /// `-dim · log|x - p|` around a random point `p`.
    LogSingular,
    /// Gaussian rounded to integers, so values tie.
    Quantized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub atoms: usize,
    pub dim: usize,
    pub masses: MassKind,
    pub layout: Layout,
}

fn mass<R: Rng>(rng: &mut R, kind: MassKind) -> f64 {
    match kind {
        MassKind::Unit => 1.0,
        MassKind::Dyadic => 2f64.powi(-rng.random_range(0..=6)),
    }
}

pub fn random_space<R: Rng>(rng: &mut R, params: SpaceParams) -> Result<MetricMeasureSpace> {
    let SpaceParams { atoms: n, dim, masses, layout } = params;
    if n == 0 || dim == 0 || dim > 8 {
        return Err(Error::BadParams(format!("need atoms >= 1 and 1 <= dim <= 8, got {n}, {dim}")));
    }
    let atoms: Vec<Atom> = (0..n).map(|i| Atom { id: i as u64, mass: mass(rng, masses) }).collect();
    let spec = match layout {
        Layout::Uniform => {
            let mut coords: Vec<Vec<f64>> = Vec::with_capacity(n);
            while coords.len() < n {
                let p: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
                if !coords.contains(&p) {
                    coords.push(p);
                }
            }
            MetricSpec::Euclidean(coords)
        }
        Layout::Lattice => {
            let mut side = 2usize;
            while side.pow(dim as u32) < 2 * n {
                side += 1;
            }
            let mut cells: Vec<usize> = (0..side.pow(dim as u32)).collect();
            cells.shuffle(rng);
            // dyadic spacing keeps coordinates exact, so equal distances compare equal
            let spacing = side.next_power_of_two() as f64;
            let coords = cells[..n]
                .iter()
                .map(|&c| (0..dim).map(|a| ((c / side.pow(a as u32)) % side) as f64 / spacing).collect())
                .collect();
            MetricSpec::Euclidean(coords)
        }
        Layout::Ultrametric => {
            let bits = usize::BITS - (2 * n).leading_zeros() + 2;
            let mut words: Vec<u32> = (0..1u32 << bits).collect();
            words.shuffle(rng);
            let words = &words[..n];
            let matrix = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i == j {
                                0.0
                            } else {
                                let common = (words[i] ^ words[j]).leading_zeros() - (32 - bits);
                                2f64.powi(-(common as i32))
                            }
                        })
                        .collect()
                })
                .collect();
            MetricSpec::Matrix(matrix)
        }
    };
    build_space(atoms, spec)
}

/// Coordinates for templates on non-Euclidean spaces: one random point per atom.
fn positions<R: Rng>(rng: &mut R, space: &MetricMeasureSpace, dim: usize) -> Vec<Vec<f64>> {
    (0..space.len())
        .map(|a| match space.coords(a) {
            Some(c) => c.to_vec(),
            None => (0..dim).map(|_| rng.random::<f64>()).collect(),
        })
        .collect()
}

pub fn random_function<R: Rng>(rng: &mut R, space: &MetricMeasureSpace, template: Template) -> Vec<f64> {
    let dim = (0..space.len()).find_map(|a| space.coords(a)).map_or(1, <[f64]>::len);
    match template {
        Template::Gaussian | Template::Quantized => {
            let sigma = rng.random_range(0.5..3.0);
            let normal = Normal::new(0.0, sigma).expect("positive sigma");
            let values = (0..space.len()).map(|_| normal.sample(rng));
            if template == Template::Quantized {
                values.map(f64::round).collect()
            } else {
                values.collect()
            }
        }
        Template::LogSingular => {
            let points = positions(rng, space, dim);
            let p: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            points
                .iter()
                .map(|x| {
                    let r = x.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    -(dim as f64) * r.max(1e-6).ln()
                })
                .collect()
        }
    }
}

/// A random space with up to `max_atoms` atoms and a random function on it.
pub fn random_instance<R: Rng>(rng: &mut R, max_atoms: usize) -> Result<(MetricMeasureSpace, Vec<f64>)> {
    let params = SpaceParams {
        atoms: rng.random_range(1..=max_atoms.max(1)),
        dim: rng.random_range(1..=3),
        masses: if rng.random_bool(0.5) { MassKind::Unit } else { MassKind::Dyadic },
        layout: [Layout::Uniform, Layout::Lattice, Layout::Ultrametric][rng.random_range(0..3)],
    };
    let space = random_space(rng, params)?;
    let template = [Template::Gaussian, Template::LogSingular, Template::Quantized][rng.random_range(0..3)];
    let values = random_function(rng, &space, template);
    Ok((space, values))
}

/// A ball `B0` and a set `F ⊆ 3B0` with `2μ(F) <= μ(B0)`.
pub fn random_cover_instance<R: Rng>(rng: &mut R, space: &MetricMeasureSpace) -> Result<(Ball, Vec<u64>)> {
    let n = space.len();
    let center = rng.random_range(0..n);
    let other = rng.random_range(0..n);
    let base = if other == center { space.separation(center).unwrap_or(1.0) } else { space.distance(center, other) };
    let b0 = Ball::new(center, base * rng.random_range(0.6..1.6));
    let b0_mass = space.mass_of(&ball_members(space, &b0)?);
    let mut pool = ball_members(space, &b0.dilate(3.0))?;
    pool.shuffle(rng);
    let mut f: Vec<usize> = Vec::new();
    for a in pool {
        if rng.random_bool(0.7) {
            f.push(a);
            f.sort_unstable();
            if 2.0 * space.mass_of(&f) > b0_mass {
                f.retain(|&x| x != a);
            }
        }
    }
    Ok((b0, f.into_iter().map(|a| space.id(a)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::CoverInstance;

    #[test]
    fn deterministic_streams() {
        let a = random_instance(&mut instance_rng(7, 3), 32).unwrap();
        let b = random_instance(&mut instance_rng(7, 3), 32).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        let c = random_instance(&mut instance_rng(7, 4), 32).unwrap();
        assert!(a.0 != c.0 || a.1 != c.1);
    }

    #[test]
    fn layouts_build() {
        let mut rng = instance_rng(1, 0);
        for layout in [Layout::Uniform, Layout::Lattice, Layout::Ultrametric] {
            for n in [1, 2, 17, 64] {
                let params = SpaceParams { atoms: n, dim: 2, masses: MassKind::Dyadic, layout };
                let s = random_space(&mut rng, params).unwrap();
                assert_eq!(s.len(), n);
            }
        }
        let bad = SpaceParams { atoms: 0, dim: 2, masses: MassKind::Unit, layout: Layout::Uniform };
        assert!(random_space(&mut rng, bad).is_err());
    }

    #[test]
    fn cover_instances_satisfy_hypothesis() {
        for i in 0..50 {
            let mut rng = instance_rng(11, i);
            let (space, _) = random_instance(&mut rng, 24).unwrap();
            let (b0, f) = random_cover_instance(&mut rng, &space).unwrap();
            CoverInstance::new(&space, b0, &f).unwrap();
        }
    }
}
