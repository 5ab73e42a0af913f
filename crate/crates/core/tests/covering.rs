mod common;

use common::*;
use proptest::prelude::*;
use weakbmo::covering::{czd_cover_with, dilates_within, refined_containment_factor};
use weakbmo::random::{instance_rng, random_cover_instance};
use weakbmo::{
    build_space, czd_cover, doubling_constant, refined_containment_check, stopping_radius, vitali_select, Atom,
    Ball, CoverInstance, Error, MetricMeasureSpace, MetricSpec,
};

/// Greatest `k <= 80` whose ball `B(x, 2^{1-k} r0)` carries no more mass in
/// `F` than outside it.
fn brute_stopping(space: &MetricMeasureSpace, in_f: &[bool], x: usize, r0: f64) -> Option<u32> {
    (0..=80u32).rev().find(|&k| {
        let ball = open_ball(space, x, r0 * 2f64.powi(1 - k as i32));
        let inside: f64 = ball.iter().filter(|&&a| in_f[a]).map(|&a| space.mass(a)).sum();
        let outside: f64 = ball.iter().filter(|&&a| !in_f[a]).map(|&a| space.mass(a)).sum();
        inside <= outside
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cover_properties_hold_independently((space, _) in sample(14), seed in any::<u64>()) {
        let (b0, f_ids) = random_cover_instance(&mut instance_rng(seed, 0), &space).unwrap();
        let instance = CoverInstance::new(&space, b0, &f_ids).unwrap();
        let c = brute_doubling(&space);
        let result = czd_cover_with(&instance, c).unwrap();
        prop_assert!(result.holds());

        let mut in_f = vec![false; space.len()];
        for &id in &f_ids {
            in_f[space.index_of(id).unwrap()] = true;
        }
        let e: Vec<usize> = (0..space.len()).filter(|&a| in_f[a] && space.distance(b0.center, a) < b0.radius).collect();
        prop_assert_eq!(instance.e(), &e[..]);
        for &x in &e {
            prop_assert_eq!(Some(stopping_radius(&instance, x).unwrap()), brute_stopping(&space, &in_f, x, b0.radius));
        }

        let mut taken = vec![false; space.len()];
        let mut covered = vec![false; space.len()];
        let mut total = 0.0;
        for b in &result.balls {
            let x = space.index_of(b.center).unwrap();
            for a in open_ball(&space, x, b.radius) {
                prop_assert!(!taken[a]);
                taken[a] = true;
            }
            let dilate = open_ball(&space, x, 5.0 * b.radius);
            let f_part: f64 = dilate.iter().filter(|&&a| in_f[a]).map(|&a| space.mass(a)).sum();
            let rest: f64 = dilate.iter().filter(|&&a| !in_f[a]).map(|&a| space.mass(a)).sum();
            prop_assert!(f_part <= rest);
            prop_assert!(dilate.iter().all(|&a| space.distance(b0.center, a) < 3.0 * b0.radius));
            total += f_part + rest;
            for a in dilate {
                covered[a] = true;
            }
        }
        prop_assert!(e.iter().all(|&a| covered[a]));
        let f_total: f64 = (0..space.len()).filter(|&a| in_f[a]).map(|a| space.mass(a)).sum();
        prop_assert!(total <= 2.0 * c.powi(3) * f_total * (1.0 + 1e-12));
    }

    #[test]
    fn vitali_keeps_a_large_neighbour((space, _) in sample(14), picks in prop::collection::vec((0usize..14, 0.1f64..4.0), 1..10)) {
        let balls: Vec<Ball> = picks.iter().map(|&(c, r)| Ball::new(c % space.len(), r)).collect();
        let kept = vitali_select(&space, &balls).unwrap();
        let members: Vec<Vec<usize>> = balls.iter().map(|b| open_ball(&space, b.center, b.radius)).collect();
        for (a, &i) in kept.iter().enumerate() {
            for &j in &kept[a + 1..] {
                prop_assert!(members[i].iter().all(|y| !members[j].contains(y)));
            }
        }
        for (i, b) in balls.iter().enumerate() {
            let hit = kept.iter().any(|&k| {
                balls[k].radius >= b.radius
                    && members[k].iter().any(|y| members[i].contains(y))
                    && members[i].iter().all(|&y| space.distance(balls[k].center, y) < 5.0 * balls[k].radius)
            });
            prop_assert!(hit, "ball {} not absorbed", i);
        }
    }
}

/// Unit masses at the integers `0..n`. Every ball ratio is at most 3.
fn integer_line(n: usize) -> MetricMeasureSpace {
    let atoms = (0..n).map(|i| Atom { id: i as u64, mass: 1.0 }).collect();
    build_space(atoms, MetricSpec::Euclidean((0..n).map(|i| vec![i as f64]).collect())).unwrap()
}

#[test]
fn refined_containment_at_the_threshold() {
    // μ(B0) = 2 c^j + 1 atoms and a single atom in F, so the hypothesis holds with one unit to spare
    for (n, j) in [(40usize, 2u32), (600, 5)] {
        let space = integer_line(n);
        let c = doubling_constant(&space);
        assert!((c - 3.0).abs() < 1e-12, "doubling {c}");
        if n <= 40 {
            assert!(rel_close(c, brute_doubling(&space), 1e-12));
        }
        let half = 3f64.powi(j as i32);
        let center = n / 2;
        let b0 = Ball::new(center, half + 0.5);
        for offset in [0i64, 1, -(half as i64) / 2, half as i64] {
            let x = (center as i64 + offset) as u64;
            let instance = CoverInstance::new(&space, b0, &[x]).unwrap();
            assert_eq!(instance.b0_mass(), 2.0 * half + 1.0);
            assert!(refined_containment_check(&instance, j).unwrap(), "j {j} offset {offset}");
            let result = czd_cover_with(&instance, c).unwrap();
            assert!(result.holds());
            assert!(result.balls.iter().all(|b| b.k >= j));
            assert!(dilates_within(&instance, &result, refined_containment_factor(j)).unwrap());
        }
        let two = CoverInstance::new(&space, b0, &[center as u64, center as u64 + 1]).unwrap();
        assert!(matches!(refined_containment_check(&two, j), Err(Error::HypothesisViolated(_))));
    }
}

#[test]
fn instance_validation() {
    let space = integer_line(10);
    let b0 = Ball::new(5, 1.5);
    assert!(matches!(CoverInstance::new(&space, b0, &[0]), Err(Error::HypothesisViolated(_))));
    assert!(matches!(CoverInstance::new(&space, b0, &[4, 5]), Err(Error::HypothesisViolated(_))));
    assert!(CoverInstance::new(&space, b0, &[4]).is_ok());
    assert!(CoverInstance::new(&space, Ball::new(5, 0.0), &[]).is_err());
    assert!(CoverInstance::new(&space, b0, &[99]).is_err());
    let instance = CoverInstance::new(&space, b0, &[2]).unwrap();
    assert!(instance.e().is_empty());
    assert!(matches!(stopping_radius(&instance, 2), Err(Error::NotInE(2))));
    let result = czd_cover(&instance).unwrap();
    assert!(result.balls.is_empty());
    assert!(result.holds());
}

#[test]
fn cover_is_deterministic() {
    let space = integer_line(64);
    let instance = CoverInstance::new(&space, Ball::new(32, 20.5), &[20, 21, 30, 33, 34, 35, 50, 51]).unwrap();
    let a = czd_cover(&instance).unwrap();
    let b = czd_cover(&instance).unwrap();
    assert_eq!(a, b);
    assert!(a.holds());
}
