use crn_core::fixtures;
use crn_core::fock::{ack_residual, TruncationBox};
use crn_core::net::CountVector;
use crn_core::ssa::{compare_to_poisson, simulate, Histogram};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

#[test]
fn birth_death_time_average_approaches_three() {
    let net = fixtures::birth_death(3.0f64, 1.0);
    let traj = simulate(&net, &CountVector(vec![0]), 1.7e5, 11).unwrap();
    assert!(traj.num_jumps() >= 1_000_000, "{}", traj.num_jumps());
    let mean = traj.time_average()[0];
    assert!((mean - 3.0).abs() <= 0.05, "{mean}");
}

#[test]
fn synthetic_poisson_samples_are_close() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (p1, p2) = (Poisson::new(3.0).unwrap(), Poisson::new(0.7).unwrap());
    let mut h = Histogram::default();
    for _ in 0..100_000 {
        let n: [f64; 2] = [p1.sample(&mut rng), p2.sample(&mut rng)];
        h.record(&CountVector(n.iter().map(|&x| x as u64).collect()));
    }
    let cmp = compare_to_poisson(&h, &[3.0f64, 0.7]).unwrap();
    assert!(cmp.tv_distance <= 0.02, "{}", cmp.tv_distance);
    assert!((cmp.per_species_means[0] - 3.0).abs() < 0.03);
    assert!((cmp.per_species_means[1] - 0.7).abs() < 0.03);
}

#[test]
fn single_precision_pipeline() {
    let net = fixtures::diatomic::<f32>(2.0, 1.0);
    let r = ack_residual(&net, &[0.5f32, 1.0], &TruncationBox::new(vec![15, 15]).unwrap()).unwrap();
    assert!(r.interior_residual_l1 <= 1e-5, "{}", r.interior_residual_l1);
    let unbalanced = ack_residual(&net, &[1.0f32, 1.0], &TruncationBox::new(vec![15, 15]).unwrap()).unwrap();
    assert!(unbalanced.interior_residual_l1 > 0.1);
}
