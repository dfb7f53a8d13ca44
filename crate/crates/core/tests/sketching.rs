use sign_stable::collision::bound_acos;
use sign_stable::similarity::rho_2;
use sign_stable::sketch::{project, sketch, sketch_many};
use sign_stable::stable::{sample_stable, Skewness};
use sign_stable::stats::binomial_std_err;
use sign_stable::verify::random_histogram;
use sign_stable::{Execution, SeededRng, SketchConfig, SparseVector, StableParams, StreamSketchState};

#[test]
fn gaussian_sketches_track_the_angle() {
    let u = SparseVector::new(4, [(0, 1.0), (1, 1.0)]).unwrap();
    let v = SparseVector::new(4, [(1, 1.0), (2, 1.0)]).unwrap();
    let config = SketchConfig::new(200_000, 2.0, 1).unwrap();
    let f = sketch(&u, &config).unwrap().collision_fraction(&sketch(&v, &config).unwrap()).unwrap();
    // ρ₂ = 1/2, so the probability is exactly 1/3.
    assert!((rho_2(&u, &v).unwrap() - 0.5).abs() < 1e-15);
    let p = bound_acos(0.5).unwrap();
    assert!((f - p).abs() <= 3.0 * binomial_std_err(p, 200_000), "{f}");
}

#[test]
fn batch_engine_is_bit_identical() {
    let mut rng = SeededRng::new(2, 0);
    let vectors: Vec<SparseVector> = (0..30).map(|i| random_histogram(200, [0.0, 0.9][i % 2], &mut rng)).collect();
    for alpha in [0.3, 1.0, 2.0] {
        let config = SketchConfig::new(3000, alpha, 77).unwrap();
        let seq = sketch_many(&vectors, &config, Execution::Sequential).unwrap();
        let par = sketch_many(&vectors, &config, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        for (v, s) in vectors.iter().zip(&seq) {
            assert_eq!(&sketch(v, &config).unwrap(), s);
        }
    }
}

#[test]
fn stream_cancellation_leaves_no_trace() {
    let config = SketchConfig::new(512, 1.0, 4).unwrap();
    let u = SparseVector::new(10, [(2, 1.5), (7, 0.5)]).unwrap();
    let mut state = StreamSketchState::new(config);
    state.update(7, 0.5);
    state.update(4, 5.0);
    state.update(2, 1.5);
    state.update(4, -5.0);
    assert_eq!(state.updates(), 4);
    assert_eq!(state.sum_counter(), 2.0);
    let batch = project(&u, &config).unwrap();
    for (s, b) in state.projections().iter().zip(&batch) {
        assert!((s - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }
}

#[test]
fn sketches_depend_on_seed_and_alpha() {
    let u = SparseVector::new(5, [(0, 1.0), (3, -2.0)]).unwrap();
    let a = sketch(&u, &SketchConfig::new(256, 1.0, 1).unwrap()).unwrap();
    let b = sketch(&u, &SketchConfig::new(256, 1.0, 2).unwrap()).unwrap();
    let c = sketch(&u, &SketchConfig::new(256, 1.5, 1).unwrap()).unwrap();
    assert_ne!(a.words(), b.words());
    assert_ne!(a.words(), c.words());
    assert!(a.collision_fraction(&b).is_err());
}

#[test]
fn skewed_samples_are_positive() {
    let params = StableParams::new(0.4, 1.0, 1.0).unwrap();
    assert_eq!(params.skewness(), Skewness::Maximal);
    let xs = sample_stable(params, &SeededRng::new(8, 0), 100_000).unwrap();
    assert!(xs.iter().all(|&x| x > 0.0 && x.is_finite()));
}
