mod common;

use common::*;
use krotov_lq::krotov::largest_certified;
use krotov_lq::ode::uniform_grid;
use krotov_lq::published;
use krotov_lq::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

fn scalar(v: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, v)
}

fn vec1(v: f64) -> DVector<f64> {
    DVector::from_element(1, v)
}

#[test]
fn scalar_running_function_matches_hand_expansion() {
    let ex1 = ExampleId::Ex1.problem().unwrap();
    // s = x²(1 − 2p) + 2pxu + u² for a = −1, b = q = r = 1
    let hand = |p: f64, x: f64, u: f64| x * x * (1.0 - 2.0 * p) + 2.0 * p * x * u + u * u;
    let s = s_value(&ex1, &KrotovFunction::constant(scalar(0.2)), &vec1(1.0), &vec1(0.0), 0.0).unwrap();
    assert!((s - 0.6).abs() < 1e-14);
    let s = s_value(&ex1, &KrotovFunction::zero(1), &vec1(2.0), &vec1(1.0), 0.0).unwrap();
    assert!((s - 5.0).abs() < 1e-14);
    let p = 2f64.sqrt() - 1.0;
    let s = s_value(&ex1, &KrotovFunction::constant(scalar(p)), &vec1(1.0), &vec1(-p), 0.0).unwrap();
    assert!(s.abs() < 1e-14);
    for (x, u) in [(0.3, -1.2), (2.0, 0.5), (-1.0, 4.0)] {
        let s = s_value(&ex1, &KrotovFunction::constant(scalar(0.7)), &vec1(x), &vec1(u), 0.0).unwrap();
        assert!((s - hand(0.7, x, u)).abs() < 1e-12);
    }
}

#[test]
fn running_function_rejects_bad_arguments() {
    let ex3 = ExampleId::Ex3.problem().unwrap();
    let kf = KrotovFunction::constant(scalar(1.0));
    assert!(matches!(
        s_value(&ex3, &kf, &vec1(1.0), &vec1(0.0), 6.0),
        Err(Error::OutOfHorizon { .. })
    ));
    assert!(s_value(&ex3, &kf, &DVector::zeros(2), &vec1(0.0), 1.0).is_err());
}

#[test]
fn terminal_function_examples() {
    let ex3 = ExampleId::Ex3.problem().unwrap();
    let p = integrate_mdre(&ex3, 1e-3).unwrap();
    let kf = KrotovFunction::new(p, None);
    for xf in [-3.0, 0.0, 1.5, 20.0] {
        assert_eq!(s_terminal_value(&ex3, &kf, &vec1(xf)).unwrap(), 0.0);
    }
    let zero = KrotovFunction::zero(1);
    assert!((s_terminal_value(&ex3, &zero, &vec1(3.0)).unwrap() - 9.0).abs() < 1e-14);

    let ex1 = ExampleId::Ex1.problem().unwrap();
    assert!(matches!(s_terminal_value(&ex1, &zero, &vec1(1.0)), Err(Error::InfiniteHorizon)));
}

#[test]
fn tracking_terminal_function_is_constant_under_boundary_values() {
    // F(z − x)² − (p x² − 2g x) with F = p = 10, g = 50, z = 5 gives 250 − 100x + 100x.
    let ex4 = ExampleId::Ex4.problem().unwrap();
    let kf = KrotovFunction::new(MatrixPath::Constant(scalar(10.0)), Some(VectorPath::Constant(vec1(50.0))));
    for xf in [-4.0, 0.0, 5.0, 11.0] {
        let sf = s_terminal_value(&ex4, &kf, &vec1(xf)).unwrap();
        assert!((sf - 250.0).abs() < 1e-10, "xf = {xf}: {sf}");
    }
}

#[test]
fn decomposition_examples() {
    let ex1 = ExampleId::Ex1.problem().unwrap();
    let p = 2f64.sqrt() - 1.0;
    let d = decompose_s(&ex1, &KrotovFunction::constant(scalar(p)), 0.0).unwrap();
    assert!(d.m_resid[(0, 0)].abs() < 1e-15);
    let shift = d.completed_square_shift(&vec1(2.0), &vec1(0.5));
    assert!((shift[0] - (0.5 + p * 2.0)).abs() < 1e-14);

    let ex6 = ExampleId::Ex6.problem().unwrap();
    let d = decompose_s(&ex6, &KrotovFunction::zero(2), 0.3).unwrap();
    let sys = ex6.at(0.3).unwrap();
    assert_eq!(d.m_resid, sys.q_eff);
    assert!((&d.affine_coeff - &sys.cq_z).amax() < 1e-15);
    let u = DVector::from_vec(vec![1.0, -2.0]);
    let ru = u.dot(&(ex6.r() * &u));
    assert!((d.completed_square_shift(&DVector::zeros(2), &u).norm_squared() - ru).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reconstruction_identity(seed in any::<u64>(), which in 0usize..4) {
        let mut g = rng(seed);
        let id = [ExampleId::Ex1, ExampleId::Ex3, ExampleId::Ex5, ExampleId::Ex6][which];
        let problem = id.problem().unwrap();
        let n = problem.n();
        let t0 = problem.horizon().t0();
        let tf = problem.horizon().tf().unwrap_or(t0 + 10.0);
        let times = uniform_grid(t0, tf, 0.5).unwrap();
        let ps: Vec<DMatrix<f64>> = times.iter().map(|_| random_matrix(&mut g, n, n, 5.0)).collect();
        let gs: Vec<DVector<f64>> = times.iter().map(|_| DVector::from_fn(n, |_, _| g.random_range(-3.0..3.0))).collect();
        let kf = KrotovFunction::new(
            MatrixPath::sampled(times.clone(), ps).unwrap(),
            Some(VectorPath::sampled(times, gs).unwrap()),
        );
        for _ in 0..20 {
            let t = g.random_range(t0..tf);
            let x = DVector::from_fn(n, |_, _| g.random_range(-10.0..10.0));
            let u = DVector::from_fn(problem.m(), |_, _| g.random_range(-10.0..10.0));
            let direct = s_value(&problem, &kf, &x, &u, t).unwrap();
            let parts = decompose_s(&problem, &kf, t).unwrap().eval(&x, &u);
            prop_assert!((direct - parts).abs() <= 1e-10 * direct.abs().max(1.0), "{direct} vs {parts}");
        }
    }
}

#[test]
fn published_p4_reconstruction() {
    let ex5 = ExampleId::Ex5.problem().unwrap();
    let p4 = DMatrix::from_row_slice(2, 2, &published::EX5_P[3]);
    let kf = KrotovFunction::constant(p4);
    let d = decompose_s(&ex5, &kf, 0.0).unwrap();
    let mut g = rng(5);
    for _ in 0..100 {
        let x = DVector::from_fn(2, |_, _| g.random_range(-5.0..5.0));
        let u = DVector::from_fn(2, |_, _| g.random_range(-5.0..5.0));
        let direct = s_value(&ex5, &kf, &x, &u, 0.0).unwrap();
        assert!((direct - d.eval(&x, &u)).abs() <= 1e-10 * direct.abs().max(1.0));
    }
}

#[test]
fn zero_krotov_function_reproduces_cost() {
    for id in [ExampleId::Ex1, ExampleId::Ex3, ExampleId::Ex5] {
        let problem = id.problem().unwrap();
        let law = ControlLaw::constant(DMatrix::from_element(problem.m(), problem.n(), 0.3));
        let t_end = problem.horizon().tf().unwrap_or(8.0);
        let traj = simulate(&problem, &law, 1e-3, t_end).unwrap();
        let jeq = equivalent_cost(&problem, &KrotovFunction::zero(problem.n()), &traj).unwrap();
        assert!((jeq - traj.total_cost).abs() <= 1e-12 * traj.total_cost.max(1.0), "{id}");
    }
}

#[test]
fn equivalent_cost_for_solving_function() {
    let ex1 = ExampleId::Ex1.problem().unwrap();
    let p = 2f64.sqrt() - 1.0;
    let law = ControlLaw::constant(scalar(p));
    let traj = simulate(&ex1, &law, 1e-3, 30.0).unwrap();
    let jeq = equivalent_cost(&ex1, &KrotovFunction::constant(scalar(p)), &traj).unwrap();
    assert!((jeq - traj.total_cost).abs() / traj.total_cost < 1e-6);
    // with the solving function, J_eq collapses to q(x0)/2 plus a vanishing tail
    assert!((jeq - 0.5 * p).abs() < 1e-6);
}

#[test]
fn equivalent_cost_for_arbitrary_nonsymmetric_function() {
    let ex5 = ExampleId::Ex5.problem().unwrap();
    let are = solve_standard_are(&ex5).unwrap();
    let law = gain_from_p(&ex5, &MatrixPath::Constant(are), None).unwrap();
    let traj = simulate(&ex5, &law, 1e-3, 15.0).unwrap();
    let mut g = rng(9);
    for _ in 0..10 {
        let kf = KrotovFunction::constant(random_matrix(&mut g, 2, 2, 10.0));
        let jeq = equivalent_cost(&ex5, &kf, &traj).unwrap();
        assert!((jeq - traj.total_cost).abs() / traj.total_cost < 1e-6);
    }
}

#[test]
fn equivalent_cost_rejects_foreign_windows() {
    let ex3 = ExampleId::Ex3.problem().unwrap();
    let law = ControlLaw::constant(scalar(1.0));
    let traj = simulate(&ex3, &law, 1e-2, 5.0).unwrap();
    let short = KrotovFunction::new(
        MatrixPath::sampled(vec![0.0, 1.0, 2.0], vec![scalar(1.0); 3]).unwrap(),
        None,
    );
    assert!(matches!(equivalent_cost(&ex3, &short, &traj), Err(Error::GridMismatch(_))));
}

#[test]
fn scalar_certificates() {
    let ex1 = ExampleId::Ex1.problem().unwrap();
    let grid = [0.0];
    let c = convexity_certificate(&ex1, &KrotovFunction::constant(scalar(0.2)), &grid).unwrap();
    assert!(c.certified);
    assert!((c.min_eig_over_grid - 0.56).abs() < 1e-12);
    assert_eq!(c.terminal_min_eig, f64::INFINITY);
    let c = convexity_certificate(&ex1, &KrotovFunction::constant(scalar(0.5)), &grid).unwrap();
    assert!(!c.certified);
    assert!((c.min_eig_over_grid + 0.25).abs() < 1e-12);
    assert_eq!(c.failure_time, Some(0.0));
    let c = convexity_certificate(&ex1, &KrotovFunction::constant(scalar(2f64.sqrt() - 1.0)), &grid).unwrap();
    assert!(c.certified);
}

#[test]
fn certified_set_is_an_interval_ending_at_the_stabilizing_root() {
    let ex1 = ExampleId::Ex1.problem().unwrap();
    let ok = |p: f64| convexity_certificate(&ex1, &KrotovFunction::constant(scalar(p)), &[0.0]).unwrap().certified;
    let flags: Vec<bool> = (1..1000).map(|i| ok(i as f64 / 1000.0)).collect();
    let first_fail = flags.iter().position(|f| !f).unwrap();
    assert!(flags[..first_fail].iter().all(|f| *f));
    assert!(flags[first_fail..].iter().all(|f| !f));
    let p_max = largest_certified(&ex1, &[0.0], 0.01, 1.0, 1e-9, |p| KrotovFunction::constant(scalar(p))).unwrap();
    assert!((p_max - (2f64.sqrt() - 1.0)).abs() < 1e-3);
}

#[test]
fn tracking_certificate_bound() {
    let ex2 = ExampleId::Ex2.problem().unwrap();
    let p_max = largest_certified(&ex2, &[0.0], 1e-3, 100.0, 1e-6, |p| KrotovFunction::constant(scalar(p))).unwrap();
    // −p² + 0.2p + 320 = 0
    let root = 0.1 + (0.01f64 + 320.0).sqrt();
    assert!((p_max - root).abs() < 1e-5);
    assert!((p_max - 17.99).abs() < 0.02);
}

#[test]
fn finite_horizon_certificate_checks_terminal_weight() {
    let ex3 = ExampleId::Ex3.problem().unwrap();
    let p = integrate_mdre(&ex3, 1e-3).unwrap();
    let grid = p.times().unwrap().to_vec();
    let c = convexity_certificate(&ex3, &KrotovFunction::new(p, None), &grid).unwrap();
    assert!(c.certified, "{}", c.min_eig_over_grid);
    assert!(c.terminal_min_eig.abs() < 1e-12);
    let too_big = KrotovFunction::constant(scalar(1.5));
    let c = convexity_certificate(&ex3, &too_big, &[0.0, 5.0]).unwrap();
    assert!((c.terminal_min_eig + 0.5).abs() < 1e-12);
    assert!(!c.certified);
}
