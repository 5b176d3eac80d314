mod common;

use common::*;
use krotov_lq::tracking::*;
use krotov_lq::*;
use nalgebra::{DMatrix, DVector};

fn ex2_p() -> DMatrix<f64> {
    solve_standard_are(&ExampleId::Ex2.problem().unwrap()).unwrap()
}

fn with_reference(id: ExampleId, reference: Option<ReferenceSignal>, horizon: Option<Horizon>) -> LqProblem {
    let mut raw = id.problem().unwrap().data();
    raw.reference = reference;
    if let Some(h) = horizon {
        raw.horizon = h;
    }
    raw.validate().unwrap()
}

/// Independent scalar oracle: `g(t) = ∫ₜ^∞ e^{λ(τ−t)} c m α sin ωτ dτ`
/// in closed form, `λ = a − b²p/n`.
fn scalar_sinusoid_oracle(d: &ScalarTrackingData, p: f64, t: f64) -> f64 {
    let lambda = d.a - d.b * d.b * p / d.n;
    let w = d.omega;
    let k = d.c * d.m * d.alpha;
    // ∫₀^∞ e^{λs} sin(ω(t+s)) ds = (−λ sin ωt + ω cos ωt) / (λ² + ω²)
    k * (-lambda * (w * t).sin() + w * (w * t).cos()) / (lambda * lambda + w * w)
}

#[test]
fn zero_reference_gives_zero_feedforward() {
    let problem = with_reference(ExampleId::Ex4, None, None);
    let p = integrate_mdre(&problem, 1e-2).unwrap();
    let sol = integrate_g(&problem, &p, 1e-2).unwrap();
    assert!(sol.g.values().unwrap().iter().all(|v| v.amax() == 0.0));

    let ex2 = with_reference(ExampleId::Ex2, None, None);
    let g = steady_state_g(&ex2, &ex2_p(), 3.0, None).unwrap();
    assert_eq!(g, DVector::zeros(1));
    let d = ScalarTrackingData::from_problem(&ExampleId::Ex2.problem().unwrap()).unwrap();
    let zero = ScalarTrackingData { alpha: 0.0, ..d };
    assert_eq!(sinusoid_feedforward_closed_form(&zero, ex2_p()[(0, 0)]).unwrap(), (0.0, 0.0));
}

#[test]
fn ramp_tracking_feedforward_meets_boundary_and_residual() {
    let ex4 = ExampleId::Ex4.problem().unwrap();
    let p = integrate_mdre(&ex4, 1e-3).unwrap();
    let sol = integrate_g(&ex4, &p, 1e-3).unwrap();
    assert_eq!(sol.method, FeedforwardMethod::BackwardOde);
    assert!((sol.g.at(5.0)[0] - 50.0).abs() < 1e-12);
    assert!(sol.ode_residual_max < 1e-5, "residual {}", sol.ode_residual_max);
    assert!((p.at(0.0)[(0, 0)] - 30.653).abs() < 1e-3);
}

#[test]
fn zero_terminal_weight_gives_zero_terminal_feedforward() {
    let mut raw = ExampleId::Ex4.problem().unwrap().data();
    raw.f = Some(DMatrix::zeros(1, 1));
    let problem = raw.validate().unwrap();
    let p = integrate_mdre(&problem, 1e-2).unwrap();
    let sol = integrate_g(&problem, &p, 1e-2).unwrap();
    assert_eq!(sol.g.at(5.0)[0], 0.0);
    assert!(sol.g.at(2.5)[0] > 1.0);
}

#[test]
fn scalar_sinusoid_feedforward_three_ways() {
    let ex2 = ExampleId::Ex2.problem().unwrap();
    let p = ex2_p();
    let d = ScalarTrackingData::from_problem(&ex2).unwrap();
    let (sin_c, cos_c) = sinusoid_feedforward_closed_form(&d, p[(0, 0)]).unwrap();
    assert!((sin_c - 2.2360).abs() < 2e-4, "{sin_c}");
    assert!((cos_c - 3.93e-4).abs() < 1e-5, "{cos_c}");
    let harmonic = harmonic_g(&ex2, &p).unwrap();
    for t in [0.0, 13.0, 50.0, 171.3] {
        let closed = sin_c * (d.omega * t).sin() + cos_c * (d.omega * t).cos();
        let oracle = scalar_sinusoid_oracle(&d, p[(0, 0)], t);
        let quad = steady_state_g(&ex2, &p, t, None).unwrap()[0];
        assert!((closed - oracle).abs() < 1e-10);
        assert!((quad - closed).abs() < 1e-4, "t = {t}: {quad} vs {closed}");
        assert!((harmonic.eval(t)[0] - closed).abs() < 1e-10);
    }
}

#[test]
fn low_frequency_limit_matches_constant_reference() {
    let ex2 = ExampleId::Ex2.problem().unwrap();
    let p = ex2_p();
    let d = ScalarTrackingData { omega: 1e-7, ..ScalarTrackingData::from_problem(&ex2).unwrap() };
    let (sin_c, cos_c) = sinusoid_feedforward_closed_form(&d, p[(0, 0)]).unwrap();
    let constant = with_reference(ExampleId::Ex2, Some(ReferenceSignal::Constant(DVector::from_element(1, d.alpha))), None);
    let quad = steady_state_g(&constant, &p, 0.0, None).unwrap()[0];
    assert!((sin_c - quad).abs() < 1e-6, "{sin_c} vs {quad}");
    assert!(cos_c.abs() < 1e-6);
}

#[test]
fn closed_form_rejects_unstable_exponent() {
    let d = ScalarTrackingData::from_problem(&ExampleId::Ex2.problem().unwrap()).unwrap();
    assert!(matches!(sinusoid_feedforward_closed_form(&d, 0.05), Err(Error::UnstableExponent { .. })));
}

#[test]
fn two_channel_sinusoid_feedforward_is_pure_sinusoid() {
    let ex6 = ExampleId::Ex6.problem().unwrap();
    let p = solve_standard_are(&ex6).unwrap();
    let harmonic = harmonic_g(&ex6, &p).unwrap();
    let SteadyStateG::Harmonic { omega, .. } = &harmonic else {
        panic!("expected a harmonic feedforward");
    };
    let ReferenceSignal::Sinusoid { omega: w, .. } = ex6.reference() else { unreachable!() };
    assert_eq!(omega, w);
    for t in [0.0, 7.5, 40.0, 100.0] {
        let quad = steady_state_g(&ex6, &p, t, None).unwrap();
        assert!((&quad - harmonic.eval(t)).amax() < 1e-6, "t = {t}");
        let r = g_residual(&ex6, &p, &harmonic.eval(t), &harmonic.derivative(t), t).unwrap();
        assert!(r.amax() < 1e-9);
    }
    let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.5).collect();
    let sol = steady_state_feedforward(&ex6, &p, &grid, None).unwrap();
    assert_eq!(sol.method, FeedforwardMethod::TruncatedIntegral);
    assert!(sol.ode_residual_max < 1e-6, "{}", sol.ode_residual_max);
}

#[test]
fn long_finite_horizon_approaches_steady_state() {
    let finite = with_reference(
        ExampleId::Ex2,
        Some(ExampleId::Ex2.problem().unwrap().reference().clone()),
        Some(Horizon::Finite { t0: 0.0, tf: 400.0 }),
    );
    let p = integrate_mdre(&finite, 1e-3).unwrap();
    let sol = integrate_g(&finite, &p, 1e-3).unwrap();
    let steady = steady_state_g(&ExampleId::Ex2.problem().unwrap(), &ex2_p(), 0.0, None).unwrap();
    assert!((sol.g.at(0.0)[0] - steady[0]).abs() < 1e-4);
    assert!(sol.ode_residual_max < 1e-5);
}

#[test]
fn feedforward_is_linear_in_the_reference() {
    let sin = |a: [f64; 2]| {
        Some(ReferenceSignal::Sinusoid { amplitude: DVector::from_row_slice(&a), omega: 0.2 })
    };
    let finite = Some(Horizon::Finite { t0: 0.0, tf: 4.0 });
    let make = |a| {
        let mut raw = ExampleId::Ex6.problem().unwrap().data();
        raw.reference = sin(a);
        raw.horizon = finite.unwrap();
        raw.f = Some(DMatrix::identity(2, 2));
        raw.validate().unwrap()
    };
    let (p1, p2, p12) = (make([1.0, 0.0]), make([0.0, -2.0]), make([1.0, -2.0]));
    let p = integrate_mdre(&p1, 1e-2).unwrap();
    let g = |pr: &LqProblem| integrate_g(pr, &p, 1e-2).unwrap().g;
    let (g1, g2, g12) = (g(&p1), g(&p2), g(&p12));
    for t in [0.0, 1.3, 3.99] {
        assert!((g1.at(t) + g2.at(t) - g12.at(t)).amax() < 1e-9);
    }

    let inf = |a| with_reference(ExampleId::Ex6, sin(a), None);
    let pinf = solve_standard_are(&inf([1.0, 0.0])).unwrap();
    let s = |a| steady_state_g(&inf(a), &pinf, 2.0, None).unwrap();
    assert!((s([1.0, 0.0]) + s([0.0, -2.0]) - s([1.0, -2.0])).amax() < 1e-9);
}

#[test]
fn steady_state_requires_stable_closed_loop() {
    let ex2 = ExampleId::Ex2.problem().unwrap();
    assert!(matches!(
        steady_state_g(&ex2, &DMatrix::zeros(1, 1), 0.0, None),
        Err(Error::NotHurwitz { .. })
    ));
    assert!(truncation_horizon(&DMatrix::from_element(1, 1, -2.0)).unwrap() >= 11.5);
}

#[test]
fn random_steady_state_matches_harmonic_balance() {
    let mut g = rng(77);
    for _ in 0..10 {
        let base = random_lti(&mut g, 3, 2, Horizon::Infinite { t0: 0.0 });
        let mut raw = base.data();
        raw.kind = ProblemKind::Tracking;
        raw.c = Some(TimeMatrix::constant(DMatrix::identity(3, 3)));
        raw.reference = Some(ReferenceSignal::Sinusoid {
            amplitude: DVector::from_fn(3, |_, _| rand::Rng::random_range(&mut g, -1.0..1.0)),
            omega: 0.7,
        });
        let problem = raw.validate().unwrap();
        let p = solve_standard_are(&problem).unwrap();
        let harmonic = harmonic_g(&problem, &p).unwrap();
        let quad = steady_state_g(&problem, &p, 1.1, None).unwrap();
        let scale = 1.0 + quad.amax();
        assert!((quad - harmonic.eval(1.1)).amax() < 1e-6 * scale);
    }
}
