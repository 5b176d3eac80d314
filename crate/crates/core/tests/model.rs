use krotov_lq::scenario::{format_scenario, parse_scenario};
use krotov_lq::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn ex1_data() -> ProblemData {
    ExampleId::Ex1.problem().unwrap().data()
}

#[test]
fn built_in_examples_validate() {
    for id in ExampleId::ALL {
        let problem = id.problem().unwrap_or_else(|e| panic!("{id}: {e}"));
        assert_eq!(problem.clone().data().validate().unwrap(), problem, "{id}");
        assert_eq!(id.as_str().parse::<ExampleId>().unwrap(), id);
    }
    let ex1 = ExampleId::Ex1.problem().unwrap();
    assert_eq!((ex1.n(), ex1.m()), (1, 1));
    assert!(!ex1.horizon().is_finite());
}

#[test]
fn weight_and_shape_errors() {
    let mut raw = ex1_data();
    raw.r = DMatrix::zeros(1, 1);
    assert!(matches!(raw.validate(), Err(Error::NonPdWeight { .. })));

    let mut raw = ex1_data();
    raw.q = DMatrix::from_element(1, 1, -1.0);
    assert!(matches!(raw.validate(), Err(Error::NonPsdWeight { .. })));

    let mut raw = ExampleId::Ex5.problem().unwrap().data();
    raw.x0 = DVector::zeros(3);
    assert!(matches!(raw.validate(), Err(Error::DimensionMismatch(_))));

    let mut raw = ex1_data();
    raw.f = Some(DMatrix::identity(1, 1));
    assert!(matches!(raw.validate(), Err(Error::InfiniteHorizonWithTerminalCost)));

    let mut raw = ExampleId::Ex3.problem().unwrap().data();
    raw.horizon = Horizon::Infinite { t0: 0.0 };
    raw.f = None;
    assert!(matches!(raw.validate(), Err(Error::TimeVaryingInfiniteHorizon)));

    let mut raw = ex1_data();
    raw.horizon = Horizon::Finite { t0: 2.0, tf: 1.0 };
    assert!(raw.validate().is_err());
}

#[test]
fn time_matrix_evaluation() {
    let c = TimeMatrix::from_rows(2, 2, &[0.0, 1.0, 1.0, 1.0]);
    assert_eq!(c.eval(3.7).unwrap(), DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 1.0]));
    let tv = TimeMatrix::scaled(DMatrix::from_element(1, 1, -1.0), Profile::ReciprocalShift { scale: 1.0, shift: 1.0 });
    assert_eq!(tv.eval(0.0).unwrap()[(0, 0)], -1.0);
    assert_eq!(tv.eval(1.0).unwrap()[(0, 0)], -0.5);
    assert!(matches!(tv.eval(-1.0), Err(Error::ProfileSingularity { .. })));
    // d/dt of −1/(t+1) is 1/(t+1)²
    assert!((tv.derivative(1.0).unwrap()[(0, 0)] - 0.25).abs() < 1e-15);
}

#[test]
fn reference_evaluation() {
    let s = ReferenceSignal::Sinusoid { amplitude: DVector::from_element(1, 0.5), omega: 0.01 * std::f64::consts::PI };
    assert_eq!(s.eval(0.0)[0], 0.0);
    assert!((s.eval(50.0)[0] - 0.5).abs() < 1e-15);
    let r = ReferenceSignal::Ramp { slope: DVector::from_element(1, 1.0) };
    assert_eq!(r.eval(3.0)[0], 3.0);
    assert_eq!(ReferenceSignal::Zero { dim: 2 }.eval(7.0), DVector::zeros(2));
}

#[test]
fn scenario_parse_errors_carry_line_numbers() {
    let text = "A = -1\nB = 1\nQ = 1\nR = 1\ntf = inf\nx0 = 1\nfoo = 2\n";
    assert!(matches!(parse_scenario(text), Err(Error::Parse { line: 7, .. })));
    let text = "A = -1\nA = 2\n";
    assert!(matches!(parse_scenario(text), Err(Error::Parse { line: 2, .. })));
    let text = "A = 1, 2; 3\nB = 1\nQ = 1\nR = 1\ntf = inf\nx0 = 1\n";
    assert!(matches!(parse_scenario(text), Err(Error::Parse { line: 1, .. })));
    let ok = "# comment\nA = 0,1; 1,1   # trailing\nB = 1,1; 0,1\nQ = 2,0; 0,4\nR = 0.5,0; 0,0.25\ntf = inf\nx0 = 10, 5\n";
    let p = parse_scenario(ok).unwrap().validate().unwrap();
    assert_eq!(p, ExampleId::Ex5.problem().unwrap().with_x0(DVector::from_vec(vec![10.0, 5.0])).unwrap());
}

fn arb_matrix(r: usize, c: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-50.0f64..50.0, r * c).prop_map(move |v| DMatrix::from_row_slice(r, c, &v))
}

fn arb_spd(n: usize, shift: f64) -> impl Strategy<Value = DMatrix<f64>> {
    arb_matrix(n, n).prop_map(move |l| &l * l.transpose() / 50.0 + DMatrix::identity(n, n) * shift)
}

prop_compose! {
    fn arb_problem()(n in 1usize..=3, m in 1usize..=2, tracking in any::<bool>(), finite in any::<bool>())
        (a in arb_matrix(n, n), b in arb_matrix(n, m), q in arb_spd(n, 0.0), r in arb_spd(m, 0.5),
         f in arb_spd(n, 0.0), x0 in proptest::collection::vec(-10.0f64..10.0, n),
         tf in 0.5f64..20.0, varying in any::<bool>(), scale in -3.0f64..3.0, ref_kind in 0usize..4,
         amp in proptest::collection::vec(-2.0f64..2.0, n), omega in 0.01f64..5.0,
         tracking in Just(tracking), finite in Just(finite), n in Just(n))
        -> ProblemData
    {
        let varying = varying && finite;
        let a = if varying {
            TimeMatrix::scaled(a, Profile::ReciprocalShift { scale, shift: 1.0 })
        } else {
            TimeMatrix::constant(a)
        };
        let reference = match (tracking, ref_kind) {
            (false, _) | (true, 0) => None,
            (true, 1) => Some(ReferenceSignal::Constant(DVector::from_vec(amp))),
            (true, 2) => Some(ReferenceSignal::Ramp { slope: DVector::from_vec(amp) }),
            _ => Some(ReferenceSignal::Sinusoid { amplitude: DVector::from_vec(amp), omega }),
        };
        ProblemData {
            kind: if tracking { ProblemKind::Tracking } else { ProblemKind::Regulation },
            a,
            b: TimeMatrix::constant(b),
            c: tracking.then(|| TimeMatrix::constant(DMatrix::identity(n, n))),
            q,
            r,
            f: finite.then_some(f),
            horizon: if finite { Horizon::Finite { t0: 0.0, tf } } else { Horizon::Infinite { t0: 0.0 } },
            x0: DVector::from_vec(x0),
            reference,
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn scenario_text_round_trips(data in arb_problem()) {
        let validated = data.clone().validate().unwrap();
        let text = format_scenario(&data);
        let reparsed = parse_scenario(&text).unwrap();
        prop_assert_eq!(reparsed.clone().validate().unwrap(), validated);
        prop_assert_eq!(format_scenario(&reparsed), text);
    }

    #[test]
    fn validation_is_idempotent(data in arb_problem()) {
        let once = data.validate().unwrap();
        let twice = once.data().validate().unwrap();
        prop_assert_eq!(twice, once);
    }
}
