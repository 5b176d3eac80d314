//! Problem definitions: time-varying system matrices, reference signals,
//! horizons and the validated [`LqProblem`].
//!
//! Costs follow the ½-convention
//! `J = ½ eᵀ(tf) F e(tf) + ½ ∫ (eᵀQe + uᵀRu) dt` with `e = z − Cx`; for
//! regulation `C = I` and `z ≡ 0`, so `e = −x` and the cost is the usual
//! `½ xᵀFx + ½ ∫ (xᵀQx + uᵀRu)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, inverse, max_abs};

/// Eigenvalue tolerance for weight definiteness checks.
pub const WEIGHT_EIG_TOL: f64 = 1e-10;

/// Scalar time profile multiplying a constant matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Const,
    /// `scale / (t + shift)`
    ReciprocalShift { scale: f64, shift: f64 },
}

impl Profile {
    pub fn value(&self, t: f64) -> Result<f64> {
        match *self {
            Profile::Const => Ok(1.0),
            Profile::ReciprocalShift { scale, shift } => {
                let d = t + shift;
                let v = scale / d;
                if d == 0.0 || !v.is_finite() {
                    Err(Error::ProfileSingularity { t })
                } else {
                    Ok(v)
                }
            }
        }
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        match *self {
            Profile::Const => Ok(0.0),
            Profile::ReciprocalShift { scale, shift } => {
                let d = t + shift;
                let v = -scale / (d * d);
                if d == 0.0 || !v.is_finite() {
                    Err(Error::ProfileSingularity { t })
                } else {
                    Ok(v)
                }
            }
        }
    }
}

/// A matrix-valued function of time: `profile(t) · base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMatrix {
    base: DMatrix<f64>,
    profile: Profile,
}

impl TimeMatrix {
    pub fn constant(m: DMatrix<f64>) -> Self {
        TimeMatrix { base: m, profile: Profile::Const }
    }

    pub fn scaled(base: DMatrix<f64>, profile: Profile) -> Self {
        TimeMatrix { base, profile }
    }

    pub fn from_rows(rows: usize, cols: usize, data: &[f64]) -> Self {
        Self::constant(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn rows(&self) -> usize {
        self.base.nrows()
    }

    pub fn cols(&self) -> usize {
        self.base.ncols()
    }

    pub fn base(&self) -> &DMatrix<f64> {
        &self.base
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn is_time_invariant(&self) -> bool {
        matches!(self.profile, Profile::Const)
    }

    pub fn eval(&self, t: f64) -> Result<DMatrix<f64>> {
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite time {t}")));
        }
        Ok(&self.base * self.profile.value(t)?)
    }

    pub fn derivative(&self, t: f64) -> Result<DMatrix<f64>> {
        Ok(&self.base * self.profile.derivative(t)?)
    }
}

/// Reference signal `z(t)` for tracking problems.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceSignal {
    Zero { dim: usize },
    Constant(DVector<f64>),
    /// `z(t) = slope · t`
    Ramp { slope: DVector<f64> },
    /// `z(t) = amplitude · sin(omega t)` per channel
    Sinusoid { amplitude: DVector<f64>, omega: f64 },
}

impl ReferenceSignal {
    pub fn dim(&self) -> usize {
        match self {
            ReferenceSignal::Zero { dim } => *dim,
            ReferenceSignal::Constant(v) => v.len(),
            ReferenceSignal::Ramp { slope } => slope.len(),
            ReferenceSignal::Sinusoid { amplitude, .. } => amplitude.len(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ReferenceSignal::Zero { .. } => true,
            ReferenceSignal::Constant(v) => v.iter().all(|x| *x == 0.0),
            ReferenceSignal::Ramp { slope } => slope.iter().all(|x| *x == 0.0),
            ReferenceSignal::Sinusoid { amplitude, .. } => amplitude.iter().all(|x| *x == 0.0),
        }
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        match self {
            ReferenceSignal::Zero { dim } => DVector::zeros(*dim),
            ReferenceSignal::Constant(v) => v.clone(),
            ReferenceSignal::Ramp { slope } => slope * t,
            ReferenceSignal::Sinusoid { amplitude, omega } => amplitude * (omega * t).sin(),
        }
    }

    pub fn derivative(&self, t: f64) -> DVector<f64> {
        match self {
            ReferenceSignal::Zero { dim } => DVector::zeros(*dim),
            ReferenceSignal::Constant(v) => DVector::zeros(v.len()),
            ReferenceSignal::Ramp { slope } => slope.clone(),
            ReferenceSignal::Sinusoid { amplitude, omega } => amplitude * (omega * (omega * t).cos()),
        }
    }

    fn check(&self) -> Result<()> {
        let finite = match self {
            ReferenceSignal::Zero { .. } => true,
            ReferenceSignal::Constant(v) => v.iter().all(|x| x.is_finite()),
            ReferenceSignal::Ramp { slope } => slope.iter().all(|x| x.is_finite()),
            ReferenceSignal::Sinusoid { amplitude, omega } => {
                omega.is_finite() && amplitude.iter().all(|x| x.is_finite())
            }
        };
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidArgument("reference signal has non-finite parameters".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Finite { t0: f64, tf: f64 },
    Infinite { t0: f64 },
}

impl Horizon {
    pub fn t0(&self) -> f64 {
        match *self {
            Horizon::Finite { t0, .. } | Horizon::Infinite { t0 } => t0,
        }
    }

    pub fn tf(&self) -> Option<f64> {
        match *self {
            Horizon::Finite { tf, .. } => Some(tf),
            Horizon::Infinite { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Horizon::Finite { .. })
    }

    /// Whether `t` lies in the horizon (with a relative slack of 1e-9).
    pub fn contains(&self, t: f64) -> bool {
        let t0 = self.t0();
        let end = self.tf().unwrap_or(f64::INFINITY);
        let slack = 1e-9 * (1.0 + t0.abs().max(if end.is_finite() { end.abs() } else { 0.0 }));
        t.is_finite() && t >= t0 - slack && t <= end + slack
    }

    pub fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::OutOfHorizon {
                t,
                t0: self.t0(),
                tf: self.tf().unwrap_or(f64::INFINITY),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Regulation,
    Tracking,
}

/// Unvalidated problem description, as read from a scenario file or built
/// in code. `c` defaults to the identity, `f` to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemData {
    pub kind: ProblemKind,
    pub a: TimeMatrix,
    pub b: TimeMatrix,
    pub c: Option<TimeMatrix>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub f: Option<DMatrix<f64>>,
    pub horizon: Horizon,
    pub x0: DVector<f64>,
    pub reference: Option<ReferenceSignal>,
}

impl ProblemData {
    pub fn validate(self) -> Result<LqProblem> {
        validate_problem(self)
    }
}

/// A validated linear-quadratic problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LqProblem {
    kind: ProblemKind,
    a: TimeMatrix,
    b: TimeMatrix,
    c: TimeMatrix,
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    r_inv: DMatrix<f64>,
    f: DMatrix<f64>,
    horizon: Horizon,
    x0: DVector<f64>,
    reference: ReferenceSignal,
}

/// System matrices and derived products frozen at one instant.
#[derive(Debug, Clone)]
pub struct SystemAt {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    /// `CᵀQC`
    pub q_eff: DMatrix<f64>,
    /// `B R⁻¹ Bᵀ`
    pub m: DMatrix<f64>,
    /// `R⁻¹ Bᵀ`
    pub r_inv_bt: DMatrix<f64>,
    pub z: DVector<f64>,
    /// `CᵀQ z`
    pub cq_z: DVector<f64>,
}

fn check_weight(name: &'static str, w: &DMatrix<f64>, strict: bool) -> Result<()> {
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} has non-finite entries")));
    }
    if asymmetry(w) > 1e-10 * (1.0 + max_abs(w)) {
        return Err(Error::InvalidArgument(format!("{name} must be symmetric")));
    }
    let min_eig = crate::linalg::min_sym_eig(w);
    if strict && min_eig <= WEIGHT_EIG_TOL {
        return Err(Error::NonPdWeight { name, min_eig });
    }
    if !strict && min_eig < -WEIGHT_EIG_TOL {
        return Err(Error::NonPsdWeight { name, min_eig });
    }
    Ok(())
}

fn shape(name: &str, got: (usize, usize), want: (usize, usize)) -> Result<()> {
    if got != want {
        Err(Error::DimensionMismatch(format!(
            "{name} is {}x{}, expected {}x{}",
            got.0, got.1, want.0, want.1
        )))
    } else {
        Ok(())
    }
}

fn check_profile_on_horizon(name: &str, tm: &TimeMatrix, horizon: &Horizon) -> Result<()> {
    if tm.base.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} has non-finite entries")));
    }
    if let Profile::ReciprocalShift { scale, shift } = tm.profile {
        if !scale.is_finite() || !shift.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} profile is not finite")));
        }
        let t0 = horizon.t0();
        let end = horizon.tf().unwrap_or(f64::INFINITY);
        let (d0, d1) = (t0 + shift, end + shift);
        if d0 == 0.0 || d1 == 0.0 || d0.signum() != d1.signum() {
            return Err(Error::ProfileSingularity { t: -shift });
        }
    }
    Ok(())
}

/// Checks every [`LqProblem`] invariant and returns the validated problem.
pub fn validate_problem(raw: ProblemData) -> Result<LqProblem> {
    let ProblemData { kind, a, b, c, q, r, f, horizon, x0, reference } = raw;

    match horizon {
        Horizon::Finite { t0, tf } => {
            if !t0.is_finite() || !tf.is_finite() || tf <= t0 {
                return Err(Error::InvalidHorizon(format!("need finite t0 < tf, got [{t0}, {tf}]")));
            }
        }
        Horizon::Infinite { t0 } => {
            if !t0.is_finite() {
                return Err(Error::InvalidHorizon("t0 must be finite".into()));
            }
        }
    }

    let n = a.rows();
    if n == 0 {
        return Err(Error::DimensionMismatch("A must be non-empty".into()));
    }
    shape("A", (a.rows(), a.cols()), (n, n))?;
    if b.rows() != n || b.cols() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "B is {}x{}, expected {n} rows and at least one column",
            b.rows(),
            b.cols()
        )));
    }
    let m = b.cols();
    let c = match (kind, c) {
        (_, None) => TimeMatrix::constant(DMatrix::identity(n, n)),
        (ProblemKind::Regulation, Some(c)) => {
            let identity = c.is_time_invariant()
                && c.rows() == n
                && c.cols() == n
                && c.base == DMatrix::identity(n, n);
            if !identity {
                return Err(Error::InvalidArgument("regulation problems use C = I".into()));
            }
            c
        }
        (ProblemKind::Tracking, Some(c)) => c,
    };
    if c.cols() != n || c.rows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "C is {}x{}, expected {n} columns",
            c.rows(),
            c.cols()
        )));
    }
    let p = c.rows();
    shape("Q", q.shape(), (p, p))?;
    shape("R", r.shape(), (m, m))?;
    let f = f.unwrap_or_else(|| DMatrix::zeros(p, p));
    shape("F", f.shape(), (p, p))?;
    if x0.len() != n {
        return Err(Error::DimensionMismatch(format!("x0 has length {}, expected {n}", x0.len())));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("x0 has non-finite entries".into()));
    }
    let reference = reference.unwrap_or(ReferenceSignal::Zero { dim: p });
    if reference.dim() != p {
        return Err(Error::DimensionMismatch(format!(
            "reference has dimension {}, expected {p}",
            reference.dim()
        )));
    }
    reference.check()?;
    if kind == ProblemKind::Regulation && !reference.is_zero() {
        return Err(Error::InvalidArgument("regulation problems take a zero reference".into()));
    }

    check_weight("R", &r, true)?;
    check_weight("Q", &q, false)?;
    check_weight("F", &f, false)?;

    for (name, tm) in [("A", &a), ("B", &b), ("C", &c)] {
        check_profile_on_horizon(name, tm, &horizon)?;
    }
    if !horizon.is_finite() {
        if f.iter().any(|v| *v != 0.0) {
            return Err(Error::InfiniteHorizonWithTerminalCost);
        }
        if !(a.is_time_invariant() && b.is_time_invariant() && c.is_time_invariant()) {
            return Err(Error::TimeVaryingInfiniteHorizon);
        }
    }

    let r_inv = inverse(&r, "R")?;
    Ok(LqProblem { kind, a, b, c, q, r, r_inv, f, horizon, x0, reference })
}

impl LqProblem {
    pub fn kind(&self) -> ProblemKind {
        self.kind
    }
    pub fn n(&self) -> usize {
        self.a.rows()
    }
    pub fn m(&self) -> usize {
        self.b.cols()
    }
    /// Output (error) dimension.
    pub fn p(&self) -> usize {
        self.c.rows()
    }
    pub fn a(&self) -> &TimeMatrix {
        &self.a
    }
    pub fn b(&self) -> &TimeMatrix {
        &self.b
    }
    pub fn c(&self) -> &TimeMatrix {
        &self.c
    }
    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }
    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }
    pub fn r_inv(&self) -> &DMatrix<f64> {
        &self.r_inv
    }
    pub fn f(&self) -> &DMatrix<f64> {
        &self.f
    }
    pub fn horizon(&self) -> Horizon {
        self.horizon
    }
    pub fn x0(&self) -> &DVector<f64> {
        &self.x0
    }
    pub fn reference(&self) -> &ReferenceSignal {
        &self.reference
    }
    pub fn is_time_invariant(&self) -> bool {
        self.a.is_time_invariant() && self.b.is_time_invariant() && self.c.is_time_invariant()
    }

    pub fn with_x0(&self, x0: DVector<f64>) -> Result<LqProblem> {
        let mut data = self.data();
        data.x0 = x0;
        data.validate()
    }

    /// The raw description this problem was validated from, with defaults
    /// made explicit.
    pub fn data(&self) -> ProblemData {
        ProblemData {
            kind: self.kind,
            a: self.a.clone(),
            b: self.b.clone(),
            c: Some(self.c.clone()),
            q: self.q.clone(),
            r: self.r.clone(),
            f: Some(self.f.clone()),
            horizon: self.horizon,
            x0: self.x0.clone(),
            reference: Some(self.reference.clone()),
        }
    }

    pub fn at(&self, t: f64) -> Result<SystemAt> {
        let a = self.a.eval(t)?;
        let b = self.b.eval(t)?;
        let c = self.c.eval(t)?;
        let q_eff = c.transpose() * &self.q * &c;
        let r_inv_bt = &self.r_inv * b.transpose();
        let m = &b * &r_inv_bt;
        let z = self.reference.eval(t);
        let cq_z = c.transpose() * (&self.q * &z);
        Ok(SystemAt { a, b, c, q_eff, m, r_inv_bt, z, cq_z })
    }

    /// State-space terminal weight `CᵀFC` at `tf`.
    pub fn terminal_state_weight(&self, tf: f64) -> Result<DMatrix<f64>> {
        let c = self.c.eval(tf)?;
        Ok(c.transpose() * &self.f * c)
    }

    /// Terminal value of the linear Krotov coefficient, `CᵀF z(tf)`.
    pub fn terminal_linear_weight(&self, tf: f64) -> Result<DVector<f64>> {
        let c = self.c.eval(tf)?;
        Ok(c.transpose() * (&self.f * self.reference.eval(tf)))
    }

    /// Tracking error `z − Cx` at `t`.
    pub fn error(&self, x: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        Ok(self.reference.eval(t) - self.c.eval(t)? * x)
    }

    /// Running cost on the doubled scale, `eᵀQe + uᵀRu`.
    pub fn running_cost_doubled(&self, x: &DVector<f64>, u: &DVector<f64>, t: f64) -> Result<f64> {
        let e = self.error(x, t)?;
        Ok(e.dot(&(&self.q * &e)) + u.dot(&(&self.r * u)))
    }

    /// Terminal cost on the doubled scale, `eᵀFe`.
    pub fn terminal_cost_doubled(&self, x: &DVector<f64>, t: f64) -> Result<f64> {
        let e = self.error(x, t)?;
        Ok(e.dot(&(&self.f * &e)))
    }
}
