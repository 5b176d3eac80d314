//! Built-in example problems.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::LqProblem;
use crate::scenario::parse_scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExampleId {
    Ex1,
    Ex2,
    Ex3,
    Ex4,
    Ex5,
    Ex6,
    KrotovDemo,
}

impl ExampleId {
    pub const ALL: [ExampleId; 7] = [
        ExampleId::Ex1,
        ExampleId::Ex2,
        ExampleId::Ex3,
        ExampleId::Ex4,
        ExampleId::Ex5,
        ExampleId::Ex6,
        ExampleId::KrotovDemo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExampleId::Ex1 => "ex1",
            ExampleId::Ex2 => "ex2",
            ExampleId::Ex3 => "ex3",
            ExampleId::Ex4 => "ex4",
            ExampleId::Ex5 => "ex5",
            ExampleId::Ex6 => "ex6",
            ExampleId::KrotovDemo => "krotov-demo",
        }
    }

    /// Scenario text of the example.
    pub fn scenario(self) -> &'static str {
        match self {
            ExampleId::Ex1 => EX1,
            ExampleId::Ex2 => EX2,
            ExampleId::Ex3 => EX3,
            ExampleId::Ex4 => EX4,
            ExampleId::Ex5 => EX5,
            ExampleId::Ex6 => EX6,
            ExampleId::KrotovDemo => DEMO,
        }
    }

    pub fn problem(self) -> Result<LqProblem> {
        parse_scenario(self.scenario())?.validate()
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExampleId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown example {s:?}")))
    }
}

const EX1: &str = "\
# scalar regulation, infinite horizon
kind = regulation
A = -1
B = 1
Q = 1
R = 1
tf = inf
x0 = 1
";

const EX2: &str = "\
# scalar tracking of 0.5 sin(0.01 pi t) by y = 4x
kind = tracking
A = 1
B = 1
C = 4
Q = 200
R = 0.1
tf = inf
x0 = 2
reference = sin:0.5:0.031415926535897934
";

const EX3: &str = "\
# time-varying scalar regulation, a(t) = -1/(t+1)
kind = regulation
A = 1
A_profile = recip_shift:-1:1
B = 1
Q = 1
R = 1
F = 1
t0 = 0
tf = 5
x0 = 20
";

const EX4: &str = "\
# time-varying scalar tracking of the ramp z = t
kind = tracking
A = 1
A_profile = recip_shift:-1:1
B = 1
C = 1
Q = 1000
R = 1
F = 10
t0 = 0
tf = 5
x0 = 10
reference = ramp:1
";

const EX5: &str = "\
# two-input regulation, infinite horizon
kind = regulation
A = 0,1; 1,1
B = 1,1; 0,1
Q = 2,0; 0,4
R = 0.5,0; 0,0.25
tf = inf
x0 = 10, 5
";

const EX6: &str = "\
# two-input tracking of [0, sin(0.01 pi t)]
kind = tracking
A = 0,1; 1,1
B = 1,1; 0,1
C = 1,0; 0,1
Q = 200,0; 0,400
R = 0.5,0; 0,0.25
tf = inf
x0 = 5, 2
reference = sin:0,1:0.031415926535897934
";

// J = ∫₀¹⁰ (x² + u²) dt written in the ½-convention.
const DEMO: &str = "\
# iterative-improvement demo, xdot = -x + u
kind = regulation
A = -1
B = 1
Q = 2
R = 2
F = 0
t0 = 0
tf = 10
x0 = 5
";
