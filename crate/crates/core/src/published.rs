//! Reference values printed alongside the worked examples, kept for
//! side-by-side discrepancy reports. None of them is used as an oracle.

/// Certified upper bound on the scalar regulation gain.
pub const EX1_P: f64 = 0.414;

/// Upper end of the certified interval for the scalar tracking example.
pub const EX2_P_MAX: f64 = 17.98;

/// Printed closed form for the time-varying regulation example:
/// `(k t − t e^{2t} + 2k) / (k t + e^{2t} + t e^{2t} + k)`, `k = 2.423e5`.
pub fn ex3_printed_p(t: f64) -> f64 {
    let k = 2.423e5;
    let e = (2.0 * t).exp();
    (k * t - t * e + 2.0 * k) / (k * t + e + t * e + k)
}

/// Terminal values of the tracking example with a ramp reference.
pub const EX4_P_TF: f64 = 10.0;
pub const EX4_G_TF: f64 = 50.0;

/// Four printed solutions of the two-input algebraic equation (row-major).
pub const EX5_P: [[f64; 4]; 4] = [
    [9.4172, 6.0671, 6.8083, -15.095],
    [-5.7559, 12.756, 11.318, -6.5319],
    [5.7575, -10.427, -11.654, 5.0354],
    [8.6906, -5.9759, -5.2647, 15.05],
];

/// Index of the printed solution declared stabilizing.
pub const EX5_SELECTED: usize = 3;

/// Printed feedback `u = G x` (row-major), i.e. `G = −K`.
pub const EX5_GAIN: [f64; 4] = [-1.2887, 0.4267, -1.7240, -5.0787];

/// Printed steady-state feedforward coefficients, per channel
/// `(sin, cos, omega)`.
pub const EX6_G: [(f64, f64, f64); 2] = [(-2.857, 0.003, 0.0314), (-5.68, 0.0039, 0.031)];

/// Printed iterate costs of the iterative-improvement demo.
pub const DEMO_COSTS: [f64; 3] = [25.0, 10.42, 10.36];
