//! Orchestration of one manifest: synthesis, checks, artifacts, report.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use krotov_lq::export;
use krotov_lq::iterative::KrotovRunConfig;
use krotov_lq::krotov::largest_certified;
use krotov_lq::linalg::{max_abs, spectral_abscissa};
use krotov_lq::sim::{lyapunov_check, pointwise_min_check, rms_tracking_error};
use krotov_lq::tracking::SteadyStateG;
use krotov_lq::{
    convexity_certificate, equivalent_cost, krotov_iterate, simulate, solve_algebraic, ControlLaw, InitialControl,
    IterationRecord, KrotovFunction, LqProblem, ProblemKind, ReferenceSignal, Trajectory,
};

use crate::discrepancy::{published_values, Evidence};
use crate::error::{CliError, Context, Result};
use crate::manifest::{Command, RunManifest};
use crate::pipeline::{infinite_window, newton_options, synthesize, thin_indices, thin_trajectory, Feedforward, Synthesis};
use crate::report::{matrix, sci, vector, verdict, Report};

/// Row cap for trajectory and plot files.
const MAX_TRAJECTORY_ROWS: usize = 20_001;
/// Row cap for Riccati, feedforward and certificate files.
const MAX_PATH_ROWS: usize = 2_001;
const POINTWISE_SAMPLES: usize = 1000;
/// Nodes of the certificate grid on an infinite horizon.
const STEADY_CERT_NODES: usize = 201;

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub artifacts: Vec<PathBuf>,
    pub report: String,
}

struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        Ok(Artifacts { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let io = |source| CliError::Io { path: path.clone(), source };
        let mut w = BufWriter::new(File::create(&path).map_err(io)?);
        f(&mut w).map_err(io)?;
        w.flush().map_err(io)?;
        self.written.push(path);
        Ok(())
    }
}

/// Executes `manifest`, writing its artifacts and `report.txt` into
/// `manifest.out_dir`.
pub fn run(manifest: &RunManifest) -> Result<RunSummary> {
    manifest.validate()?;
    let problem = manifest.scenario.load()?;
    let mut out = Artifacts::new(&manifest.out_dir)?;
    let mut report = Report::new(&format!("krotov-lq {} {}", manifest.command, manifest.scenario));
    describe_problem(&problem, manifest, &mut report);

    match manifest.command {
        Command::Solve => {
            let syn = synthesize(&problem, manifest)?;
            write_synthesis(&problem, &syn, &mut report, &mut out)?;
        }
        Command::Enumerate => enumerate(&problem, manifest, &mut report, &mut out)?,
        Command::Certify => {
            let syn = synthesize(&problem, manifest)?;
            report_selection(&problem, &syn, &mut report);
            certify(&problem, &syn, &mut report, &mut out)?;
        }
        Command::Track => {
            if problem.kind() != ProblemKind::Tracking {
                return Err(CliError::Manifest("track needs a tracking scenario".into()));
            }
            let syn = synthesize(&problem, manifest)?;
            write_synthesis(&problem, &syn, &mut report, &mut out)?;
            closed_loop(&problem, &syn, manifest, &mut report, &mut out)?;
        }
        Command::Iterate => {
            let syn = synthesize(&problem, manifest)?;
            iterate(&problem, &syn, manifest, &mut report, &mut out)?;
        }
        Command::Simulate => {
            if manifest.open_loop {
                open_loop(&problem, manifest, &mut report, &mut out)?;
            } else {
                let syn = synthesize(&problem, manifest)?;
                report_selection(&problem, &syn, &mut report);
                closed_loop(&problem, &syn, manifest, &mut report, &mut out)?;
            }
        }
        Command::Example => example(&problem, manifest, &mut report, &mut out)?,
    }

    out.write("report.txt", |w| w.write_all(report.as_str().as_bytes()))?;
    Ok(RunSummary { artifacts: out.written, report: report.as_str().to_string() })
}

fn example(problem: &LqProblem, manifest: &RunManifest, report: &mut Report, out: &mut Artifacts) -> Result<()> {
    let syn = synthesize(problem, manifest)?;
    write_synthesis(problem, &syn, report, out)?;
    let p_max = certify(problem, &syn, report, out)?;
    closed_loop(problem, &syn, manifest, report, out)?;
    // a failed iteration is reported, not fatal
    let iterations = if problem.horizon().is_finite() {
        match iterate(problem, &syn, manifest, report, out) {
            Ok(records) => Some(records),
            Err(CliError::Core { op, source }) if source.category() != krotov_lq::ErrorCategory::Validation => {
                report.section("iterative improvement");
                report.kv("failed", format!("{op}: {source}"));
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    if let Some(id) = manifest.scenario.example() {
        let ev = Evidence { problem, synthesis: &syn, p_max, iterations: iterations.as_deref() };
        published_values(id, &ev, report)?;
    }
    Ok(())
}

fn describe_problem(problem: &LqProblem, manifest: &RunManifest, report: &mut Report) {
    report.section("problem");
    let kind = match problem.kind() {
        ProblemKind::Regulation => "regulation",
        ProblemKind::Tracking => "tracking",
    };
    report.kv("kind", kind);
    report.kv("states / inputs / outputs", format!("{} / {} / {}", problem.n(), problem.m(), problem.p()));
    match problem.horizon().tf() {
        Some(tf) => report.kv("horizon", format!("[{}, {}]", problem.horizon().t0(), tf)),
        None => report.kv("horizon", format!("[{}, inf)", problem.horizon().t0())),
    }
    report.kv("time invariant", verdict(problem.is_time_invariant()));
    report.kv("dt", manifest.dt);
    report.kv("seed", manifest.seed);
}

fn report_selection(problem: &LqProblem, syn: &Synthesis, report: &mut Report) {
    let t0 = problem.horizon().t0();
    report.section("selected law");
    if let Some((_, sel)) = &syn.solutions {
        report.kv("selected solution", format!("#{}", sel.index + 1));
        report.kv("P", matrix(&sel.p));
        let k = sel.law.gain_at(t0);
        report.kv("K", matrix(&k));
        if problem.n() == 1 && problem.m() == 1 {
            report.kv("selected p", format!("{:.6}", sel.p[(0, 0)]));
            report.kv("gain", format!("{:.6}", k[(0, 0)]));
        }
        let a_cl = problem.a().base() - problem.b().base() * &k;
        let eigs: Vec<String> = a_cl
            .complex_eigenvalues()
            .iter()
            .map(|z| format!("{:.6}{:+.6}i", z.re, z.im))
            .collect();
        report.kv("closed-loop eigenvalues", eigs.join(", "));
    }
    if let Some(path) = &syn.riccati {
        let p0 = path.at(t0);
        report.kv("P(t0)", matrix(&p0));
        if problem.n() == 1 {
            report.kv("p(t0)", format!("{:.6}", p0[(0, 0)]));
        }
        report.kv("K(t0)", matrix(&syn.law.gain_at(t0)));
        report.kv("P(tf)", matrix(&path.at(path.span().1)));
    }
    match &syn.feedforward {
        Some(Feedforward::Finite { g, residual }) => {
            report.kv("g(t0)", vector(&g.at(t0)));
            report.kv("g-equation residual", sci(*residual));
        }
        Some(Feedforward::Steady { closed_form, quadrature_gap, residual, .. }) => {
            match closed_form {
                SteadyStateG::Harmonic { sin_coeff, cos_coeff, omega } => {
                    report.kv("steady-state g", format!("sin {} + cos {}, omega {omega:.6}", vector(sin_coeff), vector(cos_coeff)));
                }
                SteadyStateG::Affine { offset, slope } => {
                    report.kv("steady-state g", format!("{} + {} t", vector(offset), vector(slope)));
                }
            }
            report.kv("g-equation residual", sci(*residual));
            report.kv("quadrature vs closed form", sci(*quadrature_gap));
        }
        None => {}
    }
}

fn write_synthesis(problem: &LqProblem, syn: &Synthesis, report: &mut Report, out: &mut Artifacts) -> Result<()> {
    if let Some((ss, _)) = &syn.solutions {
        report_solution_set(ss, report);
        out.write("solutions.csv", |w| export::write_solutions(w, ss))?;
    }
    report_selection(problem, syn, report);
    if let Some(path) = &syn.riccati {
        let times = path.times().unwrap_or(&[]);
        let grid: Vec<f64> = thin_indices(times.len(), MAX_PATH_ROWS).into_iter().map(|i| times[i]).collect();
        out.write("riccati.csv", |w| export::write_matrix_path(w, path, &grid))?;
    }
    if let Some(ff) = &syn.feedforward {
        let (t0, t1) = (problem.horizon().t0(), syn.t_end);
        let grid: Vec<f64> = (0..MAX_PATH_ROWS)
            .map(|i| t0 + (t1 - t0) * i as f64 / (MAX_PATH_ROWS - 1) as f64)
            .collect();
        out.write("feedforward.csv", |w| export::write_feedforward(w, ff.path(), &grid))?;
    }
    Ok(())
}

fn report_solution_set(ss: &krotov_lq::SolutionSet, report: &mut Report) {
    report.section("solution set");
    report.kv("starts tried / converged", format!("{} / {}", ss.starts_tried, ss.starts_converged));
    report.kv("distinct solutions", ss.solutions.len());
    for (i, e) in ss.solutions.iter().enumerate() {
        report.line(&format!(
            "#{:<3} P = {}  residual {}  symmetric {}  P+P' > 0 {}  stable {}",
            i + 1,
            matrix(&e.p),
            sci(e.residual_norm),
            verdict(e.symmetric),
            verdict(e.spd_symmetric_part),
            verdict(e.closed_loop_stable)
        ));
    }
}

fn enumerate(problem: &LqProblem, manifest: &RunManifest, report: &mut Report, out: &mut Artifacts) -> Result<()> {
    let ss = solve_algebraic(problem, &newton_options(manifest)).op("solvers::solve_algebraic")?;
    report_solution_set(&ss, report);
    match krotov_lq::select_stabilizing(&ss, problem) {
        Ok(sel) => report.kv("stabilizing solutions", format!("{:?}", sel.qualifiers.iter().map(|i| i + 1).collect::<Vec<_>>())),
        Err(e) => report.kv("stabilizing solutions", format!("none ({e})")),
    }
    out.write("solutions.csv", |w| export::write_solutions(w, &ss))
}

/// Convexity certificate of the synthesized function, plus the largest
/// certified constant for scalar infinite-horizon problems.
fn certify(problem: &LqProblem, syn: &Synthesis, report: &mut Report, out: &mut Artifacts) -> Result<Option<f64>> {
    let t0 = problem.horizon().t0();
    let grid: Vec<f64> = match &syn.riccati {
        Some(path) => {
            let times = path.times().unwrap_or(&[]);
            thin_indices(times.len(), MAX_PATH_ROWS).into_iter().map(|i| times[i]).collect()
        }
        None => (0..STEADY_CERT_NODES)
            .map(|i| t0 + (syn.t_end - t0) * i as f64 / (STEADY_CERT_NODES - 1) as f64)
            .collect(),
    };
    let cert = convexity_certificate(problem, &syn.function, &grid).op("krotov::convexity_certificate")?;
    report.section("certificate");
    report.kv("certified", verdict(cert.certified));
    report.kv("min eigenvalue over grid", sci(cert.min_eig_over_grid));
    report.kv("terminal min eigenvalue", sci(cert.terminal_min_eig));
    if let Some(t) = cert.failure_time {
        report.kv("first failure at t", t);
    }
    out.write("certificate.csv", |w| export::write_certificate(w, &cert))?;

    let mut p_max = None;
    if let (Some(p), 1, false) = (syn.constant_p(), problem.n(), problem.horizon().is_finite()) {
        let family = |v: f64| KrotovFunction::constant(DMatrix::from_element(1, 1, v));
        match largest_certified(problem, &[t0], 0.0, 2.0 * p[(0, 0)].abs() + 1.0, 1e-7, family) {
            Ok(v) => {
                report.kv("certified constant p", format!("0 <= p <= {v:.6}"));
                p_max = Some(v);
            }
            Err(e) => report.kv("certified constant p", format!("not bracketed ({e})")),
        }
    }
    Ok(p_max)
}

fn write_trajectory(problem: &LqProblem, traj: &Trajectory, out: &mut Artifacts) -> Result<()> {
    let thin = thin_trajectory(traj, MAX_TRAJECTORY_ROWS);
    out.write("trajectory.csv", |w| export::write_trajectory(w, &thin))?;
    out.write("plot.csv", |w| export::write_plot_data(w, problem, &thin))
}

fn closed_loop(
    problem: &LqProblem,
    syn: &Synthesis,
    manifest: &RunManifest,
    report: &mut Report,
    out: &mut Artifacts,
) -> Result<Trajectory> {
    let traj = simulate(problem, &syn.law, manifest.dt, syn.t_end).op("sim::simulate")?;
    report.section("closed loop");
    report.kv("simulated window", format!("[{}, {:.6}]", traj.times[0], syn.t_end));
    report.kv("cost J", format!("{:.9}", traj.total_cost));
    if let Some(tail) = traj.tail_bound {
        report.kv("tail bound", sci(tail));
    }
    let j_eq = equivalent_cost(problem, &syn.function, &traj).op("krotov::equivalent_cost")?;
    report.kv("equivalent cost J_eq", format!("{j_eq:.9}"));
    report.kv("|J_eq - J| / max(1, |J|)", sci((j_eq - traj.total_cost).abs() / traj.total_cost.abs().max(1.0)));
    if let Some(x) = traj.states.last() {
        report.kv("x(end)", vector(x));
    }

    if let (Some(p), true) = (syn.constant_p(), problem.reference().is_zero()) {
        let lyap = lyapunov_check(problem, p, &traj).op("sim::lyapunov_check")?;
        report.kv("Lyapunov rate deviation", format!("{} (scale {})", sci(lyap.max_deviation), sci(lyap.max_rate)));
        report.kv("V strictly decreasing", verdict(lyap.strictly_decreasing));
    }
    let pw = pointwise_min_check(problem, &syn.function, &syn.law, &traj, POINTWISE_SAMPLES, manifest.seed)
        .op("sim::pointwise_min_check")?;
    report.kv("pointwise samples / violations", format!("{} / {}", pw.samples, pw.violations));
    report.kv("max state gradient of s", sci(pw.max_state_gradient));

    if problem.kind() == ProblemKind::Tracking {
        let window = match problem.reference() {
            ReferenceSignal::Sinusoid { omega, .. } if *omega != 0.0 => 2.0 * std::f64::consts::PI / omega.abs(),
            _ => 0.1 * (syn.t_end - traj.times[0]),
        };
        let from = (syn.t_end - window).max(traj.times[0]);
        let rms = rms_tracking_error(problem, &traj, from).op("sim::rms_tracking_error")?;
        report.kv("RMS tracking error", format!("{rms:.6e} over [{from:.6}, {:.6}]", syn.t_end));
    }
    write_trajectory(problem, &traj, out)?;
    Ok(traj)
}

fn open_loop(problem: &LqProblem, manifest: &RunManifest, report: &mut Report, out: &mut Artifacts) -> Result<()> {
    let t0 = problem.horizon().t0();
    let a = problem.a().eval(t0).op("model::eval")?;
    let t_end = problem.horizon().tf().unwrap_or_else(|| infinite_window(problem, &a));
    let law = ControlLaw::constant(DMatrix::zeros(problem.m(), problem.n()));
    let traj = simulate(problem, &law, manifest.dt, t_end).op("sim::simulate")?;
    report.section("open loop");
    report.kv("simulated window", format!("[{t0}, {t_end:.6}]"));
    if problem.is_time_invariant() {
        report.kv("spectral abscissa of A", format!("{:.6}", spectral_abscissa(&a)));
    }
    report.kv("cost J", format!("{:.9}", traj.total_cost));
    let x0 = problem.x0().norm();
    let xe = traj.states.last().map_or(0.0, |x| x.norm());
    report.kv("|x(t0)| / |x(end)|", format!("{x0:.6} / {xe:.6e}"));
    report.kv("decaying", verdict(xe < x0 || x0 == 0.0));
    write_trajectory(problem, &traj, out)
}

fn iterate(
    problem: &LqProblem,
    syn: &Synthesis,
    manifest: &RunManifest,
    report: &mut Report,
    out: &mut Artifacts,
) -> Result<Vec<IterationRecord>> {
    let cfg = KrotovRunConfig { epsilon: manifest.tol.unwrap_or(1e-6), dt: manifest.dt, ..KrotovRunConfig::default() };
    let records = krotov_iterate(problem, InitialControl::Zero, &cfg).op("iterative::krotov_iterate")?;
    report.section("iterative improvement");
    for r in &records {
        report.line(&format!("k = {:<3} J_k = {:.9}  delta = {}  max gain change = {}", r.k, r.cost, sci(r.delta), sci(r.max_gain_change)));
    }
    let last = records.last().expect("at least one iterate");
    let converged = records.len() > 1 && last.delta.abs() < cfg.epsilon;
    let monotone = records.windows(2).all(|w| w[1].cost <= w[0].cost + 1e-9 * w[0].cost.abs().max(1.0));
    report.kv("converged", verdict(converged));
    report.kv("monotone", verdict(monotone));
    let times = last.trajectory.times.clone();
    let gap = times
        .iter()
        .map(|&t| max_abs(&(last.law.gain_at(t) - syn.law.gain_at(t))))
        .fold(0.0, f64::max);
    report.kv("gain gap to direct law", sci(gap));
    let direct = simulate(problem, &syn.law, manifest.dt, syn.t_end).op("sim::simulate")?;
    report.kv("direct cost", format!("{:.9}", direct.total_cost));
    out.write("iterations.csv", |w| export::write_iterations(w, &records))?;
    if manifest.command == Command::Iterate {
        write_trajectory(problem, &last.trajectory, out)?;
    }
    Ok(records)
}
