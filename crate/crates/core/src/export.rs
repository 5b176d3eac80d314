//! CSV writers for solver and simulation artifacts.

use std::io::{self, Write};

use crate::iterative::IterationRecord;
use crate::krotov::ConvexityCertificate;
use crate::model::{LqProblem, ProblemKind};
use crate::path::{MatrixPath, VectorPath};
use crate::sim::Trajectory;
use crate::solvers::SolutionSet;

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}

fn invalid(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidInput, msg.to_string())
}

/// `t,min_eig_sym_resid` per node, then a comment line with the terminal
/// eigenvalue and verdict.
pub fn write_certificate(w: &mut impl Write, cert: &ConvexityCertificate) -> io::Result<()> {
    writeln!(w, "t,min_eig_sym_resid")?;
    for (t, e) in &cert.samples {
        writeln!(w, "{},{}", num(*t), num(*e))?;
    }
    writeln!(w, "# terminal_min_eig={}, certified={}", num(cert.terminal_min_eig), cert.certified)
}

pub fn write_solutions(w: &mut impl Write, ss: &SolutionSet) -> io::Result<()> {
    let n = ss.solutions.first().map_or(0, |s| s.p.nrows());
    let mut header: Vec<String> = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            header.push(format!("p_{i}{j}"));
        }
    }
    header.extend(["residual_norm", "symmetric", "spd_symmetric_part", "closed_loop_stable"].map(String::from));
    writeln!(w, "{}", header.join(","))?;
    for s in &ss.solutions {
        let mut row: Vec<String> = Vec::new();
        for i in 0..n {
            for j in 0..n {
                row.push(num(s.p[(i, j)]));
            }
        }
        row.push(num(s.residual_norm));
        row.push(s.symmetric.to_string());
        row.push(s.spd_symmetric_part.to_string());
        row.push(s.closed_loop_stable.to_string());
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// `t,g_1..g_n` at the nodes of `grid`.
pub fn write_feedforward(w: &mut impl Write, g: &VectorPath, grid: &[f64]) -> io::Result<()> {
    let n = match grid.first() {
        Some(&t) => g.at(t).len(),
        None => return Err(invalid("empty grid")),
    };
    writeln!(w, "t,{}", names("g", n).join(","))?;
    for &t in grid {
        let v = g.at(t);
        let row: Vec<String> = v.iter().map(|x| num(*x)).collect();
        writeln!(w, "{},{}", num(t), row.join(","))?;
    }
    Ok(())
}

/// `t,p_11,p_12,..,p_nn` (row-major) at the nodes of `grid`.
pub fn write_matrix_path(w: &mut impl Write, p: &MatrixPath, grid: &[f64]) -> io::Result<()> {
    let (rows, cols) = match grid.first() {
        Some(&t) => p.at(t).shape(),
        None => return Err(invalid("empty grid")),
    };
    let header: Vec<String> =
        (1..=rows).flat_map(|i| (1..=cols).map(move |j| format!("p_{i}{j}"))).collect();
    writeln!(w, "t,{}", header.join(","))?;
    for &t in grid {
        let v = p.at(t);
        let row: Vec<String> = (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).map(|ij| num(v[ij])).collect();
        writeln!(w, "{},{}", num(t), row.join(","))?;
    }
    Ok(())
}

pub fn write_iterations(w: &mut impl Write, records: &[IterationRecord]) -> io::Result<()> {
    writeln!(w, "k,J_k,delta,max_gain_change")?;
    for r in records {
        writeln!(w, "{},{},{},{}", r.k, num(r.cost), num(r.delta), num(r.max_gain_change))?;
    }
    Ok(())
}

/// `t,x_1..x_n,u_1..u_m,running_cost`, closed by
/// `# total_cost=<value> tail_bound=<value>`.
pub fn write_trajectory(w: &mut impl Write, traj: &Trajectory) -> io::Result<()> {
    let (n, m) = match (traj.states.first(), traj.inputs.first()) {
        (Some(x), Some(u)) => (x.len(), u.len()),
        _ => return Err(invalid("empty trajectory")),
    };
    writeln!(w, "t,{},{},running_cost", names("x", n).join(","), names("u", m).join(","))?;
    for i in 0..traj.times.len() {
        let xs: Vec<String> = traj.states[i].iter().map(|v| num(*v)).collect();
        let us: Vec<String> = traj.inputs[i].iter().map(|v| num(*v)).collect();
        writeln!(w, "{},{},{},{}", num(traj.times[i]), xs.join(","), us.join(","), num(traj.running_cost[i]))?;
    }
    let tail = traj.tail_bound.map_or_else(|| "none".to_string(), num);
    writeln!(w, "# total_cost={} tail_bound={}", num(traj.total_cost), tail)
}

/// Plot-ready series: `t,y,z` (output and reference) for tracking and
/// `t,x_1..,u_1..` for regulation.
pub fn write_plot_data(w: &mut impl Write, problem: &LqProblem, traj: &Trajectory) -> io::Result<()> {
    if traj.times.len() < 2 {
        return Err(invalid("trajectory has no extent"));
    }
    match problem.kind() {
        ProblemKind::Regulation => {
            let (n, m) = (problem.n(), problem.m());
            writeln!(w, "t,{},{}", names("x", n).join(","), names("u", m).join(","))?;
            for i in 0..traj.times.len() {
                let xs: Vec<String> = traj.states[i].iter().map(|v| num(*v)).collect();
                let us: Vec<String> = traj.inputs[i].iter().map(|v| num(*v)).collect();
                writeln!(w, "{},{},{}", num(traj.times[i]), xs.join(","), us.join(","))?;
            }
        }
        ProblemKind::Tracking => {
            let p = problem.p();
            let (ys, zs) = if p == 1 {
                (vec!["y".to_string()], vec!["z".to_string()])
            } else {
                (names("y", p), names("z", p))
            };
            writeln!(w, "t,{},{}", ys.join(","), zs.join(","))?;
            for (&t, x) in traj.times.iter().zip(&traj.states) {
                let c = problem.c().eval(t).map_err(|e| invalid(&e.to_string()))?;
                let y: Vec<String> = (c * x).iter().map(|v| num(*v)).collect();
                let z: Vec<String> = problem.reference().eval(t).iter().map(|v| num(*v)).collect();
                writeln!(w, "{},{},{}", num(t), y.join(","), z.join(","))?;
            }
        }
    }
    Ok(())
}
