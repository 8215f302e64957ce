//! CSV and gnuplot emitters for trajectories.

use std::fmt::Write as _;
use std::path::Path;

use super::Trajectory;
use crate::error::Result;

/// Renders `t,x1..xn,Vm,spread`, keeping every `stride`-th sample plus the last one.
pub fn trajectory_csv(traj: &Trajectory, stride: usize) -> String {
    let stride = stride.max(1);
    let n = traj.states.first().map_or(0, Vec::len);
    let mut out = String::from("t");
    for i in 1..=n {
        let _ = write!(out, ",x{i}");
    }
    out.push_str(",Vm,spread\n");
    let last = traj.states.len().saturating_sub(1);
    for (k, (t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
        if k % stride != 0 && k != last {
            continue;
        }
        let _ = write!(out, "{t:.16e}");
        for v in x {
            let _ = write!(out, ",{v:.16e}");
        }
        let _ = writeln!(out, ",{:.16e},{:.16e}", traj.monitors.vm[k], traj.monitors.spread[k]);
    }
    out
}

pub fn write_csv(path: &Path, traj: &Trajectory, stride: usize) -> Result<()> {
    std::fs::write(path, trajectory_csv(traj, stride))?;
    Ok(())
}

/// A gnuplot script plotting every state column of `csv_name` against time.
pub fn gnuplot_script(csv_name: &str, n: usize, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{}'", title.replace('\'', ""));
    let _ = writeln!(s, "set xlabel 't'");
    let _ = writeln!(s, "set ylabel 'x_i(t)'");
    let _ = writeln!(s, "set terminal pngcairo size 800,600");
    let png = csv_name.strip_suffix(".csv").unwrap_or(csv_name);
    let _ = writeln!(s, "set output '{png}.png'");
    let cols: Vec<String> = (0..n)
        .map(|i| format!("'{csv_name}' using 1:{} with lines", i + 2))
        .collect();
    let _ = writeln!(s, "plot {}", cols.join(", \\\n     "));
    s
}
