use serde::{Deserialize, Serialize};

use super::{HinfMetric, LyapunovSeries, SwitchEvent, Trajectory};

/// One row per recorded sample. Columns, in order:
/// `t`, then per subsystem `i`: `mode{i}`, `x{i}_0..`, `y{i}_0..`, `u{i}_0..`,
/// `w{i}_0..`; then `V` when a Lyapunov series is given.
pub fn trajectory_csv(traj: &Trajectory, lyap: Option<&LyapunovSeries>) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    for (i, tr) in traj.subsystems.iter().enumerate() {
        header.push(format!("mode{i}"));
        for (name, width) in [("x", &tr.x), ("y", &tr.y), ("u", &tr.u), ("w", &tr.w)] {
            let d = width.first().map_or(0, Vec::len);
            header.extend((0..d).map(|r| format!("{name}{i}_{r}")));
        }
    }
    if lyap.is_some() {
        header.push("V".into());
    }
    wtr.write_record(&header).expect("in-memory write");
    for k in 0..traj.len() {
        let mut row = vec![traj.t[k].to_string()];
        for tr in &traj.subsystems {
            row.push(tr.mode[k].to_string());
            for series in [&tr.x, &tr.y, &tr.u, &tr.w] {
                row.extend(series[k].iter().map(f64::to_string));
            }
        }
        if let Some(l) = lyap {
            row.push(l.total[k].to_string());
        }
        wtr.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(wtr.into_inner().expect("flush")).expect("csv is utf-8")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub samples: usize,
    pub t_end: f64,
    pub dt: f64,
    pub stride: usize,
    pub diverged: bool,
    pub switches: Vec<SwitchEvent>,
    /// `‖x_i(t_end)‖₂` per subsystem.
    pub final_norms: Vec<f64>,
    pub hinf: Vec<HinfMetric>,
}

impl TrajectorySummary {
    pub fn new(traj: &Trajectory, hinf: Vec<HinfMetric>) -> Self {
        TrajectorySummary {
            samples: traj.len(),
            t_end: traj.t.last().copied().unwrap_or(0.0),
            dt: traj.dt,
            stride: traj.stride,
            diverged: traj.diverged,
            switches: traj.switches.clone(),
            final_norms: traj
                .subsystems
                .iter()
                .map(|tr| tr.x.last().map_or(0.0, |x| x.iter().map(|v| v * v).sum::<f64>().sqrt()))
                .collect(),
            hinf,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}
