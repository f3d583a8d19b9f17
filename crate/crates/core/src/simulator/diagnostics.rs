use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::Trajectory;

/// Values at or below this are left out of the log-linear fit.
pub const DECAY_FLOOR: f64 = 1e-14;
/// Minimum number of usable points for [`decay_rate_estimate`].
pub const MIN_FIT_POINTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

/// Largest Euclidean distance between any two agents, per record.
pub fn disagreement(traj: &Trajectory) -> Result<TimeSeries> {
    if traj.agents < 2 {
        return Err(Error::TooFewAgents(traj.agents));
    }
    let values = (0..traj.len())
        .map(|k| {
            let mut worst: f64 = 0.0;
            for i in 0..traj.agents {
                let xi = traj.agent_state(k, i);
                for j in i + 1..traj.agents {
                    let d2: f64 = xi
                        .iter()
                        .zip(traj.agent_state(k, j))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    worst = worst.max(d2);
                }
            }
            worst.sqrt()
        })
        .collect();
    Ok(TimeSeries {
        times: traj.times.clone(),
        values,
    })
}

/// Exponential rate fitted to the last `window` fraction of `series`:
/// the least-squares slope of `ln(value)` against time.
pub fn decay_rate_estimate(series: &TimeSeries, window: f64) -> Result<f64> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "window must lie in (0, 1], got {window}"
        )));
    }
    let (t0, t1) = match (series.times.first(), series.times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => {
            return Err(Error::InsufficientData {
                needed: MIN_FIT_POINTS,
                got: 0,
            })
        }
    };
    let start = t1 - window * (t1 - t0);
    let pts: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(&t, &v)| t >= start && v > DECAY_FLOOR && v.is_finite())
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_POINTS,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, y) in &pts {
        sxy += (t - tm) * (y - ym);
        sxx += (t - tm) * (t - tm);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_POINTS,
            got: 1,
        });
    }
    Ok(sxy / sxx)
}

/// `V = yᵀ (Q ⊗ P) y` along a reduced trajectory.
pub fn lyapunov_trace(traj: &Trajectory, q: &Matrix, p: &Matrix) -> Result<TimeSeries> {
    let (m, n) = (traj.agents, traj.dim);
    q.ensure_shape(m, m)?;
    p.ensure_shape(n, n)?;
    let mut values = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let py = (0..m)
            .map(|j| p.matvec(traj.agent_state(k, j)))
            .collect::<Result<Vec<_>>>()?;
        let mut v = 0.0;
        for i in 0..m {
            let yi = traj.agent_state(k, i);
            for (j, pyj) in py.iter().enumerate() {
                let w = q[(i, j)];
                if w != 0.0 {
                    v += w * yi.iter().zip(pyj).map(|(a, b)| a * b).sum::<f64>();
                }
            }
        }
        values.push(v);
    }
    Ok(TimeSeries {
        times: traj.times.clone(),
        values,
    })
}

/// Whether disagreement drops below `tol` and stays there until the end of
/// the run, and the first record time from which it does.
///
/// A diverged run never counts as reached.
pub fn consensus_reached(traj: &Trajectory, tol: f64) -> Result<(bool, Option<f64>)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    if traj.diverged {
        return Ok((false, None));
    }
    let d = disagreement(traj)?;
    let mut first = None;
    for (k, &v) in d.values.iter().enumerate().rev() {
        if v < tol {
            first = Some(k);
        } else {
            break;
        }
    }
    Ok(match first {
        Some(k) => (true, Some(d.times[k])),
        None => (false, None),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::SystemSpec;
    use crate::coupling::validate_coupling;
    use crate::simulator::{
        reduce_initial_state, simulate_full, simulate_reduced, SimConfig, TrajectoryKind,
        TrajectoryMetadata,
    };

    fn snapshot(states: Vec<Vec<f64>>, agents: usize, dim: usize) -> Trajectory {
        let times = (0..states.len()).map(|k| k as f64).collect();
        Trajectory {
            times,
            states,
            agents,
            dim,
            diverged: false,
            metadata: TrajectoryMetadata {
                kind: TrajectoryKind::Full,
                system_digest: String::new(),
                seed: None,
            },
        }
    }

    fn scalar_complete3(c: f64) -> SystemSpec {
        let l = validate_coupling(&Matrix::from_rows(&[
            [-2.0, 1.0, 1.0],
            [1.0, -2.0, 1.0],
            [1.0, 1.0, -2.0],
        ]))
        .unwrap();
        SystemSpec::new(Matrix::from_rows(&[[0.0]]), Matrix::from_rows(&[[1.0]]), c, l).unwrap()
    }

    #[test]
    fn disagreement_snapshots() {
        let same = snapshot(vec![vec![1.0, 2.0, 1.0, 2.0]; 4], 2, 2);
        assert!(disagreement(&same).unwrap().values.iter().all(|&v| v == 0.0));

        let apart = snapshot(vec![vec![0.0, 0.0, 3.0, 4.0]; 3], 2, 2);
        assert_eq!(disagreement(&apart).unwrap().values, vec![5.0; 3]);

        let three = snapshot(vec![vec![0.0, 1.0, -2.0]], 3, 1);
        assert_eq!(disagreement(&three).unwrap().values, vec![3.0]);

        assert!(matches!(
            disagreement(&snapshot(vec![vec![1.0]], 1, 1)),
            Err(Error::TooFewAgents(1))
        ));
    }

    #[test]
    fn decay_rate_examples() {
        let times: Vec<f64> = (0..200).map(|k| k as f64 * 0.05).collect();
        let exp = TimeSeries {
            values: times.iter().map(|t| (-2.0 * t).exp()).collect(),
            times: times.clone(),
        };
        assert!((decay_rate_estimate(&exp, 0.5).unwrap() + 2.0).abs() < 1e-6);

        let flat = TimeSeries {
            values: vec![0.7; times.len()],
            times: times.clone(),
        };
        assert!(decay_rate_estimate(&flat, 1.0).unwrap().abs() < 1e-12);

        let short = TimeSeries {
            times: times[..9].to_vec(),
            values: vec![1.0; 9],
        };
        assert!(matches!(
            decay_rate_estimate(&short, 1.0),
            Err(Error::InsufficientData { got: 9, .. })
        ));
        // values under the floor do not count
        let mut floored = exp.clone();
        floored.values.iter_mut().skip(5).for_each(|v| *v = 0.0);
        assert!(decay_rate_estimate(&floored, 1.0).is_err());
        assert!(decay_rate_estimate(&exp, 0.0).is_err());
    }

    #[test]
    fn complete_graph_decay() {
        let s = scalar_complete3(1.0);
        let cfg = SimConfig::new(1e-3, 10.0, 10).unwrap();
        let traj = simulate_full(&s, &[vec![1.0], vec![0.0], vec![0.0]], &cfg).unwrap();
        let d = disagreement(&traj).unwrap();
        for (t, v) in d.times.iter().zip(&d.values) {
            if *t > 0.5 && *v > 1e-12 {
                assert!((v / (-3.0 * t).exp() - 1.0).abs() < 0.02, "t={t}");
            }
        }
        let rate = decay_rate_estimate(&d, 0.5).unwrap();
        assert!((rate + 3.0).abs() < 0.15, "rate {rate}");

        let (reached, when) = consensus_reached(&traj, 1e-6).unwrap();
        let expected = (1.0f64 / 1e-6).ln() / 3.0;
        assert!(reached);
        assert!((when.unwrap() - expected).abs() < 0.02, "{when:?} vs {expected}");
    }

    #[test]
    fn consensus_edge_cases() {
        let same = snapshot(vec![vec![0.5, 0.5]; 5], 2, 1);
        assert_eq!(consensus_reached(&same, 1e-6).unwrap(), (true, Some(0.0)));

        let l = validate_coupling(&Matrix::from_rows(&[[-1.0, 1.0], [1.0, -1.0]])).unwrap();
        let s = SystemSpec::new(Matrix::from_rows(&[[1.0]]), Matrix::from_rows(&[[1.0]]), 0.0, l)
            .unwrap();
        let traj = simulate_full(&s, &[vec![1.0], vec![-1.0]], &SimConfig::new(0.01, 5.0, 1).unwrap())
            .unwrap();
        assert_eq!(consensus_reached(&traj, 1e-6).unwrap(), (false, None));
        assert!(consensus_reached(&traj, 0.0).is_err());
    }

    #[test]
    fn lyapunov_trace_complete_graph() {
        let s = scalar_complete3(1.0);
        let y0 = reduce_initial_state(&[vec![1.0], vec![0.0], vec![0.0]]);
        let traj = simulate_reduced(&s, &y0, &SimConfig::new(1e-3, 3.0, 50).unwrap()).unwrap();
        let q = Matrix::identity(2).scale(1.0 / 6.0);
        let v = lyapunov_trace(&traj, &q, &Matrix::identity(1)).unwrap();
        for (k, st) in traj.states.iter().enumerate() {
            let expected = (st[0] * st[0] + st[1] * st[1]) / 6.0;
            assert!((v.values[k] - expected).abs() < 1e-15);
        }
        assert!(v.values.windows(2).all(|w| w[1] < w[0]));

        let zero = simulate_reduced(&s, &[vec![0.0], vec![0.0]], &SimConfig::new(1e-2, 1.0, 1).unwrap())
            .unwrap();
        assert!(lyapunov_trace(&zero, &q, &Matrix::identity(1))
            .unwrap()
            .values
            .iter()
            .all(|&x| x == 0.0));
        assert!(lyapunov_trace(&traj, &Matrix::identity(3), &Matrix::identity(1)).is_err());
    }
}
