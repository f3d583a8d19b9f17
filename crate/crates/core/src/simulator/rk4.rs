use crate::error::{Error, Result};

/// States whose Euclidean norm exceeds this stop the integration.
pub const DIVERGENCE_LIMIT: f64 = 1e12;
/// Upper bound on the number of steps of a single run.
pub const MAX_STEPS: f64 = 1e7;

/// Fixed-step integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Record every `stride`-th step (the final step is always recorded).
    pub stride: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 10.0,
            stride: 1,
        }
    }
}

impl SimConfig {
    pub fn new(dt: f64, t_end: f64, stride: usize) -> Result<Self> {
        let cfg = Self { dt, t_end, stride };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.stride == 0 {
            return Err(Error::InvalidArgument("stride must be at least 1".into()));
        }
        if self.t_end / self.dt > MAX_STEPS {
            return Err(Error::InvalidArgument(format!(
                "t_end/dt = {:.3e} exceeds the {MAX_STEPS:.0e} step limit",
                self.t_end / self.dt
            )));
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened to land on `t_end`.
    pub fn steps(&self) -> usize {
        let n = (self.t_end / self.dt).ceil() as usize;
        // absorb a sliver left over from rounding t_end/dt
        if n > 1 && (self.t_end - (n - 1) as f64 * self.dt) < 1e-9 * self.dt {
            n - 1
        } else {
            n.max(1)
        }
    }
}

/// Samples recorded by [`integrate`].
pub(crate) struct Recorded {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub diverged: bool,
}

/// Classical fourth-order Runge–Kutta for the autonomous system
/// `dx/dt = f(x)`, with `f` writing its result into the output slice.
pub(crate) fn integrate(
    x0: Vec<f64>,
    cfg: &SimConfig,
    mut f: impl FnMut(&[f64], &mut [f64]),
) -> Recorded {
    let dim = x0.len();
    let steps = cfg.steps();
    let mut x = x0;
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];

    let mut rec = Recorded {
        times: vec![0.0],
        states: vec![x.clone()],
        diverged: false,
    };

    for step in 1..=steps {
        let t_prev = (step - 1) as f64 * cfg.dt;
        let t = if step == steps {
            cfg.t_end
        } else {
            step as f64 * cfg.dt
        };
        let h = t - t_prev;

        f(&x, &mut k1);
        for i in 0..dim {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        f(&tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        f(&tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = x[i] + h * k3[i];
        }
        f(&tmp, &mut k4);
        for i in 0..dim {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }

        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm <= DIVERGENCE_LIMIT) {
            rec.diverged = true;
            if x.iter().all(|v| v.is_finite()) {
                rec.times.push(t);
                rec.states.push(x);
            }
            return rec;
        }
        if step % cfg.stride == 0 || step == steps {
            rec.times.push(t);
            rec.states.push(x.clone());
        }
    }
    rec
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0.0, 1.0, 1).is_err());
        assert!(SimConfig::new(1e-3, -1.0, 1).is_err());
        assert!(SimConfig::new(1e-3, 1.0, 0).is_err());
        assert!(SimConfig::new(1e-7, 10.0, 1).is_err());
        assert_eq!(SimConfig::new(0.1, 1.0, 1).unwrap().steps(), 10);
        assert_eq!(SimConfig::new(0.3, 1.0, 1).unwrap().steps(), 4);
    }

    #[test]
    fn lands_on_t_end_and_records_final_step() {
        let cfg = SimConfig::new(0.3, 1.0, 2).unwrap();
        let rec = integrate(vec![1.0], &cfg, |x, out| out[0] = -x[0]);
        assert_eq!(rec.times, vec![0.0, 0.6, 1.0]);
        assert!((rec.states[2][0] - (-1.0f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn divergence_truncates() {
        let cfg = SimConfig::new(0.01, 100.0, 1).unwrap();
        let rec = integrate(vec![1.0], &cfg, |x, out| out[0] = x[0]);
        assert!(rec.diverged);
        let last = *rec.times.last().unwrap();
        assert!(last < 30.0, "stopped at {last}");
        assert!(rec.states.iter().all(|s| s[0].is_finite()));
    }
}
