//! Step-size and temperature schedules `(gamma_i, beta_i)` driving the
//! mirror-descent engine.
//!
//! Iterations are 1-based; `beta(0)` is defined and equals the initial
//! temperature `beta_0`, which the regret diagnostic consumes through its
//! `1/(2 alpha beta_{i-1})` term. Schedules are closed-form functions of the
//! iteration index, not stored arrays, so the anytime variant needs no
//! horizon.
//!
//! A schedule carries a joint scale factor (see [`Schedule::scaled`]):
//! multiplying both sequences by the same positive constant leaves the
//! mirror-descent iterates unchanged, and the engine exploits this by working
//! with the unscaled sequences internally.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type SeqFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleKind {
    Anytime,
    FixedHorizon,
    Custom,
}

#[derive(Clone)]
enum Form {
    /// `gamma_i = 1`, `beta_i = beta0 * sqrt(i+1)`.
    Anytime { beta0: f64 },
    /// Both sequences constant.
    FixedHorizon { gamma: f64, beta: f64 },
    /// Arbitrary closed forms supplied by the caller.
    Custom { gamma: SeqFn, beta: SeqFn },
}

/// A pair of positive sequences `(gamma_i)` (step size) and `(beta_i)`
/// (temperature), with `beta_i` non-decreasing.
#[derive(Clone)]
pub struct Schedule {
    form: Form,
    scale: f64,
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            Form::Anytime { beta0 } => f
                .debug_struct("Schedule::Anytime")
                .field("beta0", beta0)
                .field("scale", &self.scale)
                .finish(),
            Form::FixedHorizon { gamma, beta } => f
                .debug_struct("Schedule::FixedHorizon")
                .field("gamma", gamma)
                .field("beta", beta)
                .field("scale", &self.scale)
                .finish(),
            Form::Custom { .. } => f
                .debug_struct("Schedule::Custom")
                .field("scale", &self.scale)
                .finish(),
        }
    }
}

impl Schedule {
    /// The horizon-free tuning: `gamma_i = 1`, `beta_i = beta0 sqrt(i+1)` with
    /// `beta0 = L / sqrt(ln M)`. `M >= 2` is required so that `ln M > 0`.
    pub fn anytime(l: f64, m: usize) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Domain(format!(
                "Lipschitz constant must be positive, got {l}"
            )));
        }
        if m < 2 {
            return Err(Error::Domain(format!(
                "anytime schedule needs M >= 2 (ln M must be positive), got {m}"
            )));
        }
        let beta0 = l / (m as f64).ln().sqrt();
        Ok(Schedule {
            form: Form::Anytime { beta0 },
            scale: 1.0,
        })
    }

    /// The known-horizon tuning: `gamma_i = 1/sqrt(t)` and
    /// `beta_i = L / sqrt(2 alpha V*)`, both constant. Improves the bound
    /// constant from 2 to sqrt(2) but requires the sample size in advance.
    pub fn fixed_horizon(l: f64, alpha: f64, vstar: f64, t: u64) -> Result<Self> {
        for (name, v) in [("L", l), ("alpha", alpha), ("Vstar", vstar)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if t == 0 {
            return Err(Error::Domain("horizon t must be >= 1".into()));
        }
        let gamma = 1.0 / (t as f64).sqrt();
        let beta = l / (2.0 * alpha * vstar).sqrt();
        Ok(Schedule {
            form: Form::FixedHorizon { gamma, beta },
            scale: 1.0,
        })
    }

    /// A caller-supplied pair of closed forms. The caller is responsible for
    /// positivity and for `beta` being non-decreasing; `beta(0)` must be the
    /// intended initial temperature.
    pub fn custom(
        gamma: impl Fn(u64) -> f64 + Send + Sync + 'static,
        beta: impl Fn(u64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Schedule {
            form: Form::Custom {
                gamma: Arc::new(gamma),
                beta: Arc::new(beta),
            },
            scale: 1.0,
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        match self.form {
            Form::Anytime { .. } => ScheduleKind::Anytime,
            Form::FixedHorizon { .. } => ScheduleKind::FixedHorizon,
            Form::Custom { .. } => ScheduleKind::Custom,
        }
    }

    /// Step size at iteration `i >= 1`, including the joint scale.
    pub fn gamma(&self, i: u64) -> f64 {
        self.scale * self.gamma_base(i)
    }

    /// Temperature at iteration `i`, including the joint scale. `beta(0)` is
    /// the initial temperature `beta_0`.
    pub fn beta(&self, i: u64) -> f64 {
        self.scale * self.beta_base(i)
    }

    /// The initial temperature `beta(0)`.
    pub fn beta0(&self) -> f64 {
        self.beta(0)
    }

    /// The same schedule with both sequences multiplied by `c > 0`. For the
    /// mirror-descent engine this is a no-op on the iterate path (the scale
    /// cancels inside the mirror map); it does change EG and projected-SGD
    /// steps and the regret diagnostic's bookkeeping.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!(
                "scale factor must be positive, got {c}"
            )));
        }
        Ok(Schedule {
            form: self.form.clone(),
            scale: self.scale * c,
        })
    }

    pub(crate) fn gamma_base(&self, i: u64) -> f64 {
        match &self.form {
            Form::Anytime { .. } => 1.0,
            Form::FixedHorizon { gamma, .. } => *gamma,
            Form::Custom { gamma, .. } => gamma(i),
        }
    }

    pub(crate) fn beta_base(&self, i: u64) -> f64 {
        match &self.form {
            Form::Anytime { beta0 } => beta0 * ((i + 1) as f64).sqrt(),
            Form::FixedHorizon { beta, .. } => *beta,
            Form::Custom { beta, .. } => beta(i),
        }
    }
}
