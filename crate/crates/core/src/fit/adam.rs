use crate::error::{check_len, Error, Result};

/// Adam optimiser state for one flat variable.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: usize,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl AdamState {
    pub const EPSILON: f64 = 1e-8;

    pub fn new(len: usize, learning_rate: f64, beta1: f64, beta2: f64) -> Self {
        Self {
            learning_rate,
            beta1,
            beta2,
            epsilon: Self::EPSILON,
            step: 0,
            first: vec![0.0; len],
            second: vec![0.0; len],
        }
    }

    /// `beta1 = 0`, `beta2 = 0.999`, the fitting defaults.
    pub fn without_momentum(len: usize, learning_rate: f64) -> Self {
        Self::new(len, learning_rate, 0.0, 0.999)
    }

    pub fn step_count(&self) -> usize {
        self.step
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    /// One bias-corrected update of `variable` in place.
    pub fn step(&mut self, variable: &mut [f64], gradient: &[f64]) -> Result<()> {
        check_len("optimiser variable", self.len(), variable.len())?;
        check_len("optimiser gradient", self.len(), gradient.len())?;
        if let Some(i) = gradient.iter().position(|g| !g.is_finite()) {
            return Err(Error::Diverged {
                step: self.step,
                reason: format!("non-finite gradient at entry {i}"),
            });
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (((x, &g), m), v) in variable.iter_mut().zip(gradient).zip(&mut self.first).zip(&mut self.second) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *x -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}

/// Functional form of [`AdamState::step`].
pub fn adam_step(state: &mut AdamState, variable: &mut [f64], gradient: &[f64]) -> Result<()> {
    state.step(variable, gradient)
}
