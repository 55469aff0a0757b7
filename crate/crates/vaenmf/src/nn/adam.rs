//! Adam optimizer with bias correction.

use ndarray::{Array1, Array2};

use super::{Mlp, NnError, ParamGrads};

#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<(Array2<f64>, Array1<f64>)>,
    v: Vec<(Array2<f64>, Array1<f64>)>,
    pub step: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(mlp: &Mlp, learning_rate: f64) -> Self {
        let zeros = || {
            mlp.layers
                .iter()
                .map(|l| {
                    (
                        Array2::zeros(l.weights.dim()),
                        Array1::zeros(l.bias.len()),
                    )
                })
                .collect::<Vec<_>>()
        };
        Self {
            m: zeros(),
            v: zeros(),
            step: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    /// One Adam update of `mlp` in place. Non-finite gradients reject the
    /// whole update and leave the model and moments untouched.
    pub fn step(&mut self, mlp: &mut Mlp, grads: &ParamGrads) -> Result<(), NnError> {
        if grads.layers.len() != mlp.layers.len() {
            return Err(NnError::Dimension("gradient/model layer count".into()));
        }
        if let Some(layer) = grads.layers.iter().position(|(w, b)| {
            w.iter().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite())
        }) {
            return Err(NnError::NonFiniteGrad { layer });
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (l, layer) in mlp.layers.iter_mut().enumerate() {
            let (gw, gb) = &grads.layers[l];
            let (mw, mb) = &mut self.m[l];
            let (vw, vb) = &mut self.v[l];
            mw.zip_mut_with(gw, |m, &g| *m = self.beta1 * *m + (1.0 - self.beta1) * g);
            mb.zip_mut_with(gb, |m, &g| *m = self.beta1 * *m + (1.0 - self.beta1) * g);
            vw.zip_mut_with(gw, |v, &g| *v = self.beta2 * *v + (1.0 - self.beta2) * g * g);
            vb.zip_mut_with(gb, |v, &g| *v = self.beta2 * *v + (1.0 - self.beta2) * g * g);
            ndarray::Zip::from(&mut layer.weights)
                .and(&*mw)
                .and(&*vw)
                .for_each(|w, &m, &v| {
                    *w -= self.learning_rate * (m / bc1) / ((v / bc2).sqrt() + self.epsilon);
                });
            ndarray::Zip::from(&mut layer.bias)
                .and(&*mb)
                .and(&*vb)
                .for_each(|w, &m, &v| {
                    *w -= self.learning_rate * (m / bc1) / ((v / bc2).sqrt() + self.epsilon);
                });
        }
        Ok(())
    }
}
