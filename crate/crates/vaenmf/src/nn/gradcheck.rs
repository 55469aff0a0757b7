//! Central finite-difference verification of analytic gradients.

use super::{Mlp, ParamGrads};

/// Compare analytic gradients against central finite differences over every
/// parameter of `mlp`, returning the maximum relative error.
///
/// `loss_and_grads` must be a pure function of the model parameters (any
/// stochastic terms frozen), returning the loss and its analytic gradients.
pub fn gradient_check<F>(mlp: &Mlp, loss_and_grads: F, step: f64) -> f64
where
    F: Fn(&Mlp) -> (f64, ParamGrads),
{
    let (_, analytic) = loss_and_grads(mlp);
    let mut worst = 0.0f64;
    let mut probe = mlp.clone();

    let mut check = |analytic_g: f64, slot: &mut dyn FnMut(&mut Mlp) -> &mut f64| {
        let original = *slot(&mut probe);
        *slot(&mut probe) = original + step;
        let (loss_plus, _) = loss_and_grads(&probe);
        *slot(&mut probe) = original - step;
        let (loss_minus, _) = loss_and_grads(&probe);
        *slot(&mut probe) = original;
        let fd = (loss_plus - loss_minus) / (2.0 * step);
        let denom = analytic_g.abs().max(fd.abs()).max(1e-8);
        worst = worst.max((analytic_g - fd).abs() / denom);
    };

    for l in 0..mlp.layers.len() {
        let (gw, gb) = (&analytic.layers[l].0, &analytic.layers[l].1);
        for o in 0..gw.nrows() {
            for i in 0..gw.ncols() {
                check(gw[[o, i]], &mut |m| &mut m.layers[l].weights[[o, i]]);
            }
            check(gb[o], &mut |m| &mut m.layers[l].bias[o]);
        }
    }
    worst
}
