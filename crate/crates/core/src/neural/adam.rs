//! Adam with bias correction.

use super::model::{AdamState, NgarParams};
use super::{cast, Real};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// One Adam update of `params` from `grads` at learning rate `lr`.
pub fn adam_step<T: Real>(params: &mut NgarParams<T>, state: &mut AdamState<T>, grads: &NgarParams<T>, lr: f64) {
    state.step += 1;
    let t = state.step as i32;
    let step_size: T = cast(lr * (1.0 - BETA2.powi(t)).sqrt() / (1.0 - BETA1.powi(t)));
    // epsilon is applied to the bias-corrected second moment
    let eps: T = cast(EPSILON * (1.0 - BETA2.powi(t)).sqrt());
    let (b1, b2): (T, T) = (cast(BETA1), cast(BETA2));
    let (c1, c2): (T, T) = (cast(1.0 - BETA1), cast(1.0 - BETA2));
    let grads = grads.tensors();
    let ms = state.m.tensors_mut();
    let vs = state.v.tensors_mut();
    for ((((_, mut p), (_, g)), (_, mut m)), (_, mut v)) in
        params.tensors_mut().into_iter().zip(grads).zip(ms).zip(vs)
    {
        ndarray::Zip::from(&mut p)
            .and(&g)
            .and(&mut m)
            .and(&mut v)
            .for_each(|p, &g, m, v| {
                *m = b1 * *m + c1 * g;
                *v = b2 * *v + c2 * g * g;
                *p -= step_size * *m / (v.sqrt() + eps);
            });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::NgarConfig;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let cfg = NgarConfig::default().with_width(2);
        let mut p = NgarParams::<f64>::zeros(&cfg, 2, 1);
        let mut g = p.zeros_like();
        g.conv1.w[[0, 0]] = 3.0;
        g.conv1.w[[0, 1]] = -0.01;
        let mut state = AdamState {
            m: p.zeros_like(),
            v: p.zeros_like(),
            step: 0,
        };
        adam_step(&mut p, &mut state, &g, 0.1);
        assert!((p.conv1.w[[0, 0]] + 0.1).abs() < 1e-6);
        assert!((p.conv1.w[[0, 1]] - 0.1).abs() < 1e-4);
        assert_eq!(p.conv2.w[[0, 0]], 0.0);
        assert_eq!(state.step, 1);
    }
}
