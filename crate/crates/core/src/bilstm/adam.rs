use super::params::BilstmParams;

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: BilstmParams,
    pub second_moment: BilstmParams,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &BilstmParams) -> Self {
        AdamState {
            first_moment: params.zeros_like(),
            second_moment: params.zeros_like(),
            step: 0,
        }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(
    params: &mut BilstmParams,
    grads: &BilstmParams,
    state: &mut AdamState,
    config: &AdamConfig,
) {
    state.step += 1;
    let t = state.step as i32;
    let AdamConfig {
        learning_rate: lr,
        beta1: b1,
        beta2: b2,
        epsilon: eps,
    } = *config;
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    let tensors = params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.first_moment.tensors_mut())
        .zip(state.second_moment.tensors_mut());
    for (((p, g), m), v) in tensors {
        for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilstm::params::NetworkShape;

    fn params() -> BilstmParams {
        BilstmParams::zeros(NetworkShape { input_size: 2, hidden_size: 2, num_layers: 1 }).unwrap()
    }

    fn filled(value: f64) -> BilstmParams {
        let mut p = params();
        p.tensors_mut().into_iter().for_each(|t| t.fill(value));
        p
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let cfg = AdamConfig::default();
        for g in [0.37, -2.5] {
            let mut p = params();
            let mut state = AdamState::new(&p);
            adam_step(&mut p, &filled(g), &mut state, &cfg);
            assert_eq!(state.step, 1);
            for v in p.tensors().iter().flat_map(|t| t.iter()) {
                // |g| / (|g| + eps)
                assert!((v + cfg.learning_rate * g.signum()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = filled(0.25);
        let before = p.clone();
        let mut state = AdamState::new(&p);
        adam_step(&mut p, &params(), &mut state, &AdamConfig::default());
        assert_eq!(p, before);
    }

    #[test]
    fn two_steps_follow_closed_form() {
        let cfg = AdamConfig::default();
        let g = 0.8;
        let mut p = params();
        let mut state = AdamState::new(&p);
        adam_step(&mut p, &filled(g), &mut state, &cfg);
        let after_one = p.tensors()[0][0];
        adam_step(&mut p, &filled(g), &mut state, &cfg);
        let after_two = p.tensors()[0][0];

        let (b1, b2, lr, eps) = (cfg.beta1, cfg.beta2, cfg.learning_rate, cfg.epsilon);
        let m1 = (1.0 - b1) * g;
        let v1 = (1.0 - b2) * g * g;
        let u1 = lr * (m1 / (1.0 - b1)) / ((v1 / (1.0 - b2)).sqrt() + eps);
        let m2 = b1 * m1 + (1.0 - b1) * g;
        let v2 = b2 * v1 + (1.0 - b2) * g * g;
        let u2 = lr * (m2 / (1.0 - b1 * b1)) / ((v2 / (1.0 - b2 * b2)).sqrt() + eps);
        assert!((after_one + u1).abs() < 1e-12);
        assert!((after_two - after_one + u2).abs() < 1e-12);
        assert!(u2 <= u1 + 1e-12);
    }
}
