use crate::backbone::EmbeddingTable;
use crate::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// First and second moments for a list of parameter tables.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<EmbeddingTable>,
    pub v: Vec<EmbeddingTable>,
    pub step: u64,
}

impl AdamState {
    pub fn new(shapes: &[(usize, usize)]) -> Self {
        let zeros = || shapes.iter().map(|&(r, d)| EmbeddingTable::zeros(r, d)).collect();
        Self {
            m: zeros(),
            v: zeros(),
            step: 0,
        }
    }
}

/// Bias-corrected Adam update. `l2` adds `2 * l2 * param` to each gradient.
pub fn adam_step(
    params: &mut [&mut EmbeddingTable],
    grads: &[&EmbeddingTable],
    state: &mut AdamState,
    lr: f64,
    l2: f64,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} params, {} grads, {} moment tables",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    for ((p, g), m) in params.iter().zip(grads).zip(&state.m) {
        if p.shape() != g.shape() || p.shape() != m.shape() {
            return Err(Error::ShapeMismatch(format!(
                "param {:?}, grad {:?}, moment {:?}",
                p.shape(),
                g.shape(),
                m.shape()
            )));
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - BETA1.powi(t);
    let c2 = 1.0 - BETA2.powi(t);
    for (k, p) in params.iter_mut().enumerate() {
        let g = grads[k].as_slice();
        let m = state.m[k].as_mut_slice();
        let v = state.v[k].as_mut_slice();
        for (j, w) in p.as_mut_slice().iter_mut().enumerate() {
            let gj = g[j] + 2.0 * l2 * *w;
            m[j] = BETA1 * m[j] + (1.0 - BETA1) * gj;
            v[j] = BETA2 * v[j] + (1.0 - BETA2) * gj * gj;
            let m_hat = m[j] / c1;
            let v_hat = v[j] / c2;
            *w -= lr * m_hat / (v_hat.sqrt() + EPSILON);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(vals: &[f64]) -> EmbeddingTable {
        EmbeddingTable::from_values(1, vals.len(), vals.to_vec()).unwrap()
    }

    #[test]
    fn first_step_moves_lr_against_gradient_sign() {
        let mut p = table(&[0.5, -0.25, 1.0]);
        let g = table(&[3.0, -0.02, 0.7]);
        let mut st = AdamState::new(&[(1, 3)]);
        adam_step(&mut [&mut p], &[&g], &mut st, 1e-3, 0.0).unwrap();
        // m_hat = g, v_hat = g^2 on step 1: delta = lr * g / (|g| + eps)
        let expect = [0.5 - 1e-3 * 3.0 / (3.0 + EPSILON), -0.25 + 1e-3 * 0.02 / (0.02 + EPSILON), 1.0 - 1e-3 * 0.7 / (0.7 + EPSILON)];
        for (a, b) in p.as_slice().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((0.5 - p.as_slice()[0] - 1e-3).abs() < 1e-10);
    }

    #[test]
    fn zero_gradient_is_a_no_op_but_counts() {
        let mut p = table(&[0.1, 0.2]);
        let g = table(&[0.0, 0.0]);
        let mut st = AdamState::new(&[(1, 2)]);
        adam_step(&mut [&mut p], &[&g], &mut st, 1e-3, 0.0).unwrap();
        assert_eq!(p.as_slice(), &[0.1, 0.2]);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn l2_pulls_toward_zero() {
        let mut p = table(&[1.0]);
        let g = table(&[0.0]);
        let mut st = AdamState::new(&[(1, 1)]);
        adam_step(&mut [&mut p], &[&g], &mut st, 1e-2, 1e-3).unwrap();
        assert!(p.as_slice()[0] < 1.0);
    }

    #[test]
    fn deterministic_and_shape_checked() {
        let run = || {
            let mut p = table(&[0.3, -0.3]);
            let mut st = AdamState::new(&[(1, 2)]);
            for s in 0..5 {
                let g = table(&[s as f64 * 0.1, -0.2]);
                adam_step(&mut [&mut p], &[&g], &mut st, 1e-3, 1e-5).unwrap();
            }
            (p, st)
        };
        assert_eq!(run(), run());
        let mut p = table(&[0.3, -0.3]);
        let g = table(&[0.3]);
        let mut st = AdamState::new(&[(1, 2)]);
        assert!(adam_step(&mut [&mut p], &[&g], &mut st, 1e-3, 0.0).is_err());
    }
}
