use std::io::{Read, Write};

use crate::binio::{read_f64, read_u32, read_u64, write_f64, write_u32, write_u64};
use crate::error::{Error, Result};

/// Adam over one parameter vector where only touched entries move. Each entry
/// keeps its own step count for bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct LazyAdam {
    m: Vec<f64>,
    v: Vec<f64>,
    steps: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl LazyAdam {
    pub fn new(len: usize) -> Self {
        LazyAdam { m: vec![0.0; len], v: vec![0.0; len], steps: vec![0; len] }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn steps(&self, i: usize) -> u32 {
        self.steps[i]
    }

    /// Updates `params[i]` for every `i` with `touched[i]` or a nonzero gradient.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], touched: &[bool], hp: AdamParams) {
        debug_assert_eq!(params.len(), self.len());
        debug_assert_eq!(grads.len(), self.len());
        for i in 0..params.len() {
            let g = grads[i];
            if g == 0.0 && !touched[i] {
                continue;
            }
            self.steps[i] += 1;
            let t = self.steps[i] as i32;
            self.m[i] = hp.beta1 * self.m[i] + (1.0 - hp.beta1) * g;
            self.v[i] = hp.beta2 * self.v[i] + (1.0 - hp.beta2) * g * g;
            let m_hat = self.m[i] / (1.0 - hp.beta1.powi(t));
            let v_hat = self.v[i] / (1.0 - hp.beta2.powi(t));
            params[i] -= hp.lr * m_hat / (v_hat.sqrt() + hp.eps);
        }
    }

    pub(crate) fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        write_u64(w, self.len() as u64)?;
        for i in 0..self.len() {
            write_f64(w, self.m[i])?;
            write_f64(w, self.v[i])?;
            write_u32(w, self.steps[i])?;
        }
        Ok(())
    }

    pub(crate) fn read_from<R: Read>(r: &mut R, expected_len: usize) -> Result<Self> {
        let what = "optimizer state";
        let len = read_u64(r, what)? as usize;
        if len != expected_len {
            return Err(Error::format(what, format!("{len} entries, expected {expected_len}")));
        }
        let mut adam = LazyAdam::new(len);
        for i in 0..len {
            adam.m[i] = read_f64(r, what)?;
            adam.v[i] = read_f64(r, what)?;
            adam.steps[i] = read_u32(r, what)?;
        }
        Ok(adam)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HP: AdamParams = AdamParams { lr: 0.1, beta1: 0.9, beta2: 0.999, eps: 1e-8 };

    #[test]
    fn first_step_moves_by_lr() {
        let mut adam = LazyAdam::new(3);
        let mut p = vec![1.0, 1.0, 1.0];
        adam.step(&mut p, &[2.0, 0.0, -0.5], &[false; 3], HP);
        assert!((p[0] - 0.9).abs() < 1e-7);
        assert_eq!(p[1], 1.0);
        assert!((p[2] - 1.1).abs() < 1e-7);
        assert_eq!((adam.steps(0), adam.steps(1)), (1, 0));
    }

    #[test]
    fn touched_zero_gradient_decays_moments() {
        let mut adam = LazyAdam::new(1);
        let mut p = vec![0.0];
        adam.step(&mut p, &[1.0], &[true], HP);
        let after_one = p[0];
        adam.step(&mut p, &[0.0], &[true], HP);
        assert_eq!(adam.steps(0), 2);
        assert!(p[0] < after_one);
    }

    #[test]
    fn minimizes_quadratic() {
        let mut adam = LazyAdam::new(2);
        let mut p = vec![3.0, -2.0];
        for _ in 0..2000 {
            let g: Vec<f64> = p.iter().map(|x| 2.0 * (x - 1.0)).collect();
            adam.step(&mut p, &g, &[true; 2], AdamParams { lr: 0.01, ..HP });
        }
        assert!(p.iter().all(|x| (x - 1.0).abs() < 1e-3), "{p:?}");
    }

    #[test]
    fn state_roundtrip() {
        let mut adam = LazyAdam::new(4);
        let mut p = vec![0.0; 4];
        adam.step(&mut p, &[1.0, 0.0, 2.0, -3.0], &[false; 4], HP);
        let mut buf = Vec::new();
        adam.write_to(&mut buf).unwrap();
        assert_eq!(LazyAdam::read_from(&mut buf.as_slice(), 4).unwrap(), adam);
        assert!(LazyAdam::read_from(&mut buf.as_slice(), 5).is_err());
        assert!(LazyAdam::read_from(&mut &buf[..buf.len() - 1], 4).is_err());
    }
}
