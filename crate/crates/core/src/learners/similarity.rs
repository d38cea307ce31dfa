use serde::{Deserialize, Serialize};

use crate::dynamics::{check_lateral, sm_activity, DynamicsConfig};
use crate::error::{Error, Result};
use crate::learners::StepOutcome;
use crate::linalg::{check_len, orthonormalize_columns, solve_matrix, Matrix};
use crate::rng::SeededRng;
use crate::scalar::Scalar;

/// Similarity-matching network: `m` output neurons with feedforward
/// weights `W` (`m × n`) and lateral inhibition `M` (`m × m`).
///
/// Activity settles at `M z = W x`; the synapses follow the gradients of
/// the min-max similarity objective, `ΔW ∝ z xᵀ − W` and `ΔM ∝ z zᵀ − M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatching<S> {
    pub w: Matrix<S>,
    pub m: Matrix<S>,
    pub eta_w: S,
    pub eta_m: S,
    pub dynamics: DynamicsConfig<S>,
}

impl<S: Scalar> SimilarityMatching<S> {
    /// `W` entries uniform in `[−0.1, 0.1)` drawn column by column from
    /// `seed`; `M = I`.
    pub fn new(n: usize, m: usize, eta_w: S, eta_m: S, seed: u64) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::param("m", m as f64, "must satisfy 1 <= m <= n"));
        }
        for (name, eta) in [("eta_w", eta_w), ("eta_m", eta_m)] {
            if !(eta > S::zero() && eta < S::one()) {
                return Err(Error::param(name, eta.to_f64_lossy(), "must lie in (0, 1)"));
            }
        }
        let mut rng = SeededRng::new(seed);
        let data = (0..m * n).map(|_| S::c(rng.uniform_in(-0.1, 0.1))).collect();
        Ok(Self {
            w: Matrix::from_col_major(m, n, data)?,
            m: Matrix::identity(m),
            eta_w,
            eta_m,
            dynamics: DynamicsConfig::default(),
        })
    }

    pub fn with_dynamics(mut self, dynamics: DynamicsConfig<S>) -> Result<Self> {
        dynamics.validate()?;
        self.dynamics = dynamics;
        Ok(self)
    }

    pub fn input_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn activity(&self, x: &[S]) -> Result<(Vec<S>, usize)> {
        check_len("input vs feedforward columns", self.input_dim(), x.len())?;
        let fp = sm_activity(&self.w, &self.m, x, &self.dynamics)?;
        Ok((fp.z, fp.iters))
    }

    pub fn step(&mut self, x: &[S]) -> Result<StepOutcome<S>> {
        let (ew, em) = (self.eta_w, self.eta_m);
        self.step_with_rates(x, ew, em)
    }

    /// One online step. The state is left untouched on error.
    pub fn step_with_rates(&mut self, x: &[S], eta_w: S, eta_m: S) -> Result<StepOutcome<S>> {
        let (z, iters) = self.activity(x)?;
        let (k, n) = self.w.shape();

        let mut w_next = self.w.clone();
        let mut dw = S::zero();
        for j in 0..n {
            for i in 0..k {
                let d = eta_w * (z[i] * x[j] - self.w[(i, j)]);
                w_next[(i, j)] = self.w[(i, j)] + d;
                dw = dw + d * d;
            }
        }
        let mut m_next = self.m.clone();
        let mut dm = S::zero();
        for j in 0..k {
            for i in 0..k {
                let d = eta_m * (z[i] * z[j] - self.m[(i, j)]);
                m_next[(i, j)] = self.m[(i, j)] + d;
                dm = dm + d * d;
            }
        }
        if !(w_next.is_finite() && m_next.is_finite()) {
            return Err(Error::NonFinite("similarity matching weights"));
        }
        check_lateral(&m_next)?;
        self.w = w_next;
        self.m = m_next;
        Ok(StepOutcome {
            z,
            update_norm: dw.sqrt() + dm.sqrt(),
            dynamics_iters: iters,
        })
    }

    /// Effective filters `F = M⁻¹ W`: the fixed-point map `x ↦ z`.
    pub fn filters(&self) -> Result<Matrix<S>> {
        solve_matrix(&self.m, &self.w)
    }

    /// Orthonormal basis (`n × m`) of the row space of the filters.
    pub fn filter_basis(&self) -> Result<Matrix<S>> {
        let f = self.filters()?;
        Ok(orthonormalize_columns(&f.transpose(), S::c(1e-10)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_net(w: f64, eta_w: f64, eta_m: f64) -> SimilarityMatching<f64> {
        SimilarityMatching {
            w: Matrix::from_diagonal(&[w]),
            m: Matrix::identity(1),
            eta_w,
            eta_m,
            dynamics: DynamicsConfig::default(),
        }
    }

    #[test]
    fn zero_input_is_pure_decay() {
        let mut net = SimilarityMatching::<f64>::new(3, 2, 0.1, 0.2, 4).unwrap();
        let w0 = net.w.clone();
        let m0 = net.m.clone();
        let out = net.step(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(out.z, vec![0.0, 0.0]);
        assert_eq!(net.w, w0.scaled(0.9));
        assert_eq!(net.m, m0.scaled(0.8));
    }

    #[test]
    fn scalar_network_step() {
        let mut net = unit_net(1.0, 0.1, 0.05);
        let out = net.step(&[2.0]).unwrap();
        assert_abs_diff_eq!(out.z[0], 2.0, epsilon = 1e-7);
        assert_abs_diff_eq!(net.w[(0, 0)], 1.0 + 0.1 * 3.0, epsilon = 1e-7);
        assert_abs_diff_eq!(net.m[(0, 0)], 1.0 + 0.05 * 3.0, epsilon = 1e-7);
    }

    #[test]
    fn lateral_matrix_stays_symmetric_positive_definite() {
        let mut net = SimilarityMatching::<f64>::new(4, 3, 0.05, 0.3, 1).unwrap();
        let mut rng = SeededRng::new(2);
        for _ in 0..200 {
            let x = rng.normal_vec(4);
            net.step(&x).unwrap();
            assert!(net.m.asymmetry() <= 1e-12);
            assert!(check_lateral(&net.m).is_ok());
        }
    }

    #[test]
    fn invalid_construction() {
        assert!(SimilarityMatching::<f64>::new(2, 3, 0.1, 0.1, 0).is_err());
        assert!(SimilarityMatching::<f64>::new(3, 2, 0.0, 0.1, 0).is_err());
        assert!(SimilarityMatching::<f64>::new(3, 2, 0.1, 1.0, 0).is_err());
    }

    #[test]
    fn seeded_initialization() {
        let a = SimilarityMatching::<f64>::new(5, 2, 0.1, 0.1, 9).unwrap();
        let b = SimilarityMatching::<f64>::new(5, 2, 0.1, 0.1, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.w.as_slice().iter().all(|v| v.abs() <= 0.1));
        assert_eq!(a.m, Matrix::identity(2));
    }
}
