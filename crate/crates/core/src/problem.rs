//! Finite-horizon LQG problem data and its JSON form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, RMatrix, RVector};

/// Time-invariant LQG data.
///
/// Dynamics `x_{k+1} = A x_k + B u_k + w_k`, measurements
/// `y_{k+1} = C x_k + v_k`, stage cost `xᵀMx + uᵀNu + 2xᵀSu`, terminal cost
/// `xᵀM_T x`. The noise pair `(w_k, v_k)` has joint covariance
/// `Δ = [[Σ, Υ], [Υᵀ, Γ]]`; the initial state is `N(μ₀, R₀)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LqgProblem {
    pub a: RMatrix,
    pub b: RMatrix,
    pub c: RMatrix,
    pub m: RMatrix,
    pub n: RMatrix,
    pub s: RMatrix,
    pub m_t: RMatrix,
    pub sigma: RMatrix,
    pub gamma: RMatrix,
    pub upsilon: RMatrix,
    pub mu0: RVector,
    pub r0: RMatrix,
    pub horizon: usize,
}

const SYMMETRY_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-10;

impl LqgProblem {
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    /// Joint noise covariance `[[Σ, Υ], [Υᵀ, Γ]]`.
    pub fn noise_covariance(&self) -> RMatrix {
        let (n, p) = (self.state_dim(), self.output_dim());
        let mut d = RMatrix::zeros(n + p, n + p);
        d.view_mut((0, 0), (n, n)).copy_from(&self.sigma);
        d.view_mut((0, n), (n, p)).copy_from(&self.upsilon);
        d.view_mut((n, 0), (p, n)).copy_from(&self.upsilon.transpose());
        d.view_mut((n, n), (p, p)).copy_from(&self.gamma);
        d
    }

    /// Cost weight `[[M, S], [Sᵀ, N]]`.
    pub fn cost_weight(&self) -> RMatrix {
        let (n, m) = (self.state_dim(), self.input_dim());
        let mut w = RMatrix::zeros(n + m, n + m);
        w.view_mut((0, 0), (n, n)).copy_from(&self.m);
        w.view_mut((0, n), (n, m)).copy_from(&self.s);
        w.view_mut((n, 0), (m, n)).copy_from(&self.s.transpose());
        w.view_mut((n, n), (m, m)).copy_from(&self.n);
        w
    }

    /// Checks shapes, finiteness, symmetry and definiteness.
    pub fn validate(&self) -> Result<()> {
        let (n, m, p) = (self.state_dim(), self.input_dim(), self.output_dim());
        if n == 0 || m == 0 || p == 0 {
            return Err(Error::InvalidProblem("dimensions must be at least 1".into()));
        }
        let shapes: [(&str, &RMatrix, usize, usize); 11] = [
            ("A", &self.a, n, n),
            ("B", &self.b, n, m),
            ("C", &self.c, p, n),
            ("M", &self.m, n, n),
            ("N", &self.n, m, m),
            ("S", &self.s, n, m),
            ("M_T", &self.m_t, n, n),
            ("Sigma", &self.sigma, n, n),
            ("Gamma", &self.gamma, p, p),
            ("Upsilon", &self.upsilon, n, p),
            ("R0", &self.r0, n, n),
        ];
        for (name, mat, r, c) in shapes {
            if mat.shape() != (r, c) {
                return Err(Error::InvalidProblem(format!(
                    "{name} is {}x{}, expected {r}x{c}",
                    mat.nrows(),
                    mat.ncols()
                )));
            }
            if mat.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidProblem(format!("{name} has non-finite entries")));
            }
        }
        if self.mu0.len() != n {
            return Err(Error::InvalidProblem(format!(
                "mu0 has length {}, expected {n}",
                self.mu0.len()
            )));
        }
        if self.mu0.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidProblem("mu0 has non-finite entries".into()));
        }
        for (name, mat) in [
            ("M", &self.m),
            ("N", &self.n),
            ("M_T", &self.m_t),
            ("Sigma", &self.sigma),
            ("Gamma", &self.gamma),
            ("R0", &self.r0),
        ] {
            let scale = mat.amax().max(1.0);
            if (mat - mat.transpose()).amax() > SYMMETRY_TOL * scale {
                return Err(Error::InvalidProblem(format!("{name} is not symmetric")));
            }
        }
        let psd = |name: &str, mat: &RMatrix| -> Result<()> {
            let scale = mat.amax().max(1.0);
            if min_eigenvalue(mat) < -PSD_TOL * scale {
                return Err(Error::InvalidProblem(format!("{name} is not positive semidefinite")));
            }
            Ok(())
        };
        let pd = |name: &str, mat: &RMatrix| -> Result<()> {
            let scale = mat.amax().max(1.0);
            if min_eigenvalue(mat) <= PSD_TOL * scale {
                return Err(Error::InvalidProblem(format!("{name} is not positive definite")));
            }
            Ok(())
        };
        psd("[[M, S], [S^T, N]]", &self.cost_weight())?;
        psd("M_T", &self.m_t)?;
        pd("N", &self.n)?;
        pd("Gamma", &self.gamma)?;
        psd("[[Sigma, Upsilon], [Upsilon^T, Gamma]]", &self.noise_covariance())?;
        psd("Sigma", &self.sigma)?;
        psd("R0", &self.r0)?;
        Ok(())
    }

    /// Copy with a different horizon.
    pub fn with_horizon(&self, horizon: usize) -> Self {
        LqgProblem {
            horizon,
            ..self.clone()
        }
    }
}

/// JSON form of [`LqgProblem`]: matrices as row-major nested arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "M")]
    pub m: Vec<Vec<f64>>,
    #[serde(rename = "N")]
    pub n: Vec<Vec<f64>>,
    #[serde(rename = "S")]
    pub s: Vec<Vec<f64>>,
    #[serde(rename = "M_T")]
    pub m_t: Vec<Vec<f64>>,
    #[serde(rename = "Sigma")]
    pub sigma: Vec<Vec<f64>>,
    #[serde(rename = "Gamma")]
    pub gamma: Vec<Vec<f64>>,
    #[serde(rename = "Upsilon")]
    pub upsilon: Vec<Vec<f64>>,
    pub mu0: Vec<f64>,
    #[serde(rename = "R0")]
    pub r0: Vec<Vec<f64>>,
    #[serde(rename = "T")]
    pub horizon: usize,
}

fn to_matrix(name: &str, rows: &[Vec<f64>]) -> Result<RMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(Error::InvalidProblem(format!("{name} is empty")));
    }
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::InvalidProblem(format!("{name} has ragged rows")));
    }
    Ok(RMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn from_matrix(m: &RMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

impl TryFrom<&ProblemSpec> for LqgProblem {
    type Error = Error;

    fn try_from(spec: &ProblemSpec) -> Result<Self> {
        let prob = LqgProblem {
            a: to_matrix("A", &spec.a)?,
            b: to_matrix("B", &spec.b)?,
            c: to_matrix("C", &spec.c)?,
            m: to_matrix("M", &spec.m)?,
            n: to_matrix("N", &spec.n)?,
            s: to_matrix("S", &spec.s)?,
            m_t: to_matrix("M_T", &spec.m_t)?,
            sigma: to_matrix("Sigma", &spec.sigma)?,
            gamma: to_matrix("Gamma", &spec.gamma)?,
            upsilon: to_matrix("Upsilon", &spec.upsilon)?,
            mu0: RVector::from_vec(spec.mu0.clone()),
            r0: to_matrix("R0", &spec.r0)?,
            horizon: spec.horizon,
        };
        prob.validate()?;
        Ok(prob)
    }
}

impl From<&LqgProblem> for ProblemSpec {
    fn from(p: &LqgProblem) -> Self {
        ProblemSpec {
            a: from_matrix(&p.a),
            b: from_matrix(&p.b),
            c: from_matrix(&p.c),
            m: from_matrix(&p.m),
            n: from_matrix(&p.n),
            s: from_matrix(&p.s),
            m_t: from_matrix(&p.m_t),
            sigma: from_matrix(&p.sigma),
            gamma: from_matrix(&p.gamma),
            upsilon: from_matrix(&p.upsilon),
            mu0: p.mu0.iter().copied().collect(),
            r0: from_matrix(&p.r0),
            horizon: p.horizon,
        }
    }
}

/// The one-dimensional system used throughout the examples and tests:
/// `A = B = C = M = N = M_T = 1`, `S = Σ = Υ = 0`, `Γ = R₀ = 1`, `μ₀ = 1`.
pub fn scalar_example(horizon: usize) -> LqgProblem {
    let one = RMatrix::from_element(1, 1, 1.0);
    let zero = RMatrix::zeros(1, 1);
    LqgProblem {
        a: one.clone(),
        b: one.clone(),
        c: one.clone(),
        m: one.clone(),
        n: one.clone(),
        s: zero.clone(),
        m_t: one.clone(),
        sigma: zero.clone(),
        gamma: one.clone(),
        upsilon: zero,
        mu0: RVector::from_element(1, 1.0),
        r0: one,
        horizon,
    }
}
