//! Linear structural equation models with per-environment noise variances.
//!
//! Every environment shares the coefficient matrix `B`. Environment `e`
//! draws independent zero-mean Gaussian noise with variances
//! `noise_vars[e]`, and the variables are `X = A N` with `A = (I - B)^-1`.

mod data;
mod population;
mod random;

pub use data::EnvironmentData;
pub use population::{generic_sem, population_invariance_set, population_invariance_set_on, InvarianceCheck};
pub use random::{perturb_environment, random_sem, RandomSemConfig};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dag, MixedGraph};
use crate::varset::MAX_VARS;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSem {
    /// `b[(j, i)]` is the weight of parent `i` in the equation of child `j`.
    b: DMatrix<f64>,
    noise_vars: Vec<Vec<f64>>,
    names: Option<Vec<String>>,
    order: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct SemJson {
    p: usize,
    names: Option<Vec<String>>,
    /// Row-major, `b[j][i]` is the weight of `i -> j`.
    b: Vec<Vec<f64>>,
    noise_vars: Vec<Vec<f64>>,
}

impl LinearSem {
    pub fn new(b: DMatrix<f64>, noise_vars: Vec<Vec<f64>>) -> Result<Self> {
        let p = b.nrows();
        if b.ncols() != p {
            return Err(Error::InvalidModel("coefficient matrix must be square".into()));
        }
        if p == 0 || p > MAX_VARS {
            return Err(Error::InvalidModel(format!("need 1..={MAX_VARS} variables, got {p}")));
        }
        if noise_vars.is_empty() {
            return Err(Error::InvalidModel("at least one environment is required".into()));
        }
        for (e, vars) in noise_vars.iter().enumerate() {
            if vars.len() != p {
                return Err(Error::InvalidModel(format!(
                    "environment {e} has {} variances",
                    vars.len()
                )));
            }
            if let Some(v) = vars.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::InvalidModel(format!("environment {e} has noise variance {v}")));
            }
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("non-finite coefficient".into()));
        }
        let order = support(&b)?
            .directed_topological_order()
            .ok_or_else(|| Error::InvalidModel("coefficient support has a directed cycle".into()))?;
        Ok(LinearSem {
            b,
            noise_vars,
            names: None,
            order,
        })
    }

    /// Model from weighted edges `(parent, child, weight)`.
    pub fn from_edges(p: usize, edges: &[(usize, usize, f64)], noise_vars: Vec<Vec<f64>>) -> Result<Self> {
        let mut b = DMatrix::zeros(p, p);
        for &(i, j, w) in edges {
            if i >= p || j >= p || i == j {
                return Err(Error::InvalidEdge(i, j, p));
            }
            b[(j, i)] = w;
        }
        LinearSem::new(b, noise_vars)
    }

    pub fn with_names(mut self, names: Option<Vec<String>>) -> Self {
        if let Some(n) = &names {
            assert_eq!(n.len(), self.p(), "one name per variable");
        }
        self.names = names;
        self
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Names, falling back to `x1..xp`.
    pub fn variable_names(&self) -> Vec<String> {
        match &self.names {
            Some(n) => n.clone(),
            None => (1..=self.p()).map(|i| format!("x{i}")).collect(),
        }
    }

    pub fn p(&self) -> usize {
        self.b.nrows()
    }

    pub fn n_envs(&self) -> usize {
        self.noise_vars.len()
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// Weight of the edge `parent -> child` (zero when absent).
    pub fn weight(&self, parent: usize, child: usize) -> f64 {
        self.b[(child, parent)]
    }

    pub fn noise_vars(&self, env: usize) -> &[f64] {
        &self.noise_vars[env]
    }

    pub fn all_noise_vars(&self) -> &[Vec<f64>] {
        &self.noise_vars
    }

    /// Causal order of the variables.
    pub fn causal_order(&self) -> &[usize] {
        &self.order
    }

    pub fn dag(&self) -> Dag {
        Dag::try_from_mixed(support(&self.b).expect("support checked at construction"))
            .expect("support checked acyclic at construction")
            .with_names(self.names.clone())
    }

    /// Appends an environment with the given noise variances.
    pub fn with_environment(&self, noise_vars: Vec<f64>) -> Result<Self> {
        let mut all = self.noise_vars.clone();
        all.push(noise_vars);
        Ok(LinearSem::new(self.b.clone(), all)?.with_names(self.names.clone()))
    }

    /// `A = (I - B)^-1`. Entry `(t, s)` sums the weights of all directed
    /// paths `s -> .. -> t`.
    pub fn mixing_matrix(&self) -> Result<DMatrix<f64>> {
        let p = self.p();
        let m = DMatrix::<f64>::identity(p, p) - &self.b;
        m.try_inverse()
            .ok_or_else(|| Error::DegenerateModel("I - B is singular".into()))
    }

    /// Population covariance `A Λ Aᵀ` in environment `env`.
    pub fn covariance(&self, env: usize) -> Result<DMatrix<f64>> {
        self.check_env(env)?;
        let a = self.mixing_matrix()?;
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.noise_vars[env]));
        Ok(&a * lambda * a.transpose())
    }

    fn check_env(&self, env: usize) -> Result<()> {
        if env >= self.n_envs() {
            return Err(Error::InvalidRequest(format!(
                "environment {env} out of range ({} environments)",
                self.n_envs()
            )));
        }
        Ok(())
    }

    /// Draws `n` iid rows from environment `env`. Deterministic in `seed`.
    pub fn sample(&self, env: usize, n: usize, seed: u64) -> Result<EnvironmentData> {
        self.check_env(env)?;
        let p = self.p();
        if n <= p {
            return Err(Error::InvalidRequest(format!("need more than {p} samples, got {n}")));
        }
        let sd: Vec<f64> = self.noise_vars[env].iter().map(|v| v.sqrt()).collect();
        let parents: Vec<Vec<(usize, f64)>> = (0..p)
            .map(|j| {
                (0..p)
                    .filter(|&i| self.b[(j, i)] != 0.0)
                    .map(|i| (i, self.b[(j, i)]))
                    .collect()
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = DMatrix::<f64>::zeros(n, p);
        let mut row = vec![0.0; p];
        for r in 0..n {
            // Noise is drawn in index order so the stream does not depend on
            // the causal order.
            for (j, slot) in row.iter_mut().enumerate() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *slot = sd[j] * z;
            }
            for &j in &self.order {
                row[j] += parents[j].iter().map(|&(i, w)| w * row[i]).sum::<f64>();
            }
            for j in 0..p {
                x[(r, j)] = row[j];
            }
        }
        EnvironmentData::new(format!("env{env}"), self.variable_names(), x)
    }

    pub fn to_json(&self) -> String {
        let p = self.p();
        let v = SemJson {
            p,
            names: self.names.clone(),
            b: (0..p).map(|j| (0..p).map(|i| self.b[(j, i)]).collect()).collect(),
            noise_vars: self.noise_vars.clone(),
        };
        serde_json::to_string_pretty(&v).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: SemJson = serde_json::from_str(s)?;
        if v.b.len() != v.p || v.b.iter().any(|r| r.len() != v.p) {
            return Err(Error::InvalidModel("B must be p x p".into()));
        }
        let b = DMatrix::from_fn(v.p, v.p, |j, i| v.b[j][i]);
        if v.names.as_ref().is_some_and(|n| n.len() != v.p) {
            return Err(Error::InvalidModel("names length differs from p".into()));
        }
        Ok(LinearSem::new(b, v.noise_vars)?.with_names(v.names))
    }
}

fn support(b: &DMatrix<f64>) -> Result<MixedGraph> {
    let p = b.nrows();
    let mut g = MixedGraph::new(p);
    for j in 0..p {
        for i in 0..p {
            if b[(j, i)] != 0.0 {
                g.add_directed(i, j)
                    .map_err(|_| Error::InvalidModel("coefficient support has a directed cycle".into()))?;
            }
        }
    }
    Ok(g)
}
