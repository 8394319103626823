use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::space::GraphSpace;

/// Largest graph handled by the dense eigendecomposition.
pub const SPECTRAL_CAP: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatMethod {
    /// Full eigendecomposition of the normalized Laplacian.
    Spectral,
    /// Lanczos projection built per pole.
    Krylov,
}

/// Kernel row `p_t(x, ·)` as `scale ∘ basis · (exp(-t θ) ∘ coef)`.
#[derive(Debug)]
pub(crate) struct Expansion {
    basis: DMatrix<f64>,
    theta: Vec<f64>,
    coef: Vec<f64>,
    /// `1 / sqrt(μ(x) μ(y))` per vertex `y`.
    scale: Vec<f64>,
}

impl Expansion {
    /// Spectral coefficients `c_k(t) = exp(-t θ_k) coef_k`.
    pub(crate) fn weights(&self, t: f64) -> Vec<f64> {
        self.theta
            .iter()
            .zip(&self.coef)
            .map(|(th, c)| (-t * th.max(0.0)).exp() * c)
            .collect()
    }

    pub(crate) fn dim(&self) -> usize {
        self.coef.len()
    }

    /// Map a coefficient vector back to a vertex field.
    pub(crate) fn synthesize(&self, w: &[f64]) -> Vec<f64> {
        let n = self.basis.nrows();
        let mut out = vec![0.0; n];
        for (k, &wk) in w.iter().enumerate() {
            if wk == 0.0 {
                continue;
            }
            let col = self.basis.column(k);
            for y in 0..n {
                out[y] += wk * col[y];
            }
        }
        for (o, s) in out.iter_mut().zip(&self.scale) {
            *o *= s;
        }
        out
    }
}

struct Dense {
    vectors: DMatrix<f64>,
    values: Vec<f64>,
}

/// Heat semigroup of the weighted graph Laplacian.
pub struct HeatKernelEngine<'a> {
    space: &'a GraphSpace,
    method: HeatMethod,
    dense: OnceLock<Dense>,
    krylov: Mutex<HashMap<(usize, u64), Arc<Expansion>>>,
    /// Absolute accuracy target of the Krylov projection.
    pub krylov_tol: f64,
    pub max_krylov: usize,
}

impl<'a> HeatKernelEngine<'a> {
    /// Spectral below the size cap, Krylov above.
    pub fn new(space: &'a GraphSpace) -> Self {
        let method = if space.len() <= SPECTRAL_CAP {
            HeatMethod::Spectral
        } else {
            HeatMethod::Krylov
        };
        Self::build(space, method)
    }

    pub fn with_method(space: &'a GraphSpace, method: HeatMethod) -> Result<Self> {
        if method == HeatMethod::Spectral && space.len() > SPECTRAL_CAP {
            return Err(Error::param(format!(
                "spectral heat kernel limited to {SPECTRAL_CAP} vertices (got {})",
                space.len()
            )));
        }
        Ok(Self::build(space, method))
    }

    fn build(space: &'a GraphSpace, method: HeatMethod) -> Self {
        HeatKernelEngine {
            space,
            method,
            dense: OnceLock::new(),
            krylov: Mutex::new(HashMap::new()),
            krylov_tol: 1e-11,
            max_krylov: 400,
        }
    }

    pub fn space(&self) -> &GraphSpace {
        self.space
    }

    pub fn method(&self) -> HeatMethod {
        self.method
    }

    fn dense(&self) -> &Dense {
        self.dense.get_or_init(|| {
            let s = self.space;
            let n = s.len();
            let root: Vec<f64> = s.measures().iter().map(|m| m.sqrt()).collect();
            let mut a = DMatrix::<f64>::zeros(n, n);
            for e in s.edges() {
                let w = e.weight;
                a[(e.a, e.a)] += w / s.measure(e.a);
                a[(e.b, e.b)] += w / s.measure(e.b);
                let off = w / (root[e.a] * root[e.b]);
                a[(e.a, e.b)] -= off;
                a[(e.b, e.a)] -= off;
            }
            let eig = SymmetricEigen::new(a);
            Dense {
                vectors: eig.eigenvectors,
                values: eig.eigenvalues.iter().copied().collect(),
            }
        })
    }

    fn apply(&self, v: &[f64], out: &mut [f64], root: &[f64]) {
        let s = self.space;
        for x in 0..s.len() {
            let vx = v[x] / root[x];
            let acc: f64 = s.neighbors(x).map(|(y, w, _)| w * (vx - v[y] / root[y])).sum();
            out[x] = acc / root[x];
        }
    }

    /// Lanczos basis from `e_x`, extended until `exp(-t A) e_x` is resolved for all `t <= t_max`.
    fn lanczos(&self, x: usize, t_max: f64) -> Result<Expansion> {
        let s = self.space;
        let n = s.len();
        let root: Vec<f64> = s.measures().iter().map(|m| m.sqrt()).collect();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut q = vec![0.0; n];
        q[x] = 1.0;
        let mut w = vec![0.0; n];
        let probe: Vec<f64> = (0..8).map(|k| t_max / 4f64.powi(k)).collect();
        loop {
            self.apply(&q, &mut w, &root);
            let a: f64 = w.iter().zip(&q).map(|(p, r)| p * r).sum();
            basis.push(q.clone());
            alpha.push(a);
            // Full reorthogonalization keeps the projection stable at large m.
            for _ in 0..2 {
                for b in &basis {
                    let c: f64 = w.iter().zip(b).map(|(p, r)| p * r).sum();
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= c * bi;
                    }
                }
            }
            let b_next = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            let m = alpha.len();
            let (theta, vecs) = tridiagonal_eigen(&alpha, &beta);
            let err = probe
                .iter()
                .map(|&t| {
                    let last: f64 = (0..m)
                        .map(|k| vecs[(m - 1, k)] * (-t * theta[k].max(0.0)).exp() * vecs[(0, k)])
                        .sum();
                    b_next * last.abs()
                })
                .fold(0.0, f64::max);
            if err <= self.krylov_tol || b_next < 1e-13 || m == n {
                let big = DMatrix::<f64>::from_fn(n, m, |i, j| basis[j][i]);
                let projected = big * &vecs;
                return Ok(Expansion {
                    basis: projected,
                    theta,
                    coef: (0..m).map(|k| vecs[(0, k)]).collect(),
                    scale: root.iter().map(|r| 1.0 / (r * root[x])).collect(),
                });
            }
            if m >= self.max_krylov {
                return Err(Error::NonConvergence {
                    iterations: m,
                    residual: err,
                });
            }
            beta.push(b_next);
            for (qi, wi) in q.iter_mut().zip(&w) {
                *qi = wi / b_next;
            }
        }
    }

    pub(crate) fn expansion(&self, x: usize, t_max: f64) -> Result<Arc<Expansion>> {
        if x >= self.space.len() {
            return Err(Error::param(format!("vertex {x} out of range")));
        }
        match self.method {
            HeatMethod::Spectral => {
                let d = self.dense();
                let rx = self.space.measure(x).sqrt();
                Ok(Arc::new(Expansion {
                    basis: d.vectors.clone(),
                    theta: d.values.clone(),
                    coef: d.vectors.row(x).iter().copied().collect(),
                    scale: self.space.measures().iter().map(|m| 1.0 / (m.sqrt() * rx)).collect(),
                }))
            }
            HeatMethod::Krylov => {
                // Bucket the horizon by powers of two so nearby requests share a basis.
                let bucket = t_max.max(1e-12).log2().ceil();
                let key = (x, bucket.to_bits());
                if let Some(e) = self.krylov.lock().expect("cache lock").get(&key) {
                    return Ok(Arc::clone(e));
                }
                let e = Arc::new(self.lanczos(x, 2f64.powf(bucket))?);
                self.krylov
                    .lock()
                    .expect("cache lock")
                    .insert(key, Arc::clone(&e));
                Ok(e)
            }
        }
    }

    /// `p_t(x, ·)`, clamped at zero.
    pub fn heat_kernel(&self, t: f64, x: usize) -> Result<Field> {
        if !(t > 0.0) {
            return Err(Error::param("heat kernel needs t > 0"));
        }
        let e = self.expansion(x, t)?;
        let mut row = e.synthesize(&e.weights(t));
        for v in row.iter_mut() {
            *v = v.max(0.0);
        }
        Ok(Field::full(row))
    }
}

/// Eigenpairs of the symmetric tridiagonal matrix with diagonal `alpha` and off-diagonal `beta`.
fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let t = DMatrix::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_lattice, build_path};

    #[test]
    fn kernel_is_stochastic_and_symmetric() {
        let s = build_path(12).unwrap();
        let eng = HeatKernelEngine::new(&s);
        let p3 = eng.heat_kernel(0.7, 3).unwrap();
        let p8 = eng.heat_kernel(0.7, 8).unwrap();
        let mass: f64 = (0..12).map(|y| s.measure(y) * p3.value(y)).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!((p3.value(8) - p8.value(3)).abs() < 1e-14);
    }

    #[test]
    fn krylov_matches_dense() {
        let s = build_lattice(2, 3.0, 0.5).unwrap();
        let dense = HeatKernelEngine::with_method(&s, HeatMethod::Spectral).unwrap();
        let kry = HeatKernelEngine::with_method(&s, HeatMethod::Krylov).unwrap();
        let x = s.nearest_vertex(&[0.0, 0.0]).unwrap();
        for t in [0.05, 0.5, 3.0] {
            let a = dense.heat_kernel(t, x).unwrap();
            let b = kry.heat_kernel(t, x).unwrap();
            assert!(a.sup_distance(&b) < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn equilibrates_to_uniform() {
        let s = build_path(6).unwrap();
        let eng = HeatKernelEngine::new(&s);
        let p = eng.heat_kernel(500.0, 0).unwrap();
        for y in 0..6 {
            assert!((p.value(y) - 1.0 / 6.0).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_cap_enforced() {
        let s = build_lattice(2, 40.0, 1.0).unwrap();
        assert!(HeatKernelEngine::with_method(&s, HeatMethod::Spectral).is_err());
    }
}
