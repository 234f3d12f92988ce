use super::tensor::{check_coercivity, SymTensor};
use crate::error::{invalid, Result};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Cellwise-constant permittivity and permeability.
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialField {
    pub eps: Vec<SymTensor<f64>>,
    pub mu: Vec<SymTensor<f64>>,
    pub bounds: (f64, f64),
}

impl MaterialField {
    pub fn new(eps: Vec<SymTensor<f64>>, mu: Vec<SymTensor<f64>>, bounds: (f64, f64)) -> Result<Self> {
        if eps.len() != mu.len() {
            return Err(crate::Error::Dimension { expected: eps.len(), got: mu.len() });
        }
        for (i, t) in eps.iter().chain(mu.iter()).enumerate() {
            if !check_coercivity(t, bounds.0, bounds.1)? {
                return invalid(format!("tensor {i} outside bounds [{}, {}]", bounds.0, bounds.1));
            }
        }
        Ok(MaterialField { eps, mu, bounds })
    }

    pub fn uniform(ncells: usize, eps: SymTensor<f64>, mu: SymTensor<f64>) -> Result<Self> {
        let lo = eps.eigenvalues()[0].min(mu.eigenvalues()[0]);
        let hi = eps.eigenvalues()[2].max(mu.eigenvalues()[2]);
        Self::new(vec![eps; ncells], vec![mu; ncells], (lo, hi))
    }

    pub fn vacuum(ncells: usize) -> Self {
        let i = SymTensor::identity();
        MaterialField { eps: vec![i; ncells], mu: vec![i; ncells], bounds: (1.0, 1.0) }
    }

    pub fn ncells(&self) -> usize {
        self.eps.len()
    }
}

/// Haar-random rotation matrix from a normalized Gaussian quaternion.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> [[f64; 3]; 3] {
    let mut q = [0.0f64; 4];
    loop {
        for v in q.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            q.iter_mut().for_each(|x| *x /= n);
            break;
        }
    }
    let [w, x, y, z] = q;
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

/// Random tensor with eigenvalues uniform in `[alpha, beta]` and a random frame.
pub fn random_tensor<R: Rng + ?Sized>(rng: &mut R, alpha: f64, beta: f64) -> SymTensor<f64> {
    if alpha == beta {
        return SymTensor::scalar(alpha);
    }
    let w: [f64; 3] = std::array::from_fn(|_| rng.random_range(alpha..=beta));
    let r = random_rotation(rng);
    let t = SymTensor::diag(w[0], w[1], w[2]).congruence(&r);
    // keep the stored tensor inside the bounds despite rounding in the congruence
    let (ev, v) = t.eigen();
    SymTensor::from_spectrum(ev.map(|x| x.clamp(alpha, beta)), &v)
}

/// Random cellwise field with both `eps` and `mu` drawn in `[alpha, beta]`.
pub fn random_field<R: Rng + ?Sized>(rng: &mut R, ncells: usize, alpha: f64, beta: f64) -> MaterialField {
    let eps = (0..ncells).map(|_| random_tensor(rng, alpha, beta)).collect();
    let mu = (0..ncells).map(|_| random_tensor(rng, alpha, beta)).collect();
    MaterialField { eps, mu, bounds: (alpha, beta) }
}
