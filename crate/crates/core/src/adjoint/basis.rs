//! Polynomial feature maps on standardized states.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BasisFamily {
    #[default]
    Polynomial,
}

/// Ridge penalty on every non-intercept coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Ridge {
    /// `λ = value · Σ w_i` (with unit weights, `value · n`).
    PerSample(f64),
    Absolute(f64),
}

impl Ridge {
    pub fn lambda(&self, total_weight: f64) -> f64 {
        match *self {
            Ridge::PerSample(c) => c * total_weight,
            Ridge::Absolute(l) => l,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(*self, Ridge::PerSample(c) | Ridge::Absolute(c) if c == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionBasis {
    #[serde(default)]
    pub family: BasisFamily,
    pub degree: usize,
    pub ridge: Ridge,
}

impl RegressionBasis {
    pub fn polynomial(degree: usize) -> Self {
        Self { family: BasisFamily::Polynomial, degree, ridge: Ridge::PerSample(1e-8) }
    }

    pub fn with_ridge(mut self, ridge: Ridge) -> Self {
        self.ridge = ridge;
        self
    }

    /// Number of basis functions for a `dim_x`-dimensional state with every
    /// coordinate active.
    pub fn n_functions(&self, dim_x: usize) -> usize {
        monomials(dim_x, self.degree).len()
    }
}

impl Default for RegressionBasis {
    fn default() -> Self {
        Self::polynomial(3)
    }
}

/// All exponent vectors over `dims` variables with total degree ≤ `degree`,
/// ordered by total degree; the first entry is the constant monomial.
pub(crate) fn monomials(dims: usize, degree: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; dims]];
    let mut frontier = vec![vec![0u32; dims]];
    for _ in 0..degree {
        let mut next = Vec::new();
        for e in &frontier {
            // Only raise coordinates at or after the last non-zero one so each
            // monomial is generated once.
            let start = e.iter().rposition(|&p| p > 0).unwrap_or(0);
            for k in start..dims {
                let mut f = e.clone();
                f[k] += 1;
                next.push(f);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// State → feature vector. Coordinates are centered and scaled by the sample
/// moments they were fitted on; coordinates that are constant across the
/// sample are dropped, which collapses the basis towards the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    dim_x: usize,
    active: Vec<usize>,
    center: Vec<f64>,
    scale: Vec<f64>,
    exponents: Vec<Vec<u32>>,
}

impl FeatureMap {
    pub fn fit(states: &[f64], dim_x: usize, degree: usize, weights: Option<&[f64]>) -> Self {
        let n = states.len() / dim_x.max(1);
        let mut active = Vec::new();
        let mut center = Vec::new();
        let mut scale = Vec::new();
        for k in 0..dim_x {
            let (mut sw, mut s1) = (0.0, 0.0);
            for i in 0..n {
                let w = weights.map_or(1.0, |w| w[i]);
                sw += w;
                s1 += w * states[i * dim_x + k];
            }
            if sw <= 0.0 {
                continue;
            }
            let mean = s1 / sw;
            let mut s2 = 0.0;
            for i in 0..n {
                let w = weights.map_or(1.0, |w| w[i]);
                let d = states[i * dim_x + k] - mean;
                s2 += w * d * d;
            }
            let sd = (s2 / sw).sqrt();
            if sd > 1e-12 * (1.0 + mean.abs()) && sd.is_finite() {
                active.push(k);
                center.push(mean);
                scale.push(sd);
            }
        }
        let exponents = monomials(active.len(), if active.is_empty() { 0 } else { degree });
        Self { dim_x, active, center, scale, exponents }
    }

    /// Intercept-only map.
    pub fn constant(dim_x: usize) -> Self {
        Self { dim_x, active: vec![], center: vec![], scale: vec![], exponents: vec![vec![]] }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn dim_x(&self) -> usize {
        self.dim_x
    }

    pub fn is_constant(&self) -> bool {
        self.exponents.len() == 1
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        if self.active.len() == 1 {
            let z = (x[self.active[0]] - self.center[0]) / self.scale[0];
            let mut p = 1.0;
            for o in out.iter_mut() {
                *o = p;
                p *= z;
            }
            return;
        }
        let mut z = [0.0f64; 16];
        let zs: Vec<f64>;
        let zref: &[f64] = if self.active.len() <= 16 {
            for (j, &k) in self.active.iter().enumerate() {
                z[j] = (x[k] - self.center[j]) / self.scale[j];
            }
            &z[..self.active.len()]
        } else {
            zs = self.active.iter().enumerate().map(|(j, &k)| (x[k] - self.center[j]) / self.scale[j]).collect();
            &zs
        };
        for (o, e) in out.iter_mut().zip(&self.exponents) {
            *o = e.iter().zip(zref).fold(1.0, |acc, (&p, &v)| acc * v.powi(p as i32));
        }
    }

    pub fn features(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval(x, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(1, 3).len(), 4);
        assert_eq!(monomials(2, 2).len(), 6);
        assert_eq!(monomials(3, 3).len(), 20);
        assert_eq!(monomials(2, 0), vec![vec![0, 0]]);
        assert_eq!(RegressionBasis::polynomial(3).n_functions(2), 10);
    }

    #[test]
    fn monomials_unique() {
        let m = monomials(3, 4);
        let mut s = m.clone();
        s.sort();
        s.dedup();
        assert_eq!(s.len(), m.len());
    }

    #[test]
    fn constant_coordinates_dropped() {
        let states = vec![1.0, 5.0, 2.0, 5.0, 3.0, 5.0];
        let fm = FeatureMap::fit(&states, 2, 2, None);
        assert_eq!(fm.len(), 3);
        let f = fm.features(&[2.0, 5.0]);
        assert_eq!(f[0], 1.0);
        assert!(f[1].abs() < 1e-15);
    }

    #[test]
    fn all_constant_gives_intercept() {
        let fm = FeatureMap::fit(&[0.3; 10], 1, 3, None);
        assert!(fm.is_constant());
        assert_eq!(fm.features(&[4.0]), vec![1.0]);
    }
}
